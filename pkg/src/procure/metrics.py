"""Attribution and aggregate evaluation metrics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, SchemaError
from .validate import TestHarness, Verdict, run_tests


def attribute(instruction: str, prefix: str, completion: str, harness: TestHarness) -> int:
    """Binary success of a completion: 1 iff the composed program passes the
    harness.  The instruction is carried for provenance only; the executable
    text is prefix + completion."""
    del instruction
    candidate = (prefix or "") + completion
    outcome = run_tests(candidate, harness)
    return 1 if outcome.verdict is Verdict.AcceptedByTests else 0


def pass_at_k(m: int, c: int, k: int) -> float:
    """Probability that at least one of k samples drawn without replacement
    from m (c of them correct) is correct, in the numerically stable product
    form."""
    for name, value in (("m", m), ("c", c), ("k", k)):
        if not isinstance(value, int) or isinstance(value, bool):
            raise DomainError(f"{name} must be an integer, got {value!r}")
    if m < 1 or not 0 <= c <= m or not 1 <= k <= m:
        raise DomainError(f"invalid arguments m={m} c={c} k={k}")
    if c == 0:
        return 0.0
    if m - c < k:
        return 1.0
    return 1.0 - math.prod(1.0 - k / i for i in range(m - c + 1, m + 1))


def ccs(pairs: Iterable[tuple[int, int]]) -> float | None:
    """Consistency between original and counterfactual verdicts.

    Counts agreement only over pairs where at least one side succeeded; when
    no such pair exists the score is undefined (None).
    """
    kept = 0
    agree = 0
    for a_orig, a_cf in pairs:
        for v in (a_orig, a_cf):
            if v not in (0, 1):
                raise DomainError(f"attributions must be 0 or 1, got {v!r}")
        if a_orig + a_cf > 0:
            kept += 1
            if a_orig == a_cf:
                agree += 1
    if kept == 0:
        return None
    return agree / kept


@dataclass(frozen=True)
class SuccessStats:
    per_cell: dict[tuple[str, str], float | None]
    per_dataset: dict[str, float | None]
    macro: float | None
    total_success: int
    total_eligible: int


def success_stats(
    cells: Mapping[str, Mapping[str, tuple[int, int]]]
) -> SuccessStats:
    """Aggregate per-concept (success, eligible) counts.

    Per-dataset rates are micro (sum of successes over sum of eligibles);
    the cross-dataset figure is the unweighted mean of dataset rates.
    """
    per_cell: dict[tuple[str, str], float | None] = {}
    per_dataset: dict[str, float | None] = {}
    total_success = 0
    total_eligible = 0
    for dataset_name, concepts in cells.items():
        ds_success = 0
        ds_eligible = 0
        for concept, (a, b) in concepts.items():
            if a < 0 or b < 0 or a > b:
                raise DomainError(
                    f"bad counts for {dataset_name}/{concept}: success={a} eligible={b}"
                )
            per_cell[(dataset_name, concept)] = (a / b) if b else None
            ds_success += a
            ds_eligible += b
        per_dataset[dataset_name] = (ds_success / ds_eligible) if ds_eligible else None
        total_success += ds_success
        total_eligible += ds_eligible
    defined = [r for r in per_dataset.values() if r is not None]
    macro = sum(defined) / len(defined) if defined else None
    return SuccessStats(
        per_cell=per_cell,
        per_dataset=per_dataset,
        macro=macro,
        total_success=total_success,
        total_eligible=total_eligible,
    )


# ---------------------------------------------------------------------------
# attribution tables (CLI eval input)


@dataclass(frozen=True)
class AttributionRow:
    task_id: str
    variant: str  # "original" or "cf:<Concept>"
    sample_index: int
    attributed: int


def read_attribution(path) -> list[AttributionRow]:
    rows = []
    seen: set[tuple[str, str, int]] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                payload = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, "<line>", f"invalid JSON: {exc}") from exc
            for field_name in ("task_id", "variant", "sample_index", "attributed"):
                if field_name not in payload:
                    raise SchemaError(lineno, field_name, "missing")
            if payload["attributed"] not in (0, 1):
                raise SchemaError(lineno, "attributed", "must be 0 or 1")
            if not isinstance(payload["sample_index"], int):
                raise SchemaError(lineno, "sample_index", "expected integer")
            key = (payload["task_id"], payload["variant"], payload["sample_index"])
            if key in seen:
                raise SchemaError(lineno, "sample_index", "duplicate row")
            seen.add(key)
            rows.append(
                AttributionRow(
                    task_id=payload["task_id"],
                    variant=payload["variant"],
                    sample_index=payload["sample_index"],
                    attributed=payload["attributed"],
                )
            )
    return rows


def mean_pass_at_k(rows: Sequence[AttributionRow], k: int) -> float | None:
    """Mean pass@k over tasks, computed from rows of the original variant.
    Tasks with fewer than k samples are skipped; None when all are."""
    by_task: dict[str, list[int]] = {}
    for row in rows:
        if row.variant == "original":
            by_task.setdefault(row.task_id, []).append(row.attributed)
    values = []
    for outcomes in by_task.values():
        m = len(outcomes)
        if m < k:
            continue
        values.append(pass_at_k(m, sum(outcomes), k))
    if not values:
        return None
    return sum(values) / len(values)


def ccs_from_rows(
    rows: Sequence[AttributionRow],
) -> tuple[float | None, dict[str, float | None]]:
    """Overall and per-concept consistency, pairing original and
    counterfactual rows on (task_id, sample_index)."""
    originals: dict[tuple[str, int], int] = {}
    for row in rows:
        if row.variant == "original":
            originals[(row.task_id, row.sample_index)] = row.attributed
    pairs_all: list[tuple[int, int]] = []
    pairs_by_concept: dict[str, list[tuple[int, int]]] = {}
    for row in rows:
        if not row.variant.startswith("cf:"):
            continue
        key = (row.task_id, row.sample_index)
        if key not in originals:
            continue
        pair = (originals[key], row.attributed)
        pairs_all.append(pair)
        pairs_by_concept.setdefault(row.variant[3:], []).append(pair)
    overall = ccs(pairs_all) if pairs_all else None
    per_concept = {name: ccs(pairs) for name, pairs in sorted(pairs_by_concept.items())}
    return overall, per_concept
