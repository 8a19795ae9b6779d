"""Dataset records, persistence, and batch planning.

The on-disk format is JSON Lines with a fixed key order per record, so two
runs over the same inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .diff import annotate_diff
from .errors import GroupTooLarge, OrphanCounterfactual, SchemaError

RECORD_FIELDS = (
    "task_id",
    "concept",
    "instruction",
    "original_code",
    "counterfactual_code",
    "diff_spans",
    "attempts",
    "verdict",
    "generator",
)

TASK_FIELDS = ("task_id", "prompt", "canonical_solution", "test", "entry_point")


@dataclass(frozen=True)
class TaskRecord:
    """One benchmark task: an instruction-bearing code prefix, a reference
    completion, and a unit-test suite that calls the entry point."""

    task_id: str
    prompt: str
    canonical_solution: str
    test: str
    entry_point: str

    @property
    def full_source(self) -> str:
        return self.prompt + self.canonical_solution


@dataclass(frozen=True)
class DatasetRecord:
    task_id: str
    concept: str
    instruction: str
    original_code: str
    counterfactual_code: str
    diff_spans: tuple[tuple[int, int], ...]
    attempts: int
    verdict: str
    generator: str

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "concept": self.concept,
            "instruction": self.instruction,
            "original_code": self.original_code,
            "counterfactual_code": self.counterfactual_code,
            "diff_spans": [list(span) for span in self.diff_spans],
            "attempts": self.attempts,
            "verdict": self.verdict,
            "generator": self.generator,
        }


def make_record(
    task: TaskRecord,
    concept: str,
    counterfactual_code: str,
    attempts: int,
    verdict: str,
    generator: str,
) -> DatasetRecord:
    spans = annotate_diff(task.full_source, counterfactual_code)
    record = DatasetRecord(
        task_id=task.task_id,
        concept=str(concept),
        instruction=task.prompt,
        original_code=task.full_source,
        counterfactual_code=counterfactual_code,
        diff_spans=tuple((a, b) for a, b in spans),
        attempts=attempts,
        verdict=str(verdict),
        generator=generator,
    )
    _check_record(record, line=0)
    return record


def _check_record(record: DatasetRecord, line: int) -> None:
    if not record.task_id:
        raise SchemaError(line, "task_id", "must be non-empty")
    if record.attempts < 1:
        raise SchemaError(line, "attempts", "must be >= 1")
    if record.original_code == record.counterfactual_code:
        raise SchemaError(line, "counterfactual_code", "identical to original_code")
    if not record.diff_spans:
        raise SchemaError(line, "diff_spans", "no modified tokens")
    prev_end = -1
    for span in record.diff_spans:
        start, end = span
        if start < 0 or end <= start:
            raise SchemaError(line, "diff_spans", f"degenerate span {span}")
        if start < prev_end:
            raise SchemaError(line, "diff_spans", "spans overlap or are unsorted")
        if end > len(record.counterfactual_code):
            raise SchemaError(line, "diff_spans", "span exceeds counterfactual text")
        prev_end = end


def record_from_dict(payload: dict, line: int) -> DatasetRecord:
    for field_name in RECORD_FIELDS:
        if field_name not in payload:
            raise SchemaError(line, field_name, "missing")
    for field_name in (
        "task_id",
        "concept",
        "instruction",
        "original_code",
        "counterfactual_code",
        "verdict",
        "generator",
    ):
        if not isinstance(payload[field_name], str):
            raise SchemaError(line, field_name, "expected string")
    if not isinstance(payload["attempts"], int) or isinstance(payload["attempts"], bool):
        raise SchemaError(line, "attempts", "expected integer")
    raw_spans = payload["diff_spans"]
    if not isinstance(raw_spans, list):
        raise SchemaError(line, "diff_spans", "expected list")
    spans = []
    for span in raw_spans:
        if (
            not isinstance(span, (list, tuple))
            or len(span) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in span)
        ):
            raise SchemaError(line, "diff_spans", f"expected [start, end] pairs, got {span!r}")
        spans.append((span[0], span[1]))
    record = DatasetRecord(
        task_id=payload["task_id"],
        concept=payload["concept"],
        instruction=payload["instruction"],
        original_code=payload["original_code"],
        counterfactual_code=payload["counterfactual_code"],
        diff_spans=tuple(spans),
        attempts=payload["attempts"],
        verdict=payload["verdict"],
        generator=payload["generator"],
    )
    _check_record(record, line)
    return record


def write_records(records: Iterable[DatasetRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False))
            fh.write("\n")


def read_records(path) -> list[DatasetRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                payload = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, "<line>", f"invalid JSON: {exc}") from exc
            if not isinstance(payload, dict):
                raise SchemaError(lineno, "<line>", "expected a JSON object")
            records.append(record_from_dict(payload, lineno))
    return records


def load_tasks(path) -> list[TaskRecord]:
    tasks = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                payload = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, "<line>", f"invalid JSON: {exc}") from exc
            for field_name in TASK_FIELDS:
                if field_name not in payload or not isinstance(payload[field_name], str):
                    raise SchemaError(lineno, field_name, "missing or not a string")
            if payload["task_id"] in seen:
                raise SchemaError(lineno, "task_id", "duplicate")
            seen.add(payload["task_id"])
            tasks.append(TaskRecord(**{k: payload[k] for k in TASK_FIELDS}))
    return tasks


# ---------------------------------------------------------------------------
# grouping and batching


@dataclass(frozen=True)
class OriginalEntry:
    task_id: str
    instruction: str
    code: str


@dataclass(frozen=True)
class CombinedGroup:
    original: OriginalEntry
    counterfactuals: tuple[DatasetRecord, ...]

    @property
    def size(self) -> int:
        return 1 + len(self.counterfactuals)


def build_combined(
    originals: Iterable[OriginalEntry], counterfactuals: Iterable[DatasetRecord]
) -> list[CombinedGroup]:
    """One group per original, holding all its counterfactuals.  Groups come
    back sorted by task_id; counterfactuals sort by (concept, attempt)."""
    by_task: dict[str, OriginalEntry] = {}
    for entry in originals:
        by_task[entry.task_id] = entry
    bucket: dict[str, list[DatasetRecord]] = {tid: [] for tid in by_task}
    for record in counterfactuals:
        if record.task_id not in by_task:
            raise OrphanCounterfactual(record.task_id)
        if record.instruction != by_task[record.task_id].instruction:
            raise OrphanCounterfactual(record.task_id)
        bucket[record.task_id].append(record)
    groups = []
    for task_id in sorted(by_task):
        members = sorted(
            bucket[task_id], key=lambda r: (r.concept, r.attempts, r.counterfactual_code)
        )
        groups.append(
            CombinedGroup(original=by_task[task_id], counterfactuals=tuple(members))
        )
    return groups


@dataclass(frozen=True)
class BatchPlan:
    batches: tuple[tuple[int, ...], ...]
    batch_size: int
    seed: int


def plan_batches(groups: Sequence[CombinedGroup], batch_size: int, seed: int) -> BatchPlan:
    """Seeded shuffle followed by greedy packing of whole groups.  Groups are
    never split; a group larger than the batch budget is an error."""
    for group in groups:
        if group.size > batch_size:
            raise GroupTooLarge(
                f"group {group.original.task_id!r} holds {group.size} members, "
                f"batch size is {batch_size}"
            )
    order = list(range(len(groups)))
    random.Random(seed).shuffle(order)
    batches: list[list[int]] = []
    current: list[int] = []
    used = 0
    for idx in order:
        size = groups[idx].size
        if current and used + size > batch_size:
            batches.append(current)
            current = []
            used = 0
        current.append(idx)
        used += size
    if current:
        batches.append(current)
    return BatchPlan(
        batches=tuple(tuple(batch) for batch in batches),
        batch_size=batch_size,
        seed=seed,
    )


def split_half(items: Sequence, seed: int) -> tuple[list, list]:
    """Seeded 50/50 split (first half rounds up)."""
    order = list(range(len(items)))
    random.Random(seed).shuffle(order)
    cut = (len(items) + 1) // 2
    first = [items[i] for i in sorted(order[:cut])]
    second = [items[i] for i in sorted(order[cut:])]
    return first, second
