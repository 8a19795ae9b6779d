"""Command-line front end.

Four subcommands cover the pipeline: `perturb` (rule engine), `gen`
(LLM-backed), `eval` (attribution table -> metrics report), and `stats`
(manifest -> success-rate report).  Progress goes to stderr as line-delimited
JSON events; output files contain no timing, so reruns with the same seed are
byte-identical.

Exit codes: 0 success, 1 config or I/O problem, 2 partial failures under
--strict.
"""

from __future__ import annotations

import argparse
import ast
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import code_model as cm
from .corpus import bundled_corpus_path
from .dataset import TaskRecord, load_tasks, make_record, write_records
from .errors import (
    DomainError,
    MissingEntryPoint,
    NotApplicable,
    ProcureError,
    SchemaError,
    TransportError,
    UnsupportedConstruct,
)
from .llm_gen import (
    BackendConfig,
    PromptVariant,
    generate_with_retries,
    make_backend,
)
from .metrics import ccs_from_rows, mean_pass_at_k, read_attribution, success_stats
from .perturb import ALL_CONCEPTS, Concept, apply, enumerate_sites
from .validate import (
    DEFAULT_TIMEOUT,
    TestHarness,
    ValidationOutcome,
    Verdict,
    validate_candidate,
)

FAILURE_KEYS = (
    str(Verdict.FailureTypeI),
    str(Verdict.FailureTypeII),
    str(Verdict.RejectedByTests),
    str(Verdict.ExecutionError),
)


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 on usage errors (2 is reserved for --strict)."""

    def error(self, message: str) -> None:  # noqa: D401 - argparse override
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _event(payload: dict) -> None:
    sys.stderr.write(json.dumps(payload, ensure_ascii=False) + "\n")
    sys.stderr.flush()


def derive_seed(master: int, task_id: str, concept: str, site_index: int = 0) -> int:
    """Stable per-work-item seed.  Master seed 0 keeps every item at 0 so the
    default run is the canonical one."""
    if master == 0:
        return 0
    key = f"{master}:{task_id}:{concept}:{site_index}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def _reserved_names(test_source: str) -> frozenset[str]:
    """Keyword-argument names used anywhere in the test code.  Renaming a
    parameter that tests address by keyword would break the call."""
    try:
        tree = ast.parse(test_source)
    except SyntaxError:
        return frozenset()
    names = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Call):
            for kw in node.keywords:
                if kw.arg is not None:
                    names.add(kw.arg)
    return frozenset(names)


def _parse_concepts(raw: str | None) -> tuple[Concept, ...]:
    if raw is None:
        return ALL_CONCEPTS
    chosen: list[Concept] = []
    for part in raw.split(","):
        name = part.strip()
        if not name:
            continue
        try:
            concept = Concept(name)
        except ValueError:
            valid = ", ".join(str(c) for c in ALL_CONCEPTS)
            raise DomainError(f"unknown concept {name!r}; valid: {valid}") from None
        if concept not in chosen:
            chosen.append(concept)
    if not chosen:
        raise DomainError("no concepts selected")
    return tuple(sorted(chosen, key=ALL_CONCEPTS.index))


def _load_input(path_arg: str) -> tuple[str, list[TaskRecord]]:
    if path_arg == "bundled":
        return "bundled", load_tasks(bundled_corpus_path())
    path = Path(path_arg)
    return path.stem, load_tasks(path)


@dataclass
class _PairResult:
    task_id: str
    concept: str
    eligible: bool
    verdict: str
    records: list
    attempts: int
    tokens: int


def _mean(values: list[float]) -> float | None:
    return round(sum(values) / len(values), 4) if values else None


def _build_manifest(
    dataset_name: str,
    engine: str,
    seed: int,
    concepts: Sequence[Concept],
    results: list[_PairResult],
) -> dict:
    concept_block: dict[str, dict] = {}
    for concept in concepts:
        rows = [r for r in results if r.concept == str(concept)]
        eligible = sum(1 for r in rows if r.eligible)
        success = sum(1 for r in rows if r.verdict in ("AcceptedStructural", "AcceptedByTests"))
        failures = {}
        for key in FAILURE_KEYS:
            n = sum(1 for r in rows if r.verdict == key)
            if n:
                failures[key] = n
        attempted = [float(r.attempts) for r in rows if r.attempts > 0]
        with_tokens = [float(r.tokens) for r in rows if r.attempts > 0] if engine == "llm" else []
        concept_block[str(concept)] = {
            "eligible": eligible,
            "success": success,
            "failures": failures,
            "avg_attempts": _mean(attempted),
            "avg_tokens": _mean(with_tokens),
        }
    return {
        "datasets": {
            dataset_name: {
                "engine": engine,
                "seed": seed,
                "concepts": concept_block,
            }
        }
    }


def _write_outputs(out_dir: Path, records: list, manifest: dict) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    records_path = out_dir / "records.jsonl"
    manifest_path = out_dir / "manifest.json"
    write_records(records, records_path)
    manifest_path.write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return records_path, manifest_path


def _perturb_pair(
    task: TaskRecord,
    concept: Concept,
    seed: int,
    timeout: float,
    all_sites: bool,
) -> _PairResult:
    reserved = _reserved_names(task.test)
    try:
        program = cm.parse(task.full_source, task.entry_point)
        sites = enumerate_sites(program, concept, reserved=reserved)
    except (SyntaxError, UnsupportedConstruct, MissingEntryPoint):
        return _PairResult(task.task_id, str(concept), False, str(Verdict.FailureTypeI), [], 0, 0)
    if not sites:
        return _PairResult(task.task_id, str(concept), False, str(Verdict.FailureTypeI), [], 0, 0)

    harness = TestHarness(
        prelude="", test_code=task.test, entry_point=task.entry_point, timeout=timeout
    )
    chosen = list(enumerate(sites)) if all_sites else [(0, sites[0])]
    records = []
    first_verdict: str | None = None
    for site_index, site in chosen:
        site_seed = derive_seed(seed, task.task_id, str(concept), site_index)
        try:
            candidate = apply(program, site, seed=site_seed, reserved=reserved)
        except NotApplicable:
            if first_verdict is None:
                first_verdict = str(Verdict.FailureTypeI)
            continue
        outcome = validate_candidate(program, candidate.source, harness)
        if outcome.accepted:
            try:
                records.append(
                    make_record(
                        task,
                        str(concept),
                        candidate.source,
                        attempts=1,
                        verdict=str(outcome.verdict),
                        generator="rule",
                    )
                )
            except SchemaError:
                # accepted but token-identical: nothing changed, type I
                if first_verdict is None:
                    first_verdict = str(Verdict.FailureTypeI)
        elif first_verdict is None:
            first_verdict = str(outcome.verdict)
    if records:
        verdict = records[0].verdict
    else:
        verdict = first_verdict or str(Verdict.FailureTypeI)
    return _PairResult(task.task_id, str(concept), True, verdict, records, 1, 0)


def _gen_pair(
    task: TaskRecord,
    concept: Concept,
    config: BackendConfig,
    backend,
    variant: PromptVariant,
    timeout: float,
) -> _PairResult:
    reserved = _reserved_names(task.test)
    harness = TestHarness(
        prelude="", test_code=task.test, entry_point=task.entry_point, timeout=timeout
    )

    def validator(code: str) -> ValidationOutcome:
        try:
            program = cm.parse(task.full_source, task.entry_point)
        except (SyntaxError, UnsupportedConstruct, MissingEntryPoint) as exc:
            return ValidationOutcome(Verdict.FailureTypeI, f"original unusable: {exc}")
        return validate_candidate(program, code, harness)

    result, log = generate_with_retries(
        task,
        concept,
        config,
        validator,
        backend=backend,
        variant=variant,
        reserved=reserved,
    )
    attempts = len(log.attempts)
    if log.succeeded:
        try:
            record = make_record(
                task,
                str(concept),
                result.source,
                attempts=max(result.attempt, 1),
                verdict=log.attempts[-1].verdict,
                generator=f"llm:{variant}",
            )
        except SchemaError:
            # accepted but token-identical: nothing changed, type I
            return _PairResult(
                task.task_id,
                str(concept),
                True,
                str(Verdict.FailureTypeI),
                [],
                attempts,
                log.total_tokens,
            )
        return _PairResult(
            task.task_id, str(concept), True, record.verdict, [record], attempts, log.total_tokens
        )
    eligible = attempts > 0
    verdict = result.verdict if isinstance(result, ValidationOutcome) else str(Verdict.FailureTypeI)
    return _PairResult(
        task.task_id, str(concept), eligible, str(verdict), [], attempts, log.total_tokens
    )


def _run_pairs(args, worker) -> int:
    started = time.monotonic()
    dataset_name, tasks = _load_input(args.input)
    concepts = _parse_concepts(args.concepts)
    out_dir = Path(args.out)
    pairs = [(task, concept) for task in tasks for concept in concepts]
    _event(
        {
            "event": "start",
            "command": args.command,
            "dataset": dataset_name,
            "tasks": len(tasks),
            "concepts": [str(c) for c in concepts],
            "seed": args.seed,
        }
    )

    results: dict[tuple[str, str], _PairResult] = {}
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            futures = {
                pool.submit(worker, task, concept): (task.task_id, str(concept))
                for task, concept in pairs
            }
            for future, key in futures.items():
                results[key] = future.result()
    else:
        for task, concept in pairs:
            results[(task.task_id, str(concept))] = worker(task, concept)

    ordered_keys = sorted(
        results, key=lambda k: (k[0], [str(c) for c in ALL_CONCEPTS].index(k[1]))
    )
    records = []
    failures = 0
    for key in ordered_keys:
        r = results[key]
        records.extend(r.records)
        if not r.records:
            failures += 1
        _event(
            {
                "event": "result",
                "task_id": r.task_id,
                "concept": r.concept,
                "eligible": r.eligible,
                "verdict": r.verdict,
                "records": len(r.records),
            }
        )

    ordered_results = [results[k] for k in ordered_keys]
    manifest = _build_manifest(
        dataset_name, args.engine, args.seed, concepts, ordered_results
    )
    records_path, manifest_path = _write_outputs(out_dir, records, manifest)
    _event(
        {
            "event": "done",
            "records": len(records),
            "pairs": len(pairs),
            "failed_pairs": failures,
            "records_path": str(records_path),
            "manifest_path": str(manifest_path),
            "duration_ms": round((time.monotonic() - started) * 1000.0, 1),
        }
    )
    if args.strict and failures:
        return 2
    return 0


def cmd_perturb(args) -> int:
    args.engine = "rule"

    def worker(task: TaskRecord, concept: Concept) -> _PairResult:
        return _perturb_pair(task, concept, args.seed, args.timeout, args.all_sites)

    return _run_pairs(args, worker)


def cmd_gen(args) -> int:
    args.engine = "llm"
    if args.backend_config:
        payload = json.loads(Path(args.backend_config).read_text("utf-8"))
        if "endpoint" not in payload:
            raise DomainError("backend config must define 'endpoint'")
        config = BackendConfig(
            endpoint=payload["endpoint"],
            model=payload.get("model", "unknown"),
            temperature=float(payload.get("temperature", 1.0)),
            max_retries=args.n_retries,
            auth_env=payload.get("auth_env", "PROCURE_LLM_KEY"),
        )
    else:
        config = BackendConfig(endpoint="mock:", model="mock", max_retries=args.n_retries)
    backend = make_backend(config)
    variant = PromptVariant(args.variant)

    def worker(task: TaskRecord, concept: Concept) -> _PairResult:
        return _gen_pair(task, concept, config, backend, variant, args.timeout)

    return _run_pairs(args, worker)


def cmd_eval(args) -> int:
    rows = read_attribution(Path(args.input))
    overall, per_concept = ccs_from_rows(rows)
    report = {
        "pass_at_1": mean_pass_at_k(rows, 1),
        "pass_at_5": mean_pass_at_k(rows, 5),
        "ccs_overall": overall,
        "ccs_per_concept": per_concept,
    }
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_stats(args) -> int:
    payload = json.loads(Path(args.input).read_text("utf-8"))
    datasets = payload.get("datasets")
    if not isinstance(datasets, dict) or not datasets:
        raise SchemaError(0, "datasets", "manifest has no datasets mapping")
    cells: dict[str, dict[str, tuple[int, int]]] = {}
    attempts_rows: dict[str, float] = {}
    tokens_rows: dict[str, float] = {}
    for name, block in datasets.items():
        concepts = block.get("concepts", {})
        if not isinstance(concepts, dict):
            raise SchemaError(0, name, "concepts must be a mapping")
        cells[name] = {}
        attempt_cells: list[tuple[float, int]] = []
        token_cells: list[tuple[float, int]] = []
        for concept, cell in concepts.items():
            a = cell.get("success")
            b = cell.get("eligible")
            if not isinstance(a, int) or not isinstance(b, int):
                raise SchemaError(0, f"{name}.{concept}", "success/eligible must be integers")
            cells[name][concept] = (a, b)
            if isinstance(cell.get("avg_attempts"), (int, float)):
                attempt_cells.append((float(cell["avg_attempts"]), b))
            if isinstance(cell.get("avg_tokens"), (int, float)):
                token_cells.append((float(cell["avg_tokens"]), b))
        if isinstance(block.get("avg_attempts"), (int, float)):
            attempts_rows[name] = float(block["avg_attempts"])
        elif attempt_cells:
            weight = sum(w for _, w in attempt_cells)
            if weight:
                attempts_rows[name] = sum(v * w for v, w in attempt_cells) / weight
            else:
                attempts_rows[name] = sum(v for v, _ in attempt_cells) / len(attempt_cells)
        if isinstance(block.get("avg_tokens"), (int, float)):
            tokens_rows[name] = float(block["avg_tokens"])
        elif token_cells:
            weight = sum(w for _, w in token_cells)
            if weight:
                tokens_rows[name] = sum(v * w for v, w in token_cells) / weight
            else:
                tokens_rows[name] = sum(v for v, _ in token_cells) / len(token_cells)

    stats = success_stats(cells)
    report: dict = {
        "per_concept": {
            name: {concept: stats.per_cell[(name, concept)] for concept in cells[name]}
            for name in cells
        },
        "per_dataset": stats.per_dataset,
        "macro": stats.macro,
        "total_success": stats.total_success,
        "total_eligible": stats.total_eligible,
    }
    if attempts_rows:
        report["avg_attempts"] = {
            "per_dataset": attempts_rows,
            "macro": round(sum(attempts_rows.values()) / len(attempts_rows), 4),
            "note": "macro is the unweighted mean of the per-dataset rows",
        }
    if tokens_rows:
        report["avg_tokens"] = {
            "per_dataset": tokens_rows,
            "macro": round(sum(tokens_rows.values()) / len(tokens_rows), 4),
            "note": "macro is the unweighted mean of the per-dataset rows",
        }
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="procure", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p) -> None:
        p.add_argument("--input", required=True, help="task JSONL path, or 'bundled'")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--concepts", default=None, help="comma-separated concept names")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
        p.add_argument("--strict", action="store_true", help="exit 2 if any pair failed")

    p_perturb = sub.add_parser("perturb", help="rule-engine counterfactual generation")
    add_common(p_perturb)
    p_perturb.add_argument(
        "--all-sites", action="store_true", help="emit one record per eligible site"
    )
    p_perturb.set_defaults(func=cmd_perturb)

    p_gen = sub.add_parser("gen", help="LLM-backed counterfactual generation")
    add_common(p_gen)
    p_gen.add_argument("--backend-config", default=None, help="backend JSON config path")
    p_gen.add_argument(
        "--variant",
        default=str(PromptVariant.Full),
        choices=[str(v) for v in PromptVariant],
    )
    p_gen.add_argument("--n-retries", type=int, default=5)
    p_gen.set_defaults(func=cmd_gen)

    p_eval = sub.add_parser("eval", help="metrics report from an attribution table")
    p_eval.add_argument("--input", required=True, help="attribution JSONL path")
    p_eval.add_argument("--out", default=None, help="optional report JSON path")
    p_eval.set_defaults(func=cmd_eval)

    p_stats = sub.add_parser("stats", help="success-rate report from a manifest")
    p_stats.add_argument("--input", required=True, help="manifest JSON path")
    p_stats.add_argument("--out", default=None, help="optional report JSON path")
    p_stats.set_defaults(func=cmd_stats)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        _event({"event": "error", "kind": type(exc).__name__, "detail": str(exc)})
        return 1
    except (SchemaError, DomainError, TransportError, ProcureError) as exc:
        _event({"event": "error", "kind": type(exc).__name__, "detail": str(exc)})
        return 1


if __name__ == "__main__":
    sys.exit(main())
