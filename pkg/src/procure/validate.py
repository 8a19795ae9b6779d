"""Two-stage validation of counterfactual candidates.

Stage one is a static fast filter built on structural digests: it can accept
a candidate outright (no execution) or classify degenerate failures.  Stage
two runs the task's unit tests in a throwaway subprocess.
"""

from __future__ import annotations

import ast
import enum
import os
import re
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass

from . import code_model as cm
from .errors import MissingEntryPoint, SandboxUnavailable, UnsupportedConstruct

OUTPUT_CAP = 1 << 20  # bytes of captured output kept per run

DEFAULT_TIMEOUT = 10.0


class Verdict(str, enum.Enum):
    AcceptedStructural = "AcceptedStructural"
    AcceptedByTests = "AcceptedByTests"
    FailureTypeI = "FailureTypeI"
    FailureTypeII = "FailureTypeII"
    RejectedByTests = "RejectedByTests"
    ExecutionError = "ExecutionError"

    def __str__(self) -> str:
        return self.value


ACCEPTED_VERDICTS = frozenset({Verdict.AcceptedStructural, Verdict.AcceptedByTests})


@dataclass(frozen=True)
class TestHarness:
    """Everything needed to exercise one task's unit tests."""

    __test__ = False  # not a pytest collection target

    prelude: str
    test_code: str
    entry_point: str
    timeout: float = DEFAULT_TIMEOUT


@dataclass(frozen=True)
class ValidationOutcome:
    verdict: Verdict
    detail: str = ""
    tests_run: int = 0
    duration_ms: float = 0.0

    @property
    def accepted(self) -> bool:
        return self.verdict in ACCEPTED_VERDICTS


def interpreter_path() -> str:
    return os.environ.get("PROCURE_PY") or sys.executable


def _count_asserts(test_code: str) -> int:
    try:
        tree = ast.parse(test_code)
    except SyntaxError:
        return len(re.findall(r"^\s*assert\b", test_code, re.MULTILINE)) or 1
    return sum(isinstance(n, ast.Assert) for n in ast.walk(tree)) or 1


def fast_filter(
    original: cm.SubjectProgram, candidate: str
) -> ValidationOutcome | None:
    """Static screening.  Returns an outcome for the clear-cut cases and None
    (inconclusive) when only test execution can decide."""
    if cm.raw_text_hash(candidate) == cm.raw_text_hash(original.source):
        return ValidationOutcome(
            Verdict.FailureTypeI, "identical to the original after whitespace normalization"
        )
    try:
        cand_prog = cm.parse(candidate, original.entry_point)
    except SyntaxError as exc:
        return ValidationOutcome(
            Verdict.FailureTypeII, f"syntax error: {exc.msg} (line {exc.lineno})"
        )
    except MissingEntryPoint:
        return ValidationOutcome(
            Verdict.FailureTypeII,
            f"entry point {original.entry_point!r} is not defined",
        )
    except UnsupportedConstruct as exc:
        return ValidationOutcome(Verdict.FailureTypeII, str(exc))

    orig_digest = cm.structural_digest(original)
    cand_digest = cm.structural_digest(cand_prog)
    if cand_digest.ast_hash == orig_digest.ast_hash:
        return ValidationOutcome(Verdict.AcceptedStructural, "identical syntax tree")
    if cand_digest.alpha_hash == orig_digest.alpha_hash:
        return ValidationOutcome(
            Verdict.AcceptedStructural, "alpha-equivalent syntax tree"
        )
    try:
        if cm.cfg_equivalent(cm.build_cfg(original), cm.build_cfg(cand_prog)):
            return ValidationOutcome(
                Verdict.AcceptedStructural, "isomorphic control-flow graphs"
            )
    except UnsupportedConstruct:
        pass  # graphs unavailable; fall through to execution
    return None


def compose_test_program(candidate: str, harness: TestHarness) -> str:
    parts = []
    if harness.prelude.strip():
        parts.append(harness.prelude.rstrip("\n"))
    parts.append(candidate.rstrip("\n"))
    parts.append(harness.test_code.rstrip("\n"))
    return "\n\n".join(parts) + "\n"


def run_tests(candidate: str, harness: TestHarness) -> ValidationOutcome:
    """Execute the candidate against the harness in a fresh subprocess with a
    wall-clock timeout, its own working directory, and capped output."""
    program = compose_test_program(candidate, harness)
    started = time.monotonic()
    with tempfile.TemporaryDirectory(prefix="procure-run-") as tmp:
        path = os.path.join(tmp, "candidate_under_test.py")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(program)
        cmd = [interpreter_path(), "-I", path]
        try:
            proc = subprocess.run(
                cmd,
                cwd=tmp,
                capture_output=True,
                text=True,
                errors="replace",
                timeout=harness.timeout,
            )
        except subprocess.TimeoutExpired:
            elapsed = (time.monotonic() - started) * 1000.0
            return ValidationOutcome(
                Verdict.ExecutionError,
                f"timed out after {harness.timeout:g}s",
                tests_run=0,
                duration_ms=elapsed,
            )
        except (FileNotFoundError, PermissionError) as exc:
            raise SandboxUnavailable(
                f"cannot execute interpreter {cmd[0]!r}: {exc}"
            ) from exc
        except OSError as exc:
            elapsed = (time.monotonic() - started) * 1000.0
            return ValidationOutcome(
                Verdict.ExecutionError, f"sandbox error: {exc}", duration_ms=elapsed
            )
    elapsed = (time.monotonic() - started) * 1000.0
    output = (proc.stdout or "") + (proc.stderr or "")
    output = output[-OUTPUT_CAP:]
    if proc.returncode == 0:
        return ValidationOutcome(
            Verdict.AcceptedByTests,
            "all tests passed",
            tests_run=_count_asserts(harness.test_code),
            duration_ms=elapsed,
        )
    tail = output.strip().splitlines()[-1] if output.strip() else f"exit code {proc.returncode}"
    return ValidationOutcome(
        Verdict.RejectedByTests,
        tail,
        tests_run=_count_asserts(harness.test_code),
        duration_ms=elapsed,
    )


def validate_candidate(
    original: cm.SubjectProgram, candidate: str, harness: TestHarness
) -> ValidationOutcome:
    """Fast filter first; unit tests only when the filter is inconclusive."""
    started = time.monotonic()
    screened = fast_filter(original, candidate)
    if screened is not None:
        elapsed = (time.monotonic() - started) * 1000.0
        return ValidationOutcome(
            verdict=screened.verdict,
            detail=f"fast-filter: {screened.detail}",
            tests_run=0,
            duration_ms=elapsed,
        )
    executed = run_tests(candidate, harness)
    return ValidationOutcome(
        verdict=executed.verdict,
        detail=f"unit-tests: {executed.detail}",
        tests_run=executed.tests_run,
        duration_ms=executed.duration_ms,
    )
