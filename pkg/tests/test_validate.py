"""Validation funnel: fast structural filters, then sandboxed unit tests."""

from __future__ import annotations

import time

import pytest

from procure import code_model as cm
from procure.errors import SandboxUnavailable
from procure.validate import (
    TestHarness,
    Verdict,
    compose_test_program,
    fast_filter,
    run_tests,
    validate_candidate,
)

ORIGINAL = '''def double(x):
    value = x * 2
    return value
'''

TESTS = '''def check(candidate):
    assert candidate(0) == 0
    assert candidate(3) == 6
    assert candidate(-2) == -4

check(double)
'''


@pytest.fixture
def program():
    return cm.parse(ORIGINAL, "double")


@pytest.fixture
def harness():
    return TestHarness(prelude="", test_code=TESTS, entry_point="double", timeout=5.0)


class TestFastFilter:
    def test_identical_text_is_type_one(self, program):
        out = fast_filter(program, ORIGINAL)
        assert out is not None
        assert out.verdict == Verdict.FailureTypeI
        assert out.tests_run == 0

    def test_whitespace_only_difference_is_type_one(self, program):
        candidate = ORIGINAL.rstrip("\n") + "   \n"
        out = fast_filter(program, candidate)
        assert out is not None
        assert out.verdict == Verdict.FailureTypeI

    def test_unparseable_is_type_two(self, program):
        out = fast_filter(program, "def double(x:\n    return\n")
        assert out is not None
        assert out.verdict == Verdict.FailureTypeII
        assert out.tests_run == 0

    def test_missing_entry_point_is_type_two(self, program):
        out = fast_filter(program, "def other(x):\n    return x * 2\n")
        assert out is not None
        assert out.verdict == Verdict.FailureTypeII

    def test_comment_only_change_accepted_structurally(self, program):
        candidate = "def double(x):\n    # hi\n    value = x * 2\n    return value\n"
        out = fast_filter(program, candidate)
        assert out is not None
        assert out.verdict == Verdict.AcceptedStructural
        assert out.tests_run == 0

    def test_consistent_rename_accepted_structurally(self, program):
        candidate = "def double(x):\n    result = x * 2\n    return result\n"
        out = fast_filter(program, candidate)
        assert out is not None
        assert out.verdict == Verdict.AcceptedStructural

    def test_semantic_change_is_inconclusive(self, program):
        candidate = "def double(x):\n    value = x * 3\n    return value\n"
        assert fast_filter(program, candidate) is None


class TestRunTests:
    def test_passing_candidate(self, harness):
        out = run_tests(ORIGINAL, harness)
        assert out.verdict == Verdict.AcceptedByTests
        assert out.tests_run == 3

    def test_failing_candidate(self, harness):
        out = run_tests("def double(x):\n    return x * 3\n", harness)
        assert out.verdict == Verdict.RejectedByTests

    def test_crashing_candidate(self, harness):
        out = run_tests("def double(x):\n    raise ValueError('no')\n", harness)
        assert out.verdict == Verdict.RejectedByTests

    def test_infinite_loop_times_out(self):
        harness = TestHarness("", TESTS, "double", timeout=1.5)
        looping = "def double(x):\n    while True:\n        pass\n"
        started = time.monotonic()
        out = run_tests(looping, harness)
        elapsed = time.monotonic() - started
        assert out.verdict == Verdict.ExecutionError
        assert elapsed < harness.timeout + 1.0

    def test_bad_interpreter_raises(self, harness, monkeypatch):
        monkeypatch.setenv("PROCURE_PY", "/nonexistent/python-binary")
        with pytest.raises(SandboxUnavailable):
            run_tests(ORIGINAL, harness)

    def test_output_flood_is_capped(self):
        harness = TestHarness("", TESTS, "double", timeout=10.0)
        noisy = (
            "import sys\n"
            "def double(x):\n"
            "    return x * 2\n"
            "for _ in range(200000):\n"
            "    sys.stdout.write('y' * 64 + chr(10))\n"
        )
        out = run_tests(noisy, harness)
        assert out.verdict == Verdict.AcceptedByTests
        assert len(out.detail) <= (1 << 20) + 128


class TestComposition:
    def test_sections_in_order(self):
        harness = TestHarness(
            prelude="import math", test_code=TESTS, entry_point="double", timeout=5.0
        )
        text = compose_test_program("def f():\n    pass", harness)
        first = text.index("import math")
        second = text.index("def f()")
        third = text.index("def check(")
        assert first < second < third
        assert text.endswith("\n")


class TestValidateCandidate:
    def test_fast_path_skips_subprocess(self, program, harness):
        out = validate_candidate(program, ORIGINAL, harness)
        assert out.verdict == Verdict.FailureTypeI
        assert out.tests_run == 0
        assert out.detail.startswith("fast-filter")

    def test_structural_path_skips_subprocess(self, program, harness):
        candidate = "def double(y):\n    value = y * 2\n    return value\n"
        out = validate_candidate(program, candidate, harness)
        assert out.verdict == Verdict.AcceptedStructural
        assert out.tests_run == 0

    def test_behavioral_path_reaches_tests(self, program, harness):
        candidate = "def double(x):\n    value = x + x\n    return value\n"
        out = validate_candidate(program, candidate, harness)
        assert out.verdict == Verdict.AcceptedByTests
        assert out.tests_run == 3
        assert out.detail.startswith("unit-tests")

    def test_behavior_change_rejected(self, program, harness):
        candidate = "def double(x):\n    value = x * 2 + 1\n    return value\n"
        out = validate_candidate(program, candidate, harness)
        assert out.verdict == Verdict.RejectedByTests
        assert not out.accepted
