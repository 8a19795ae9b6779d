"""Randomized invariant checks over generated programs and metric inputs."""

from __future__ import annotations

import math

from hypothesis import given, settings, strategies as st

from procure import code_model as cm
from procure.dataset import TaskRecord, make_record, record_from_dict
from procure.diff import annotate_diff, tokenize_text
from procure.metrics import ccs, pass_at_k
from procure.perturb import Concept, apply, enumerate_sites

SLOW = settings(max_examples=40, deadline=None)


@st.composite
def straight_line_program(draw):
    """A tiny total integer function: params, then chained assignments."""
    n_params = draw(st.integers(min_value=1, max_value=2))
    params = [f"p{i}" for i in range(n_params)]
    n_stmts = draw(st.integers(min_value=2, max_value=5))
    defined = list(params)
    lines = []
    for i in range(n_stmts):
        op = draw(st.sampled_from(["+", "-", "*"]))
        left = draw(st.sampled_from(defined + ["1", "2", "3"]))
        right = draw(st.sampled_from(defined + ["1", "2", "3"]))
        lines.append(f"    v{i} = {left} {op} {right}")
        defined.append(f"v{i}")
    result = draw(st.sampled_from(defined))
    source = (
        f"def f({', '.join(params)}):\n" + "\n".join(lines) + f"\n    return {result}\n"
    )
    return source, params


def run_function(source: str, args: tuple[int, ...]) -> int:
    namespace: dict = {}
    exec(compile(source, "<generated>", "exec"), namespace)
    return namespace["f"](*args)


class TestStructuralInvariants:
    @SLOW
    @given(straight_line_program(), st.integers(min_value=1, max_value=10_000))
    def test_random_rename_preserves_alpha_hash(self, gen, seed):
        source, _ = gen
        program = cm.parse(source, "f")
        sites = enumerate_sites(program, Concept.NameRandom)
        assert sites, source
        candidate = apply(program, sites[0], seed=seed)
        before = cm.structural_digest(program)
        after = cm.structural_digest(cm.parse(candidate.source, "f"))
        assert before.alpha_hash == after.alpha_hash
        assert before.raw_hash != after.raw_hash

    @SLOW
    @given(straight_line_program())
    def test_cfg_equivalence_is_reflexive(self, gen):
        source, _ = gen
        g = cm.build_cfg(cm.parse(source, "f"))
        assert cm.cfg_equivalent(g, g)

    @SLOW
    @given(straight_line_program(), st.integers(min_value=1, max_value=10_000))
    def test_cfg_equivalence_is_symmetric(self, gen, seed):
        source, _ = gen
        program = cm.parse(source, "f")
        candidate = apply(program, enumerate_sites(program, Concept.NameRandom)[0], seed=seed)
        g1 = cm.build_cfg(program)
        g2 = cm.build_cfg(cm.parse(candidate.source, "f"))
        assert cm.cfg_equivalent(g1, g2) == cm.cfg_equivalent(g2, g1)
        assert cm.cfg_equivalent(g1, g2)


class TestPerturbationSoundness:
    @SLOW
    @given(
        straight_line_program(),
        st.lists(st.integers(min_value=-9, max_value=9), min_size=2, max_size=2),
    )
    def test_swap_preserves_behavior(self, gen, arg_pool):
        source, params = gen
        program = cm.parse(source, "f")
        args = tuple(arg_pool[: len(params)])
        expected = run_function(source, args)
        for site in enumerate_sites(program, Concept.IndependentSwap):
            candidate = apply(program, site, seed=0)
            assert run_function(candidate.source, args) == expected

    @SLOW
    @given(
        straight_line_program(),
        st.lists(st.integers(min_value=-9, max_value=9), min_size=2, max_size=2),
        st.integers(min_value=0, max_value=10_000),
    )
    def test_defuse_break_preserves_behavior(self, gen, arg_pool, seed):
        source, params = gen
        program = cm.parse(source, "f")
        args = tuple(arg_pool[: len(params)])
        expected = run_function(source, args)
        for site in enumerate_sites(program, Concept.DefUseBreak):
            candidate = apply(program, site, seed=seed)
            assert run_function(candidate.source, args) == expected

    @SLOW
    @given(
        straight_line_program(),
        st.lists(st.integers(min_value=-9, max_value=9), min_size=2, max_size=2),
        st.integers(min_value=0, max_value=10_000),
    )
    def test_renames_preserve_behavior(self, gen, arg_pool, seed):
        source, params = gen
        program = cm.parse(source, "f")
        args = tuple(arg_pool[: len(params)])
        expected = run_function(source, args)
        for concept in (Concept.NameRandom, Concept.NameShuffle):
            for site in enumerate_sites(program, concept):
                candidate = apply(program, site, seed=seed)
                assert run_function(candidate.source, args) == expected

    @SLOW
    @given(straight_line_program(), st.integers(min_value=0, max_value=10_000))
    def test_shuffle_is_deterministic_per_seed(self, gen, seed):
        source, _ = gen
        program = cm.parse(source, "f")
        sites = enumerate_sites(program, Concept.NameShuffle)
        if not sites:
            return
        first = apply(program, sites[0], seed=seed)
        second = apply(program, sites[0], seed=seed)
        assert first.source == second.source


class TestMetricProperties:
    @given(
        st.integers(min_value=1, max_value=40).flatmap(
            lambda m: st.tuples(
                st.just(m),
                st.integers(min_value=0, max_value=m),
                st.integers(min_value=1, max_value=m),
            )
        )
    )
    def test_pass_at_k_matches_closed_form(self, mck):
        m, c, k = mck
        expected = 1.0 - math.comb(m - c, k) / math.comb(m, k)
        assert abs(pass_at_k(m, c, k) - expected) <= 1e-12

    @given(
        st.integers(min_value=2, max_value=30).flatmap(
            lambda m: st.tuples(
                st.just(m),
                st.integers(min_value=0, max_value=m - 1),
                st.integers(min_value=1, max_value=m - 1),
            )
        )
    )
    def test_pass_at_k_monotone(self, mck):
        m, c, k = mck
        assert pass_at_k(m, c + 1, k) >= pass_at_k(m, c, k)
        assert pass_at_k(m, c, k + 1) >= pass_at_k(m, c, k)

    @given(
        st.lists(
            st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=50
        )
    )
    def test_ccs_bounds(self, pairs):
        value = ccs(pairs)
        if any(a or b for a, b in pairs):
            assert 0.0 <= value <= 1.0
        else:
            assert value is None

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=30))
    def test_ccs_perfect_agreement(self, bits):
        pairs = [(b, b) for b in bits]
        value = ccs(pairs)
        if any(bits):
            assert value == 1.0
        else:
            assert value is None


class TestSerializationProperties:
    @SLOW
    @given(straight_line_program(), st.integers(min_value=1, max_value=10_000))
    def test_record_round_trip(self, gen, seed):
        source, params = gen
        prompt, body = source.split("\n", 1)
        task = TaskRecord(
            task_id="gen/0",
            prompt=prompt + "\n",
            canonical_solution=body,
            test="assert True\n",
            entry_point="f",
        )
        program = cm.parse(source, "f")
        candidate = apply(program, enumerate_sites(program, Concept.NameRandom)[0], seed=seed)
        record = make_record(
            task, "NameRandom", candidate.source, attempts=1, verdict="AcceptedByTests", generator="rule"
        )
        assert record_from_dict(record.to_dict(), line=1) == record

    @SLOW
    @given(straight_line_program())
    def test_token_spans_index_the_source(self, gen):
        source, _ = gen
        last_end = 0
        for token in tokenize_text(source):
            start, end = token.start, token.end
            assert 0 <= start < end <= len(source)
            assert start >= last_end
            assert source[start:end] == token.text
            last_end = end

    @SLOW
    @given(straight_line_program(), st.integers(min_value=0, max_value=10_000))
    def test_diff_spans_are_sorted_and_disjoint(self, gen, seed):
        source, _ = gen
        program = cm.parse(source, "f")
        for concept in Concept:
            for site in enumerate_sites(program, concept):
                candidate = apply(program, site, seed=seed)
                spans = annotate_diff(source, candidate.source)
                assert spans, concept
                previous_end = -1
                for a, b in spans:
                    assert 0 <= a < b <= len(candidate.source)
                    assert a > previous_end
                    previous_end = b
