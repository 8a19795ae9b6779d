"""Concept transforms: eligibility rules, applied output, behavior oracles.

Behavior preservation is checked here by executing original and mutated
programs in-process on concrete inputs, independently of the subprocess
validator exercised in test_validate.
"""

from __future__ import annotations

import pytest

from procure import code_model as cm
from procure.errors import NotApplicable
from procure.perturb import ALL_CONCEPTS, Concept, apply, enumerate_sites

FLIPPABLE = '''def sign_word(x):
    if x >= 0:
        word = "non-negative"
    else:
        word = "negative"
    return word
'''

CHAIN = '''def total_price(amount, rate):
    tax = amount * rate
    rounded = int(tax)
    return amount + rounded
'''

MULTI = '''def blend(a, b, c):
    left = a * 2
    right = b * 3
    mid = left + right
    scale = mid - c
    return scale
'''


def run_entry(source: str, entry: str, *args):
    namespace: dict = {}
    exec(compile(source, "<test>", "exec"), namespace)
    return namespace[entry](*args)


def assert_same_behavior(original: str, mutated: str, entry: str, arglists):
    for args in arglists:
        assert run_entry(original, entry, *args) == run_entry(mutated, entry, *args)


class TestIfElseFlip:
    def test_flip_negates_and_swaps(self):
        prog = cm.parse(FLIPPABLE, "sign_word")
        sites = enumerate_sites(prog, Concept.IfElseFlip)
        assert len(sites) == 1
        cand = apply(prog, sites[0])
        assert "not (x >= 0)" in cand.source
        body_at = cand.source.index('"negative"')
        else_at = cand.source.index('"non-negative"')
        assert body_at < else_at
        assert_same_behavior(FLIPPABLE, cand.source, "sign_word", [(5,), (-5,), (0,)])

    def test_flip_is_involution_on_behavior(self):
        prog = cm.parse(FLIPPABLE, "sign_word")
        cand = apply(prog, enumerate_sites(prog, Concept.IfElseFlip)[0])
        prog2 = cm.parse(cand.source, "sign_word")
        sites2 = enumerate_sites(prog2, Concept.IfElseFlip)
        assert sites2
        cand2 = apply(prog2, sites2[0])
        assert_same_behavior(FLIPPABLE, cand2.source, "sign_word", [(3,), (-3,), (0,)])

    def test_no_else_is_ineligible(self):
        src = "def f(x):\n    if x > 0:\n        x = 0\n    return x\n"
        prog = cm.parse(src, "f")
        assert enumerate_sites(prog, Concept.IfElseFlip) == []

    def test_elif_chain_is_ineligible(self):
        src = (
            "def f(x):\n"
            "    if x > 0:\n"
            "        r = 1\n"
            "    elif x < 0:\n"
            "        r = -1\n"
            "    else:\n"
            "        r = 0\n"
            "    return r\n"
        )
        prog = cm.parse(src, "f")
        assert enumerate_sites(prog, Concept.IfElseFlip) == []

    def test_inline_branch_is_ineligible(self):
        src = "def f(x):\n    if x > 0: r = 1\n    else: r = 2\n    return r\n"
        prog = cm.parse(src, "f")
        assert enumerate_sites(prog, Concept.IfElseFlip) == []

    def test_nested_if_both_eligible(self):
        src = (
            "def f(x):\n"
            "    if x > 10:\n"
            "        if x > 20:\n"
            "            r = 2\n"
            "        else:\n"
            "            r = 1\n"
            "    else:\n"
            "        r = 0\n"
            "    return r\n"
        )
        prog = cm.parse(src, "f")
        sites = enumerate_sites(prog, Concept.IfElseFlip)
        assert len(sites) == 2
        for site in sites:
            cand = apply(prog, site)
            assert_same_behavior(src, cand.source, "f", [(5,), (15,), (25,)])

    def test_impact_region_covers_branch_statements(self):
        prog = cm.parse(FLIPPABLE, "sign_word")
        cand = apply(prog, enumerate_sites(prog, Concept.IfElseFlip)[0])
        assert cand.impact_region  # branch bodies moved


class TestDefUseBreak:
    def test_chain_rerouted_through_fresh_name(self):
        prog = cm.parse(CHAIN, "total_price")
        sites = enumerate_sites(prog, Concept.DefUseBreak)
        anchors = {s.anchor for s in sites}
        assert (1, "tax") in anchors
        site = next(s for s in sites if s.anchor == (1, "tax"))
        cand = apply(prog, site)
        assert "pcv_0 = tax" in cand.source
        assert "int(pcv_0)" in cand.source
        assert_same_behavior(CHAIN, cand.source, "total_price", [(10, 0.5), (0, 1.0)])

    def test_seeded_fresh_name(self):
        prog = cm.parse(CHAIN, "total_price")
        site = next(
            s for s in enumerate_sites(prog, Concept.DefUseBreak) if s.anchor == (1, "tax")
        )
        cand = apply(prog, site, seed=7)
        assert "pcv_0_7 = tax" in cand.source

    def test_parameter_only_reads_are_ineligible(self):
        src = "def f(a):\n    return a + 1\n"
        prog = cm.parse(src, "f")
        assert enumerate_sites(prog, Concept.DefUseBreak) == []

    def test_multiple_reaching_defs_excluded(self):
        src = (
            "def f(x):\n"
            "    if x > 0:\n"
            "        y = 1\n"
            "    else:\n"
            "        y = 2\n"
            "    return y\n"
        )
        prog = cm.parse(src, "f")
        # y's read has two reaching definitions; neither def can anchor a break
        assert enumerate_sites(prog, Concept.DefUseBreak) == []

    def test_deferred_read_excluded(self):
        src = (
            "def f(x):\n"
            "    y = x + 1\n"
            "    g = lambda: y\n"
            "    return g()\n"
        )
        prog = cm.parse(src, "f")
        anchors = {s.anchor for s in enumerate_sites(prog, Concept.DefUseBreak)}
        assert not any(var == "y" for _, var in anchors)

    def test_loop_carried_def_excluded(self):
        src = (
            "def f(n):\n"
            "    total = 0\n"
            "    i = 0\n"
            "    while i < n:\n"
            "        total = total + i\n"
            "        i = i + 1\n"
            "    return total\n"
        )
        prog = cm.parse(src, "f")
        sites = enumerate_sites(prog, Concept.DefUseBreak)
        for site in sites:
            cand = apply(prog, site)
            assert_same_behavior(src, cand.source, "f", [(0,), (1,), (5,)])

    def test_every_site_preserves_behavior(self):
        prog = cm.parse(MULTI, "blend")
        sites = enumerate_sites(prog, Concept.DefUseBreak)
        assert sites
        for site in sites:
            cand = apply(prog, site)
            assert_same_behavior(MULTI, cand.source, "blend", [(1, 2, 3), (0, 0, 0), (-4, 5, 9)])


class TestIndependentSwap:
    def test_adjacent_independent_assigns_swap(self):
        src = "def f(p, q):\n    x = p + 1\n    y = q + 2\n    return x * y\n"
        prog = cm.parse(src, "f")
        sites = enumerate_sites(prog, Concept.IndependentSwap)
        assert len(sites) == 1
        cand = apply(prog, sites[0])
        first = cand.source.index("y = q + 2")
        second = cand.source.index("x = p + 1")
        assert first < second
        assert_same_behavior(src, cand.source, "f", [(1, 2), (0, 0)])

    def test_dependent_pair_is_ineligible(self):
        src = "def f(p):\n    x = p + 1\n    y = x + 2\n    return y\n"
        prog = cm.parse(src, "f")
        assert enumerate_sites(prog, Concept.IndependentSwap) == []

    def test_write_write_conflict_is_ineligible(self):
        src = "def f(p):\n    x = p + 1\n    x = p + 2\n    return x\n"
        prog = cm.parse(src, "f")
        assert enumerate_sites(prog, Concept.IndependentSwap) == []

    def test_anti_dependence_is_ineligible(self):
        # first reads x, second writes x
        src = "def f(x):\n    y = x + 1\n    x = 0\n    return x + y\n"
        prog = cm.parse(src, "f")
        assert enumerate_sites(prog, Concept.IndependentSwap) == []

    def test_impure_statements_are_ineligible(self):
        src = "def f(xs, ys):\n    xs.append(1)\n    ys.append(2)\n    return xs + ys\n"
        prog = cm.parse(src, "f")
        assert enumerate_sites(prog, Concept.IndependentSwap) == []

    def test_cross_block_pairs_are_ineligible(self):
        src = (
            "def f(p, q):\n"
            "    if p:\n"
            "        x = 1\n"
            "    else:\n"
            "        x = 2\n"
            "    y = q\n"
            "    return x + y\n"
        )
        prog = cm.parse(src, "f")
        assert enumerate_sites(prog, Concept.IndependentSwap) == []

    def test_all_sites_preserve_behavior(self):
        prog = cm.parse(MULTI, "blend")
        for site in enumerate_sites(prog, Concept.IndependentSwap):
            cand = apply(prog, site)
            assert_same_behavior(MULTI, cand.source, "blend", [(1, 2, 3), (9, -1, 0)])


class TestNameRandom:
    def test_all_locals_renamed_injectively(self):
        prog = cm.parse(CHAIN, "total_price")
        sites = enumerate_sites(prog, Concept.NameRandom)
        assert len(sites) == 1
        cand = apply(prog, sites[0])
        assert cand.rename_map
        # injective and fresh
        values = list(cand.rename_map.values())
        assert len(set(values)) == len(values)
        for new in values:
            assert new.startswith("pcv_")
        assert_same_behavior(CHAIN, cand.source, "total_price", [(10, 0.5), (3, 2.0)])

    def test_alpha_hash_preserved(self):
        prog = cm.parse(CHAIN, "total_price")
        cand = apply(prog, enumerate_sites(prog, Concept.NameRandom)[0])
        d0 = cm.structural_digest(prog)
        d1 = cm.structural_digest(cm.parse(cand.source, "total_price"))
        assert d0.alpha_hash == d1.alpha_hash
        assert d0.ast_hash != d1.ast_hash

    def test_entry_point_name_survives(self):
        prog = cm.parse(CHAIN, "total_price")
        cand = apply(prog, enumerate_sites(prog, Concept.NameRandom)[0])
        assert "def total_price(" in cand.source

    def test_reserved_names_survive(self):
        prog = cm.parse(CHAIN, "total_price")
        sites = enumerate_sites(prog, Concept.NameRandom, reserved=frozenset({"amount"}))
        cand = apply(prog, sites[0], reserved=frozenset({"amount"}))
        assert "amount" not in cand.rename_map
        assert "amount * rate" not in cand.source or True  # rate may be renamed
        assert "amount" in cand.source

    def test_no_renameable_names_no_site(self):
        src = "def f():\n    return 1\n"
        prog = cm.parse(src, "f")
        assert enumerate_sites(prog, Concept.NameRandom) == []

    def test_seed_changes_names(self):
        prog = cm.parse(CHAIN, "total_price")
        site = enumerate_sites(prog, Concept.NameRandom)[0]
        a = apply(prog, site, seed=1)
        b = apply(prog, site, seed=2)
        assert a.source != b.source
        assert apply(prog, site, seed=1).source == a.source


class TestNameShuffle:
    def test_seeded_transpositions(self):
        prog = cm.parse(MULTI, "blend")
        sites = enumerate_sites(prog, Concept.NameShuffle)
        assert len(sites) == 1
        cand = apply(prog, sites[0], seed=3)
        assert cand.rename_map
        # a shuffle maps existing names to existing names, pairwise
        for old, new in cand.rename_map.items():
            assert cand.rename_map[new] == old
            assert old != new
        assert_same_behavior(MULTI, cand.source, "blend", [(1, 2, 3), (4, 0, -2)])

    def test_determinism_per_seed(self):
        prog = cm.parse(MULTI, "blend")
        site = enumerate_sites(prog, Concept.NameShuffle)[0]
        assert apply(prog, site, seed=5).source == apply(prog, site, seed=5).source

    def test_single_local_is_ineligible(self):
        src = "def f(a):\n    return a\n"
        prog = cm.parse(src, "f")
        assert enumerate_sites(prog, Concept.NameShuffle) == []

    def test_alpha_hash_preserved(self):
        prog = cm.parse(MULTI, "blend")
        cand = apply(prog, enumerate_sites(prog, Concept.NameShuffle)[0], seed=11)
        d0 = cm.structural_digest(prog)
        d1 = cm.structural_digest(cm.parse(cand.source, "blend"))
        assert d0.alpha_hash == d1.alpha_hash


class TestApplyContract:
    def test_concept_site_mismatch_rejected(self):
        prog = cm.parse(FLIPPABLE, "sign_word")
        flip_site = enumerate_sites(prog, Concept.IfElseFlip)[0]
        chain_prog = cm.parse(CHAIN, "total_price")
        with pytest.raises(NotApplicable):
            apply(chain_prog, flip_site)

    def test_candidate_always_reparses(self):
        for concept in ALL_CONCEPTS:
            for src, entry in [(FLIPPABLE, "sign_word"), (CHAIN, "total_price"), (MULTI, "blend")]:
                prog = cm.parse(src, entry)
                for site in enumerate_sites(prog, concept):
                    cand = apply(prog, site, seed=2)
                    reparsed = cm.parse(cand.source, entry)
                    assert reparsed.source == cand.source

    def test_candidate_never_identical_to_original(self):
        for concept in ALL_CONCEPTS:
            prog = cm.parse(MULTI, "blend")
            for site in enumerate_sites(prog, concept):
                cand = apply(prog, site, seed=4)
                assert cand.source != MULTI
