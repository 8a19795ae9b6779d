"""Rule-based generation of semantics-preserving counterfactual programs.

Five perturbation concepts are supported:

* IfElseFlip      negate a conditional and swap its branches
* DefUseBreak     route a def-use chain through a fresh intermediate
* IndependentSwap reorder two adjacent independent pure statements
* NameRandom      rename every safely-renameable identifier to a fresh one
* NameShuffle     swap the names of existing identifiers pairwise

All transforms are textual splices driven by AST positions, so formatting
outside the touched region survives byte-for-byte.
"""

from __future__ import annotations

import ast
import enum
import random
from dataclasses import dataclass, field

from . import code_model as cm
from .errors import NotApplicable


class Concept(str, enum.Enum):
    IfElseFlip = "IfElseFlip"
    DefUseBreak = "DefUseBreak"
    IndependentSwap = "IndependentSwap"
    NameRandom = "NameRandom"
    NameShuffle = "NameShuffle"

    def __str__(self) -> str:  # keep CLI/JSON output free of the enum prefix
        return self.value


ALL_CONCEPTS: tuple[Concept, ...] = tuple(Concept)

_SWAPPABLE_KINDS = {"assign", "helper"}


@dataclass(frozen=True)
class PerturbationSite:
    concept: Concept
    anchor: tuple
    elements: frozenset[str]
    notes: str


@dataclass(frozen=True)
class CounterfactualCandidate:
    concept: Concept
    source: str
    site: PerturbationSite
    impact_region: frozenset[int]
    rename_map: dict[str, str] | None
    attempt: int = 1


# ---------------------------------------------------------------------------
# shared helpers


def _whole_line(unit, lines: cm._LineIndex) -> bool:
    """True when the statement owns its line(s): nothing but whitespace before
    it and nothing but whitespace/comment after it."""
    node = unit.node
    prefix = lines.line_text(node.lineno)[: node.col_offset]
    if prefix.strip():
        return False
    suffix = lines.line_text(node.end_lineno)[node.end_col_offset :]
    trimmed = suffix.strip()
    return trimmed == "" or trimmed.startswith("#")


def _splice(source: str, repls: list[tuple[int, int, str]]) -> str:
    ordered = sorted(repls, key=lambda r: r[0], reverse=True)
    for i in range(len(ordered) - 1):
        if ordered[i + 1][1] > ordered[i][0]:
            raise NotApplicable("overlapping edit regions")
    out = source
    for start, end, text in ordered:
        out = out[:start] + text + out[end:]
    return out


def _finish(
    program: cm.SubjectProgram,
    concept: Concept,
    site: PerturbationSite,
    new_source: str,
    impact: frozenset[int],
    rename_map: dict[str, str] | None,
) -> CounterfactualCandidate:
    try:
        cm.parse(new_source, program.entry_point)
    except SyntaxError as exc:  # a transform bug, not a user error
        raise NotApplicable(f"transform produced invalid syntax: {exc}") from exc
    if cm.raw_text_hash(new_source) == cm.raw_text_hash(program.source):
        raise NotApplicable("transform did not change the program")
    return CounterfactualCandidate(
        concept=concept,
        source=new_source,
        site=site,
        impact_region=impact,
        rename_map=rename_map,
    )


# ---------------------------------------------------------------------------
# IfElseFlip


def _flip_eligible(ana: cm.ProgramAnalysis, unit) -> bool:
    node = unit.node
    if unit.kind != "if" or not node.orelse:
        return False
    start = ana.lines.span(node)[0]
    if ana.source[start : start + 4] == "elif":
        return False
    first_else = node.orelse[0]
    if (
        len(node.orelse) == 1
        and isinstance(first_else, ast.If)
        and first_else.col_offset == node.col_offset
    ):
        return False  # elif chain
    body0 = node.body[0]
    if body0.lineno <= node.test.end_lineno:
        return False  # inline then-branch
    if first_else.lineno <= node.body[-1].end_lineno:
        return False  # inline else-branch
    if first_else.col_offset != body0.col_offset:
        return False
    return True


def _flip_sites(ana: cm.ProgramAnalysis) -> list[PerturbationSite]:
    sites = []
    for unit in ana.units:
        if _flip_eligible(ana, unit):
            test_text = ana.source[slice(*ana.lines.span(unit.node.test))]
            sites.append(
                PerturbationSite(
                    concept=Concept.IfElseFlip,
                    anchor=(unit.index,),
                    elements=frozenset({"then-branch", "else-branch"}),
                    notes=(
                        f"statement {unit.index} is an if/else with condition "
                        f"`{test_text}`; negating the condition and exchanging "
                        f"the branches preserves behavior"
                    ),
                )
            )
    return sites


def _apply_flip(
    program: cm.SubjectProgram, ana: cm.ProgramAnalysis, site: PerturbationSite
) -> CounterfactualCandidate:
    (index,) = site.anchor
    if not 1 <= index <= len(ana.units):
        raise NotApplicable("anchor out of range")
    unit = ana.unit(index)
    if not _flip_eligible(ana, unit):
        raise NotApplicable("statement is not a flippable if/else")
    node = unit.node
    lines = ana.lines
    test_start, test_end = lines.span(node.test)
    body_region = (lines.span(node.body[0])[0], lines.span(node.body[-1])[1])
    else_region = (lines.span(node.orelse[0])[0], lines.span(node.orelse[-1])[1])
    test_text = ana.source[test_start:test_end]
    body_text = ana.source[slice(*body_region)]
    else_text = ana.source[slice(*else_region)]
    new_source = _splice(
        ana.source,
        [
            (test_start, test_end, f"not ({test_text})"),
            (body_region[0], body_region[1], else_text),
            (else_region[0], else_region[1], body_text),
        ],
    )
    impact = frozenset(
        u.index
        for u in ana.units
        if body_region[0] <= u.full_span[0] < body_region[1]
        or else_region[0] <= u.full_span[0] < else_region[1]
    )
    return _finish(program, Concept.IfElseFlip, site, new_source, impact, None)


# ---------------------------------------------------------------------------
# DefUseBreak


def _reaching_definitions(ana: cm.ProgramAnalysis) -> dict[int, dict[str, frozenset[int]]]:
    """Per-statement reaching definitions over the CFG.

    Definition sites are statement indices; 0 stands for the parameter
    binding at function entry.  Only reachable statements get an entry.
    """
    cfg = ana.cfg
    params = cm._lambda_params(ana.func.args)

    def transfer(state: dict[str, frozenset[int]], unit) -> dict[str, frozenset[int]]:
        if not unit.defs:
            return state
        new = dict(state)
        for v in unit.defs:
            new[v] = frozenset({unit.index})
        return new

    entry_out = {p: frozenset({0}) for p in params}
    node_in: dict[int, dict[str, frozenset[int]]] = {cfg.entry: {}}
    node_out: dict[int, dict[str, frozenset[int]]] = {cfg.entry: entry_out}

    def merge(states: list[dict[str, frozenset[int]]]) -> dict[str, frozenset[int]]:
        out: dict[str, frozenset[int]] = {}
        for st in states:
            for v, defs in st.items():
                out[v] = out.get(v, frozenset()) | defs
        return out

    changed = True
    while changed:
        changed = False
        for nid, node in cfg.nodes.items():
            if nid == cfg.entry:
                continue
            preds = [node_out.get(e.src, {}) for e in cfg.predecessors(nid)]
            state = merge(preds)
            node_in[nid] = state
            for idx in node.stmts:
                state = transfer(state, ana.unit(idx))
            if state != node_out.get(nid):
                node_out[nid] = state
                changed = True

    before: dict[int, dict[str, frozenset[int]]] = {}
    for nid, node in cfg.nodes.items():
        state = node_in.get(nid, {})
        for idx in node.stmts:
            before[idx] = state
            state = transfer(state, ana.unit(idx))
    return before


def _chain_for(
    ana: cm.ProgramAnalysis,
    before: dict[int, dict[str, frozenset[int]]],
    def_index: int,
    var: str,
) -> list[int] | None:
    """Statement indices whose reads of `var` are reached solely by the given
    definition; None when the chain is empty or ambiguous."""
    uses = []
    for unit in ana.units:
        if var not in unit.uses or unit.index not in before:
            continue
        reaching = before[unit.index].get(var, frozenset())
        if def_index in reaching:
            if reaching != frozenset({def_index}):
                return None
            uses.append(unit.index)
    return uses or None


def _break_sites(ana: cm.ProgramAnalysis) -> list[PerturbationSite]:
    before = _reaching_definitions(ana)
    sites = []
    for unit in ana.units:
        if unit.kind != "assign" or not unit.defs:
            continue
        if unit.index not in before:
            continue  # unreachable
        if not _whole_line(unit, ana.lines):
            continue
        for var in sorted(unit.defs):
            if var in ana.deferred_reads:
                continue
            chain = _chain_for(ana, before, unit.index, var)
            if chain is None:
                continue
            sites.append(
                PerturbationSite(
                    concept=Concept.DefUseBreak,
                    anchor=(unit.index, var),
                    elements=frozenset({var}),
                    notes=(
                        f"`{var}` is defined at statement {unit.index} and read "
                        f"only from that definition at statement(s) "
                        f"{', '.join(map(str, chain))}; the chain can be routed "
                        f"through a fresh variable"
                    ),
                )
            )
    return sites


def _load_spans_in(
    unit, var: str, ana: cm.ProgramAnalysis
) -> list[tuple[int, int]]:
    """Spans of immediate Load occurrences of var in one statement, skipping
    nested function/lambda bodies and comprehension-shadowed regions.  For
    compound statements only the header expression is scanned; the body lines
    are separate units and get visited on their own."""
    spans: list[tuple[int, int]] = []

    def visit(n: ast.AST, shadowed: bool) -> None:
        if isinstance(n, ast.Name):
            if not shadowed and n.id == var and isinstance(n.ctx, ast.Load):
                start, end = ana.lines.span(n)
                if ana.source[start:end] == var:
                    spans.append((start, end))
            return
        if isinstance(n, (ast.FunctionDef, ast.Lambda)):
            return  # deferred scope; excluded by eligibility
        if isinstance(n, (ast.ListComp, ast.SetComp, ast.GeneratorExp, ast.DictComp)):
            bound: set[str] = set()
            for gen in n.generators:
                bound |= cm._target_names(gen.target)
            inner = shadowed or var in bound
            for child in ast.iter_child_nodes(n):
                visit(child, inner)
            return
        for child in ast.iter_child_nodes(n):
            visit(child, shadowed)

    node = unit.node
    if isinstance(node, (ast.If, ast.While)):
        roots: list[ast.AST] = [node.test]
    elif isinstance(node, ast.For):
        roots = [node.iter]
    else:
        roots = [node]
    for root in roots:
        visit(root, False)
    return spans


def _apply_break(
    program: cm.SubjectProgram,
    ana: cm.ProgramAnalysis,
    site: PerturbationSite,
    seed: int,
) -> CounterfactualCandidate:
    def_index, var = site.anchor
    if not 1 <= def_index <= len(ana.units):
        raise NotApplicable("anchor out of range")
    unit = ana.unit(def_index)
    before = _reaching_definitions(ana)
    if (
        unit.kind != "assign"
        or var not in unit.defs
        or var in ana.deferred_reads
        or def_index not in before
        or not _whole_line(unit, ana.lines)
    ):
        raise NotApplicable("definition site no longer eligible")
    chain = _chain_for(ana, before, def_index, var)
    if chain is None:
        raise NotApplicable("def-use chain is empty or ambiguous")

    fresh = cm.fresh_names(ana.all_identifiers(), 1, seed)[0]
    node = unit.node
    lines = ana.lines
    indent = lines.line_text(node.lineno)[: node.col_offset]
    insert_at = (
        lines.starts[node.end_lineno]
        if node.end_lineno < len(lines.starts)
        else len(ana.source)
    )
    newline_missing = insert_at == len(ana.source) and not ana.source.endswith("\n")
    insert_text = ("\n" if newline_missing else "") + f"{indent}{fresh} = {var}\n"

    repls: list[tuple[int, int, str]] = [(insert_at, insert_at, insert_text)]
    replaced = 0
    for use_index in chain:
        use_unit = ana.unit(use_index)
        for start, end in _load_spans_in(use_unit, var, ana):
            repls.append((start, end, fresh))
            replaced += 1
    if replaced == 0:
        raise NotApplicable("no replaceable reads in the chain")
    new_source = _splice(ana.source, repls)
    return _finish(
        program,
        Concept.DefUseBreak,
        site,
        new_source,
        impact=frozenset(chain),
        rename_map=None,
    )


# ---------------------------------------------------------------------------
# IndependentSwap


def _swap_conditions(u1, u2) -> bool:
    return (
        not (u1.defs & u2.defs)
        and not (u1.uses & u2.defs)
        and not (u1.defs & u2.uses)
    )


def _swap_eligible(ana: cm.ProgramAnalysis, u1, u2) -> bool:
    if u1.block != u2.block or u2.pos != u1.pos + 1:
        return False
    if u1.kind not in _SWAPPABLE_KINDS or u2.kind not in _SWAPPABLE_KINDS:
        return False
    if not (u1.is_pure and u2.is_pure):
        return False
    if not (_whole_line(u1, ana.lines) and _whole_line(u2, ana.lines)):
        return False
    return _swap_conditions(u1, u2)


def _swap_sites(ana: cm.ProgramAnalysis) -> list[PerturbationSite]:
    sites = []
    for u1, u2 in zip(ana.units, ana.units[1:]):
        if u2.index != u1.index + 1:
            continue
        if _swap_eligible(ana, u1, u2):
            sites.append(
                PerturbationSite(
                    concept=Concept.IndependentSwap,
                    anchor=(u1.index, u2.index),
                    elements=frozenset(u1.defs | u2.defs),
                    notes=(
                        f"statements {u1.index} and {u2.index} are pure and "
                        f"touch disjoint variables; their order does not matter"
                    ),
                )
            )
    return sites


def _apply_swap(
    program: cm.SubjectProgram, ana: cm.ProgramAnalysis, site: PerturbationSite
) -> CounterfactualCandidate:
    i, j = site.anchor
    if not (1 <= i <= len(ana.units) and 1 <= j <= len(ana.units)):
        raise NotApplicable("anchor out of range")
    u1, u2 = ana.unit(i), ana.unit(j)
    if not _swap_eligible(ana, u1, u2):
        raise NotApplicable("statements are not independently swappable")
    s1, s2 = u1.full_span, u2.full_span
    t1 = ana.source[slice(*s1)]
    t2 = ana.source[slice(*s2)]
    new_source = _splice(ana.source, [(s1[0], s1[1], t2), (s2[0], s2[1], t1)])
    return _finish(
        program,
        Concept.IndependentSwap,
        site,
        new_source,
        impact=frozenset({i, j}),
        rename_map=None,
    )


# ---------------------------------------------------------------------------
# renaming concepts


def _rename_site(ana: cm.ProgramAnalysis, concept: Concept, reserved: frozenset[str]):
    ids = ana.renameable_identifiers(reserved)
    minimum = 1 if concept is Concept.NameRandom else 2
    if len(ids) < minimum:
        return []
    action = (
        "each can be renamed to a fresh identifier"
        if concept is Concept.NameRandom
        else "their names can be exchanged pairwise"
    )
    return [
        PerturbationSite(
            concept=concept,
            anchor=tuple(ids),
            elements=frozenset(ids),
            notes=f"renameable identifiers: {', '.join(ids)}; {action}",
        )
    ]


def _rename_occurrences(
    program: cm.SubjectProgram,
    ana: cm.ProgramAnalysis,
    site: PerturbationSite,
    mapping: dict[str, str],
) -> CounterfactualCandidate:
    occurrences, failed = ana.identifier_occurrences(set(mapping))
    if failed:
        mapping = {k: v for k, v in mapping.items() if k not in failed}
    if not mapping:
        raise NotApplicable("no identifier occurrence could be rewritten safely")
    repls = [
        (start, end, mapping[name])
        for start, end, name in occurrences
        if name in mapping
    ]
    if not repls:
        raise NotApplicable("identifiers have no occurrences")
    new_source = _splice(ana.source, repls)
    touched = {
        u.index
        for u in ana.units
        if any(u.full_span[0] <= start < u.full_span[1] for start, _, _ in repls)
    }
    return _finish(
        program,
        site.concept,
        site,
        new_source,
        impact=frozenset(touched),
        rename_map=dict(mapping),
    )


def _apply_name_random(
    program: cm.SubjectProgram,
    ana: cm.ProgramAnalysis,
    site: PerturbationSite,
    seed: int,
    reserved: frozenset[str],
) -> CounterfactualCandidate:
    ids = [n for n in site.anchor if n in set(ana.renameable_identifiers(reserved))]
    if not ids:
        raise NotApplicable("no renameable identifiers remain")
    fresh = cm.fresh_names(ana.all_identifiers(), len(ids), seed)
    mapping = dict(zip(ids, fresh))
    return _rename_occurrences(program, ana, site, mapping)


def _apply_name_shuffle(
    program: cm.SubjectProgram,
    ana: cm.ProgramAnalysis,
    site: PerturbationSite,
    seed: int,
    reserved: frozenset[str],
) -> CounterfactualCandidate:
    ids = [n for n in site.anchor if n in set(ana.renameable_identifiers(reserved))]
    if len(ids) < 2:
        raise NotApplicable("need at least two renameable identifiers")
    rng = random.Random(seed)
    order = list(ids)
    rng.shuffle(order)
    pair_count = rng.randint(1, len(order) // 2)
    mapping: dict[str, str] = {}
    for k in range(pair_count):
        a, b = order[2 * k], order[2 * k + 1]
        mapping[a] = b
        mapping[b] = a
    return _rename_occurrences(program, ana, site, mapping)


# ---------------------------------------------------------------------------
# public interface


def enumerate_sites(
    program: cm.SubjectProgram,
    concept: Concept,
    reserved: frozenset[str] = frozenset(),
) -> list[PerturbationSite]:
    """All sites where the concept applies.  An empty list means the program
    is non-perturbable for this concept."""
    ana = cm.analyze(program)
    concept = Concept(concept)
    if concept is Concept.IfElseFlip:
        return _flip_sites(ana)
    if concept is Concept.DefUseBreak:
        return _break_sites(ana)
    if concept is Concept.IndependentSwap:
        return _swap_sites(ana)
    return _rename_site(ana, concept, reserved)


def apply(
    program: cm.SubjectProgram,
    site: PerturbationSite,
    seed: int = 0,
    reserved: frozenset[str] = frozenset(),
) -> CounterfactualCandidate:
    """Materialize a site into a counterfactual candidate.  Deterministic in
    (program, site, seed); raises NotApplicable when the site does not fit."""
    ana = cm.analyze(program)
    concept = Concept(site.concept)
    if concept is Concept.IfElseFlip:
        return _apply_flip(program, ana, site)
    if concept is Concept.DefUseBreak:
        return _apply_break(program, ana, site, seed)
    if concept is Concept.IndependentSwap:
        return _apply_swap(program, ana, site)
    if concept is Concept.NameRandom:
        return _apply_name_random(program, ana, site, seed, reserved)
    return _apply_name_shuffle(program, ana, site, seed, reserved)
