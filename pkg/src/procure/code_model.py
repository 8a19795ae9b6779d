"""Static model of subject programs.

A subject program is the text of one complete Python function (module-level
imports, constants, and sibling helper functions may accompany it).  This
module parses it, splits the entry function into statement units with def/use
sets, builds an intra-procedural control-flow graph, and computes the
structural digests used by the validation fast path.

The analyzable subset covers assignments, expression statements, returns,
if/elif/else, for/while (without else clauses), pass/break/continue,
raise/assert, and opaque helper function definitions.  Async constructs,
try/except, with, classes, match, del, global/nonlocal, walrus bindings and
decorators are rejected with UnsupportedConstruct.
"""

from __future__ import annotations

import ast
import builtins
import copy
import hashlib
import re
import symtable
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import MissingEntryPoint, UnsupportedConstruct

PURE_CALL_WHITELIST = frozenset(
    {"len", "min", "max", "abs", "int", "float", "str", "ord", "chr"}
)

_SIMPLE_KINDS = {
    ast.Assign: "assign",
    ast.AugAssign: "assign",
    ast.AnnAssign: "assign",
    ast.Expr: "expr",
    ast.Return: "return",
    ast.Pass: "pass",
    ast.Break: "break",
    ast.Continue: "continue",
    ast.Raise: "raise",
    ast.Assert: "assert",
    ast.FunctionDef: "helper",
}

_BANNED_EXPRS = (ast.Await, ast.Yield, ast.YieldFrom, ast.NamedExpr)


@dataclass(frozen=True)
class SubjectProgram:
    """Source text plus the name of the function under study."""

    source: str
    entry_point: str
    origin: str = ""


@dataclass(frozen=True)
class StatementInfo:
    index: int
    span: tuple[int, int]
    defs: frozenset[str]
    uses: frozenset[str]
    is_pure: bool


@dataclass(frozen=True)
class StructuralDigest:
    raw_hash: str
    ast_hash: str
    alpha_hash: str


@dataclass(frozen=True)
class CfgNode:
    id: int
    kind: str  # entry | exit | block | cond | loop
    stmts: tuple[int, ...]
    label: tuple[str, ...]


@dataclass(frozen=True)
class CfgEdge:
    src: int
    dst: int
    label: str  # fallthrough | true | false | loop-back


@dataclass
class Cfg:
    nodes: dict[int, CfgNode]
    edges: list[CfgEdge]
    entry: int
    exit: int

    def successors(self, nid: int) -> list[CfgEdge]:
        return [e for e in self.edges if e.src == nid]

    def predecessors(self, nid: int) -> list[CfgEdge]:
        return [e for e in self.edges if e.dst == nid]


class _LineIndex:
    """Converts (lineno, col_offset) pairs into character offsets."""

    def __init__(self, source: str):
        self.source = source
        self.starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n":
                self.starts.append(i + 1)

    def offset(self, lineno: int, col: int) -> int:
        return self.starts[lineno - 1] + col

    def span(self, node: ast.AST) -> tuple[int, int]:
        return (
            self.offset(node.lineno, node.col_offset),
            self.offset(node.end_lineno, node.end_col_offset),
        )

    def line_text(self, lineno: int) -> str:
        start = self.starts[lineno - 1]
        end = self.starts[lineno] - 1 if lineno < len(self.starts) else len(self.source)
        return self.source[start:end]


@dataclass
class _Unit:
    index: int
    node: ast.stmt
    kind: str
    block: tuple
    pos: int
    defs: frozenset[str]
    uses: frozenset[str]
    is_pure: bool
    span: tuple[int, int]
    full_span: tuple[int, int]


def parse(source: str, entry_point: str, origin: str = "") -> SubjectProgram:
    """Validate syntax and entry-point presence; raises SyntaxError or
    MissingEntryPoint."""
    tree = ast.parse(source)
    if _find_entry(tree, entry_point) is None:
        for node in tree.body:
            if isinstance(node, ast.AsyncFunctionDef) and node.name == entry_point:
                raise UnsupportedConstruct("AsyncFunctionDef", node.lineno)
        raise MissingEntryPoint(entry_point)
    return SubjectProgram(source=source, entry_point=entry_point, origin=origin)


def _find_entry(tree: ast.Module, entry_point: str) -> ast.FunctionDef | None:
    found = None
    for node in tree.body:
        if isinstance(node, ast.FunctionDef) and node.name == entry_point:
            found = node
    return found


# ---------------------------------------------------------------------------
# def/use extraction


def _target_names(node: ast.AST) -> set[str]:
    if isinstance(node, ast.Name):
        return {node.id}
    if isinstance(node, (ast.Tuple, ast.List)):
        out: set[str] = set()
        for elt in node.elts:
            out |= _target_names(elt)
        return out
    if isinstance(node, ast.Starred):
        return _target_names(node.value)
    return set()


def _lambda_params(args: ast.arguments) -> set[str]:
    names = {a.arg for a in args.posonlyargs + args.args + args.kwonlyargs}
    if args.vararg:
        names.add(args.vararg.arg)
    if args.kwarg:
        names.add(args.kwarg.arg)
    return names


def _reads(node: ast.AST | None, bound: frozenset[str] = frozenset()) -> set[str]:
    """Identifiers read by an expression, honoring comprehension and lambda
    scopes (their targets and parameters do not escape)."""
    if node is None:
        return set()
    out: set[str] = set()

    def walk(n: ast.AST, bound: frozenset[str]) -> None:
        if isinstance(n, ast.Name):
            if isinstance(n.ctx, ast.Load) and n.id not in bound:
                out.add(n.id)
            return
        if isinstance(n, ast.Lambda):
            for d in n.args.defaults + [d for d in n.args.kw_defaults if d]:
                walk(d, bound)
            walk(n.body, bound | frozenset(_lambda_params(n.args)))
            return
        if isinstance(n, (ast.ListComp, ast.SetComp, ast.GeneratorExp, ast.DictComp)):
            inner = bound
            for i, gen in enumerate(n.generators):
                walk(gen.iter, bound if i == 0 else inner)
                inner = inner | frozenset(_target_names(gen.target))
                for cond in gen.ifs:
                    walk(cond, inner)
            if isinstance(n, ast.DictComp):
                walk(n.key, inner)
                walk(n.value, inner)
            else:
                walk(n.elt, inner)
            return
        for child in ast.iter_child_nodes(n):
            walk(child, bound)

    walk(node, bound)
    return out


def _stmt_def_use(node: ast.stmt, helper_uses: dict[int, frozenset[str]]) -> tuple[set, set]:
    if isinstance(node, ast.Assign):
        defs = set()
        for t in node.targets:
            defs |= _target_names(t)
        return defs, _reads(node)
    if isinstance(node, ast.AugAssign):
        uses = _reads(node)
        if isinstance(node.target, ast.Name):
            return {node.target.id}, uses | {node.target.id}
        return set(), uses
    if isinstance(node, ast.AnnAssign):
        if node.value is None:
            return set(), set()
        uses = _reads(node.value)
        if not isinstance(node.target, ast.Name):
            uses |= _reads(node.target)
            return set(), uses
        return {node.target.id}, uses
    if isinstance(node, (ast.Expr, ast.Return, ast.Raise, ast.Assert)):
        return set(), _reads(node)
    if isinstance(node, ast.If):
        return set(), _reads(node.test)
    if isinstance(node, ast.While):
        return set(), _reads(node.test)
    if isinstance(node, ast.For):
        return set(_target_names(node.target)), _reads(node.iter)
    if isinstance(node, ast.FunctionDef):
        return {node.name}, set(helper_uses.get(id(node), frozenset()))
    return set(), set()


def _contains_impurity(node: ast.stmt, local_names: frozenset[str]) -> bool:
    for n in ast.walk(node):
        if isinstance(n, ast.Call):
            f = n.func
            ok = (
                isinstance(f, ast.Name)
                and f.id in PURE_CALL_WHITELIST
                and f.id not in local_names
            )
            if not ok:
                return True
        elif isinstance(n, (ast.Subscript, ast.Attribute)):
            if isinstance(n.ctx, (ast.Store, ast.Del)):
                return True
        elif isinstance(n, (ast.Global, ast.Nonlocal, ast.Yield, ast.YieldFrom, ast.Await)):
            return True
    return False


# ---------------------------------------------------------------------------
# analysis


class ProgramAnalysis:
    """Everything the perturbation engine needs to know about one program."""

    def __init__(self, program: SubjectProgram):
        self.program = program
        self.source = program.source
        self.tree = ast.parse(program.source)
        func = _find_entry(self.tree, program.entry_point)
        if func is None:
            raise MissingEntryPoint(program.entry_point)
        self.func = func
        self.lines = _LineIndex(program.source)
        self._check_module_level()
        if func.decorator_list:
            raise UnsupportedConstruct("decorator", func.lineno)
        self._tables = self._scope_tables()
        self._helper_uses = self._collect_helper_uses()
        self.units: list[_Unit] = []
        func_table = self._function_table()
        self._local_names = frozenset(func_table.get_locals()) if func_table else frozenset()
        self._collect_units(func.body, block=())
        self.deferred_reads = self._collect_deferred_reads()
        self.alpha = _alpha_map(self.tree)
        self.cfg = self._build_cfg()

    # -- setup helpers

    def _check_module_level(self) -> None:
        for node in self.tree.body:
            if isinstance(node, (ast.Import, ast.ImportFrom, ast.FunctionDef)):
                continue
            if isinstance(node, (ast.Assign, ast.AnnAssign)):
                continue
            if isinstance(node, ast.Expr) and isinstance(node.value, ast.Constant):
                continue
            raise UnsupportedConstruct(type(node).__name__, getattr(node, "lineno", None))

    def _scope_tables(self):
        module_table = symtable.symtable(self.source, "<subject>", "exec")
        func_table = None
        for child in module_table.get_children():
            if child.get_name() == self.program.entry_point:
                func_table = child  # last definition wins, mirroring runtime
        return module_table, func_table

    def _function_table(self) -> symtable.SymbolTable:
        return self._tables[1]

    def _collect_helper_uses(self) -> dict[int, frozenset[str]]:
        """Map helper FunctionDef nodes to the names they read from the
        enclosing scope (symtable free variables)."""
        out: dict[int, frozenset[str]] = {}
        func_table = self._function_table()
        if func_table is None:
            return out
        children = {
            (c.get_name(), c.get_lineno()): c for c in func_table.get_children()
        }
        for node in ast.walk(self.func):
            if isinstance(node, ast.FunctionDef) and node is not self.func:
                tbl = children.get((node.name, node.lineno))
                if tbl is not None:
                    out[id(node)] = frozenset(tbl.get_frees())
        return out

    def _collect_deferred_reads(self) -> frozenset[str]:
        """Names read inside nested function or lambda bodies (evaluation is
        deferred to call time, so def-use rewiring must not touch them)."""
        func_table = self._function_table()
        if func_table is None:
            return frozenset()
        out: set[str] = set()

        def visit(tbl: symtable.SymbolTable, deferred: bool) -> None:
            if deferred:
                out.update(tbl.get_frees())
            for child in tbl.get_children():
                child_deferred = deferred or child.get_name() not in (
                    "listcomp",
                    "setcomp",
                    "dictcomp",
                    "genexpr",
                )
                visit(child, child_deferred)

        for child in func_table.get_children():
            visit(child, child.get_name() not in ("listcomp", "setcomp", "dictcomp", "genexpr"))
        return frozenset(out)

    # -- statement units

    def _collect_units(self, body: list[ast.stmt], block: tuple) -> None:
        for pos, node in enumerate(body):
            self._ban_exprs(node)
            if isinstance(node, ast.If):
                self._add_unit(node, "if", block, pos, span=self.lines.span(node.test))
                key = self.units[-1].index
                self._collect_units(node.body, block=block + (key, "body"))
                self._collect_units(node.orelse, block=block + (key, "orelse"))
            elif isinstance(node, ast.While):
                if node.orelse:
                    raise UnsupportedConstruct("loop-else", node.lineno)
                self._add_unit(node, "while", block, pos, span=self.lines.span(node.test))
                key = self.units[-1].index
                self._collect_units(node.body, block=block + (key, "body"))
            elif isinstance(node, ast.For):
                if node.orelse:
                    raise UnsupportedConstruct("loop-else", node.lineno)
                span = (
                    self.lines.span(node.target)[0],
                    self.lines.span(node.iter)[1],
                )
                self._add_unit(node, "for", block, pos, span=span)
                key = self.units[-1].index
                self._collect_units(node.body, block=block + (key, "body"))
            elif type(node) in _SIMPLE_KINDS:
                if isinstance(node, ast.FunctionDef) and node.decorator_list:
                    raise UnsupportedConstruct("decorator", node.lineno)
                self._add_unit(node, _SIMPLE_KINDS[type(node)], block, pos)
            else:
                raise UnsupportedConstruct(type(node).__name__, node.lineno)

    def _ban_exprs(self, node: ast.stmt) -> None:
        stack: list[ast.AST] = [node]
        while stack:
            n = stack.pop()
            if isinstance(n, _BANNED_EXPRS):
                raise UnsupportedConstruct(type(n).__name__, getattr(n, "lineno", None))
            if isinstance(n, (ast.comprehension,)) and n.is_async:
                raise UnsupportedConstruct("async comprehension", None)
            if isinstance(n, (ast.FunctionDef, ast.Lambda)) and n is not node:
                continue  # nested scopes are opaque
            if isinstance(n, (ast.If, ast.While, ast.For)) and n is not node:
                continue  # handled when their own unit is collected
            for child in ast.iter_child_nodes(n):
                stack.append(child)

    def _add_unit(
        self,
        node: ast.stmt,
        kind: str,
        block: tuple,
        pos: int,
        span: tuple[int, int] | None = None,
    ) -> None:
        defs, uses = _stmt_def_use(node, self._helper_uses)
        unit = _Unit(
            index=len(self.units) + 1,
            node=node,
            kind=kind,
            block=block,
            pos=pos,
            defs=frozenset(defs),
            uses=frozenset(uses),
            is_pure=not _contains_impurity(node, self._local_names),
            span=span if span is not None else self.lines.span(node),
            full_span=self.lines.span(node),
        )
        self.units.append(unit)

    def unit(self, index: int) -> _Unit:
        return self.units[index - 1]

    def block_members(self, block: tuple) -> list[_Unit]:
        return [u for u in self.units if u.block == block]

    # -- control-flow graph

    def _build_cfg(self) -> Cfg:
        nodes: dict[int, CfgNode] = {}
        edges: list[CfgEdge] = []
        counter = [0]

        def new_node(kind: str, stmts: tuple[int, ...], label: tuple[str, ...]) -> int:
            nid = counter[0]
            counter[0] += 1
            nodes[nid] = CfgNode(id=nid, kind=kind, stmts=stmts, label=label)
            return nid

        entry = new_node("entry", (), ())
        exit_id = new_node("exit", (), ())

        def attach(pends: list[tuple[int, str]], nid: int) -> None:
            for src, lbl in pends:
                edges.append(CfgEdge(src, nid, lbl))

        def stmt_label(unit: _Unit) -> str:
            node = unit.node
            if unit.kind == "if" or unit.kind == "while":
                target: ast.AST = node.test
            elif unit.kind == "for":
                target = ast.Tuple(elts=[node.target, node.iter], ctx=ast.Load())
            else:
                target = node
            return _alpha_dump(target, self.alpha)

        # loop_stack entries: (header_id, break_pends)
        loop_stack: list[tuple[int, list[tuple[int, str]]]] = []

        def build_body(units_in_block: list[_Unit], pends: list[tuple[int, str]]):
            current: list[_Unit] = []

            def flush() -> list[tuple[int, str]]:
                nonlocal pends, current
                if current:
                    nid = new_node(
                        "block",
                        tuple(u.index for u in current),
                        tuple(stmt_label(u) for u in current),
                    )
                    attach(pends, nid)
                    pends = [(nid, "fallthrough")]
                    current = []
                return pends

            for u in units_in_block:
                node = u.node
                if u.kind == "if":
                    flush()
                    cond = new_node("cond", (u.index,), (stmt_label(u),))
                    attach(pends, cond)
                    then_p = build_body(self._units_of(node.body), [(cond, "true")])
                    if node.orelse:
                        else_p = build_body(self._units_of(node.orelse), [(cond, "false")])
                    else:
                        else_p = [(cond, "false")]
                    pends = then_p + else_p
                elif u.kind in ("while", "for"):
                    flush()
                    hdr = new_node("loop", (u.index,), (stmt_label(u),))
                    attach(pends, hdr)
                    loop_stack.append((hdr, []))
                    body_p = build_body(self._units_of(node.body), [(hdr, "true")])
                    for src, _ in body_p:
                        edges.append(CfgEdge(src, hdr, "loop-back"))
                    _, breaks = loop_stack.pop()
                    pends = [(hdr, "false")] + breaks
                elif u.kind in ("return", "raise"):
                    current.append(u)
                    flush()
                    attach(pends, exit_id)
                    pends = []
                elif u.kind == "break":
                    current.append(u)
                    flush()
                    if not loop_stack:
                        raise UnsupportedConstruct("break outside loop", node.lineno)
                    loop_stack[-1][1].extend(pends)
                    pends = []
                elif u.kind == "continue":
                    current.append(u)
                    flush()
                    if not loop_stack:
                        raise UnsupportedConstruct("continue outside loop", node.lineno)
                    hdr, _ = loop_stack[-1]
                    for src, _lbl in pends:
                        edges.append(CfgEdge(src, hdr, "loop-back"))
                    pends = []
                else:
                    current.append(u)
            flush()
            return pends

        tail = build_body(self._units_of(self.func.body), [(entry, "fallthrough")])
        attach(tail, exit_id)

        cfg = Cfg(nodes=nodes, edges=edges, entry=entry, exit=exit_id)
        _prune_unreachable(cfg)
        return cfg

    def _units_of(self, body: list[ast.stmt]) -> list[_Unit]:
        wanted = {id(n) for n in body}
        return [u for u in self.units if id(u.node) in wanted]

    # -- identifiers

    def renameable_identifiers(self, reserved: frozenset[str] = frozenset()) -> list[str]:
        """Function-scope locals that can be renamed without changing
        behavior, in first-occurrence order.

        Excluded: the entry-point name, imported names, builtins, names bound
        in any nested scope (shadowing would make a uniform rename unsound),
        names declared global in a nested scope, names used as keyword
        arguments anywhere in the program, and the caller-supplied reserved
        set (typically keyword arguments found in the test suite).
        """
        func_table = self._function_table()
        if func_table is None:
            return []
        blocked: set[str] = {self.program.entry_point}
        blocked.update(reserved)
        blocked.update(n for n in vars(builtins))
        for node in ast.walk(self.tree):
            if isinstance(node, ast.keyword) and node.arg:
                blocked.add(node.arg)
            if isinstance(node, (ast.Import, ast.ImportFrom)):
                for alias in node.names:
                    blocked.add(alias.asname or alias.name.split(".")[0])

        def nested_bound(tbl: symtable.SymbolTable) -> None:
            for child in tbl.get_children():
                for name in child.get_locals():
                    blocked.add(name)
                if child.get_type() == "function":
                    for name in child.get_parameters():
                        blocked.add(name)
                for sym in child.get_symbols():
                    if sym.is_global():
                        blocked.add(sym.get_name())
                nested_bound(child)

        nested_bound(func_table)

        candidates = set()
        for name in func_table.get_locals():
            try:
                sym = func_table.lookup(name)
            except KeyError:
                continue
            if not sym.is_local() or sym.is_imported():
                continue
            if name in blocked or not name.isidentifier():
                continue
            candidates.add(name)
        ordered = [n for n in _occurrence_order(self.func) if n in candidates]
        return ordered

    def identifier_occurrences(self, names: set[str]) -> tuple[list[tuple[int, int, str]], set[str]]:
        """Character spans of every occurrence of each name inside the entry
        function, honoring nested-scope shadowing.

        Returns (occurrences, failed) where failed holds names for which some
        occurrence could not be verified against the source text (those must
        not be renamed).
        """
        occurrences: list[tuple[int, int, str]] = []
        failed: set[str] = set()

        def bound_in_scope(n: ast.AST) -> set[str]:
            if not isinstance(n, (ast.FunctionDef, ast.Lambda)):
                return set()
            bound = set(_lambda_params(n.args))
            globals_declared: set[str] = set()
            nodes = [n.body] if isinstance(n, ast.Lambda) else list(n.body)
            for sub in nodes:
                for x in ast.walk(sub):
                    if isinstance(x, ast.Name) and isinstance(x.ctx, (ast.Store, ast.Del)):
                        bound.add(x.id)
                    elif isinstance(x, ast.FunctionDef):
                        bound.add(x.name)
                    elif isinstance(x, ast.Global):
                        globals_declared.update(x.names)
                    elif isinstance(x, ast.Nonlocal):
                        bound.difference_update(x.names)
            return bound | globals_declared

        def visit(n: ast.AST, active: frozenset[str]) -> None:
            if isinstance(n, ast.Name) and n.id in active:
                start, end = self.lines.span(n)
                if self.source[start:end] == n.id:
                    occurrences.append((start, end, n.id))
                else:
                    failed.add(n.id)
                return
            if isinstance(n, ast.arg) and n.arg in active:
                start = self.lines.offset(n.lineno, n.col_offset)
                end = start + len(n.arg)
                if self.source[start:end] == n.arg:
                    occurrences.append((start, end, n.arg))
                else:
                    failed.add(n.arg)
                # annotation, if any, is visited by the caller loop
            if isinstance(n, (ast.FunctionDef, ast.Lambda)) and n is not self.func:
                shadowed = bound_in_scope(n)
                inner = frozenset(a for a in active if a not in shadowed)
                if isinstance(n, ast.FunctionDef) and n.name in active:
                    start = self.lines.span(n)[0]
                    m = re.compile(r"def\s+").match(self.source, start)
                    if m and self.source[m.end() : m.end() + len(n.name)] == n.name:
                        occurrences.append((m.end(), m.end() + len(n.name), n.name))
                    else:
                        failed.add(n.name)
                for child in ast.iter_child_nodes(n):
                    visit(child, inner)
                return
            if isinstance(n, (ast.ListComp, ast.SetComp, ast.GeneratorExp, ast.DictComp)):
                comp_bound: set[str] = set()
                for gen in n.generators:
                    comp_bound |= _target_names(gen.target)
                inner = frozenset(a for a in active if a not in comp_bound)
                for child in ast.iter_child_nodes(n):
                    visit(child, inner)
                return
            for child in ast.iter_child_nodes(n):
                visit(child, active)

        for default in self.func.args.defaults + [d for d in self.func.args.kw_defaults if d]:
            visit(default, frozenset(names))
        for a in (
            self.func.args.posonlyargs
            + self.func.args.args
            + self.func.args.kwonlyargs
            + ([self.func.args.vararg] if self.func.args.vararg else [])
            + ([self.func.args.kwarg] if self.func.args.kwarg else [])
        ):
            visit(a, frozenset(names))
        for stmt in self.func.body:
            visit(stmt, frozenset(names))
        return occurrences, failed

    def all_identifiers(self) -> set[str]:
        out: set[str] = set()
        for node in ast.walk(self.tree):
            if isinstance(node, ast.Name):
                out.add(node.id)
            elif isinstance(node, ast.arg):
                out.add(node.arg)
            elif isinstance(node, ast.FunctionDef):
                out.add(node.name)
            elif isinstance(node, ast.alias):
                out.add((node.asname or node.name).split(".")[0])
            elif isinstance(node, ast.keyword) and node.arg:
                out.add(node.arg)
            elif isinstance(node, ast.Attribute):
                out.add(node.attr)
        return out


def _prune_unreachable(cfg: Cfg) -> None:
    seen = {cfg.entry}
    frontier = [cfg.entry]
    while frontier:
        nid = frontier.pop()
        for e in cfg.edges:
            if e.src == nid and e.dst not in seen:
                seen.add(e.dst)
                frontier.append(e.dst)
    seen.add(cfg.exit)
    cfg.nodes = {k: v for k, v in cfg.nodes.items() if k in seen}
    cfg.edges = [e for e in cfg.edges if e.src in seen and e.dst in seen]


@lru_cache(maxsize=256)
def analyze(program: SubjectProgram) -> ProgramAnalysis:
    return ProgramAnalysis(program)


def def_use_sets(program: SubjectProgram) -> list[StatementInfo]:
    ana = analyze(program)
    return [
        StatementInfo(
            index=u.index,
            span=u.span,
            defs=u.defs,
            uses=u.uses,
            is_pure=u.is_pure,
        )
        for u in ana.units
    ]


def build_cfg(program: SubjectProgram) -> Cfg:
    return analyze(program).cfg


# ---------------------------------------------------------------------------
# digests


def raw_text_hash(text: str) -> str:
    """Hash of the source with trailing spaces stripped, newlines normalized,
    and trailing blank lines removed."""
    normalized = text.replace("\r\n", "\n").replace("\r", "\n")
    lines = [line.rstrip() for line in normalized.split("\n")]
    body = "\n".join(lines).rstrip("\n")
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


_IDENT_FIELDS = {
    ast.Name: "id",
    ast.arg: "arg",
    ast.FunctionDef: "name",
    ast.AsyncFunctionDef: "name",
    ast.ClassDef: "name",
}


def _occurrence_order(tree: ast.AST) -> list[str]:
    """All identifiers in deterministic first-occurrence (document) order."""
    order: list[str] = []
    seen: set[str] = set()

    def note(name: str) -> None:
        if name not in seen:
            seen.add(name)
            order.append(name)

    def visit(node: ast.AST) -> None:
        fieldname = _IDENT_FIELDS.get(type(node))
        if fieldname is not None:
            note(getattr(node, fieldname))
        if isinstance(node, ast.alias):
            note((node.asname or node.name).split(".")[0])
        if isinstance(node, ast.keyword) and node.arg:
            note(node.arg)
        if isinstance(node, (ast.Global, ast.Nonlocal)):
            for n in node.names:
                note(n)
        for child in ast.iter_child_nodes(node):
            visit(child)

    visit(tree)
    return order


def _alpha_map(tree: ast.AST) -> dict[str, str]:
    return {name: f"v{i}" for i, name in enumerate(_occurrence_order(tree))}


class _AlphaRenamer(ast.NodeTransformer):
    def __init__(self, mapping: dict[str, str]):
        self.mapping = mapping

    def _rename(self, name: str) -> str:
        return self.mapping.get(name, name)

    def visit_Name(self, node: ast.Name):
        node.id = self._rename(node.id)
        return self.generic_visit(node)

    def visit_arg(self, node: ast.arg):
        node.arg = self._rename(node.arg)
        return self.generic_visit(node)

    def visit_FunctionDef(self, node: ast.FunctionDef):
        node.name = self._rename(node.name)
        return self.generic_visit(node)

    def visit_AsyncFunctionDef(self, node):
        node.name = self._rename(node.name)
        return self.generic_visit(node)

    def visit_ClassDef(self, node):
        node.name = self._rename(node.name)
        return self.generic_visit(node)

    def visit_alias(self, node: ast.alias):
        key = (node.asname or node.name).split(".")[0]
        if node.asname:
            node.asname = self._rename(node.asname)
        elif key in self.mapping and "." not in node.name:
            node.name = self._rename(node.name)
        return node

    def visit_keyword(self, node: ast.keyword):
        if node.arg:
            node.arg = self._rename(node.arg)
        return self.generic_visit(node)

    def visit_Global(self, node: ast.Global):
        node.names = [self._rename(n) for n in node.names]
        return node

    def visit_Nonlocal(self, node: ast.Nonlocal):
        node.names = [self._rename(n) for n in node.names]
        return node


def _alpha_dump(node: ast.AST, mapping: dict[str, str]) -> str:
    clone = copy.deepcopy(node)
    clone = _AlphaRenamer(mapping).visit(clone)
    return ast.dump(clone)


def structural_digest(program: SubjectProgram) -> StructuralDigest:
    tree = ast.parse(program.source)
    ast_hash = hashlib.sha256(ast.dump(tree).encode("utf-8")).hexdigest()
    alpha_dump = _alpha_dump(tree, _alpha_map(tree))
    alpha_hash = hashlib.sha256(alpha_dump.encode("utf-8")).hexdigest()
    return StructuralDigest(
        raw_hash=raw_text_hash(program.source),
        ast_hash=ast_hash,
        alpha_hash=alpha_hash,
    )


# ---------------------------------------------------------------------------
# CFG equivalence


def _canonical_form(cfg: Cfg) -> str:
    order: dict[int, int] = {}
    parts: list[str] = []

    def visit(nid: int) -> None:
        if nid in order:
            parts.append(f"ref={order[nid]}")
            return
        order[nid] = len(order)
        node = cfg.nodes[nid]
        parts.append("node=" + node.kind + "\x1e" + "\x1f".join(node.label))
        for e in sorted(cfg.successors(nid), key=lambda e: e.label):
            parts.append("edge=" + e.label)
            visit(e.dst)

    visit(cfg.entry)
    return "\x1d".join(parts)


def cfg_equivalent(a: Cfg, b: Cfg) -> bool:
    """Label-preserving isomorphism of the reachable graphs, where node
    labels pair the node kind with its alpha-renumbered statement text."""
    return _canonical_form(a) == _canonical_form(b)


def fresh_names(existing: set[str], count: int, seed: int = 0) -> list[str]:
    """Deterministic fresh identifiers outside `existing`.

    Names follow pcv_<k> with the smallest non-colliding k; a nonzero seed
    appends a _<seed mod 997> tag before resolving collisions.
    """
    out: list[str] = []
    taken = set(existing)
    k = 0
    while len(out) < count:
        name = f"pcv_{k}" if seed == 0 else f"pcv_{k}_{seed % 997}"
        k += 1
        if name in taken:
            continue
        taken.add(name)
        out.append(name)
    return out
