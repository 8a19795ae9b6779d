"""Lexical token alignment between original and counterfactual sources.

Tokens are identifiers, numbers, strings, comments, operators, and
punctuation; whitespace never participates in matching but character
coordinates are preserved so downstream consumers can map spans back onto
the text.  Alignment maximizes matched characters, so the unmatched total
is exactly the minimum achievable by any token-level edit script.

The C kernel is used when the compiled extension is importable; otherwise
the pure-Python twin (same traceback order, identical masks) takes over.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

try:  # pragma: no cover - exercised indirectly via kernel_name()
    from ._speedups import match_mask as _match_mask

    _KERNEL = "c"
except ImportError:  # pragma: no cover
    from ._lcs import match_mask as _match_mask

    _KERNEL = "python"


def kernel_name() -> str:
    return _KERNEL


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int
    kind: str


_TOKEN_RE = re.compile(
    r"""
    (?P<comment>\#[^\n]*)
  | (?P<string>
        (?:[rRbBuUfF]{1,3})?
        (?:
            \"\"\"(?:\\.|[^\\])*?\"\"\"
          | '''(?:\\.|[^\\])*?'''
          | "(?:\\.|[^"\\\n])*"
          | '(?:\\.|[^'\\\n])*'
        )
    )
  | (?P<number>\.?\d(?:[eE][+-]|[\w.])*)
  | (?P<name>[A-Za-z_]\w*)
  | (?P<op>
        \*\*=|//=|>>=|<<=|\.\.\.
      | !=|>=|<=|==|->|:=
      | \+=|-=|\*=|/=|%=|&=|\|=|\^=|@=
      | \*\*|//|<<|>>
      | .
    )
    """,
    re.VERBOSE,
)


def tokenize_text(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    size = len(text)
    while pos < size:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:  # unreachable: the op group matches any character
            pos += 1
            continue
        tokens.append(
            Token(text=m.group(), start=m.start(), end=m.end(), kind=m.lastgroup or "op")
        )
        pos = m.end()
    return tokens


def align_tokens(
    original: list[Token], counterfactual: list[Token]
) -> list[bool]:
    """True per counterfactual token when it matches the original."""
    symbols: dict[str, int] = {}
    weights: list[int] = []

    def intern(tok: Token) -> int:
        sid = symbols.get(tok.text)
        if sid is None:
            sid = len(symbols)
            symbols[tok.text] = sid
            weights.append(len(tok.text))
        return sid

    a_ids = [intern(t) for t in original]
    b_ids = [intern(t) for t in counterfactual]
    mask = _match_mask(a_ids, b_ids, weights)
    return [bool(v) for v in mask]


def annotate_diff(original: str, counterfactual: str) -> list[tuple[int, int]]:
    """Character spans in the counterfactual covering exactly the tokens that
    have no match in the original.  Spans are sorted, non-overlapping, and
    merged only when the underlying tokens touch."""
    toks_a = tokenize_text(original)
    toks_b = tokenize_text(counterfactual)
    mask = align_tokens(toks_a, toks_b)
    spans: list[tuple[int, int]] = []
    for tok, matched in zip(toks_b, mask):
        if matched:
            continue
        if spans and spans[-1][1] == tok.start:
            spans[-1] = (spans[-1][0], tok.end)
        else:
            spans.append((tok.start, tok.end))
    return spans
