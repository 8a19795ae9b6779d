"""Pure-Python alignment kernel.

Maximizes the total character weight of matched tokens between two token-id
sequences (a weighted longest-common-subsequence).  `symbol_weights` is
indexed by symbol id, not by position: every id appearing in either sequence
must be a valid index into it.  The traceback order is part of the contract:
the C kernel in _speedups.pyx mirrors it exactly, so both produce identical
masks, not merely equally-optimal ones.
"""

from __future__ import annotations


def match_mask(
    a_ids: list[int], b_ids: list[int], symbol_weights: list[int]
) -> bytearray:
    """Returns a 0/1 mask over b_ids; 1 marks tokens matched to the original."""
    n, m = len(a_ids), len(b_ids)
    limit = len(symbol_weights)
    for seq in (a_ids, b_ids):
        for sid in seq:
            if not 0 <= sid < limit:
                raise ValueError(f"symbol id {sid} outside weight table of {limit}")
    mask = bytearray(m)
    if n == 0 or m == 0:
        return mask
    width = m + 1
    dp = [0] * ((n + 1) * width)
    for i in range(1, n + 1):
        ai = a_ids[i - 1]
        row = i * width
        prev = row - width
        for j in range(1, m + 1):
            best = dp[prev + j]
            left = dp[row + j - 1]
            if left > best:
                best = left
            if ai == b_ids[j - 1]:
                diag = dp[prev + j - 1] + symbol_weights[ai]
                if diag > best:
                    best = diag
            dp[row + j] = best
    i, j = n, m
    while i > 0 and j > 0:
        here = dp[i * width + j]
        if (
            a_ids[i - 1] == b_ids[j - 1]
            and here == dp[(i - 1) * width + j - 1] + symbol_weights[a_ids[i - 1]]
        ):
            mask[j - 1] = 1
            i -= 1
            j -= 1
        elif here == dp[(i - 1) * width + j]:
            i -= 1
        else:
            j -= 1
    return mask
