# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
"""C implementation of the weighted-LCS alignment kernel.

Mirrors procure._lcs.match_mask exactly, including traceback order.
`symbol_weights` is indexed by symbol id; ids are range-checked up front
because bounds checking is disabled in the hot loops.
"""

from libc.stdlib cimport free, malloc


def match_mask(a_ids, b_ids, symbol_weights):
    cdef Py_ssize_t n = len(a_ids)
    cdef Py_ssize_t m = len(b_ids)
    cdef Py_ssize_t n_sym = len(symbol_weights)
    mask = bytearray(m)

    cdef Py_ssize_t i, j
    for i in range(n):
        j = a_ids[i]
        if j < 0 or j >= n_sym:
            raise ValueError(f"symbol id {j} outside weight table of {n_sym}")
    for i in range(m):
        j = b_ids[i]
        if j < 0 or j >= n_sym:
            raise ValueError(f"symbol id {j} outside weight table of {n_sym}")
    if n == 0 or m == 0:
        return mask

    cdef long long *a = <long long *> malloc(n * sizeof(long long))
    cdef long long *b = <long long *> malloc(m * sizeof(long long))
    cdef long long *w = <long long *> malloc(n_sym * sizeof(long long))
    cdef long long *dp = <long long *> malloc((n + 1) * (m + 1) * sizeof(long long))
    if a == NULL or b == NULL or w == NULL or dp == NULL:
        free(a); free(b); free(w); free(dp)
        raise MemoryError()

    cdef long long best, left, diag, ai
    cdef Py_ssize_t width = m + 1
    try:
        for i in range(n):
            a[i] = a_ids[i]
        for i in range(m):
            b[i] = b_ids[i]
        for i in range(n_sym):
            w[i] = symbol_weights[i]
        for j in range(width):
            dp[j] = 0
        for i in range(1, n + 1):
            dp[i * width] = 0
            ai = a[i - 1]
            for j in range(1, width):
                best = dp[(i - 1) * width + j]
                left = dp[i * width + j - 1]
                if left > best:
                    best = left
                if ai == b[j - 1]:
                    diag = dp[(i - 1) * width + j - 1] + w[ai]
                    if diag > best:
                        best = diag
                dp[i * width + j] = best
        i = n
        j = m
        while i > 0 and j > 0:
            best = dp[i * width + j]
            if a[i - 1] == b[j - 1] and best == dp[(i - 1) * width + j - 1] + w[a[i - 1]]:
                mask[j - 1] = 1
                i -= 1
                j -= 1
            elif best == dp[(i - 1) * width + j]:
                i -= 1
            else:
                j -= 1
    finally:
        free(a)
        free(b)
        free(w)
        free(dp)
    return mask
