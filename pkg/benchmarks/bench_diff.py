"""Compares the compiled LCS kernel against the pure-Python fallback.

Run:  python benchmarks/bench_diff.py [--sizes 64,256,1024] [--repeat 5]

Both kernels must return identical masks; the benchmark asserts that before
reporting timings.
"""

from __future__ import annotations

import argparse
import random
import time

from procure import _lcs
from procure.diff import tokenize_text

try:
    from procure import _speedups
except ImportError:
    _speedups = None


WORDS = ["alpha", "beta", "gamma", "delta", "count", "total", "value", "i", "j", "x"]
OPS = ["=", "+", "-", "*", "(", ")", ":", "==", "<", ">="]


def synth_source(n_tokens: int, rng: random.Random) -> str:
    parts = []
    for _ in range(n_tokens):
        parts.append(rng.choice(WORDS) if rng.random() < 0.7 else rng.choice(OPS))
    return " ".join(parts)


def mutate(text: str, rng: random.Random) -> str:
    words = text.split(" ")
    for _ in range(max(1, len(words) // 20)):
        idx = rng.randrange(len(words))
        words[idx] = rng.choice(WORDS) + "_v2"
    return " ".join(words)


def bench(fn, a_ids, b_ids, weights, repeat: int) -> tuple[float, bytearray]:
    best = float("inf")
    mask = bytearray()
    for _ in range(repeat):
        t0 = time.perf_counter()
        mask = fn(a_ids, b_ids, weights)
        best = min(best, time.perf_counter() - t0)
    return best, mask


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="64,256,1024")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _speedups is None:
        print("compiled kernel unavailable; timing the pure-Python kernel only")

    rng = random.Random(7)
    print(f"{'tokens':>8} {'pure (ms)':>12} {'compiled (ms)':>14} {'speedup':>9}")
    for size in sizes:
        original = synth_source(size, rng)
        changed = mutate(original, rng)
        a = tokenize_text(original)
        b = tokenize_text(changed)
        table: dict[str, int] = {}
        a_ids = [table.setdefault(t.text, len(table)) for t in a]
        b_ids = [table.setdefault(t.text, len(table)) for t in b]
        weights = [0] * len(table)
        for text, sid in table.items():
            weights[sid] = len(text)

        t_pure, mask_pure = bench(_lcs.match_mask, a_ids, b_ids, weights, args.repeat)
        if _speedups is not None:
            t_c, mask_c = bench(_speedups.match_mask, a_ids, b_ids, weights, args.repeat)
            assert bytes(mask_pure) == bytes(mask_c), "kernel outputs diverge"
            print(
                f"{size:>8} {t_pure * 1e3:>12.2f} {t_c * 1e3:>14.2f}"
                f" {t_pure / t_c:>8.1f}x"
            )
        else:
            print(f"{size:>8} {t_pure * 1e3:>12.2f} {'-':>14} {'-':>9}")


if __name__ == "__main__":
    main()
