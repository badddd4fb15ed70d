"""Generate many random problems and report the worst derived-angle error.

Usage: python scripts/soundness_sweep.py [COUNT] [SEED]
"""

import collections
import sys
import time

from cyclic_forge.pipeline import generate_problem
from cyclic_forge.proof import check_soundness


def sweep(count: int, seed: int) -> None:
    worst = 0.0
    shapes = collections.Counter()
    start = time.perf_counter()
    for k in range(count):
        n = 2 + k % 3
        merges = k % 5 == 0 and n > 2
        p = generate_problem(n, seed + 100 * k, permute=k % 2 == 1, merges=int(merges))
        shapes[p.diagram.structure.slots] += 1
        worst = max(worst, check_soundness(p.trace.state))
    elapsed = time.perf_counter() - start
    print(f"{count} problems in {elapsed:.1f}s, max error {worst:.2e} rad")
    print("vertices on circle:", dict(sorted(shapes.items())))


if __name__ == "__main__":
    sweep(int(sys.argv[1]) if len(sys.argv) > 1 else 200, int(sys.argv[2]) if len(sys.argv) > 2 else 0)
