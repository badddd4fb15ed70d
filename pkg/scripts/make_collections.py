"""Write the deduplicated hexagon and pentagon collections.

Usage: python scripts/make_collections.py [OUT_DIR] [SEED]
"""

import sys
import time
from pathlib import Path

from cyclic_forge.cli import main


def run(out: Path, seed: int) -> int:
    for shape in ("hexagon", "pentagon"):
        start = time.perf_counter()
        code = main(["collection", "--shape", shape, "--seed", str(seed), "--out", str(out / shape)])
        print(f"{shape}: exit {code} in {time.perf_counter() - start:.1f}s")
        if code:
            return code
    return 0


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("collections")
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
    sys.exit(run(out, seed))
