"""Command-line entry point: ``cyclic-forge {catalog,generate,collection,verify}``.

Exit codes: 0 success, 2 a verification check failed, 3 generation ran out
of attempts.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from .diagram import DiagramSpec, MergeDegenerate, PlacementExhausted, Thresholds, collection_specs
from .geometry import build_polygon, random_positions
from .pairings import InvalidPairing, Pairing, SizeLimit, random_pairing, write_catalog
from .pipeline import VerificationFailed, generate_problem, make_problem, write_bundle, write_manifest
from .proof import MODES, AugmentationExhausted
from .theorem import verify_numeric

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_EXHAUSTED = 3
VERIFY_TOL = 1e-9
SEED_ENV = "CYCLIC_FORGE_SEED"


def resolve_seed(seed: int | None) -> int:
    """Explicit seed, else the environment variable, else a fresh random one."""
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return random.SystemRandom().randrange(2**63)


def _thresholds(args) -> Thresholds:
    return Thresholds(min_gap=args.min_gap, min_cross=args.min_cross, max_attempts=args.max_attempts)


def cmd_catalog(args) -> int:
    out = Path(args.out or f"catalog_n{args.n}.json")
    try:
        orbits = write_catalog(out, args.n)
    except (SizeLimit, InvalidPairing) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    k = len(orbits)
    print(f"{k} orbit{'s' if k != 1 else ''} for n={args.n}; written to {out}")
    return EXIT_OK


def cmd_generate(args) -> int:
    seed = resolve_seed(args.seed)
    th = _thresholds(args)
    out = Path(args.out)
    pairing = Pairing.parse(args.pairing) if args.pairing else None
    n = pairing.n if pairing else args.n
    for k in range(args.count):
        s = seed + k * 1000
        try:
            if args.permutation or args.merge:
                perm = tuple(int(x) for x in args.permutation.split(",")) if args.permutation else None
                merges = tuple(tuple(int(x) for x in m.split("-")) for m in args.merge)
                spec = DiagramSpec(pairing or random_pairing(n, s), perm, merges, s)
                problem = make_problem(spec, th, args.mode)
            else:
                problem = generate_problem(n, s, args.permute, args.merges, pairing, th, args.mode)
        except (PlacementExhausted, AugmentationExhausted) as exc:
            print(f"error: {exc} (seed {s})", file=sys.stderr)
            return EXIT_EXHAUSTED
        except VerificationFailed as exc:
            print(f"error: {exc} (seed {s})", file=sys.stderr)
            return EXIT_VERIFY
        path = write_bundle(problem, out / f"problem_{problem.seed}")
        print(f"{path}: {problem.diagram.statement.render(degrees=True)}")
    return EXIT_OK


def cmd_collection(args) -> int:
    seed = resolve_seed(args.seed)
    th = _thresholds(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for k, (sig, spec) in enumerate(collection_specs(args.shape)):
        try:
            problem = None
            for attempt in range(20):
                try:
                    problem = make_problem(DiagramSpec(spec.pairing, spec.permutation, spec.merges,
                                                       seed + k + 1000 * attempt), th, args.mode)
                    break
                except PlacementExhausted:
                    if attempt == 19:
                        raise
        except (PlacementExhausted, AugmentationExhausted) as exc:
            print(f"error: {exc} (class {k})", file=sys.stderr)
            return EXIT_EXHAUSTED
        except VerificationFailed as exc:
            print(f"error: {exc} (class {k})", file=sys.stderr)
            return EXIT_VERIFY
        name = f"{args.shape}_{k:03d}"
        write_bundle(problem, out / name)
        entries.append({"name": name, "signature": sig, "seed": problem.seed,
                        "statement": problem.diagram.statement.render(degrees=True)})
    write_manifest(out / "manifest.json", args.shape, entries)
    print(f"{len(entries)} distinct {args.shape} diagrams written to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = resolve_seed(args.seed)
    rng = random.Random(f"verify:{seed}")
    worst = 0.0
    windings: dict[int, int] = {}
    for k in range(args.samples):
        n = rng.randint(args.n_min, args.n_max)
        choice = rng.choice([None, None, 1, -1, 2, -2])
        if choice is not None and abs(choice) >= n:
            choice = 1
        poly = build_polygon(random_positions(2 * n, rng, choice))
        pairing = random_pairing(n, f"{seed}:{k}")
        windings[poly.winding] = windings.get(poly.winding, 0) + 1
        worst = max(worst, verify_numeric(poly, pairing))
    report = {"samples": args.samples, "seed": seed, "max_residual": worst,
              "windings": dict(sorted(windings.items()))}
    print(json.dumps(report))
    return EXIT_OK if worst < VERIFY_TOL else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclic-forge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def thresholds(p):
        p.add_argument("--min-gap", type=float, default=None, help="radians; default pi/(6n)")
        p.add_argument("--min-cross", type=float, default=0.1)
        p.add_argument("--max-attempts", type=int, default=1000)

    p = sub.add_parser("catalog", help="enumerate pairing classes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("generate", help="generate problem bundles")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", default="out")
    p.add_argument("--mode", choices=MODES, default="prove")
    p.add_argument("--pairing", help='e.g. "1-2,3-10,4-7,5-8,6-9"')
    p.add_argument("--permutation", help="slot of each vertex, comma separated, 0-based")
    p.add_argument("--merge", action="append", default=[], help="KEEP-GONE vertex indices, repeatable")
    p.add_argument("--permute", action="store_true", help="random vertex permutation")
    p.add_argument("--merges", type=int, default=0, help="number of random merges")
    thresholds(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("collection", help="deduplicated hexagon or pentagon collection")
    p.add_argument("--shape", choices=("hexagon", "pentagon"), required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="collection")
    p.add_argument("--mode", choices=MODES, default="prove")
    thresholds(p)
    p.set_defaults(func=cmd_collection)

    p = sub.add_parser("verify", help="check the identity on random polygons")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidPairing, MergeDegenerate, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
