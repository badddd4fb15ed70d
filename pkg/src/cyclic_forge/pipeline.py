"""End-to-end problem generation: pairing, diagram, statement, proof, bundle."""

from __future__ import annotations

import json
import os
import random
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

from .algebra import AngleExpr, LinearRelation
from .diagram import (Diagram, DiagramSpec, MergeDegenerate, PlacementExhausted, Thresholds, collection_specs,
                      place_vertices, render_svg, structure_of)
from .pairings import Pairing, random_pairing
from .proof import (KNOWN_NAMES, DeductionState, PosedProblem, ProofTrace, check_soundness, pose_problem, prove,
                    render_proof)

SOUNDNESS_TOL = 1e-6
STATEMENT_TOL = 1e-9


class VerificationFailed(RuntimeError):
    pass


class DependentKnowns(VerificationFailed):
    """The marked angles obey a relation of their own, so the proof found that one."""


def random_spec(n: int, seed: int, permute: bool = False, merges: int = 0,
                pairing: Pairing | None = None) -> DiagramSpec:
    """A random pairing (unless given), optionally with shuffled vertices and merges."""
    rng = random.Random(f"spec:{n}:{seed}")
    pairing = pairing or random_pairing(n, seed)
    m = 2 * n
    for _ in range(1000):
        perm = list(range(m))
        if permute:
            rng.shuffle(perm)
        mg = []
        for _ in range(merges):
            keep, gone = rng.sample(range(1, m + 1), 2)
            mg.append((keep, gone))
        spec = DiagramSpec(pairing, tuple(perm), tuple(mg), seed)
        try:
            structure_of(spec)
        except MergeDegenerate:
            continue
        return spec
    raise MergeDegenerate(f"no valid merge found for seed {seed}")


@dataclass
class Problem:
    diagram: Diagram
    trace: ProofTrace
    proof: str
    posed: PosedProblem

    @property
    def seed(self) -> int:
        return self.diagram.spec.seed


def target_relation(d: Diagram) -> LinearRelation:
    """The statement written over the known-angle variables, normalized."""
    var = {term.name: v for v, term in zip(KNOWN_NAMES, d.statement.lhs + d.statement.rhs)}
    e = d.statement.as_expr()
    return LinearRelation.normalized(AngleExpr(tuple((var[k], c) for k, c in e.coeffs), e.pi))


def verify_problem(d: Diagram, trace: ProofTrace) -> None:
    """Raise :class:`VerificationFailed` unless the bundle checks itself."""
    values = {"∠" + mk.name: mk.value for mk in d.marked}
    residual = d.statement.residual(values)
    if residual >= STATEMENT_TOL:
        raise VerificationFailed(f"statement residual {residual:.3g} on seed {d.spec.seed}")
    if trace.conclusion.expr != target_relation(d).expr:
        raise DependentKnowns(f"proof concludes {trace.conclusion}, not the statement (seed {d.spec.seed})")
    err = check_soundness(trace.state)
    if err >= SOUNDNESS_TOL:
        raise VerificationFailed(f"derived angle off by {err:.3g} rad (seed {d.spec.seed})")


def solve(d: Diagram) -> ProofTrace:
    return prove(DeductionState(d.figure, d.givens))


def make_problem(spec: DiagramSpec, th: Thresholds = Thresholds(), mode: str = "prove") -> Problem:
    d = place_vertices(spec, th)
    trace = solve(d)
    verify_problem(d, trace)
    return Problem(d, trace, render_proof(trace), pose_problem(d.statement, trace, mode))


def generate_problem(n: int, seed: int, permute: bool = False, merges: int = 0,
                     pairing: Pairing | None = None, th: Thresholds = Thresholds(),
                     mode: str = "prove", retries: int = 20) -> Problem:
    """Random problem for ``seed``; on placement exhaustion or dependent marked
    angles the next seed is tried, and the seed actually used is recorded."""
    last: Exception | None = None
    for k in range(retries):
        spec = random_spec(n, seed + k, permute, merges, pairing)
        try:
            return make_problem(spec, th, mode)
        except (PlacementExhausted, DependentKnowns) as exc:
            last = exc
    raise last


def bundle_files(p: Problem) -> dict[str, str]:
    statement = p.diagram.to_json()
    statement["problem"] = p.posed.to_json()
    statement["conclusion"] = p.trace.conclusion.expr.to_json()
    return {
        "diagram.svg": render_svg(p.diagram),
        "statement.json": json.dumps(statement, indent=1, ensure_ascii=False) + "\n",
        "proof.txt": p.posed.text + "\n\n" + p.proof,
        "trace.json": json.dumps(p.trace.to_json(), indent=1, ensure_ascii=False) + "\n",
        "seed.txt": f"{p.seed}\n",
    }


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def write_bundle(p: Problem, directory: str | os.PathLike) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in bundle_files(p).items():
        _write_atomic(out / name, text)
    return out


def build_collection(shape: str, seed: int = 0, th: Thresholds = Thresholds(),
                     mode: str = "prove") -> list[tuple[str, Problem]]:
    """One verified problem per signature class, in deterministic sweep order."""
    out = []
    for k, (sig, spec) in enumerate(collection_specs(shape)):
        out.append((sig, make_problem(replace(spec, seed=seed + k), th, mode)))
    return out


def write_manifest(path: Path, shape: str, entries: list[dict]) -> None:
    data = {"shape": shape, "count": len(entries), "problems": entries}
    _write_atomic(path, json.dumps(data, indent=1) + "\n")
