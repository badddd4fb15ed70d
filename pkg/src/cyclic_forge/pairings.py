"""Side pairings of a 2n-gon and their classes under rotation/reflection."""

from __future__ import annotations

import itertools
import json
import os
import random
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

MAX_ENUMERATE = 8
MAX_ORBITS = 7


class InvalidPairing(ValueError):
    pass


class SizeLimit(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Pairing:
    """``n`` disjoint side pairs ``(a, b)``, ``a < b``, ``b - a`` odd, covering 1..2n."""

    n: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple(sorted(tuple(sorted(p)) for p in self.pairs))
        object.__setattr__(self, "pairs", pairs)
        if self.n < 2:
            raise InvalidPairing("n must be at least 2")
        if len(pairs) != self.n:
            raise InvalidPairing(f"expected {self.n} pairs, got {len(pairs)}")
        flat = [x for p in pairs for x in p]
        if sorted(flat) != list(range(1, 2 * self.n + 1)):
            raise InvalidPairing(f"pairs {pairs} do not partition 1..{2 * self.n}")
        for a, b in pairs:
            if (b - a) % 2 == 0:
                raise InvalidPairing(f"pair ({a}, {b}) has an even gap")

    @classmethod
    def of(cls, pairs: Iterable[Sequence[int]]) -> "Pairing":
        pairs = tuple(tuple(p) for p in pairs)
        return cls(len(pairs), pairs)

    @classmethod
    def parse(cls, text: str) -> "Pairing":
        """Parse ``"1-2,3-10,4-7"``."""
        pairs = [tuple(int(x) for x in chunk.split("-")) for chunk in text.split(",") if chunk]
        return cls.of(pairs)

    def __str__(self) -> str:
        return "{" + ",".join(f"({a},{b})" for a, b in self.pairs) + "}"

    def partner(self, side: int) -> int:
        for a, b in self.pairs:
            if side == a:
                return b
            if side == b:
                return a
        raise KeyError(side)


@dataclass(frozen=True)
class PairingOrbit:
    canonical: Pairing
    size: int


def enumerate_pairings(n: int) -> list[Pairing]:
    """All ``n!`` odd/even matchings, in lexicographic order of their pairs."""
    if n < 2:
        raise InvalidPairing("n must be at least 2")
    if n > MAX_ENUMERATE:
        raise SizeLimit(f"n={n} exceeds the enumeration limit {MAX_ENUMERATE}")
    odds = range(1, 2 * n, 2)
    evens = range(2, 2 * n + 1, 2)
    out = [Pairing(n, tuple(zip(odds, perm))) for perm in itertools.permutations(evens)]
    return sorted(out, key=lambda p: p.pairs)


def dihedral_images(p: Pairing) -> Iterable[tuple[tuple[int, int], ...]]:
    """The ``4n`` images of the chord set under rotations and reflections of side labels."""
    m = 2 * p.n
    for k in range(m):
        for reflect in (False, True):
            def g(i: int) -> int:
                if reflect:
                    i = (m - i) % m + 1
                return (i - 1 + k) % m + 1
            yield tuple(sorted(tuple(sorted((g(a), g(b)))) for a, b in p.pairs))


def canonicalize(p: Pairing) -> Pairing:
    return Pairing(p.n, min(dihedral_images(p)))


def enumerate_orbits(n: int) -> list[PairingOrbit]:
    """Pairing classes modulo the dihedral group, sorted by representative."""
    if n > MAX_ORBITS:
        raise SizeLimit(f"n={n} exceeds the orbit enumeration limit {MAX_ORBITS}")
    sizes: dict[Pairing, int] = {}
    for p in enumerate_pairings(n):
        c = canonicalize(p)
        sizes[c] = sizes.get(c, 0) + 1
    return [PairingOrbit(c, sizes[c]) for c in sorted(sizes, key=lambda q: q.pairs)]


def random_pairing(n: int, seed) -> Pairing:
    """Uniform over the ``n!`` matchings; deterministic for a given seed."""
    rng = random.Random(f"pairing:{n}:{seed}")
    evens = list(range(2, 2 * n + 1, 2))
    rng.shuffle(evens)
    return Pairing(n, tuple(zip(range(1, 2 * n, 2), evens)))


def catalog_records(orbits: Sequence[PairingOrbit]) -> list[dict]:
    return [
        {"n": o.canonical.n, "pairs": [list(p) for p in o.canonical.pairs], "orbit_size": o.size}
        for o in orbits
    ]


def write_catalog(path: str | os.PathLike, n: int) -> list[PairingOrbit]:
    """Write the orbit catalog for ``n`` atomically (temp file, then rename)."""
    orbits = enumerate_orbits(n)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(catalog_records(orbits), fh, indent=1)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
    return orbits


def load_catalog(path: str | os.PathLike) -> list[PairingOrbit]:
    with open(path) as fh:
        data = json.load(fh)
    return [PairingOrbit(Pairing.of(r["pairs"]), r["orbit_size"]) for r in data]
