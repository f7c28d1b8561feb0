from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import BetaParallelAlpha, ConfigError, IndexOutOfRange


@dataclass(frozen=True, order=True)
class Root:
    """The root e_j - e_i, indexing the root subgroup x_ij."""

    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j:
            raise ConfigError(f"root needs distinct indices, got ({self.i}, {self.j})")

    def __neg__(self) -> "Root":
        return Root(self.j, self.i)

    def vector(self, n: int) -> np.ndarray:
        v = np.zeros(n, dtype=np.int64)
        v[self.j - 1] += 1
        v[self.i - 1] -= 1
        return v

    def to_json(self) -> List[int]:
        return [self.j, self.i]

    @classmethod
    def from_json(cls, pair: Sequence[int]) -> "Root":
        j, i = pair
        return cls(int(i), int(j))

    def __repr__(self):
        return f"e{self.j}-e{self.i}"


def _from_vector(v: np.ndarray) -> Optional[Root]:
    if sorted(v.tolist()) != [-1] + [0] * (len(v) - 2) + [1]:
        return None
    return Root(int(np.flatnonzero(v == -1)[0]) + 1, int(np.flatnonzero(v == 1)[0]) + 1)


class RootSystem:
    """Type A_{m-1} root system on the parts of a partition of 1..n.

    The plain system has singleton parts. Parts are kept in canonical order
    (singletons by value, then merged parts by minimum) and labelled 1..m.
    """

    def __init__(self, n: int, blocks: Optional[Sequence[Iterable[int]]] = None):
        if n < 1:
            raise ConfigError(f"rank parameter must be positive, got {n}")
        if blocks is None:
            blocks = [[i] for i in range(1, n + 1)]
        parts = [tuple(sorted(b)) for b in blocks]
        if sorted(i for p in parts for i in p) != list(range(1, n + 1)):
            raise ConfigError(f"{list(blocks)} does not partition 1..{n}")
        parts.sort(key=lambda p: (len(p) > 1, p[0]))
        self.n = n
        self.blocks: Tuple[Tuple[int, ...], ...] = tuple(parts)

    @property
    def rank(self) -> int:
        """Number of idempotents, m"""
        return len(self.blocks)

    @property
    def is_quotient(self) -> bool:
        return self.rank < self.n

    def roots(self) -> List[Root]:
        m = self.rank
        return [Root(i, j) for i in range(1, m + 1) for j in range(1, m + 1) if i != j]

    def positive_roots(self) -> List[Root]:
        return [r for r in self.roots() if r.i < r.j]

    def simple_roots(self) -> List[Root]:
        return [Root(i, i + 1) for i in range(1, self.rank)]

    def label_of(self, index: int) -> int:
        for label, part in enumerate(self.blocks, start=1):
            if index in part:
                return label
        raise IndexOutOfRange(f"index {index} outside 1..{self.n}")

    def merge_map(self) -> Dict[int, int]:
        return {i: self.label_of(i) for i in range(1, self.n + 1)}

    def partition(self) -> FrozenSet[FrozenSet[int]]:
        return frozenset(frozenset(p) for p in self.blocks)

    def check_root(self, root: Root):
        if not (1 <= root.i <= self.rank and 1 <= root.j <= self.rank):
            raise IndexOutOfRange(f"root {root!r} outside a system of rank {self.rank}")

    def to_json(self):
        return [list(p) for p in self.blocks]

    def __eq__(self, other):
        return isinstance(other, RootSystem) and (other.n, other.blocks) == (self.n, self.blocks)

    def __hash__(self):
        return hash((self.n, self.blocks))

    def __repr__(self):
        return f"<RootSystem A{self.rank - 1} blocks={self.to_json()}>"


QuotientRootSystem = RootSystem


def alpha_series(system: RootSystem, beta: Root, alpha: Root) -> List[Root]:
    """Roots beta + p*alpha of the system, in increasing p"""
    system.check_root(beta)
    system.check_root(alpha)
    if beta in (alpha, -alpha):
        raise BetaParallelAlpha(f"{beta!r} is parallel to {alpha!r}")
    m = system.rank
    series = []
    for p in range(-2, 3):
        root = _from_vector(beta.vector(m) + p * alpha.vector(m))
        if root is not None:
            series.append(root)
    return series


def quotient_fiber(system: RootSystem, beta: Root, alpha: Root) -> List[Root]:
    """Roots outside {alpha, -alpha} with the same image as beta in the quotient by alpha"""
    q = quotient(system, alpha)
    image = q.project(beta)
    return sorted(r for r in system.roots() if r not in (alpha, -alpha) and q.project(r) == image)


@dataclass(frozen=True)
class Quotient:
    """Result of quotienting: the smaller system plus the label map from the parent"""

    parent: RootSystem
    system: RootSystem
    label_map: Dict[int, int]

    def project(self, root: Root) -> Optional[Root]:
        i, j = self.label_map[root.i], self.label_map[root.j]
        return Root(i, j) if i != j else None


def quotient_by_partition(system: RootSystem, partition: Sequence[Sequence[int]]) -> Quotient:
    """Merge labels of `system` along a partition of its labels 1..m"""
    labels = sorted(i for p in partition for i in p)
    if labels != list(range(1, system.rank + 1)):
        raise ConfigError(f"{list(partition)} does not partition 1..{system.rank}")
    merged = [sorted(idx for label in part for idx in system.blocks[label - 1]) for part in partition]
    target = RootSystem(system.n, merged)
    label_map = {}
    for part in partition:
        new_label = target.label_of(system.blocks[part[0] - 1][0])
        for label in part:
            label_map[label] = new_label
    return Quotient(system, target, label_map)


def quotient(system: RootSystem, alpha: Root) -> Quotient:
    """The quotient by a root: its two labels merge into the last label"""
    system.check_root(alpha)
    parts = [[alpha.i, alpha.j]] + [[k] for k in range(1, system.rank + 1) if k not in (alpha.i, alpha.j)]
    return quotient_by_partition(system, parts)


def middle_quotient(system: RootSystem) -> Quotient:
    """Quotient by the inner simple roots: e_1, e_2 + ... + e_{m-1}, e_m"""
    m = system.rank
    if m < 3:
        raise ConfigError(f"middle quotient needs rank at least 3, got {m}")
    return quotient_by_partition(system, [[1], list(range(2, m)), [m]])


def commutator_roots(alpha: Root, beta: Root, n: int) -> List[Root]:
    """Roots p*alpha + q*beta with p, q > 0"""
    if beta == -alpha:
        raise BetaParallelAlpha(f"{beta!r} is opposite to {alpha!r}")
    found = []
    for p in (1, 2):
        for q in (1, 2):
            root = _from_vector(p * alpha.vector(n) + q * beta.vector(n))
            if root is not None:
                found.append(root)
    return found


def inner_product(a: Root, b: Root, n: int) -> int:
    return int(a.vector(n) @ b.vector(n))


@dataclass(frozen=True)
class RootAutomorphism:
    """Element of S_n x Z/2 acting on roots: permute indices, optionally negate"""

    perm: Tuple[int, ...]
    negate: bool = False

    def __call__(self, root: Root) -> Root:
        image = Root(self.perm[root.i - 1], self.perm[root.j - 1])
        return -image if self.negate else image

    def compose(self, other: "RootAutomorphism") -> "RootAutomorphism":
        """self after other"""
        perm = tuple(self.perm[other.perm[k] - 1] for k in range(len(self.perm)))
        return RootAutomorphism(perm, self.negate != other.negate)

    @classmethod
    def identity(cls, n: int) -> "RootAutomorphism":
        return cls(tuple(range(1, n + 1)))


def automorphisms(system: RootSystem) -> List[RootAutomorphism]:
    """Generators: adjacent transpositions and negation"""
    m = system.rank
    gens = []
    for k in range(1, m):
        perm = list(range(1, m + 1))
        perm[k - 1], perm[k] = perm[k], perm[k - 1]
        gens.append(RootAutomorphism(tuple(perm)))
    gens.append(RootAutomorphism(tuple(range(1, m + 1)), negate=True))
    return gens


def automorphism_group(system: RootSystem) -> List[RootAutomorphism]:
    """Closure of the generators, by breadth-first search"""
    gens = automorphisms(system)
    start = RootAutomorphism.identity(system.rank)
    seen = {start}
    queue = deque([start])
    while queue:
        g = queue.popleft()
        for s in gens:
            h = s.compose(g)
            if h not in seen:
                seen.add(h)
                queue.append(h)
    return sorted(seen, key=lambda a: (a.negate, a.perm))


def orbit(system: RootSystem, root: Root) -> List[Root]:
    group = automorphism_group(system)
    return sorted({g(root) for g in group})


def pair_orbits(system: RootSystem) -> List[FrozenSet[Tuple[Root, Root]]]:
    """Orbits of the automorphism group on ordered pairs of non-parallel roots"""
    group = automorphism_group(system)
    pairs = [(a, b) for a in system.roots() for b in system.roots() if b not in (a, -a)]
    remaining = set(pairs)
    orbits = []
    for pair in pairs:
        if pair not in remaining:
            continue
        orb = frozenset((g(pair[0]), g(pair[1])) for g in group)
        remaining -= orb
        orbits.append(orb)
    return orbits
