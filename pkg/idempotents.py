import itertools
import logging
import operator
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigError, FamilyViolation, IdentityViolated, IndexOutOfRange
from rings import Element, MatrixAlgebra

Pair = Tuple[Element, Element]


class IdempotentFamily:
    """Complete family e_1..e_n of orthogonal Morita-equivalent idempotents.

    Indices are 1-based. Block-diagonal families record the matrix positions
    of each idempotent in `blocks` and generate their Morita witnesses from
    matrix units. A merged family remembers which parent indices each of its
    idempotents is the sum of.
    """

    def __init__(
        self,
        algebra: MatrixAlgebra,
        idempotents: Sequence[Element],
        witnesses: Optional[Dict[Tuple[int, int], List[Pair]]] = None,
        blocks: Optional[Sequence[Sequence[int]]] = None,
        members: Optional[Sequence[Sequence[int]]] = None,
        parent: Optional["IdempotentFamily"] = None,
    ):
        self.algebra = algebra
        self.idempotents = tuple(idempotents)
        self.blocks = tuple(tuple(b) for b in blocks) if blocks is not None else None
        self.members = tuple(tuple(m) for m in members) if members is not None else None
        self.parent = parent
        self._witnesses = dict(witnesses or {})

    @classmethod
    def blocked(cls, algebra: MatrixAlgebra, blocks: Sequence[Sequence[int]]) -> "IdempotentFamily":
        """Family of diagonal projectors onto the given 0-based position blocks"""
        flat = sorted(p for b in blocks for p in b)
        if flat != list(range(algebra.size)) or any(not b for b in blocks):
            raise ConfigError(f"blocks {list(blocks)} do not partition 0..{algebra.size - 1}")
        blocks = [tuple(sorted(b)) for b in blocks]
        return cls(algebra, [algebra.diagonal_projector(b) for b in blocks], blocks=blocks)

    @classmethod
    def matrix_units(cls, algebra: MatrixAlgebra) -> "IdempotentFamily":
        return cls.blocked(algebra, [[r] for r in range(algebra.size)])

    @classmethod
    def default(cls, algebra: MatrixAlgebra) -> "IdempotentFamily":
        b = algebra.block_size
        return cls.blocked(algebra, [list(range(r, r + b)) for r in range(0, algebra.size, b)])

    @classmethod
    def from_descriptor(cls, algebra: MatrixAlgebra, desc: Any) -> "IdempotentFamily":
        """None for the default family, or {"blocks": [[1, 2], [3, 4]]} with 1-based positions"""
        if desc is None:
            return cls.default(algebra)
        if desc == "matrix_units":
            return cls.matrix_units(algebra)
        if not isinstance(desc, dict) or "blocks" not in desc:
            raise ConfigError(f"family descriptor must be null, 'matrix_units' or {{'blocks': [...]}}, got {desc!r}")
        try:
            blocks = [[int(p) - 1 for p in b] for b in desc["blocks"]]
        except (TypeError, ValueError):
            raise ConfigError(f"family blocks must be lists of integers, got {desc['blocks']!r}") from None
        return cls.blocked(algebra, blocks)

    def descriptor(self) -> Dict[str, Any]:
        if self.blocks is None:
            return {"blocks": None}
        return {"blocks": [[p + 1 for p in b] for b in self.blocks]}

    @property
    def n(self) -> int:
        return len(self.idempotents)

    def indices(self) -> range:
        return range(1, self.n + 1)

    def check_index(self, *indices: int):
        for i in indices:
            if not (isinstance(i, (int, np.integer)) and 1 <= i <= self.n):
                raise IndexOutOfRange(f"index {i} outside 1..{self.n}")

    def e(self, i: int) -> Element:
        self.check_index(i)
        return self.idempotents[i - 1]

    def peirce_project(self, a: Element, i: int, j: int) -> Element:
        return self.e(i) * a * self.e(j)

    def in_component(self, a: Element, i: int, j: int) -> bool:
        return self.peirce_project(a, i, j) == a

    def witnesses(self, i: int, j: int) -> List[Pair]:
        """Pairs (x_p in R_ij, y_p in R_ji) with sum x_p y_p = e_i"""
        self.check_index(i, j)
        if (i, j) in self._witnesses:
            return self._witnesses[(i, j)]
        if i == j:
            pairs = [(self.e(i), self.e(i))]
        elif self.blocks is not None:
            c0 = self.blocks[j - 1][0]
            pairs = [
                (self.algebra.matrix_unit(r, c0), self.algebra.matrix_unit(c0, r))
                for r in self.blocks[i - 1]
            ]
        else:
            raise FamilyViolation([{"check": "witness", "i": i, "j": j, "detail": "no witness stored"}])
        self._witnesses[(i, j)] = pairs
        return pairs

    def component_size(self, i: int, j: int) -> int:
        self.check_index(i, j)
        if self.blocks is None:
            return sum(1 for _ in self.component_elements(i, j))
        return self.algebra.base.order ** (len(self.blocks[i - 1]) * len(self.blocks[j - 1]))

    def component_elements(self, i: int, j: int) -> Iterable[Element]:
        self.check_index(i, j)
        if self.blocks is None:
            seen = set()
            for a in self.algebra.elements():
                p = self.peirce_project(a, i, j)
                if p not in seen:
                    seen.add(p)
                    yield p
            return
        rows, cols = self.blocks[i - 1], self.blocks[j - 1]
        cells = [(r, c) for r in rows for c in cols]
        k = self.algebra.size
        for values in itertools.product(self.algebra.base.elements(), repeat=len(cells)):
            arr = np.zeros((k, k), dtype=np.int64)
            for (r, c), v in zip(cells, values):
                arr[r, c] = v
            yield Element(self.algebra, arr)

    def random_component(self, i: int, j: int, rng: np.random.Generator) -> Element:
        return self.peirce_project(self.algebra.random(rng), i, j)

    def random_corner_unit(self, i: int, rng: np.random.Generator, max_tries: int = 1000) -> Element:
        e = self.e(i)
        for _ in range(max_tries):
            u = self.random_component(i, i, rng)
            if self.algebra.corner_is_unit(u, e):
                return u
        return e

    def merge(self, partition: Sequence[Sequence[int]]) -> "IdempotentFamily":
        """Family of sums of idempotents over the parts of a partition of 1..n.

        Parts are ordered canonically: singletons by value, then larger parts
        by their minimum, so a single merged pair is the last index.
        """
        parts = [tuple(sorted(p)) for p in partition]
        if sorted(i for p in parts for i in p) != list(self.indices()):
            raise ConfigError(f"{list(partition)} does not partition 1..{self.n}")
        parts.sort(key=lambda p: (len(p) > 1, p[0]))
        idempotents = [sum((self.e(i) for i in p[1:]), self.e(p[0])) for p in parts]
        blocks = None
        if self.blocks is not None:
            blocks = [sorted(pos for i in p for pos in self.blocks[i - 1]) for p in parts]
        return IdempotentFamily(self.algebra, idempotents, blocks=blocks, members=parts, parent=self)

    def class_of(self, parent_index: int) -> int:
        """Index of the merged idempotent containing a parent index"""
        for label, part in enumerate(self.members or (), start=1):
            if parent_index in part:
                return label
        raise IndexOutOfRange(f"parent index {parent_index} is not covered by this family")

    def __eq__(self, other):
        return (
            isinstance(other, IdempotentFamily)
            and other.algebra == self.algebra
            and other.idempotents == self.idempotents
        )

    def __hash__(self):
        return hash(self.idempotents)

    def __repr__(self):
        return f"<IdempotentFamily n={self.n} blocks={self.descriptor()['blocks']}>"


def peirce_project(family: IdempotentFamily, a: Element, i: int, j: int) -> Element:
    return family.peirce_project(a, i, j)


def morita_decompose(family: IdempotentFamily, c: Element, i: int, k: int, j: int) -> List[Pair]:
    """Write c in R_ik as sum a_p b_p with a_p in R_ij, b_p in R_jk"""
    family.check_index(i, k, j)
    return [(x, y * c) for x, y in family.witnesses(i, j)]


def check_idempotent_family(family: IdempotentFamily) -> Dict[str, Any]:
    """Verify idempotence, orthogonality, completeness and every Morita witness"""
    violations = []
    algebra = family.algebra
    total = algebra.zero()
    for i in family.indices():
        e = family.e(i)
        total = total + e
        if e * e != e:
            violations.append({"check": "idempotence", "i": i})
        for j in family.indices():
            if i != j and e * family.e(j) != algebra.zero():
                violations.append({"check": "orthogonality", "i": i, "j": j})
    if total != algebra.one():
        violations.append({"check": "completeness", "sum": total.to_json()})
    for i in family.indices():
        for j in family.indices():
            try:
                pairs = family.witnesses(i, j)
            except FamilyViolation as e:
                violations.extend(e.violations)
                continue
            recomposed = algebra.zero()
            for x, y in pairs:
                if not (family.in_component(x, i, j) and family.in_component(y, j, i)):
                    violations.append({"check": "witness_component", "i": i, "j": j})
                recomposed = recomposed + x * y
            if recomposed != family.e(i):
                violations.append({"check": "witness_sum", "i": i, "j": j})
    if violations:
        logging.warning(f"Idempotent family check found {len(violations)} violations")
    return {"ok": not violations, "violations": violations}


@dataclass
class InducedMap:
    """The map f on R_ik with f(ab) = g(a, b), certified on the checked grid"""

    f: Callable[[Element], Any]
    checked: int


def _grid(family, i, j, rng, samples):
    if rng is None:
        return list(family.component_elements(i, j))
    return [family.random_component(i, j, rng) for _ in range(samples)]


def _unique(values, equal):
    out = []
    for v in values:
        if not any(equal(v, w) for w in out):
            out.append(v)
    return out


def factor_through_product(
    family: IdempotentFamily,
    i: int,
    j: int,
    k: int,
    g: Callable[[Element, Element], Any],
    combine: Callable[[Any, Any], Any],
    identity: Any,
    equal: Callable[[Any, Any], bool] = operator.eq,
    rng: Optional[np.random.Generator] = None,
    samples: int = 64,
) -> InducedMap:
    """Factor a map g on R_ij x R_jk through multiplication into R_ik.

    Checks biadditivity, commuting values and g(ar, b) = g(a, rb) for r in
    R_jj on an exhaustive grid (rng=None) or a sampled one, then returns
    f(c) = prod_p g(x_p, y_p c) built from the Morita witnesses of (i, j).
    """
    family.check_index(i, j, k)
    left = _grid(family, i, j, rng, samples)
    right = _grid(family, j, k, rng, samples)
    middle = _grid(family, j, j, rng, samples)
    checked = 0

    for a, a2, b in itertools.product(left, left, right):
        checked += 1
        if not equal(g(a + a2, b), combine(g(a, b), g(a2, b))):
            raise IdentityViolated("left additivity", {"a": a.to_json(), "a2": a2.to_json(), "b": b.to_json()})
    for a, b, b2 in itertools.product(left, right, right):
        checked += 1
        if not equal(g(a, b + b2), combine(g(a, b), g(a, b2))):
            raise IdentityViolated("right additivity", {"a": a.to_json(), "b": b.to_json(), "b2": b2.to_json()})
    values = _unique((g(a, b) for a in left for b in right), equal)
    for u, v in itertools.product(values, values):
        checked += 1
        if not equal(combine(u, v), combine(v, u)):
            raise IdentityViolated("commuting values", {"u": repr(u), "v": repr(v)})
    for a, r, b in itertools.product(left, middle, right):
        checked += 1
        if not equal(g(a * r, b), g(a, r * b)):
            raise IdentityViolated(
                "middle associativity", {"a": a.to_json(), "r": r.to_json(), "b": b.to_json()}
            )

    pairs = family.witnesses(i, j)

    def f(c: Element):
        value = identity
        for x, y in pairs:
            value = combine(value, g(x, y * c))
        return value

    for a, b in itertools.product(left, right):
        checked += 1
        if not equal(f(a * b), g(a, b)):
            raise IdentityViolated("induced map", {"a": a.to_json(), "b": b.to_json()})
    logging.debug(f"Factored bilinear map on R_{i}{j} x R_{j}{k} after {checked} checks")
    return InducedMap(f, checked)
