import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import (
    ConfigError,
    IndexOutOfRange,
    NonInvertibleComponent,
    NotUnipotentSupport,
    PayloadNotInComponent,
    SideConditionViolated,
    UnsupportedContext,
)
from idempotents import IdempotentFamily
from rings import Element, MatrixAlgebra, quasi_compose

RELATIONS = ("St1", "St2", "St3")
MUTATIONS = (None, "drop-scale", "drop-product")


@dataclass(frozen=True)
class WordContext:
    """Where a word lives: ring and idempotent family, relation system, scale and level.

    Homotope words at level k satisfy the relations of St(R)^(t) with t = s^k.
    A plain context over a merged family is the quotient system.
    """

    family: IdempotentFamily
    system: str = "plain"
    scale: int = 1
    level: int = 0

    def __post_init__(self):
        if self.system not in ("plain", "homotope"):
            raise ConfigError(f"unknown relation system {self.system!r}")
        if self.level < 0:
            raise ConfigError(f"level must be non-negative, got {self.level}")

    @property
    def algebra(self) -> MatrixAlgebra:
        return self.family.algebra

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def t(self) -> int:
        """The homotope scalar s^level (1 in plain contexts)"""
        base = self.algebra.base
        if self.system == "plain":
            return base.from_int(1)
        return base.power(self.scale, self.level)

    @property
    def relation_system(self) -> str:
        if self.system == "homotope":
            return "homotope"
        return "quotient" if self.family.parent is not None else "plain"

    def at_level(self, level: int) -> "WordContext":
        return replace(self, level=level)

    def with_family(self, family: IdempotentFamily) -> "WordContext":
        return replace(self, family=family)

    def header(self) -> Dict[str, Any]:
        return {
            "ring": self.algebra.descriptor(),
            "family": self.family.descriptor(),
            "system": self.relation_system,
            "scale": self.scale,
            "level": self.level,
        }


@dataclass(frozen=True)
class Generator:
    """x_ij(a) raised to the power e = +-1"""

    i: int
    j: int
    a: Element
    e: int = 1

    def inverse(self) -> "Generator":
        return Generator(self.i, self.j, self.a, -self.e)

    @property
    def payload(self) -> Element:
        return self.a if self.e == 1 else -self.a

    @property
    def key(self) -> Tuple[int, int]:
        return (self.i, self.j)

    def to_json(self) -> Dict[str, Any]:
        return {"i": self.i, "j": self.j, "a": self.a.to_json(), "e": self.e}


class SteinbergWord:
    """Immutable word in Steinberg generators over a fixed context."""

    __slots__ = ("context", "letters")

    def __init__(self, context: WordContext, letters: Iterable[Generator] = ()):
        self.context = context
        self.letters: Tuple[Generator, ...] = tuple(letters)

    @classmethod
    def letter(cls, context: WordContext, i: int, j: int, a: Element, e: int = 1) -> "SteinbergWord":
        validate_generator(context, Generator(i, j, a, e))
        return cls(context, (Generator(i, j, a, e),))

    @classmethod
    def identity(cls, context: WordContext) -> "SteinbergWord":
        return cls(context, ())

    def __mul__(self, other: "SteinbergWord") -> "SteinbergWord":
        if other.context != self.context:
            raise UnsupportedContext("cannot multiply words from different contexts")
        return SteinbergWord(self.context, self.letters + other.letters)

    def inverse(self) -> "SteinbergWord":
        return SteinbergWord(self.context, (g.inverse() for g in reversed(self.letters)))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other):
        return isinstance(other, SteinbergWord) and other.context == self.context and other.letters == self.letters

    def __hash__(self):
        return hash((self.context, tuple((g.i, g.j, g.a, g.e) for g in self.letters)))

    def support(self) -> Optional[str]:
        """'upper' or 'lower' when every letter lies in U+ or U-, else None"""
        if all(g.i < g.j for g in self.letters):
            return "upper"
        if all(g.i > g.j for g in self.letters):
            return "lower"
        return None

    def st(self) -> Element:
        return st_eval(self)

    def to_json(self) -> Dict[str, Any]:
        return {"context": self.context.header(), "letters": [g.to_json() for g in self.letters]}

    @classmethod
    def from_json(cls, context: WordContext, letters: Sequence[Dict[str, Any]]) -> "SteinbergWord":
        word = cls.identity(context)
        for entry in letters:
            try:
                a = context.algebra.from_rows(entry["a"])
                word = word * cls.letter(context, int(entry["i"]), int(entry["j"]), a, int(entry.get("e", 1)))
            except KeyError as e:
                raise ConfigError(f"letter {entry!r} is missing field {e}") from None
        return word

    def __repr__(self):
        body = " ".join(f"x{g.i}{g.j}({g.a.data.tolist()})" + ("" if g.e == 1 else "^-1") for g in self.letters)
        return f"<SteinbergWord {self.context.relation_system}: {body or '1'}>"


def validate_generator(context: WordContext, g: Generator):
    family = context.family
    family.check_index(g.i, g.j)
    if g.i == g.j:
        raise IndexOutOfRange(f"generator x_{g.i}{g.j} needs distinct indices")
    if g.e not in (1, -1):
        raise ConfigError(f"sign exponent must be +-1, got {g.e}")
    if g.a.algebra != context.algebra or not family.in_component(g.a, g.i, g.j):
        raise PayloadNotInComponent(f"payload of x_{g.i}{g.j} is not in R_{g.i}{g.j}")


def commutator(x: SteinbergWord, y: SteinbergWord) -> SteinbergWord:
    """[x, y] = x y x^-1 y^-1"""
    return x * y * x.inverse() * y.inverse()


def conjugate(g: SteinbergWord, h: SteinbergWord) -> SteinbergWord:
    """g h g^-1"""
    return g * h * g.inverse()


def st_eval(w: SteinbergWord) -> Element:
    """Image in GL(R), or in GL(R)^(t) as a quasi-invertible element for homotope words"""
    algebra = w.context.algebra
    if w.context.system == "homotope":
        t = w.context.t
        x = algebra.zero()
        for g in w.letters:
            x = quasi_compose(x, g.payload, t)
        return x
    one = algebra.one()
    result = one
    for g in w.letters:
        result = result * (one + g.payload)
    return result


@dataclass(frozen=True)
class RelationVerdict:
    relation: str
    indices: Tuple[int, ...]
    ok: bool
    oracles: Tuple[str, ...]

    def to_json(self) -> Dict[str, Any]:
        return {"relation": self.relation, "indices": list(self.indices), "ok": self.ok, "oracles": list(self.oracles)}


def relation_sides(
    context: WordContext,
    relation: str,
    indices: Sequence[int],
    payloads: Sequence[Element],
    mutation: Optional[str] = None,
) -> Tuple[SteinbergWord, SteinbergWord]:
    """Left and right side of a Steinberg relation instance"""
    context.family.check_index(*indices)
    letter = SteinbergWord.letter
    if relation == "St1":
        i, j = indices
        a, b = payloads
        if i == j:
            raise SideConditionViolated("St1 needs i != j")
        return letter(context, i, j, a) * letter(context, i, j, b), letter(context, i, j, a + b)
    if relation == "St2":
        i, j, k, l = indices
        a, b = payloads
        if i == j or k == l or j == k or i == l:
            raise SideConditionViolated(f"St2 needs j != k and i != l, got ({i},{j}),({k},{l})")
        return commutator(letter(context, i, j, a), letter(context, k, l, b)), SteinbergWord.identity(context)
    if relation == "St3":
        i, j, k = indices
        a, b = payloads
        if len({i, j, k}) < 3:
            raise SideConditionViolated(f"St3 needs distinct i, j, k, got ({i},{j},{k})")
        lhs = commutator(letter(context, i, j, a), letter(context, j, k, b))
        if mutation == "drop-product":
            return lhs, SteinbergWord.identity(context)
        product = a * b if mutation == "drop-scale" else (a * b).scale(context.t)
        return lhs, letter(context, i, k, product)
    raise ConfigError(f"unknown relation {relation!r}")


def _common_support(x: SteinbergWord, y: SteinbergWord) -> Optional[str]:
    sx, sy = x.support(), y.support()
    if not x.letters:
        return sy
    if not y.letters:
        return sx
    return sx if sx == sy else None


def check_relation_instance(
    context: WordContext,
    relation: str,
    indices: Sequence[int],
    payloads: Sequence[Element],
    mutation: Optional[str] = None,
) -> RelationVerdict:
    """Verify one instance of (St1)-(St3) under st and, inside U+-, under normal forms"""
    lhs, rhs = relation_sides(context, relation, indices, payloads, mutation)
    ok = st_eval(lhs) == st_eval(rhs)
    oracles = ["st"]
    support = _common_support(lhs, rhs)
    if support is not None and context.system == "plain":
        oracles.append("normal-form")
        ok = ok and u_normal_form(lhs, support) == u_normal_form(rhs, support)
    if not ok:
        logging.debug(f"{relation} instance at {tuple(indices)} failed in {context.relation_system} context")
    return RelationVerdict(relation, tuple(indices), ok, tuple(oracles))


def _commute(u: Generator, v: Generator) -> bool:
    return u.key == v.key or (u.j != v.i and u.i != v.j)


def _normalize(g: Generator) -> Generator:
    return g if g.e == 1 else Generator(g.i, g.j, -g.a, 1)


def _merge_runs(letters: Iterable[Generator]) -> List[Generator]:
    # reduced form in the free product of the groups R_ij; unique
    out: List[Generator] = []
    for u in letters:
        if u.a.is_zero():
            continue
        if out and out[-1].key == u.key:
            merged = out[-1].a + u.a
            if merged.is_zero():
                out.pop()
            else:
                out[-1] = Generator(u.i, u.j, merged, 1)
        else:
            out.append(u)
    return out


def _first_rewrite(letters: List[Generator]) -> bool:
    for k in range(len(letters) - 1):
        v, u = letters[k], letters[k + 1]
        if v.key == u.key:
            merged = v.a + u.a
            letters[k:k + 2] = [] if merged.is_zero() else [Generator(v.i, v.j, merged, 1)]
            return True
        if _commute(v, u) and u.key < v.key:
            letters[k], letters[k + 1] = u, v
            return True
    return False


def reduce(w: SteinbergWord) -> SteinbergWord:
    """Free reduction, (St1) merges and (St2) swaps toward lexicographic (i, j) order"""
    letters = _merge_runs(_normalize(g) for g in w.letters)
    while _first_rewrite(letters):
        pass
    return SteinbergWord(w.context, letters)


def free_reduce(w: SteinbergWord) -> SteinbergWord:
    """Cancel adjacent g g^-1 pairs only"""
    out: List[Generator] = []
    for g in w.letters:
        if out and out[-1] == g.inverse():
            out.pop()
        else:
            out.append(g)
    return SteinbergWord(w.context, out)


@dataclass(frozen=True, eq=False)
class UnitriangularNormalForm:
    """Ordered letters of an element of U+ (rows descending) or U- (rows ascending)"""

    direction: str
    entries: Tuple[Tuple[int, int, Element], ...]

    def to_word(self, context: WordContext) -> SteinbergWord:
        return SteinbergWord(context, (Generator(i, j, a) for i, j, a in self.entries))

    def __eq__(self, other):
        if not isinstance(other, UnitriangularNormalForm):
            return NotImplemented
        if self.entries != other.entries:
            return False
        return not self.entries or self.direction == other.direction

    def __hash__(self):
        return hash(tuple((i, j, a) for i, j, a in self.entries))

    def to_json(self):
        return {"direction": self.direction, "letters": [[i, j, a.to_json()] for i, j, a in self.entries]}


def normal_form_of(family: IdempotentFamily, g: Element, direction: str) -> UnitriangularNormalForm:
    """Read the normal form off a unitriangular element of GL(R)"""
    algebra = family.algebra
    n = family.n
    for i in family.indices():
        if family.peirce_project(g, i, i) != family.e(i):
            raise NotUnipotentSupport(f"diagonal block {i} of the element is not the identity")
        for j in family.indices():
            wrong_side = j < i if direction == "upper" else j > i
            if wrong_side and not family.peirce_project(g, i, j).is_zero():
                raise NotUnipotentSupport(f"element has a nonzero ({i},{j}) block outside the {direction} part")
    one = algebra.one()
    rows: Dict[int, List[Tuple[int, int, Element]]] = {}
    order = range(1, n) if direction == "upper" else range(n, 1, -1)
    for i in order:
        r = family.e(i) * g - family.e(i)
        g = g * (one - r)
        cols = range(i + 1, n + 1) if direction == "upper" else range(1, i)
        rows[i] = [(i, j, family.peirce_project(r, i, j)) for j in cols]
    if g != one:
        raise NotUnipotentSupport("element is not unitriangular")
    row_order = range(n - 1, 0, -1) if direction == "upper" else range(2, n + 1)
    entries = tuple(entry for i in row_order for entry in rows.get(i, []) if not entry[2].is_zero())
    return UnitriangularNormalForm(direction, entries)


def u_normal_form(w: SteinbergWord, direction: Optional[str] = None) -> UnitriangularNormalForm:
    """Unique normal form of a word supported on U+ or U-"""
    if w.context.system != "plain":
        raise UnsupportedContext("normal forms are defined for plain and quotient contexts")
    support = w.support() if w.letters else (direction or "upper")
    if support is None or (direction is not None and w.letters and support != direction):
        raise NotUnipotentSupport("word mixes upper and lower letters")
    return normal_form_of(w.context.family, st_eval(w), support)


@dataclass(frozen=True)
class DiagonalElement:
    """(u_1, ..., u_n) with u_i a unit of the corner ring R_ii"""

    family: IdempotentFamily
    components: Tuple[Element, ...]

    def __post_init__(self):
        if len(self.components) != self.family.n:
            raise ConfigError(f"expected {self.family.n} diagonal components, got {len(self.components)}")
        algebra = self.family.algebra
        for i, u in enumerate(self.components, start=1):
            if not self.family.in_component(u, i, i) or not algebra.corner_is_unit(u, self.family.e(i)):
                raise NonInvertibleComponent(f"component {i} is not a unit of R_{i}{i}")

    @classmethod
    def identity(cls, family: IdempotentFamily) -> "DiagonalElement":
        return cls(family, tuple(family.e(i) for i in family.indices()))

    @classmethod
    def d(cls, family: IdempotentFamily, i: int, u: Element) -> "DiagonalElement":
        """d_i(u) = 1 + u - e_i"""
        comps = [family.e(k) for k in family.indices()]
        comps[i - 1] = u
        return cls(family, tuple(comps))

    @classmethod
    def from_gl(cls, family: IdempotentFamily, g: Element) -> "DiagonalElement":
        return cls(family, tuple(family.peirce_project(g, i, i) for i in family.indices()))

    @classmethod
    def random(cls, family: IdempotentFamily, rng: np.random.Generator) -> "DiagonalElement":
        return cls(family, tuple(family.random_corner_unit(i, rng) for i in family.indices()))

    def embed(self) -> Element:
        total = self.family.algebra.zero()
        for u in self.components:
            total = total + u
        return total

    def component_inverse(self, i: int) -> Element:
        return self.family.algebra.corner_inverse(self.components[i - 1], self.family.e(i))

    def inverse(self) -> "DiagonalElement":
        return DiagonalElement(self.family, tuple(self.component_inverse(i) for i in self.family.indices()))

    def __mul__(self, other: "DiagonalElement") -> "DiagonalElement":
        return DiagonalElement(self.family, tuple(u * v for u, v in zip(self.components, other.components)))

    def is_identity(self) -> bool:
        return all(u == self.family.e(i) for i, u in enumerate(self.components, start=1))

    def to_json(self):
        return [u.to_json() for u in self.components]


def diag_act(d: DiagonalElement, w: SteinbergWord) -> SteinbergWord:
    """x_jk(b) -> x_jk(u_j b u_k^-1)"""
    if d.family != w.context.family:
        raise UnsupportedContext("diagonal element and word use different idempotent families")
    inverses = {}
    letters = []
    for g in w.letters:
        if g.j not in inverses:
            inverses[g.j] = d.component_inverse(g.j)
        letters.append(Generator(g.i, g.j, d.components[g.i - 1] * g.a * inverses[g.j], g.e))
    return SteinbergWord(w.context, letters)


def random_letter(
    context: WordContext, rng: np.random.Generator, support: Optional[str] = None
) -> SteinbergWord:
    pairs = [
        (i, j)
        for i in context.family.indices()
        for j in context.family.indices()
        if i != j and (support is None or (i < j) == (support == "upper"))
    ]
    i, j = pairs[int(rng.integers(len(pairs)))]
    return SteinbergWord(context, (Generator(i, j, context.family.random_component(i, j, rng)),))


def random_word(
    context: WordContext, rng: np.random.Generator, length: int, support: Optional[str] = None
) -> SteinbergWord:
    word = SteinbergWord.identity(context)
    for _ in range(length):
        word = word * random_letter(context, rng, support)
    return word


def random_relation_instance(
    family: IdempotentFamily, relation: str, rng: np.random.Generator
) -> Tuple[Tuple[int, ...], Tuple[Element, Element]]:
    """Indices satisfying the side conditions of a relation, with random payloads"""
    n = family.n

    def pick(count):
        return [int(v) for v in rng.choice(np.arange(1, n + 1), size=count, replace=False)]

    if relation == "St1":
        i, j = pick(2)
        return (i, j), (family.random_component(i, j, rng), family.random_component(i, j, rng))
    if relation == "St2":
        while True:
            (i, j), (k, l) = pick(2), pick(2)
            if j != k and i != l:
                return (i, j, k, l), (family.random_component(i, j, rng), family.random_component(k, l, rng))
    if relation == "St3":
        i, j, k = pick(3)
        return (i, j, k), (family.random_component(i, j, rng), family.random_component(j, k, rng))
    raise ConfigError(f"unknown relation {relation!r}")


def _transfer(family: IdempotentFamily, i: int, j: int) -> Element:
    """epsilon_ij: the matrix-unit isomorphism between equal-size blocks i and j"""
    if family.blocks is None or len(family.blocks[i - 1]) != len(family.blocks[j - 1]):
        raise UnsupportedContext(f"blocks {i} and {j} must have equal size for kernel words")
    algebra = family.algebra
    total = algebra.zero()
    for r, c in zip(family.blocks[i - 1], family.blocks[j - 1]):
        total = total + algebra.matrix_unit(r, c)
    return total


def weyl_word(context: WordContext, lam: int, i: int = 1, j: int = 2) -> SteinbergWord:
    """w_ij(u) = x_ij(u) x_ji(-u^-1) x_ij(u) for u = lam * epsilon_ij"""
    if context.system != "plain":
        raise UnsupportedContext("kernel words are built in plain contexts")
    base = context.algebra.base
    eps, eps_back = _transfer(context.family, i, j), _transfer(context.family, j, i)
    u = eps.scale(lam)
    u_inv = eps_back.scale(base.inverse(lam))
    x = SteinbergWord.letter(context, i, j, u)
    return x * SteinbergWord.letter(context, j, i, -u_inv) * x


def h_word(context: WordContext, lam: int, i: int = 1, j: int = 2) -> SteinbergWord:
    """h_ij(lam) = w_ij(lam) w_ij(-1), mapping to diag(lam, lam^-1) on blocks i, j"""
    minus_one = context.algebra.base.neg(context.algebra.base.from_int(1))
    return weyl_word(context, lam, i, j) * weyl_word(context, minus_one, i, j)


def diagonal_word(context: WordContext, d: "DiagonalElement") -> SteinbergWord:
    """A product of h_{i,i+1} words with st-image d.

    Needs scalar components lam_i e_i on equal-size blocks with prod lam_i = 1,
    which is every elementary diagonal matrix over a commutative base.
    """
    family = context.family
    base = context.algebra.base
    if d.family != family:
        raise UnsupportedContext("diagonal element and context use different idempotent families")
    if family.blocks is None:
        raise UnsupportedContext("diagonal words need a block-diagonal idempotent family")
    scalars = []
    for i, u in enumerate(d.components, start=1):
        r = family.blocks[i - 1][0]
        lam = int(u.data[r, r])
        if u != family.e(i).scale(lam):
            raise UnsupportedContext(f"component {i} is not a scalar multiple of e_{i}")
        scalars.append(lam)
    word = SteinbergWord.identity(context)
    mu = base.from_int(1)
    for i in range(1, family.n):
        mu = base.mul(mu, scalars[i - 1])
        if mu != base.from_int(1):
            word = word * h_word(context, mu, i, i + 1)
    if base.mul(mu, scalars[-1]) != base.from_int(1):
        raise UnsupportedContext(f"diagonal scalars {scalars} do not multiply to 1")
    return word


def kernel_word(context: WordContext, lam: int, mu: int, i: int = 1, j: int = 2) -> SteinbergWord:
    """The symbol {lam, mu} = h(lam mu) h(lam)^-1 h(mu)^-1, a word in the kernel of st"""
    base = context.algebra.base
    return (
        h_word(context, base.mul(lam, mu), i, j)
        * h_word(context, lam, i, j).inverse()
        * h_word(context, mu, i, j).inverse()
    )


def check_commutator_identities(x: SteinbergWord, y: SteinbergWord, z: SteinbergWord) -> Dict[str, Dict[str, bool]]:
    """Commutator expansion and Hall-Witt identities, under st and under free reduction"""
    empty = SteinbergWord.identity(x.context)
    cases = {
        "expand_left": (commutator(x * y, z), conjugate(x, commutator(y, z)) * commutator(x, z)),
        "expand_right": (commutator(x, y * z), commutator(x, y) * conjugate(y, commutator(x, z))),
        "hall_witt": (
            commutator(commutator(x, y), conjugate(y, z))
            * commutator(commutator(y, z), conjugate(z, x))
            * commutator(commutator(z, x), conjugate(x, y)),
            empty,
        ),
    }
    return {
        name: {"st": st_eval(lhs) == st_eval(rhs), "free": free_reduce(lhs) == free_reduce(rhs)}
        for name, (lhs, rhs) in cases.items()
    }
