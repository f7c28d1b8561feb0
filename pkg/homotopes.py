import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from errors import (
    BudgetExhausted,
    ConfigError,
    LevelBudgetExceeded,
    LevelMismatch,
    NoArrow,
    RankTooSmall,
)
from idempotents import IdempotentFamily
from quotients import f_alpha, g_alpha, merge_partition
from rings import Element, FiniteCommutativeRing, Localization, MatrixAlgebra, localize_algebra, localize_finite
from roots import Root
from steinberg import (
    RELATIONS,
    Generator,
    SteinbergWord,
    WordContext,
    check_relation_instance,
    random_relation_instance,
    random_word,
    reduce,
    st_eval,
)


class IndexMonoid:
    """Levels 0..k_max standing for s^0, ..., s^k_max; arrows go from a level down to any lower one"""

    def __init__(self, base: FiniteCommutativeRing, s: int, k_max: int):
        if k_max < 0:
            raise ConfigError(f"k_max must be non-negative, got {k_max}")
        self.base = base
        self.s = s
        self.k_max = k_max

    def levels(self) -> range:
        return range(self.k_max + 1)

    def value(self, k: int) -> int:
        return self.base.power(self.s, k)

    def has_arrow(self, source: int, target: int) -> bool:
        return 0 <= target <= source

    def cofactor(self, source: int, target: int) -> int:
        if not self.has_arrow(source, target):
            raise NoArrow(f"no structure map from level {source} to level {target}")
        return self.value(source - target)


@dataclass(frozen=True)
class HomotopeElement:
    """a^(s^level)"""

    level: int
    payload: Element

    def __add__(self, other: "HomotopeElement") -> "HomotopeElement":
        if other.level != self.level:
            raise LevelMismatch(f"cannot add levels {self.level} and {other.level}")
        return HomotopeElement(self.level, self.payload + other.payload)


def structure_map(monoid: IndexMonoid, x: HomotopeElement, target: int) -> HomotopeElement:
    """a^(s^(t + d)) -> (s^d a)^(s^t)"""
    return HomotopeElement(target, x.payload.scale(monoid.cofactor(x.level, target)))


def homotope_mul(monoid: IndexMonoid, x: HomotopeElement, y: HomotopeElement) -> HomotopeElement:
    """(a, b) -> (s^k a b) at level k"""
    if x.level != y.level:
        raise LevelMismatch(f"cannot multiply levels {x.level} and {y.level}")
    return HomotopeElement(x.level, (x.payload * y.payload).scale(monoid.value(x.level)))


def word_structure_map(w: SteinbergWord, target: int) -> SteinbergWord:
    """Carry a homotope word down to a lower level"""
    if target == w.context.level:
        return w
    base = w.context.algebra.base
    if not 0 <= target <= w.context.level:
        raise NoArrow(f"no structure map from level {w.context.level} to level {target}")
    c = base.power(w.context.scale, w.context.level - target)
    return SteinbergWord(w.context.at_level(target), (Generator(g.i, g.j, g.a.scale(c), g.e) for g in w.letters))


@dataclass(frozen=True)
class TowerMorphism:
    """Pre-morphism: index_shift sends a target level i to a source level, level_map(i, x) maps it to level i"""

    name: str
    index_shift: Callable[[int], int]
    level_map: Callable[[int, HomotopeElement], HomotopeElement]

    def __call__(self, target_level: int, x: HomotopeElement) -> HomotopeElement:
        return self.level_map(target_level, x)

    def compose(self, other: "TowerMorphism") -> "TowerMorphism":
        """self after other"""

        def shift(i):
            return other.index_shift(self.index_shift(i))

        def level_map(i, x):
            return self.level_map(i, other.level_map(self.index_shift(i), x))

        return TowerMorphism(f"{self.name}*{other.name}", shift, level_map)


def identity_morphism(monoid: IndexMonoid) -> TowerMorphism:
    return TowerMorphism("id", lambda i: i, lambda i, x: structure_map(monoid, x, i))


@dataclass
class EquivalenceVerdict:
    """status is 'equivalent', 'inconclusive' or 'inequivalent'"""

    status: str
    levels: Dict[int, Optional[int]] = field(default_factory=dict)
    witness: Optional[Dict[str, Any]] = None

    @property
    def max_k(self) -> Optional[int]:
        found = [k for k in self.levels.values() if k is not None]
        return max(found) if found else None

    def to_json(self) -> Dict[str, Any]:
        return {"status": self.status, "levels": {str(i): k for i, k in self.levels.items()}, "witness": self.witness}


def premorphism_equiv(
    monoid: IndexMonoid,
    f: TowerMorphism,
    g: TowerMorphism,
    carrier: Iterable[Element],
    target_levels: Optional[Iterable[int]] = None,
    k_max: Optional[int] = None,
    stabilization: Optional[int] = None,
    strict: bool = False,
) -> EquivalenceVerdict:
    """Search, per target level, the least k at which f and g agree after a structure map.

    Running out of budget is inconclusive. Inequivalence is reported only
    when k_max reaches the s-annihilator stabilization exponent and a
    nonzero difference survives; this assumes the level maps commute with
    multiplication by s, which holds for operators built in this module.
    """
    carrier = list(carrier)
    k_max = monoid.k_max if k_max is None else k_max
    targets = list(monoid.levels() if target_levels is None else target_levels)
    verdict = EquivalenceVerdict("equivalent")
    for i in targets:
        fi, gi = f.index_shift(i), g.index_shift(i)
        start = max(fi, gi)
        witness = None
        for k in range(k_max + 1):
            source = start + k
            witness = None
            for x in carrier:
                X = HomotopeElement(source, x)
                left = f(i, structure_map(monoid, X, fi)).payload
                right = g(i, structure_map(monoid, X, gi)).payload
                if left != right:
                    witness = {"target_level": i, "k": k, "x": x.to_json(), "difference": (left - right).to_json()}
                    break
            if witness is None:
                verdict.levels[i] = k
                break
        else:
            verdict.levels[i] = None
            if stabilization is not None and k_max >= stabilization:
                verdict.status = "inequivalent"
            elif verdict.status == "equivalent":
                verdict.status = "inconclusive"
            verdict.witness = witness
    if verdict.status == "inconclusive":
        logging.warning(f"Equivalence of {f.name} and {g.name} inconclusive within k_max={k_max}")
        if strict:
            raise BudgetExhausted(f"{f.name} and {g.name} not shown equivalent within k_max={k_max}")
    return verdict


@dataclass(frozen=True)
class ScaledOperator:
    """L_(a, s^m) acts by b^(s^(m + k)) -> (a b)^(s^k); R multiplies on the right"""

    kind: str
    a: Element
    denominator: int

    def __post_init__(self):
        if self.kind not in ("L", "R"):
            raise ConfigError(f"operator kind must be 'L' or 'R', got {self.kind!r}")

    def apply(self, x: HomotopeElement) -> HomotopeElement:
        if x.level < self.denominator:
            raise LevelMismatch(f"level {x.level} is below the operator denominator {self.denominator}")
        payload = self.a * x.payload if self.kind == "L" else x.payload * self.a
        return HomotopeElement(x.level - self.denominator, payload)

    def expand(self, monoid: IndexMonoid, k: int) -> "ScaledOperator":
        """The equivalent operator (a s^k, s^(m + k))"""
        return ScaledOperator(self.kind, self.a.scale(monoid.value(k)), self.denominator + k)

    def compose(self, other: "ScaledOperator") -> "ScaledOperator":
        """self after other"""
        if other.kind != self.kind:
            raise ConfigError("cannot compose L and R operators")
        a = self.a * other.a if self.kind == "L" else other.a * self.a
        return ScaledOperator(self.kind, a, self.denominator + other.denominator)

    def add(self, other: "ScaledOperator", monoid: IndexMonoid) -> "ScaledOperator":
        if other.kind != self.kind:
            raise ConfigError("cannot add L and R operators")
        a = self.a.scale(monoid.value(other.denominator)) + other.a.scale(monoid.value(self.denominator))
        return ScaledOperator(self.kind, a, self.denominator + other.denominator)

    def as_morphism(self) -> TowerMorphism:
        return TowerMorphism(
            f"{self.kind}({self.a.data.tolist()}/s^{self.denominator})",
            lambda i: i + self.denominator,
            lambda i, x: self.apply(x),
        )


def scaled_op_apply(op: ScaledOperator, x: HomotopeElement) -> HomotopeElement:
    return op.apply(x)


@dataclass(frozen=True)
class Fraction:
    """numerator / s^level in S^-1 R, kept unreduced"""

    numerator: Element
    level: int

    def psi(self, loc: Localization, target: MatrixAlgebra) -> Element:
        return Element(target, loc.psi_array(self.numerator.data)).scale(loc.fraction(1, self.level))

    def equals(self, other: "Fraction", loc: Localization, target: MatrixAlgebra) -> bool:
        return self.psi(loc, target) == other.psi(loc, target)

    def add(self, other: "Fraction", s: int) -> "Fraction":
        base = self.numerator.algebra.base
        num = self.numerator.scale(base.power(s, other.level)) + other.numerator.scale(base.power(s, self.level))
        return Fraction(num, self.level + other.level)

    def mul(self, other: "Fraction") -> "Fraction":
        return Fraction(self.numerator * other.numerator, self.level + other.level)

    def inverse(self, family: IdempotentFamily, i: int, loc: Localization, target: MatrixAlgebra) -> "Fraction":
        """Inverse in the localized corner ring, lifted back to a numerator over s^0"""
        e = Element(target, loc.psi_array(family.e(i).data))
        inv = target.corner_inverse(self.psi(loc, target), e)
        return Fraction(Element(self.numerator.algebra, inv.data), 0)


@dataclass(frozen=True)
class LocalTransvection:
    """x_ij(v / s^m) in St(S^-1 R)"""

    i: int
    j: int
    v: Fraction

    def to_json(self):
        return {"x": [self.i, self.j], "numerator": self.v.numerator.to_json(), "level": self.v.level}


@dataclass(frozen=True)
class LocalDiagonal:
    """d_i(u) in Diag(S^-1 R); u_inv is an inverse of u after localization"""

    i: int
    u: Fraction
    u_inv: Fraction

    @classmethod
    def of(cls, family: IdempotentFamily, i: int, u: Fraction, loc: Localization, target: MatrixAlgebra):
        return cls(i, u, u.inverse(family, i, loc, target))

    def to_json(self):
        return {"d": self.i, "numerator": self.u.numerator.to_json(), "level": self.u.level}


Actor = Union[LocalTransvection, LocalDiagonal]


def _letter_word(context: WordContext, i: int, j: int, a: Element) -> SteinbergWord:
    return SteinbergWord(context, (Generator(i, j, a, 1),))


def _ad_letter(actor: Actor, g: Generator, context: WordContext) -> SteinbergWord:
    """Image of x_kl(a) (sign ignored) as a word at its natural level"""
    L = context.level
    base = context.algebra.base
    s = context.scale
    a = g.a
    k, l = g.i, g.j
    if isinstance(actor, LocalDiagonal):
        m, m_inv = actor.u.level, actor.u_inv.level
        if k == actor.i:
            return _letter_word(_at(context, L - m), k, l, actor.u.numerator * a)
        if l == actor.i:
            return _letter_word(_at(context, L - m_inv), k, l, a * actor.u_inv.numerator)
        return _letter_word(context, k, l, a)
    i, j, v, m = actor.i, actor.j, actor.v.numerator, actor.v.level
    sm = base.power(s, m)
    if (k, l) == (j, i):
        return _ad_opposite(actor, g, context)
    if k == j:
        out = _at(context, L - m)
        return _letter_word(out, i, l, v * a) * _letter_word(out, k, l, a.scale(sm))
    if l == i:
        out = _at(context, L - m)
        return _letter_word(out, k, j, -(a * v)) * _letter_word(out, k, l, a.scale(sm))
    return _letter_word(context, k, l, a)


def _at(context: WordContext, level: int) -> WordContext:
    if level < 0:
        raise LevelBudgetExceeded(f"action needs more levels than the word provides (target level {level})")
    return context.at_level(level)


def _ad_opposite(actor: LocalTransvection, g: Generator, context: WordContext) -> SteinbergWord:
    """x_ji(a) under x_ij(v): through the quotient by e_j - e_i and d_inf(e_inf + v)"""
    family = context.family
    if family.n < 4:
        raise RankTooSmall(f"acting on the opposite root needs n >= 4, got n = {family.n}")
    alpha = Root(actor.i, actor.j)
    merged = family.merge(merge_partition(family.n, alpha))
    lifted = g_alpha(_letter_word(context, g.i, g.j, g.a), alpha, merged=merged)
    m = actor.v.level
    base = context.algebra.base
    inf = merged.class_of(actor.i)
    e_inf = merged.e(inf)
    sm = base.power(context.scale, m)
    left = e_inf.scale(sm) + actor.v.numerator
    right = e_inf.scale(sm) - actor.v.numerator
    out = _at(lifted.context, lifted.context.level - m)
    letters = []
    for h in lifted.letters:
        payload = left * h.a if h.i == inf else h.a * right
        letters.append(Generator(h.i, h.j, payload, h.e))
    return f_alpha(SteinbergWord(out, letters))


def tower_ad(actor: Actor, w: SteinbergWord) -> SteinbergWord:
    """Action of a generator of St(S^-1 R) x| Diag(S^-1 R) on a homotope word.

    Letter images are carried down to the lowest level any of them needs.
    """
    context = w.context
    if context.system != "homotope":
        raise ConfigError("tower_ad acts on homotope words")
    images = []
    for g in w.letters:
        image = _ad_letter(actor, g, context)
        images.append(image if g.e == 1 else image.inverse())
    level = min((im.context.level for im in images), default=context.level)
    out = SteinbergWord.identity(context.at_level(level))
    for im in images:
        out = out * word_structure_map(im, level)
    return out


class LocalizedView:
    """Images of homotope elements and actors in GL(S^-1 R)"""

    def __init__(self, algebra: MatrixAlgebra, s: int):
        self.loc = localize_finite(algebra.base, s)
        self.algebra = algebra
        self.target = localize_algebra(algebra, self.loc)

    def psi(self, a: Element) -> Element:
        return Element(self.target, self.loc.psi_array(a.data))

    def word_image(self, w: SteinbergWord) -> Element:
        """1 + s^k st^(s^k)(w)"""
        q = st_eval(w)
        return self.target.one() + self.psi(q).scale(self.loc.fraction(self.loc.source.power(self.loc.s, w.context.level), 0))

    def actor_image(self, actor: Actor, family: IdempotentFamily) -> Tuple[Element, Element]:
        one = self.target.one()
        if isinstance(actor, LocalTransvection):
            v = actor.v.psi(self.loc, self.target)
            return one + v, one - v
        e = self.psi(family.e(actor.i))
        return one - e + actor.u.psi(self.loc, self.target), one - e + actor.u_inv.psi(self.loc, self.target)

    def equivariant(self, actor: Actor, w: SteinbergWord, image: SteinbergWord) -> bool:
        g, g_inv = self.actor_image(actor, w.context.family)
        return self.word_image(image) == g * self.word_image(w) * g_inv


def cleared_identity(actor: LocalTransvection, w: SteinbergWord, image: SteinbergWord) -> bool:
    """s^(2m + k') q' = s^k (s^m + v) q (s^m - v), exactly in R"""
    base = w.context.algebra.base
    s = w.context.scale
    m = actor.v.level
    k, k_out = w.context.level, image.context.level
    sm = w.context.algebra.scalar(base.power(s, m))
    v = actor.v.numerator
    left = st_eval(image).scale(base.power(s, 2 * m + k_out))
    right = ((sm + v) * st_eval(w) * (sm - v)).scale(base.power(s, k))
    return left == right


def random_actor(
    family: IdempotentFamily,
    view: LocalizedView,
    rng: np.random.Generator,
    max_denominator: int = 1,
    kind: Optional[str] = None,
) -> Actor:
    m = int(rng.integers(0, max_denominator + 1))
    kind = kind or ("x" if rng.random() < 0.5 else "d")
    if kind == "x":
        i, j = (int(v) for v in rng.choice(np.arange(1, family.n + 1), size=2, replace=False))
        return LocalTransvection(i, j, Fraction(family.random_component(i, j, rng), m))
    i = int(rng.integers(1, family.n + 1))
    u = Fraction(family.random_corner_unit(i, rng), m)
    return LocalDiagonal.of(family, i, u, view.loc, view.target)


class Tally:
    """Pass/fail counters for one check, keeping the first few counterexamples"""

    def __init__(self, keep: int = 3):
        self.checked = 0
        self.failed = 0
        self.skipped = 0
        self.counterexamples: List[Dict[str, Any]] = []
        self.keep = keep

    def record(self, ok: bool, witness: Optional[Callable[[], Dict[str, Any]]] = None):
        self.checked += 1
        if not ok:
            self.failed += 1
            if witness is not None and len(self.counterexamples) < self.keep:
                self.counterexamples.append(witness())

    def status(self) -> str:
        if self.failed:
            return "fail"
        return "pass" if self.checked else "inconclusive"

    def to_json(self) -> Dict[str, Any]:
        out = {"checked": self.checked, "failed": self.failed, "status": self.status()}
        if self.skipped:
            out["skipped"] = self.skipped
        if self.counterexamples:
            out["counterexamples"] = self.counterexamples
        return out


def tower_relation_suite(
    family: IdempotentFamily,
    s: int,
    k_max: int,
    samples: int,
    rng: np.random.Generator,
    mutation: Optional[str] = None,
) -> Dict[str, Any]:
    """Level-wise verification of the homotope tower and the localized action"""
    algebra = family.algebra
    monoid = IndexMonoid(algebra.base, s, k_max)
    view = LocalizedView(algebra, s)
    report: Dict[str, Any] = {
        "localization": {
            "target": view.loc.target.descriptor(),
            "exponent": view.loc.exponent,
            "properties": view.loc.check(),
        },
        "warnings": list(view.loc.warnings),
        "levels": {},
    }
    if k_max == 0:
        report["levels"] = {"0": {name: {"status": "inconclusive"} for name in _LEVEL_CHECKS}}
        report["lr_equivalence"] = {"status": "inconclusive"}
        report["status"] = "inconclusive"
        logging.warning("Tower budget k_max=0 leaves nothing to compare; every check is inconclusive")
        return report

    failed = False
    for level in monoid.levels():
        tallies = {name: Tally() for name in _LEVEL_CHECKS}
        context = WordContext(family, "homotope", s, level)
        for relation in RELATIONS if family.n >= 3 else RELATIONS[:2]:
            for _ in range(samples):
                indices, payloads = random_relation_instance(family, relation, rng)
                verdict = check_relation_instance(context, relation, indices, payloads, mutation)
                tallies[relation].record(
                    verdict.ok,
                    lambda: {"indices": list(indices), "payloads": [p.to_json() for p in payloads]},
                )
        _check_structure(monoid, family, level, samples, rng, tallies["structure"])
        _check_operators(monoid, family, level, samples, rng, tallies["operators"])
        _check_ad(view, family, context, samples, rng, tallies["ad"])
        _check_f_alpha(family, context, samples, rng, tallies["f_alpha"])
        report["levels"][str(level)] = {name: t.to_json() for name, t in tallies.items()}
        failed = failed or any(t.failed for t in tallies.values())

    report["lr_equivalence"] = _check_lr_equivalence(monoid, family, view)
    failed = failed or report["lr_equivalence"]["status"] == "fail"
    if failed:
        report["status"] = "fail"
    elif report["warnings"]:
        report["status"] = "warn"
    else:
        report["status"] = "pass"
    return report


_LEVEL_CHECKS = ("St1", "St2", "St3", "structure", "operators", "ad", "f_alpha")


def _check_structure(monoid, family, level, samples, rng, tally):
    for _ in range(samples):
        x = HomotopeElement(level + 2, family.algebra.random(rng))
        y = HomotopeElement(level + 2, family.algebra.random(rng))
        chain = structure_map(monoid, structure_map(monoid, x, level + 1), level)
        tally.record(chain == structure_map(monoid, x, level), lambda: {"x": x.payload.to_json()})
        prod = structure_map(monoid, homotope_mul(monoid, x, y), level)
        split = homotope_mul(monoid, structure_map(monoid, x, level), structure_map(monoid, y, level))
        tally.record(prod == split, lambda: {"x": x.payload.to_json(), "y": y.payload.to_json()})


def _check_operators(monoid, family, level, samples, rng, tally):
    """L_u(ab) = L_u(a) b, R_v(a) b = a L_v(b), R_w(ab) = a R_w(b) at level - 1"""
    n = family.n
    top = level + 1
    for _ in range(samples):
        i, j, k = (int(v) for v in rng.choice(np.arange(1, n + 1), size=3, replace=n < 3))
        a = HomotopeElement(top, family.random_component(i, j, rng))
        b = HomotopeElement(top, family.random_component(j, k, rng))
        lu = ScaledOperator("L", family.random_component(i, i, rng), 1)
        lv = ScaledOperator("L", family.random_component(j, j, rng), 1)
        rv = ScaledOperator("R", lv.a, 1)
        rw = ScaledOperator("R", family.random_component(k, k, rng), 1)

        def down(x):
            return structure_map(monoid, x, level)

        ab = homotope_mul(monoid, a, b)
        checks = (
            lu.apply(ab) == homotope_mul(monoid, lu.apply(a), down(b)),
            homotope_mul(monoid, rv.apply(a), down(b)) == homotope_mul(monoid, down(a), lv.apply(b)),
            rw.apply(ab) == homotope_mul(monoid, down(a), rw.apply(b)),
        )
        tally.record(all(checks), lambda: {"a": a.payload.to_json(), "b": b.payload.to_json()})
        composite = lu.compose(lu).apply(HomotopeElement(top + 1, a.payload))
        stepwise = lu.apply(lu.apply(HomotopeElement(top + 1, a.payload)))
        tally.record(composite == stepwise, lambda: {"a": a.payload.to_json()})


def _check_ad(view, family, context, samples, rng, tally):
    n = family.n
    for _ in range(samples):
        actor = random_actor(family, view, rng)
        w = random_word(context, rng, int(rng.integers(1, 4)))
        try:
            image = tower_ad(actor, w)
        except (LevelBudgetExceeded, RankTooSmall):
            tally.skipped += 1
            continue
        tally.record(view.equivariant(actor, w, image), lambda: {"actor": actor.to_json(), "word": w.to_json()})
        if isinstance(actor, LocalTransvection) and len(w) == 1 and w.letters[0].key != (actor.j, actor.i):
            tally.record(cleared_identity(actor, w, image), lambda: {"actor": actor.to_json(), "word": w.to_json()})
        if isinstance(actor, LocalTransvection):
            fixed = _letter_word(context, actor.i, actor.j, family.random_component(actor.i, actor.j, rng))
            tally.record(
                view.word_image(tower_ad(actor, fixed)) == view.word_image(fixed),
                lambda: {"actor": actor.to_json()},
            )
        second = random_actor(family, view, rng)
        try:
            twice = tower_ad(second, image)
        except (LevelBudgetExceeded, RankTooSmall):
            tally.skipped += 1
            continue
        g1, g1_inv = view.actor_image(actor, family)
        g2, g2_inv = view.actor_image(second, family)
        tally.record(
            view.word_image(twice) == (g2 * g1) * view.word_image(w) * (g1_inv * g2_inv),
            lambda: {"actors": [actor.to_json(), second.to_json()], "word": w.to_json()},
        )


def _check_f_alpha(family, context, samples, rng, tally):
    n = family.n
    if n < 3:
        return
    alpha = Root(n - 1, n)
    merged = family.merge(merge_partition(n, alpha))
    merged_context = context.with_family(merged)
    for _ in range(samples):
        w = random_word(merged_context, rng, int(rng.integers(1, 4)))
        for target in range(context.level + 1):
            left = f_alpha(word_structure_map(w, target))
            right = word_structure_map(f_alpha(w), target)
            tally.record(reduce(left) == reduce(right), lambda: {"word": w.to_json(), "target": target})
        if n >= 4:
            phi = random_word(context, rng, int(rng.integers(1, 4)))
            back = f_alpha(g_alpha(phi, alpha, merged=merged))
            base = context.algebra.base
            carry = base.power(context.scale, context.level - back.context.level)
            tally.record(st_eval(back) == st_eval(phi).scale(carry), lambda: {"word": phi.to_json()})


def _check_lr_equivalence(monoid: IndexMonoid, family: IdempotentFamily, view: LocalizedView) -> Dict[str, Any]:
    """L_(a, s) ~ L_(a s', s s') for every a in R_11 and s' = s^1, s^2"""
    corner = list(family.component_elements(1, 1)) if family.component_size(1, 1) <= 256 else []
    carrier = list(family.component_elements(1, 2)) if family.component_size(1, 2) <= 256 else []
    tally = Tally()
    worst = 0
    for a in corner:
        op = ScaledOperator("L", a, 1)
        for extra in range(1, min(2, monoid.k_max) + 1):
            verdict = premorphism_equiv(
                monoid, op.as_morphism(), op.expand(monoid, extra).as_morphism(), carrier, k_max=2
            )
            ok = verdict.status == "equivalent"
            if ok:
                worst = max(worst, verdict.max_k or 0)
            tally.record(ok, lambda: {"a": a.to_json(), "extra": extra, "verdict": verdict.to_json()})
    out = tally.to_json()
    out["max_k"] = worst
    return out
