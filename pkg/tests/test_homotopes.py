import numpy as np
import pytest

from errors import BudgetExhausted, ConfigError, LevelBudgetExceeded, LevelMismatch, NoArrow, RankTooSmall
from homotopes import (
    Fraction,
    HomotopeElement,
    IndexMonoid,
    LocalDiagonal,
    LocalizedView,
    LocalTransvection,
    ScaledOperator,
    Tally,
    cleared_identity,
    homotope_mul,
    identity_morphism,
    premorphism_equiv,
    random_actor,
    structure_map,
    tower_ad,
    tower_relation_suite,
    word_structure_map,
)
from idempotents import IdempotentFamily
from rings import MatrixAlgebra, Zmod
from steinberg import SteinbergWord, WordContext, random_word, st_eval


@pytest.fixture
def family():
    return IdempotentFamily.matrix_units(MatrixAlgebra(Zmod(12), 4))


@pytest.fixture
def monoid(family):
    return IndexMonoid(family.algebra.base, 2, 4)


@pytest.fixture
def view(family):
    return LocalizedView(family.algebra, 2)


def test_index_monoid(monoid):
    assert list(monoid.levels()) == [0, 1, 2, 3, 4]
    assert monoid.value(3) == 8
    assert monoid.cofactor(3, 1) == 4
    assert monoid.has_arrow(2, 2) and not monoid.has_arrow(1, 2)
    with pytest.raises(NoArrow):
        monoid.cofactor(1, 2)


def test_structure_maps_compose_and_respect_products(monoid, family, rng):
    for _ in range(20):
        x = HomotopeElement(3, family.algebra.random(rng))
        y = HomotopeElement(3, family.algebra.random(rng))
        assert structure_map(monoid, structure_map(monoid, x, 2), 0) == structure_map(monoid, x, 0)
        assert structure_map(monoid, homotope_mul(monoid, x, y), 1) == homotope_mul(
            monoid, structure_map(monoid, x, 1), structure_map(monoid, y, 1)
        )


def test_levels_must_match(monoid, family):
    a = family.algebra.one()
    with pytest.raises(LevelMismatch):
        homotope_mul(monoid, HomotopeElement(1, a), HomotopeElement(2, a))
    with pytest.raises(LevelMismatch):
        HomotopeElement(1, a) + HomotopeElement(2, a)


def test_word_structure_map_scales_st(make_context, rng):
    context = make_context(Zmod(12), 3, "homotope", scale=2, level=3)
    for _ in range(20):
        w = random_word(context, rng, 3)
        lowered = word_structure_map(w, 1)
        assert lowered.context.level == 1
        assert st_eval(lowered) == st_eval(w).scale(4)
    with pytest.raises(NoArrow):
        word_structure_map(w, 4)


def test_operators_compose(monoid, family, rng):
    u = family.random_component(1, 1, rng)
    v = family.random_component(1, 1, rng)
    x = HomotopeElement(3, family.random_component(1, 2, rng))
    lu, lv = ScaledOperator("L", u, 1), ScaledOperator("L", v, 2)
    assert lu.compose(lv).apply(x) == lu.apply(lv.apply(x))
    assert lu.apply(HomotopeElement(1, x.payload)).level == 0
    with pytest.raises(LevelMismatch):
        lv.apply(HomotopeElement(1, x.payload))


def test_operator_sum(monoid, family, rng):
    u, v = family.random_component(1, 1, rng), family.random_component(1, 1, rng)
    x = HomotopeElement(3, family.random_component(1, 2, rng))
    lu, lv = ScaledOperator("L", u, 1), ScaledOperator("L", v, 1)
    total = lu.add(lv, monoid)
    assert total.denominator == 2
    x4 = HomotopeElement(4, x.payload)
    x3 = structure_map(monoid, x4, 3)
    assert total.apply(x4) == lu.apply(x3) + lv.apply(x3)
    with pytest.raises(ConfigError):
        lu.add(ScaledOperator("R", v, 1), monoid)


def test_expanded_operator_is_equivalent(monoid, family):
    a = family.algebra.matrix_unit(0, 0, 5)
    op = ScaledOperator("L", a, 1)
    verdict = premorphism_equiv(
        monoid, op.as_morphism(), op.expand(monoid, 1).as_morphism(), family.component_elements(1, 2)
    )
    assert verdict.status == "equivalent"
    assert verdict.max_k == 0


def test_equivalence_needs_annihilating_power(monoid, family):
    a = family.algebra.matrix_unit(0, 0, 4)
    b = family.algebra.matrix_unit(0, 0, 1)
    f = ScaledOperator("L", a, 1).as_morphism()
    g = ScaledOperator("L", b, 1).as_morphism()
    verdict = premorphism_equiv(monoid, f, g, family.component_elements(1, 2))
    assert verdict.status == "equivalent"
    assert set(verdict.levels.values()) == {2}


def test_inequivalence_only_past_stabilization(monoid, family):
    f = ScaledOperator("L", family.algebra.matrix_unit(0, 0, 1), 1).as_morphism()
    g = ScaledOperator("L", family.algebra.zero(), 1).as_morphism()
    carrier = list(family.component_elements(1, 2))
    assert premorphism_equiv(monoid, f, g, carrier, k_max=1).status == "inconclusive"
    verdict = premorphism_equiv(monoid, f, g, carrier, stabilization=2)
    assert verdict.status == "inequivalent"
    assert verdict.witness is not None
    with pytest.raises(BudgetExhausted):
        premorphism_equiv(monoid, f, g, carrier, k_max=1, strict=True)


def test_identity_morphism(monoid, family):
    ident = identity_morphism(monoid)
    op = ScaledOperator("L", family.algebra.matrix_unit(0, 0, 3), 1).as_morphism()
    carrier = list(family.component_elements(1, 2))
    assert premorphism_equiv(monoid, op.compose(ident), op, carrier).status == "equivalent"
    assert premorphism_equiv(monoid, ident.compose(op), op, carrier).status == "equivalent"


def test_fractions(family, view):
    e1 = family.e(1)
    u = Fraction(e1.scale(5), 1)
    u_inv = u.inverse(family, 1, view.loc, view.target)
    assert u.mul(u_inv).psi(view.loc, view.target) == view.psi(e1)
    half = Fraction(e1, 1)
    assert half.add(half, 2).equals(Fraction(e1, 0), view.loc, view.target)


def test_localized_action_is_equivariant(family, view, rng):
    context = WordContext(family, "homotope", 2, 4)
    checked = 0
    for _ in range(60):
        actor = random_actor(family, view, rng)
        w = random_word(context, rng, 2)
        try:
            image = tower_ad(actor, w)
        except LevelBudgetExceeded:
            continue
        checked += 1
        assert view.equivariant(actor, w, image), (actor, w)
    assert checked > 30


def test_opposite_letter_goes_through_the_quotient(family, view, rng):
    context = WordContext(family, "homotope", 2, 4)
    actor = LocalTransvection(1, 2, Fraction(family.algebra.matrix_unit(0, 1, 5), 1))
    w = SteinbergWord.letter(context, 2, 1, family.algebra.matrix_unit(1, 0, 7))
    image = tower_ad(actor, w)
    assert image.context.level == 1
    assert view.equivariant(actor, w, image)


def test_opposite_letter_needs_four_indices(make_context):
    context = make_context(Zmod(12), 3, "homotope", scale=2, level=4)
    family = context.family
    actor = LocalTransvection(1, 2, Fraction(family.algebra.matrix_unit(0, 1), 0))
    w = SteinbergWord.letter(context, 2, 1, family.algebra.matrix_unit(1, 0))
    with pytest.raises(RankTooSmall):
        tower_ad(actor, w)


def test_cleared_identity(family, rng):
    context = WordContext(family, "homotope", 2, 3)
    actor = LocalTransvection(1, 2, Fraction(family.random_component(1, 2, rng), 1))
    for i, j in ((2, 3), (4, 1), (1, 2), (3, 4)):
        w = SteinbergWord.letter(context, i, j, family.random_component(i, j, rng))
        assert cleared_identity(actor, w, tower_ad(actor, w)), (i, j)


def test_level_budget(family):
    context = WordContext(family, "homotope", 2, 0)
    actor = LocalDiagonal.of(family, 1, Fraction(family.e(1), 1), *_loc(family))
    w = SteinbergWord.letter(context, 1, 2, family.algebra.matrix_unit(0, 1))
    with pytest.raises(LevelBudgetExceeded):
        tower_ad(actor, w)


def _loc(family):
    view = LocalizedView(family.algebra, 2)
    return view.loc, view.target


def test_tally():
    tally = Tally(keep=1)
    assert tally.status() == "inconclusive"
    tally.record(True)
    tally.record(False, lambda: {"n": 1})
    tally.record(False, lambda: {"n": 2})
    assert tally.to_json() == {"checked": 3, "failed": 2, "status": "fail", "counterexamples": [{"n": 1}]}


def test_tower_suite_over_z12():
    family = IdempotentFamily.matrix_units(MatrixAlgebra(Zmod(12), 3))
    report = tower_relation_suite(family, 2, 4, 4, np.random.default_rng(7))
    assert report["localization"]["target"] == {"kind": "Zmod", "m": 3}
    assert report["localization"]["exponent"] == 2
    assert sorted(report["levels"]) == ["0", "1", "2", "3", "4"]
    for level, checks in report["levels"].items():
        for name, tally in checks.items():
            assert tally["failed"] == 0, (level, name, tally)
    assert report["lr_equivalence"]["status"] == "pass"
    assert report["status"] == "pass"


def test_tower_suite_zero_localization_warns():
    family = IdempotentFamily.matrix_units(MatrixAlgebra(Zmod(8), 3))
    report = tower_relation_suite(family, 2, 2, 2, np.random.default_rng(7))
    assert report["warnings"]
    assert report["status"] == "warn"


def test_tower_suite_without_budget_is_inconclusive():
    family = IdempotentFamily.matrix_units(MatrixAlgebra(Zmod(12), 3))
    report = tower_relation_suite(family, 2, 0, 4, np.random.default_rng(7))
    assert report["status"] == "inconclusive"
    assert all(c["status"] == "inconclusive" for c in report["levels"]["0"].values())


def test_tower_suite_catches_mutation():
    family = IdempotentFamily.matrix_units(MatrixAlgebra(Zmod(12), 3))
    report = tower_relation_suite(family, 2, 2, 20, np.random.default_rng(7), mutation="drop-product")
    assert report["status"] == "fail"
    assert any(report["levels"][level]["St3"]["failed"] for level in report["levels"])


@pytest.mark.slow
def test_tower_suite_over_m4z12():
    family = IdempotentFamily.matrix_units(MatrixAlgebra(Zmod(12), 4))
    report = tower_relation_suite(family, 2, 4, 500, np.random.default_rng(8))
    for level, checks in report["levels"].items():
        for name, tally in checks.items():
            assert tally["failed"] == 0, (level, name, tally)
    assert report["status"] == "pass"
