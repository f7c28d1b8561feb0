import numpy as np
import pytest

from crossed_module import CrossedModuleAction, crossed_module_verify
from errors import ConfigError, PayloadNotInComponent, RankTooSmall, UnsupportedContext
from gauss import lift_to_st
from idempotents import IdempotentFamily
from rings import GF, MatrixAlgebra, Zmod
from steinberg import SteinbergWord, WordContext, free_reduce, kernel_word, random_word, st_eval

AXIOMS = ("CM1", "CM2", "CM3", "CM4", "CM5", "Y")


def test_axioms_hold(m3z4, rng):
    report = crossed_module_verify(m3z4, 6, rng)
    for name in AXIOMS:
        assert report[name]["failed"] == 0, (name, report[name]["counterexamples"])
        assert report[name]["checked"] > 0, name
    assert report["errors"] == []
    assert report["status"] == "pass"
    assert "st" in report["CM2"]["oracles"]


def test_dropping_the_diagonal_is_noticed(m3z4, rng):
    report = crossed_module_verify(m3z4, 10, rng, fault="drop-diagonal")
    assert report["status"] == "fail"


def test_action_lifts_conjugation(m3z4, rng):
    action = CrossedModuleAction(m3z4)
    algebra = m3z4.algebra
    for _ in range(10):
        g = algebra.random_invertible(rng)
        w = random_word(m3z4, rng, 3)
        assert st_eval(action.ad(g, w)) == g * st_eval(w) * algebra.inverse(g)


def test_y_lift_survives_kernel_perturbation(m3z4, rng):
    action = CrossedModuleAction(m3z4)
    g = m3z4.algebra.random_invertible(rng)
    coset = action.y_lift(g, 1, 2, m3z4.family.random_component(1, 2, rng))
    assert coset.is_lift()
    assert coset.perturbed(kernel_word(m3z4, 3, 3)).is_lift()


def test_y_commutator_lifts_the_product(m3z4, rng):
    action = CrossedModuleAction(m3z4, "commutator")
    algebra = m3z4.algebra
    family = m3z4.family
    for _ in range(10):
        g = algebra.random_invertible(rng)
        a, b = family.random_component(1, 2, rng), family.random_component(2, 3, rng)
        y = action.y_commutator(1, 2, 3, a, b, g)
        assert st_eval(y) == g * (algebra.one() + a * b) * algebra.inverse(g)
    with pytest.raises(ConfigError):
        action.y_commutator(1, 2, 1, a, family.random_component(2, 1, rng), g)


def test_commutator_path_matches_direct(m3z4, rng):
    direct = CrossedModuleAction(m3z4, "direct")
    paths = CrossedModuleAction(m3z4, "commutator")
    family = m3z4.family
    for i, j in ((1, 2), (3, 1), (2, 3)):
        g = m3z4.algebra.random_invertible(rng)
        w = SteinbergWord.letter(m3z4, i, j, family.random_component(i, j, rng))
        assert st_eval(paths.ad(g, w)) == st_eval(direct.ad(g, w)), (i, j)
        assert st_eval(paths.ad(g, w.inverse())) == st_eval(direct.ad(g, w.inverse())), (i, j)


def test_commutator_path_needs_three_indices(make_context, rng):
    context = make_context(Zmod(2), 2)
    action = CrossedModuleAction(context, "commutator")
    w = SteinbergWord.letter(context, 1, 2, context.algebra.matrix_unit(0, 1))
    with pytest.raises(RankTooSmall):
        action.ad(context.algebra.one(), w)


def test_bad_arguments(m3z4, make_context):
    with pytest.raises(ConfigError):
        CrossedModuleAction(m3z4, "sideways")
    with pytest.raises(ConfigError):
        CrossedModuleAction(m3z4, fault="drop-everything")
    with pytest.raises(UnsupportedContext):
        CrossedModuleAction(make_context(Zmod(4), 3, "homotope", scale=2, level=1))


def test_commutator_path_is_built_independently_of_direct(m3z4, rng):
    direct = CrossedModuleAction(m3z4, "direct")
    paths = CrossedModuleAction(m3z4, "commutator")
    letter = SteinbergWord.letter(m3z4, 1, 3, m3z4.algebra.matrix_unit(0, 2, 1))
    differs = []
    for _ in range(10):
        g = m3z4.algebra.random_invertible(rng)
        via = paths.ad_commutator_path(g, letter, j=2)
        other = direct.ad_direct(g, letter)
        assert st_eval(via) == st_eval(other)
        differs.append(tuple(free_reduce(via).letters) != tuple(free_reduce(other).letters))
    assert any(differs)


def test_y_lift_comes_from_gauss_of_the_target(m3z4, rng):
    action = CrossedModuleAction(m3z4, "commutator")
    algebra = m3z4.algebra
    g = algebra.random_invertible(rng)
    a = m3z4.family.random_component(2, 3, rng)
    coset = action.y_lift(g, 2, 3, a)
    w, d = lift_to_st(m3z4, coset.target)
    assert coset.target == g * (algebra.one() + a) * algebra.inverse(g)
    assert coset.base.letters[: len(w)] == w.letters
    assert coset.is_lift()
    with pytest.raises(PayloadNotInComponent):
        action.y_lift(g, 1, 2, algebra.matrix_unit(1, 0, 1))


def test_blocked_family_skips_the_commutator_checks(rng):
    algebra = MatrixAlgebra(Zmod(2), 6, block_size=2)
    context = WordContext(IdempotentFamily.default(algebra))
    report = crossed_module_verify(context, 3, rng)
    assert report["skipped"]["checks"] == ["CM4", "Y"]
    assert report["CM4"]["checked"] == 0
    assert report["CM1"]["checked"] == 3
    assert report["status"] == "pass"
    with pytest.raises(UnsupportedContext):
        CrossedModuleAction(context, "commutator").y_lift(
            algebra.one(), 1, 2, context.family.random_component(1, 2, rng)
        )


def test_commutator_path_through_each_auxiliary_index(m4f2, rng):
    direct = CrossedModuleAction(m4f2, "direct")
    paths = CrossedModuleAction(m4f2, "commutator")
    letter = SteinbergWord.letter(m4f2, 1, 4, m4f2.algebra.matrix_unit(0, 3, 1))
    for _ in range(4):
        g = m4f2.algebra.random_invertible(rng)
        expected = st_eval(direct.ad(g, letter))
        for aux in (2, 3):
            assert st_eval(paths.ad_commutator_path(g, letter, j=aux)) == expected, aux


@pytest.mark.slow
def test_crossed_module_over_m4f3(make_context):
    context = make_context(GF(3, [1, 0]), 4)
    report = crossed_module_verify(context, 200, np.random.default_rng(4))
    for name in AXIOMS:
        assert report[name]["failed"] == 0, (name, report[name]["counterexamples"])
    assert report["CM4"]["checked"] == 2 * 200
    assert report["errors"] == []
    assert report["status"] == "pass"
