import numpy as np
import pytest

from errors import NotInvertible, UnsupportedContext
from gauss import gauss_decompose, lift_to_st, presentation_relation_check
from idempotents import IdempotentFamily
from rings import GF, MatrixAlgebra, Zmod
from steinberg import WordContext, st_eval


@pytest.mark.parametrize("base, size, order", [
    (Zmod(2), 2, 6),
    (Zmod(2), 3, 168),
    (Zmod(4), 2, 96),
])
def test_every_invertible_element_decomposes(make_context, base, size, order):
    context = make_context(base, size)
    group = context.algebra.general_linear()
    assert len(group) == order
    for g in group:
        factorization = gauss_decompose(context, g)
        assert factorization.verify(g), g
        assert all(letter.i < letter.j for letter in factorization.w_plus)
        assert all(letter.i > letter.j for letter in factorization.w_minus)
        assert all(letter.i < letter.j for letter in factorization.w_plus2)


def test_pivot_needed_for_antidiagonal(make_context):
    context = make_context(Zmod(2), 2)
    g = context.algebra.from_rows([[0, 1], [1, 0]])
    factorization = gauss_decompose(context, g)
    assert factorization.product() == g
    assert len(factorization.w_plus2) == 1


def test_composite_modulus_uses_crt(make_context, rng):
    context = make_context(Zmod(12), 3)
    for _ in range(30):
        g = context.algebra.random_invertible(rng)
        assert gauss_decompose(context, g).verify(g)


def test_extension_field_and_blocks(rng, blocked_m2m2f3):
    f4 = WordContext(IdempotentFamily.matrix_units(MatrixAlgebra(GF(2, [1, 1, 1]), 3)))
    for _ in range(20):
        g = f4.algebra.random_invertible(rng)
        assert gauss_decompose(f4, g).verify(g)
    for _ in range(20):
        g = blocked_m2m2f3.algebra.random_invertible(rng)
        assert gauss_decompose(blocked_m2m2f3, g).verify(g)


def test_lift_is_a_preimage(m3z4, rng):
    algebra = m3z4.algebra
    for _ in range(20):
        g = algebra.random_invertible(rng)
        w, d = lift_to_st(m3z4, g)
        assert st_eval(w) * d.embed() == g


def test_singular_element_is_refused(m3z4):
    with pytest.raises(NotInvertible):
        gauss_decompose(m3z4, m3z4.algebra.from_rows([[2, 0, 0], [0, 1, 0], [0, 0, 1]]))


def test_homotope_context_is_refused(make_context):
    context = make_context(Zmod(2), 2, "homotope")
    with pytest.raises(UnsupportedContext):
        gauss_decompose(context, context.algebra.one())


def test_factorization_json(make_context):
    context = make_context(Zmod(2), 2)
    doc = gauss_decompose(context, context.algebra.from_rows([[1, 1], [0, 1]])).to_json()
    assert set(doc) == {"w_plus", "w_minus", "w_plus2", "d"}
    assert doc["d"] == [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]


def test_presentation_check_exhaustive(make_context):
    report = presentation_relation_check(make_context(Zmod(2), 3))
    assert report["checked"] == 2 ** 6
    assert report["diagonal"] > 0
    assert report["needs_more"] == 0
    assert report["status"] == "pass"


def test_presentation_check_sampled(m3z4, rng):
    report = presentation_relation_check(m3z4, 2, rng, samples=40)
    assert report["checked"] == 40
    assert report["status"] == "pass", report["counterexamples"]


@pytest.mark.slow
def test_presentation_check_over_m2z4():
    context = WordContext(IdempotentFamily.matrix_units(MatrixAlgebra(Zmod(4), 2)))
    report = presentation_relation_check(context, 1, np.random.default_rng(5), samples=10 ** 4)
    assert report["checked"] == 10 ** 4
    assert report["status"] == "pass", report["counterexamples"]


@pytest.mark.slow
def test_random_elements_of_m4f3_decompose(make_context):
    context = make_context(GF(3, [1, 0]), 4)
    rng = np.random.default_rng(6)
    for _ in range(1000):
        g = context.algebra.random_invertible(rng)
        w, d = lift_to_st(context, g)
        assert st_eval(w) * d.embed() == g
