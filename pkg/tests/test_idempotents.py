import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import ConfigError, IdentityViolated, IndexOutOfRange
from idempotents import (
    IdempotentFamily,
    check_idempotent_family,
    factor_through_product,
    morita_decompose,
)
from rings import MatrixAlgebra, Zmod


@pytest.fixture
def family():
    return IdempotentFamily.matrix_units(MatrixAlgebra(Zmod(3), 3))


def test_matrix_unit_family_is_valid(family):
    check = check_idempotent_family(family)
    assert check["ok"], check["violations"]


def test_blocked_family_is_valid(blocked_m2m2f3):
    family = blocked_m2m2f3.family
    assert family.n == 2
    assert family.component_size(1, 2) == 3 ** 4
    assert check_idempotent_family(family)["ok"]


def test_incomplete_family_is_reported():
    algebra = MatrixAlgebra(Zmod(2), 3)
    family = IdempotentFamily(algebra, [algebra.diagonal_projector([0]), algebra.diagonal_projector([1])],
                              blocks=[[0], [1]])
    check = check_idempotent_family(family)
    assert not check["ok"]
    assert any(v["check"] == "completeness" for v in check["violations"])


def test_family_descriptor_errors():
    algebra = MatrixAlgebra(Zmod(2), 3)
    with pytest.raises(ConfigError):
        IdempotentFamily.from_descriptor(algebra, {"blocks": [[1, 2]]})
    with pytest.raises(ConfigError):
        IdempotentFamily.from_descriptor(algebra, "diagonal")
    family = IdempotentFamily.from_descriptor(algebra, {"blocks": [[1, 3], [2]]})
    assert family.descriptor() == {"blocks": [[1, 3], [2]]}


def test_index_out_of_range(family):
    with pytest.raises(IndexOutOfRange):
        family.e(4)
    with pytest.raises(IndexOutOfRange):
        family.e(0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=9, max_size=9))
def test_peirce_decomposition_recovers_element(entries):
    family = IdempotentFamily.matrix_units(MatrixAlgebra(Zmod(3), 3))
    a = family.algebra.element(entries)
    total = family.algebra.zero()
    for i in family.indices():
        for j in family.indices():
            total = total + family.peirce_project(a, i, j)
    assert total == a


def test_morita_decompose(blocked_m2m2f3, rng):
    family = blocked_m2m2f3.family
    for _ in range(20):
        c = family.random_component(1, 2, rng)
        pairs = morita_decompose(family, c, 1, 2, 2)
        total = family.algebra.zero()
        for a, b in pairs:
            assert family.in_component(a, 1, 2) and family.in_component(b, 2, 2)
            total = total + a * b
        assert total == c
    assert len(family.witnesses(1, 2)) == 2


def test_morita_decompose_through_third_index(family, rng):
    c = family.random_component(1, 3, rng)
    pairs = morita_decompose(family, c, 1, 3, 2)
    assert sum((a * b for a, b in pairs), family.algebra.zero()) == c


def test_merge_orders_singletons_first(make_context):
    family = make_context(Zmod(2), 4).family
    merged = family.merge([[1, 2], [3], [4]])
    assert merged.n == 3
    assert merged.members == ((3,), (4,), (1, 2))
    assert merged.class_of(1) == merged.class_of(2) == 3
    assert merged.class_of(4) == 2
    assert merged.e(3) == family.e(1) + family.e(2)
    assert check_idempotent_family(merged)["ok"]


def test_factor_multiplication_through_product(family):
    induced = factor_through_product(family, 1, 2, 3, lambda a, b: a * b, lambda u, v: u + v,
                                     family.algebra.zero())
    assert induced.checked > 0
    for c in family.component_elements(1, 3):
        assert induced.f(c) == c


def test_factor_rejects_non_additive_map(family):
    constant = family.algebra.matrix_unit(0, 2)
    with pytest.raises(IdentityViolated) as info:
        factor_through_product(family, 1, 2, 3, lambda a, b: constant, lambda u, v: u + v,
                               family.algebra.zero())
    assert info.value.identity == "left additivity"


@pytest.mark.parametrize("blocked", [False, True])
def test_peirce_components_multiply(family, blocked_m2m2f3, rng, blocked):
    if blocked:
        family = blocked_m2m2f3.family
    indices = list(family.indices())
    for _ in range(3):
        for i, j, k, l in itertools.product(indices, repeat=4):
            a, b = family.random_component(i, j, rng), family.random_component(k, l, rng)
            if j == k:
                assert family.in_component(a * b, i, l), (i, j, k, l)
            else:
                assert (a * b).is_zero(), (i, j, k, l)


def test_factor_rejects_map_that_ignores_the_middle(blocked_m2m2f3, rng):
    family = blocked_m2m2f3.family
    twist = family.algebra.matrix_unit(2, 3)
    assert family.in_component(twist, 2, 2)
    with pytest.raises(IdentityViolated) as info:
        factor_through_product(family, 1, 2, 1, lambda a, b: a * twist * b, lambda u, v: u + v,
                               family.algebra.zero(), rng=rng, samples=8)
    assert info.value.identity == "middle associativity"
