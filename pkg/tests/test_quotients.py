import pytest

from errors import ConfigError, RankTooSmall, SideConditionViolated
from quotients import express_as_commutators, f_alpha, g_alpha, merge_partition, merged_context
from rings import Zmod
from roots import Root
from steinberg import SteinbergWord, random_word, reduce, st_eval


@pytest.fixture
def alpha():
    return Root(1, 2)


def test_merged_context_is_a_quotient_system(m4f2, alpha):
    merged = merged_context(m4f2, alpha)
    assert merged.n == 3
    assert merged.relation_system == "quotient"
    assert merged.family.members == ((3,), (4,), (1, 2))
    assert merge_partition(4, alpha) == [[1, 2], [3], [4]]


def test_f_alpha_splits_merged_payloads(m4f2, alpha):
    merged = merged_context(m4f2, alpha)
    algebra = m4f2.algebra
    # x_{{3},{1,2}}: rows of block 3, columns 1 and 2
    payload = algebra.matrix_unit(2, 0) + algebra.matrix_unit(2, 1)
    w = SteinbergWord.letter(merged, 1, 3, payload)
    refined = f_alpha(w)
    assert refined.context == m4f2
    assert [g.key for g in refined] == [(3, 1), (3, 2)]
    assert st_eval(refined) == st_eval(w)


def test_f_alpha_inverts_letters_in_reverse(m4f2, alpha):
    merged = merged_context(m4f2, alpha)
    algebra = m4f2.algebra
    payload = algebra.matrix_unit(2, 0) + algebra.matrix_unit(2, 1)
    w = SteinbergWord.letter(merged, 1, 3, payload, -1)
    assert [(g.key, g.e) for g in f_alpha(w)] == [((3, 2), -1), ((3, 1), -1)]


def test_f_alpha_needs_merged_family(m4f2):
    with pytest.raises(ConfigError):
        f_alpha(SteinbergWord.identity(m4f2))


def test_g_after_f_is_identity(m4f2, alpha, rng):
    merged = merged_context(m4f2, alpha)
    for _ in range(50):
        w = random_word(merged, rng, 4)
        back = g_alpha(f_alpha(w), alpha, merged=merged.family)
        assert reduce(back) == reduce(w), w


def test_f_after_g_keeps_st(m4f2, alpha, rng):
    for _ in range(50):
        phi = random_word(m4f2, rng, 4)
        assert st_eval(f_alpha(g_alpha(phi, alpha))) == st_eval(phi), phi


def test_g_alpha_rank_limits(m3z4, alpha, rng):
    phi = random_word(m3z4, rng, 3)
    with pytest.raises(RankTooSmall):
        g_alpha(phi, alpha)
    assert st_eval(f_alpha(g_alpha(phi, alpha, epi_only=True))) == st_eval(phi)


def test_g_alpha_on_homotope_words(make_context, alpha, rng):
    context = make_context(Zmod(12), 4, "homotope", scale=2, level=3)
    for _ in range(20):
        phi = random_word(context, rng, 3)
        lowered = g_alpha(phi, alpha)
        assert lowered.context.level == 1
        back = f_alpha(lowered)
        assert st_eval(back) == st_eval(phi).scale(4)


def test_express_as_commutators(m3z4, rng):
    family = m3z4.family
    one = m3z4.algebra.one()
    for i, k in ((1, 3), (3, 1), (2, 1)):
        c = family.random_component(i, k, rng)
        word = express_as_commutators(m3z4, i, k, c)
        assert st_eval(word) == one + c
        assert len(word) % 4 == 0


def test_express_as_commutators_errors(m3z4, make_context, rng):
    c = m3z4.family.random_component(1, 3, rng)
    with pytest.raises(SideConditionViolated):
        express_as_commutators(m3z4, 1, 3, c, j=3)
    small = make_context(Zmod(4), 2)
    with pytest.raises(RankTooSmall):
        express_as_commutators(small, 1, 2, small.family.random_component(1, 2, rng))
