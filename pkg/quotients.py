"""Passing between a root system and its quotient by a root.

f_alpha refines letters over the merged family into letters over the finer
one; g_alpha goes back, rewriting the letters of +-alpha as commutators
through an auxiliary index.
"""
import logging
from typing import List, Optional

from errors import ConfigError, RankTooSmall, SideConditionViolated
from idempotents import IdempotentFamily, morita_decompose
from roots import Root
from steinberg import Generator, SteinbergWord, WordContext, commutator


def merge_partition(n: int, alpha: Root) -> List[List[int]]:
    return [[alpha.i, alpha.j]] + [[k] for k in range(1, n + 1) if k not in (alpha.i, alpha.j)]


def merged_context(context: WordContext, alpha: Root) -> WordContext:
    """Same relation system over the family with the two indices of alpha merged"""
    return context.with_family(context.family.merge(merge_partition(context.n, alpha)))


def f_alpha(w: SteinbergWord) -> SteinbergWord:
    """x_PQ(a) -> product over p in P, q in Q of x_pq(e_p a e_q), zero pieces omitted"""
    family = w.context.family
    parent = family.parent
    if parent is None:
        raise ConfigError("f_alpha needs a word over a merged family")
    letters = []
    for g in w.letters:
        pieces = []
        for p in family.members[g.i - 1]:
            for q in family.members[g.j - 1]:
                a = parent.peirce_project(g.a, p, q)
                if not a.is_zero():
                    pieces.append(Generator(p, q, a, 1))
        if g.e == 1:
            letters.extend(pieces)
        else:
            letters.extend(piece.inverse() for piece in reversed(pieces))
    return SteinbergWord(w.context.with_family(parent), letters)


def auxiliary_index(n: int, excluded) -> int:
    """Smallest index outside `excluded`"""
    for j in range(1, n + 1):
        if j not in excluded:
            return j
    raise RankTooSmall(f"no auxiliary index outside {sorted(excluded)} in 1..{n}")


def g_alpha(
    w: SteinbergWord,
    alpha: Root,
    epi_only: bool = False,
    merged: Optional[IdempotentFamily] = None,
) -> SteinbergWord:
    """Rewrite a word over the root system as a word over its quotient by alpha.

    Homotope words at level L land at level h = L // 2: ordinary letters are
    carried along the structure map and x_pq(c) for pq = +-alpha becomes
    prod [x_{inf,J}(a_p), x_{J,inf}(b_p)] with sum a_p b_p = s^(L - 2h) c.
    """
    context = w.context
    family = context.family
    n = family.n
    if n < 3 or (n < 4 and not epi_only):
        raise RankTooSmall(f"g_alpha needs n >= 4 (n >= 3 in epimorphism-only mode), got n = {n}")
    family.check_index(alpha.i, alpha.j)
    if merged is None:
        merged = family.merge(merge_partition(n, alpha))
    base = context.algebra.base
    if context.system == "homotope":
        level = context.level
        target_level = level // 2
        carry = base.power(context.scale, level - target_level)
        cleared = base.power(context.scale, level - 2 * target_level)
    else:
        target_level = 0
        carry = cleared = base.from_int(1)
    out_context = context.with_family(merged).at_level(target_level)
    out = SteinbergWord.identity(out_context)
    for g in w.letters:
        if {g.i, g.j} != {alpha.i, alpha.j}:
            image = SteinbergWord(
                out_context, (Generator(merged.class_of(g.i), merged.class_of(g.j), g.a.scale(carry), 1),)
            )
        else:
            aux = auxiliary_index(n, (g.i, g.j))
            inf, j = merged.class_of(g.i), merged.class_of(aux)
            image = SteinbergWord.identity(out_context)
            for a, b in morita_decompose(family, g.a.scale(cleared), g.i, g.j, aux):
                if a.is_zero() or b.is_zero():
                    continue
                image = image * commutator(
                    SteinbergWord(out_context, (Generator(inf, j, a, 1),)),
                    SteinbergWord(out_context, (Generator(j, inf, b, 1),)),
                )
        out = out * (image if g.e == 1 else image.inverse())
    return out


def express_as_commutators(context: WordContext, i: int, k: int, c, j: Optional[int] = None) -> SteinbergWord:
    """x_ik(c) as a product of commutators [x_ij(a_p), x_jk(b_p)]"""
    family = context.family
    if family.n < 3:
        raise RankTooSmall(f"commutator expressions need n >= 3, got n = {family.n}")
    if j is None:
        j = auxiliary_index(family.n, (i, k))
    family.check_index(i, j, k)
    if len({i, j, k}) < 3:
        raise SideConditionViolated(f"auxiliary index {j} clashes with ({i}, {k})")
    word = SteinbergWord.identity(context)
    for a, b in morita_decompose(family, c, i, k, j):
        if a.is_zero() or b.is_zero():
            continue
        word = word * commutator(SteinbergWord.letter(context, i, j, a), SteinbergWord.letter(context, j, k, b))
    logging.debug(f"x_{i}{k} written as {len(word) // 4} commutators through index {j}")
    return word
