import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy.ntheory.modular import crt

from errors import NotInvertible, PivotSearchFailed, UnsupportedContext
from idempotents import IdempotentFamily
from rings import Element, MatrixAlgebra, Zmod
from steinberg import DiagonalElement, Generator, SteinbergWord, WordContext, normal_form_of, st_eval

PIVOT_EXHAUSTIVE_LIMIT = 2 ** 16


@dataclass(frozen=True)
class GaussFactorization:
    """g = st(w_plus) st(w_minus) st(w_plus2) d"""

    w_plus: SteinbergWord
    w_minus: SteinbergWord
    w_plus2: SteinbergWord
    d: DiagonalElement

    def product(self) -> Element:
        return st_eval(self.w_plus) * st_eval(self.w_minus) * st_eval(self.w_plus2) * self.d.embed()

    def verify(self, g: Element) -> bool:
        return self.product() == g

    def lift(self) -> Tuple[SteinbergWord, DiagonalElement]:
        return self.w_plus * self.w_minus * self.w_plus2, self.d

    def to_json(self) -> Dict[str, Any]:
        return {
            "w_plus": [g.to_json() for g in self.w_plus],
            "w_minus": [g.to_json() for g in self.w_minus],
            "w_plus2": [g.to_json() for g in self.w_plus2],
            "d": self.d.to_json(),
        }


def _projector(family: IdempotentFamily, indices: Sequence[int]) -> Element:
    total = family.algebra.zero()
    for i in indices:
        total = total + family.e(i)
    return total


def _patterns(rows: Sequence[int], cols: Sequence[int]) -> Iterator[Tuple[Tuple[int, int], ...]]:
    """Partial injections rows -> cols, smallest first"""
    for size in range(min(len(rows), len(cols)) + 1):
        for rs in itertools.combinations(rows, size):
            for cs in itertools.permutations(cols, size):
                yield tuple(zip(rs, cs))


def _pivot(family: IdempotentFamily, h: Element, first: int, rest: Sequence[int], e1: Element, e2: Element) -> Element:
    """Find a in e1 R e2 with e2 h (1 + a) e2 a unit of the corner e2 R e2.

    Over each residue field a 0/1 partial injection always works, since the
    e2-rows of h have full rank there. Residue choices are glued by CRT.
    """
    algebra = family.algebra
    base = algebra.base
    one = algebra.one()
    h22 = e2 * h * e2
    h21 = e2 * h * e1

    def corner_det(a: Element) -> int:
        return algebra.det(h22 + h21 * a + one - e2)

    zero = algebra.zero()
    if base.is_unit(corner_det(zero)):
        return zero

    rows = list(family.blocks[first - 1])
    cols = sorted(p for i in rest for p in family.blocks[i - 1])
    chosen = []
    residues = base.residue_fields()
    for residue in residues:
        for pattern in _patterns(rows, cols):
            arr = np.zeros((algebra.size, algebra.size), dtype=np.int64)
            for r, c in pattern:
                arr[r, c] = 1
            if residue.is_unit(base.reduce_mod(corner_det(Element(algebra, arr)), residue)):
                chosen.append(set(pattern))
                break
        else:
            logging.warning(f"No residue pivot modulo {residue!r}; falling back to exhaustive search")
            return _exhaustive_pivot(algebra, rows, cols, corner_det)

    arr = np.zeros((algebra.size, algebra.size), dtype=np.int64)
    for r in rows:
        for c in cols:
            bits = [1 if (r, c) in pattern else 0 for pattern in chosen]
            if isinstance(base, Zmod) and len(residues) > 1:
                arr[r, c] = int(crt([field.m for field in residues], bits)[0])
            else:
                arr[r, c] = bits[0]
    a = Element(algebra, arr)
    if base.is_unit(corner_det(a)):
        logging.debug(f"Residue pivot for block {first}: {sorted(chosen[0])}")
        return a
    return _exhaustive_pivot(algebra, rows, cols, corner_det)


def _exhaustive_pivot(algebra: MatrixAlgebra, rows, cols, corner_det) -> Element:
    base = algebra.base
    cells = [(r, c) for r in rows for c in cols]
    if base.order ** len(cells) > PIVOT_EXHAUSTIVE_LIMIT:
        raise PivotSearchFailed(f"no pivot found and {base.order}^{len(cells)} candidates is too many to search")
    for values in itertools.product(base.elements(), repeat=len(cells)):
        arr = np.zeros((algebra.size, algebra.size), dtype=np.int64)
        for (r, c), v in zip(cells, values):
            arr[r, c] = v
        a = Element(algebra, arr)
        if base.is_unit(corner_det(a)):
            return a
    raise PivotSearchFailed("exhaustive pivot search found nothing")


def _decompose(family: IdempotentFamily, h: Element, idx: List[int]) -> Tuple[Element, Element, Element, Element]:
    """(P1, L, P2, D) with h = P1 L P2 D; h is the identity outside the corner of idx"""
    algebra = family.algebra
    one = algebra.one()
    if len(idx) == 1:
        return one, one, one, h
    e1 = family.e(idx[0])
    e2 = _projector(family, idx[1:])
    a = _pivot(family, h, idx[0], idx[1:], e1, e2)
    g = h * (one + a)
    A, B, C, D = e1 * g * e1, e1 * g * e2, e2 * g * e1, e2 * g * e2
    D_inv = algebra.corner_inverse(D, e2)
    A1 = A - B * D_inv * C
    A1_inv = algebra.corner_inverse(A1, e1)
    c = B * D_inv
    b1 = C * A1_inv
    a1 = -(A1 * a * D_inv)
    # h = t(c) t(b1) t(a1) diag(A1, D), and diag(A1, D) splits as (A1 + 1 - e1)(D + 1 - e2)
    P1, L, P2, diag = _decompose(family, one - e2 + D, idx[1:])
    P1_inv = algebra.inverse(P1)
    return (
        (one + c) * P1,
        (one + P1_inv * b1) * L,
        (one + a1 * P1 * L) * P2,
        (A1 + one - e1) * diag,
    )


def gauss_decompose(context: WordContext, g: Element) -> GaussFactorization:
    """Factor g in GL(R) as st(U+) st(U-) st(U+) Diag(R).

    Splits e_1 | e_2 + ... + e_n, makes the lower corner invertible with a
    pivot from e_1 R (e_2 + ... + e_n), clears the off-diagonal blocks and
    recurses on the lower corner.
    """
    family = context.family
    algebra = family.algebra
    if context.system != "plain":
        raise UnsupportedContext("Gauss decomposition runs in plain and quotient contexts")
    if family.blocks is None:
        raise UnsupportedContext("Gauss decomposition needs a block-diagonal idempotent family")
    if not algebra.is_invertible(g):
        raise NotInvertible(f"{g!r} is not invertible")
    P1, L, P2, diag = _decompose(family, g, list(family.indices()))
    factorization = GaussFactorization(
        normal_form_of(family, P1, "upper").to_word(context),
        normal_form_of(family, L, "lower").to_word(context),
        normal_form_of(family, P2, "upper").to_word(context),
        DiagonalElement.from_gl(family, diag),
    )
    if not factorization.verify(g):
        raise PivotSearchFailed(f"factorization of {g!r} does not reconstruct it")
    return factorization


def lift_to_st(context: WordContext, g: Element) -> Tuple[SteinbergWord, DiagonalElement]:
    """(w, d) with st(w) d = g"""
    return gauss_decompose(context, g).lift()


def _is_diagonal(family: IdempotentFamily, g: Element) -> bool:
    return all(
        family.peirce_project(g, p, q).is_zero() for p in family.indices() for q in family.indices() if p != q
    )


def presentation_relation_check(
    context: WordContext,
    i: int = 1,
    rng: Optional[np.random.Generator] = None,
    samples: int = 1000,
) -> Dict[str, Any]:
    """Re-decompose st-images of x_{i,i+1}(a_1) x_{i+1,i}(b_1) ... x_{i+1,i}(b_3).

    Each image must factor as t_{i,i+1}(*) t_{i+1,i}(*) t_{i,i+1}(*) d_i(*) d_{i+1}(*);
    diagonal images must come back with empty words.
    """
    family = context.family
    j = i + 1
    family.check_index(i, j)
    if rng is None:
        up = list(family.component_elements(i, j))
        down = list(family.component_elements(j, i))
        instances = (
            (a1, b1, a2, b2, a3, b3)
            for a1, a2, a3 in itertools.product(up, repeat=3)
            for b1, b2, b3 in itertools.product(down, repeat=3)
        )
    else:
        instances = (
            tuple(
                family.random_component(i, j, rng) if k % 2 == 0 else family.random_component(j, i, rng)
                for k in range(6)
            )
            for _ in range(samples)
        )

    checked = diagonal = redecomposed = 0
    counterexamples = []
    for payloads in instances:
        word = SteinbergWord(
            context, (Generator(i, j, p) if k % 2 == 0 else Generator(j, i, p) for k, p in enumerate(payloads))
        )
        g = st_eval(word)
        factorization = gauss_decompose(context, g)
        checked += 1
        keys = {(i, j), (j, i)}
        shape_ok = (
            all(len(w) <= 1 for w in (factorization.w_plus, factorization.w_minus, factorization.w_plus2))
            and all(letter.key in keys for w in (factorization.w_plus, factorization.w_minus, factorization.w_plus2)
                    for letter in w)
            and all(factorization.d.components[k - 1] == family.e(k) for k in family.indices() if k not in (i, j))
        )
        if _is_diagonal(family, g):
            diagonal += 1
            shape_ok = shape_ok and not factorization.lift()[0].letters and factorization.d.embed() == g
        if shape_ok:
            redecomposed += 1
        elif len(counterexamples) < 5:
            counterexamples.append({"payloads": [p.to_json() for p in payloads], "factorization": factorization.to_json()})
    logging.info(f"N = 3 check on corner ({i},{j}): {redecomposed}/{checked} re-decomposed, {diagonal} diagonal")
    return {
        "checked": checked,
        "diagonal": diagonal,
        "redecomposed": redecomposed,
        "needs_more": checked - redecomposed,
        "counterexamples": counterexamples,
        "status": "pass" if redecomposed == checked else "fail",
    }
