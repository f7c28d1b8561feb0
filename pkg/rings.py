import itertools
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Dict, Iterator, List, Tuple

import numpy as np
import sympy

from errors import ConfigError, NotInvertible, NotQuasiInvertible


class FiniteCommutativeRing(ABC):
    """Finite commutative base ring: Z/m or F_p[t]/(f)"""

    kind = None

    @property
    @abstractmethod
    def order(self) -> int:
        ...

    def elements(self) -> range:
        return range(self.order)

    @abstractmethod
    def from_int(self, n: int) -> int:
        ...

    @abstractmethod
    def add(self, a: int, b: int) -> int:
        ...

    @abstractmethod
    def neg(self, a: int) -> int:
        ...

    @abstractmethod
    def mul(self, a: int, b: int) -> int:
        ...

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def power(self, a: int, k: int) -> int:
        result = self.from_int(1)
        for _ in range(k):
            result = self.mul(result, a)
        return result

    @abstractmethod
    def is_unit(self, a: int) -> bool:
        ...

    @abstractmethod
    def inverse(self, a: int) -> int:
        ...

    @abstractmethod
    def residue_fields(self) -> List["FiniteCommutativeRing"]:
        ...

    @abstractmethod
    def reduce_mod(self, a: int, residue: "FiniteCommutativeRing") -> int:
        ...

    @abstractmethod
    def det(self, rows: List[List[int]]) -> int:
        """Determinant of a square matrix of element codes, by elimination"""

    # vectorized kernels over integer arrays of element codes

    @abstractmethod
    def add_array(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def neg_array(self, a: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def scale_array(self, c: int, a: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def descriptor(self) -> Dict[str, Any]:
        ...


class Zmod(FiniteCommutativeRing):
    kind = "Zmod"

    def __init__(self, m: int):
        if not isinstance(m, int) or m < 1:
            raise ConfigError(f"Zmod modulus must be a positive integer, got {m!r}")
        self.m = m

    @property
    def order(self) -> int:
        return self.m

    def from_int(self, n: int) -> int:
        return n % self.m

    def add(self, a, b):
        return (a + b) % self.m

    def neg(self, a):
        return (-a) % self.m

    def mul(self, a, b):
        return (a * b) % self.m

    def power(self, a, k):
        return pow(a, k, self.m)

    def is_unit(self, a):
        return math.gcd(a, self.m) == 1

    def inverse(self, a):
        if self.m == 1:
            return 0
        if not self.is_unit(a):
            raise NotInvertible(f"{a} is not a unit in Z/{self.m}")
        return pow(a, -1, self.m)

    def residue_fields(self):
        return [Zmod(p) for p in sorted(sympy.factorint(self.m))]

    def det(self, rows):
        # fraction-free Bareiss over Z, reduced at the end; every division is exact
        mat = [list(map(int, r)) for r in rows]
        k = len(mat)
        sign, prev = 1, 1
        for c in range(k - 1):
            if mat[c][c] == 0:
                pivot = next((r for r in range(c + 1, k) if mat[r][c] != 0), None)
                if pivot is None:
                    return 0
                mat[c], mat[pivot] = mat[pivot], mat[c]
                sign = -sign
            for r in range(c + 1, k):
                for j in range(c + 1, k):
                    mat[r][j] = (mat[r][j] * mat[c][c] - mat[r][c] * mat[c][j]) // prev
            prev = mat[c][c]
        return (sign * mat[k - 1][k - 1]) % self.m

    def reduce_mod(self, a, residue):
        return a % residue.m

    def add_array(self, a, b):
        return (a + b) % self.m

    def neg_array(self, a):
        return (-a) % self.m

    def scale_array(self, c, a):
        return (c * a) % self.m

    def matmul(self, a, b):
        return (a @ b) % self.m

    def descriptor(self):
        return {"kind": "Zmod", "m": self.m}

    def __eq__(self, other):
        return isinstance(other, Zmod) and other.m == self.m

    def __hash__(self):
        return hash(("Zmod", self.m))

    def __repr__(self):
        return f"Z/{self.m}"


class GF(FiniteCommutativeRing):
    """Finite field F_p[t]/(f); f is monic, coefficients highest degree first.

    Elements are integer codes sum(c_i * p**i) with c_i the coefficient of t**i.
    """

    kind = "GF"

    def __init__(self, p: int, f: List[int]):
        if not isinstance(p, int) or not sympy.isprime(p):
            raise ConfigError(f"GF characteristic must be prime, got {p!r}")
        f = [int(c) % p for c in f]
        if len(f) < 2 or f[0] != 1:
            raise ConfigError(f"GF modulus must be monic of degree >= 1, got {f}")
        t = sympy.Symbol("t")
        if not sympy.Poly(f, t, modulus=p).is_irreducible:
            raise ConfigError(f"polynomial {f} is not irreducible over F_{p}")
        self.p = p
        self.f = tuple(f)
        self.degree = len(f) - 1
        self.q = p ** self.degree
        self._build_tables()

    def _digits(self, code: int) -> List[int]:
        out = []
        for _ in range(self.degree):
            out.append(code % self.p)
            code //= self.p
        return out

    def _encode(self, digits) -> int:
        return sum(int(c) * self.p ** i for i, c in enumerate(digits))

    def _polymul(self, a: List[int], b: List[int]) -> List[int]:
        d, p = self.degree, self.p
        prod = [0] * (2 * d - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
        # t^d = -(f_1 t^{d-1} + ... + f_d)
        tail = list(reversed(self.f[1:]))
        for top in range(len(prod) - 1, d - 1, -1):
            c = prod[top]
            if c:
                prod[top] = 0
                for k, fk in enumerate(tail):
                    prod[top - d + k] = (prod[top - d + k] - c * fk) % p
        return prod[:d]

    def _build_tables(self):
        q = self.q
        digits = np.array([self._digits(c) for c in range(q)], dtype=np.int64).reshape(q, self.degree)
        weights = self.p ** np.arange(self.degree, dtype=np.int64)
        summed = (digits[:, None, :] + digits[None, :, :]) % self.p
        self.add_table = (summed * weights).sum(axis=2)
        self.neg_table = (((-digits) % self.p) * weights).sum(axis=1)
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(a, q):
                mul[a, b] = mul[b, a] = self._encode(self._polymul(list(digits[a]), list(digits[b])))
        self.mul_table = mul
        self.inv_table = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            self.inv_table[a] = int(np.flatnonzero(mul[a] == 1)[0])
        for table in (self.add_table, self.neg_table, self.mul_table, self.inv_table):
            table.setflags(write=False)

    @property
    def order(self):
        return self.q

    def from_int(self, n):
        return n % self.p

    def add(self, a, b):
        return int(self.add_table[a, b])

    def neg(self, a):
        return int(self.neg_table[a])

    def mul(self, a, b):
        return int(self.mul_table[a, b])

    def is_unit(self, a):
        return a != 0

    def inverse(self, a):
        if a == 0:
            raise NotInvertible(f"0 is not a unit in {self!r}")
        return int(self.inv_table[a])

    def residue_fields(self):
        return [self]

    def det(self, rows):
        m = [list(map(int, r)) for r in rows]
        k = len(m)
        result = 1
        for c in range(k):
            pivot = next((r for r in range(c, k) if m[r][c] != 0), None)
            if pivot is None:
                return 0
            if pivot != c:
                m[c], m[pivot] = m[pivot], m[c]
                result = self.neg(result)
            result = self.mul(result, m[c][c])
            inv = self.inverse(m[c][c])
            for r in range(c + 1, k):
                factor = self.mul(m[r][c], inv)
                if factor:
                    m[r] = [self.sub(x, self.mul(factor, y)) for x, y in zip(m[r], m[c])]
        return result

    def reduce_mod(self, a, residue):
        return a

    def add_array(self, a, b):
        return self.add_table[a, b]

    def neg_array(self, a):
        return self.neg_table[a]

    def scale_array(self, c, a):
        return self.mul_table[c, a]

    def matmul(self, a, b):
        prods = self.mul_table[a[:, :, None], b[None, :, :]]
        return reduce(lambda x, y: self.add_table[x, y], [prods[:, l, :] for l in range(a.shape[1])])

    def descriptor(self):
        return {"kind": "GF", "p": self.p, "f": list(self.f)}

    def __eq__(self, other):
        return isinstance(other, GF) and (other.p, other.f) == (self.p, self.f)

    def __hash__(self):
        return hash(("GF", self.p, self.f))

    def __repr__(self):
        return f"F_{self.q}" if self.degree == 1 else f"F_{self.p}[t]/{list(self.f)}"


class Element:
    """Immutable element of a MatrixAlgebra."""

    __slots__ = ("algebra", "data")

    def __init__(self, algebra: "MatrixAlgebra", data):
        arr = np.array(data, dtype=np.int64).reshape(algebra.size, algebra.size)
        arr.setflags(write=False)
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Element is immutable")

    def __add__(self, other: "Element") -> "Element":
        return Element(self.algebra, self.algebra.base.add_array(self.data, other.data))

    def __neg__(self) -> "Element":
        return Element(self.algebra, self.algebra.base.neg_array(self.data))

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Element):
            return Element(self.algebra, self.algebra.base.matmul(self.data, other.data))
        return NotImplemented

    def __rmul__(self, n):
        if isinstance(n, (int, np.integer)):
            return self.scale(self.algebra.base.from_int(int(n)))
        return NotImplemented

    def scale(self, c: int) -> "Element":
        """Multiply by the base-ring element with code c"""
        return Element(self.algebra, self.algebra.base.scale_array(c, self.data))

    def is_zero(self) -> bool:
        return not self.data.any()

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        return (
            isinstance(other, Element)
            and other.algebra == self.algebra
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash(self.data.tobytes())

    def to_json(self) -> List[List[int]]:
        return self.data.tolist()

    def __repr__(self):
        return f"Element({self.data.tolist()})"


class MatrixAlgebra:
    """k x k matrices over a finite commutative ring.

    Nested descriptors M(k, M(l, A)) are flattened to M(kl, A); block_size
    remembers l so the outer matrix units become a blocked idempotent family.
    """

    def __init__(self, base: FiniteCommutativeRing, size: int, block_size: int = 1):
        if size < 1 or block_size < 1 or size % block_size:
            raise ConfigError(f"invalid matrix size {size} with block size {block_size}")
        self.base = base
        self.size = size
        self.block_size = block_size

    def __eq__(self, other):
        return isinstance(other, MatrixAlgebra) and (other.base, other.size) == (self.base, self.size)

    def __hash__(self):
        return hash((self.base, self.size))

    def __repr__(self):
        return f"M({self.size}, {self.base!r})"

    @property
    def order(self) -> int:
        return self.base.order ** (self.size * self.size)

    def descriptor(self) -> Dict[str, Any]:
        if self.block_size > 1:
            inner = {"kind": "Mat", "size": self.block_size, "base": self.base.descriptor()}
            return {"kind": "Mat", "size": self.size // self.block_size, "base": inner}
        return {"kind": "Mat", "size": self.size, "base": self.base.descriptor()}

    def element(self, data) -> Element:
        return Element(self, data)

    def from_rows(self, rows) -> Element:
        arr = np.array(rows, dtype=np.int64)
        if arr.shape != (self.size, self.size):
            raise ConfigError(f"expected a {self.size}x{self.size} matrix, got shape {arr.shape}")
        if isinstance(self.base, Zmod):
            arr = arr % self.base.m
        elif (arr < 0).any() or (arr >= self.base.order).any():
            raise ConfigError(f"matrix entries out of range for {self.base!r}")
        return Element(self, arr)

    def zero(self) -> Element:
        return Element(self, np.zeros((self.size, self.size), dtype=np.int64))

    def one(self) -> Element:
        return self.scalar(1)

    def scalar(self, c: int) -> Element:
        return Element(self, np.eye(self.size, dtype=np.int64) * c)

    def matrix_unit(self, r: int, c: int, value: int = 1) -> Element:
        arr = np.zeros((self.size, self.size), dtype=np.int64)
        arr[r, c] = value
        return Element(self, arr)

    def diagonal_projector(self, positions) -> Element:
        arr = np.zeros((self.size, self.size), dtype=np.int64)
        for r in positions:
            arr[r, r] = 1
        return Element(self, arr)

    def random(self, rng: np.random.Generator) -> Element:
        return Element(self, rng.integers(0, self.base.order, size=(self.size, self.size)))

    def elements(self) -> Iterator[Element]:
        cells = self.size * self.size
        for entries in itertools.product(self.base.elements(), repeat=cells):
            yield Element(self, entries)

    def det(self, a: Element) -> int:
        return self.base.det(a.data.tolist())

    def is_invertible(self, a: Element) -> bool:
        return self.base.is_unit(self.det(a))

    def inverse(self, a: Element) -> Element:
        base, k = self.base, self.size
        d = self.det(a)
        if not base.is_unit(d):
            raise NotInvertible(f"determinant {d} is not a unit in {base!r}")
        if k == 1:
            return Element(self, [[base.inverse(d)]])
        d_inv = base.inverse(d)
        adj = np.zeros((k, k), dtype=np.int64)
        minor_algebra = MatrixAlgebra(base, k - 1)
        for i in range(k):
            for j in range(k):
                minor = np.delete(np.delete(a.data, i, axis=0), j, axis=1)
                cof = minor_algebra.det(Element(minor_algebra, minor))
                if (i + j) % 2:
                    cof = base.neg(cof)
                adj[j, i] = base.mul(cof, d_inv)
        return Element(self, adj)

    def corner_is_unit(self, u: Element, e: Element) -> bool:
        """Whether u in eRe is invertible in the corner ring eRe"""
        return self.is_invertible(u + self.one() - e)

    def corner_inverse(self, u: Element, e: Element) -> Element:
        try:
            return e * self.inverse(u + self.one() - e) * e
        except NotInvertible:
            raise NotInvertible(f"{u!r} is not invertible in the corner ring") from None

    def general_linear(self) -> List[Element]:
        """All invertible elements, by brute force"""
        return [a for a in self.elements() if self.is_invertible(a)]

    def random_invertible(self, rng: np.random.Generator, max_tries: int = 1000) -> Element:
        for _ in range(max_tries):
            g = self.random(rng)
            if self.is_invertible(g):
                return g
        raise NotInvertible(f"no invertible element found in {max_tries} draws")


def ring_from_descriptor(desc: Dict[str, Any]):
    """Build a base ring or matrix algebra from its JSON descriptor"""
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError(f"ring descriptor must be an object with a 'kind', got {desc!r}")
    kind = desc["kind"]
    try:
        if kind == "Zmod":
            return Zmod(int(desc["m"]))
        if kind == "GF":
            return GF(int(desc["p"]), list(desc["f"]))
        if kind == "Mat":
            size = int(desc["size"])
            inner = ring_from_descriptor(desc["base"])
            if isinstance(inner, MatrixAlgebra):
                return MatrixAlgebra(inner.base, size * inner.size, block_size=inner.size)
            return MatrixAlgebra(inner, size)
    except KeyError as e:
        raise ConfigError(f"ring descriptor {desc!r} is missing field {e}") from None
    raise ConfigError(f"unknown ring kind {kind!r}")


def as_algebra(ring) -> MatrixAlgebra:
    """View a commutative base ring as M(1, K)"""
    if isinstance(ring, MatrixAlgebra):
        return ring
    return MatrixAlgebra(ring, 1)


def quasi_compose(a: Element, b: Element, s: int) -> Element:
    """a o_s b = s*ab + a + b"""
    return (a * b).scale(s) + a + b


def quasi_invert(a: Element, s: int = 1) -> Element:
    """Quasi-inverse of a at scale s: the b with s*ab + a + b = 0 = s*ba + a + b.

    It exists iff 1 + s*a is a unit, and then b = -(1 + s*a)^{-1} a.
    """
    algebra = a.algebra
    u = algebra.one() + a.scale(s)
    try:
        u_inv = algebra.inverse(u)
    except NotInvertible:
        raise NotQuasiInvertible(f"{a!r} has no quasi-inverse at scale {s}") from None
    return -(u_inv * a)


@dataclass(frozen=True)
class Localization:
    """K -> K' = K/ann(s^N) with the s-power annihilator stabilized at N."""

    source: FiniteCommutativeRing
    target: FiniteCommutativeRing
    s: int
    exponent: int
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def is_zero_ring(self) -> bool:
        return self.target.order == 1

    def psi(self, k: int) -> int:
        if isinstance(self.source, Zmod):
            return k % self.target.m
        return 0 if self.is_zero_ring else k

    def lift(self, k: int) -> int:
        """A preimage under psi"""
        return k

    def psi_array(self, arr: np.ndarray) -> np.ndarray:
        if isinstance(self.source, Zmod):
            return arr % self.target.m
        return np.zeros_like(arr) if self.is_zero_ring else arr

    def fraction(self, k: int, t: int) -> int:
        """psi(k) * psi(s)^-t"""
        s_inv = self.target.inverse(self.psi(self.s))
        return self.target.mul(self.psi(k), self.target.power(s_inv, t))

    def check(self) -> Dict[str, bool]:
        """Homomorphism, unit and surjectivity properties of psi"""
        K, T = self.source, self.target
        hom = all(
            self.psi(K.add(a, b)) == T.add(self.psi(a), self.psi(b))
            and self.psi(K.mul(a, b)) == T.mul(self.psi(a), self.psi(b))
            for a in K.elements()
            for b in K.elements()
        )
        unit = T.is_unit(self.psi(self.s))
        reached = {self.fraction(k, t) for k in K.elements() for t in range(self.exponent + 1)}
        return {
            "homomorphism": hom and self.psi(1) == T.from_int(1),
            "s_is_unit": unit,
            "fractions_cover": reached == set(T.elements()),
            "universal_property": self.universal_property(),
        }

    def universal_property(self) -> bool:
        """Every map Z/m -> Z/d inverting s factors through psi"""
        if not isinstance(self.source, Zmod):
            return True
        m = self.source.m
        for d in sympy.divisors(m):
            if math.gcd(self.s, d) == 1 and self.target.m % d:
                return False
        return True


def localize_finite(K: FiniteCommutativeRing, s: int) -> Localization:
    """Localize a finite commutative ring at the powers of s"""
    warnings = []
    if isinstance(K, Zmod):
        m = K.m
        n = 0
        while math.gcd(m, pow(s, n)) != math.gcd(m, pow(s, n + 1)):
            n += 1
        target = Zmod(m // math.gcd(m, pow(s, n)))
    else:
        n = 0 if s != 0 else 1
        target = K if s != 0 else Zmod(1)
    if target.order == 1:
        warnings.append(f"{s} is nilpotent in {K!r}; localization is the zero ring")
        logging.warning(f"Localization of {K!r} at {s} is the zero ring")
    logging.debug(f"Localized {K!r} at {s}: {target!r}, annihilator stable at exponent {n}")
    return Localization(K, target, s, n, tuple(warnings))


def localize_algebra(algebra: MatrixAlgebra, loc: Localization) -> MatrixAlgebra:
    return MatrixAlgebra(loc.target, algebra.size, algebra.block_size)


def psi_element(loc: Localization, target: MatrixAlgebra, a: Element) -> Element:
    return Element(target, loc.psi_array(a.data))
