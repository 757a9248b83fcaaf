"""Arithmetic in GF(2^e) with bit-encoded elements, plus simple extensions k[eps].

An element is a plain int whose binary digits are the coefficients of a
polynomial residue (bit 0 is the constant term).  Vectorised arithmetic on
numpy arrays goes through log/exp tables built once per field.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

# tables are only built for fields up to this many elements
TABLE_LIMIT = 1 << 20


class FieldError(ValueError):
    pass


def clmul(a: int, b: int) -> int:
    """Carry-less product of two bit polynomials."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def bitpoly_mod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def bitpoly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, bitpoly_mod(a, b)
    return a


def is_irreducible_gf2(m: int) -> bool:
    """Irreducibility over GF(2) via gcd(m, x^(2^i) - x) = 1 for i <= deg/2."""
    e = m.bit_length() - 1
    if e < 1:
        return False
    if e == 1:
        return True
    if not m & 1:
        return False
    x = 0b10
    t = x
    for _ in range(e // 2):
        t = bitpoly_mod(clmul(t, t), m)
        if bitpoly_gcd(m, t ^ x) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def canonical_modulus(e: int) -> int:
    """Smallest irreducible polynomial of degree e, by integer encoding."""
    if e < 1:
        raise FieldError("degree must be >= 1")
    for m in range(1 << e, 1 << (e + 1)):
        if is_irreducible_gf2(m):
            return m
    raise AssertionError("unreachable")


class Field:
    """GF(2^e) given by an irreducible modulus; elements are ints in [0, 2^e)."""

    def __init__(self, e: int, modulus: int | None = None):
        if e < 1:
            raise FieldError("degree must be >= 1")
        if modulus is None:
            modulus = canonical_modulus(e)
        if modulus.bit_length() - 1 != e:
            raise FieldError(f"modulus {modulus} does not have degree {e}")
        if not is_irreducible_gf2(modulus):
            raise FieldError(f"modulus {modulus} is reducible over GF(2)")
        self.e = e
        self.modulus = modulus
        self.order = 1 << e

    def __repr__(self) -> str:
        return f"Field(2^{self.e}, modulus={self.modulus})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Field) and (self.e, self.modulus) == (other.e, other.modulus)

    def __hash__(self) -> int:
        return hash((self.e, self.modulus))

    def header(self) -> str:
        return f"field 2 {self.e} {self.modulus}"

    def elements(self) -> range:
        return range(self.order)

    def check(self, a: int) -> int:
        if not 0 <= a < self.order:
            raise FieldError(f"{a} is not an element of {self!r}")
        return a

    # scalar arithmetic

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        if self.order <= TABLE_LIMIT:
            if a == 0 or b == 0:
                return 0
            log, exp = self._lists
            return exp[log[a] + log[b]]
        return bitpoly_mod(clmul(a, b), self.modulus)

    def pow(self, a: int, k: int) -> int:
        if k < 0:
            return self.pow(self.inv(a), -k)
        r = 1
        while k:
            if k & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            k >>= 1
        return r

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.order <= TABLE_LIMIT:
            log, exp = self._lists
            return exp[(self.order - 1 - log[a]) % (self.order - 1)]
        return self.pow(a, self.order - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def square(self, a: int) -> int:
        return self.mul(a, a)

    def sqrt(self, a: int) -> int:
        # squaring is a bijection; a^(2^(e-1)) undoes it
        for _ in range(self.e - 1):
            a = self.mul(a, a)
        return a

    def trace(self, a: int) -> int:
        t, x = 0, a
        for _ in range(self.e):
            t ^= x
            x = self.mul(x, x)
        assert t in (0, 1)
        return t

    # Artin-Schreier cosets

    @cached_property
    def as_rep(self) -> int:
        """Smallest element of absolute trace one."""
        return next(a for a in range(1, self.order) if self.trace(a) == 1)

    def artin_schreier_reps(self) -> tuple[int, int]:
        return (0, self.as_rep)

    @cached_property
    def _as_solver(self) -> list[tuple[int, int]]:
        # x -> x^2 + x is GF(2)-linear; reduce its images of the bit basis
        rows = [(self.mul(1 << i, 1 << i) ^ (1 << i), 1 << i) for i in range(self.e)]
        return _echelon(rows)

    def coset_reduce(self, a: int) -> tuple[int, int]:
        """Split a = rep + delta^2 + delta with rep in {0, as_rep}."""
        rep = 0 if self.trace(a) == 0 else self.as_rep
        target, delta = a ^ rep, 0
        for img, pre in self._as_solver:
            if target & (1 << (img.bit_length() - 1)):
                target ^= img
                delta ^= pre
        assert target == 0
        # delta and delta + 1 both work; report the smaller
        delta = min(delta, delta ^ 1)
        return rep, delta

    # vectorised arithmetic

    @cached_property
    def generator(self) -> int:
        n = self.order - 1
        primes = _prime_factors(n)
        for g in range(2, self.order) if n > 1 else [1]:
            if all(self._slowpow(g, n // p) != 1 for p in primes):
                return g
        return 1

    def _slowpow(self, a: int, k: int) -> int:
        r = 1
        while k:
            if k & 1:
                r = bitpoly_mod(clmul(r, a), self.modulus)
            a = bitpoly_mod(clmul(a, a), self.modulus)
            k >>= 1
        return r

    @cached_property
    def _tables(self) -> tuple[np.ndarray, np.ndarray]:
        if self.order > TABLE_LIMIT:
            raise FieldError("field too large for table arithmetic")
        q1 = self.order - 1
        log = np.zeros(self.order, dtype=np.int64)
        # exp has room for log(a)+log(b) and a zero region reached via log(0)
        exp = np.zeros(4 * q1 + 3, dtype=np.int64)
        g, x = self.generator, 1
        for i in range(q1):
            exp[i] = exp[i + q1] = x
            log[x] = i
            x = bitpoly_mod(clmul(x, g), self.modulus)
        log[0] = 2 * q1 + 1
        return log, exp

    @cached_property
    def _lists(self) -> tuple[list[int], list[int]]:
        return self._tables[0].tolist(), self._tables[1].tolist()

    @property
    def _log(self) -> np.ndarray:
        return self._tables[0]

    @property
    def _exp(self) -> np.ndarray:
        return self._tables[1]

    def mul_arr(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.e == 1:
            return np.bitwise_and(x, y)
        return self._exp[self._log[x] + self._log[y]]

    def inv_arr(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if np.any(x == 0):
            raise ZeroDivisionError("inverse of zero")
        q1 = self.order - 1
        return self._exp[(q1 - self._log[x]) % q1]

    @cached_property
    def square_table(self) -> np.ndarray:
        a = np.arange(self.order, dtype=np.int64)
        return self.mul_arr(a, a)

    def __call__(self, value: int) -> "Scalar":
        return Scalar(self, self.check(value))


@dataclass(frozen=True)
class Scalar:
    """A field element bound to its field, with operator syntax."""

    owner: Field
    value: int

    def _same(self, other: "Scalar | int") -> int:
        if isinstance(other, Scalar):
            if other.owner != self.owner:
                raise FieldError("scalars from different fields")
            return other.value
        return self.owner.check(other)

    def __add__(self, other):
        return Scalar(self.owner, self.value ^ self._same(other))

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __mul__(self, other):
        return Scalar(self.owner, self.owner.mul(self.value, self._same(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Scalar(self.owner, self.owner.div(self.value, self._same(other)))

    def __pow__(self, k: int):
        return Scalar(self.owner, self.owner.pow(self.value, k))

    def __neg__(self):
        return self

    def inv(self) -> "Scalar":
        return Scalar(self.owner, self.owner.inv(self.value))

    def sqrt(self) -> "Scalar":
        return Scalar(self.owner, self.owner.sqrt(self.value))

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value}@GF(2^{self.owner.e})"


def _echelon(rows: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Reduce (image, preimage) pairs so leading bits of images are distinct."""
    out: list[tuple[int, int]] = []
    for img, pre in rows:
        for oimg, opre in out:
            if img & (1 << (oimg.bit_length() - 1)):
                img ^= oimg
                pre ^= opre
        if img:
            out.append((img, pre))
            out.sort(key=lambda p: -p[0].bit_length())
    return out


def _prime_factors(n: int) -> list[int]:
    ps, p = [], 2
    while p * p <= n:
        if n % p == 0:
            ps.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        ps.append(n)
    return ps


# polynomials over a field: coefficient lists, constant term first

Poly = tuple[int, ...]


def poly_trim(f: Sequence[int]) -> Poly:
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return tuple(f)


def poly_add(f: Sequence[int], g: Sequence[int]) -> Poly:
    n = max(len(f), len(g))
    return poly_trim([(f[i] if i < len(f) else 0) ^ (g[i] if i < len(g) else 0) for i in range(n)])


def poly_mul(F: Field, f: Sequence[int], g: Sequence[int]) -> Poly:
    if not f or not g:
        return ()
    r = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                r[i + j] ^= F.mul(a, b)
    return poly_trim(r)


def poly_divmod(F: Field, f: Sequence[int], g: Sequence[int]) -> tuple[Poly, Poly]:
    g = poly_trim(g)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(poly_trim(f))
    q = [0] * max(len(r) - len(g) + 1, 0)
    lead_inv = F.inv(g[-1])
    while len(r) >= len(g) and r:
        c = F.mul(r[-1], lead_inv)
        k = len(r) - len(g)
        q[k] = c
        for i, b in enumerate(g):
            r[i + k] ^= F.mul(c, b)
        r = list(poly_trim(r))
    return poly_trim(q), tuple(r)


def poly_mod(F: Field, f: Sequence[int], g: Sequence[int]) -> Poly:
    return poly_divmod(F, f, g)[1]


def poly_gcd(F: Field, f: Sequence[int], g: Sequence[int]) -> Poly:
    f, g = poly_trim(f), poly_trim(g)
    while g:
        f, g = g, poly_mod(F, f, g)
    if f:
        c = F.inv(f[-1])
        f = tuple(F.mul(c, a) for a in f)
    return f


def poly_pow(F: Field, f: Sequence[int], k: int, mod: Sequence[int] | None = None) -> Poly:
    r: Poly = (1,)
    base = poly_trim(f)
    while k:
        if k & 1:
            r = poly_mul(F, r, base)
            if mod is not None:
                r = poly_mod(F, r, mod)
        base = poly_mul(F, base, base)
        if mod is not None:
            base = poly_mod(F, base, mod)
        k >>= 1
    return r


def poly_eval(F: Field, f: Sequence[int], x: int) -> int:
    r = 0
    for a in reversed(f):
        r = F.mul(r, x) ^ a
    return r


def poly_is_irreducible(F: Field, f: Sequence[int]) -> bool:
    f = poly_trim(f)
    m = len(f) - 1
    if m < 1:
        return False
    if m == 1:
        return True
    x: Poly = (0, 1)
    t = x
    for _ in range(m // 2):
        t = poly_pow(F, t, F.order, f)
        if len(poly_gcd(F, f, poly_add(t, x))) > 1:
            return False
    return True


def parse_poly(F: Field, coeffs: Sequence[int]) -> Poly:
    f = tuple(F.check(int(c)) for c in coeffs)
    if poly_trim(f) != f or not f:
        raise FieldError("polynomial must have a nonzero leading coefficient")
    return f


@dataclass(frozen=True, eq=False)
class Extension:
    """K = k[eps] for a root eps of a monic irreducible f over k.

    K is realised as a field in its own right; `embed_table[a]` is the image
    of a in K, and `sigma(i, x)` is x^(q^(i-1)) with q = |k|.
    """

    base: Field
    f: Poly
    ext: Field
    embed_table: np.ndarray
    epsilon: int

    @property
    def m(self) -> int:
        return len(self.f) - 1

    def embed(self, a: int) -> int:
        return int(self.embed_table[a])

    @cached_property
    def _restrict_table(self) -> np.ndarray:
        t = np.full(self.ext.order, -1, dtype=np.int64)
        t[self.embed_table] = np.arange(self.base.order)
        return t

    def restrict(self, x: int) -> int:
        a = int(self._restrict_table[x])
        if a < 0:
            raise FieldError(f"{x} does not lie in the base field")
        return a

    def restrict_arr(self, x: np.ndarray) -> np.ndarray:
        r = self._restrict_table[x]
        if np.any(r < 0):
            raise FieldError("entries do not lie in the base field")
        return r

    def in_base(self, x: int) -> bool:
        return int(self._restrict_table[x]) >= 0

    def sigma(self, i: int, x: int) -> int:
        for _ in range((i - 1) * self.base.e):
            x = self.ext.mul(x, x)
        return x

    def sigma_arr(self, i: int, x: np.ndarray) -> np.ndarray:
        sq = self.ext.square_table
        x = np.asarray(x)
        for _ in range((i - 1) * self.base.e):
            x = sq[x]
        return x

    def conjugates(self) -> list[int]:
        return [self.sigma(i, self.epsilon) for i in range(1, self.m + 1)]

    def embedded_f(self) -> Poly:
        return tuple(self.embed(a) for a in self.f)


def make_extension(k: Field, f: Sequence[int]) -> Extension:
    f = parse_poly(k, f)
    if f[-1] != 1:
        raise FieldError("f must be monic")
    if not poly_is_irreducible(k, f):
        raise FieldError(f"f = {f} is reducible over GF(2^{k.e})")
    m = len(f) - 1
    if m == 1:
        return Extension(k, f, k, np.arange(k.order, dtype=np.int64), f[0])
    K = Field(k.e * m)
    # image of the generator of k: smallest root of k's modulus in K
    kmod = tuple((k.modulus >> i) & 1 for i in range(k.e + 1))
    beta = next(x for x in range(K.order) if poly_eval(K, kmod, x) == 0)
    powers = [K.pow(beta, i) for i in range(k.e)]
    table = np.zeros(k.order, dtype=np.int64)
    for a in range(k.order):
        v = 0
        for i in range(k.e):
            if (a >> i) & 1:
                v ^= powers[i]
        table[a] = v
    fK = tuple(int(table[a]) for a in f)
    eps = next(x for x in range(K.order) if poly_eval(K, fK, x) == 0)
    return Extension(k, f, K, table, eps)


GF2 = Field(1)
