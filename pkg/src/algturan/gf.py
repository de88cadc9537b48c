"""Arithmetic in GF(p^k) on integer encodings, plus dense linear algebra.

An element of GF(p^k) is stored as the integer ``sum(c_i * p**i)`` of its
coefficient vector modulo the field's irreducible polynomial.  All
vectorized helpers take and return ``numpy`` integer arrays of encodings.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

MAX_ORDER = 1 << 16
MAX_VECTORS = 1 << 24
# mul/add tables are materialized up to this order
TABLE_ORDER = 256


class NotPrime(ValueError):
    pass


class Reducible(ValueError):
    pass


class OrderTooLarge(ValueError):
    pass


class FieldMismatch(ValueError):
    pass


class TooManyVectors(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % f for f in range(3, math.isqrt(n) + 1, 2))


# -- polynomials over GF(p), little-endian coefficient tuples ----------------

def _trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_mod(a: list[int], m: tuple[int, ...], p: int) -> list[int]:
    a = _trim([x % p for x in a])
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) - 1 >= dm:
        f = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - f * mc) % p
        _trim(a)
    return a


def _poly_mulmod(a: list[int], b: list[int], m: tuple[int, ...], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _poly_mod(out, m, p)


def is_irreducible(modulus: tuple[int, ...], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..k//2."""
    k = len(modulus) - 1
    if k < 1 or modulus[-1] % p == 0:
        return False
    if k == 1:
        return True
    for deg in range(1, k // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            if not _poly_mod(list(modulus), tuple(low) + (1,), p):
                return False
    return True


def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree k over GF(p).

    Candidates are compared as coefficient lists from the constant term up.
    """
    if k == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=k):
        cand = tuple(low) + (1,)
        if is_irreducible(cand, p):
            return cand
    raise Reducible(f"no irreducible of degree {k} over GF({p})")


@dataclass(frozen=True)
class FieldSpec:
    p: int
    k: int
    modulus: tuple[int, ...]

    @property
    def q(self) -> int:
        return self.p**self.k

    @property
    def is_prime_field(self) -> bool:
        return self.k == 1

    def __repr__(self) -> str:
        return f"GF({self.p}^{self.k})" if self.k > 1 else f"GF({self.p})"

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(self, int(value))

    # -- encoding ----------------------------------------------------------

    @cached_property
    def digits(self) -> np.ndarray:
        """``digits[a, i]`` is coefficient i of element a; shape (q, k)."""
        a = np.arange(self.q, dtype=np.int64)
        return np.stack([(a // self.p**i) % self.p for i in range(self.k)], axis=1)

    @cached_property
    def _place(self) -> np.ndarray:
        return self.p ** np.arange(self.k, dtype=np.int64)

    def encode(self, coeffs) -> np.ndarray:
        """Inverse of ``digits``; the last axis holds coefficients."""
        return (np.asarray(coeffs, dtype=np.int64) % self.p) @ self._place

    def _poly(self, a: int) -> list[int]:
        return _trim([int(x) for x in self.digits[a]])

    def _from_poly(self, c: list[int]) -> int:
        return sum(int(x) * self.p**i for i, x in enumerate(c))

    # -- tables --------------------------------------------------------------

    @cached_property
    def _exp_log(self) -> tuple[np.ndarray, np.ndarray]:
        q = self.q
        if q == 2:
            return np.array([1, 1], dtype=np.int64), np.zeros(2, dtype=np.int64)
        for g in range(2, q):
            exp = np.empty(q, dtype=np.int64)
            x = 1
            gp = self._poly(g)
            ok = True
            for i in range(q - 1):
                exp[i] = x
                x = self._from_poly(_poly_mulmod(self._poly(x), gp, self.modulus, self.p))
                if x == 1 and i < q - 2:
                    ok = False
                    break
            if ok:
                exp[q - 1] = exp[0]
                log = np.zeros(q, dtype=np.int64)
                log[exp[: q - 1]] = np.arange(q - 1)
                return exp, log
        raise AssertionError("multiplicative group is cyclic")

    @cached_property
    def inv_table(self) -> np.ndarray:
        exp, log = self._exp_log
        inv = np.zeros(self.q, dtype=np.int64)
        nz = np.arange(1, self.q)
        inv[nz] = exp[(-log[nz]) % (self.q - 1)]
        return inv

    @cached_property
    def _mul_table(self) -> np.ndarray | None:
        if self.q > TABLE_ORDER:
            return None
        a = np.arange(self.q)
        return self._mul_log(a[:, None], a[None, :])

    @cached_property
    def _add_table(self) -> np.ndarray | None:
        if self.k == 1 or self.q > TABLE_ORDER:
            return None
        a = np.arange(self.q)
        return self.encode(self.digits[a][:, None, :] + self.digits[a][None, :, :])

    @cached_property
    def mult_matrices(self) -> np.ndarray:
        """``mult_matrices[a]`` is the k x k GF(p)-matrix of x -> a*x."""
        basis = self.p ** np.arange(self.k)
        cols = self.mul(np.arange(self.q)[:, None], basis[None, :])  # (q, k)
        return self.digits[cols].transpose(0, 2, 1)

    # -- vectorized arithmetic -----------------------------------------------

    def add(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.k == 1:
            return (a + b) % self.p
        if self._add_table is not None:
            return self._add_table[a, b]
        return self.encode(self.digits[a] + self.digits[b])

    def neg(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.k == 1:
            return (-a) % self.p
        return self.encode(-self.digits[a])

    def sub(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.k == 1:
            return (a - b) % self.p
        return self.encode(self.digits[a] - self.digits[b])

    def _mul_log(self, a, b) -> np.ndarray:
        exp, log = self._exp_log
        out = exp[(log[a] + log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def mul(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.k == 1:
            return (a * b) % self.p
        if self._mul_table is not None:
            return self._mul_table[a, b]
        return self._mul_log(a, b)

    def inv(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        return self.inv_table[a]

    def power(self, a, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if e == 0:
            return np.ones_like(a)
        if self.k == 1:
            return np.vectorize(lambda x: pow(int(x), e, self.p), otypes=[np.int64])(a)
        exp, log = self._exp_log
        return np.where(a == 0, 0, exp[(log[a] * e) % (self.q - 1)])

    def powers(self, a, dmax: int) -> np.ndarray:
        """Stack of a**0 .. a**dmax along a new trailing axis."""
        a = np.asarray(a, dtype=np.int64)
        out = np.empty(a.shape + (dmax + 1,), dtype=np.int64)
        out[..., 0] = 1
        for e in range(1, dmax + 1):
            out[..., e] = self.mul(out[..., e - 1], a)
        return out

    def sum(self, a, axis=None) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.k == 1:
            return a.sum(axis=axis) % self.p
        d = self.digits[a]
        if axis is None:
            return self.encode(d.reshape(-1, self.k).sum(axis=0))
        axis = axis % a.ndim
        return self.encode(d.sum(axis=axis))

    def matmul(self, a, b) -> np.ndarray:
        """Matrix product over the field for 2-d encoded arrays."""
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if a.shape[1] != b.shape[0]:
            raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
        if self.k == 1:
            return _matmul_mod(a, b, self.p)
        n, m = a.shape
        cols = b.shape[1]
        k = self.k
        # a_il acts as its k x k multiplication matrix on the coefficient vector of b_lj
        big_a = self.mult_matrices[a].transpose(0, 2, 1, 3).reshape(n * k, m * k)
        big_b = self.digits[b].transpose(0, 2, 1).reshape(m * k, cols)
        prod = _matmul_mod(big_a, big_b, self.p).reshape(n, k, cols)
        return self.encode(prod.transpose(0, 2, 1))

    def dot(self, a, b) -> int:
        return int(self.matmul(np.asarray(a)[None, :], np.asarray(b)[:, None])[0, 0])


def _matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    inner = a.shape[1]
    if inner * (p - 1) ** 2 < 2**52:
        # exact in float64, and BLAS-backed
        out = a.astype(np.float64) @ b.astype(np.float64)
        return np.mod(out, p).astype(np.int64)
    return (a @ b) % p


def field_new(p: int, k: int = 1, modulus=None) -> FieldSpec:
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if k < 1:
        raise ValueError("k must be >= 1")
    if p**k > MAX_ORDER:
        raise OrderTooLarge(f"{p}^{k} exceeds {MAX_ORDER}")
    if modulus is None:
        modulus = smallest_irreducible(p, k)
    else:
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise Reducible(f"modulus {modulus} is not monic of degree {k}")
        if not is_irreducible(modulus, p):
            raise Reducible(f"modulus {modulus} factors over GF({p})")
    return FieldSpec(p, k, modulus)


def field_of_order(q: int) -> FieldSpec:
    """GF(q) for a prime power q, with the default modulus."""
    if q < 2:
        raise NotPrime(f"{q} is not a prime power")
    p = next(f for f in range(2, q + 1) if q % f == 0)
    k = round(math.log(q, p))
    if p**k != q:
        raise NotPrime(f"{q} is not a prime power")
    return field_new(p, k)


@dataclass(frozen=True)
class FieldElement:
    field: FieldSpec
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise ValueError(f"{self.value} out of range for {self.field}")

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field} vs {other.field}")
            return other.value
        return int(other)

    def _wrap(self, v) -> FieldElement:
        return FieldElement(self.field, int(v))

    def __add__(self, other):
        return self._wrap(self.field.add(self.value, self._other(other)))

    def __sub__(self, other):
        return self._wrap(self.field.sub(self.value, self._other(other)))

    def __mul__(self, other):
        return self._wrap(self.field.mul(self.value, self._other(other)))

    def __truediv__(self, other):
        return self * self._wrap(self.field.inv(self._other(other)))

    def __neg__(self):
        return self._wrap(self.field.neg(self.value))

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return self._wrap(self.field.power(self.value, e))

    def inverse(self) -> FieldElement:
        return self._wrap(self.field.inv(self.value))

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.field!r}({self.value})"


def arith(a: FieldElement, b: FieldElement | None, op: str) -> FieldElement:
    """Single binary or unary field operation: add, sub, mul, inv, neg."""
    if b is not None and a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    if op == "neg":
        return -a
    raise ValueError(f"unknown op {op!r}")


@dataclass
class FqMatrix:
    field: FieldSpec
    rows: int
    cols: int
    entries: np.ndarray  # row-major, length rows*cols

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.int64).reshape(-1)
        if self.entries.size != self.rows * self.cols:
            raise ValueError("entries length must equal rows*cols")

    @classmethod
    def from_array(cls, field: FieldSpec, arr) -> FqMatrix:
        arr = np.asarray(arr, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("need a 2-d array")
        return cls(field, arr.shape[0], arr.shape[1], arr.reshape(-1))

    def array(self) -> np.ndarray:
        return self.entries.reshape(self.rows, self.cols).copy()


def rank(m: FqMatrix) -> int:
    """Rank over the matrix's field by row reduction."""
    f = m.field
    a = m.array()
    if a.size and (a.min() < 0 or a.max() >= f.q):
        raise FieldMismatch(f"entries outside {f}")
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r] = f.mul(a[r], f.inv(a[r, c]))
        below = a[r + 1 :, c]
        hit = np.nonzero(below)[0] + r + 1
        if hit.size:
            a[hit] = f.sub(a[hit], f.mul(a[hit, c][:, None], a[r][None, :]))
        r += 1
    return r


def enumerate_vectors(field: FieldSpec, dim: int) -> np.ndarray:
    """All q**dim vectors; row i holds the little-endian base-q digits of i."""
    q = field.q
    if q**dim > MAX_VECTORS:
        raise TooManyVectors(f"{q}^{dim} vectors exceeds {MAX_VECTORS}")
    idx = np.arange(q**dim, dtype=np.int64)
    if dim == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.stack([(idx // q**j) % q for j in range(dim)], axis=1)


def vector_index(field: FieldSpec, vec) -> int:
    """Position of ``vec`` in ``enumerate_vectors``."""
    return int(sum(int(x) * field.q**j for j, x in enumerate(vec)))
