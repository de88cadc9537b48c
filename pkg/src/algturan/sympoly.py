"""Symmetric polynomials in r blocks of t variables, degree <= d per block.

A block monomial is an exponent vector of length t with total degree <= d.
Monomials of the full polynomial are r-tuples of block monomials; the
symmetric group on block positions acts on them, and a symmetric
polynomial carries one coefficient per orbit.  Orbits of r-tuples are
multisets, so the lexicographically least member (the representative) is
the sorted tuple of block-monomial indices.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .gf import FieldMismatch, FieldSpec

MAX_BASIS = 1 << 22
MAX_TENSOR = 1 << 25


class BasisTooLarge(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def basis_size(t: int, d: int) -> int:
    return math.comb(t + d, t)


def orbit_count(r: int, t: int, d: int) -> int:
    return math.comb(basis_size(t, d) + r - 1, r)


@lru_cache(maxsize=64)
def _monomial_basis(t: int, d: int) -> np.ndarray:
    if t < 1 or d < 0:
        raise ValueError("need t >= 1 and d >= 0")
    if basis_size(t, d) > MAX_BASIS:
        raise BasisTooLarge(f"C({t + d},{t}) monomials")
    out = []
    for deg in range(d + 1):
        # graded lex: within a degree, larger leading exponents first
        level = [e for e in itertools.product(range(deg, -1, -1), repeat=t) if sum(e) == deg]
        out.extend(level)
    arr = np.array(out, dtype=np.int64).reshape(-1, t)
    arr.flags.writeable = False
    return arr


def monomial_basis(t: int, d: int) -> list[tuple[int, ...]]:
    """Exponent vectors with sum <= d in graded-lexicographic order."""
    return [tuple(int(x) for x in row) for row in _monomial_basis(t, d)]


@dataclass(frozen=True)
class MonomialOrbit:
    representative: tuple[int, ...]

    @property
    def members(self) -> frozenset[tuple[int, ...]]:
        return frozenset(itertools.permutations(self.representative))


class OrbitBasis:
    """Orbit representatives for (r, t, d) with lookup structures.

    ``reps`` is an (n_orbits, r) array of sorted block-monomial indices in
    lexicographic order.  ``member_mask[o, j]`` selects permutation j of
    ``perms`` as a distinct member of orbit o, so member sums skip the
    repeats that arise when a representative has equal entries.
    """

    def __init__(self, r: int, t: int, d: int):
        if r < 1:
            raise ValueError("r must be >= 1")
        self.r, self.t, self.d = r, t, d
        self.monomials = _monomial_basis(t, d)
        self.size = len(self.monomials)
        n = orbit_count(r, t, d)
        if n > MAX_BASIS:
            raise BasisTooLarge(f"{n} orbits for r={r}, t={t}, d={d}")
        self.n_orbits = n
        self.reps = _multisets(self.size, r)
        self.perms = list(itertools.permutations(range(r)))
        keys = np.stack([self._key(self.reps[:, list(p)]) for p in self.perms], axis=1)
        mask = np.ones(keys.shape, dtype=bool)
        for j in range(1, len(self.perms)):
            mask[:, j] = np.all(keys[:, :j] != keys[:, j : j + 1], axis=1)
        self.member_mask = mask

    def _key(self, idx: np.ndarray) -> np.ndarray:
        return np.ravel_multi_index(tuple(idx.T), (self.size,) * self.r)

    def orbits(self) -> list[MonomialOrbit]:
        return [MonomialOrbit(tuple(int(x) for x in row)) for row in self.reps]

    def orbit_id(self, index_tuple) -> int:
        """Position of the orbit containing a tuple of monomial indices."""
        rep = sorted(int(x) for x in index_tuple)
        # rank of a multiset among combinations_with_replacement
        pos, lo = 0, 0
        for i, v in enumerate(rep):
            slots = self.r - i - 1
            for w in range(lo, v):
                pos += math.comb(self.size - w + slots - 1, slots)
            lo = v
        return pos

    def orbit_index_tensor(self) -> np.ndarray:
        """Array of shape (size,)*r mapping every index tuple to its orbit."""
        if self.size**self.r > MAX_TENSOR:
            raise BasisTooLarge(f"coefficient tensor {self.size}^{self.r} too large")
        return _orbit_index_tensor(self.r, self.t, self.d)


def _multisets(m: int, r: int) -> np.ndarray:
    if r == 1:
        return np.arange(m, dtype=np.int64)[:, None]
    if r == 2:
        i, j = np.triu_indices(m)
        return np.stack([i, j], axis=1).astype(np.int64)
    return np.array(list(itertools.combinations_with_replacement(range(m), r)), dtype=np.int64)


@lru_cache(maxsize=16)
def orbit_basis_cached(r: int, t: int, d: int) -> OrbitBasis:
    return OrbitBasis(r, t, d)


@lru_cache(maxsize=8)
def _orbit_index_tensor(r: int, t: int, d: int) -> np.ndarray:
    ob = orbit_basis_cached(r, t, d)
    out = np.empty((ob.size,) * r, dtype=np.int32)
    ids = np.arange(ob.n_orbits, dtype=np.int32)
    for p in ob.perms:
        out[tuple(ob.reps[:, list(p)].T)] = ids
    out.flags.writeable = False
    return out


def orbit_basis(r: int, t: int, d: int) -> list[MonomialOrbit]:
    return orbit_basis_cached(r, t, d).orbits()


@dataclass(frozen=True, eq=False)
class SymmetricPolynomial:
    field: FieldSpec
    r: int
    t: int
    d: int
    coeffs: np.ndarray = dc_field(repr=False)  # one encoded element per orbit

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.int64).reshape(-1)
        if c.size != orbit_count(self.r, self.t, self.d):
            raise DimensionMismatch("one coefficient per orbit required")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def basis(self) -> OrbitBasis:
        return orbit_basis_cached(self.r, self.t, self.d)

    @classmethod
    def zero(cls, field: FieldSpec, r: int, t: int, d: int) -> SymmetricPolynomial:
        return cls(field, r, t, d, np.zeros(orbit_count(r, t, d), dtype=np.int64))

    @classmethod
    def constant(cls, field: FieldSpec, r: int, t: int, d: int, c: int) -> SymmetricPolynomial:
        coeffs = np.zeros(orbit_count(r, t, d), dtype=np.int64)
        coeffs[0] = c
        return cls(field, r, t, d, coeffs)

    @classmethod
    def from_terms(cls, field, r, t, d, terms: dict) -> SymmetricPolynomial:
        """Build from {tuple of r exponent vectors: coefficient}; keys name orbits."""
        ob = orbit_basis_cached(r, t, d)
        lookup = {m: i for i, m in enumerate(monomial_basis(t, d))}
        coeffs = np.zeros(ob.n_orbits, dtype=np.int64)
        for key, c in terms.items():
            idx = [lookup[tuple(e)] for e in key]
            coeffs[ob.orbit_id(idx)] = int(c) % field.q
        return cls(field, r, t, d, coeffs)

    def coefficient_map(self) -> dict[tuple[int, ...], int]:
        """Nonzero coefficients keyed by orbit representative."""
        nz = np.nonzero(self.coeffs)[0]
        return {tuple(int(x) for x in self.basis.reps[i]): int(self.coeffs[i]) for i in nz}

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymmetricPolynomial):
            return NotImplemented
        return (self.field, self.r, self.t, self.d) == (other.field, other.r, other.t, other.d) and bool(
            np.array_equal(self.coeffs, other.coeffs)
        )

    def __add__(self, other: SymmetricPolynomial) -> SymmetricPolynomial:
        _check_same(self, other)
        return SymmetricPolynomial(self.field, self.r, self.t, self.d, self.field.add(self.coeffs, other.coeffs))

    def coefficient_tensor(self) -> np.ndarray:
        """Dense symmetric tensor of shape (basis,)*r."""
        return self.coeffs[self.basis.orbit_index_tensor()]

    def to_lines(self) -> list[str]:
        """Text form: one line per nonzero orbit, exponents then coefficient."""
        mons = self.basis.monomials
        lines = [f"SYMPOLY r={self.r} t={self.t} d={self.d} q={self.field.q}"]
        for rep, c in self.coefficient_map().items():
            blocks = " | ".join(" ".join(str(int(x)) for x in mons[i]) for i in rep)
            lines.append(f"{blocks} : {c}")
        return lines


def _check_same(f: SymmetricPolynomial, g: SymmetricPolynomial) -> None:
    if f.field != g.field:
        raise FieldMismatch(f"{f.field} vs {g.field}")
    if (f.r, f.t, f.d) != (g.r, g.t, g.d):
        raise DimensionMismatch("polynomial shapes differ")


def sample_symmetric(field: FieldSpec, r: int, t: int, d: int, stream: np.random.Generator) -> SymmetricPolynomial:
    """Uniform element of P_d: one independent uniform draw per orbit, in orbit order."""
    n = orbit_count(r, t, d)
    if n > MAX_BASIS:
        raise BasisTooLarge(f"{n} orbits")
    return SymmetricPolynomial(field, r, t, d, stream.integers(0, field.q, size=n, dtype=np.int64))


def monomial_values(field: FieldSpec, points, t: int, d: int) -> np.ndarray:
    """Values of every block monomial at each point; shape (..., basis)."""
    pts = np.asarray(points, dtype=np.int64)
    if pts.shape[-1] != t:
        raise DimensionMismatch(f"points have length {pts.shape[-1]}, expected {t}")
    if pts.size and (pts.min() < 0 or pts.max() >= field.q):
        raise FieldMismatch(f"coordinates outside {field}")
    mons = _monomial_basis(t, d)
    pw = field.powers(pts, d)  # (..., t, d+1)
    out = np.ones(pts.shape[:-1] + (len(mons),), dtype=np.int64)
    for j in range(t):
        out = field.mul(out, pw[..., j, :][..., mons[:, j]])
    return out


def _check_tuple(f_or_t: int, r: int, points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.int64)
    if pts.ndim == 1 and f_or_t == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] != r or pts.shape[1] != f_or_t:
        raise DimensionMismatch(f"expected {r} points of length {f_or_t}, got shape {pts.shape}")
    return pts


def evaluate_many(f: SymmetricPolynomial, tuples) -> np.ndarray:
    """Evaluate f on a batch of point tuples, shape (batch, r, t).

    Contracts the dense coefficient tensor one block at a time.
    """
    tup = np.asarray(tuples, dtype=np.int64)
    if tup.ndim != 3 or tup.shape[1] != f.r or tup.shape[2] != f.t:
        raise DimensionMismatch(f"expected (batch, {f.r}, {f.t}), got {tup.shape}")
    F = f.field
    mv = monomial_values(F, tup, f.t, f.d)  # (batch, r, M)
    M = mv.shape[-1]
    batch = tup.shape[0]
    tensor = f.coefficient_tensor().reshape(M, -1)
    # first block: (batch, M) @ (M, M^(r-1))
    acc = F.matmul(mv[:, 0, :], tensor)  # (batch, M^(r-1))
    for j in range(1, f.r):
        acc = acc.reshape(batch, M, -1)
        acc = F.sum(F.mul(acc, mv[:, j, :, None]), axis=1)
    return acc.reshape(batch)


def evaluate(f: SymmetricPolynomial, points) -> int:
    """Value of f at r points (each a length-t vector)."""
    pts = _check_tuple(f.t, f.r, points)
    return int(evaluate_many(f, pts[None])[0])


def evaluation_row(field: FieldSpec, r: int, t: int, d: int, points) -> np.ndarray:
    """Coefficient functional of a point tuple.

    Entry o is the sum, over the distinct members of orbit o, of the
    monomial product at the tuple; ``evaluate(f, tuple) == dot(coeffs, row)``.
    """
    pts = _check_tuple(t, r, points)
    ob = orbit_basis_cached(r, t, d)
    mv = monomial_values(field, pts, t, d)  # (r, M)
    row = np.zeros(ob.n_orbits, dtype=np.int64)
    for j, perm in enumerate(ob.perms):
        term = np.ones(ob.n_orbits, dtype=np.int64)
        for pos in range(r):
            term = field.mul(term, mv[pos, ob.reps[:, perm[pos]]])
        term = np.where(ob.member_mask[:, j], term, 0)
        row = field.add(row, term)
    return row


class ContractionCache:
    """Evaluates a family of same-shape polynomials over a fixed vertex list.

    ``values[v]`` holds the block-monomial values of vertex v.  Partial
    contractions of each coefficient tensor against leading arguments are
    memoized, so a query that fixes r-1 vertices costs one matrix-vector
    product over all candidate last vertices.
    """

    def __init__(self, fs: list[SymmetricPolynomial], vertices):
        if not fs:
            raise ValueError("need at least one polynomial")
        head = fs[0]
        for g in fs[1:]:
            _check_same(head, g)
        self.field = head.field
        self.r, self.t, self.d = head.r, head.t, head.d
        self.polys = list(fs)
        self.values = monomial_values(self.field, vertices, self.t, self.d)
        self.n = len(self.values)
        self._tensors: dict[int, np.ndarray] = {}
        self._partial: dict[tuple, np.ndarray] = {}

    def tensor(self, i: int) -> np.ndarray:
        if i not in self._tensors:
            self._tensors[i] = self.polys[i].coefficient_tensor()
        return self._tensors[i]

    def contract(self, i: int, leading: tuple[int, ...]) -> np.ndarray:
        """Coefficient tensor of poly i with leading vertices substituted."""
        leading = tuple(int(v) for v in leading)
        if not leading:
            return self.tensor(i)
        key = (i, leading)
        hit = self._partial.get(key)
        if hit is None:
            prev = self.contract(i, leading[:-1])
            M = prev.shape[0]
            flat = self.field.matmul(self.values[leading[-1]][None, :], prev.reshape(M, -1))
            hit = flat.reshape(prev.shape[1:])
            if len(self._partial) > 4096:
                self._partial.clear()
            self._partial[key] = hit
        return hit

    def last_values(self, i: int, leading) -> np.ndarray:
        """f_i(leading..., u) for every vertex u; requires r-1 leading vertices."""
        if len(leading) != self.r - 1:
            raise DimensionMismatch(f"need {self.r - 1} leading vertices")
        vec = self.contract(i, tuple(leading))
        return self.field.matmul(self.values, vec[:, None])[:, 0]

    def evaluate(self, i: int, tup) -> int:
        if len(tup) != self.r:
            raise DimensionMismatch(f"need {self.r} vertices")
        return int(self.last_values(i, tuple(tup[:-1]))[int(tup[-1])])

    def full_table(self, i: int, parts=None) -> np.ndarray:
        """f_i on every ordered r-tuple of vertices; shape (n,)*r.

        ``parts`` optionally restricts axis j to the vertex ids in parts[j].
        """
        F = self.field
        axes = [np.arange(self.n)] * self.r if parts is None else [np.asarray(p) for p in parts]
        acc = self.tensor(i)
        M = acc.shape[0]
        # contract the leading block, then fold the remaining blocks in turn
        acc = F.matmul(self.values[axes[0]], acc.reshape(M, -1))  # (n0, M^(r-1))
        shape = [len(axes[0])]
        for j in range(1, self.r):
            rest = M ** (self.r - j - 1)
            acc = acc.reshape(-1, M, rest).transpose(0, 2, 1).reshape(-1, M)
            acc = F.matmul(acc, self.values[axes[j]].T)  # (prefix*rest, n_j)
            acc = acc.reshape(-1, rest, len(axes[j])).transpose(0, 2, 1)
            shape.append(len(axes[j]))
            acc = acc.reshape(-1, rest)
        return acc.reshape(shape)


def build_cache(fs: list[SymmetricPolynomial], vertices) -> ContractionCache:
    return ContractionCache(fs, vertices)
