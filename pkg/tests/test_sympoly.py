import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algturan.gf import enumerate_vectors, field_of_order
from algturan.sympoly import (
    ContractionCache,
    DimensionMismatch,
    SymmetricPolynomial,
    basis_size,
    evaluate,
    evaluate_many,
    evaluation_row,
    monomial_basis,
    orbit_basis,
    orbit_basis_cached,
    orbit_count,
    sample_symmetric,
)


def test_monomial_basis_small():
    assert monomial_basis(1, 2) == [(0,), (1,), (2,)]
    assert basis_size(2, 8) == 45 == math.comb(10, 2)
    assert monomial_basis(2, 0) == [(0, 0)]
    assert basis_size(2, 16) == 153


def test_basis_is_graded():
    mons = monomial_basis(3, 4)
    degs = [sum(m) for m in mons]
    assert degs == sorted(degs)
    assert len(set(mons)) == len(mons) == basis_size(3, 4)


def test_orbit_counts():
    assert orbit_count(1, 2, 8) == 45
    assert orbit_count(2, 2, 8) == 1035 == (45 * 45 + 45) // 2
    assert orbit_count(2, 1, 1) == 3
    assert len(orbit_basis(2, 2, 8)) == 1035


@pytest.mark.parametrize("r,t,d", [(2, 1, 3), (3, 1, 2), (2, 2, 2), (3, 2, 1)])
def test_orbits_partition_index_tuples(r, t, d):
    M = basis_size(t, d)
    orbits = orbit_basis(r, t, d)
    seen = set()
    for o in orbits:
        assert not seen & o.members
        seen |= o.members
    assert seen == set(itertools.product(range(M), repeat=r))
    # Burnside-free cross-check: orbits are multisets of size r
    assert len(orbits) == math.comb(M + r - 1, r)


def test_orbit_index_tensor_consistent():
    ob = orbit_basis_cached(3, 1, 3)
    T = ob.orbit_index_tensor()
    for idx in itertools.product(range(ob.size), repeat=3):
        assert T[idx] == ob.orbit_id(idx)


def test_degree_zero_is_uniform_constant():
    F = field_of_order(7)
    rng = np.random.default_rng(0)
    zeros = sum(sample_symmetric(F, 2, 2, 0, rng).coeffs[0] == 0 for _ in range(7000))
    assert abs(zeros / 7000 - 1 / 7) < 5 * math.sqrt((1 / 7) * (6 / 7) / 7000)


def test_sampling_deterministic():
    F = field_of_order(3)
    f = sample_symmetric(F, 2, 2, 2, np.random.default_rng(11))
    g = sample_symmetric(F, 2, 2, 2, np.random.default_rng(11))
    assert f == g and f.coefficient_map() == g.coefficient_map()


def test_sampling_uniform():
    F = field_of_order(5)
    rng = np.random.default_rng(5)
    coeffs = np.stack([sample_symmetric(F, 2, 1, 1, rng).coeffs for _ in range(10_000)])
    sigma = math.sqrt(0.2 * 0.8 / 10_000)
    for col in coeffs.T:
        freq = np.bincount(col, minlength=5) / 10_000
        assert np.all(np.abs(freq - 0.2) <= 5 * sigma)


def test_evaluate_examples():
    F = field_of_order(5)
    assert evaluate(SymmetricPolynomial.zero(F, 2, 1, 2), [[1], [4]]) == 0
    assert evaluate(SymmetricPolynomial.constant(F, 2, 1, 2, 3), [[1], [4]]) == 3
    f = SymmetricPolynomial.from_terms(F, 2, 1, 1, {((1,), (0,)): 0, ((1,), (1,)): 1})
    assert evaluate(f, [[2], [3]]) == 1


def test_evaluation_row_examples():
    F = field_of_order(7)
    row = evaluation_row(F, 2, 2, 3, [[0, 0], [0, 0]])
    assert row[0] == 1 and not row[1:].any()
    for a, b in itertools.product(range(7), repeat=2):
        assert evaluation_row(F, 2, 1, 1, [[a], [b]]).tolist() == [1, (a + b) % 7, (a * b) % 7]


@pytest.mark.parametrize("q,r,t,d", [(5, 2, 2, 8), (4, 2, 2, 3), (9, 3, 1, 4), (7, 3, 2, 2)])
def test_row_dot_matches_evaluate(q, r, t, d):
    F = field_of_order(q)
    rng = np.random.default_rng(q + r)
    for _ in range(25):
        f = sample_symmetric(F, r, t, d, rng)
        pts = rng.integers(0, q, (r, t))
        assert F.dot(f.coeffs, evaluation_row(F, r, t, d, pts)) == evaluate(f, pts)


def test_cache_matches_direct():
    F = field_of_order(5)
    rng = np.random.default_rng(2)
    fs = [sample_symmetric(F, 3, 1, 4, rng) for _ in range(2)]
    verts = enumerate_vectors(F, 1)
    cache = ContractionCache(fs, verts)
    tups = rng.integers(0, 5, (1000, 3))
    direct = evaluate_many(fs[1], verts[tups])
    assert all(cache.evaluate(1, tuple(t)) == v for t, v in zip(tups, direct))
    table = cache.full_table(0)
    assert table.shape == (5, 5, 5)
    assert np.array_equal(table[tuple(tups.T)], evaluate_many(fs[0], verts[tups]))


def test_shape_errors():
    F = field_of_order(5)
    f = SymmetricPolynomial.zero(F, 2, 2, 2)
    with pytest.raises(DimensionMismatch):
        evaluate(f, [[1, 2, 3], [0, 0, 0]])
    with pytest.raises(DimensionMismatch):
        SymmetricPolynomial(F, 2, 2, 2, np.zeros(3, dtype=np.int64))


shapes = st.sampled_from([(3, 2, 1, 3), (4, 2, 2, 2), (5, 3, 2, 2), (9, 2, 1, 4), (7, 4, 1, 2)])


@settings(max_examples=60, deadline=None)
@given(shapes, st.integers(0, 2**32 - 1))
def test_block_permutation_invariance(shape, seed):
    q, r, t, d = shape
    F = field_of_order(q)
    rng = np.random.default_rng(seed)
    f = sample_symmetric(F, r, t, d, rng)
    pts = rng.integers(0, q, (r, t))
    vals = {evaluate(f, pts[list(pi)]) for pi in itertools.permutations(range(r))}
    assert len(vals) == 1


@settings(max_examples=40, deadline=None)
@given(shapes, st.integers(0, 2**32 - 1))
def test_evaluation_is_linear(shape, seed):
    q, r, t, d = shape
    F = field_of_order(q)
    rng = np.random.default_rng(seed)
    f, g = sample_symmetric(F, r, t, d, rng), sample_symmetric(F, r, t, d, rng)
    pts = rng.integers(0, q, (8, r, t))
    assert np.array_equal(evaluate_many(f + g, pts), F.add(evaluate_many(f, pts), evaluate_many(g, pts)))


def test_to_lines():
    F = field_of_order(5)
    f = SymmetricPolynomial.from_terms(F, 2, 1, 1, {((1,), (1,)): 2})
    assert f.to_lines() == ["SYMPOLY r=2 t=1 d=1 q=5", "1 | 1 : 2"]
