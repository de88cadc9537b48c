import itertools
import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algturan.analysis import (
    DegeneratePattern,
    SearchTooLarge,
    bad_pairs,
    bad_sequences,
    berge_paths,
    berge_paths_naive,
    cleanup,
    completions_by_type,
    contains_berge_theta,
    count_complete_bipartite_r,
    count_complete_rpartite,
    path_counts_from,
    sequence_completions,
)
from algturan.construct import build_layer_a, build_multi, params
from algturan.gf import field_of_order
from algturan.hypergraph import MultiHypergraph, SimpleHypergraph, union

from test_construct import ZeroStream

K4 = SimpleHypergraph(4, 3, itertools.combinations(range(4), 3))


def brute_rpartite(g, sizes):
    """Unordered copies: sets of parts, with the multiset of sizes matched."""
    edges = g.vertex_sets()
    copies = set()
    verts = range(g.n)

    def rec(j, used, parts):
        if j == len(sizes):
            if all(tuple(sorted(c)) in edges for c in itertools.product(*parts)):
                copies.add(frozenset(zip(sizes, map(frozenset, parts))))
            return
        for P in itertools.combinations([v for v in verts if v not in used], sizes[j]):
            rec(j + 1, used | set(P), parts + [P])

    rec(0, set(), [])
    return len(copies)


def test_rpartite_examples():
    assert count_complete_rpartite(K4, (1, 1, 1)) == 4
    assert count_complete_rpartite(K4, (1, 1, 2)) == 6
    assert count_complete_rpartite(SimpleHypergraph(6, 3), (1, 2, 2)) == 0


def test_bipartite_examples():
    g = SimpleHypergraph(5, 3, [(1, 2, 3), (1, 2, 4)])
    assert count_complete_bipartite_r(g, 2, 1) == 1
    assert count_complete_bipartite_r(K4, 2, 1) == 6
    with pytest.raises(DegeneratePattern):
        count_complete_bipartite_r(g, 0, 1)
    with pytest.raises(DegeneratePattern):
        count_complete_rpartite(g, (0, 1, 1))


def test_pattern_size_cap():
    with pytest.raises(SearchTooLarge):
        count_complete_rpartite(K4, (5, 5, 5))


graphs3 = st.sets(st.tuples(st.integers(0, 6), st.integers(0, 6), st.integers(0, 6)), max_size=25)


def _simple(n, r, raw):
    return SimpleHypergraph(n, r, {tuple(sorted(e)) for e in raw if len(set(e)) == r})


@settings(max_examples=40, deadline=None)
@given(graphs3, st.sampled_from([(1, 1, 1), (1, 1, 2), (1, 2, 2), (2, 1, 1)]))
def test_rpartite_matches_brute_force(raw, sizes):
    g = _simple(7, 3, raw)
    assert count_complete_rpartite(g, sizes) == brute_rpartite(g, sorted(sizes))


@settings(max_examples=40, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 7), st.integers(0, 7)), max_size=20), st.integers(1, 3), st.integers(1, 3))
def test_graph_bipartite_counts_agree(raw, s, t):
    # for graphs K_{s,t}^{(2)} and the complete bipartite K_{s,t} are the same object
    g = _simple(8, 2, raw)
    a = count_complete_bipartite_r(g, s, t)
    b = count_complete_rpartite(g, (t, s))
    assert a == b


def test_bad_sequences_complete_graph():
    F = field_of_order(5)
    p = params("A", 2, [2], 5)
    g = build_layer_a(p, F, stream=ZeroStream())
    found = bad_sequences(g, "A", p, 23)
    assert len(found) == math.comb(25, 2)
    assert all(b.completions == 23 for b in found)
    assert bad_sequences(g, "A", p, 24) == []
    assert bad_sequences(SimpleHypergraph(25, 2), "A", p, 1) == []


def test_multiplicities_multiply():
    p = params("A", 2, [2], 5)
    layer = SimpleHypergraph(25, 2, [(0, 2), (1, 2)])
    g = union([layer, layer])
    assert sequence_completions(g, p, (0, 1)) == 4
    types = completions_by_type(g, p, (0, 1))
    assert sum(types.values()) == 4 and set(types.values()) == {1}


def test_berge_examples():
    g = SimpleHypergraph(5, 3, [(0, 1, 2), (1, 3, 4)])
    assert berge_paths(g, 0, 3, 2) == 1
    single = SimpleHypergraph(3, 3, [(0, 1, 2)])
    assert berge_paths(single, 0, 1, 1) == 1
    assert berge_paths(single, 0, 1, 2) == 1
    e = SimpleHypergraph(3, 3, [(0, 1, 2)])
    assert berge_paths(union([e, e]), 0, 1, 1) == 2
    counts = path_counts_from(g, 0, 2)
    assert all(counts[y] == berge_paths(g, 0, y, 2) for y in range(1, 5))


multi3 = st.sets(st.tuples(st.integers(0, 1), st.frozensets(st.integers(0, 7), min_size=3, max_size=3)), max_size=14)


@settings(max_examples=60, deadline=None)
@given(multi3, st.integers(1, 3))
def test_berge_matches_naive(raw, lmax):
    g = MultiHypergraph(8, 3, 2, 0, frozenset((k, tuple(sorted(s))) for k, s in raw))
    for x, y in itertools.combinations(range(8), 2):
        assert berge_paths(g, x, y, lmax) == berge_paths_naive(g, x, y, lmax)


def test_bad_pairs_examples():
    g = SimpleHypergraph(5, 3, [(0, 1, 2), (1, 3, 4)])
    assert bad_pairs(SimpleHypergraph(5, 3), 2, 1) == []
    pairs = {(b.x, b.y) for b in bad_pairs(g, 2, 1)}
    assert (0, 3) in pairs
    assert bad_pairs(g, 2, 10**9) == []
    by_pair = Counter({(b.x, b.y): b.paths for b in bad_pairs(g, 2, 1)})
    assert all(by_pair[(x, y)] == berge_paths(g, x, y, 2) for x, y in by_pair)


def test_theta_examples():
    x, a, p_, y, q_, b, u, w = range(8)
    witness = SimpleHypergraph(8, 3, [(x, a, p_), (a, y, q_), (x, b, u), (b, y, w)])
    v = contains_berge_theta(witness, 2, 2)
    assert v and {v.x, v.y} == {x, y}
    path = SimpleHypergraph(8, 3, [(x, a, p_), (a, y, q_)])
    assert not contains_berge_theta(path, 2, 2)
    assert not contains_berge_theta(SimpleHypergraph(8, 3), 2, 1)


def test_cleanup_trivial_cases():
    p = params("B", 3, [2], 3)
    out, cert = cleanup(SimpleHypergraph(9, 3), "B", p, 4)
    assert out.edge_count() == 0 and cert.certified and not cert.vertices_removed
    e = SimpleHypergraph(9, 3, [(0, 1, 2)])
    out, cert = cleanup(union([e, e]), "B", p, 4)
    assert out.edge_count() == 0 and cert.multi_edges_dropped == 1


@pytest.mark.parametrize(
    "model,r,inputs,q",
    [("A", 2, [2], 5), ("B", 3, [2], 3), ("C", 3, [2], 3)],
)
def test_cleanup_certifies_seeded_runs(model, r, inputs, q):
    p = params(model, r, inputs, q, h=2)
    g, _ = build_multi(p, field_of_order(q), 7)
    out, cert = cleanup(g, model, p, 4)
    assert cert.certified
    assert out.is_simple()
    assert len(cert.vertices_removed) == g.n - out.n
    if model == "A":
        assert count_complete_bipartite_r(out, 4, 2) == 0
    # survivors keep their edges: every output edge maps back to an input edge
    for vs in out.edge_sets():
        assert g.mult(tuple(out.labels[v] for v in vs)) == 1
