"""Random algebraic hypergraph models A, B, C and their h-layer unions.

Model A (complete r-partite target):  vertices F_q^b, b = prod(s_i),
    edge {v_1..v_r} iff f(v_1..v_r) = 0 with f uniform in P_d, d = b*s.
Model B (complete bipartite target):  vertices F_q^t, d = m*t,
    m = (r-1)t^2 - t + 2.
Model C (Berge theta target): r copies of F_q^l, d = r*l^2, and a
    transversal tuple is an edge iff l(r-1)-1 independent polynomials vanish.

Randomness: each polynomial draws from its own generator, seeded by
``SeedSequence(master_seed, spawn_key=(model_tag, layer, poly))``, so a
layer's polynomials never depend on how many other layers were built or in
which order.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import gf
from .gf import FieldSpec, enumerate_vectors
from .hypergraph import MultiHypergraph, SimpleHypergraph, union
from .sympoly import (
    SymmetricPolynomial,
    basis_size,
    build_cache,
    orbit_count,
    sample_symmetric,
)

MODEL_TAGS = {"A": 1, "B": 2, "C": 3}
# ordered r-tuple evaluation table, and dense coefficient tensor, size caps
MAX_TABLE = 1 << 24
MAX_TENSOR = 1 << 25


class InfeasibleSize(ValueError):
    pass


class BadInputs(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    model: str
    r: int
    inputs: tuple[int, ...]
    q: int
    h: int
    dim: int  # coordinates per vertex: b, t or l
    d_paper: int
    d_used: int
    npolys: int
    N: int  # vertices per copy of F_q^dim
    n_vertices: int
    b: int | None = None
    t_sum: int | None = None
    s: int | None = None
    m: int | None = None
    ell: int | None = None
    t: int | None = None
    degree_reduced: bool = False
    guards: dict = field(default_factory=dict, compare=False)

    @property
    def seq_len(self) -> int:
        """Vertices in a bad sequence (A, B) or 2 for a pair (C)."""
        if self.model == "A":
            return self.t_sum
        if self.model == "B":
            return self.t * (self.r - 1)
        return 2

    @property
    def target_exponent(self) -> float:
        if self.model == "A":
            return self.r - 1 / self.b
        if self.model == "B":
            return self.r - 1 / self.t
        return 1 + 1 / self.ell

    def to_dict(self) -> dict:
        out = asdict(self)
        out["inputs"] = list(self.inputs)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> ModelParams:
        data = dict(data)
        data["inputs"] = tuple(data["inputs"])
        return cls(**data)


def params(model: str, r: int, inputs, q: int, h: int = 1, degree_override: int | None = None) -> ModelParams:
    """Derived construction parameters; ``degree_override`` selects reduced-degree mode."""
    model = model.upper()
    inputs = tuple(int(x) for x in (inputs if np.iterable(inputs) else (inputs,)))
    if model not in MODEL_TAGS:
        raise BadInputs(f"unknown model {model!r}")
    if r < 2:
        raise BadInputs("r must be >= 2")
    if h < 1:
        raise BadInputs("h must be >= 1")
    try:
        gf.field_of_order(q)
    except ValueError as exc:
        raise BadInputs(str(exc)) from None
    extra: dict = {}
    if model == "A":
        if len(inputs) != r - 1 or min(inputs) < 1:
            raise BadInputs(f"model A needs r-1={r - 1} positive part sizes")
        b = math.prod(inputs)
        t_sum = sum(inputs)
        s = b * (t_sum - 1) + 2
        d_paper = b * s
        dim, npolys = b, 1
        extra = dict(b=b, t_sum=t_sum, s=s)
        N = q**b
        n_vertices = N
    elif model == "B":
        if len(inputs) != 1 or inputs[0] < 1:
            raise BadInputs("model B needs one positive t")
        t = inputs[0]
        m = (r - 1) * t * t - t + 2
        d_paper = m * t
        dim, npolys = t, 1
        extra = dict(m=m, t=t)
        N = q**t
        n_vertices = N
    else:
        if len(inputs) != 1 or inputs[0] < 1:
            raise BadInputs("model C needs one positive l")
        ell = inputs[0]
        npolys = ell * (r - 1) - 1
        if npolys < 1:
            raise BadInputs("model C needs l(r-1) >= 2")
        d_paper = r * ell * ell
        dim = ell
        extra = dict(ell=ell)
        N = q**ell
        n_vertices = r * N
    d_used = d_paper if degree_override is None else int(degree_override)
    if d_used < 0:
        raise BadInputs("degree must be >= 0")
    p = ModelParams(
        model=model,
        r=r,
        inputs=inputs,
        q=q,
        h=h,
        dim=dim,
        d_paper=d_paper,
        d_used=d_used,
        npolys=npolys,
        N=N,
        n_vertices=n_vertices,
        degree_reduced=degree_override is not None and d_used != d_paper,
        **extra,
    )
    object.__setattr__(p, "guards", feasibility(p))
    if degree_override is None and not p.guards["feasible"]:
        raise InfeasibleSize(f"{p.guards['reason']}; pass degree_override for reduced-degree mode")
    return p


def feasibility(p: ModelParams) -> dict:
    M = basis_size(p.dim, p.d_used)
    reason = ""
    if p.N > gf.MAX_VECTORS:
        reason = f"N={p.N} vertices exceeds {gf.MAX_VECTORS}"
    elif p.N**p.r > MAX_TABLE:
        reason = f"N^r={p.N ** p.r} tuples exceeds {MAX_TABLE}"
    elif M**p.r > MAX_TENSOR:
        reason = f"coefficient tensor {M}^{p.r} exceeds {MAX_TENSOR}"
    elif orbit_count(p.r, p.dim, p.d_used) > (1 << 22):
        reason = "too many orbits"
    out = {"feasible": not reason, "reason": reason, "basis": M, "orbits": orbit_count(p.r, p.dim, p.d_used)}
    out.update(pattern_guards(p))
    return out


def pattern_guards(p: ModelParams) -> dict:
    """Whether the probability-lemma hypotheses hold for one base pattern.

    The pattern is the copy of T (A), of R (B) or a longest Berge path (C):
    U is its edge set and V its vertex set.
    """
    if p.model == "A":
        n_edges, n_verts = p.b, p.t_sum + 1
    elif p.model == "B":
        n_edges, n_verts = p.t, p.t * (p.r - 1) + 1
    else:
        n_edges, n_verts = p.ell, p.ell * (p.r - 1) + 1
    checks = {
        "C(|U|,2) < q": math.comb(n_edges, 2) < p.q,
        "C(|V|,2) < q": math.comb(n_verts, 2) < p.q,
        "|U| <= d": n_edges <= p.d_used,
    }
    return {"lemma_guards": checks, "lemma_guards_hold": all(checks.values())}


def _check(p: ModelParams, field: FieldSpec, model: str) -> None:
    if p.model != model:
        raise BadInputs(f"expected model {model} params, got {p.model}")
    if field.q != p.q:
        raise BadInputs(f"field order {field.q} != params q={p.q}")
    if not p.guards.get("feasible", True):
        raise InfeasibleSize(p.guards["reason"])


def poly_stream(master_seed: int, model: str, layer: int, poly: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(MODEL_TAGS[model], layer, poly))
    return np.random.Generator(np.random.PCG64(ss))


def _sample_polys(p: ModelParams, field: FieldSpec, stream, polys) -> list[SymmetricPolynomial]:
    if polys is not None:
        polys = list(polys)
        if len(polys) != p.npolys:
            raise BadInputs(f"need {p.npolys} polynomials")
        return polys
    streams = stream if isinstance(stream, (list, tuple)) else [stream] * p.npolys
    return [sample_symmetric(field, p.r, p.dim, p.d_used, s) for s in streams]


def _increasing_zeros(table: np.ndarray) -> np.ndarray:
    """Strictly increasing index tuples where ``table`` vanishes."""
    idx = np.argwhere(table == 0)
    if len(idx) == 0:
        return idx
    ok = np.all(idx[:, 1:] > idx[:, :-1], axis=1)
    return idx[ok]


def _build_symmetric_layer(p: ModelParams, field: FieldSpec, stream, polys) -> tuple[SimpleHypergraph, list]:
    fs = _sample_polys(p, field, stream, polys)
    verts = enumerate_vectors(field, p.dim)
    table = build_cache(fs, verts).full_table(0)
    sets = _increasing_zeros(table)
    return SimpleHypergraph(p.N, p.r, [tuple(int(v) for v in row) for row in sets]), fs


def build_layer_a(p: ModelParams, field: FieldSpec, stream=None, polys=None) -> SimpleHypergraph:
    """One model A layer: r-subsets of F_q^b on which f vanishes."""
    _check(p, field, "A")
    return _build_symmetric_layer(p, field, stream, polys)[0]


def build_layer_b(p: ModelParams, field: FieldSpec, stream=None, polys=None) -> SimpleHypergraph:
    """One model B layer: r-subsets of F_q^t on which f vanishes."""
    _check(p, field, "B")
    return _build_symmetric_layer(p, field, stream, polys)[0]


def _build_c(p: ModelParams, field: FieldSpec, stream, polys) -> tuple[SimpleHypergraph, list]:
    fs = _sample_polys(p, field, stream, polys)
    verts = enumerate_vectors(field, p.dim)
    cache = build_cache(fs, verts)
    alive = None
    for i in range(len(fs)):
        zero = cache.full_table(i) == 0
        alive = zero if alive is None else alive & zero
        if not alive.any():
            break
    idx = np.argwhere(alive)
    offsets = np.arange(p.r) * p.N
    sets = [tuple(int(v) for v in row + offsets) for row in idx]
    return SimpleHypergraph(p.r * p.N, p.r, sets, partite=p.r), fs


def build_layer_c(p: ModelParams, field: FieldSpec, stream=None, polys=None) -> SimpleHypergraph:
    """One model C layer: transversal tuples where all polynomials vanish.

    Part i holds vertex ids [i*N, (i+1)*N), vertex i*N + j being vector j.
    """
    _check(p, field, "C")
    return _build_c(p, field, stream, polys)[0]


@dataclass
class LayerBundle:
    polys: list[list[SymmetricPolynomial]]
    layers: list[SimpleHypergraph]
    stream_ids: list[list[tuple[int, ...]]]


def _layer(p: ModelParams, field: FieldSpec, master_seed: int, k: int):
    streams = [poly_stream(master_seed, p.model, k, j) for j in range(p.npolys)]
    ids = [(MODEL_TAGS[p.model], k, j) for j in range(p.npolys)]
    if p.model == "C":
        g, fs = _build_c(p, field, streams, None)
    else:
        g, fs = _build_symmetric_layer(p, field, streams, None)
    return g, fs, ids


def build_multi(p: ModelParams, field: FieldSpec, master_seed: int, threads: int = 1) -> tuple[MultiHypergraph, LayerBundle]:
    """Union of p.h independently seeded layers."""
    _check(p, field, p.model)
    run = lambda k: _layer(p, field, master_seed, k)  # noqa: E731
    if threads > 1 and p.h > 1:
        with ThreadPoolExecutor(threads) as ex:
            out = list(ex.map(run, range(p.h)))
    else:
        out = [run(k) for k in range(p.h)]
    layers = [g for g, _, _ in out]
    bundle = LayerBundle([fs for _, fs, _ in out], layers, [ids for _, _, ids in out])
    return union(layers), bundle


def expected_edges(p: ModelParams) -> float:
    if p.model == "C":
        return p.h * p.q ** (p.ell + 1)
    return p.h / p.q * math.comb(p.N, p.r)


def multi_edge_bound(p: ModelParams) -> float:
    if p.model == "C":
        per = p.q ** -(p.ell * (p.r - 1) - 1)
        return p.N**p.r * sum(math.comb(p.h, i) * per**i for i in range(2, p.h + 1))
    return math.comb(p.N, p.r) * sum(math.comb(p.h, i) * p.q**-i for i in range(2, p.h + 1))


def tuple_vanishing_rate(p: ModelParams) -> float:
    """Probability that a fixed candidate tuple is an edge of one layer."""
    if p.model == "C":
        return p.q ** -(p.ell * (p.r - 1) - 1)
    return 1 / p.q


def candidate_tuples(p: ModelParams) -> int:
    return p.N**p.r if p.model == "C" else math.comb(p.N, p.r)

