"""Experiment harness: exact and sampled vanishing probabilities, expectation
suites, moments, the dichotomy probe, scaling fits and report files.

Every trial draws from its own seed, derived from the master seed and the
trial index, so results do not depend on thread count or scheduling.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import analysis
from .construct import (
    ModelParams,
    _build_c,
    build_multi,
    candidate_tuples,
    expected_edges,
    multi_edge_bound,
    params as make_params,
    poly_stream,
    tuple_vanishing_rate,
)
from .gf import FieldSpec, FqMatrix, enumerate_vectors, field_of_order, rank
from .hypergraph import multi_edges, union
from .sympoly import (
    ContractionCache,
    SymmetricPolynomial,
    evaluation_row,
    monomial_values,
    orbit_basis_cached,
    sample_symmetric,
)

TRIAL_TAG = 0x7121
SEQ_TAG = 0x5E9


class GuardViolation(UserWarning):
    pass


class RankDeficient(AssertionError):
    pass


class InsufficientPoints(ValueError):
    pass


def trial_seed(master_seed: int, i: int, tag: int = TRIAL_TAG) -> int:
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(tag, int(i)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _map(fn, items, threads: int):
    items = list(items)
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _stats(xs) -> dict:
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    if n == 0:
        return {"n": 0, "mean": None, "stderr": None}
    sd = float(xs.std(ddof=1)) if n > 1 else 0.0
    return {"n": n, "mean": float(xs.mean()), "stderr": sd / math.sqrt(n)}


# -- vanishing probability ---------------------------------------------------

def lemma_guards(q: int, d: int, U) -> dict:
    V = {tuple(int(x) for x in pt) for tup in U for pt in tup}
    checks = {
        "C(|U|,2) < q": math.comb(len(U), 2) < q,
        "C(|V|,2) < q": math.comb(len(V), 2) < q,
        "|U| <= d": len(U) <= d,
    }
    return checks


@dataclass
class VanishingResult:
    probability: Fraction
    rank: int
    size: int
    guards: dict
    guards_hold: bool


def _as_tuples(t: int, U) -> list[np.ndarray]:
    out = []
    for tup in U:
        arr = np.asarray(tup, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr[:, None] if t == 1 else arr[None, :]
        out.append(arr)
    return out


def _check_distinct(U) -> None:
    keys = [frozenset(tuple(int(x) for x in np.atleast_1d(pt)) for pt in tup) for tup in U]
    if len(set(keys)) != len(keys):
        raise ValueError("tuples in U must be distinct as unordered sets")


def vanishing_prob_exact(field: FieldSpec, r: int, t: int, d: int, U, strict: bool = False) -> VanishingResult:
    """P[f vanishes on every tuple of U] for f uniform in P_d, as q^-rank.

    The vanishing conditions are linear in the orbit coefficients, so the
    probability is exactly q^(-rank) of the stacked evaluation rows.
    """
    U = _as_tuples(t, U)
    _check_distinct(U)
    checks = lemma_guards(field.q, d, U)
    ok = all(checks.values())
    if U:
        rows = np.stack([evaluation_row(field, r, t, d, tup) for tup in U])
        rk = rank(FqMatrix.from_array(field, rows))
    else:
        rk = 0
    if not ok:
        msg = f"probability-lemma guards fail: {checks}"
        if strict:
            raise GuardViolation(msg)
        warnings.warn(msg, GuardViolation, stacklevel=2)
    elif rk != len(U):
        raise RankDeficient(f"rank {rk} != |U| = {len(U)} with guards satisfied")
    return VanishingResult(Fraction(1, field.q**rk), rk, len(U), checks, ok)


def _row_by_tensor(field: FieldSpec, r: int, t: int, d: int, tup) -> np.ndarray:
    """Orbit functional via the dense index tensor (independent of member masks)."""
    ob = orbit_basis_cached(r, t, d)
    mv = monomial_values(field, tup, t, d)
    outer = mv[0]
    for j in range(1, r):
        outer = field.mul(outer[..., None], mv[j].reshape((1,) * j + (-1,)))
    idx = ob.orbit_index_tensor().ravel()
    if field.k == 1:
        return (np.bincount(idx, weights=outer.ravel(), minlength=ob.n_orbits).astype(np.int64)) % field.p
    dig = field.digits[outer.ravel()]
    sums = np.stack([np.bincount(idx, weights=dig[:, i], minlength=ob.n_orbits) for i in range(field.k)], axis=1)
    return field.encode(sums.astype(np.int64))


def vanishing_prob_monte_carlo(
    field: FieldSpec, r: int, t: int, d: int, U, samples: int, seed: int, batch: int = 4096
) -> dict:
    """Fraction of sampled polynomials vanishing on all of U."""
    U = _as_tuples(t, U)
    ob = orbit_basis_cached(r, t, d)
    rows = np.stack([_row_by_tensor(field, r, t, d, tup) for tup in U]) if U else np.zeros((0, ob.n_orbits), np.int64)
    rng = np.random.default_rng(seed)
    hits, done = 0, 0
    while done < samples:
        b = min(batch, samples - done)
        coeffs = rng.integers(0, field.q, size=(b, ob.n_orbits), dtype=np.int64)
        if len(U):
            vals = field.matmul(coeffs, rows.T)
            hits += int(np.all(vals == 0, axis=1).sum())
        else:
            hits += b
        done += b
    freq = hits / samples
    return {"samples": samples, "hits": hits, "frequency": freq, "stderr": math.sqrt(max(freq * (1 - freq), 0) / samples)}


def random_guarded_U(field: FieldSpec, r: int, t: int, size: int, rng: np.random.Generator, max_points: int | None = None) -> list:
    """Random U of ``size`` distinct r-sets drawn from a small point pool so the
    lemma's guards hold whenever that is possible."""
    q = field.q
    if max_points is None:
        max_points = max(v for v in range(r, 64) if math.comb(v, 2) < q) if math.comb(r, 2) < q else r
    while math.comb(max_points, r) < size:
        max_points += 1
    pool = set()
    while len(pool) < max_points:
        pool.add(tuple(int(x) for x in rng.integers(0, q, size=t)))
    pool = sorted(pool)
    order = rng.permutation(len(pool))
    pool = [pool[i] for i in order]
    subsets = list(itertools.combinations(range(len(pool)), r))
    pick = rng.choice(len(subsets), size=size, replace=False)
    return [[list(pool[i]) for i in subsets[j]] for j in sorted(pick)]


# -- trial reports -------------------------------------------------------------

@dataclass
class TrialRecord:
    trial: int
    seed: int
    edges: int
    multi_edges: int
    layer_edges: list[int]
    bad_counts: dict = field(default_factory=dict)
    edges_after: int | None = None
    vertices_removed: int | None = None
    certified: bool | None = None
    certificate: dict | None = None


@dataclass
class TrialReport:
    model: str
    params: dict
    master_seed: int
    trials: int
    records: list[TrialRecord] = field(default_factory=list)
    references: dict = field(default_factory=dict)
    guards: dict = field(default_factory=dict)
    degree: dict = field(default_factory=dict)
    thresholds: list[int] = field(default_factory=list)
    cleanup_threshold: int | None = None

    def aggregate(self) -> dict:
        recs = self.records
        out = {
            "edges": _stats([r.edges for r in recs]),
            "multi_edges": _stats([r.multi_edges for r in recs]),
        }
        tuples = self.params.get("candidate_tuples")
        if tuples:
            rates = [e / tuples for r in recs for e in r.layer_edges]
            out["layer_edge_rate"] = _stats(rates)
        for P in self.thresholds:
            out[f"bad@{P}"] = _stats([r.bad_counts[str(P)] for r in recs])
        if self.cleanup_threshold is not None:
            out["edges_after"] = _stats([r.edges_after for r in recs])
            out["vertices_removed"] = _stats([r.vertices_removed for r in recs])
            out["certified"] = sum(1 for r in recs if r.certified)
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["aggregate"] = self.aggregate()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> TrialReport:
        data = dict(data)
        data.pop("aggregate", None)
        data["records"] = [TrialRecord(**r) for r in data.get("records", [])]
        return cls(**data)

    def csv_rows(self) -> tuple[list[str], list[list]]:
        head = ["trial", "seed", "edges", "multi_edges", "layer_edges"]
        head += [f"bad@{P}" for P in self.thresholds]
        head += ["edges_after", "vertices_removed", "certified"]
        rows = []
        for r in self.records:
            row = [r.trial, r.seed, r.edges, r.multi_edges, " ".join(map(str, r.layer_edges))]
            row += [r.bad_counts[str(P)] for P in self.thresholds]
            row += [_blank(r.edges_after), _blank(r.vertices_removed), _blank(r.certified)]
            rows.append(row)
        return head, rows


def _blank(x):
    return "" if x is None else x


def references(p: ModelParams) -> dict:
    if p.model == "C":
        edge_formula = "h*q^(l+1)"
        multi_formula = "N^r * sum_{i=2..h} C(h,i) q^(-i(l(r-1)-1))"
        rate_formula = "q^(1-l(r-1))"
    else:
        edge_formula = "(h/q)*C(N,r)"
        multi_formula = "C(N,r) * sum_{i=2..h} C(h,i) q^(-i)"
        rate_formula = "1/q"
    return {
        "expected_edges": {"value": expected_edges(p), "formula": edge_formula},
        "multi_edge_bound": {"value": multi_edge_bound(p), "formula": multi_formula},
        "tuple_edge_rate": {"value": tuple_vanishing_rate(p), "formula": rate_formula},
    }


def _params_echo(p: ModelParams) -> dict:
    d = p.to_dict()
    d["candidate_tuples"] = candidate_tuples(p)
    return d


def _bad_count(g, p: ModelParams, P: int) -> int:
    if p.model == "C":
        return len(analysis.bad_pairs(g, p.ell, P))
    return len(analysis.bad_sequences(g, p.model, p, P))


def _run_trial(p: ModelParams, field: FieldSpec, master_seed: int, i: int, thresholds, cleanup_threshold, certify) -> TrialRecord:
    seed = trial_seed(master_seed, i)
    g, bundle = build_multi(p, field, seed)
    rec = TrialRecord(
        trial=i,
        seed=seed,
        edges=g.edge_count(),
        multi_edges=len(multi_edges(g)),
        layer_edges=[layer.edge_count() for layer in bundle.layers],
        bad_counts={str(P): _bad_count(g, p, P) for P in thresholds},
    )
    if cleanup_threshold is not None:
        out, cert = analysis.cleanup(g, p.model, p, cleanup_threshold, certify=certify)
        rec.edges_after = out.edge_count()
        rec.vertices_removed = len(cert.vertices_removed)
        rec.certified = cert.certified
        rec.certificate = cert.to_dict()
    return rec


def expectation_suite(
    p: ModelParams,
    field: FieldSpec,
    trials: int,
    master_seed: int,
    thresholds=(),
    cleanup_threshold: int | None = None,
    certify: bool = False,
    threads: int = 1,
) -> TrialReport:
    """Independent build_multi runs against the analytic edge references."""
    thresholds = [int(P) for P in thresholds]
    run = lambda i: _run_trial(p, field, master_seed, i, thresholds, cleanup_threshold, certify)  # noqa: E731
    records = _map(run, range(trials), threads)
    return TrialReport(
        model=p.model,
        params=_params_echo(p),
        master_seed=int(master_seed),
        trials=trials,
        records=records,
        references=references(p),
        guards=dict(p.guards),
        degree={"d_used": p.d_used, "d_paper": p.d_paper, "reduced": p.degree_reduced},
        thresholds=thresholds,
        cleanup_threshold=cleanup_threshold,
    )


def multi_edge_check(report: TrialReport, slack_se: float = 3.0) -> dict:
    """Multi-edge mean against the analytic bound plus ``slack_se`` standard errors."""
    st = report.aggregate()["multi_edges"]
    bound = report.references["multi_edge_bound"]["value"]
    limit = bound + slack_se * (st["stderr"] or 0.0)
    return {"mean": st["mean"], "stderr": st["stderr"], "bound": bound, "limit": limit, "ok": st["mean"] <= limit}


# -- per-sequence completions straight from the polynomials --------------------

LayerSource = Callable[[int], list]


def _layer_polys(p: ModelParams, field: FieldSpec, seed: int, layer: int) -> list[SymmetricPolynomial]:
    return [sample_symmetric(field, p.r, p.dim, p.d_used, poly_stream(seed, p.model, layer, j)) for j in range(p.npolys)]


def _random_sequence(p: ModelParams, rng: np.random.Generator) -> list[int]:
    return [int(v) for v in rng.choice(p.n_vertices, size=p.seq_len, replace=False)]


def _canonical_sequence(p: ModelParams, seq: list[int]) -> list[int]:
    parts, pos = [], 0
    layout = list(p.inputs) if p.model == "A" else [p.r - 1] * p.t
    for size in layout:
        parts.append(sorted(seq[pos : pos + size]))
        pos += size
    return [v for part in parts for v in part]


def completion_vector(p: ModelParams, caches: list[ContractionCache], seq) -> np.ndarray:
    """For every candidate u, the product over required (r-1)-sets T of the
    number of layers whose polynomial vanishes at T + u (zero on the sequence)."""
    Ts = analysis.sequence_transversals(p, seq)
    total = np.ones(caches[0].n, dtype=np.int64)
    for T in Ts:
        mult = np.zeros(caches[0].n, dtype=np.int64)
        for cache in caches:
            mult += cache.last_values(0, tuple(T)) == 0
        total *= mult
    total[list(seq)] = 0
    return total


# -- moments -------------------------------------------------------------------

@dataclass
class MomentResult:
    model: str
    q: int
    exponent: int
    trials: int
    mean: float
    stderr: float
    values: list[int]

    def to_dict(self) -> dict:
        return asdict(self)


def moment_estimate(
    p: ModelParams,
    field: FieldSpec,
    exponent: int,
    trials: int,
    master_seed: int,
    layer_source: LayerSource | None = None,
    threads: int = 1,
) -> MomentResult:
    """Mean of completions**exponent for a random sequence (A, B) or of
    Berge path counts for a random pair (C), over fresh constructions.

    ``layer_source(trial)`` may supply the h layers' polynomial lists.
    """

    def one(i: int) -> int:
        seed = trial_seed(master_seed, i)
        rng = np.random.default_rng(trial_seed(master_seed, i, SEQ_TAG))
        if layer_source is None:
            layers = [_layer_polys(p, field, seed, k) for k in range(p.h)]
        else:
            layers = layer_source(i)
        if p.model == "C":
            g = union([_build_c(p, field, None, fs)[0] for fs in layers])
            x, y = (int(v) for v in rng.choice(p.n_vertices, size=2, replace=False))
            return analysis.berge_paths(g, x, y, p.ell)
        verts = enumerate_vectors(field, p.dim)
        caches = [ContractionCache(fs, verts) for fs in layers]
        seq = _canonical_sequence(p, _random_sequence(p, rng))
        return int(completion_vector(p, caches, seq).sum())

    values = _map(one, range(trials), threads)
    powered = [v**exponent for v in values]
    st = _stats(powered)
    return MomentResult(p.model, p.q, exponent, trials, st["mean"], st["stderr"], values)


def moment_trend(model: str, r: int, inputs, q_list, h: int, exponent: int, trials: int, master_seed: int, degree_override=None, threads: int = 1) -> list[MomentResult]:
    out = []
    for q in q_list:
        p = make_params(model, r, inputs, q, h, degree_override)
        out.append(moment_estimate(p, field_of_order(q), exponent, trials, master_seed, threads=threads))
    return out


# -- dichotomy probe -------------------------------------------------------------

@dataclass
class DichotomyHistogram:
    model: str
    params: dict
    master_seed: int
    trials: int
    histogram: dict  # str(|W|) -> frequency
    cutoff: float  # q/2
    small_cluster_max: int | None
    below_max: int | None
    above_min: int | None
    middle_band: list[int]
    middle_band_empty: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_rows(self):
        return ["size", "frequency"], [[int(k), v] for k, v in self.histogram.items()]


def summarize_dichotomy(values, q: int) -> dict:
    """Histogram plus gap fields.

    The small cluster is the longest run of consecutive observed values
    starting at the smallest one; the middle band holds observed values
    strictly between that run and q/2.
    """
    cutoff = q / 2
    counts: dict[int, int] = {}
    for v in values:
        counts[int(v)] = counts.get(int(v), 0) + 1
    keys = sorted(counts)
    below = [k for k in keys if k < cutoff]
    above = [k for k in keys if k >= cutoff]
    small = None
    if below:
        small = below[0]
        while small + 1 in counts and small + 1 < cutoff:
            small += 1
    band = [k for k in below if small is not None and k > small]
    return {
        "histogram": {str(k): counts[k] for k in keys},
        "cutoff": cutoff,
        "small_cluster_max": small,
        "below_max": below[-1] if below else None,
        "above_min": above[0] if above else None,
        "middle_band": band,
        "middle_band_empty": not band,
    }


def dichotomy_probe(
    p: ModelParams,
    field: FieldSpec,
    trials: int,
    master_seed: int,
    layer_source: LayerSource | None = None,
    threads: int = 1,
) -> DichotomyHistogram:
    """|W| for a random sequence within one layer, histogrammed over trials."""
    if p.model not in ("A", "B"):
        raise ValueError("the dichotomy probe covers models A and B")
    verts = enumerate_vectors(field, p.dim)

    def one(i: int) -> int:
        seed = trial_seed(master_seed, i)
        rng = np.random.default_rng(trial_seed(master_seed, i, SEQ_TAG))
        fs = _layer_polys(p, field, seed, 0) if layer_source is None else layer_source(i)[0]
        cache = ContractionCache(fs, verts)
        seq = _canonical_sequence(p, _random_sequence(p, rng))
        return int(completion_vector(p, [cache], seq).sum())

    values = _map(one, range(trials), threads)
    summary = summarize_dichotomy(values, field.q)
    return DichotomyHistogram(
        model=p.model, params=_params_echo(p), master_seed=int(master_seed), trials=trials, **summary
    )


# -- scaling -------------------------------------------------------------------

def degree_threshold(p: ModelParams) -> int:
    """p_deg * h^dim with p_deg = d^dim, the Bezout bound on isolated common
    zeros of dim polynomials of degree <= d in dim unknowns."""
    return p.d_used**p.dim * p.h**p.dim


@dataclass
class ScalingResult:
    model: str
    params: dict
    master_seed: int
    trials: int
    h: int
    threshold: int | None
    points: list[dict]
    slope: float
    intercept: float
    target: float

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_rows(self):
        head = ["q", "n", "mean_edges_after", "stderr", "threshold"]
        return head, [[pt["q"], pt["n"], pt["mean_edges_after"], pt["stderr"], pt["threshold"]] for pt in self.points]


def scaling_fit(
    model: str,
    r: int,
    inputs,
    q_list,
    h: int,
    trials: int,
    master_seed: int,
    threshold: int | None = None,
    degree_override: int | None = None,
    threads: int = 1,
) -> ScalingResult:
    """Least-squares slope of log(mean post-cleanup edges) against log(n).

    ``threshold`` defaults to ``degree_threshold`` at each q.
    """
    qs = sorted(set(int(q) for q in q_list))
    if len(qs) < 2:
        raise InsufficientPoints("need at least two field orders")
    points = []
    for q in qs:
        p = make_params(model, r, inputs, q, h, degree_override)
        P = degree_threshold(p) if threshold is None else threshold
        rep = expectation_suite(p, field_of_order(q), trials, master_seed, cleanup_threshold=P, threads=threads)
        st = rep.aggregate()["edges_after"]
        points.append({"q": q, "n": p.n_vertices, "mean_edges_after": st["mean"], "stderr": st["stderr"], "threshold": P})
    xs = np.log([pt["n"] for pt in points])
    means = [pt["mean_edges_after"] for pt in points]
    if min(means) <= 0:
        raise InsufficientPoints("a field order produced no surviving edges")
    slope, intercept = np.polyfit(xs, np.log(means), 1)
    p0 = make_params(model, r, inputs, qs[0], h, degree_override)
    return ScalingResult(
        model=model.upper(),
        params={"r": r, "inputs": list(p0.inputs), "q_list": qs, "d_used": p0.d_used, "d_paper": p0.d_paper},
        master_seed=int(master_seed),
        trials=trials,
        h=h,
        threshold=threshold,
        points=points,
        slope=float(slope),
        intercept=float(intercept),
        target=p0.target_exponent,
    )


# -- report files ----------------------------------------------------------------

def report_json(report) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def report_csv(report) -> str:
    head, rows = report.csv_rows()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    w.writerows(rows)
    return buf.getvalue()


def emit_report(report, fmt: str, path) -> None:
    if fmt == "json":
        text = report_json(report)
    elif fmt == "csv":
        text = report_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_report(path) -> TrialReport:
    with open(path, encoding="utf-8") as fh:
        return TrialReport.from_dict(json.load(fh))
