"""The ten acceptance checks, shared by ``verify`` and the test suite.

Each check returns a ``CriterionResult``; tolerances are standard errors
computed from the trials themselves.
"""
from __future__ import annotations

import itertools
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import analysis, lab
from .construct import build_multi, params
from .gf import field_of_order
from .hypergraph import MultiHypergraph
from .sympoly import evaluate_many, sample_symmetric

SEED = 20240611


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"[{mark}] {self.number:2d} {self.name} ({self.seconds:.1f}s): {info}"


def _fmt(v):
    return f"{v:.4g}" if isinstance(v, float) else str(v)


def _timed(number: int, name: str):
    def wrap(fn):
        def run(threads: int = 1) -> CriterionResult:
            t0 = time.perf_counter()
            passed, detail = fn(threads)
            return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - t0)

        run.number = number
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


@_timed(1, "exact vanishing probability equals q^-|U|")
def exact_vanishing(threads):
    rng = np.random.default_rng(SEED)
    cases = failures = 0
    for q in (11, 13):
        F = field_of_order(q)
        for i in range(25):
            size = 1 + i % 4
            U = lab.random_guarded_U(F, 2, 2, size, rng)
            res = lab.vanishing_prob_exact(F, 2, 2, 8, U, strict=True)
            cases += 1
            if not res.guards_hold or res.rank != size or res.probability != Fraction(1, q**size):
                failures += 1
    return failures == 0, {"cases": cases, "failures": failures}


@_timed(2, "Monte Carlo vanishing frequency near 1/25")
def monte_carlo_vanishing(threads):
    F = field_of_order(5)
    U = lab.random_guarded_U(F, 2, 2, 2, np.random.default_rng(SEED))
    exact = lab.vanishing_prob_exact(F, 2, 2, 8, U, strict=True).probability
    mc = lab.vanishing_prob_monte_carlo(F, 2, 2, 8, U, 100_000, SEED)
    p0 = float(exact)
    se = math.sqrt(p0 * (1 - p0) / mc["samples"])
    z = (mc["frequency"] - 1 / 25) / se
    return exact == Fraction(1, 25) and abs(z) <= 4, {"frequency": mc["frequency"], "z": z}


@_timed(3, "per-tuple edge rate matches the vanishing rate")
def edge_density(threads):
    detail, ok = {}, True
    runs = [("A", 2, [2], q) for q in (3, 5, 7)] + [("B", 3, [2], q) for q in (3, 5, 7)] + [("C", 3, [2], 3)]
    for model, r, inputs, q in runs:
        p = params(model, r, inputs, q, h=1)
        rep = lab.expectation_suite(p, field_of_order(q), 200, SEED, threads=threads)
        st = rep.aggregate()["layer_edge_rate"]
        target = lab.tuple_vanishing_rate(p)
        z = (st["mean"] - target) / st["stderr"] if st["stderr"] else math.inf
        detail[f"{model}{q}_z"] = z
        ok &= abs(z) <= 5
    return ok, detail


@_timed(4, "expected edges and multi-edges against formulas")
def expected_edges(threads):
    p = params("A", 2, [2], 5, h=2)
    rep = lab.expectation_suite(p, field_of_order(5), 200, SEED, threads=threads)
    agg = rep.aggregate()
    ref_edges = rep.references["expected_edges"]["value"]
    rel = abs(agg["edges"]["mean"] - ref_edges) / ref_edges
    multi = lab.multi_edge_check(rep)
    detail = {
        "mean_edges": agg["edges"]["mean"],
        "expected": ref_edges,
        "rel_err": rel,
        "mean_multi": multi["mean"],
        "multi_limit": multi["limit"],
    }
    return ref_edges == 120 and multi["bound"] == 12 and rel <= 0.05 and multi["ok"], detail


@_timed(5, "block-permutation symmetry of sampled polynomials")
def symmetry(threads):
    configs = [(7, 3, 2, 6), (4, 2, 2, 8), (9, 3, 1, 6), (5, 2, 1, 8)]
    rng = np.random.default_rng(SEED)
    violations = 0
    for i in range(1000):
        q, r, t, d = configs[i % len(configs)]
        F = field_of_order(q)
        f = sample_symmetric(F, r, t, d, rng)
        tuples = rng.integers(0, q, size=(100, r, t))
        perms = list(itertools.permutations(range(r)))
        batch = np.concatenate([tuples[:, list(pi), :] for pi in perms])
        vals = evaluate_many(f, batch).reshape(len(perms), 100)
        violations += int((vals != vals[0]).any(axis=0).sum())
    return violations == 0, {"polynomials": 1000, "violations": violations}


def random_multigraph(rng: np.random.Generator, n_max: int = 12, r: int = 3) -> MultiHypergraph:
    n = int(rng.integers(r + 1, n_max + 1))
    layers = int(rng.integers(1, 4))
    all_sets = list(itertools.combinations(range(n), r))
    edges = set()
    for k in range(layers):
        m = int(rng.integers(0, min(len(all_sets), 3 * n) + 1))
        for j in rng.choice(len(all_sets), size=m, replace=False):
            edges.add((k, all_sets[j]))
    return MultiHypergraph(n, r, layers, 0, frozenset(edges))


@_timed(6, "Berge path counts agree with naive enumeration")
def berge_oracle(threads):
    rng = np.random.default_rng(SEED)
    checks = mismatches = 0
    for _ in range(100):
        g = random_multigraph(rng)
        lmax = int(rng.integers(1, 4))
        for x, y in itertools.combinations(range(g.n), 2):
            checks += 1
            if analysis.berge_paths(g, x, y, lmax) != analysis.berge_paths_naive(g, x, y, lmax):
                mismatches += 1
    return mismatches == 0, {"pairs": checks, "mismatches": mismatches}


def _redetect(out, p, P) -> int:
    if p.model == "C":
        return len(analysis.bad_pairs(out, p.ell, P))
    return len(analysis.bad_sequences(out, p.model, p, P))


@_timed(7, "cleanup soundness and freeness certificates")
def cleanup_certificates(threads):
    P = 4
    runs = {"A": params("A", 2, [2], 5, h=2), "B": params("B", 3, [2], 3, h=2), "C": params("C", 3, [2], 3, h=2)}
    detail, ok = {}, True
    for name, p in runs.items():
        F = field_of_order(p.q)

        def one(i):
            g, _ = build_multi(p, F, lab.trial_seed(SEED, i))
            out, cert = analysis.cleanup(g, p.model, p, P, certify=True)
            return cert.certified and _redetect(out, p, P) == 0 and out.is_simple()

        good = sum(lab._map(one, range(20), threads))
        detail[f"{name}_certified"] = f"{good}/20"
        ok &= good == 20
    return ok, detail


@_timed(8, "post-cleanup edge scaling exponents")
def scaling(threads):
    a = lab.scaling_fit("A", 2, [2], [3, 5, 7, 11, 13], 1, 50, SEED, threads=threads)
    c = lab.scaling_fit("C", 3, [2], [3, 5, 7], 1, 200, SEED, threads=threads)
    detail = {"A_slope": a.slope, "A_target": a.target, "C_slope": c.slope, "C_target": c.target}
    return abs(a.slope - 1.5) <= 0.15 and abs(c.slope - 1.5) <= 0.2, detail


@_timed(9, "dichotomy probe report integrity at q=25")
def dichotomy(threads):
    p = params("A", 2, [2], 25, h=1)
    rep = lab.dichotomy_probe(p, field_of_order(25), 2000, SEED, threads=threads)
    total = sum(rep.histogram.values())
    populated = rep.small_cluster_max is not None and (rep.below_max is not None or rep.above_min is not None)
    detail = {
        "total": total,
        "small_cluster_max": rep.small_cluster_max,
        "below_max": rep.below_max,
        "above_min": rep.above_min,
        "middle_band_empty": rep.middle_band_empty,
    }
    return total == 2000 and populated and rep.cutoff == 12.5, detail


@_timed(10, "byte-identical outputs across runs and thread counts")
def determinism(threads):
    from .cli import main

    n = max(threads, 2)
    outs = {}
    with tempfile.TemporaryDirectory() as tmp:
        for tag, th in (("a", 1), ("b", 1), ("c", n)):
            hgr = os.path.join(tmp, f"g{tag}.hgr")
            rep = os.path.join(tmp, f"r{tag}.json")
            base = ["--model", "A", "--r", "2", "--s", "2", "--q", "5", "--h", "2", "--seed", "7", "--threads", str(th)]
            main(["construct", *base, "--out", hgr])
            main(["expect", *base, "--trials", "20", "--thresholds", "3", "--out", rep])
            with open(hgr, "rb") as fh1, open(rep, "rb") as fh2:
                outs[tag] = (fh1.read(), fh2.read())
    same = outs["a"] == outs["b"] == outs["c"]
    return same and len(outs["a"][0]) > 0, {"hgr_bytes": len(outs["a"][0]), "report_bytes": len(outs["a"][1])}


CRITERIA = [
    exact_vanishing,
    monte_carlo_vanishing,
    edge_density,
    expected_edges,
    symmetry,
    berge_oracle,
    cleanup_certificates,
    scaling,
    dichotomy,
    determinism,
]


def run_all(only=None, threads: int = 1) -> list[CriterionResult]:
    chosen = [c for c in CRITERIA if only is None or c.number in set(only)]
    return [c(threads) for c in chosen]
