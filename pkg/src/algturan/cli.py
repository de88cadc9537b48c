"""Command-line entry point: ``python -m algturan <command> [flags]``.

Settings come from an optional key=value config file (``--config``) with
command-line flags taking precedence.  Exit codes: 0 pass, 1 acceptance
failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, fields

import numpy as np

from . import analysis, lab
from .construct import BadInputs, InfeasibleSize, build_multi, params
from .gf import field_of_order
from .hypergraph import read_hgr, serialize, write_hgr

COMMANDS = ("construct", "analyze", "lemma22", "dichotomy", "moments", "expect", "scaling", "verify")


class ConfigError(ValueError):
    def __init__(self, name: str, msg: str):
        super().__init__(f"config field {name!r}: {msg}")
        self.name = name


@dataclass
class RunConfig:
    """All knobs of a run.  ``s`` (model A part sizes), ``t`` (model B and
    lemma22) and ``l`` (model C) supply the model inputs."""

    model: str | None = None
    r: int = 2
    s: tuple[int, ...] | None = None
    t: int = 2
    l: int = 2  # noqa: E741
    q: int | None = None
    h: int = 1
    degree_override: int | None = None
    d: int = 8
    usize: int = 2
    samples: int = 100_000
    thresholds: tuple[int, ...] = ()
    threshold: int = 4
    certify: bool = True
    exponent: int = 1
    q_list: tuple[int, ...] = ()
    trials: int = 100
    seed: int = 0
    threads: int = 1
    strict: bool = False
    format: str = "json"
    out: str | None = None
    input: str | None = None
    only: tuple[int, ...] = ()

    def inputs(self) -> tuple[int, ...]:
        if self.model is None:
            raise ConfigError("model", "required")
        m = self.model.upper()
        if m == "A":
            if self.s is None:
                raise ConfigError("s", "model A needs part sizes")
            return tuple(self.s)
        return (self.t,) if m == "B" else (self.l,)

    def model_params(self, q: int | None = None):
        if self.q is None and q is None:
            raise ConfigError("q", "required")
        return params(self.model, self.r, self.inputs(), self.q if q is None else q, self.h, self.degree_override)


_KINDS = {
    "model": "str", "r": "int", "s": "ints", "t": "int", "l": "int", "q": "int", "h": "int",
    "degree_override": "int?", "d": "int", "usize": "int", "samples": "int", "thresholds": "ints",
    "threshold": "int", "certify": "bool", "exponent": "int", "q_list": "ints", "trials": "int",
    "seed": "int", "threads": "int", "strict": "bool", "format": "str", "out": "str?",
    "input": "str?", "only": "ints",
}
_OPTIONAL = {"model", "s", "q"}


def _parse_value(name: str, raw: str):
    kind = _KINDS[name]
    raw = raw.strip()
    if raw == "" and (kind.endswith("?") or name in _OPTIONAL):
        return None
    try:
        if kind.startswith("int") and kind != "ints":
            return int(raw)
        if kind == "ints":
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if kind == "bool":
            if raw.lower() in ("1", "true", "yes"):
                return True
            if raw.lower() in ("0", "false", "no"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return raw
    except ValueError as exc:
        raise ConfigError(name, str(exc)) from None


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(x) for x in value)
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    return "".join(f"{f.name}={_format_value(getattr(cfg, f.name))}\n" for f in fields(cfg))


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected key=value")
        key, raw = (x.strip() for x in line.split("=", 1))
        if key not in _KINDS:
            raise ConfigError(key, "unknown field")
        values[key] = _parse_value(key, raw)
    return RunConfig(**values)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="algturan", description="Random algebraic hypergraph lab.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="key=value config file; flags override it")
    for name in _KINDS:
        flag = "--" + name.replace("_", "-")
        ap.add_argument(flag, dest=name, default=None, help=f"{name} ({_KINDS[name]})")
    return ap


def resolve(argv) -> tuple[str, RunConfig]:
    ns = _parser().parse_args(argv)
    cfg = RunConfig()
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                cfg = parse_config(fh.read())
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
    for name in _KINDS:
        raw = getattr(ns, name)
        if raw is not None:
            setattr(cfg, name, _parse_value(name, raw))
    if cfg.format not in ("json", "csv"):
        raise ConfigError("format", "must be json or csv")
    if cfg.threads < 1:
        raise ConfigError("threads", "must be >= 1")
    return ns.command, cfg


def _emit_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _emit(report, cfg: RunConfig) -> None:
    text = lab.report_json(report) if cfg.format == "json" else lab.report_csv(report)
    _emit_text(text, cfg.out)


def cmd_construct(cfg: RunConfig) -> int:
    p = cfg.model_params()
    g, _ = build_multi(p, field_of_order(p.q), cfg.seed, cfg.threads)
    if cfg.out is None:
        sys.stdout.write(serialize(g))
    else:
        write_hgr(g, cfg.out)
    return 0


def cmd_analyze(cfg: RunConfig) -> int:
    p = cfg.model_params()
    g = read_hgr(cfg.input) if cfg.input else build_multi(p, field_of_order(p.q), cfg.seed, cfg.threads)[0]
    cleaned, cert = analysis.cleanup(g, p.model, p, cfg.threshold, certify=cfg.certify)
    doc = {"params": p.to_dict(), "seed": cfg.seed, "certificate": cert.to_dict(), "graph": serialize(cleaned)}
    _emit_text(json.dumps(doc, indent=2) + "\n", cfg.out)
    return 0 if cert.certified or not cfg.certify else 1


def cmd_lemma22(cfg: RunConfig) -> int:
    field = field_of_order(cfg.q)
    rng = np.random.default_rng(cfg.seed)
    U = lab.random_guarded_U(field, cfg.r, cfg.t, cfg.usize, rng)
    exact = lab.vanishing_prob_exact(field, cfg.r, cfg.t, cfg.d, U, strict=cfg.strict)
    mc = lab.vanishing_prob_monte_carlo(field, cfg.r, cfg.t, cfg.d, U, cfg.samples, lab.trial_seed(cfg.seed, 0))
    doc = {
        "q": cfg.q, "r": cfg.r, "t": cfg.t, "d": cfg.d, "U": U,
        "rank": exact.rank, "exact": str(exact.probability), "exact_power": f"{cfg.q}^-{exact.rank}",
        "guards": exact.guards, "guards_hold": exact.guards_hold, "monte_carlo": mc,
    }
    if cfg.out is not None:
        _emit_text(json.dumps(doc, indent=2) + "\n", cfg.out)
    print(f"exact P = {cfg.q}^-{exact.rank} = {exact.probability}")
    print(f"monte carlo {mc['frequency']:.6f} +- {mc['stderr']:.6f} over {mc['samples']} samples")
    return 0


def cmd_dichotomy(cfg: RunConfig) -> int:
    p = cfg.model_params()
    _emit(lab.dichotomy_probe(p, field_of_order(p.q), cfg.trials, cfg.seed, threads=cfg.threads), cfg)
    return 0


def cmd_moments(cfg: RunConfig) -> int:
    qs = cfg.q_list or (cfg.q,)
    res = lab.moment_trend(cfg.model, cfg.r, cfg.inputs(), qs, cfg.h, cfg.exponent, cfg.trials, cfg.seed, cfg.degree_override, cfg.threads)
    if cfg.format == "json":
        _emit_text(json.dumps([m.to_dict() for m in res], indent=2) + "\n", cfg.out)
    else:
        lines = ["q,exponent,trials,mean,stderr"] + [f"{m.q},{m.exponent},{m.trials},{m.mean!r},{m.stderr!r}" for m in res]
        _emit_text("\n".join(lines) + "\n", cfg.out)
    return 0


def cmd_expect(cfg: RunConfig) -> int:
    p = cfg.model_params()
    rep = lab.expectation_suite(
        p, field_of_order(p.q), cfg.trials, cfg.seed, thresholds=cfg.thresholds, threads=cfg.threads
    )
    _emit(rep, cfg)
    return 0


def cmd_scaling(cfg: RunConfig) -> int:
    res = lab.scaling_fit(cfg.model, cfg.r, cfg.inputs(), cfg.q_list, cfg.h, cfg.trials, cfg.seed, degree_override=cfg.degree_override, threads=cfg.threads)
    _emit(res, cfg)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    from . import acceptance

    results = acceptance.run_all(only=cfg.only or None, threads=cfg.threads)
    for res in results:
        print(res.line(), flush=True)
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    try:
        command, cfg = resolve(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    handler = globals()["cmd_" + command]
    try:
        with warnings.catch_warnings():
            if cfg.strict:
                warnings.simplefilter("error", lab.GuardViolation)
            return handler(cfg)
    except (ConfigError, BadInputs, InfeasibleSize, lab.InsufficientPoints, lab.GuardViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
