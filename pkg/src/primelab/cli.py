"""Reproducible experiment runner.

Every experiment is a subcommand taking parameters from an optional JSON
config file plus command-line overrides; unknown keys are rejected by name.
Runs emit a JSON report (deterministic record + timestamp footer) and CSV
series where tabular output makes sense.  Exit code 0 means every check in
the run passed, 1 means a check failed, 2 means the configuration was
invalid.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import sympy

from . import arith, cyclic, envelope, gowers, progsearch, singular
from .errors import ConfigError
from .poly import IntPoly
from .reports import CheckResult, Report, write_csv
from .rng import stream

REQUIRED = object()

# Desk-scale default tolerance for "tends to 1" style checks.
DEFAULT_SOFT_TOLERANCE = 0.3


def parse_poly(text: str, nvars: int) -> IntPoly:
    """Parse an integer polynomial in h1..h<nvars> and W."""
    names = [f"h{i + 1}" for i in range(nvars)]
    syms = sympy.symbols(names + ["W"], integer=True)
    local = dict(zip(names + ["W"], syms))
    if nvars == 1:
        local.setdefault("h", syms[0])
        local.setdefault("m", syms[0])
    try:
        expr = sympy.sympify(text, locals=local, rational=False)
        poly = sympy.Poly(expr, *syms)
    except (sympy.SympifyError, sympy.PolynomialError) as exc:
        raise ConfigError(f"cannot parse polynomial {text!r}: {exc}") from None
    terms = {}
    for exps, coeff in poly.terms():
        if not coeff.is_integer:
            raise ConfigError(f"polynomial {text!r} has non-integer coefficient {coeff}")
        terms[tuple(int(e) for e in exps)] = int(coeff)
    return IntPoly.from_terms(terms, nvars)


SCHEMAS: dict[str, dict[str, tuple[Callable, Any]]] = {
    "sieve-mean": {
        "N_prime": (int, REQUIRED),
        "w": (int, 5),
        "eps0": (float, 0.1),
        "b": (int, 1),
        "cutoff": (str, "cosine"),
    },
    "shifted-product": {
        "N_prime": (int, REQUIRED),
        "w": (int, 5),
        "eps0": (float, 0.1),
        "b": (int, 1),
        "cutoff": (str, "cosine"),
        "shifts": (list, REQUIRED),
    },
    "forms-condition": {
        "N_prime": (int, REQUIRED),
        "w": (int, 3),
        "eps0": (float, 0.5),
        "b": (int, 1),
        "cutoff": (str, "tent"),
        "polys": (list, REQUIRED),
        "t": (int, 1),
        "box": (list, REQUIRED),
        "samples": (int, 10**4),
        "fine_scale": (int, 16),
        "coarse_scale": (int, None),
    },
    "gowers-norm": {
        "input": (str, "sieve-deviation"),
        "N": (int, None),
        "N_prime": (int, None),
        "w": (int, 5),
        "eps0": (float, 0.1),
        "b": (int, 1),
        "cutoff": (str, "cosine"),
        "directions": (list, REQUIRED),
        "scale": (int, REQUIRED),
    },
    "avg-gowers-norm": {
        "input": (str, "sieve-deviation"),
        "N": (int, None),
        "N_prime": (int, None),
        "w": (int, 5),
        "eps0": (float, 0.1),
        "b": (int, 1),
        "cutoff": (str, "cosine"),
        "polys": (list, REQUIRED),
        "t": (int, 1),
        "H": (int, REQUIRED),
        "scale": (int, REQUIRED),
        "W": (int, None),
    },
    "dual": {
        "N": (int, REQUIRED),
        "polys": (list, REQUIRED),
        "t": (int, 1),
        "H": (int, REQUIRED),
        "scale": (int, REQUIRED),
        "W": (int, 1),
    },
    "duality-check": {
        "N": (int, 64),
        "polys": (list, ["h1", "2*h1 + 1"]),
        "t": (int, 1),
        "H": (int, 3),
        "scale": (int, 3),
        "W": (int, 1),
        "count": (int, 50),
    },
    "dual-square-check": {
        "N": (int, 32),
        "polys": (list, ["h1", "2*h1"]),
        "t": (int, 1),
        "H": (int, 2),
        "scale": (int, 2),
        "W": (int, 1),
        "count": (int, 20),
    },
    "gcs-suite": {
        "N": (int, 64),
        "d": (int, 2),
        "max_scale": (int, 4),
        "max_direction": (int, 8),
        "count": (int, 1000),
    },
    "lambda": {
        "N": (int, 64),
        "k": (int, 3),
        "polys": (list, None),
        "W": (int, 1),
        "M": (int, 16),
        "input": (str, "random"),
    },
    "singular": {
        "k": (int, REQUIRED),
        "r": (int, REQUIRED),
        "cutoff_prime": (int, 10**6),
    },
    "singular-sum": {
        "k": (int, REQUIRED),
        "M": (int, REQUIRED),
        "cutoff_prime": (int, 10**6),
    },
    "narrowless": {
        "N": (int, REQUIRED),
        "k": (int, 3),
        "eps": (float, 0.05),
    },
    "cramer": {
        "N": (int, 10**5),
        "k": (int, 3),
        "C": (float, 20.0),
        "delta": (float, 0.5),
        "trials": (int, 10),
        "adversaries": (list, ["greedy", "random", "concentrated"]),
    },
    "find-prog": {
        "N": (int, REQUIRED),
        "set": (str, "primes"),
        "k": (int, 3),
        "polys": (list, None),
        "r_max": (int, REQUIRED),
        "limit": (int, None),
    },
    "min-step": {
        "N": (int, REQUIRED),
        "set": (str, "primes"),
        "k": (int, 3),
        "polys": (list, None),
        "r_max": (int, REQUIRED),
    },
    "preset": {
        "name": (str, "paper-regime"),
        "N_prime": (int, REQUIRED),
        "L": (float, 4.0),
        "eps0": (float, 0.1),
    },
}


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    tolerance: float | None = None
    mode: str = "exact"
    budget: int | None = None

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in SCHEMAS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        schema = SCHEMAS[self.experiment]
        for key in self.params:
            if key not in schema:
                raise ConfigError(
                    f"unknown parameter {key!r} for experiment {self.experiment!r}"
                )
        merged = {}
        for key, (cast, default) in schema.items():
            if key in self.params and self.params[key] is not None:
                try:
                    merged[key] = cast(self.params[key])
                except (TypeError, ValueError):
                    raise ConfigError(
                        f"parameter {key!r} has invalid value {self.params[key]!r}"
                    ) from None
            elif default is REQUIRED:
                raise ConfigError(
                    f"experiment {self.experiment!r} requires parameter {key!r}"
                )
            else:
                merged[key] = default
        self.params = merged
        if self.mode not in ("exact", "sampled"):
            raise ConfigError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.mode == "sampled" and (self.budget is None or self.budget < 1):
            raise ConfigError("sampled mode requires a positive budget")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        return self

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        allowed = {"experiment", "params", "seed", "out", "tolerance", "mode", "budget"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in data:
            raise ConfigError("config missing key 'experiment'")
        return cls(
            experiment=data["experiment"],
            params=dict(data.get("params", {})),
            seed=int(data.get("seed", 0)),
            out=data.get("out"),
            tolerance=data.get("tolerance"),
            mode=data.get("mode", "exact"),
            budget=data.get("budget"),
        ).validate()


def _cutoff(name: str) -> envelope.CutoffFn:
    if name == "cosine":
        return envelope.default_cutoff()
    if name == "tent":
        return envelope.tent_cutoff()
    raise ConfigError(f"unknown cutoff {name!r} (expected 'cosine' or 'tent')")


def _sieve_from(params: dict[str, Any]) -> envelope.EnvelopeSieve:
    cfg = cyclic.SieveConfig.create(
        params["N_prime"], params["w"], params["b"], params["eps0"]
    )
    mob = arith.mobius_table(max(cfg.R, 2))
    return envelope.build_sieve(cfg, _cutoff(params["cutoff"]), mob)


def _input_function(config: ExperimentConfig) -> cyclic.CyclicFn:
    p = config.params
    kind = p["input"]
    if kind in ("sieve-deviation", "sieve"):
        if p.get("N_prime") is None:
            raise ConfigError(f"input {kind!r} requires N_prime")
        sv = _sieve_from(p)
        return sv.values - 1.0 if kind == "sieve-deviation" else sv.values
    if p.get("N") is None:
        raise ConfigError(f"input {kind!r} requires N")
    N = p["N"]
    if kind == "indicator":
        table = arith.sieve_primes(max(N, 4))
        vals = table.bitset(N - 1).astype(np.float64)
        return cyclic.CyclicFn(N, vals[:N])
    if kind == "random":
        gen = stream(config.seed, "input-random")
        return cyclic.CyclicFn(N, gen.uniform(-1.0, 1.0, N))
    raise ConfigError(f"unknown input {kind!r}")


def _tol(config: ExperimentConfig, default: float) -> float:
    return default if config.tolerance is None else config.tolerance


def _family(params: dict[str, Any], W: int, scale_key: str = "scale") -> gowers.DirectionFamily:
    t = params["t"]
    polys = tuple(parse_poly(s, t) for s in params["polys"])
    return gowers.DirectionFamily(t, polys, params["H"], W, params[scale_key])


def run(config: ExperimentConfig) -> Report:
    """Dispatch a validated config to its experiment and build the report."""
    runner = _RUNNERS[config.experiment]
    results, checks, tables = runner(config)
    report = Report(config.to_dict(), results, checks)
    if config.out:
        out = Path(config.out)
        report.write(out / f"{config.experiment}.json")
        for name, (header, rows) in tables.items():
            write_csv(out / name, header, rows)
    return report


def _run_sieve_mean(config: ExperimentConfig):
    sv = _sieve_from(config.params)
    mean = sv.values.mean()
    tol = _tol(config, DEFAULT_SOFT_TOLERANCE)
    results = {
        "mean": mean,
        "deviation": abs(mean - 1.0),
        "R": sv.cfg.R,
        "N": sv.cfg.N,
        "W": sv.cfg.W,
    }
    checks = [CheckResult("mean-within-tolerance", abs(mean - 1.0) <= tol, mean, tol)]
    return results, checks, {}


def _run_shifted_product(config: ExperimentConfig):
    sv = _sieve_from(config.params)
    shifts = [int(h) for h in config.params["shifts"]]
    value = envelope.shifted_product_mean(sv, shifts)
    return {"value": value, "shifts": shifts, "sieve_mean": sv.values.mean()}, [], {}


def _run_forms_condition(config: ExperimentConfig):
    p = config.params
    sv = _sieve_from(p)
    polys = [parse_poly(s, p["t"]) for s in p["polys"]]
    box = [(int(lo), int(hi)) for lo, hi in p["box"]]
    samples = config.budget if config.budget else p["samples"]
    est = envelope.forms_condition_estimate(
        sv,
        polys,
        box,
        samples,
        config.seed,
        fine_scale=p["fine_scale"],
        coarse_scale=p["coarse_scale"],
    )
    tol = _tol(config, DEFAULT_SOFT_TOLERANCE)
    results = {
        "estimate": est.estimate,
        "stderr": est.stderr,
        "samples": est.samples,
        "exhaustive": est.exhaustive,
        "degenerate_fraction": est.degenerate_fraction,
        "sieve_mean": sv.values.mean(),
    }
    checks = [
        CheckResult("estimate-near-one", abs(est.estimate - 1.0) <= tol, est.estimate, tol)
    ]
    return results, checks, {}


def _run_gowers_norm(config: ExperimentConfig):
    p = config.params
    f = _input_function(config)
    directions = tuple(int(a) for a in p["directions"])
    spec = gowers.GowersSpec(
        directions,
        p["scale"],
        mode=config.mode,
        budget=config.budget,
        seed=config.seed,
    )
    ev = gowers.local_gowers_norm(f, spec)
    return {
        "norm": ev.norm,
        "power_raw": ev.power_raw,
        "power": ev.power,
        "mode": ev.mode,
        "stderr": ev.stderr,
        "samples": ev.samples,
    }, [], {}


def _run_avg_gowers_norm(config: ExperimentConfig):
    p = config.params
    f = _input_function(config)
    if p["input"] in ("sieve-deviation", "sieve"):
        W = arith.primorial(p["w"])
    else:
        W = p["W"] if p["W"] else 1
    family = _family(p, W)
    budget = config.budget if config.mode == "sampled" else None
    ev = gowers.averaged_gowers_norm(f, family, budget=budget, seed=config.seed)
    return {
        "norm": ev.norm,
        "power_raw": ev.power_raw,
        "power": ev.power,
        "mode": ev.mode,
        "stderr": ev.stderr,
        "samples": ev.samples,
        "degenerate_fraction": ev.degenerate_fraction,
    }, [], {}


def _run_dual(config: ExperimentConfig):
    p = config.params
    gen = stream(config.seed, "input-random")
    f = cyclic.CyclicFn(p["N"], gen.uniform(-1.0, 1.0, p["N"]))
    family = _family(p, p["W"])
    budget = config.budget if config.mode == "sampled" else None
    dual = gowers.dual_function(f, family, budget=budget, seed=config.seed)
    results = {"dual_mean": dual.mean(), "pairing": (f * dual).mean()}
    tables = {
        "dual.csv": (
            ["index", "value"],
            [(i, repr(v)) for i, v in enumerate(dual.values)],
        )
    }
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "dual.bin").write_bytes(dual.to_bytes())
    return results, [], tables


def _run_duality_check(config: ExperimentConfig):
    p = config.params
    family = _family(p, p["W"])
    gen = stream(config.seed, "duality-check")
    tol = _tol(config, 1e-12)
    worst = 0.0
    for _ in range(p["count"]):
        f = cyclic.CyclicFn(p["N"], gen.uniform(-1.0, 1.0, p["N"]))
        dual = gowers.dual_function(f, family)
        pairing = (f * dual).mean()
        power = gowers.averaged_gowers_norm(f, family).power_raw
        dev = abs(pairing - power) / max(1.0, abs(power))
        worst = max(worst, dev)
    checks = [CheckResult("duality-identity", worst <= tol, worst, tol)]
    return {"max_relative_deviation": worst, "count": p["count"]}, checks, {}


def _run_dual_square_check(config: ExperimentConfig):
    p = config.params
    family = _family(p, p["W"])
    d = family.d
    gen = stream(config.seed, "dual-square-check")
    tol = _tol(config, 1e-12)
    worst = 0.0
    for _ in range(p["count"]):
        fs = {
            mask: cyclic.CyclicFn(p["N"], gen.uniform(-1.0, 1.0, p["N"]))
            for mask in range(1, 1 << d)
        }
        res = gowers.dual_square_check(fs, family)
        worst = max(worst, res.max_abs_deviation)
    checks = [CheckResult("dual-square-identity", worst <= tol, worst, tol)]
    return {"max_pointwise_deviation": worst, "count": p["count"]}, checks, {}


def _run_gcs_suite(config: ExperimentConfig):
    p = config.params
    gen = stream(config.seed, "gcs-suite")
    slack = _tol(config, 1e-9)
    violations = 0
    worst_gap = -math.inf
    for _ in range(p["count"]):
        N = int(gen.integers(8, p["N"] + 1))
        S = int(gen.integers(1, p["max_scale"] + 1))
        d = p["d"]
        dirs = tuple(
            int(a) for a in gen.integers(-p["max_direction"], p["max_direction"] + 1, d)
        )
        if all(a == 0 for a in dirs):
            dirs = (1,) + dirs[1:]
        spec = gowers.GowersSpec(dirs, S)
        fs = {
            mask: cyclic.CyclicFn(N, gen.uniform(-1.0, 1.0, N))
            for mask in range(1 << d)
        }
        res = gowers.gowers_cauchy_schwarz_check(fs, spec, slack=slack)
        worst_gap = max(worst_gap, res.lhs - res.rhs)
        if not res.holds:
            violations += 1
    checks = [CheckResult("gcs-no-violations", violations == 0, violations, 0)]
    return {"violations": violations, "worst_gap": worst_gap, "count": p["count"]}, checks, {}


def _run_lambda(config: ExperimentConfig):
    p = config.params
    if p["polys"]:
        polys = tuple(parse_poly(s, 1) for s in p["polys"])
        system = gowers.ProgressionSystem(len(polys), polys, p["W"], p["M"])
    else:
        system = gowers.ProgressionSystem.linear(p["k"], p["W"], p["M"])
    if p["input"] == "ones":
        fs = [cyclic.CyclicFn.constant(1.0, p["N"])] * system.k
    else:
        gen = stream(config.seed, "lambda-input")
        fs = [
            cyclic.CyclicFn(p["N"], gen.uniform(0.0, 1.0, p["N"]))
            for _ in range(system.k)
        ]
    value = gowers.counting_form(fs, system)
    return {"value": value, "k": system.k, "M": system.M, "W": system.W}, [], {}


def _run_singular(config: ExperimentConfig):
    p = config.params
    table = arith.sieve_primes(p["cutoff_prime"])
    val = singular.singular_series(
        singular.SingularQuery(p["k"], p["r"], p["cutoff_prime"]), table
    )
    return {
        "value": val.value,
        "terms": val.terms,
        "tail_estimate": val.tail_estimate,
    }, [], {}


def _run_singular_sum(config: ExperimentConfig):
    p = config.params
    table = arith.sieve_primes(p["cutoff_prime"])
    ps = singular.singular_partial_sum(p["k"], p["M"], p["cutoff_prime"], table)
    rows = []
    for r in range(1, p["M"]):
        q = singular.SingularQuery(p["k"], r, p["cutoff_prime"])
        rows.append((r, repr(singular.singular_series(q, table).value)))
    tables = {"singular_series.csv": (["r", "value"], rows)}
    return {"sum": ps.total, "ratio": ps.ratio, "nonzero_terms": ps.nonzero_terms}, [], tables


def _run_narrowless(config: ExperimentConfig):
    p = config.params
    table = arith.sieve_primes(p["N"])
    res = progsearch.narrow_free_subset(p["N"], p["k"], p["eps"], table)
    leftover = progsearch.find_progressions(
        res.subset, p["k"], max(res.r_bound, 1), limit=1
    )
    results = {
        "survivor_fraction": res.survivor_fraction,
        "r_bound": res.r_bound,
        "removed_total": res.removed_total,
        "prime_count": res.prime_count,
        "base_count_sum": sum(res.removal_counts.values()),
        "half_pnt_target": res.half_pnt_target,
    }
    checks = [
        CheckResult("no-narrow-progressions", len(leftover) == 0, len(leftover), 0)
    ]
    tables = {
        "survivors.csv": (["n"], [(int(n),) for n in res.subset.members()]),
    }
    return results, checks, tables


def _run_cramer(config: ExperimentConfig):
    p = config.params
    rates: dict[str, int] = {name: 0 for name in p["adversaries"]}
    trials = []
    for i in range(p["trials"]):
        rep = progsearch.cramer_trial(
            p["N"], p["k"], p["C"], p["delta"], tuple(p["adversaries"]),
            seed=config.seed + i,
        )
        trials.append(
            {
                "seed": rep.seed,
                "model_size": rep.model_size,
                "outcomes": [
                    {
                        "name": o.name,
                        "found": o.found,
                        "size": o.subset_size,
                        "bad_intervals": o.bad_intervals,
                        "degenerate": o.degenerate,
                    }
                    for o in rep.outcomes
                ],
            }
        )
        for o in rep.outcomes:
            rates[o.name] += int(o.found)
    results = {
        "trials": trials,
        "found_rates": {k: v / p["trials"] for k, v in rates.items()},
        "r_bound": math.floor(p["C"] * math.log(p["N"]) ** (p["k"] - 1)),
    }
    return results, [], {}


def _int_set(params: dict[str, Any]) -> progsearch.IntSet:
    if params["set"] == "primes":
        table = arith.sieve_primes(params["N"])
        return progsearch.IntSet.from_primes(table, params["N"])
    path = Path(params["set"])
    if not path.exists():
        raise ConfigError(f"set source {params['set']!r} is neither 'primes' nor a file")
    items = [int(line) for line in path.read_text().split()]
    return progsearch.IntSet.from_iterable(params["N"], items)


def _system(params: dict[str, Any]):
    if params["polys"]:
        return tuple(parse_poly(s, 1) for s in params["polys"])
    return params["k"]


def _run_find_prog(config: ExperimentConfig):
    p = config.params
    A = _int_set(p)
    hits = progsearch.find_progressions(A, _system(p), p["r_max"], p["limit"])
    rows = [(h.a, h.r, *h.witnesses) for h in hits]
    k = hits[0].k if hits else (p["k"] if not p["polys"] else len(p["polys"]))
    header = ["a", "r"] + [f"witness_{i}" for i in range(k)]
    return {"hit_count": len(hits)}, [], {"hits.csv": (header, rows)}


def _run_min_step(config: ExperimentConfig):
    p = config.params
    A = _int_set(p)
    r = progsearch.min_step(A, _system(p), p["r_max"])
    return {"min_step": r, "r_max": p["r_max"]}, [], {}


def _run_preset(config: ExperimentConfig):
    p = config.params
    if p["name"] != "paper-regime":
        raise ConfigError(f"unknown preset {p['name']!r}")
    N_prime = p["N_prime"]
    if N_prime < 10**3:
        raise ConfigError(f"preset requires N_prime >= 10^3, got {N_prime}")
    L = p["L"]
    if L < 1:
        raise ConfigError(f"preset requires L >= 1, got {L}")
    lll = math.log(math.log(math.log(N_prime)))
    w = max(3, math.floor(lll / 10.0))
    W = arith.primorial(w)
    N = N_prime // W
    logN = math.log(N)
    M = math.floor(logN**L)
    H = math.floor(logN ** math.sqrt(L))
    R = math.floor(N ** p["eps0"])
    results = {
        "w_raw": lll / 10.0,
        "w": w,
        "W": W,
        "N": N,
        "log_N": logN,
        "L": L,
        "M": M,
        "H": H,
        "sqrt_L": math.sqrt(L),
        "eps0": p["eps0"],
        "R": R,
        "degenerate_scales": M == H,
    }
    checks = []
    if M == H:
        checks.append(CheckResult("coarse-fine-scales-distinct", False, M, None))
    return results, checks, {}


_RUNNERS = {
    "sieve-mean": _run_sieve_mean,
    "shifted-product": _run_shifted_product,
    "forms-condition": _run_forms_condition,
    "gowers-norm": _run_gowers_norm,
    "avg-gowers-norm": _run_avg_gowers_norm,
    "dual": _run_dual,
    "duality-check": _run_duality_check,
    "dual-square-check": _run_dual_square_check,
    "gcs-suite": _run_gcs_suite,
    "lambda": _run_lambda,
    "singular": _run_singular,
    "singular-sum": _run_singular_sum,
    "narrowless": _run_narrowless,
    "cramer": _run_cramer,
    "find-prog": _run_find_prog,
    "min-step": _run_min_step,
    "preset": _run_preset,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="primelab",
        description="Prime-progression laboratory: sieves, norms, and models.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in SCHEMAS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=str, default=None, help="JSON config file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", type=str, default=None, help="output directory")
        sp.add_argument("--tolerance", type=float, default=None)
        mode = sp.add_mutually_exclusive_group()
        mode.add_argument("--exact", action="store_true")
        mode.add_argument("--sampled", type=int, metavar="BUDGET", default=None)
        sp.add_argument(
            "--param",
            "-p",
            action="append",
            default=[],
            metavar="KEY=JSON",
            help="override a single parameter, value parsed as JSON",
        )
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict[str, Any] = {"experiment": args.experiment, "params": {}}
    if args.config:
        loaded = json.loads(Path(args.config).read_text())
        if loaded.get("experiment", args.experiment) != args.experiment:
            raise ConfigError(
                f"config file is for {loaded['experiment']!r}, not {args.experiment!r}"
            )
        loaded["experiment"] = args.experiment
        data.update(loaded)
        data["params"] = dict(loaded.get("params", {}))
    for item in args.param:
        if "=" not in item:
            raise ConfigError(f"--param needs KEY=VALUE, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            data["params"][key] = json.loads(raw)
        except json.JSONDecodeError:
            data["params"][key] = raw
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out is not None:
        data["out"] = args.out
    if args.tolerance is not None:
        data["tolerance"] = args.tolerance
    if args.sampled is not None:
        data["mode"] = "sampled"
        data["budget"] = args.sampled
    elif args.exact:
        data["mode"] = "exact"
    return ExperimentConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        report = run(config)
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    doc = report.to_document()
    print(json.dumps(doc, sort_keys=True, indent=2))
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"[{status}] {check.name}: {check.value}", file=sys.stderr)
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
