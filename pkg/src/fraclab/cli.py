"""Command-line entry point: ``fraclab <command> --config <file> [--out dir] [--seed N] [key=value ...]``.

A run is fully described by its resolved config.  :func:`run_command` turns
``(name, config)`` into a :class:`RunReport` whose ``config`` field is that
resolved config, so feeding a written ``report.json`` back in as ``--config``
replays the run.  Wall-clock timings go to ``timings.json``, never into
``report.json``, which keeps replayed reports byte-identical.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import yaml

from .barriers import NotFound, amplitude_search, decay_bound_audit, default_radii, exponent_audit
from .functions import bracket_profile, constant_function, power_function
from .io import csv_text, json_text, to_plain, write_files
from .kernels import QuadratureOptions
from .operator import cutoff_square, evaluate_L
from .problem import ProblemSpec, build_power_solution, classify_regime, residual_scan
from .qualitative import (
    bernstein_scan,
    decay_fit,
    linearization_coeffs,
    liouville_trend,
    moving_plane_gap,
    narrow_region_probe,
    uniqueness_probe,
)
from .selftest import run_selftest
from .solver import (
    ExteriorData,
    GridSpec,
    IterationOptions,
    assemble_operator,
    build_grid,
    comparison_suite,
    exhaust,
    monotone_iterate,
)

COMMANDS = (
    "classify",
    "eval-op",
    "power-solution",
    "verify-barriers",
    "solve-ball",
    "exhaust",
    "moving-plane",
    "bernstein",
    "liouville-demo",
    "decay-fit",
    "uniqueness",
    "selftest",
)
STATUSES = ("ok", "degraded", "failed")
EXIT_CODES = {"ok": 0, "failed": 1, "degraded": 2}

# Every accepted key with its default.  A ``None`` default accepts any value
# (it marks an optional override); other defaults fix the value's type.
DEFAULTS: dict = {
    "problem": {
        "kernel": {"n": 1, "s": 0.9, "lam": None, "Lam": None, "normalization": "fractional", "modulation": None},
        "H": {"family": "polynomial", "m": 0.0, "H0": 1.0, "M": None, "theta": None},
        "G": {"terms": [[1.0, 0.5]]},
        "gamma": 0.0,
        "eps": 0.0,
        "convention": "fractional",
    },
    "grid": {
        "mode": "radial",
        "R": 8.0,
        "M": 128,
        "grade_center": 1.0,
        "grade_boundary": 1.0,
        "origin_offset": False,
    },
    "quadrature": QuadratureOptions().to_dict(),
    "iteration": {
        "max_iter": 200,
        "tol": None,
        "omega": 1.0,
        "start": "lower",
        "G_cap": None,
        "convention": None,
        "tol_rel": 1e-8,
        "divergence_factor": 10.0,
    },
    "exterior": {
        "c": 1e-3,
        "beta": None,
        "delta": 0.0,
        "bump": 0.0,
        "a": None,
        "A": None,
        "clip": False,
        "length": 1.0,
    },
    "eval_op": {
        "function": "bracket",
        "beta": 1.0,
        "amplitude": 1.0,
        "R": 1.0,
        "domain": "radial",
        "points": [0.0, 0.5, 1.0, 2.0],
        "convention": "generator",
    },
    "power": {
        "annulus": [0.5, 4.0],
        "samples": 17,
        "convention": "fractional",
        "tol": 1e-2,
        "perturbation": 2.0,
        "detect": 0.1,
    },
    "barrier": {
        "beta": None,
        "radii": None,
        "super_sweep": {"lo": 1e-3, "hi": 1e6, "num": 28},
        "sub_sweep": {"lo": 1e-6, "hi": 1.0, "num": 19},
    },
    "solve": {
        "comparison_pairs": 20,
        "monotonicity_tol": 1e-10,
        "sandwich_tol": 1e-8,
        "comparison_tol": 1e-8,
    },
    "exhaust": {"R_list": [4.0, 8.0, 16.0, 32.0], "core": 2.0, "exterior_scaling": "fixed", "decay_tol": 0.15},
    "moving_plane": {
        "R": 8.0,
        "lambdas": [-2.0, -1.0, -0.5],
        "deltas": [0.1, 0.2, 0.5],
        "delta_asym": 0.5,
        "asym_R_list": [4.0, 32.0],
        "core": 2.0,
        "gap_tol": 1e-6,
        "asym_ratio": 0.5,
    },
    "bernstein": {"R_list": [2.0, 4.0, 8.0, 16.0], "ratio_tol": 10.0},
    "liouville": {"R_list": [4.0, 8.0, 16.0, 32.0], "exterior_scaling": "fixed"},
    "decay_fit": {"window": None, "expected_beta": None, "tol": 0.15},
    "uniqueness": {"R_list": [4.0, 8.0, 16.0], "normalization": 1e-3, "bump": 0.5, "normalizations": None, "core": 2.0},
    "seed": 0,
    "out": None,
}


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every offending location."""

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


# ---------------------------------------------------------------------------
# config handling


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check(value, default, path: str, problems: List[str]) -> None:
    if default is None:
        return
    if isinstance(default, dict):
        if not isinstance(value, dict):
            problems.append(f"{path}: expected a mapping, got {type(value).__name__}")
            return
        for key in value:
            if key not in default:
                problems.append(f"{path + '.' if path else ''}{key}: unknown key")
            else:
                _check(value[key], default[key], f"{path + '.' if path else ''}{key}", problems)
    elif isinstance(default, bool):
        if not isinstance(value, bool):
            problems.append(f"{path}: expected true/false, got {value!r}")
    elif _is_number(default):
        if not _is_number(value):
            problems.append(f"{path}: expected a number, got {value!r}")
    elif isinstance(default, str):
        if not isinstance(value, str):
            problems.append(f"{path}: expected a string, got {value!r}")
    elif isinstance(default, list):
        if not isinstance(value, list):
            problems.append(f"{path}: expected a list, got {value!r}")


def _merge(base: dict, update: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in update.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve_config(config: Optional[dict] = None, overrides: Optional[Dict[str, object]] = None) -> dict:
    """Defaults, then ``config``, then dotted ``overrides``; validated against :data:`DEFAULTS`."""
    config = {} if config is None else config
    if not isinstance(config, dict):
        raise ConfigError([f"<root>: expected a mapping, got {type(config).__name__}"])
    problems: List[str] = []
    _check(config, DEFAULTS, "", problems)
    if problems:
        raise ConfigError(problems)
    resolved = _merge(DEFAULTS, config)
    for key, value in (overrides or {}).items():
        node, schema = resolved, DEFAULTS
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(schema, dict) or part not in schema or not isinstance(schema[part], dict):
                raise ConfigError([f"{key}: unknown key"])
            node, schema = node[part], schema[part]
        if not isinstance(schema, dict) or parts[-1] not in schema:
            raise ConfigError([f"{key}: unknown key"])
        sub: List[str] = []
        _check(value, schema[parts[-1]], key, sub)
        if sub:
            raise ConfigError(sub)
        node[parts[-1]] = value if not isinstance(value, dict) else _merge(node[parts[-1]] or {}, value)
    return resolved


def load_config(path: Optional[str]) -> dict:
    """Read a JSON/YAML config; a written ``report.json`` yields its config echo."""
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = yaml.safe_load(text)
    if data is None:
        return {}
    if isinstance(data, dict) and {"command", "config", "results", "status"} <= set(data):
        return data["config"]
    return data


def parse_override(text: str) -> Tuple[str, object]:
    if "=" not in text:
        raise ConfigError([f"{text}: overrides take the form key.path=value"])
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = yaml.safe_load(raw)
    return key.strip(), value


# ---------------------------------------------------------------------------
# building domain objects from a resolved config


def _problem(cfg) -> ProblemSpec:
    return ProblemSpec.from_dict(cfg["problem"])


def _quadrature(cfg) -> QuadratureOptions:
    return QuadratureOptions(**cfg["quadrature"])


def _grid(cfg, **changes) -> GridSpec:
    g = dict(cfg["grid"])
    g.update(changes)
    return GridSpec(**g)


def _iteration(cfg) -> IterationOptions:
    return IterationOptions(**cfg["iteration"])


def _exterior_beta(cfg, prob: ProblemSpec) -> float:
    """Configured exterior exponent, else the subcritical ``beta`` when it is positive, else 1."""
    beta = cfg["exterior"]["beta"]
    if beta is not None:
        return float(beta)
    try:
        rep = classify_regime(prob)
    except ValueError:
        return 1.0
    return float(rep.beta) if rep.beta is not None and rep.beta > 0 else 1.0


def _exterior(cfg, prob: ProblemSpec, **changes) -> ExteriorData:
    e = dict(cfg["exterior"])
    e["beta"] = _exterior_beta(cfg, prob)
    e.update(changes)
    return ExteriorData(**e)


def _exterior_family(cfg, prob: ProblemSpec, scaling: str, **changes) -> Callable[[float], ExteriorData]:
    if scaling not in ("fixed", "with_R"):
        raise ConfigError([f"exterior_scaling: expected 'fixed' or 'with_R', got {scaling!r}"])
    base = _exterior(cfg, prob, **changes)

    def family(R: float) -> ExteriorData:
        if scaling == "fixed":
            return base
        return _exterior(cfg, prob, length=float(R) * cfg["exterior"]["length"], **changes)

    return family


# ---------------------------------------------------------------------------
# commands


@dataclass
class Outcome:
    results: dict = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)
    tables: Dict[str, Tuple[List[str], list]] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    degraded: bool = False


def _solution_rows(rep):
    return [[x, u, g] for x, u, g in zip(rep.nodes, rep.values, rep.gradient)]


def _all_converged(reports) -> bool:
    return all(r.status == "Converged" for r in reports)


def cmd_classify(cfg) -> Outcome:
    return Outcome(results=classify_regime(_problem(cfg)).to_dict())


def _test_function(e: dict):
    kind, domain = e["function"], e["domain"]
    if kind == "constant":
        return constant_function(e["amplitude"], domain)
    if kind == "bracket":
        return bracket_profile(e["beta"], e["amplitude"], domain)
    if kind == "power":
        if domain != "radial":
            raise ConfigError(["eval_op.domain: the power function is radial only"])
        return power_function(e["beta"], e["amplitude"])
    if kind == "cutoff":
        return cutoff_square(e["R"], domain)
    raise ConfigError([f"eval_op.function: expected constant, bracket, power or cutoff, got {kind!r}"])


def cmd_eval_op(cfg) -> Outcome:
    e = cfg["eval_op"]
    prob, opts = _problem(cfg), _quadrature(cfg)
    f = _test_function(e)
    res = [evaluate_L(prob.kernel, f, x, opts, e["convention"]) for x in e["points"]]
    out = Outcome(
        results={
            "function": e["function"],
            "convention": e["convention"],
            "points": list(e["points"]),
            "values": [r.value for r in res],
            "errors": [r.error for r in res],
            "degraded": [r.degraded for r in res],
        }
    )
    out.tables["eval_op.csv"] = (["x", "value", "error"], [[x, r.value, r.error] for x, r in zip(e["points"], res)])
    out.degraded = any(r.degraded for r in res)
    if out.degraded:
        out.warnings.append("quadrature error estimate above target at some points")
    return out


def cmd_power_solution(cfg) -> Outcome:
    pc = cfg["power"]
    prob, opts = _problem(cfg), _quadrature(cfg)
    sol = build_power_solution(prob, opts)
    scan = residual_scan(prob, sol, pc["annulus"], pc["samples"], opts, pc["convention"])
    pert = residual_scan(prob, sol, pc["annulus"], pc["samples"], opts, pc["convention"], amplitude=pc["perturbation"] * sol.A)
    native = residual_scan(prob, sol, pc["annulus"], pc["samples"], opts, sol.convention)
    out = Outcome(
        results={
            "solution": sol.to_dict(),
            "amplitude_identity_residual": sol.amplitude_identity_residual(),
            "residual": scan,
            "perturbed_residual": pert,
            "residual_in_solution_convention": native,
        }
    )
    out.checks["residual_within_tol"] = scan["residual"] <= pc["tol"]
    out.checks["perturbation_detected"] = pert["residual"] >= pc["detect"]
    out.tables["residual.csv"] = (["r", "lhs", "rhs"], list(zip(scan["radii"], scan["lhs"], scan["rhs"])))
    if sol.convention != pc["convention"]:
        out.warnings.append(
            f"C = {sol.C:.6g} has the sign of the {sol.convention} convention; "
            f"the {pc['convention']} form of the equation has no positive power solution"
        )
    return out


def _sweep(block) -> np.ndarray:
    if block["num"] < 1:
        return np.array([])
    return np.geomspace(block["lo"], block["hi"], int(block["num"]))


def _search_summary(found, tables) -> dict:
    return {
        "found": found.to_dict() if isinstance(found, NotFound) else {"found": True, "amplitude": found},
        "sweep": [
            {"amplitude": t.amplitude, "min_margin": t.min_margin, "holds": t.holds, "violation_radii": t.violation_radii}
            for t in tables
        ],
    }


def cmd_verify_barriers(cfg) -> Outcome:
    bc = cfg["barrier"]
    prob, opts = _problem(cfg), _quadrature(cfg)
    beta = bc["beta"]
    if beta is None:
        rep = classify_regime(prob)
        if rep.beta is None or rep.beta <= 0:
            raise ConfigError([f"barrier.beta: required for a {rep.regime} problem without a positive beta"])
        beta = rep.beta
    radii = default_radii(prob) if bc["radii"] is None else np.asarray(bc["radii"], dtype=float)
    out = Outcome()
    decay = decay_bound_audit(prob.kernel, beta, 1.0, radii, opts)
    sup, sup_tables = amplitude_search(prob, beta, "super", _sweep(bc["super_sweep"]), radii, opts)
    out.results = {"beta": beta, "decay_bound": decay, "super": _search_summary(sup, sup_tables)}
    if sup_tables:
        out.tables["margins_super.csv"] = (list(sup_tables[-1].columns), sup_tables[-1].rows())
        out.tables["sweep_super.csv"] = (
            ["amplitude", "min_margin", "violations"],
            [[t.amplitude, t.min_margin, len(t.violation_radii)] for t in sup_tables],
        )
    if prob.H.theta >= 0:
        sub, sub_tables = amplitude_search(prob, beta, "sub", _sweep(bc["sub_sweep"]), radii, opts)
        out.results["sub"] = _search_summary(sub, sub_tables)
        if sub_tables:
            out.tables["margins_sub.csv"] = (list(sub_tables[0].columns), sub_tables[0].rows())
            out.tables["sweep_sub.csv"] = (
                ["amplitude", "min_margin", "violations"],
                [[t.amplitude, t.min_margin, len(t.violation_radii)] for t in sub_tables],
            )
    else:
        out.results["sub"] = None
        out.warnings.append("subsolution search skipped: H has negative lower growth order")
    if len(prob.G.terms) == 1:
        out.results["exponent_audit"] = exponent_audit(prob, beta, radii, opts)
    else:
        out.warnings.append("exponent audit skipped: G has several terms")
    return out


def _solve_checks(out: Outcome, rep, sc) -> None:
    out.checks["converged"] = rep.status == "Converged"
    out.checks["monotone"] = max(rep.monotonicity_violation, default=0.0) <= sc["monotonicity_tol"]
    out.checks["sandwich"] = (
        min(rep.sandwich_lower, default=0.0) >= -sc["sandwich_tol"]
        and min(rep.sandwich_upper, default=0.0) >= -sc["sandwich_tol"]
    )


def cmd_solve_ball(cfg) -> Outcome:
    sc = cfg["solve"]
    prob, opts, grid, it = _problem(cfg), _quadrature(cfg), _grid(cfg), _iteration(cfg)
    ext = _exterior(cfg, prob)
    op = assemble_operator(prob.kernel, build_grid(grid), grid.mode, opts)
    rep = monotone_iterate(prob, grid, ext, it, opts, op)
    rng = np.random.default_rng(cfg["seed"])
    f = 1e-3 * rng.uniform(0.0, 1.0, op.unknown.size)
    comp = comparison_suite(op, f, rng, int(sc["comparison_pairs"]))
    out = Outcome(results={"solve": rep.to_dict(), "comparison": comp, "sandwich_data": ext.sandwich_check(grid.R)})
    _solve_checks(out, rep, sc)
    out.checks["comparison"] = comp["max_violation"] <= sc["comparison_tol"]
    out.tables["solution.csv"] = (["x", "u", "grad_u"], _solution_rows(rep))
    out.tables["history.csv"] = (
        ["iteration", "increment", "monotonicity_violation", "sandwich_lower", "sandwich_upper"],
        [
            [k + 1, a, b, c, d]
            for k, (a, b, c, d) in enumerate(
                zip(rep.residual_history, rep.monotonicity_violation, rep.sandwich_lower, rep.sandwich_upper)
            )
        ],
    )
    if rep.mu_clamped:
        out.warnings.append(f"{rep.mu_clamped} rows used the clamped near-field calibration")
    return out


def _strictly_decreasing(v) -> bool:
    return len(v) >= 1 and all(b < a for a, b in zip(v, v[1:]))


def cmd_exhaust(cfg) -> Outcome:
    ec = cfg["exhaust"]
    prob, opts, grid, it = _problem(cfg), _quadrature(cfg), _grid(cfg), _iteration(cfg)
    fam = _exterior_family(cfg, prob, ec["exterior_scaling"])
    run = exhaust(prob, ec["R_list"], fam, grid, it, opts, ec["core"])
    reps = run["reports"]
    res = {
        "R": run["R"],
        "statuses": [r.status for r in reps],
        "iterations": [r.iterations for r in reps],
        "core_differences": run["core_differences"],
        "aborted_at": run["aborted_at"],
        "final": reps[-1].to_dict(),
    }
    out = Outcome(results=res)
    out.checks["all_converged"] = _all_converged(reps) and run["aborted_at"] is None
    out.checks["core_differences_decreasing"] = _strictly_decreasing(run["core_differences"])
    if "core_asymmetry" in run:
        res["core_asymmetry"] = run["core_asymmetry"]
    if "decay_fit" in run:
        res["decay_fit"] = run["decay_fit"].to_dict()
        out.checks["decay_within_tol"] = run["decay_fit"].rel_error <= ec["decay_tol"]
    elif grid.mode == "radial":
        res["decay_fit_error"] = run.get("decay_fit_error", "exhaustion aborted")
        out.checks["decay_within_tol"] = False
    out.tables["exhaust.csv"] = (
        ["R", "status", "iterations", "core_difference"],
        [[R, r.status, r.iterations, d] for R, r, d in zip(run["R"], reps, [math.nan] + run["core_differences"])],
    )
    out.tables["solution.csv"] = (["x", "u", "grad_u"], _solution_rows(reps[-1]))
    return out


def cmd_moving_plane(cfg) -> Outcome:
    mc = cfg["moving_plane"]
    prob, opts, it = _problem(cfg), _quadrature(cfg), _iteration(cfg)
    if prob.kernel.n != 1:
        raise ConfigError(["problem.kernel.n: moving-plane runs in line mode and needs n = 1"])
    grid = _grid(cfg, mode="line", R=mc["R"])
    sym = monotone_iterate(prob, grid, _exterior(cfg, prob, delta=0.0), it, opts)
    u = sym.function
    gaps, slabs, lin = [], [], []
    for lam in mc["lambdas"]:
        g = moving_plane_gap(u, lam)
        gaps.append({"lambda": lam, "min_gap": g["min_gap"], "argmin": g["argmin"]})
        slabs.append(narrow_region_probe(u, lam, mc["deltas"]))
        if prob.H.family != "singular" and lam - 1.0 > u.grid[0]:
            lin.append(linearization_coeffs(prob, u, lam, (lam - 1.0, lam - 0.1)))
    asym_grid = _grid(cfg, mode="line")
    run = exhaust(
        prob, mc["asym_R_list"], lambda R: _exterior(cfg, prob, delta=mc["delta_asym"]), asym_grid, it, opts, mc["core"]
    )
    asym = run["core_asymmetry"]
    ratio = asym[-1] / asym[0] if len(asym) >= 2 and asym[0] > 0 else math.nan
    out = Outcome(
        results={
            "symmetric_solve": {"status": sym.status, "iterations": sym.iterations},
            "gaps": gaps,
            "slabs": slabs,
            "linearization": lin,
            "asymmetry": {"R": run["R"], "core_asymmetry": asym, "ratio": ratio, "statuses": [r.status for r in run["reports"]]},
        }
    )
    tol = mc["gap_tol"]
    out.checks["symmetric_converged"] = sym.status == "Converged"
    out.checks["asymmetric_converged"] = _all_converged(run["reports"]) and len(run["reports"]) == len(mc["asym_R_list"])
    out.checks["gaps_nonnegative"] = all(g["min_gap"] >= -tol for g in gaps)
    out.checks["slabs_nonnegative"] = all(s["min_gap"] >= -tol for sl in slabs for s in sl["slabs"])
    out.checks["asymmetry_decays"] = bool(ratio <= mc["asym_ratio"])
    out.tables["gaps.csv"] = (["lambda", "min_gap", "argmin"], [[g["lambda"], g["min_gap"], g["argmin"]] for g in gaps])
    out.tables["solution.csv"] = (["x", "u", "grad_u"], _solution_rows(sym))
    return out


def cmd_bernstein(cfg) -> Outcome:
    bc = cfg["bernstein"]
    prob, opts, grid, it = _problem(cfg), _quadrature(cfg), _grid(cfg), _iteration(cfg)
    ext = _exterior(cfg, prob)
    reps, sols = [], {}
    for R in bc["R_list"]:
        rep = monotone_iterate(prob, grid.with_R(2.0 * R), ext, it, opts)
        reps.append(rep)
        sols[float(R)] = rep.function
    scan = bernstein_scan(prob, sols, bc["R_list"])
    out = Outcome(results={"bernstein": scan.to_dict(), "statuses": [r.status for r in reps]})
    out.checks["all_converged"] = _all_converged(reps)
    out.checks["scaled_ratio_bounded"] = bool(scan.scaled_ratio <= bc["ratio_tol"])
    out.tables["bernstein.csv"] = (
        ["R", "M_R", "x_R", "F_max", "lhs", "scaled"],
        list(zip(scan.R, scan.M_R, scan.x_R, scan.F_max, scan.lhs, scan.scaled)),
    )
    return out


def _nonincreasing_with_slack(v, slack=0.05) -> bool:
    inversions = [(a, b) for a, b in zip(v, v[1:]) if b > a]
    return len(inversions) == 0 or (len(inversions) == 1 and inversions[0][1] <= (1 + slack) * inversions[0][0])


def cmd_liouville_demo(cfg) -> Outcome:
    lc = cfg["liouville"]
    prob, opts, grid, it = _problem(cfg), _quadrature(cfg), _grid(cfg), _iteration(cfg)
    regime = classify_regime(prob).regime
    in_hyp = regime in ("Supercritical", "Critical")
    fam = _exterior_family(cfg, prob, lc["exterior_scaling"])
    trend = liouville_trend(prob, lc["R_list"], fam, grid, it, opts, require_regime=False)
    out = Outcome(results={"trend": trend.to_dict(), "in_hypotheses": in_hyp})
    out.results["gradient_nonincreasing"] = _nonincreasing_with_slack(trend.sup_grad)
    if in_hyp:
        out.checks["all_converged"] = all(s == "Converged" for s in trend.statuses)
        out.checks["theta_positive"] = bool(trend.theta > 0)
    else:
        out.warnings.append(f"{regime} problem: trend reported for contrast only")
    out.tables["liouville.csv"] = (["R", "sup_grad", "status"], list(zip(trend.R, trend.sup_grad, trend.statuses)))
    return out


def cmd_decay_fit(cfg) -> Outcome:
    dc = cfg["decay_fit"]
    prob, opts, grid, it = _problem(cfg), _quadrature(cfg), _grid(cfg), _iteration(cfg)
    if grid.mode != "radial":
        raise ConfigError(["grid.mode: decay-fit needs a radial grid"])
    ext = _exterior(cfg, prob)
    rep = monotone_iterate(prob, grid, ext, it, opts)
    window = dc["window"] if dc["window"] is not None else [grid.R / 4.0, grid.R / 2.0]
    expected = dc["expected_beta"] if dc["expected_beta"] is not None else ext.beta
    fit = decay_fit(rep.function, window, expected)
    out = Outcome(results={"solve": {"status": rep.status, "iterations": rep.iterations}, "fit": fit.to_dict()})
    out.checks["converged"] = rep.status == "Converged"
    out.checks["decay_within_tol"] = fit.rel_error <= dc["tol"]
    out.tables["solution.csv"] = (["x", "u", "grad_u"], _solution_rows(rep))
    return out


def cmd_uniqueness(cfg) -> Outcome:
    uc = cfg["uniqueness"]
    prob, opts, grid, it = _problem(cfg), _quadrature(cfg), _grid(cfg), _iteration(cfg)
    fams = [lambda R: _exterior(cfg, prob), lambda R: _exterior(cfg, prob, bump=uc["bump"])]
    res = uniqueness_probe(prob, uc["normalization"], fams, uc["R_list"], grid, it, opts, uc["core"], uc["normalizations"])
    out = Outcome(results=res)
    out.checks["all_converged"] = all(s == "Converged" for st in res["statuses"] for s in st)
    out.tables["uniqueness.csv"] = (["R", "discrepancy"], list(zip(res["R"], res["discrepancy"])))
    return out


def cmd_selftest(cfg) -> Outcome:
    rows = run_selftest()
    out = Outcome(results={"checks": rows})
    out.checks = {r["check"]: r["passed"] for r in rows}
    out.tables["selftest.csv"] = (["check", "passed"], [[r["check"], r["passed"]] for r in rows])
    return out


HANDLERS: Dict[str, Callable[[dict], Outcome]] = {
    "classify": cmd_classify,
    "eval-op": cmd_eval_op,
    "power-solution": cmd_power_solution,
    "verify-barriers": cmd_verify_barriers,
    "solve-ball": cmd_solve_ball,
    "exhaust": cmd_exhaust,
    "moving-plane": cmd_moving_plane,
    "bernstein": cmd_bernstein,
    "liouville-demo": cmd_liouville_demo,
    "decay-fit": cmd_decay_fit,
    "uniqueness": cmd_uniqueness,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------
# run reports


@dataclass
class RunReport:
    command: str
    config: dict
    results: dict
    diagnostics: dict
    status: str
    tables: Dict[str, Tuple[List[str], list]] = field(default_factory=dict, repr=False)
    elapsed: float = 0.0

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "diagnostics": self.diagnostics,
            "status": self.status,
        }

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def files(self) -> Dict[str, str]:
        """File name to text for everything a run writes."""
        files = {"report.json": json_text(self.to_dict())}
        for name, (header, rows) in self.tables.items():
            files[name] = csv_text(header, rows)
        files["timings.json"] = json_text({"command": self.command, "elapsed_seconds": self.elapsed})
        return files


def _echo(cfg: dict) -> dict:
    echo = copy.deepcopy(cfg)
    echo.pop("out", None)
    return to_plain(echo)


def run_command(name: str, config: Optional[dict] = None, overrides: Optional[Dict[str, object]] = None) -> RunReport:
    """Resolve the config, dispatch, and collect the outcome into a :class:`RunReport`.

    Invalid configs raise :class:`ConfigError`; errors raised by the
    computation itself are reported with status ``failed``.
    """
    if name not in HANDLERS:
        raise ConfigError([f"command: unknown command {name!r}; choose from {', '.join(COMMANDS)}"])
    cfg = resolve_config(config, overrides)
    echo = _echo(cfg)
    t0 = time.perf_counter()
    try:
        out = HANDLERS[name](copy.deepcopy(echo))
    except ConfigError:
        raise
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        diag = {"error": f"{type(exc).__name__}: {exc}", "checks": {}, "warnings": []}
        return RunReport(name, echo, {}, diag, "failed", elapsed=time.perf_counter() - t0)
    if any(not ok for ok in out.checks.values()):
        status = "failed"
    elif out.degraded:
        status = "degraded"
    else:
        status = "ok"
    diag = {
        "checks": {k: bool(v) for k, v in out.checks.items()},
        "failed_checks": sorted(k for k, v in out.checks.items() if not v),
        "warnings": list(out.warnings),
        "degraded": bool(out.degraded),
    }
    return RunReport(name, echo, to_plain(out.results), diag, status, out.tables, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fraclab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON or YAML config, or a report.json to replay")
    p.add_argument("--out", help="output directory (default: config 'out', else fraclab_out/<command>)")
    p.add_argument("--seed", type=int, help="seed for randomized probes (overrides the config)")
    p.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE", help="dotted override")
    p.add_argument("--overwrite", action="store_true", help="replace existing output files")
    p.add_argument("overrides", nargs="*", metavar="KEY=VALUE", help="dotted overrides, e.g. problem.kernel.s=0.5")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_intermixed_args(argv)
    try:
        config = load_config(args.config)
        overrides = dict(parse_override(t) for t in list(args.sets) + list(args.overrides))
        if args.seed is not None:
            overrides["seed"] = args.seed
        report = run_command(args.command, config, overrides)
        out_dir = args.out or resolve_config(config, overrides).get("out") or f"fraclab_out/{args.command}"
        written = write_files(out_dir, report.files(), overwrite=args.overwrite)
    except ConfigError as exc:
        print(json.dumps({"status": "failed", "config_errors": exc.problems}, indent=2), file=sys.stderr)
        return EXIT_CODES["failed"]
    except (OSError, yaml.YAMLError) as exc:
        print(json.dumps({"status": "failed", "error": f"{type(exc).__name__}: {exc}"}, indent=2), file=sys.stderr)
        return EXIT_CODES["failed"]
    print(f"{args.command}: {report.status}")
    for path in written:
        print(f"  {path}")
    if report.diagnostics.get("failed_checks"):
        print("  failed checks: " + ", ".join(report.diagnostics["failed_checks"]))
    if report.diagnostics.get("error"):
        print("  error: " + report.diagnostics["error"])
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
