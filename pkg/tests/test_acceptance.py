"""The twelve acceptance criteria, one check each, at their stated tolerances.

Each check returns ``(passed, detail)``.  The pytest run records one line per
criterion and ``conftest.py`` prints them in the terminal summary; running this
file directly prints the same lines.  Criteria on solutions of the nonlinear
problem also require the runs to report ``Converged``: a trend fitted to a
non-converged iterate is not evidence for anything.
"""

import math
import sys
import time

import numpy as np
import pytest

from fraclab.cli import COMMANDS, run_command
from fraclab.kernels import KernelSpec, oscillating_modulation
from fraclab.functions import bracket_profile, constant_function
from fraclab.operator import (
    cutoff_scan,
    evaluate_L,
    maximum_principle_probe,
    power_constant,
    random_bumps,
)
from fraclab.problem import GSpec, HSpec, ProblemSpec, build_power_solution, residual_scan
from fraclab.solver import ExteriorData, GridSpec, assemble_operator, build_grid, linear_solve

FRAC = dict(normalization="fractional")
RESULTS = {}

SUPERCRITICAL = {"problem.kernel.s": 0.25, "problem.gamma": 0.3, "problem.G.terms": [[1.0, 0.4]]}
# gamma + p = 2s
CRITICAL = {"problem.kernel.s": 0.5, "problem.gamma": 0.5, "problem.G.terms": [[1.0, 0.5]]}
POWER = {"problem.gamma": -0.6}


def _failed_checks(rep):
    return rep.diagnostics.get("failed_checks") or ([rep.diagnostics["error"]] if "error" in rep.diagnostics else [])


def criterion_1():
    consts = []
    for k in (KernelSpec(1, 0.6), KernelSpec(2, 0.4), KernelSpec(3, 0.8), KernelSpec(1, 0.5, 1.0, 2.0, oscillating_modulation(1.0, 2.0))):
        for x in (0.0, 0.7, 5.0):
            consts.append(abs(evaluate_L(k, constant_function(3.0), x).value))
    half = evaluate_L(KernelSpec(1, 0.5, **FRAC), bracket_profile(1.0, domain="line"), 0.0, convention="fractional").value
    fund = power_constant(1, 0.75, 0.5)
    ok = max(consts) <= 1e-10 and abs(half - 1.0) <= 1e-3 and abs(fund) <= 1e-3
    return ok, f"max|L const| = {max(consts):.2e}, half-Laplacian at 0 = {half:.8f}, C(beta=0.5) = {fund:.2e}"


def criterion_2():
    rng = np.random.default_rng(2024)
    worst, bad = -math.inf, 0
    for _ in range(100):
        s = float(rng.uniform(0.1, 0.9))
        _, v = maximum_principle_probe(KernelSpec(1, s), random_bumps(rng))
        worst = max(worst, v)
        bad += v > 1e-8
    return bad == 0, f"{100 - bad}/100 bumps with L f(argmax) <= 1e-8, worst {worst:.3e}"


def criterion_3():
    parts, ok = [], True
    R = [1.0, 2.0, 4.0, 8.0]
    for s in (0.3, 0.5, 0.75):
        rows = cutoff_scan(KernelSpec(1, s), R)
        col = np.array([r[1] for r in rows])
        wrong = col * np.array(R) ** (-s)
        ratio, wrong_ratio = col.max() / col.min(), wrong.max() / wrong.min()
        ok &= ratio <= 2 and wrong_ratio > 2
        parts.append(f"s={s}: ratio {ratio:.4f}, exponent-s ratio {wrong_ratio:.3f}")
    return bool(ok), "; ".join(parts)


def criterion_4():
    prob = ProblemSpec(KernelSpec(1, 0.9, **FRAC), HSpec(), GSpec.single(0.5), -0.6)
    sol = build_power_solution(prob)
    res = residual_scan(prob, sol, annulus=(0.5, 4.0), convention="fractional")["residual"]
    res2 = residual_scan(prob, sol, annulus=(0.5, 4.0), convention="fractional", amplitude=2.0 * sol.A)["residual"]
    own = residual_scan(prob, sol, annulus=(0.5, 4.0), convention=sol.convention)["residual"]
    ok = abs(sol.beta - 1.4) <= 1e-12 and res <= 1e-2 and res2 >= 0.1
    return ok, (
        f"beta = {sol.beta:.12g}, residual {res:.3e} (2A: {res2:.3e}); "
        f"C = {sol.C:.5f} < 0 so the profile solves the {sol.convention} form with residual {own:.2e}"
    )


def criterion_5():
    from oracles import generator_of_bracket

    parts, ok = [], True
    for s in (0.3, 0.5, 0.75):
        errs = []
        for M in (64, 128):
            nodes = build_grid(GridSpec("radial", 8.0, M))
            op = assemble_operator(KernelSpec(1, s, **FRAC), nodes, "radial")
            x = nodes[op.unknown]
            f = np.array([generator_of_bracket(1, s, 1.0, r) for r in x])
            u = linear_solve(op, f, ExteriorData(c=1.0, beta=1.0))
            exact = 1.0 / (1.0 + x * x)
            errs.append(float(np.max(np.abs(u - exact)) / np.max(exact)))
        ok &= errs[1] <= 5e-3 and errs[0] / errs[1] >= 1.5
        parts.append(f"s={s}: err {errs[1]:.2e}, gain {errs[0] / errs[1]:.2f}")
    return bool(ok), "; ".join(parts)


def _reference_upper_amplitude():
    rep = run_command("verify-barriers")
    found = rep.results["super"]["found"]
    return found["amplitude"] if found.get("found") else None


def criterion_6():
    A = _reference_upper_amplitude()
    c = 1e-3
    overrides = {"exterior.a": 1e-3, "exterior.c": c}
    if A is not None:
        overrides["exterior.A"] = max(A, c)
    rep = run_command("solve-ball", overrides=overrides)
    solve = rep.results.get("solve", {})
    hist = solve.get("monotonicity_violation", [math.nan])
    detail = (
        f"status {solve.get('status')} after {solve.get('iterations')} steps, "
        f"max monotonicity violation {max(hist):.3e}, "
        f"comparison violation {rep.results.get('comparison', {}).get('max_violation', math.nan):.1e}"
    )
    if rep.status != "ok":
        detail += f"; failed: {', '.join(_failed_checks(rep))}"
    return rep.status == "ok", detail


def criterion_7():
    rep = run_command("exhaust")
    r = rep.results
    detail = f"statuses {r.get('statuses')}, core differences {np.round(r.get('core_differences', []), 6).tolist()}"
    if "decay_fit" in r:
        detail += f", decay rel. error {r['decay_fit']['rel_error']:.3f}"
    return rep.status == "ok", detail


def criterion_8():
    rep = run_command("moving-plane")
    r = rep.results
    gaps = [g["min_gap"] for g in r.get("gaps", [])]
    detail = (
        f"symmetric solve {r['symmetric_solve']['status']}, asymmetry ratio {r['asymmetry']['ratio']} "
        f"({r['asymmetry']['statuses']}), min gap {min(gaps):.2e}"
    )
    return rep.status == "ok", detail


def criterion_9():
    rep = run_command("bernstein")
    r = rep.results
    return rep.status == "ok", f"statuses {r['statuses']}, scaled ratio {r['bernstein']['scaled_ratio']}"


def criterion_10():
    parts, ok = [], True
    for label, ov in (("supercritical", SUPERCRITICAL), ("critical", CRITICAL)):
        rep = run_command("liouville-demo", overrides=ov)
        t = rep.results["trend"]
        ok &= rep.status == "ok" and rep.diagnostics["checks"].get("theta_positive", False)
        parts.append(f"{label}: theta {t['theta']}, statuses {t['statuses']}")
    return bool(ok), "; ".join(parts)


def criterion_11():
    rep = run_command("verify-barriers")
    r = rep.results
    audit = r.get("exponent_audit", {})
    slopes = all(isinstance(audit.get(k), float) and math.isfinite(audit[k]) for k in ("lhs_slope", "rhs_slope"))
    ident = isinstance(audit.get("paper_identity_holds"), bool)
    sup, sub = r["super"]["sweep"], (r.get("sub") or {}).get("sweep", [])
    reach = bool(sup) and bool(sub) and sup[-1]["amplitude"] >= 1e6 * (1 - 1e-12) and sub[0]["amplitude"] <= 1e-6 * (1 + 1e-12)
    sets = all("violation_radii" in t for t in sup + sub)
    tables = {"margins_super.csv", "margins_sub.csv"} <= set(rep.files())
    ok = slopes and ident and reach and sets and tables and rep.status == "ok"
    return ok, (
        f"lhs slope {audit.get('lhs_slope'):.3f}, rhs slope {audit.get('rhs_slope'):.3f}, identity holds "
        f"{audit.get('paper_identity_holds')}, super sweep to {sup[-1]['amplitude']:.0e}, sub sweep to {sub[0]['amplitude']:.0e}"
    )


def criterion_12():
    extra = {"power-solution": POWER, "liouville-demo": SUPERCRITICAL}
    mismatched = []
    for name in COMMANDS:
        first = run_command(name, overrides={**extra.get(name, {}), "seed": 5})
        again = run_command(name, config=first.config)
        a = {k: v for k, v in first.files().items() if k != "timings.json"}
        b = {k: v for k, v in again.files().items() if k != "timings.json"}
        if a != b:
            mismatched.append(name)
    return not mismatched, f"{len(COMMANDS) - len(mismatched)}/{len(COMMANDS)} commands replay byte-identically" + (
        f"; mismatched: {mismatched}" if mismatched else ""
    )


CRITERIA = {
    1: ("operator oracles", criterion_1),
    2: ("maximum principle", criterion_2),
    3: ("cutoff scaling", criterion_3),
    4: ("exact power solution", criterion_4),
    5: ("manufactured-solution recovery", criterion_5),
    6: ("monotone iteration", criterion_6),
    7: ("exhaustion and decay", criterion_7),
    8: ("symmetry emergence", criterion_8),
    9: ("Bernstein boundedness", criterion_9),
    10: ("Liouville trends", criterion_10),
    11: ("claim audit completeness", criterion_11),
    12: ("determinism and replay", criterion_12),
}


def format_line(number, title, passed, detail, seconds):
    return f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {title} ({seconds:.1f}s): {detail}"


def run_criterion(number):
    title, fn = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crash is a failure of the criterion, reported like one
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    line = format_line(number, title, bool(passed), detail, time.perf_counter() - t0)
    RESULTS[number] = line
    return bool(passed), line


@pytest.mark.acceptance
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_acceptance_criterion(number):
    passed, line = run_criterion(number)
    print(line)
    assert passed, line


if __name__ == "__main__":
    sys.path.insert(0, __file__.rsplit("/", 1)[0])
    ok = True
    for n in sorted(CRITERIA):
        p, line = run_criterion(n)
        print(line, flush=True)
        ok &= p
    sys.exit(0 if ok else 1)
