"""Fast closed-form examples run by ``fraclab selftest``.

Each check returns ``(passed, detail)``; the suite never raises, so a broken
check shows up as a failed row instead of aborting the run.
"""

from __future__ import annotations

import math
import os
import tempfile
from typing import Callable, List, Tuple

import numpy as np

from .barriers import BarrierSpec, NotFound, amplitude_search, barrier_eval, inequality_scan
from .functions import RadialFunction, TailModel, bracket_profile, constant_function
from .io import csv_text, emit_json, json_text
from .kernels import KernelSpec, QuadratureOptions, kernel_density, oscillating_modulation
from .operator import cutoff_square, evaluate_L
from .problem import GSpec, HSpec, ProblemSpec, build_power_solution, classify_regime, eval_G, eval_H, eval_rhs
from .qualitative import decay_fit, moving_plane_gap
from .solver import ExteriorData, GridSpec, assemble_operator, build_grid, gradient_on_grid, linear_solve

_FAST = QuadratureOptions(near_panels=6, far_panels=24, order=6)


def _raises(fn, exc=Exception) -> Tuple[bool, str]:
    try:
        fn()
    except exc as e:
        return True, f"{type(e).__name__}: {e}"
    return False, "no error raised"


def _close(value, target, tol) -> Tuple[bool, str]:
    return bool(abs(value - target) <= tol), f"value {value!r}, target {target!r}"


def _kernel_raw():
    return _close(kernel_density(KernelSpec(1, 0.5), 2.0), 0.25, 1e-15)


def _kernel_modulated():
    mod = oscillating_modulation(1.0, 1.5)
    k = KernelSpec(2, 0.75, 1.0, 1.5, modulation=mod)
    return _close(kernel_density(k, math.pi / 2), 1.5 * (math.pi / 2) ** -3.5, 1e-12)


def _constant_annihilated():
    v = evaluate_L(KernelSpec(1, 0.5), constant_function(7.0, "line"), 0.3, _FAST).value
    return _close(v, 0.0, 1e-10)


def _cutoff_plateau():
    v = evaluate_L(KernelSpec(1, 0.5), cutoff_square(2.0), 0.0, _FAST).value
    return bool(v <= 1e-8), f"L(eta_R^2)(0) = {v!r}"


def _H_values():
    ok = eval_H(HSpec("polynomial", 2, 1.0), 3.0) == 10.0 and eval_H(HSpec("exponential"), 0.0) == 1.0
    return ok, "H(3) = 10 (polynomial m=2), H(0) = 1 (exponential)"


def _H_singular():
    return _raises(lambda: eval_H(HSpec("singular", 1.0), 0.0), ValueError)


def _G_values():
    a = eval_G(GSpec.single(0.5), np.array([4.0, 0.0]))
    b = eval_G(GSpec.single(0.5), np.zeros(2))
    c = eval_G(GSpec(((1.0, 0.5), (2.0, 2.0))), np.array([1.0]))
    return (a == 2.0 and b == 0.0 and c == 3.0), f"G values {a}, {b}, {c}"


def _rhs_weight():
    prob = ProblemSpec(H=HSpec(), G=GSpec.single(1.0), gamma=2.0)
    v = eval_rhs(prob, np.array([3.0, 0.0]), 0.5, np.array([2.0, 0.0]))
    return _close(v, 18.0, 1e-12)


def _rhs_singular_weight():
    prob = ProblemSpec(gamma=-1.0)
    return _raises(lambda: eval_rhs(prob, np.array([0.0]), 1.0, np.array([1.0])), ValueError)


def _classify_critical():
    prob = ProblemSpec(KernelSpec(1, 0.5), G=GSpec.single(0.5), gamma=0.5)
    r = classify_regime(prob).regime
    return r == "Critical", f"regime {r}"


def _classify_subcritical():
    prob = ProblemSpec(KernelSpec(1, 0.9), G=GSpec.single(0.5), gamma=-0.6)
    rep = classify_regime(prob)
    return (rep.regime == "Subcritical" and abs(rep.beta - 1.4) < 1e-12), f"{rep.regime}, beta {rep.beta}"


def _power_p_one():
    prob = ProblemSpec(KernelSpec(1, 0.9, normalization="fractional"), HSpec("polynomial", 0, 1.0), GSpec.single(1.0))
    ok, detail = _raises(lambda: build_power_solution(prob), ValueError)
    return ok and "1-p vanishes" in detail, detail


def _barrier_closed_form():
    v0, g0 = barrier_eval(BarrierSpec(1.0, 1.0), np.zeros(2))
    v1, g1 = barrier_eval(BarrierSpec(1.0, 2.0), np.array([1.0, 0.0]))
    ok = v0 == 1.0 and np.all(g0 == 0) and v1 == 1.0 and abs(np.linalg.norm(g1) - 1.0) < 1e-15
    return ok, f"({v0}, {g0.tolist()}), ({v1}, |grad| {np.linalg.norm(g1)})"


def _empty_sweep():
    res, _ = amplitude_search(ProblemSpec(), 0.5, "super", [], radii=[1.0])
    return isinstance(res, NotFound), repr(res)


def _sub_singular():
    prob = ProblemSpec(H=HSpec("singular", 1.0))
    return _raises(lambda: amplitude_search(prob, 0.5, "sub", [1.0], radii=[1.0]), ValueError)


def _margin_columns():
    t = inequality_scan(ProblemSpec(), BarrierSpec(0.5), [1.0], unit_lhs=np.array([-0.1]))
    header, row = csv_text(t.columns, t.rows()).splitlines()
    values = [float(v) for v in row.split(",")]
    ok = header == "r,lhs,rhs,margin" and values == [1.0, -0.1, t.rhs[0], t.margin[0]]
    return ok, f"{header} / {row}"


def _grid_radial():
    nodes = build_grid(GridSpec("radial", 8.0, 64))
    return (nodes.size == 64 and nodes[-1] == 8.0), f"{nodes.size} nodes, last {nodes[-1]}"


def _grid_line_symmetric():
    nodes = build_grid(GridSpec("line", 8.0, 64))
    return bool(np.max(np.abs(nodes + nodes[::-1])) <= 1e-12), "node k + node M-1-k"


def _constant_solve():
    kernel = KernelSpec(1, 0.5, normalization="fractional")
    op = assemble_operator(kernel, build_grid(GridSpec("radial", 4.0, 32)), "radial", _FAST)
    u = linear_solve(op, np.zeros(op.unknown.size), ExteriorData(c=0.3, beta=0.0))
    return _close(float(np.max(np.abs(u - 0.3))), 0.0, 1e-8)


def _gradient_ramp():
    x = np.linspace(-1.0, 1.0, 21)
    g = gradient_on_grid(nodes=x, values=3.0 * x + 1.0, radial=False)
    return _close(float(np.max(np.abs(g - 3.0))), 0.0, 1e-12)


def _moving_plane_even():
    x = np.linspace(-8.0, 8.0, 161)
    tail = TailModel("power", 1.0, 2.0)
    from .functions import LineFunction

    u = LineFunction(x, 1.0 / (1.0 + x * x), tail, tail)
    gap = moving_plane_gap(u, -1.0)["min_gap"]
    return bool(gap >= 0.0), f"min gap {gap!r}"


def _decay_exact():
    r = np.linspace(0.0, 8.0, 65)
    u = RadialFunction(r, 3.0 * (1.0 + r * r) ** -0.7, TailModel("power", 3.0, 1.4))
    fit = decay_fit(u, (2.0, 4.0), 0.7)
    return _close(fit.slope, -0.7, 1e-10)


def _json_deterministic():
    rep = {"b": [1.0, np.float64(0.1)], "a": {"z": 1, "y": np.int64(2)}}
    return json_text(rep) == json_text(rep), "repeated emission"


def _overwrite_refused():
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "report.json")
        emit_json({"x": 1}, path)
        ok, _ = _raises(lambda: emit_json({"x": 2}, path), FileExistsError)
    return ok, "second emission to the same path refused"


CHECKS: List[Tuple[str, Callable[[], Tuple[bool, str]]]] = [
    ("kernel_density raw", _kernel_raw),
    ("kernel_density modulated", _kernel_modulated),
    ("L annihilates constants", _constant_annihilated),
    ("cutoff plateau sign", _cutoff_plateau),
    ("H representatives", _H_values),
    ("singular H at 0 rejected", _H_singular),
    ("G representatives", _G_values),
    ("Henon weight", _rhs_weight),
    ("singular weight at 0 rejected", _rhs_singular_weight),
    ("critical balance", _classify_critical),
    ("subcritical beta", _classify_subcritical),
    ("power solution p = 1 rejected", _power_p_one),
    ("barrier closed form", _barrier_closed_form),
    ("empty sweep gives NotFound", _empty_sweep),
    ("sub search with singular H rejected", _sub_singular),
    ("margin table columns", _margin_columns),
    ("radial grid", _grid_radial),
    ("line grid symmetry", _grid_line_symmetric),
    ("constant exterior solve", _constant_solve),
    ("gradient of a ramp", _gradient_ramp),
    ("moving plane on even data", _moving_plane_even),
    ("exact decay fit", _decay_exact),
    ("deterministic JSON", _json_deterministic),
    ("overwrite refused", _overwrite_refused),
]


def run_selftest() -> List[dict]:
    rows = []
    for name, fn in CHECKS:
        try:
            passed, detail = fn()
        except Exception as e:  # a crashing check is a failed check
            passed, detail = False, f"{type(e).__name__}: {e}"
        rows.append({"check": name, "passed": bool(passed), "detail": detail})
    return rows
