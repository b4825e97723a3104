"""Numerical trend checks for symmetry, gradient bounds, Liouville behaviour and decay.

Conclusions such as "u is constant" cannot be certified by a finite
computation; every report here records a trend (a sign, a fitted slope, a
bounded ratio) and says so in its ``note`` field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .functions import LineFunction
from .operator import eta_R
from .problem import ProblemSpec, classify_regime, eval_dG, eval_dH, eval_G, eval_H, weight

TREND_NOTE = "numerical trend only; a finite computation cannot certify that a solution is constant or symmetric"


def _derivative(u, x, h: float = 1e-6):
    x = np.asarray(x, dtype=float)
    return (u(x + h) - u(x - h)) / (2.0 * h)


# ---------------------------------------------------------------------------
# moving planes


def moving_plane_gap(u: LineFunction, lam: float) -> dict:
    """Minimum of ``w(x) = u(2 lam - x) - u(x)`` over grid points ``x < lam``."""
    x = u.grid[u.grid < lam]
    if x.size == 0:
        raise ValueError("no grid points left of the plane")
    gap = u(2.0 * lam - x) - u(x)
    k = int(np.argmin(gap))
    return {"lambda": lam, "min_gap": float(gap[k]), "argmin": float(x[k]), "x": x.tolist(), "gap": gap.tolist()}


def narrow_region_probe(u: LineFunction, lam: float, deltas: Sequence[float], samples: int = 64) -> dict:
    """Minimum of the reflection gap on each slab ``lam - delta < x < lam``.

    The slab is sampled at the grid points it contains plus ``samples``
    uniform points, so arbitrarily thin slabs are still probed.
    """
    out = []
    for d in deltas:
        if d <= 0:
            raise ValueError("slab widths must be > 0")
        xs = np.linspace(lam - d, lam, samples + 1, endpoint=False)[1:]
        xg = u.grid[(u.grid > lam - d) & (u.grid < lam)]
        x = np.unique(np.concatenate([xs, xg]))
        gap = u(2.0 * lam - x) - u(x)
        k = int(np.argmin(gap))
        out.append({"delta": float(d), "min_gap": float(gap[k]), "argmin": float(x[k])})
    return {"lambda": lam, "slabs": out}


def linearization_coeffs(
    prob: ProblemSpec,
    u: LineFunction,
    lam: float,
    K: Sequence[float],
    samples: int = 101,
    nodes: int = 16,
) -> dict:
    """``sup_K |a_lam|`` and ``sup_K |b_lam|`` for the linearised reflection equation.

    ``a = int_0^1 w H'(U_t) G(P_t) dt`` and ``b = int_0^1 w H(U_t) G'(P_t) dt``
    with ``U_t = u_lam + t (u - u_lam)``, ``P_t`` the matching gradients and
    ``w`` the Henon weight.  Points where ``|P_t| < 1e-8`` for some node are
    excluded when ``G`` is not differentiable at 0, and counted.
    """
    lo, hi = float(K[0]), float(K[1])
    if not lo < hi <= lam:
        raise ValueError("K must be an interval left of the plane")
    if prob.H.family == "singular":
        raise ValueError("linearization needs a differentiable nondecreasing H")
    x = np.linspace(lo, hi, samples)
    xr = 2.0 * lam - x
    u_x, u_r = u(x), u(xr)
    g_x, g_r = _derivative(u, x), -_derivative(u, xr)
    tg, wg = np.polynomial.legendre.leggauss(nodes)
    tg, wg = 0.5 * (tg + 1.0), 0.5 * wg
    Ut = u_r[:, None] + tg[None, :] * (u_x - u_r)[:, None]
    Pt = g_r[:, None] + tg[None, :] * (g_x - g_r)[:, None]
    wgt = weight(prob, x)[:, None]
    singular_G = any(p < 1.0 for _, p in prob.G.terms)
    excluded = np.zeros(x.size, dtype=bool)
    if singular_G:
        excluded = np.min(np.abs(Pt), axis=1) < 1e-8
    Ut_pos = np.maximum(Ut, 0.0)
    a = (wgt * eval_dH(prob.H, Ut_pos) * eval_G(prob.G, Pt, magnitude=True)) @ wg
    with np.errstate(invalid="ignore"):
        dG = np.sign(Pt) * eval_dG(prob.G, Pt)
        b = (wgt * eval_H(prob.H, Ut_pos) * np.where(np.isfinite(dG), dG, 0.0)) @ wg
    keep = ~excluded
    return {
        "lambda": lam,
        "K": [lo, hi],
        "sup_a": float(np.max(np.abs(a[keep]))) if keep.any() else math.nan,
        "sup_b": float(np.max(np.abs(b[keep]))) if keep.any() else math.nan,
        "excluded": int(excluded.sum()),
        "dist_to_origin": float(min(abs(lo), abs(hi)) if lo * hi > 0 else 0.0),
    }


# ---------------------------------------------------------------------------
# Bernstein transform


@dataclass
class BernsteinReport:
    R: List[float] = field(default_factory=list)
    M_R: List[float] = field(default_factory=list)
    x_R: List[float] = field(default_factory=list)
    F_max: List[float] = field(default_factory=list)
    lhs: List[float] = field(default_factory=list)
    scaled: List[float] = field(default_factory=list)
    x_R_inside: List[bool] = field(default_factory=list)
    min_gap: List[float] = field(default_factory=list)

    @property
    def scaled_ratio(self) -> float:
        v = np.asarray(self.scaled)
        v = v[v > 0]
        return float(v.max() / v.min()) if v.size else math.nan

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["scaled_ratio"] = self.scaled_ratio
        d["note"] = TREND_NOTE
        return d


def bernstein_scan(prob: ProblemSpec, solutions: Dict[float, object], R_list: Sequence[float]) -> BernsteinReport:
    """Maximise ``F_R = eta_R^2 |grad w|^2`` with ``w = -log(M_R - u)`` on ``B_{2R}``.

    ``solutions[R]`` is a sampled function whose grid covers ``B_{2R}``.
    """
    if len(prob.G.terms) != 1:
        raise ValueError("bernstein_scan needs a single-term G")
    s, gamma, p = prob.kernel.s, prob.gamma, prob.G.p_max
    rep = BernsteinReport()
    for R in R_list:
        R = float(R)
        f = solutions[R]
        x = f.grid[np.abs(f.grid) <= 2.0 * R]
        u = f.values[np.abs(f.grid) <= 2.0 * R]
        from .solver import gradient_on_grid

        g = gradient_on_grid(nodes=f.grid, values=f.values, radial=f.domain == "radial")[np.abs(f.grid) <= 2.0 * R]
        M_R = 1.0 + float(np.max(u))
        gap = M_R - u
        if np.any(gap <= 0):
            raise ArithmeticError("M_R - u must stay positive")
        grad_w = np.abs(g) / gap
        F = eta_R(x, R) ** 2 * grad_w**2
        k = int(np.argmax(F))
        lhs = R**gamma * eval_H(prob.H, max(u[k], 0.0)) * gap[k] ** (p - 1.0) * grad_w[k] ** p
        rep.R.append(R)
        rep.M_R.append(M_R)
        rep.x_R.append(float(x[k]))
        rep.F_max.append(float(F[k]))
        rep.lhs.append(float(lhs))
        rep.scaled.append(float(lhs * R ** (2.0 * s)))
        rep.x_R_inside.append(bool(abs(x[k]) <= R))
        rep.min_gap.append(float(gap.min()))
    return rep


# ---------------------------------------------------------------------------
# Liouville trend and decay


def fit_power_law(R, y) -> float:
    """``Theta`` in ``y ~ C R^{-Theta}`` by least squares on logs."""
    R, y = np.asarray(R, dtype=float), np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("trend values must be positive")
    return float(-np.polyfit(np.log(R), np.log(y), 1)[0])


@dataclass
class LiouvilleTrend:
    R: List[float]
    sup_grad: List[float]
    theta: float
    regime: str
    statuses: List[str]
    note: str = TREND_NOTE

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def liouville_trend(prob, R_list, ext_family, grid, it=None, opts=None, require_regime: bool = True) -> LiouvilleTrend:
    """``sup_{B_{R/2}} |grad u_R|`` along an exhaustion and the fitted decay rate ``Theta``."""
    from .solver import exhaust

    regime = classify_regime(prob).regime
    if require_regime and regime not in ("Supercritical", "Critical"):
        raise ValueError(f"liouville_trend expects a supercritical or critical problem, got {regime}")
    run = exhaust(prob, R_list, ext_family, grid, it, opts)
    sups = []
    for rep in run["reports"]:
        sel = np.abs(rep.nodes) <= rep.R / 2.0
        sups.append(float(np.max(np.abs(rep.gradient[sel]))))
    Rs = run["R"]
    theta = fit_power_law(Rs, sups) if len(Rs) >= 2 else math.nan
    return LiouvilleTrend(Rs, sups, theta, regime, [r.status for r in run["reports"]])


@dataclass
class DecayFit:
    window: List[float]
    slope: float
    intercept: float
    expected: Optional[float]
    rel_error: Optional[float]
    points: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def decay_fit(u, window: Sequence[float], expected_beta: Optional[float] = None, samples: int = 32) -> DecayFit:
    """Least-squares slope of ``log u`` against ``log(1+r^2)`` on ``window``.

    Grid nodes inside the window are used when there are at least 4 of them,
    otherwise ``samples`` log-spaced evaluations of the interpolant.
    """
    lo, hi = float(window[0]), float(window[1])
    if not 0 <= lo < hi:
        raise ValueError("window must satisfy 0 <= r_lo < r_hi")
    grid = getattr(u, "grid", None)
    if grid is not None and (lo < max(grid[0], 0.0) - 1e-12 or hi > grid[-1] + 1e-12):
        raise ValueError("window must lie inside the grid")
    r = None
    if grid is not None:
        sel = (grid >= lo) & (grid <= hi)
        if sel.sum() >= 4:
            r, v = grid[sel], np.asarray(u.values)[sel]
    if r is None:
        r = np.geomspace(max(lo, 1e-12), hi, samples)
        v = u(r)
    if np.any(v <= 0):
        raise ValueError("decay_fit needs u > 0 on the window")
    slope, intercept = np.polyfit(np.log1p(r * r), np.log(v), 1)
    expected = None if expected_beta is None else -float(expected_beta)
    rel = None if expected is None else float(abs(slope - expected) / abs(expected))
    return DecayFit([lo, hi], float(slope), float(intercept), expected, rel, int(r.size))


def uniqueness_probe(
    prob: ProblemSpec,
    normalization: float,
    ext_families: Sequence[Callable],
    R_list: Sequence[float],
    grid,
    it=None,
    opts=None,
    core: float = 2.0,
    normalizations: Optional[Sequence[float]] = None,
) -> dict:
    """Exhaust with two exterior families, rescale each solution to ``u(0) = a``, compare on ``B_core``.

    ``normalizations`` gives a separate ``a`` per family (detecting genuinely
    different solutions).
    """
    from .solver import core_difference, exhaust

    if len(ext_families) != 2:
        raise ValueError("uniqueness_probe compares exactly two exterior families")
    norms = list(normalizations) if normalizations is not None else [normalization, normalization]
    runs = [exhaust(prob, R_list, fam, grid, it, opts) for fam in ext_families]
    disc = []
    for r1, r2 in zip(runs[0]["reports"], runs[1]["reports"]):
        f1, f2 = r1.function, r2.function
        u1 = f1(np.array([0.0]))[0]
        u2 = f2(np.array([0.0]))[0]
        s1, s2 = norms[0] / u1, norms[1] / u2

        def g1(x, f=f1, c=s1):
            return c * f(x)

        def g2(x, f=f2, c=s2):
            return c * f(x)

        disc.append(core_difference(g1, g2, core, mode=grid.mode))
    return {
        "R": runs[0]["R"],
        "discrepancy": disc,
        "statuses": [[r.status for r in run["reports"]] for run in runs],
        "normalizations": norms,
    }
