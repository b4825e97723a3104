"""Power barriers ``A (1+|x|^2)^{-beta}`` and pointwise audits of their inequalities.

Every audit measures and reports; none of them assumes the inequality it
tabulates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .functions import bracket_profile
from .kernels import KernelSpec, QuadratureOptions
from .operator import evaluate_L_many
from .problem import ProblemSpec, eval_G, eval_H, subcritical_beta, weight

BARRIER_KINDS = ("super", "sub")


def default_radii(prob: Optional[ProblemSpec] = None) -> np.ndarray:
    """41 log-spaced radii in [1e-2, 1e2] plus the origin.

    The origin is dropped when the weight is singular there.
    """
    radii = np.concatenate([[0.0], np.geomspace(1e-2, 1e2, 41)])
    if prob is not None and prob.gamma < 0 and prob.eps == 0.0:
        radii = radii[1:]
    return radii


@dataclass(frozen=True)
class BarrierSpec:
    beta: float
    amplitude: float = 1.0
    kind: str = "super"

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.amplitude <= 0:
            raise ValueError("amplitude must be > 0")
        if self.kind not in BARRIER_KINDS:
            raise ValueError(f"kind must be one of {BARRIER_KINDS}")

    def profile(self, domain: str = "radial"):
        return bracket_profile(self.beta, self.amplitude, domain)

    def to_dict(self) -> dict:
        return {"beta": self.beta, "amplitude": self.amplitude, "kind": self.kind}


def barrier_eval(b: BarrierSpec, x):
    """Value and gradient of ``A (1+|x|^2)^{-beta}`` at a point (scalar or vector)."""
    x = np.asarray(x, dtype=float)
    r2 = float(np.dot(x.ravel(), x.ravel()))
    value = b.amplitude * (1.0 + r2) ** (-b.beta)
    grad = -2.0 * b.beta * b.amplitude * x / (1.0 + r2) ** (b.beta + 1.0)
    return value, grad


def barrier_radial(b: BarrierSpec, r):
    """Value and ``|grad|`` on an array of radii."""
    r = np.abs(np.asarray(r, dtype=float))
    value = b.amplitude * (1.0 + r * r) ** (-b.beta)
    grad = 2.0 * b.beta * b.amplitude * r / (1.0 + r * r) ** (b.beta + 1.0)
    return value, grad


def _loglog_slope(r, y, r_min):
    sel = (r >= r_min) & (np.abs(y) > 0)
    if sel.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log1p(r[sel] ** 2), np.log(np.abs(y[sel])), 1)[0])


def decay_bound_audit(
    kernel: KernelSpec,
    beta: float,
    amplitude: float = 1.0,
    radii=None,
    opts: Optional[QuadratureOptions] = None,
) -> dict:
    """Scaled column ``|L U_A| (1+r^2)^{beta+s} / A`` and the asymptotic log-log slope.

    When ``2 beta >= n`` the far-field mass of the profile is finite and the
    operator decays like ``(1+r^2)^{-(n/2+s)}`` instead of
    ``(1+r^2)^{-(beta+s)}``; such runs are flagged ``tail_dominated``.
    """
    radii = default_radii() if radii is None else np.asarray(radii, dtype=float)
    s, n = kernel.s, kernel.n
    U = bracket_profile(beta, amplitude)
    lhs, err = evaluate_L_many(kernel, U, radii, opts)
    scaled = np.abs(lhs) * (1.0 + radii**2) ** (beta + s) / amplitude
    r_max = float(radii.max())
    slope = _loglog_slope(radii, lhs, r_max / 10.0)
    nz = scaled[scaled > 0]
    tail_dominated = bool(2.0 * beta >= n)
    return {
        "radii": radii.tolist(),
        "lhs": lhs.tolist(),
        "quadrature_error": err.tolist(),
        "scaled": scaled.tolist(),
        "scaled_sup": float(scaled.max()),
        "scaled_ratio": float(nz.max() / nz.min()) if nz.size else math.inf,
        "sign_changes": int(np.sum(np.diff(np.sign(lhs[lhs != 0])) != 0)),
        "slope": slope,
        "slope_expected": -(n / 2.0 + s) if tail_dominated and 2 * beta > n else -(beta + s),
        "tail_dominated": tail_dominated,
    }


@dataclass
class MarginTable:
    """Pointwise margins of a barrier inequality; ``margin >= 0`` means it holds.

    ``lhs`` is the generator ``L U_A``.  For ``super`` the margin is
    ``rhs - lhs``, for ``sub`` it is ``lhs - rhs``.
    """

    radii: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    kind: str
    amplitude: float
    beta: float
    margin: np.ndarray = field(init=False)

    def __post_init__(self):
        self.margin = self.rhs - self.lhs if self.kind == "super" else self.lhs - self.rhs

    @property
    def min_margin(self) -> float:
        return float(self.margin.min())

    @property
    def violation_radii(self) -> list:
        return self.radii[self.margin < 0].tolist()

    @property
    def holds(self) -> bool:
        return self.min_margin >= 0

    columns = ("r", "lhs", "rhs", "margin")

    def rows(self):
        """CSV rows in the column order ``r, lhs, rhs, margin``."""
        return [[float(r), float(a), float(b), float(m)] for r, a, b, m in zip(self.radii, self.lhs, self.rhs, self.margin)]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "amplitude": self.amplitude,
            "beta": self.beta,
            "convention": "generator",
            "r": self.radii.tolist(),
            "lhs": self.lhs.tolist(),
            "rhs": self.rhs.tolist(),
            "margin": self.margin.tolist(),
            "min_margin": self.min_margin,
            "violation_radii": self.violation_radii,
        }


def _unit_lhs(prob: ProblemSpec, beta: float, radii, opts) -> np.ndarray:
    lhs, _ = evaluate_L_many(prob.kernel, bracket_profile(beta, 1.0), radii, opts)
    return lhs


def _rhs(prob: ProblemSpec, b: BarrierSpec, radii) -> np.ndarray:
    value, grad = barrier_radial(b, radii)
    return weight(prob, radii) * eval_H(prob.H, value) * eval_G(prob.G, grad, magnitude=True)


def inequality_scan(
    prob: ProblemSpec,
    b: BarrierSpec,
    radii=None,
    opts: Optional[QuadratureOptions] = None,
    unit_lhs: Optional[np.ndarray] = None,
) -> MarginTable:
    """Tabulate ``L U_A`` against ``w H(U_A) G(grad U_A)`` at the sample radii.

    ``unit_lhs`` (``L`` of the unit-amplitude profile at the same radii) may be
    passed to skip the quadrature; ``L`` is linear so ``lhs = A * unit_lhs``.
    """
    radii = default_radii(prob) if radii is None else np.asarray(radii, dtype=float)
    if unit_lhs is None:
        unit_lhs = _unit_lhs(prob, b.beta, radii, opts)
    lhs = b.amplitude * np.asarray(unit_lhs, dtype=float)
    return MarginTable(radii, lhs, _rhs(prob, b, radii), b.kind, b.amplitude, b.beta)


@dataclass(frozen=True)
class NotFound:
    worst_radius: Optional[float] = None
    worst_margin: Optional[float] = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {"found": False, **self.__dict__}


def amplitude_search(
    prob: ProblemSpec,
    beta: float,
    kind: str,
    sweep: Sequence[float],
    radii=None,
    opts: Optional[QuadratureOptions] = None,
):
    """Smallest (super) or largest (sub) sweep amplitude whose margin table holds.

    Returns ``(amplitude, tables)`` on success or ``(NotFound, tables)``.
    """
    if kind not in BARRIER_KINDS:
        raise ValueError(f"kind must be one of {BARRIER_KINDS}")
    if kind == "sub" and prob.H.theta < 0:
        raise ValueError("subsolution search needs a lower growth order theta >= 0 (singular H is unsupported)")
    sweep = np.asarray(sweep, dtype=float)
    if sweep.size == 0:
        return NotFound(reason="empty sweep"), []
    if np.any(np.diff(sweep) <= 0):
        raise ValueError("sweep must be increasing")
    radii = default_radii(prob) if radii is None else np.asarray(radii, dtype=float)
    unit = _unit_lhs(prob, beta, radii, opts)
    tables = [inequality_scan(prob, BarrierSpec(beta, float(a), kind), radii, unit_lhs=unit) for a in sweep]
    ok = [t.holds for t in tables]
    order = range(len(tables)) if kind == "super" else reversed(range(len(tables)))
    for k in order:
        if ok[k]:
            return float(sweep[k]), tables
    worst = max(tables, key=lambda t: t.min_margin)
    k = int(np.argmin(worst.margin))
    return NotFound(float(worst.radii[k]), worst.min_margin, "no amplitude in the sweep satisfies the inequality"), tables


def exponent_audit(
    prob: ProblemSpec,
    beta: float,
    radii=None,
    opts: Optional[QuadratureOptions] = None,
    amplitude: float = 1.0,
) -> dict:
    """Asymptotic slopes of both sides at ``U_A`` and the algebraic exponent-matching check.

    Slopes are of ``log|.|`` against ``log(1+r^2)`` over the last decade of
    radii.  The algebraic check compares ``beta*(1-p)`` with
    ``s + p/2 - gamma/2`` at ``beta* = (2s+gamma-p)/(1-p)``.
    """
    if len(prob.G.terms) != 1:
        raise ValueError("exponent_audit needs a single-term G")
    s, gamma, p = prob.kernel.s, prob.gamma, prob.G.p_max
    radii = default_radii(prob) if radii is None else np.asarray(radii, dtype=float)
    b = BarrierSpec(beta, amplitude, "super")
    table = inequality_scan(prob, b, radii, opts)
    r_min = float(radii.max()) / 10.0
    out = {
        "beta": beta,
        "lhs_slope": _loglog_slope(radii, table.lhs, r_min),
        "rhs_slope": _loglog_slope(radii, table.rhs, r_min),
        "rhs_slope_closed_form": gamma / 2.0 - p * beta - p / 2.0,
        "lhs_slope_bound": -(beta + s),
        "match1_rhs": s + p / 2.0 - gamma / 2.0,
    }
    if p == 1.0:
        out.update(beta_star=None, match1_lhs=None, paper_identity_holds=None, note="beta* undefined at p = 1")
        return out
    beta_star = subcritical_beta(s, gamma, p)
    lhs1 = beta_star * (1.0 - p)
    out.update(
        beta_star=beta_star,
        match1_lhs=lhs1,
        paper_identity_holds=bool(lhs1 >= out["match1_rhs"] - 1e-12),
        exponents_equal=bool(abs(lhs1 - out["match1_rhs"]) <= 1e-12),
    )
    return out
