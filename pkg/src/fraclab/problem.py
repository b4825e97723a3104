"""Nonlinearities ``H(u)``, ``G(grad u)``, the Henon weight and regime classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .functions import power_function
from .kernels import KernelSpec, QuadratureOptions
from .operator import CONVENTIONS, evaluate_L, power_constant

H_FAMILIES = ("polynomial", "logarithmic", "exponential", "singular")


@dataclass(frozen=True)
class HSpec:
    """Representatives: ``H0 + u^m``, ``H0 + log(1+u)``, ``e^u``, ``u^{-m}``.

    The polynomial family with ``m = 0`` is the constant ``H0``.
    """

    family: str = "polynomial"
    m: float = 0.0
    H0: float = 1.0
    M: Optional[float] = None
    theta: Optional[float] = None

    def __post_init__(self):
        if self.family not in H_FAMILIES:
            raise ValueError(f"H family must be one of {H_FAMILIES}, got {self.family!r}")
        if self.m < 0:
            raise ValueError("m must be >= 0")
        if self.family in ("polynomial", "logarithmic") and self.H0 <= 0:
            raise ValueError("H0 must be > 0")
        if self.M is None:
            object.__setattr__(self, "M", self.H0 + 1.0)
        if self.theta is None:
            object.__setattr__(self, "theta", -self.m if self.family == "singular" else 0.0)

    @property
    def nondecreasing(self) -> bool:
        return self.family != "singular" or self.m == 0

    def to_dict(self) -> dict:
        return {"family": self.family, "m": self.m, "H0": self.H0, "M": self.M, "theta": self.theta}


def eval_H(h: HSpec, u):
    u_arr = np.asarray(u, dtype=float)
    if h.family == "singular":
        if np.any(u_arr <= 0):
            raise ValueError("singular H(u) = u^{-m} needs u > 0")
        out = u_arr ** (-h.m)
    else:
        if np.any(u_arr < 0):
            raise ValueError("H is defined on u >= 0")
        if h.family == "polynomial":
            # m = 0 means "no power term", so H0 = 1, m = 0 is the constant 1
            out = h.H0 + u_arr**h.m if h.m > 0 else np.full_like(u_arr, h.H0)
        elif h.family == "logarithmic":
            out = h.H0 + np.log1p(u_arr)
        else:
            out = np.exp(u_arr)
    return float(out) if out.ndim == 0 else out


def eval_dH(h: HSpec, u):
    u_arr = np.asarray(u, dtype=float)
    if h.family == "polynomial":
        if h.m == 0:
            out = np.zeros_like(u_arr)
        else:
            out = h.m * u_arr ** (h.m - 1.0)
    elif h.family == "logarithmic":
        out = 1.0 / (1.0 + u_arr)
    elif h.family == "exponential":
        out = np.exp(u_arr)
    else:
        out = -h.m * u_arr ** (-h.m - 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GSpec:
    """``G(z) = sum c_i |z|^{p_i}`` (isotropic)."""

    terms: Tuple[Tuple[float, float], ...] = ((1.0, 1.0),)

    def __post_init__(self):
        terms = tuple((float(c), float(p)) for c, p in self.terms)
        for c, p in terms:
            if c <= 0 or p <= 0:
                raise ValueError("G terms need c_i > 0 and p_i > 0")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls, p: float, c: float = 1.0) -> "GSpec":
        return cls(((c, p),))

    @property
    def p_min(self) -> float:
        return min((p for _, p in self.terms), default=math.nan)

    @property
    def p_max(self) -> float:
        return max((p for _, p in self.terms), default=math.nan)

    @property
    def c1(self) -> float:
        return min((c for c, _ in self.terms), default=0.0)

    @property
    def c2(self) -> float:
        return sum(c for c, _ in self.terms)

    def to_dict(self) -> dict:
        return {"terms": [list(t) for t in self.terms]}


def _grad_norm(grad):
    g = np.asarray(grad, dtype=float)
    return np.abs(g) if g.ndim == 0 else np.linalg.norm(g, axis=-1) if g.ndim > 1 else float(np.linalg.norm(g))


def eval_G(g: GSpec, grad, magnitude: bool = False):
    """``G`` of a gradient vector (last axis), or of ``|grad|`` when ``magnitude``."""
    z = np.abs(np.asarray(grad, dtype=float)) if magnitude else np.asarray(_grad_norm(grad))
    out = np.zeros_like(z, dtype=float)
    for c, p in g.terms:
        out = out + c * z**p
    return float(out) if out.ndim == 0 else out


def eval_dG(g: GSpec, z):
    """Radial derivative ``dG/d|z|``; ``inf`` at 0 for exponents below 1."""
    z = np.abs(np.asarray(z, dtype=float))
    out = np.zeros_like(z)
    with np.errstate(divide="ignore"):
        for c, p in g.terms:
            if p == 1.0:
                out = out + c
            else:
                out = out + c * p * np.where(z > 0, z ** (p - 1.0), 0.0 if p > 1 else np.inf)
    return out


@dataclass(frozen=True)
class ProblemSpec:
    """``L u = w(x) H(u) G(grad u)`` with ``w = (eps^2+|x|^2)^{gamma/2}``.

    ``convention='generator'`` reads the left side as ``L``;
    ``'fractional'`` reads it as ``-L`` (``(-Delta)^s`` for the fractional
    normalization).
    """

    kernel: KernelSpec = field(default_factory=KernelSpec)
    H: HSpec = field(default_factory=HSpec)
    G: GSpec = field(default_factory=GSpec)
    gamma: float = 0.0
    eps: float = 0.0
    convention: str = "generator"

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")

    @property
    def sign(self) -> float:
        """Factor turning ``L`` into the left-hand operator of this problem."""
        return 1.0 if self.convention == "generator" else -1.0

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel.to_dict(),
            "H": self.H.to_dict(),
            "G": self.G.to_dict(),
            "gamma": self.gamma,
            "eps": self.eps,
            "convention": self.convention,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemSpec":
        d = dict(d)
        kernel = KernelSpec.from_dict(d.pop("kernel", {}))
        H = HSpec(**d.pop("H", {}))
        G = GSpec(tuple(tuple(t) for t in d.pop("G", {"terms": [[1.0, 1.0]]})["terms"]))
        return cls(kernel=kernel, H=H, G=G, **d)


def weight(prob: ProblemSpec, r):
    r = np.abs(np.asarray(r, dtype=float))
    if prob.gamma == 0.0:
        return np.ones_like(r)
    if prob.eps == 0.0:
        if prob.gamma < 0 and np.any(r == 0):
            raise ValueError("|x|^gamma with gamma < 0 is singular at x = 0; set eps > 0")
        return r**prob.gamma
    return (prob.eps**2 + r * r) ** (prob.gamma / 2.0)


def eval_rhs(prob: ProblemSpec, x, u, grad):
    """``w(x) H(u) G(grad)``; ``x`` and ``grad`` are points/vectors or radii/magnitudes."""
    r = _grad_norm(x)
    out = weight(prob, r) * eval_H(prob.H, u) * eval_G(prob.G, grad)
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def eval_rhs_radial(prob: ProblemSpec, r, u, grad_mag):
    out = weight(prob, r) * eval_H(prob.H, u) * eval_G(prob.G, grad_mag, magnitude=True)
    return np.asarray(out, dtype=float)


# ---------------------------------------------------------------------------
# classification

REGIMES = ("Supercritical", "Critical", "Subcritical", "Ambiguous")


@dataclass(frozen=True)
class RegimeReport:
    p_used: float
    regime: str
    beta: Optional[float] = None
    growth_exponent: Optional[float] = None
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _label(s: float, gamma: float, p: float, tol: float = 1e-12) -> str:
    d = gamma + p - 2.0 * s
    if abs(d) <= tol:
        return "Critical"
    return "Supercritical" if d > 0 else "Subcritical"


def subcritical_beta(s: float, gamma: float, p: float) -> float:
    if p == 1.0:
        raise ZeroDivisionError("denominator 1-p vanishes")
    return (2.0 * s + gamma - p) / (1.0 - p)


def classify_regime(prob: ProblemSpec) -> RegimeReport:
    """Sign of ``gamma + p - 2s`` at ``p_min`` and ``p_max``."""
    if not prob.G.terms:
        raise ValueError("G has no terms; the balance gamma + p = 2s is undefined")
    s, gamma = prob.kernel.s, prob.gamma
    lo, hi = _label(s, gamma, prob.G.p_min), _label(s, gamma, prob.G.p_max)
    p = prob.G.p_max
    if lo != hi:
        return RegimeReport(p, "Ambiguous", note=f"p_min gives {lo}, p_max gives {hi}")
    if hi == "Subcritical":
        if p == 1.0:
            return RegimeReport(p, hi, note="beta undefined: denominator 1-p vanishes")
        return RegimeReport(p, hi, beta=subcritical_beta(s, gamma, p))
    if hi == "Supercritical":
        return RegimeReport(p, hi, growth_exponent=1.0 - (2.0 * s + gamma) / p)
    return RegimeReport(p, hi)


# ---------------------------------------------------------------------------
# exact power solution


@dataclass(frozen=True)
class PowerSolution:
    """``u = A |x|^beta``.

    ``C`` is the fractional-convention constant.  The power profile solves
    ``sign * (-Delta)^s u = |x|^gamma |grad u|^p`` with ``sign = sign(C)``, so
    ``convention`` is ``'fractional'`` when ``C > 0`` and ``'generator'`` when
    ``C < 0``; ``A^{1-p} |C| = beta^p`` in both cases.
    """

    beta: float
    A: float
    C: float
    p: float
    gamma: float
    convention: str
    window: Tuple[float, float] = (0.5, 4.0)

    def __call__(self, r):
        return self.A * np.abs(np.asarray(r, dtype=float)) ** self.beta

    def amplitude_identity_residual(self) -> float:
        return abs(self.A ** (1.0 - self.p) * abs(self.C) - abs(self.beta) ** self.p) / abs(self.beta) ** self.p

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["window"] = list(self.window)
        return d


def build_power_solution(prob: ProblemSpec, opts: Optional[QuadratureOptions] = None) -> PowerSolution:
    failures = []
    H = prob.H
    if not (H.family == "polynomial" and H.m == 0 and H.H0 == 1.0):
        failures.append("H must be identically 1 (polynomial family with H0=1, m=0)")
    if len(prob.G.terms) != 1 or prob.G.terms[0][0] != 1.0:
        failures.append("G must be the single term |z|^p")
    if prob.kernel.normalization != "fractional" or not prob.kernel.is_constant:
        failures.append("L must be the fractional Laplacian (fractional normalization, no modulation)")
    if failures:
        raise ValueError("; ".join(failures))
    p = prob.G.p_max
    if p == 1.0:
        raise ValueError("denominator 1-p vanishes")
    if not 0.0 < p < 1.0:
        raise ValueError(f"need 0 < p < 1, got p = {p}")
    s, gamma = prob.kernel.s, prob.gamma
    if not gamma + p < 2.0 * s:
        raise ValueError(f"not subcritical: gamma + p = {gamma + p} >= 2s = {2 * s}")
    beta = subcritical_beta(s, gamma, p)
    if not 0.0 < beta < 2.0 * s:
        raise ValueError(f"beta = {beta} outside (0, 2s) = (0, {2 * s}); pointwise identity unavailable")
    C = power_constant(prob.kernel.n, s, beta, opts)
    if C == 0.0:
        raise ValueError("C_{n,s,beta} vanishes; no amplitude balances the equation")
    A = (abs(beta) ** p / abs(C)) ** (1.0 / (1.0 - p))
    return PowerSolution(beta, A, C, p, gamma, "fractional" if C > 0 else "generator")


def residual_scan(
    prob: ProblemSpec,
    sol: PowerSolution,
    annulus: Sequence[float] = (0.5, 4.0),
    samples: int = 17,
    opts: Optional[QuadratureOptions] = None,
    convention: str = "fractional",
    amplitude: Optional[float] = None,
    beta: Optional[float] = None,
) -> dict:
    """Max relative residual of ``lhs - |x|^gamma |grad u|^p`` over the annulus.

    ``lhs`` is ``(-Delta)^s u`` for ``convention='fractional'`` and ``L u``
    for ``'generator'``.  ``amplitude``/``beta`` override the solution's
    values (perturbation studies).
    """
    r_lo, r_hi = annulus
    if r_lo <= 0 or r_hi <= r_lo:
        raise ValueError("annulus must satisfy 0 < r_lo < r_hi")
    A = sol.A if amplitude is None else amplitude
    b = sol.beta if beta is None else beta
    u = power_function(b, A)
    radii = np.geomspace(r_lo, r_hi, samples)
    lhs = np.array([evaluate_L(prob.kernel, u, r, opts, convention).value for r in radii])
    rhs = radii**prob.gamma * (A * abs(b)) ** sol.p * radii ** (sol.p * (b - 1.0))
    rel = np.abs(lhs - rhs) / np.maximum(np.abs(lhs), np.abs(rhs))
    return {
        "convention": convention,
        "radii": radii.tolist(),
        "lhs": lhs.tolist(),
        "rhs": rhs.tolist(),
        "residual": float(rel.max()),
    }
