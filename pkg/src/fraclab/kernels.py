"""Stable-like kernels ``K(z) = c(|z|) |z|^{-n-2s}`` and quadrature settings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

NORMALIZATIONS = ("raw", "fractional")


def normalization_constant(n: int, s: float) -> float:
    """Constant ``C_{n,s}`` such that ``C_{n,s} * p.v.int (u(x)-u(y))|x-y|^{-n-2s} dy``
    is the Fourier multiplier ``|xi|^{2s}``."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    # s 4^s Gamma(n/2+s) / (pi^{n/2} |Gamma(-s)|), with |Gamma(-s)| = Gamma(1-s)/s
    log_c = (
        math.log(s)
        + s * math.log(4.0)
        + gammaln(n / 2.0 + s)
        - (n / 2.0) * math.log(math.pi)
        - gammaln(1.0 - s)
    )
    return math.exp(log_c)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (``|S^0| = 2``)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def oscillating_modulation(lam: float, Lam: float, freq: float = 1.0) -> Callable:
    """``c(t) = lam + (Lam - lam) sin^2(freq t)``; admissible for bounds ``[lam, Lam]``."""

    def c(t):
        return lam + (Lam - lam) * np.sin(freq * np.asarray(t, dtype=float)) ** 2

    c.description = {"kind": "oscillating", "lam": lam, "Lam": Lam, "freq": freq}
    return c


@dataclass(frozen=True)
class KernelSpec:
    """Symmetric kernel of order ``2s`` in ``R^n``.

    Without a ``modulation`` the profile constant is 1 (``raw``) or ``C_{n,s}``
    (``fractional``); with one, ``c(t) = scale * modulation(t)`` and the
    ellipticity bounds refer to ``c``.
    """

    n: int = 1
    s: float = 0.5
    lam: Optional[float] = None
    Lam: Optional[float] = None
    modulation: Optional[Callable] = field(default=None, compare=False)
    normalization: str = "raw"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        if self.modulation is None:
            lam = self.scale if self.lam is None else self.lam
            Lam = self.scale if self.Lam is None else self.Lam
        else:
            if self.lam is None or self.Lam is None:
                raise ValueError("a modulated kernel needs explicit lam and Lam")
            lam, Lam = self.lam, self.Lam
        if not 0.0 < lam <= Lam:
            raise ValueError(f"need 0 < lam <= Lam, got lam={lam}, Lam={Lam}")
        object.__setattr__(self, "lam", float(lam))
        object.__setattr__(self, "Lam", float(Lam))

    @property
    def scale(self) -> float:
        if self.normalization == "fractional":
            return normalization_constant(self.n, self.s)
        return 1.0

    @property
    def is_constant(self) -> bool:
        return self.modulation is None

    def profile(self, t):
        """The modulation ``c(t)`` (already multiplied by the normalization scale)."""
        t = np.asarray(t, dtype=float)
        if self.modulation is None:
            return np.full_like(t, self.scale)
        return self.scale * np.asarray(self.modulation(t), dtype=float)

    def check_bounds(self, t_samples=None, rtol: float = 1e-12) -> bool:
        """Sample ``lam <= c(t) <= Lam``."""
        if t_samples is None:
            t_samples = np.geomspace(1e-6, 1e6, 2001)
        c = self.profile(t_samples)
        return bool(np.all(c >= self.lam * (1 - rtol)) and np.all(c <= self.Lam * (1 + rtol)))

    def with_profile(self, modulation: Optional[Callable], lam=None, Lam=None) -> "KernelSpec":
        return KernelSpec(self.n, self.s, lam, Lam, modulation, self.normalization)

    def to_dict(self) -> dict:
        mod = None
        if self.modulation is not None:
            mod = getattr(self.modulation, "description", {"kind": "callable"})
        return {
            "n": self.n,
            "s": self.s,
            "lam": self.lam,
            "Lam": self.Lam,
            "normalization": self.normalization,
            "modulation": mod,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        d = dict(d)
        mod = d.pop("modulation", None)
        if mod is not None:
            if mod.get("kind") != "oscillating":
                raise ValueError(f"unsupported modulation kind {mod.get('kind')!r}")
            mod = oscillating_modulation(mod["lam"], mod["Lam"], mod.get("freq", 1.0))
            d.setdefault("lam", mod.description["lam"])
            d.setdefault("Lam", mod.description["Lam"])
        return cls(modulation=mod, **d)


def kernel_density(spec: KernelSpec, t):
    """``K`` evaluated at radius ``t > 0``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0) or not np.all(np.isfinite(t_arr)):
        raise ValueError("kernel_density needs t > 0")
    out = spec.profile(t_arr) * t_arr ** (-spec.n - 2.0 * spec.s)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class QuadratureOptions:
    near_panels: int = 10
    far_panels: int = 40
    ratio: float = 0.5
    order: int = 8
    T_cut: float = 1.0e3
    angular_nodes: int = 8
    target_rel_tol: float = 1e-6

    def __post_init__(self):
        for name in ("near_panels", "far_panels", "order", "angular_nodes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("ratio must lie in (0, 1)")
        if self.T_cut < 1.0:
            raise ValueError("T_cut must be >= 1")

    def refined(self) -> "QuadratureOptions":
        """Every panel split in two and the truncation radius pushed out tenfold."""
        return QuadratureOptions(
            near_panels=2 * self.near_panels,
            far_panels=2 * self.far_panels,
            ratio=math.sqrt(self.ratio),
            order=self.order,
            T_cut=10.0 * self.T_cut,
            angular_nodes=self.angular_nodes + self.angular_nodes // 2,
            target_rel_tol=self.target_rel_tol,
        )

    def to_dict(self) -> dict:
        return dict(self.__dict__)
