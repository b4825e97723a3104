"""Sampled and closed-form functions with analytic tails, so ``L`` can see all of R^n."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

TAIL_KINDS = ("zero", "power", "power_growth")


@dataclass(frozen=True)
class TailModel:
    """Far-field model: ``0``, ``coeff |x|^{-q}`` or ``coeff |x|^{+q}``."""

    kind: str = "zero"
    coeff: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        if self.kind not in TAIL_KINDS:
            raise ValueError(f"tail kind must be one of {TAIL_KINDS}, got {self.kind!r}")
        if self.q < 0:
            raise ValueError("tail exponent q must be >= 0")

    def value(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "power":
            return self.coeff * r ** (-self.q)
        return self.coeff * r**self.q

    def check_convergent(self, s: float) -> None:
        if self.kind == "power_growth" and self.q >= 2.0 * s:
            raise ValueError(
                f"tail grows like |x|^{self.q} with q >= 2s = {2 * s}; the far-field integral diverges"
            )

    def moment(self, s: float, T: float) -> float:
        """``int_T^inf value(t) t^{-1-2s} dt``."""
        if self.kind == "zero" or self.coeff == 0.0:
            return 0.0
        if self.kind == "power":
            return self.coeff * T ** (-self.q - 2.0 * s) / (self.q + 2.0 * s)
        self.check_convergent(s)
        return self.coeff * T ** (self.q - 2.0 * s) / (2.0 * s - self.q)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "coeff": self.coeff, "q": self.q}


def _check_grid(grid, values):
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must be a 1-D array with at least two nodes")
    if grid.shape != values.shape:
        raise ValueError("grid and values must have the same shape")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(values))):
        raise ValueError("grid and values must be finite")
    return grid, values


class RadialFunction:
    """``u(x) = U(|x|)`` sampled on ``0 <= r_0 < ... < r_M = R_ext``.

    Between nodes a monotone cubic (PCHIP) is built on the even reflection of
    the data, so ``U'(0) = 0``.  Beyond ``R_ext`` the optional ``exterior``
    callable is used, otherwise the tail model.
    """

    domain = "radial"

    def __init__(self, grid, values, tail: TailModel = TailModel(), exterior: Optional[Callable] = None):
        grid, values = _check_grid(grid, values)
        if grid[0] < 0:
            raise ValueError("radial grid must start at r >= 0")
        self.grid = grid
        self.values = values
        self.tail = tail
        self.exterior = exterior
        if grid[0] == 0.0:
            xs = np.concatenate([-grid[:0:-1], grid])
            ys = np.concatenate([values[:0:-1], values])
        else:
            xs = np.concatenate([-grid[::-1], grid])
            ys = np.concatenate([values[::-1], values])
        self._interp = PchipInterpolator(xs, ys, extrapolate=False)

    @property
    def R_ext(self) -> float:
        return float(self.grid[-1])

    @property
    def tails(self):
        return (self.tail,)

    @property
    def kinks(self) -> np.ndarray:
        return self.grid

    def _outside(self, r):
        if self.exterior is not None:
            return np.asarray(self.exterior(r), dtype=float)
        return self.tail.value(r)

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        inside = r <= self.R_ext
        out[inside] = self._interp(r[inside])
        if np.any(~inside):
            out[~inside] = self._outside(r[~inside])
        return out

    def tail_mismatch(self) -> float:
        """``|tail(R_ext) - U(R_ext)|``."""
        return float(abs(self._outside(np.array([self.R_ext]))[0] - self.values[-1]))

    def scaled(self, factor: float) -> "RadialFunction":
        ext = self.exterior
        return RadialFunction(
            self.grid,
            factor * self.values,
            TailModel(self.tail.kind, factor * self.tail.coeff, self.tail.q),
            None if ext is None else (lambda r: factor * np.asarray(ext(r))),
        )


class LineFunction:
    """``u`` on ``x_0 < ... < x_M`` in one dimension with separate left/right tails."""

    domain = "line"

    def __init__(
        self,
        grid,
        values,
        left_tail: TailModel = TailModel(),
        right_tail: TailModel = TailModel(),
        exterior: Optional[Callable] = None,
    ):
        grid, values = _check_grid(grid, values)
        self.grid = grid
        self.values = values
        self.left_tail = left_tail
        self.right_tail = right_tail
        self.exterior = exterior
        self._interp = PchipInterpolator(grid, values, extrapolate=False)

    @property
    def R_ext(self) -> float:
        return float(max(abs(self.grid[0]), abs(self.grid[-1])))

    @property
    def tails(self):
        return (self.left_tail, self.right_tail)

    @property
    def kinks(self) -> np.ndarray:
        return self.grid

    def _outside(self, x):
        if self.exterior is not None:
            return np.asarray(self.exterior(x), dtype=float)
        return np.where(x < 0, self.left_tail.value(x), self.right_tail.value(x))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        inside = (x >= self.grid[0]) & (x <= self.grid[-1])
        out[inside] = self._interp(x[inside])
        if np.any(~inside):
            out[~inside] = self._outside(x[~inside])
        return out

    def tail_mismatch(self) -> float:
        ends = np.array([self.grid[0], self.grid[-1]])
        return float(np.max(np.abs(self._outside(ends) - self.values[[0, -1]])))

    def shifted(self, h: float) -> "LineFunction":
        """``x -> u(x - h)``; tails are kept (their centre shift is neglected)."""
        ext = self.exterior
        return LineFunction(
            self.grid + h,
            self.values,
            self.left_tail,
            self.right_tail,
            None if ext is None else (lambda x: np.asarray(ext(np.asarray(x) - h))),
        )


class ClosedForm:
    """A vectorised formula with a tail model, radial (argument ``|x|``) or on the line.

    ``kinks`` lists radii (or positions) where the formula loses smoothness;
    ``extent`` is the radius beyond which the tail model describes it.
    """

    def __init__(
        self,
        func: Callable,
        tail: TailModel | Sequence[TailModel] = TailModel(),
        domain: str = "radial",
        kinks: Sequence[float] = (),
        extent: float = 1.0,
    ):
        if domain not in ("radial", "line"):
            raise ValueError("domain must be 'radial' or 'line'")
        self.func = func
        self.domain = domain
        if isinstance(tail, TailModel):
            tail = (tail,) if domain == "radial" else (tail, tail)
        tail = tuple(tail)
        if len(tail) != (1 if domain == "radial" else 2):
            raise ValueError("radial closed forms take one tail, line closed forms two")
        self.tails = tail
        self.kinks = np.asarray(kinks, dtype=float)
        self.R_ext = float(extent)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.domain == "radial":
            x = np.abs(x)
        return np.asarray(self.func(x), dtype=float) * np.ones_like(x)


def constant_function(c: float, domain: str = "radial") -> ClosedForm:
    return ClosedForm(lambda x: np.full_like(x, c), TailModel("power", c, 0.0), domain)


def power_function(beta: float, coeff: float = 1.0) -> ClosedForm:
    """``coeff |x|^beta`` (radial)."""
    return ClosedForm(
        lambda r: coeff * r**beta, TailModel("power_growth", coeff, beta), "radial", kinks=(0.0,)
    )


def bracket_profile(beta: float, amplitude: float = 1.0, domain: str = "radial") -> ClosedForm:
    """``amplitude (1+|x|^2)^{-beta}`` with tail ``amplitude |x|^{-2 beta}``."""
    return ClosedForm(
        lambda x: amplitude * (1.0 + x * x) ** (-beta),
        TailModel("power", amplitude, 2.0 * beta),
        domain,
    )
