"""Discrete Dirichlet problems for ``L`` on a ball and the monotone iteration.

The discrete operator at a node ``x_i`` splits the polar integral at
``delta_i`` (the smaller neighbouring spacing).  Inside, ``L`` acts like a
multiple ``mu_i`` of the Laplacian and is replaced by a three-point stencil;
outside, the piecewise-linear interpolant of the nodal values (and the exact
exterior data beyond the ball) is integrated against the kernel.  ``mu_i`` is
calibrated so that the row is exact on ``|y|^2`` within a fixed window, which
cancels the leading interpolation error.  Off-diagonal weights stay
nonnegative, so ``-L_h`` is an M-matrix and the discrete comparison
principle holds.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
import scipy.linalg

from .functions import LineFunction, RadialFunction, TailModel
from .kernels import KernelSpec, QuadratureOptions, sphere_area
from .operator import _closure
from .problem import ProblemSpec, eval_G, eval_H, weight
from .quadrature import _gauss_jacobi_origin, angular_rule, gauss_legendre

GRID_MODES = ("radial", "line")
STATUSES = ("Converged", "NonConverged", "Diverged")


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class GridSpec:
    """``M`` nodes on ``[0, R]`` (radial) or ``[-R, R]`` (line).

    ``grade_center`` in (0, 1] clusters nodes toward the origin and
    ``grade_boundary`` in (0, 1] toward ``|x| = R``; 1 means uniform.
    ``origin_offset`` (radial only) starts the grid at ``h/2`` instead of 0,
    for weights that are singular at the origin.
    """

    mode: str = "radial"
    R: float = 8.0
    M: int = 128
    grade_center: float = 1.0
    grade_boundary: float = 1.0
    origin_offset: bool = False

    def __post_init__(self):
        if self.mode not in GRID_MODES:
            raise ValueError(f"grid mode must be one of {GRID_MODES}")
        if self.M < 16:
            raise ValueError(f"need at least 16 nodes, got M = {self.M}")
        if self.R <= 0:
            raise ValueError("R must be > 0")
        for g in (self.grade_center, self.grade_boundary):
            if not 0.0 < g <= 1.0:
                raise ValueError("grading factors must lie in (0, 1]")
        if self.origin_offset and self.mode != "radial":
            raise ValueError("origin_offset applies to radial grids only")

    def with_R(self, R: float) -> "GridSpec":
        return GridSpec(self.mode, R, self.M, self.grade_center, self.grade_boundary, self.origin_offset)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _grading_map(xi, g0: float, g1: float):
    return 1.0 - (1.0 - xi ** (1.0 / g0)) ** (1.0 / g1)


def build_grid(g: GridSpec) -> np.ndarray:
    if g.mode == "radial":
        if g.origin_offset:
            xi = np.linspace(0.0, 1.0, 2 * g.M - 1)[1::2]
            xi = np.append(xi, 1.0)
            nodes = g.R * _grading_map(xi, g.grade_center, g.grade_boundary)
        else:
            xi = np.linspace(0.0, 1.0, g.M)
            nodes = g.R * _grading_map(xi, g.grade_center, g.grade_boundary)
        nodes[-1] = g.R
        return nodes
    xi = np.linspace(-1.0, 1.0, g.M)
    nodes = g.R * np.sign(xi) * _grading_map(np.abs(xi), g.grade_center, g.grade_boundary)
    # exact mirror symmetry
    nodes = 0.5 * (nodes - nodes[::-1])
    return nodes


# ---------------------------------------------------------------------------
# exterior data


@dataclass(frozen=True)
class ExteriorData:
    """``phi(x) = c V(x) (1 + delta tanh x) (1 + bump e^{-|x|})``, ``V = (1+|x/length|^2)^{-beta}``.

    ``a`` and ``A`` declare the sandwich ``a V <= phi <= A V``; ``clip``
    enforces it.  ``delta`` needs line mode.
    """

    c: float = 1e-3
    beta: float = 1.0
    delta: float = 0.0
    bump: float = 0.0
    a: Optional[float] = None
    A: Optional[float] = None
    clip: bool = False
    length: float = 1.0

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("length must be > 0")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if abs(self.delta) >= 1:
            raise ValueError("|delta| must be < 1 so the profile stays positive")
        lo = self.c * min(1.0 - abs(self.delta), 1.0) if self.a is None else self.a
        hi = self.c * (1.0 + abs(self.delta)) * (1.0 + max(self.bump, 0.0)) if self.A is None else self.A
        object.__setattr__(self, "a", float(lo))
        object.__setattr__(self, "A", float(hi))

    def V(self, x):
        x = np.asarray(x, dtype=float)
        x = x / self.length
        return (1.0 + x * x) ** (-self.beta)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.c * self.V(x)
        if self.delta:
            out = out * (1.0 + self.delta * np.tanh(x))
        if self.bump:
            out = out * (1.0 + self.bump * np.exp(-np.abs(x)))
        if self.clip:
            out = np.clip(out, self.a * self.V(x), self.A * self.V(x))
        return out

    def tails(self, mode: str):
        q = 2.0 * self.beta
        c = self.c * self.length**q
        if mode == "radial":
            if self.delta:
                raise ValueError("asymmetric exterior data needs line mode")
            return (TailModel("power", c, q),)
        return (TailModel("power", c * (1.0 - self.delta), q), TailModel("power", c * (1.0 + self.delta), q))

    def sandwich_check(self, R: float, samples: int = 200) -> dict:
        """Sample ``a V <= phi <= A V`` on ``|x| in [R, 100 R]`` (both signs)."""
        r = np.geomspace(R, 100.0 * R, samples)
        x = np.concatenate([-r[::-1], r])
        phi, V = self(x), self.V(x)
        lower, upper = phi - self.a * V, self.A * V - phi
        return {
            "lower_margin": float(lower.min() / V.max()),
            "upper_margin": float(upper.min() / V.max()),
            "holds": bool(lower.min() >= -1e-14 and upper.min() >= -1e-14),
        }

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# ---------------------------------------------------------------------------
# discrete operator


@dataclass
class DiscreteOperator:
    """Rows ``i`` in ``unknown``: ``(L_h u)_i = matrix[i] @ u_all + e_i(phi)``.

    ``matrix`` has one row per unknown node and one column per grid node;
    columns of ``known`` nodes (on ``|x| = R``) receive exterior values.  The
    exterior functional is stored as point/weight lists plus the per-row
    truncation radius for the analytic closure.  Always generator convention.
    """

    kernel: KernelSpec
    mode: str
    nodes: np.ndarray
    unknown: np.ndarray
    known: np.ndarray
    matrix: np.ndarray
    ext_rows: np.ndarray
    ext_points: np.ndarray
    ext_weights: np.ndarray
    T: np.ndarray
    mu: np.ndarray
    mu_clamped: int = 0
    convention: str = "generator"
    _lu: object = field(default=None, repr=False)
    _cond: Optional[float] = field(default=None, repr=False)

    @property
    def interior_matrix(self) -> np.ndarray:
        return self.matrix[:, self.unknown]

    def exterior_vector(self, ext: ExteriorData) -> np.ndarray:
        """``e(phi)`` plus the known-node columns applied to ``phi``."""
        vals = ext(self.ext_points) * self.ext_weights
        out = np.bincount(self.ext_rows, weights=vals, minlength=self.unknown.size)
        tails = ext.tails(self.mode)
        for k in range(self.unknown.size):
            out[k] += _closure(self.kernel, tails, 0.0, self.T[k], self.mode)
        out += self.matrix[:, self.known] @ ext(self.nodes[self.known])
        return out

    def apply(self, u_unknown, ext: ExteriorData) -> np.ndarray:
        """``L_h`` of the function equal to ``u_unknown`` inside and ``phi`` outside."""
        return self.interior_matrix @ np.asarray(u_unknown, dtype=float) + self.exterior_vector(ext)

    def constant_residual(self) -> float:
        """``max |L_h 1|`` with constant exterior data."""
        one = ExteriorData(c=1.0, beta=0.0)
        return float(np.max(np.abs(self.apply(np.ones(self.unknown.size), one))))

    def sign_structure(self) -> dict:
        A = self.interior_matrix
        off = A - np.diag(np.diag(A))
        return {"min_offdiag": float(off.min()), "max_diag": float(np.diag(A).max())}

    def factor(self):
        if self._lu is None:
            A = self.interior_matrix
            self._cond = float(np.linalg.cond(A, 1))
            if not np.isfinite(self._cond) or self._cond > 1e13:
                raise np.linalg.LinAlgError(f"discrete operator is singular or ill-conditioned (cond_1 ~ {self._cond:.3e})")
            self._lu = scipy.linalg.lu_factor(A)
        return self._lu

    @property
    def condition(self) -> float:
        self.factor()
        return self._cond


def _hat_weights(nodes: np.ndarray, y: np.ndarray, radial: bool):
    """Indices/weights of the P1 interpolant at ``y`` (inside the grid only)."""
    if radial:
        y = np.maximum(y, nodes[0])
    j = np.clip(np.searchsorted(nodes, y, side="right") - 1, 0, nodes.size - 2)
    lam = (y - nodes[j]) / (nodes[j + 1] - nodes[j])
    return j, 1.0 - lam, lam


def _laplace_stencil(nodes: np.ndarray, i: int, n: int, radial: bool):
    """Three-point Laplacian at node ``i``: returns ``{column: weight}``."""
    x = nodes
    if radial and i == 0:
        if x[0] == 0.0:
            h = x[1]
            return {0: -2.0 * n / h**2, 1: 2.0 * n / h**2}
        # grid offset from the origin: even reflection, zero flux at r = 0
        hp = x[1] - x[0]
        rp = 0.5 * (x[0] + x[1])
        vol = x[0] ** (n - 1) * (x[0] + 0.5 * hp)
        c = rp ** (n - 1) / hp / vol
        return {0: -c, 1: c}
    if not radial or n == 1:
        return _second_difference_stencil(nodes, i, radial)
    hm, hp = x[i] - x[i - 1], x[i + 1] - x[i]
    rm, rp = x[i] - 0.5 * hm, x[i] + 0.5 * hp
    vol = x[i] ** (n - 1) * 0.5 * (hm + hp)
    cm = rm ** (n - 1) / hm / vol
    cp = rp ** (n - 1) / hp / vol
    return {i - 1: cm, i: -(cm + cp), i + 1: cp}


def _second_difference_stencil(nodes: np.ndarray, i: int, radial: bool):
    """Three-point second derivative (even reflection at the radial origin)."""
    x = nodes
    if radial and i == 0:
        hm = 2.0 * x[0] if x[0] > 0 else x[1] - x[0]
        hp = x[1] - x[0]
        cp = 2.0 / (hp * (hm + hp))
        return {0: -2.0 * cp if x[0] == 0.0 else -cp, 1: 2.0 * cp if x[0] == 0.0 else cp}
    hm, hp = x[i] - x[i - 1], x[i + 1] - x[i]
    cm = 2.0 / (hm * (hm + hp))
    cp = 2.0 / (hp * (hm + hp))
    return {i - 1: cm, i: -(cm + cp), i + 1: cp}


def _row_panels(t_lo: float, breakpoints: np.ndarray, t_reach: float, T: float, opts: QuadratureOptions):
    bp = breakpoints[(breakpoints > t_lo * (1 + 1e-12)) & (breakpoints < t_reach)]
    per_log = opts.far_panels / math.log(opts.T_cut)
    n_far = max(1, int(math.ceil(per_log * math.log(T / t_reach))))
    far = np.geomspace(t_reach, T, n_far + 1)
    edges = np.unique(np.concatenate([[t_lo], bp, far]))
    keep = np.concatenate([[True], np.diff(edges) > 1e-12 * edges[1:]])
    edges = edges[keep]
    xg, wg = gauss_legendre(opts.order)
    a, b = edges[:-1, None], edges[1:, None]
    t = (0.5 * (b - a) * xg + 0.5 * (a + b)).ravel()
    w = (0.5 * (b - a) * wg).ravel()
    return t, w


def _near_mass(kernel: KernelSpec, t_hi: float, m: int = 16) -> float:
    """``int_0^{t_hi} c(t) t^{1-2s} dt``."""
    s = kernel.s
    if kernel.is_constant:
        return kernel.scale * t_hi ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    tj, wj = _gauss_jacobi_origin(m, float(s))
    return float(np.dot(wj, kernel.profile(t_hi * tj))) * t_hi ** (2.0 - 2.0 * s)


def assemble_operator(
    kernel: KernelSpec,
    nodes,
    mode: str = "radial",
    opts: Optional[QuadratureOptions] = None,
    window: Optional[float] = None,
) -> DiscreteOperator:
    """Collocation matrix of ``L`` (generator convention) on ``nodes``.

    ``window`` is the calibration radius (default ``max(1, 8 * max spacing)``
    capped by the grid extent).
    """
    opts = opts or QuadratureOptions()
    nodes = np.asarray(nodes, dtype=float)
    if mode not in GRID_MODES:
        raise ValueError(f"mode must be one of {GRID_MODES}")
    if mode == "line" and kernel.n != 1:
        raise ValueError("line mode needs n = 1")
    n, s = kernel.n, kernel.s
    radial = mode == "radial"
    R = float(nodes[-1]) if radial else float(max(-nodes[0], nodes[-1]))
    if radial:
        unknown = np.arange(nodes.size - 1)
        known = np.array([nodes.size - 1])
    else:
        unknown = np.arange(1, nodes.size - 1)
        known = np.array([0, nodes.size - 1])
    area = sphere_area(n)
    h_max = float(np.max(np.diff(nodes)))
    win = window if window is not None else max(1.0, 8.0 * h_max)
    if radial and n >= 2:
        cos_phi, w_ang = angular_rule(n, opts.angular_nodes)
    matrix = np.zeros((unknown.size, nodes.size))
    ext_rows, ext_pts, ext_w = [], [], []
    T_rows = np.empty(unknown.size)
    mu_rows = np.empty(unknown.size)
    clamped = 0

    for k, i in enumerate(unknown):
        xi = nodes[i]
        if radial and i == 0:
            delta = nodes[1] - nodes[0] if nodes[0] == 0.0 else min(2.0 * nodes[0], nodes[1] - nodes[0])
        else:
            delta = min(xi - nodes[i - 1], nodes[i + 1] - xi)
        T = max(opts.T_cut, 0.1 * opts.T_cut * (abs(xi) + R))
        T_rows[k] = T
        reach = R + abs(xi)
        if radial:
            bp = np.concatenate([np.abs(nodes - xi), nodes + xi])
        else:
            bp = np.abs(nodes - xi)
        t, w = _row_panels(delta, bp, reach, T, opts)
        wt = w * t ** (-1.0 - 2.0 * s) * kernel.profile(t)

        # sample points y and their weights (per unit value of u(y))
        if not radial:
            y = np.concatenate([xi + t, xi - t])
            wy = np.concatenate([wt, wt])
            q_center = 2.0 * xi * xi
        elif n == 1:
            y = np.concatenate([xi + t, np.abs(xi - t)])
            wy = np.concatenate([wt, wt])
            q_center = 2.0 * xi * xi
        else:
            y = np.sqrt(np.maximum(xi * xi + t[:, None] ** 2 + 2.0 * xi * t[:, None] * cos_phi[None, :], 0.0)).ravel()
            wy = (wt[:, None] * w_ang[None, :]).ravel()
            q_center = area * xi * xi
        diag = -float(wt.sum()) * area

        inside = np.abs(y) <= R if not radial else y <= R
        yi, wi = y[inside], wy[inside]
        j, w0, w1 = _hat_weights(nodes, yi, radial)
        row = np.bincount(j, weights=wi * w0, minlength=nodes.size)
        row += np.bincount(j + 1, weights=wi * w1, minlength=nodes.size)
        ext_rows.append(np.full(int((~inside).sum()), k))
        ext_pts.append(y[~inside])
        ext_w.append(wy[~inside])

        # near field: mu * Laplacian, plus kappa * second difference calibrated
        # so the row is exact on q(y) = |y|^2 inside the window (the
        # interpolation error only involves the second radial derivative)
        lap = _laplace_stencil(nodes, i, n, radial)
        d2 = _second_difference_stencil(nodes, i, radial)
        near = area * _near_mass(kernel, delta)
        mu = near / (2.0 * n)
        t_sel = np.concatenate([t, t]) if (not radial or n == 1) else np.repeat(t, cos_phi.size)
        in_win = inside & (t_sel <= win)
        yw = y[in_win]
        jw, a0, a1 = _hat_weights(nodes, yw, radial)
        interp_q = a0 * nodes[jw] ** 2 + a1 * nodes[jw + 1] ** 2
        err_q = float(np.dot(wy[in_win], interp_q - yw**2))
        lap_q = sum(c * nodes[col] ** 2 for col, c in lap.items())
        d2_q = sum(c * nodes[col] ** 2 for col, c in d2.items())
        kappa = (near - err_q - mu * lap_q) / d2_q
        # keep the near stencil's off-diagonal weights nonnegative
        floor = max((-mu * lap.get(col, 0.0) / c for col, c in d2.items() if col != i and c > 0), default=-np.inf)
        if kappa < floor:
            clamped += 1
            kappa = floor
        mu_rows[k] = mu + kappa * d2_q / max(lap_q, 1e-300)
        for col, c in lap.items():
            row[col] += mu * c
        for col, c in d2.items():
            row[col] += kappa * c
        row[i] += diag
        # analytic closure beyond T: -u_i * mass
        row[i] += _closure(kernel, tuple(TailModel() for _ in range(1 if radial else 2)), 1.0, T, mode)
        matrix[k] = row

    return DiscreteOperator(
        kernel=kernel,
        mode=mode,
        nodes=nodes,
        unknown=unknown,
        known=known,
        matrix=matrix,
        ext_rows=np.concatenate(ext_rows).astype(int),
        ext_points=np.concatenate(ext_pts),
        ext_weights=np.concatenate(ext_w),
        T=T_rows,
        mu=mu_rows,
        mu_clamped=clamped,
    )


def linear_solve(op: DiscreteOperator, f, ext: ExteriorData, convention: str = "generator") -> np.ndarray:
    """Unknown-node values of ``u`` with ``L_h u = f`` (or ``-L_h u = f``) and ``u = phi`` outside."""
    f = np.asarray(f, dtype=float)
    if f.shape != op.unknown.shape:
        raise ValueError(f"f must have {op.unknown.size} entries")
    if convention not in ("generator", "fractional"):
        raise ValueError("unknown convention")
    sign = 1.0 if convention == "generator" else -1.0
    b = sign * f - op.exterior_vector(ext)
    u = scipy.linalg.lu_solve(op.factor(), b)
    A = op.interior_matrix
    res = np.max(np.abs(A @ u - b)) / max(np.max(np.abs(A)) * np.max(np.abs(u)), np.max(np.abs(b)), 1e-300)
    if res > 1e-10:
        raise np.linalg.LinAlgError(f"linear solve residual {res:.3e} exceeds 1e-10 (cond_1 ~ {op.condition:.3e})")
    return u


def random_ordered_pair(rng: np.random.Generator, mode: str = "radial"):
    """Two exterior profiles with ``phi_1 <= phi_2`` pointwise.

    Both share ``beta`` and ``delta``; the second has a larger scale and a
    larger bump, and every factor of the profile is positive, so the order
    holds everywhere.
    """
    beta = float(rng.uniform(0.3, 1.5))
    delta = float(rng.uniform(-0.5, 0.5)) if mode == "line" else 0.0
    c1 = float(10.0 ** rng.uniform(-3.0, 0.0))
    bump1 = float(rng.uniform(0.0, 1.0))
    c2 = c1 * float(1.0 + rng.uniform(0.0, 1.0))
    bump2 = bump1 + float(rng.uniform(0.0, 1.0))
    return ExteriorData(c1, beta, delta, bump1), ExteriorData(c2, beta, delta, bump2)


def comparison_suite(op: DiscreteOperator, f, rng: np.random.Generator, pairs: int = 20) -> dict:
    """Solve ``L_h u = f`` for ordered exterior pairs and record ``max(u_1 - u_2)``."""
    violations = []
    for _ in range(pairs):
        e1, e2 = random_ordered_pair(rng, op.mode)
        u1, u2 = linear_solve(op, f, e1), linear_solve(op, f, e2)
        violations.append(float(max(np.max(u1 - u2), 0.0)))
    return {"pairs": pairs, "violations": violations, "max_violation": max(violations) if violations else 0.0}


def gradient_on_grid(fn=None, nodes=None, values=None, radial: Optional[bool] = None) -> np.ndarray:
    """Second-order differences: central inside, one-sided at the ends.

    Accepts a :class:`RadialFunction`/:class:`LineFunction` or explicit
    ``nodes``/``values``.  For radial data starting at ``r = 0`` the
    derivative there is 0 by symmetry.
    """
    if fn is not None:
        nodes, values = fn.grid, fn.values
        radial = fn.domain == "radial" if radial is None else radial
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes.size < 3:
        raise ValueError("gradient needs at least 3 nodes")
    g = np.gradient(values, nodes, edge_order=2)
    if radial and nodes[0] == 0.0:
        g[0] = 0.0
    return g


# ---------------------------------------------------------------------------
# monotone iteration


@dataclass
class IterationOptions:
    max_iter: int = 500
    tol: Optional[float] = None
    omega: float = 1.0
    start: str = "lower"
    G_cap: Optional[float] = None
    convention: Optional[str] = None
    tol_rel: float = 1e-8
    divergence_factor: float = 10.0

    def __post_init__(self):
        if not 0.0 < self.omega <= 1.0:
            raise ValueError("omega must lie in (0, 1]")
        if self.start not in ("lower", "exterior"):
            raise ValueError("start must be 'lower' (a V) or 'exterior'")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.convention not in (None, "generator", "fractional"):
            raise ValueError("convention must be None, 'generator' or 'fractional'")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SolveReport:
    status: str
    iterations: int
    residual_history: List[float]
    monotonicity_violation: List[float]
    sandwich_lower: List[float]
    sandwich_upper: List[float]
    linear_residuals: List[float]
    nodes: np.ndarray
    values: np.ndarray
    gradient: np.ndarray
    mode: str
    exterior: ExteriorData
    R: float
    capped: int = 0
    convention: str = "fractional"
    condition: float = math.nan
    mu_clamped: int = 0
    elapsed: float = 0.0

    @property
    def function(self):
        tails = self.exterior.tails(self.mode)
        if self.mode == "radial":
            return RadialFunction(self.nodes, self.values, tails[0], exterior=self.exterior)
        return LineFunction(self.nodes, self.values, tails[0], tails[1], exterior=self.exterior)

    def to_dict(self, include_elapsed: bool = False) -> dict:
        d = {
            "status": self.status,
            "iterations": self.iterations,
            "residual_history": list(self.residual_history),
            "monotonicity_violation": list(self.monotonicity_violation),
            "sandwich_lower": list(self.sandwich_lower),
            "sandwich_upper": list(self.sandwich_upper),
            "linear_residuals": list(self.linear_residuals),
            "mode": self.mode,
            "R": self.R,
            "convention": self.convention,
            "exterior": self.exterior.to_dict(),
            "capped_G_evaluations": self.capped,
            "condition": self.condition,
            "mu_clamped": self.mu_clamped,
            "r": self.nodes.tolist(),
            "u": self.values.tolist(),
            "grad_u": self.gradient.tolist(),
        }
        if include_elapsed:
            d["elapsed"] = self.elapsed
        return d


def _rhs_on_grid(prob: ProblemSpec, nodes, u_all, mode, cap):
    grad = gradient_on_grid(nodes=nodes, values=u_all, radial=mode == "radial")
    G = eval_G(prob.G, grad, magnitude=True)
    capped = 0
    if cap is not None:
        capped = int(np.sum(G > cap))
        G = np.minimum(G, cap)
    u_pos = np.maximum(u_all, 0.0) if prob.H.family != "singular" else u_all
    return weight(prob, nodes) * eval_H(prob.H, u_pos) * G, grad, capped


def monotone_iterate(
    prob: ProblemSpec,
    grid: GridSpec,
    ext: ExteriorData,
    it: Optional[IterationOptions] = None,
    opts: Optional[QuadratureOptions] = None,
    op: Optional[DiscreteOperator] = None,
) -> SolveReport:
    """Freeze the nonlinearity at ``u^(k)``, solve the linear problem for ``u^(k+1)``.

    ``u^(0) = a V`` on the grid (``start='lower'``) or the exterior profile
    evaluated on the grid (``start='exterior'``).  The equation is read in
    ``it.convention`` when set, otherwise in the problem's convention.
    """
    it = it or IterationOptions()
    conv = it.convention or prob.convention
    t0 = time.perf_counter()
    if not prob.H.nondecreasing:
        raise ValueError("monotone iteration needs a nondecreasing H; the singular family is rejected")
    if prob.kernel.n != 1 and grid.mode == "line":
        raise ValueError("line mode needs n = 1")
    nodes = build_grid(grid)
    if prob.gamma < 0 and prob.eps == 0 and np.any(nodes == 0.0):
        raise ValueError("gamma < 0 with eps = 0: regularize the weight or use origin_offset")
    if op is None:
        op = assemble_operator(prob.kernel, nodes, grid.mode, opts)
    unk, kn = op.unknown, op.known
    phi_known = ext(nodes[kn])
    V = ext.V(nodes)
    u_all = np.empty(nodes.size)
    u_all[kn] = phi_known
    u_all[unk] = ext.a * V[unk] if it.start == "lower" else ext(nodes[unk])

    hist, mono, lower, upper, lin = [], [], [], [], []
    capped_total = 0
    status = "NonConverged"
    best = math.inf
    A = op.interior_matrix
    for k in range(it.max_iter):
        f_all, _, capped = _rhs_on_grid(prob, nodes, u_all, grid.mode, it.G_cap)
        capped_total += capped
        f = f_all[unk]
        u_new = linear_solve(op, f, ext, conv)
        sign = 1.0 if conv == "generator" else -1.0
        b = sign * f - op.exterior_vector(ext)
        lin.append(float(np.max(np.abs(A @ u_new - b))))
        u_next = (1.0 - it.omega) * u_all[unk] + it.omega * u_new
        inc = float(np.max(np.abs(u_next - u_all[unk])))
        mono.append(float(max(0.0, np.max(u_all[unk] - u_next))))
        u_all[unk] = u_next
        lower.append(float(np.min(u_all[unk] - ext.a * V[unk])))
        upper.append(float(np.min(ext.A * V[unk] - u_all[unk])))
        hist.append(inc)
        best = min(best, inc)
        tol = it.tol if it.tol is not None else it.tol_rel * (1.0 + float(np.max(np.abs(u_all))))
        if inc < tol:
            status = "Converged"
            break
        if not np.isfinite(inc) or (best > 0 and inc > it.divergence_factor * best):
            status = "Diverged"
            break
    grad = gradient_on_grid(nodes=nodes, values=u_all, radial=grid.mode == "radial")
    return SolveReport(
        status=status,
        iterations=len(hist),
        residual_history=hist,
        monotonicity_violation=mono,
        sandwich_lower=lower,
        sandwich_upper=upper,
        linear_residuals=lin,
        nodes=nodes,
        values=u_all.copy(),
        gradient=grad,
        mode=grid.mode,
        exterior=ext,
        R=grid.R,
        capped=capped_total,
        convention=conv,
        condition=op.condition,
        mu_clamped=op.mu_clamped,
        elapsed=time.perf_counter() - t0,
    )


def core_difference(f1, f2, core: float = 2.0, samples: int = 201, mode: str = "radial") -> float:
    """``sup_{|x| <= core} |f1 - f2|`` on a uniform sample."""
    x = np.linspace(0.0, core, samples) if mode == "radial" else np.linspace(-core, core, 2 * samples - 1)
    return float(np.max(np.abs(f1(x) - f2(x))))


def core_asymmetry(f, core: float = 2.0, samples: int = 201) -> float:
    x = np.linspace(0.0, core, samples)
    return float(np.max(np.abs(f(x) - f(-x))))


def exhaust(
    prob: ProblemSpec,
    R_list: Sequence[float],
    ext_family: Callable[[float], ExteriorData],
    grid: GridSpec,
    it: Optional[IterationOptions] = None,
    opts: Optional[QuadratureOptions] = None,
    core: float = 2.0,
) -> dict:
    """Solve on ``B_{R_j}`` for each ``R_j`` and tabulate core differences.

    ``grid`` is a template; its radius is replaced by each ``R_j``.
    """
    from .qualitative import decay_fit

    R_list = [float(R) for R in R_list]
    if any(b <= a for a, b in zip(R_list, R_list[1:])):
        raise ValueError("R_list must be increasing")
    if min(R_list) < 4:
        raise ValueError("R_list must start at R >= 4")
    reports: List[SolveReport] = []
    aborted = None
    for R in R_list:
        rep = monotone_iterate(prob, grid.with_R(R), ext_family(R), it, opts)
        reports.append(rep)
        if rep.status == "Diverged":
            aborted = R
            break
    diffs = [
        core_difference(a.function, b.function, core, mode=grid.mode) for a, b in zip(reports, reports[1:])
    ]
    out = {"R": R_list[: len(reports)], "reports": reports, "core_differences": diffs, "aborted_at": aborted}
    if grid.mode == "line":
        out["core_asymmetry"] = [core_asymmetry(r.function, core) for r in reports]
    if aborted is None and grid.mode == "radial":
        last = reports[-1]
        try:
            fit = decay_fit(last.function, (last.R / 4.0, last.R / 2.0), expected_beta=ext_family(last.R).beta)
            out["decay_fit"] = fit
        except ValueError as exc:
            out["decay_fit_error"] = str(exc)
    return out
