"""Panel quadrature for ``int_0^inf A(t) c(t) t^{-1-2s} dt`` and the sphere reduction."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .kernels import QuadratureOptions, sphere_area


@lru_cache(maxsize=64)
def gauss_legendre(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=256)
def _gauss_jacobi_origin(m: int, s: float):
    # int_0^1 g(t) t^{1-2s} dt  ~  sum w g(t)
    x, w = roots_jacobi(m, 0.0, 1.0 - 2.0 * s)
    t = 0.5 * (1.0 + x)
    w = w * 0.5 ** (2.0 - 2.0 * s)
    return t, w


def panel_edges(opts: QuadratureOptions, t_max: float, breakpoints=(), s: float = 0.5) -> np.ndarray:
    """Geometric edges ``ratio^k`` on (0, 1], geometric on [1, t_max], plus breakpoints.

    Rounding in a second difference is amplified like ``t^{-2s}`` on panels
    near the origin, so the innermost edge never drops below ``1e-3^{1/(2s)}``.
    """
    near = opts.ratio ** np.arange(opts.near_panels, -1, -1, dtype=float)
    near = near[near >= min(1e-3 ** (0.5 / s), 0.5)]
    t_max = max(float(t_max), 1.0)
    bp = np.asarray(breakpoints, dtype=float).ravel()
    # breakpoints much closer than the innermost edge are ignored: resolving
    # them would amplify rounding in the second differences like t^{-2s}
    bp = bp[(bp > 0.05 * near[0]) & (bp < t_max)]
    # the Gauss-Jacobi panel must not straddle a breakpoint
    eps = min(near[0], bp.min()) if bp.size else near[0]
    near = near[near >= eps]
    per_log = opts.far_panels / math.log(opts.T_cut) if opts.T_cut > 1.0 else opts.far_panels
    n_far = max(1, int(math.ceil(per_log * math.log(t_max)))) if t_max > 1.0 else 0
    far = np.geomspace(1.0, t_max, n_far + 1)[1:] if n_far else np.empty(0)
    edges = np.unique(np.concatenate([[eps], near, far, bp]))
    keep = np.concatenate([[True], np.diff(edges) > 1e-12 * edges[1:]])
    edges = edges[keep]
    if edges[-1] < t_max * (1 - 1e-12):
        edges = np.append(edges, t_max)
    return edges


def radial_rule(s: float, opts: QuadratureOptions, t_max: float, breakpoints=()):
    """Nodes/weights with ``int_0^{t_max} A(t) t^{-1-2s} dt ~ sum W A(t)``.

    The panel touching the origin uses Gauss-Jacobi for ``(A(t)/t^2) t^{1-2s}``,
    valid when ``A(t) = O(t^2)`` (second differences of C^{1,1} data).
    """
    edges = panel_edges(opts, t_max, breakpoints, s)
    m = opts.order
    xg, wg = gauss_legendre(m)
    a = edges[:-1, None]
    b = edges[1:, None]
    t = 0.5 * (b - a) * xg[None, :] + 0.5 * (a + b)
    w = 0.5 * (b - a) * wg[None, :] * t ** (-1.0 - 2.0 * s)
    eps = edges[0]
    tj, wj = _gauss_jacobi_origin(m, float(s))
    t0 = eps * tj
    w0 = wj * eps ** (2.0 - 2.0 * s) / t0**2
    return np.concatenate([t0, t.ravel()]), np.concatenate([w0, w.ravel()])


@lru_cache(maxsize=64)
def angular_rule(n: int, nodes: int, levels: int = 4, ratio: float = 0.25):
    """Rule on the polar angle: ``int_{S^{n-1}} g(x.e) dw ~ sum w g(cos phi)``.

    ``n == 1`` returns the two directions of ``S^0``.  For ``n >= 2`` the
    panels are graded toward both poles, where reflected points can hit the
    origin and radial profiles may be non-smooth.
    """
    if n == 1:
        return np.array([1.0, -1.0]), np.array([1.0, 1.0])
    half = math.pi / 2
    inner = half * ratio ** np.arange(levels, -1, -1, dtype=float)
    edges = np.concatenate([[0.0], inner])
    edges = np.concatenate([edges, math.pi - edges[::-1][1:]])
    xg, wg = gauss_legendre(nodes)
    a = edges[:-1, None]
    b = edges[1:, None]
    phi = 0.5 * (b - a) * xg[None, :] + 0.5 * (a + b)
    w = 0.5 * (b - a) * wg[None, :] * np.sin(phi) ** (n - 2) * sphere_area(n - 1)
    cos_phi = np.cos(phi.ravel())
    w = w.ravel()
    # exact total mass
    w *= sphere_area(n) / w.sum()
    cos_phi.setflags(write=False)
    w.setflags(write=False)
    return cos_phi, w


def tail_mass(s: float, T: float) -> float:
    """``int_T^inf t^{-1-2s} dt``."""
    return T ** (-2.0 * s) / (2.0 * s)
