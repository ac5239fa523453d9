"""Finite-difference evaluation of the MTW tensor straight from the chart cost.

Nothing here uses the reduced coefficient formulas: every derivative of
``c(x, y)`` is a tensor-product central difference of the cost itself, and
the tensor

    -(c^{q,r} c_{ij,q} c_{r,st} - c_{ij,st}) c^{s,k} c^{t,l} xi_i xi_j eta_k eta_l

is assembled with dense linear algebra.  ``c_{i,j}`` denotes the mixed
Hessian (x-index first) and ``c^{i,j}`` its inverse.

Each evaluation is done at steps ``h`` and ``h/2``; the reported value is
the Richardson combination ``(4 v(h/2) - v(h)) / 3`` and the error estimate
is ``|v(h) - v(h/2)| / 3``, the estimated error of ``v(h/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chart import SphereConfig, geodesic_distance
from .costjet import CostModel
from .errors import (
    AntipodalError,
    DomainError,
    OrthogonalityError,
    SingularMixedHessian,
    StencilDomainError,
)

__all__ = [
    "StencilConfig",
    "OracleResult",
    "InvarianceResult",
    "central_stencil",
    "mixed_partial",
    "chart_cost_function",
    "mtw_tensor_fd",
    "invariance_check",
    "MIN_ANTIPODAL_GAP",
]

#: smallest allowed ``R pi - d``, as a fraction of R
MIN_ANTIPODAL_GAP = 1e-3


@dataclass(frozen=True)
class StencilConfig:
    """Steps and accuracy order for the central differences.

    ``None`` steps are chosen per point by :func:`default_steps`.
    """

    h_x: float | None = None
    h_y: float | None = None
    scheme: int = 2

    def __post_init__(self):
        if self.scheme not in (2, 4):
            raise ValueError("scheme must be 2 or 4")
        for h in (self.h_x, self.h_y):
            if h is not None and not h > 0:
                raise ValueError("steps must be positive")

    def halved(self) -> "StencilConfig":
        return StencilConfig(self.h_x / 2, self.h_y / 2, self.scheme)


@dataclass(frozen=True)
class OracleResult:
    value: float
    est_error: float
    condition: float = float("nan")
    steps: tuple = ()


@dataclass(frozen=True)
class InvarianceResult:
    original: OracleResult
    transformed: OracleResult

    @property
    def discrepancy(self) -> float:
        return abs(self.original.value - self.transformed.value)

    @property
    def est_error(self) -> float:
        """Combined error estimate of the two evaluations."""
        return self.original.est_error + self.transformed.est_error


@lru_cache(maxsize=None)
def central_stencil(order: int, accuracy: int = 2) -> tuple[tuple, tuple]:
    """Offsets and weights of the central difference for the ``order``-th derivative.

    Weights are for unit step and have truncation error ``O(h^accuracy)``.
    """
    if order == 0:
        return (0.0,), (1.0,)
    half = (order + 1) // 2 + accuracy // 2 - 1
    offsets = np.arange(-half, half + 1, dtype=float)
    A = np.vander(offsets, len(offsets), increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[order] = math.factorial(order)
    w = np.linalg.solve(A, rhs)
    keep = np.abs(w) > 1e-12 * np.abs(w).max()
    return tuple(offsets[keep]), tuple(w[keep])


def _stencil(x, y, x_dirs, y_dirs, h_x, h_y, scheme):
    """Stencil points and weights for one mixed partial."""
    parts = []
    for which, dirs, h in ((0, list(x_dirs), h_x), (1, list(y_dirs), h_y)):
        for ax in sorted(set(dirs)):
            k = dirs.count(ax)
            off, w = central_stencil(k, scheme)
            parts.append((which, ax, np.asarray(off) * h, np.asarray(w) / h**k))
    if not parts:
        return x[None, :], y[None, :], np.ones(1)
    idx = np.stack(np.meshgrid(*[np.arange(len(p[2])) for p in parts], indexing="ij"), -1)
    idx = idx.reshape(-1, len(parts))
    X = np.repeat(x[None, :], len(idx), axis=0)
    Y = np.repeat(y[None, :], len(idx), axis=0)
    W = np.ones(len(idx))
    for col, (which, ax, off, w) in enumerate(parts):
        (X if which == 0 else Y)[:, ax] += off[idx[:, col]]
        W *= w[idx[:, col]]
    return X, Y, W


def _evaluate(cost, X, Y):
    try:
        vals = np.asarray(cost(X, Y), dtype=float)
    except (DomainError, ValueError) as exc:
        raise StencilDomainError(f"stencil leaves the cost's domain: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise StencilDomainError("cost is not finite at some stencil point")
    return vals


def mixed_partial(cost, x, y, x_dirs, y_dirs, cfg: StencilConfig) -> float:
    """Central-difference estimate of a mixed partial of ``cost(x, y)``.

    Parameters
    ----------
    cost : callable
        ``cost(X, Y)`` on arrays of shape ``(N, n)`` returning shape ``(N,)``.
    x, y : array_like
        Evaluation point.
    x_dirs, y_dirs : sequence of int
        Zero-based axes to differentiate along, with repetition; total
        length at most 4.
    cfg : StencilConfig
        Must carry explicit steps.

    Raises
    ------
    StencilDomainError
        A stencil point lies outside the cost's domain.
    """
    if len(x_dirs) + len(y_dirs) > 4:
        raise ValueError("total derivative order must be at most 4")
    if cfg.h_x is None or cfg.h_y is None:
        raise ValueError("mixed_partial needs explicit steps")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    X, Y, W = _stencil(x, y, x_dirs, y_dirs, cfg.h_x, cfg.h_y, cfg.scheme)
    return float(_evaluate(cost, X, Y) @ W)


def chart_cost_function(model: CostModel, cfg: SphereConfig):
    """Vectorised ``cost(X, Y)`` of ``model`` in the stereographic chart."""

    def cost(X, Y):
        d = geodesic_distance(X, Y, cfg)
        lo, hi = model.profile_domain()
        if np.any(d <= lo) or np.any(d >= hi):
            raise DomainError(f"distance outside ({lo}, {hi}) for {model.label}")
        return model(d)

    return cost


def default_steps(cfg: SphereConfig, y, model: CostModel | None = None) -> StencilConfig:
    """Steps scaled to the sphere and to the remaining gap to the antipode.

    ``h_y = 1e-2 max(R, |y|)`` follows the chart's stretching at large
    ``|y|``; ``h_x = 1e-2 min(R, R pi - d)`` keeps source perturbations well
    inside the distance left before the cut locus.  With ``model`` given,
    both steps are also capped at 5% of the distance left before the end of
    its profile domain; much tighter caps push the order-4 differences into
    rounding noise.
    """
    y = np.asarray(y, dtype=float)
    d = geodesic_distance(np.zeros_like(y), y, cfg)
    gap = cfg.diameter - d
    h_x = 1e-2 * min(cfg.R, gap)
    h_y = 1e-2 * max(cfg.R, float(np.linalg.norm(y)))
    if model is not None:
        room = model.profile_domain()[1] - d
        if math.isfinite(room):
            h_x = min(h_x, 5e-2 * room)
            # a chart step of h in y moves the distance by about h cos^2(d/2R)
            h_y = min(h_y, 5e-2 * room / math.cos(d / (2 * cfg.R)) ** 2)
    return StencilConfig(h_x, h_y)


def _tensor_once(cost, x, y, xi, eta, h_x, h_y, scheme):
    n = len(x)
    sym = [(i, j) for i in range(n) for j in range(i, n)]
    requests = (
        [("A", (i, j), [i], [j]) for i in range(n) for j in range(n)]
        + [("T", (i, j, q), [i, j], [q]) for i, j in sym for q in range(n)]
        + [("B", (r, s, t), [r], [s, t]) for r in range(n) for s, t in sym]
        + [("Q", (i, j, s, t), [i, j], [s, t]) for i, j in sym for s, t in sym]
    )
    Xs, Ys, Ws, sizes = [], [], [], []
    for _, _, xd, yd in requests:
        X, Y, W = _stencil(x, y, xd, yd, h_x, h_y, scheme)
        Xs.append(X), Ys.append(Y), Ws.append(W), sizes.append(len(W))
    vals = _evaluate(cost, np.concatenate(Xs), np.concatenate(Ys)) * np.concatenate(Ws)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    derivs = np.add.reduceat(vals, starts)

    A = np.empty((n, n))
    T = np.empty((n, n, n))
    B = np.empty((n, n, n))
    Q = np.empty((n, n, n, n))
    for (kind, ix, _, _), v in zip(requests, derivs):
        if kind == "A":
            A[ix] = v
        elif kind == "T":
            i, j, q = ix
            T[i, j, q] = T[j, i, q] = v
        elif kind == "B":
            r, s, t = ix
            B[r, s, t] = B[r, t, s] = v
        else:
            i, j, s, t = ix
            Q[i, j, s, t] = Q[j, i, s, t] = Q[i, j, t, s] = Q[j, i, t, s] = v

    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularMixedHessian(f"mixed Hessian is singular (condition {cond:.3g})")
    Ai = np.linalg.inv(A)
    inner = np.einsum("qr,ijq,rst->ijst", Ai, T, B) - Q
    value = -np.einsum("ijst,sk,tl,i,j,k,l->", inner, Ai, Ai, xi, xi, eta, eta)
    return float(value), float(cond)


def _tensor_fd(cost, x, y, xi, eta, stencil: StencilConfig) -> OracleResult:
    v1, cond = _tensor_once(cost, x, y, xi, eta, stencil.h_x, stencil.h_y, stencil.scheme)
    half = stencil.halved()
    v2, _ = _tensor_once(cost, x, y, xi, eta, half.h_x, half.h_y, half.scheme)
    p = stencil.scheme
    value = (2**p * v2 - v1) / (2**p - 1)
    return OracleResult(value, abs(v1 - v2) / (2**p - 1), cond, (stencil.h_x, stencil.h_y))


def _check_pair(xi, eta, tol=1e-12):
    if abs(xi @ eta) > tol or abs(xi @ xi - 1) > tol or abs(eta @ eta - 1) > tol:
        raise OrthogonalityError("xi and eta must be orthonormal")


def _check_gap(cfg: SphereConfig, y) -> None:
    d = geodesic_distance(np.zeros_like(y), y, cfg)
    if cfg.diameter - d < MIN_ANTIPODAL_GAP * cfg.R:
        raise AntipodalError(
            f"d={d:.10g} is within {MIN_ANTIPODAL_GAP:g} R of the antipode; "
            "finite differences are not reliable there"
        )


def mtw_tensor_fd(model: CostModel, cfg: SphereConfig, y, xi, eta,
                  stencil: StencilConfig | None = None) -> OracleResult:
    """MTW value at base point 0 and target ``y`` by finite differences.

    Raises
    ------
    AntipodalError
        ``y`` is within ``MIN_ANTIPODAL_GAP * R`` of the antipode of the origin.
    SingularMixedHessian
        The mixed Hessian cannot be inverted.
    StencilDomainError
        A stencil point leaves the profile's domain.
    """
    y = np.asarray(y, dtype=float)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    _check_pair(xi, eta)
    _check_gap(cfg, y)
    stencil = _resolve(stencil, cfg, y, model)
    return _tensor_fd(chart_cost_function(model, cfg), np.zeros(cfg.n), y, xi, eta, stencil)


def _resolve(stencil, cfg, y, model=None) -> StencilConfig:
    auto = default_steps(cfg, y, model)
    if stencil is None:
        return auto
    return StencilConfig(stencil.h_x or auto.h_x, stencil.h_y or auto.h_y, stencil.scheme)


def invariance_check(model: CostModel, cfg: SphereConfig, y, xi, eta, g,
                     stencil: StencilConfig | None = None) -> InvarianceResult:
    """Evaluate the tensor before and after a linear change of source coordinates.

    The transformed cost is ``c'(x', y) = c(g^{-1} x', y)`` at ``x' = 0`` with
    ``xi' = g xi`` and ``eta' = g^{-T} eta``.  The tensor is invariant under
    this change, so both values should agree.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (cfg.n, cfg.n):
        raise ValueError(f"g must be {cfg.n}x{cfg.n}")
    if np.linalg.cond(g) >= 50:
        raise ValueError("g must have condition number below 50")
    y = np.asarray(y, dtype=float)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    _check_pair(xi, eta)
    _check_gap(cfg, y)
    stencil = _resolve(stencil, cfg, y, model)
    base = chart_cost_function(model, cfg)
    g_inv = np.linalg.inv(g)

    def moved(X, Y):
        return base(X @ g_inv.T, Y)

    x0 = np.zeros(cfg.n)
    original = _tensor_fd(base, x0, y, xi, eta, stencil)
    transformed = _tensor_fd(moved, x0, y, g @ xi, g_inv.T @ eta, stencil)
    return InvarianceResult(original, transformed)
