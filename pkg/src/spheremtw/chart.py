"""Stereographic chart of the round sphere of radius R.

Points of the sphere are represented in the full-sphere stereographic chart
centred at a tangency point: the chart origin is that point, the sphere's
equator (distance ``R pi / 2``) sits at ``|z| = 2R`` and the antipode is at
infinity.  Distances are computed through the unit embedding

    u(z) = (4R z, 4R^2 - |z|^2) / (4R^2 + |z|^2),

and ``d = 2R atan2(|u - v|, |u + v|)``, which is accurate everywhere,
including at ``d -> 0`` where ``R arccos(u . v)`` loses half its digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .costjet import CostModel, degeneracy_scale, jet_eval
from .errors import AntipodalError, DegenerateCost, DimensionError, DomainError

__all__ = [
    "SphereConfig",
    "ANTIPODAL_EPS",
    "embed",
    "geodesic_distance",
    "literal_chart_distance",
    "chart_cost",
    "radius_from_distance",
    "target_from_case",
]

#: pairs with embedded inner product below -1 + ANTIPODAL_EPS are rejected
ANTIPODAL_EPS = 1e-10


@dataclass(frozen=True)
class SphereConfig:
    """Round sphere S^n of radius ``R``."""

    R: float = 1.0
    n: int = 3

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0):
            raise ValueError(f"radius must be positive and finite, got {self.R!r}")
        if int(self.n) != self.n or self.n < 2:
            raise DimensionError(f"sphere dimension must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def diameter(self) -> float:
        """Largest geodesic distance, ``R pi``."""
        return self.R * math.pi


def embed(z, R: float) -> np.ndarray:
    """Unit vector in R^{n+1} of the sphere point with chart coordinates ``z``.

    ``z`` has shape ``(..., n)``; the result has shape ``(..., n + 1)``.
    """
    z = np.asarray(z, dtype=float)
    s = np.sum(z * z, axis=-1, keepdims=True)
    den = 4 * R * R + s
    return np.concatenate([4 * R * z / den, (4 * R * R - s) / den], axis=-1)


def geodesic_distance(x, y, cfg: SphereConfig) -> np.ndarray | float:
    """Great-circle distance between chart points ``x`` and ``y``.

    Broadcasts over leading axes.  Returns a float for single points.

    Raises
    ------
    AntipodalError
        If any pair is within ``ANTIPODAL_EPS`` of antipodal.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("chart coordinates must be finite")
    u, v = embed(x, cfg.R), embed(y, cfg.R)
    if np.any(np.sum(u * v, axis=-1) <= -1 + ANTIPODAL_EPS):
        raise AntipodalError("chart points are (nearly) antipodal; distance is not smooth there")
    d = 2 * cfg.R * np.arctan2(np.linalg.norm(u - v, axis=-1), np.linalg.norm(u + v, axis=-1))
    return float(d) if d.ndim == 0 else d


def literal_chart_distance(x, y, cfg: SphereConfig) -> float:
    """Distance from the rational arccos expression in chart coordinates.

    Only meaningful for ``|x|, |y| < 2R``; kept as an independent reference
    for :func:`geodesic_distance`.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    R2 = cfg.R ** 2
    ax, ay = 4 * R2 - x @ x, 4 * R2 - y @ y
    num = 1 + 16 * R2 / (ax * ay) * (x @ y)
    den = math.sqrt(1 + 16 * R2 / ax**2 * (x @ x)) * math.sqrt(1 + 16 * R2 / ay**2 * (y @ y))
    return cfg.R * math.acos(max(-1.0, min(1.0, num / den)))


def chart_cost(model: CostModel, x, y, cfg: SphereConfig):
    """Cost ``f(d(x, y))`` in chart coordinates, vectorised over leading axes."""
    d = geodesic_distance(x, y, cfg)
    lo, hi = model.profile_domain()
    if np.any(np.asarray(d) > hi) or np.any(np.asarray(d) < lo):
        raise DomainError(f"distance outside the domain ({lo}, {hi}) of {model.label}")
    return model(d)


def radius_from_distance(d: float, cfg: SphereConfig) -> float:
    """Chart radius ``2R tan(d / 2R)`` of a point at distance ``d`` from the origin."""
    if not (0 <= d < cfg.diameter):
        raise DomainError(f"d={d!r} must lie in [0, R pi) = [0, {cfg.diameter})")
    return 2 * cfg.R * math.tan(d / (2 * cfg.R))


def target_from_case(d: float, case, model: CostModel, cfg: SphereConfig):
    """Chart target realising distance ``d`` and an orientation case.

    The base point is the chart origin, ``xi = e1`` and ``eta = e2``.  The
    transport vector direction ``p_hat`` is ``e3``, ``e1``, ``e2`` or
    ``(e1 + e2)/sqrt(2)`` for the perpendicular, xi-parallel, eta-parallel
    and diagonal cases; the target lies along ``-sign(f'(d)) p_hat``.

    Returns
    -------
    y, p_hat, xi, eta : ndarray
        Each of length ``cfg.n``.

    Raises
    ------
    DegenerateCost
        ``f'(d)`` vanishes, so ``p`` has no direction.
    DimensionError
        Perpendicular case on ``S^2``.
    """
    from .analytic import OrientationCase

    case = OrientationCase.parse(case)
    n = cfg.n
    if case is OrientationCase.PERP and n < 3:
        raise DimensionError("p perpendicular to both xi and eta needs n >= 3")
    if not (0 < d < cfg.diameter):
        raise DomainError(f"d={d!r} must lie in (0, R pi)")
    jet = jet_eval(model, d)
    if abs(jet.f1) <= degeneracy_scale(jet.f0, d):
        raise DegenerateCost(f"f'({d:.17g}) = 0: the transport vector vanishes")
    eye = np.eye(n)
    xi, eta = eye[0], eye[1]
    p_hat = {
        OrientationCase.PERP: eye[2 % n],
        OrientationCase.XI: xi,
        OrientationCase.ETA: eta,
        OrientationCase.DIAG: (xi + eta) / math.sqrt(2.0),
    }[case].copy()
    y = radius_from_distance(d, cfg) * (-math.copysign(1.0, jet.f1)) * p_hat
    return y, p_hat, xi.copy(), eta.copy()
