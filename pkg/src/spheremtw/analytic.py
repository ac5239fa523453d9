"""Reduced MTW quantity for radial costs on the round sphere.

For a cost ``f(d)`` the MTW value along an orthonormal pair ``xi, eta`` and a
transport vector ``p`` is

    P1 + (p.xi)^2/|p|^2 P2 + (p.eta)^2/|p|^2 P3 + (p.xi)^2 (p.eta)^2/|p|^4 P4

where ``P1..P4`` depend on the distance only, through the profile jet and a
geometric coefficient ``E(d; R)`` with its first two derivatives.  (A3) holds
with constant ``C`` when this is at most ``-C`` for every admissible choice.

``E`` is the transverse Hessian coefficient of the distance function.  Two
conventions are provided:

``"geodesic"`` (default)
    ``E = cot(d/R)/R``, the coefficient of the great-circle distance.  This
    is the one that agrees with the finite-difference tensor in
    :mod:`spheremtw.oracle`.
``"inverse-radius"``
    ``E = 1/|y| = cot(d/2R)/(2R)``, the reciprocal chart radius.  Kept to
    reproduce hand-simplified closed forms that were derived with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import mpmath
import numpy as np

from .costjet import CostModel, degeneracy_scale, jet_eval
from .errors import DegenerateCost, DivergentLimit, DomainError, OrthogonalityError

__all__ = [
    "CONVENTIONS",
    "OrientationCase",
    "EJet",
    "PCoefficients",
    "LimitEstimate",
    "e_jet",
    "p_coefficients",
    "o_value",
    "o_values",
    "o_table",
    "mtw_general",
    "small_d_limit",
    "endpoint_limit",
    "gradient_bound",
]

CONVENTIONS = ("geodesic", "inverse-radius")

#: below this fraction of R the float path cancels badly; use mpmath instead
SMALL_D_FRACTION = 5e-2
#: working precision of the extended-precision path
DEFAULT_DPS = 40


class OrientationCase(str, Enum):
    """Alignment of the transport vector p against the pair xi, eta."""

    PERP = "perp"  # p orthogonal to xi and eta
    XI = "xi"  # p parallel to xi
    ETA = "eta"  # p parallel to eta
    DIAG = "diag"  # p bisects xi and eta

    @property
    def index(self) -> int:
        """1-based index matching the ``O1..O4`` naming."""
        return _CASE_ORDER.index(self) + 1

    @classmethod
    def parse(cls, value) -> "OrientationCase":
        if isinstance(value, cls):
            return value
        if isinstance(value, int):
            return _CASE_ORDER[value - 1]
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        try:
            return _CASE_ALIASES[key]
        except KeyError:
            raise ValueError(f"unknown orientation case {value!r}") from None


_CASE_ORDER = (OrientationCase.PERP, OrientationCase.XI, OrientationCase.ETA, OrientationCase.DIAG)
_CASE_ALIASES = {
    **{c.value: c for c in _CASE_ORDER},
    **{f"o{i + 1}": c for i, c in enumerate(_CASE_ORDER)},
    "perptoboth": OrientationCase.PERP,
    "parallelxi": OrientationCase.XI,
    "paralleleta": OrientationCase.ETA,
    "diagonal": OrientationCase.DIAG,
}


class EJet(tuple):
    """``(e0, e1, e2)``: E and its first two distance derivatives."""

    __slots__ = ()

    def __new__(cls, e0, e1, e2):
        return super().__new__(cls, (e0, e1, e2))

    e0 = property(lambda self: self[0])
    e1 = property(lambda self: self[1])
    e2 = property(lambda self: self[2])


@dataclass(frozen=True)
class PCoefficients:
    p1: float
    p2: float
    p3: float
    p4: float

    def as_tuple(self) -> tuple:
        return (self.p1, self.p2, self.p3, self.p4)


@dataclass(frozen=True)
class LimitEstimate:
    """Extrapolated one-sided limit with the size of the last correction."""

    value: float
    error: float
    samples: tuple


def _check_convention(convention: str) -> None:
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def _e_terms(d, R, convention, lib):
    if convention == "geodesic":
        t = d / R
        s, c = lib.sin(t), lib.cos(t)
        return c / (R * s), -1 / (R * R * s * s), 2 * c / (R**3 * s**3)
    a = d / (2 * R)
    s, c = lib.sin(a), lib.cos(a)
    return c / (2 * R * s), -1 / (4 * R * R * s * s), c / (4 * R**3 * s**3)


def e_jet(d: float, R: float, convention: str = "geodesic", dps: int | None = None) -> EJet:
    """Geometric coefficient E and its first two derivatives at distance ``d``.

    Raises
    ------
    DomainError
        Unless ``0 < d < R pi``.
    """
    _check_convention(convention)
    if not (0 < float(d) < R * math.pi):
        raise DomainError(f"d={float(d)!r} must lie in (0, R pi)")
    if dps is None:
        return EJet(*(float(v) for v in _e_terms(float(d), R, convention, np)))
    with mpmath.workdps(dps):
        return EJet(*_e_terms(mpmath.mpf(d), mpmath.mpf(R), convention, mpmath))


def _p_from_jets(f1, f2, f3, f4, e0, e1, e2):
    """The four coefficient functions from the profile and E jets."""
    a = e0 / f1
    b = e1 / f2
    k = e2 * f1 / f2**2
    g = e1 * f1 * f3 / f2**3
    p1 = a + b
    p2 = f3 / (f1 * f2) - 2 * f2 / f1**2 - b + a
    p3 = b - a + k - g
    p4 = (f4 / f2**2 - 5 * f3 / (f1 * f2) - f3**2 / f2**3 + 8 * f2 / f1**2
          - k + 3 * b + g - 3 * a)
    return p1, p2, p3, p4


def p_coefficients(model: CostModel, d: float, R: float, convention: str = "geodesic",
                   dps: int | None = None) -> PCoefficients:
    """Coefficient functions ``P1..P4`` at distance ``d`` on a sphere of radius ``R``.

    Parameters
    ----------
    dps : int, optional
        Evaluate in :mod:`mpmath` at this precision and return mpf values.
        Without it, distances below ``SMALL_D_FRACTION * R`` are still
        evaluated in extended precision (then rounded to float), because the
        float formula cancels terms of order ``1/d^2`` there.

    Raises
    ------
    DomainError
        ``d`` outside ``(0, R pi)`` or the model's domain.
    DegenerateCost
        ``f'`` or ``f''`` vanishes at ``d``.
    """
    _check_convention(convention)
    if not (0 < float(d) < R * math.pi):
        raise DomainError(f"d={float(d)!r} must lie in (0, R pi) for R={R}")
    to_float = dps is None
    if dps is None and float(d) >= SMALL_D_FRACTION * R:
        jet = jet_eval(model, d)
        if abs(jet.f1) <= degeneracy_scale(jet.f0, d):
            raise DegenerateCost(f"f'({float(d):.17g}) = 0 for {model.label}")
        e = e_jet(d, R, convention)
        with np.errstate(all="ignore"):
            return PCoefficients(*(float(v) for v in _p_from_jets(*jet[2:], *e)))
    work = dps or DEFAULT_DPS
    with mpmath.workdps(work):
        jet = jet_eval(model, d, dps=work)
        if abs(jet.f1) <= degeneracy_scale(jet.f0, jet.d):
            raise DegenerateCost(f"f'({float(d):.17g}) = 0 for {model.label}")
        e = e_jet(jet.d, R, convention, dps=work)
        vals = _p_from_jets(*jet[2:], *e)
        if to_float:
            vals = tuple(float(v) for v in vals)
        return PCoefficients(*vals)


def o_value(coeffs: PCoefficients, case) -> float:
    """MTW value for one of the four canonical orientations."""
    case = OrientationCase.parse(case)
    p1, p2, p3, p4 = coeffs.as_tuple()
    if case is OrientationCase.PERP:
        return p1
    if case is OrientationCase.XI:
        return p1 + p2
    if case is OrientationCase.ETA:
        return p1 + p3
    return p1 + p2 / 2 + p3 / 2 + p4 / 4


def o_values(coeffs: PCoefficients) -> tuple:
    """``(O1, O2, O3, O4)`` for one coefficient set."""
    return tuple(o_value(coeffs, c) for c in _CASE_ORDER)


def mtw_general(coeffs: PCoefficients, p, xi, eta, tol: float = 1e-12) -> float:
    """MTW value for an arbitrary transport vector and orthonormal pair.

    Raises
    ------
    OrthogonalityError
        ``xi`` and ``eta`` are not orthonormal within ``tol``.
    """
    p, xi, eta = (np.asarray(v, dtype=float) for v in (p, xi, eta))
    if abs(xi @ eta) > tol or abs(xi @ xi - 1) > tol or abs(eta @ eta - 1) > tol:
        raise OrthogonalityError("xi and eta must be orthonormal")
    pp = p @ p
    if pp <= 0:
        raise DomainError("transport vector must be nonzero")
    a = (p @ xi) ** 2 / pp
    b = (p @ eta) ** 2 / pp
    return coeffs.p1 + a * coeffs.p2 + b * coeffs.p3 + a * b * coeffs.p4


def o_table(model: CostModel, d, R: float, convention: str = "geodesic"):
    """Vectorised ``P`` and ``O`` values over an array of distances.

    Returns
    -------
    P, O : ndarray, shape (4, len(d))
        NaN where the point is degenerate.
    degenerate : ndarray of bool
        True where ``f'`` or ``f''`` vanishes or a value is not finite.
    """
    _check_convention(convention)
    d = np.asarray(d, dtype=float)
    P = np.full((4, d.size), np.nan)
    bad = np.zeros(d.size, dtype=bool)
    small = d < SMALL_D_FRACTION * R
    big = ~small
    if big.any():
        db = d[big]
        with np.errstate(all="ignore"):
            f0, f1, f2, f3, f4 = (np.broadcast_to(v, db.shape) for v in model.derivatives(db, np))
            scale = 1e-12 * (1 + np.abs(f0) / np.maximum(db, 1e-12))
            e = _e_terms(db, R, convention, np)
            vals = np.array(_p_from_jets(f1, f2, f3, f4, *e))
        deg = (np.abs(f1) <= scale) | (np.abs(f2) <= scale) | ~np.all(np.isfinite(vals), axis=0)
        vals[:, deg] = np.nan
        P[:, big] = vals
        bad[big] = deg
    for i in np.flatnonzero(small):
        try:
            P[:, i] = p_coefficients(model, d[i], R, convention).as_tuple()
        except (DegenerateCost, DomainError):
            bad[i] = True
    bad |= ~np.all(np.isfinite(P), axis=0)
    P[:, bad] = np.nan
    O = np.array([P[0], P[0] + P[1], P[0] + P[2], P[0] + P[1] / 2 + P[2] / 2 + P[3] / 4])
    return P, O, bad


def _extrapolate(values) -> LimitEstimate:
    """Three-term extrapolation for samples at geometrically shrinking offsets.

    The correction assumes an error term proportional to a power of the
    offset with unknown exponent (Aitken's delta-squared), which covers the
    ``d^2``, ``d^m`` and ``d^(m-2)`` tails met by the profile families.
    """
    v1, v2, v3 = values
    d1, d2 = v2 - v1, v3 - v2
    scale = max(abs(v3), 1)
    if abs(d2) <= 1e-30 * scale:
        return LimitEstimate(float(v3), float(abs(d2)), tuple(float(v) for v in values))
    if abs(d1) <= 1e-30 * scale or abs(d2 / d1) >= 1:
        raise DivergentLimit(f"samples {[float(v) for v in values]} do not settle",
                             tuple(float(v) for v in values))
    q = d2 / d1
    corr = d2 * q / (1 - q)
    return LimitEstimate(float(v3 + corr), float(abs(corr)), tuple(float(v) for v in values))


def endpoint_limit(model: CostModel, R: float, case, at: float, side: int,
                   convention: str = "geodesic", dps: int = DEFAULT_DPS) -> LimitEstimate:
    """One-sided limit of an orientation value at distance ``at``.

    Samples at ``at + side * h R`` for ``h`` in ``1e-3, 1e-4, 1e-5`` and
    extrapolates.  ``side`` is +1 for a limit from above, -1 from below.

    Raises
    ------
    DivergentLimit
        The samples grow or fail to settle.
    """
    case = OrientationCase.parse(case)
    vals = []
    with mpmath.workdps(dps):
        for h in ("1e-3", "1e-4", "1e-5"):
            d = mpmath.mpf(at) + side * mpmath.mpf(h) * R
            vals.append(o_value(p_coefficients(model, d, R, convention, dps=dps), case))
        if not all(mpmath.isfinite(v) for v in vals):
            raise DivergentLimit("non-finite samples near the endpoint",
                                 tuple(float(v) for v in vals))
        return _extrapolate(vals)


def small_d_limit(model: CostModel, R: float, case, convention: str = "geodesic",
                  dps: int = DEFAULT_DPS) -> LimitEstimate:
    """Limit of an orientation value as ``d -> 0+``.

    Samples at ``d = 1e-3 R, 1e-4 R, 1e-5 R`` in extended precision.

    Examples
    --------
    >>> round(small_d_limit(CostModel.half_square(), 1.0, "perp").value, 9)
    -0.666666667
    """
    return endpoint_limit(model, R, case, 0.0, +1, convention, dps)


def _sphere_volume(k: int) -> float:
    """Surface measure of the unit sphere S^k."""
    return 2 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def gradient_bound(n: int, rho_sup: float) -> float:
    """Upper bound on the displacement of an optimal map on the unit sphere S^n.

    ``pi - (1/2pi) * ((1/rho_sup) * (n |S^n| / (2 |S^{n-1}|))^2)^(1/n)``.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be an integer >= 1, got {n!r}")
    if not rho_sup > 0:
        raise ValueError(f"density bound must be positive, got {rho_sup!r}")
    ratio = n * _sphere_volume(n) / (2 * _sphere_volume(n - 1))
    return math.pi - (ratio**2 / rho_sup) ** (1 / n) / (2 * math.pi)
