"""Radial cost profiles f(d) and their exact derivatives up to order four.

A :class:`CostModel` describes a cost ``c(x, y) = f(d(x, y))`` through the
profile ``f``.  :func:`jet_eval` returns ``(f, f', f'', f''', f'''')`` at a
single distance from closed forms; nothing in this module differentiates
numerically.

Every closed form is written once against a small math namespace, so the
same code runs on numpy arrays (vectorised scans, the finite-difference
oracle) and on :mod:`mpmath` numbers (extended precision near ``d -> 0``,
where the reduced MTW expression cancels terms of size ``1/d**2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple, Sequence

import mpmath
import numpy as np

from .errors import DegenerateCost, DomainError

__all__ = [
    "Family",
    "CustomProfile",
    "CostModel",
    "Jet4",
    "jet_eval",
    "degeneracy_scale",
    "DEGENERACY_TOL",
]

#: relative threshold below which f' or f'' counts as zero
DEGENERACY_TOL = 1e-12


class Family(str, Enum):
    HALF_SQUARE = "half-square"
    CHORDAL = "chordal"
    POWER = "power"
    LOG = "log"
    SQRT_MINUS = "sqrt-minus"
    SQRT_PLUS = "sqrt-plus"
    CUSTOM = "custom"


_SIGNED = {Family.POWER, Family.LOG, Family.SQRT_MINUS, Family.SQRT_PLUS}


@dataclass(frozen=True)
class CustomProfile:
    """User-supplied profile.

    ``derivatives(d)`` must return the five values ``(f, f', f'', f''', f'''')``
    at ``d``.  ``domain`` is the open interval on which they are finite and
    ``f''`` does not vanish.
    """

    name: str
    derivatives: Callable[[float], Sequence[float]]
    domain: tuple[float, float] = (0.0, math.inf)


class Jet4(NamedTuple):
    """Values of f and its first four derivatives at distance ``d``."""

    d: float
    f0: float
    f1: float
    f2: float
    f3: float
    f4: float


@dataclass(frozen=True)
class CostModel:
    """A radial cost profile.

    Use the named constructors (:meth:`half_square`, :meth:`power`, ...)
    rather than the raw initialiser.

    Parameters
    ----------
    family : Family
    sign : int
        +1 or -1; only meaningful for the signed families.
    m : float, optional
        Exponent of the power-law family ``sign * d**m / m``.
    R : float, optional
        Radius entering the chordal profile ``2 R^2 sin^2(d / 2R)``.
    custom : CustomProfile, optional
    """

    family: Family
    sign: int = 1
    m: float | None = None
    R: float | None = None
    custom: CustomProfile | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        if self.family not in _SIGNED and self.sign != 1:
            raise ValueError(f"{self.family.value} has no sign variant")
        if self.family is Family.POWER:
            if self.m is None or not math.isfinite(self.m):
                raise ValueError("power-law profile needs a finite exponent m")
            if self.m == 0:
                raise ValueError("m = 0 is the log profile; use CostModel.log()")
            if self.m == 1:
                raise ValueError(
                    "m = 1 is excluded: f'' vanishes identically, so the "
                    "transport vector does not determine the distance"
                )
        if self.family is Family.CHORDAL and not (self.R and self.R > 0):
            raise ValueError("chordal profile needs a radius R > 0")
        if self.family is Family.CUSTOM and self.custom is None:
            raise ValueError("custom family needs a CustomProfile")

    # -- constructors -----------------------------------------------------
    @classmethod
    def half_square(cls) -> "CostModel":
        return cls(Family.HALF_SQUARE)

    @classmethod
    def chordal(cls, R: float) -> "CostModel":
        return cls(Family.CHORDAL, R=float(R))

    @classmethod
    def power(cls, m: float, sign: int = 1) -> "CostModel":
        return cls(Family.POWER, sign=sign, m=float(m))

    @classmethod
    def log(cls, sign: int = 1) -> "CostModel":
        return cls(Family.LOG, sign=sign)

    @classmethod
    def sqrt_minus(cls, sign: int = 1) -> "CostModel":
        return cls(Family.SQRT_MINUS, sign=sign)

    @classmethod
    def sqrt_plus(cls, sign: int = 1) -> "CostModel":
        return cls(Family.SQRT_PLUS, sign=sign)

    @classmethod
    def from_custom(cls, profile: CustomProfile) -> "CostModel":
        return cls(Family.CUSTOM, custom=profile)

    @classmethod
    def from_name(cls, name: str, sign: int | str = 1, m: float | None = None,
                  R: float | None = None) -> "CostModel":
        """Build a model from its CLI/JSON name (``"power"``, ``"chordal"``...)."""
        if isinstance(sign, str):
            sign = {"+": 1, "-": -1, "+1": 1, "-1": -1}[sign]
        family = Family(name)
        if family is Family.CUSTOM:
            raise ValueError("custom profiles cannot be built from a name")
        if family is Family.POWER:
            return cls.power(m, sign)
        if family is Family.CHORDAL:
            return cls.chordal(R)
        return cls(family, sign=sign if family in _SIGNED else 1)

    # -- description ------------------------------------------------------
    @property
    def label(self) -> str:
        s = "+" if self.sign > 0 else "-"
        if self.family is Family.POWER:
            return f"power({s}, m={self.m:g})"
        if self.family is Family.CHORDAL:
            return f"chordal(R={self.R:g})"
        if self.family is Family.CUSTOM:
            return f"custom({self.custom.name})"
        if self.family in _SIGNED:
            return f"{self.family.value}({s})"
        return self.family.value

    def to_dict(self) -> dict:
        if self.family is Family.CUSTOM:
            raise TypeError("custom profiles are not serialisable")
        return {"family": self.family.value, "sign": self.sign, "m": self.m, "R": self.R}

    @classmethod
    def from_dict(cls, data: dict) -> "CostModel":
        return cls(Family(data["family"]), sign=data.get("sign", 1),
                   m=data.get("m"), R=data.get("R"))

    # -- domains ----------------------------------------------------------
    def profile_domain(self) -> tuple[float, float]:
        """Open interval on which the closed-form jet is finite."""
        if self.family is Family.SQRT_MINUS:
            return (0.0, 1.0)
        if self.family is Family.CUSTOM:
            return tuple(self.custom.domain)
        return (0.0, math.inf)

    def valid_domain(self, R: float | None = None) -> tuple[float, float]:
        """Open interval of distances where f', f'' are finite and f'' != 0.

        With a sphere radius ``R`` the interval is further cut to ``(0, R pi)``.
        The chordal profile stops at its first inflection ``d = R_c pi / 2``.
        """
        lo, hi = self.profile_domain()
        if self.family is Family.CHORDAL:
            hi = self.R * math.pi / 2
        if R is not None:
            hi = min(hi, R * math.pi)
        return (lo, hi)

    # -- evaluation -------------------------------------------------------
    def derivatives(self, d, lib=np):
        """Return ``(f, f', f'', f''', f'''')`` at ``d``.

        ``lib`` is :mod:`numpy` (``d`` may be an array) or :mod:`mpmath`.
        No domain checking is done here.
        """
        fam, s = self.family, self.sign
        if fam is Family.HALF_SQUARE:
            one = d * 0 + 1
            return (d * d / 2, d, one, 0 * one, 0 * one)
        if fam is Family.CHORDAL:
            Rc = self.R
            t = d / Rc
            sh = lib.sin(d / (2 * Rc))
            return (2 * Rc * Rc * sh * sh, Rc * lib.sin(t), lib.cos(t),
                    -lib.sin(t) / Rc, -lib.cos(t) / (Rc * Rc))
        if fam is Family.POWER:
            m = self.m
            return (s * d**m / m, s * d**(m - 1), s * (m - 1) * d**(m - 2),
                    s * (m - 1) * (m - 2) * d**(m - 3),
                    s * (m - 1) * (m - 2) * (m - 3) * d**(m - 4))
        if fam is Family.LOG:
            return (s * lib.log(d), s / d, -s / d**2, 2 * s / d**3, -6 * s / d**4)
        if fam is Family.SQRT_MINUS:
            g = lib.sqrt(1 - d * d)
            return (s * g, -s * d / g, -s / g**3, -3 * s * d / g**5,
                    -3 * s * (1 + 4 * d * d) / g**7)
        if fam is Family.SQRT_PLUS:
            h = lib.sqrt(1 + d * d)
            return (s * h, s * d / h, s / h**3, -3 * s * d / h**5,
                    s * (12 * d * d - 3) / h**7)
        if lib is np and np.ndim(d):
            vals = np.array([self.custom.derivatives(float(x)) for x in np.ravel(d)], float)
            return tuple(vals[:, k].reshape(np.shape(d)) for k in range(5))
        return tuple(self.custom.derivatives(d))

    def __call__(self, d):
        """Profile value ``f(d)``, vectorised over numpy arrays."""
        return self.derivatives(np.asarray(d, dtype=float))[0]


def degeneracy_scale(f0, d) -> float:
    """Magnitude below which f' or f'' is treated as zero at distance d."""
    return DEGENERACY_TOL * (1 + abs(f0) / max(abs(d), 1e-12))


def _check_distance(model: CostModel, d) -> None:
    lo, hi = model.profile_domain()
    x = float(d)
    if not math.isfinite(x) or not (lo < x < hi):
        raise DomainError(f"d={x!r} outside the domain ({lo}, {hi}) of {model.label}")


def jet_eval(model: CostModel, d: float, dps: int | None = None) -> Jet4:
    """Closed-form jet of ``model`` at distance ``d``.

    Parameters
    ----------
    model : CostModel
    d : float
        Geodesic distance, inside ``model.profile_domain()``.
    dps : int, optional
        When given, evaluate with :mod:`mpmath` at this many decimal digits
        and return :class:`mpmath.mpf` fields.  The caller must keep working
        inside ``mpmath.workdps(dps)`` to retain the extra digits.

    Raises
    ------
    DomainError
        ``d`` is outside the profile's domain.
    DegenerateCost
        ``f''(d)`` vanishes within :func:`degeneracy_scale`.
    """
    _check_distance(model, d)
    if dps is None:
        vals = tuple(float(v) for v in model.derivatives(float(d), lib=np))
        dd = float(d)
    else:
        with mpmath.workdps(dps):
            dd = mpmath.mpf(d)
            vals = tuple(mpmath.mpf(v) for v in model.derivatives(dd, lib=mpmath))
    if not all(mpmath.isfinite(v) for v in vals):
        raise DomainError(f"non-finite jet for {model.label} at d={float(d)!r}")
    if abs(vals[2]) <= degeneracy_scale(vals[0], dd):
        raise DegenerateCost(f"f''({float(d):.17g}) = 0 for {model.label}")
    return Jet4(dd, *vals)
