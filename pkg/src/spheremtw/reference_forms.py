"""Hand-simplified closed forms for specific profiles.

These are independent references for the generic coefficient formula in
:mod:`spheremtw.analytic`.  All of them were simplified with the
``"inverse-radius"`` convention for E, so they should be compared against
``p_coefficients(..., convention="inverse-radius")``.

Each function takes ``lib`` (numpy or mpmath) so the comparison can run in
extended precision; several forms cancel ``1/d^2`` terms at small ``d``.

Two of the hand forms do not agree with the generic formula under either
convention; they are kept verbatim so the disagreement stays visible:

* :func:`chordal_p` (all four coefficients).
* :func:`power_o` with ``o4_variant="literal"``: its final term reads
  ``-(m-2)^2/(4 d^2)``.  Replacing it with ``-sign (m-2)^2/(4 (m-1) d^m)``
  (``o4_variant="consistent"``) makes it agree with the generic formula.
"""

from __future__ import annotations

import numpy as np

__all__ = ["half_square_p", "chordal_p", "power_o", "power_o4_numerator", "power_o4_multiplier"]


def half_square_p(d, R, lib=np):
    """``(P1, P2, P3, P4)`` for ``f = d^2/2``."""
    a = d / (2 * R)
    s, c = lib.sin(a), lib.cos(a)
    A = c / (2 * R * d * s)
    B = 1 / (4 * R * R * s * s)
    C = d * c / (8 * R**3 * s**3)
    return (A - B, -2 / d**2 + A + B, -A - B + 2 * C, 8 / d**2 - 2 * C - 3 * A - 3 * B)


def chordal_p(d, R, lib=np):
    """Hand forms for ``f = 2R^2 sin^2(d/2R)``; they disagree with the generic formula."""
    c2 = lib.cos(d / (2 * R)) ** 2
    s2 = 1 - c2
    cubic = 8 * c2**3 - 12 * c2**2 + 6 * c2 - 1
    return (
        1 / (4 * R * R * (1 - 2 * c2)),
        4 * s2 * c2 / (4 * R * R * -cubic),
        0 * d,
        2 * s2 * s2 * c2 / (4 * R * R * cubic),
    )


def power_o(d, m, R, sign=1, lib=np, o4_variant: str = "consistent"):
    """``(O1, O2, O3, O4)`` for ``f = sign d^m / m``.

    Parameters
    ----------
    o4_variant : {"consistent", "literal"}
        Which final term to use in ``O4``; see the module docstring.
    """
    a = d / (2 * R)
    S, C = lib.sin(a), lib.cos(a)
    s = sign
    o1 = s * ((m - 1) * 2 * R * S * C - d) / ((m - 1) * 4 * R**2 * d ** (m - 1) * S**2)
    o2 = -s * (m * 2 * R * S - 2 * d * C) / (2 * R * d**m * S)
    o3 = -s * (m * 2 * R * S - 2 * d * C) / ((m - 1) ** 2 * 8 * R**3 * d ** (m - 2) * S**3)
    o4 = (s * C / (2 * (m - 1) ** 2 * 8 * R**3 * d ** (m - 3) * S**3)
          + s * C / (8 * R * d ** (m - 1) * S)
          - s * (6 * m - 5) / (4 * (m - 1) ** 2 * 4 * R**2 * d ** (m - 2) * S**2)
          + s * (m**2 - 2 * m + 2) / (2 * (m - 1) * d**m))
    if o4_variant == "literal":
        o4 = o4 - (m - 2) ** 2 / (4 * d**2)
    elif o4_variant == "consistent":
        o4 = o4 - s * (m - 2) ** 2 / (4 * (m - 1) * d**m)
    else:
        raise ValueError(f"unknown o4_variant {o4_variant!r}")
    return (o1, o2, o3, o4)


def power_o4_numerator(d, m, R, lib=np):
    """Numerator of the literal ``O4`` for the negative power law over a common denominator.

    ``O4_literal = numerator / K`` with ``K = power_o4_multiplier(d, m, R) > 0``.
    """
    S, C = lib.sin(d / (2 * R)), lib.cos(d / (2 * R))
    return (-2 * d**5 * C
            + (6 * m - 5) * 2 * R * d**4 * S
            - (m - 1) ** 2 * 4 * R**2 * d**3 * S**2 * C
            - 2 * (m - 1) * (m**2 - 2 * m + 2) * 8 * R**3 * d**2 * S**3
            - (m - 1) ** 2 * (m - 2) ** 2 * 8 * R**3 * d**m * S**3)


def power_o4_multiplier(d, m, R, lib=np):
    """Positive factor ``32 (m-1)^2 R^3 d^(m+2) sin^3(d/2R)``."""
    return 32 * (m - 1) ** 2 * R**3 * d ** (m + 2) * lib.sin(d / (2 * R)) ** 3
