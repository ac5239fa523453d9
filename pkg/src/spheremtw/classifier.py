"""Grid scans of the orientation values and (A3) verdicts built on them.

A scan evaluates ``O1..O4`` on a uniform grid of ``(0, R pi)`` (cut to the
model's valid domain) plus log-spaced points towards ``d = 0``, and, when an
end of the interval is not truncated, extrapolates the one-sided limits
there.  :func:`classify` turns a scan into a verdict:

* ``StrongA3``: every considered value is at most ``-strictness``; the
  constant is ``C = -max sup``.
* ``A3w``: every considered value is at most 0 but some supremum is above
  ``-strictness``.
* ``Violated``: some considered value exceeds ``strictness``.
* ``Indeterminate``: the largest value lies in ``(0, strictness]``.

Only ``O2..O4`` are considered on ``S^2``, because no transport vector can be
orthogonal to both members of an orthonormal pair in the plane.  Verdicts are
grid evidence, not proofs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import mpmath
import numpy as np
from scipy.optimize import bisect

from .analytic import (
    CONVENTIONS,
    DEFAULT_DPS,
    OrientationCase,
    _CASE_ORDER,
    endpoint_limit,
    o_table,
    o_value,
    p_coefficients,
)
from .chart import SphereConfig
from .costjet import CostModel
from .errors import DegenerateCost, DivergentLimit, DomainError, EmptyDomain, NoSignChange
from .reference_forms import power_o, power_o4_numerator

__all__ = [
    "VERDICTS",
    "EndpointLimit",
    "ScanReport",
    "Witness",
    "ClassificationReport",
    "BifurcationResult",
    "SuiteLine",
    "scan",
    "classify",
    "refine_root",
    "eq4_numerator",
    "mstar_cubic",
    "mstar_positive",
    "example_suite",
]

VERDICTS = ("StrongA3", "A3w", "Violated", "Indeterminate")
DEFAULT_GRID = 2048
DEFAULT_MARGIN = 1e-6
DEFAULT_STRICTNESS = 1e-9
REFINE_POINTS = 32


@dataclass(frozen=True)
class EndpointLimit:
    """One-sided limit of an orientation value at a scan endpoint.

    ``divergence`` is +1 / -1 when the samples run off to +inf / -inf, in
    which case ``value`` is the last sample.
    """

    at: float
    value: float
    error: float
    divergence: int = 0

    @property
    def supremum(self) -> float:
        if self.divergence > 0:
            return math.inf
        if self.divergence < 0:
            return -math.inf
        return self.value


def _list_or_nan(a):
    return [None if not np.isfinite(v) else float(v) for v in a]


@dataclass
class ScanReport:
    """Orientation values of one model on a grid of distances."""

    model: CostModel
    R: float
    convention: str
    grid: np.ndarray
    p_values: np.ndarray  # shape (4, N), NaN where degenerate
    o_values: np.ndarray  # shape (4, N), NaN where degenerate
    degenerate: np.ndarray  # bool, shape (N,)
    sign_changes: list  # per case: list of (d_left, d_right)
    sup_values: list  # per case: supremum over grid and finite limits
    limits: dict = field(default_factory=dict)  # "lower"/"upper" -> list of 4 EndpointLimit|None
    interval: tuple = ()

    @property
    def resolution(self) -> int:
        return int(self.grid.size)

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "R": self.R,
            "convention": self.convention,
            "interval": list(self.interval),
            "grid": [float(v) for v in self.grid],
            "p_values": [_list_or_nan(row) for row in self.p_values],
            "o_values": [_list_or_nan(row) for row in self.o_values],
            "degenerate": [bool(v) for v in self.degenerate],
            "sign_changes": [[list(b) for b in sc] for sc in self.sign_changes],
            "sup_values": [_inf_to_str(v) for v in self.sup_values],
            "limits": {
                end: [None if lim is None else {**asdict(lim), "value": _inf_to_str(lim.value)}
                      for lim in lims]
                for end, lims in self.limits.items()
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScanReport":
        def arr(rows):
            return np.array([[np.nan if v is None else v for v in row] for row in rows], float)

        return cls(
            model=CostModel.from_dict(data["model"]),
            R=data["R"],
            convention=data["convention"],
            grid=np.array(data["grid"], float),
            p_values=arr(data["p_values"]),
            o_values=arr(data["o_values"]),
            degenerate=np.array(data["degenerate"], bool),
            sign_changes=[[tuple(b) for b in sc] for sc in data["sign_changes"]],
            sup_values=[_str_to_inf(v) for v in data["sup_values"]],
            limits={
                end: [None if lim is None else EndpointLimit(**{**lim, "value": _str_to_inf(lim["value"])})
                      for lim in lims]
                for end, lims in data["limits"].items()
            },
            interval=tuple(data["interval"]),
        )


def _inf_to_str(v):
    if v is None:
        return None
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return None
    return v


def _str_to_inf(v):
    if v is None:
        return math.nan
    return float(v)


@dataclass(frozen=True)
class Witness:
    """A point where a considered orientation value is not negative enough."""

    d: float
    case: str
    value: float
    source: str = "grid"  # "grid", "lower-limit" or "upper-limit"


@dataclass
class ClassificationReport:
    verdict: str
    constant: float | None
    dimension: int
    considered_cases: list
    strictness: float
    witness: Witness | None
    scan: ScanReport
    roots: list = field(default_factory=list)

    @property
    def evidence_label(self) -> str:
        return f"grid evidence at resolution {self.scan.resolution}"

    def summary(self) -> str:
        head = self.verdict if self.constant is None else f"{self.verdict}(C={self.constant:.10g})"
        parts = [f"{self.scan.model.label} on S^{self.dimension} (R={self.scan.R:g}): {head}",
                 f"[{self.evidence_label}]"]
        if self.witness is not None:
            w = self.witness
            parts.append(f"witness O{OrientationCase.parse(w.case).index}({w.d:.6g}) = {w.value:.6g} ({w.source})")
        return " ".join(parts)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "constant": self.constant,
            "dimension": self.dimension,
            "considered_cases": list(self.considered_cases),
            "strictness": self.strictness,
            "witness": None if self.witness is None else {**asdict(self.witness), "value": _inf_to_str(self.witness.value)},
            "evidence": self.evidence_label,
            "scan": self.scan.to_dict(),
            "roots": [r.to_dict() for r in self.roots],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClassificationReport":
        w = data["witness"]
        return cls(
            verdict=data["verdict"],
            constant=data["constant"],
            dimension=data["dimension"],
            considered_cases=list(data["considered_cases"]),
            strictness=data["strictness"],
            witness=None if w is None else Witness(**{**w, "value": _str_to_inf(w["value"])}),
            scan=ScanReport.from_dict(data["scan"]),
            roots=[BifurcationResult.from_dict(r) for r in data["roots"]],
        )


@dataclass(frozen=True)
class BifurcationResult:
    parameter: str
    bracket: tuple
    root: float
    residual: float
    note: str = ""

    def to_dict(self) -> dict:
        return {"parameter": self.parameter, "bracket": list(self.bracket), "root": self.root,
                "residual": self.residual, "note": self.note}

    @classmethod
    def from_dict(cls, data: dict) -> "BifurcationResult":
        return cls(data["parameter"], tuple(data["bracket"]), data["root"], data["residual"],
                   data.get("note", ""))


# -- scanning ------------------------------------------------------------------

def _scan_interval(model, cfg, margin, d_min, d_max):
    lo_v, hi_v = model.valid_domain(cfg.R)
    span = cfg.diameter
    lo = max(margin * span, lo_v + margin * span if lo_v > 0 else 0.0)
    hi = min((1 - margin) * span, hi_v - margin * span)
    if d_min is not None:
        lo = max(lo, d_min)
    if d_max is not None:
        hi = min(hi, d_max)
    return lo, hi, lo_v, hi_v


def _endpoint(model, R, at, side, convention):
    out = []
    for case in _CASE_ORDER:
        try:
            lim = endpoint_limit(model, R, case, at, side, convention)
            out.append(EndpointLimit(at, lim.value, lim.error, 0))
        except DivergentLimit as exc:
            last = exc.samples[-1] if exc.samples else math.nan
            out.append(EndpointLimit(at, float(last), math.inf, exc.direction))
        except (DegenerateCost, DomainError):
            out.append(None)
    return out


def scan(model: CostModel, cfg: SphereConfig, grid_size: int = DEFAULT_GRID,
         margin: float = DEFAULT_MARGIN, d_min: float | None = None, d_max: float | None = None,
         convention: str = "geodesic", limits: bool = True) -> ScanReport:
    """Evaluate ``O1..O4`` over the admissible distances.

    Parameters
    ----------
    grid_size : int
        Points of the uniform grid, at least 64.
    margin : float
        Fraction of ``R pi`` kept clear of each end of the uniform grid.
    d_min, d_max : float, optional
        Truncate the interval (a minimal separation / a maximal diameter of
        the source and target sets).  A truncated end gets no limit and no
        log refinement.
    limits : bool
        Extrapolate one-sided limits at untruncated ends.

    Raises
    ------
    EmptyDomain
        The interval is empty after truncation.
    """
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    if not 0 < margin < 0.5:
        raise ValueError("margin must lie in (0, 0.5)")
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    lo, hi, lo_v, hi_v = _scan_interval(model, cfg, margin, d_min, d_max)
    if not lo < hi:
        raise EmptyDomain(f"no admissible distances for {model.label} on R={cfg.R}")
    grid = np.linspace(lo, hi, grid_size)
    lower_open = d_min is None and lo_v == 0
    if lower_open:
        floor = 1e-6 * cfg.diameter
        if floor < grid[1]:
            extra = np.geomspace(floor, grid[1], REFINE_POINTS + 2)[1:-1]
            grid = np.unique(np.concatenate([grid, extra, [floor]]))
    P, O, bad = o_table(model, grid, cfg.R, convention)

    lims = {}
    if limits and lower_open:
        lims["lower"] = _endpoint(model, cfg.R, 0.0, +1, convention)
    if limits and d_max is None:
        lims["upper"] = _endpoint(model, cfg.R, min(hi_v, cfg.diameter), -1, convention)

    sign_changes, sups = [], []
    for k in range(4):
        row = O[k]
        ok = np.flatnonzero(np.isfinite(row))
        flips = np.flatnonzero(row[ok[:-1]] * row[ok[1:]] < 0)
        sign_changes.append([(float(grid[ok[i]]), float(grid[ok[i + 1]])) for i in flips])
        sup = float(np.max(row[ok])) if ok.size else -math.inf
        for end in lims.values():
            if end[k] is not None:
                sup = max(sup, end[k].supremum)
        sups.append(sup)
    return ScanReport(model, cfg.R, convention, grid, P, O, bad, sign_changes, sups, lims, (lo, hi))


def _considered(n: int) -> tuple:
    return _CASE_ORDER[1:] if n == 2 else _CASE_ORDER


def classify(report: ScanReport, n: int, strictness: float = DEFAULT_STRICTNESS) -> ClassificationReport:
    """Verdict for a scan on ``S^n``; see the module docstring for the rules."""
    if strictness < 0:
        raise ValueError("strictness must be non-negative")
    if n < 2:
        raise ValueError("dimension must be at least 2")
    cases = _considered(n)
    best: Witness | None = None
    for case in cases:
        k = case.index - 1
        row = report.o_values[k]
        ok = np.flatnonzero(np.isfinite(row))
        cands = []
        if ok.size:
            i = ok[np.argmax(row[ok])]
            cands.append(Witness(float(report.grid[i]), case.value, float(row[i]), "grid"))
        for end, lims in report.limits.items():
            lim = lims[k]
            if lim is not None:
                cands.append(Witness(lim.at, case.value, lim.supremum, f"{end}-limit"))
        for w in cands:
            if best is None or w.value > best.value:
                best = w
    top = -math.inf if best is None else best.value
    if top > strictness:
        verdict, C = "Violated", None
    elif top > 0:
        verdict, C = "Indeterminate", None
    elif top > -strictness:
        verdict, C = "A3w", None
    else:
        verdict, C = "StrongA3", -top
    witness = None
    if verdict != "StrongA3":
        witness = _interior_witness(report, cases, strictness) if verdict == "Violated" else None
        witness = witness or best
    return ClassificationReport(verdict, C, n, [c.value for c in cases], strictness, witness, report)


def _interior_witness(report: ScanReport, cases, strictness: float) -> Witness | None:
    """Largest violating grid value away from both ends of the valid domain.

    Such a point can be re-checked by finite differences, unlike a limit or
    a grid point next to the cut locus.
    """
    lo_v, hi_v = report.model.valid_domain(report.R)
    lo, hi = max(lo_v, 0.0), min(hi_v, math.pi * report.R)
    pad = 5e-2 * (hi - lo)
    band = (report.grid >= lo + pad) & (report.grid <= hi - pad)
    best = None
    for case in cases:
        row = np.where(band, report.o_values[case.index - 1], np.nan)
        if not np.any(np.isfinite(row)):
            continue
        i = int(np.nanargmax(row))
        if row[i] > strictness and (best is None or row[i] > best.value):
            best = Witness(float(report.grid[i]), case.value, float(row[i]), "grid")
    return best


# -- roots and bifurcation constants -----------------------------------------------

def refine_root(model: CostModel, cfg: SphereConfig, case, bracket, convention: str = "geodesic",
                xtol: float | None = None) -> BifurcationResult:
    """Bisect an orientation value to a root inside ``bracket``.

    Raises
    ------
    NoSignChange
        The values at the bracket ends have the same sign.
    """
    case = OrientationCase.parse(case)
    a, b = float(bracket[0]), float(bracket[1])
    if not a < b:
        raise ValueError("bracket must be increasing")

    def g(d):
        return float(o_value(p_coefficients(model, d, cfg.R, convention), case))

    ga, gb = g(a), g(b)
    if ga * gb > 0 or not (np.isfinite(ga) and np.isfinite(gb)):
        raise NoSignChange(f"O{case.index} has the same sign at {a:g} and {b:g} for {model.label}")
    tol = xtol if xtol is not None else 1e-12 * cfg.diameter
    if ga == 0 or gb == 0:
        root = a if ga == 0 else b
    else:
        root = bisect(g, a, b, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
    return BifurcationResult("d", (a, b), float(root), g(root), f"O{case.index} of {model.label}")


def eq4_numerator(d: float, m: float, R: float) -> float:
    """Numerator of the hand-simplified ``O4`` for ``f = -d^m/m``.

    Its sign is the sign of that closed form (see
    :func:`spheremtw.reference_forms.power_o4_numerator`).
    """
    if m == 1:
        raise ValueError("m = 1 is excluded")
    if not 0 < d < R * math.pi:
        raise DomainError(f"d={d!r} must lie in (0, R pi)")
    return float(power_o4_numerator(d, m, R))


def _cubic(m):
    return -2 * m**3 + 5 * m**2 - 4


def mstar_cubic() -> BifurcationResult:
    """Negative root of ``-2m^3 + 5m^2 - 4`` on ``[-1, 0]``."""
    root = bisect(_cubic, -1.0, 0.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return BifurcationResult("m", (-1.0, 0.0), float(root), float(_cubic(root)),
                             "large-radius limit of the negative power-law threshold")


def _o4_near_antipode(m, R_large, convention, source):
    with mpmath.workdps(DEFAULT_DPS):
        R = mpmath.mpf(R_large)
        d = R * mpmath.pi * (1 - mpmath.mpf("1e-6"))
        if source == "literal":
            return power_o(d, mpmath.mpf(m), R, 1, mpmath, "literal")[3]
        model = CostModel.power(m, +1)
        return o_value(p_coefficients(model, d, R, convention, dps=DEFAULT_DPS), OrientationCase.DIAG)


def mstar_positive(R_large: float = 1e4, convention: str = "geodesic",
                   source: str = "generic") -> BifurcationResult:
    """Exponent in ``(0, 1)`` where ``O4(R pi (1 - 1e-6))`` changes sign for ``f = d^m/m``.

    Parameters
    ----------
    R_large : float
        Radius standing in for the large-radius limit, at least 1e3.
    convention : str
        E convention for the generic formula.
    source : {"generic", "literal"}
        ``"literal"`` evaluates the hand-simplified ``O4`` with its literal
        final term instead of the generic formula.

    Raises
    ------
    NoSignChange
        No sign change on a 0.01-spaced scan of ``(0, 1)``.
    """
    if R_large < 1e3:
        raise ValueError("R_large must be at least 1e3")
    if source not in ("generic", "literal"):
        raise ValueError(f"unknown source {source!r}")
    ms = np.round(np.arange(0.01, 1.0, 0.01), 10)
    vals = [_o4_near_antipode(m, R_large, convention, source) for m in ms]
    for i in range(len(ms) - 1):
        if mpmath.sign(vals[i]) * mpmath.sign(vals[i + 1]) < 0:
            a, b = float(ms[i]), float(ms[i + 1])
            break
    else:
        raise NoSignChange(
            f"O4 near the antipode keeps the sign {int(mpmath.sign(vals[0])):+d} for m in (0, 1) "
            f"at R={R_large:g} ({convention}, {source})"
        )

    def g(m):
        return float(_o4_near_antipode(m, R_large, convention, source))

    root = bisect(g, a, b, xtol=1e-12, maxiter=200)
    return BifurcationResult("m", (a, b), float(root), g(root),
                             f"R={R_large:g}, convention={convention}, source={source}")


# -- example suite ----------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """A family/parameter combination with the verdict it is expected to get.

    ``restrict`` names how the interval is truncated: ``"dist>root"`` keeps
    distances above the last sign change of ``root_case``, ``"diam<root"``
    keeps distances below its first one.
    """

    name: str
    model: CostModel
    R: float
    n: int
    expected: tuple
    d_min: float | None = None
    d_max: float | None = None
    restrict: str | None = None
    root_case: str | None = None


@dataclass(frozen=True)
class SuiteLine:
    scenario: str
    expected: tuple
    computed: str
    match: bool
    detail: str = ""

    def render(self) -> str:
        tag = "ok      " if self.match else "MISMATCH"
        exp = "/".join(self.expected)
        line = f"[{tag}] {self.scenario}: expected {exp}, computed {self.computed}"
        return f"{line} ({self.detail})" if self.detail else line

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "expected": list(self.expected), "computed": self.computed,
                "match": self.match, "detail": self.detail}


def default_scenarios() -> list:
    P, S, V, W = CostModel.power, "StrongA3", "Violated", "A3w"
    pi = math.pi
    return [
        Scenario("half-square R=1 n=3", CostModel.half_square(), 1.0, 3, (S,)),
        Scenario("half-square R=0.5 n=3", CostModel.half_square(), 0.5, 3, (S,)),
        Scenario("chordal R=1 n=3 (half-sphere)", CostModel.chordal(1.0), 1.0, 3, (S,)),
        Scenario("sqrt-minus(+) R=1 n=3 diam<1", CostModel.sqrt_minus(+1), 1.0, 3, (S,), d_max=0.95),
        Scenario("sqrt-minus(+) R=0.5 n=3", CostModel.sqrt_minus(+1), 0.5, 3, (V,)),
        Scenario("sqrt-minus(-) R=1 n=3", CostModel.sqrt_minus(-1), 1.0, 3, (V,)),
        Scenario("sqrt-plus(+) R=1 n=3", CostModel.sqrt_plus(+1), 1.0, 3, (S,)),
        Scenario("sqrt-plus(+) R=2 n=3", CostModel.sqrt_plus(+1), 2.0, 3, (S,)),
        Scenario("sqrt-plus(-) R=1 n=3", CostModel.sqrt_plus(-1), 1.0, 3, (V,)),
        Scenario("power(+, m=-1) R=1 n=3", P(-1, +1), 1.0, 3, (V,)),
        Scenario("power(+, m=-3) R=1 n=3", P(-3, +1), 1.0, 3, (V,)),
        Scenario("power(-, m=-0.5) R=10 n=3", P(-0.5, -1), 10.0, 3, (W, S)),
        Scenario("power(-, m=-3) R=0.3 n=3", P(-3, -1), 0.3, 3, (W, S)),
        Scenario("log(+) R=1 n=3", CostModel.log(+1), 1.0, 3, (V,)),
        Scenario("log(-) R=1 n=3", CostModel.log(-1), 1.0, 3, (W,)),
        Scenario("log(-) R=1 n=3 d<=0.9 R pi", CostModel.log(-1), 1.0, 3, (S,), d_max=0.9 * pi),
        Scenario("power(+, m=0.9) R=1 n=3", P(0.9, +1), 1.0, 3, (V,)),
        Scenario("power(+, m=0.9) R=1 n=2 dist>h*", P(0.9, +1), 1.0, 2, (S,),
                 restrict="dist>root", root_case="diag"),
        Scenario("power(+, m=1.5) R=1 n=3", P(1.5, +1), 1.0, 3, (V,)),
        Scenario("power(+, m=1.5) R=1 n=3 dist>h*", P(1.5, +1), 1.0, 3, (S,),
                 restrict="dist>root", root_case="xi"),
        Scenario("power(+, m=3) R=1 n=3 dist>h*", P(3, +1), 1.0, 3, (S,),
                 restrict="dist>root", root_case="diag"),
        Scenario("power(-, m=0.5) R=1 n=3 diam<h*", P(0.5, -1), 1.0, 3, (S,),
                 restrict="diam<root", root_case="xi"),
        Scenario("power(-, m=1.5) R=1 n=3", P(1.5, -1), 1.0, 3, (V,)),
        Scenario("power(-, m=1.5) R=1 n=2 diam<h*", P(1.5, -1), 1.0, 2, (S,),
                 restrict="diam<root", root_case="diag"),
        Scenario("power(-, m=2) R=1 n=3", P(2, -1), 1.0, 3, (V,)),
        Scenario("power(-, m=3) R=1 n=3", P(3, -1), 1.0, 3, (V,)),
    ]


def run_scenario(sc: Scenario, grid_size: int = DEFAULT_GRID, convention: str = "geodesic",
                 strictness: float = DEFAULT_STRICTNESS) -> SuiteLine:
    """Scan and classify one scenario, resolving a root-based truncation first."""
    cfg = SphereConfig(sc.R, sc.n)
    d_min, d_max, detail = sc.d_min, sc.d_max, []
    if sc.restrict is not None:
        full = scan(sc.model, cfg, grid_size, convention=convention, limits=False)
        k = OrientationCase.parse(sc.root_case).index - 1
        brackets = full.sign_changes[k]
        if not brackets:
            sup = full.sup_values[k]
            return SuiteLine(sc.name, sc.expected, "NoSignChange", False,
                             f"O{k + 1} never changes sign, so h* does not exist (sup O{k + 1} = {sup:.4g})")
        bracket = brackets[-1] if sc.restrict == "dist>root" else brackets[0]
        root = refine_root(sc.model, cfg, sc.root_case, bracket, convention).root
        pad = 1e-2 * cfg.diameter
        if sc.restrict == "dist>root":
            d_min = root + pad
        else:
            d_max = root - pad
        detail.append(f"h*={root:.6g}")
    report = classify(scan(sc.model, cfg, grid_size, d_min=d_min, d_max=d_max, convention=convention),
                      sc.n, strictness)
    computed = report.verdict
    if report.constant is not None:
        detail.append(f"C={report.constant:.4g}")
    if report.witness is not None:
        w = report.witness
        detail.append(f"O{OrientationCase.parse(w.case).index}({w.d:.4g})={w.value:.4g} [{w.source}]")
    return SuiteLine(sc.name, sc.expected, computed, computed in sc.expected, "; ".join(detail))


def example_suite(grid_size: int = DEFAULT_GRID, convention: str = "geodesic",
                  scenarios: list | None = None) -> list:
    """Run every scenario and compare with its expected verdict.

    Returns
    -------
    list of SuiteLine
        One line per scenario; mismatches are kept, never dropped.
    """
    return [run_scenario(sc, grid_size, convention) for sc in (scenarios or default_scenarios())]
