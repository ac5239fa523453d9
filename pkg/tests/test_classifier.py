import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spheremtw.analytic import o_value, p_coefficients, small_d_limit
from spheremtw.chart import SphereConfig, target_from_case
from spheremtw.classifier import (
    ClassificationReport,
    ScanReport,
    classify,
    default_scenarios,
    eq4_numerator,
    example_suite,
    mstar_cubic,
    mstar_positive,
    refine_root,
    run_scenario,
    scan,
)
from spheremtw.costjet import CostModel
from spheremtw.errors import EmptyDomain, NoSignChange
from spheremtw.oracle import mtw_tensor_fd

RANK = {"StrongA3": 0, "A3w": 1, "Indeterminate": 2, "Violated": 3}
S3 = SphereConfig(1.0, 3)


def _finite_rows(report):
    ok = ~report.degenerate
    return report.o_values[:, ok]


def test_half_square_scan_all_negative():
    rep = scan(CostModel.half_square(), S3, 512)
    assert rep.resolution >= 512
    assert np.all(_finite_rows(rep) < 0)
    assert np.all(np.diff(rep.grid) > 0)
    assert rep.grid[0] > 0 and rep.grid[-1] < math.pi


def test_sqrt_plus_negative_scan_all_positive():
    rep = scan(CostModel.sqrt_plus(-1), S3, 512)
    assert np.all(_finite_rows(rep) > 0)


def test_power_minus_three_has_positive_o2_o3():
    rep = scan(CostModel.power(3, -1), S3, 512)
    assert np.any(rep.o_values[1] > 0) and np.any(rep.o_values[2] > 0)


def test_sign_change_brackets_have_opposite_signs():
    model = CostModel.power(1.5)
    rep = scan(model, S3, 512)
    assert rep.sign_changes[1]
    for k, brackets in enumerate(rep.sign_changes):
        for a, b in brackets:
            case = ["perp", "xi", "eta", "diag"][k]
            va, vb = (o_value(p_coefficients(model, d, 1.0), case) for d in (a, b))
            assert va * vb < 0


def test_scan_rejects_bad_arguments():
    with pytest.raises(ValueError):
        scan(CostModel.half_square(), S3, 32)
    with pytest.raises(ValueError):
        scan(CostModel.half_square(), S3, 512, margin=0.6)
    with pytest.raises(EmptyDomain):
        scan(CostModel.half_square(), S3, 512, d_min=2.0, d_max=1.0)


def test_chordal_scan_stays_on_half_sphere():
    rep = scan(CostModel.chordal(1.0), S3, 256)
    assert rep.grid[-1] < math.pi / 2


def test_chordal_is_strong():
    rep = classify(scan(CostModel.chordal(1.0), S3, 512), 3)
    assert rep.verdict == "StrongA3" and rep.constant > 0
    assert "grid evidence at resolution" in rep.summary()


def test_power_minus_1p5_violated_in_three_dimensions():
    rep = classify(scan(CostModel.power(1.5, -1), S3, 512), 3)
    assert rep.verdict == "Violated"
    assert rep.witness.value > rep.strictness


def test_power_minus_1p5_strong_on_two_sphere_below_threshold():
    sc = next(s for s in default_scenarios() if s.name == "power(-, m=1.5) R=1 n=2 diam<h*")
    line = run_scenario(sc, 512)
    assert line.match, line.render()


def test_log_minus_full_interval_is_weak():
    rep = classify(scan(CostModel.log(-1), S3, 512), 3, strictness=0)
    assert rep.verdict == "A3w", rep.summary()


def test_log_minus_truncated_is_strong():
    rep = classify(scan(CostModel.log(-1), S3, 512, d_max=0.9 * math.pi), 3, strictness=0)
    assert rep.verdict == "StrongA3", rep.summary()


def test_two_sphere_ignores_perpendicular_case():
    rep = classify(scan(CostModel.half_square(), SphereConfig(1.0, 2), 256), 2)
    assert rep.considered_cases == ["xi", "eta", "diag"]


@pytest.mark.parametrize("model", [CostModel.half_square(), CostModel.chordal(1.0), CostModel.sqrt_plus(1)],
                         ids=lambda m: m.label)
def test_strong_constant_is_minus_sup(model):
    rep = classify(scan(model, S3, 256), 3)
    assert rep.verdict == "StrongA3"
    assert rep.constant == pytest.approx(-max(rep.scan.sup_values), abs=1e-12)


MONO_MODELS = [CostModel.half_square(), CostModel.power(1.5), CostModel.power(-0.5, -1),
               CostModel.log(-1), CostModel.sqrt_plus(1), CostModel.power(0.9)]


@settings(max_examples=12, deadline=None)
@given(st.integers(0, len(MONO_MODELS) - 1), st.floats(0.0, 0.45), st.floats(0.55, 1.0))
def test_truncation_never_worsens_verdict(i, lo, hi):
    model = MONO_MODELS[i]
    full = classify(scan(model, S3, 256), 3)
    cut = classify(scan(model, S3, 256, d_min=lo * math.pi or None, d_max=hi * math.pi), 3)
    assert RANK[cut.verdict] <= RANK[full.verdict]


VIOLATED = [CostModel.sqrt_plus(-1), CostModel.log(1), CostModel.power(-1, 1), CostModel.power(3, -1),
            CostModel.power(1.5, 1), CostModel.sqrt_minus(-1)]


@pytest.mark.parametrize("model", VIOLATED, ids=lambda m: m.label)
def test_violation_witness_confirmed_by_oracle(model):
    rep = classify(scan(model, S3, 512), 3)
    assert rep.verdict == "Violated"
    w = rep.witness
    assert w.source == "grid"
    cfg = SphereConfig(1.0, 3 if w.case == "perp" else 2)
    y, _, xi, eta = target_from_case(w.d, w.case, model, cfg)
    res = mtw_tensor_fd(model, cfg, y, xi, eta)
    assert res.value + 5 * res.est_error > 0


@pytest.mark.parametrize("R", [10.0, 100.0])
@pytest.mark.parametrize("m", [-0.75, -0.5, -0.25])
def test_negative_power_between_mstar_and_zero_is_weak(m, R):
    rep = scan(CostModel.power(m, -1), SphereConfig(R, 3), 512)
    sup = max(rep.sup_values)
    assert sup <= 1e-6, f"sup over considered cases = {sup:.6g}"


def test_sqrt_minus_limit_vanishes_at_threshold_radius():
    R = math.sqrt(2 / 3)
    for case in ("perp", "xi", "eta", "diag"):
        assert small_d_limit(CostModel.sqrt_minus(1), R, case).value == pytest.approx(0, abs=1e-6)


def test_refine_root_power_plus_threshold():
    model = CostModel.power(1.5)
    res = refine_root(model, S3, "xi", (0.1, 3.0))
    assert 0 < res.root < math.pi
    assert abs(res.residual) <= 1e-10
    assert res.bracket[0] <= res.root <= res.bracket[1]
    assert o_value(p_coefficients(model, res.root, 1.0), "xi") == pytest.approx(0, abs=1e-10)


def test_refine_root_half_square_has_no_root():
    for case in ("perp", "xi", "eta", "diag"):
        with pytest.raises(NoSignChange):
            refine_root(CostModel.half_square(), S3, case, (0.1, 3.0))


def test_refine_root_negative_power_diagonal_beyond_one():
    model = CostModel.power(-1, -1)
    rep = scan(model, S3, 512, limits=False)
    bracket = rep.sign_changes[3][0]
    res = refine_root(model, S3, "diag", bracket)
    assert res.root > 1


def test_eq4_numerator_examples():
    assert eq4_numerator(0.5, -1, 1.0) == pytest.approx(-8.64, abs=5e-3)
    # the last term drops out at m = 2
    lhs = eq4_numerator(1.3, 2, 2.0)
    s, c = math.sin(1.3 / 4), math.cos(1.3 / 4)
    rhs = -2 * 1.3**5 * c + 7 * 4 * 1.3**4 * s - 16 * 1.3**3 * s * s * c - 2 * 2 * 64 * 1.3**2 * s**3
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_eq4_numerator_domain():
    with pytest.raises(ValueError):
        eq4_numerator(1.0, 1, 1.0)
    with pytest.raises(ValueError):
        eq4_numerator(4.0, -1, 1.0)


def test_eq4_numerator_sign_matches_diagonal_value():
    rng = np.random.default_rng(2024)
    agree = total = 0
    for _ in range(300):
        R = float(rng.choice([0.5, 1.0, 2.0]))
        m = float(rng.uniform(-3, 0.9))
        d = float(rng.uniform(0.02, 0.98)) * R * math.pi
        o4 = o_value(p_coefficients(CostModel.power(m, -1), d, R), "diag")
        total += 1
        agree += np.sign(eq4_numerator(d, m, R)) == np.sign(o4)
    assert agree == total, f"signs agree at {agree} of {total} samples"


def test_mstar_cubic():
    res = mstar_cubic()
    assert res.root == pytest.approx(-0.7807764064, abs=1e-8)
    assert abs(res.residual) <= 1e-9
    assert -2 * 0**3 + 5 * 0**2 - 4 == -4
    assert res.bracket == (-1.0, 0.0)


def test_mstar_positive_large_radius():
    res = mstar_positive(1e4)
    assert res.root == pytest.approx(0.806, abs=5e-3)


def test_mstar_positive_stable_in_radius():
    assert abs(mstar_positive(1e3).root - mstar_positive(1e4).root) < 0.01


@pytest.mark.parametrize("convention,source", [("inverse-radius", "generic"), ("geodesic", "literal")])
def test_mstar_positive_sign_flip(convention, source):
    from spheremtw.classifier import _o4_near_antipode

    res = mstar_positive(1e4, convention, source)
    lo = _o4_near_antipode(res.root - 1e-4, 1e4, convention, source)
    hi = _o4_near_antipode(res.root + 1e-4, 1e4, convention, source)
    assert lo * hi < 0


def test_mstar_positive_literal_form_value():
    assert mstar_positive(1e4, source="literal").root == pytest.approx(0.806, abs=5e-3)


def test_report_json_round_trip():
    rep = classify(scan(CostModel.power(1.5), S3, 128), 3)
    again = ClassificationReport.from_dict(json.loads(json.dumps(rep.to_dict())))
    assert again.to_dict() == rep.to_dict()
    assert isinstance(again.scan, ScanReport)
    np.testing.assert_array_equal(again.scan.o_values, rep.scan.o_values)


def test_suite_flags_every_mismatch():
    lines = example_suite(256, scenarios=default_scenarios()[:6])
    assert len(lines) == 6
    for line in lines:
        assert ("MISMATCH" in line.render()) == (not line.match)
