import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ortho_group

from spheremtw.analytic import o_value, p_coefficients
from spheremtw.chart import SphereConfig, target_from_case
from spheremtw.costjet import CostModel
from spheremtw.errors import AntipodalError, OrthogonalityError, StencilDomainError
from spheremtw.oracle import (
    StencilConfig,
    central_stencil,
    chart_cost_function,
    default_steps,
    invariance_check,
    mixed_partial,
    mtw_tensor_fd,
)

STEP = StencilConfig(1e-2, 1e-2)


def _setup(model, d, case, R=1.0, n=None):
    n = n or (3 if case == "perp" else 2)
    cfg = SphereConfig(R, n)
    y, _, xi, eta = target_from_case(d, case, model, cfg)
    return cfg, y, xi, eta


def _bilinear(X, Y):
    return X[:, 0] * Y[:, 0]


def test_central_stencil_weights():
    offsets, weights = central_stencil(1, 2)
    assert offsets == (-1, 1) and weights == pytest.approx((-0.5, 0.5))
    offsets, weights = central_stencil(4, 2)
    assert weights == pytest.approx((1, -4, 6, -4, 1))


def test_zero_order_is_evaluation():
    cfg = SphereConfig(1.0, 3)
    cost = chart_cost_function(CostModel.half_square(), cfg)
    y = np.array([2 * math.tan(0.5), 0, 0])
    assert mixed_partial(cost, np.zeros(3), y, [], [], STEP) == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("dirs", [([0], []), ([], [1]), ([0, 1], [2]), ([0, 0], [1, 1])])
def test_constant_has_zero_derivatives(dirs):
    const = lambda X, Y: np.full(len(X), 3.7)
    # rounding in an order-4 difference at h = 1e-2 is about eps / h^4
    assert mixed_partial(const, np.zeros(3), np.ones(3), *dirs, STEP) == pytest.approx(0, abs=1e-6)


@pytest.mark.parametrize("scheme", [2, 4])
def test_bilinear_mixed_derivative_is_exact(scheme):
    cfg = StencilConfig(0.3, 0.7, scheme)
    assert mixed_partial(_bilinear, np.array([0.2, 1.0]), np.array([-1.0, 4.0]), [0], [0], cfg) == pytest.approx(1.0, abs=1e-13)
    assert mixed_partial(_bilinear, np.zeros(2), np.zeros(2), [1], [0], cfg) == pytest.approx(0.0, abs=1e-13)


def test_mixed_partial_rejects_high_order():
    with pytest.raises(ValueError):
        mixed_partial(_bilinear, np.zeros(2), np.zeros(2), [0, 0, 0], [0, 0], STEP)


def test_mixed_partial_reports_domain_exit():
    cfg = SphereConfig(1.0, 2)
    cost = chart_cost_function(CostModel.sqrt_minus(1), cfg)
    y, *_ = target_from_case(0.999, "xi", CostModel.sqrt_minus(1), cfg)
    with pytest.raises(StencilDomainError):
        mixed_partial(cost, np.zeros(2), y, [0], [0], StencilConfig(1e-2, 1e-1))


def test_half_square_perp_matches_closed_form_value():
    # value of the inverse-radius closed form at d = 1
    res = mtw_tensor_fd(CostModel.half_square(), *_setup(CostModel.half_square(), 1.0, "perp"))
    assert abs(res.value - -0.172427) <= max(1e-3, 3 * res.est_error), f"oracle {res.value:.6f}"


def test_half_square_perp_matches_generic_path():
    model = CostModel.half_square()
    res = mtw_tensor_fd(model, *_setup(model, 1.0, "perp"))
    analytic = p_coefficients(model, 1.0, 1.0).p1
    assert analytic == pytest.approx(-0.770190, abs=1e-6)
    assert abs(res.value - analytic) <= max(1e-3, 3 * res.est_error)


def test_chordal_parallel_eta_near_half_diameter():
    # P3 is not zero: the oracle separates O3 from O1 by a wide margin
    model = CostModel.chordal(1.0)
    res = mtw_tensor_fd(model, *_setup(model, 1.2, "eta"))
    c = p_coefficients(model, 1.2, 1.0)
    assert abs(res.value - o_value(c, "eta")) <= max(1e-3 * (1 + abs(res.value)), 5 * res.est_error)
    assert abs(res.value - c.p1) > 100 * res.est_error


@pytest.mark.parametrize("model", [CostModel.half_square(), CostModel.power(1.5), CostModel.log(-1)],
                         ids=lambda m: m.label)
def test_diagonal_symmetric_in_xi_eta(model):
    cfg, y, xi, eta = _setup(model, 1.1, "diag")
    a = mtw_tensor_fd(model, cfg, y, xi, eta)
    b = mtw_tensor_fd(model, cfg, y, eta, xi)
    assert abs(a.value - b.value) <= 2 * max(a.est_error, b.est_error) + 1e-12


@pytest.mark.parametrize("model", [CostModel.half_square(), CostModel.chordal(1.0), CostModel.power(-0.5, -1)],
                         ids=lambda m: m.label)
@pytest.mark.parametrize("case", ["perp", "xi", "diag"])
@pytest.mark.parametrize("scale", [2, 4])
def test_step_halving_reduces_error(model, case, scale):
    # below the default steps the halved stencil meets the rounding floor, so
    # the property is checked where truncation error dominates
    cfg, y, xi, eta = _setup(model, 1.0, case)
    auto = default_steps(cfg, y)
    st0 = StencilConfig(scale * auto.h_x, scale * auto.h_y)
    coarse = mtw_tensor_fd(model, cfg, y, xi, eta, st0)
    fine = mtw_tensor_fd(model, cfg, y, xi, eta, st0.halved())
    assert fine.est_error * 3 <= coarse.est_error


def test_antipodal_target_rejected():
    model = CostModel.half_square()
    cfg = SphereConfig(1.0, 2)
    y, _, xi, eta = target_from_case(math.pi - 1e-4, "xi", model, cfg)
    with pytest.raises(AntipodalError):
        mtw_tensor_fd(model, cfg, y, xi, eta)


def test_non_orthogonal_pair_rejected():
    cfg = SphereConfig(1.0, 2)
    with pytest.raises(OrthogonalityError):
        mtw_tensor_fd(CostModel.half_square(), cfg, [0.5, 0.0], [1.0, 0.0], [0.6, 0.8])


def test_invariance_identity_is_exact():
    model = CostModel.half_square()
    cfg, y, xi, eta = _setup(model, 1.0, "eta")
    res = invariance_check(model, cfg, y, xi, eta, np.eye(2))
    assert res.original.value == res.transformed.value


def test_invariance_rotation():
    model = CostModel.half_square()
    cfg, y, xi, eta = _setup(model, 1.0, "perp")
    Q = ortho_group.rvs(3, random_state=7)
    res = invariance_check(model, cfg, y, xi, eta, Q)
    assert res.discrepancy <= 3 * res.est_error


def test_invariance_axis_stretch():
    model = CostModel.half_square()
    cfg, y, xi, eta = _setup(model, 1.0, "eta", n=3)
    res = invariance_check(model, cfg, y, xi, eta, np.diag([2.0, 1.0, 1.0]))
    assert res.discrepancy <= 3 * res.est_error


def test_invariance_rejects_ill_conditioned_map():
    model = CostModel.half_square()
    cfg, y, xi, eta = _setup(model, 1.0, "xi")
    with pytest.raises(ValueError):
        invariance_check(model, cfg, y, xi, eta, np.diag([100.0, 1.0]))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["perp", "xi", "eta", "diag"]))
def test_oracle_agrees_with_generic_path(seed, case):
    rng = np.random.default_rng(seed)
    model = [CostModel.half_square(), CostModel.power(0.5), CostModel.log(-1), CostModel.sqrt_plus(1)][seed % 4]
    R = float(rng.choice([0.5, 1.0, 2.0]))
    d = float(rng.uniform(0.1, 0.9)) * R * math.pi
    cfg, y, xi, eta = _setup(model, d, case, R)
    res = mtw_tensor_fd(model, cfg, y, xi, eta)
    analytic = o_value(p_coefficients(model, d, R), case)
    assert abs(res.value - analytic) <= max(1e-3 * (1 + abs(analytic)), 5 * res.est_error)
