import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floquet_geom.bloch_core import ChiralClass
from floquet_geom.errors import ClassError, CriticalPointError, DegenerateError, WindowError
from floquet_geom.models import (
    ModelSpec, OrdkrParams, PqkcParams, SpinChainParams, ordkr, pqkc, pqkc_metric_analytic, spin_chain,
    spin_chain_G_analytic, spin_chain_metric_analytic,
)
from floquet_geom.qmt import (
    BERRY_CURVATURE_1D, _generic_metric, _projector_metric, critical_exponent_fit, integrated_metric,
    metric_at, metric_fd_check, metric_values, metric_winding_identity_check, midpoint_grid,
    winding_angle_derivative, winding_number,
)

from oracles import integrated_metric_fd, metric_from_projectors

PI = math.pi


def sc(mu):
    return spin_chain(SpinChainParams.from_mu(mu))


def test_metric_examples():
    for k in (-2.0, 0.1, 1.7, PI):
        assert metric_at(sc(0.0), k) == pytest.approx(0.25, abs=1e-15)
    assert metric_at(sc(0.5), PI) == pytest.approx(1.0, abs=1e-14)


# Tr(dP dP)/2 from dense-eigh projectors (step 1e-5), K1=0.3pi, K2=0.5pi, k=0.7
ORDKR_METRIC_FROZEN = 0.0005748005255313898


def test_metric_ordkr_frozen():
    m = ordkr(OrdkrParams(0.3 * PI, 0.5 * PI))
    assert metric_from_projectors(m, 0.7, 1e-5) == pytest.approx(ORDKR_METRIC_FROZEN, rel=1e-9)
    assert metric_at(m, 0.7) == pytest.approx(ORDKR_METRIC_FROZEN, rel=1e-8)


def test_metric_vs_projector_oracle():
    rng = np.random.default_rng(7)
    for m in (sc(0.7), sc(-2.5), ordkr(OrdkrParams(4.5 * PI, 0.5 * PI)), pqkc(PqkcParams(PI / 2, PI / 4, 5 * PI))):
        for k in rng.uniform(-PI, PI, 20):
            assert metric_at(m, k) == pytest.approx(metric_from_projectors(m, k), rel=1e-5, abs=1e-10)


def test_metric_is_even_and_nonnegative():
    k = np.linspace(-PI, PI, 513)
    for m in (sc(0.4), ordkr(OrdkrParams(1.3 * PI, 0.5 * PI)), pqkc(PqkcParams(PI / 2, PI / 4, 2.0))):
        g = metric_values(m, k)
        assert np.all(g >= 0)
        assert np.allclose(g, metric_values(m, -k), atol=1e-12)


def test_metric_degenerate():
    with pytest.raises(DegenerateError):
        metric_at(sc(1.0), PI)


@pytest.mark.parametrize("model, k, expected", [
    (sc(0.0), 1.0, 0.25),
    (sc(2.0), 2.0, float(spin_chain_metric_analytic(2.0, 2.0))),
    (pqkc(PqkcParams(PI / 2, PI / 4, PI)), 0.3, float(pqkc_metric_analytic(PqkcParams(PI / 2, PI / 4, PI), 0.3))),
])
def test_fd_check_examples(model, k, expected):
    assert metric_fd_check(model, k, 1e-4) == pytest.approx(expected, abs=1e-4)


def test_fd_check_constant_metric_tight():
    assert metric_fd_check(sc(0.0), 1.0, 1e-4) == pytest.approx(0.25, abs=1e-6)


def test_fd_check_rejects_bad_step():
    with pytest.raises(ValueError):
        metric_fd_check(sc(0.3), 0.1, 0.5)


def test_fd_check_converges_fourth_order():
    m = ordkr(OrdkrParams(0.3 * PI, 0.5 * PI))
    exact = metric_at(m, 0.7)
    e1 = abs(metric_fd_check(m, 0.7, 1e-2) - exact)
    e2 = abs(metric_fd_check(m, 0.7, 5e-3) - exact)
    assert e2 < e1 / 10  # extrapolated: error ratio ~16 per halving


@pytest.mark.parametrize("mu, expected, tol", [(0.0, 0.25, 1e-10), (2.0, 1 / 24, 1e-8), (0.5, 7 / 24, 1e-8)])
def test_integrated_examples(mu, expected, tol):
    im = integrated_metric(sc(mu), 2 ** 14)
    assert im.value == pytest.approx(expected, abs=tol)
    assert not im.critical_flag and im.grid_size == 2 ** 14


def test_integrated_flags_critical():
    assert integrated_metric(sc(1.0)).critical_flag
    assert integrated_metric(ordkr(OrdkrParams(2 * PI, 0.5 * PI))).critical_flag


def test_integrated_grid_validation():
    for n in (8, 100, 3000):
        with pytest.raises(ValueError):
            integrated_metric(sc(0.2), n)


@pytest.mark.parametrize("model", [
    ordkr(OrdkrParams(4.5 * PI, 0.5 * PI)), ordkr(OrdkrParams(0.3 * PI, 0.5 * PI)),
    pqkc(PqkcParams(PI / 2, PI / 4, 5 * PI)), pqkc(PqkcParams(0.8, -0.3, 2.0)),
], ids=["ordkr-4.5", "ordkr-0.3", "pqkc-5", "pqkc-2"])
def test_integrated_vs_dense_oracle(model):
    # oracle: Fubini-Study distances between neighbouring eigh eigenvectors, O(dk^2) accurate
    assert integrated_metric(model).value == pytest.approx(integrated_metric_fd(model, 2 ** 15), rel=2e-5)


def test_spin_chain_G_formula_property():
    for mu in np.linspace(-4, 4, 41):
        if abs(abs(mu) - 1) < 0.05:
            continue
        assert integrated_metric(sc(mu)).value == pytest.approx(spin_chain_G_analytic(mu), abs=1e-8)


def test_berry_curvature_zero():
    assert BERRY_CURVATURE_1D == 0.0


comp = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(st.tuples(comp, comp, comp), st.tuples(comp, comp, comp))
def test_generic_equals_projector_form(h, dh):
    h, dh = np.array(h), np.array(dh)
    if np.linalg.norm(h) < 1e-2 or math.hypot(h[0], h[1]) < 1e-2:
        return
    assert _generic_metric(h, dh) == pytest.approx(_projector_metric(h, dh), rel=1e-9, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-PI, PI))
def test_metric_scale_invariant(scale, k):
    # g depends only on the direction of h
    base = ordkr(OrdkrParams(1.3 * PI, 0.5 * PI))
    scaled = ModelSpec("scaled", base.chiral, base.params,
                       lambda q: tuple(scale * c for c in base.components(q)),
                       lambda q: tuple(scale * c for c in base.derivatives(q)), base.band_energy)
    try:
        g = metric_at(base, k)
    except DegenerateError:
        return
    assert metric_at(scaled, k) == pytest.approx(g, rel=1e-10, abs=1e-14)


def test_generic_path_used_for_nonchiral():
    base = ordkr(OrdkrParams(1.3 * PI, 0.5 * PI))
    generic = ModelSpec("generic", ChiralClass.none, base.params, base.components, base.derivatives, base.band_energy)
    k = np.linspace(-3, 3, 101)
    assert np.allclose(metric_values(generic, k), metric_values(base, k), rtol=1e-10, atol=1e-14)


def test_winding_angle_derivative_examples():
    for k in (-2.5, 0.0, 1.3):
        assert winding_angle_derivative(sc(0.0), k) == pytest.approx(1.0, abs=1e-14)
    m = pqkc(PqkcParams(0.0, 0.3, 1.1))
    assert winding_angle_derivative(m, 0.4) == 0.0
    with pytest.raises(ClassError):
        winding_angle_derivative(ModelSpec("x", ChiralClass.none, m.params, m.components, m.derivatives,
                                           m.band_energy), 0.1)


def test_winding_angle_integrates_to_winding():
    m = sc(3.0)
    k = midpoint_grid(4096)
    total = sum(winding_angle_derivative(m, x) for x in k) / 4096
    assert total == pytest.approx(0.0, abs=1e-10)
    m = sc(0.5)
    assert sum(winding_angle_derivative(m, x) for x in k) / 4096 == pytest.approx(winding_number(m).w, abs=1e-10)


def test_winding_examples():
    assert abs(winding_number(sc(0.5)).w) == 1
    assert winding_number(sc(2.0)).w == 0
    assert winding_number(pqkc(PqkcParams(0.0, 1.5, 1.0))).w == 0
    with pytest.raises(CriticalPointError):
        winding_number(sc(-1.0))


def test_winding_sign_convention():
    # counter-clockwise in the (hz, hx) plane for the spin chain
    assert winding_number(sc(0.5)).w == 1
    assert winding_number(sc(-0.5)).w == 1


@pytest.mark.parametrize("model, expected", [
    (ordkr(OrdkrParams(4.5 * PI, 0.5 * PI)), 4),
    (ordkr(OrdkrParams(1.3 * PI, 0.5 * PI)), 1),
    (pqkc(PqkcParams(PI / 2, PI / 4, 5 * PI)), 10),
])
def test_winding_counts_transitions(model, expected):
    # each boundary crossed from small coupling changes |w| by one
    res = winding_number(model)
    assert abs(res.w) == expected
    assert abs(res.raw - res.w) < 1e-9
    assert winding_number(model, 2 ** 14).w == res.w


@pytest.mark.parametrize("model, k", [
    (sc(0.0), 0.3), (ordkr(OrdkrParams(1.3 * PI, 0.5 * PI)), 1.9), (pqkc(PqkcParams(PI / 2, PI / 4, 2.0)), -0.8),
])
def test_identity_examples(model, k):
    assert metric_winding_identity_check(model, k) <= 1e-10


@pytest.mark.parametrize("side", ["above", "below"])
def test_critical_fit(side):
    fit = critical_exponent_fit(side, (1e-3, 1e-2))
    assert 0.95 <= fit.exponent <= 1.05
    assert abs(fit.prefactor - 1 / 16) <= 0.2 / 16
    assert fit.r_squared > 0.99


def test_critical_fit_other_transition():
    fit = critical_exponent_fit("below", critical_mu=-1.0, grid_size=2 ** 14)
    assert 0.95 <= fit.exponent <= 1.05


@pytest.mark.parametrize("kwargs", [
    {"side": "above", "window": (1e-2, 1e-2)},
    {"side": "above", "window": (1e-2, 1e-3)},
    {"side": "above", "n_points": 1},
    {"side": "left"},
])
def test_critical_fit_window_errors(kwargs):
    with pytest.raises(WindowError):
        critical_exponent_fit(**kwargs)
