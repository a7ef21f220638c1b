import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conformal_ms import (FREE, ArgumentError, CHField, ComplexField, ConfigurationError,
                          DampingCoefficient, EvaluationError, Grid1D, NewtonConfig,
                          NLSParams, QuadraticInvariantAction, SchemeKind, StateField,
                          kdv_initial_state, make_decay_system, make_kdv_system,
                          make_nls_conjugate_system, make_nls_system, norm_action, step,
                          step_ch_expbox, step_expbox, step_nls_embs)
from conformal_ms.diagnostics import (REGISTRY, DiagnosticRecord, TangentPair,
                                      ch_casimir_and_energy, ch_energy, envelope_error,
                                      kdv_mass_residual, momentum_law_residual,
                                      norm_law_residual, propagate_tangent_pair,
                                      quadratic_law_residual, twoform_residual)

TIGHT = NewtonConfig(tol=1e-13)
PARAMS = NLSParams(0.1, -0.2, np.pi)


def nls_pair(params=PARAMS, n=64, dt=0.01, boundary="periodic"):
    grid = Grid1D(n, -8.0, 8.0, boundary)
    f0 = ComplexField.from_psi(grid, np.exp(-grid.x ** 2 / 4) * np.exp(0.5j * grid.x), 0.2)
    return f0, step_nls_embs(f0, params, dt, TIGHT)


# --- norm law ----------------------------------------------------------------


def test_norm_law_undamped_global_conservation():
    params = NLSParams(0.0, 0.0, 1.0)
    f0, f1 = nls_pair(params)
    r = norm_law_residual(f0, f1, params.beta, 0.01)
    assert r.global_ <= 1e-13 and r.max_node <= 1e-10
    assert abs(np.sum(f1.density) - np.sum(f0.density)) <= 1e-12 * np.sum(f0.density)


def test_norm_law_related_quantities():
    f0, f1 = nls_pair()
    r = norm_law_residual(f0, f1, PARAMS.beta, 0.01)
    dth = PARAMS.beta.theta(0.21) - PARAMS.beta.theta(0.2)
    assert r.global_ == abs(r.norm_error)
    assert r.paper_norm_error == pytest.approx(r.norm_error - 6 * dth, abs=1e-15)
    # the factor-4 quantity tracks a different weighting and is O(dt) away from 0
    assert abs(r.paper_norm_error) > 1e-4


def test_norm_law_detects_perturbation():
    f0, f1 = nls_pair(boundary="anti-periodic")
    bumped = ComplexField(f1.grid, f1.p + 1e-6 * np.exp(-f1.grid.x ** 2), f1.q, f1.t)
    r = norm_law_residual(f0, bumped, PARAMS.beta, 0.01)
    assert r.max_node > 1e-6
    assert r.global_ > 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 2 * np.pi))
def test_norm_law_rotation_invariant(phi):
    f0, f1 = nls_pair(n=24)
    rot = np.exp(1j * phi)
    g0 = ComplexField.from_psi(f0.grid, rot * f0.psi, f0.t)
    g1 = ComplexField.from_psi(f1.grid, rot * f1.psi, f1.t)
    a = norm_law_residual(f0, f1, PARAMS.beta, 0.01)
    b = norm_law_residual(g0, g1, PARAMS.beta, 0.01)
    assert abs(a.max_node - b.max_node) <= 1e-12
    assert abs(a.norm_error - b.norm_error) <= 1e-13


# --- quadratic invariant and momentum ----------------------------------------


def _box_pair(sys, n=21, dt=0.01):
    grid = Grid1D(n, -5.0, 5.0)
    psi = np.exp(-grid.x ** 2) * (1 + 0.3j * np.sin(2 * np.pi * grid.x / 10))
    f0 = ComplexField.from_psi(grid, psi, 0.1).to_state()
    return f0, step_expbox(sys, f0, dt, TIGHT)


def test_quadratic_law_without_damping():
    sys = make_nls_system(0.0, 0.0, 1.0)
    f0, f1 = _box_pair(sys)
    assert quadratic_law_residual(f0, f1, sys, norm_action(), 0.01) <= 1e-11


def test_quadratic_law_refuses_non_symmetry():
    sys = make_nls_system(0.1, -0.2, np.pi)
    f0, f1 = _box_pair(sys)
    with pytest.raises(ConfigurationError):
        quadratic_law_residual(f0, f1, sys, QuadraticInvariantAction(np.eye(4)), 0.01)
    forced = sys.with_forcing(lambda x, t: np.zeros(np.shape(x) + (4,)))
    with pytest.raises(ConfigurationError):
        quadratic_law_residual(f0, f1, forced, norm_action(), 0.01)


def test_quadratic_law_detects_perturbation():
    sys = make_nls_system(0.1, -0.2, np.pi)
    f0, f1 = _box_pair(sys)
    bumped = f1.replace(f1.values + 1e-6, f1.t)
    assert quadratic_law_residual(f0, bumped, sys, norm_action(), 0.01) > 1e-7


def test_momentum_law_zero_field_and_forcing():
    sys = make_nls_conjugate_system(0.1, 0.3, np.pi)
    grid = Grid1D(9, 0.0, 1.0)
    z = StateField(grid, np.zeros((9, 4)))
    assert momentum_law_residual(z, z.replace(z.values, 0.01), sys, 0.01) == 0.0
    forced = sys.with_forcing(lambda x, t: np.zeros(np.shape(x) + (4,)))
    with pytest.raises(ConfigurationError):
        momentum_law_residual(z, z, forced, 0.01)


# --- two-form ----------------------------------------------------------------


def test_twoform_vanishes_for_equal_perturbations():
    sys = make_nls_system(0.1, -0.2, np.pi)
    f0, f1 = _box_pair(sys)
    du = np.random.default_rng(0).normal(size=f0.values.shape)
    for kind in (SchemeKind.EMBS, SchemeKind.EXPBOX):
        pair = propagate_tangent_pair(sys, [f0, f1], du, du, 0.01, kind)
        assert twoform_residual([f0, f1], pair, sys, kind, 0.01) == 0.0


def test_twoform_argument_checks():
    sys = make_nls_system(0.1, -0.2, np.pi)
    f0, f1 = _box_pair(sys)
    du = np.ones_like(f0.values)
    pair = TangentPair([du, du], [du, du])
    with pytest.raises(ConfigurationError):
        twoform_residual([f0, f1], pair, sys, SchemeKind.EXPDG, 0.01)
    with pytest.raises(ArgumentError):
        twoform_residual([f0, f1, f1], pair, sys, SchemeKind.EXPBOX, 0.01)
    with pytest.raises(ArgumentError):
        TangentPair([du], [du, du])


# --- Camassa-Holm ------------------------------------------------------------


def test_ch_energy_of_cosine_mode():
    grid = Grid1D(40, -np.pi, np.pi)
    k = 3
    u = np.cos(k * grid.x)
    expected = 0.5 * grid.dx * (grid.n_nodes / 2) * (
        1 + 4 * math.sin(k * grid.dx / 2) ** 2 / grid.dx ** 2)
    assert ch_energy(CHField(grid, u)) == pytest.approx(expected, rel=1e-13)


def test_ch_residuals_on_constant_field():
    gamma = DampingCoefficient.sinusoid(0.2, -0.2, np.pi)
    grid = Grid1D(30, -np.pi, np.pi)
    f0 = CHField(grid, np.full(30, 0.5))
    f1 = step_ch_expbox(f0, gamma, 0.05, TIGHT)
    r = ch_casimir_and_energy(f0, f1, gamma, 0.05)
    # exact decay: weighted mass and e^{2 theta}-weighted energy are constant
    assert r.casimir <= 1e-14 and r.energy_h1 <= 1e-14
    e0 = ch_energy(f0)
    dth = gamma.theta(0.05)
    assert r.energy == pytest.approx(e0 * (1 - math.exp(-dth)), rel=1e-10)
    assert r.casimir_unweighted == pytest.approx(15 * grid.dx * (1 - math.exp(-dth)), rel=1e-10)


def test_ch_residuals_need_no_damping_weight_when_undamped():
    zero = DampingCoefficient.zero()
    grid = Grid1D(30, -np.pi, np.pi)
    f0 = CHField(grid, 0.2 + 0.1 * np.cos(grid.x))
    f1 = step_ch_expbox(f0, zero, 0.01, TIGHT)
    r = ch_casimir_and_energy(f0, f1, zero, 0.01)
    assert r.casimir == r.casimir_unweighted
    assert r.energy == r.energy_h1


# --- KdV, decay, records -----------------------------------------------------


def _kdv_state(sys, grid, b0):
    ph = 2 * np.pi * (grid.x - grid.x_min) / (grid.x_max - grid.x_min)
    u = 0.3 * np.cos(ph) + 0.1 * np.sin(2 * ph)
    return kdv_initial_state(grid, u, 2, b0)


def test_kdv_mass_law():
    sys = make_kdv_system(2, DampingCoefficient.constant(0.1), DampingCoefficient.constant(1.0))
    grid = Grid1D(41, -10.0, 10.0)
    f = _kdv_state(sys, grid, 1.0)
    worst = 0.0
    for _ in range(10):
        g = step(SchemeKind.EXPBOX, sys, f, 0.01, NewtonConfig(tol=1e-12))
        worst = max(worst, abs(kdv_mass_residual(f, g, sys, 0.01)))
        f = g
    assert worst <= 1e-9


def test_kdv_mass_residual_sign():
    sys = make_kdv_system(2, DampingCoefficient.zero(), DampingCoefficient.constant(1.0))
    grid = Grid1D(11, -2.0, 2.0)
    a = _kdv_state(sys, grid, 1.0)
    b = a.replace(a.values * 1.1, 0.01)
    fwd = kdv_mass_residual(a, b, sys, 0.01)
    back = kdv_mass_residual(b.replace(b.values, 0.0), a.replace(a.values, 0.01), sys, 0.01)
    assert fwd > 0 and fwd == pytest.approx(-back, rel=1e-14)
    with pytest.raises(ConfigurationError):
        kdv_mass_residual(StateField(Grid1D(11, -2.0, 2.0, "anti-periodic"), a.values), b,
                          sys, 0.01)


def test_envelope_error():
    coeff = DampingCoefficient.constant(0.5)
    sys = make_decay_system(coeff)
    grid = Grid1D(3, 0.0, 1.0)
    f0 = StateField(grid, np.array([[1.0, 2.0], [3.0, -4.0], [0.5, 0.0]]))
    exact = f0.replace(math.exp(-0.5) * f0.values, 1.0)
    assert envelope_error(f0, exact, coeff) <= 1e-16
    off = exact.replace(1.01 * exact.values, 1.0)
    assert envelope_error(f0, off, coeff) == pytest.approx(0.01, rel=1e-12)
    g = step(SchemeKind.EMBS, sys, f0, 1.0, NewtonConfig(tol=1e-14))
    assert envelope_error(f0, g, coeff) <= 1e-15


def test_diagnostic_record_validation():
    rec = DiagnosticRecord(0.5, {"casimir_residual": 1e-13, "newton_iterations": 2})
    assert rec.entries["newton_iterations"] == 2
    assert "energy_residual_h1" in REGISTRY and len(set(REGISTRY)) == len(REGISTRY)
    with pytest.raises(ArgumentError):
        DiagnosticRecord(0.0, {"bogus": 1.0})
    with pytest.raises(EvaluationError):
        DiagnosticRecord(0.0, {"energy_residual": math.nan})


def test_free_schrodinger_quadratic_law_with_damping():
    sys = make_nls_system(0.3, 0.5, 2.0, FREE)
    f0, f1 = _box_pair(sys, dt=0.05)
    assert quadratic_law_residual(f0, f1, sys, norm_action(), 0.05) <= 1e-11
