"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one PASS/FAIL line through ``conftest.report``; the
collected lines are repeated in the pytest terminal summary.
"""

import functools
import math
import time

import numpy as np
import pytest

from conformal_ms import (ComplexField, DampingCoefficient, Grid1D, NewtonConfig,
                          NLSParams, SchemeKind, StateField, expdiff_residual,
                          make_nls_conjugate_system, make_nls_system, norm_action,
                          product_rule_residual, step, step_embs, step_nls_embs)
from conformal_ms.diagnostics import (momentum_law_residual, propagate_tangent_pair,
                                      quadratic_law_residual, twoform_residual)
from conformal_ms.harness.config import config_from_dict
from conformal_ms.harness.presets import preset
from conformal_ms.harness.runner import convergence_study, run

from conftest import report

TOL13 = NewtonConfig(tol=1e-13)


@functools.lru_cache(maxsize=None)
def preset_run(name, t_end):
    start = time.perf_counter()
    summary = run(preset(name, t_end=t_end), out=None)
    return summary, time.perf_counter() - start


def _smooth_state(grid, rng, modes=3):
    """Random band-limited ``psi`` that fits the grid's boundary rule."""
    L = grid.x_max - grid.x_min
    shift = 0.5 if grid.boundary == "anti-periodic" else 0.0
    psi = np.zeros(grid.n_nodes, dtype=complex)
    for k in range(modes):
        amp = complex(*rng.normal(size=2)) * 0.3 / (1 + k)
        psi += amp * np.exp(2j * np.pi * (k + shift) * (grid.x - grid.x_min) / L)
    return ComplexField.from_psi(grid, psi)


def _trajectory(kind, sys, state, dt, n, cfg=TOL13):
    out = [state]
    for _ in range(n):
        out.append(step(kind, sys, out[-1], dt, cfg))
    return out


def test_criterion_01_operator_identities():
    rng = np.random.default_rng(1)
    coeffs = [DampingCoefficient.constant(0.3), DampingCoefficient.constant(-0.7),
              DampingCoefficient.sinusoid(0.1, -0.2, np.pi),
              DampingCoefficient.sinusoid(-0.4, 1.3, 2.7)]
    start = time.perf_counter()
    worst_pr = worst_ed = 0.0
    for trial in range(1000):
        a = coeffs[trial % len(coeffs)]
        t_i = float(rng.uniform(-2, 5))
        dt = float(rng.uniform(0.1, 1.0))
        z0, z1, y0, y1 = rng.uniform(-1, 1, (4, 5))
        scale = 1 + max(np.max(np.abs(v)) for v in (z0, z1, y0, y1))
        worst_pr = max(worst_pr, product_rule_residual(a, t_i, dt, z0, z1, y0, y1) / scale)
        worst_ed = max(worst_ed, expdiff_residual(a, t_i, dt, y0, y1))
    elapsed = time.perf_counter() - start
    ok = worst_pr <= 1e-13 and worst_ed <= 1e-13 and elapsed < 1.0
    report(1, ok, f"product rule {worst_pr:.2e}, exp-difference {worst_ed:.2e}, "
                  f"{elapsed:.2f} s")
    assert ok


@pytest.mark.parametrize("name", ["nls_dark", "nls_gaussian"])
def test_criterion_02_norm_law(name):
    s, elapsed = preset_run(name, 1.0)
    assert s.ok, s.error
    assert s.steps == 1000
    node = s.maxima["norm_law_residual_max"]
    glob = s.maxima["norm_law_residual_global"]
    ok = node <= 1e-10 and glob <= 1e-10 and elapsed < 120
    prev = test_criterion_02_norm_law.__dict__.setdefault("results", {})
    prev[name] = (ok, f"{name}: node {node:.2e}, global {glob:.2e}, {elapsed:.1f} s")
    report(2, all(v[0] for v in prev.values()), "; ".join(v[1] for v in prev.values()))
    assert ok


def _forced_nls():
    def forcing(x, t):
        f = np.zeros(np.shape(x) + (4,))
        f[..., 0] = 0.05 * np.cos(x) * np.sin(2 * t)
        f[..., 1] = 0.03 * np.exp(-x * x / 4)
        return f
    return make_nls_system(0.1, -0.2, np.pi).with_forcing(forcing)


def test_criterion_03_twoform_law():
    sys = _forced_nls()
    grid = Grid1D(31, -8.0, 8.0)
    rng = np.random.default_rng(3)
    state = _smooth_state(grid, rng).to_state()
    dt, n_steps, n_pairs = 0.01, 50, 20
    worst = {}
    for kind in (SchemeKind.EMBS, SchemeKind.EXPBOX, SchemeKind.MIDPOINT_BOX_BASELINE):
        base = _trajectory(kind, sys, state, dt, n_steps)
        pair_rng = np.random.default_rng(33)
        w = 0.0
        for _ in range(n_pairs):
            du0, dv0 = pair_rng.normal(size=(2, grid.n_nodes, 4))
            pair = propagate_tangent_pair(sys, base, du0, dv0, dt, kind)
            w = max(w, twoform_residual(base, pair, sys, kind, dt))
        worst[kind] = w
    exp_worst = max(worst[SchemeKind.EMBS], worst[SchemeKind.EXPBOX])
    base_res = worst[SchemeKind.MIDPOINT_BOX_BASELINE]
    ok = exp_worst <= 1e-10 and base_res >= 1e-4 and base_res >= 1e3 * exp_worst
    report(3, ok, f"EMBS {worst[SchemeKind.EMBS]:.2e}, EXPBOX {worst[SchemeKind.EXPBOX]:.2e}, "
                  f"midpoint box baseline {base_res:.2e}")
    assert ok


def test_criterion_04_quadratic_law():
    sys = make_nls_system(0.1, -0.2, np.pi)
    action = norm_action()
    grid = Grid1D(101, -10.0, 10.0)
    state = _smooth_state(grid, np.random.default_rng(4)).to_state()
    traj = _trajectory(SchemeKind.EXPBOX, sys, state, 0.01, 100)
    worst = max(quadratic_law_residual(a, b, sys, action, 0.01)
                for a, b in zip(traj[:-1], traj[1:]))
    ok = worst <= 1e-10
    report(4, ok, f"max node residual {worst:.2e} over 100 steps")
    assert ok


def test_criterion_05_momentum_law():
    sys = make_nls_conjugate_system(0.1, 0.3, np.pi)
    grid = Grid1D(101, -10.0, 10.0)
    state = _smooth_state(grid, np.random.default_rng(5)).to_state()
    traj = _trajectory(SchemeKind.EXPDG, sys, state, 0.01, 50)
    worst = max(momentum_law_residual(a, b, sys, 0.01) for a, b in zip(traj[:-1], traj[1:]))
    ok = worst <= 1e-9
    report(5, ok, f"max node residual {worst:.2e} over 50 steps")
    assert ok


@pytest.mark.parametrize("name", ["ch_cosine", "ch_kink"])
def test_criterion_06_casimir(name):
    s, elapsed = preset_run(name, 1.0)
    assert s.ok, s.error
    cas = s.maxima["casimir_residual"]
    ok = cas <= 1e-10 and elapsed < 120
    prev = test_criterion_06_casimir.__dict__.setdefault("results", {})
    prev[name] = (ok, f"{name}: {cas:.2e} per step, {elapsed:.1f} s")
    report(6, all(v[0] for v in prev.values()), "; ".join(v[1] for v in prev.values()))
    assert ok


def test_criterion_07_energy_vs_preissmann():
    ex, _ = preset_run("ch_cosine", 1.0)
    pr, _ = preset_run("ch_cosine_preissmann", 1.0)
    assert ex.ok and pr.ok
    e_ex = ex.totals["energy_residual"]
    e_pr = pr.totals["energy_residual"]
    ratio = e_ex / e_pr
    ok = ratio <= 0.5
    report(7, ok, f"cumulative energy residual {e_ex:.6e} vs {e_pr:.6e}, ratio {ratio:.4f}")
    assert ok, f"energy residual ratio {ratio:.4f} > 0.5"


def test_criterion_08_second_order():
    start = time.perf_counter()
    orders = {}
    for scheme in ("embs", "expbox", "expdg"):
        cfg = config_from_dict({
            "model": "nls", "scheme": scheme,
            "grid": {"x_min": -10, "x_max": 10, "n_nodes": 101, "boundary": "periodic"},
            "dt": 0.02, "t_end": 0.4, "ic": "gaussian",
            "coefficients": {"beta": {"kind": "sinusoid", "offset": 0.1, "amplitude": -0.2,
                                      "frequency": "pi"}},
            "newton": {"tol": 1e-13},
        })
        rows = convergence_study(cfg, levels=3)
        orders[scheme] = [r.observed_order for r in rows if not math.isnan(r.observed_order)]
    elapsed = time.perf_counter() - start
    ok = all(1.8 <= p <= 2.2 for v in orders.values() for p in v) and elapsed < 300
    detail = ", ".join(f"{k} " + "/".join(f"{p:.3f}" for p in v) for k, v in orders.items())
    report(8, ok, f"{detail}; {elapsed:.1f} s")
    assert ok


def test_criterion_09_exact_decay():
    worst = {}
    for scheme in ("embs", "expbox", "expdg"):
        cfg = config_from_dict({
            "model": "decay", "scheme": scheme,
            "grid": {"x_min": 0, "x_max": 1, "n_nodes": 5},
            "dt": 0.01, "t_end": 100, "ic": "sin(2*pi*x) + 2",
            "coefficients": {"damping": {"kind": "sinusoid", "offset": 0.05, "amplitude": 0.5,
                                         "frequency": "pi"}},
            "newton": {"tol": 1e-14},
        })
        s = run(cfg, out=None)
        assert s.ok and s.steps == 10_000
        worst[scheme] = s.maxima["envelope_error"]
    ok = max(worst.values()) <= 1e-12
    report(9, ok, ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))
    assert ok


def test_criterion_10_reduced_vs_generic():
    params = NLSParams(0.1, -0.2, np.pi)
    sys = make_nls_system(0.1, -0.2, np.pi)
    rng = np.random.default_rng(10)
    worst = 0.0
    for k in range(20):
        grid = Grid1D(64, -10.0, 10.0, "anti-periodic" if k % 2 else "periodic")
        field = _smooth_state(grid, rng, modes=4)
        field = ComplexField(grid, field.p, field.q, float(rng.uniform(0, 2)))
        dt = float(rng.uniform(0.001, 0.02))
        reduced = step_nls_embs(field, params, dt, TOL13)
        generic = step_embs(sys, field.to_state(), dt, TOL13)
        diff = reduced.stacked() - generic.values[:, :2]
        worst = max(worst, math.sqrt(grid.dx * float(np.sum(diff * diff))))
    ok = worst <= 1e-10
    report(10, ok, f"max discrete L2 difference {worst:.2e} over 20 states")
    assert ok
