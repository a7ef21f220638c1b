"""Bind a :class:`RunConfig` to initial data, a stepper and its diagnostics."""

from __future__ import annotations

import numpy as np

from .. import diagnostics as dg
from ..formulation import (CUBIC, FREE, Grid1D, StateField, kdv_initial_state,
                           make_decay_system, make_kdv_system, make_nls_conjugate_system,
                           make_nls_system, norm_action)
from ..schemes import SchemeKind, step
from ..specialized import (IC_NAMES, CHField, ComplexField, NLSParams,
                           ic_library, step_ch_expbox, step_ch_preissmann,
                           step_nls_embs, step_nls_midpoint)
from .config import coefficient_from_spec
from .expressions import compile_expression

__all__ = ["Problem", "build_problem", "make_grid"]

_POTENTIAL = {"cubic": CUBIC, "free": FREE}


def make_grid(spec):
    return Grid1D(spec.n_nodes, spec.x_min, spec.x_max, spec.boundary)


def _central(grid, f):
    return (grid.shift(f, 1) - grid.shift(f, -1)) / (2 * grid.dx)


def _profile(cfg, grid):
    """Initial profile on the nodes; named profiles or an inline expression."""
    if cfg.ic in IC_NAMES:
        return ic_library(cfg.ic, grid)
    return compile_expression(cfg.ic)(grid.x)


class Problem:
    """Common interface used by the runner and the convergence study.

    Subclasses define ``initial``, ``advance``, ``diagnostics``,
    ``snapshot``, ``restore`` and ``vector``.
    """

    columns = ()

    def __init__(self, cfg):
        self.cfg = cfg
        self.grid = make_grid(cfg.grid)
        self.initial_state = None

    def start(self):
        self.initial_state = self.initial()
        return self.initial_state

    def at(self, state, t):
        raise NotImplementedError


class _NLSReduced(Problem):
    """Reduced ``(p, q)`` scheme and its implicit-midpoint baseline."""

    columns = ("norm_law_residual_max", "norm_law_residual_global", "norm_error",
               "paper_norm_error")
    components = ("p", "q", "modulus")

    def __init__(self, cfg, params):
        super().__init__(cfg)
        self.params = params
        self.beta = params.beta
        exp = cfg.scheme is SchemeKind.EMBS
        self._step = step_nls_embs if exp else step_nls_midpoint

    def initial(self):
        f = _profile(self.cfg, self.grid)
        if not isinstance(f, ComplexField):
            f = ComplexField.from_psi(self.grid, f)
        return f

    def advance(self, state, dt, info):
        return self._step(state, self.params, dt, self.cfg.newton, info)

    def diagnostics(self, prev, nxt, dt):
        r = dg.norm_law_residual(prev, nxt, self.beta, dt)
        return dict(zip(self.columns, (r.max_node, r.global_, r.norm_error, r.paper_norm_error)))

    def at(self, state, t):
        return ComplexField(state.grid, state.p, state.q, t)

    def snapshot(self, state):
        return np.column_stack([state.p, state.q, state.modulus])

    def restore(self, values, t):
        return ComplexField(self.grid, values[:, 0], values[:, 1], t)

    def vector(self, state):
        return state.stacked()

    def surface(self, state):
        return state.modulus


class _Generic(Problem):
    """Any catalog system advanced by one of the generic schemes."""

    def __init__(self, cfg, system):
        super().__init__(cfg)
        self.system = system
        self.components = system.components
        cols = []
        if cfg.scheme is SchemeKind.EXPDG:
            cols.append("momentum_law_residual_max")
        self.columns = tuple(cols)

    def advance(self, state, dt, info):
        return step(self.cfg.scheme, self.system, state, dt, self.cfg.newton, info)

    def diagnostics(self, prev, nxt, dt):
        out = {}
        if "momentum_law_residual_max" in self.columns:
            out["momentum_law_residual_max"] = dg.momentum_law_residual(prev, nxt, self.system, dt)
        return out

    def at(self, state, t):
        return state.replace(state.values, t)

    def snapshot(self, state):
        return state.values

    def restore(self, values, t):
        return StateField(self.grid, values[:, :self.system.dim], t)

    def vector(self, state):
        return state.values

    def surface(self, state):
        return state.values[:, 0]


class _NLSGeneric(_Generic):
    """Four-component Schrodinger system ``[p, q, v, w]``."""

    def __init__(self, cfg, system, beta=None):
        super().__init__(cfg, system)
        self.beta = beta
        cols = list(self.columns)
        if beta is not None:
            cols += ["norm_law_residual_global", "norm_error", "paper_norm_error"]
            if cfg.scheme in (SchemeKind.EXPBOX, SchemeKind.MIDPOINT_BOX_BASELINE):
                self.action = norm_action()
                cols.append("quadratic_law_residual_max")
        self.columns = tuple(cols)
        self.components = system.components + ("modulus",)

    def initial(self):
        f = _profile(self.cfg, self.grid)
        if not isinstance(f, ComplexField):
            f = ComplexField.from_psi(self.grid, f)
        pq = f.stacked()
        return StateField(self.grid, np.hstack([pq, _central(self.grid, pq)]), 0.0)

    def diagnostics(self, prev, nxt, dt):
        out = super().diagnostics(prev, nxt, dt)
        if self.beta is not None:
            r = dg.norm_law_residual(ComplexField.from_state(prev), ComplexField.from_state(nxt),
                                     self.beta, dt)
            out.update(norm_law_residual_global=r.global_, norm_error=r.norm_error,
                       paper_norm_error=r.paper_norm_error)
        if "quadratic_law_residual_max" in self.columns:
            out["quadratic_law_residual_max"] = dg.quadratic_law_residual(
                prev, nxt, self.system, self.action, dt, verify=False)
        return out

    def snapshot(self, state):
        return np.column_stack([state.values, np.hypot(state.values[:, 0], state.values[:, 1])])

    def vector(self, state):
        return state.values[:, :2]

    def surface(self, state):
        return np.hypot(state.values[:, 0], state.values[:, 1])


class _KdV(_Generic):
    def __init__(self, cfg):
        co = cfg.coefficients
        self.b = coefficient_from_spec(co["b"])
        system = make_kdv_system(co["k"], coefficient_from_spec(co["damping"]), self.b)
        super().__init__(cfg, system)
        self.columns = self.columns + ("kdv_mass_residual",)

    def initial(self):
        u = np.real(_profile(self.cfg, self.grid))
        return kdv_initial_state(self.grid, u, self.system.params["k"], float(self.b(0.0)))

    def diagnostics(self, prev, nxt, dt):
        out = super().diagnostics(prev, nxt, dt)
        out["kdv_mass_residual"] = abs(dg.kdv_mass_residual(prev, nxt, self.system, dt))
        return out

    def surface(self, state):
        return state.values[:, 1]


class _Decay(_Generic):
    def __init__(self, cfg):
        super().__init__(cfg, make_decay_system(coefficient_from_spec(cfg.coefficients["damping"])))
        self.columns = self.columns + ("envelope_error",)

    def initial(self):
        f = np.asarray(_profile(self.cfg, self.grid), dtype=complex)
        return StateField(self.grid, np.column_stack([f.real, f.imag]), 0.0)

    def diagnostics(self, prev, nxt, dt):
        out = super().diagnostics(prev, nxt, dt)
        out["envelope_error"] = dg.envelope_error(self.initial_state, nxt, self.system.damping)
        return out


class _CH(Problem):
    columns = ("casimir_residual", "energy_residual", "casimir_unweighted",
               "energy_residual_h1")
    components = ("u",)

    def __init__(self, cfg):
        super().__init__(cfg)
        self.gamma = coefficient_from_spec(cfg.coefficients["gamma"])
        exp = cfg.scheme is SchemeKind.EXPBOX
        self._step = step_ch_expbox if exp else step_ch_preissmann

    def initial(self):
        f = _profile(self.cfg, self.grid)
        return f if isinstance(f, CHField) else CHField(self.grid, np.real(f))

    def advance(self, state, dt, info):
        return self._step(state, self.gamma, dt, self.cfg.newton, info)

    def diagnostics(self, prev, nxt, dt):
        r = dg.ch_casimir_and_energy(prev, nxt, self.gamma, dt)
        return {"casimir_residual": r.casimir, "energy_residual": r.energy,
                "casimir_unweighted": r.casimir_unweighted, "energy_residual_h1": r.energy_h1}

    def at(self, state, t):
        return CHField(state.grid, state.u, t)

    def snapshot(self, state):
        return state.u[:, None]

    def restore(self, values, t):
        return CHField(self.grid, values[:, 0], t)

    def vector(self, state):
        return state.u

    def surface(self, state):
        return state.u


def _nls_params(co):
    beta = co["beta"]
    pot = _POTENTIAL[co.get("potential", "cubic")]
    if beta["kind"] == "constant":
        return NLSParams(beta["value"], 0.0, 0.0, pot)
    return NLSParams(beta["offset"], beta["amplitude"], beta["frequency"], pot)


def build_problem(cfg):
    """Adapter for ``cfg.model`` and ``cfg.scheme``."""
    co = cfg.coefficients
    if cfg.model == "nls":
        params = _nls_params(co)
        if cfg.scheme in (SchemeKind.EMBS, SchemeKind.MIXED_EULER_BASELINE):
            return _NLSReduced(cfg, params)
        system = make_nls_system(params.gamma, params.c, params.omega, params.potential)
        return _NLSGeneric(cfg, system, params.beta)
    if cfg.model == "nls_conjugate":
        system = make_nls_conjugate_system(co["gamma"], co["c"], co["omega"],
                                           _POTENTIAL[co.get("potential", "cubic")])
        return _NLSGeneric(cfg, system)
    if cfg.model == "ch":
        return _CH(cfg)
    if cfg.model == "kdv":
        return _KdV(cfg)
    return _Decay(cfg)
