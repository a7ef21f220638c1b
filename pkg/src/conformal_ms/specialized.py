r"""Reduced-variable schemes for the two experiment models.

Damped-driven NLS
    ``psi = p + i q`` on a periodic or anti-periodic grid. The exponential
    mixed box scheme with the auxiliary ``v, w`` eliminated reads, with
    ``P = A p`` and ``Q = A q`` (weights from ``beta``)::

        D q - d2 P - (V'(P^2 + Q^2) + alpha) P = 0
        D p + d2 Q + (V'(P^2 + Q^2) + alpha) Q = 0

    and ``d2 = d+ d-``. The baseline replaces ``A``, ``D`` by plain means
    and differences and adds ``beta(t_{i+1/2})`` times the mean on the left.

Damped Camassa-Holm
    ``u`` on a periodic grid, ``U = A u`` (weights from ``gamma``),
    ``Ub = A_x U``. Every term is centred at ``n + 3/2``::

        D (A_x^3 u_n - d2 A_x u_{n+1})
          + 3 A_x(d+ Ub_n  A_x Ub_n) - 3 d+ A_x Ub_n  d2 Ub_{n+1}
          + A_x(d+ Ub_n  d2 U_{n+1}) - A_x^3 U_n  d2 d+ U_{n+1} = 0

    The nonlinear terms sum to zero over a period, so
    ``exp(theta) * sum(u)`` is constant from step to step.

Both steppers solve for the new level with Newton's method on the
time-scaled residual and an exact sparse Jacobian.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .core import DampingCoefficient, exp_weights
from .errors import (ArgumentError, ConfigurationError, EvaluationError,
                     NewtonConvergenceError, StepError)
from .formulation import CUBIC, Grid1D, Potential, StateField
from .newton import NewtonConfig, newton_solve

__all__ = [
    "ComplexField",
    "CHField",
    "NLSParams",
    "nls_residual",
    "step_nls_embs",
    "step_nls_midpoint",
    "ch_residual",
    "step_ch_expbox",
    "step_ch_preissmann",
    "ic_library",
    "IC_NAMES",
]


@dataclass(frozen=True, eq=False)
class ComplexField:
    """``psi = p + i q`` sampled on the nodes of ``grid`` at time ``t``."""

    grid: Grid1D
    p: np.ndarray
    q: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        p = np.array(self.p, dtype=float).ravel()
        q = np.array(self.q, dtype=float).ravel()
        n = self.grid.n_nodes
        if p.shape != (n,) or q.shape != (n,):
            raise ArgumentError(f"p and q need {n} entries")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise EvaluationError(f"non-finite field at t = {self.t!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def from_psi(cls, grid, psi, t=0.0):
        psi = np.asarray(psi, dtype=complex)
        return cls(grid, psi.real, psi.imag, t)

    @property
    def psi(self):
        return self.p + 1j * self.q

    @property
    def modulus(self):
        return np.hypot(self.p, self.q)

    @property
    def density(self):
        return self.p ** 2 + self.q ** 2

    def stacked(self):
        return np.column_stack([self.p, self.q])

    def to_state(self):
        """Four-component ``[p, q, v, w]`` field with ``v = d- p``, ``w = d- q``."""
        pq = self.stacked()
        return StateField(self.grid, np.hstack([pq, self.grid.dminus(pq)]), self.t)

    @classmethod
    def from_state(cls, state):
        return cls(state.grid, state.values[:, 0], state.values[:, 1], state.t)


@dataclass(frozen=True, eq=False)
class CHField:
    """Camassa-Holm velocity ``u`` on a periodic grid."""

    grid: Grid1D
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.grid.boundary != "periodic":
            raise ConfigurationError("Camassa-Holm fields need a periodic grid")
        u = np.array(self.u, dtype=float).ravel()
        if u.shape != (self.grid.n_nodes,):
            raise ArgumentError(f"u needs {self.grid.n_nodes} entries")
        if not np.all(np.isfinite(u)):
            raise EvaluationError(f"non-finite field at t = {self.t!r}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "t", float(self.t))


@dataclass(frozen=True)
class NLSParams:
    """Coefficients of the damped-driven NLS.

    Damping ``beta(t) = gamma + c sin(omega t)``, potential shift
    ``alpha(t) = c cos(omega t)``, nonlinearity ``V``.
    """

    gamma: float
    c: float
    omega: float
    potential: Potential = field(default=CUBIC)

    @property
    def beta(self):
        return DampingCoefficient.sinusoid(self.gamma, self.c, self.omega)

    def alpha(self, t):
        return self.c * np.cos(self.omega * t)


# --- sparse difference operators ---------------------------------------------


def _shift_matrix(grid, k):
    """Sparse ``z -> z_{n+k}`` including the boundary sign."""
    n = grid.n_nodes
    rows = np.arange(n)
    return sp.csr_matrix((grid.wrap_factors(k), (rows, (rows + k) % n)), shape=(n, n))


@functools.lru_cache(maxsize=8)
def _operators(grid):
    n = grid.n_nodes
    eye = sp.identity(n, format="csr")
    up = _shift_matrix(grid, 1)
    down = _shift_matrix(grid, -1)
    dp = (up - eye) / grid.dx
    return {
        "up": up,
        "avg": 0.5 * (eye + up),
        "dp": dp,
        "d2": (up - 2 * eye + down) / grid.dx ** 2,
        "eye": eye,
    }


# --- NLS ---------------------------------------------------------------------


def _nls_weights(params, exponential, t, dt):
    t_half = t + 0.5 * dt
    if exponential:
        w = exp_weights(params.beta, t, dt)
        return w.w_plus, w.w_minus, 0.0, t_half
    return 1.0, 1.0, float(params.beta(t_half)), t_half


def _nls_parts(ops, params, pq0, pq1, weights, dt):
    wp, wm, b_h, t_half = weights
    P = 0.5 * (wp * pq1[:, 0] + wm * pq0[:, 0])
    Q = 0.5 * (wp * pq1[:, 1] + wm * pq0[:, 1])
    s = P * P + Q * Q
    g = params.potential.dV(s) + params.alpha(t_half)
    d2 = ops["d2"]
    r1 = wp * pq1[:, 1] - wm * pq0[:, 1] + dt * (b_h * Q - d2 @ P - g * P)
    r2 = wp * pq1[:, 0] - wm * pq0[:, 0] + dt * (b_h * P + d2 @ Q + g * Q)
    return P, Q, s, g, r1, r2


def nls_residual(field0, field1, params, dt, exponential=True):
    """Time-scaled residual rows ``(r1, r2)`` of one NLS step."""
    ops = _operators(field0.grid)
    w = _nls_weights(params, exponential, field0.t, dt)
    *_, r1, r2 = _nls_parts(ops, params, field0.stacked(), field1.stacked(), w, dt)
    return r1, r2


def _nls_step(field, params, dt, cfg, exponential, info):
    if not dt > 0:
        raise ArgumentError(f"dt must be positive, got {dt!r}")
    cfg = cfg or NewtonConfig()
    grid = field.grid
    ops = _operators(grid)
    weights = _nls_weights(params, exponential, field.t, dt)
    wp = weights[0]
    b_h = weights[2]
    pq0 = field.stacked()
    n = grid.n_nodes

    def res(pq):
        *_, r1, r2 = _nls_parts(ops, params, pq0, pq, weights, dt)
        return np.column_stack([r1, r2])

    def jac(pq):
        P, Q, s, g, _, _ = _nls_parts(ops, params, pq0, pq, weights, dt)
        g2 = params.potential.second(s)
        h = 0.5 * wp * dt
        dg = sp.diags
        d2 = ops["d2"]
        eye = ops["eye"]
        J11 = -h * (d2 + dg(g + 2 * g2 * P * P))
        J12 = (wp + h * b_h) * eye - h * dg(2 * g2 * P * Q)
        J21 = (wp + h * b_h) * eye + h * dg(2 * g2 * P * Q)
        J22 = h * (d2 + dg(g + 2 * g2 * Q * Q))
        J = sp.bmat([[J11, J12], [J21, J22]], format="csc")
        # reorder to node-major (p_0, q_0, p_1, ...) to match res().ravel()
        perm = np.arange(2 * n).reshape(2, n).T.ravel()
        return J[perm][:, perm]

    try:
        pq1, out = newton_solve(res, jac, pq0, cfg, full_output=True)
    except NewtonConvergenceError as exc:
        raise StepError(f"NLS step from t = {field.t!r} failed: {exc}",
                        exc.best, exc.residual, exc.iterations) from exc
    if info is not None:
        info.update(out)
    return ComplexField(grid, pq1[:, 0], pq1[:, 1], field.t + dt)


def step_nls_embs(field, params, dt, cfg=None, info=None):
    """One step of the exponential scheme in ``(p, q)``.

    Parameters
    ----------
    field : ComplexField
    params : NLSParams
    dt : float
    cfg : NewtonConfig, optional
    info : dict, optional
        Receives the Newton iteration count and final residual.
    """
    return _nls_step(field, params, dt, cfg, True, info)


def step_nls_midpoint(field, params, dt, cfg=None, info=None):
    """Implicit midpoint / symplectic Euler baseline with damping on the right."""
    return _nls_step(field, params, dt, cfg, False, info)


# --- Camassa-Holm ------------------------------------------------------------


@functools.lru_cache(maxsize=8)
def _ch_ops(grid):
    o = dict(_operators(grid))
    A, up, dp, d2 = o["avg"], o["up"], o["dp"], o["d2"]
    A3 = A @ A @ A
    o.update(
        A2=A @ A,
        A3=A3,
        mass=(A3 - up @ d2 @ A).tocsr(),
        dpA=(dp @ A).tocsr(),
        dpA2=(dp @ A @ A).tocsr(),
        sd2=(up @ d2).tocsr(),
        sd2A=(up @ d2 @ A).tocsr(),
        sd2dp=(up @ d2 @ dp).tocsr(),
    )
    return o


def _ch_nonlinear(o, U):
    a = o["dpA"] @ U
    b = o["A2"] @ U
    c = o["dpA2"] @ U
    e = o["sd2A"] @ U
    g = o["sd2"] @ U
    h = o["A3"] @ U
    k = o["sd2dp"] @ U
    A = o["avg"]
    N = 3 * (A @ (a * b)) - 3 * c * e + A @ (a * g) - h * k
    return N, (a, b, c, e, g, h, k)


def _ch_nonlinear_jacobian(o, parts):
    a, b, c, e, g, h, k = parts
    A = o["avg"]
    dg = sp.diags
    return (3 * A @ (dg(b) @ o["dpA"] + dg(a) @ o["A2"])
            - 3 * (dg(e) @ o["dpA2"] + dg(c) @ o["sd2A"])
            + A @ (dg(g) @ o["dpA"] + dg(a) @ o["sd2"])
            - (dg(k) @ o["A3"] + dg(h) @ o["sd2dp"]))


def _ch_weights(gamma, exponential, t, dt):
    if exponential:
        w = exp_weights(gamma, t, dt)
        return w.w_plus, w.w_minus, 0.0
    return 1.0, 1.0, float(gamma(t + 0.5 * dt))


def _ch_res(o, u0, u1, weights, dt):
    wp, wm, g_h = weights
    U = 0.5 * (wp * u1 + wm * u0)
    N, parts = _ch_nonlinear(o, U)
    r = o["mass"] @ (wp * u1 - wm * u0) + dt * N
    if g_h:
        r = r + dt * g_h * (o["mass"] @ U)
    return r, parts


def ch_residual(field0, field1, gamma, dt, exponential=True):
    """Time-scaled residual of one Camassa-Holm step."""
    o = _ch_ops(field0.grid)
    r, _ = _ch_res(o, field0.u, field1.u, _ch_weights(gamma, exponential, field0.t, dt), dt)
    return r


def _ch_step(field, gamma, dt, cfg, exponential, info):
    if not dt > 0:
        raise ArgumentError(f"dt must be positive, got {dt!r}")
    cfg = cfg or NewtonConfig()
    o = _ch_ops(field.grid)
    weights = _ch_weights(gamma, exponential, field.t, dt)
    wp, _, g_h = weights
    u0 = field.u

    def res(u):
        return _ch_res(o, u0, u, weights, dt)[0]

    def jac(u):
        _, parts = _ch_res(o, u0, u, weights, dt)
        J = wp * o["mass"] + 0.5 * wp * dt * (_ch_nonlinear_jacobian(o, parts)
                                              + g_h * o["mass"])
        return sp.csc_matrix(J)

    try:
        u1, out = newton_solve(res, jac, u0, cfg, full_output=True)
    except NewtonConvergenceError as exc:
        raise StepError(f"CH step from t = {field.t!r} failed: {exc}",
                        exc.best, exc.residual, exc.iterations) from exc
    if info is not None:
        info.update(out)
    return CHField(field.grid, u1, field.t + dt)


def step_ch_expbox(field, gamma, dt, cfg=None, info=None):
    """Exponential box step for the damped Camassa-Holm equation."""
    return _ch_step(field, gamma, dt, cfg, True, info)


def step_ch_preissmann(field, gamma, dt, cfg=None, info=None):
    """Preissmann baseline: plain means, ``gamma(t_{i+1/2})`` term on the left."""
    return _ch_step(field, gamma, dt, cfg, False, info)


# --- initial conditions ------------------------------------------------------


def _sech(x):
    return 1.0 / np.cosh(x)


_NLS_IC = {
    "tanh_dark": lambda x: np.tanh(x) + 0j,
    "gaussian": lambda x: np.sqrt(2 / (3 * np.sqrt(np.pi))) * np.exp(-((2 * x / 3) ** 2) / 2) + 0j,
    "soliton_pair": lambda x: (np.exp(8j * x) * _sech(x + 5)
                               + 1.5 * np.exp(-7j * x) * _sech(1.5 * (x - 5))),
}
_CH_IC = {
    "ch_cosine": lambda x: 0.2 + 0.1 * np.cos(3 * x),
    "ch_kink": lambda x: np.exp(-np.abs(x)),
}
IC_NAMES = tuple(_NLS_IC) + tuple(_CH_IC)


def ic_library(name, grid):
    """Sample a named initial profile on the nodes of ``grid``.

    ``tanh_dark``, ``gaussian`` and ``soliton_pair`` give a
    :class:`ComplexField`; ``ch_cosine`` and ``ch_kink`` a :class:`CHField`.
    """
    if name in _NLS_IC:
        return ComplexField.from_psi(grid, _NLS_IC[name](grid.x))
    if name in _CH_IC:
        return CHField(grid, _CH_IC[name](grid.x))
    raise ArgumentError(f"unknown initial condition {name!r}; choose from {IC_NAMES}")
