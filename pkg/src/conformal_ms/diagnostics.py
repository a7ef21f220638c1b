r"""Residuals of the discrete conformal conservation laws.

Every local law has the shape

.. math::

    \delta_t^+(e^{2\theta_i} \rho_n^i) + \delta_x^+(e^{2\theta_{i+1/2}} \kappa_n^i) = 0

and the functions below return the largest absolute value of the left-hand
side over the nodes of one step (or of a trajectory). Global quantities are
weighted by ``dx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .core import exp_weights
from .errors import ArgumentError, ConfigurationError, EvaluationError
from .schemes import SchemeKind, split_L, tangent_step

__all__ = [
    "NormLawResult",
    "norm_law_residual",
    "quadratic_law_residual",
    "momentum_law_residual",
    "TangentPair",
    "propagate_tangent_pair",
    "twoform_residual",
    "CHResiduals",
    "ch_casimir_and_energy",
    "ch_energy",
    "kdv_mass_residual",
    "envelope_error",
    "REGISTRY",
    "DiagnosticRecord",
]


def _times(coeff, t0, dt):
    """``theta`` at ``t_i``, ``t_{i+1/2}``, ``t_{i+1}``."""
    return coeff.theta(t0, dt), coeff.theta(t0 + 0.5 * dt, dt), coeff.theta(t0 + dt, dt)


def _law(grid, rho0, rho1, flux, thetas, dt):
    """Pointwise ``d_t^+(e^{2 theta} rho) + d_x^+(e^{2 theta_h} flux)``.

    ``flux`` is a pair ``(kappa_n, kappa_{n+1})`` so that boundary signs
    are applied to the states before the flux is formed.
    """
    th0, thh, th1 = thetas
    k0, k1 = flux
    return ((math.exp(2 * th1) * rho1 - math.exp(2 * th0) * rho0) / dt
            + math.exp(2 * thh) * (k1 - k0) / grid.dx)


# --- NLS norm ----------------------------------------------------------------


class NormLawResult(NamedTuple):
    max_node: float
    global_: float
    paper_norm_error: float
    norm_error: float


def norm_law_residual(prev, next, beta, dt):
    """Discrete norm law of the reduced NLS scheme.

    Density ``N = p^2 + q^2``, flux ``2 (P_{n-1} Q_n - P_n Q_{n-1}) / dx`` with
    ``P, Q`` the weighted time averages.

    Returns
    -------
    NormLawResult
        ``max_node``: largest pointwise residual. ``global_``:
        ``|log(sum N^{i+1} / sum N^i) + 2 (theta_{i+1} - theta_i)|``.
        ``paper_norm_error``: ``log(sum N^{i+1} / sum N^i) - 4 (theta_{i+1} -
        theta_i)``, kept for plotting only. ``norm_error``: the signed
        quantity behind ``global_``.
    """
    grid = prev.grid
    if grid.boundary not in ("periodic", "anti-periodic"):
        raise ConfigurationError(f"unsupported boundary {grid.boundary!r}")
    w = exp_weights(beta, prev.t, dt)
    P = 0.5 * (w.w_plus * next.p + w.w_minus * prev.p)
    Q = 0.5 * (w.w_plus * next.q + w.w_minus * prev.q)
    Pm, Qm = grid.shift(P, -1), grid.shift(Q, -1)
    Pp, Qp = grid.shift(P, 1), grid.shift(Q, 1)
    G0 = 2 * (Pm * Q - P * Qm) / grid.dx
    G1 = 2 * (P * Qp - Pp * Q) / grid.dx
    thetas = _times(beta, prev.t, dt)
    N0, N1 = prev.density, next.density
    node = _law(grid, N0, N1, (G0, G1), thetas, dt)
    log_ratio = math.log(np.sum(N1) / np.sum(N0))
    dth = thetas[2] - thetas[0]
    return NormLawResult(float(np.max(np.abs(node))), abs(log_ratio + 2 * dth),
                         log_ratio - 4 * dth, log_ratio + 2 * dth)


# --- quadratic invariant and momentum ----------------------------------------


def _weighted(sys, prev, next, dt):
    w = exp_weights(sys.damping, prev.t, dt)
    Z0, Z1 = prev.values, next.values
    return w, 0.5 * (w.w_plus * Z1 + w.w_minus * Z0), (w.w_plus * Z1 - w.w_minus * Z0) / dt


def _unforced(sys, what):
    if sys.forcing is not None:
        raise ConfigurationError(f"the {what} law needs an unforced system")


def quadratic_law_residual(prev, next, sys, action, dt, verify=True):
    """Largest node residual of the conformal quadratic-invariant law.

    Density ``z_{n+1/2}^T K B z_{n+1/2}`` and flux ``(A z_n)^T L B (A z_n)``
    for an exponential box step. The action is checked against ``sys``
    first; an action that is not a symmetry is refused.
    """
    _unforced(sys, "quadratic-invariant")
    if verify:
        d = action.defect(sys, samples=50, rng=0)
        if not d <= 1e-12:
            raise ConfigurationError(
                f"action is not a verified symmetry of {sys.name} (defect {d:.2e})")
    grid = prev.grid
    KB = sys.K @ action.B
    LB = sys.L @ action.B

    def quad(M, X):
        return np.einsum("ni,ij,nj->n", X, M, X)

    _, AZ, _ = _weighted(sys, prev, next, dt)
    rho0 = quad(KB, grid.average(prev.values))
    rho1 = quad(KB, grid.average(next.values))
    flux = (quad(LB, AZ), quad(LB, grid.shift(AZ, 1)))
    node = _law(grid, rho0, rho1, flux, _times(sys.damping, prev.t, dt), dt)
    return float(np.max(np.abs(node)))


def momentum_law_residual(prev, next, sys, dt):
    """Largest node residual of the conformal momentum law.

    Density ``1/2 z_{n+1/2}^T K d+_x z_n``; flux
    ``1/2 (D z_n)^T K A z_n + S(A z_n, t_{i+1/2})``. Exact for the
    discrete-gradient box scheme.
    """
    _unforced(sys, "momentum")
    grid = prev.grid
    K = sys.K
    t_half = prev.t + 0.5 * dt

    def rho(Z):
        return 0.5 * np.einsum("ni,ij,nj->n", grid.average(Z), K, grid.dplus(Z))

    def kappa(DZ, AZ):
        return 0.5 * np.einsum("ni,ij,nj->n", DZ, K, AZ) + sys.S(AZ, t_half)

    _, AZ, DZ = _weighted(sys, prev, next, dt)
    flux = (kappa(DZ, AZ), kappa(grid.shift(DZ, 1), grid.shift(AZ, 1)))
    node = _law(grid, rho(prev.values), rho(next.values), flux,
                _times(sys.damping, prev.t, dt), dt)
    return float(np.max(np.abs(node)))


# --- two-form ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TangentPair:
    """Two tangent trajectories ``du^i``, ``dv^i`` along a base trajectory."""

    du: Sequence[np.ndarray]
    dv: Sequence[np.ndarray]

    def __post_init__(self):
        du = [np.asarray(a, dtype=float) for a in self.du]
        dv = [np.asarray(a, dtype=float) for a in self.dv]
        if len(du) != len(dv) or any(a.shape != b.shape for a, b in zip(du, dv)):
            raise ArgumentError("du and dv must have matching lengths and shapes")
        object.__setattr__(self, "du", du)
        object.__setattr__(self, "dv", dv)


def propagate_tangent_pair(sys, base_steps, du0, dv0, dt, kind):
    """Push two initial perturbations through ``tangent_step`` along ``base_steps``."""
    du, dv = [np.asarray(du0, float)], [np.asarray(dv0, float)]
    for f0, f1 in zip(base_steps[:-1], base_steps[1:]):
        du.append(tangent_step(sys, (f0, f1), du[-1], dt, kind))
        dv.append(tangent_step(sys, (f0, f1), dv[-1], dt, kind))
    return TangentPair(du, dv)


def _wedge(M, X, Y):
    return np.einsum("ni,ij,nj->n", X, M, Y) - np.einsum("ni,ij,nj->n", Y, M, X)


def _twoform_step(grid, sys, kind, w, du, dv, thetas, dt):
    K, L = sys.K, sys.L
    Au = 0.5 * (w.w_plus * du[1] + w.w_minus * du[0])
    Av = 0.5 * (w.w_plus * dv[1] + w.w_minus * dv[0])
    if kind is SchemeKind.EMBS:
        Lp = split_L(L).L_plus
        rho = [0.5 * _wedge(K, du[j], dv[j]) for j in (0, 1)]

        def kappa(k):
            return (np.einsum("ni,ij,nj->n", grid.shift(Au, k - 1), Lp, grid.shift(Av, k))
                    - np.einsum("ni,ij,nj->n", grid.shift(Av, k - 1), Lp, grid.shift(Au, k)))
    else:
        rho = [0.5 * _wedge(K, grid.average(du[j]), grid.average(dv[j])) for j in (0, 1)]

        def kappa(k):
            return 0.5 * _wedge(L, grid.shift(Au, k), grid.shift(Av, k))
    return _law(grid, rho[0], rho[1], (kappa(0), kappa(1)), thetas, dt)


def twoform_residual(base_steps, pair, sys, kind, dt):
    """Largest node residual of the conformal two-form law along a trajectory.

    The wedge ``dz ^ M dz`` is evaluated as ``1/2 (du^T M dv - dv^T M du)``.
    EMBS uses flux ``(A du_{n-1})^T L_+ (A dv_n) - (A dv_{n-1})^T L_+ (A du_n)``;
    EXPBOX (and, for comparison, the plain box baseline) uses cell-averaged
    densities and flux ``(A du_n)^T L (A dv_n)``. The exponential weights of
    ``sys.damping`` enter ``A`` in every case.
    """
    kind = SchemeKind.parse(kind)
    if kind is SchemeKind.MIDPOINT_BOX_BASELINE:
        kind = SchemeKind.EXPBOX
    if kind not in (SchemeKind.EMBS, SchemeKind.EXPBOX):
        raise ConfigurationError(f"no two-form law is available for {kind.value}")
    if len(pair.du) != len(base_steps):
        raise ArgumentError("tangent pair and base trajectory differ in length")
    grid = base_steps[0].grid
    worst = 0.0
    for i in range(len(base_steps) - 1):
        t0 = base_steps[i].t
        w = exp_weights(sys.damping, t0, dt)
        node = _twoform_step(grid, sys, kind, w, pair.du[i:i + 2], pair.dv[i:i + 2],
                             _times(sys.damping, t0, dt), dt)
        worst = max(worst, float(np.max(np.abs(node))))
    return worst


# --- Camassa-Holm and KdV ----------------------------------------------------


class CHResiduals(NamedTuple):
    casimir: float
    energy: float
    casimir_unweighted: float
    energy_h1: float


def _periodic(grid):
    if grid.boundary != "periodic":
        raise ConfigurationError("global mass balances need a periodic grid")


def ch_energy(field):
    """Discrete ``H^1`` energy ``1/2 sum(u^2 + (d+ u)^2) dx``."""
    g = field.grid
    return 0.5 * float(np.sum(field.u ** 2 + g.dplus(field.u) ** 2)) * g.dx


def ch_casimir_and_energy(prev, next, gamma, dt, dx=None):
    """Per-step Camassa-Holm residuals.

    ``casimir``: ``|e^{theta_{i+1}} sum u^{i+1} - e^{theta_i} sum u^i| dx``.
    ``energy``: ``|e^{theta_{i+1}} E^{i+1} - e^{theta_i} E^i|``.
    ``casimir_unweighted`` drops the exponential. ``energy_h1`` uses
    ``e^{2 theta}``; it vanishes along exact solutions since the ``H^1``
    energy decays like ``e^{-2 theta}``.
    """
    _periodic(prev.grid)
    dx = prev.grid.dx if dx is None else dx
    th0, _, th1 = _times(gamma, prev.t, dt)
    m0, m1 = float(np.sum(prev.u)), float(np.sum(next.u))
    E0, E1 = ch_energy(prev), ch_energy(next)
    return CHResiduals(
        abs(math.exp(th1) * m1 - math.exp(th0) * m0) * dx,
        abs(math.exp(th1) * E1 - math.exp(th0) * E0),
        abs(m1 - m0) * dx,
        abs(math.exp(2 * th1) * E1 - math.exp(2 * th0) * E0),
    )


def kdv_mass_residual(prev, next, sys, dt):
    """Signed change of the weighted mass ``e^{theta} sum(u) dx`` over one step."""
    _periodic(prev.grid)
    th0, _, th1 = _times(sys.damping, prev.t, dt)
    u0, u1 = prev.values[:, 1], next.values[:, 1]
    return (math.exp(th1) * float(np.sum(u1)) - math.exp(th0) * float(np.sum(u0))) * prev.grid.dx


def envelope_error(initial, state, coeff):
    """Relative distance of ``state`` from ``exp(theta(t0) - theta(t)) * initial``.

    Zero for the pure-decay problem (``S = 0``, ``L = 0``, no forcing).
    """
    factor = math.exp(coeff.theta(initial.t) - coeff.theta(state.t))
    exact = factor * np.asarray(initial.values)
    scale = max(float(np.max(np.abs(exact))), np.finfo(float).tiny)
    return float(np.max(np.abs(np.asarray(state.values) - exact))) / scale


# --- records -----------------------------------------------------------------

#: Names a :class:`DiagnosticRecord` may carry.
REGISTRY = (
    "norm_law_residual_max",
    "norm_law_residual_global",
    "norm_error",
    "paper_norm_error",
    "casimir_residual",
    "casimir_unweighted",
    "energy_residual",
    "energy_residual_h1",
    "quadratic_law_residual_max",
    "momentum_law_residual_max",
    "twoform_residual_max",
    "kdv_mass_residual",
    "envelope_error",
    "newton_iterations",
    "newton_residual",
)


@dataclass(frozen=True)
class DiagnosticRecord:
    """Named residuals after the step ending at time ``t``."""

    t: float
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.entries.items():
            if k not in REGISTRY:
                raise ArgumentError(f"unregistered diagnostic {k!r}")
            if not math.isfinite(v):
                raise EvaluationError(f"diagnostic {k} is not finite at t = {self.t!r}")
