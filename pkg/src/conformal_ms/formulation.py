r"""Damped/driven multi-symplectic systems and the model catalog.

A system is

.. math::

    K z_t + L z_x = \nabla_z S(z, t) - a(t) K z + F(x, t)

with constant skew-symmetric ``K`` and ``L``. All callables of a system act
on arrays of shape ``(..., d)`` so that a whole grid of states is evaluated
in one call.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import DampingCoefficient
from .errors import ArgumentError, ConfigurationError, ConstructionError, EvaluationError

__all__ = [
    "Potential",
    "CUBIC",
    "FREE",
    "MultiSymplecticSystem",
    "QuadraticInvariantAction",
    "Grid1D",
    "StateField",
    "make_wave_system",
    "make_kdv_system",
    "kdv_initial_state",
    "make_nls_system",
    "make_nls_conjugate_system",
    "make_ch_system",
    "make_decay_system",
    "norm_action",
]

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
I2 = np.eye(2)
Z2 = np.zeros((2, 2))


@dataclass(frozen=True)
class Potential:
    """Nonlinearity ``V(s)`` of the Schrodinger models, ``s = p^2 + q^2``."""

    V: Callable
    dV: Callable
    d2V: Optional[Callable] = None
    label: str = ""

    def second(self, s):
        if self.d2V is not None:
            return np.asarray(self.d2V(s), dtype=float) + 0.0 * s
        h = 1e-6
        return (self.dV(s + h) - self.dV(s - h)) / (2 * h)

    def check(self, samples=(0.0, 0.3, 1.1, 2.5)):
        h = 1e-5
        for s in samples:
            fd = (self.V(s + h) - self.V(s - h)) / (2 * h)
            if abs(fd - self.dV(s)) > 1e-6 * (1 + abs(fd)):
                raise ConstructionError(f"dV inconsistent with V at s={s}")


#: ``V(s) = s^2 / 2``, the cubic Schrodinger nonlinearity.
CUBIC = Potential(lambda s: 0.5 * s * s, lambda s: s, lambda s: 1.0 + 0.0 * s, "cubic")
#: ``V = 0``, the linear Schrodinger equation.
FREE = Potential(lambda s: 0.0 * s, lambda s: 0.0 * s, lambda s: 0.0 * s, "free")


def _check_skew(name, M):
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConstructionError(f"{name} must be square, got shape {M.shape}")
    if np.any(M + M.T != 0.0):
        raise ConstructionError(f"{name} is not skew-symmetric")
    M.setflags(write=False)
    return M


@dataclass(frozen=True, eq=False)
class MultiSymplecticSystem:
    """``K z_t + L z_x = grad S(z,t) - a(t) K z + F(x,t)``.

    ``S(z, t)`` returns shape ``z.shape[:-1]``, ``grad_S`` the shape of ``z``
    and ``hess_S`` shape ``z.shape + (d,)``. ``forcing(x, t)`` maps node
    coordinates of shape ``(n,)`` to ``(n, d)``.
    """

    name: str
    K: np.ndarray
    L: np.ndarray
    S: Callable
    grad_S: Callable
    hess_S: Callable
    damping: DampingCoefficient
    forcing: Optional[Callable] = None
    components: tuple = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        K = _check_skew("K", self.K)
        L = _check_skew("L", self.L)
        if K.shape != L.shape:
            raise ConstructionError("K and L must have the same shape")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "L", L)
        if self.components and len(self.components) != K.shape[0]:
            raise ConstructionError("one component name per state entry required")

    @property
    def dim(self):
        return self.K.shape[0]

    def force(self, x, t):
        """Forcing on nodes ``x``; zeros when the system is unforced."""
        x = np.asarray(x, dtype=float)
        if self.forcing is None:
            return np.zeros(x.shape + (self.dim,))
        return np.broadcast_to(np.asarray(self.forcing(x, t), dtype=float), x.shape + (self.dim,))

    def with_forcing(self, forcing):
        return dataclasses.replace(self, forcing=forcing)

    def check_derivatives(self, rng=None, samples=20, h=1e-5, tol=1e-6, scale=1.0):
        """Finite-difference checks of ``grad_S`` and ``hess_S``.

        Raises :class:`ConstructionError` on the first failed sample.
        """
        rng = np.random.default_rng(rng)
        d = self.dim
        for _ in range(samples):
            z = scale * rng.uniform(-1, 1, d)
            t = float(rng.uniform(0, 2))
            g = self.grad_S(z, t)
            H = self.hess_S(z, t)
            if np.max(np.abs(H - H.T)) > 1e-12 * (1 + np.max(np.abs(H))):
                raise ConstructionError(f"{self.name}: Hessian not symmetric")
            E = np.eye(d) * h
            fd_g = np.array([(self.S(z + e, t) - self.S(z - e, t)) / (2 * h) for e in E])
            fd_H = np.array([(self.grad_S(z + e, t) - self.grad_S(z - e, t)) / (2 * h) for e in E])
            if np.max(np.abs(fd_g - g)) > tol * (1 + np.max(np.abs(g))):
                raise ConstructionError(f"{self.name}: grad_S inconsistent with S at z={z}")
            if np.max(np.abs(fd_H - H)) > tol * (1 + np.max(np.abs(H))):
                raise ConstructionError(f"{self.name}: hess_S inconsistent with grad_S at z={z}")


@dataclass(frozen=True, eq=False)
class QuadraticInvariantAction:
    """Linear symmetry ``z -> Bz`` of ``S`` giving a quadratic conformal law.

    The law needs ``(Bz).grad S(z,t) = 0`` and symmetric ``KB`` and ``LB``.
    """

    B: np.ndarray

    def __post_init__(self):
        B = np.array(self.B, dtype=float)
        B.setflags(write=False)
        object.__setattr__(self, "B", B)

    def defect(self, system, samples=100, rng=None, scale=1.0):
        """Largest scaled violation of the three requirements."""
        rng = np.random.default_rng(rng)
        B = self.B
        if B.shape != system.K.shape:
            return np.inf
        KB, LB = system.K @ B, system.L @ B
        worst = max(np.max(np.abs(KB - KB.T)), np.max(np.abs(LB - LB.T)))
        z = scale * rng.uniform(-1, 1, (samples, system.dim))
        for zi, t in zip(z, rng.uniform(0, 2, samples)):
            g = system.grad_S(zi, t)
            val = abs((B @ zi) @ g) / (1 + np.linalg.norm(B @ zi) * np.linalg.norm(g))
            worst = max(worst, val)
        return float(worst)

    def check(self, system, samples=100, rng=None, tol=1e-12):
        d = self.defect(system, samples, rng)
        if not d <= tol:
            raise ConstructionError(
                f"action is not a symmetry of {system.name} (defect {d:.3e})"
            )
        return self


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid ``x_n = x_min + n dx``, ``n = 0..n_nodes-1``.

    ``boundary`` is ``"periodic"`` or ``"anti-periodic"``; in the latter case
    ``z_{n+N} = -z_n``.
    """

    n_nodes: int
    x_min: float
    x_max: float
    boundary: str = "periodic"

    def __post_init__(self):
        if int(self.n_nodes) < 1:
            raise ArgumentError("n_nodes must be positive")
        if not self.x_max > self.x_min:
            raise ArgumentError("x_max must exceed x_min")
        if self.boundary not in ("periodic", "anti-periodic"):
            raise ArgumentError(f"unknown boundary {self.boundary!r}")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n_nodes

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.n_nodes)

    @property
    def midpoints(self):
        return self.x + 0.5 * self.dx

    @property
    def sign(self):
        return -1.0 if self.boundary == "anti-periodic" else 1.0

    def wrap_factors(self, k):
        """Boundary factor picked up by ``z_{n+k}`` for each node ``n``."""
        wraps = (np.arange(self.n_nodes) + k) // self.n_nodes
        return self.sign ** wraps

    def shift(self, values, k=1):
        """``out[n] = values[n + k]`` with the boundary sign applied."""
        values = np.asarray(values)
        idx = (np.arange(self.n_nodes) + k) % self.n_nodes
        out = values[idx]
        if self.sign < 0:
            f = self.wrap_factors(k)
            out = out * f.reshape((-1,) + (1,) * (values.ndim - 1))
        return out

    def dplus(self, values):
        return (self.shift(values, 1) - values) / self.dx

    def dminus(self, values):
        return (values - self.shift(values, -1)) / self.dx

    def average(self, values):
        """Cell average ``(z_n + z_{n+1}) / 2``."""
        return 0.5 * (values + self.shift(values, 1))

    def doubled(self):
        """Periodic grid on twice the domain (anti-periodic consistency check)."""
        return Grid1D(2 * self.n_nodes, self.x_min, 2 * self.x_max - self.x_min, "periodic")


@dataclass(frozen=True, eq=False)
class StateField:
    """Discrete solution: one length-d vector per node at time ``t``."""

    grid: Grid1D
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.n_nodes:
            raise ArgumentError(f"expected {self.grid.n_nodes} nodes, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise EvaluationError(f"non-finite state at t = {self.t!r}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self):
        return self.values.shape[1]

    def replace(self, values, t):
        return StateField(self.grid, values, t)


# --- catalog -----------------------------------------------------------------


def _fd_consistent(f, df, points, what):
    h = 1e-5
    for u in points:
        fd = (f(u + h) - f(u - h)) / (2 * h)
        if abs(fd - df(u)) > 1e-6 * (1 + abs(fd)):
            raise ConstructionError(f"{what} inconsistent at u = {u}")


def make_wave_system(f, df, d2f, a):
    """Semi-linear wave ``u_tt = u_xx - 2 a(t) u_t - f'(u)``, ``z = [u, v, w, p]``.

    With ``p = 0`` the remaining components are ``v = u_t`` and ``w = -u_x``.
    """
    pts = (-0.9, -0.2, 0.4, 1.3)
    _fd_consistent(f, df, pts, "f'")
    _fd_consistent(df, d2f, pts, "f''")
    K = np.block([[-J2, Z2], [Z2, -J2]])
    L = np.block([[Z2, -I2], [I2, Z2]])

    def S(z, t):
        u, v, w, p = np.moveaxis(z, -1, 0)
        at, dat = float(a(t)), a.slope(t)
        return at * (u * v + w * p) + 0.5 * (v * v - w * w) + f(u) + dat * p * p

    def grad_S(z, t):
        u, v, w, p = np.moveaxis(z, -1, 0)
        at, dat = float(a(t)), a.slope(t)
        return np.stack([at * v + df(u), at * u + v, at * p - w, at * w + 2 * dat * p], -1)

    def hess_S(z, t):
        u = z[..., 0]
        at, dat = float(a(t)), a.slope(t)
        H = np.zeros(z.shape + (4,))
        H[..., 0, 0] = d2f(u)
        H[..., 0, 1] = H[..., 1, 0] = at
        H[..., 1, 1] = 1.0
        H[..., 2, 2] = -1.0
        H[..., 2, 3] = H[..., 3, 2] = at
        H[..., 3, 3] = 2 * dat
        return H

    return MultiSymplecticSystem("wave", K, L, S, grad_S, hess_S, a,
                                 components=("u", "v", "w", "p"))


def make_kdv_system(k, a, b):
    """Generalised KdV ``u_t + u^{k-1} u_x + a(t) u + b(t) u_xxx = 0``.

    ``z = [phi, u, v, w]`` with ``phi_x = u``, ``v = 2 b u_x`` and
    ``w = u^k / k + b u_xx``.
    """
    k = int(k)
    if k < 1:
        raise ArgumentError("k must be a positive integer")
    K = np.block([[J2, Z2], [Z2, Z2]])
    L = np.block([[Z2, J2], [J2, Z2]])
    c = 2.0 / (k * (k + 1))

    def bval(t):
        bt = float(b(t))
        if not bt > 0:
            raise EvaluationError(f"dispersion coefficient b(t) = {bt} <= 0 at t = {t}")
        return bt

    def S(z, t):
        _, u, v, w = np.moveaxis(z, -1, 0)
        return v * v / (4 * bval(t)) - u * w + c * u ** (k + 1)

    def grad_S(z, t):
        phi, u, v, w = np.moveaxis(z, -1, 0)
        return np.stack([0.0 * phi, -w + (2.0 / k) * u ** k, v / (2 * bval(t)), -u], -1)

    def hess_S(z, t):
        u = z[..., 1]
        H = np.zeros(z.shape + (4,))
        H[..., 1, 1] = 2.0 * u ** (k - 1)
        H[..., 1, 3] = H[..., 3, 1] = -1.0
        H[..., 2, 2] = 1.0 / (2 * bval(t))
        return H

    def gauge(dt, a_h=0.0):
        # (phi, w) -> (phi + c, w + (2/dt + a_h) c) leaves every step residual unchanged
        return np.array([1.0, 0.0, 0.0, 2.0 / dt + a_h])

    return MultiSymplecticSystem("kdv", K, L, S, grad_S, hess_S, a,
                                 components=("phi", "u", "v", "w"),
                                 params={"k": k, "b": b, "gauge": gauge})


def kdv_initial_state(grid, u, k, b0, t=0.0):
    """Four-component KdV state ``[phi, u, v, w]`` built from ``u``.

    ``phi`` solves the cell rule ``(phi_{n+1} - phi_n) / dx = (u_n + u_{n+1}) / 2``;
    ``v`` and ``w`` use central differences with dispersion ``b0``.

    Raises
    ------
    ConfigurationError
        ``u`` has nonzero mean on a periodic grid, so no periodic ``phi`` exists.
    """
    u = np.asarray(u, dtype=float).ravel()
    if u.shape != (grid.n_nodes,):
        raise ArgumentError(f"u needs {grid.n_nodes} entries")
    steps = grid.dx * grid.average(u)
    total = float(np.sum(steps))
    if grid.boundary == "periodic":
        if abs(total) > 1e-12 * (1 + float(np.sum(np.abs(steps)))):
            raise ConfigurationError(
                f"KdV data need zero-mean u on a periodic grid (integral {total:.3e})")
        phi0 = 0.0
    else:
        phi0 = -0.5 * total
    phi = phi0 + np.concatenate([[0.0], np.cumsum(steps[:-1])])
    ux = (grid.shift(u, 1) - grid.shift(u, -1)) / (2 * grid.dx)
    uxx = (grid.shift(u, 1) - 2 * u + grid.shift(u, -1)) / grid.dx ** 2
    k = int(k)
    return StateField(grid, np.column_stack([phi, u, 2 * b0 * ux, u ** k / k + b0 * uxx]), t)


_NLS_K = np.block([[J2, Z2], [Z2, Z2]])
_NLS_L = np.block([[Z2, -I2], [I2, Z2]])


def _nls_parts(potential, alpha, beta_cross):
    """S, grad and Hessian of 1/2 (v^2 + w^2 + V(s) + alpha s + 2 beta q p)."""

    def S(z, t):
        p, q, v, w = np.moveaxis(z, -1, 0)
        s = p * p + q * q
        return 0.5 * (v * v + w * w + potential.V(s) + alpha(t) * s) + beta_cross(t) * q * p

    def grad_S(z, t):
        p, q, v, w = np.moveaxis(z, -1, 0)
        s = p * p + q * q
        g = potential.dV(s) + alpha(t)
        bc = beta_cross(t)
        return np.stack([g * p + bc * q, g * q + bc * p, v, w], -1)

    def hess_S(z, t):
        p, q = z[..., 0], z[..., 1]
        s = p * p + q * q
        g = potential.dV(s) + alpha(t)
        g2 = potential.second(s)
        H = np.zeros(z.shape + (4,))
        H[..., 0, 0] = g + 2 * g2 * p * p
        H[..., 1, 1] = g + 2 * g2 * q * q
        H[..., 0, 1] = H[..., 1, 0] = 2 * g2 * p * q + beta_cross(t)
        H[..., 2, 2] = H[..., 3, 3] = 1.0
        return H

    return S, grad_S, hess_S


def make_nls_system(gamma, c, omega, potential=CUBIC):
    """``i psi_t + psi_xx + i gamma psi + c e^{i omega t} psi + V'(|psi|^2) psi = 0``.

    ``z = [p, q, v, w]`` with ``psi = p + i q``; damping
    ``beta(t) = gamma + c sin(omega t)``, potential shift
    ``alpha(t) = c cos(omega t)``.
    """
    potential.check()
    c, omega = float(c), float(omega)
    S, grad_S, hess_S = _nls_parts(
        potential, lambda t: c * np.cos(omega * t), lambda t: 0.0
    )
    beta = DampingCoefficient.sinusoid(gamma, c, omega)
    return MultiSymplecticSystem(
        "nls", _NLS_K, _NLS_L, S, grad_S, hess_S, beta, components=("p", "q", "v", "w"),
        params={"gamma": float(gamma), "c": c, "omega": omega, "potential": potential},
    )


def make_nls_conjugate_system(gamma, c, omega, potential=CUBIC):
    """Parametrically forced NLS, ``c e^{i omega t} psi^*`` forcing, damping ``gamma``."""
    potential.check()
    c, omega = float(c), float(omega)
    S, grad_S, hess_S = _nls_parts(
        potential, lambda t: c * np.cos(omega * t), lambda t: c * np.sin(omega * t)
    )
    return MultiSymplecticSystem(
        "nls_conjugate", _NLS_K, _NLS_L, S, grad_S, hess_S,
        DampingCoefficient.constant(gamma), components=("p", "q", "v", "w"),
        params={"gamma": float(gamma), "c": c, "omega": omega, "potential": potential},
    )


def make_ch_system(gamma, f=None):
    """Damped, forced Camassa-Holm equation; ``z = [u, v, w, q, p]``.

    ``f(x, t)`` is the scalar external force (``None`` for none).
    """
    K = np.zeros((5, 5))
    K[0, 1], K[0, 4] = 0.5, -0.5
    K[1, 0], K[4, 0] = -0.5, 0.5
    L = np.zeros((5, 5))
    L[0, 3], L[1, 2] = -1.0, 1.0
    L[2, 1], L[3, 0] = -1.0, 1.0

    def S(z, t):
        u, v, w, q, p = np.moveaxis(z, -1, 0)
        return -0.5 * u ** 3 - 0.5 * u * p * p - u * w + q * p + 0.5 * float(gamma(t)) * u * p

    def grad_S(z, t):
        u, v, w, q, p = np.moveaxis(z, -1, 0)
        g = float(gamma(t))
        return np.stack(
            [-1.5 * u * u - 0.5 * p * p - w + 0.5 * g * p, 0.0 * v, -u, p,
             -u * p + q + 0.5 * g * u], -1)

    def hess_S(z, t):
        u, p = z[..., 0], z[..., 4]
        g = float(gamma(t))
        H = np.zeros(z.shape + (5,))
        H[..., 0, 0] = -3.0 * u
        H[..., 0, 2] = H[..., 2, 0] = -1.0
        H[..., 0, 4] = H[..., 4, 0] = -p + 0.5 * g
        H[..., 3, 4] = H[..., 4, 3] = 1.0
        H[..., 4, 4] = -u
        return H

    forcing = None
    if f is not None:
        def forcing(x, t):
            out = np.zeros(np.shape(x) + (5,))
            out[..., 0] = f(x, t)
            return out

    return MultiSymplecticSystem("ch", K, L, S, grad_S, hess_S, gamma, forcing,
                                 components=("u", "v", "w", "q", "p"))


def make_decay_system(a):
    """``J z_t = -a(t) J z``: pure exponential decay, ``S = 0`` and ``L = 0``."""
    zero = lambda z, t: np.zeros(z.shape[:-1])  # noqa: E731
    return MultiSymplecticSystem(
        "decay", J2, np.zeros((2, 2)), zero, lambda z, t: np.zeros(z.shape),
        lambda z, t: np.zeros(z.shape + (2,)), a, components=("y1", "y2"),
    )


def norm_action(samples=100, rng=0):
    """Phase rotation of ``(p, q)`` and ``(v, w)`` for the Schrodinger models.

    ``z^T K B z = p^2 + q^2``. Verified against a time-dependent cubic NLS
    system before it is returned.
    """
    B = np.block([[J2.T, Z2], [Z2, J2.T]])
    action = QuadraticInvariantAction(B)
    action.check(make_nls_system(0.1, -0.2, np.pi), samples=samples, rng=rng)
    return action
