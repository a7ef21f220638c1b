r"""Exponential weights and the weighted time operators.

For a damping rate :math:`a(t)` with antiderivative
:math:`\theta(t) = \int_0^t a(s)\,ds` one time step :math:`[t_i, t_i + \Delta t]`
carries two weights

.. math::

    w_+ = e^{\theta(t_{i+1}) - \theta(t_{i+1/2})}, \qquad
    w_- = e^{\theta(t_i) - \theta(t_{i+1/2})},

and the weighted average / difference operators

.. math::

    A^a z = \tfrac12 (w_+ z^{i+1} + w_- z^i), \qquad
    D^a z = (w_+ z^{i+1} - w_- z^i) / \Delta t .

Both are exact on the envelope :math:`z \propto e^{-\theta(t)}`.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ArgumentError, ConstructionError, EvaluationError

__all__ = [
    "DampingCoefficient",
    "ExponentialWeights",
    "theta",
    "exp_weights",
    "op_A",
    "op_D",
    "product_rule_residual",
    "expdiff_residual",
    "gauss_legendre",
]

#: Upper bound on the composite quadrature panel width.
MAX_PANEL = 0.01


def _evaluate(fun, ts):
    ts = np.asarray(ts, dtype=float)
    try:
        vals = np.broadcast_to(np.asarray(fun(ts), dtype=float), ts.shape)
    except TypeError:
        vals = np.array([float(fun(float(t))) for t in ts.ravel()]).reshape(ts.shape)
    return vals


@functools.lru_cache(maxsize=16)
def _leggauss(order):
    return np.polynomial.legendre.leggauss(order)


def gauss_legendre(fun, t0, t1, order=4, width=MAX_PANEL):
    """Composite Gauss-Legendre quadrature of ``fun`` over ``[t0, t1]``.

    Panels have equal width, no larger than ``width``. A non-finite value
    of ``fun`` at any node raises :class:`EvaluationError`.
    """
    if t0 == t1:
        return 0.0
    lo, hi, sign = (t0, t1, 1.0) if t1 > t0 else (t1, t0, -1.0)
    panels = max(1, int(math.ceil((hi - lo) / width - 1e-12)))
    nodes, weights = _leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    ts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = _evaluate(fun, ts)
    if not np.all(np.isfinite(vals)):
        bad = ts[~np.isfinite(vals)][0]
        raise EvaluationError(f"damping coefficient is not finite at t = {float(bad)!r}")
    return sign * float(np.sum(half * (vals @ weights)))


@dataclass(frozen=True)
class DampingCoefficient:
    """Scalar damping rate ``a(t)`` with optional closed forms.

    Parameters
    ----------
    rate : callable
        ``t -> a(t)``. Should accept numpy arrays; scalar-only callables are
        evaluated element by element.
    antiderivative : callable, optional
        Any antiderivative of ``rate``. It is re-anchored so that
        ``theta(0) == 0``. When absent, integrals use composite 4-node
        Gauss-Legendre quadrature.
    derivative : callable, optional
        ``t -> a'(t)``; central differences (h = 1e-6) otherwise.
    quadrature_order : int
        Gauss-Legendre node count for the quadrature fallback.
    label : str
        Free text used in reprs and output headers.
    """

    rate: Callable
    antiderivative: Optional[Callable] = None
    derivative: Optional[Callable] = None
    quadrature_order: int = 4
    label: str = ""
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if int(self.quadrature_order) < 1:
            raise ConstructionError("quadrature_order must be a positive integer")
        if self.validate and self.antiderivative is not None:
            self._check_antiderivative()

    def _check_antiderivative(self):
        for t0, t1 in ((0.0, 0.37), (0.25, 1.0), (1.3, 2.9), (-0.6, 0.45)):
            exact = self._closed_form(t1) - self._closed_form(t0)
            quad = gauss_legendre(self.rate, t0, t1, self.quadrature_order)
            if abs(exact - quad) > 1e-10 * (1.0 + abs(exact)):
                raise ConstructionError(
                    f"antiderivative inconsistent with rate on [{t0}, {t1}]: "
                    f"{exact!r} vs quadrature {quad!r}"
                )

    def _closed_form(self, t):
        return float(self.antiderivative(t)) - float(self.antiderivative(0.0))

    def __call__(self, t):
        return _evaluate(self.rate, t) if np.ndim(t) else float(_evaluate(self.rate, t))

    def integral(self, t0, t1, dt_hint=None):
        """``theta(t1) - theta(t0)``."""
        if not (math.isfinite(t0) and math.isfinite(t1)):
            raise ArgumentError("integration limits must be finite")
        if self.antiderivative is not None:
            return self._closed_form(t1) - self._closed_form(t0)
        width = MAX_PANEL if dt_hint is None else min(float(dt_hint), MAX_PANEL)
        return gauss_legendre(self.rate, t0, t1, self.quadrature_order, width)

    def theta(self, t, dt_hint=None):
        """Antiderivative anchored at zero."""
        return self.integral(0.0, t, dt_hint)

    def slope(self, t):
        """``a'(t)``."""
        if self.derivative is not None:
            return float(self.derivative(t))
        h = 1e-6
        return (float(self(t + h)) - float(self(t - h))) / (2 * h)

    def scaled(self, factor):
        """Coefficient ``factor * a(t)`` with matching antiderivative."""
        factor = float(factor)
        rate = self.rate
        anti = self.antiderivative
        der = self.derivative
        return DampingCoefficient(
            rate=lambda t: factor * np.asarray(rate(t), dtype=float),
            antiderivative=None if anti is None else (lambda t: factor * anti(t)),
            derivative=None if der is None else (lambda t: factor * der(t)),
            quadrature_order=self.quadrature_order,
            label=f"{factor}*({self.label})",
            validate=False,
        )

    @classmethod
    def zero(cls):
        return cls(lambda t: 0.0 * np.asarray(t, float), lambda t: 0.0 * t,
                   lambda t: 0.0 * t, label="zero")

    @classmethod
    def constant(cls, value):
        value = float(value)
        if value == 0.0:
            return cls.zero()
        return cls(
            lambda t: value + 0.0 * np.asarray(t, float),
            lambda t: value * t,
            lambda t: 0.0 * t,
            label=f"constant({value!r})",
        )

    @classmethod
    def sinusoid(cls, offset, amplitude, frequency):
        """``offset + amplitude * sin(frequency * t)``."""
        g, c, w = float(offset), float(amplitude), float(frequency)
        if c == 0.0 or w == 0.0:
            return cls.constant(g)
        return cls(
            lambda t: g + c * np.sin(w * np.asarray(t, float)),
            lambda t: g * t + (c / w) * (1.0 - np.cos(w * t)),
            lambda t: c * w * np.cos(w * t),
            label=f"sinusoid({g!r}, {c!r}, {w!r})",
        )


def theta(coeff, t, dt_hint=None):
    """Antiderivative ``theta(t) = int_0^t a(s) ds`` of a damping coefficient."""
    return coeff.theta(t, dt_hint)


@dataclass(frozen=True)
class ExponentialWeights:
    """The pair of step weights for ``[t_i, t_i + dt]``."""

    w_plus: float
    w_minus: float
    t_i: float
    dt: float

    @property
    def t_half(self):
        return self.t_i + 0.5 * self.dt


def exp_weights(coeff, t_i, dt):
    """Weights ``exp(int_{t+1/2}^{t+1} a)`` and ``exp(-int_t^{t+1/2} a)``."""
    if not dt > 0:
        raise ArgumentError(f"dt must be positive, got {dt!r}")
    t_half = t_i + 0.5 * dt
    upper = coeff.integral(t_half, t_i + dt, 0.5 * dt)
    lower = coeff.integral(t_i, t_half, 0.5 * dt)
    return ExponentialWeights(math.exp(upper), math.exp(-lower), float(t_i), float(dt))


def _pair(z_i, z_ip1):
    z_i = np.asarray(z_i, dtype=float)
    z_ip1 = np.asarray(z_ip1, dtype=float)
    if z_i.shape != z_ip1.shape:
        raise ArgumentError(f"shape mismatch: {z_i.shape} vs {z_ip1.shape}")
    return z_i, z_ip1


def op_A(w, z_i, z_ip1):
    """Weighted time average ``(w+ z^{i+1} + w- z^i) / 2``."""
    z_i, z_ip1 = _pair(z_i, z_ip1)
    return 0.5 * (w.w_plus * z_ip1 + w.w_minus * z_i)


def op_D(w, z_i, z_ip1):
    """Weighted time difference ``(w+ z^{i+1} - w- z^i) / dt``."""
    z_i, z_ip1 = _pair(z_i, z_ip1)
    return (w.w_plus * z_ip1 - w.w_minus * z_i) / w.dt


def product_rule_residual(coeff, t_i, dt, z_i, z_ip1, y_i, y_ip1):
    """Defect of the discrete product rule.

    Returns ``|D^{2a}[z.y] - (D^a z).(A^a y) - (A^a z).(D^a y)|``; zero up to
    rounding for a correct operator implementation.
    """
    z_i, z_ip1 = _pair(z_i, z_ip1)
    y_i, y_ip1 = _pair(y_i, y_ip1)
    if z_i.shape != y_i.shape:
        raise ArgumentError(f"shape mismatch: {z_i.shape} vs {y_i.shape}")
    w = exp_weights(coeff, t_i, dt)
    w2 = exp_weights(coeff.scaled(2.0), t_i, dt)
    lhs = op_D(w2, np.dot(z_i, y_i), np.dot(z_ip1, y_ip1))
    rhs = np.dot(op_D(w, z_i, z_ip1), op_A(w, y_i, y_ip1)) + np.dot(
        op_A(w, z_i, z_ip1), op_D(w, y_i, y_ip1)
    )
    return float(abs(lhs - rhs))


def expdiff_residual(coeff, t_i, dt, y_i, y_ip1):
    """Relative defect of ``delta_t^+(e^theta y) = e^{theta_{i+1/2}} D^a y``."""
    y_i, y_ip1 = _pair(y_i, y_ip1)
    th0 = coeff.theta(t_i)
    th1 = coeff.theta(t_i + dt)
    thh = coeff.theta(t_i + 0.5 * dt)
    lhs = (math.exp(th1) * y_ip1 - math.exp(th0) * y_i) / dt
    rhs = math.exp(thh) * op_D(exp_weights(coeff, t_i, dt), y_i, y_ip1)
    scale = (abs(math.exp(th1) * y_ip1) + abs(math.exp(th0) * y_i)) / dt
    return float(np.max(np.abs(lhs - rhs) / np.maximum(scale, np.finfo(float).tiny)))
