"""Damped Newton iteration used by every implicit step."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import ArgumentError, NewtonConvergenceError, SolverError

__all__ = ["NewtonConfig", "newton_solve", "linear_solve", "fd_jacobian"]


@dataclass(frozen=True)
class NewtonConfig:
    """Stopping rule and Jacobian source for implicit steps.

    ``tol`` bounds the infinity norm of the step residual. Step residuals
    are written in time-scaled form (the scheme equation multiplied by
    ``dt``), so ``tol`` is independent of the time step to leading order.
    """

    tol: float = 1e-12
    max_iter: int = 50
    jacobian: str = "analytic"

    def __post_init__(self):
        if not self.tol > 0:
            raise ArgumentError("tol must be positive")
        if int(self.max_iter) < 1:
            raise ArgumentError("max_iter must be at least 1")
        if self.jacobian not in ("analytic", "finite-difference"):
            raise ArgumentError(f"unknown jacobian mode {self.jacobian!r}")


def linear_solve(J, b):
    """Solve ``J x = b`` for dense or sparse ``J``; singular systems raise."""
    try:
        with warnings.catch_warnings(), np.errstate(divide="ignore", invalid="ignore"):
            warnings.simplefilter("error", scipy.sparse.linalg.MatrixRankWarning)
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            if scipy.sparse.issparse(J):
                x = scipy.sparse.linalg.splu(scipy.sparse.csc_matrix(J)).solve(b)
            else:
                x = scipy.linalg.solve(np.atleast_2d(J), b)
    except (RuntimeError, np.linalg.LinAlgError, scipy.linalg.LinAlgError,
            scipy.sparse.linalg.MatrixRankWarning, scipy.linalg.LinAlgWarning) as exc:
        raise SolverError(f"singular Jacobian: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("singular Jacobian: non-finite solution")
    return x


def fd_jacobian(residual, x, h=1e-7):
    """Dense forward-difference Jacobian; for small systems and tests."""
    x = np.asarray(x, dtype=float)
    r0 = residual(x)
    J = np.empty((r0.size, x.size))
    for j in range(x.size):
        step = h * max(1.0, abs(x[j]))
        xp = x.copy()
        xp[j] += step
        J[:, j] = (residual(xp) - r0) / step
    return J


def newton_solve(residual, jacobian, guess, cfg=None, full_output=False):
    """Find ``x`` with ``max|residual(x)| <= cfg.tol``.

    Newton steps are halved (at most 30 times) while the residual norm
    would grow. ``jacobian`` may return a dense array or a scipy sparse
    matrix; pass ``None`` for a finite-difference Jacobian.

    Returns
    -------
    x : ndarray
    info : dict
        Only when ``full_output``; keys ``iterations`` and ``residual``.

    Raises
    ------
    NewtonConvergenceError
        ``max_iter`` exhausted or no descent possible. Carries the best
        iterate found.
    SolverError
        Singular Jacobian.
    """
    cfg = cfg or NewtonConfig()
    x = np.array(guess, dtype=float, copy=True)
    shape = x.shape
    x = x.ravel()

    def F(v):
        return np.asarray(residual(v.reshape(shape)), dtype=float).ravel()

    if jacobian is None or cfg.jacobian == "finite-difference":
        def jac(v):
            return fd_jacobian(F, v)
    else:
        def jac(v):
            return jacobian(v.reshape(shape))

    r = F(x)
    norm = np.max(np.abs(r)) if r.size else 0.0
    it = 0
    while not norm <= cfg.tol:
        if it >= cfg.max_iter:
            raise NewtonConvergenceError(
                f"Newton did not converge in {it} iterations (residual {norm:.3e})",
                x.reshape(shape), norm, it)
        dx = linear_solve(jac(x), r)
        lam = 1.0
        for _ in range(31):
            xn = x - lam * dx
            rn = F(xn)
            nn = np.max(np.abs(rn))
            if nn < norm or nn <= cfg.tol:
                break
            lam *= 0.5
        else:
            raise NewtonConvergenceError(
                f"Newton stalled after {it} iterations (residual {norm:.3e})",
                x.reshape(shape), norm, it)
        x, r, norm = xn, rn, nn
        it += 1
    x = x.reshape(shape)
    if full_output:
        return x, {"iterations": it, "residual": float(norm)}
    return x
