"""Quantum Fisher information of a one-parameter Gaussian family.

The covariance contribution is

    F = lim_{v -> 1} 1/2 vec(dsigma)^dagger M(v)^{-1} vec(dsigma),
    M(v) = v^2 conj(sigma) (x) sigma - K (x) K,

with ``vec`` stacking columns. ``M(1)`` is singular whenever a symplectic
eigenvalue equals one, which is the case for every state obtained from a pure
state by loss on a single mode. In that case ``vec(dsigma)`` lies in the range
of ``M(1)`` and the limit equals the solve restricted to that range (Schur
complement of the null block is O(1 - v^2)). Richardson extrapolation over a
schedule of ``v < 1`` is kept as an alternative route.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError, PreconditionError, SingularMatrixError
from .gaussian import K, GaussianState

_KK = np.kron(K, K)

#: Eigenvalues of ``M(1)`` below this fraction of the largest are treated as null.
NULL_RCOND = 1e-11
#: Largest admissible weight of ``vec(dsigma)`` on the null space of ``M(1)``.
NULL_LEAKAGE = 1e-6
#: Null-space weight below this multiple of ``max|sigma|`` is difference-quotient noise.
NOISE_FLOOR = 1e-8


class DerivativeMode(enum.Enum):
    ANALYTIC = "analytic"
    CENTRAL_DIFFERENCE = "central"


@dataclass(frozen=True)
class QfiProblem:
    """A state family ``alpha -> GaussianState`` evaluated at ``alpha``."""

    state_at: Callable[[float], GaussianState]
    alpha: float
    derivative_mode: DerivativeMode = DerivativeMode.CENTRAL_DIFFERENCE
    analytic_dsigma: Optional[Callable[[float], np.ndarray]] = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise PreconditionError(f"alpha must lie strictly inside (0, 1), got {self.alpha}")
        if self.derivative_mode is DerivativeMode.ANALYTIC and self.analytic_dsigma is None:
            raise PreconditionError("analytic derivative mode needs analytic_dsigma")


@dataclass(frozen=True)
class LimitSchedule:
    """How the ``v -> 1`` limit is taken when ``M(1)`` is ill conditioned.

    Args:
        v_values: regularization values increasing toward 1, used when
            ``extrapolate`` is set.
        extrapolate: use polynomial extrapolation in ``1 - v`` instead of the
            range-restricted solve at ``v = 1``.
        condition_cap: condition number below which ``M(1)`` is inverted directly.
    """

    v_values: tuple = (1 - 1e-3, 1 - 5e-4, 1 - 2.5e-4)
    extrapolate: bool = False
    condition_cap: float = 1e10

    def __post_init__(self):
        v = np.asarray(self.v_values, dtype=float)
        if v.size == 0 or np.any(v <= 0) or np.any(v > 1) or np.any(np.diff(v) <= 0):
            raise PreconditionError("v_values must increase strictly within (0, 1]")
        if not self.condition_cap > 0:
            raise PreconditionError("condition_cap must be positive")


DEFAULT_SCHEDULE = LimitSchedule()


def build_M(sigma, v: float) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=complex)
    return v**2 * np.kron(sigma.conj(), sigma) - _KK


def vec(matrix) -> np.ndarray:
    """Stack the columns of ``matrix`` left to right."""
    return np.asarray(matrix).reshape(-1, order="F")


def _step(alpha: float, scale: float) -> float:
    return scale * max(1.0, alpha)


def dsigma_dalpha(problem: QfiProblem, alpha: Optional[float] = None) -> np.ndarray:
    alpha = problem.alpha if alpha is None else alpha
    if problem.derivative_mode is DerivativeMode.ANALYTIC:
        return np.asarray(problem.analytic_dsigma(alpha), dtype=complex)
    h = _step(alpha, 1e-6)
    hi = problem.state_at(alpha + h).covariance
    lo = problem.state_at(alpha - h).covariance
    return (hi - lo) / (2 * h)


def ddisplacement_dalpha(problem: QfiProblem) -> np.ndarray:
    """Central-difference derivative of the displacement vector."""
    alpha = problem.alpha
    h = _step(alpha, 1e-6)
    return (problem.state_at(alpha + h).displacement - problem.state_at(alpha - h).displacement) / (2 * h)


def _quadratic_form(M, x) -> float:
    return 0.5 * float(np.real(np.vdot(x, np.linalg.solve(M, x))))


def _range_restricted(M, x, scale) -> float:
    w, U = np.linalg.eigh((M + M.conj().T) / 2)
    y = U.conj().T @ x
    null = np.abs(w) <= NULL_RCOND * np.abs(w).max()
    allowed = NULL_LEAKAGE * np.linalg.norm(x) + NOISE_FLOOR * scale
    if null.any() and np.linalg.norm(y[null]) > allowed:
        raise SingularMatrixError("derivative has weight on the null space of M; the limit diverges")
    keep = ~null
    return 0.5 * float(np.sum(np.abs(y[keep]) ** 2 / w[keep]))


def _richardson(values, steps):
    """Neville extrapolation of ``values(steps)`` to step zero.

    Returns the list of successive extrapolants of increasing order.
    """
    table = list(values)
    estimates = [table[-1]]
    n = len(table)
    for order in range(1, n):
        for i in range(n - order):
            h_lo, h_hi = steps[i], steps[i + order]
            table[i] = (h_lo * table[i + 1] - h_hi * table[i]) / (h_lo - h_hi)
        estimates.append(table[n - order - 1])
    return estimates


def covariance_qfi(sigma, dsigma, schedule: LimitSchedule = DEFAULT_SCHEDULE) -> float:
    """Covariance term of the QFI for given ``sigma`` and ``dsigma``."""
    x = vec(dsigma)
    if not np.any(x):
        return 0.0
    M1 = build_M(sigma, 1.0)
    if np.linalg.cond(M1) < schedule.condition_cap:
        return max(_quadratic_form(M1, x), 0.0)
    if not schedule.extrapolate:
        return max(_range_restricted(M1, x, np.abs(sigma).max()), 0.0)

    values, steps = [], []
    for v in schedule.v_values:
        M = build_M(sigma, v)
        if np.linalg.cond(M) < schedule.condition_cap:
            values.append(_quadratic_form(M, x))
            steps.append(1.0 - v)
    if not values:
        raise SingularMatrixError("M is ill conditioned at every scheduled v")
    estimates = _richardson(values, steps)
    if len(estimates) > 1:
        prev, last = estimates[-2], estimates[-1]
        if abs(last - prev) > 1e-6 * abs(last):
            raise ConvergenceError(
                f"extrapolants {prev!r} and {last!r} differ by more than 1e-6 relative"
            )
    return max(estimates[-1], 0.0)


def qfi(problem: QfiProblem, schedule: LimitSchedule = DEFAULT_SCHEDULE) -> float:
    """QFI of a family whose displacement does not depend on ``alpha``."""
    sigma = problem.state_at(problem.alpha).covariance
    return covariance_qfi(sigma, dsigma_dalpha(problem), schedule)


def qfi_with_displacement(
    problem: QfiProblem,
    ddisp_dalpha=None,
    schedule: LimitSchedule = DEFAULT_SCHEDULE,
) -> float:
    """QFI including the displacement term ``2 dd^dagger sigma^{-1} dd``.

    Args:
        problem: the state family.
        ddisp_dalpha: derivative of the displacement vector; estimated by
            central differences when omitted.
        schedule: limit handling for the covariance term.
    """
    sigma = problem.state_at(problem.alpha).covariance
    if ddisp_dalpha is None:
        ddisp_dalpha = ddisplacement_dalpha(problem)
    dd = np.asarray(ddisp_dalpha, dtype=complex)
    term = 2.0 * float(np.real(np.vdot(dd, np.linalg.solve(sigma, dd))))
    return covariance_qfi(sigma, dsigma_dalpha(problem), schedule) + term
