"""Photon-counting statistics of a photon-correlated probe and ancilla.

An ancilla count ``m`` heralds an ``m``-photon Fock state in the probe. After the
sample the probe count ``n`` is binomial with survival probability
``1 - alpha``, so the joint table is ``p[m, n] = w_m C(m, n) (1-alpha)^n alpha^(m-n)``
where ``w_m`` is the ancilla photon-number distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import DistributionError, PreconditionError

PROBABILITY_FLOOR = 1e-300
MASS_DEFICIT_TOL = 1e-9
_LOG_DOMAIN_ABOVE = 50


def _check_open(alpha: float):
    if not 0.0 < alpha < 1.0:
        raise PreconditionError(f"alpha must lie strictly inside (0, 1), got {alpha}")


def _check_closed(alpha: float):
    if not 0.0 <= alpha <= 1.0:
        raise PreconditionError(f"alpha must lie in [0, 1], got {alpha}")


@dataclass(frozen=True)
class TmsvCoefficients:
    """Ancilla photon-number weights ``|c_m|^2`` of a two-mode squeezed vacuum."""

    r: float
    phi: float
    weights: np.ndarray
    tail_mass: float

    @property
    def ratio(self) -> float:
        return float(np.tanh(self.r) ** 2)

    @property
    def n_max(self) -> int:
        return len(self.weights) - 1

    def amplitudes(self) -> np.ndarray:
        """Complex ``c_m = e^{i m phi} tanh(r)^m / cosh(r)``."""
        m = np.arange(len(self.weights))
        return np.exp(1j * m * self.phi) * np.tanh(self.r) ** m / np.cosh(self.r)

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.weights)), self.weights))


@dataclass(frozen=True)
class PhotonCorrelatedMixture:
    """Diagonal mixture ``sum_m p_m |m, m><m, m|``; needs no entanglement."""

    weights: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0):
            raise DistributionError("mixture weights must be nonnegative")
        if abs(w.sum() + self.tail_mass - 1.0) > 1e-12:
            raise DistributionError(f"mixture weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "weights", w)

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.weights)), self.weights))


@dataclass(frozen=True)
class JointPhotonDistribution:
    """Table ``p[m, n]`` over ancilla count ``m`` and probe count ``n <= m``."""

    table: np.ndarray
    alpha: float
    tail_mass: float

    def probe_mean(self) -> float:
        return float(np.sum(self.table * np.arange(self.table.shape[1])[None, :]))

    def ancilla_marginal(self) -> np.ndarray:
        return self.table.sum(axis=1)


def _tail_first_moment(q: float, m_max: int) -> float:
    """``sum_{m > m_max} m (1 - q) q^m`` in closed form."""
    return q ** (m_max + 1) * (m_max + 1 + q / (1 - q))


def tmsv_weights(r: float, tail_tol: float = 1e-12, phi: float = 0.0) -> TmsvCoefficients:
    """Geometric weights ``(1 - q) q^m`` with ``q = tanh^2 r``.

    The cutoff is the smallest ``m_max`` whose discarded first moment, and hence
    also the discarded mass, is below ``tail_tol``.
    """
    if r < 0:
        raise PreconditionError(f"squeezing strength must be >= 0, got {r}")
    if not tail_tol > 0:
        raise PreconditionError("tail_tol must be positive")
    q = float(np.tanh(r) ** 2)
    if q == 0.0:
        return TmsvCoefficients(r, phi, np.ones(1), 0.0)
    # first guess from q^(m+1) < tol, then walk forward on the exact bound
    m_max = max(0, int(math.log(tail_tol) / math.log(q)))
    while _tail_first_moment(q, m_max) >= tail_tol:
        m_max += 1
    m = np.arange(m_max + 1)
    weights = (1 - q) * np.exp(m * math.log(q))
    return TmsvCoefficients(r, phi, weights, q ** (m_max + 1))


def binomial_loss(m: int, alpha: float) -> np.ndarray:
    """Probe count distribution ``p_n^{(m)}`` for ``n = 0..m`` after loss ``alpha``."""
    _check_closed(alpha)
    if m < 0:
        raise PreconditionError("photon number must be nonnegative")
    return _binomial_rows(np.array([m]), alpha, m + 1)[0, : m + 1]


def _binomial_rows(ms, alpha: float, width: int) -> np.ndarray:
    """Rows ``C(m, n)(1-alpha)^n alpha^(m-n)`` for each ``m`` in ``ms``, zero for ``n > m``."""
    ms = np.asarray(ms)
    n = np.arange(width)[None, :]
    m = ms[:, None]
    valid = n <= m
    k = np.where(valid, m - n, 0)
    nn = np.where(valid, n, 0)
    out = np.zeros((len(ms), width))

    small = (m <= _LOG_DOMAIN_ABOVE) & valid
    if small.any():
        rows, cols = np.nonzero(small)
        comb = np.array([math.comb(int(ms[i]), int(j)) for i, j in zip(rows, cols)], dtype=float)
        out[rows, cols] = comb * (1 - alpha) ** cols * alpha ** (ms[rows] - cols)

    large = (m > _LOG_DOMAIN_ABOVE) & valid
    if large.any():
        logp = (
            gammaln(m + 1.0)
            - gammaln(nn + 1.0)
            - gammaln(k + 1.0)
            + xlogy(nn, 1 - alpha)
            + xlogy(k, alpha)
        )
        out[large] = np.exp(np.broadcast_to(logp, out.shape)[large])
    return out


def joint_distribution(coeffs, alpha: float) -> JointPhotonDistribution:
    """Joint counting table for a TMSV or any photon-correlated mixture."""
    _check_closed(alpha)
    w = np.asarray(coeffs.weights, dtype=float)
    ms = np.arange(len(w))
    table = w[:, None] * _binomial_rows(ms, alpha, len(w))
    return JointPhotonDistribution(table, alpha, float(coeffs.tail_mass))


def joint_distribution_derivative(coeffs, alpha: float) -> np.ndarray:
    """``d p[m, n] / d alpha = p[m, n] ((m - n)/alpha - n/(1 - alpha))``."""
    _check_open(alpha)
    p = joint_distribution(coeffs, alpha).table
    m = np.arange(p.shape[0])[:, None]
    n = np.arange(p.shape[1])[None, :]
    return p * ((m - n) / alpha - n / (1 - alpha))


class FisherResult(NamedTuple):
    value: float
    dropped_mass: float


def fisher_information(
    probabilities: Callable[[float], np.ndarray],
    alpha: float,
    derivative: Optional[Callable[[float], np.ndarray]] = None,
    full_output: bool = False,
):
    """Classical Fisher information ``sum_j (dP_j/dalpha)^2 / P_j``.

    Args:
        probabilities: maps ``alpha`` to an array of outcome probabilities.
        alpha: point of evaluation.
        derivative: analytic ``dP/dalpha``; central differences with step
            ``1e-7 max(1, alpha)`` are used otherwise.
        full_output: also return the mass of outcomes skipped below
            :data:`PROBABILITY_FLOOR`.
    """
    P = np.asarray(probabilities(alpha), dtype=float)
    if np.any(P < 0):
        raise DistributionError("negative probability")
    if 1.0 - P.sum() > MASS_DEFICIT_TOL:
        raise DistributionError(f"probabilities are missing {1.0 - P.sum():.3e} of mass")
    if derivative is not None:
        dP = np.asarray(derivative(alpha), dtype=float)
    else:
        h = 1e-7 * max(1.0, alpha)
        dP = (np.asarray(probabilities(alpha + h)) - np.asarray(probabilities(alpha - h))) / (2 * h)
    keep = P > PROBABILITY_FLOOR
    value = float(np.sum(dP[keep] ** 2 / P[keep]))
    if full_output:
        return FisherResult(value, float(P[~keep].sum()))
    return value


def counting_fisher(coeffs, alpha: float) -> float:
    """Fisher information of joint probe/ancilla photon counting."""
    _check_open(alpha)
    return fisher_information(
        lambda a: joint_distribution(coeffs, a).table,
        alpha,
        derivative=lambda a: joint_distribution_derivative(coeffs, a),
    )


def fock_qfi(m: int, alpha: float) -> float:
    _check_open(alpha)
    return m / (alpha * (1 - alpha))


def ancilla_bound(nbar: float, alpha: float) -> float:
    """Single-shot bound ``sqrt(alpha (1 - alpha) / nbar)`` of joint counting."""
    _check_open(alpha)
    if not nbar > 0:
        raise PreconditionError(f"nbar must be positive, got {nbar}")
    return math.sqrt(alpha * (1 - alpha) / nbar)


def standard_limit(nbar1: float, alpha: float) -> float:
    """Coherent-probe uncertainty ``sqrt((1 - alpha) / nbar1)``."""
    _check_closed(alpha)
    if not nbar1 > 0:
        raise PreconditionError(f"nbar1 must be positive, got {nbar1}")
    return math.sqrt((1 - alpha) / nbar1)


def mixture_fisher(mixture: PhotonCorrelatedMixture, alpha: float) -> float:
    _check_open(alpha)
    return mixture.mean() / (alpha * (1 - alpha))
