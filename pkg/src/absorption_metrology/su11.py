"""SU(1,1) time-reversal readout: OPA, sample, reversed OPA, total photon count.

Output modes are linear in the vacuum inputs ``a_in``, ``b_in`` and the loss
mode ``c``::

    a_out = c11 a_in + c12 b_in^dag + c13 c
    b_out = c21 a_in^dag + c22 b_in + c23 c^dag

Throughout, ``eta = 1 - sqrt(1 - alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .gaussian import GaussianState, correlated_covariance


def _check_alpha(alpha: float):
    if not 0.0 <= alpha <= 1.0:
        raise PreconditionError(f"alpha must lie in [0, 1], got {alpha}")


def eta(alpha: float) -> float:
    """``1 - sqrt(1 - alpha)`` without cancellation at small ``alpha``."""
    return alpha / (1.0 + math.sqrt(1.0 - alpha))


@dataclass(frozen=True)
class Su11Coefficients:
    c11: complex
    c12: complex
    c13: complex
    c21: complex
    c22: complex
    c23: complex

    def commutators(self) -> tuple[float, float]:
        """``[a_out, a_out^dag]`` and ``[b_out, b_out^dag]``; both equal 1."""
        a = abs(self.c11) ** 2 - abs(self.c12) ** 2 + abs(self.c13) ** 2
        b = abs(self.c22) ** 2 - abs(self.c21) ** 2 - abs(self.c23) ** 2
        return a, b


@dataclass(frozen=True)
class Su11Report:
    mean_out: float
    variance_out: float
    dmean_dalpha: float
    delta_alpha: float


def coefficients(r: float, phi: float, alpha: float) -> Su11Coefficients:
    _check_alpha(alpha)
    ch, sh = math.cosh(r), math.sinh(r)
    u = math.sqrt(1.0 - alpha)
    e = complex(math.cos(phi), math.sin(phi))
    et = eta(alpha)
    return Su11Coefficients(
        c11=complex(u * ch**2 - sh**2),
        c12=-et * e * ch * sh,
        c13=complex(ch * math.sqrt(alpha)),
        c21=et * e * ch * sh,
        c22=complex(ch**2 - u * sh**2),
        c23=-e * sh * math.sqrt(alpha),
    )


def mean_photons(r: float, alpha: float) -> float:
    """``2 sinh^2 r cosh^2 r eta^2 + alpha sinh^2 r``."""
    _check_alpha(alpha)
    sh2, ch2 = math.sinh(r) ** 2, math.cosh(r) ** 2
    return 2 * sh2 * ch2 * eta(alpha) ** 2 + alpha * sh2


def mean_photons_from_coefficients(c: Su11Coefficients) -> float:
    return abs(c.c12) ** 2 + abs(c.c21) ** 2 + abs(c.c23) ** 2


def variance_from_coefficients(c: Su11Coefficients) -> float:
    return (
        abs(c.c12) ** 2 * (abs(c.c11) ** 2 + abs(c.c13) ** 2 + abs(c.c22) ** 2)
        + abs(c.c22) ** 2 * abs(c.c23) ** 2
        + 2 * abs(c.c12 * c.c22 * (c.c11 * c.c21 + c.c13 * c.c23))
    )


def variance_eta_form(r: float, alpha: float) -> float:
    """Variance of the total count written in ``eta``.

    The bracketed polynomial is the variance per probe photon; the overall
    ``sinh^2 r`` restores photons^2.
    """
    _check_alpha(alpha)
    sh2, ch2 = math.sinh(r) ** 2, math.cosh(r) ** 2
    et = eta(alpha)
    per_photon = (
        et**2 * ch2 * (2 * et - 1 + 3 * et**2 * ch2 * sh2)
        + 2 * alpha * et * ch2 * (1 + et * sh2)
        + (1 + et * sh2) ** 2 * (2 * et * ch2 - alpha * sh2)
    )
    return sh2 * per_photon


def variance_photons(r: float, alpha: float) -> float:
    _check_alpha(alpha)
    return max(variance_from_coefficients(coefficients(r, 0.0, alpha)), 0.0)


def dmean_dalpha(r: float, alpha: float) -> float:
    if not 0.0 <= alpha < 1.0:
        raise PreconditionError(f"derivative is singular at alpha = 1 (got {alpha})")
    sh2, ch2 = math.sinh(r) ** 2, math.cosh(r) ** 2
    et = eta(alpha)
    return 2 * ch2 * sh2 * et / (1 - et) + sh2


def sensitivity(r: float, alpha: float) -> float:
    """``Delta alpha = Delta N_out / |d N_out / d alpha|``."""
    if not 0.0 < alpha < 1.0:
        raise PreconditionError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    slope = dmean_dalpha(r, alpha)
    if slope == 0.0:
        raise PreconditionError("no photons enter the interferometer (r = 0)")
    return math.sqrt(variance_photons(r, alpha)) / abs(slope)


def sensitivity_ab(nbar: float, alpha: float) -> float:
    """The same sensitivity as ``sqrt(A) / B`` in terms of ``nbar`` and ``eta``."""
    if not 0.0 < alpha < 1.0:
        raise PreconditionError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    if not nbar > 0:
        raise PreconditionError(f"nbar must be positive, got {nbar}")
    et = eta(alpha)
    n1 = nbar + 1
    A = (
        et**2 * n1 * (2 * et - 1 + 3 * et**2 * n1 * nbar)
        + 2 * alpha * et * n1 * (1 + et * nbar)
        + (1 + et * nbar) ** 2 * (2 * et * n1 - alpha * nbar)
    )
    B = math.sqrt(nbar) * (1 + 2 * et / math.sqrt(1 - alpha) * n1)
    return math.sqrt(A) / B


def small_alpha_expansion(r: float, alpha: float) -> float:
    """Truncated weak-absorption series whose leading term is ``sqrt(alpha / nbar)``."""
    n = math.sinh(r) ** 2
    if n <= 0:
        raise PreconditionError("the expansion needs nbar > 0")
    a = alpha
    num = math.sqrt(a) * (
        1 + a * n + a**3 * n**3 / 8 + a / 2 * (1 + a * n / 2 + a**2 * n**2 / 2)
    )
    den = math.sqrt(n) * (1 + a * n + a * (1 + 0.75 * a * n))
    return num / den


def report(r: float, alpha: float) -> Su11Report:
    return Su11Report(
        mean_out=mean_photons(r, alpha),
        variance_out=variance_photons(r, alpha),
        dmean_dalpha=dmean_dalpha(r, alpha),
        delta_alpha=sensitivity(r, alpha),
    )


def output_state(r: float, phi: float, alpha: float) -> GaussianState:
    """Closed-form output moments after the reversed OPA."""
    _check_alpha(alpha)
    sh, ch = math.sinh(r), math.cosh(r)
    et = eta(alpha)
    n_a = sh**2 * ch**2 * et**2
    n_b = n_a + alpha * sh**2
    pair = -np.exp(1j * phi) * sh * ch * et * (ch**2 - sh**2 * math.sqrt(1 - alpha))
    return GaussianState(np.zeros(4), correlated_covariance(n_a, n_b, pair))


def output_dsigma(r: float, phi: float, alpha: float) -> np.ndarray:
    """Derivative in ``alpha`` of :func:`output_state`'s covariance."""
    if not 0.0 <= alpha < 1.0:
        raise PreconditionError(f"derivative is singular at alpha = 1 (got {alpha})")
    sh, ch = math.sinh(r), math.cosh(r)
    u = math.sqrt(1 - alpha)
    et = eta(alpha)
    dn_a = sh**2 * ch**2 * et / u
    dn_b = dn_a + sh**2
    dpair = -np.exp(1j * phi) * sh * ch * (ch**2 - sh**2 * (2 * u - 1)) / (2 * u)
    return correlated_covariance(dn_a, dn_b, dpair, offset=0.0)
