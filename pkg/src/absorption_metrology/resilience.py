"""Extra input loss ``alpha0`` on both beams before the sample.

The coherent comparison sends ``nbar`` photons through the same ``alpha0``, so
``(1 - alpha0) nbar`` photons reach the sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .errors import PreconditionError
from .gaussian import (
    Direction,
    GaussianState,
    LossParams,
    Mode,
    SqueezerParams,
    apply_loss,
    apply_squeezer,
    coherent,
    nbar_to_r,
    photon_number_moments,
    vacuum,
)
from .qfi import DEFAULT_SCHEDULE, DerivativeMode, LimitSchedule, QfiProblem, qfi, qfi_with_displacement

#: Below this QFI neither probe carries information and the ratio is reported as 0 dB.
QFI_FLOOR = 1e-12


@dataclass(frozen=True)
class LossyProtocolConfig:
    nbar: float
    alpha: float
    alpha0: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not self.nbar >= 0:
            raise PreconditionError(f"nbar must be >= 0, got {self.nbar}")
        if not 0.0 < self.alpha < 1.0:
            raise PreconditionError(f"alpha must lie strictly inside (0, 1), got {self.alpha}")
        if not 0.0 <= self.alpha0 <= 1.0:
            raise PreconditionError(f"alpha0 must lie in [0, 1], got {self.alpha0}")

    @property
    def r(self) -> float:
        return nbar_to_r(self.nbar)


def lossy_tmsv_state(config: LossyProtocolConfig, alpha: float | None = None) -> GaussianState:
    """OPA output after ``alpha0`` on both modes and the sample on the probe."""
    alpha = config.alpha if alpha is None else alpha
    state = apply_squeezer(vacuum(), SqueezerParams(config.r, config.phi))
    state = apply_loss(state, LossParams(Mode.PROBE, config.alpha0))
    state = apply_loss(state, LossParams(Mode.ANCILLA, config.alpha0))
    return apply_loss(state, LossParams(Mode.PROBE, alpha))


def lossy_coherent_state(config: LossyProtocolConfig, alpha: float | None = None) -> GaussianState:
    alpha = config.alpha if alpha is None else alpha
    state = coherent(math.sqrt(config.nbar))
    state = apply_loss(state, LossParams(Mode.PROBE, config.alpha0))
    return apply_loss(state, LossParams(Mode.PROBE, alpha))


def time_reversed_state(config: LossyProtocolConfig, alpha: float | None = None) -> GaussianState:
    state = lossy_tmsv_state(config, alpha)
    return apply_squeezer(state, SqueezerParams(config.r, config.phi, Direction.REVERSED))


def qfi_tmsv(config: LossyProtocolConfig, schedule: LimitSchedule = DEFAULT_SCHEDULE) -> float:
    return qfi(QfiProblem(partial(lossy_tmsv_state, config), config.alpha), schedule)


def qfi_coherent(config: LossyProtocolConfig, schedule: LimitSchedule = DEFAULT_SCHEDULE) -> float:
    """Full Gaussian QFI of the lossy coherent probe, dominated by the displacement term."""
    problem = QfiProblem(
        partial(lossy_coherent_state, config),
        config.alpha,
        DerivativeMode.ANALYTIC,
        analytic_dsigma=lambda _: np.zeros((4, 4)),
    )
    beta = math.sqrt(config.nbar * (1 - config.alpha0))
    slope = -beta / (2 * math.sqrt(1 - config.alpha))
    return qfi_with_displacement(problem, np.array([slope, 0.0, slope, 0.0]), schedule)


def qfi_ratio_db(config: LossyProtocolConfig, schedule: LimitSchedule = DEFAULT_SCHEDULE) -> float:
    """``10 log10(QFI_tmsv / QFI_coherent)``."""
    f_tmsv = qfi_tmsv(config, schedule)
    f_coh = qfi_coherent(config, schedule)
    if f_coh < QFI_FLOOR or f_tmsv < QFI_FLOOR:
        if f_coh < QFI_FLOOR and f_tmsv < QFI_FLOOR:
            return 0.0
        return math.inf if f_coh < QFI_FLOOR else -math.inf
    return 10 * math.log10(f_tmsv / f_coh)


def tr_sensitivity_with_loss(config: LossyProtocolConfig) -> float:
    """Time-reversal ``Delta N / |dN/dalpha|`` with ``alpha0`` before the sample.

    The slope of the mean is a central difference with step ``1e-6 max(1, alpha)``.
    """
    alpha = config.alpha
    h = 1e-6 * max(1.0, alpha)
    if alpha - h < 0 or alpha + h > 1:
        raise PreconditionError("alpha too close to the boundary for the difference step")
    _, variance = photon_number_moments(time_reversed_state(config))
    hi, _ = photon_number_moments(time_reversed_state(config, alpha + h))
    lo, _ = photon_number_moments(time_reversed_state(config, alpha - h))
    slope = (hi - lo) / (2 * h)
    if not math.isfinite(slope) or slope == 0.0:
        raise PreconditionError(f"mean photon number has no usable slope ({slope!r})")
    return math.sqrt(max(variance, 0.0)) / abs(slope)


def coherent_baseline(config: LossyProtocolConfig) -> float:
    surviving = (1 - config.alpha0) * config.nbar
    if not surviving > 0:
        raise PreconditionError("no coherent photons reach the sample")
    return math.sqrt((1 - config.alpha) / surviving)
