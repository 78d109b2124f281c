"""Monte Carlo check of the Cramér-Rao bound for joint photon counting.

Each trial draws ``shots`` ancilla counts from the geometric TMSV statistics,
thins them binomially through the sample, and estimates ``alpha`` by maximum
likelihood. Randomness comes from Philox streams spawned from one
``SeedSequence``, one stream per trial, so results do not depend on scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterator, NamedTuple

import numpy as np
from scipy.optimize import brentq

from .errors import NotEstimableError, PreconditionError

ALPHA_FLOOR = 1e-6
ALPHA_CEIL = 1 - 1e-6


@dataclass(frozen=True)
class ExperimentConfig:
    nbar: float
    alpha_true: float
    shots: int = 10_000
    trials: int = 200
    seed: int = 42

    def __post_init__(self):
        if not self.nbar >= 0:
            raise PreconditionError(f"nbar must be >= 0, got {self.nbar}")
        if not 0.0 <= self.alpha_true <= 1.0:
            raise PreconditionError(f"alpha_true must lie in [0, 1], got {self.alpha_true}")
        if self.shots < 1 or self.trials < 1:
            raise PreconditionError("shots and trials must be positive")
        if not 0 <= self.seed < 2**64:
            raise PreconditionError("seed must be a 64-bit unsigned integer")


class CountRecord(NamedTuple):
    ancilla_m: int
    probe_n: int


@dataclass(frozen=True)
class Counts:
    """Column storage for many :class:`CountRecord` values."""

    ancilla: np.ndarray
    probe: np.ndarray

    def __len__(self):
        return len(self.ancilla)

    def __iter__(self) -> Iterator[CountRecord]:
        for m, n in zip(self.ancilla, self.probe):
            yield CountRecord(int(m), int(n))

    @classmethod
    def from_records(cls, records) -> Counts:
        records = list(records)
        m = np.array([rec[0] for rec in records], dtype=np.int64)
        n = np.array([rec[1] for rec in records], dtype=np.int64)
        if np.any(n < 0) or np.any(n > m):
            raise PreconditionError("every record needs 0 <= n <= m")
        return cls(m, n)


@dataclass(frozen=True)
class CrlbReport:
    alpha_true: float
    nbar: float
    shots: int
    trials: int
    seed: int
    mean_estimate: float
    empirical_variance: float
    crlb: float
    ratio: float
    clamp_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def trial_generators(seed: int, count: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def _draw(nbar: float, alpha: float, shots: int, rng: np.random.Generator) -> Counts:
    q = nbar / (nbar + 1.0)  # tanh^2 r
    if q == 0.0:
        m = np.zeros(shots, dtype=np.int64)
    else:
        # inverse CDF of P(m) = (1 - q) q^m: P(M >= m) = q^m
        u = 1.0 - rng.random(shots)  # in (0, 1]
        m = np.floor(np.log(u) / math.log(q)).astype(np.int64)
    n = rng.binomial(m, 1.0 - alpha)
    return Counts(m, n)


def sample_counts(config: ExperimentConfig, trial: int = 0) -> Counts:
    """Counts of one trial; trial ``k`` uses the ``k``-th spawned stream."""
    rng = trial_generators(config.seed, trial + 1)[trial]
    return _draw(config.nbar, config.alpha_true, config.shots, rng)


def _as_counts(records) -> Counts:
    return records if isinstance(records, Counts) else Counts.from_records(records)


def log_likelihood(records, alpha: float, nbar: float) -> float:
    """Log-likelihood of the counts, dropping the binomial coefficients."""
    c = _as_counts(records)
    lost = float(np.sum(c.ancilla - c.probe))
    kept = float(np.sum(c.probe))
    q = nbar / (nbar + 1.0)
    ancilla_term = float(np.sum(c.ancilla)) * math.log(q) if q > 0 else 0.0
    return lost * math.log(alpha) + kept * math.log1p(-alpha) + len(c) * math.log1p(-q) + ancilla_term


def mle_unclamped(records) -> float:
    c = _as_counts(records)
    total = int(np.sum(c.ancilla))
    if total == 0:
        raise NotEstimableError("no photons were heralded; alpha is not estimable")
    return float(np.sum(c.ancilla - c.probe)) / total


def mle(records, nbar: float | None = None) -> float:
    """Maximum-likelihood ``alpha``: the fraction of heralded photons that were lost.

    The photon-number weights do not depend on ``alpha``, so ``nbar`` does not
    enter the estimate; it is accepted for symmetry with :func:`log_likelihood`.
    """
    return min(max(mle_unclamped(records), ALPHA_FLOOR), ALPHA_CEIL)


def score(records, alpha: float) -> float:
    """Derivative of :func:`log_likelihood` in ``alpha``."""
    c = _as_counts(records)
    lost = float(np.sum(c.ancilla - c.probe))
    kept = float(np.sum(c.probe))
    return lost / alpha - kept / (1 - alpha)


def mle_search(records, nbar: float) -> float:
    """Numerical maximizer of :func:`log_likelihood`, used to validate :func:`mle`.

    The likelihood is concave in ``alpha``, so the maximizer is the root of the
    score, or the clamp on whichever side the score points to. ``nbar`` only
    shifts the likelihood by a constant.
    """
    c = _as_counts(records)
    if int(np.sum(c.ancilla)) == 0:
        raise NotEstimableError("no photons were heralded; alpha is not estimable")
    lo, hi = score(c, ALPHA_FLOOR), score(c, ALPHA_CEIL)
    if lo <= 0:
        return ALPHA_FLOOR
    if hi >= 0:
        return ALPHA_CEIL
    return float(brentq(lambda a: score(c, a), ALPHA_FLOOR, ALPHA_CEIL, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def _trial(config: ExperimentConfig, rng: np.random.Generator) -> tuple[float, bool]:
    counts = _draw(config.nbar, config.alpha_true, config.shots, rng)
    raw = mle_unclamped(counts)
    est = min(max(raw, ALPHA_FLOOR), ALPHA_CEIL)
    return est, est != raw


def crlb_check(config: ExperimentConfig, workers: int = 1) -> CrlbReport:
    """Compare the spread of the MLE across trials with ``1 / (N F)``.

    ``F = nbar / (alpha (1 - alpha))`` is taken in closed form so the check does
    not share code with the numerical Fisher routines.
    """
    if not 0.0 < config.alpha_true < 1.0:
        raise PreconditionError("the Cramér-Rao bound needs alpha_true strictly inside (0, 1)")
    if not config.nbar > 0:
        raise NotEstimableError("nbar = 0 heralds no photons")
    rngs = trial_generators(config.seed, config.trials)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda g: _trial(config, g), rngs))
    else:
        results = [_trial(config, g) for g in rngs]
    estimates = np.array([est for est, _ in results])
    clamps = sum(clamped for _, clamped in results)
    fisher = config.nbar / (config.alpha_true * (1 - config.alpha_true))
    crlb = 1.0 / (config.shots * fisher)
    variance = float(np.var(estimates, ddof=1)) if config.trials > 1 else 0.0
    return CrlbReport(
        alpha_true=config.alpha_true,
        nbar=config.nbar,
        shots=config.shots,
        trials=config.trials,
        seed=config.seed,
        mean_estimate=float(np.mean(estimates)),
        empirical_variance=variance,
        crlb=crlb,
        ratio=variance / crlb,
        clamp_count=int(clamps),
    )
