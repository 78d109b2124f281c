"""Two-mode Gaussian states in the complex ladder-operator representation.

Operators are ordered as ``A = (a, b, a^dagger, b^dagger)`` where ``a`` is the
probe mode and ``b`` the ancilla. The covariance matrix is the symmetrized
second moment ``sigma[m, n] = <{dA_m, dA_n^dagger}>`` so the vacuum has
``sigma = I``. Channels act on moments only: a linear Bogoliubov map ``T``
sends ``d -> T d`` and ``sigma -> T sigma T^dagger``; pure loss additionally
injects vacuum noise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError

#: Symplectic form in the (a, b, a^dagger, b^dagger) ordering.
K = np.diag([1.0, 1.0, -1.0, -1.0])

_HERMITIAN_TOL = 1e-10
_PHYSICAL_TOL = 1e-10


class Mode(enum.IntEnum):
    PROBE = 0
    ANCILLA = 1


class Direction(enum.Enum):
    FORWARD = 1
    REVERSED = -1


@dataclass(frozen=True)
class SqueezerParams:
    """Two-mode squeezer ``S(xi)`` with ``xi = r exp(i phi)``.

    ``Direction.REVERSED`` applies ``S(-xi)``, the inverse of the forward map.
    """

    r: float
    phi: float = 0.0
    direction: Direction = Direction.FORWARD

    def __post_init__(self):
        if not self.r >= 0:
            raise PreconditionError(f"squeezing strength must be >= 0, got {self.r}")


@dataclass(frozen=True)
class LossParams:
    mode: Mode
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise PreconditionError(f"loss fraction must lie in [0, 1], got {self.alpha}")


def _readonly(array):
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GaussianState:
    """First and second moments of a two-mode Gaussian state.

    Args:
        displacement: ``(d_a, d_b, d_a*, d_b*)``.
        covariance: 4x4 symmetrized covariance matrix.
        validate: check Hermiticity, conjugate-block structure and
            physicality ``sigma + K >= 0`` on construction.
    """

    displacement: np.ndarray
    covariance: np.ndarray
    validate: bool = True

    def __post_init__(self):
        d = _readonly(self.displacement)
        sigma = _readonly(self.covariance)
        if d.shape != (4,) or sigma.shape != (4, 4):
            raise PreconditionError("expected a 4-vector and a 4x4 matrix")
        object.__setattr__(self, "displacement", d)
        object.__setattr__(self, "covariance", sigma)
        if self.validate:
            self.check()

    def check(self):
        """Raise :class:`PreconditionError` if an invariant is violated."""
        d, sigma = self.displacement, self.covariance
        scale = max(1.0, float(np.max(np.abs(sigma))))
        if not np.allclose(d[2:], d[:2].conj(), rtol=0, atol=_HERMITIAN_TOL * max(1.0, np.max(np.abs(d)))):
            raise PreconditionError("displacement entries 3, 4 must conjugate entries 1, 2")
        if np.max(np.abs(sigma - sigma.conj().T)) > _HERMITIAN_TOL * scale:
            raise PreconditionError("covariance matrix is not Hermitian")
        # sigma = [[X, Y], [conj(Y), conj(X)]]
        if (
            np.max(np.abs(sigma[2:, 2:] - sigma[:2, :2].conj())) > _HERMITIAN_TOL * scale
            or np.max(np.abs(sigma[2:, :2] - sigma[:2, 2:].conj())) > _HERMITIAN_TOL * scale
        ):
            raise PreconditionError("covariance matrix lacks the conjugate-block structure")
        if min_physical_eigenvalue(sigma) < -_PHYSICAL_TOL * scale:
            raise PreconditionError("covariance matrix violates sigma + K >= 0")

    def mean_photons(self, mode: Mode) -> float:
        """``<A_j^dagger A_j>`` for a single mode."""
        j = int(mode)
        return float(((self.covariance[j, j].real - 1.0) / 2.0) + abs(self.displacement[j]) ** 2)

    def __eq__(self, other):
        if not isinstance(other, GaussianState):
            return NotImplemented
        return np.array_equal(self.displacement, other.displacement) and np.array_equal(
            self.covariance, other.covariance
        )

    def allclose(self, other: GaussianState, atol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self.displacement, other.displacement, rtol=0, atol=atol)
            and np.allclose(self.covariance, other.covariance, rtol=0, atol=atol)
        )


def min_physical_eigenvalue(sigma) -> float:
    """Smallest eigenvalue of ``sigma + K``; nonnegative for physical states."""
    herm = (sigma + sigma.conj().T) / 2
    return float(np.linalg.eigvalsh(herm + K).min())


def vacuum() -> GaussianState:
    return GaussianState(np.zeros(4), np.eye(4))


def coherent(beta: complex) -> GaussianState:
    """Probe in the coherent state ``|beta>``, ancilla in vacuum."""
    beta = complex(beta)
    return GaussianState(np.array([beta, 0.0, beta.conjugate(), 0.0]), np.eye(4))


def squeezer_matrix(params: SqueezerParams) -> np.ndarray:
    """Bogoliubov matrix of ``a -> a cosh r + b^dagger e^{i phi} sinh r``."""
    ch = np.cosh(params.r)
    sh = params.direction.value * np.sinh(params.r)
    e = np.exp(1j * params.phi)
    return np.array(
        [
            [ch, 0, 0, e * sh],
            [0, ch, e * sh, 0],
            [0, e.conjugate() * sh, ch, 0],
            [e.conjugate() * sh, 0, 0, ch],
        ],
        dtype=complex,
    )


def attenuation_matrix(params: LossParams) -> np.ndarray:
    g = np.ones(4)
    j = int(params.mode)
    g[j] = g[j + 2] = np.sqrt(1.0 - params.alpha)
    return np.diag(g)


def apply_squeezer(state: GaussianState, params: SqueezerParams) -> GaussianState:
    T = squeezer_matrix(params)
    return GaussianState(
        T @ state.displacement,
        T @ state.covariance @ T.conj().T,
        validate=state.validate,
    )


def apply_loss(state: GaussianState, params: LossParams) -> GaussianState:
    """Pure loss ``a -> sqrt(1 - alpha) a + sqrt(alpha) c`` with ``c`` in vacuum."""
    if params.alpha == 0.0:
        return state
    G = attenuation_matrix(params)
    # vacuum noise mode contributes (I - G G^dagger) since its covariance is I
    return GaussianState(
        G @ state.displacement,
        G @ state.covariance @ G + np.eye(4) - G @ G,
        validate=state.validate,
    )


def _ordered_pair(sigma, k: int, l: int) -> complex:
    """Centered moment ``<dA_k dA_l>`` recovered from the covariance matrix.

    ``dA_l = (dA_{l'})^dagger`` with ``l'`` the conjugate index, and
    ``<dA_k dA_{l'}^dagger> = (sigma[k, l'] + [A_k, A_{l'}^dagger]) / 2`` where the
    commutator is ``K[k, l']``.
    """
    lc = (l + 2) % 4
    return (sigma[k, lc] + K[k, lc]) / 2


def photon_number_moments(state: GaussianState) -> tuple[float, float]:
    """Mean and variance of the total photon number ``N = a^dagger a + b^dagger b``.

    Returns:
        ``(mean, variance)`` of ``N`` summed over both modes.
    """
    sigma, d = state.covariance, state.displacement
    modes = (0, 1)
    mean = 0.0
    for j in modes:
        mean += (_ordered_pair(sigma, j + 2, j) + d[j + 2] * d[j]).real

    # N = sum_j (d_j^* + dA_j^dagger)(d_j + dA_j) = const + L + Q, with L linear and
    # Q quadratic in the centered operators. Odd moments of a centered Gaussian
    # vanish, so Var N = <L L> + <Q Q> - <Q>^2.
    var_quadratic = 0.0
    for j in modes:
        for k in modes:
            # Wick pairing of <dA_j^dag dA_j dA_k^dag dA_k>; the (12)(34) pairing
            # cancels against <Q>^2, leaving the (13)(24) and (14)(23) pairings.
            var_quadratic += _ordered_pair(sigma, j + 2, k + 2) * _ordered_pair(sigma, j, k)
            var_quadratic += _ordered_pair(sigma, j + 2, k) * _ordered_pair(sigma, j, k + 2)

    # L = sum_j (d_j^* dA_j + d_j dA_j^dagger)
    coeffs = np.array([d[2], d[3], d[0], d[1]])
    var_linear = 0.0
    for p in range(4):
        for q in range(4):
            if coeffs[p] != 0 and coeffs[q] != 0:
                var_linear += coeffs[p] * coeffs[q] * _ordered_pair(sigma, p, q)

    return float(mean), float((var_quadratic + var_linear).real)


def correlated_covariance(n_probe, n_ancilla, pair, offset: float = 1.0) -> np.ndarray:
    """Covariance with only ``<a^dag a>``, ``<b^dag b>`` and ``<a b>`` nonzero.

    ``offset=0`` gives the same linear structure without the vacuum unit, which
    is what differentiating with respect to a parameter produces.
    """
    pair = complex(pair)
    return np.array(
        [
            [2 * n_probe + offset, 0, 0, 2 * pair],
            [0, 2 * n_ancilla + offset, 2 * pair, 0],
            [0, 2 * pair.conjugate(), 2 * n_probe + offset, 0],
            [2 * pair.conjugate(), 0, 0, 2 * n_ancilla + offset],
        ],
        dtype=complex,
    )


def tmsv_after_loss_covariance(r: float, phi: float, alpha: float) -> GaussianState:
    """Two-mode squeezed vacuum with loss ``alpha`` on the probe, in closed form."""
    if r < 0:
        raise PreconditionError(f"squeezing strength must be >= 0, got {r}")
    if not 0.0 <= alpha <= 1.0:
        raise PreconditionError(f"loss fraction must lie in [0, 1], got {alpha}")
    sh2 = np.sinh(r) ** 2
    pair = np.exp(1j * phi) * np.sinh(r) * np.cosh(r) * np.sqrt(1.0 - alpha)
    return GaussianState(np.zeros(4), correlated_covariance((1.0 - alpha) * sh2, sh2, pair))


def tmsv_after_loss_dsigma(r: float, phi: float, alpha: float) -> np.ndarray:
    """Derivative in ``alpha`` of :func:`tmsv_after_loss_covariance`."""
    sh2 = np.sinh(r) ** 2
    dpair = -np.exp(1j * phi) * np.sinh(r) * np.cosh(r) / (2.0 * np.sqrt(1.0 - alpha))
    return correlated_covariance(-sh2, 0.0, dpair, offset=0.0)


def tmsv_pipeline(r: float, phi: float, alpha: float) -> GaussianState:
    state = apply_squeezer(vacuum(), SqueezerParams(r, phi))
    return apply_loss(state, LossParams(Mode.PROBE, alpha))


def nbar_to_r(nbar: float) -> float:
    """Squeezing strength producing ``nbar = sinh^2 r`` photons per beam."""
    if nbar < 0:
        raise PreconditionError(f"mean photon number must be >= 0, got {nbar}")
    return float(np.arcsinh(np.sqrt(nbar)))


def r_to_nbar(r: float) -> float:
    return float(np.sinh(r) ** 2)
