from functools import partial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from absorption_metrology import su11
from absorption_metrology.errors import ConvergenceError, PreconditionError, SingularMatrixError
from absorption_metrology.gaussian import (
    GaussianState,
    LossParams,
    Mode,
    SqueezerParams,
    apply_loss,
    nbar_to_r,
    squeezer_matrix,
    tmsv_after_loss_covariance,
    tmsv_after_loss_dsigma,
    vacuum,
)
from absorption_metrology.qfi import (
    DerivativeMode,
    LimitSchedule,
    QfiProblem,
    build_M,
    covariance_qfi,
    dsigma_dalpha,
    qfi,
    qfi_with_displacement,
    vec,
)
from absorption_metrology.resilience import LossyProtocolConfig, lossy_tmsv_state, qfi_coherent

import fock_oracle


def closed_form(nbar, alpha):
    return nbar / (alpha * (1 - alpha))


def tmsv_problem(nbar, alpha, phi=0.0, analytic=False):
    r = nbar_to_r(nbar)
    if analytic:
        return QfiProblem(
            lambda a: tmsv_after_loss_covariance(r, phi, a),
            alpha,
            DerivativeMode.ANALYTIC,
            lambda a: tmsv_after_loss_dsigma(r, phi, a),
        )
    return QfiProblem(lambda a: tmsv_after_loss_covariance(r, phi, a), alpha)


def su11_problem(nbar, alpha, phi=0.0):
    r = nbar_to_r(nbar)
    return QfiProblem(lambda a: su11.output_state(r, phi, a), alpha)


def test_build_M_of_vacuum():
    w = np.linalg.eigvalsh(build_M(np.eye(4), 1.0))
    assert np.sum(np.abs(w) < 1e-14) == 8
    assert np.allclose(np.sort(np.abs(w))[8:], 2.0)
    assert np.linalg.cond(build_M(np.eye(4), 0.0)) == pytest.approx(1.0)


def test_vec_stacks_columns():
    m = np.arange(4).reshape(2, 2)
    assert list(vec(m)) == [0, 2, 1, 3]


def test_problem_validation():
    with pytest.raises(PreconditionError):
        QfiProblem(lambda a: vacuum(), 0.0)
    with pytest.raises(PreconditionError):
        QfiProblem(lambda a: vacuum(), 0.5, DerivativeMode.ANALYTIC)
    with pytest.raises(PreconditionError):
        LimitSchedule(v_values=(0.9999, 0.999))


@pytest.mark.parametrize("nbar, alpha", [(0.1, 0.01), (10.0, 0.05), (25.0, 0.5)])
def test_difference_derivative_matches_analytic(nbar, alpha):
    r = nbar_to_r(nbar)
    scale = max(1.0, nbar)
    fd = dsigma_dalpha(tmsv_problem(nbar, alpha, phi=0.3))
    np.testing.assert_allclose(fd, tmsv_after_loss_dsigma(r, 0.3, alpha), atol=1e-6 * scale)
    fd = dsigma_dalpha(su11_problem(nbar, alpha, phi=0.3))
    np.testing.assert_allclose(fd, su11.output_dsigma(r, 0.3, alpha), atol=1e-6 * scale**2)


def test_landmark_value():
    # nbar = 10, alpha = 0.05: 10 / 0.0475
    expected = 210.52631578947368
    assert qfi(tmsv_problem(10.0, 0.05)) == pytest.approx(expected, rel=1e-6)
    assert qfi(tmsv_problem(10.0, 0.05, analytic=True)) == pytest.approx(expected, rel=1e-9)
    assert qfi(su11_problem(10.0, 0.05)) == pytest.approx(expected, rel=1e-6)


def test_no_squeezing_no_information():
    assert qfi(tmsv_problem(0.0, 0.3)) == 0.0


@pytest.mark.parametrize("alpha", [0.01, 0.05, 0.1, 0.3, 0.5, 0.9])
@pytest.mark.parametrize("nbar", [0.1, 1.0, 5.0, 10.0, 25.0])
def test_closed_form_grid(nbar, alpha):
    assert qfi(tmsv_problem(nbar, alpha, phi=1.1)) == pytest.approx(closed_form(nbar, alpha), rel=1e-6)


def test_monotone_in_nbar():
    values = [qfi(tmsv_problem(n, 0.2)) for n in np.linspace(0.5, 25, 12)]
    assert np.all(np.diff(values) > 0)


@settings(max_examples=20, deadline=None)
@given(
    st.floats(0.2, 20.0),
    st.floats(0.02, 0.9),
    st.floats(0.0, 1.5),
    st.floats(-np.pi, np.pi),
)
def test_invariant_under_alpha_independent_squeezing(nbar, alpha, r2, phi2):
    r = nbar_to_r(nbar)
    T = squeezer_matrix(SqueezerParams(r2, phi2))

    def family(a):
        s = tmsv_after_loss_covariance(r, 0.0, a)
        return GaussianState(s.displacement, T @ s.covariance @ T.conj().T)

    assert qfi(QfiProblem(family, alpha)) == pytest.approx(closed_form(nbar, alpha), rel=1e-5)


def test_coherent_displacement_term():
    config = LossyProtocolConfig(nbar=10.0, alpha=0.3)
    assert qfi_coherent(config) == pytest.approx(10.0 / 0.7, rel=1e-8)
    lossy = LossyProtocolConfig(nbar=25.0, alpha=0.05, alpha0=0.25)
    assert qfi_coherent(lossy) == pytest.approx(18.75 / 0.95, rel=1e-8)


def test_displacement_difference_matches_analytic():
    beta = 3.0

    def family(a):
        state = GaussianState(np.array([beta, 0, beta, 0]), np.eye(4))
        return apply_loss(state, LossParams(Mode.PROBE, a))

    problem = QfiProblem(family, 0.4)
    assert qfi_with_displacement(problem) == pytest.approx(beta**2 / 0.6, rel=1e-7)


def test_extrapolation_route_where_well_conditioned():
    schedule = LimitSchedule(extrapolate=True)
    value = qfi(tmsv_problem(10.0, 0.05, analytic=True), schedule)
    assert value == pytest.approx(closed_form(10.0, 0.05), rel=1e-6)


def test_extrapolation_reports_non_convergence():
    # weakly squeezed, weakly absorbing: the v -> 1 approach is far from polynomial
    schedule = LimitSchedule(extrapolate=True)
    with pytest.raises(ConvergenceError):
        qfi(tmsv_problem(0.1, 0.01, analytic=True), schedule)


def test_divergent_limit_is_reported():
    # a pure-state direction that is not reachable by loss: dsigma has null-space weight
    sigma = tmsv_after_loss_covariance(nbar_to_r(2.0), 0.0, 0.0).covariance
    dsigma = np.zeros((4, 4), dtype=complex)
    dsigma[0, 0] = dsigma[2, 2] = 1.0
    with pytest.raises(SingularMatrixError):
        covariance_qfi(sigma, dsigma)


@pytest.mark.parametrize("nbar, alpha, alpha0", [(0.3, 0.2, 0.0), (0.5, 0.1, 0.2)])
def test_matches_fock_space_qfi(nbar, alpha, alpha0):
    r = nbar_to_r(nbar)
    ref = fock_oracle.qfi(lambda a: fock_oracle.lossy_tmsv(r, a, alpha0, cutoff=20), alpha)
    config = LossyProtocolConfig(nbar, alpha, alpha0)
    value = qfi(QfiProblem(partial(lossy_tmsv_state, config), alpha))
    assert value == pytest.approx(ref, rel=1e-6)
