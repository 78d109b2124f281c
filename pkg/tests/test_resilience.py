import math
from functools import partial

import numpy as np
import pytest

from absorption_metrology import su11
from absorption_metrology.errors import PreconditionError
from absorption_metrology.gaussian import Mode, nbar_to_r, tmsv_after_loss_covariance, vacuum
from absorption_metrology.qfi import QfiProblem, qfi
from absorption_metrology.resilience import (
    LossyProtocolConfig,
    coherent_baseline,
    lossy_coherent_state,
    lossy_tmsv_state,
    qfi_coherent,
    qfi_ratio_db,
    qfi_tmsv,
    time_reversed_state,
    tr_sensitivity_with_loss,
)

import fock_oracle


def test_config_validation():
    with pytest.raises(PreconditionError):
        LossyProtocolConfig(10.0, 0.05, alpha0=1.2)
    with pytest.raises(PreconditionError):
        LossyProtocolConfig(10.0, 0.0)
    with pytest.raises(PreconditionError):
        LossyProtocolConfig(-1.0, 0.05)


def test_no_extra_loss_reduces_to_plain_states():
    config = LossyProtocolConfig(10.0, 0.05)
    expected = tmsv_after_loss_covariance(nbar_to_r(10.0), 0.0, 0.05)
    assert lossy_tmsv_state(config).allclose(expected, atol=1e-12)
    assert qfi_tmsv(config) == pytest.approx(10.0 / (0.05 * 0.95), rel=1e-6)
    assert qfi_coherent(config) == pytest.approx(10.0 / 0.95, rel=1e-8)


def test_total_extra_loss_leaves_vacuum():
    config = LossyProtocolConfig(10.0, 0.05, alpha0=1.0)
    assert lossy_tmsv_state(config).allclose(vacuum(), atol=1e-12)
    assert lossy_coherent_state(config).allclose(vacuum(), atol=1e-12)
    assert qfi_tmsv(config) == 0.0
    assert qfi_ratio_db(config) == 0.0
    with pytest.raises(PreconditionError):
        coherent_baseline(config)


def test_probe_photons_after_extra_loss():
    config = LossyProtocolConfig(25.0, 0.05, alpha0=0.25)
    state = lossy_tmsv_state(config)
    assert state.mean_photons(Mode.PROBE) == pytest.approx(18.75 * 0.95, rel=1e-12)
    assert state.mean_photons(Mode.ANCILLA) == pytest.approx(18.75, rel=1e-12)
    assert lossy_coherent_state(config).mean_photons(Mode.PROBE) == pytest.approx(18.75 * 0.95, rel=1e-12)


def test_ratio_without_extra_loss():
    config = LossyProtocolConfig(25.0, 0.05)
    assert qfi_ratio_db(config) == pytest.approx(10 * math.log10(1 / 0.05), abs=1e-6)


def test_ratio_decreases_with_extra_loss():
    values = [qfi_ratio_db(LossyProtocolConfig(25.0, 0.05, a0)) for a0 in np.arange(0, 0.91, 0.01)]
    assert np.all(np.diff(values) < 0)
    assert values[0] == pytest.approx(13.0103, abs=1e-4)


@pytest.mark.parametrize("nbar, alpha, alpha0", [(0.4, 0.3, 0.1), (0.2, 0.05, 0.25)])
def test_lossy_family_matches_fock_space(nbar, alpha, alpha0):
    r = nbar_to_r(nbar)
    ref = fock_oracle.qfi(lambda a: fock_oracle.lossy_tmsv(r, a, alpha0, cutoff=20), alpha)
    assert qfi_tmsv(LossyProtocolConfig(nbar, alpha, alpha0)) == pytest.approx(ref, rel=1e-6)


def test_time_reversal_does_not_change_qfi():
    config = LossyProtocolConfig(10.0, 0.2, alpha0=0.1)
    direct = qfi_tmsv(config)
    reversed_ = qfi(QfiProblem(partial(time_reversed_state, config), config.alpha))
    assert reversed_ == pytest.approx(direct, rel=1e-6)


@pytest.mark.parametrize("nbar", [1.0, 10.0, 25.0])
def test_sensitivity_reduces_to_lossless_readout(nbar):
    config = LossyProtocolConfig(nbar, 0.05)
    assert tr_sensitivity_with_loss(config) == pytest.approx(su11.sensitivity(nbar_to_r(nbar), 0.05), rel=1e-6)


def test_time_reversal_beats_coherent_probe_under_extra_loss():
    for nbar in np.linspace(5, 25, 21):
        config = LossyProtocolConfig(nbar, 0.05, alpha0=0.05)
        assert tr_sensitivity_with_loss(config) < coherent_baseline(config)


def test_landmark_values_under_extra_loss():
    assert tr_sensitivity_with_loss(LossyProtocolConfig(5.0, 0.05, 0.05)) == pytest.approx(0.1938, abs=5e-4)
    assert tr_sensitivity_with_loss(LossyProtocolConfig(25.0, 0.05, 0.05)) == pytest.approx(0.0906, abs=5e-4)


def test_coherent_baseline():
    clean = coherent_baseline(LossyProtocolConfig(10.0, 0.05))
    assert clean == pytest.approx(math.sqrt(0.95 / 10.0), rel=1e-14)
    half = coherent_baseline(LossyProtocolConfig(10.0, 0.05, alpha0=0.5))
    assert half / clean == pytest.approx(math.sqrt(2), rel=1e-14)


def test_coherent_baseline_is_its_own_cramer_rao_bound():
    config = LossyProtocolConfig(12.0, 0.3, alpha0=0.2)
    assert coherent_baseline(config) == pytest.approx(1 / math.sqrt(qfi_coherent(config)), rel=1e-8)
