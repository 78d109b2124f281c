"""Absorption metrology with two-mode squeezed probes, ancilla counting and SU(1,1) readout."""

from .counting import ancilla_bound, counting_fisher, standard_limit, tmsv_weights
from .gaussian import GaussianState, nbar_to_r, r_to_nbar
from .qfi import LimitSchedule, QfiProblem, qfi_with_displacement

__version__ = "0.1.0"

__all__ = [
    "GaussianState",
    "LimitSchedule",
    "QfiProblem",
    "ancilla_bound",
    "counting_fisher",
    "nbar_to_r",
    "qfi_with_displacement",
    "r_to_nbar",
    "standard_limit",
    "tmsv_weights",
]
