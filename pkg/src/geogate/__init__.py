"""Simulation of the sigma-z geometric phase gate on an optical ion-qubit transition.

Modules
-------
hilbert
    Tensor-product layout, operators and states.
drive
    Bichromatic drive description and the exact Hamiltonian.
analytic
    Effective-model quantities, gate timing and error estimates.
propagator
    Time integration, pulse schedules and calibration.
metrics
    CNOT fidelity, gate phase and the serializable gate report.
harness
    Configuration files, sweeps, Monte Carlo and the command line tool.
"""

from . import analytic, backend, drive, hilbert, metrics, propagator
from .analytic import PLAIN, SPIN_ECHO, GatePlan, omega_eff_1ion
from .drive import DriveConfig, EnvelopeSpec, LaserTone, TrapConfig, TwoIonGeometry
from .errors import GeoGateError
from .hilbert import SpaceLayout
from .metrics import GateReport, cnot_infidelity, input_state_sweep
from .propagator import IntegratorSpec, calibrate_gate, evolve, gate_schedule, run_schedule

__version__ = "0.1.0"

__all__ = [
    "analytic", "backend", "drive", "hilbert", "metrics", "propagator", "PLAIN", "SPIN_ECHO", "GatePlan",
    "omega_eff_1ion", "DriveConfig", "EnvelopeSpec", "LaserTone", "TrapConfig", "TwoIonGeometry", "GeoGateError",
    "SpaceLayout", "GateReport", "cnot_infidelity", "input_state_sweep", "IntegratorSpec", "calibrate_gate",
    "evolve", "gate_schedule", "run_schedule",
]
