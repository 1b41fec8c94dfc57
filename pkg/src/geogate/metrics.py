"""Gate figures of merit.

The phase gate is turned into a CNOT by fixed local rotations on the target
(ion 2) and ``sigma_z`` corrections absorbing the single-qubit phases of
``exp(i pi/2 (S^z/2)^2)``. The ideal CNOT reference is the same sandwich around
the ideal phase gate, so the construction is self-consistent. The headline
number is the state infidelity ``1 - <target| rho_internal |target>`` after
tracing out the motion.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.linalg import expm

from .analytic import GatePlan, ideal_phase_gate, spontaneous_emission_prob
from .drive import DriveConfig
from .errors import InvalidParameterError, LayoutMismatchError
from .hilbert import I2, INTERNAL_LABELS, SIGMA_Y, SIGMA_Z, SpaceLayout, internal_index, kron
from .propagator import IntegratorSpec, computational_block, entangling_phase, gate_schedule, run_schedule, vacuum_block

CNOT_PRE = kron(I2, expm(1j * np.pi / 4 * SIGMA_Y))
CNOT_POST = kron(I2, expm(-1j * np.pi / 4 * SIGMA_Y))
Z_CORRECTION = kron(expm(-1j * np.pi / 4 * SIGMA_Z), expm(-1j * np.pi / 4 * SIGMA_Z))


def cnot_sandwich(U4: np.ndarray) -> np.ndarray:
    """Local rotations and phase corrections around a phase gate."""
    return CNOT_POST @ Z_CORRECTION @ U4 @ CNOT_PRE


IDEAL_CNOT = cnot_sandwich(ideal_phase_gate())

REPORT_VERSION = "geogate-gatereport v1"
REPORT_COLUMNS = ("input_state", "infidelity", "pop_SS", "pop_SD", "pop_DS", "pop_DD", "gate_phase",
                  "motional_residual", "gate_time_s", "p_sp", "total_error")


def trace_out_motion(psi: np.ndarray, layout: SpaceLayout) -> np.ndarray:
    """Reduced internal density matrix of a pure composite state."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (layout.dim,):
        raise LayoutMismatchError(f"state shape {psi.shape} does not match layout dimension {layout.dim}")
    m = psi.reshape(layout.n_internal, layout.fock_dim)
    return m @ m.conj().T


def motional_state(psi: np.ndarray, layout: SpaceLayout) -> np.ndarray:
    """Reduced motional density matrix."""
    m = np.asarray(psi, dtype=complex).reshape(layout.n_internal, layout.fock_dim)
    return m.T @ m.conj()


def state_fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    return float(np.real(np.conj(target) @ rho @ target))


def _clamp(infidelity: float) -> float:
    if infidelity < 0:
        if infidelity < -1e-9:
            warnings.warn(f"negative infidelity {infidelity:.3e} clamped to zero", RuntimeWarning, stacklevel=3)
        return 0.0
    return infidelity


@dataclass(frozen=True)
class GateReport:
    """Outcome of one gate run for one computational input."""

    infidelity: float
    populations: tuple
    gate_phase: float
    motional_residual: float
    p_sp: float = 0.0
    total_error: float = float("nan")
    input_state: str = "DD"
    gate_time: float = 0.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        pops = np.asarray(self.populations, dtype=float)
        if pops.shape != (4,) or abs(pops.sum() - 1) > 1e-9 or pops.min() < -1e-12:
            raise InvalidParameterError(f"populations {pops} are not a distribution")
        object.__setattr__(self, "populations", tuple(float(p) for p in pops))
        if np.isnan(self.total_error):
            object.__setattr__(self, "total_error", self.infidelity + self.p_sp)

    def row(self) -> list:
        return [self.input_state, self.infidelity, *self.populations, self.gate_phase, self.motional_residual,
                self.gate_time, self.p_sp, self.total_error]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["populations"] = dict(zip(INTERNAL_LABELS[2], self.populations))
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        """Version line, header and one data row."""
        keys = sorted(self.params)
        head = list(REPORT_COLUMNS) + keys
        vals = self.row() + [self.params[k] for k in keys]
        return "\n".join([f"# {REPORT_VERSION}", ",".join(head), ",".join(_fmt(v) for v in vals)]) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def report_from_columns(cols: np.ndarray, layout: SpaceLayout, input_state="DD", gate_time: float = 0.0,
                        params: dict | None = None) -> GateReport:
    """CNOT report from the images of the four computational states (with vacuum motion)."""
    if layout.n_ions != 2:
        raise LayoutMismatchError("CNOT reports need a two-ion layout")
    s_in = internal_index(input_state, 2)
    block = np.asarray(cols).reshape(layout.n_internal, layout.fock_dim, layout.n_internal)
    psi = np.einsum("amk,k->am", block, CNOT_PRE[:, s_in])
    psi = np.einsum("ab,bm->am", CNOT_POST @ Z_CORRECTION, psi).reshape(-1)
    rho = trace_out_motion(psi, layout)
    infid = _clamp(1.0 - state_fidelity(rho, IDEAL_CNOT[:, s_in]))
    pops = np.clip(np.real(np.diag(rho)), 0.0, None)
    pops = pops / pops.sum()
    mot = motional_state(psi, layout)
    label = INTERNAL_LABELS[2][s_in]
    return GateReport(infid, tuple(pops), entangling_phase(vacuum_block(cols, layout)),
                      float(max(0.0, 1.0 - np.real(mot[0, 0]))), input_state=label, gate_time=gate_time,
                      params=dict(params or {}))


def report_from_internal_unitary(U4: np.ndarray, input_state="DD") -> GateReport:
    """Report for an internal-space gate (motion ignored), e.g. an analytic stand-in."""
    layout = SpaceLayout(2, 2)
    cols = np.zeros((layout.dim, 4), dtype=complex)
    cols.reshape(4, 2, 4)[:, 0, :] = np.asarray(U4, dtype=complex)
    return report_from_columns(cols, layout, input_state)


def run_gate(config: DriveConfig, plan: GatePlan, spec: IntegratorSpec | None = None, fock_dim: int = 20,
             **schedule_kwargs) -> np.ndarray:
    """Images of the four computational states (motional ground state) under the gate."""
    layout = SpaceLayout(2, fock_dim)
    schedule = gate_schedule(plan, config, **schedule_kwargs)
    return run_schedule(schedule, computational_block(layout), spec, layout)


def cnot_infidelity(config: DriveConfig, plan: GatePlan, input_state="DD", spec: IntegratorSpec | None = None,
                    fock_dim: int = 20, tau_D: float | None = None, params: dict | None = None,
                    **schedule_kwargs) -> GateReport:
    """Simulate the gate and score the CNOT output for one input state."""
    cols = run_gate(config, plan, spec, fock_dim, **schedule_kwargs)
    report = report_from_columns(cols, SpaceLayout(2, fock_dim), input_state, plan.gate_time, params)
    return with_spontaneous_emission(report, tau_D) if tau_D else report


def input_state_sweep(config: DriveConfig, plan: GatePlan, spec: IntegratorSpec | None = None, fock_dim: int = 20,
                      tau_D: float | None = None, params: dict | None = None, **schedule_kwargs) -> list[GateReport]:
    """Reports for all four computational inputs from a single simulation."""
    cols = run_gate(config, plan, spec, fock_dim, **schedule_kwargs)
    layout = SpaceLayout(2, fock_dim)
    out = [report_from_columns(cols, layout, s, plan.gate_time, params) for s in INTERNAL_LABELS[2]]
    return [with_spontaneous_emission(r, tau_D) for r in out] if tau_D else out


def average_infidelity(reports) -> float:
    return float(np.mean([r.infidelity for r in reports]))


def total_error(report: GateReport, tau_D: float | None, n_ions: int = 2, d_weight: float = 1.0) -> float:
    """Coherent infidelity plus the spontaneous-emission estimate over the gate time."""
    if tau_D is None or np.isinf(tau_D):
        return report.infidelity
    return report.infidelity + float(spontaneous_emission_prob(report.gate_time, tau_D, n_ions, d_weight))


def with_spontaneous_emission(report: GateReport, tau_D: float, n_ions: int = 2, d_weight: float = 1.0) -> GateReport:
    p = float(spontaneous_emission_prob(report.gate_time, tau_D, n_ions, d_weight))
    return replace(report, p_sp=p, total_error=report.infidelity + p)


__all__ = [
    "CNOT_PRE", "CNOT_POST", "Z_CORRECTION", "IDEAL_CNOT", "cnot_sandwich", "trace_out_motion", "motional_state",
    "state_fidelity", "GateReport", "REPORT_COLUMNS", "REPORT_VERSION", "report_from_columns",
    "report_from_internal_unitary", "run_gate", "cnot_infidelity", "input_state_sweep", "average_infidelity",
    "total_error", "with_spontaneous_emission",
]
