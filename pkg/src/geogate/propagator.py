"""Time evolution, gate sequences and coupling calibration.

The exact bichromatic Hamiltonian is integrated with the fourth-order
commutator-free Magnus scheme (two exponentials per step, each built from the
Hamiltonian at the two Gauss-Legendre nodes) or with the exponential midpoint
rule. Every exponential is applied to the state by a Taylor series summed to
machine precision, so both schemes are unitary up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from . import backend
from .analytic import (
    ECHO_CORRECTOR_ANGLE,
    PLAIN,
    SPIN_ECHO,
    GatePlan,
    echo_pulse,
    loop_integrals,
    omega_eff_1ion,
    sz_rotation,
)
from .drive import TWO_PI, DriveConfig, h_exact, ion_phase_factors, motional_couplings, tone_amplitudes
from .errors import CalibrationError, IntegratorFailureError, InvalidParameterError, LayoutMismatchError
from .hilbert import SpaceLayout, ladder_ops

_SQ3 = np.sqrt(3.0)
CF4_NODES = np.array([0.5 - _SQ3 / 6, 0.5 + _SQ3 / 6])
CF4_WEIGHTS = np.array([[0.25 + _SQ3 / 6, 0.25 - _SQ3 / 6],
                        [0.25 - _SQ3 / 6, 0.25 + _SQ3 / 6]])
METHODS = ("cf4", "midpoint")


@dataclass(frozen=True)
class IntegratorSpec:
    """Fixed-step integrator settings.

    Parameters
    ----------
    method : {"cf4", "midpoint"}
        Commutator-free fourth-order Magnus or exponential midpoint.
    step_div : int
        Steps per trap period ``2 pi / nu``.
    norm_tol : float
        Largest tolerated norm drift before the run is declared failed.
    taylor_tol : float
        Truncation threshold of the Taylor series of each exponential.
    """

    method: str = "cf4"
    step_div: int = 50
    norm_tol: float = 1e-6
    taylor_tol: float = 1e-16

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidParameterError(f"integrator method must be one of {METHODS}")
        if int(self.step_div) != self.step_div or self.step_div < 1:
            raise InvalidParameterError("step_div must be a positive integer")

    def n_steps(self, duration: float, period: float) -> int:
        return max(1, int(np.ceil(duration / period * self.step_div - 1e-9)))


@dataclass(frozen=True)
class DriveHamiltonian:
    """Structured exact Hamiltonian, callable as a dense builder ``H(t)``.

    ``window`` bounds the pulse envelope, ``phases`` overrides the tone
    phases (in the absolute time frame).
    """

    config: DriveConfig
    layout: SpaceLayout
    window: tuple[float, float] | None = None
    phases: tuple[float, float] | None = None

    @property
    def period(self) -> float:
        return self.config.trap.period

    def __call__(self, t: float) -> np.ndarray:
        return h_exact(t, self.config, self.layout, self.window, self.phases)


def _as_block(psi0: np.ndarray, layout: SpaceLayout):
    psi = np.asarray(psi0, dtype=complex)
    vector = psi.ndim == 1
    if psi.shape[0] != layout.dim:
        raise LayoutMismatchError(f"state dimension {psi.shape[0]} does not match layout dimension {layout.dim}")
    block = np.array(psi.reshape(layout.n_internal, layout.fock_dim, -1), order="C", copy=True)
    return block, vector


def _node_arrays(ham: DriveHamiltonian, t0: float, t1: float, spec: IntegratorSpec):
    nu = ham.config.nu
    n = spec.n_steps(t1 - t0, TWO_PI / nu)
    dt = (t1 - t0) / n
    starts = t0 + dt * np.arange(n)
    if spec.method == "cf4":
        tn = starts[:, None] + CF4_NODES[None, :] * dt
        amp = tone_amplitudes(tn, ham.config, ham.window, ham.phases)  # (n, 2 nodes, J)
        coef = np.einsum("xp,npj->nxpj", CF4_WEIGHTS, amp) * dt
        coef = coef.reshape(2 * n, 2, -1)
        theta = np.repeat(nu * tn, 2, axis=0)
    else:
        tn = (starts + dt / 2)[:, None]
        coef = tone_amplitudes(tn, ham.config, ham.window, ham.phases) * dt
        theta = nu * tn
    return np.ascontiguousarray(theta), np.ascontiguousarray(coef, dtype=complex)


def _evolve_drive(ham: DriveHamiltonian, psi0, t0, t1, spec):
    block, vector = _as_block(psi0, ham.layout)
    theta, coef = _node_arrays(ham, t0, t1, spec)
    C = motional_couplings(ham.config, ham.layout.fock_dim)
    u = ion_phase_factors(ham.config, ham.layout.n_ions)
    backend.propagate(block, C, theta, coef, u, spec.taylor_tol)
    out = block.reshape(ham.layout.dim, -1)
    return out[:, 0] if vector else out


def _expm_apply(G: np.ndarray, psi: np.ndarray, tol: float) -> np.ndarray:
    out = psi.copy()
    term = psi
    for k in range(1, 60):
        term = (-1j / k) * (G @ term)
        out += term
        if np.abs(term).max(initial=0.0) < tol:
            break
    return out


def _evolve_dense(h_builder, psi0, t0, t1, spec, period):
    psi = np.array(psi0, dtype=complex)
    n = spec.n_steps(t1 - t0, period)
    dt = (t1 - t0) / n
    for i in range(n):
        t = t0 + i * dt
        if spec.method == "cf4":
            H1 = h_builder(t + CF4_NODES[0] * dt)
            H2 = h_builder(t + CF4_NODES[1] * dt)
            for w in CF4_WEIGHTS:
                psi = _expm_apply(dt * (w[0] * H1 + w[1] * H2), psi, spec.taylor_tol)
        else:
            psi = _expm_apply(dt * h_builder(t + dt / 2), psi, spec.taylor_tol)
    return psi


def evolve(h_builder: Union[DriveHamiltonian, Callable[[float], np.ndarray]], psi0: np.ndarray, t0: float,
           t1: float, spec: IntegratorSpec | None = None, period: float | None = None) -> np.ndarray:
    """Propagate ``psi0`` (a vector or a block of column vectors) from ``t0`` to ``t1``.

    A :class:`DriveHamiltonian` runs on the fast kernel; any other callable
    returning a dense Hamiltonian is integrated directly. ``period`` sets the
    time scale that ``spec.step_div`` subdivides (default: the trap period of
    a drive, else the whole interval).
    """
    spec = spec or IntegratorSpec()
    if not t1 > t0:
        raise InvalidParameterError("t1 must be later than t0")
    psi0 = np.asarray(psi0, dtype=complex)
    norms0 = np.linalg.norm(psi0, axis=0)
    if isinstance(h_builder, DriveHamiltonian):
        psi = _evolve_drive(h_builder, psi0, t0, t1, spec)
    else:
        period = period or getattr(h_builder, "period", None) or (t1 - t0)
        psi = _evolve_dense(h_builder, psi0, t0, t1, spec, period)
    drift = np.max(np.abs(np.linalg.norm(psi, axis=0) - norms0))
    if not drift <= spec.norm_tol:
        raise IntegratorFailureError(f"norm drift {drift:.2e} exceeds {spec.norm_tol:.1e}")
    return psi


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class Pulse:
    """Bichromatic segment.

    ``phases`` overrides the tone phases of ``config``. With
    ``phase_reference="segment"`` they are the phases at the start of the
    segment; with ``"absolute"`` they refer to ``t = 0``.
    """

    config: DriveConfig
    duration: float
    phases: tuple[float, float] | None = None
    phase_reference: str = "segment"

    def __post_init__(self):
        if not self.duration > 0:
            raise InvalidParameterError("pulse duration must be positive")
        if self.phase_reference not in ("segment", "absolute"):
            raise InvalidParameterError("phase_reference must be 'segment' or 'absolute'")
        self.config.envelope.check_duration(self.duration)

    def hamiltonian(self, t_start: float, layout: SpaceLayout) -> DriveHamiltonian:
        ph = self.config.phases if self.phases is None else np.asarray(self.phases, dtype=float)
        if self.phase_reference == "segment":
            ph = ph - self.config.detunings * t_start
        return DriveHamiltonian(self.config, layout, (t_start, t_start + self.duration), tuple(ph))


@dataclass(frozen=True)
class LocalUnitary:
    """Instantaneous unitary on the internal space (or the full space)."""

    unitary: np.ndarray
    label: str = ""
    duration: float = field(default=0.0, init=False)

    def __post_init__(self):
        U = np.asarray(self.unitary, dtype=complex)
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise InvalidParameterError("local unitary must be a square matrix")
        if np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])) > 1e-12:
            raise InvalidParameterError(f"local operation {self.label!r} is not unitary")
        object.__setattr__(self, "unitary", U)


@dataclass(frozen=True)
class Idle:
    """Free evolution with all lasers off; the identity in the interaction frame."""

    duration: float

    def __post_init__(self):
        if not self.duration > 0:
            raise InvalidParameterError("idle duration must be positive")


Segment = Union[Pulse, LocalUnitary, Idle]


@dataclass(frozen=True)
class SegmentSchedule:
    segments: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def start_times(self) -> list[float]:
        return list(np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])[:-1])

    def pulses(self) -> list[Pulse]:
        return [s for s in self.segments if isinstance(s, Pulse)]

    def __add__(self, other: "SegmentSchedule") -> "SegmentSchedule":
        return SegmentSchedule(self.segments + other.segments)

    def __len__(self):
        return len(self.segments)


def apply_local(U: np.ndarray, psi: np.ndarray, layout: SpaceLayout) -> np.ndarray:
    """Apply an internal-space (or full-space) unitary to a vector or block."""
    psi = np.asarray(psi, dtype=complex)
    if U.shape[0] == layout.dim:
        return U @ psi
    if U.shape[0] != layout.n_internal:
        raise LayoutMismatchError(f"unitary of size {U.shape[0]} fits neither the internal nor the full space")
    shaped = psi.reshape(layout.n_internal, layout.fock_dim, -1)
    out = np.einsum("ab,bmk->amk", U, shaped)
    return out.reshape(psi.shape)


def run_schedule(schedule: SegmentSchedule, psi0: np.ndarray, spec: IntegratorSpec | None = None,
                 layout: SpaceLayout | None = None, t0: float = 0.0) -> np.ndarray:
    """Left fold of the segments over ``psi0`` starting at time ``t0``."""
    spec = spec or IntegratorSpec()
    psi = np.array(psi0, dtype=complex)
    if layout is None:
        layout = _infer_layout(psi.shape[0])
    t = t0
    for seg in schedule.segments:
        if isinstance(seg, Pulse):
            psi = evolve(seg.hamiltonian(t, layout), psi, t, t + seg.duration, spec)
        elif isinstance(seg, LocalUnitary):
            psi = apply_local(seg.unitary, psi, layout)
        t += seg.duration
    return psi


def _infer_layout(dim: int) -> SpaceLayout:
    for n_ions in (2, 1):
        if dim % 2**n_ions == 0 and dim // 2**n_ions >= 2:
            return SpaceLayout(n_ions, dim // 2**n_ions)
    raise LayoutMismatchError(f"cannot infer a layout for dimension {dim}")


def gate_schedule(plan: GatePlan, config: DriveConfig, corrector_angle: float = ECHO_CORRECTOR_ANGLE,
                  corrector_ion: int = 1, closing_frame: bool = True,
                  second_phases: tuple[float, float] | None = None, check: bool = True) -> SegmentSchedule:
    """Executable sequence for a gate plan.

    The spin-echo sequence in time order is: pulse, ``exp(i angle sigma_z)`` on
    the corrector ion, ``exp(i pi/2 (sigma_y1 + sigma_y2))``, pulse, the same
    echo pulse and, with ``closing_frame``, the inverse corrector. Both pulses
    start with the tone phases of ``config`` unless ``second_phases`` is given.
    ``check=False`` allows a config whose detuning deviates from the plan, as
    needed to model a miscalibrated drive.
    """
    if check:
        plan.check_config(config)
    first = Pulse(config, plan.loop_time)
    if plan.mode == PLAIN:
        return SegmentSchedule((first,))
    Z = sz_rotation(corrector_angle, corrector_ion)
    Y = echo_pulse()
    segs = [first, LocalUnitary(Z, "corrector"), LocalUnitary(Y, "echo"),
            Pulse(config, plan.loop_time, second_phases), LocalUnitary(Y, "echo")]
    if closing_frame:
        segs.append(LocalUnitary(Z.conj().T, "frame"))
    return SegmentSchedule(tuple(segs))


# ---------------------------------------------------------------------------
# phases and calibration


def computational_block(layout: SpaceLayout, n: int = 0) -> np.ndarray:
    """All computational states with ``n`` phonons as columns, shape ``(dim, 2**n_ions)``."""
    cols = np.zeros((layout.dim, layout.n_internal), dtype=complex)
    for s in range(layout.n_internal):
        cols[s * layout.fock_dim + n, s] = 1.0
    return cols


def vacuum_block(psi_cols: np.ndarray, layout: SpaceLayout) -> np.ndarray:
    """Internal matrix elements between motional-vacuum states."""
    return np.asarray(psi_cols).reshape(layout.n_internal, layout.fock_dim, -1)[:, 0, :]


def entangling_phase(U4: np.ndarray) -> float:
    """``arg(U_SS U_DD / (U_SD U_DS)) / 2`` in ``[0, pi)``.

    Insensitive to single-qubit ``sigma_z`` phases and to global phase.
    """
    z = U4[0, 0] * U4[3, 3] * np.conj(U4[1, 1] * U4[2, 2])
    return float(np.mod(np.angle(z), TWO_PI) / 2)


@dataclass(frozen=True)
class GateCalibration:
    """Outcome of closing a gate on its entangling phase."""

    plan: GatePlan
    config: DriveConfig
    omega_eff_analytic: float
    omega_eff_corrected: float
    reduction_factor: float
    gate_phase: float
    iterations: int
    commensurate: bool = False


def _segment_phase(plan, config, spec, fock_dim):
    layout = SpaceLayout(2, fock_dim)
    psi = run_schedule(SegmentSchedule((Pulse(config, plan.loop_time),)), computational_block(layout), spec, layout)
    return entangling_phase(vacuum_block(psi, layout))


def _analytic_abs(config: DriveConfig) -> float:
    return abs(omega_eff_1ion(config))


def _design(config, mode, scale, commensurate):
    om = _analytic_abs(config)
    for _ in range(3):  # the coupling depends weakly on the detuning it sets
        plan = GatePlan.design(mode, scale * om, config.envelope, config.nu if commensurate else None)
        cfg = config.with_gate_detuning(plan.delta)
        om = _analytic_abs(cfg)
    return plan, cfg


def calibrate_gate(config: DriveConfig, mode: str = SPIN_ECHO, spec: IntegratorSpec | None = None,
                   fock_dim: int = 20, commensurate: bool = False, tol: float = 1e-4, max_iter: int = 8,
                   initial_factor: float | None = None) -> GateCalibration:
    """Tune the gate so one segment accumulates the target entangling phase.

    With free timing (shaped pulses, or rectangular pulses without
    ``commensurate``) the design coupling ``r * |omega_eff|`` is rescaled until
    the phase matches, so ``r`` is the reduction factor. With commensurate
    rectangular timing the detuning is fixed at ``nu / 2N`` and the Rabi
    frequency is tuned instead.

    ``initial_factor`` seeds ``r``; by default it comes from the cheap
    single-ion displacement measurement of :func:`measure_reduction`.
    """
    spec = spec or IntegratorSpec()
    fixed_timing = commensurate and not config.envelope.shaped
    target = np.pi / 2 if mode == PLAIN else np.pi / 4
    if fixed_timing:
        plan, cfg = _design(config, mode, 1.0, True)
        omega = cfg.omega
        required = np.sqrt(target / (4 * loop_integrals(plan.loop_time, plan.delta, cfg.envelope)[1]))
        s = 1.0 if initial_factor is None else initial_factor ** -0.5
        for it in range(1, max_iter + 1):
            cfg = cfg.with_omega(s * omega)
            phase = _segment_phase(plan, cfg, spec, fock_dim)
            if abs(phase - target) < tol:
                break
            s *= (target / phase) ** 0.25
        else:
            raise CalibrationError(f"phase {phase:.6f} did not reach {target:.6f} in {max_iter} iterations")
        an = _analytic_abs(cfg)
        return GateCalibration(plan, cfg, an, required, required / an, phase, it, True)

    r = initial_factor
    if r is None:
        probe = config.with_gate_detuning(GatePlan.design(mode, _analytic_abs(config)).delta)
        r = measure_reduction(probe, spec).reduction_factor
    for it in range(1, max_iter + 1):
        plan, cfg = _design(config, mode, r, False)
        phase = _segment_phase(plan, cfg, spec, fock_dim)
        if abs(phase - target) < tol:
            break
        if not phase > 0:
            raise CalibrationError("non-positive entangling phase during calibration")
        r *= np.sqrt(phase / target)
    else:
        raise CalibrationError(f"phase {phase:.6f} did not reach {target:.6f} in {max_iter} iterations")
    an = _analytic_abs(cfg)
    return GateCalibration(plan, cfg, an, plan.omega_eff, plan.omega_eff / an, phase, it, False)


@dataclass(frozen=True)
class ReductionMeasurement:
    omega_eff_corrected: float
    reduction_factor: float
    omega_eff_analytic: float
    duration: float


def measure_reduction(config: DriveConfig, spec: IntegratorSpec | None = None, periods: int = 100,
                      fock_dim: int = 20) -> ReductionMeasurement:
    """Effective coupling from the spin-dependent displacement of one ion.

    Evolves ``|S,0>`` and ``|D,0>`` under the full single-ion Hamiltonian for
    ``periods`` cycles of the carrier beat (so the direct carrier excitation
    has returned to zero) and compares ``(<a>_S - <a>_D) / 2`` with the
    effective-model displacement.
    """
    spec = spec or IntegratorSpec()
    layout = SpaceLayout(1, fock_dim)
    delta = config.delta
    beat = config.nu - delta
    t1 = periods * TWO_PI / beat
    if delta * t1 > np.pi:  # stay within the first half loop
        t1 = np.pi / delta
    psi = evolve(DriveHamiltonian(config, layout), computational_block(layout), 0.0, t1, spec)
    a, _ = ladder_ops(fock_dim)
    A = np.kron(np.eye(2), a)
    mean_a = np.einsum("ik,ij,jk->k", psi.conj(), A, psi)
    measured = abs(mean_a[0] - mean_a[1]) / 2
    an = _analytic_abs(config)
    predicted = an / (2 * abs(delta)) * abs(1 - np.exp(1j * delta * t1))
    f = measured / predicted
    return ReductionMeasurement(f * an, f, an, t1)


@dataclass(frozen=True)
class CalibrationResult:
    omega_eff_corrected: float
    reduction_factor: float
    omega_eff_analytic: float
    method: str


def calibrate_omega_eff(config: DriveConfig, spec: IntegratorSpec | None = None, method: str = "displacement",
                        **kwargs) -> CalibrationResult:
    """Corrected ``|omega_eff|`` and its ratio to the perturbative value.

    ``method="displacement"`` uses :func:`measure_reduction` at the detuning
    of ``config``; ``method="phase"`` closes a plain gate on its entangling
    phase with :func:`calibrate_gate`.
    """
    if method == "displacement":
        m = measure_reduction(config, spec, **kwargs)
        return CalibrationResult(m.omega_eff_corrected, m.reduction_factor, m.omega_eff_analytic, method)
    if method == "phase":
        c = calibrate_gate(config, PLAIN, spec, **kwargs)
        return CalibrationResult(c.omega_eff_corrected, c.reduction_factor, c.omega_eff_analytic, method)
    raise InvalidParameterError(f"unknown calibration method {method!r}")


def drive_reduction(factors: Sequence[float], weak_drive_factor: float) -> np.ndarray:
    """Drive-induced part ``1 - f / f_weak`` of measured reduction factors."""
    return 1.0 - np.asarray(factors, dtype=float) / weak_drive_factor


def segment_unitary(schedule: SegmentSchedule, layout: SpaceLayout, spec: IntegratorSpec | None = None) -> np.ndarray:
    """Full propagator of a schedule (columns are images of basis states)."""
    return run_schedule(schedule, np.eye(layout.dim, dtype=complex), spec, layout)


__all__ = [
    "IntegratorSpec", "DriveHamiltonian", "evolve", "Pulse", "LocalUnitary", "Idle", "Segment",
    "SegmentSchedule", "run_schedule", "gate_schedule", "apply_local", "computational_block", "vacuum_block",
    "entangling_phase", "GateCalibration", "calibrate_gate", "ReductionMeasurement", "measure_reduction",
    "CalibrationResult", "calibrate_omega_eff", "drive_reduction", "segment_unitary",
]
