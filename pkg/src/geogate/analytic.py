"""Closed-form results for the light-shift geometric phase gate.

Covers the second-order effective coupling and light shift of a bichromatic
drive, the state-dependent displacement it generates, approximate two-ion gate
unitaries on the internal space, the spin-echo identity, the direct-coupling
error law, the spontaneous-emission budget, and the timing design of gates
with shaped envelopes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson, trapezoid
from scipy.linalg import expm
from scipy.optimize import brentq

from .drive import TWO_PI, DriveConfig, EnvelopeSpec, TwoIonGeometry, envelope_value
from .errors import (
    DegenerateLoopError,
    InvalidEnvelopeError,
    InvalidParameterError,
    LayoutMismatchError,
    PlanMismatchError,
    SingularConfigurationError,
)
from .hilbert import (
    I2,
    SIGMA_Y,
    SIGMA_Z,
    SpaceLayout,
    collective_sz,
    displacement,
    kron,
    ladder_ops,
    number_op,
    phase_distance,
    sigma_phi,
)

PLAIN, SPIN_ECHO = "plain", "spin_echo"


def _check_divisors(named: dict[str, float], scale: float) -> None:
    for name, value in named.items():
        if abs(value) <= 1e-12 * scale:
            raise SingularConfigurationError(f"resonant divisor: {name} = 0")


def omega_eff_1ion(config: DriveConfig) -> complex:
    """Effective sideband Raman coupling of one ion.

    Uses ``Delta = Delta_1`` and ``delta = Delta_2 - Delta_1 + nu`` (offset
    included), so any tone pair is accepted.
    """
    t1, t2 = config.tones
    nu = config.nu
    Dl = config.detunings[0]
    dl = config.delta
    _check_divisors({"Delta_1": Dl, "Delta_1 - nu": Dl - nu, "Delta_1 - nu + delta": Dl - nu + dl,
                     "Delta_1 + delta": Dl + dl}, nu)
    bracket = (t1.eta * (Dl - nu + dl / 2) / ((Dl - nu) * (Dl - nu + dl))
               - t2.eta * (Dl + dl / 2) / (Dl * (Dl + dl)))
    return complex(bracket * t1.omega * t2.omega / 2 * np.exp(-1j * config.phi_L))


def light_shift_parts(config: DriveConfig) -> tuple[float, float]:
    """Carrier coefficient and sideband coefficient per ``n + 1/2`` of the sigma_z shift."""
    nu = config.nu
    carrier = sideband = 0.0
    for j, (tone, Dj) in enumerate(zip(config.tones, config.detunings), start=1):
        _check_divisors({f"Delta_{j}": Dj, f"Delta_{j} + nu": Dj + nu, f"Delta_{j} - nu": Dj - nu}, nu)
        carrier += -tone.omega**2 / (4 * Dj)
        sideband += -tone.omega**2 * (tone.eta**2 / (4 * (Dj + nu)) - tone.eta**2 / (4 * (Dj - nu)))
    return carrier, sideband


def light_shift(config: DriveConfig, n: float) -> float:
    """Coefficient of ``sigma_z`` in the light shift for phonon number ``n``."""
    carrier, sideband = light_shift_parts(config)
    return carrier + sideband * (n + 0.5)


def alpha_phi_trajectory(t, omega_eff: complex, delta: float):
    """Phase-space displacement and accumulated phase of one ion.

    ``alpha(t) = conj(omega_eff) / (2 delta) (1 - exp(i delta t))`` and
    ``Phi(t) = |omega_eff / (2 delta)|**2 (delta t - sin(delta t))``. The
    conjugate makes ``alpha`` the exact solution for complex couplings; for a
    real coupling it is immaterial.
    """
    if delta == 0:
        raise DegenerateLoopError("gate detuning delta must be nonzero")
    t = np.asarray(t, dtype=float)
    alpha = np.conj(omega_eff) / (2 * delta) * (1 - np.exp(1j * delta * t))
    phi = abs(omega_eff / (2 * delta)) ** 2 * (delta * t - np.sin(delta * t))
    return alpha, phi


@dataclass(frozen=True)
class EffectiveParams:
    """Quantities of the effective gate Hamiltonian."""

    omega_eff: complex
    phi_L: float
    delta: float
    ls_carrier: float = 0.0
    ls_sideband: float = 0.0
    eta: float = 0.0

    @classmethod
    def from_config(cls, config: DriveConfig) -> "EffectiveParams":
        carrier, sideband = light_shift_parts(config)
        return cls(omega_eff_1ion(config), config.phi_L, config.delta, carrier, sideband, config.eta)

    @property
    def abs_omega_eff(self) -> float:
        return abs(self.omega_eff)


def h_eff_1ion(t: float, params: EffectiveParams, layout: SpaceLayout, light_shift: bool = False) -> np.ndarray:
    """Single-ion state-dependent force, optionally with the light shift."""
    if layout.n_ions != 1:
        raise LayoutMismatchError("h_eff_1ion needs a single-ion layout")
    a, ad = ladder_ops(layout.fock_dim)
    c = params.omega_eff / 2 * np.exp(-1j * params.delta * t)
    H = np.kron(SIGMA_Z, c * a + np.conj(c) * ad)
    if light_shift:
        n = number_op(layout.fock_dim)
        H = H + np.kron(SIGMA_Z, params.ls_carrier * np.eye(layout.fock_dim)
                        + params.ls_sideband * (n + 0.5 * np.eye(layout.fock_dim)))
    return H


def effective_u1(t: float, params: EffectiveParams, layout: SpaceLayout) -> np.ndarray:
    """``exp((alpha a_dag - alpha* a) sigma_z) exp(i Phi)`` on one ion."""
    if layout.n_ions != 1:
        raise LayoutMismatchError("effective_u1 needs a single-ion layout")
    alpha, phi = alpha_phi_trajectory(t, params.omega_eff, params.delta)
    blocks = [displacement(-alpha, layout.fock_dim), displacement(alpha, layout.fock_dim)]
    U = np.zeros((layout.dim, layout.dim), dtype=complex)
    N = layout.fock_dim
    for s, Ds in enumerate(blocks):
        U[s * N:(s + 1) * N, s * N:(s + 1) * N] = Ds
    return np.exp(1j * phi) * U


def ms_operator(delta_phi: float) -> np.ndarray:
    """``sigma_1^(-delta_phi/2) (x) sigma_2^(delta_phi/2)`` on the internal space."""
    return np.kron(sigma_phi(-delta_phi / 2), sigma_phi(delta_phi / 2))


def h_eff_2ion(t: float, params: EffectiveParams, geometry: TwoIonGeometry, layout: SpaceLayout) -> np.ndarray:
    """Two-ion effective Hamiltonian: collective force plus the residual MS term."""
    if layout.n_ions != 2:
        raise LayoutMismatchError("h_eff_2ion needs a two-ion layout")
    a, ad = ladder_ops(layout.fock_dim)
    om = params.abs_omega_eff
    ph = np.exp(-1j * (params.delta * t + params.phi_L))
    force = np.kron(collective_sz(2), om / 2 * (ph * a + np.conj(ph) * ad))
    ms = (4.0 / 3.0) * params.eta * om / 2 * np.kron(ms_operator(geometry.delta_phi), np.eye(layout.fock_dim))
    return force + ms


def ideal_phase_gate() -> np.ndarray:
    """``exp(i pi/2 (S^z/2)^2)``, i.e. ``diag(i, 1, 1, i)``."""
    P = (collective_sz(2) / 2) @ (collective_sz(2) / 2)
    return expm(1j * np.pi / 2 * P)


def _half_sz_squared() -> np.ndarray:
    Sz = collective_sz(2) / 2
    return Sz @ Sz


def u2_gate_approx(eta: float, delta_phi: float = 0.0) -> np.ndarray:
    """Plain gate at loop closure including the residual MS rotation."""
    return expm(1j * np.pi / 2 * _half_sz_squared()) @ expm(-1j * 2 * np.pi * eta / 3 * ms_operator(delta_phi))


def u2_echo_approx(eta: float, delta_phi: float = 0.0) -> np.ndarray:
    """One half of the spin-echo gate (quarter phase, reduced MS rotation)."""
    return (expm(1j * np.pi / 4 * _half_sz_squared())
            @ expm(-1j * 2 * np.pi * eta / (3 * np.sqrt(2)) * ms_operator(delta_phi)))


def echo_pulse() -> np.ndarray:
    """``exp(i pi/2 (sigma_y1 + sigma_y2))``: swaps S and D on both ions."""
    return kron(expm(1j * np.pi / 2 * SIGMA_Y), expm(1j * np.pi / 2 * SIGMA_Y))


def sz_rotation(angle: float, ion: int = 1) -> np.ndarray:
    """``exp(i angle sigma_z)`` on one ion of the pair."""
    R = expm(1j * angle * SIGMA_Z)
    return kron(R, I2) if ion == 1 else kron(I2, R)


# Relative S/D phase of pi: anticommutes with the MS operator at zero phase difference.
ECHO_CORRECTOR_ANGLE = np.pi / 2


def echo_identity_residual(eta: float, delta_phi: float = 0.0, corrector_angle: float = ECHO_CORRECTOR_ANGLE,
                           corrector_ion: int = 1, closing_frame: bool = True) -> float:
    """Distance, up to global phase, between the composed echo and the ideal gate.

    The sequence in time order is ``U_echo``, corrector ``exp(i angle sigma_z)``,
    echo pulse, ``U_echo``, echo pulse and, with ``closing_frame``, the inverse
    corrector.
    """
    U = u2_echo_approx(eta, delta_phi)
    Y = echo_pulse()
    Z = sz_rotation(corrector_angle, corrector_ion)
    total = Y @ U @ Y @ Z @ U
    if closing_frame:
        total = Z.conj().T @ total
    return phase_distance(total, ideal_phase_gate())


def offres_population_error(omega: float, nu: float, t):
    """Direct-coupling population error ``(omega / (nu/2))**2 sin^2(nu t / 4)``."""
    return (omega / (nu / 2)) ** 2 * np.sin(nu * np.asarray(t) / 4) ** 2


def spontaneous_emission_prob(t_gate, tau_D: float, n_ions: int = 2, d_weight: float = 1.0):
    """Linear exposure estimate ``n_ions * d_weight * t_gate / tau_D``."""
    if tau_D <= 0:
        raise InvalidParameterError("tau_D must be positive")
    return n_ions * d_weight * np.asarray(t_gate, dtype=float) / tau_D


def implied_lifetime(t_gate: float = 100e-6, p_budget: float = 1e-4, n_ions: int = 2, d_weight: float = 1.0) -> float:
    """Lifetime for which ``spontaneous_emission_prob(t_gate) == p_budget``."""
    return n_ions * d_weight * t_gate / p_budget


# ---------------------------------------------------------------------------
# gate timing

def loop_integrals(duration: float, delta: float, envelope: EnvelopeSpec, n: int = 20001):
    """End-point displacement and single-ion phase for unit effective coupling.

    The effective coupling scales with the square of the optical envelope, so
    both integrals weight the force by ``env(t)**2``.

    Returns
    -------
    alpha_end : complex
        ``alpha(T)`` per unit ``|omega_eff|``.
    phase : float
        Single-ion geometric phase per ``|omega_eff|**2``.
    """

    t = np.linspace(0.0, duration, n)
    f = np.asarray(envelope_value(t, envelope, 0.0, duration)) ** 2
    dalpha = 0.5 * f * np.exp(1j * delta * t)
    alpha = cumulative_trapezoid(dalpha, t, initial=0)
    phase = trapezoid(np.imag(np.conj(alpha) * dalpha), t)
    return alpha[-1], float(phase)


def closure_delta(duration: float, envelope: EnvelopeSpec, n: int = 4001) -> float:
    """Smallest detuning for which the envelope-weighted loop closes."""

    d0 = TWO_PI / duration
    if not envelope.shaped:
        return d0
    t = np.linspace(0.0, duration, n)
    f = np.asarray(envelope_value(t, envelope, 0.0, duration)) ** 2
    if envelope.rise_time != envelope.fall_time:
        raise InvalidEnvelopeError("loop closure with shaped pulses needs equal rise and fall times")

    # for a symmetric envelope alpha(T) = exp(i d T / 2) * g(d) / 2 with g real
    def g(d):
        return simpson(f * np.cos(d * (t - duration / 2)), x=t)

    grid = np.linspace(0.99 * d0, 3.5 * d0, 80)
    vals = [g(x) for x in grid]
    for lo, hi, vlo, vhi in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if vlo * vhi < 0:
            return brentq(g, lo, hi, xtol=1e-13 * d0)
    raise DegenerateLoopError("no loop-closing detuning found for this envelope")


@dataclass(frozen=True)
class GatePlan:
    """Timing of a plain or spin-echo gate.

    ``loop_time`` is the duration of one bichromatic segment; for rectangular
    pulses it equals ``2 pi / delta``. With shaped pulses the detuning is the
    one that closes the envelope-weighted loop in ``loop_time``.
    """

    mode: str
    delta: float
    loop_time: float
    target_phase: float
    omega_eff: float = 0.0

    def __post_init__(self):
        if self.mode not in (PLAIN, SPIN_ECHO):
            raise InvalidParameterError(f"unknown gate mode {self.mode!r}")
        if self.delta <= 0 or self.loop_time <= 0:
            raise DegenerateLoopError("gate detuning and loop time must be positive")

    @property
    def n_segments(self) -> int:
        return 1 if self.mode == PLAIN else 2

    @property
    def gate_time(self) -> float:
        return self.n_segments * self.loop_time

    @classmethod
    def plain(cls, omega_eff: float) -> "GatePlan":
        d = 2 * abs(omega_eff)
        return cls(PLAIN, d, TWO_PI / d, np.pi / 2, abs(omega_eff))

    @classmethod
    def spin_echo(cls, omega_eff: float) -> "GatePlan":
        d = 2 * np.sqrt(2) * abs(omega_eff)
        return cls(SPIN_ECHO, d, TWO_PI / d, np.pi / 4, abs(omega_eff))

    @classmethod
    def design(cls, mode: str, omega_eff: float, envelope: EnvelopeSpec | None = None,
               commensurate_nu: float | None = None) -> "GatePlan":
        """Plan for a given coupling and envelope.

        ``commensurate_nu`` rounds a rectangular-pulse detuning to ``nu / 2N``
        so that the direct carrier excitation vanishes at loop closure; the
        entangling phase then differs slightly from target and the drive
        amplitude must be calibrated.
        """
        base = cls.plain(omega_eff) if mode == PLAIN else cls.spin_echo(omega_eff)
        envelope = envelope or EnvelopeSpec()
        if envelope.shaped:
            return _design_shaped(base, envelope)
        if commensurate_nu:
            n_half = max(1, round(commensurate_nu / (2 * base.delta)))
            d = commensurate_nu / (2 * n_half)
            return cls(mode, d, TWO_PI / d, base.target_phase, abs(omega_eff))
        return base

    def phase_per_segment(self, omega_eff: float, envelope: EnvelopeSpec | None = None) -> float:
        """Entangling phase one segment would produce at coupling ``omega_eff``."""
        envelope = envelope or EnvelopeSpec()
        _, ph = loop_integrals(self.loop_time, self.delta, envelope)
        return 4 * abs(omega_eff) ** 2 * ph

    def check_config(self, config: DriveConfig, rtol: float = 1e-9) -> None:
        if abs(config.delta - self.delta) > rtol * self.delta:
            raise PlanMismatchError(f"config detuning {config.delta:.6e} does not match plan {self.delta:.6e}")


def _design_shaped(base: GatePlan, envelope: EnvelopeSpec) -> GatePlan:
    om2 = base.omega_eff**2
    floor = (envelope.rise_time + envelope.fall_time) * 1.0001

    def h(T):
        d = closure_delta(T, envelope)
        return 4 * om2 * loop_integrals(T, d, envelope)[1] - base.target_phase

    lo = max(0.9 * base.loop_time, floor)
    hi = lo * 1.25
    for _ in range(40):
        if h(lo) > 0:
            lo = max(lo / 1.25, floor)
            if lo == floor and h(lo) > 0:
                raise DegenerateLoopError("ramps too long for the requested phase")
            continue
        if h(hi) > 0:
            break
        lo, hi = hi, hi * 1.25
    else:
        raise DegenerateLoopError("could not bracket the shaped loop time")
    T = brentq(h, lo, hi, xtol=1e-15)
    return GatePlan(base.mode, closure_delta(T, envelope), T, base.target_phase, base.omega_eff)
