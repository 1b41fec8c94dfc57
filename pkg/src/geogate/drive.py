"""Physical drive configuration and the exact bichromatic Hamiltonian.

Frequencies are angular (rad/s) and ``hbar = 1``. For ion ``q`` and tone
``j`` the interaction-picture Hamiltonian is

    H(t) = sum_q sum_j sigma+_q (Omega_j env(t) / 2) exp(-i(Delta_j t + phi_j + theta_q))
           exp(i eta_j (a exp(-i nu t) + a_dag exp(i nu t))) + h.c.

with ``Delta_j`` the tone detuning plus the common offset ``delta_off`` and
``theta_q`` the optical phase of ion ``q`` (``0`` for ion 1, ``delta_phi`` for
ion 2). The motional factor equals ``R(t) C_j R(t)^dagger`` with
``C_j = exp(i eta_j (a + a_dag))`` and ``R(t) = exp(i nu t n)``, which is how it
is evaluated, exactly and without a Lamb-Dicke expansion.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidEnvelopeError, InvalidParameterError, LayoutMismatchError
from .hilbert import SpaceLayout, ladder_ops

TWO_PI = 2.0 * np.pi
ENVELOPE_SHAPES = ("rectangular", "sin2")


@dataclass(frozen=True)
class TrapConfig:
    """Addressed (centre-of-mass) mode; ``nu`` in rad/s."""

    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise InvalidParameterError(f"trap frequency must be positive, got {self.nu}")

    @property
    def period(self) -> float:
        return TWO_PI / self.nu


@dataclass(frozen=True)
class LaserTone:
    """One tone of the bichromatic field.

    Parameters
    ----------
    omega : float
        Rabi frequency (rad/s).
    delta : float
        Detuning from the carrier before the common offset (rad/s).
    phi : float
        Optical phase (rad).
    eta : float
        Lamb-Dicke parameter for the addressed mode.
    """

    omega: float
    delta: float
    phi: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        if self.omega < 0 or self.eta < 0:
            raise InvalidParameterError("Rabi frequency and Lamb-Dicke parameter must be non-negative")


@dataclass(frozen=True)
class EnvelopeSpec:
    """Pulse envelope: rectangular, or sin^2 ramps around a flat top."""

    shape: str = "rectangular"
    rise_time: float = 0.0
    fall_time: float = 0.0

    def __post_init__(self):
        if self.shape not in ENVELOPE_SHAPES:
            raise InvalidEnvelopeError(f"envelope shape must be one of {ENVELOPE_SHAPES}, got {self.shape!r}")
        if self.rise_time < 0 or self.fall_time < 0:
            raise InvalidEnvelopeError("ramp times must be non-negative")
        if self.shape == "sin2" and (self.rise_time == 0 or self.fall_time == 0):
            raise InvalidEnvelopeError("sin2 envelope needs positive rise and fall times")

    @property
    def shaped(self) -> bool:
        return self.shape != "rectangular"

    def check_duration(self, duration: float) -> None:
        if self.shaped and self.rise_time + self.fall_time > duration * (1 + 1e-12):
            raise InvalidEnvelopeError(
                f"ramps ({self.rise_time:.3e} + {self.fall_time:.3e} s) exceed segment duration {duration:.3e} s"
            )


@dataclass(frozen=True)
class TwoIonGeometry:
    """Beam geometry fixing the optical phase difference between the ions."""

    k_L: float = 0.0
    theta: float = 0.0
    z1: float = 0.0
    z2: float = 0.0

    @classmethod
    def from_delta_phi(cls, delta_phi: float) -> "TwoIonGeometry":
        """Geometry with unit wave number and the given phase difference."""
        return cls(k_L=1.0, theta=0.0, z1=float(delta_phi), z2=0.0)

    @property
    def delta_phi(self) -> float:
        return float(np.mod(self.k_L * np.cos(self.theta) * (self.z1 - self.z2), TWO_PI))


@dataclass(frozen=True)
class DriveConfig:
    """Complete drive description for one or two ions."""

    trap: TrapConfig
    tone1: LaserTone
    tone2: LaserTone
    delta_off: float = 0.0
    envelope: EnvelopeSpec = field(default_factory=EnvelopeSpec)
    geometry: TwoIonGeometry = field(default_factory=TwoIonGeometry)

    @classmethod
    def gate_regime(cls, nu: float, omega: float, eta: float, delta: float, delta_off: float = 0.0,
                    phi1: float = 0.0, phi2: float = 0.0, envelope: EnvelopeSpec | None = None,
                    geometry: TwoIonGeometry | None = None) -> "DriveConfig":
        """Symmetric gate drive: tones at ``+-(nu - delta) / 2`` with equal strength."""
        return cls(
            trap=TrapConfig(nu),
            tone1=LaserTone(omega, nu / 2 - delta / 2, phi1, eta),
            tone2=LaserTone(omega, -nu / 2 + delta / 2, phi2, eta),
            delta_off=delta_off,
            envelope=envelope or EnvelopeSpec(),
            geometry=geometry or TwoIonGeometry(),
        )

    @property
    def nu(self) -> float:
        return self.trap.nu

    @property
    def tones(self) -> tuple[LaserTone, LaserTone]:
        return (self.tone1, self.tone2)

    @property
    def detunings(self) -> np.ndarray:
        """Tone detunings including the common offset."""
        return np.array([self.tone1.delta, self.tone2.delta]) + self.delta_off

    @property
    def phases(self) -> np.ndarray:
        return np.array([self.tone1.phi, self.tone2.phi])

    @property
    def delta(self) -> float:
        """Two-photon detuning from the sideband resonance, ``Delta_2 - Delta_1 + nu``."""
        return self.tone2.delta - self.tone1.delta + self.nu

    @property
    def phi_L(self) -> float:
        return self.tone1.phi - self.tone2.phi - np.pi / 2

    @property
    def delta_phi(self) -> float:
        return self.geometry.delta_phi

    @property
    def eta(self) -> float:
        return self.tone1.eta

    @property
    def omega(self) -> float:
        return self.tone1.omega

    def is_gate_regime(self, rtol: float = 1e-12) -> bool:
        t1, t2 = self.tones
        scale = self.nu
        return (abs(t1.omega - t2.omega) <= rtol * max(t1.omega, 1e-300)
                and abs(t1.eta - t2.eta) <= rtol * max(t1.eta, 1e-300)
                and abs(t1.delta + t2.delta) <= rtol * scale)

    def with_gate_detuning(self, delta: float) -> "DriveConfig":
        return replace(self, tone1=replace(self.tone1, delta=self.nu / 2 - delta / 2),
                       tone2=replace(self.tone2, delta=-self.nu / 2 + delta / 2))

    def with_omega(self, omega: float) -> "DriveConfig":
        return replace(self, tone1=replace(self.tone1, omega=omega), tone2=replace(self.tone2, omega=omega))

    def with_phases(self, phi1: float, phi2: float) -> "DriveConfig":
        return replace(self, tone1=replace(self.tone1, phi=phi1), tone2=replace(self.tone2, phi=phi2))

    def with_eta(self, eta: float) -> "DriveConfig":
        return replace(self, tone1=replace(self.tone1, eta=eta), tone2=replace(self.tone2, eta=eta))

    def replace(self, **changes) -> "DriveConfig":
        return replace(self, **changes)


def envelope_value(t, spec: EnvelopeSpec, t_start: float, t_end: float):
    """Envelope of a pulse occupying ``[t_start, t_end]``; zero outside."""
    if not t_start < t_end:
        raise InvalidEnvelopeError("t_start must precede t_end")
    spec.check_duration(t_end - t_start)
    t = np.asarray(t, dtype=float)
    inside = (t >= t_start) & (t <= t_end)
    out = inside.astype(float)
    if spec.shaped:
        u = t - t_start
        v = t_end - t
        up = inside & (u < spec.rise_time)
        down = inside & (v < spec.fall_time)
        out = np.where(up, np.sin(np.pi * u / (2 * spec.rise_time)) ** 2, out)
        out = np.where(down, np.sin(np.pi * v / (2 * spec.fall_time)) ** 2, out)
    return out if out.ndim else float(out)


def tone_amplitudes(t, config: DriveConfig, window: tuple[float, float] | None = None,
                    phases=None) -> np.ndarray:
    """``Omega_j env(t) / 2 * exp(-i(Delta_j t + phi_j))`` with a trailing tone axis.

    ``window`` bounds the pulse for the envelope; without it the drive is on at
    full strength. ``phases`` overrides the tone phases.
    """
    t = np.asarray(t, dtype=float)
    env = np.ones_like(t) if window is None else np.asarray(envelope_value(t, config.envelope, *window))
    ph = config.phases if phases is None else np.asarray(phases, dtype=float)
    om = np.array([config.tone1.omega, config.tone2.omega])
    arg = config.detunings * t[..., None] + ph
    return 0.5 * om * env[..., None] * np.exp(-1j * arg)


def motional_couplings(config: DriveConfig, fock_dim: int) -> np.ndarray:
    """``C_j = exp(i eta_j (a + a_dag))`` for both tones, shape ``(2, N, N)``."""
    a, ad = ladder_ops(fock_dim)
    w, v = np.linalg.eigh(a + ad)
    return np.stack([(v * np.exp(1j * tone.eta * w)) @ v.conj().T for tone in config.tones])


def ion_phase_factors(config: DriveConfig, n_ions: int) -> np.ndarray:
    """``exp(-i theta_q)`` per ion; ion 2 carries the geometric phase difference."""
    return np.array([1.0, np.exp(-1j * config.delta_phi)], dtype=complex)[:n_ions]


def motional_block(t: float, config: DriveConfig, fock_dim: int, window=None, phases=None,
                   couplings: np.ndarray | None = None) -> np.ndarray:
    """Operator multiplying ``sigma+`` at time ``t`` (before the per-ion phase)."""
    C = motional_couplings(config, fock_dim) if couplings is None else couplings
    amp = tone_amplitudes(t, config, window, phases)
    rot = np.exp(1j * config.nu * t * np.arange(fock_dim))
    G = np.einsum("j,jmn->mn", amp, C)
    return rot[:, None] * G * rot.conj()[None, :]


def _h_exact(t, config, layout, window, phases):
    G = motional_block(t, config, layout.fock_dim, window, phases)
    u = ion_phase_factors(config, layout.n_ions)
    N = layout.fock_dim
    H = np.zeros((layout.dim, layout.dim), dtype=complex)
    for q in range(layout.n_ions):
        bit = 1 << (layout.n_ions - 1 - q)
        for s in range(layout.n_internal):
            if s & bit:
                continue
            hi = s | bit
            H[hi * N:(hi + 1) * N, s * N:(s + 1) * N] += u[q] * G
    return H + H.conj().T


def h_exact_1ion(t: float, config: DriveConfig, layout: SpaceLayout, window=None, phases=None) -> np.ndarray:
    """Exact single-ion Hamiltonian at time ``t``."""
    if layout.n_ions != 1:
        raise LayoutMismatchError("h_exact_1ion needs a single-ion layout")
    return _h_exact(t, config, layout, window, phases)


def h_exact_2ion(t: float, config: DriveConfig, layout: SpaceLayout, window=None, phases=None) -> np.ndarray:
    """Exact two-ion Hamiltonian on the shared mode at time ``t``."""
    if layout.n_ions != 2:
        raise LayoutMismatchError("h_exact_2ion needs a two-ion layout")
    return _h_exact(t, config, layout, window, phases)


def h_exact(t: float, config: DriveConfig, layout: SpaceLayout, window=None, phases=None) -> np.ndarray:
    """Dispatch on the number of ions."""
    return _h_exact(t, config, layout, window, phases)
