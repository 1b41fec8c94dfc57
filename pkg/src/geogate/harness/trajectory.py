"""Phase-space trajectory export for one ion."""

from __future__ import annotations

import numpy as np

from ..analytic import alpha_phi_trajectory, omega_eff_1ion
from ..drive import TWO_PI, DriveConfig, EnvelopeSpec
from ..hilbert import SpaceLayout, ladder_ops
from ..propagator import DriveHamiltonian, IntegratorSpec, computational_block, evolve
from .config import RunConfig

TRAJECTORY_VERSION = "geogate-trajectory v1"


def trajectory_config(run: RunConfig) -> DriveConfig:
    """Rectangular drive at ``delta = 2 |omega_eff|`` without the offset detuning."""
    cfg = run.with_(variant="plain").drive_config().replace(envelope=EnvelopeSpec())
    for _ in range(3):
        cfg = cfg.with_gate_detuning(2 * abs(omega_eff_1ion(cfg)))
    return cfg


def full_model_displacement(config: DriveConfig, times, spec: IntegratorSpec | None = None,
                            fock_dim: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """``<a>`` for the internal states ``S`` and ``D`` of one ion at each time.

    The ion starts in the motional ground state with the given internal state.
    """
    spec = spec or IntegratorSpec()
    layout = SpaceLayout(1, fock_dim)
    a, _ = ladder_ops(fock_dim)
    A = np.kron(np.eye(2), a)
    ham = DriveHamiltonian(config, layout)
    psi = computational_block(layout)
    out = np.zeros((len(times), 2), dtype=complex)
    t_prev = 0.0
    for i, t in enumerate(times):
        if t > t_prev:
            psi = evolve(ham, psi, t_prev, t, spec)
            t_prev = t
        out[i] = np.einsum("ik,ij,jk->k", psi.conj(), A, psi)
    return out[:, 0], out[:, 1]


def trajectory_table(run: RunConfig, n_points: int = 201, full_model: bool = True) -> list[dict]:
    """Analytic ``alpha(t)``, ``Phi(t)`` over one loop, with full-model companions.

    ``alpha_full`` is ``(<a>_D - <a>_S) / 2``, the spin-dependent part of the
    displacement, which the analytic ``alpha`` describes.
    """
    cfg = trajectory_config(run)
    om = omega_eff_1ion(cfg)
    times = np.linspace(0.0, TWO_PI / cfg.delta, n_points)
    alpha, phi = alpha_phi_trajectory(times, om, cfg.delta)
    if full_model:
        a_s, a_d = full_model_displacement(cfg, times, run.integrator(), run.fock_dim)
    rows = []
    for i, t in enumerate(times):
        row = {"t_s": float(t), "alpha_re": float(alpha[i].real), "alpha_im": float(alpha[i].imag),
               "phi": float(phi[i])}
        if full_model:
            af = (a_d[i] - a_s[i]) / 2
            row.update({"alpha_full_re": float(af.real), "alpha_full_im": float(af.imag),
                        "a_D_re": float(a_d[i].real), "a_D_im": float(a_d[i].imag),
                        "a_S_re": float(a_s[i].real), "a_S_im": float(a_s[i].imag)})
        rows.append(row)
    return rows
