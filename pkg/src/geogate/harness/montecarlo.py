"""Quasi-static Monte Carlo over technical fluctuations.

Each shot draws fixed (within the gate) errors and evolves the calibrated gate
without recalibrating:

* relative Rabi frequency error common to both tones, ``N(0, intensity_rel)``;
* common laser frequency error added to both tone detunings,
  ``2 pi N(0, laser_freq_jitter_hz)``;
* trap frequency error with the laser frequencies held fixed, which detunes
  the loop, ``2 pi N(0, trap_freq_jitter_hz)``;
* initial phonon number drawn from the thermal distribution with mean
  ``n_bar`` (a Fock state per shot, so the shot average reproduces the
  thermal mixture).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..drive import TWO_PI, DriveConfig, TrapConfig
from ..hilbert import SpaceLayout
from ..metrics import report_from_columns
from ..propagator import GateCalibration, computational_block, gate_schedule, run_schedule
from .config import FluctuationSpec, RunConfig
from .pipeline import calibrate

CHANNELS = ("intensity", "laser_freq", "trap_freq", "thermal")
THERMAL_TAIL = 1e-3


@dataclass(frozen=True)
class Shot:
    intensity: float = 0.0
    laser_freq: float = 0.0
    trap_freq: float = 0.0
    n: int = 0


def perturbed_config(config: DriveConfig, shot: Shot) -> DriveConfig:
    """Drive with the shot's errors applied (``laser_freq`` and ``trap_freq`` in rad/s)."""
    cfg = config.with_omega(config.omega * (1 + shot.intensity))
    return cfg.replace(delta_off=cfg.delta_off + shot.laser_freq, trap=TrapConfig(cfg.nu + shot.trap_freq))


def shot_infidelity(cal: GateCalibration, shot: Shot, run: RunConfig) -> float:
    """CNOT infidelity of the ``|DD>`` input for one realization."""
    layout = SpaceLayout(2, run.fock_dim)
    sched = gate_schedule(cal.plan, perturbed_config(cal.config, shot), check=False)
    cols = run_schedule(sched, computational_block(layout, shot.n), run.integrator(), layout)
    return report_from_columns(cols, layout, "DD").infidelity


def sample_shots(fluct: FluctuationSpec, n_max: int, rng: np.random.Generator) -> list[Shot]:
    """Draw ``fluct.n_samples`` shots; phonon numbers above ``n_max`` are clipped."""
    z = rng.standard_normal((fluct.n_samples, 3))
    n = rng.geometric(1.0 / (1.0 + fluct.n_bar), fluct.n_samples) - 1
    n = np.minimum(n, n_max)
    scale = np.array([fluct.intensity_rel, TWO_PI * fluct.laser_freq_jitter_hz, TWO_PI * fluct.trap_freq_jitter_hz])
    return [Shot(*(z[i] * scale), int(n[i])) for i in range(fluct.n_samples)]


@dataclass(frozen=True)
class MonteCarloResult:
    """Shot statistics and one-at-a-time sensitivities.

    ``sensitivities[c]`` is the infidelity change with only channel ``c``
    active: a +1 sigma offset for the three quasi-static channels, and the
    exact thermal average (tail below ``THERMAL_TAIL``) for ``thermal``.
    """

    infidelities: np.ndarray
    shots: tuple
    nominal: float
    sensitivities: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def mean(self) -> float:
        return float(np.mean(self.infidelities))

    @property
    def median(self) -> float:
        return float(np.median(self.infidelities))

    @property
    def p95(self) -> float:
        return float(np.percentile(self.infidelities, 95))

    def summary(self) -> dict:
        out = {"n_samples": len(self.infidelities), "seed": self.seed, "nominal": self.nominal,
               "mean": self.mean, "median": self.median, "p95": self.p95}
        out.update({f"sens_{k}": v for k, v in self.sensitivities.items()})
        return out

    def rows(self) -> list[dict]:
        return [{"shot": i, "intensity_rel": s.intensity, "laser_freq_rad_s": s.laser_freq,
                 "trap_freq_rad_s": s.trap_freq, "n": s.n, "infidelity": float(f)}
                for i, (s, f) in enumerate(zip(self.shots, self.infidelities))]


def _job(args):
    return shot_infidelity(*args)


def _map(jobs, workers):
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_job, jobs))
    return [_job(j) for j in jobs]


def sensitivity_shots(fluct: FluctuationSpec, n_max: int) -> dict:
    """Single-channel realizations and weights used for the sensitivities."""
    out = {
        "intensity": [(Shot(intensity=fluct.intensity_rel), 1.0)],
        "laser_freq": [(Shot(laser_freq=TWO_PI * fluct.laser_freq_jitter_hz), 1.0)],
        "trap_freq": [(Shot(trap_freq=TWO_PI * fluct.trap_freq_jitter_hz), 1.0)],
    }
    q = fluct.n_bar / (1 + fluct.n_bar)
    top = 0 if q == 0 else min(n_max, int(np.ceil(np.log(THERMAL_TAIL) / np.log(q))))
    p = (1 - q) * q ** np.arange(top + 1)
    out["thermal"] = [(Shot(n=k), w) for k, w in enumerate(p / p.sum())]
    return out


def monte_carlo(run: RunConfig, fluct: FluctuationSpec | None = None, calibration: GateCalibration | None = None,
                sensitivities: bool = True, workers: int | None = None) -> MonteCarloResult:
    """Shot statistics of the ``|DD>`` CNOT infidelity for the variant in ``run``.

    The generator is seeded from ``fluct.rng_seed`` so results are reproducible.
    """
    fluct = fluct or run.fluctuations
    cal = calibration or calibrate(run)
    rng = np.random.default_rng(fluct.rng_seed)
    n_max = run.fock_dim // 2
    shots = sample_shots(fluct, n_max, rng)
    workers = workers if workers is not None else (os.cpu_count() or 1)
    nominal = shot_infidelity(cal, Shot(), run)
    infid = np.array(_map([(cal, s, run) for s in shots], workers))
    sens = {}
    if sensitivities:
        table = sensitivity_shots(fluct, n_max)
        flat = [(c, s, w) for c in CHANNELS for s, w in table[c]]
        vals = _map([(cal, s, run) for _, s, _ in flat], workers)
        for c in CHANNELS:
            sens[c] = float(sum(w * v for (cc, _, w), v in zip(flat, vals) if cc == c)) - nominal
    return MonteCarloResult(infid, tuple(shots), nominal, sens, fluct.rng_seed)
