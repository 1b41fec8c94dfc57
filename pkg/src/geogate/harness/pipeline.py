"""Calibrate, run and score one gate variant."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..analytic import PLAIN
from ..errors import ConfigError
from ..hilbert import SpaceLayout
from ..metrics import GateReport, average_infidelity, report_from_columns, with_spontaneous_emission
from ..propagator import (
    GateCalibration,
    SegmentSchedule,
    calibrate_gate,
    computational_block,
    gate_schedule,
    run_schedule,
)
from .config import RunConfig


@dataclass(frozen=True)
class GateRun:
    """Calibrated gate and its reports for the four computational inputs."""

    run: RunConfig
    calibration: GateCalibration
    reports: tuple
    second_phase: float = 0.0

    def report(self, input_state: str = "DD") -> GateReport:
        for r in self.reports:
            if r.input_state == input_state:
                return r
        raise KeyError(input_state)

    @property
    def average_infidelity(self) -> float:
        return average_infidelity(self.reports)

    def summary(self) -> dict:
        """Flat row: headline numbers, calibration data and the resolved parameters."""
        dd = self.report("DD")
        cal = self.calibration
        return {
            "infidelity": dd.infidelity,
            "infidelity_avg": self.average_infidelity,
            "gate_phase": dd.gate_phase,
            "motional_residual": dd.motional_residual,
            "gate_time_s": dd.gate_time,
            "p_sp": dd.p_sp,
            "total_error": dd.total_error,
            "omega_eff_analytic": cal.omega_eff_analytic,
            "omega_eff_corrected": cal.omega_eff_corrected,
            "reduction_factor": cal.reduction_factor,
            "delta_rad_s": cal.plan.delta,
            "loop_time_s": cal.plan.loop_time,
            "omega_rad_s": cal.config.omega,
            "second_phase": self.second_phase,
            **self.run.params(),
        }


def calibrate(run: RunConfig) -> GateCalibration:
    if run.n_ions != 2:
        raise ConfigError("gate runs need n_ions = 2")
    return calibrate_gate(run.drive_config(), run.mode, run.integrator(), run.fock_dim,
                          commensurate=run.commensurate)


def _scores(cols, run: RunConfig, cal: GateCalibration) -> list[GateReport]:
    layout = SpaceLayout(2, run.fock_dim)
    out = []
    for s in ("SS", "SD", "DS", "DD"):
        r = report_from_columns(cols, layout, s, cal.plan.gate_time, run.params())
        out.append(with_spontaneous_emission(r, run.tau_d_s, run.n_ions))
    return out


def second_phase_scan(run: RunConfig, cal: GateCalibration, n_grid: int) -> tuple[float, list[GateReport]]:
    """Shift the tone phase difference of the second segment and keep the best grid point.

    The shift ``chi`` enters as ``(phi1 + chi/2, phi2 - chi/2)``, which rotates
    the second loop by ``chi`` in phase space. The first segment is simulated
    once and reused.
    """
    layout = SpaceLayout(2, run.fock_dim)
    sched = gate_schedule(cal.plan, cal.config)
    head = SegmentSchedule(sched.segments[:3])
    psi_mid = run_schedule(head, computational_block(layout), run.integrator(), layout)
    phi1, phi2 = cal.config.phases
    best = None
    for chi in np.linspace(0.0, 2 * np.pi, n_grid, endpoint=False):
        tail = gate_schedule(cal.plan, cal.config, second_phases=(phi1 + chi / 2, phi2 - chi / 2))
        cols = run_schedule(SegmentSchedule(tail.segments[3:]), psi_mid, run.integrator(), layout,
                            t0=cal.plan.loop_time)
        reps = _scores(cols, run, cal)
        score = reps[3].infidelity
        if best is None or score < best[0]:
            best = (score, float(chi), reps)
    return best[1], best[2]


def run_variant(run: RunConfig, calibration: GateCalibration | None = None) -> GateRun:
    """Calibrate (unless given) and simulate the gate described by ``run``."""
    cal = calibration or calibrate(run)
    layout = SpaceLayout(2, run.fock_dim)
    if run.phase_scan > 1 and run.mode != PLAIN:
        chi, reps = second_phase_scan(run, cal, run.phase_scan)
        return GateRun(run, cal, tuple(reps), chi)
    cols = run_schedule(gate_schedule(cal.plan, cal.config), computational_block(layout), run.integrator(), layout)
    return GateRun(run, cal, tuple(_scores(cols, run, cal)))
