"""Parameter sweeps over the Lamb-Dicke parameter or the drive strength."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..errors import GeoGateError, SpecValidationError
from .config import VARIANTS, RunConfig
from .pipeline import run_variant

SWEEP_VARIABLES = ("eta", "omega_over_nu")
ETA_MAX = 0.2
OMEGA_OVER_NU_MAX = 0.5
SWEEP_VERSION = "geogate-sweep v1"


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep of ``variable`` over ``values`` for each variant.

    Parameters
    ----------
    variable : str
        ``"eta"`` or ``"omega_over_nu"``.
    values : tuple of float
        Grid points, at least two.
    base : RunConfig
        Parameters held fixed.
    variants : tuple of str
        Gate variants evaluated at every point.
    """

    variable: str
    values: tuple
    base: RunConfig = RunConfig()
    variants: tuple = ("plain", "echo", "echo-offset")

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise SpecValidationError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise SpecValidationError("a sweep needs at least two points")
        if not all(np.isfinite(vals)) or min(vals) <= 0:
            raise SpecValidationError("sweep values must be positive and finite")
        if self.variable == "eta" and max(vals) > ETA_MAX:
            raise SpecValidationError(f"eta beyond {ETA_MAX} is outside the Lamb-Dicke regime")
        if self.variable == "omega_over_nu" and max(vals) > OMEGA_OVER_NU_MAX:
            raise SpecValidationError(f"omega/nu beyond {OMEGA_OVER_NU_MAX} is outside the model's validity")
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad or not self.variants:
            raise SpecValidationError(f"unknown variants {bad}")

    @classmethod
    def linear(cls, variable: str, lo: float, hi: float, n_points: int, base: RunConfig | None = None,
               variants=("plain", "echo", "echo-offset")) -> "SweepSpec":
        if n_points < 2:
            raise SpecValidationError("a sweep needs at least two points")
        return cls(variable, tuple(np.linspace(lo, hi, n_points)), base or RunConfig(), tuple(variants))

    def points(self) -> list[RunConfig]:
        """Run configurations in output order (sweep value, then variant)."""
        return [replace(self.base, **{self.variable: v, "variant": var})
                for v in sorted(self.values) for var in self.variants]


def _point(args):
    variable, run = args
    row = {"variable": variable, "value": getattr(run, variable)}
    try:
        row.update(run_variant(run).summary())
        row["error"] = ""
    except GeoGateError as exc:
        row.update(run.params())
        row["error"] = f"{exc.category}: {exc}"
    return row


def sweep(spec: SweepSpec, workers: int | None = None) -> list[dict]:
    """Evaluate every point; failures are recorded in the row instead of aborting.

    ``workers`` > 1 uses a process pool. Rows come back in the same order
    either way, so the output does not depend on scheduling.
    """
    jobs = [(spec.variable, run) for run in spec.points()]
    workers = workers if workers is not None else min(len(jobs), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_point, jobs))
    else:
        rows = [_point(j) for j in jobs]
    return rows
