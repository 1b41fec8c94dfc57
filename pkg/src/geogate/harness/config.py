"""Run configuration files.

A configuration is a YAML (or JSON) mapping. Frequencies are given in Hz and
converted to angular frequencies internally. Recognized keys::

    nu_hz: 1.26e6            # trap frequency of the addressed mode
    omega_over_nu: 0.1667    # Rabi frequency of each tone in units of nu
    eta: 0.056               # Lamb-Dicke parameter
    delta_off_hz: 20.0e3     # offset detuning used by the echo-offset variant
    phi1: 0.0                # tone phases (rad)
    phi2: 0.0
    envelope: {shape: sin2, rise_us: 10, fall_us: 10}
    geometry: {delta_phi: 0.0}
    fock_dim: 20
    n_ions: 2
    variant: echo-offset     # plain | echo | echo-offset
    method: cf4              # cf4 | midpoint
    step_div: 50             # integrator steps per trap period
    tau_d_s: 2.0             # D-state lifetime for the spontaneous-emission column
    phase_scan: 0            # grid size of the second-pulse phase scan (0 = off)
    commensurate: true       # rectangular pulses: round delta to nu / 2N
    sweep: {eta: [0.02, 0.1, 5], omega_over_nu: [0.0833, 0.25, 5]}
    fluctuations: {intensity_rel: 0.01, laser_freq_jitter_hz: 200, trap_freq_jitter_hz: 3,
                   n_bar: 0.5, n_samples: 32}
    seed: 12345

Unknown keys are rejected so that typos do not silently fall back to defaults.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from ..analytic import PLAIN, SPIN_ECHO, implied_lifetime
from ..drive import TWO_PI, DriveConfig, EnvelopeSpec, TwoIonGeometry
from ..errors import ConfigError, GeoGateError
from ..propagator import IntegratorSpec

VARIANTS = {"plain": (PLAIN, False), "echo": (SPIN_ECHO, False), "echo-offset": (SPIN_ECHO, True)}
DEFAULT_TAU_D = implied_lifetime()


@dataclass(frozen=True)
class FluctuationSpec:
    """Quasi-static noise magnitudes (one standard deviation per shot)."""

    intensity_rel: float = 1e-2
    laser_freq_jitter_hz: float = 200.0
    trap_freq_jitter_hz: float = 3.0
    n_bar: float = 0.5
    n_samples: int = 32
    rng_seed: int = 12345

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ConfigError(f"fluctuation parameter {f.name} must be non-negative")
        if self.n_samples < 1:
            raise ConfigError("n_samples must be at least 1")


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameters of a run, in the units of the configuration file."""

    nu_hz: float = 1.26e6
    omega_over_nu: float = 1.0 / 6.0
    eta: float = 0.056
    delta_off_hz: float = 20e3
    phi1: float = 0.0
    phi2: float = 0.0
    envelope_shape: str = "sin2"
    rise_us: float = 10.0
    fall_us: float = 10.0
    delta_phi: float = 0.0
    fock_dim: int = 20
    n_ions: int = 2
    variant: str = "echo-offset"
    method: str = "cf4"
    step_div: int = 50
    tau_d_s: float = DEFAULT_TAU_D
    phase_scan: int = 0
    commensurate: bool = True
    seed: int = 12345
    sweep_eta: tuple = (0.02, 0.1, 5)
    sweep_omega_over_nu: tuple = (1.0 / 12.0, 0.25, 5)
    fluctuations: FluctuationSpec = field(default_factory=FluctuationSpec)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {sorted(VARIANTS)}, got {self.variant!r}")
        if self.n_ions not in (1, 2):
            raise ConfigError("n_ions must be 1 or 2")
        if self.nu_hz <= 0 or self.omega_over_nu <= 0 or self.eta < 0:
            raise ConfigError("nu_hz and omega_over_nu must be positive and eta non-negative")

    @property
    def nu(self) -> float:
        return TWO_PI * self.nu_hz

    @property
    def mode(self) -> str:
        return VARIANTS[self.variant][0]

    @property
    def uses_offset(self) -> bool:
        return VARIANTS[self.variant][1]

    def envelope(self) -> EnvelopeSpec:
        if self.envelope_shape == "rectangular":
            return EnvelopeSpec()
        return EnvelopeSpec(self.envelope_shape, self.rise_us * 1e-6, self.fall_us * 1e-6)

    def integrator(self) -> IntegratorSpec:
        return IntegratorSpec(self.method, self.step_div)

    def drive_config(self) -> DriveConfig:
        """Gate-regime drive with the nominal detuning ``delta = 2 |omega_eff|``."""
        nu = self.nu
        omega = self.omega_over_nu * nu
        delta = 4 * self.eta * omega**2 / nu or 1e-3 * nu
        return DriveConfig.gate_regime(
            nu, omega, self.eta, delta, TWO_PI * self.delta_off_hz if self.uses_offset else 0.0,
            self.phi1, self.phi2, self.envelope(), TwoIonGeometry.from_delta_phi(self.delta_phi))

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def params(self) -> dict:
        """Flat resolved parameter set written next to every result."""
        d = {k: v for k, v in asdict(self).items() if k not in ("fluctuations", "sweep_eta", "sweep_omega_over_nu")}
        if not self.uses_offset:
            d["delta_off_hz"] = 0.0
        return d


_SCALAR_KEYS = {"nu_hz": float, "omega_over_nu": float, "eta": float, "delta_off_hz": float, "phi1": float,
                "phi2": float, "fock_dim": int, "n_ions": int, "variant": str, "method": str, "step_div": int,
                "tau_d_s": float, "phase_scan": int, "commensurate": bool, "seed": int}


def _range(value, key):
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"sweep.{key} must be [min, max, n_points]")
    lo, hi, n = value
    return (float(lo), float(hi), int(n))


def config_from_mapping(data: dict) -> RunConfig:
    """Build a :class:`RunConfig` from a parsed mapping."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping of keys to values")
    kw = {}
    for key, value in data.items():
        if key in _SCALAR_KEYS:
            try:
                kw[key] = _SCALAR_KEYS[key](value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {value!r}") from exc
        elif key == "envelope":
            env = dict(value or {})
            unknown = set(env) - {"shape", "rise_us", "fall_us"}
            if unknown:
                raise ConfigError(f"unknown envelope keys {sorted(unknown)}")
            kw["envelope_shape"] = str(env.get("shape", "sin2"))
            kw["rise_us"] = float(env.get("rise_us", 10.0))
            kw["fall_us"] = float(env.get("fall_us", kw["rise_us"]))
        elif key == "geometry":
            geo = dict(value or {})
            if set(geo) - {"delta_phi"}:
                raise ConfigError(f"unknown geometry keys {sorted(set(geo) - {'delta_phi'})}")
            kw["delta_phi"] = float(geo.get("delta_phi", 0.0))
        elif key == "sweep":
            sw = dict(value or {})
            if set(sw) - {"eta", "omega_over_nu"}:
                raise ConfigError(f"unknown sweep keys {sorted(set(sw) - {'eta', 'omega_over_nu'})}")
            if "eta" in sw:
                kw["sweep_eta"] = _range(sw["eta"], "eta")
            if "omega_over_nu" in sw:
                kw["sweep_omega_over_nu"] = _range(sw["omega_over_nu"], "omega_over_nu")
        elif key == "fluctuations":
            fl = dict(value or {})
            names = {f.name for f in fields(FluctuationSpec)} - {"rng_seed"}
            if set(fl) - names:
                raise ConfigError(f"unknown fluctuation keys {sorted(set(fl) - names)}")
            kw["fluctuations"] = FluctuationSpec(**{k: (int(v) if k == "n_samples" else float(v))
                                                    for k, v in fl.items()})
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
    try:
        cfg = RunConfig(**kw)
        cfg.envelope()
    except GeoGateError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return replace(cfg, fluctuations=replace(cfg.fluctuations, rng_seed=cfg.seed))


def load_config(path: str | Path | None) -> RunConfig:
    """Read a configuration file; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse configuration {path}: {exc}") from exc
    return config_from_mapping(data)
