import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geogate.errors import ConfigError, InvalidEnvelopeError, SpecValidationError
from geogate.harness.cli import main
from geogate.harness.config import FluctuationSpec, RunConfig, config_from_mapping, load_config
from geogate.harness.io import read_csv, rows_to_csv, rows_to_json
from geogate.harness.montecarlo import Shot, monte_carlo, perturbed_config, sample_shots
from geogate.harness.pipeline import calibrate, run_variant
from geogate.harness.sweep import SweepSpec, sweep
from geogate.harness.trajectory import trajectory_table

# short gates: strong coupling and a coarse grid keep these tests quick
FAST = dict(eta=0.1, omega_over_nu=0.25, envelope_shape="rectangular", fock_dim=12, step_div=30)

FAST_YAML = """\
nu_hz: 1.26e6
omega_over_nu: 0.25
eta: 0.1
envelope: {shape: rectangular}
fock_dim: 12
step_div: 30
variant: plain
sweep: {eta: [0.08, 0.1, 2]}
"""


def test_defaults_convert_units():
    cfg = RunConfig()
    assert cfg.nu == pytest.approx(2 * np.pi * 1.26e6)
    drive = cfg.drive_config()
    assert drive.omega == pytest.approx(cfg.nu / 6)
    assert drive.delta_off == pytest.approx(2 * np.pi * 20e3)
    assert cfg.with_(variant="echo").drive_config().delta_off == 0.0
    assert drive.envelope.rise_time == pytest.approx(10e-6)


def test_mapping_with_nested_sections():
    cfg = config_from_mapping({"nu_hz": 1e6, "envelope": {"shape": "sin2", "rise_us": 5}, "geometry":
                               {"delta_phi": 0.2}, "fluctuations": {"n_bar": 0.1}, "seed": 7})
    assert cfg.fall_us == 5.0
    assert cfg.delta_phi == 0.2
    assert cfg.fluctuations.n_bar == 0.1
    assert cfg.fluctuations.rng_seed == 7


@pytest.mark.parametrize("bad", [{"nu": 1.0}, {"envelope": {"width": 1}}, {"variant": "fast"}, {"eta": "big"},
                                 {"sweep": {"eta": [0.1, 0.2]}},
                                 {"fluctuations": {"n_bar": -1}}, [1, 2]])
def test_bad_configs(bad):
    with pytest.raises(ConfigError):
        config_from_mapping(bad)


def test_bad_envelope_shape():
    with pytest.raises(InvalidEnvelopeError):
        config_from_mapping({"envelope": {"shape": "gauss"}})


def test_load_config_file(tmp_path):
    p = tmp_path / "run.yaml"
    p.write_text(FAST_YAML)
    cfg = load_config(p)
    assert cfg.variant == "plain" and cfg.sweep_eta == (0.08, 0.1, 2)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    (tmp_path / "broken.yaml").write_text("eta: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "broken.yaml")


def test_csv_round_trip():
    rows = [{"a": 1.0, "b": "x"}, {"a": 0.1, "c": 3}]
    version, back = read_csv(rows_to_csv(rows, "test v1"))
    assert version == "test v1"
    assert back[0] == {"a": "1.0", "b": "x", "c": ""}
    assert float(back[1]["a"]) == 0.1
    assert json.loads(rows_to_json(rows, "test v1"))["rows"][1]["c"] == 3


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_floats_round_trip_exactly(x):
    _, back = read_csv(rows_to_csv([{"x": x}], "v"))
    assert float(back[0]["x"]) == x


@pytest.mark.parametrize("kw", [dict(values=(0.05,)), dict(values=(0.05, 0.3)), dict(values=(0.0, 0.1)),
                                dict(values=(0.05, 0.1), variants=("fancy",))])
def test_sweep_validation(kw):
    with pytest.raises(SpecValidationError):
        SweepSpec("eta", **kw)


def test_sweep_validation_omega():
    with pytest.raises(SpecValidationError):
        SweepSpec("omega_over_nu", (0.1, 0.6))
    with pytest.raises(SpecValidationError):
        SweepSpec("detuning", (0.1, 0.2))


def test_sweep_rows_sorted_and_complete():
    spec = SweepSpec("eta", (0.1, 0.08), RunConfig(**FAST), ("plain",))
    rows = sweep(spec, workers=1)
    assert [r["value"] for r in rows] == [0.08, 0.1]
    for r in rows:
        assert r["error"] == ""
        assert r["gate_phase"] == pytest.approx(np.pi / 2, abs=1e-3)
        assert {"nu_hz", "fock_dim", "variant", "tau_d_s", "p_sp", "reduction_factor"} <= set(r)
    # smaller eta gives a slower gate
    assert rows[0]["gate_time_s"] > rows[1]["gate_time_s"]
    assert rows[0]["p_sp"] > rows[1]["p_sp"]


def test_sweep_records_failures_in_row():
    # ramps longer than the gate make this point fail; the sweep keeps going
    base = RunConfig(**{**FAST, "envelope_shape": "sin2", "rise_us": 500.0, "fall_us": 500.0})
    rows = sweep(SweepSpec("eta", (0.08, 0.1), base, ("plain",)), workers=1)
    assert len(rows) == 2
    assert all(r["error"] for r in rows)


def test_pipeline_plain_gate():
    run = run_variant(RunConfig(**FAST, variant="plain"))
    assert run.report("DD").gate_phase == pytest.approx(np.pi / 2, abs=1e-3)
    assert run.calibration.commensurate
    assert len(run.reports) == 4
    with pytest.raises(KeyError):
        run.report("XX")


def test_pipeline_rejects_single_ion():
    with pytest.raises(ConfigError):
        calibrate(RunConfig(**FAST, n_ions=1))


def test_perturbed_config():
    drive = RunConfig().drive_config()
    p = perturbed_config(drive, Shot(0.01, 5.0, 2.0, 0))
    assert p.omega == pytest.approx(drive.omega * 1.01)
    assert p.delta_off == pytest.approx(drive.delta_off + 5.0)
    assert p.delta == pytest.approx(drive.delta + 2.0)


def test_shot_sampling_is_seeded():
    fl = FluctuationSpec(n_samples=50)
    a = sample_shots(fl, 10, np.random.default_rng(3))
    b = sample_shots(fl, 10, np.random.default_rng(3))
    assert a == b
    assert max(s.n for s in a) <= 10
    assert np.mean([s.n for s in sample_shots(FluctuationSpec(n_samples=4000), 50, np.random.default_rng(1))]) \
        == pytest.approx(0.5, abs=0.05)


def test_monte_carlo_without_noise_is_deterministic():
    run = RunConfig(**FAST, variant="plain")
    cal = calibrate(run)
    quiet = FluctuationSpec(0.0, 0.0, 0.0, 0.0, n_samples=2)
    res = monte_carlo(run, quiet, cal, sensitivities=False, workers=1)
    assert res.mean == res.nominal == run_variant(run, cal).report("DD").infidelity
    noisy = FluctuationSpec(n_samples=3, rng_seed=5)
    r1 = monte_carlo(run, noisy, cal, workers=1)
    r2 = monte_carlo(run, noisy, cal, workers=1)
    assert r1.summary() == r2.summary()
    assert set(r1.sensitivities) == {"intensity", "laser_freq", "trap_freq", "thermal"}


def test_trajectory_table_analytic():
    rows = trajectory_table(RunConfig(), 51, full_model=False)
    a = np.array([r["alpha_re"] + 1j * r["alpha_im"] for r in rows])
    assert abs(a[0]) < 1e-12 and abs(a[-1]) < 1e-12
    assert np.max(abs(a)) == pytest.approx(0.5, rel=1e-3)  # |omega_eff / delta| at delta = 2 |omega_eff|


def test_cli_errors_are_machine_readable(tmp_path, capsys):
    assert main(["simulate", "--fock-dim", "1"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "invalid-dimension"
    bad = tmp_path / "bad.yaml"
    bad.write_text("colour: blue\n")
    assert main(["calibrate", "--config", str(bad)]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "config"
    assert main(["sweep-eta", "--range", "0.1", "0.3", "3"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "spec-validation"


def test_cli_unknown_variant_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--variant", "turbo"])
    assert exc.value.code != 0


def test_cli_trajectory_and_json(tmp_path, capsys):
    assert main(["trajectory", "--points", "5", "--analytic-only"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# geogate-trajectory v1\nt_s,alpha_re,alpha_im,phi\n")
    target = tmp_path / "traj.json"
    assert main(["trajectory", "--points", "5", "--analytic-only", "--out", str(target)]) == 0
    assert len(json.loads(target.read_text())["rows"]) == 5


def test_cli_simulate(tmp_path):
    cfg = tmp_path / "fast.yaml"
    cfg.write_text(FAST_YAML)
    out = tmp_path / "report.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--input", "SD"]) == 0
    version, rows = read_csv(str(out))
    assert version == "geogate-gatereport v1"
    assert rows[0]["input_state"] == "SD"
    assert float(rows[0]["gate_phase"]) == pytest.approx(np.pi / 2, abs=1e-3)
    js = tmp_path / "report.json"
    assert main(["simulate", "--config", str(cfg), "--out", str(js)]) == 0
    assert json.loads(js.read_text())["params"]["variant"] == "plain"


def test_cli_calibrate(tmp_path):
    cfg = tmp_path / "fast.yaml"
    cfg.write_text(FAST_YAML)
    out = tmp_path / "cal.json"
    assert main(["calibrate", "--config", str(cfg), "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert 0.8 < d["reduction_factor"] < 1.0
    assert d["calibration_method"] == "displacement"
