import numpy as np
import pytest
from conftest import NU, ReferenceModel
from hypothesis import given, settings
from hypothesis import strategies as st

from geogate import backend
from geogate.analytic import PLAIN, SPIN_ECHO, GatePlan, ideal_phase_gate, sz_rotation
from geogate.drive import DriveConfig, EnvelopeSpec, TwoIonGeometry
from geogate.errors import IntegratorFailureError, InvalidEnvelopeError, InvalidParameterError, LayoutMismatchError
from geogate.hilbert import SpaceLayout, basis_state
from geogate.propagator import (
    DriveHamiltonian,
    Idle,
    IntegratorSpec,
    LocalUnitary,
    Pulse,
    SegmentSchedule,
    apply_local,
    computational_block,
    drive_reduction,
    entangling_phase,
    evolve,
    gate_schedule,
    measure_reduction,
    run_schedule,
    segment_unitary,
)

PERIOD = 2 * np.pi / NU


def busy_config(n_ions=2):
    return DriveConfig.gate_regime(NU, NU / 5, 0.1, 2 * np.pi * 15e3, 2 * np.pi * 20e3, 0.4, -1.1,
                                   geometry=TwoIonGeometry.from_delta_phi(0.7 if n_ions == 2 else 0.0))


@pytest.mark.parametrize("n_ions", [1, 2])
def test_kernel_matches_reference_model(n_ions):
    N = 10
    cfg = busy_config(n_ions)
    layout = SpaceLayout(n_ions, N)
    ref = ReferenceModel(NU, cfg.omega, 0.1, cfg.delta, cfg.delta_off, 0.4, -1.1, cfg.delta_phi, N, n_ions)
    psi0 = computational_block(layout, 1)
    t1 = 3 * PERIOD
    out = evolve(DriveHamiltonian(cfg, layout), psi0, 0.0, t1, IntegratorSpec(step_div=100))
    assert np.max(np.abs(out - ref.evolve(psi0, 0.0, t1, 100))) < 1e-11


@pytest.mark.parametrize("name", ["compiled", "python"])
def test_backends_agree_with_dense_path(name):
    if name not in backend.available():
        pytest.skip(f"{name} backend not built")
    cfg = busy_config()
    layout = SpaceLayout(2, 8)
    ham = DriveHamiltonian(cfg, layout)
    psi0 = computational_block(layout)
    spec = IntegratorSpec(step_div=30)
    previous = backend.active()
    try:
        backend.set_backend(name)
        fast = evolve(ham, psi0, 0.0, 2 * PERIOD, spec)
    finally:
        backend.set_backend(previous)
    dense = evolve(lambda t: ham(t), psi0, 0.0, 2 * PERIOD, spec, PERIOD)
    assert np.max(np.abs(fast - dense)) < 1e-12


def test_unknown_backend():
    with pytest.raises(ValueError):
        backend.set_backend("fortran")


def test_evolve_leaves_input_untouched():
    layout = SpaceLayout(2, 6)
    psi0 = computational_block(layout)
    keep = psi0.copy()
    evolve(DriveHamiltonian(busy_config(), layout), psi0, 0.0, PERIOD)
    assert np.array_equal(psi0, keep)


def test_vector_and_block_agree():
    layout = SpaceLayout(2, 6)
    ham = DriveHamiltonian(busy_config(), layout)
    block = evolve(ham, computational_block(layout), 0.0, PERIOD)
    vec = evolve(ham, basis_state("SD", layout), 0.0, PERIOD)
    assert np.allclose(vec, block[:, 1], atol=1e-14)


@pytest.mark.parametrize("method", ["cf4", "midpoint"])
def test_step_refinement_converges(method):
    layout = SpaceLayout(1, 8)
    ham = DriveHamiltonian(busy_config(1), layout)
    psi0 = computational_block(layout)
    coarse = evolve(ham, psi0, 0.0, 4 * PERIOD, IntegratorSpec(method, 40))
    fine = evolve(ham, psi0, 0.0, 4 * PERIOD, IntegratorSpec(method, 80))
    finest = evolve(ham, psi0, 0.0, 4 * PERIOD, IntegratorSpec(method, 160))
    ratio = np.linalg.norm(coarse - fine) / np.linalg.norm(fine - finest)
    assert ratio == pytest.approx(16.0 if method == "cf4" else 4.0, rel=0.15)


def test_norm_drift_is_detected():
    with pytest.raises(IntegratorFailureError):
        evolve(lambda t: -0.5j * np.eye(4), np.ones(4) / 2, 0.0, 1.0)


def test_norm_preserved_over_a_gate():
    layout = SpaceLayout(2, 12)
    psi0 = computational_block(layout)
    out = evolve(DriveHamiltonian(busy_config(), layout), psi0, 0.0, 200 * PERIOD)
    assert np.max(np.abs(np.linalg.norm(out, axis=0) - 1)) < 1e-9


@pytest.mark.parametrize("kw", [{"method": "rk4"}, {"step_div": 0}, {"step_div": 2.5}])
def test_integrator_spec_validation(kw):
    with pytest.raises(InvalidParameterError):
        IntegratorSpec(**kw)


def test_evolve_requires_forward_time():
    with pytest.raises(InvalidParameterError):
        evolve(lambda t: np.eye(2), np.array([1, 0]), 1.0, 1.0)


def test_segments_validate():
    with pytest.raises(InvalidParameterError):
        Pulse(busy_config(), 0.0)
    with pytest.raises(InvalidParameterError):
        LocalUnitary(np.array([[1, 1], [0, 1]]))
    with pytest.raises(InvalidParameterError):
        Idle(-1.0)
    shaped = busy_config().replace(envelope=EnvelopeSpec("sin2", 10e-6, 10e-6))
    with pytest.raises(InvalidEnvelopeError):
        Pulse(shaped, 15e-6)


def test_schedule_bookkeeping():
    cfg = busy_config()
    s = SegmentSchedule((Pulse(cfg, 1e-6), LocalUnitary(np.eye(4)), Idle(2e-6), Pulse(cfg, 3e-6)))
    assert s.total_duration == pytest.approx(6e-6)
    assert s.start_times() == pytest.approx([0, 1e-6, 1e-6, 3e-6])
    assert len(s.pulses()) == 2
    assert len(s + s) == 8


def test_idle_is_identity():
    layout = SpaceLayout(2, 4)
    psi = computational_block(layout)
    assert np.array_equal(run_schedule(SegmentSchedule((Idle(1e-6),)), psi, layout=layout), psi)


def test_apply_local_matches_full_operator():
    layout = SpaceLayout(2, 3)
    U = sz_rotation(0.3, 2)
    psi = np.random.default_rng(1).normal(size=layout.dim) + 0j
    assert np.allclose(apply_local(U, psi, layout), np.kron(U, np.eye(3)) @ psi)
    with pytest.raises(LayoutMismatchError):
        apply_local(np.eye(3), psi, layout)


def test_split_pulse_equals_whole_pulse():
    # phases referenced to t = 0 continue the drive seamlessly when it is split
    cfg = busy_config()
    layout = SpaceLayout(2, 6)
    whole = SegmentSchedule((Pulse(cfg, 2 * PERIOD, phase_reference="absolute"),))
    split = SegmentSchedule((Pulse(cfg, PERIOD, phase_reference="absolute"),
                             Pulse(cfg, PERIOD, phase_reference="absolute")))
    psi = computational_block(layout)
    assert np.allclose(run_schedule(whole, psi, layout=layout), run_schedule(split, psi, layout=layout), atol=1e-12)


@pytest.mark.parametrize("mode,n", [(PLAIN, 1), (SPIN_ECHO, 6)])
def test_gate_schedule_layout(mode, n):
    plan = GatePlan.design(mode, 2 * np.pi * 5e3)
    cfg = busy_config().with_gate_detuning(plan.delta)
    s = gate_schedule(plan, cfg)
    assert len(s) == n
    assert s.total_duration == pytest.approx(plan.gate_time)
    if mode == SPIN_ECHO:
        assert len(gate_schedule(plan, cfg, closing_frame=False)) == 5


def test_entangling_phase_of_ideal_gate():
    assert entangling_phase(ideal_phase_gate()) == pytest.approx(np.pi / 2)


@settings(max_examples=30, deadline=None)
@given(st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
def test_entangling_phase_ignores_local_phases(a, b, g):
    U = np.exp(1j * g) * sz_rotation(a, 1) @ sz_rotation(b, 2) @ ideal_phase_gate()
    assert entangling_phase(U) == pytest.approx(np.pi / 2, abs=1e-12)


def test_segment_unitary_is_unitary():
    layout = SpaceLayout(1, 6)
    U = segment_unitary(SegmentSchedule((Pulse(busy_config(1), PERIOD),)), layout)
    assert np.allclose(U.conj().T @ U, np.eye(layout.dim), atol=1e-12)


def test_weak_drive_reduction_is_unity():
    cfg = DriveConfig.gate_regime(NU, NU / 60, 0.01, 1.0)
    cfg = cfg.with_gate_detuning(2 * np.sqrt(2) * 2 * 0.01 * cfg.omega**2 / NU)
    m = measure_reduction(cfg, periods=60, fock_dim=10)
    assert m.reduction_factor == pytest.approx(1.0, abs=1e-3)


def test_drive_reduction_normalization():
    assert np.allclose(drive_reduction([0.99, 0.9], 0.99), [0.0, 1 - 0.9 / 0.99])
