import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geogate.analytic import GatePlan, ideal_phase_gate, spontaneous_emission_prob, u2_gate_approx
from geogate.errors import InvalidParameterError, LayoutMismatchError
from geogate.hilbert import SpaceLayout, basis_state
from geogate.metrics import (
    IDEAL_CNOT,
    REPORT_COLUMNS,
    REPORT_VERSION,
    GateReport,
    cnot_sandwich,
    report_from_columns,
    report_from_internal_unitary,
    total_error,
    trace_out_motion,
    with_spontaneous_emission,
)


def test_ideal_cnot_is_a_cnot():
    # control ion 1, target ion 2; with these rotations the target flips when the control is in S
    perm = np.abs(IDEAL_CNOT) ** 2
    assert np.allclose(perm, np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]), atol=1e-12)


@pytest.mark.parametrize("state", ["SS", "SD", "DS", "DD"])
def test_ideal_gate_scores_perfectly(state):
    r = report_from_internal_unitary(ideal_phase_gate(), state)
    assert r.infidelity < 1e-12
    assert r.gate_phase == pytest.approx(np.pi / 2)
    assert sum(r.populations) == pytest.approx(1.0, abs=1e-9)


def test_residual_ms_rotation_costs_fidelity():
    r = report_from_internal_unitary(u2_gate_approx(0.06), "DD")
    assert 1e-3 < r.infidelity < 0.1


def test_trace_out_product_state():
    layout = SpaceLayout(2, 5)
    rho = trace_out_motion(basis_state("DD", layout, 2), layout)
    expect = np.zeros((4, 4))
    expect[3, 3] = 1
    assert np.allclose(rho, expect)


def test_trace_out_entangled_state():
    layout = SpaceLayout(2, 5)
    psi = (basis_state("SS", layout, 0) + basis_state("DD", layout, 1)) / np.sqrt(2)
    rho = trace_out_motion(psi, layout)
    assert np.trace(rho @ rho).real == pytest.approx(0.5)


def test_trace_out_layout_mismatch():
    with pytest.raises(LayoutMismatchError):
        trace_out_motion(np.ones(7), SpaceLayout(2, 5))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_reduced_state_is_a_density_matrix(seed):
    g = np.random.default_rng(seed)
    layout = SpaceLayout(2, 4)
    psi = g.normal(size=layout.dim) + 1j * g.normal(size=layout.dim)
    rho = trace_out_motion(psi / np.linalg.norm(psi), layout)
    assert np.allclose(rho, rho.conj().T)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(rho).min() > -1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(-np.pi, np.pi))
def test_reports_ignore_global_phase(seed, theta):
    g = np.random.default_rng(seed)
    layout = SpaceLayout(2, 3)
    M = g.normal(size=(layout.dim, layout.dim)) + 1j * g.normal(size=(layout.dim, layout.dim))
    U = np.linalg.qr(M)[0]
    cols = U[:, [s * 3 for s in range(4)]]
    for s in ("SS", "DD"):
        a = report_from_columns(cols, layout, s)
        b = report_from_columns(np.exp(1j * theta) * cols, layout, s)
        assert a.infidelity == pytest.approx(b.infidelity, abs=1e-12)
        assert a.gate_phase == pytest.approx(b.gate_phase, abs=1e-12)
        assert np.allclose(a.populations, b.populations, atol=1e-12)
        assert a.motional_residual == pytest.approx(b.motional_residual, abs=1e-12)
        assert 0.0 <= a.infidelity <= 1.0 + 1e-9


def test_sandwich_of_identity_is_not_cnot():
    r = report_from_internal_unitary(np.eye(4), "DD")
    assert r.infidelity > 0.4
    assert np.allclose(cnot_sandwich(ideal_phase_gate()), IDEAL_CNOT)


def test_populations_validated():
    with pytest.raises(InvalidParameterError):
        GateReport(0.0, (0.5, 0.5, 0.5, 0.0), 0.0, 0.0)


def test_spontaneous_emission_columns():
    r = report_from_internal_unitary(ideal_phase_gate())
    r = GateReport(r.infidelity, r.populations, r.gate_phase, 0.0, gate_time=100e-6)
    assert total_error(r, None) == r.infidelity
    assert total_error(r, np.inf) == r.infidelity
    r2 = with_spontaneous_emission(r, 2.0)
    assert r2.p_sp == pytest.approx(1e-4)
    assert r2.total_error == pytest.approx(r.infidelity + 1e-4)


def test_echo_exposure_ratio():
    # at equal coupling the echo gate lasts sqrt(2) times the plain loop
    p, e = GatePlan.plain(1.0), GatePlan.spin_echo(1.0)
    ratio = spontaneous_emission_prob(e.gate_time, 2.0) / spontaneous_emission_prob(p.gate_time, 2.0)
    assert ratio == pytest.approx(2 * 90.2 / 127.6, rel=1e-3)


def test_csv_and_json_serialization():
    r = GateReport(1e-4, (0, 0, 0.5, 0.5), 1.57, 1e-6, 1e-5, input_state="DD", gate_time=1e-4,
                   params={"eta": 0.056, "variant": "echo"})
    lines = r.to_csv().strip().split("\n")
    assert lines[0] == f"# {REPORT_VERSION}"
    head = lines[1].split(",")
    assert head[: len(REPORT_COLUMNS)] == list(REPORT_COLUMNS)
    assert head[len(REPORT_COLUMNS):] == ["eta", "variant"]
    assert float(lines[2].split(",")[1]) == 1e-4
    d = json.loads(r.to_json())
    assert d["populations"]["DD"] == 0.5
    assert d["params"]["variant"] == "echo"


def test_negative_infidelity_clamped():
    # an unnormalized column with overlap above one exercises the clamp
    layout = SpaceLayout(2, 2)
    cols = np.zeros((layout.dim, 4), dtype=complex)
    cols.reshape(4, 2, 4)[:, 0, :] = ideal_phase_gate() * (1 + 1e-12)
    r = report_from_columns(cols, layout)
    assert r.infidelity == 0.0
