import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from propic import gates
from propic.ctc import (
    CtcError,
    CtcProblem,
    IdempotentKind,
    deutsch_fixed_point,
    deutsch_out,
    ergodic_fixed_point,
    informationally_complete_states,
    is_point_collapse,
    is_universal_evidence,
    post_selected_kraus,
    power_limit_classify,
    reduce,
    thick_ctc_solve,
)
from propic.morph import MorphError, haar_unitary, random_state
from propic.thick import Channel, dephasing, depolarize_to_max_mixed

seeds = st.integers(0, 2**32 - 1)


def random_density(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_channel(rng, d, n=2):
    u = haar_unitary(n * d, rng)[:, :d]
    return Channel(tuple(u[k * d : (k + 1) * d] for k in range(n)))


def test_reduce_product_state():
    rng = np.random.default_rng(0)
    a, b = random_density(rng, 2), random_density(rng, 3)
    assert np.allclose(reduce(np.kron(a, b), (2, 3), 0), a, atol=1e-15)
    assert np.allclose(reduce(np.kron(a, b), (2, 3), 1), b, atol=1e-15)


# -- fixed points -----------------------------------------------------------


def cesaro_by_iteration(f, d, n):
    rho = np.eye(d) / d
    total = np.zeros((d, d), dtype=complex)
    for _ in range(n):
        rho = f(rho)
        total += rho
    return total / n


def test_closed_form_matches_iterated_cesaro_average():
    rng = np.random.default_rng(1)
    for ch in (random_channel(rng, 3), Channel.unitary(gates.X), dephasing(), Channel.unitary(haar_unitary(2, rng))):
        fp = ergodic_fixed_point(ch.liouville)
        iterated = cesaro_by_iteration(ch, ch.d_in, 10_000)
        assert np.max(np.abs(fp.rho - iterated)) < 1e-3
        assert fp.residual < 1e-10


def test_fixed_point_multiplicity():
    assert ergodic_fixed_point(Channel.identity(2).liouville).multiplicity == 4
    assert ergodic_fixed_point(dephasing().liouville).multiplicity == 2
    assert ergodic_fixed_point(depolarize_to_max_mixed().liouville).multiplicity == 1


def test_fixed_point_rejects_non_trace_preserving_map():
    with pytest.raises(CtcError):
        ergodic_fixed_point(np.eye(4) * 0.5)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_swap_gives_output_equal_to_input(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 2)
    for port in (0, 1):
        fp = deutsch_fixed_point(gates.SWAP, rho, port)
        assert np.max(np.abs(deutsch_out(gates.SWAP, rho, fp.rho, port) - rho)) < 1e-10


def test_swap_ctc_state_copies_input_when_loop_carries_it():
    rho = gates.named_state("plus")
    fp = deutsch_fixed_point(gates.SWAP, rho, loop_port=1)
    assert np.allclose(fp.rho, rho, atol=1e-12) and fp.multiplicity == 1


def test_trivial_interaction_leaves_ctc_maximally_mixed():
    rho = gates.named_state("zero")
    fp = deutsch_fixed_point(np.eye(4), rho, loop_port=1)
    assert fp.multiplicity == 4
    assert np.allclose(fp.rho, np.eye(2) / 2, atol=1e-12)
    assert np.allclose(deutsch_out(np.eye(4), rho, fp.rho, 1), rho, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_control_v_mixes_input_with_its_rotation(seed):
    rng = np.random.default_rng(seed)
    v = haar_unitary(2, rng)
    u = gates.controlled(v, control=1)
    rho = random_density(rng, 2)
    fp = deutsch_fixed_point(u, rho, loop_port=1)
    assert np.allclose(fp.rho, np.eye(2) / 2, atol=1e-9)
    out = deutsch_out(u, rho, fp.rho, loop_port=1)
    assert np.max(np.abs(out - (rho / 2 + v @ rho @ v.conj().T / 2))) < 1e-9


def test_deutsch_rejects_non_unitary():
    with pytest.raises(MorphError):
        deutsch_fixed_point(np.ones((4, 4)), np.eye(2) / 2)


# -- thick solve ------------------------------------------------------------


def test_depolarizing_machine_is_solved_directly():
    rng = np.random.default_rng(2)
    t = depolarize_to_max_mixed()
    # dyadic inputs are reproduced bit for bit; generic ones up to rounding
    assert np.array_equal(t(np.array([[0.75, 0.25j], [-0.25j, 0.25]])), np.eye(2) / 2)
    assert np.max(np.abs(t(random_density(rng, 2)) - np.eye(2) / 2)) < 1e-15
    assert np.allclose(is_point_collapse(t), np.eye(2) / 2)
    s = Channel.unitary(haar_unitary(4, rng))
    rho = random_density(rng, 2)
    sol = thick_ctc_solve(CtcProblem(s, t, rho))
    assert sol.direct
    assert np.allclose(sol.rho_ctc_prime, np.eye(2) / 2)
    expected = reduce(s(np.kron(rho, np.eye(2) / 2)), (2, 2), 1)
    assert np.allclose(sol.rho_out, expected, atol=1e-14)


def test_depolarizing_machine_gives_linear_cp_maps():
    rng = np.random.default_rng(3)
    suite = [Channel.unitary(haar_unitary(4, rng)) for _ in range(10)] + [random_channel(rng, 4) for _ in range(10)]
    report = is_universal_evidence(depolarize_to_max_mixed(), suite)
    assert report.passed and report.point_collapse and report.sufficient
    assert max(e.linear_error for e in report.entries) <= 1e-10


def test_identity_machine_with_cnot_is_nonlinear():
    report = is_universal_evidence(Channel.identity(2), [Channel.unitary(gates.CNOT)])
    assert not report.passed
    assert report.entries[0].linear_error > 1e-3
    assert not report.point_collapse


def test_thick_solve_with_identity_machine_matches_deutsch():
    rng = np.random.default_rng(4)
    u = haar_unitary(4, rng)
    rho = random_density(rng, 2)
    sol = thick_ctc_solve(CtcProblem(Channel.unitary(u), Channel.identity(2), rho, 1))
    fp = deutsch_fixed_point(u, rho, 1)
    assert np.allclose(sol.rho_ctc, fp.rho, atol=1e-12)
    assert np.allclose(sol.rho_out, deutsch_out(u, rho, fp.rho, 1), atol=1e-12)


def test_problem_validation():
    with pytest.raises(MorphError):
        CtcProblem(Channel.identity(4), Channel.identity(3), np.eye(2) / 2)
    with pytest.raises(MorphError):
        CtcProblem(Channel.identity(4), Channel.identity(2), np.eye(2) / 2, loop_port=2)
    with pytest.raises(MorphError):
        CtcProblem(Channel.identity(6), Channel.identity(3), np.eye(2) / 2, loop_port=0)
    assert CtcProblem(Channel.identity(6), Channel.identity(3), np.eye(2) / 2, 1).dims == (2, 3)


def test_universality_needs_a_suite():
    with pytest.raises(ValueError):
        is_universal_evidence(depolarize_to_max_mixed(), [])


def test_informationally_complete_states_span_operators():
    for d in (2, 3):
        states = informationally_complete_states(d)
        assert len(states) == d * d
        assert np.linalg.matrix_rank(np.stack([s.ravel() for s in states])) == d * d


# -- post-selected circuit --------------------------------------------------


def post_selected_by_projection(u, phi, x, y):
    """Run the circuit on (in, ctc, ancilla) and project (ctc, ancilla) onto a Bell state."""
    state = np.kron(phi, gates.bell(0, 0))
    state = np.kron(u, np.eye(2)) @ state
    effect = np.kron(gates.sigma(x, y).conj().T, np.eye(2)) @ gates.bell(0, 0)
    projected = state.reshape(2, 4) @ effect.conj()
    return projected


@pytest.mark.parametrize("name", ["cnot", "swap", "cz", "control-h", "identity"])
def test_post_selected_kraus_match_circuit_projection(name):
    u = gates.named_unitary(name)
    rng = np.random.default_rng(5)
    total = np.zeros((2, 2), dtype=complex)
    for x, y in gates.BELL_LABELS:
        a, prob = post_selected_kraus(u, x, y)
        total += a.conj().T @ a
        for _ in range(5):
            phi = random_state(2, rng)
            amplitude = post_selected_by_projection(u, phi, x, y)
            assert np.allclose(a @ phi, amplitude, atol=1e-14)
            assert abs(prob(phi) - np.linalg.norm(amplitude) ** 2) < 1e-14
    assert np.max(np.abs(total - np.eye(2))) < 1e-10


def test_post_selected_kraus_for_swap_are_half_paulis():
    for x, y in gates.BELL_LABELS:
        a, _ = post_selected_kraus(gates.SWAP, x, y)
        assert np.allclose(a, gates.sigma(x, y) / 2, atol=1e-15)


def test_post_selected_kraus_needs_two_qubits():
    with pytest.raises(MorphError):
        post_selected_kraus(np.eye(2), 0, 0)


# -- idempotent classification ---------------------------------------------


def test_classification_of_standard_channels():
    depol = power_limit_classify(depolarize_to_max_mixed())
    assert depol.kind is IdempotentKind.POINT_COLLAPSE and depol.universal
    assert np.allclose(depol.rho0, np.eye(2) / 2)
    deph = power_limit_classify(dephasing())
    assert deph.kind is IdempotentKind.PROJECTIVE_MEASUREMENT and not deph.universal
    ident = power_limit_classify(Channel.identity(2))
    assert ident.kind is IdempotentKind.IDENTITY
    for c in (depol, deph, ident):
        assert c.idempotency_error <= 1e-9
        assert np.max(np.abs(c.limit @ c.limit - c.limit)) <= 1e-9


def test_unitary_x_averages_to_x_basis_measurement():
    found = power_limit_classify(Channel.unitary(gates.X))
    assert found.kind is IdempotentKind.PROJECTIVE_MEASUREMENT
    plus = np.full((2, 2), 0.5)
    assert any(np.allclose(p, plus, atol=1e-9) for p in found.projectors)


def test_amplitude_damping_collapses_to_ground_state():
    g = 0.3
    ch = Channel((np.array([[1, 0], [0, np.sqrt(1 - g)]]), np.array([[0, np.sqrt(g)], [0, 0]])))
    found = power_limit_classify(ch)
    assert found.kind is IdempotentKind.POINT_COLLAPSE
    assert np.allclose(found.rho0, np.diag([1, 0]), atol=1e-9)


def test_classifier_reports_budget_exhaustion_and_rejects_qutrits():
    g = 0.3
    ch = Channel((np.array([[1, 0], [0, np.sqrt(1 - g)]]), np.array([[0, np.sqrt(g)], [0, 0]])))
    found = power_limit_classify(ch, max_power=4)
    assert found.kind is IdempotentKind.UNCLASSIFIED and found.limit is None
    with pytest.raises(MorphError):
        power_limit_classify(Channel.identity(3))
