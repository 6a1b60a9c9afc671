import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from propic import gates
from propic.morph import (
    Direction,
    Essence,
    Frame,
    Leg,
    Morph,
    MorphError,
    adjoint,
    bar,
    compose,
    from_matrix,
    haar_unitary,
    identity,
    inner,
    ket,
    opposite,
    operator,
    partial_trace,
    permute,
    random_morph,
    rebase,
    scalar,
    tensor,
    to_matrix,
)
from propic.network import contract

from helpers import einsum_oracle, random_diagram

seeds = st.integers(0, 2**32 - 1)


def random_legs(rng, n, space="H", dim=None):
    legs = []
    for _ in range(n):
        legs.append(
            Leg(
                space,
                dim or int(rng.integers(1, 4)),
                Direction.IN if rng.random() < 0.5 else Direction.OUT,
                Essence.VIRTUAL if rng.random() < 0.5 else Essence.PHYSICAL,
            )
        )
    return legs


# -- types ----------------------------------------------------------------


def test_leg_rejects_nonpositive_dim():
    with pytest.raises(MorphError):
        Leg("H", 0, Direction.IN)


def test_leg_opposite_and_bar():
    leg = Leg("H", 2, Direction.IN, Essence.PHYSICAL)
    assert leg.opposite() == Leg("H", 2, Direction.OUT, Essence.VIRTUAL)
    assert leg.bar() == Leg("H", 2, Direction.IN, Essence.VIRTUAL)
    kinds = {(l.direction, l.essence) for l in (leg, leg.bar(), leg.opposite(), leg.opposite().bar())}
    assert len(kinds) == 4


def test_morph_size_and_finiteness_checks():
    with pytest.raises(MorphError):
        Morph((Leg("H", 2, Direction.IN),), [1, 2, 3])
    with pytest.raises(MorphError):
        Morph((Leg("H", 2, Direction.IN),), [1, np.nan])
    assert scalar(3).value() == 3
    assert Morph((), [5]).shape == ()


def test_morph_data_is_read_only():
    m = scalar(1)
    with pytest.raises(ValueError):
        m.data[...] = 2


def test_frame_rejects_non_orthonormal_rows():
    with pytest.raises(MorphError):
        Frame("H", [[1, 1], [0, 1]])


# -- opposite -------------------------------------------------------------


def test_opposite_identity_becomes_unnormalized_bell_state():
    delta = identity("H", 2)
    flipped = opposite(delta, 0)
    assert flipped.legs == (Leg("H", 2, Direction.OUT, Essence.VIRTUAL), Leg("H", 2, Direction.OUT))
    assert np.array_equal(flipped.data, np.eye(2))


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 4))
def test_opposite_is_metadata_only_involution(seed, rank):
    rng = np.random.default_rng(seed)
    m = random_morph(random_legs(rng, rank), rng)
    port = int(rng.integers(rank))
    once = opposite(m, port)
    assert np.array_equal(once.data, m.data)
    assert once.legs[port] == m.legs[port].opposite()
    twice = opposite(once, port)
    assert twice.legs == m.legs and np.array_equal(twice.data, m.data)


def test_opposite_port_out_of_range():
    with pytest.raises(MorphError):
        opposite(identity("H", 2), 2)


def test_flipping_an_internal_pair_keeps_the_closed_value():
    # 2x2x2 random nodes, closed chain a -> b -> c -> a
    rng = np.random.default_rng(11)
    a = random_morph([Leg("A", 2, Direction.OUT), Leg("C", 2, Direction.IN)], rng)
    b = random_morph([Leg("A", 2, Direction.IN), Leg("B", 2, Direction.OUT)], rng)
    c = random_morph([Leg("B", 2, Direction.IN), Leg("C", 2, Direction.OUT)], rng)
    wires = [((0, 0), (1, 0)), ((1, 1), (2, 0)), ((2, 1), (0, 1))]
    before = contract([a, b, c], wires, []).value()
    # reverse the a -> b line on both ends: the b end now emits, the a end absorbs
    a2, b2 = opposite(a, 0), opposite(b, 0)
    after = contract([b2, a2, c], [((0, 0), (1, 0)), ((0, 1), (2, 0)), ((2, 1), (1, 1))], []).value()
    oracle = np.einsum("ac,ab,bc->", a.data, b.data, c.data)
    assert abs(after - before) < 1e-12
    assert abs(before - oracle) < 1e-12


# -- bar and adjoint -------------------------------------------------------


def test_bar_scalar_and_real_state():
    assert bar(scalar(3 + 4j)).value() == 3 - 4j
    zero = ket([1, 0])
    barred = bar(zero)
    assert np.array_equal(barred.data, zero.data)
    assert barred.legs[0].essence is Essence.VIRTUAL


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(0, 4))
def test_bar_and_adjoint_are_involutions(seed, rank):
    rng = np.random.default_rng(seed)
    m = random_morph(random_legs(rng, rank), rng)
    for f in (bar, adjoint):
        back = f(f(m))
        assert back.legs == m.legs and np.array_equal(back.data, m.data)


def test_adjoint_of_sigma_y_is_sigma_y():
    y = operator(gates.Y)
    assert adjoint(y).legs == (Leg("H", 2, Direction.IN), Leg("H", 2, Direction.OUT))
    assert np.array_equal(to_matrix(adjoint(y), [1], [0]), gates.Y)


def test_adjoint_matrix_view_is_conjugate_transpose():
    rng = np.random.default_rng(5)
    m = operator(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    a = adjoint(m)
    assert np.array_equal(to_matrix(a, [1], [0]), to_matrix(m, [0], [1]).conj().T)


# -- compose, trace, tensor -----------------------------------------------


def test_compose_identities_and_paulis():
    d = identity("H", 3)
    assert np.array_equal(compose(d, d, [(1, 0)]).data, np.eye(3))
    x = operator(gates.X)
    xx = compose(x, x, [(1, 0)])
    assert np.array_equal(to_matrix(xx, [0], [1]), np.eye(2))


def test_compose_associativity_of_random_chains():
    rng = np.random.default_rng(3)
    a, b, c = (operator(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) for _ in range(3))
    left = compose(compose(a, b, [(1, 0)]), c, [(1, 0)])
    right = compose(a, compose(b, c, [(1, 0)]), [(1, 0)])
    assert np.allclose(left.data, right.data, atol=1e-12, rtol=0)
    oracle = a.data @ b.data @ c.data
    assert np.allclose(left.data, oracle, atol=1e-12, rtol=0)


@pytest.mark.parametrize(
    "a_leg, b_leg",
    [
        (Leg("H", 2, Direction.OUT), Leg("K", 2, Direction.IN)),
        (Leg("H", 2, Direction.OUT), Leg("H", 3, Direction.IN)),
        (Leg("H", 2, Direction.OUT), Leg("H", 2, Direction.IN, Essence.VIRTUAL)),
        (Leg("H", 2, Direction.OUT), Leg("H", 2, Direction.OUT)),
    ],
)
def test_compose_rejects_illegal_joins(a_leg, b_leg):
    rng = np.random.default_rng(0)
    with pytest.raises(MorphError):
        compose(random_morph([a_leg], rng), random_morph([b_leg], rng), [(0, 0)])


def test_compose_rejects_repeated_port():
    d = identity("H", 2)
    with pytest.raises(MorphError):
        compose(d, tensor(d, d), [(1, 0), (1, 2)])


def test_compose_is_multilinear():
    rng = np.random.default_rng(8)
    legs_a = [Leg("H", 3, Direction.OUT), Leg("K", 2, Direction.IN)]
    legs_b = [Leg("H", 3, Direction.IN), Leg("L", 2, Direction.OUT)]
    a, b1, b2 = random_morph(legs_a, rng), random_morph(legs_b, rng), random_morph(legs_b, rng)
    lam = 0.3 - 1.7j
    lhs = compose(a, b1 + lam * b2, [(0, 0)])
    rhs = compose(a, b1, [(0, 0)]) + lam * compose(a, b2, [(0, 0)])
    assert np.allclose(lhs.data, rhs.data, atol=1e-12, rtol=0)


def test_partial_trace_of_identity_and_bell_projector():
    assert partial_trace(identity("H", 2), 1, 0).value() == 2
    phi = gates.bell(0, 0)
    rho = operator(np.outer(phi, phi.conj()), ["A", "B"])
    reduced = partial_trace(rho, 1, 3)
    assert np.allclose(to_matrix(reduced, [0], [1]), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_commutes_with_opposite_on_other_leg():
    rng = np.random.default_rng(1)
    m = random_morph([Leg("A", 2, Direction.OUT), Leg("B", 3, Direction.OUT), Leg("A", 2, Direction.IN)], rng)
    one = partial_trace(opposite(m, 1), 0, 2)
    two = opposite(partial_trace(m, 0, 2), 0)
    assert one.legs == two.legs and np.array_equal(one.data, two.data)


def test_partial_trace_rejects_mismatch():
    m = operator(np.eye(4), ["A", "B"])
    with pytest.raises(MorphError):
        partial_trace(m, 0, 3)
    with pytest.raises(MorphError):
        partial_trace(m, 0, 1)


def test_tensor_scalars_and_identities():
    assert tensor(scalar(2), scalar(3)).value() == 6
    ii = tensor(identity("H", 2), identity("H", 2))
    assert np.array_equal(to_matrix(ii, [1, 3], [0, 2]), np.eye(4))


def test_tensor_interchange_law():
    rng = np.random.default_rng(4)
    A, B, C, D = (operator(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)), s) for s in "ABAB")
    lhs = compose(tensor(A, B), tensor(C, D), [(1, 0), (3, 2)])
    rhs = permute(tensor(compose(A, C, [(1, 0)]), compose(B, D, [(1, 0)])), [0, 2, 1, 3])
    assert lhs.legs == rhs.legs
    assert np.allclose(lhs.data, rhs.data, atol=1e-12, rtol=0)


# -- inner product ----------------------------------------------------------


def test_inner_examples():
    singlet = ket(np.array([0, 1, -1, 0]) / np.sqrt(2), ["A", "B"])
    assert abs(inner(singlet, singlet) - 1) < 1e-15
    assert inner(operator(gates.X), operator(gates.Y)) == 0
    assert inner(operator(np.eye(2)), operator(np.eye(2))) == 2


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_inner_is_conjugate_symmetric_and_matches_trace(seed):
    rng = np.random.default_rng(seed)
    a = operator(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    b = operator(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    assert abs(inner(a, b) - np.conj(inner(b, a))) < 1e-12
    assert abs(inner(a, b) - np.trace(a.data.conj().T @ b.data)) < 1e-12


def test_inner_signature_mismatch():
    with pytest.raises(MorphError):
        inner(ket([1, 0]), bar(ket([1, 0])))


# -- matrix views -----------------------------------------------------------


def test_to_matrix_examples():
    assert np.array_equal(to_matrix(identity("H", 3), [0], [1]), np.eye(3))
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    rho = from_matrix(
        np.outer(singlet, singlet),
        [Leg("A", 2, Direction.OUT), Leg("A", 2, Direction.IN), Leg("B", 2, Direction.OUT), Leg("B", 2, Direction.IN)],
        [0, 2],
        [1, 3],
    )
    hand = np.array([[0, 0, 0, 0], [0, 1, -1, 0], [0, -1, 1, 0], [0, 0, 0, 0]]) / 2
    assert np.allclose(to_matrix(rho, [0, 2], [1, 3]), hand, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 4))
def test_matrix_round_trip_is_exact(seed, rank):
    rng = np.random.default_rng(seed)
    m = random_morph(random_legs(rng, rank), rng)
    ports = list(rng.permutation(rank))
    cut = int(rng.integers(rank + 1))
    rows, cols = ports[:cut], ports[cut:]
    back = from_matrix(to_matrix(m, rows, cols), m.legs, rows, cols)
    assert np.array_equal(back.data, m.data)


def test_to_matrix_requires_partition():
    with pytest.raises(MorphError):
        to_matrix(identity("H", 2), [0], [0])


def test_permute():
    rng = np.random.default_rng(2)
    m = random_morph([Leg("A", 2, Direction.IN), Leg("B", 3, Direction.OUT)], rng)
    p = permute(m, [1, 0])
    assert p.legs == (m.legs[1], m.legs[0]) and np.array_equal(p.data, m.data.T)


# -- frames -----------------------------------------------------------------


def test_rebase_with_standard_frame_is_identity():
    rng = np.random.default_rng(0)
    m = random_morph(random_legs(rng, 3, dim=2), rng)
    assert np.array_equal(rebase(m, "H", Frame.standard("H", 2)).data, m.data)


def test_hadamard_frame_fixes_bell_state():
    phi = ket(gates.bell(0, 0), ["Q", "Q"])
    rotated = rebase(phi, "Q", Frame("Q", gates.H))
    assert np.allclose(rotated.data, phi.data, atol=1e-15)


def test_frame_completeness():
    rng = np.random.default_rng(9)
    frame = Frame.random("H", 4, rng)
    assert np.allclose(frame.vectors.conj().T @ frame.vectors, np.eye(4), atol=1e-12)


def test_rebase_rejects_wrong_dimension_or_space():
    with pytest.raises(MorphError):
        rebase(identity("H", 3), "H", Frame.standard("H", 2))
    with pytest.raises(MorphError):
        rebase(identity("H", 2), "K", Frame.standard("H", 2))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_closed_values_invariant_under_internal_rebase(seed):
    rng = np.random.default_rng(seed)
    d = random_diagram(rng, 3)
    before = contract(d.morphs, d.wires, []).value()
    morphs = d.morphs
    for leg in {leg for m in morphs for leg in m.legs}:
        frame = Frame.random(leg.space, leg.dim, rng)
        morphs = [rebase(m, leg.space, frame) for m in morphs]
    after = contract(morphs, d.wires, []).value()
    assert abs(after - before) <= 1e-10 * max(1, abs(before))


def test_rebase_commutes_with_opposite():
    rng = np.random.default_rng(6)
    m = random_morph(random_legs(rng, 3, dim=2), rng)
    frame = Frame.random("H", 2, rng)
    assert np.allclose(rebase(opposite(m, 1), "H", frame).data, rebase(m, "H", frame).data, atol=1e-14)


def test_spectrum_invariant_under_unitary_rebase():
    rng = np.random.default_rng(12)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    m = operator(a + a.conj().T)
    rotated = rebase(m, "H", Frame.random("H", 3, rng))
    assert np.allclose(np.linalg.eigvalsh(m.data), np.linalg.eigvalsh(to_matrix(rotated, [0], [1])), atol=1e-9)


# -- closed-diagram conjugation --------------------------------------------


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(2, 5))
def test_barring_every_node_conjugates_the_value(seed, n):
    rng = np.random.default_rng(seed)
    d = random_diagram(rng, n)
    z = contract(d.morphs, d.wires, []).value()
    zbar = contract([bar(m) for m in d.morphs], d.wires, []).value()
    assert abs(zbar - np.conj(z)) <= 1e-12 * max(1, abs(z))
    assert abs(z - einsum_oracle(d.morphs, d.wires, [])) <= 1e-10 * max(1, abs(z))


def test_haar_unitary_is_unitary_and_seeded():
    u = haar_unitary(4, np.random.default_rng(1))
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-12)
    assert np.array_equal(u, haar_unitary(4, np.random.default_rng(1)))
