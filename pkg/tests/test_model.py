import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from klindblad.exceptions import ParameterDomainError
from klindblad.model import (
    SECTORS,
    X_MASK,
    ModelParams,
    assemble_full_operator,
    average_blocks,
    build_hamiltonian_block,
    build_initial_state,
    build_momentum_block,
    extract_block,
    is_density_matrix,
    single_particle_momentum,
)

ANTI_DIAG = [(0, 3), (3, 0), (1, 2), (2, 1)]
SWAP = np.eye(4)[[0, 2, 1, 3]]


@st.composite
def model_params(draw):
    omega = draw(st.floats(0.01, 5.0))
    epsilon = omega + draw(st.floats(0.01, 5.0))
    return ModelParams(
        epsilon=epsilon,
        omega=omega,
        mass=draw(st.floats(0.01, 10.0)),
        ell_H=draw(st.floats(0.0, 5.0)),
        ell_L=draw(st.floats(0.0, 5.0)),
        theta=draw(st.floats(0.0, math.pi / 2)),
    )


def matmul_loops(X, Y):
    n = len(X)
    return np.array([[sum(X[i][k] * Y[k][j] for k in range(n)) for j in range(n)] for i in range(n)])


@pytest.mark.parametrize(
    "bad",
    [
        dict(epsilon=0.5, omega=0.5),
        dict(epsilon=0.4, omega=0.5),
        dict(omega=0.0),
        dict(mass=0.0),
        dict(ell_H=-1.0),
        dict(ell_L=-0.1),
        dict(theta=-0.1),
        dict(theta=2.0),
        dict(epsilon=float("nan")),
    ],
)
def test_invalid_params_rejected(bad):
    with pytest.raises(ParameterDomainError):
        ModelParams(**bad)


def test_sector_order_fixed():
    assert [tuple(s) for s in SECTORS] == [(1, 1), (-1, 1), (1, -1), (-1, -1)]


def test_hamiltonian_plus_plus():
    H = build_hamiltonian_block(ModelParams(ell_H=1.0), (1, 1))
    assert np.allclose(np.diag(H), 1.5)
    for i, j in ANTI_DIAG:
        assert H[i, j] == pytest.approx(1.5)
    assert np.count_nonzero(H) == 8


def test_hamiltonian_plus_minus():
    H = build_hamiltonian_block(ModelParams(ell_H=1.0), (1, -1))
    assert np.allclose(np.diag(H), 1.0)
    for i, j in ANTI_DIAG:
        assert H[i, j] == pytest.approx(math.sqrt(0.75))
    assert H[0, 3] == pytest.approx(0.8660254037844386)


@pytest.mark.parametrize("sector", SECTORS)
def test_hamiltonian_undeformed_limit(sector):
    p = ModelParams(ell_H=0.0)
    H = build_hamiltonian_block(p, sector)
    expected = (p.epsilon + 0.5 * (sector.a + sector.b) * p.omega) * np.eye(4)
    np.testing.assert_array_equal(H, expected)


def test_single_particle_momentum():
    np.testing.assert_allclose(single_particle_momentum(ModelParams()), np.diag([math.sqrt(1.5), math.sqrt(0.5)]))


def test_momentum_plus_minus():
    P = build_momentum_block(ModelParams(), (1, -1))
    A, B = math.sqrt(1.5), math.sqrt(0.5)
    assert A == pytest.approx(1.22474, abs=1e-5) and B == pytest.approx(0.70711, abs=1e-5)
    expected = np.array([[0, A, B, 0], [A, 0, 0, B], [B, 0, 0, A], [0, B, A, 0]])
    np.testing.assert_allclose(P, expected, rtol=0, atol=1e-15)


@pytest.mark.parametrize("sector", SECTORS)
def test_momentum_square_is_x_shaped(sector):
    p = ModelParams(mass=1.3, epsilon=2.0, omega=0.7)
    P = build_momentum_block(p, sector)
    P2 = matmul_loops(P.tolist(), P.tolist())
    A = math.sqrt(p.mass * (p.epsilon + sector.a * p.omega))
    B = math.sqrt(p.mass * (p.epsilon + sector.b * p.omega))
    np.testing.assert_allclose(np.diag(P2), p.mass * (2 * p.epsilon + (sector.a + sector.b) * p.omega))
    for i, j in ANTI_DIAG:
        assert P2[i, j] == pytest.approx(2 * A * B)
    assert np.all(P2[~X_MASK] == 0)


def test_momentum_degenerate_omega():
    p = ModelParams(omega=1e-300)
    blocks = [build_momentum_block(p, s) for s in SECTORS]
    for P in blocks[1:]:
        np.testing.assert_array_equal(P, blocks[0])
    assert blocks[0][0, 1] == blocks[0][0, 2]


@settings(max_examples=50, deadline=None)
@given(model_params())
def test_blocks_hermitian_real_and_swap_symmetric(p):
    for s in SECTORS:
        H = build_hamiltonian_block(p, s)
        P = build_momentum_block(p, s)
        for M in (H, P):
            assert np.isrealobj(M)
            np.testing.assert_array_equal(M, M.T)
        np.testing.assert_array_equal(H, build_hamiltonian_block(p, (s.b, s.a)))
        np.testing.assert_allclose(SWAP @ P @ SWAP, build_momentum_block(p, (s.b, s.a)), atol=1e-14)
        P2 = P @ P
        assert np.max(np.abs(P2[~X_MASK])) == 0


def test_initial_state_theta_zero():
    np.testing.assert_array_equal(build_initial_state(0.0), np.diag([0, 0, 1, 0]).astype(complex))


def test_initial_state_bell():
    rho = build_initial_state(math.pi / 4)
    for i, j in [(1, 1), (2, 2), (1, 2), (2, 1)]:
        assert rho[i, j] == pytest.approx(0.5)
    assert np.count_nonzero(np.abs(rho) > 1e-15) == 4


def test_initial_state_pi_over_6():
    rho = build_initial_state(math.pi / 6)
    assert rho[1, 1].real == pytest.approx(0.25)
    assert rho[2, 2].real == pytest.approx(0.75)
    assert rho[1, 2].real == pytest.approx(math.sqrt(3) / 4)
    assert rho[1, 2].real == pytest.approx(0.4330, abs=1e-4)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, math.pi / 2))
def test_initial_state_is_pure(theta):
    rho = build_initial_state(theta)
    np.testing.assert_allclose(np.linalg.eigvalsh(rho), [0, 0, 0, 1], atol=1e-14)
    assert is_density_matrix(rho)


def test_initial_state_domain():
    with pytest.raises(ParameterDomainError):
        build_initial_state(-0.01)


def test_average_identical_blocks():
    rho = build_initial_state(0.3)
    np.testing.assert_allclose(average_blocks([rho] * 4), rho, atol=1e-16)


def test_average_diagonal_blocks():
    diags = [[1, 0, 0, 0], [0, 1, 0, 0], [0.5, 0.5, 0, 0], [0.25, 0.25, 0.25, 0.25]]
    out = average_blocks([np.diag(d) for d in diags])
    np.testing.assert_allclose(np.diag(out), [0.4375, 0.4375, 0.0625, 0.0625])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, math.pi / 2), min_size=4, max_size=4))
def test_average_is_density_matrix(thetas):
    assert is_density_matrix(average_blocks([build_initial_state(t) for t in thetas]))


def test_average_requires_four_blocks():
    with pytest.raises(ValueError):
        average_blocks([np.eye(4) / 4] * 3)


@pytest.mark.parametrize("kind,build", [("hamiltonian", build_hamiltonian_block), ("momentum", build_momentum_block)])
def test_full_operator_blocks(kind, build):
    p = ModelParams(ell_H=0.7)
    full = assemble_full_operator(p, kind)
    assert full.shape == (16, 16)
    for j, s in enumerate(SECTORS):
        np.testing.assert_array_equal(extract_block(full, j), build(p, s))
    mask = np.kron(np.eye(4), np.ones((4, 4))).astype(bool)
    assert np.all(full[~mask] == 0)


def test_full_hamiltonian_undeformed_is_diagonal():
    full = assemble_full_operator(ModelParams(ell_H=0.0), "hamiltonian")
    np.testing.assert_array_equal(full, np.diag(np.diag(full)))


def test_full_operator_kind_checked():
    with pytest.raises(ValueError):
        assemble_full_operator(ModelParams(), "dissipator")
