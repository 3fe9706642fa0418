import numpy as np
import pytest

from vnerg.errors import NotInvariant
from vnerg.semigroup import (
    LindbladGenerator,
    abel_average,
    abel_quadrature_residual,
    evolve,
    semigroup_expectation,
)
from vnerg.standard_form import Functional, State, matrix_unit


def dephasing():
    """H = 0, single jump sigma_z: off-diagonals decay at rate 2."""
    return LindbladGenerator(np.zeros((2, 2)), [np.diag([1.0, -1.0])])


def test_generator_requires_hermitian_hamiltonian():
    with pytest.raises(ValueError):
        LindbladGenerator(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_generator_annihilates_identity():
    gen = dephasing()
    assert np.abs(gen.superop @ np.eye(2).reshape(-1)).max() < 1e-12


def test_dephasing_evolution():
    gen = dephasing()
    x = np.array([[2.0, 1.0], [1.0, -1.0]])
    for t in (0.3, 1.0):
        out = evolve(gen, t).apply(x)
        decay = np.exp(-2.0 * t)
        assert np.allclose(out, np.array([[2.0, decay], [decay, -1.0]]))
    with pytest.raises(ValueError):
        evolve(gen, -1.0)


def test_hamiltonian_evolution_is_unitary_conjugation():
    h = np.array([[0.0, 1.0], [1.0, 0.0]])
    gen = LindbladGenerator(h)
    t = 0.7
    u = np.cos(t) * np.eye(2) + 1j * np.sin(t) * h  # exp(i t sigma_x)
    x = np.array([[1.0, 2j], [-2j, 3.0]])
    assert np.allclose(evolve(gen, t).apply(x), u @ x @ u.conj().T)


def test_abel_average_dephasing_closed_form():
    gen = dephasing()
    for lam in (1.0, 0.1):
        s = abel_average(gen, lam)
        out = s.apply(matrix_unit(2, 0, 1))
        # off-diagonal eigenvalue of L is -2, so s_lambda = lam/(lam+2)
        assert out[0, 1] == pytest.approx(lam / (lam + 2.0))
    with pytest.raises(ValueError):
        abel_average(gen, 0.0)


def test_abel_quadrature_cross_check():
    gen = dephasing()
    assert abel_quadrature_residual(gen, 1.0, 20.0, 2000) < 1e-6
    with pytest.raises(ValueError):
        abel_quadrature_residual(gen, 1.0, 5.0, 100)  # lam * t_max too small


def test_semigroup_expectation_dephasing():
    gen = dephasing()
    decomp, profile = semigroup_expectation(
        gen, State.tracial(2), [1.0, 0.01],
        psi_battery=[Functional(matrix_unit(2, 1, 0))])
    assert decomp.fixed_dim == 2  # diagonal algebra
    values = {lam: v for lam, _, v in profile}
    assert values[1.0] == pytest.approx(1.0 / 3.0)
    assert values[0.01] == pytest.approx(0.01 / 2.01)


def test_semigroup_expectation_rejects_noninvariant_state():
    # sigma_x jump does not fix a non-tracial diagonal state
    gen = LindbladGenerator(np.zeros((2, 2)), [np.array([[0.0, 1.0], [1.0, 0.0]])])
    with pytest.raises(NotInvariant):
        semigroup_expectation(gen, State(np.diag([0.7, 0.3])), [1.0])
