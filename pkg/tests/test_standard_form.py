import numpy as np
import pytest

from conftest import random_faithful_state
from vnerg.errors import NotFaithful
from vnerg.linalg import dagger, hs_inner, hs_norm
from vnerg.standard_form import Functional, StandardForm, State, matrix_units


def test_state_gates():
    with pytest.raises(NotFaithful):
        State(np.diag([1.5, -0.5]))  # not PSD
    with pytest.raises(NotFaithful):
        State(np.diag([0.7, 0.7]))  # trace != 1
    with pytest.raises(NotFaithful):
        State(np.diag([1.0, 0.0]))  # singular


def test_tracial_state_has_trivial_modular_data():
    sf = StandardForm(State.tracial(3))
    x = np.arange(9.0).reshape(3, 3) + 1j
    assert np.allclose(sf.modular_apply(x, 0.5), x)
    assert np.allclose(sf.sigma_t(x, 1.7), x)


def test_gns_isometry_random_states(rng):
    for _ in range(5):
        state = random_faithful_state(rng, 3)
        sf = StandardForm(state)  # constructor verifies isometry + Tomita
        x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        assert hs_norm(sf.gns_embed(x)) ** 2 == pytest.approx(
            state.value(dagger(x) @ x).real)
        assert np.allclose(sf.gns_unembed(sf.gns_embed(x)), x)


def test_tomita_relation_explicit(rng):
    state = random_faithful_state(rng, 2)
    sf = StandardForm(state)
    for x in matrix_units(2):
        lhs = sf.modular_conj(sf.modular_apply(sf.gns_embed(x), 0.5))
        assert np.allclose(lhs, sf.gns_embed(dagger(x)))


def test_modular_group_preserves_state(rng):
    state = random_faithful_state(rng, 3)
    sf = StandardForm(state)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert state.value(sf.sigma_t(x, 0.9)) == pytest.approx(state.value(x))
    # sigma_t is a *-automorphism
    y = rng.standard_normal((3, 3))
    assert np.allclose(sf.sigma_t(x @ y, 0.9), sf.sigma_t(x, 0.9) @ sf.sigma_t(y, 0.9))


def test_cone_membership(rng):
    state = random_faithful_state(rng, 3)
    sf = StandardForm(state)
    psd = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    psd = psd @ dagger(psd)
    quarter = state.quarter
    assert sf.cone_member(quarter @ psd @ quarter)
    assert sf.cone_member(sf.zeta)  # the cyclic vector itself
    indefinite = np.diag([1.0, -1.0, 0.0])
    assert not sf.cone_member(quarter @ indefinite @ quarter)


def test_vector_functional_matches_inner_product(rng):
    state = random_faithful_state(rng, 2)
    sf = StandardForm(state)
    c1 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    c2 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    psi = sf.vector_functional(c1, c2)
    x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    direct = hs_inner(sf.zeta @ c1, x @ sf.zeta @ c2)
    assert psi(x) == pytest.approx(direct)


def test_functional_norm_is_trace_norm():
    psi = Functional(np.diag([0.5, -0.25]))
    assert psi.norm() == pytest.approx(0.75)
    assert psi(np.eye(2)) == pytest.approx(0.25)
