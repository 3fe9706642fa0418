"""Lindblad generators, the semigroup tau_t and Abel (resolvent) averages.

Generators are accepted in Lindblad form only (Hamiltonian plus jump
operators, Heisenberg picture), which guarantees a unital CP semigroup.
The Abel average is computed by the resolvent closed form and is
cross-validated against Simpson quadrature of the defining integral.
"""

from __future__ import annotations

import numpy as np

from .algebra import gram_schmidt
from .cpmaps import (
    QuantumMap,
    choi,
    left_mult_superop,
    right_mult_superop,
    transpose_permutation,
    unvec,
    vec,
)
from .ergodic import ErgodicDecomposition, functional_battery, predual_distance, _verify_decomposition
from .errors import NotInvariant, SingularResolvent, VerificationError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_square,
    dagger,
    is_hermitian,
    matrix_exp,
    null_space,
    psd_check,
)
from .standard_form import StandardForm, State


class LindbladGenerator:
    """Heisenberg-picture generator x -> i[H,x] + sum_j (L_j* x L_j - {L_j* L_j, x}/2)."""

    def __init__(self, hamiltonian, jumps=(), tol: Tolerances = DEFAULT_TOL):
        h = as_square(hamiltonian)
        if not is_hermitian(h, tol):
            raise ValueError("Hamiltonian must be Hermitian")
        n = h.shape[0]
        eye = np.eye(n, dtype=complex)
        superop = 1j * (left_mult_superop(h) - right_mult_superop(h))
        jumps = [as_square(l) for l in jumps]
        for l in jumps:
            if l.shape[0] != n:
                raise ValueError("jump operator dimension mismatch")
            ldl = dagger(l) @ l
            superop += np.kron(dagger(l), l.T)
            superop -= 0.5 * (left_mult_superop(ldl) + right_mult_superop(ldl))
        self.dim = n
        self.hamiltonian = h
        self.jumps = jumps
        self.superop = superop
        self.tol = tol
        self._verify()

    def _verify(self):
        eye = np.eye(self.dim, dtype=complex)
        if np.linalg.norm(self.superop @ vec(eye)) > self.tol.eq_rtol * self.dim:
            raise VerificationError("generator does not annihilate the identity")
        for t in (0.1, 1.0):
            if not psd_check(choi(evolve(self, t)), self.tol):
                raise VerificationError(f"semigroup is not CP at t={t}")

    @property
    def predual_superop(self) -> np.ndarray:
        w = transpose_permutation(self.dim)
        return w @ self.superop.T @ w


def evolve(gen: LindbladGenerator, t: float) -> QuantumMap:
    """tau_t = exp(t L)."""
    if t < 0:
        raise ValueError("semigroup time must be nonnegative")
    return QuantumMap(matrix_exp(t * gen.superop))


def abel_average(gen: LindbladGenerator, lam: float) -> QuantumMap:
    """s_lambda = lambda (lambda I - L)^{-1}, the Laplace transform of tau_t."""
    if lam <= 0:
        raise ValueError("Abel parameter must be positive")
    n2 = gen.superop.shape[0]
    a = lam * np.eye(n2, dtype=complex) - gen.superop
    if np.linalg.cond(a) > 1e14:
        raise SingularResolvent(f"lambda = {lam} is (near-)spectral for the generator")
    return QuantumMap(lam * np.linalg.solve(a, np.eye(n2, dtype=complex)))


def abel_quadrature_residual(gen: LindbladGenerator, lam: float, t_max: float,
                             steps: int) -> float:
    """Sup-entry gap between the resolvent and composite-Simpson quadrature
    of lambda e^{-lambda t} tau_t on [0, t_max]."""
    if lam <= 0 or steps < 2:
        raise ValueError("need lam > 0 and steps >= 2")
    if lam * t_max < 20:
        raise ValueError("t_max too small: lambda * t_max must be >= 20")
    if steps % 2:
        steps += 1
    h = t_max / steps
    n2 = gen.superop.shape[0]
    step_op = matrix_exp(h * gen.superop)
    quad = np.zeros((n2, n2), dtype=complex)
    cur = np.eye(n2, dtype=complex)
    for k in range(steps + 1):
        weight = 1.0 if k in (0, steps) else (4.0 if k % 2 else 2.0)
        quad += weight * lam * np.exp(-lam * k * h) * cur
        if k < steps:
            cur = cur @ step_op
    quad *= h / 3.0
    return float(np.abs(quad - abel_average(gen, lam).superop).max())


def semigroup_expectation(gen: LindbladGenerator, state: State, lam_list,
                          psi_battery=None,
                          tol: Tolerances = DEFAULT_TOL):
    """Ergodic decomposition for the semigroup plus an Abel convergence profile.

    Requires the state to be invariant: predual(L)(rho) = 0.  Returns
    (ErgodicDecomposition, [(lam, psi_index, predual_distance), ...]).
    """
    n = state.dim
    if gen.dim != n:
        raise NotInvariant("generator and state dimensions differ")
    drift = unvec(gen.predual_superop @ vec(state.rho))
    if np.linalg.norm(drift) > tol.eq_rtol * n:
        raise NotInvariant("state is not invariant under the semigroup")

    sf = StandardForm(state)
    # fixed points of all tau_t = kernel of the generator
    fixed_vecs = null_space(gen.superop, tol)
    basis = gram_schmidt([fixed_vecs[:, j].reshape(n, n) for j in range(fixed_vecs.shape[1])],
                         n, tol)

    gns_gen = right_mult_superop(state.sqrt) @ gen.superop @ right_mult_superop(state.inv_sqrt)
    v = null_space(gns_gen, tol)
    p = v @ dagger(v)
    v_adj = null_space(dagger(gns_gen), tol)
    if np.linalg.norm(p - v_adj @ dagger(v_adj), 2) > 1e3 * tol.eq_rtol:
        raise VerificationError("GNS generator kernel is not reducing")
    e_superop = right_mult_superop(state.inv_sqrt) @ p @ right_mult_superop(state.sqrt)
    e_map = QuantumMap(e_superop)

    # semigroups here are unital CP, so the full decomposition contract applies
    unit_map = evolve(gen, 1.0)
    _verify_decomposition(unit_map, e_map, p, basis, sf, tol)
    decomp = ErgodicDecomposition(P=p, E=e_map, N=basis, fixed_dim=len(basis))

    if psi_battery is None:
        psi_battery = functional_battery(n)
    profile = []
    for lam in lam_list:
        s_lam = abel_average(gen, float(lam))
        for idx, psi in enumerate(psi_battery):
            profile.append((float(lam), idx, predual_distance(s_lam, e_map, psi)))
    return decomp, profile
