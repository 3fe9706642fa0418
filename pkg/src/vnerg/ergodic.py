"""Cesaro averages, the mean ergodic projection and conditional expectations.

The conditional expectation E onto the fixed-point algebra N is built from
the GNS-space mean ergodic projection P (an orthogonal projection, hence
numerically stable) and cross-checked against the superoperator fixed
space; predual (trace-norm) convergence and the duality certificates are
evaluated here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import SubspaceBasis, gram_schmidt, is_star_algebra
from .cpmaps import (
    QuantumMap,
    dual_map,
    gns_operator,
    modular_commutation_residual,
    right_mult_superop,
    tilde_map,
    unvec,
    vec,
)
from .errors import DimensionMismatch, NotContraction, NotInPHalf, VerificationError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    allclose,
    as_square,
    dagger,
    hs_norm,
    null_space,
    op_norm,
    trace_norm,
)
from .standard_form import Functional, StandardForm, State, matrix_units


@dataclass(frozen=True)
class ErgodicDecomposition:
    """Mean ergodic projection P, conditional expectation E and fixed algebra N."""

    P: np.ndarray
    E: QuantumMap
    N: SubspaceBasis
    fixed_dim: int


def cesaro_map(qmap: QuantumMap, n: int) -> QuantumMap:
    """(1/n) sum_{k<n} tau^k, by iterated application of the superoperator."""
    if n < 1:
        raise ValueError("Cesaro order must be >= 1")
    acc = np.eye(qmap.superop.shape[0], dtype=complex)
    power = np.eye(qmap.superop.shape[0], dtype=complex)
    for _ in range(n - 1):
        power = power @ qmap.superop
        acc += power
    return QuantumMap(acc / n, side=qmap.side)


def cesaro_operator_profile(t: np.ndarray, p: np.ndarray, n_list) -> list:
    """||s_n(T) - P||_op sampled at the given n, with one running average."""
    t = as_square(t)
    n_list = sorted(set(int(n) for n in n_list))
    acc = np.eye(t.shape[0], dtype=complex)
    power = np.eye(t.shape[0], dtype=complex)
    out = []
    top = n_list[-1]
    idx = 0
    for n in range(1, top + 1):
        if n > 1:
            power = power @ t
            acc += power
        if n == n_list[idx]:
            out.append((n, op_norm(acc / n - p)))
            idx += 1
    return out


def mean_projection(t, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projection onto {f : Tf = f} for a contraction T.

    For contractions this is the strong limit of the Cesaro averages
    s_n(T); the fixed spaces of T and T* coincide and are cross-checked.
    """
    t = as_square(t)
    norm = op_norm(t)
    if norm > 1.0 + tol.psd_floor:
        raise NotContraction(f"operator norm {norm} exceeds contraction bound")
    eye = np.eye(t.shape[0], dtype=complex)
    v = null_space(t - eye, tol)
    p = v @ dagger(v)
    v_adj = null_space(dagger(t) - eye, tol)
    p_adj = v_adj @ dagger(v_adj)
    if op_norm(p - p_adj) > 1e3 * tol.eq_rtol:
        raise VerificationError("fixed spaces of T and T* disagree")
    return p


def conditional_expectation(qmap: QuantumMap, state: State, trials: int = 50,
                            seed: int = 0,
                            tol: Tolerances = DEFAULT_TOL) -> ErgodicDecomposition:
    """Mean ergodic data (P, E, N) for a map in the L2-contraction class.

    E is assembled from P via un-embedding and verified against the
    superoperator fixed space; for unital maps the bi-module property and
    *-algebra structure of N are verified as well.
    """
    from .cpmaps import classify  # local import to keep module load cheap

    report = classify(qmap, state, trials=trials, seed=seed, tol=tol)
    if not report.in_P_half:
        raise NotInPHalf(f"map is not certified in the contraction class: {report}")

    sf = StandardForm(state)
    n = state.dim
    t = gns_operator(qmap, sf)
    p = mean_projection(t, tol)

    e_superop = right_mult_superop(state.inv_sqrt) @ p @ right_mult_superop(state.sqrt)
    e_map = QuantumMap(e_superop)

    fixed_vecs = null_space(qmap.superop - np.eye(n * n), tol)
    fixed_mats = [fixed_vecs[:, j].reshape(n, n) for j in range(fixed_vecs.shape[1])]
    basis = gram_schmidt(fixed_mats, n, tol)

    _verify_decomposition(qmap, e_map, p, basis, sf, tol)
    return ErgodicDecomposition(P=p, E=e_map, N=basis, fixed_dim=len(basis))


def _verify_decomposition(qmap, e_map, p, basis, sf, tol):
    scale = 1e2  # construction residuals accumulate a few eigensolver ulps
    if op_norm(p @ p - p) > scale * tol.eq_rtol or op_norm(p - dagger(p)) > scale * tol.eq_rtol:
        raise VerificationError("P is not an orthogonal projection")
    if op_norm(e_map.superop @ e_map.superop - e_map.superop) > scale * tol.eq_rtol:
        raise VerificationError("E is not idempotent")
    for x in matrix_units(sf.n):
        lhs = vec(sf.gns_embed(e_map.apply(x)))
        rhs = p @ vec(sf.gns_embed(x))
        if np.linalg.norm(lhs - rhs) > scale * tol.eq_rtol:
            raise VerificationError("E and P disagree on matrix units")
    # range of P = span of embedded fixed-point algebra
    embedded = [vec(sf.gns_embed(b)) for b in basis]
    if embedded:
        q = np.array(embedded).T
        q, _ = np.linalg.qr(q)
        if op_norm(p - q @ dagger(q)) > 1e3 * tol.eq_rtol:
            raise VerificationError("range(P) differs from the embedded fixed algebra")
    elif op_norm(p) > scale * tol.eq_rtol:
        raise VerificationError("P nonzero but the fixed algebra is empty")

    eye = np.eye(sf.n, dtype=complex)
    if allclose(qmap.apply(eye), eye, tol):
        if not is_star_algebra(basis, tol):
            raise VerificationError("fixed space of a unital member is not a *-algebra")
        if bimodule_residual(e_map, basis, sf.n) > scale * tol.eq_rtol:
            raise VerificationError("bi-module property failed for a unital member")


def bimodule_residual(e_map: QuantumMap, basis: SubspaceBasis, n: int) -> float:
    """max ||y E(x) z - E(y x z)|| over fixed-algebra basis pairs and matrix units."""
    worst = 0.0
    for y in basis:
        for z in basis:
            for x in matrix_units(n):
                worst = max(worst, hs_norm(y @ e_map.apply(x) @ z - e_map.apply(y @ x @ z)))
    return worst


def predual_distance(m1: QuantumMap, m2: QuantumMap, psi: Functional) -> float:
    """||psi o m1 - psi o m2|| in the predual norm.

    Equals the trace norm of the representer difference, i.e.
    sup_{||x|| <= 1} |psi(m1(x)) - psi(m2(x))|.
    """
    if m1.dim != m2.dim or m1.dim != psi.dim:
        raise DimensionMismatch("dimension mismatch in predual_distance")
    return trace_norm(m1.predual_apply(psi.sigma) - m2.predual_apply(psi.sigma))


def functional_battery(n: int) -> list:
    """Matrix-unit representers; they span all of M_*."""
    return [Functional(e) for e in matrix_units(n)]


@dataclass(frozen=True)
class DualityReport:
    """Numerical certificate for the strong-operator/predual duality."""

    eq8_max_violation: float
    predual_cauchy: float
    strong_cauchy: float
    forward_gap_pairs: tuple
    converse_max_violation: float | None
    modular_residual: float | None


def theorem11_certificate(maps, sf: StandardForm, psi_battery=None,
                          check_converse: bool = False,
                          tol: Tolerances = DEFAULT_TOL) -> DualityReport:
    """Pairwise duality certificate for a family of maps.

    For every pair: checks the Cauchy-Schwarz bound
    |psi_{c1,c2}((tau_n - tau_m)(x))| <= ||(tau'_n - tau'_m)(c1 c2*) zeta|| ||x||
    on matrix-unit batteries, and records the predual and GNS-strong Cauchy
    moduli.  With `check_converse`, also certifies the Delta^{1/4} chain
    ||Delta^{1/4}(tau_n - tau_m)(x) zeta||^2 <= 2 ||x||^2 ||psi_x o (tilde_n - tilde_m)||
    on operator-norm-one inputs (valid for modular-commuting families).
    """
    n = sf.n
    maps = list(maps)
    if psi_battery is None:
        psi_battery = functional_battery(n)
    duals = [dual_map(m, sf) for m in maps]
    tildes = [tilde_map(m, sf) for m in maps] if check_converse else None
    units = matrix_units(n)
    sqrt = sf.state.sqrt

    eq8_violation = 0.0
    predual_cauchy = 0.0
    strong_cauchy = 0.0
    converse_violation = 0.0 if check_converse else None
    pair_gaps = []

    for a in range(len(maps)):
        for b in range(a + 1, len(maps)):
            diff_superop = maps[a].superop - maps[b].superop
            diff = QuantumMap(diff_superop)
            dual_diff = duals[a].superop - duals[b].superop

            for c1 in units:
                for c2 in units:
                    psi = sf.vector_functional(c1, c2)
                    rhs_vec = sqrt @ unvec(dual_diff @ vec(c1 @ dagger(c2)))
                    bound = hs_norm(rhs_vec)
                    for x in units:
                        lhs = abs(psi(diff.apply(x)))
                        eq8_violation = max(eq8_violation, lhs - bound * op_norm(x))

            d_pre = max(trace_norm(unvec((maps[a].predual_superop
                                          - maps[b].predual_superop) @ vec(psi.sigma)))
                        for psi in psi_battery)
            t_diff = gns_operator(maps[a], sf) - gns_operator(maps[b], sf)
            d_strong = max(np.linalg.norm(t_diff[:, k]) for k in range(n * n))
            predual_cauchy = max(predual_cauchy, d_pre)
            strong_cauchy = max(strong_cauchy, d_strong)
            pair_gaps.append((a, b, d_pre, d_strong))

            if check_converse:
                tilde_diff_pre = (tildes[a].predual_superop - tildes[b].predual_superop)
                for x in units + [_random_contraction(n, seed=17 * a + b)]:
                    xn = op_norm(x)
                    emb = sf.gns_embed(diff.apply(x))
                    lhs = hs_norm(sf.modular_apply(emb, 0.25)) ** 2
                    sigma_x = sqrt @ x @ sqrt
                    rhs = 2 * xn * xn * trace_norm(unvec(tilde_diff_pre @ vec(sigma_x)))
                    converse_violation = max(converse_violation, lhs - rhs)

    modular_res = None
    if check_converse:
        modular_res = max(modular_commutation_residual(m, sf, [0.3, 1.7]) for m in maps)

    return DualityReport(
        eq8_max_violation=eq8_violation,
        predual_cauchy=predual_cauchy,
        strong_cauchy=strong_cauchy,
        forward_gap_pairs=tuple(pair_gaps),
        converse_max_violation=converse_violation,
        modular_residual=modular_res)


def _random_contraction(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return x / op_norm(x)


def convergence_profile(qmap: QuantumMap, state: State, psi: Functional, n_list,
                        trials: int = 50, seed: int = 0,
                        tol: Tolerances = DEFAULT_TOL) -> list:
    """predual_distance(s_n, E, psi) for each n in n_list."""
    decomp = conditional_expectation(qmap, state, trials=trials, seed=seed, tol=tol)
    out = []
    for n in n_list:
        out.append((int(n), predual_distance(cesaro_map(qmap, int(n)), decomp.E, psi)))
    return out
