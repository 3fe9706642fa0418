"""Linear maps on M_n as superoperators, and their classification.

Conventions fixed once for the whole library:

* row-major vec: vec(A X B) = (A (x) B^T) vec(X);
* Kraus families act in the Heisenberg picture, x -> sum_j K_j* x K_j;
* the predual (trace adjoint) map is defined by
  trace(predual(sigma) x) = trace(sigma tau(x));
* dual maps live in right-multiplier coordinates: the commutant element
  J y J corresponds to the matrix c = y*, acting on GNS vectors by a -> a c.

A QuantumMap carries a `side` tag ('algebra' or 'commutant') so that taking
the dual twice lands back on the algebra picture with the original map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotFaithful
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    allclose,
    as_square,
    dagger,
    hs_inner,
    hs_norm,
    op_norm,
    psd_check,
)
from .standard_form import StandardForm, State, matrix_units

ALGEBRA = "algebra"
COMMUTANT = "commutant"


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=complex).reshape(-1)


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size:
        raise DimensionMismatch("vector length is not a perfect square")
    return v.reshape(n, n)


def left_mult_superop(a: np.ndarray) -> np.ndarray:
    a = as_square(a)
    return np.kron(a, np.eye(a.shape[0], dtype=complex))


def right_mult_superop(b: np.ndarray) -> np.ndarray:
    b = as_square(b)
    return np.kron(np.eye(b.shape[0], dtype=complex), b.T)


def transpose_permutation(n: int) -> np.ndarray:
    """Permutation W with W vec(X) = vec(X^T)."""
    w = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            w[i * n + j, j * n + i] = 1.0
    return w


class QuantumMap:
    """A linear map on M_n held as an n^2 x n^2 superoperator."""

    def __init__(self, superop, kraus=None, side: str = ALGEBRA,
                 tol: Tolerances = DEFAULT_TOL):
        superop = as_square(superop)
        n = int(round(np.sqrt(superop.shape[0])))
        if n * n != superop.shape[0]:
            raise DimensionMismatch("superoperator size is not a perfect square")
        self.dim = n
        self.superop = superop
        self.side = side
        self.kraus = None
        if kraus is not None:
            kraus = [as_square(k) for k in kraus]
            if any(k.shape[0] != n for k in kraus):
                raise DimensionMismatch("Kraus operator dimension mismatch")
            for e in matrix_units(n):
                via_kraus = sum(dagger(k) @ e @ k for k in kraus)
                if not allclose(self.apply(e), via_kraus, tol):
                    raise DimensionMismatch(
                        "superoperator disagrees with the Kraus action")
            self.kraus = kraus

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, dim: int) -> "QuantumMap":
        return cls(np.eye(dim * dim, dtype=complex), kraus=[np.eye(dim)])

    @classmethod
    def from_kraus(cls, kraus, side: str = ALGEBRA) -> "QuantumMap":
        kraus = [as_square(k) for k in kraus]
        n = kraus[0].shape[0]
        superop = np.zeros((n * n, n * n), dtype=complex)
        for k in kraus:
            superop += np.kron(dagger(k), k.T)
        return cls(superop, kraus=kraus, side=side)

    @classmethod
    def from_unitary_conj(cls, u) -> "QuantumMap":
        """Ad(u): x -> u x u* (Heisenberg Kraus family {u*})."""
        u = as_square(u)
        return cls.from_kraus([dagger(u)])

    @classmethod
    def mixed_unitary(cls, unitaries, weights) -> "QuantumMap":
        """x -> sum_i p_i u_i x u_i*."""
        kraus = [np.sqrt(p) * dagger(as_square(u)) for u, p in zip(unitaries, weights)]
        return cls.from_kraus(kraus)

    @classmethod
    def from_action(cls, fn, dim: int, side: str = ALGEBRA) -> "QuantumMap":
        cols = [vec(fn(e)) for e in matrix_units(dim)]
        return cls(np.array(cols).T, side=side)

    # -- actions -----------------------------------------------------------

    def apply(self, x) -> np.ndarray:
        x = as_square(x)
        if x.shape[0] != self.dim:
            raise DimensionMismatch("operand dimension does not match the map")
        return unvec(self.superop @ vec(x))

    @property
    def predual_superop(self) -> np.ndarray:
        w = transpose_permutation(self.dim)
        return w @ self.superop.T @ w

    def predual_apply(self, sigma) -> np.ndarray:
        sigma = as_square(sigma)
        if sigma.shape[0] != self.dim:
            raise DimensionMismatch("operand dimension does not match the map")
        return unvec(self.predual_superop @ vec(sigma))

    def compose(self, other: "QuantumMap") -> "QuantumMap":
        if other.dim != self.dim:
            raise DimensionMismatch("cannot compose maps of different dimension")
        return QuantumMap(self.superop @ other.superop, side=self.side)

    def __eq__(self, other):
        return (isinstance(other, QuantumMap) and self.dim == other.dim
                and np.array_equal(self.superop, other.superop))

    def __hash__(self):
        return hash((self.dim, self.side, self.superop.tobytes()))


def choi(qmap: QuantumMap) -> np.ndarray:
    """Choi matrix sum_ij E_ij (x) tau(E_ij); PSD iff the map is CP."""
    n = qmap.dim
    c = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            c += np.kron(e, qmap.apply(e))
    return c


def gns_operator(qmap: QuantumMap, sf: StandardForm) -> np.ndarray:
    """Matrix of T : x zeta -> tau(x) zeta in the matrix-unit (HS) basis.

    Algebra-side maps embed by right multiplication with rho^{1/2};
    commutant-side maps (right-multiplier coordinates) embed by left
    multiplication, c -> rho^{1/2} c.
    """
    if qmap.dim != sf.n:
        raise DimensionMismatch("map and standard form dimensions differ")
    sqrt, inv_sqrt = sf.state.sqrt, sf.state.inv_sqrt
    if qmap.side == ALGEBRA:
        return right_mult_superop(sqrt) @ qmap.superop @ right_mult_superop(inv_sqrt)
    return left_mult_superop(sqrt) @ qmap.superop @ left_mult_superop(inv_sqrt)


def dual_map(qmap: QuantumMap, sf: StandardForm) -> QuantumMap:
    """The phi-dual map, acting on the opposite side's coordinates.

    Its GNS operator is the HS adjoint T* of the GNS operator of `qmap`;
    the double dual therefore reproduces the original map.
    """
    t_adj = dagger(gns_operator(qmap, sf))
    sqrt, inv_sqrt = sf.state.sqrt, sf.state.inv_sqrt
    if qmap.side == ALGEBRA:
        superop = left_mult_superop(inv_sqrt) @ t_adj @ left_mult_superop(sqrt)
        return QuantumMap(superop, side=COMMUTANT)
    superop = right_mult_superop(inv_sqrt) @ t_adj @ right_mult_superop(sqrt)
    return QuantumMap(superop, side=ALGEBRA)


def adjoint_residual(qmap: QuantumMap, dual: QuantumMap, sf: StandardForm) -> float:
    """Max defect of <c-action zeta, tau(x) zeta> = <tau'(c)-action zeta, x zeta>
    over matrix-unit pairs (x, c)."""
    if qmap.dim != sf.n or dual.dim != sf.n:
        raise DimensionMismatch("dimension mismatch in adjoint_residual")
    sqrt = sf.state.sqrt
    worst = 0.0
    for x in matrix_units(sf.n):
        tx_zeta = qmap.apply(x) @ sqrt
        x_zeta = x @ sqrt
        for c in matrix_units(sf.n):
            lhs = hs_inner(sqrt @ c, tx_zeta)
            rhs = hs_inner(sqrt @ dual.apply(c), x_zeta)
            worst = max(worst, abs(lhs - rhs))
    return worst


def tilde_map(qmap: QuantumMap, sf: StandardForm) -> QuantumMap:
    """J tau'(J x J) J as a map back on M: x -> (tau'(x*))*."""
    dual = dual_map(qmap, sf)
    return QuantumMap.from_action(
        lambda x: dagger(dual.apply(dagger(x))), qmap.dim, side=qmap.side)


def ks_residual(qmap: QuantumMap, x) -> float:
    """Negative part of tau(x*x) - tau(x*) tau(x); <= psd_floor means the
    Kadison-Schwarz inequality holds at x."""
    x = as_square(x)
    gap = qmap.apply(dagger(x) @ x) - qmap.apply(dagger(x)) @ qmap.apply(x)
    gap = 0.5 * (gap + dagger(gap))
    return float(-np.linalg.eigvalsh(gap).min())


def modular_commutation_residual(qmap: QuantumMap, sf: StandardForm, t_list) -> float:
    """Max HS defect of sigma_t(tau(x)) = tau(sigma_t(x)) over t and matrix units."""
    worst = 0.0
    for t in t_list:
        for x in matrix_units(sf.n):
            a = sf.sigma_t(qmap.apply(x), t)
            b = qmap.apply(sf.sigma_t(x, t))
            worst = max(worst, hs_norm(a - b))
    return worst


@dataclass(frozen=True)
class ClassReport:
    """Classification evidence for a map against the contraction classes."""

    cp: bool
    unital: bool
    subunital: bool
    invariant: bool
    subinvariant: bool
    l2_contraction: bool
    in_P_half: bool
    ks_samples_passed: int
    positivity_samples_passed: int
    trials: int
    gns_norm: float
    choi_min_eig: float
    ks_max_residual: float


def _random_matrix(rng, n: int) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_psd(rng, n: int) -> np.ndarray:
    a = _random_matrix(rng, n)
    return a @ dagger(a)


def classify(qmap: QuantumMap, state: State, trials: int = 50, seed: int = 0,
             tol: Tolerances = DEFAULT_TOL) -> ClassReport:
    """Decide membership evidence for the L2-contraction class.

    CP is exact (Choi positivity).  Mere positivity and the
    Kadison-Schwarz inequality are sampled on `trials` seeded random
    inputs; the report records counts, never a proof.
    """
    if qmap.dim != state.dim:
        raise DimensionMismatch("map and state dimensions differ")
    n = qmap.dim
    eye = np.eye(n, dtype=complex)

    tau_eye = qmap.apply(eye)
    unital = allclose(tau_eye, eye, tol)
    subunital = psd_check(eye - tau_eye, tol)

    pre_rho = qmap.predual_apply(state.rho)
    invariant = allclose(pre_rho, state.rho, tol)
    subinvariant = psd_check(state.rho - pre_rho, tol)

    sf = StandardForm(state)
    gns_norm = op_norm(gns_operator(qmap, sf))
    l2_contraction = gns_norm <= 1.0 + tol.psd_floor

    choi_mat = choi(qmap)
    cp = psd_check(choi_mat, tol)
    choi_min = float(np.linalg.eigvalsh(0.5 * (choi_mat + dagger(choi_mat))).min())

    rng = np.random.default_rng(seed)
    positivity_passed = 0
    ks_passed = 0
    ks_max = 0.0
    for _ in range(trials):
        h = random_psd(rng, n)
        if psd_check(qmap.apply(h), tol):
            positivity_passed += 1
        x = _random_matrix(rng, n)
        r = ks_residual(qmap, x)
        ks_max = max(ks_max, r)
        scale = max(1.0, op_norm(dagger(x) @ x))
        if r <= tol.psd_floor * scale:
            ks_passed += 1

    positive_evidence = cp or positivity_passed == trials
    in_p_half = subunital and subinvariant and l2_contraction and positive_evidence

    return ClassReport(
        cp=cp, unital=unital, subunital=subunital, invariant=invariant,
        subinvariant=subinvariant, l2_contraction=l2_contraction,
        in_P_half=in_p_half, ks_samples_passed=ks_passed,
        positivity_samples_passed=positivity_passed, trials=trials,
        gns_norm=gns_norm, choi_min_eig=choi_min, ks_max_residual=ks_max)
