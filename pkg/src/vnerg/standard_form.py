"""Standard form of (M_n, phi) for a faithful density matrix.

GNS vectors are kept as n x n matrices under the Hilbert-Schmidt inner
product.  The embedding x -> x rho^{1/2} fixes the cyclic vector
zeta = rho^{1/2}, so the modular data reduce to one-line formulas:

    Delta^s (a) = rho^s a rho^{-s}        J(a) = a*

and the commutant acts by right multiplication a -> a c.  A commutant
element written J y J in operator language corresponds to the right
multiplier c = y*.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotFaithful, VerificationError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_square,
    dagger,
    frac_power,
    hs_inner,
    hs_norm,
    psd_check,
    trace_norm,
)


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def matrix_units(n: int):
    return [matrix_unit(n, i, j) for i in range(n) for j in range(n)]


class State:
    """Faithful state phi(x) = trace(rho x) with cached fractional powers."""

    def __init__(self, rho, tol: Tolerances = DEFAULT_TOL):
        rho = as_square(rho)
        if not psd_check(rho, tol):
            raise NotFaithful("density matrix is not PSD")
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > tol.eq_rtol * max(1.0, abs(tr)):
            raise NotFaithful(f"trace(rho) = {tr}, expected 1")
        w = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))
        if w.min() <= tol.psd_floor:
            raise NotFaithful(f"min eigenvalue {w.min():.3e} at or below psd floor")
        self.tol = tol
        self.dim = rho.shape[0]
        self.rho = 0.5 * (rho + dagger(rho))
        self.sqrt = frac_power(self.rho, 0.5, tol)
        self.inv_sqrt = frac_power(self.rho, -0.5, tol)
        self.quarter = frac_power(self.rho, 0.25, tol)
        self.inv_quarter = frac_power(self.rho, -0.25, tol)

    @classmethod
    def tracial(cls, dim: int, tol: Tolerances = DEFAULT_TOL) -> "State":
        return cls(np.eye(dim) / dim, tol)

    def value(self, x) -> complex:
        x = as_square(x)
        if x.shape[0] != self.dim:
            raise DimensionMismatch("operand dimension does not match the state")
        return complex(np.trace(self.rho @ x))


class Functional:
    """Normal functional psi(x) = trace(sigma x); ||psi|| = trace_norm(sigma)."""

    def __init__(self, sigma):
        self.sigma = as_square(sigma)
        self.dim = self.sigma.shape[0]

    def __call__(self, x) -> complex:
        x = as_square(x)
        if x.shape[0] != self.dim:
            raise DimensionMismatch("operand dimension does not match the functional")
        return complex(np.trace(self.sigma @ x))

    def norm(self) -> float:
        return trace_norm(self.sigma)


class StandardForm:
    """Standard form of (M_n, phi); construction verifies the Tomita data."""

    def __init__(self, state: State):
        self.state = state
        self.n = state.dim
        self.gns_dim = self.n * self.n
        self.zeta = state.sqrt
        self.tol = state.tol
        self._verify()

    def _verify(self):
        tol = self.tol
        phi = self.state
        for x in matrix_units(self.n):
            for y in matrix_units(self.n):
                lhs = hs_inner(self.gns_embed(x), self.gns_embed(y))
                rhs = phi.value(dagger(x) @ y)
                if abs(lhs - rhs) > tol.eq_rtol * (1.0 + abs(rhs)):
                    raise VerificationError("GNS isometry failed on matrix units")
            jd = self.modular_conj(self.modular_apply(self.gns_embed(x), 0.5))
            want = self.gns_embed(dagger(x))
            if hs_norm(jd - want) > tol.eq_rtol * (1.0 + hs_norm(want)):
                raise VerificationError("Tomita relation J Delta^{1/2} x zeta = x* zeta failed")

    def gns_embed(self, x) -> np.ndarray:
        """x -> x rho^{1/2}; isometric from (M, phi) onto the GNS space."""
        x = as_square(x)
        if x.shape[0] != self.n:
            raise DimensionMismatch("operand dimension does not match the GNS space")
        return x @ self.state.sqrt

    def gns_unembed(self, a) -> np.ndarray:
        a = as_square(a)
        return a @ self.state.inv_sqrt

    def modular_apply(self, a, s) -> np.ndarray:
        """Delta^s a = rho^s a rho^{-s}; s real or purely imaginary."""
        a = as_square(a)
        if a.shape[0] != self.n:
            raise DimensionMismatch("vector dimension does not match the GNS space")
        s = complex(s)
        if s == 0:
            return a.astype(complex)
        left = frac_power(self.state.rho, s, self.tol)
        right = frac_power(self.state.rho, -s, self.tol)
        return left @ a @ right

    def modular_conj(self, a) -> np.ndarray:
        """J a = a* (antilinear, J^2 = id)."""
        a = as_square(a)
        if a.shape[0] != self.n:
            raise DimensionMismatch("vector dimension does not match the GNS space")
        return dagger(a)

    def sigma_t(self, x, t: float) -> np.ndarray:
        """Modular automorphism sigma_t(x) = rho^{it} x rho^{-it}."""
        return self.modular_apply(x, 1j * float(t))

    def cone_member(self, a, tol: Tolerances | None = None) -> bool:
        """Araki cone test: rho^{-1/4} a rho^{-1/4} must be PSD."""
        a = as_square(a)
        if a.shape[0] != self.n:
            raise DimensionMismatch("vector dimension does not match the GNS space")
        tol = tol or self.tol
        h = self.state.inv_quarter @ a @ self.state.inv_quarter
        return psd_check(h, tol)

    def vector_functional(self, c1, c2) -> Functional:
        """psi(x) = <(zeta c1), x (zeta c2)>_HS for right multipliers c1, c2.

        The trace-class representer is rho^{1/2} c2 c1* rho^{1/2}.
        """
        c1 = as_square(c1)
        c2 = as_square(c2)
        if c1.shape[0] != self.n or c2.shape[0] != self.n:
            raise DimensionMismatch("multiplier dimension does not match the GNS space")
        sigma = self.state.sqrt @ c2 @ dagger(c1) @ self.state.sqrt
        return Functional(sigma)
