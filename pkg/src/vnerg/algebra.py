"""Subspaces of the ambient matrix algebra M_n.

Commutants, Hilbert-Schmidt projections onto spans, and *-algebra
structure checks for candidate fixed-point algebras.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .linalg import DEFAULT_TOL, Tolerances, as_square, dagger, hs_inner, hs_norm, null_space


@dataclass(frozen=True)
class SubspaceBasis:
    """HS-orthonormal basis of a linear subspace of M_n."""

    dim: int
    elements: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def gram_schmidt(mats, dim: int, tol: Tolerances = DEFAULT_TOL) -> SubspaceBasis:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Dependent inputs are dropped; the input order fixes the output basis.
    """
    basis = []
    for m in mats:
        m = as_square(m)
        if m.shape[0] != dim:
            raise DimensionMismatch(f"expected {dim}x{dim}, got {m.shape}")
        v = m.astype(complex)
        for _ in range(2):
            for b in basis:
                v = v - hs_inner(b, v) * b
        norm = hs_norm(v)
        if norm > tol.nullspace_rel * max(1.0, hs_norm(m)) * 1e2:
            basis.append(v / norm)
    return SubspaceBasis(dim=dim, elements=tuple(basis))


def commutant(generators, dim: int, tol: Tolerances = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of {x : xg = gx for every generator g}.

    Solved as the joint null space of x -> xg - gx in vectorized form.
    The identity/sqrt(dim) is always a member and is placed first.
    """
    eye = np.eye(dim, dtype=complex)
    rows = []
    for g in generators:
        g = as_square(g)
        if g.shape[0] != dim:
            raise DimensionMismatch(f"generator has shape {g.shape}, ambient dim {dim}")
        # row-major vec: vec(xg) = (I (x) g^T) vec(x), vec(gx) = (g (x) I) vec(x)
        rows.append(np.kron(eye, g.T) - np.kron(g, eye))
    if rows:
        stacked = np.vstack(rows)
        vecs = null_space(stacked, tol)
        mats = [vecs[:, j].reshape(dim, dim) for j in range(vecs.shape[1])]
    else:
        mats = [eye[i].reshape(-1, 1) @ eye[j].reshape(1, -1) for i in range(dim) for j in range(dim)]
    return gram_schmidt([eye / np.sqrt(dim)] + mats, dim, tol)


def hs_project(x, basis: SubspaceBasis) -> np.ndarray:
    """Orthogonal projection of x onto span(basis) in the HS inner product."""
    x = as_square(x)
    if x.shape[0] != basis.dim:
        raise DimensionMismatch(f"matrix dim {x.shape[0]} vs basis dim {basis.dim}")
    out = np.zeros_like(x, dtype=complex)
    for b in basis:
        out += hs_inner(b, x) * b
    return out


def _in_span(x, basis: SubspaceBasis, tol: Tolerances) -> bool:
    residual = hs_norm(x - hs_project(x, basis))
    return residual <= tol.eq_rtol * (1.0 + hs_norm(x))


def is_star_algebra(basis: SubspaceBasis, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff span(basis) is closed under adjoints and all pairwise products."""
    for b in basis:
        if not _in_span(dagger(b), basis, tol):
            return False
    for a in basis:
        for b in basis:
            if not _in_span(a @ b, basis, tol):
                return False
    return True
