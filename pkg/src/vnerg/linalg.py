"""Dense complex matrix kernel.

Hermitian/PSD checks, unitarily invariant norms, fractional powers,
exponentials and numerical null spaces, all governed by a single
:class:`Tolerances` policy.  Every other module builds on these routines,
so eigen/SVD outputs are made deterministic here (descending order,
phase-fixed vectors).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NonFinite, NotPSD, SingularMatrix


@dataclass(frozen=True)
class Tolerances:
    """Numerical fuzz policy threaded through the whole library.

    psd_floor      : absolute slack (relative to max(1, ||A||)) allowed below 0
                     for eigenvalues of a PSD matrix.
    eq_rtol        : relative tolerance for equality of matrices/scalars.
    nullspace_rel  : singular values below nullspace_rel * sigma_max count as 0.
    """

    psd_floor: float = 1e-9
    eq_rtol: float = 1e-8
    nullspace_rel: float = 1e-10

    def __post_init__(self):
        if not (self.psd_floor > 0 and self.eq_rtol > 0 and self.nullspace_rel > 0):
            raise ValueError("all tolerances must be strictly positive")
        if self.psd_floor >= 1e-3:
            raise ValueError("psd_floor must be below 1e-3")


DEFAULT_TOL = Tolerances()


def as_square(a) -> np.ndarray:
    """Validate and return `a` as a finite square complex array."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise NonFinite("matrix contains NaN or Inf entries")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product trace(a* b), conjugate-linear in `a`."""
    return complex(np.vdot(a, b))


def hs_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def is_hermitian(a: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> bool:
    a = as_square(a)
    scale = max(1.0, float(np.linalg.norm(a, 2)))
    return float(np.linalg.norm(a - dagger(a), 2)) <= tol.eq_rtol * scale


def _symmetrized(a: np.ndarray) -> np.ndarray:
    # round-off suppression; callers check Hermiticity beforehand
    return 0.5 * (a + dagger(a))


def _fix_phases(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its first significant entry is real positive."""
    v = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * max(1.0, np.abs(col).max()))
        if nz.size:
            pivot = col[nz[0]]
            v[:, j] = col * (pivot.conjugate() / abs(pivot))
    return v


def herm_eig(a: np.ndarray, tol: Tolerances = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns (w, v) with eigenvalues descending and phase-fixed eigenvectors,
    so repeated calls on equal inputs give identical bases.
    """
    a = as_square(a)
    if not is_hermitian(a, tol):
        raise NotPSD("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(_symmetrized(a))
    order = np.argsort(-w, kind="stable")
    return w[order], _fix_phases(v[:, order])


def psd_check(a, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff `a` is Hermitian and its spectrum sits above -psd_floor * scale."""
    a = as_square(a)
    if not is_hermitian(a, tol):
        return False
    w = np.linalg.eigvalsh(_symmetrized(a))
    scale = max(1.0, float(np.linalg.norm(a, 2)))
    return bool(w.min() >= -tol.psd_floor * scale)


def trace_norm(a) -> float:
    """Sum of singular values (the predual/Banach norm of a functional)."""
    a = as_square(a)
    return float(np.linalg.svd(a, compute_uv=False).sum())


def op_norm(a) -> float:
    """Largest singular value."""
    a = as_square(a)
    if a.shape[0] == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def frac_power(a, s, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Spectral power A^s of a PSD matrix.

    `s` may be complex; purely imaginary s=it yields the unitary A^{it}.
    Strict positivity is required when Re(s) < 0 or Im(s) != 0.
    """
    a = as_square(a)
    if not psd_check(a, tol):
        raise NotPSD("frac_power requires a PSD input")
    w, v = herm_eig(a, tol)
    w = np.clip(w.real, 0.0, None)
    s = complex(s)
    needs_positive = (s.real < 0) or (s.imag != 0)
    if needs_positive and w.min() <= tol.psd_floor:
        raise SingularMatrix("negative/imaginary power of a singular matrix")
    if s == 0:
        return np.eye(a.shape[0], dtype=complex)
    with np.errstate(divide="ignore"):
        f = np.where(w > 0, np.power(w.astype(complex), s), 0.0)
    return (v * f) @ dagger(v)


def null_space(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical right null space of `a`.

    Vectors are right-singular vectors with singular value below
    nullspace_rel * sigma_max; the returned array has shape (n, k), k >= 0.
    """
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise NonFinite("matrix contains NaN or Inf entries")
    if a.ndim != 2:
        raise ValueError("null_space expects a 2-d array")
    n = a.shape[1]
    if a.shape[0] == 0 or not a.any():
        return np.eye(n, dtype=complex)
    _, sv, vh = np.linalg.svd(a)
    smax = sv[0] if sv.size else 0.0
    if smax == 0.0:
        return np.eye(n, dtype=complex)
    mask = np.zeros(n, dtype=bool)
    mask[: sv.size] = sv <= tol.nullspace_rel * smax
    mask[sv.size:] = True
    basis = vh[mask].conj().T
    return _fix_phases(basis)


def matrix_exp(a) -> np.ndarray:
    """exp(A) for a square matrix."""
    a = as_square(a)
    out = scipy.linalg.expm(a)
    if not np.all(np.isfinite(out)):
        raise NonFinite("matrix exponential overflowed")
    return out


def allclose(a, b, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Scale-aware matrix equality under the shared policy."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)), float(np.linalg.norm(b)))
    return float(np.linalg.norm(a - b)) <= tol.eq_rtol * scale
