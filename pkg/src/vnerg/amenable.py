"""Discrete amenable groups, Folner sequences and unitary group averages.

Elements are canonical integer tuples; Haar measure is counting measure, so
all Folner statistics (invariance defects, Shulman tempered ratios) are
exact rational numbers computed by set arithmetic.  Built-in groups carry
vectorized product routines so box sequences stay cheap at desk scale.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import commutant
from .cpmaps import QuantumMap, gns_operator
from .ergodic import ErgodicDecomposition, _verify_decomposition, predual_distance
from .errors import (
    DimensionMismatch,
    GroupRelationViolated,
    MemoryGuardExceeded,
    NotInvariant,
    UnsupportedGroup,
)
from .linalg import DEFAULT_TOL, Tolerances, allclose, as_square, dagger, null_space
from .standard_form import Functional, StandardForm, State

DEFAULT_SETSIZE_CAP = 200_000_000


def _setsize_cap() -> int:
    return int(os.environ.get("VNERG_MAX_SETSIZE", DEFAULT_SETSIZE_CAP))


class DiscreteGroup:
    """Base class: countable discrete group with canonical tuple elements."""

    name: str
    rank: int  # tuple length of the canonical form

    def identity(self) -> tuple:
        return (0,) * self.rank

    def mul(self, g: tuple, h: tuple) -> tuple:
        raise NotImplementedError

    def inv(self, g: tuple) -> tuple:
        raise NotImplementedError

    def generators(self) -> dict:
        """Ordered mapping generator-name -> element."""
        raise NotImplementedError

    # vectorized set arithmetic on (m, rank) int arrays
    def mul_outer(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = [self.mul(tuple(x), tuple(y)) for x in a for y in b]
        return np.array(out, dtype=np.int64).reshape(-1, self.rank)

    def mul_bounds(self, a: np.ndarray, b: np.ndarray):
        """Conservative per-coordinate (lo, hi) bounds for the product set,
        or None when no cheap interval arithmetic is available."""
        return None

    def inv_array(self, a: np.ndarray) -> np.ndarray:
        return np.array([self.inv(tuple(x)) for x in a], dtype=np.int64)

    def audit(self, depth: int = 4) -> bool:
        """Spot-check group axioms on generator words up to the given length."""
        gens = list(self.generators().values())
        words = [self.identity()] + gens + [self.inv(g) for g in gens]
        frontier = list(words)
        for _ in range(depth - 1):
            frontier = [self.mul(w, g) for w in frontier for g in gens][:200]
            words.extend(frontier)
        e = self.identity()
        for g in words:
            if self.mul(g, e) != g or self.mul(e, g) != g:
                return False
            if self.mul(g, self.inv(g)) != e:
                return False
        for g in words[:20]:
            for h in words[:20]:
                for k in words[:20]:
                    if self.mul(self.mul(g, h), k) != self.mul(g, self.mul(h, k)):
                        return False
        return True


class ZGroup(DiscreteGroup):
    """Z^d under addition."""

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("d must be >= 1")
        self.d = d
        self.rank = d
        self.name = f"Z^{d}"

    def mul(self, g, h):
        return tuple(int(a + b) for a, b in zip(g, h))

    def inv(self, g):
        return tuple(int(-a) for a in g)

    def generators(self):
        out = {}
        for i in range(self.d):
            e = [0] * self.d
            e[i] = 1
            out[f"u{i + 1}"] = tuple(e)
        return out

    def mul_outer(self, a, b):
        return (a[:, None, :] + b[None, :, :]).reshape(-1, self.d)

    def mul_bounds(self, a, b):
        return a.min(axis=0) + b.min(axis=0), a.max(axis=0) + b.max(axis=0)

    def inv_array(self, a):
        return -a


class Heisenberg3(DiscreteGroup):
    """Discrete Heisenberg group, canonical form x^a y^b z^c.

    Relations: x y = y x z with z central, giving
    (a,b,c) (a',b',c') = (a+a', b+b', c+c' - a' b).
    """

    rank = 3
    name = "Heisenberg3"

    def mul(self, g, h):
        a, b, c = g
        a2, b2, c2 = h
        return (int(a + a2), int(b + b2), int(c + c2 - a2 * b))

    def inv(self, g):
        a, b, c = g
        return (int(-a), int(-b), int(-c - a * b))

    def generators(self):
        return {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)}

    def mul_outer(self, a, b):
        a1 = a[:, None, :]
        b1 = b[None, :, :]
        out = np.empty((a.shape[0], b.shape[0], 3), dtype=np.int64)
        out[..., 0] = a1[..., 0] + b1[..., 0]
        out[..., 1] = a1[..., 1] + b1[..., 1]
        out[..., 2] = a1[..., 2] + b1[..., 2] - b1[..., 0] * a1[..., 1]
        return out.reshape(-1, 3)

    def mul_bounds(self, a, b):
        alo, ahi = a.min(axis=0), a.max(axis=0)
        blo, bhi = b.min(axis=0), b.max(axis=0)
        corners = [-b0 * a1 for b0 in (blo[0], bhi[0]) for a1 in (alo[1], ahi[1])]
        lo = np.array([alo[0] + blo[0], alo[1] + blo[1], alo[2] + blo[2] + min(corners)])
        hi = np.array([ahi[0] + bhi[0], ahi[1] + bhi[1], ahi[2] + bhi[2] + max(corners)])
        return lo, hi

    def inv_array(self, a):
        out = -a.copy()
        out[:, 2] -= a[:, 0] * a[:, 1]
        return out


class CyclicGroup(DiscreteGroup):
    """Z/NZ."""

    rank = 1

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("N must be >= 1")
        self.n = n
        self.name = f"C{n}"

    def mul(self, g, h):
        return ((g[0] + h[0]) % self.n,)

    def inv(self, g):
        return ((-g[0]) % self.n,)

    def generators(self):
        return {"u1": (1,)}

    def mul_outer(self, a, b):
        return ((a[:, None, :] + b[None, :, :]) % self.n).reshape(-1, 1)

    def inv_array(self, a):
        return (-a) % self.n


class FiniteByTable(DiscreteGroup):
    """Finite group given by a multiplication table (elements 0..N-1, 0 = e)."""

    rank = 1

    def __init__(self, table, folner_sets=None, name: str = "table"):
        table = np.asarray(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise ValueError("multiplication table must be square")
        self.n = table.shape[0]
        self.table = table
        self.name = name
        self.declared_folner = folner_sets
        if not self.audit():
            raise GroupRelationViolated("multiplication table violates group axioms")

    def mul(self, g, h):
        return (int(self.table[g[0], h[0]]),)

    def inv(self, g):
        col = np.flatnonzero(self.table[g[0]] == 0)
        if col.size != 1:
            raise GroupRelationViolated("element without unique inverse")
        return (int(col[0]),)

    def generators(self):
        return {f"g{i}": (i,) for i in range(1, self.n)}

    def audit(self, depth: int = 4) -> bool:
        t = self.table
        n = self.n
        if not np.array_equal(t[0], np.arange(n)) or not np.array_equal(t[:, 0], np.arange(n)):
            return False
        if any(len(set(t[i])) != n for i in range(n)):
            return False
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if t[t[i, j], k] != t[i, t[j, k]]:
                        return False
        return True


@dataclass(frozen=True)
class FolnerSet:
    """Finite subset of a discrete group with a deterministic enumeration."""

    group: DiscreteGroup
    elements: tuple

    @classmethod
    def from_iterable(cls, group: DiscreteGroup, elems) -> "FolnerSet":
        return cls(group=group, elements=tuple(sorted(set(map(tuple, elems)))))

    def __len__(self):
        return len(self.elements)

    def as_array(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int64).reshape(-1, self.group.rank)

    def inverse(self) -> "FolnerSet":
        return FolnerSet.from_iterable(self.group, map(tuple, self.group.inv_array(self.as_array())))


def folner_boxes(group: DiscreteGroup, n: int) -> FolnerSet:
    """Standard box Folner sets: [-n,n]^d for Z^d, anisotropic boxes
    (|a|,|b| <= n, |c| <= n^2) for Heisenberg, the whole group for cyclic."""
    if n < 0:
        raise ValueError("box index must be nonnegative")
    if isinstance(group, ZGroup):
        rng = range(-n, n + 1)
        import itertools
        return FolnerSet.from_iterable(group, itertools.product(rng, repeat=group.d))
    if isinstance(group, Heisenberg3):
        side = range(-n, n + 1)
        center = range(-n * n, n * n + 1)
        return FolnerSet.from_iterable(
            group, ((a, b, c) for a in side for b in side for c in center))
    if isinstance(group, CyclicGroup):
        return FolnerSet.from_iterable(group, ((k,) for k in range(group.n)))
    if isinstance(group, FiniteByTable):
        if group.declared_folner is not None and n - 1 < len(group.declared_folner):
            return FolnerSet.from_iterable(group, group.declared_folner[n - 1])
        raise UnsupportedGroup("table group has no declared Folner sequence")
    raise UnsupportedGroup(f"no built-in Folner boxes for {group.name}")


def _unique_rows(a: np.ndarray) -> np.ndarray:
    if a.shape[1] == 1:
        return np.unique(a.ravel()).reshape(-1, 1)
    return np.unique(a, axis=0)


_PRODUCT_CHUNK_ROWS = 4_000_000


def _product_set(group: DiscreteGroup, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product set {g h : g in a, h in b}, chunked to bound memory."""
    if a.shape[0] * b.shape[0] > _setsize_cap():
        raise MemoryGuardExceeded(
            f"product set of {a.shape[0]} x {b.shape[0]} exceeds VNERG_MAX_SETSIZE")
    step = max(1, _PRODUCT_CHUNK_ROWS // max(1, b.shape[0]))

    # With per-coordinate interval bounds, dedupe on scalar keys (a single
    # 1-d sort) instead of the much slower row-wise unique.
    bounds = group.mul_bounds(a, b) if a.size and b.size else None
    if bounds is not None and group.rank > 1:
        lo, hi = bounds
        spans = (hi - lo + 1).astype(np.int64)
        if float(np.prod(spans.astype(float))) < 2 ** 62:
            strides = np.ones(group.rank, dtype=np.int64)
            for i in range(group.rank - 2, -1, -1):
                strides[i] = strides[i + 1] * spans[i + 1]
            key_pieces = []
            for start in range(0, a.shape[0], step):
                prod = group.mul_outer(a[start:start + step], b)
                key_pieces.append(np.unique((prod - lo) @ strides))
            keys = np.unique(np.concatenate(key_pieces))
            out = np.empty((keys.shape[0], group.rank), dtype=np.int64)
            for i in range(group.rank):
                out[:, i] = keys // strides[i] + lo[i]
                keys = keys % strides[i]
            return out

    pieces = []
    for start in range(0, a.shape[0], step):
        pieces.append(_unique_rows(group.mul_outer(a[start:start + step], b)))
    return _unique_rows(np.vstack(pieces))


def folner_defect(f: FolnerSet, k_elements) -> Fraction:
    """|F symdiff KF| / |F| with KF = {k f}, exact rational arithmetic."""
    if len(f) == 0:
        raise ValueError("Folner set must be nonempty")
    group = f.group
    base = set(f.elements)
    kf = set()
    arr = f.as_array()
    for k in k_elements:
        moved = group.mul_outer(np.array([k], dtype=np.int64).reshape(1, -1), arr)
        kf.update(map(tuple, moved))
    sym = len(base.symmetric_difference(kf))
    return Fraction(sym, len(f))


def tempered_constant(seq, n_max: int) -> Fraction:
    """max_{2 <= n <= N} |union_{k<n} F_k^{-1} F_n| / |F_n| (Shulman ratio).

    `seq` is either a list of FolnerSet or a callable n -> FolnerSet (1-based).
    """
    if n_max < 2:
        raise ValueError("need N >= 2")
    get = seq.__getitem__ if hasattr(seq, "__getitem__") else None
    fetch = (lambda n: get(n - 1)) if get else seq
    f1 = fetch(1)
    group = f1.group
    cumulative_inv = f1.inverse().as_array()
    worst = Fraction(0)
    for n in range(2, n_max + 1):
        fn = fetch(n)
        prod = _product_set(group, cumulative_inv, fn.as_array())
        worst = max(worst, Fraction(prod.shape[0], len(fn)))
        cumulative_inv = _unique_rows(np.vstack([cumulative_inv, fn.inverse().as_array()]))
    return worst


class UnitaryAction:
    """Generator-to-unitary assignment inducing alpha_g = Ad(u_g).

    u_g is derived through the canonical word decomposition of g, so the
    defining relations are audited once at build time.
    """

    def __init__(self, group: DiscreteGroup, generator_unitaries: dict, dim: int,
                 tol: Tolerances = DEFAULT_TOL):
        self.group = group
        self.dim = dim
        self.tol = tol
        eye = np.eye(dim, dtype=complex)
        self.gen_u = {}
        for name in group.generators():
            if name not in generator_unitaries:
                raise GroupRelationViolated(f"missing unitary for generator {name}")
            u = as_square(generator_unitaries[name])
            if u.shape[0] != dim:
                raise DimensionMismatch("generator unitary dimension mismatch")
            if not allclose(u @ dagger(u), eye, tol):
                raise GroupRelationViolated(f"generator {name} is not unitary")
            self.gen_u[name] = u
        self._check_relations()
        self._power_cache = {}

    def _check_relations(self):
        tol = self.tol
        g = self.group
        if isinstance(g, ZGroup):
            us = list(self.gen_u.values())
            for i in range(len(us)):
                for j in range(i + 1, len(us)):
                    if not allclose(us[i] @ us[j], us[j] @ us[i], tol):
                        raise GroupRelationViolated("Z^d generators must commute")
        elif isinstance(g, Heisenberg3):
            ux, uy, uz = self.gen_u["x"], self.gen_u["y"], self.gen_u["z"]
            if not allclose(ux @ uy, uy @ ux @ uz, tol):
                raise GroupRelationViolated("relation x y = y x z fails")
            if not allclose(ux @ uz, uz @ ux, tol) or not allclose(uy @ uz, uz @ uy, tol):
                raise GroupRelationViolated("z must be central")
        elif isinstance(g, CyclicGroup):
            u = self.gen_u["u1"]
            power = np.eye(self.dim, dtype=complex)
            for _ in range(g.n):
                power = power @ u
            if not allclose(power, np.eye(self.dim), self.tol):
                raise GroupRelationViolated(f"generator order does not divide {g.n}")
        else:
            raise UnsupportedGroup(f"actions on {g.name} are not supported")

    def _gen_power(self, name: str, k: int) -> np.ndarray:
        key = (name, k)
        if key not in self._power_cache:
            u = self.gen_u[name]
            base = u if k >= 0 else dagger(u)
            power = np.eye(self.dim, dtype=complex)
            for _ in range(abs(k)):
                power = power @ base
            self._power_cache[key] = power
        return self._power_cache[key]

    def unitary(self, g: tuple) -> np.ndarray:
        grp = self.group
        if isinstance(grp, ZGroup):
            names = list(self.gen_u)
            out = np.eye(self.dim, dtype=complex)
            for name, a in zip(names, g):
                out = out @ self._gen_power(name, int(a))
            return out
        if isinstance(grp, Heisenberg3):
            a, b, c = g
            return (self._gen_power("x", int(a)) @ self._gen_power("y", int(b))
                    @ self._gen_power("z", int(c)))
        if isinstance(grp, CyclicGroup):
            return self._gen_power("u1", int(g[0]))
        raise UnsupportedGroup(f"actions on {grp.name} are not supported")

    def apply(self, g: tuple, x) -> np.ndarray:
        u = self.unitary(g)
        return u @ as_square(x) @ dagger(u)


def build_action(group: DiscreteGroup, generator_unitaries: dict, state: State,
                 tol: Tolerances = DEFAULT_TOL) -> UnitaryAction:
    """Validated action with an invariant state ([u_s, rho] = 0 per generator)."""
    action = UnitaryAction(group, generator_unitaries, state.dim, tol)
    for name, u in action.gen_u.items():
        if not allclose(u @ state.rho, state.rho @ u, tol):
            raise NotInvariant(f"state is not invariant under generator {name}")
    return action


def group_average(action: UnitaryAction, f: FolnerSet, x) -> np.ndarray:
    """(1/|F|) sum_{g in F} u_g x u_g*."""
    x = as_square(x)
    if x.shape[0] != action.dim:
        raise DimensionMismatch("operand dimension does not match the action")
    acc = np.zeros_like(x, dtype=complex)
    for g in f.elements:
        acc += action.apply(g, x)
    return acc / len(f)


def average_map(action: UnitaryAction, f: FolnerSet) -> QuantumMap:
    """The mixed-unitary channel x -> group_average(F, x) as a QuantumMap."""
    n = action.dim
    # kron(u, conj(u)) is the row-major vec form of x -> u x u*
    superop = np.zeros((n * n, n * n), dtype=complex)
    for g in f.elements:
        u = action.unitary(g)
        superop += np.kron(u, u.conj())
    return QuantumMap(superop / len(f))


def invariant_expectation(action: UnitaryAction, state: State,
                          tol: Tolerances = DEFAULT_TOL) -> ErgodicDecomposition:
    """Conditional expectation onto the fixed algebra of alpha_g.

    N is the commutant of the generator unitaries; P is the joint fixed
    projection of the GNS unitaries a -> u a u*.
    """
    n = action.dim
    for name, u in action.gen_u.items():
        if not allclose(u @ state.rho, state.rho @ u, tol):
            raise NotInvariant(f"state is not invariant under generator {name}")
    basis = commutant(list(action.gen_u.values()), n, tol)

    eye = np.eye(n * n, dtype=complex)
    rows = [np.kron(u, u.conj()) - eye for u in action.gen_u.values()]
    v = null_space(np.vstack(rows), tol)
    p = v @ dagger(v)

    from .cpmaps import right_mult_superop
    e_superop = right_mult_superop(state.inv_sqrt) @ p @ right_mult_superop(state.sqrt)
    e_map = QuantumMap(e_superop)

    sf = StandardForm(state)
    probe = average_map(action, FolnerSet.from_iterable(
        action.group, [action.group.identity()]
        + list(action.group.generators().values())))
    _verify_decomposition(probe, e_map, p, basis, sf, tol)
    return ErgodicDecomposition(P=p, E=e_map, N=basis, fixed_dim=len(basis))


def theorem32_profile(action: UnitaryAction, seq, state: State, psi: Functional,
                      n_list, tol: Tolerances = DEFAULT_TOL) -> list:
    """predual distance between the F_n-average and E, per n.

    `seq` is a callable n -> FolnerSet or an indexable sequence (1-based).
    The Shulman ratio of the prefix is reported alongside, not enforced.
    """
    decomp = invariant_expectation(action, state, tol)
    get = seq.__getitem__ if hasattr(seq, "__getitem__") else None
    fetch = (lambda n: get(n - 1)) if get else seq
    out = []
    for n in n_list:
        f = fetch(int(n))
        if len(f) > _setsize_cap():
            raise MemoryGuardExceeded(f"|F_{n}| = {len(f)} exceeds VNERG_MAX_SETSIZE")
        out.append((int(n), predual_distance(average_map(action, f), decomp.E, psi)))
    return out
