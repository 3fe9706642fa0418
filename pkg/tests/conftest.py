"""Shared helpers: random unitaries, faithful states and channel batteries."""

import numpy as np
import pytest

from vnerg.cpmaps import QuantumMap
from vnerg.standard_form import State


def random_unitary(rng, n):
    """Haar-ish unitary from the QR decomposition of a Ginibre matrix."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_faithful_state(rng, n, floor=1e-2):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = a @ a.conj().T + floor * np.eye(n)
    return State(rho / np.trace(rho).real)


def random_mixed_unitary(rng, n, k=3):
    us = [random_unitary(rng, n) for _ in range(k)]
    w = rng.random(k) + 0.1
    return QuantumMap.mixed_unitary(us, w / w.sum())


def perron_state(qmap, min_eig=1e-6):
    """Faithful invariant state from the predual fixed space, or None."""
    vals, vecs = np.linalg.eig(qmap.predual_superop)
    idx = int(np.argmin(np.abs(vals - 1.0)))
    if abs(vals[idx] - 1.0) > 1e-9:
        return None
    n = int(round(np.sqrt(qmap.superop.shape[0])))
    m = vecs[:, idx].reshape(n, n)
    m = 0.5 * (m + m.conj().T)
    tr = np.trace(m).real
    if abs(tr) < 1e-12:
        return None
    m = m / tr
    if np.linalg.eigvalsh(m).min() <= min_eig:
        return None
    return State(m)


def invariant_channel_battery(seed, count, dims=(2, 3, 4)):
    """Mixed-unitary channels paired with computed faithful invariant states."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = dims[len(out) % len(dims)]
        qmap = random_mixed_unitary(rng, n)
        state = perron_state(qmap)
        if state is not None:
            out.append((qmap, state))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(0)
