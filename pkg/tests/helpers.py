"""Random fixtures and independent reference computations for the test suite."""
import itertools
import math

import numpy as np
import scipy.linalg

from trajphase.channels import ChannelSequence, KrausChannel

OCTANT = [
    np.array([1, 0], dtype=complex),
    np.array([1, 1], dtype=complex) / math.sqrt(2),
    np.array([1, 1j], dtype=complex) / math.sqrt(2),
]


def random_state(rng, d=2):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(rng, d=2, min_eig=0.0):
    """Random density matrix; eigenvalues are at least ``min_eig``."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return (1 - d * min_eig) * rho + min_eig * np.eye(d)


def random_hermitian(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


def random_unitary(rng, d):
    """Haar-random unitary via QR with phase-corrected diagonal."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_channel(rng, d=2, m=2, label="random"):
    """Random Kraus channel from a Haar-random isometry."""
    iso = random_unitary(rng, m * d)[:, :d]
    return KrausChannel(tuple(iso.reshape(m, d, d)), label=label)


def random_sequence(rng, n, d=2, m=2):
    return ChannelSequence(tuple(random_channel(rng, d, m) for _ in range(n)))


def kraus_product(seq, idx):
    """``E_a(N) ... E_a(1)`` as one matrix."""
    out = np.eye(seq.dim, dtype=complex)
    for ch, a in zip(seq, idx):
        out = ch.kraus_ops[a] @ out
    return out


def direct_gamma(vecs):
    """Cyclic overlap product evaluated term by term; None when it vanishes."""
    z = np.vdot(vecs[0], vecs[-1])
    for k in range(len(vecs) - 1, 0, -1):
        z *= np.vdot(vecs[k], vecs[k - 1])
    return None if abs(z) == 0 else z / abs(z)


def independent_average(seq, psi):
    """Averaged phase by explicit Kraus products over all index tuples."""
    psi = np.asarray(psi, dtype=complex)
    total = 0j
    for idx in itertools.product(*(range(ch.n_ops) for ch in seq)):
        vecs = [psi]
        for ch, a in zip(seq, idx):
            vecs.append(ch.kraus_ops[a] @ vecs[-1])
        g = direct_gamma(vecs)
        if g is None:
            continue
        total += np.vdot(vecs[-1], vecs[-1]).real * g
    return complex(total)


def polar_unitary(a):
    """Unitary polar factor by SciPy's SVD-based polar decomposition."""
    u, _ = scipy.linalg.polar(a)
    return u


def regularized_path(vecs, eps):
    d = len(vecs[0])
    out = []
    for v in vecs:
        v = v / np.linalg.norm(v)
        out.append((1 - eps) * np.outer(v, v.conj()) + eps * np.eye(d) / d)
    return out
