"""Dense complex linear algebra used throughout the package.

Matrices, state vectors and density operators are plain numpy arrays.
The helpers here validate them and provide the Hermitian matrix functions
(square root, inverse square root) that Uhlmann transport is built from.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NotHermitian,
    NotNormalized,
    NotPSD,
    NotUnitary,
    SingularOperator,
    ZeroPhaseUndefined,
)


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds for a run.

    All checks are absolute, entrywise max-norm unless stated otherwise.
    """

    herm: float = 1e-10
    unit: float = 1e-10
    psd: float = 1e-10
    recon: float = 1e-9
    rank: float = 1e-12
    zero_overlap: float = 1e-12
    complete: float = 1e-10
    norm: float = 1e-9


DEFAULT_TOL = Tolerances()


def as_matrix(a, name="matrix") -> np.ndarray:
    """Return ``a`` as a square complex array, rejecting NaN/Inf."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_vector(v, name="state") -> np.ndarray:
    psi = np.asarray(v, dtype=complex)
    if psi.ndim != 1 or psi.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 1-d array, got shape {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise ValueError(f"{name} has non-finite entries")
    return psi


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def max_abs(a) -> float:
    """Entrywise max-norm; 0 for empty input."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a, tol: float = DEFAULT_TOL.herm) -> bool:
    a = np.asarray(a)
    return max_abs(a - dagger(a)) <= tol


def check_hermitian(a, tol: Tolerances = DEFAULT_TOL, name="matrix") -> np.ndarray:
    m = as_matrix(a, name)
    dev = max_abs(m - dagger(m))
    if dev > tol.herm:
        raise NotHermitian(f"{name} is not Hermitian (max |A - A^dag| = {dev:.3e})")
    return m


def is_unitary(u, tol: float = DEFAULT_TOL.unit) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return max_abs(dagger(u) @ u - np.eye(u.shape[0])) <= tol


def check_unitary(u, tol: Tolerances = DEFAULT_TOL, name="operator") -> np.ndarray:
    m = as_matrix(u, name)
    dev = max_abs(dagger(m) @ m - np.eye(m.shape[0]))
    if dev > tol.unit:
        raise NotUnitary(f"{name} is not unitary (max |U^dag U - 1| = {dev:.3e})")
    return m


def check_density(rho, tol: Tolerances = DEFAULT_TOL, normalized=False, name="state") -> np.ndarray:
    """Validate a (possibly unnormalized) density operator and return it as an array.

    Raises:
        NotHermitian, NotPSD: symmetry or positivity fails.
        NotNormalized: ``normalized`` is set and the trace differs from 1.
    """
    m = check_hermitian(rho, tol, name)
    lo = float(np.linalg.eigvalsh(m)[0])
    if lo < -tol.psd:
        raise NotPSD(f"{name} has eigenvalue {lo:.3e} < -{tol.psd:g}")
    if normalized:
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > tol.norm:
            raise NotNormalized(f"{name} has trace {tr!r}, expected 1")
    return m


def check_state_vector(psi, tol: Tolerances = DEFAULT_TOL, normalized=False, name="state") -> np.ndarray:
    v = as_vector(psi, name)
    if normalized:
        n = float(np.linalg.norm(v))
        if abs(n - 1.0) > tol.norm:
            raise NotNormalized(f"{name} has norm {n!r}, expected 1")
    return v


def hermitian_eig(a, tol: Tolerances = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns:
        ``(eigenvalues, eigenvectors)`` with real eigenvalues in ascending order
        and a unitary whose columns are the eigenvectors, so that
        ``a = V @ diag(w) @ V^dag``.

    Raises:
        NotHermitian: if ``a`` fails the symmetry check.
    """
    m = check_hermitian(a, tol)
    # symmetrize so eigh sees exact Hermitian input
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    return w, v


def _clamped_eig(rho, tol: Tolerances):
    w, v = hermitian_eig(rho, tol)
    if w[0] < -tol.psd:
        raise NotPSD(f"eigenvalue {w[0]:.3e} below -{tol.psd:g}")
    return np.clip(w, 0.0, None), v


def psd_sqrt(rho, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues in ``[-tol.psd, 0)`` are treated as rounding noise and set to 0.
    """
    w, v = _clamped_eig(rho, tol)
    return (v * np.sqrt(w)) @ dagger(v)


def psd_inv_sqrt(rho, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Inverse principal square root of a full-rank positive matrix.

    Raises:
        SingularOperator: if an eigenvalue is below ``tol.rank``.
    """
    w, v = _clamped_eig(rho, tol)
    if w[0] < tol.rank:
        raise SingularOperator(f"smallest eigenvalue {w[0]:.3e} below rank tolerance {tol.rank:g}")
    return (v / np.sqrt(w)) @ dagger(v)


def phase_of(z: complex, tol: Tolerances = DEFAULT_TOL) -> complex:
    """Unit-modulus phase ``z/|z|`` of a nonzero complex number."""
    z = complex(z)
    r = abs(z)
    if not r > tol.zero_overlap:
        raise ZeroPhaseUndefined(f"phase of |z| = {r:.3e} is undefined")
    return z / r


def inner(phi, psi) -> complex:
    """``<phi|psi>``, antilinear in the first argument."""
    return complex(np.vdot(phi, psi))


def ket_bra(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def regularize(rho, epsilon: float) -> np.ndarray:
    """Mix a trace-normalized copy of ``rho`` with the maximally mixed state.

    Returns ``(1 - epsilon) * rho / tr(rho) + epsilon * 1/d``.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    m = np.asarray(rho, dtype=complex)
    d = m.shape[0]
    return (1.0 - epsilon) * m / np.trace(m).real + epsilon * np.eye(d) / d
