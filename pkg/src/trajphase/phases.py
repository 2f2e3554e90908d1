"""Geometric phases of individual trajectories.

Pure trajectories get the Pancharatnam phase factor of the closed chain of
overlaps. Mixed trajectories get an Uhlmann holonomy: amplitudes
``W_k = sqrt(rho_k) V_k`` are transported so that each ``W_{k+1}^dag W_k`` is
positive definite, and the accumulated unitary ``V_N V^dag`` is returned.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParallelityViolation, SingularOperator, ZeroPhaseUndefined
from .operators import (
    DEFAULT_TOL,
    Tolerances,
    as_vector,
    check_density,
    check_unitary,
    dagger,
    hermitian_eig,
    inner,
    max_abs,
    phase_of,
    psd_sqrt,
    regularize,
)


def pancharatnam_phase(states, tol: Tolerances = DEFAULT_TOL) -> complex:
    """Phase factor of ``<psi_0|psi_N><psi_N|psi_{N-1}> ... <psi_1|psi_0>``.

    ``states`` is ``psi_0, ..., psi_N`` (unnormalized vectors are fine). The
    result does not change if any state is multiplied by a nonzero complex
    number.

    Raises:
        ZeroPhaseUndefined: some overlap in the chain vanishes. ``position`` is
            ``k`` for the overlap ``<psi_k|psi_{k-1}>`` and ``0`` for the
            closing overlap ``<psi_0|psi_N>``.
    """
    vecs = [as_vector(s) for s in states]
    if len(vecs) < 2:
        raise ValueError("need at least two states")
    factor = 1.0 + 0j
    n = len(vecs) - 1
    # (bra index, ket index) in chain order, closing overlap last
    pairs = [(k, k - 1) for k in range(1, n + 1)] + [(0, n)]
    for bra, ket in pairs:
        z = inner(vecs[bra], vecs[ket])
        try:
            factor *= phase_of(z, tol)
        except ZeroPhaseUndefined:
            raise ZeroPhaseUndefined(
                f"overlap <psi_{bra}|psi_{ket}> vanishes (|z| = {abs(z):.3e})", position=bra
            ) from None
    # renormalize away rounding drift of the running product
    return factor / abs(factor)


def _normalized(rho, tol):
    m = check_density(rho, tol)
    tr = float(np.trace(m).real)
    if tr <= tol.rank:
        raise SingularOperator(f"state has trace {tr:.3e}")
    return m / tr


def _full_rank_root(rho, tol, position=None):
    w, v = hermitian_eig(rho, tol)
    if w[0] < tol.rank:
        raise SingularOperator(
            f"state {position} is rank deficient (min eigenvalue {w[0]:.3e})", position=position
        )
    return (v * np.sqrt(w)) @ dagger(v)


def uhlmann_step(rho_from, rho_to, tol: Tolerances = DEFAULT_TOL, _positions=(None, None)) -> np.ndarray:
    """Parallel-transport unitary between two full-rank states.

    Returns ``X = (sqrt(b) a sqrt(b))^{-1/2} sqrt(b) sqrt(a)`` for the
    trace-normalized ``a = rho_from`` and ``b = rho_to``, which is the unitary
    polar factor of ``sqrt(b) sqrt(a)``. If ``V`` is the phase of an amplitude
    of ``a``, then ``X V`` is the phase of the amplitude of ``b`` parallel to it.

    The polar factor is taken from an SVD of ``sqrt(b) sqrt(a)``; forming
    ``sqrt(b) a sqrt(b)`` explicitly squares its condition number and loses
    unitarity for nearly singular states.

    Raises:
        SingularOperator: either state is rank deficient.
    """
    a = _normalized(rho_from, tol)
    b = _normalized(rho_to, tol)
    sa = _full_rank_root(a, tol, _positions[0])
    sb = _full_rank_root(b, tol, _positions[1])
    u, _, vh = np.linalg.svd(sb @ sa)
    return u @ vh


@dataclass(frozen=True)
class Holonomy:
    """Result of Uhlmann transport along a sequence of states.

    Attributes:
        operator: the holonomy ``V_N V^dag``.
        states: the trace-normalized (and possibly regularized) states that
            were transported along, including the appended initial state
            when the loop was closed.
        transports: the step unitaries ``X_1 ... X_N``.
        phases: ``V_0 = 1, V_1, ..., V_N`` for the identity initial phase.
    """

    operator: np.ndarray
    states: tuple = field(repr=False)
    transports: tuple = field(repr=False)
    phases: tuple = field(repr=False)
    closed: bool = False
    epsilon: float | None = None

    @property
    def eigenphases(self) -> np.ndarray:
        """Sorted eigenvalue angles of the holonomy, in ``(-pi, pi]``."""
        return np.sort(np.angle(np.linalg.eigvals(self.operator)))


def uhlmann_holonomy(states, close_loop: bool = False, epsilon: float | None = None,
                     tol: Tolerances = DEFAULT_TOL) -> Holonomy:
    """Holonomy ``X_N ... X_2 X_1`` of a discrete sequence of density operators.

    Args:
        states: ``rho_0, ..., rho_N``; unnormalized states are rescaled to unit
            trace first.
        close_loop: append ``rho_0`` so that transport returns to the start.
        epsilon: if given, replace every state with
            ``(1 - epsilon) rho / tr(rho) + epsilon / d`` before transport.
            Rank-deficient states are otherwise an error.

    Raises:
        SingularOperator: a state is rank deficient; ``position`` is its index.
    """
    states = list(states)
    if len(states) < 2:
        raise ValueError("need at least two states")
    normed = []
    for k, s in enumerate(states):
        m = _normalized(s, tol)
        if epsilon is not None:
            m = regularize(m, epsilon)
        normed.append(m)
    if close_loop:
        normed.append(normed[0])
    d = normed[0].shape[0]
    xs = []
    vs = [np.eye(d, dtype=complex)]
    n_orig = len(states)
    for k in range(1, len(normed)):
        pos = (k - 1, k % n_orig if close_loop else k)
        x = uhlmann_step(normed[k - 1], normed[k], tol, _positions=pos)
        xs.append(x)
        vs.append(x @ vs[-1])
    return Holonomy(vs[-1], tuple(normed), tuple(xs), tuple(vs), bool(close_loop), epsilon)


def parallel_amplitude(amplitude, rho_next, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Amplitude of ``rho_next`` parallel to ``amplitude``.

    Picks ``W' = sqrt(rho_next) V'`` with ``W'^dag W > 0`` by taking ``V'`` as
    the unitary polar factor of ``sqrt(rho_next) W`` (computed by SVD).
    ``rho_next`` is used as given, without normalization.
    """
    root = psd_sqrt(check_density(rho_next, tol), tol)
    u, _, vh = np.linalg.svd(root @ np.asarray(amplitude, dtype=complex))
    return root @ (u @ vh)


@dataclass(frozen=True)
class ParallelityReport:
    margins: tuple
    hermiticity_errors: tuple

    @property
    def min_margin(self) -> float:
        return min(self.margins)


def verify_parallelity(holonomy: Holonomy, initial_phase=None, tol: Tolerances = DEFAULT_TOL) -> ParallelityReport:
    """Check ``W_{k+1}^dag W_k > 0`` along the chain retained in ``holonomy``.

    Each margin is the smallest eigenvalue of ``W_{k+1}^dag W_k``; ``k``
    counts from 1 for the first step.

    Raises:
        ParallelityViolation: a product is not Hermitian or not strictly positive.
    """
    d = holonomy.operator.shape[0]
    v0 = np.eye(d) if initial_phase is None else check_unitary(initial_phase, tol, "initial phase")
    amps = [psd_sqrt(rho, tol) @ v @ v0 for rho, v in zip(holonomy.states, holonomy.phases)]
    margins, herm = [], []
    for k in range(1, len(amps)):
        prod = dagger(amps[k]) @ amps[k - 1]
        dev = max_abs(prod - dagger(prod))
        if dev > tol.herm:
            raise ParallelityViolation(f"step {k}: W^dag W not Hermitian ({dev:.3e})", step=k, margin=None)
        lo = float(np.linalg.eigvalsh(0.5 * (prod + dagger(prod)))[0])
        if not lo > 0:
            raise ParallelityViolation(f"step {k}: min eigenvalue {lo:.3e} is not positive", step=k, margin=lo)
        margins.append(lo)
        herm.append(dev)
    return ParallelityReport(tuple(margins), tuple(herm))


def pure_limit_phase(holonomy, psi, tol: Tolerances = DEFAULT_TOL) -> complex:
    """Phase factor ``<psi|U|psi> / |<psi|U|psi>|`` assigned by a holonomy to ``psi``."""
    u = holonomy.operator if isinstance(holonomy, Holonomy) else np.asarray(holonomy, dtype=complex)
    psi = as_vector(psi)
    z = inner(psi, u @ psi)
    return phase_of(z, tol)
