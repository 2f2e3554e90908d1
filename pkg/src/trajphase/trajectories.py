"""Quantum trajectories of a channel sequence.

A trajectory is one choice of Kraus outcome per step. Its states are kept
unnormalized, exactly as the conditional products ``E_a(k) ... E_a(1)``
produce them, so the squared norm (pure) or trace (mixed) of the final state
is the trajectory's probability.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .channels import ChannelSequence
from .errors import CombinatorialOverflow, DeadEnd, DimensionMismatch, IncompleteSet, InvalidIndex
from .operators import DEFAULT_TOL, Tolerances, check_density, check_state_vector, dagger

ENUMERATION_CAP = 2**20


@dataclass(frozen=True)
class PureTrajectory:
    index: tuple
    states: tuple = field(repr=False)
    weight: float
    elided: bool = False

    @property
    def norms(self) -> list:
        """Norms of ``psi_0 ... psi_N`` (empty when states were elided)."""
        return [float(np.linalg.norm(s)) for s in self.states]

    def normalized(self, k: int) -> np.ndarray:
        s = self.states[k]
        return s / np.linalg.norm(s)


@dataclass(frozen=True)
class MixedTrajectory:
    index: tuple
    states: tuple = field(repr=False)
    weight: float
    elided: bool = False

    @property
    def norms(self) -> list:
        """Traces of ``rho_0 ... rho_N`` (empty when states were elided)."""
        return [float(np.trace(s).real) for s in self.states]


def validate_index(seq: ChannelSequence, idx) -> tuple:
    idx = tuple(int(a) for a in idx)
    if len(idx) != seq.n_steps:
        raise InvalidIndex(f"index has length {len(idx)}, sequence has {seq.n_steps} steps")
    for k, (a, m) in enumerate(zip(idx, seq.counts)):
        if not 0 <= a < m:
            raise InvalidIndex(f"index entry {a} at step {k + 1} outside [0, {m - 1}]")
    return idx


def _check_dim(seq, n):
    if n != seq.dim:
        raise DimensionMismatch(f"state has dimension {n}, sequence acts on {seq.dim}")


def evolve_pure(seq: ChannelSequence, psi, idx, tol: Tolerances = DEFAULT_TOL) -> PureTrajectory:
    """Lift trajectory ``idx`` to the vectors ``psi, E_a(1) psi, ...``."""
    psi = check_state_vector(psi, tol, normalized=True)
    _check_dim(seq, psi.shape[0])
    idx = validate_index(seq, idx)
    states = [psi]
    for ch, a in zip(seq, idx):
        states.append(ch.kraus_ops[a] @ states[-1])
    last = states[-1]
    return PureTrajectory(idx, tuple(states), float(np.vdot(last, last).real))


def evolve_mixed(seq: ChannelSequence, rho, idx, tol: Tolerances = DEFAULT_TOL) -> MixedTrajectory:
    """Conditional density operators ``rho_k = E_a(k) rho_{k-1} E_a(k)^dag``."""
    rho = check_density(rho, tol, normalized=True)
    _check_dim(seq, rho.shape[0])
    idx = validate_index(seq, idx)
    states = [rho]
    for ch, a in zip(seq, idx):
        e = ch.kraus_ops[a]
        states.append(e @ states[-1] @ dagger(e))
    return MixedTrajectory(idx, tuple(states), float(np.trace(states[-1]).real))


@dataclass(frozen=True)
class TrajectorySet:
    """Every trajectory of a sequence, in lexicographic index order.

    Trajectories lighter than ``min_weight`` keep their index and weight but
    have ``elided=True`` and no states.
    """

    trajectories: tuple
    min_weight: float
    kind: str

    @property
    def total_weight(self) -> float:
        return math.fsum(t.weight for t in self.trajectories)

    @property
    def retained(self) -> list:
        return [t for t in self.trajectories if not t.elided]

    @property
    def elided_weight(self) -> float:
        return math.fsum(t.weight for t in self.trajectories if t.elided)

    def __len__(self):
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    def __getitem__(self, i):
        return self.trajectories[i]


def all_indices(seq: ChannelSequence, cap: int = ENUMERATION_CAP):
    total = math.prod(seq.counts)
    if total > cap:
        raise CombinatorialOverflow(f"{total} trajectories exceed the enumeration cap {cap}")
    return itertools.product(*(range(m) for m in seq.counts))


def enumerate_trajectories(seq: ChannelSequence, state, min_weight: float = 0.0,
                           tol: Tolerances = DEFAULT_TOL, cap: int = ENUMERATION_CAP) -> TrajectorySet:
    """Enumerate all trajectories for a pure (1-d) or mixed (2-d) initial state.

    Raises:
        CombinatorialOverflow: the number of index tuples exceeds ``cap``.
    """
    if min_weight < 0:
        raise ValueError("min_weight must be non-negative")
    indices = list(all_indices(seq, cap))
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        psi = check_state_vector(state, tol, normalized=True)
        _check_dim(seq, psi.shape[0])
        evolve, kind = evolve_pure, "pure"
    else:
        psi = check_density(state, tol, normalized=True)
        _check_dim(seq, psi.shape[0])
        evolve, kind = evolve_mixed, "mixed"

    def one(idx):
        t = evolve(seq, psi, idx, tol)
        if t.weight < min_weight:
            return type(t)(t.index, (), t.weight, elided=True)
        return t

    return TrajectorySet(tuple(ordered_map(one, indices)), float(min_weight), kind)


def _draw(stacks, psi, rng, tol):
    states = [psi]
    idx = []
    weight = 1.0
    cur = psi
    for k, ops in enumerate(stacks, start=1):
        branches = ops @ cur
        raw = np.einsum("pi,pi->p", branches.conj(), branches).real.tolist()
        # completeness: the branch norms add up to the current squared norm
        norm2 = math.fsum(raw)
        if norm2 <= tol.zero_overlap:
            raise DeadEnd(f"trajectory weight vanished before step {k}", step=k)
        target = rng.random() * norm2
        acc = 0.0
        p = len(raw) - 1
        for j, q in enumerate(raw):
            acc += q
            if acc > target:
                p = j
                break
        idx.append(p)
        weight *= raw[p] / norm2
        cur = branches[p]
        states.append(cur)
    return PureTrajectory(tuple(idx), tuple(states), weight)


def sample_trajectory(seq: ChannelSequence, psi, seed: int, tol: Tolerances = DEFAULT_TOL) -> PureTrajectory:
    """Draw one trajectory as a sequential environment-measurement record.

    Randomness comes from numpy's PCG64 generator (``default_rng(seed)``).
    Each step consumes exactly one uniform draw ``u`` and picks the first
    outcome whose cumulative conditional probability, accumulated in Kraus
    order, exceeds ``u``. The returned weight is the product of the chosen
    conditional probabilities.

    Raises:
        DeadEnd: the conditional state has (numerically) vanished.
    """
    out = sample_many(seq, psi, [seed], tol)[0]
    if isinstance(out, DeadEnd):
        raise out
    return out


def sample_many(seq: ChannelSequence, psi, seeds, tol: Tolerances = DEFAULT_TOL) -> list:
    """``[sample_trajectory(seq, psi, s) for s in seeds]`` with validation done once.

    A seed whose trajectory dies yields the :class:`DeadEnd` exception object
    in its slot instead of a trajectory.
    """
    psi = check_state_vector(psi, tol, normalized=True)
    _check_dim(seq, psi.shape[0])
    stacks = [ch.stacked for ch in seq]

    def one(seed):
        try:
            return _draw(stacks, psi, np.random.default_rng(seed), tol)
        except DeadEnd as exc:
            return exc

    return ordered_map(one, seeds)


def reconstruct_channel(trajs, seq: ChannelSequence | None = None) -> np.ndarray:
    """Sum the final states of a complete set of mixed trajectories.

    When ``seq`` is given, coverage is checked against its Kraus counts;
    otherwise the counts are inferred from the largest index seen per step.

    Raises:
        IncompleteSet: an index tuple is missing, duplicated or elided.
    """
    trajs = list(trajs)
    if not trajs:
        raise IncompleteSet("no trajectories given")
    n = len(trajs[0].index)
    seen = set()
    for t in trajs:
        if t.elided:
            raise IncompleteSet(f"trajectory {t.index} has elided states")
        if len(t.index) != n or t.index in seen:
            raise IncompleteSet(f"inconsistent or duplicate index {t.index}")
        seen.add(t.index)
    if seq is not None:
        counts = list(seq.counts)
        if n != len(counts) or any(not 0 <= a < m for t in trajs for a, m in zip(t.index, counts)):
            raise IncompleteSet("trajectory indices do not match the sequence")
    else:
        counts = [max(t.index[k] for t in trajs) + 1 for k in range(n)]
    if len(seen) != math.prod(counts):
        raise IncompleteSet(f"{len(seen)} trajectories cover only part of the {math.prod(counts)} index tuples")
    out = np.zeros_like(trajs[0].states[-1])
    for t in trajs:
        out = out + t.states[-1]
    return out


def trajectory_record(t) -> dict:
    """Serializable summary: index tuple, per-step norms (or traces), weight."""
    return {"index": list(t.index), "norms": t.norms, "weight": t.weight, "elided": t.elided}
