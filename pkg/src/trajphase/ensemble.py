"""Probability-weighted averages of trajectory phases.

The averaged phase depends on which Kraus representation splits the
evolution into trajectories; :func:`representation_dependence_demo` makes
that concrete by comparing decompositions with identical channel action.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSequence, compose_sequence, transform_representation
from .errors import DimensionMismatch, SingularOperator, UndefinedPhaseMass, ZeroPhaseUndefined
from .operators import DEFAULT_TOL, Tolerances, ket_bra, max_abs
from .phases import pancharatnam_phase, uhlmann_holonomy
from .trajectories import enumerate_trajectories

DEFAULT_MIN_WEIGHT = 1e-9


@dataclass(frozen=True)
class AveragedPhase:
    value: complex
    decomposition_label: str
    retained_weight: float
    excluded_weight: float
    undefined_weight: float = 0.0

    @property
    def visibility(self) -> float:
        return abs(self.value)

    def to_dict(self) -> dict:
        return {
            "decomposition": self.decomposition_label,
            "gamma": [self.value.real, self.value.imag],
            "abs_gamma": self.visibility,
            "retained_weight": self.retained_weight,
            "excluded_weight": self.excluded_weight,
        }


def average_phase(seq: ChannelSequence, psi, min_weight: float = DEFAULT_MIN_WEIGHT, label: str = "original",
                  tol: Tolerances = DEFAULT_TOL) -> AveragedPhase:
    """Sum ``p_alpha * gamma_alpha`` over all trajectories heavier than ``min_weight``.

    Trajectories whose phase is undefined (a vanishing overlap) are left out
    and their weight reported as excluded. Summation follows lexicographic
    index order.

    Raises:
        UndefinedPhaseMass: the weight of undefined-phase trajectories exceeds
            ``min_weight``.
    """
    trajs = enumerate_trajectories(seq, psi, min_weight=0.0, tol=tol)
    terms = []
    light = undefined = 0.0
    retained = []
    for t in trajs:
        if t.weight <= min_weight:
            light += t.weight
            continue
        try:
            g = pancharatnam_phase(t.states, tol)
        except ZeroPhaseUndefined:
            undefined += t.weight
            continue
        terms.append(t.weight * g)
        retained.append(t.weight)
    if undefined > min_weight:
        raise UndefinedPhaseMass(
            f"trajectories with undefined phase carry weight {undefined:.6g} > {min_weight:g}",
            excluded_weight=light + undefined,
        )
    value = complex(math.fsum(z.real for z in terms), math.fsum(z.imag for z in terms))
    return AveragedPhase(value, label, math.fsum(retained), light + undefined, undefined)


def _mixers_for(seq, mixer):
    """Expand one decomposition spec into a per-step list of mixers (or None)."""
    if mixer is None:
        return [None] * seq.n_steps
    if isinstance(mixer, np.ndarray) and mixer.ndim == 2:
        return [mixer] * seq.n_steps
    mixer = list(mixer)
    if len(mixer) != seq.n_steps:
        raise DimensionMismatch(f"{len(mixer)} step mixers given for {seq.n_steps} steps")
    return mixer


def remix(seq: ChannelSequence, mixer, label: str = "") -> ChannelSequence:
    """Apply a Kraus-mixing unitary to every step (one matrix) or step by step (a list)."""
    steps = []
    for ch, u in zip(seq, _mixers_for(seq, mixer)):
        steps.append(ch if u is None else transform_representation(ch, u, label=f"{ch.label}*{label}" if label else None))
    return ChannelSequence(tuple(steps))


@dataclass(frozen=True)
class DecompositionReport:
    phases: tuple
    gaps: np.ndarray = field(repr=False)
    action_deviation: float

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max()) if self.gaps.size else 0.0

    def table(self) -> list:
        return [p.to_dict() for p in self.phases]


def representation_dependence_demo(seq: ChannelSequence, psi, mixers, labels=None,
                                   min_weight: float = DEFAULT_MIN_WEIGHT, n_probe: int = 100,
                                   seed: int = 0, tol: Tolerances = DEFAULT_TOL) -> DecompositionReport:
    """Averaged phase for the original sequence and each re-mixed decomposition.

    Args:
        mixers: one entry per alternative decomposition; each entry is an
            ``M x M`` unitary applied at every step or a list of per-step
            unitaries.
        n_probe: number of random states used to confirm that every
            decomposition has the same channel action.

    Returns:
        A report whose first phase is the original decomposition, with the
        pairwise ``|Gamma_i - Gamma_j|`` matrix and the largest deviation in
        channel output seen over the probe states.
    """
    labels = list(labels) if labels is not None else [f"mixer{i}" for i in range(1, len(mixers) + 1)]
    seqs = [(seq, "original")] + [(remix(seq, m, lab), lab) for m, lab in zip(mixers, labels)]
    rng = np.random.default_rng(seed)
    d = seq.dim
    dev = 0.0
    for _ in range(n_probe):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        ref = compose_sequence(seq, rho)
        for s, _ in seqs[1:]:
            dev = max(dev, max_abs(compose_sequence(s, rho) - ref))
    phases = tuple(average_phase(s, psi, min_weight, lab, tol) for s, lab in seqs)
    vals = np.array([p.value for p in phases])
    gaps = np.abs(vals[:, None] - vals[None, :])
    return DecompositionReport(phases, gaps, dev)


@dataclass(frozen=True)
class HolonomyAverage:
    """Exploratory mixed-state analogue: ``sum_alpha tr(rho_N^alpha) U^alpha``.

    Not a unitary in general and carries no meaning beyond the arithmetic.
    """

    operator: np.ndarray
    singular_values: np.ndarray
    retained_weight: float
    excluded_weight: float


def average_holonomy_report(seq: ChannelSequence, rho, min_weight: float = DEFAULT_MIN_WEIGHT,
                            close_loop: bool = False, epsilon: float | None = None,
                            tol: Tolerances = DEFAULT_TOL) -> HolonomyAverage:
    """Weight each trajectory's Uhlmann holonomy by ``tr(rho_N^alpha)`` and sum.

    Raises:
        SingularOperator: a retained trajectory is rank deficient and no
            ``epsilon`` was given.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = ket_bra(rho)
    trajs = enumerate_trajectories(seq, rho, min_weight=0.0, tol=tol)
    d = seq.dim
    acc = np.zeros((d, d), dtype=complex)
    kept = excluded = 0.0
    for t in trajs:
        if t.weight <= min_weight:
            excluded += t.weight
            continue
        try:
            h = uhlmann_holonomy(t.states, close_loop=close_loop, epsilon=epsilon, tol=tol)
        except SingularOperator as exc:
            raise SingularOperator(f"trajectory {t.index}: {exc}", position=exc.position) from None
        acc += t.weight * h.operator
        kept += t.weight
    return HolonomyAverage(acc, np.linalg.svd(acc, compute_uv=False), kept, excluded)


def demo_scenario():
    """The documented decomposition-dependence example.

    Three qubit dephasing steps (``p = 0.25``) act on
    ``cos(pi/6)|0> + sin(pi/6)|1>``. The alternative decomposition mixes the
    two Kraus operators at every step by the balanced beam-splitter unitary
    ``[[1, i], [i, 1]] / sqrt(2)``.

    Returns:
        ``(sequence, psi, mixer)``.
    """
    from .channels import preset

    seq = ChannelSequence(tuple(preset("dephasing", [0.25], 2) for _ in range(3)))
    psi = np.array([math.cos(math.pi / 6), math.sin(math.pi / 6)], dtype=complex)
    mixer = np.array([[1, 1j], [1j, 1]], dtype=complex) / math.sqrt(2)
    return seq, psi, mixer

