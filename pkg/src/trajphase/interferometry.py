"""Simulated Mach-Zehnder measurement of trajectory phases.

Each step sends the previous conditional state through a reference arm with
a variable U(1) shift ``exp(i chi)`` and the post-selected Kraus branch
through the other arm. The output intensity is

    I(chi) = || path + exp(i chi) reference ||^2
           = |path|^2 + |reference|^2 + 2 Re(exp(i chi) <path|reference>),

which peaks at ``chi* = -arg <path|reference>``, so ``exp(-i chi*)`` is the
Pancharatnam phase of the pair. Arms are ideal and noiseless; the
environment record never entangles with the which-arm degree of freedom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSequence
from .errors import DegenerateFringe, DimensionMismatch, InvalidIndex
from .operators import DEFAULT_TOL, Tolerances, as_vector, inner, phase_of
from .phases import pancharatnam_phase
from .trajectories import evolve_pure

DEFAULT_GRID = 4096
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FringeScan:
    grid: np.ndarray = field(repr=False)
    intensities: np.ndarray = field(repr=False)
    chi_star: float
    argmax: int

    @property
    def spacing(self) -> float:
        return TWO_PI / len(self.grid)

    @property
    def visibility(self) -> float:
        hi, lo = float(self.intensities.max()), float(self.intensities.min())
        return (hi - lo) / (hi + lo)

    @property
    def phase(self) -> complex:
        """Phase factor read off the fringe maximum, ``exp(-i chi*)``."""
        return complex(np.exp(-1j * self.chi_star))

    def to_columns(self) -> np.ndarray:
        """``(grid_size, 2)`` array of ``(chi, I)`` rows."""
        return np.column_stack([self.grid, self.intensities])


def fringe_intensity(reference, path, chi) -> np.ndarray:
    ref = as_vector(reference, "reference")
    pth = as_vector(path, "path")
    chi = np.asarray(chi, dtype=float)
    shifted = np.exp(1j * chi)[..., None] * ref
    return np.sum(np.abs(pth + shifted) ** 2, axis=-1)


def fringe_scan(reference, path, grid_size: int = DEFAULT_GRID, tol: Tolerances = DEFAULT_TOL) -> FringeScan:
    """Scan the U(1) shift over ``chi_j = 2 pi j / grid_size`` and locate the maximum.

    The grid argmax is refined by fitting a parabola through it and its two
    cyclic neighbours.

    Raises:
        DimensionMismatch: arms have different dimensions.
        DegenerateFringe: the arms' overlap vanishes, so the fringe is flat.
    """
    ref = as_vector(reference, "reference")
    pth = as_vector(path, "path")
    if ref.shape != pth.shape:
        raise DimensionMismatch(f"arm dimensions differ: {ref.shape[0]} vs {pth.shape[0]}")
    if grid_size < 8:
        raise ValueError("grid_size must be at least 8")
    overlap = inner(pth, ref)
    if abs(overlap) <= tol.zero_overlap:
        raise DegenerateFringe(f"flat fringe: |<path|reference>| = {abs(overlap):.3e}")
    grid = TWO_PI * np.arange(grid_size) / grid_size
    intens = fringe_intensity(ref, pth, grid)
    j = int(np.argmax(intens))
    y0, y1, y2 = intens[j - 1], intens[j], intens[(j + 1) % grid_size]
    curv = y0 - 2.0 * y1 + y2
    shift = 0.5 * (y0 - y2) / curv if curv < 0 else 0.0
    chi_star = ((j + shift) * TWO_PI / grid_size) % TWO_PI
    return FringeScan(grid, intens, float(chi_star), j)


@dataclass(frozen=True)
class StepRecord:
    step: int
    estimated_phase: complex
    exact_phase: complex
    abs_error: float
    scan: FringeScan | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "estimated_phase": [self.estimated_phase.real, self.estimated_phase.imag],
            "exact_phase": [self.exact_phase.real, self.exact_phase.imag],
            "abs_error": self.abs_error,
        }


def _record(step, reference, path, grid_size, tol):
    try:
        scan = fringe_scan(reference, path, grid_size, tol)
    except DegenerateFringe as exc:
        raise DegenerateFringe(f"step {step}: {exc}", step=step) from None
    est = scan.phase
    exact = phase_of(inner(path, reference), tol)
    err = abs(float(np.angle(est / exact)))
    return StepRecord(step, est, exact, err, scan)


def estimate_step_phase(seq: ChannelSequence, psi, idx, k: int, grid_size: int = DEFAULT_GRID,
                        tol: Tolerances = DEFAULT_TOL) -> StepRecord:
    """Interfere ``psi_{k-1}`` (shifted reference arm) with ``psi_k`` (post-selected arm)."""
    traj = evolve_pure(seq, psi, idx, tol)
    if not 1 <= k <= seq.n_steps:
        raise InvalidIndex(f"step {k} outside [1, {seq.n_steps}]")
    return _record(k, traj.states[k - 1], traj.states[k], grid_size, tol)


@dataclass(frozen=True)
class ProtocolResult:
    """Outcome of the iterated interferometer run for one trajectory.

    ``records`` holds the ``N`` forward steps followed by the closing
    comparison of ``psi`` with ``psi_N`` (step ``N + 1``). ``weight`` is the
    post-selection probability of the trajectory.
    """

    index: tuple
    records: tuple
    product: complex
    exact: complex
    weight: float

    @property
    def error(self) -> float:
        return abs(self.product - self.exact)


def run_protocol(seq: ChannelSequence, psi, idx, grid_size: int = DEFAULT_GRID,
                 tol: Tolerances = DEFAULT_TOL) -> ProtocolResult:
    """Measure every pairwise phase of a trajectory and multiply them.

    Raises:
        DegenerateFringe: some step has a flat fringe; ``step`` says which.
    """
    traj = evolve_pure(seq, psi, idx, tol)
    st = traj.states
    n = seq.n_steps
    records = [_record(k, st[k - 1], st[k], grid_size, tol) for k in range(1, n + 1)]
    # closing comparison: path carries psi, reference carries psi_N
    records.append(_record(n + 1, st[n], st[0], grid_size, tol))
    product = 1.0 + 0j
    for r in records:
        product *= r.estimated_phase
    return ProtocolResult(traj.index, tuple(records), product, pancharatnam_phase(st, tol), traj.weight)
