"""Geometric phases and Uhlmann holonomies of discrete quantum trajectories."""

__version__ = "0.1.0"

from .channels import (
    ChannelSequence,
    DilatedStep,
    KrausChannel,
    apply_channel,
    compose_sequence,
    dilate,
    preset,
    transform_representation,
)
from .ensemble import (
    AveragedPhase,
    average_holonomy_report,
    average_phase,
    representation_dependence_demo,
)
from .interferometry import FringeScan, StepRecord, estimate_step_phase, fringe_scan, run_protocol
from .operators import Tolerances, hermitian_eig, phase_of, psd_inv_sqrt, psd_sqrt, regularize
from .phases import (
    Holonomy,
    pancharatnam_phase,
    pure_limit_phase,
    uhlmann_holonomy,
    uhlmann_step,
    verify_parallelity,
)
from .trajectories import (
    MixedTrajectory,
    PureTrajectory,
    enumerate_trajectories,
    evolve_mixed,
    evolve_pure,
    reconstruct_channel,
    sample_trajectory,
)
