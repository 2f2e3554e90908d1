"""Scenario documents: JSON description of an initial state and a channel sequence.

Example::

    {
      "dim": 2,
      "initial": "plus",
      "steps": [
        {"preset": "dephasing", "params": [0.25], "repeat": 3},
        {"kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}
      ],
      "options": {"grid_size": 4096, "seed": 7, "min_weight": 1e-9}
    }

Complex numbers are ``[re, im]`` pairs. ``initial`` is a preset name, or an
object ``{"vector": [...]}``, ``{"density": [[...]]}`` or, for qubits,
``{"bloch": [theta, phi]}``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channels import ChannelSequence, channel_from_spec, matrix_from_json, vector_from_json
from .errors import ScenarioError, TrajPhaseError
from .interferometry import DEFAULT_GRID
from .operators import DEFAULT_TOL, Tolerances, check_density, check_state_vector

STATE_PRESETS = ("zero", "one", "plus", "minus", "plus_i", "minus_i", "maximally_mixed")

OPTION_KEYS = {"grid_size", "seed", "min_weight", "epsilon", "close_loop", "tolerances"}


@dataclass(frozen=True)
class Options:
    grid_size: int = DEFAULT_GRID
    seed: int = 0
    min_weight: float = 1e-9
    epsilon: float | None = None
    close_loop: bool = False
    tol: Tolerances = DEFAULT_TOL


@dataclass(frozen=True)
class Scenario:
    dim: int
    initial: np.ndarray = field(repr=False)
    sequence: ChannelSequence = field(repr=False)
    options: Options
    digest: str

    @property
    def is_pure(self) -> bool:
        return self.initial.ndim == 1


def _named_state(name, dim):
    if name == "maximally_mixed":
        return np.eye(dim, dtype=complex) / dim
    if name == "zero":
        v = np.zeros(dim, dtype=complex)
        v[0] = 1
        return v
    if name == "plus":
        return np.ones(dim, dtype=complex) / math.sqrt(dim)
    if dim != 2:
        raise ScenarioError(f"initial state {name!r} is defined for dim 2 only")
    table = {
        "one": [0, 1],
        "minus": [1, -1],
        "plus_i": [1, 1j],
        "minus_i": [1, -1j],
    }
    if name not in table:
        raise ScenarioError(f"unknown initial state {name!r}; expected one of {', '.join(STATE_PRESETS)}")
    v = np.array(table[name], dtype=complex)
    return v / np.linalg.norm(v)


def _initial(spec, dim, tol):
    if isinstance(spec, str):
        state = _named_state(spec, dim)
    elif isinstance(spec, dict) and "vector" in spec:
        state = vector_from_json(spec["vector"])
    elif isinstance(spec, dict) and "density" in spec:
        state = matrix_from_json(spec["density"])
    elif isinstance(spec, dict) and "bloch" in spec:
        if dim != 2:
            raise ScenarioError("bloch initial state needs dim 2")
        theta, phi = (float(x) for x in spec["bloch"])
        state = np.array([math.cos(theta / 2), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)])
    else:
        raise ScenarioError("initial must be a preset name or an object with 'vector', 'density' or 'bloch'")
    if state.shape[0] != dim:
        raise ScenarioError(f"initial state has dimension {state.shape[0]}, scenario dim is {dim}")
    if state.ndim == 1:
        return check_state_vector(state, tol, normalized=True, name="initial state")
    return check_density(state, tol, normalized=True, name="initial state")


def _tolerances(raw):
    if raw is None:
        return DEFAULT_TOL
    if not isinstance(raw, dict) or not set(raw) <= set(Tolerances.__dataclass_fields__):
        raise ScenarioError(f"tolerances must be an object with keys from {sorted(Tolerances.__dataclass_fields__)}")
    return replace(DEFAULT_TOL, **{k: float(v) for k, v in raw.items()})


def _options(raw):
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ScenarioError("options must be an object")
    unknown = set(raw) - OPTION_KEYS
    if unknown:
        raise ScenarioError(f"unknown options: {', '.join(sorted(unknown))}")
    opts = Options(tol=_tolerances(raw.get("tolerances")))
    kw = {}
    if "grid_size" in raw:
        kw["grid_size"] = int(raw["grid_size"])
    if "seed" in raw:
        kw["seed"] = int(raw["seed"])
    if "min_weight" in raw:
        kw["min_weight"] = float(raw["min_weight"])
    if raw.get("epsilon") is not None:
        kw["epsilon"] = float(raw["epsilon"])
    if "close_loop" in raw:
        kw["close_loop"] = bool(raw["close_loop"])
    return replace(opts, **kw)


def parse_scenario(doc: dict, digest: str = "") -> Scenario:
    """Validate a scenario document completely and build the objects it describes.

    Raises:
        ScenarioError: on any structural or numerical validation failure.
    """
    try:
        if not isinstance(doc, dict):
            raise ScenarioError("scenario must be a JSON object")
        dim = doc.get("dim")
        if not isinstance(dim, int) or dim < 1:
            raise ScenarioError("'dim' must be a positive integer")
        options = _options(doc.get("options"))
        tol = options.tol
        initial = _initial(doc.get("initial", "zero"), dim, tol)
        steps_spec = doc.get("steps")
        if not isinstance(steps_spec, list) or not steps_spec:
            raise ScenarioError("'steps' must be a non-empty list")
        steps = []
        for i, spec in enumerate(steps_spec):
            if not isinstance(spec, dict):
                raise ScenarioError(f"step {i} must be an object")
            repeat = int(spec.get("repeat", 1))
            if repeat < 1:
                raise ScenarioError(f"step {i}: repeat must be >= 1")
            body = {k: v for k, v in spec.items() if k != "repeat"}
            try:
                ch = channel_from_spec(body, dim, tol)
            except TrajPhaseError as exc:
                raise ScenarioError(f"step {i}: {type(exc).__name__}: {exc}") from None
            steps.extend([ch] * repeat)
        return Scenario(dim, initial, ChannelSequence(tuple(steps)), options, digest)
    except ScenarioError:
        raise
    except (TrajPhaseError, ValueError, TypeError, KeyError) as exc:
        raise ScenarioError(f"{type(exc).__name__}: {exc}") from None


def load_scenario(path) -> Scenario:
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from None
    return parse_scenario(doc, hashlib.sha256(raw).hexdigest()[:16])
