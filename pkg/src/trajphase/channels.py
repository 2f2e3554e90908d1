"""Kraus channels: application, sequencing, representation freedom and dilation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    CompletenessViolation,
    DimensionMismatch,
    InvalidParameter,
    UnknownPreset,
)
from .operators import DEFAULT_TOL, Tolerances, as_matrix, check_unitary, dagger, max_abs

PRESETS = (
    "identity",
    "unitary_rotation",
    "dephasing",
    "complete_dephasing",
    "depolarizing",
    "amplitude_damping",
)


def completeness_error(ops) -> float:
    """Max-norm deviation of ``sum_p E_p^dag E_p`` from the identity."""
    d = ops[0].shape[0]
    total = sum(dagger(e) @ e for e in ops)
    return max_abs(total - np.eye(d))


@dataclass(frozen=True)
class KrausChannel:
    """A trace-preserving channel given by an ordered list of Kraus operators.

    The position of each operator is the outcome label of a trajectory step,
    so the order is part of the channel's identity.
    """

    kraus_ops: tuple
    label: str = ""
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        if len(self.kraus_ops) < 1:
            raise DimensionMismatch("a channel needs at least one Kraus operator")
        ops = tuple(as_matrix(e, f"kraus[{i}]") for i, e in enumerate(self.kraus_ops))
        d = ops[0].shape[0]
        for i, e in enumerate(ops):
            if e.shape != (d, d):
                raise DimensionMismatch(f"kraus[{i}] has shape {e.shape}, expected {(d, d)}")
            e.setflags(write=False)
        err = completeness_error(ops)
        if err > self.tol.complete:
            raise CompletenessViolation(
                f"channel {self.label!r}: |sum E^dag E - 1|_max = {err:.3e} exceeds {self.tol.complete:g}"
            )
        object.__setattr__(self, "kraus_ops", ops)
        stacked = np.stack(ops)
        stacked.setflags(write=False)
        object.__setattr__(self, "_stacked", stacked)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    @property
    def n_ops(self) -> int:
        return len(self.kraus_ops)

    @property
    def stacked(self) -> np.ndarray:
        """Kraus operators as one ``(M, d, d)`` array."""
        return self._stacked

    def __len__(self):
        return len(self.kraus_ops)

    def __getitem__(self, p):
        return self.kraus_ops[p]


@dataclass(frozen=True)
class ChannelSequence:
    """Channels applied one after another; ``steps[0]`` acts first."""

    steps: tuple

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise DimensionMismatch("a channel sequence needs at least one step")
        d = steps[0].dim
        for k, ch in enumerate(steps):
            if ch.dim != d:
                raise DimensionMismatch(f"step {k} acts on dimension {ch.dim}, expected {d}")
        object.__setattr__(self, "steps", steps)

    @property
    def dim(self) -> int:
        return self.steps[0].dim

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def counts(self) -> tuple:
        """Number of Kraus operators at each step."""
        return tuple(ch.n_ops for ch in self.steps)

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, k):
        return self.steps[k]


def _check_dim(ch, m):
    if m.shape[0] != ch.dim:
        raise DimensionMismatch(f"state has dimension {m.shape[0]}, channel acts on {ch.dim}")


def apply_channel(ch: KrausChannel, rho) -> np.ndarray:
    """Return ``sum_p E_p rho E_p^dag``."""
    m = as_matrix(rho, "rho")
    _check_dim(ch, m)
    e = ch.stacked
    return np.einsum("pij,jk,plk->il", e, m, e.conj())


def compose_sequence(seq: ChannelSequence, rho) -> np.ndarray:
    """Apply every step of ``seq`` in order, starting from ``steps[0]``."""
    out = as_matrix(rho, "rho")
    for ch in seq:
        out = apply_channel(ch, out)
    return out


def transform_representation(ch: KrausChannel, u, label=None) -> KrausChannel:
    """Mix Kraus operators by a unitary: ``F_q = sum_p u[q, p] E_p``.

    The returned channel has the same action on every state but defines a
    different set of trajectories.
    """
    u = check_unitary(u, ch.tol, "mixer")
    if u.shape[0] != ch.n_ops:
        raise DimensionMismatch(f"mixer is {u.shape[0]}x{u.shape[0]} but channel has {ch.n_ops} Kraus operators")
    mixed = np.einsum("qp,pij->qij", u, ch.stacked)
    return KrausChannel(tuple(mixed), label=label if label is not None else f"{ch.label}*mixed", tol=ch.tol)


@dataclass(frozen=True)
class DilatedStep:
    """Unitary on environment (x) system whose ``|e_0>`` column block stacks the Kraus operators.

    Basis ordering is environment-major: joint index ``p * d + i`` is
    ``|e_p> (x) |i>``. Only the blocks ``<e_p|U|e_0>`` are fixed by the
    channel; the remaining columns are one particular orthonormal completion.
    """

    env_dim: int
    sys_dim: int
    joint_unitary: np.ndarray
    prepared_env_index: int = 0

    def block(self, p: int, q: int = 0) -> np.ndarray:
        """``<e_p| U |e_q>`` as a ``d x d`` system operator."""
        d = self.sys_dim
        return self.joint_unitary[p * d:(p + 1) * d, q * d:(q + 1) * d]

    def kraus_blocks(self) -> list:
        return [self.block(p, self.prepared_env_index) for p in range(self.env_dim)]

    def evolve(self, psi) -> np.ndarray:
        """Joint state ``U (|e_0> (x) psi)`` reshaped to ``(env_dim, d)``."""
        psi = np.asarray(psi, dtype=complex)
        joint = np.zeros(self.env_dim * self.sys_dim, dtype=complex)
        q = self.prepared_env_index
        joint[q * self.sys_dim:(q + 1) * self.sys_dim] = psi
        return (self.joint_unitary @ joint).reshape(self.env_dim, self.sys_dim)

    def register(self, psi, outcome: int) -> np.ndarray:
        """Unnormalized system state left after the environment reads ``outcome``."""
        return self.evolve(psi)[outcome]


def dilate(ch: KrausChannel) -> DilatedStep:
    """Build a joint unitary realizing ``E_p = <e_p|U|e_0>``.

    Raises:
        CompletenessViolation: if the Kraus operators do not form an isometry.
    """
    err = completeness_error(ch.kraus_ops)
    if err > ch.tol.complete:
        raise CompletenessViolation(f"cannot dilate: completeness error {err:.3e}")
    m, d = ch.n_ops, ch.dim
    iso = ch.stacked.reshape(m * d, d)
    # orthonormal completion of the isometry's column space
    comp = scipy.linalg.null_space(dagger(iso)) if m > 1 else np.zeros((d, 0), dtype=complex)
    u = np.hstack([iso, comp]).astype(complex)
    u.setflags(write=False)
    return DilatedStep(env_dim=m, sys_dim=d, joint_unitary=u)


# ---------------------------------------------------------------------------
# presets


def _prob(params, i, name):
    try:
        p = float(params[i])
    except (IndexError, TypeError, ValueError):
        raise InvalidParameter(f"{name} needs a probability parameter") from None
    if not 0.0 <= p <= 1.0:
        raise InvalidParameter(f"{name}: probability {p} outside [0, 1]")
    return p


def _clock_shift(d):
    omega = np.exp(2j * np.pi / d)
    z = np.diag(omega ** np.arange(d))
    x = np.roll(np.eye(d), 1, axis=0)
    return x, z


def _rotation(params, d):
    if d != 2:
        raise InvalidParameter("unitary_rotation is defined for dim 2 only")
    if len(params) not in (1, 4):
        raise InvalidParameter("unitary_rotation takes [theta] or [theta, nx, ny, nz]")
    theta = float(params[0])
    n = np.array([0.0, 0.0, 1.0]) if len(params) == 1 else np.asarray(params[1:], dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise InvalidParameter("rotation axis must be nonzero")
    n = n / norm
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0 + 0j, -1.0])
    gen = n[0] * sx + n[1] * sy + n[2] * sz
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * gen


def preset(name: str, params: Sequence[float] = (), dim: int = 2, tol: Tolerances = DEFAULT_TOL) -> KrausChannel:
    """Construct a named channel.

    Canonical Kraus order per preset:

    * ``identity``: ``[1]``.
    * ``unitary_rotation`` (qubit), params ``[theta]`` or ``[theta, nx, ny, nz]``:
      ``[exp(-i theta n.sigma / 2)]``; axis defaults to z.
    * ``dephasing``, params ``[p]``: ``[sqrt(1-p) 1, sqrt(p) Z]`` with ``Z`` the
      clock matrix ``diag(w^k)`` (``diag(1, -1)`` for a qubit).
    * ``complete_dephasing``: projectors ``|0><0|, ..., |d-1><d-1|``.
    * ``depolarizing``, params ``[p]``: ``sqrt(1 - p + p/d^2) 1`` followed by
      ``sqrt(p)/d X^a Z^b`` for ``(a, b) != (0, 0)`` in row-major order; acts as
      ``(1-p) rho + p 1/d``. For a qubit the order is ``1, Z, X, XZ``.
    * ``amplitude_damping`` (qubit), params ``[p]``:
      ``[diag(1, sqrt(1-p)), sqrt(p) |0><1|]``.

    Raises:
        UnknownPreset: ``name`` is not one of :data:`PRESETS`.
        InvalidParameter: bad parameters or unsupported dimension.
    """
    params = list(params)
    if dim < 1:
        raise InvalidParameter(f"dim must be positive, got {dim}")
    eye = np.eye(dim, dtype=complex)
    if name == "identity":
        ops = [eye]
    elif name == "unitary_rotation":
        ops = [_rotation(params, dim)]
    elif name == "dephasing":
        p = _prob(params, 0, name)
        _, z = _clock_shift(dim)
        ops = [np.sqrt(1 - p) * eye, np.sqrt(p) * z]
    elif name == "complete_dephasing":
        ops = [np.diag(row) for row in eye]
    elif name == "depolarizing":
        p = _prob(params, 0, name)
        x, z = _clock_shift(dim)
        ops = [np.sqrt(1 - p + p / dim**2) * eye]
        for a in range(dim):
            for b in range(dim):
                if a == b == 0:
                    continue
                ops.append(np.sqrt(p) / dim * np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b))
    elif name == "amplitude_damping":
        if dim != 2:
            raise InvalidParameter("amplitude_damping is defined for dim 2 only")
        p = _prob(params, 0, name)
        ops = [np.diag([1.0, np.sqrt(1 - p)]).astype(complex), np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)]
    else:
        raise UnknownPreset(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    label = name if not params else f"{name}({', '.join(f'{v:g}' for v in map(float, params))})"
    return KrausChannel(tuple(ops), label=label, tol=tol)


# ---------------------------------------------------------------------------
# serialization: complex entries are [re, im] pairs


def matrix_to_json(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def matrix_from_json(rows) -> np.ndarray:
    try:
        return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"matrix entries must be [re, im] pairs: {exc}") from None


def vector_to_json(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def vector_from_json(items) -> np.ndarray:
    try:
        return np.array([complex(re, im) for re, im in items], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"vector entries must be [re, im] pairs: {exc}") from None


def channel_to_spec(ch: KrausChannel) -> dict:
    return {"label": ch.label, "kraus": [matrix_to_json(e) for e in ch.kraus_ops]}


def channel_from_spec(spec: dict, dim: int, tol: Tolerances = DEFAULT_TOL) -> KrausChannel:
    """Build a channel from ``{"preset": name, "params": [...]}`` or ``{"kraus": [matrix, ...]}``."""
    if not isinstance(spec, dict):
        raise ValueError("channel spec must be an object")
    if "preset" in spec:
        return preset(spec["preset"], spec.get("params", []), dim, tol)
    if "kraus" in spec:
        ops = [matrix_from_json(m) for m in spec["kraus"]]
        if not ops:
            raise DimensionMismatch("explicit channel has no Kraus operators")
        for i, e in enumerate(ops):
            if e.shape != (dim, dim):
                raise DimensionMismatch(f"kraus[{i}] has shape {e.shape}, scenario dim is {dim}")
        return KrausChannel(tuple(ops), label=spec.get("label", "explicit"), tol=tol)
    raise ValueError("channel spec needs a 'preset' or 'kraus' key")
