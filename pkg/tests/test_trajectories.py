import math

import numpy as np
import pytest

from helpers import kraus_product, random_density, random_sequence, random_state
from trajphase.channels import ChannelSequence, compose_sequence, preset
from trajphase.errors import (
    CombinatorialOverflow,
    DeadEnd,
    DimensionMismatch,
    IncompleteSet,
    InvalidIndex,
    NotNormalized,
)
from trajphase.operators import Tolerances, ket_bra
from trajphase.trajectories import (
    enumerate_trajectories,
    evolve_mixed,
    evolve_pure,
    reconstruct_channel,
    sample_many,
    sample_trajectory,
    trajectory_record,
)

PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)


def seq_of(name, params=(), n=1, dim=2):
    return ChannelSequence(tuple(preset(name, params, dim) for _ in range(n)))


def test_pure_identity_sequence(rng):
    psi = random_state(rng)
    t = evolve_pure(seq_of("identity", n=3), psi, (0, 0, 0))
    for s in t.states:
        np.testing.assert_allclose(s, psi)
    assert t.weight == pytest.approx(1.0)


def test_pure_projector_branch():
    t = evolve_pure(seq_of("complete_dephasing"), PLUS, (0,))
    np.testing.assert_allclose(t.states[1], [1 / math.sqrt(2), 0])
    assert t.weight == pytest.approx(0.5)


def test_pure_weight_matches_product(rng):
    seq = random_sequence(rng, 3)
    psi = random_state(rng)
    idx = (1, 0, 1)
    t = evolve_pure(seq, psi, idx)
    final = kraus_product(seq, idx) @ psi
    assert t.weight == pytest.approx(np.vdot(final, final).real, abs=1e-14)
    np.testing.assert_allclose(t.states[-1], final, atol=1e-14)


def test_pure_errors(rng):
    seq = seq_of("complete_dephasing", n=2)
    with pytest.raises(InvalidIndex):
        evolve_pure(seq, PLUS, (0,))
    with pytest.raises(InvalidIndex):
        evolve_pure(seq, PLUS, (0, 2))
    with pytest.raises(DimensionMismatch):
        evolve_pure(seq, np.array([1, 0, 0]), (0, 0))
    with pytest.raises(NotNormalized):
        evolve_pure(seq, np.array([1, 1]), (0, 0))


def test_mixed_identity(rng):
    rho = random_density(rng)
    t = evolve_mixed(seq_of("identity", n=2), rho, (0, 0))
    for s in t.states:
        np.testing.assert_allclose(s, rho)
    assert t.weight == pytest.approx(1.0)


def test_mixed_maximally_mixed_projector():
    t = evolve_mixed(seq_of("complete_dephasing"), np.eye(2) / 2, (0,))
    np.testing.assert_allclose(t.states[1], np.diag([0.5, 0]))
    assert t.weight == pytest.approx(0.5)


def test_pure_and_mixed_agree(rng):
    seq = random_sequence(rng, 4)
    psi = random_state(rng)
    for idx in [(0, 0, 0, 0), (1, 0, 1, 1), (1, 1, 1, 1)]:
        tp = evolve_pure(seq, psi, idx)
        tm = evolve_mixed(seq, ket_bra(psi), idx)
        for v, rho in zip(tp.states, tm.states):
            assert np.max(np.abs(ket_bra(v) - rho)) <= 1e-12
        assert tp.weight == pytest.approx(tm.weight, abs=1e-12)


def test_enumerate_single_step():
    trajs = enumerate_trajectories(seq_of("complete_dephasing"), PLUS)
    assert [t.index for t in trajs] == [(0,), (1,)]


def test_enumerate_lexicographic_and_normalized(rng):
    seq = random_sequence(rng, 10)
    trajs = enumerate_trajectories(seq, random_state(rng))
    assert len(trajs) == 1024
    idx = [t.index for t in trajs]
    assert idx == sorted(idx)
    assert abs(trajs.total_weight - 1) <= 1e-10


def test_enumerate_min_weight_accounting(rng):
    seq = random_sequence(rng, 3)
    trajs = enumerate_trajectories(seq, random_state(rng), min_weight=1.0)
    assert trajs.retained == []
    assert all(t.elided and t.states == () for t in trajs)
    assert abs(trajs.total_weight - 1) <= 1e-12
    assert abs(trajs.elided_weight - 1) <= 1e-12


def test_enumerate_cap():
    seq = seq_of("depolarizing", [0.1], n=3)
    with pytest.raises(CombinatorialOverflow):
        enumerate_trajectories(seq, PLUS, cap=63)
    assert len(enumerate_trajectories(seq, PLUS, cap=64)) == 64


def test_enumerate_mixed_input(rng):
    seq = random_sequence(rng, 3, m=3)
    trajs = enumerate_trajectories(seq, random_density(rng))
    assert trajs.kind == "mixed" and len(trajs) == 27
    assert abs(trajs.total_weight - 1) <= 1e-12


def test_enumerate_same_result_with_threads(rng, monkeypatch):
    seq = random_sequence(rng, 6)
    psi = random_state(rng)
    monkeypatch.setenv("HOLONOMY_THREADS", "1")
    a = enumerate_trajectories(seq, psi)
    monkeypatch.setenv("HOLONOMY_THREADS", "8")
    b = enumerate_trajectories(seq, psi)
    assert [t.index for t in a] == [t.index for t in b]
    assert [t.weight for t in a] == [t.weight for t in b]


def test_sample_identity():
    t = sample_trajectory(seq_of("identity", n=3), PLUS, seed=1)
    assert t.index == (0, 0, 0)
    assert t.weight == 1.0


def test_sample_never_picks_zero_branch():
    seq = seq_of("complete_dephasing")
    zero = np.array([1, 0], dtype=complex)
    for seed in range(50):
        t = sample_trajectory(seq, zero, seed)
        assert t.index == (0,)
        assert t.weight == pytest.approx(1.0)


def test_sample_deterministic(rng):
    seq = random_sequence(rng, 5, m=3)
    psi = random_state(rng)
    a = sample_trajectory(seq, psi, 2**63 + 12345)
    b = sample_trajectory(seq, psi, 2**63 + 12345)
    assert a.index == b.index and a.weight == b.weight


def test_sample_weight_is_final_norm(rng):
    seq = random_sequence(rng, 4)
    psi = random_state(rng)
    for seed in range(20):
        t = sample_trajectory(seq, psi, seed)
        assert t.weight == pytest.approx(np.linalg.norm(t.states[-1]) ** 2, rel=1e-10)
        np.testing.assert_allclose(t.states[-1], kraus_product(seq, t.index) @ psi, atol=1e-13)


def test_sample_many_reports_dead_ends_in_place():
    # complete channels only pick branches of positive probability, so a
    # vanishing state is forced here through an oversized zero threshold
    seq = seq_of("complete_dephasing", n=2)
    out = sample_many(seq, PLUS, [0, 1, 2], tol=Tolerances(zero_overlap=0.75))
    assert all(isinstance(x, DeadEnd) for x in out)
    assert out[0].step == 2
    with pytest.raises(DeadEnd):
        sample_trajectory(seq, PLUS, 0, tol=Tolerances(zero_overlap=0.75))


def test_sample_frequencies_follow_weights():
    seq = seq_of("dephasing", [0.3], n=2)
    psi = np.array([math.cos(0.4), math.sin(0.4)], dtype=complex)
    n = 4000
    counts = {}
    for t in sample_many(seq, psi, range(n)):
        counts[t.index] = counts.get(t.index, 0) + 1
    for t in enumerate_trajectories(seq, psi):
        sigma = math.sqrt(t.weight * (1 - t.weight) / n)
        assert abs(counts.get(t.index, 0) / n - t.weight) <= 4 * sigma


def test_reconstruct_identity(rng):
    rho = random_density(rng)
    np.testing.assert_allclose(reconstruct_channel(enumerate_trajectories(seq_of("identity"), rho)), rho)


def test_reconstruct_dephasing():
    trajs = enumerate_trajectories(seq_of("complete_dephasing"), ket_bra(PLUS))
    np.testing.assert_allclose(trajs[0].states[-1], np.diag([0.5, 0]))
    np.testing.assert_allclose(reconstruct_channel(trajs), np.eye(2) / 2)


def test_reconstruct_long_sequence(rng):
    seq = random_sequence(rng, 6)
    rho = random_density(rng)
    total = reconstruct_channel(enumerate_trajectories(seq, rho), seq)
    assert np.max(np.abs(total - compose_sequence(seq, rho))) <= 1e-10


def test_reconstruct_incomplete(rng):
    seq = random_sequence(rng, 2)
    trajs = list(enumerate_trajectories(seq, random_density(rng)))
    with pytest.raises(IncompleteSet):
        reconstruct_channel(trajs[:-1], seq)
    with pytest.raises(IncompleteSet):
        reconstruct_channel(trajs[1:])
    with pytest.raises(IncompleteSet):
        reconstruct_channel(trajs + trajs[:1])


def test_record_schema(rng):
    t = evolve_pure(random_sequence(rng, 2), random_state(rng), (1, 0))
    rec = trajectory_record(t)
    assert rec["index"] == [1, 0]
    assert len(rec["norms"]) == 3
    assert rec["weight"] == pytest.approx(rec["norms"][-1] ** 2)
