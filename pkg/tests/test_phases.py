import cmath
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import OCTANT, polar_unitary, random_density, random_state, random_unitary, regularized_path
from trajphase.errors import ParallelityViolation, SingularOperator, ZeroPhaseUndefined
from trajphase.operators import is_unitary, ket_bra, psd_sqrt
from trajphase.phases import (
    Holonomy,
    pancharatnam_phase,
    parallel_amplitude,
    pure_limit_phase,
    uhlmann_holonomy,
    uhlmann_step,
    verify_parallelity,
)

OCTANT_PHASE = cmath.exp(-1j * math.pi / 4)


def test_constant_sequence_phase():
    zero = np.array([1, 0], dtype=complex)
    assert pancharatnam_phase([zero] * 4) == 1


def test_octant_phase():
    # <0|+i> <+i|+> <+|0> = (1/sqrt2) ((1-i)/2) (1/sqrt2) = (1-i)/4
    assert abs(pancharatnam_phase(OCTANT) - OCTANT_PHASE) <= 1e-14


def test_octant_matches_solid_angle():
    # the path bounds one octant of the Bloch sphere: solid angle 4 pi / 8
    omega = 4 * math.pi / 8
    assert abs(pancharatnam_phase(OCTANT) - cmath.exp(-1j * omega / 2)) <= 1e-14


def test_gauge_invariance(rng):
    base = pancharatnam_phase(OCTANT)
    for _ in range(20):
        scaled = [v * rng.uniform(0.1, 10) * cmath.exp(1j * rng.uniform(0, 2 * math.pi)) for v in OCTANT]
        assert abs(pancharatnam_phase(scaled) - base) <= 1e-12


def test_single_ray_phase_is_one(rng):
    v = random_state(rng, 3)
    ray = [v * rng.uniform(0.5, 2) * cmath.exp(1j * rng.uniform(0, 6)) for _ in range(5)]
    assert abs(pancharatnam_phase(ray) - 1) <= 1e-12


def test_zero_overlap_position():
    zero, one = np.eye(2, dtype=complex)
    plus = (zero + one) / math.sqrt(2)
    with pytest.raises(ZeroPhaseUndefined) as info:
        pancharatnam_phase([zero, plus, one])
    # <psi_0|psi_2> is the closing overlap
    assert info.value.position == 0
    with pytest.raises(ZeroPhaseUndefined) as info:
        pancharatnam_phase([plus, zero, one, plus])
    assert info.value.position == 2


def test_step_same_state_is_identity(rng):
    rho = random_density(rng, 3, min_eig=0.05)
    assert np.max(np.abs(uhlmann_step(rho, rho) - np.eye(3))) <= 1e-12


def test_step_commuting_pair_is_identity():
    x = uhlmann_step(np.diag([0.7, 0.3]), np.diag([0.4, 0.6]))
    assert np.max(np.abs(x - np.eye(2))) <= 1e-14


def test_step_equals_polar_factor(rng):
    for _ in range(10):
        a = random_density(rng, 2, min_eig=0.01)
        b = random_density(rng, 2, min_eig=0.01)
        x = uhlmann_step(a, b)
        oracle = polar_unitary(psd_sqrt(b) @ psd_sqrt(a))
        assert np.max(np.abs(x - oracle)) <= 1e-9
        assert is_unitary(x)


def test_step_matches_closed_form(rng):
    for _ in range(10):
        a = random_density(rng, 3, min_eig=0.05)
        b = random_density(rng, 3, min_eig=0.05)
        sa, sb = scipy.linalg.sqrtm(a), scipy.linalg.sqrtm(b)
        oracle = np.linalg.inv(scipy.linalg.sqrtm(sb @ a @ sb)) @ sb @ sa
        assert np.max(np.abs(uhlmann_step(a, b) - oracle)) <= 1e-10


def test_step_unitary_when_nearly_singular(rng):
    for _ in range(10):
        a = random_density(rng, 2, min_eig=1e-7)
        b = random_density(rng, 2, min_eig=1e-7)
        x = uhlmann_step(a, b)
        assert np.max(np.abs(x.conj().T @ x - np.eye(2))) <= 1e-13


def test_step_scale_covariant(rng):
    a = random_density(rng, 2, min_eig=0.05)
    b = random_density(rng, 2, min_eig=0.05)
    np.testing.assert_allclose(uhlmann_step(0.3 * a, 0.02 * b), uhlmann_step(a, b), atol=1e-12)


def test_step_singular():
    with pytest.raises(SingularOperator):
        uhlmann_step(np.diag([1.0, 0.0]), np.eye(2) / 2)


def test_holonomy_constant_sequence(rng):
    rho = random_density(rng, 2, min_eig=0.05)
    h = uhlmann_holonomy([rho] * 5)
    assert np.max(np.abs(h.operator - np.eye(2))) <= 1e-12


def test_holonomy_commuting_sequence(rng):
    basis = random_unitary(rng, 3)
    states = [basis @ np.diag(rng.dirichlet([2, 2, 2])) @ basis.conj().T for _ in range(6)]
    h = uhlmann_holonomy(states, close_loop=True)
    assert np.max(np.abs(h.operator - np.eye(3))) <= 1e-10


def test_holonomy_chain_order(rng):
    states = [random_density(rng, 2, min_eig=0.05) for _ in range(4)]
    h = uhlmann_holonomy(states)
    x1, x2, x3 = (uhlmann_step(states[k], states[k + 1]) for k in range(3))
    np.testing.assert_allclose(h.operator, x3 @ x2 @ x1, atol=1e-12)
    assert len(h.phases) == 4 and len(h.transports) == 3


def test_holonomy_close_loop_appends_start(rng):
    states = [random_density(rng, 2, min_eig=0.05) for _ in range(3)]
    closed = uhlmann_holonomy(states, close_loop=True)
    manual = uhlmann_holonomy(states + [states[0]])
    np.testing.assert_allclose(closed.operator, manual.operator, atol=1e-14)
    assert closed.closed and len(closed.states) == 4


def test_holonomy_independent_of_initial_phase(rng):
    states = [random_density(rng, 2, min_eig=0.02) for _ in range(5)]
    u = uhlmann_holonomy(states).operator
    for _ in range(20):
        v = random_unitary(rng, 2)
        w = psd_sqrt(states[0]) @ v
        for rho in states[1:]:
            w = parallel_amplitude(w, rho)
        v_final = np.linalg.solve(psd_sqrt(states[-1]), w)
        assert np.max(np.abs(v_final @ v.conj().T - u)) <= 1e-10


def test_holonomy_unnormalized_input_same(rng):
    states = [random_density(rng, 2, min_eig=0.02) for _ in range(4)]
    scaled = [s * w for s, w in zip(states, [1.0, 0.4, 0.1, 0.03])]
    np.testing.assert_allclose(uhlmann_holonomy(scaled).operator, uhlmann_holonomy(states).operator, atol=1e-12)


def test_holonomy_singular_position(rng):
    states = [random_density(rng, 2, min_eig=0.05), np.diag([1.0, 0.0]), random_density(rng, 2, min_eig=0.05)]
    with pytest.raises(SingularOperator) as info:
        uhlmann_holonomy(states)
    assert info.value.position == 1
    h = uhlmann_holonomy(states, epsilon=1e-3)
    assert is_unitary(h.operator)


def test_parallelity_constant(rng):
    rho = random_density(rng, 2, min_eig=0.05)
    rep = verify_parallelity(uhlmann_holonomy([rho] * 3))
    # W^dag W = rho for identical amplitudes
    assert rep.min_margin == pytest.approx(np.linalg.eigvalsh(rho)[0], abs=1e-12)


def test_parallelity_commuting():
    states = [np.diag([0.6, 0.4]), np.diag([0.2, 0.8]), np.diag([0.5, 0.5])]
    rep = verify_parallelity(uhlmann_holonomy(states))
    expected = [min(np.sqrt(np.diag(states[k + 1]) * np.diag(states[k]))) for k in range(2)]
    np.testing.assert_allclose(rep.margins, expected)


def test_parallelity_random_sequences(rng):
    for _ in range(5):
        states = [random_density(rng, 2, min_eig=0.02) for _ in range(6)]
        h = uhlmann_holonomy(states)
        rep = verify_parallelity(h, initial_phase=random_unitary(rng, 2))
        assert len(rep.margins) == 5
        assert rep.min_margin > 0


def test_parallelity_violation_detected(rng):
    states = [random_density(rng, 2, min_eig=0.05) for _ in range(3)]
    h = uhlmann_holonomy(states)
    broken = Holonomy(h.operator, h.states, h.transports, (h.phases[0], -h.phases[1], h.phases[2]))
    with pytest.raises(ParallelityViolation) as info:
        verify_parallelity(broken)
    assert info.value.step == 1


def test_pure_limit_identity():
    assert pure_limit_phase(np.eye(2), np.array([1, 0])) == 1


def test_pure_limit_diagonal():
    theta = 0.37
    u = np.diag([cmath.exp(1j * theta), cmath.exp(-1j * theta)])
    assert abs(pure_limit_phase(u, np.array([1, 0])) - cmath.exp(1j * theta)) <= 1e-15


def test_pure_limit_convergence():
    gamma = pancharatnam_phase(OCTANT)
    errors = []
    for eps in (1e-2, 1e-3, 1e-4):
        h = uhlmann_holonomy(regularized_path(OCTANT, eps), close_loop=True)
        errors.append(abs(pure_limit_phase(h, OCTANT[0]) - gamma))
    assert errors[0] > errors[1] > errors[2]
    for err, eps in zip(errors, (1e-2, 1e-3, 1e-4)):
        assert err <= 10 * eps
    # linear convergence: each decade of eps buys a decade of accuracy
    slopes = [math.log10(errors[k] / errors[k + 1]) for k in range(2)]
    assert all(0.9 <= s <= 1.1 for s in slopes)


def test_pure_limit_random_trajectory(rng):
    vecs = [random_state(rng) for _ in range(4)]
    gamma = pancharatnam_phase(vecs)
    errs = []
    for eps in (1e-3, 1e-4, 1e-5):
        h = uhlmann_holonomy(regularized_path(vecs, eps), close_loop=True)
        errs.append(abs(pure_limit_phase(h, vecs[0]) - gamma) / eps)
    # error / eps settles to a path-dependent constant
    assert errs[-1] < 100
    assert abs(errs[-1] - errs[-2]) <= 0.01 * errs[-1]


def test_epsilon_option_matches_manual(rng):
    vecs = [random_state(rng) for _ in range(3)]
    a = uhlmann_holonomy([ket_bra(v) for v in vecs], close_loop=True, epsilon=1e-3)
    b = uhlmann_holonomy(regularized_path(vecs, 1e-3), close_loop=True)
    np.testing.assert_allclose(a.operator, b.operator, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 6))
def test_pancharatnam_gauge_property(seed, n):
    rng = np.random.default_rng(seed)
    vecs = [random_state(rng) for _ in range(n)]
    try:
        base = pancharatnam_phase(vecs)
    except ZeroPhaseUndefined:
        return
    scaled = [v * rng.uniform(1e-3, 1e3) * cmath.exp(1j * rng.uniform(0, 7)) for v in vecs]
    assert abs(pancharatnam_phase(scaled) - base) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 4))
def test_step_always_unitary(seed, d):
    rng = np.random.default_rng(seed)
    x = uhlmann_step(random_density(rng, d, min_eig=0.01), random_density(rng, d, min_eig=0.01))
    assert is_unitary(x)
