import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dikinlab.dikin import (
    check_theta,
    cubic_h,
    dikin_step,
    dikin_step_batch,
    f_map,
    g_iterate,
    g_map,
    h_map,
    normalize,
    random_state,
    reflect,
    trap_interval,
)
from dikinlab.errors import DegenerateInput, DegenerateStep, NotApplicable, PreconditionViolated
from dikinlab.stability import fixed_point_r

thetas = st.floats(0.01, 0.99)
states = st.lists(st.floats(1e-3, 1.0), min_size=2, max_size=8)


def test_f_at_trap_endpoint():
    assert f_map(0.95, 1 / 0.95 - 1) == pytest.approx(0.05, abs=1e-15)


def test_f_zero():
    assert f_map(0.3, 0.0) == 0.0


def test_f_maximum():
    assert f_map(0.8, 1 / 1.6) == pytest.approx(0.3125, abs=1e-15)


def test_step_fixes_e():
    for t in (0.0, 0.3, 0.7, 0.99):
        assert dikin_step(t, np.ones(4)).tolist() == [1.0] * 4


def test_step_hand_example():
    out = dikin_step(0.7, [0.9, 1.0])
    assert out[0] == 1.0
    assert out[1] == pytest.approx(0.3 / 0.333, abs=1e-14)


def test_step_chain_value():
    out = dikin_step(0.95, [1 / 0.95 - 1, 1 / 1.9])
    assert out[1] == 1.0
    assert out[0] == pytest.approx(0.19, abs=1e-12)


def test_step_theta_one_degenerates():
    with pytest.raises(DegenerateStep):
        dikin_step(1.0, [0.5, 1.0])


def test_step_rejects_bad_input():
    with pytest.raises(PreconditionViolated):
        dikin_step(0.5, [0.0, 1.0])
    with pytest.raises(PreconditionViolated):
        check_theta(1.2)


def test_h_fixes_one():
    for t in (0.2, 0.5, 0.9):
        assert h_map(t, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_h_fixes_r():
    r = fixed_point_r(0.7)
    assert abs(h_map(0.7, r) - r) <= 1e-12


def test_h_hand_example():
    assert h_map(0.5, 0.8) == pytest.approx(0.5 / (0.8 * 0.6), rel=1e-15)


def test_h_degenerate():
    with pytest.raises(DegenerateInput):
        h_map(0.5, 0.0)


def test_g_examples():
    r = fixed_point_r(0.8)
    assert g_map(0.8, r, r) == 1.0
    assert g_map(0.3, 0.42, 0.42) == 1.0
    assert g_iterate(0.95, 1 / 1.9, 1 / 0.95 - 1, 2) == pytest.approx(0.5917, abs=5e-5)
    with pytest.raises(DegenerateInput):
        g_map(0.5, 0.0, 0.3)


def test_reflect_examples():
    assert reflect(0.8, 1 / 1.6) == pytest.approx(1 / 1.6, abs=1e-15)
    assert reflect(0.8, 0.25) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(PreconditionViolated):
        reflect(0.4, 0.1)


@given(st.floats(0.51, 1.0), st.floats(-2.0, 2.0))
def test_reflect_preserves_f(theta, x):
    assert f_map(theta, reflect(theta, x)) == pytest.approx(f_map(theta, x), abs=1e-12)


@given(st.floats(0.51, 1.0), st.floats(0.0, 1.0))
def test_f_symmetric_about_peak(theta, z):
    c = 1 / (2 * theta)
    assert abs(f_map(theta, c + z) - f_map(theta, c - z)) <= 1e-14


def test_trap_interval_examples():
    assert trap_interval(2 / 3) == pytest.approx((0.5, 1.0), abs=1e-15)
    assert trap_interval(1.0) == (0.0, 1.0)
    assert trap_interval(0.95)[0] == pytest.approx(0.0526316, abs=1e-7)
    with pytest.raises(NotApplicable):
        trap_interval(0.5)


@given(thetas, states, st.floats(1e-3, 1e3))
def test_projective_invariance(theta, w, lam):
    w = np.array(w)

    def raw(u):
        return u * (1.0 - theta * u / np.max(u))

    a = normalize(raw(lam * w))
    b = normalize(raw(w))
    assert np.max(np.abs(a - b)) <= 1e-12
    assert np.max(np.abs(dikin_step(theta, normalize(lam * w)) - b)) <= 1e-12


@given(thetas, states)
def test_step_output_is_state(theta, w):
    out = dikin_step(theta, normalize(w))
    assert np.max(out) == 1.0 and np.all(out > 0)


@given(st.integers(0, 2**32 - 1))
def test_batch_matches_scalar_bitwise(seed):
    rng = np.random.default_rng(seed)
    W = np.array([random_state(rng, 4) for _ in range(6)])
    th = rng.uniform(0, 0.99, 6)
    B = dikin_step_batch(th, W)
    for i in range(6):
        assert np.array_equal(B[i], dikin_step(th[i], W[i]))


def test_absorption():
    rng = np.random.default_rng(11)
    for theta in (0.55, 0.7, 0.85, 0.95, 0.99):
        lo = 1 / theta - 1
        W = np.array([random_state(rng, 4) for _ in range(20)])
        for _ in range(10_000):
            W = dikin_step_batch(theta, W)
        # once inside the trap the orbit stays there
        for _ in range(200):
            W = dikin_step_batch(theta, W)
            assert W.min() >= lo - 1e-9


def test_monotone_convergence_below_half():
    rng = np.random.default_rng(5)
    for theta in (0.1, 0.3, 0.5):
        W = np.array([random_state(rng, 5) for _ in range(50)])
        for _ in range(100_000):
            nxt = dikin_step_batch(theta, W)
            assert np.all(nxt >= W - 1e-15)
            W = nxt
            if np.all(1.0 - W <= 1e-9):
                break
        assert np.max(1.0 - W) <= 1e-9


def test_cubic_nonnegative_up_to_two_thirds():
    x = np.linspace(0.0, 1.0, 10_001)
    for theta in np.linspace(0.5, 2 / 3, 25):
        assert np.min(cubic_h(theta, x)) >= -1e-15
    # and it goes negative just above 2/3, where e loses global attraction
    assert np.min(cubic_h(0.7, x)) < 0


def test_global_attraction_between_half_and_two_thirds():
    rng = np.random.default_rng(3)
    for theta in (0.55, 0.6, 0.65):
        W = np.array([random_state(rng, 3) for _ in range(100)])
        for _ in range(20_000):
            W = dikin_step_batch(theta, W)
        assert np.max(np.abs(W - 1.0)) <= 1e-9
