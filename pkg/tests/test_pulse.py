import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fluxshape import HarmonicPulse, transient_coefficient


def test_validation():
    with pytest.raises(ValueError):
        HarmonicPulse(tau_pulse=0.0)
    with pytest.raises(ValueError):
        HarmonicPulse(tau_pulse=-1.0)
    with pytest.raises(ValueError):
        HarmonicPulse(tau_pulse=math.inf)
    with pytest.raises(ValueError):
        HarmonicPulse(tau_pulse=1.0, a=(1.0,), b=())
    with pytest.raises(ValueError):
        HarmonicPulse(tau_pulse=1.0, a=(math.nan,), b=(0.0,))
    # DC-only pulses are legal
    p = HarmonicPulse(tau_pulse=1.0, a0=2.0)
    assert p.n_harmonics == 0
    assert p.evaluate(0.3) == 2.0


def test_omega_derived_from_period():
    p = HarmonicPulse(tau_pulse=8e-6)
    assert p.omega == pytest.approx(2.0 * math.pi / 8e-6, rel=1e-15)


def test_evaluate_zero_pulse():
    p = HarmonicPulse(tau_pulse=1.0, a=(0.0, 0.0), b=(0.0, 0.0))
    t = np.linspace(0.0, 3.0, 7)
    assert np.all(p.evaluate(t) == 0.0)


def test_evaluate_two_harmonic_points():
    p = HarmonicPulse(tau_pulse=8e-6, a=(0.0, 0.0), b=(1.0, -2.0))
    assert p.evaluate(0.0) == 0.0
    # sin(pi/4) - 2 sin(pi/2) at one eighth of a period
    expected = math.sin(math.pi / 4.0) - 2.0
    assert_allclose(p.evaluate(8e-6 / 8.0), expected, rtol=1e-12)


def test_evaluate_scalar_and_array_agree():
    p = HarmonicPulse(tau_pulse=2.0, a0=0.1, a=(0.3, -0.2), b=(1.0, 0.5))
    t = np.array([0.0, 0.17, 1.9])
    v = p.evaluate(t)
    assert v.shape == t.shape
    for i, ti in enumerate(t):
        assert p.evaluate(float(ti)) == v[i]


def test_periodicity():
    p = HarmonicPulse(tau_pulse=1.3e-6, a0=0.2, a=(0.4, -0.1, 0.05), b=(1.0, -0.7, 0.3))
    t = np.linspace(0.0, 10.0 * p.tau_pulse, 1000, endpoint=False)
    v1 = p.evaluate(t)
    v2 = p.evaluate(t + p.tau_pulse)
    scale = np.max(np.abs(v1))
    assert_allclose(v2, v1, rtol=0.0, atol=1e-12 * scale)


def test_evaluate_linearity():
    rng = np.random.default_rng(7)
    tau_pulse = 3.1e-6
    p1 = HarmonicPulse(tau_pulse, a0=rng.uniform(-1, 1), a=tuple(rng.uniform(-1, 1, 4)), b=tuple(rng.uniform(-1, 1, 4)))
    p2 = HarmonicPulse(tau_pulse, a0=rng.uniform(-1, 1), a=tuple(rng.uniform(-1, 1, 4)), b=tuple(rng.uniform(-1, 1, 4)))
    combined = HarmonicPulse(
        tau_pulse,
        a0=p1.a0 + p2.a0,
        a=tuple(x + y for x, y in zip(p1.a, p2.a)),
        b=tuple(x + y for x, y in zip(p1.b, p2.b)),
    )
    t = np.linspace(0.0, tau_pulse, 101)
    assert_allclose(combined.evaluate(t), p1.evaluate(t) + p2.evaluate(t), rtol=0.0, atol=1e-12)


def test_condition_one_residual():
    assert HarmonicPulse(1.0, a=(0.0, 0.0), b=(1.0, -2.0)).condition_one_residual() == 0.0
    assert HarmonicPulse(1.0, a=(1.0, 2.0), b=(0.0, 0.0)).condition_one_residual() == 3.0
    assert HarmonicPulse(1.0, a0=-3.0, a=(1.0, 2.0), b=(0.0, 0.0)).condition_one_residual() == 0.0


def test_condition_one_equals_value_at_zero():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = rng.integers(1, 9)
        p = HarmonicPulse(1e-6, a0=rng.uniform(-1, 1), a=tuple(rng.uniform(-1, 1, n)), b=tuple(rng.uniform(-1, 1, n)))
        assert p.evaluate(0.0) == p.condition_one_residual()


def test_condition_three_residual_values():
    assert HarmonicPulse(1.0).condition_three_residual(0.5) == 0.0
    # single sine at omega*tau = 8.79: 1/(1 + 8.79^2)
    p = HarmonicPulse(tau_pulse=8e-6, a=(0.0,), b=(1.0,))
    tau = 8.79 / p.omega
    expected = 1.0 / (1.0 + 8.79**2)
    assert_allclose(p.condition_three_residual(tau), expected, rtol=1e-12)
    assert_allclose(p.condition_three_residual(tau), 0.012781, rtol=1e-3)
    with pytest.raises(ValueError):
        p.condition_three_residual(0.0)


def test_sine_only_current_cosine_content_tracks_transient_coefficient():
    # for sine-only pulses the two residuals differ only by a factor -omega*tau
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = rng.integers(1, 9)
        p = HarmonicPulse(5e-6, a=tuple(0.0 for _ in range(n)), b=tuple(rng.uniform(-1, 1, n)))
        tau = float(rng.uniform(0.1, 100.0)) / p.omega
        lhs = p.condition_three_residual(tau) * (-p.omega * tau)
        rhs = transient_coefficient(p, tau)
        assert_allclose(lhs, rhs, rtol=1e-12)


def test_sample_zero_pulse():
    p = HarmonicPulse(tau_pulse=1.0, a=(0.0,), b=(0.0,))
    t, v = p.sample(0.1, 2)
    assert np.all(v == 0.0)
    assert t[0] == 0.0


def test_sample_matches_evaluate():
    p = HarmonicPulse(tau_pulse=2e-6, a0=0.3, a=(0.5,), b=(-1.0,))
    t, v = p.sample(1e-7, 3)
    assert np.array_equal(v, p.evaluate(t))


def test_sample_quarter_period_grid():
    p = HarmonicPulse(tau_pulse=1.0, a=(0.0,), b=(1.0,))
    t, v = p.sample(0.25, 1)
    # half-open over one period: the period endpoint is excluded
    assert t.size == 4
    assert_allclose(v, [0.0, 1.0, 0.0, -1.0], atol=1e-12)


def test_sample_step_bounds():
    p = HarmonicPulse(tau_pulse=1.0, a=(0.0,), b=(1.0,))
    with pytest.raises(ValueError):
        p.sample(0.2500001, 1)
    with pytest.raises(ValueError):
        p.sample(0.0, 1)
    with pytest.raises(ValueError):
        p.sample(0.1, 0)
    t, _ = p.sample(0.1, 3)
    assert t.size == 30


def test_many_harmonics():
    # no cap on the harmonic count; 16 harmonics evaluate and stay periodic
    rng = np.random.default_rng(5)
    p = HarmonicPulse(1e-6, a=tuple(rng.uniform(-1, 1, 16)), b=tuple(rng.uniform(-1, 1, 16)))
    t = np.linspace(0.0, p.tau_pulse, 257)
    v = p.evaluate(t)
    assert np.all(np.isfinite(v))
    assert_allclose(p.evaluate(t + 3 * p.tau_pulse), v, rtol=0.0, atol=1e-11 * np.max(np.abs(v)))
