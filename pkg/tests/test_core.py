from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trajopt.core import (
    HardwareSpec,
    Trajectory,
    load_trajectory_bin,
    load_trajectory_csv,
    normalized_bounds,
    save_trajectory_bin,
    save_trajectory_csv,
    traj_to_profile,
    undersampling_factor,
)


def exact_bounds(gamma, g_max, s_max, dt, N, fov):
    gamma, g_max, s_max, dt, fov = (Fraction(str(v)) for v in (gamma, g_max, s_max, dt, fov))
    k_max = Fraction(N) / (2 * fov)
    return k_max, gamma * g_max * dt / (2 * k_max), gamma * s_max * dt * dt / (2 * k_max)


def test_reference_bounds_match_exact_arithmetic():
    spec = HardwareSpec()
    k_max, alpha, beta = exact_bounds(42.576e6, 0.04, 180, 1e-5, 320, 0.23)
    assert spec.k_max == pytest.approx(float(k_max), rel=1e-15)
    a, b = normalized_bounds(spec)
    assert a == pytest.approx(float(alpha), rel=1e-14)
    assert b == pytest.approx(float(beta), rel=1e-14)
    # frozen values
    assert spec.k_max == pytest.approx(695.652173913, rel=1e-11)
    assert a == pytest.approx(1.22406e-2, rel=1e-12)
    assert b == pytest.approx(5.50827e-4, rel=1e-12)


def test_doubling_fov_doubles_bounds():
    a1, b1 = normalized_bounds(HardwareSpec(fov=0.2))
    a2, b2 = normalized_bounds(HardwareSpec(fov=0.4))
    assert HardwareSpec(fov=0.4).k_max == pytest.approx(HardwareSpec(fov=0.2).k_max / 2)
    assert a2 == pytest.approx(2 * a1)
    assert b2 == pytest.approx(2 * b1)


@pytest.mark.parametrize("field", ["gamma", "g_max", "s_max", "raster_dt", "dwell_dt", "fov", "matrix_size"])
def test_spec_rejects_nonpositive(field):
    with pytest.raises(ValueError):
        HardwareSpec(**{field: 0})


def test_spec_rejects_fractional_dwell_ratio():
    with pytest.raises(ValueError):
        HardwareSpec(raster_dt=10e-6, dwell_dt=3e-6)
    assert HardwareSpec().dwell_ratio == 5


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        Trajectory(np.full((1, 3, 2), 0.6))
    with pytest.raises(ValueError):
        Trajectory(np.zeros((1, 3, 2)), decimation=0)
    t = Trajectory(np.zeros((2, 5, 2)))
    assert (t.n_shots, t.n_samples) == (2, 5)
    with pytest.raises(ValueError):
        t.points[0, 0, 0] = 1.0


def test_constant_trajectory_profile_is_zero():
    prof = traj_to_profile(Trajectory(np.full((2, 6, 2), 0.1)), HardwareSpec())
    assert prof.gradients.shape == (2, 5, 2)
    assert prof.slew.shape == (2, 4, 2)
    assert not prof.gradient_norms.any()
    assert not prof.slew_norms.any()


def test_straight_line_profile():
    spec = HardwareSpec()
    d = 0.003
    pts = np.zeros((1, 10, 2))
    pts[0, :, 0] = d * np.arange(10)
    prof = traj_to_profile(Trajectory(pts), spec)
    expected = 2 * spec.k_max * d / (spec.gamma * spec.raster_dt)
    np.testing.assert_allclose(prof.gradient_norms, expected, rtol=1e-12)
    np.testing.assert_allclose(prof.slew_norms, 0.0, atol=1e-6 * expected / spec.raster_dt)


def test_profile_matches_difference_quotients(rng):
    spec = HardwareSpec()
    pts = rng.uniform(-0.5, 0.5, (2, 8, 2))
    prof = traj_to_profile(Trajectory(pts), spec)
    for c in range(2):
        for i in range(7):
            g = 2 * spec.k_max * (pts[c, i + 1] - pts[c, i]) / (spec.gamma * spec.raster_dt)
            np.testing.assert_allclose(prof.gradients[c, i], g, rtol=1e-12)
        for i in range(6):
            s = (prof.gradients[c, i + 1] - prof.gradients[c, i]) / spec.raster_dt
            np.testing.assert_allclose(prof.slew[c, i], s, rtol=1e-12)


def test_profile_preconditions():
    with pytest.raises(ValueError):
        traj_to_profile(Trajectory(np.zeros((1, 2, 2))), HardwareSpec())
    with pytest.raises(ValueError):
        traj_to_profile(Trajectory(np.zeros((1, 5, 2)), decimation=2), HardwareSpec())


def test_bounds_are_profile_limits():
    # a step of exactly alpha is a gradient of exactly g_max
    spec = HardwareSpec()
    alpha, beta = normalized_bounds(spec)
    pts = np.zeros((1, 3, 2))
    pts[0, 1, 0] = alpha
    pts[0, 2, 0] = 2 * alpha + beta
    prof = traj_to_profile(Trajectory(pts), spec)
    assert prof.gradient_norms[0, 0] == pytest.approx(spec.g_max, rel=1e-12)
    assert prof.slew_norms[0, 0] == pytest.approx(spec.s_max, rel=1e-9)


@pytest.mark.parametrize(
    "args, expected",
    [((320, 16, 512, 5), 2.5), ((64, 1, 64 * 64, 1), 1.0), ((64, 4, 64, 4), 4.0)],
)
def test_undersampling_factor(args, expected):
    assert undersampling_factor(*args) == expected


@given(st.integers(1, 512), st.integers(1, 64), st.integers(1, 4096), st.integers(1, 8))
def test_undersampling_factor_is_symmetric_in_acquisition(N, a, b, c):
    ref = undersampling_factor(N, a, b, c)
    assert ref == pytest.approx(undersampling_factor(N, b, c, a))
    assert ref == pytest.approx(N * N / (a * b * c))


def test_undersampling_factor_rejects_zero():
    with pytest.raises(ValueError):
        undersampling_factor(64, 0, 10, 1)


def test_csv_and_binary_round_trip(tmp_path, rng):
    t = Trajectory(rng.uniform(-0.5, 0.5, (3, 7, 2)))
    save_trajectory_csv(t, tmp_path / "t.csv")
    save_trajectory_bin(t, tmp_path / "t.bin")
    assert load_trajectory_csv(tmp_path / "t.csv") == t
    assert load_trajectory_bin(tmp_path / "t.bin") == t
    assert (tmp_path / "t.bin").stat().st_size == 12 + 3 * 7 * 2 * 8


def test_binary_rejects_truncation(tmp_path):
    t = Trajectory(np.zeros((1, 4, 2)))
    save_trajectory_bin(t, tmp_path / "t.bin")
    raw = (tmp_path / "t.bin").read_bytes()
    (tmp_path / "bad.bin").write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        load_trajectory_bin(tmp_path / "bad.bin")
