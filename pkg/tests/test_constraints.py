import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from trajopt.constraints import (
    ProjectionWarning,
    check_feasibility,
    check_points,
    project,
    project_points,
    scaled_bounds,
)
from trajopt.core import HardwareSpec, Trajectory, normalized_bounds


def shot_1d(values):
    pts = np.zeros((1, len(values), 2))
    pts[0, :, 0] = values
    return pts


def loop_report(points, alpha, beta, tol):
    speed, accel = [], []
    for shot in points:
        for i in range(len(shot) - 1):
            speed.append(float(np.hypot(*(shot[i + 1] - shot[i]))))
        for i in range(len(shot) - 2):
            accel.append(float(np.hypot(*(shot[i + 2] - 2 * shot[i + 1] + shot[i]))))
    return (
        max(0.0, max(s - alpha for s in speed)),
        max(0.0, max(a - beta for a in accel)),
        sum(s >= (1 - tol) * alpha for s in speed) / len(speed),
        sum(a >= (1 - tol) * beta for a in accel) / len(accel),
    )


def test_constant_trajectory_is_feasible_and_inactive():
    rep = check_points(np.full((2, 5, 2), 0.2), 0.1, 0.01)
    assert rep.max_violation == 0.0
    assert rep.speed_active_fraction == 0.0
    assert rep.slew_active_fraction == 0.0


def test_speed_violation_arithmetic():
    a = 0.01
    assert check_points(shot_1d([0, 0.6 * a, 1.2 * a]), a, np.inf).max_speed_violation == 0.0
    rep = check_points(shot_1d([0, 1.5 * a, 3 * a]), a, np.inf)
    assert rep.max_speed_violation == pytest.approx(0.5 * a, rel=1e-12)


def test_report_matches_loop_oracle(rng):
    pts = rng.uniform(-0.5, 0.5, (3, 9, 2)) * 0.1
    alpha, beta = 0.03, 0.02
    rep = check_points(pts, alpha, beta, 0.05)
    expected = loop_report(pts, alpha, beta, 0.05)
    got = (rep.max_speed_violation, rep.max_accel_violation, rep.speed_active_fraction, rep.slew_active_fraction)
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-15)


def test_feasibility_uses_decimation_scaled_bounds():
    spec = HardwareSpec()
    alpha, beta = normalized_bounds(spec)
    assert scaled_bounds(spec, 4) == pytest.approx((4 * alpha, 16 * beta))
    pts = shot_1d([0.0, 3 * alpha, 6 * alpha])
    assert check_feasibility(Trajectory(pts), spec).max_speed_violation > 0
    assert check_feasibility(Trajectory(pts, decimation=4), spec).max_speed_violation == 0


def test_closed_form_kkt_case():
    # min z1^2 + (z2 - 1)^2 s.t. z2 - z1 <= 0.5, no box
    z, info = project_points(shot_1d([0.0, 1.0]), 0.5, np.inf, box=None)
    assert info.converged
    np.testing.assert_allclose(z[0, :, 0], [0.25, 0.75], atol=1e-9)
    np.testing.assert_allclose(z[0, :, 1], 0.0, atol=1e-12)


def test_box_is_enforced():
    pts = np.array([[[0.0, 0.0], [0.6, 0.0], [0.7, 0.1]]])
    z, info = project_points(pts, 10.0, 10.0)
    assert np.abs(z).max() <= 0.5
    np.testing.assert_allclose(z, np.clip(pts, -0.5, 0.5), atol=1e-9)


def test_feasible_input_is_fixed(rng):
    pts = np.cumsum(rng.uniform(-0.001, 0.001, (3, 12, 2)), axis=1)
    z, info = project_points(pts, 0.01, 0.01)
    assert info.iterations == 0
    np.testing.assert_array_equal(z, pts)


def test_matches_slow_dual_ascent_oracle(projection_oracle):
    shots, alpha, beta, expected = projection_oracle
    for k, zo in zip(shots[:8], expected[:8]):
        z, info = project_points(k[None], alpha, beta)
        assert info.converged
        assert np.linalg.norm(z[0] - zo) <= 1e-4 * np.linalg.norm(zo)


def test_batched_shots_are_independent(projection_oracle):
    shots, alpha, beta, _ = projection_oracle
    same = np.stack([s for s in shots if len(s) == 5])
    z, _ = project_points(same, alpha, beta)
    for c in range(len(same)):
        zc, _ = project_points(same[c:c + 1], alpha, beta)
        np.testing.assert_allclose(z[c], zc[0], atol=1e-10)


shots_strategy = arrays(
    np.float64, st.tuples(st.integers(1, 3), st.integers(3, 12), st.just(2)),
    elements=st.floats(-0.5, 0.5, allow_nan=False),
)


@given(shots_strategy, st.floats(0.01, 0.3), st.floats(0.005, 0.2))
def test_projection_is_feasible_and_idempotent(pts, alpha, beta):
    z, info = project_points(pts, alpha, beta)
    rep = check_points(z, alpha, beta)
    assert rep.max_violation <= 1e-9
    assert np.abs(z).max() <= 0.5
    z2, _ = project_points(z, alpha, beta)
    assert np.abs(z2 - z).max() <= 1e-8


@given(shots_strategy, st.floats(0.01, 0.3), st.floats(0.005, 0.2), st.randoms(use_true_random=False))
def test_projection_is_nonexpansive(pts, alpha, beta, rnd):
    other = np.clip(pts + np.array([rnd.uniform(-0.1, 0.1) for _ in range(pts.size)]).reshape(pts.shape), -0.5, 0.5)
    z1, _ = project_points(pts, alpha, beta)
    z2, _ = project_points(other, alpha, beta)
    assert np.linalg.norm(z1 - z2) <= np.linalg.norm(pts - other) * (1 + 1e-6) + 1e-8


@given(shots_strategy, st.floats(0.01, 0.3), st.floats(0.005, 0.2))
def test_projection_beats_feasible_competitors(pts, alpha, beta):
    # every convex combination of the projection with another feasible point is
    # no closer to the input (variational inequality of the projection)
    z, _ = project_points(pts, alpha, beta)
    anchor = np.broadcast_to(np.clip(pts.mean(axis=1, keepdims=True), -0.5, 0.5), pts.shape)
    d0 = np.sum((z - pts) ** 2)
    for t in (1e-3, 1e-2, 0.1):
        cand = (1 - t) * z + t * anchor
        assert np.sum((cand - pts) ** 2) >= d0 - 1e-9


def test_warm_start_reuses_dual(rng):
    pts = rng.uniform(-0.4, 0.4, (4, 40, 2))
    z, info = project_points(pts, 0.05, 0.01)
    z2, info2 = project_points(pts, 0.05, 0.01, dual=info.dual)
    assert info2.iterations < info.iterations
    np.testing.assert_allclose(z2, z, atol=1e-6)


def test_project_warns_when_iteration_budget_is_exhausted(rng):
    spec = HardwareSpec()
    traj = Trajectory(rng.uniform(-0.5, 0.5, (2, 30, 2)))
    with pytest.warns(ProjectionWarning):
        out = project(traj, spec, max_iter=5)
    assert check_feasibility(out, spec).max_violation <= 1e-9


def test_project_accepts_converged_runs_silently(rng):
    spec = HardwareSpec(matrix_size=64)
    traj = Trajectory(rng.uniform(-0.1, 0.1, (2, 16, 2)), decimation=4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        out = project(traj, spec)
    assert out.decimation == 4
    assert check_feasibility(out, spec).max_violation <= 1e-9


def test_rejects_bad_shapes():
    with pytest.raises(ValueError):
        project_points(np.zeros((2, 2)), 0.1, 0.1)
    with pytest.raises(ValueError):
        project_points(np.zeros((1, 1, 2)), 0.1, 0.1)
    with pytest.raises(ValueError):
        check_points(np.zeros((1, 2, 2)), 0.1, 0.1)
