import math

import numpy as np
import pytest

from planar_pnp import harness
from planar_pnp.errors import NoCandidates
from planar_pnp.geometry import Pose2D, zyz_decompose
from planar_pnp.harness import (
    SWEEPS,
    ScenarioConfig,
    TrialRecord,
    generate_scene,
    median_of_means,
    metrics,
    random_mounting,
    run_sweep,
    summarize,
    trial_seed,
)
from planar_pnp.solver import solve


def test_config_validation():
    for bad in ({"n_points": 1}, {"noise_sigma_px": -1.0}, {"trials": 0},
                {"cuboid_min": (-2.0, -2.0, 0.0)}, {"beta_range_deg": (0.0, 90.0)}):
        with pytest.raises(ValueError):
            ScenarioConfig(**bad)


def test_zero_noise_scene_solves():
    for seed in range(10):
        req, truth = generate_scene(ScenarioConfig(n_points=10, noise_sigma_px=0.0), seed)
        sol = solve(req)
        trans, rot = metrics(sol.pose, truth)
        assert trans < 1e-8 and rot < 1e-8


def test_scene_bit_identical():
    cfg = ScenarioConfig(n_points=20)
    a, _ = generate_scene(cfg, trial_seed(5, 20, 3))
    b, _ = generate_scene(cfg, trial_seed(5, 20, 3))
    assert np.array_equal(a.world_points, b.world_points)
    assert np.array_equal(a.pixels, b.pixels)
    assert np.array_equal(a.camera_offset.rotation, b.camera_offset.rotation)


def test_points_uniform_in_cuboid():
    cfg = ScenarioConfig(n_points=10_000, noise_sigma_px=0.0)
    req, _ = generate_scene(cfg, 17)
    # truth is the identity pose, so world = -C @ cam
    cam = -req.world_points @ req.camera_offset.rotation
    lo, hi = np.array(cfg.cuboid_min), np.array(cfg.cuboid_max)
    assert np.all(cam >= lo - 1e-9) and np.all(cam <= hi + 1e-9)
    se = (hi - lo) / math.sqrt(12) / math.sqrt(len(cam))
    assert np.all(np.abs(cam.mean(axis=0) - (lo + hi) / 2) < 3 * se)


def test_pixels_are_projections():
    cfg = ScenarioConfig(n_points=30, noise_sigma_px=0.0)
    req, _ = generate_scene(cfg, 4)
    cam = -req.world_points @ req.camera_offset.rotation
    assert req.pixels == pytest.approx(800.0 * cam[:, :2] / cam[:, 2:], rel=1e-12)


def test_mounting_pitch_in_range():
    rng = np.random.default_rng(0)
    for _ in range(500):
        _, beta, _ = zyz_decompose(random_mounting(rng, (10.0, 170.0)))
        assert math.radians(10) <= beta <= math.radians(170)


def test_metrics_examples():
    assert metrics(Pose2D(1, 2, 0.3), Pose2D(1, 2, 0.3)) == (0.0, 0.0)
    trans, rot = metrics(Pose2D(1, 0, math.pi - 0.1), Pose2D(0, 0, -math.pi + 0.1))
    assert trans == pytest.approx(1.0) and rot == pytest.approx(0.2)


def test_metrics_range(rng):
    for _ in range(10_000):
        a, b = rng.uniform(-10, 10, size=(2, 3))
        _, rot = metrics(Pose2D(*a), Pose2D(*b))
        assert 0.0 <= rot <= math.pi


def test_trial_seed_distinct():
    states = {tuple(trial_seed(0, v, t).generate_state(2)) for v in (1.0, 2.0) for t in range(3)}
    assert len(states) == 6


def test_median_of_means():
    assert median_of_means([1, 1, 2, 2, 100, 100, 3, 3, 4, 4]) == pytest.approx(3.0)


def test_summarize_excludes_failures():
    recs = [TrialRecord(0, 1.0, 0.1, 0.5, True), TrialRecord(1, 3.0, 0.3, 0.7, True),
            TrialRecord(2, math.nan, math.nan, 0.1, False, failed=True)]
    row = summarize(10, recs, timed=False)
    assert (row.mean_translational_error, row.mean_rotational_error) == pytest.approx((2.0, 0.2))
    assert row.failure_count == 1 and row.trials == 3 and math.isnan(row.mean_time)


def test_sweep_grids():
    assert SWEEPS["points"][1] == tuple(range(10, 201, 10))
    assert SWEEPS["noise"][1] == tuple(float(s) for s in range(1, 11))
    assert SWEEPS["timing"][1] == tuple(range(50, 1001, 50))


def test_sweep_rows_and_determinism():
    cfg = ScenarioConfig(trials=3, master_seed=7)
    a = run_sweep("points", cfg, values=[10, 20])
    b = run_sweep("points", cfg, values=[20, 10])
    assert [r.swept_value for r in a] == [10, 20]
    # per-trial seeds make each row independent of the order values run in
    assert a[0].mean_translational_error == b[1].mean_translational_error
    assert all(math.isnan(r.mean_time) for r in a)
    assert all(r.trials == 3 and len(r.records) == 3 for r in a)


def test_timing_sweep_records_time():
    rows = run_sweep("timing", ScenarioConfig(trials=2), values=[50])
    assert rows[0].mean_time > 0


def test_zero_noise_sweep_exact():
    rows = run_sweep("noise", ScenarioConfig(trials=20), values=[0.0])
    for r in rows[0].records:
        assert r.converged and r.translational_error < 1e-6 and r.rotational_error < 1e-8


def test_failed_trials_counted(monkeypatch):
    def broken(req):
        raise NoCandidates("no roots")

    monkeypatch.setattr(harness, "solve", broken)
    row = run_sweep("noise", ScenarioConfig(trials=2), values=[1.0])[0]
    assert row.failure_count == 2 and math.isnan(row.mean_translational_error)


def test_unknown_sweep():
    with pytest.raises(ValueError):
        run_sweep("bogus")


def test_repeated_timing_keeps_fastest(monkeypatch):
    clock = iter([0.0, 5.0, 10.0, 11.0, 20.0, 23.0])
    monkeypatch.setattr(harness.time, "perf_counter", lambda: next(clock))
    rec = harness.run_trial(ScenarioConfig(n_points=10), 1, repeats=3)
    assert rec.solve_time == 1.0 and not rec.failed
