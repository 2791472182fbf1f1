"""Acceptance criteria, one test each, with tolerances pinned from the contract.

Every test logs a single ``criterion N PASS|FAIL ...`` line; the lines are
repeated in the terminal summary.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from planar_pnp import reprojection
from planar_pnp.cli import main
from planar_pnp.geometry import Pose2D, wrap_angle
from planar_pnp.harness import ScenarioConfig, generate_scene, metrics, run_sweep, trial_seed
from planar_pnp.polysolve import Poly1D, build_system, real_roots, resultant_fit, tail_ratio
from planar_pnp.refiner import Termination
from planar_pnp.solver import prepare, solve

from conftest import ACCEPTANCE_LINES
from oracles import sign_scan_roots

pytestmark = pytest.mark.slow


def record(number, title, ok, detail):
    line = f"criterion {number} {'PASS' if ok else 'FAIL'} {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def spearman(a, b):
    ra = np.argsort(np.argsort(a))
    rb = np.argsort(np.argsort(b))
    return float(np.corrcoef(ra, rb)[0, 1])


def scenes(n, sigma, count, master_seed):
    cfg = ScenarioConfig(n_points=n, noise_sigma_px=sigma)
    for t in range(count):
        yield generate_scene(cfg, trial_seed(master_seed, n, t))


def test_c01_zero_noise_recovery():
    worst_t = worst_r = 0.0
    failures = 0
    start = time.perf_counter()
    for req, truth in scenes(10, 0.0, 1000, 101):
        try:
            sol = solve(req)
        except Exception:
            failures += 1
            continue
        t, r = metrics(sol.pose, truth)
        worst_t, worst_r = max(worst_t, t), max(worst_r, r)
    elapsed = time.perf_counter() - start
    ok = failures == 0 and worst_t < 1e-6 and worst_r < 1e-8 and elapsed < 10.0
    record(1, "zero-noise exact recovery", ok,
           f"max trans {worst_t:.2e} (<1e-6), max heading {worst_r:.2e} (<1e-8), "
           f"failures {failures}, {elapsed:.2f} s (<10 s)")


def test_c02_jacobian_finite_differences():
    rng = np.random.default_rng(202)
    worst = 0.0
    for req, _ in scenes(15, 2.0, 100, 202):
        q, _, _ = prepare(req)
        beta, p = req.camera_offset.beta, req.world_points
        pose = Pose2D(*rng.normal(scale=0.3, size=2), req.camera_offset.alpha + rng.normal(scale=0.2))
        J = reprojection.jacobian(pose, beta, p)
        base = pose.as_array()
        cols = []
        for j in range(3):
            h = 1e-6 * (1.0 + abs(base[j]))
            up, dn = base.copy(), base.copy()
            up[j] += h
            dn[j] -= h
            cols.append((reprojection.residuals(Pose2D(*up), beta, p, q)
                         - reprojection.residuals(Pose2D(*dn), beta, p, q)) / (2 * h))
        fd = np.column_stack(cols)
        diff = np.abs(J - fd)
        rel = np.where(np.abs(fd) < 1e-8, diff, diff / np.maximum(np.abs(fd), 1e-8))
        worst = max(worst, float(rel.max()))
    record(2, "Jacobian vs central differences", worst < 1e-5,
           f"max relative discrepancy {worst:.2e} over 100 scene/pose pairs (<1e-5)")


def test_c03_resultant_degree_collapse():
    worst = 0.0
    for req, _ in scenes(20, 2.0, 1000, 303):
        _, _, phi_i = prepare(req)
        sys = build_system(req.world_points, -phi_i)
        for axis in ("x", "y"):
            fit = resultant_fit(sys, axis)
            assert len(fit.coeffs) == 10
            worst = max(worst, tail_ratio(fit))
    record(3, "resultant degree collapse", worst < 1e-8,
           f"max |coeff deg 6-9| / max|coeff| = {worst:.2e} over 1000 systems x 2 resultants (<1e-8)")


def test_c04_root_completeness():
    rng = np.random.default_rng(404)
    worst_miss = 0.0
    spurious = 0
    for _ in range(1000):
        deg = int(rng.integers(1, 6))
        coeffs = rng.normal(size=deg + 1)
        oracle, _ = sign_scan_roots(coeffs)
        found = real_roots(Poly1D(coeffs))
        for r in oracle:
            worst_miss = max(worst_miss, min((abs(r - f) for f in found), default=math.inf))
        for f in found:
            if not oracle or min(abs(f - r) for r in oracle) > 1e-8 * (1 + abs(f)):
                spurious += 1
    ok = worst_miss < 1e-8 and spurious == 0
    record(4, "real-root completeness", ok,
           f"max oracle-to-found distance {worst_miss:.2e} (<1e-8), spurious roots {spurious} (0)")


def test_c05_candidate_bounds():
    max_pairs = max_poses = 0
    for req, _ in scenes(50, 2.0, 250, 505):
        sol = solve(req)
        d = sol.init_diagnostics
        max_pairs = max(max_pairs, d.n_position_candidates)
        max_poses = max(max_poses, d.n_pose_candidates)
    ok = max_pairs <= 25 and max_poses <= 50
    record(5, "candidate bounds", ok,
           f"max position pairs {max_pairs} (<=25), max pose candidates {max_poses} (<=50), 250 trials")


def test_c06_noise_monotonicity():
    rows = run_sweep("noise", ScenarioConfig(trials=250, master_seed=606))
    sigma = [r.swept_value for r in rows]
    rho_t = spearman(sigma, [r.mean_translational_error for r in rows])
    rho_r = spearman(sigma, [r.mean_rotational_error for r in rows])
    ok = rho_t > 0.9 and rho_r > 0.9
    record(6, "noise monotonicity", ok,
           f"Spearman trans {rho_t:.3f}, rot {rho_r:.3f} (>0.9), sigma 1..10, 250 trials/row")


def test_c07_point_count_benefit():
    # per-trial seeds make these rows identical to the full sweep's end rows
    lo, hi = run_sweep("points", ScenarioConfig(trials=250, master_seed=707), values=[10, 200])
    ratio = hi.mean_translational_error / lo.mean_translational_error
    record(7, "point-count benefit", ratio <= 0.6,
           f"mean trans n=200 {hi.mean_translational_error:.4g} / n=10 "
           f"{lo.mean_translational_error:.4g} = {ratio:.3f} (<=0.6)")


def test_c08_linear_time():
    rows = run_sweep("timing", ScenarioConfig(trials=250, master_seed=808))
    n = np.array([r.swept_value for r in rows], dtype=float)
    t = np.array([r.mean_time for r in rows])
    X = np.column_stack([n, np.ones_like(n)])
    coef, *_ = np.linalg.lstsq(X, t, rcond=None)
    r2 = 1.0 - np.sum((t - X @ coef) ** 2) / np.sum((t - t.mean()) ** 2)
    ratio = t[n == 1000][0] / t[n == 100][0]
    ok = r2 > 0.95 and ratio < 15
    record(8, "linear time", ok, f"R^2 {r2:.4f} (>0.95), t(1000)/t(100) {ratio:.2f} (<15)")


def test_c09_initializer_quality():
    good = 0
    for req, _ in scenes(50, 2.0, 1000, 909):
        res = solve(req).refine_result
        good += res.converged and res.termination_reason in (Termination.GRADIENT, Termination.STEP)
    record(9, "initializer quality", good >= 990,
           f"{good}/1000 converged by gradient or step (>=990)")


def test_c10_heading_prior_path():
    worst = 0.0
    for k, (req, truth) in enumerate(scenes(10, 0.0, 250, 1010)):
        prior = truth.theta + math.radians(2.0 if k % 2 else -2.0)
        full = solve(req).pose
        with_prior = solve(dataclasses.replace(req, heading_prior=prior)).pose
        worst = max(worst, abs(full.x - with_prior.x), abs(full.y - with_prior.y),
                    abs(wrap_angle(full.theta - with_prior.theta)))

    errs = {"full": [], "prior": []}
    for k, (req, truth) in enumerate(scenes(50, 2.0, 250, 1011)):
        prior = truth.theta + math.radians(2.0 if k % 2 else -2.0)
        errs["full"].append(metrics(solve(req).pose, truth))
        errs["prior"].append(metrics(solve(dataclasses.replace(req, heading_prior=prior)).pose, truth))
    full_m = np.mean(errs["full"], axis=0)
    prior_m = np.mean(errs["prior"], axis=0)
    rel = np.abs(prior_m - full_m) / full_m
    ok = worst < 1e-8 and np.all(rel <= 0.10)
    record(10, "heading-prior path", ok,
           f"zero-noise max diff {worst:.2e} (<1e-8); sigma=2 mean trans/rot differ by "
           f"{rel[0]:.1%}/{rel[1]:.1%} (<=10%)")


def bench_bytes(tmp_path, kind, trials, tag):
    out = tmp_path / f"{kind}-{tag}.csv"
    assert main(["bench", kind, "--seed", "11", "--trials", str(trials), "--out", str(out)]) == 0
    return out.read_bytes()


def test_c11_determinism_points_noise(tmp_path):
    same = {}
    for kind in ("points", "noise"):
        same[kind] = bench_bytes(tmp_path, kind, 25, "a") == bench_bytes(tmp_path, kind, 25, "b")
    record(11, "determinism (points, noise)", all(same.values()),
           ", ".join(f"{k} byte-identical={v}" for k, v in same.items()))


@pytest.mark.xfail(strict=True, reason="mean_time_s is measured wall-clock time and cannot repeat "
                                       "bit for bit; every other column does")
def test_c11_determinism_time(tmp_path):
    a = bench_bytes(tmp_path, "time", 2, "a").decode().splitlines()
    b = bench_bytes(tmp_path, "time", 2, "b").decode().splitlines()
    strip = [[",".join(c for i, c in enumerate(line.split(",")) if i != 3) for line in rows]
             for rows in (a, b)]
    assert strip[0] == strip[1], "columns other than mean_time_s differ"
    identical = a == b
    line = (f"criterion 11 {'PASS' if identical else 'FAIL'} determinism (time): "
            f"byte-identical={identical}; all columns but mean_time_s identical=True (expected failure)")
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert identical
