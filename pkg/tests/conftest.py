from pathlib import Path

import numpy as np
import pytest

from planar_pnp.harness import ScenarioConfig, generate_scene
from planar_pnp.solver import prepare

FIXTURES = Path(__file__).parent / "fixtures"


def make_scene(n=10, sigma=0.0, seed=0, **kw):
    """Harness scene plus the rectified observations the internals work on."""
    req, truth = generate_scene(ScenarioConfig(n_points=n, noise_sigma_px=sigma, **kw), seed)
    q, theta_i, phi_i = prepare(req)
    return req, truth, q, theta_i, phi_i


def internal_truth(req):
    """Ground truth in the frame the solver works in (alpha folded into theta)."""
    from planar_pnp.geometry import Pose2D

    return Pose2D(0.0, 0.0, req.camera_offset.alpha)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
