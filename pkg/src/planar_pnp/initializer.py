"""Initial pose from the cubic system, or from a known heading.

Each candidate position gets two headings from harmonic addition of the
azimuth agreements ``sum_i cos(theta + theta_i - atan2(dy_i, dx_i))``; all
candidate poses are then ranked by reprojection error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AllCandidatesRejected, DegeneratePosition, RankDeficient
from .geometry import DEPTH_EPS, Pose2D, project_raw, wrap_angle
from .polysolve import CubicSystem, candidate_positions

RANK_COND = 1e12
SCORE_BLOCK = 4096  # pose x point pairs scored per block


@dataclass(frozen=True)
class CandidatePose:
    pose: Pose2D
    reproj_error: float
    depth_violations: int


@dataclass
class InitDiagnostics:
    n_position_candidates: int
    n_pose_candidates: int
    chosen_index: int
    candidates: list[CandidatePose] = field(default_factory=list, repr=False)


def _heading_offsets(xy, theta_i, points) -> tuple[np.ndarray, np.ndarray]:
    """``delta`` for each row of ``xy``, plus the total weight (0 when degenerate)."""
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    p = np.asarray(points, dtype=float)
    dx = xy[:, 0, None] - p[:, 0]
    dy = xy[:, 1, None] - p[:, 1]
    rho = np.hypot(dx, dy)
    with np.errstate(divide="ignore"):
        w = np.where(rho > 0.0, 1.0 / rho, 0.0)
    ci, si = np.cos(theta_i), np.sin(theta_i)
    num = np.sum(w * (dx * si - dy * ci), axis=1)
    den = np.sum(w * (dx * ci + dy * si), axis=1)
    return np.arctan2(num, den), np.count_nonzero(w, axis=1)


def heading_candidates(x: float, y: float, theta_i, points) -> tuple[float, float]:
    """The two stationary headings ``(-delta, pi - delta)`` of the azimuth agreement.

    ``theta_i`` are the ray azimuths in the plane-aligned camera frame; the
    first heading maximizes the agreement, the second minimizes it.
    """
    delta, used = _heading_offsets([(x, y)], theta_i, points)
    if used[0] == 0:
        raise DegeneratePosition(f"all points coincide with ({x}, {y}) in the plane")
    d = float(delta[0])
    return wrap_angle(-d), wrap_angle(math.pi - d)


def position_from_heading(theta: float, theta_i, points) -> tuple[float, float]:
    """Least-squares position given the heading.

    Minimizes the summed squared distances, in the plane, between each
    point and the camera ray through it:
    ``sum(((x - px) sin(theta + theta_i) - (y - py) cos(theta + theta_i))**2)``.
    """
    p = np.asarray(points, dtype=float)
    ang = theta + np.asarray(theta_i, dtype=float)
    a = np.sin(ang)
    b = -np.cos(ang)
    d = a * p[:, 0] + b * p[:, 1]
    saa, sab, sbb = a @ a, a @ b, b @ b
    normal = np.array([[saa, sab], [sab, sbb]])
    if not np.all(np.isfinite(normal)) or np.linalg.cond(normal) > RANK_COND:
        raise RankDeficient("camera rays are all parallel; position is undetermined")
    ra, rb = a @ d, b @ d
    det = saa * sbb - sab * sab
    return float((sbb * ra - sab * rb) / det), float((saa * rb - sab * ra) / det)


def _raw_scores(poses, beta, points, observations):
    poses = np.asarray(poses, dtype=float)
    obs = np.asarray(observations, dtype=float)
    # score in blocks so pose-by-point temporaries stay small enough for the
    # allocator to recycle; one large block per call costs fresh pages each time
    step = max(1, SCORE_BLOCK // max(1, len(obs)))
    errs, viols = [], []
    for start in range(0, len(poses), step):
        q, depth = project_raw(poses[start:start + step], beta, points)
        viols.append(np.count_nonzero(depth <= DEPTH_EPS, axis=1))
        with np.errstate(invalid="ignore", over="ignore"):
            errs.append(np.sum((obs - q) ** 2, axis=(1, 2)))
    if not errs:
        return np.empty(0), np.empty(0, dtype=int)
    return np.nan_to_num(np.concatenate(errs), nan=np.inf), np.concatenate(viols)


def score_poses(poses, beta: float, points, observations) -> tuple[np.ndarray, np.ndarray]:
    """Reprojection error and depth-violation count for each row of ``poses``.

    Poses with any point at depth <= 0 get an error of +inf.
    """
    err, violations = _raw_scores(poses, beta, points, observations)
    return np.where(violations == 0, err, np.inf), violations


def initial_pose(points, observations, theta_i, sys: CubicSystem, beta: float):
    """Lowest-reprojection-error pose among all position/heading candidates.

    Returns ``(pose, diagnostics)``.  Candidates putting any point behind the
    camera are rejected; if all are, :class:`AllCandidatesRejected` carries the
    one with the fewest violations (then lowest finite-or-not error) as a
    fallback.  Ties go to the lowest candidate index.
    """
    positions = np.array(candidate_positions(sys), dtype=float)
    delta, _ = _heading_offsets(positions, theta_i, points)
    poses = np.repeat(np.column_stack([positions, np.zeros(len(positions))]), 2, axis=0)
    poses[0::2, 2] = wrap_angle(-delta)
    poses[1::2, 2] = wrap_angle(math.pi - delta)

    raw_err, violations = _raw_scores(poses, beta, points, observations)
    err = np.where(violations == 0, raw_err, np.inf)
    candidates = [
        CandidatePose(Pose2D(*row), float(e), int(v))
        for row, e, v in zip(poses, err, violations)
    ]
    if np.any(violations == 0):
        chosen = int(np.argmin(err))
        diag = InitDiagnostics(len(positions), len(poses), chosen, candidates)
        return candidates[chosen].pose, diag

    # np.lexsort is stable, so equal keys keep index order
    chosen = int(np.lexsort((raw_err, violations))[0])
    diag = InitDiagnostics(len(positions), len(poses), chosen, candidates)
    raise AllCandidatesRejected(
        f"all {len(poses)} candidate poses place points behind the camera",
        candidates[chosen].pose,
        diag,
    )
