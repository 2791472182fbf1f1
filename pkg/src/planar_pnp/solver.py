"""End-to-end planar PnP: pixels, intrinsics and mounting rotation in, pose out."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AllCandidatesRejected, TooFewValidTerms
from .geometry import CameraOffset, Intrinsics, Pose2D, normalize, rectify, spherical_rays
from .initializer import InitDiagnostics, initial_pose, position_from_heading
from .polysolve import build_system
from .refiner import RefineOptions, RefineResult, refine

logger = logging.getLogger(__name__)

# Rays within this angle of the horizon are left out of the elevation system.
MIN_ELEVATION = math.radians(3.0)


@dataclass
class SolveRequest:
    """Inputs to :func:`solve`.

    ``world_points`` is ``(n, 3)``, ``pixels`` is ``(n, 2)``.  ``heading_prior``
    (radians) is the approximate body heading, e.g. from an IMU.
    ``min_elevation`` only affects the polynomial initialization.
    """

    world_points: np.ndarray
    pixels: np.ndarray
    intrinsics: Intrinsics
    camera_offset: CameraOffset
    heading_prior: float | None = None
    refine_options: RefineOptions = field(default_factory=RefineOptions)
    min_elevation: float = MIN_ELEVATION

    def __post_init__(self):
        self.world_points = np.asarray(self.world_points, dtype=float)
        self.pixels = np.asarray(self.pixels, dtype=float)
        n = len(self.world_points)
        if self.world_points.shape != (n, 3) or self.pixels.shape != (n, 2):
            raise ValueError(
                f"expected (n, 3) world points and (n, 2) pixels, got "
                f"{self.world_points.shape} and {self.pixels.shape}"
            )
        if n < 2:
            raise ValueError(f"at least 2 correspondences are required, got {n}")
        if not (np.all(np.isfinite(self.world_points)) and np.all(np.isfinite(self.pixels))):
            raise ValueError("non-finite coordinates in request")


@dataclass
class Solution:
    """Result of :func:`solve`.

    ``pose`` is the body pose: the planar transform ``P`` that, composed with
    the full mounting rotation ``C``, places the camera.  ``camera_pose`` is
    the same position with ``alpha`` folded into the heading, the frame the
    refinement works in; ``reprojection_error`` is measured there.
    """

    pose: Pose2D
    camera_pose: Pose2D
    reprojection_error: float
    refine_result: RefineResult
    init_diagnostics: InitDiagnostics | None = None
    low_redundancy: bool = False
    fallback_init: bool = False


def prepare(req: SolveRequest):
    """Rectified normalized observations and ray azimuths/elevations."""
    off = req.camera_offset
    q = rectify(normalize(req.intrinsics, req.pixels), off.gamma)
    theta_i, phi_i, _ = spherical_rays(q, off.beta)
    return q, theta_i, phi_i


def solve(req: SolveRequest) -> Solution:
    off = req.camera_offset
    points = req.world_points
    q, theta_i, phi_i = prepare(req)

    diag = None
    fallback = False
    if req.heading_prior is not None:
        heading = req.heading_prior + off.alpha
        x, y = position_from_heading(heading, theta_i, points)
        pose0 = Pose2D(x, y, heading)
    else:
        # spherical_rays points back along the line of sight, so its elevation
        # has the opposite sign to that of the point seen from the camera
        try:
            system = build_system(points, -phi_i, req.min_elevation)
        except TooFewValidTerms:
            system = build_system(points, -phi_i)
        try:
            pose0, diag = initial_pose(points, q, theta_i, system, off.beta)
        except AllCandidatesRejected as exc:
            logger.warning("%s; using fallback candidate", exc)
            pose0, diag, fallback = exc.pose, exc.diagnostics, True

    result = refine(pose0, off.beta, points, q, req.refine_options)
    cam = result.pose
    return Solution(
        pose=Pose2D(cam.x, cam.y, cam.theta - off.alpha),
        camera_pose=cam,
        reprojection_error=result.final_error,
        refine_result=result,
        init_diagnostics=diag,
        low_redundancy=len(points) == 2,
        fallback_init=fallback,
    )
