"""Planar perspective-n-point: pose (x, y, heading) of a camera moving in a plane."""

from .errors import (
    AllCandidatesRejected,
    DegeneratePosition,
    DegenerateResultant,
    DegenerateRotation,
    NoCandidates,
    NumericalFailure,
    PlanarPnPError,
    ProjectionSingular,
    RankDeficient,
    TooFewValidTerms,
    ZeroPolynomial,
)
from .geometry import CameraOffset, Intrinsics, Pose2D
from .refiner import RefineOptions, RefineResult
from .solver import Solution, SolveRequest, solve

__all__ = [
    "AllCandidatesRejected",
    "CameraOffset",
    "DegeneratePosition",
    "DegenerateResultant",
    "DegenerateRotation",
    "Intrinsics",
    "NoCandidates",
    "NumericalFailure",
    "PlanarPnPError",
    "Pose2D",
    "ProjectionSingular",
    "RankDeficient",
    "RefineOptions",
    "RefineResult",
    "Solution",
    "SolveRequest",
    "TooFewValidTerms",
    "ZeroPolynomial",
    "solve",
]
