"""Levenberg-Marquardt refinement of the planar pose."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import reprojection
from .errors import NumericalFailure, ProjectionSingular
from .geometry import Pose2D

MAX_DAMPING = 1e12


class Termination(str, Enum):
    GRADIENT = "gradient"
    STEP = "step"
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class RefineOptions:
    max_iterations: int = 100
    gradient_tolerance: float = 1e-12
    step_tolerance: float = 1e-10
    initial_damping: float = 1e-3
    damping_up_factor: float = 10.0
    damping_down_factor: float = 10.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class RefineResult:
    pose: Pose2D
    final_error: float
    iterations: int
    converged: bool
    termination_reason: Termination
    initial_error: float = float("nan")


def refine(pose0: Pose2D, beta: float, points, observations,
           opts: RefineOptions | None = None) -> RefineResult:
    """Minimize the reprojection error over ``(x, y, theta)`` starting at ``pose0``.

    Each iteration solves ``(J'J + lam * diag(J'J)) step = -J'r``; the step is
    accepted only if the error drops (then ``lam`` shrinks), otherwise ``lam``
    grows and the system is re-solved.  Stops when ``max|J'r|`` falls below
    the gradient tolerance, when the step is shorter than
    ``step_tolerance * (1 + |pose|)``, or after ``max_iterations`` solves.
    """
    opts = opts or RefineOptions()
    pose = pose0
    r = reprojection.residuals(pose, beta, points, observations)
    err = float(r @ r)
    initial_error = err
    lam = opts.initial_damping
    iterations = 0

    def result(reason, converged=True):
        return RefineResult(pose, err, iterations, converged, reason, initial_error)

    jac = reprojection.jacobian(pose, beta, points)
    while True:
        grad = jac.T @ r
        if np.max(np.abs(grad)) < opts.gradient_tolerance:
            return result(Termination.GRADIENT)
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        diag = np.maximum(diag, 1e-12 * max(diag.max(), 1e-300))
        while True:
            if iterations >= opts.max_iterations:
                return result(Termination.MAX_ITER, converged=False)
            iterations += 1
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                step = None
            if step is None or not np.all(np.isfinite(step)):
                lam *= opts.damping_up_factor
                if lam >= MAX_DAMPING:
                    raise NumericalFailure("damped normal equations are singular",
                                           result(Termination.MAX_ITER, converged=False))
                continue
            current = pose.as_array()
            if np.linalg.norm(step) < opts.step_tolerance * (1.0 + np.linalg.norm(current)):
                return result(Termination.STEP)
            trial = Pose2D.from_array(current + step)
            try:
                r_trial = reprojection.residuals(trial, beta, points, observations)
                err_trial = float(r_trial @ r_trial)
            except ProjectionSingular:
                err_trial = np.inf
            if err_trial < err:
                pose, r, err = trial, r_trial, err_trial
                lam = max(lam / opts.damping_down_factor, 1e-300)
                jac = reprojection.jacobian(pose, beta, points)
                break
            lam *= opts.damping_up_factor
