"""Reprojection residuals, squared error and the analytic Jacobian.

Residuals are ordered ``(r1x, r1y, r2x, r2y, ...)`` and Jacobian columns are
``(d/dx, d/dy, d/dtheta)``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ProjectionSingular
from .geometry import DEPTH_EPS, Pose2D


def _terms(pose: Pose2D, beta: float, points):
    p = np.asarray(points, dtype=float)
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    cb, sb = math.cos(beta), math.sin(beta)
    dx = pose.x - p[:, 0]
    dy = pose.y - p[:, 1]
    pz = p[:, 2]
    a = dx * c + dy * s
    b = dy * c - dx * s
    depth = a * sb - pz * cb
    bad = np.flatnonzero(np.abs(depth) < DEPTH_EPS)
    if bad.size:
        raise ProjectionSingular(f"point {int(bad[0])} lies on the camera's principal plane")
    return c, s, cb, sb, pz, a, b, depth


def residuals(pose: Pose2D, beta: float, points, observations) -> np.ndarray:
    """Observed minus predicted normalized image coordinates, length ``2n``."""
    _, _, cb, sb, pz, a, b, depth = _terms(pose, beta, points)
    obs = np.asarray(observations, dtype=float)
    out = np.empty(2 * len(depth))
    out[0::2] = obs[:, 0] - (a * cb + pz * sb) / depth
    out[1::2] = obs[:, 1] - b / depth
    return out


def error(pose: Pose2D, beta: float, points, observations) -> float:
    r = residuals(pose, beta, points, observations)
    return float(r @ r)


def jacobian(pose: Pose2D, beta: float, points) -> np.ndarray:
    """Analytic ``2n x 3`` Jacobian of :func:`residuals` w.r.t. ``(x, y, theta)``.

    With ``a = dx c + dy s``, ``b = dy c - dx s`` and ``D = a sb - pz cb``::

        d(qx) = -pz * d(a) / D**2
        d(qy) = (d(b) * D - b * sb * d(a)) / D**2

    where ``d(a) = (c, s, b)`` and ``d(b) = (-s, c, -a)``.  Residuals are
    observation minus prediction, hence the overall sign flip.
    """
    c, s, cb, sb, pz, a, b, depth = _terms(pose, beta, points)
    inv_d2 = 1.0 / (depth * depth)
    gx = pz * inv_d2
    bs = b * sb
    jac = np.empty((len(depth), 2, 3))
    jac[:, 0, 0] = gx * c
    jac[:, 0, 1] = gx * s
    jac[:, 0, 2] = gx * b
    jac[:, 1, 0] = (s * depth + bs * c) * inv_d2
    jac[:, 1, 1] = (bs * s - c * depth) * inv_d2
    jac[:, 1, 2] = (a * depth + bs * b) * inv_d2
    return jac.reshape(-1, 3)
