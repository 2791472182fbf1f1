"""Camera model and coordinate conventions.

World frame: z is up and the camera origin sits at ``(x, y, 0)``.  The camera
mounting rotation ``C`` factors as ``Rz(alpha) @ Ry(beta) @ Rz(gamma)``; the
``alpha`` factor is folded into the planar pose, ``gamma`` is removed by
rotating the image points (rectification), leaving ``beta`` as the pitch.

For a planar pose ``(x, y, theta)`` and pitch ``beta`` a world point ``p``
projects as::

    dx, dy = x - p_x, y - p_y
    a      = dx cos(theta) + dy sin(theta)
    depth  = a sin(beta) - p_z cos(beta)
    q_x    = (a cos(beta) + p_z sin(beta)) / depth
    q_y    = (dy cos(theta) - dx sin(theta)) / depth

A point is visible when ``depth > 0``.  With ``theta = 0``, ``beta = pi/2`` the
optical axis points along world -x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegenerateRotation, ProjectionSingular

GIMBAL_EPS = 1e-9
DEPTH_EPS = 1e-12


def wrap_angle(angle):
    """Wrap an angle (scalar or array) to the half-open interval (-pi, pi]."""
    if isinstance(angle, (float, int)):
        # Python's float modulo, like np.mod, takes the sign of the divisor
        return float(math.pi - (math.pi - angle) % (2.0 * math.pi))
    wrapped = math.pi - np.mod(math.pi - np.asarray(angle, dtype=float), 2.0 * math.pi)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def zyz_compose(alpha: float, beta: float, gamma: float) -> np.ndarray:
    return rot_z(alpha) @ rot_y(beta) @ rot_z(gamma)


def zyz_decompose(rotation) -> tuple[float, float, float]:
    """Split a rotation into ZYZ Euler angles ``(alpha, beta, gamma)``.

    ``beta`` is returned in (0, pi).  Raises :class:`DegenerateRotation` when
    ``|sin(beta)| < 1e-9``: the optical axis is then normal to the plane of
    motion and the planar heading is undefined.
    """
    m = np.asarray(rotation, dtype=float)
    sin_beta = math.hypot(m[0, 2], m[1, 2])
    if sin_beta < GIMBAL_EPS:
        raise DegenerateRotation(
            f"camera axis is perpendicular to the plane of motion (sin(beta)={sin_beta:.3g})"
        )
    beta = math.atan2(sin_beta, m[2, 2])
    alpha = math.atan2(m[1, 2], m[0, 2])
    gamma = math.atan2(m[2, 1], -m[2, 0])
    return alpha, beta, gamma


def quaternion_to_rotation(w: float, x: float, y: float, z: float) -> np.ndarray:
    q = np.array([w, x, y, z], dtype=float)
    norm = np.linalg.norm(q)
    if norm == 0.0:
        raise ValueError("zero quaternion")
    w, x, y, z = q / norm
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


class WorldPoint(NamedTuple):
    x: float
    y: float
    z: float


class PixelPoint(NamedTuple):
    u: float
    v: float


class NormalizedImagePoint(NamedTuple):
    qx: float
    qy: float


class Correspondence(NamedTuple):
    """A world point and its (already rectified) normalized observation."""

    world: WorldPoint
    image: NormalizedImagePoint


class RectifiedRay(NamedTuple):
    theta_i: float
    phi_i: float
    r_i: float


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float = 0.0
    cy: float = 0.0

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")


@dataclass(frozen=True)
class Pose2D:
    """Planar camera pose; ``theta`` is wrapped to (-pi, pi] on construction."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(self.theta))
        if not all(math.isfinite(v) for v in (self.x, self.y, self.theta)):
            raise ValueError(f"non-finite pose {self!r}")

    @classmethod
    def from_array(cls, values) -> "Pose2D":
        x, y, theta = values
        return cls(x, y, theta)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous transform of this pose (rotation about z, translation in xy)."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([
            [c, -s, 0.0, self.x],
            [s, c, 0.0, self.y],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])


@dataclass(frozen=True)
class CameraOffset:
    """Known mounting rotation of the camera together with its ZYZ angles."""

    rotation: np.ndarray = field(repr=False)
    alpha: float
    beta: float
    gamma: float

    @classmethod
    def from_rotation(cls, rotation, tol: float = 1e-6) -> "CameraOffset":
        m = np.array(rotation, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got shape {m.shape}")
        if not np.allclose(m @ m.T, np.eye(3), atol=tol) or abs(np.linalg.det(m) - 1.0) > tol:
            raise ValueError("rotation is not orthonormal with determinant +1")
        alpha, beta, gamma = zyz_decompose(m)
        m.setflags(write=False)
        return cls(m, alpha, beta, gamma)

    @classmethod
    def from_quaternion(cls, w, x, y, z) -> "CameraOffset":
        return cls.from_rotation(quaternion_to_rotation(w, x, y, z))

    @classmethod
    def from_euler(cls, alpha, beta, gamma) -> "CameraOffset":
        return cls.from_rotation(zyz_compose(alpha, beta, gamma))


# -- image-plane operations -------------------------------------------------

def normalize(intr: Intrinsics, pixels) -> np.ndarray:
    """Map pixel coordinates, shape ``(..., 2)``, onto the normalized image plane."""
    pix = np.asarray(pixels, dtype=float)
    return np.stack([(pix[..., 0] - intr.cx) / intr.fx, (pix[..., 1] - intr.cy) / intr.fy], axis=-1)


def denormalize(intr: Intrinsics, points) -> np.ndarray:
    q = np.asarray(points, dtype=float)
    return np.stack([q[..., 0] * intr.fx + intr.cx, q[..., 1] * intr.fy + intr.cy], axis=-1)


def rectify(q, gamma: float) -> np.ndarray:
    """Rotate normalized image points about the optical axis by ``gamma``.

    This is the xy part of ``Rz(gamma) @ (qx, qy, 1)``; the third coordinate
    stays exactly 1.
    """
    q = np.asarray(q, dtype=float)
    c, s = math.cos(gamma), math.sin(gamma)
    return np.stack([c * q[..., 0] - s * q[..., 1], s * q[..., 0] + c * q[..., 1]], axis=-1)


def spherical_rays(q_prime, beta: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Azimuth, elevation and norm of ``Ry(beta) @ (qx', qy', 1)`` for each point."""
    q = np.atleast_2d(np.asarray(q_prime, dtype=float))
    cb, sb = math.cos(beta), math.sin(beta)
    vx = cb * q[:, 0] + sb
    vy = q[:, 1]
    vz = cb - sb * q[:, 0]
    r = np.sqrt(vx * vx + vy * vy + vz * vz)
    return np.arctan2(vy, vx), np.arcsin(vz / r), r


def spherical_ray(q_prime, beta: float) -> RectifiedRay:
    theta, phi, r = spherical_rays([q_prime], beta)
    return RectifiedRay(float(theta[0]), float(phi[0]), float(r[0]))


# -- projection -------------------------------------------------------------

def project_raw(pose_xy_theta, beta: float, points) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized projection without the singularity check.

    ``pose_xy_theta`` may be a :class:`Pose2D`, a length-3 sequence, or an
    array of shape ``(k, 3)`` of poses; the result then has a leading pose axis.
    Returns ``(q, depth)`` with ``q[..., 0:2]`` the normalized image points.
    """
    if isinstance(pose_xy_theta, Pose2D):
        pose_xy_theta = pose_xy_theta.as_array()
    pose = np.asarray(pose_xy_theta, dtype=float)
    p = np.asarray(points, dtype=float)
    x, y, th = pose[..., 0, None], pose[..., 1, None], pose[..., 2, None]
    c, s = np.cos(th), np.sin(th)
    dx = x - p[:, 0]
    dy = y - p[:, 1]
    pz = p[:, 2]
    cb, sb = math.cos(beta), math.sin(beta)
    a = dx * c + dy * s
    depth = a * sb - pz * cb
    with np.errstate(divide="ignore", invalid="ignore"):
        qx = (a * cb + pz * sb) / depth
        qy = (dy * c - dx * s) / depth
    return np.stack([qx, qy], axis=-1), depth


def project_points(pose: Pose2D, beta: float, points) -> tuple[np.ndarray, np.ndarray]:
    """Project an ``(n, 3)`` array of world points; raises on zero depth."""
    q, depth = project_raw(pose, beta, points)
    bad = np.flatnonzero(np.abs(depth) < DEPTH_EPS)
    if bad.size:
        raise ProjectionSingular(f"point {int(bad[0])} lies on the camera's principal plane")
    return q, depth


def project(pose: Pose2D, beta: float, p) -> tuple[NormalizedImagePoint, float]:
    q, depth = project_points(pose, beta, [p])
    return NormalizedImagePoint(float(q[0, 0]), float(q[0, 1])), float(depth[0])


def camera_to_world(pose: Pose2D, rotation, camera_points) -> np.ndarray:
    """Place points given in camera space (third coordinate = depth) into the world.

    Inverse of the projection chain: a camera-space point ``c`` with
    ``c_z > 0`` lands at a world point with positive depth that images to
    ``(c_x / c_z, c_y / c_z)``.  ``rotation`` is the full mounting rotation.
    """
    c = np.asarray(camera_points, dtype=float)
    local = -c @ np.asarray(rotation, dtype=float).T
    hom = np.hstack([local, np.ones((len(local), 1))])
    return (hom @ pose.matrix().T)[:, :3]


def project_homogeneous(pose: Pose2D, rotation, points) -> np.ndarray:
    """Project through the full chain ``(P @ blockdiag(C, 1))^-1`` and divide.

    Unlike :func:`project_points` this takes the full mounting rotation and
    unrectified output; used for scene generation.
    """
    p = np.asarray(points, dtype=float)
    hom = np.hstack([p, np.ones((len(p), 1))])
    rig = pose.matrix() @ np.block([[np.asarray(rotation, dtype=float), np.zeros((3, 1))],
                                    [np.zeros((1, 3)), np.ones((1, 1))]])
    cam = (hom @ np.linalg.inv(rig).T)[:, :3]
    return cam[:, :2] / cam[:, 2:]
