"""Stationary points of the linearized elevation error.

Each retained point contributes ``(k_i * s_i - m_i)**2`` to the error, with
``s_i = (x - p_x)**2 + (y - p_y)**2``, ``k_i = sin(phi)**3 / (p_z**2 cos(phi))``
and ``m_i = sin(phi) cos(phi)``.  Its gradient ``(A, B)`` is a pair of cubics
sharing most of their coefficients::

    A = c1 x^3 + c1 x y^2 + 3 c2 x^2 + 2 c3 x y + c2 y^2 + a1 x + c4 y + a2
    B = c1 y^3 + c1 x^2 y + 3 c3 y^2 + 2 c2 x y + c3 x^2 + b1 y + c4 x + b2

Both variables are eliminated in turn with Sylvester resultants; the real
roots of each resultant give the candidate x and y coordinates.

Moving the origin to the k^2-weighted centroid of the points zeroes c2 and c3,
after which the resultant is exactly quintic with short closed-form
coefficients (:func:`centred_resultant`).  :func:`resultant_fit` evaluates the
Sylvester determinant numerically instead; it works for any polynomial pair
and is used to cross-check the closed form.

Bivariate polynomials are stored as 2-D coefficient arrays ``P[i, j]`` of
``x**i * y**j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegenerateResultant, NoCandidates, TooFewValidTerms, ZeroPolynomial

COS_EPS = 1e-9
TRUNCATED_DEGREE = 5
# Relative size below which resultant coefficients of degree > 5 count as vanished.
TAIL_TOL = 1e-8
LEADING_TOL = 1e-12
IMAG_TOL = 1e-6
DEDUP_TOL = 1e-9
NEWTON_STEPS = 3


@dataclass(frozen=True)
class Poly1D:
    """Dense univariate polynomial in the shifted/scaled variable.

    ``p(x) = sum(coeffs[k] * ((x - shift) / scale)**k)``; ``coeffs`` is in
    ascending degree.  ``shift = 0, scale = 1`` gives the plain power basis.
    """

    coeffs: np.ndarray
    shift: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "coeffs", c)
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def __call__(self, x):
        return npoly.polyval((np.asarray(x, dtype=float) - self.shift) / self.scale, self.coeffs)

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else -1

    def trimmed(self, rel: float = LEADING_TOL) -> "Poly1D":
        """Drop leading coefficients below ``rel * max|coeff|``."""
        c = self.coeffs
        big = np.max(np.abs(c)) if c.size else 0.0
        if big == 0.0:
            return Poly1D(np.zeros(1), self.shift, self.scale)
        keep = np.flatnonzero(np.abs(c) > rel * big)
        return Poly1D(c[: keep[-1] + 1], self.shift, self.scale)

    def power_basis(self) -> np.ndarray:
        """Coefficients in the unshifted, unscaled variable."""
        out = np.zeros(1)
        term = np.ones(1)
        lin = np.array([-self.shift / self.scale, 1.0 / self.scale])
        for c in self.coeffs:
            out = npoly.polyadd(out, c * term)
            term = npoly.polymul(term, lin)
        return out


@dataclass(frozen=True)
class CubicSystem:
    """Gradient ``(A, B)`` of the linearized elevation error, expanded.

    ``A`` and ``B`` are 4x4 coefficient arrays; ``retained`` indexes the input
    points that passed the sign/cosine filter and ``points`` holds them.
    """

    k: np.ndarray
    m: np.ndarray
    points: np.ndarray
    retained: np.ndarray
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    c1: float
    c2: float
    c3: float
    c4: float
    a1: float
    a2: float
    b1: float
    b2: float
    frame: tuple[float, float, float]
    centred: tuple[float, float, float, float, float, float]

    def evaluate(self, x, y):
        return npoly.polyval2d(x, y, self.A), npoly.polyval2d(x, y, self.B)

    def linearized_error(self, x, y):
        """The approximated elevation error itself, for checking the gradient."""
        x = np.asarray(x, dtype=float)[..., None]
        y = np.asarray(y, dtype=float)[..., None]
        s = (x - self.points[:, 0]) ** 2 + (y - self.points[:, 1]) ** 2
        return np.sum((self.k * s - self.m) ** 2, axis=-1)


def _coefficients(k, m, px, py):
    """Named coefficients ``(c1, c2, c3, c4, a1, b1, a2, b2)`` of the gradient system."""
    kk = k * k
    s_km = (k * m).sum()
    r2 = px * px + py * py
    return (
        4.0 * kk.sum(),
        -4.0 * (kk * px).sum(),
        -4.0 * (kk * py).sum(),
        8.0 * (kk * px * py).sum(),
        4.0 * ((kk * (3 * px * px + py * py)).sum() - s_km),
        4.0 * ((kk * (px * px + 3 * py * py)).sum() - s_km),
        4.0 * ((k * m * px).sum() - (kk * px * r2).sum()),
        4.0 * ((k * m * py).sum() - (kk * py * r2).sum()),
    )


def _centred_frame(points, kk) -> tuple[float, float, float]:
    """Centre where c2 and c3 vanish, plus a length scale twice the point spread."""
    x0 = float((kk * points[:, 0]).sum() / kk.sum())
    y0 = float((kk * points[:, 1]).sum() / kk.sum())
    spread = float(np.max(np.hypot(points[:, 0] - x0, points[:, 1] - y0)))
    return x0, y0, 2.0 * max(spread, 1e-6 * (1.0 + math.hypot(x0, y0)))


def build_system(points, phi, min_elevation: float = 0.0) -> CubicSystem:
    """Expand the cubic gradient system from world points and observed elevations.

    ``phi`` is the elevation of the line of sight toward each point.  Terms
    whose elevation and height disagree in sign are dropped (the linearization
    is meaningless there), as are rays with ``|cos(phi)| <= 1e-9`` and, if
    ``min_elevation`` is set, rays closer to horizontal than that.  Near the
    horizon the observed elevation is dominated by noise and its term, which
    grows like ``phi**3 / p_z**2``, swamps the rest.
    """
    pts = np.asarray(points, dtype=float)
    phi = np.asarray(phi, dtype=float)
    cos_phi = np.cos(phi)
    keep = (pts[:, 2] * phi > 0) & (np.abs(cos_phi) > COS_EPS) & (np.abs(phi) >= min_elevation)
    idx = np.flatnonzero(keep)
    if idx.size < 2:
        raise TooFewValidTerms(
            f"{idx.size} point(s) usable for the elevation system, need at least 2"
        )
    p = pts[idx]
    sin_phi = np.sin(phi[idx])
    cp = cos_phi[idx]
    k = sin_phi**3 / (p[:, 2] ** 2 * cp)
    m = sin_phi * cp

    px, py = p[:, 0], p[:, 1]
    kk = k * k
    c1, c2, c3, c4, a1, b1, a2, b2 = _coefficients(k, m, px, py)

    A = np.zeros((4, 4))
    A[3, 0] = c1
    A[1, 2] = c1
    A[2, 0] = 3 * c2
    A[1, 1] = 2 * c3
    A[0, 2] = c2
    A[1, 0] = a1
    A[0, 1] = c4
    A[0, 0] = a2

    B = np.zeros((4, 4))
    B[0, 3] = c1
    B[2, 1] = c1
    B[0, 2] = 3 * c3
    B[1, 1] = 2 * c2
    B[2, 0] = c3
    B[0, 1] = b1
    B[1, 0] = c4
    B[0, 0] = b2

    frame = _centred_frame(p, kk)
    x0, y0, length = frame
    # c2 and c3 vanish (to rounding) in the centred frame and are dropped
    u1, _, _, u4, ua1, ub1, ua2, ub2 = _coefficients(
        k * length**2, m, (px - x0) / length, (py - y0) / length
    )
    return CubicSystem(k, m, p, idx, A, B, c1, c2, c3, c4, a1, a2, b1, b2, frame,
                       (u1, u4, ua1, ua2, ub1, ub2))


def _total_degree(P: np.ndarray) -> int:
    i, j = np.nonzero(P)
    return int((i + j).max()) if i.size else -1


def _degree_in_y(P: np.ndarray) -> int:
    nz = np.flatnonzero(np.any(P != 0, axis=0))
    return int(nz[-1]) if nz.size else -1


def _sylvester_stack(A, B, t):
    """Sylvester matrices in y of ``A(t, y)``, ``B(t, y)`` for every sample ``t``."""
    da, db = _degree_in_y(A), _degree_in_y(B)
    # coefficient of y^j at each sample, shape (len(t), deg+1)
    ca = np.stack([npoly.polyval(t, A[:, j]) for j in range(da + 1)], axis=1)
    cb = np.stack([npoly.polyval(t, B[:, j]) for j in range(db + 1)], axis=1)
    size = da + db
    S = np.zeros((len(t), size, size))
    for row in range(db):
        S[:, row, row : row + da + 1] = ca[:, ::-1]
    for row in range(da):
        S[:, db + row, row : row + db + 1] = cb[:, ::-1]
    return S


def _affine_substitute(P: np.ndarray, x0: float, y0: float, scale: float) -> np.ndarray:
    """Coefficients of ``P(x0 + scale*u, y0 + scale*v)`` in ``(u, v)``."""
    n, m = P.shape
    out = np.zeros_like(P)
    px = [np.ones(1)]
    py = [np.ones(1)]
    for _ in range(max(n, m)):
        px.append(npoly.polymul(px[-1], [x0, scale]))
        py.append(npoly.polymul(py[-1], [y0, scale]))
    for i in range(n):
        for j in range(m):
            if P[i, j] != 0.0:
                out[: i + 1, : j + 1] += P[i, j] * np.outer(px[i], py[j])
    return out


def _balanced_frame(sys: CubicSystem) -> tuple[float, float, float]:
    """Centred frame rescaled to where the cubic terms meet the lower ones.

    When the cubic coefficient dwarfs the others the real roots crowd near
    the centre and sampling the determinant over the full point extent loses
    everything to cancellation.
    """
    x0, y0, length = sys.frame
    c1, c4, a1, a2, b1, b2 = sys.centred
    if not c1 > 0:
        return sys.frame
    s = max(math.sqrt(max(abs(a1), abs(b1), abs(c4)) / c1),
            (max(abs(a2), abs(b2)) / c1) ** (1.0 / 3.0))
    return (x0, y0, length * s) if s > 0 else sys.frame


def resultant_fit(sys, eliminate: str = "y", frame=None) -> Poly1D:
    """Full (untruncated) resultant obtained by sampling the Sylvester determinant.

    ``sys`` is a :class:`CubicSystem` or a pair ``(A, B)`` of coefficient
    arrays.  Both polynomials are first rewritten in normalized coordinates
    ``x = x0 + L*u, y = y0 + L*v`` (``frame = (x0, y0, L)``; by default the
    centre where ``c2 = c3 = 0`` for a cubic system, with ``L`` matched to the
    root scale, and the identity otherwise).
    The determinant is then evaluated at Chebyshev nodes in [-1, 1] and fitted
    by least squares up to the Bezout degree bound.  The returned polynomial
    lives in the normalized variable (``shift = x0`` or ``y0``, ``scale = L``).
    """
    if eliminate not in ("x", "y"):
        raise ValueError(f"eliminate must be 'x' or 'y', got {eliminate!r}")
    if isinstance(sys, CubicSystem):
        A, B = sys.A, sys.B
        if frame is None:
            frame = _balanced_frame(sys)
    else:
        A, B = (np.atleast_2d(np.asarray(P, dtype=float)) for P in sys)
        if frame is None:
            frame = (0.0, 0.0, 1.0)
    x0, y0, length = frame
    A = _affine_substitute(A, x0, y0, length)
    B = _affine_substitute(B, x0, y0, length)
    if not (np.any(A) and np.any(B)):
        raise DegenerateResultant("zero polynomial in the system")
    if eliminate == "x":
        A, B = A.T, B.T
    if _degree_in_y(A) < 1 or _degree_in_y(B) < 1:
        raise DegenerateResultant(f"a polynomial does not depend on {eliminate}")

    bound = max(_total_degree(A) * _total_degree(B), 1)
    n_samples = max(12, bound + 3)
    t = np.cos(math.pi * (np.arange(n_samples) + 0.5) / n_samples)
    S = _sylvester_stack(A, B, t)
    dets = np.linalg.det(S)
    hadamard = np.prod(np.linalg.norm(S, axis=2), axis=1)
    if np.max(np.abs(dets)) <= 1e-13 * np.max(hadamard):
        raise DegenerateResultant("resultant vanishes identically (degenerate geometry)")
    coeffs, *_ = np.linalg.lstsq(npoly.polyvander(t, bound), dets, rcond=None)
    return Poly1D(coeffs, x0 if eliminate == "y" else y0, length)


def tail_ratio(p: Poly1D, keep: int = TRUNCATED_DEGREE) -> float:
    """Largest coefficient above degree ``keep`` relative to the largest overall."""
    c = np.abs(p.coeffs)
    if c.size <= keep + 1:
        return 0.0
    return float(c[keep + 1 :].max() / c.max())


def centred_resultant(sys: CubicSystem, eliminate: str = "y") -> Poly1D:
    """Closed-form quintic resultant of a cubic system in its centred frame.

    With ``c2 = c3 = 0`` the resultant over y, in the normalized variable
    ``u = (x - x0) / L``, has the coefficients below (c1 ... b2 being the
    centred, scaled system).  Eliminating x instead swaps the roles of
    ``(a1, a2)`` and ``(b1, b2)``.
    """
    c1, c4, a1, a2, b1, b2 = sys.centred
    if eliminate == "x":
        a1, a2, b1, b2 = b1, b2, a1, a2
    elif eliminate != "y":
        raise ValueError(f"eliminate must be 'x' or 'y', got {eliminate!r}")
    d = a1 - b1
    coeffs = np.array([
        c1 * (c1 * a2**3 + a2 * b1 * c4**2 - b2 * c4**3),
        c1 * (3 * c1 * a1 * a2**2 + a1 * b1 * c4**2 - 2 * c1 * a2**2 * b1
              + 3 * c1 * a2 * b2 * c4 - c4**4),
        c1**2 * (3 * a1**2 * a2 - 4 * a1 * a2 * b1 + 3 * a1 * b2 * c4 + a2 * b1**2
                 + 4 * a2 * c4**2 - b1 * b2 * c4),
        c1**2 * (a1 * d**2 + 4 * a1 * c4**2 + c1 * (a2**2 + b2**2)),
        2 * c1**3 * (a2 * d + 2 * b2 * c4),
        c1**3 * (d**2 + 4 * c4**2),
    ])
    magnitude = max(abs(v) for v in (c1, c4, a1, a2, b1, b2)) ** 4
    if np.max(np.abs(coeffs)) <= 1e-13 * magnitude:
        raise DegenerateResultant("resultant vanishes identically (degenerate geometry)")
    x0, y0, length = sys.frame
    return Poly1D(coeffs, x0 if eliminate == "y" else y0, length)


def sylvester_resultant(sys, eliminate: str = "y") -> Poly1D:
    """Resultant of ``(A, B)`` with ``eliminate`` removed.

    A :class:`CubicSystem` takes the closed-form quintic; any other pair
    ``(A, B)`` goes through the sampled determinant, trimmed of negligible
    leading coefficients.
    """
    if isinstance(sys, CubicSystem):
        return centred_resultant(sys, eliminate)
    return resultant_fit(sys, eliminate).trimmed()


def real_roots(p: Poly1D) -> list[float]:
    """All real roots via companion-matrix eigenvalues, Newton-polished, ascending."""
    c = np.asarray(p.coeffs, dtype=float)
    big = np.max(np.abs(c)) if c.size else 0.0
    if big == 0.0 or not np.isfinite(big):
        raise ZeroPolynomial("polynomial has no nonzero coefficients")
    c = p.trimmed(LEADING_TOL).coeffs
    deg = c.size - 1
    if deg < 1:
        return []
    companion = np.zeros((deg, deg))
    companion[1:, :-1] = np.eye(deg - 1)
    companion[:, -1] = -c[:-1] / c[-1]
    eig = np.linalg.eigvals(companion)
    cand = eig.real[np.abs(eig.imag) <= IMAG_TOL * (1.0 + np.abs(eig.real))]

    t = cand.copy()
    active = np.ones(t.size, dtype=bool)
    for _ in range(NEWTON_STEPS):
        # Horner for the value and the derivative together
        f = np.full_like(t, c[-1])
        d = np.zeros_like(t)
        for coeff in c[-2::-1]:
            d = d * t + f
            f = f * t + coeff
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / d
        # a root stops being polished once a step is unusable or too large
        active &= (d != 0.0) & np.isfinite(step) & (np.abs(step) <= 1e-3 * (1.0 + np.abs(t)))
        t = np.where(active, t - step, t)
    roots = np.sort(p.shift + p.scale * t)
    out: list[float] = []
    for r in roots:
        if out and abs(r - out[-1]) <= DEDUP_TOL * (1.0 + abs(r)):
            continue
        out.append(float(r))
    return out


def candidate_positions(sys: CubicSystem) -> list[tuple[float, float]]:
    """Every (x, y) pairing of the real roots of the two resultants, x-major."""
    xs = real_roots(sylvester_resultant(sys, "y"))
    ys = real_roots(sylvester_resultant(sys, "x"))
    if not xs or not ys:
        raise NoCandidates(f"resultants have {len(xs)} real x-root(s) and {len(ys)} y-root(s)")
    return [(x, y) for x in xs for y in ys]
