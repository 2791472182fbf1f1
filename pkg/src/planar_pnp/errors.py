"""Exception hierarchy shared by every stage of the solver."""


class PlanarPnPError(Exception):
    """Base class for all solver errors."""


class DegenerateRotation(PlanarPnPError):
    """Camera axis (nearly) perpendicular to the plane of motion; heading undefined."""


class ProjectionSingular(PlanarPnPError):
    """A world point lies on the camera's principal plane (zero depth)."""


class TooFewValidTerms(PlanarPnPError):
    """Fewer than two correspondences survive the elevation-term filter."""


class DegenerateResultant(PlanarPnPError):
    """The resultant vanished identically, e.g. because all points coincide."""


class ZeroPolynomial(PlanarPnPError):
    pass


class NoCandidates(PlanarPnPError):
    """A resultant had no real roots, so no position candidate exists."""


class DegeneratePosition(PlanarPnPError):
    """Every point projects onto the candidate camera position in the plane."""


class RankDeficient(PlanarPnPError):
    """All camera rays are parallel; position is not determined by the heading."""


class AllCandidatesRejected(PlanarPnPError):
    """Every candidate pose put some point behind the camera.

    ``pose`` holds the fallback (fewest depth violations, then lowest error)
    and ``diagnostics`` the full candidate list.
    """

    def __init__(self, message, pose, diagnostics):
        super().__init__(message)
        self.pose = pose
        self.diagnostics = diagnostics


class NumericalFailure(PlanarPnPError):
    """The damped normal equations stayed singular; ``result`` is the best pose so far."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result
