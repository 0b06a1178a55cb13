"""Exception types raised across the package."""


class EmptyInput(ValueError):
    """No points were supplied."""


class SingularSystem(ArithmeticError):
    """An exact linear system has no unique solution."""

    def __init__(self, message, lambdas=None):
        super().__init__(message)
        self.lambdas = lambdas


class SingularFit(SingularSystem):
    """Four projected points do not determine a unique monic quadric."""


class UnresolvedHeights(RuntimeError):
    """Inner and outer height bounds disagree at one or more grid vertices.

    The partially resolved description is attached so callers can still
    inspect or serialize it.
    """

    def __init__(self, description, gaps):
        n = len(gaps)
        super().__init__(f"{n} grid vertex height(s) unresolved")
        self.description = description
        self.gaps = gaps


class OutsidePlanarHull(ValueError):
    """The projection of a query point misses the planar hull."""


class NotOnSegment(ValueError):
    pass


class NotRankOne(ValueError):
    pass


class BadRatio(ValueError):
    pass


class DegeneratePlane(ValueError):
    """Three lifted points are collinear, so the plane through them is not unique."""


class NonConvergence(RuntimeWarning):
    """Iterative envelope computation hit its sweep cap before the residual dropped below tol."""


class FormatError(ValueError):
    """A JSON document or option string does not match the expected format."""
