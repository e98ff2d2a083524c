"""Exception types shared across the library."""


class SolverError(Exception):
    """Base class for all errors raised by this package."""


# -- mesh / space construction --------------------------------------------

class InterfaceOnNode(SolverError):
    """An interface coincides with a mesh breakpoint."""


class TwoInterfacesOneElement(SolverError):
    """More than one interface falls inside a single element."""


class LinearDependence(SolverError):
    """A local basis set is numerically rank deficient."""


class UnsupportedOrder(SolverError):
    """Requested polynomial/quadrature order is outside the supported range."""


# -- evaluation -----------------------------------------------------------

class EvaluationFailure(SolverError):
    """A user-supplied function could not be evaluated (one-sidedly)."""


class OutOfDomain(SolverError):
    """Evaluation point lies outside the mesh domain."""


# -- quadrature -----------------------------------------------------------

class DegenerateSubinterval(SolverError):
    """Interface splits an element into a subinterval of negligible length."""


# -- assembly -------------------------------------------------------------

class NonPositiveDiffusivity(SolverError):
    """Diffusion coefficient is not strictly positive."""


class SingularSystem(SolverError):
    """A structural linear system that should be nonsingular is singular."""


# -- linear algebra -------------------------------------------------------

class MaxIterations(SolverError):
    """Iterative solver failed to converge within the iteration budget."""


class NonpositiveDiagonal(SolverError):
    """Diagonal preconditioner requires strictly positive diagonal entries."""


class SingularMatrix(SolverError):
    """Direct factorization failed: the matrix is singular."""


class DimensionMismatch(SolverError):
    """Operand shapes are incompatible."""


# -- problem library ------------------------------------------------------

class InterfaceAtSingularAlpha(SolverError):
    """Interface position makes the jump parameter of the 2D model ill-defined."""


class ReproducingPropertyFailed(SolverError):
    """Constructed kernel function fails its defining reproducing identity."""


class MismatchBeyondTolerance(SolverError):
    """Assembled quantities disagree with their closed forms beyond tolerance."""


# -- harness --------------------------------------------------------------

class MissingExact(SolverError):
    """Error norms were requested for a problem without an exact solution."""


class IoFailure(SolverError):
    """Reading or writing a report file failed."""
