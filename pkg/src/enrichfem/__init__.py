"""Enriched finite elements for elliptic interface problems.

High-order conforming elements on [0, 1] whose interface elements carry
piecewise-linear enrichment functions, giving optimal convergence and nodal
superconvergence for solutions that jump across internal interfaces with a
flux-proportional (implicit) jump law.  A tensor-product extension handles a
separable 2D problem matrix-free.
"""

from .errors import (
    SolverError,
    InterfaceOnNode,
    TwoInterfacesOneElement,
    LinearDependence,
    UnsupportedOrder,
    DegenerateSubinterval,
    NonPositiveDiffusivity,
    MissingExact,
)
from .quadrature import gauss_rule, split_rule
from .basis import (
    LagrangeBasis,
    Enrichment,
    make_enrichments,
    bubble_dependence,
    represent_piecewise,
)
from .mesh_space import Interface, InterfaceKind, Mesh1D, build_mesh, EnrichedSpace
from .assembly import PiecewiseField, BC, ProblemSpec, LinearSystem, assemble
from .linalg import SparseMatrix, pcg, direct_solve, scn
from .problems import (
    REGISTRY,
    get_problem,
    check_exact,
    p41,
    p42,
    wall1,
    wall2,
    wall3,
    GreenFunction,
)
from .tensor2d import solve_2d, errors_2d
from .harness import (
    SolveReport,
    error_norms,
    solve_problem,
    run_convergence,
    emit_csv,
    read_csv,
    verify_suite,
)

__version__ = "0.1.0"

__all__ = [
    "SolverError",
    "InterfaceOnNode",
    "TwoInterfacesOneElement",
    "LinearDependence",
    "UnsupportedOrder",
    "DegenerateSubinterval",
    "NonPositiveDiffusivity",
    "MissingExact",
    "gauss_rule",
    "split_rule",
    "LagrangeBasis",
    "Enrichment",
    "make_enrichments",
    "bubble_dependence",
    "represent_piecewise",
    "Interface",
    "InterfaceKind",
    "Mesh1D",
    "build_mesh",
    "EnrichedSpace",
    "PiecewiseField",
    "BC",
    "ProblemSpec",
    "LinearSystem",
    "assemble",
    "SparseMatrix",
    "pcg",
    "direct_solve",
    "scn",
    "REGISTRY",
    "get_problem",
    "check_exact",
    "p41",
    "p42",
    "wall1",
    "wall2",
    "wall3",
    "GreenFunction",
    "solve_2d",
    "errors_2d",
    "SolveReport",
    "error_norms",
    "solve_problem",
    "run_convergence",
    "emit_csv",
    "read_csv",
    "verify_suite",
    "__version__",
]
