"""polyvem: plane-strain hyperelasticity with low-order virtual elements
on arbitrary polygonal meshes."""

from .analysis import ConvergenceRecord, convergence_study, h1_error, probe
from .fem_ref import Q2Mesh, Q2System, ReferenceSolution, reference_solution, solve_q2
from .generators import (
    build_mesh,
    generate_dq2s,
    generate_sq1,
    generate_sun_star,
    generate_voronoi,
)
from .materials import (
    Kinematics,
    MaterialModel,
    NonFiniteStateError,
    energy,
    first_pk,
    kinematics_from_grad,
    lame_from_engineering,
    tangent,
)
from .mesh import Domain, PolygonalMesh, mean_diameter, read_vpoly, validate_mesh, write_vpoly
from .geometry import triangulate
from .problems import build_problem, probe_point, problem_domain
from .solver import (
    ProblemSetup,
    SolutionState,
    SolverFailure,
    StabConfig,
    VemSystem,
    assemble,
    newton_solve,
    solve_with_stepping,
)
from .stabilization import Ellipse, StabilizationParams, mvee, stab_energy_density, stab_params, taylor_lambda
from .vem import ElementOperators, build_projection, element_energy, element_residual, element_tangent

__version__ = "0.1.0"
