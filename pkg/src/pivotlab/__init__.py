"""pivotlab: exact-rational experiments with simplex pivot rules,
cube orderings, polytope reconstruction, and simple stochastic games."""

from .cube import (
    CubeOrientation,
    RecurrenceTable,
    klee_minty_orientation,
    linear_orientation,
    recurrence_tables,
    run_cube_rule,
    unique_sink_check,
    validate_aof,
)
from .errors import PivotLabError
from .experiment import ExperimentConfig, run_experiment
from .haehnle import MonomialFamily, haehnle_search, haehnle_verify
from .lp import (
    DualCertificate,
    InfeasibleCertificate,
    LinearProgram,
    SolveResult,
    Status,
    Tableau,
    duality_certificate,
    enumerate_vertices,
    phase_one,
    pivot_step,
)
from .reconstruct import (
    FaceLattice,
    PolytopeGraph,
    SimplePolytope,
    diameter_and_hirsch,
    enumerate_faces,
    find_aofs,
    ordering_profile,
    reconstruct_faces,
)
from .rules import (
    InstanceSpec,
    PivotRuleSpec,
    Rule,
    gen_instance,
    klee_minty,
    random_facet_solve,
    select_entering,
    solve_simplex,
    unit_cube,
)
from .ssg import (
    SimpleStochasticGame,
    best_response_mdp,
    evaluate_strategy_pair,
    ludwig_solve,
    policy_fixpoint,
    validate_game,
    value_iteration,
)

__version__ = "0.1.0"
