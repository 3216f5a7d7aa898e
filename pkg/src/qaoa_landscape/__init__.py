"""Cost-landscape exploration for QAOA Max-Cut ansatze.

Statevector simulation, basin-hopping minima databases, transition-state
searches, landscape metrics, and disconnectivity-graph rendering.
"""

from ._kernels import backend_name
from .graphs import (
    WeightedGraph,
    SolutionSet,
    GraphParseError,
    parse_graph,
    serialize_graph,
    complete_graph,
    cubic_graphs,
    variable_weight_graph,
    brute_force_maxcut,
    pattern_states,
)
from .sim import (
    CostDiagonal,
    ParameterVector,
    StateVector,
    cost_diagonal,
    initial_state,
    evolve,
    expectation,
    gradient,
    energy_and_gradient,
    parameter_shift_gradient,
    solution_probability,
    overlap_distance,
)
from .optim import (
    BasinHoppingConfig,
    MinimumRecord,
    MinimaDatabase,
    MinimizationError,
    lbfgs_minimize,
    make_objective,
    basin_hop,
    basin_hop_parallel,
    insert_deduped,
    save_database,
    load_database,
)
from .landscape import (
    LandscapeConfig,
    TransitionStateRecord,
    KineticTransitionNetwork,
    TransitionStateRejected,
    dneb_candidates,
    refine_transition_state,
    path_endpoints,
    connect_database,
    save_network,
    load_network,
)
from .analysis import (
    AnalysisReport,
    ConvexHull,
    convex_hull,
    hcmp,
    f_metric,
    expectation_thresholds,
    hull_intersection_thresholds,
    delta_metrics,
    build_report,
)
from .viz import (
    DisconnectivityTree,
    build_disconnectivity,
    render_disconnectivity,
    scatter_export,
)

__version__ = "0.1.0"
