"""Junction trees for belief networks by cluster-graph transformation.

The package keeps a cluster graph alongside a belief network and reshapes it
into a junction tree with small, auditable steps: an initial graph built
straight from the network's families, transformations that preserve the
defining properties at every point, and solvers that remove all cycles
either by eliminating variables or by dividing loops.  Edits to the network
adjust the graph in place and a session object restores tree form on demand.
"""

from __future__ import annotations

from .algorithms import (
    PRESETS,
    AlgorithmPreset,
    RunReport,
    SubInvocationAudit,
    choose_division,
    divide_a_loop,
    divide_loops,
    find_cycle,
    free_variable_elimination,
    merge_redundant_clusters,
    min_weight_select,
    node_elimination,
    run_preset,
    slide_beneficially,
    transform_to_tree,
)
from .incremental import (
    EditSession,
    RestoreReport,
    SessionConfig,
    add_arc_clusters,
    add_variable_cluster,
    delete_arc_clusters,
    delete_variable_clusters,
    retract_clusters,
)
from .model import (
    BeliefNetwork,
    Cluster,
    ClusterEdge,
    ClusterGraph,
    NetworkError,
    OperationError,
    TraceEvent,
    Variable,
    biconnected_components,
    build_initial_cluster_graph,
    edge_key,
    potential_size,
)
from .replay import apply_event, replay_trace
from .transforms import (
    EliminateResult,
    add_fill_arc,
    collapse,
    drop,
    drop_spurious,
    eliminate,
    is_spurious,
    merge,
    slide,
    steal_an_edge,
)
from .verify import (
    CheckReport,
    assert_valid,
    brute_force_optimal_cost,
    check_chordal_embedding,
    check_family_property,
    check_junction_tree,
    check_path_property,
    check_structure,
    reference_elimination_cost,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmPreset",
    "BeliefNetwork",
    "CheckReport",
    "Cluster",
    "ClusterEdge",
    "ClusterGraph",
    "EditSession",
    "EliminateResult",
    "NetworkError",
    "OperationError",
    "PRESETS",
    "RestoreReport",
    "RunReport",
    "SessionConfig",
    "SubInvocationAudit",
    "TraceEvent",
    "Variable",
    "add_arc_clusters",
    "add_fill_arc",
    "add_variable_cluster",
    "apply_event",
    "assert_valid",
    "biconnected_components",
    "brute_force_optimal_cost",
    "build_initial_cluster_graph",
    "check_chordal_embedding",
    "check_family_property",
    "check_junction_tree",
    "check_path_property",
    "check_structure",
    "choose_division",
    "collapse",
    "delete_arc_clusters",
    "delete_variable_clusters",
    "divide_a_loop",
    "divide_loops",
    "drop",
    "drop_spurious",
    "edge_key",
    "eliminate",
    "find_cycle",
    "free_variable_elimination",
    "is_spurious",
    "merge",
    "merge_redundant_clusters",
    "min_weight_select",
    "node_elimination",
    "potential_size",
    "reference_elimination_cost",
    "replay_trace",
    "retract_clusters",
    "run_preset",
    "slide",
    "slide_beneficially",
    "steal_an_edge",
    "transform_to_tree",
]
