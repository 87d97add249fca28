"""Friedkin-Johnsen opinion dynamics, its cascade-driven variant, and
polarization measures, backed by a C++ core."""

from ._fjc import (
    ConvergenceError,
    Error,
    Graph,
    InvalidArgument,
    ParseError,
    __version__,
    barabasi_albert,
    cycle_graph,
    estimate_theta,
    expected_cascade_size,
    fj_async,
    fj_equilibrium,
    fj_iterate,
    format_config,
    influence_matrix,
    karate_club,
    largest_scc,
    load_edge_list,
    p2,
    p3,
    p4,
    pagerank,
    path_graph,
    polarizing_vector,
    replay_trace,
    run_experiment,
    run_fjc,
    sample_cascade,
    susceptibility,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
