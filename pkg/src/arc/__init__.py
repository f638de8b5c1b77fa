"""Evolutionary strategy ranking for normal-form and Bayesian games."""

__version__ = "0.1.0"

from .alpha_rank import (DEFAULT_M, RankDistribution, SweepConfig,
                         SweepResult, TransitionMatrix, alpha_sweep,
                         stationary_distribution, transition_matrix)
from .collections import (Collection, ExcessiveSkipsError, exact_collection,
                          group_marginals, hawk_dove_closed_form,
                          monte_carlo_collection)
from .errors import (ArcError, GameSpecError, NotIrreducibleError,
                     SamplingError, SolverFailureError, SweepError)
from .games import (BayesianGame, FinitePrior, IndependentGaussianPrior,
                    NormalFormGame, all_profile_coords, profile_coords,
                    profile_index, realize, sample_type)
from .response_graph import (GameGraph, ResponseGraph, build_game_graph,
                             build_response_graph, sink_components)

__all__ = [
    "ArcError", "BayesianGame", "Collection", "DEFAULT_M",
    "ExcessiveSkipsError", "FinitePrior", "GameGraph", "GameSpecError",
    "IndependentGaussianPrior", "NormalFormGame", "NotIrreducibleError",
    "RankDistribution", "ResponseGraph", "SamplingError",
    "SolverFailureError", "SweepConfig", "SweepError", "SweepResult",
    "TransitionMatrix", "alpha_sweep", "all_profile_coords",
    "build_game_graph", "build_response_graph", "exact_collection",
    "group_marginals", "hawk_dove_closed_form", "monte_carlo_collection",
    "profile_coords", "profile_index", "realize", "sample_type",
    "sink_components", "stationary_distribution", "transition_matrix",
]
