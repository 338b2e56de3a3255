"""Greedy selection of measurement locations in a squared-exponential field.

Two ground sets are supported: a uniform grid over the measurement box
(``grid_greedy``) and the prediction points plus centroids of greedy maximal
cliques of the prediction graph (``centroid_greedy``).
"""

from .covariance import Box, CovarianceModel, cov_matrix, cov_vector, cross_cov, se_cov
from .estimation import (
    MarginalGainTerms,
    NumericalError,
    SelectionState,
    extend,
    marginal_gain_sweep,
    marginal_gain_terms,
    objective,
    total_mse,
    variance_reduction_single,
)
from .geometry import (
    GridSpec,
    PredictionGraph,
    build_graph,
    clique_centroids,
    greedy_maximal_cliques,
    make_grid,
    maximal_clique_centroids,
)
from .kernels import BACKEND
from .selection import (
    ProblemInstance,
    SelectionReport,
    centroid_greedy,
    greedy_select,
    grid_greedy,
    matched_rho,
)

__version__ = "0.1.0"
