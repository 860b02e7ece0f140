"""Sampling of signals on signed graphs via balancing and disc alignment"""
from __future__ import annotations

from signed_graph_sampling.balance import BalanceReport, balance, balance_components
from signed_graph_sampling.const import __version__
from signed_graph_sampling.gdas import (
    AlignedOperator,
    SampleSet,
    gdas_coverage,
    gdas_sample,
    gdpa_align,
)
from signed_graph_sampling.graph import (
    Coloring,
    SignedGraph,
    combinatorial_laplacian,
    generalized_laplacian,
    is_balanced,
)
from signed_graph_sampling.learn import (
    SignalMatrix,
    empirical_covariance,
    glasso,
    precision_to_graph,
)
from signed_graph_sampling.linalg import SparseSymMatrix
from signed_graph_sampling.reconstruct import (
    ReconstructionProblem,
    deltacon,
    mse,
    reconstruct,
    relative_error,
)

__all__ = [
    "AlignedOperator",
    "BalanceReport",
    "Coloring",
    "ReconstructionProblem",
    "SampleSet",
    "SignalMatrix",
    "SignedGraph",
    "SparseSymMatrix",
    "__version__",
    "balance",
    "balance_components",
    "combinatorial_laplacian",
    "deltacon",
    "empirical_covariance",
    "gdas_coverage",
    "gdas_sample",
    "gdpa_align",
    "generalized_laplacian",
    "glasso",
    "is_balanced",
    "mse",
    "precision_to_graph",
    "reconstruct",
    "relative_error",
]
