"""Markov bases for log-linear models, fiber walks and exact conditional tests."""

__version__ = "0.1.0"

from .basis import (
    CompletionCaps,
    MarkovBasis,
    Move,
    binomial_completion,
    distance_reducing_check,
    independence_basis,
    toric_markov_basis,
    verify_connects,
)
from .errors import (
    CapExceededError,
    CompletionOverflow,
    ConfigurationError,
    DimensionError,
    EnumerationCapError,
    InconsistentFitError,
    MarkovBasisError,
    ModelInvalidError,
    NonConvergenceError,
    ParseError,
)
from .fiber import WalkConfig, WalkSample, chain_rng, dynamic_p1_proposer, enumerate_fiber, walk
from .gof import (
    FitResult,
    TestResult,
    chi_square,
    exact_pvalue_enumerated,
    exact_pvalue_mc,
    fit_mle,
    histogram,
)
from .intlin import hermite_normal_form, in_kernel, lattice_kernel_basis
from .model import (
    Graph,
    ModelSpec,
    Table,
    conditional_log_weight,
    generic_design,
    graph_to_table,
    independence_design,
    p1_design,
    sufficient_statistics,
    table_to_graph,
)
