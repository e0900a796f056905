"""HodgeRank on sampled pairwise-comparison graphs.

Global scores by least squares on a comparison graph, the
gradient/curl/harmonic split of the residual, Fiedler-value estimates for
random budgets, edge samplers and Monte-Carlo ensembles comparing them.
"""

from .estimator import HodgeRank, check_pairs
from .experiments import (ExperimentConfig, ExperimentResult, GroundTruth, SamplerTemplate,
                          fiedler_sweep, generate_comparisons, generate_ground_truth,
                          ingest_dataset, l2_distance, run_ensemble, subsample_records)
from .graph import (ComparisonRecord, EdgeFlow, InvalidRecordError, PairGraph, TriangleSet,
                    build_pair_graph, divergence, laplacian, read_records_csv, triangles)
from .hodge import (DisconnectedGraphError, GlobalScore, HodgeDecomposition,
                    hodge_decompose, hodge_rank, sensitivity)
from .sampling import BudgetError, SamplerSpec, budget_from_p0, sample
from .spectral import (EstimatorInputs, SpectralSummary, cheeger_bound, chernoff_bounds,
                       estimate_with_replacement, estimate_without_replacement, fiedler,
                       min_degree_tail_bound, solve_a)

__version__ = "0.1.0"
