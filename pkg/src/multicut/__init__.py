"""Multicut / correlation-clustering toolkit.

Exact solvers and classical heuristics for the minimum multicut problem,
plus a neural heuristic: a triangle message passing network over edge
features with autoregressive contraction inference.
"""

from .core import (
    CompleteInstance,
    ContractionRecord,
    Instance,
    check_cycle_inequalities,
    complete,
    contract,
    is_multicut,
    lift_labeling,
    multicut_to_partition,
    normalize,
    objective,
    partition_to_multicut,
)
from .exact import ExactResult, branch_and_bound, brute_force
from .heuristics import (
    HeuristicResult,
    gaec,
    greedy_fixation,
    kernighan_lin_joins,
    mutex_watershed,
)
from .inference import IdentityLogits, SolveTrace, solve_autoregressive, solve_single_pass
from .model import (
    EdgeFeatureField,
    ModelConfig,
    TmpModel,
    count_parameters,
    edge_mp_layer_forward,
    model_forward,
    tmp_layer_forward,
)
from .nn import adam_step, bce_with_logits, cosine_lr, gelu, grad_check
from .training import (
    TrainConfig,
    TrainSample,
    augment_by_contraction,
    generate_dataset,
    train,
)
from .bench import BenchRecord, generate_random, optimality_gap, run_benchmark
from .io import parse_instance, write_instance

__version__ = "0.1.0"

__all__ = [
    "BenchRecord",
    "CompleteInstance",
    "ContractionRecord",
    "EdgeFeatureField",
    "ExactResult",
    "HeuristicResult",
    "IdentityLogits",
    "Instance",
    "ModelConfig",
    "SolveTrace",
    "TmpModel",
    "TrainConfig",
    "TrainSample",
    "adam_step",
    "augment_by_contraction",
    "bce_with_logits",
    "branch_and_bound",
    "brute_force",
    "check_cycle_inequalities",
    "complete",
    "contract",
    "cosine_lr",
    "count_parameters",
    "edge_mp_layer_forward",
    "gaec",
    "gelu",
    "generate_dataset",
    "generate_random",
    "grad_check",
    "greedy_fixation",
    "is_multicut",
    "kernighan_lin_joins",
    "lift_labeling",
    "model_forward",
    "multicut_to_partition",
    "mutex_watershed",
    "normalize",
    "objective",
    "optimality_gap",
    "parse_instance",
    "partition_to_multicut",
    "run_benchmark",
    "solve_autoregressive",
    "solve_single_pass",
    "tmp_layer_forward",
    "train",
    "write_instance",
]
