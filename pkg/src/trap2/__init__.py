"""Local-fidelity explanations for graph neural networks.

Pipeline: translate the source graph to the k-hop interpretation domain of
the explained node, probe the black box with energy-scored perturbations of
structure and features, fit an L1-regularized linear-softmax surrogate to the
recorded responses, and extract the top-contributing subgraph. Ships with
seeded synthetic motif benchmarks, a trainable reference classifier,
random/greedy/gradient baselines, and an accuracy/fidelity/contrastivity
evaluation harness.
"""

from .graph import Graph, induced_submatrix, load_graph, reachability, save_graph
from .datasets import DATASET_KINDS, DatasetSpec, generate, ground_truth_motif
from .predictor import Predictor, ReferenceGCN, TrainReport, load_model, save_model, train_gcn
from .translation import InterpretationDomain, translate
from .perturbation import (
    PerturbationBatch,
    PerturbationConfig,
    PerturbedInstance,
    energy_feature,
    energy_structure,
    energy_total,
    hop_weights,
    perturb_features,
    perturb_structure,
    sample_batch,
    sim,
)
from .explanation import Explanation, extract, load_explanation, save_explanation, to_dot
from .surrogate import (
    SurrogateModel,
    explain_graph,
    explain_node,
    fit,
    node_contributions,
    surrogate_forward,
    surrogate_input,
)
from .baselines import grad_explainer, greedy_explainer, random_explainer
from .evaluation import EvalReport, accuracy, contrastivity, evaluate, fidelity

__version__ = "0.1.0"

__all__ = [
    "Graph", "reachability", "induced_submatrix", "load_graph", "save_graph",
    "DatasetSpec", "DATASET_KINDS", "generate", "ground_truth_motif",
    "Predictor", "ReferenceGCN", "TrainReport", "train_gcn", "save_model", "load_model",
    "InterpretationDomain", "translate",
    "PerturbationConfig", "PerturbedInstance", "PerturbationBatch",
    "perturb_structure", "perturb_features", "hop_weights", "sim",
    "energy_structure", "energy_feature", "energy_total", "sample_batch",
    "Explanation", "extract", "save_explanation", "load_explanation", "to_dot",
    "SurrogateModel", "surrogate_input", "surrogate_forward", "fit",
    "node_contributions", "explain_node", "explain_graph",
    "random_explainer", "greedy_explainer", "grad_explainer",
    "EvalReport", "accuracy", "fidelity", "contrastivity", "evaluate",
    "__version__",
]
