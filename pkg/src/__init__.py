"""
Aseo - Answer Set Enumeration by Optimality

Streams the answer sets of ground normal programs in non-decreasing
lexicographic cost order, and uses ranked MAP assignments to approximate
posteriors of Boolean Bayesian networks.
"""

__version__ = "0.1.0"

from .program import Program, RankedModel, brute_force_aseo, eval_cost, is_answer_set
from .parser import parse_file, parse_program, render_program
from .solver import SearchConfig, enumerate_models, optimize
from .strategies import ALL, Mode, naive_enumerate, run_strategy, smart_enumerate, weight_enumerate
from .bayes import BayesNet, QuerySpec, approximate_query, encode_map, load_network, relevant_subnetwork
from .config_loader import Config

__all__ = [
    "Program",
    "RankedModel",
    "brute_force_aseo",
    "eval_cost",
    "is_answer_set",
    "parse_file",
    "parse_program",
    "render_program",
    "SearchConfig",
    "enumerate_models",
    "optimize",
    "ALL",
    "Mode",
    "naive_enumerate",
    "run_strategy",
    "smart_enumerate",
    "weight_enumerate",
    "BayesNet",
    "QuerySpec",
    "approximate_query",
    "encode_map",
    "load_network",
    "relevant_subnetwork",
    "Config",
]
