"""Min-max r-gathering and r-gather clustering on lines, spiders and trees."""

from .core import *  # noqa: F401,F403
from .line import solve_line, solve_line_clustering, solve_line_gathering
from .brute import brute_clustering, brute_gathering, brute_solve, SearchGuard
from .fpt import solve_spider_fpt, build_cost_table, enumerate_suffix_special
from .ptas import PtasParams, PtasStats, ptas_spider, round_spider, solve_oracle
from .tree_ptas import normalize_tree, ptas_tree, round_tree, tree_solve_oracle
from .hardness import (
    ArrearsChoice,
    ArrearsInstance,
    OneInThreeSat,
    brute_arrears,
    reduce_arrears_to_spider,
    reduce_sat_to_arrears,
    spider_feasible,
    verify_arrears,
)
from .io import emit_instance, emit_solution, parse_instance, parse_solution

__version__ = "0.1.0"
