"""Exact finite-blocklength checks of the moderate-deviation asymptotics."""

from .bounds import (
    DmsBound,
    achievability_bound_dms,
    default_J,
    effective_gap_dms,
    effective_gap_gaussian,
    exact_code_error_prob_dms,
    gaussian_achievability_bound,
)
from .covering import CoverResult, greedy_guarantee, greedy_type_cover, minimum_type_cover, type_class_words
from .curves import CSV_HEADER, MdCurve, MdRow, gaussian_tail_curve, gaussian_tail_logprob, md_curve_dms, trend_slope
from .sequences import EpsilonSequence, log_grid, make_epsilon
from .types import (
    DEFAULT_BUDGET,
    TypeTable,
    clear_type_cache,
    enumerate_types,
    exact_correct_prob_dms,
    exact_excess_prob_dms,
    lemma2_ratio,
    total_log_mass,
    type_count,
    type_table,
)

__all__ = [
    "CSV_HEADER",
    "CoverResult",
    "DEFAULT_BUDGET",
    "DmsBound",
    "EpsilonSequence",
    "MdCurve",
    "MdRow",
    "TypeTable",
    "achievability_bound_dms",
    "clear_type_cache",
    "default_J",
    "effective_gap_dms",
    "effective_gap_gaussian",
    "enumerate_types",
    "exact_code_error_prob_dms",
    "exact_correct_prob_dms",
    "exact_excess_prob_dms",
    "gaussian_achievability_bound",
    "gaussian_tail_curve",
    "gaussian_tail_logprob",
    "greedy_guarantee",
    "greedy_type_cover",
    "lemma2_ratio",
    "log_grid",
    "make_epsilon",
    "md_curve_dms",
    "minimum_type_cover",
    "total_log_mass",
    "trend_slope",
    "type_class_words",
    "type_count",
    "type_table",
]
