"""Pairwise-comparison scoring: fitting, ranking, trust and dataset helpers."""

from ._pairscore import (
    Hyperparams,
    SolverMethod,
    ValidationError,
    bbt_loss,
    comparison_weight,
    confidence_factor,
    correlations,
    criteria,
    fit,
    fit_nonverified,
    fit_public_csv,
    normalize_slider,
    pareto_rank,
    read_public_csv,
    recompute_certifications,
    smoothed_abs,
    verify_email_domain,
    week_monday,
    weighted_rank,
    write_public_csv,
)

__all__ = [
    "Hyperparams",
    "SolverMethod",
    "ValidationError",
    "bbt_loss",
    "comparison_weight",
    "confidence_factor",
    "correlations",
    "criteria",
    "fit",
    "fit_nonverified",
    "fit_public_csv",
    "normalize_slider",
    "pareto_rank",
    "read_public_csv",
    "recompute_certifications",
    "smoothed_abs",
    "verify_email_domain",
    "week_monday",
    "weighted_rank",
    "write_public_csv",
]
