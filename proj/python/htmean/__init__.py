"""Heavy-tailed mean estimation in smooth Banach spaces."""

from ._core import (  # noqa: F401
    BoundQuery,
    MomentAssumption,
    RateFunction,
    SpaceSpec,
    StreamingTruncatedMean,
    TruncatedMeanResult,
    beta,
    c_alpha,
    c_p_combined,
    clip,
    eprocess_diag,
    frak_b,
    frak_c,
    generate,
    geometric_median,
    gmom,
    gmom_block_count,
    k_p,
    line_crossing_width,
    moment_v,
    noncentral_opt,
    noncentral_width,
    norm,
    opt_lambda,
    optimized_width,
    psi,
    r_gmom,
    r_sample_mean,
    sample_mean,
    stitched_width,
    trunc_coeff,
    truncated_mean,
    zeta,
)

__all__ = [
    "BoundQuery",
    "MomentAssumption",
    "RateFunction",
    "SpaceSpec",
    "StreamingTruncatedMean",
    "TruncatedMeanResult",
    "beta",
    "c_alpha",
    "c_p_combined",
    "clip",
    "eprocess_diag",
    "frak_b",
    "frak_c",
    "generate",
    "geometric_median",
    "gmom",
    "gmom_block_count",
    "k_p",
    "line_crossing_width",
    "moment_v",
    "noncentral_opt",
    "noncentral_width",
    "norm",
    "opt_lambda",
    "optimized_width",
    "psi",
    "r_gmom",
    "r_sample_mean",
    "sample_mean",
    "stitched_width",
    "trunc_coeff",
    "truncated_mean",
    "zeta",
]
