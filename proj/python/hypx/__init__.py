"""Hypermodel bandit simulator: python surface over the C++ core."""

from hypx._core import (
    BanditEnv,
    ConfigError,
    ContractError,
    DegenerateInformationError,
    DimensionError,
    Hypermodel,
    RngStream,
    check_suite,
    ids_optimize,
    ids_stats,
    load_hypermodel,
    make_ensemble,
    make_env,
    make_hypernetwork,
    make_linear,
    make_sparse_softmax,
    run_config,
    sample_gaussian,
    sample_hypersphere,
)

__all__ = [
    "BanditEnv",
    "ConfigError",
    "ContractError",
    "DegenerateInformationError",
    "DimensionError",
    "Hypermodel",
    "RngStream",
    "check_suite",
    "ids_optimize",
    "ids_stats",
    "load_hypermodel",
    "make_ensemble",
    "make_env",
    "make_hypernetwork",
    "make_linear",
    "make_sparse_softmax",
    "run_config",
    "sample_gaussian",
    "sample_hypersphere",
]
