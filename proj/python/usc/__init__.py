from ._usc import (
    AdaptMlProd,
    ConfigError,
    Error,
    FeasibleSet,
    build_grid,
    cli_main,
    gamma_constant,
    normalized_expert_loss,
    run_experiment,
    select_grid,
    verify_trace,
)

__all__ = [
    "AdaptMlProd",
    "ConfigError",
    "Error",
    "FeasibleSet",
    "build_grid",
    "cli_main",
    "gamma_constant",
    "normalized_expert_loss",
    "run_experiment",
    "select_grid",
    "verify_trace",
]
