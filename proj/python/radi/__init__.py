"""Python bindings for the radi distillation core."""

from ._core import (
    ArgumentError,
    ConvergenceError,
    DegenerateInputError,
    DimensionError,
    DomainError,
    Error,
    TrainingError,
    __version__,
    acc_at_1,
    classification_loss,
    config_keys,
    default_config,
    default_sinkhorn_lambda,
    generate_data,
    hit_at_k,
    listwise_loss,
    ndcg_at_k,
    pairwise_uncertainty,
    run_experiment,
    run_sweep,
    sample_sublist,
    sinkhorn,
    top_k,
    vanilla_kd_loss,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
