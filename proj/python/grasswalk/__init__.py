"""Random-subspace walks on Grassmannians: optimizer, estimators and verifiers."""

from ._core import (
    ArgumentError,
    DegenerateError,
    Loss,
    __version__,
    ackley,
    clip,
    cli,
    estimate_gap,
    function_loss,
    phi_stats,
    predict_bounds,
    preset_names,
    quadratic,
    rastrigin,
    run_preset,
    run_walk,
    sample_conditioned,
    sample_uniform,
    spiked,
    stereo,
    thomson,
    thomson_s2_optimum,
    verify_sin_circle,
)

__all__ = [
    "ArgumentError",
    "DegenerateError",
    "Loss",
    "__version__",
    "ackley",
    "clip",
    "cli",
    "estimate_gap",
    "function_loss",
    "phi_stats",
    "predict_bounds",
    "preset_names",
    "quadratic",
    "rastrigin",
    "run_preset",
    "run_walk",
    "sample_conditioned",
    "sample_uniform",
    "spiked",
    "stereo",
    "thomson",
    "thomson_s2_optimum",
    "verify_sin_circle",
]
