"""Mixed-effects general hazard (MEGH) survival models.

Thin wrapper over the C++ core; see the package README for the model and the
CLI. The main entry points are `simulate_dataset`, `load_dataset`, `fit`,
`lrt_random_effects`, `gradient_diagnostic` and `km_by_cluster`.
"""

try:
    from ._megh import (  # noqa: F401
        Dataset, Fit, H0, H0_inv, NumericError, ValidationError, __version__,
        boundary_pvalue, fit, gradient_diagnostic, h0, km_by_cluster,
        load_dataset, lrt_random_effects, re_log_density, re_sample,
        re_variance, simulate_dataset,
    )
except ImportError:  # module built outside the package (plain CMake build)
    from _megh import (  # noqa: F401
        Dataset, Fit, H0, H0_inv, NumericError, ValidationError, __version__,
        boundary_pvalue, fit, gradient_diagnostic, h0, km_by_cluster,
        load_dataset, lrt_random_effects, re_log_density, re_sample,
        re_variance, simulate_dataset,
    )

__all__ = [
    "Dataset",
    "Fit",
    "H0",
    "H0_inv",
    "NumericError",
    "ValidationError",
    "__version__",
    "boundary_pvalue",
    "fit",
    "gradient_diagnostic",
    "h0",
    "km_by_cluster",
    "load_dataset",
    "lrt_random_effects",
    "re_log_density",
    "re_sample",
    "re_variance",
    "simulate_dataset",
]
