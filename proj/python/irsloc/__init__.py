"""IRS-assisted target localization: CRBs, estimators and Monte-Carlo sweeps."""

from ._core import (
    IrslocError,
    closed_form_crb,
    compute_crb,
    default_scenario,
    derive_geometry,
    optimal_split,
    run_point,
    run_sweep,
)

__all__ = [
    "IrslocError",
    "closed_form_crb",
    "compute_crb",
    "default_scenario",
    "derive_geometry",
    "optimal_split",
    "run_point",
    "run_sweep",
]
__version__ = "0.1.0"
