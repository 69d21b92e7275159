"""Kernel density and mode estimation for randomly left-truncated dependent data."""

__version__ = "0.1.0"

from .kde import (  # noqa: E402
    EPANECHNIKOV,
    GAUSSIAN,
    BandwidthRule,
    DensityCurve,
    EvaluationDomain,
    KernelSpec,
    density_curve,
    density_estimated,
    density_known_G,
    mode_estimate,
)
from .truncation import (  # noqa: E402
    ObservedSample,
    StepFunction,
    empirical_c,
    estimate_alpha,
    lynden_bell_F,
    lynden_bell_G,
)
