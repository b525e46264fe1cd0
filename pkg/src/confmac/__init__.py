"""Gaussian MAC with conferencing encoders: regions, oracles and simulation."""

from .ginfo import (
    ChannelParams,
    Cov3,
    InvalidCovarianceError,
    PentagonBounds,
    gaussian_pentagon,
    is_in_kg,
    markovize,
)
from .regions import (
    PowerSplit,
    RatePair,
    RateRegion,
    RegionKind,
    ach_bounds,
    build_region,
    cg_bounds,
    contains,
    hausdorff,
    verify_regions_equal,
)

__version__ = "0.1.0"
