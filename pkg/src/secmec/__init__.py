"""Secure MEC offloading simulator: physical-layer secrecy analysis and
delay-optimal task-split search for paired vehicles under NOMA access."""

__version__ = "0.1.0"

from .channel import ChannelDraw, LinkGeometry, draw_channels, pair_geometry
from .experiments import SweepSpec, run_sweep, validate_analytics
from .link import DelayReport, LinkReport, OffloadPlan, compute_sinrs, delays, secure_rates
from .montecarlo import McConfig, McEstimate, mc_sop
from .optimizer import (
    Chromosome,
    GaConfig,
    OptContext,
    OptResult,
    exhaustive_search,
    ga_pats,
    oma_baseline,
)
from .params import SystemParams, load_params, noise_power
from .scenario import assign_groups, generate_scenario, pair_gpm, pair_rpm
from .secrecy_analytic import SecrecyReport, SopInputs, pair_secrecy, sops

__all__ = [
    "ChannelDraw",
    "Chromosome",
    "DelayReport",
    "GaConfig",
    "LinkGeometry",
    "LinkReport",
    "McConfig",
    "McEstimate",
    "OffloadPlan",
    "OptContext",
    "OptResult",
    "SecrecyReport",
    "SopInputs",
    "SweepSpec",
    "SystemParams",
    "__version__",
    "assign_groups",
    "compute_sinrs",
    "delays",
    "draw_channels",
    "exhaustive_search",
    "ga_pats",
    "generate_scenario",
    "load_params",
    "mc_sop",
    "noise_power",
    "oma_baseline",
    "pair_geometry",
    "pair_gpm",
    "pair_rpm",
    "pair_secrecy",
    "run_sweep",
    "secure_rates",
    "sops",
    "validate_analytics",
]
