"""Multi-objective land-allocation sampling and degradation-loss analysis.

A lattice of land parcels, each assigned one of three uses, is scored by a
weighted combination of spatial compactness and per-parcel suitability.
Markov chain Monte Carlo engines sample allocations in proportion to
exp(-phi/T); sweeps over suitability pressure and climate degradation feed
loss curves, inferred optimization landscapes, and the classification of
global- versus local-optimum rearrangements.
"""

__version__ = "0.1.0"

from .model import (
    AllocationMap,
    LandUse,
    ModelParams,
    ObjectiveValue,
    SuitabilityField,
    delta_phi_single_flip,
    evaluate,
    neighbor_match_count,
)
from .degradation import DegradationSpec, apply_degradation
from .sampler import ChainConfig, SampleRecord, cluster_step, metropolis_sweep, run_chain

__all__ = [
    "__version__",
    "AllocationMap",
    "ChainConfig",
    "DegradationSpec",
    "LandUse",
    "ModelParams",
    "ObjectiveValue",
    "SampleRecord",
    "SuitabilityField",
    "apply_degradation",
    "cluster_step",
    "delta_phi_single_flip",
    "evaluate",
    "metropolis_sweep",
    "neighbor_match_count",
    "run_chain",
]
