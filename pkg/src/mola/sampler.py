"""Boltzmann samplers over allocations: p(x) proportional to exp(-phi(x)/T).

Two engines satisfy detailed balance against the same stationary law:

* ``metropolis`` - the single-site reference dynamics: each proposal picks a
  uniform cell and a uniform different use and accepts with
  min(1, exp(-dphi/T)).
* ``cluster`` - a Wolff-type update: grow a cluster over same-use Moore
  bonds with activation probability 1 - exp(-2*p_compact/T) (breaking one
  matching pair costs 2*p_compact), then accept the whole-cluster relabel
  with min(1, exp(-dphi_field/T)), where dphi_field is the suitability part
  only. The growth rule cancels the compactness part exactly.
* ``mixed`` - one Metropolis sweep followed by one cluster update per
  sweep. Each kernel preserves the stationary law, so the composition does
  too; this is the production engine for optimum hunting because cluster
  moves relabel whole domains that single-site moves cannot.

One sweep is rows*cols proposals for the Metropolis engine, one cluster
update for the cluster engine, and one of each for the mixed engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import ConfigurationError, ValidationError
from .model import (
    AllocationMap,
    ModelParams,
    ObjectiveValue,
    SuitabilityField,
    evaluate,
)

ENGINES = ("metropolis", "cluster", "mixed")
INIT_MODES = ("random-uniform", "fixed-map", "field-argmax", "uniform-0", "uniform-1", "uniform-2")

_SEED_MASK = (1 << 64) - 1


@dataclass
class ChainConfig:
    """Reproducible chain protocol; the seed fully determines the trajectory."""

    engine: str = "metropolis"
    seed: int = 0
    burn_in_sweeps: int = 1000
    sample_interval_sweeps: int = 10
    n_samples: int = 1
    init: str = "random-uniform"
    init_map: AllocationMap | None = None

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValidationError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.init not in INIT_MODES:
            raise ValidationError(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if self.init == "fixed-map" and self.init_map is None:
            raise ValidationError("init='fixed-map' requires init_map")
        if self.burn_in_sweeps < 0:
            raise ValidationError("burn_in_sweeps must be >= 0")
        if self.sample_interval_sweeps < 1:
            raise ValidationError("sample_interval_sweeps must be >= 1")
        if self.n_samples < 0:
            raise ValidationError("n_samples must be >= 0")
        if not 0 <= self.seed <= _SEED_MASK:
            raise ValidationError("seed must fit in 64 bits")

    def with_seed(self, seed: int) -> "ChainConfig":
        return replace(self, seed=seed)


@dataclass
class SampleRecord:
    """One recorded configuration with its exact objective decomposition."""

    map: AllocationMap
    objective: ObjectiveValue
    use_fractions: tuple[float, float, float]
    chain_id: int
    sweep_index: int

    @property
    def use_counts(self) -> tuple[int, int, int]:
        n = self.map.cells.size
        return tuple(round(f * n) for f in self.use_fractions)


@lru_cache(maxsize=None)
def _nbr_table(rows: int, cols: int) -> np.ndarray:
    return _kernels.neighbor_table(rows, cols)


def _flat_scores(field_: SuitabilityField) -> np.ndarray:
    return field_.scores.reshape(-1, 3)


def bond_probability(params: ModelParams) -> float:
    """Cluster-growth activation probability, 1 - exp(-2*p_compact/T)."""
    return 1.0 - math.exp(-2.0 * params.p_compact / params.temperature)


def chain_seed(seed: int, chain_id: int) -> int:
    """Stream-splitting rule: the chain id is XOR-folded into the seed."""
    return (seed ^ chain_id) & _SEED_MASK


def metropolis_sweep(
    state: AllocationMap,
    field_: SuitabilityField,
    params: ModelParams,
    rng: np.random.Generator,
) -> AllocationMap:
    """One full Metropolis sweep (rows*cols proposals); returns a new map."""
    _check(state, field_)
    grid = state.cells.copy()
    _kernels.metropolis_sweeps(
        grid.ravel(), _flat_scores(field_), _nbr_table(state.rows, state.cols),
        params.p_compact, params.p_suit, params.temperature, 1, rng,
    )
    return AllocationMap(grid)


def cluster_step(
    state: AllocationMap,
    field_: SuitabilityField,
    params: ModelParams,
    rng: np.random.Generator,
) -> AllocationMap:
    """One cluster update; returns a new map."""
    _check(state, field_)
    grid = state.cells.copy()
    _kernels.cluster_steps(
        grid.ravel(), _flat_scores(field_), _nbr_table(state.rows, state.cols),
        params.p_compact, params.p_suit, params.temperature, 1, rng,
    )
    return AllocationMap(grid)


def _check(state: AllocationMap, field_: SuitabilityField) -> None:
    if state.cells.size == 0:
        raise ValidationError("zero-area map")
    if (state.rows, state.cols) != (field_.rows, field_.cols):
        raise ConfigurationError(
            f"map is {state.rows}x{state.cols} but field is {field_.rows}x{field_.cols}"
        )


def _initial_grid(
    config: ChainConfig, field_: SuitabilityField, rng: np.random.Generator
) -> np.ndarray:
    if config.init == "fixed-map":
        m = config.init_map
        if (m.rows, m.cols) != (field_.rows, field_.cols):
            raise ConfigurationError("init_map dimensions do not match the field")
        return m.cells.copy()
    if config.init == "field-argmax":
        # Deterministic greedy start: each cell takes its best-scoring use.
        return field_.scores.argmax(axis=2).astype(np.uint8)
    if config.init.startswith("uniform-"):
        return np.full((field_.rows, field_.cols), int(config.init[-1]), dtype=np.uint8)
    return rng.integers(0, 3, size=(field_.rows, field_.cols), dtype=np.uint8)


def run_chain(
    config: ChainConfig,
    field_: SuitabilityField,
    params: ModelParams,
    chain_id: int = 0,
) -> Iterator[SampleRecord]:
    """Yield n_samples records after burn-in, spaced by the sample interval.

    Deterministic given (config.seed, chain_id); objectives are recomputed
    from scratch at every emission so records are exact.
    """
    if field_.rows * field_.cols == 0:
        raise ValidationError("zero-area map")
    rng = np.random.default_rng(chain_seed(config.seed, chain_id))
    grid = _initial_grid(config, field_, rng)
    n = config.n_samples
    if n == 0:
        return
    maps = np.empty((n, field_.rows * field_.cols), dtype=np.uint8)
    phi_c = np.empty(n, dtype=np.int64)
    phi_s = np.empty(n)
    counts = np.empty((n, 3), dtype=np.int64)
    kernel = {
        "metropolis": _kernels.run_chain_metropolis,
        "cluster": _kernels.run_chain_cluster,
        "mixed": _kernels.run_chain_mixed,
    }[config.engine]
    kernel(
        grid.ravel(),
        _flat_scores(field_),
        _nbr_table(field_.rows, field_.cols),
        params.p_compact,
        params.p_suit,
        params.temperature,
        config.burn_in_sweeps,
        config.sample_interval_sweeps,
        n,
        rng,
        maps,
        phi_c,
        phi_s,
        counts,
    )
    nm = field_.rows * field_.cols
    for s in range(n):
        pc = float(phi_c[s])
        ps_ = float(phi_s[s])
        phi = -params.p_compact * pc - params.p_suit * ps_
        yield SampleRecord(
            map=AllocationMap(maps[s].reshape(field_.rows, field_.cols)),
            objective=ObjectiveValue(phi=phi, phi_c=pc, phi_s=ps_),
            use_fractions=(counts[s, 0] / nm, counts[s, 1] / nm, counts[s, 2] / nm),
            chain_id=chain_id,
            sweep_index=config.burn_in_sweeps + (s + 1) * config.sample_interval_sweeps,
        )


def state_histogram(
    config: ChainConfig,
    field_: SuitabilityField,
    params: ModelParams,
    chain_id: int = 0,
) -> np.ndarray:
    """Per-state visit counts over the full state space (small grids only).

    States are indexed base-3, first cell most significant, matching the
    enumerator's convention.
    """
    nm = field_.rows * field_.cols
    if nm > 16:
        raise ConfigurationError(f"state histogram needs 3^{nm} bins; grid too large")
    rng = np.random.default_rng(chain_seed(config.seed, chain_id))
    grid = _initial_grid(config, field_, rng)
    counts = np.zeros(3**nm, dtype=np.int64)
    kernel = {
        "metropolis": _kernels.hist_chain_metropolis,
        "cluster": _kernels.hist_chain_cluster,
        "mixed": _kernels.hist_chain_mixed,
    }[config.engine]
    kernel(
        grid.ravel(),
        _flat_scores(field_),
        _nbr_table(field_.rows, field_.cols),
        params.p_compact,
        params.p_suit,
        params.temperature,
        config.burn_in_sweeps,
        config.sample_interval_sweeps,
        config.n_samples,
        rng,
        counts,
    )
    return counts


def incremental_drift(
    field_: SuitabilityField,
    params: ModelParams,
    engine: str = "metropolis",
    n_sweeps: int = 10_000,
    seed: int = 0,
) -> float:
    """|accumulated incremental phi - fresh full evaluation| after n_sweeps.

    Diagnostic for the bookkeeping the kernels use internally.
    """
    if engine not in ENGINES:
        raise ValidationError(f"engine must be one of {ENGINES}")
    rng = np.random.default_rng(seed)
    grid = rng.integers(0, 3, size=(field_.rows, field_.cols), dtype=np.uint8)
    start = evaluate(AllocationMap(grid.copy()), field_, params)
    nbr = _nbr_table(field_.rows, field_.cols)
    acc_c, acc_s = 0, 0.0
    if engine in ("metropolis", "mixed"):
        d_c, d_s, _ = _kernels.metropolis_sweeps(
            grid.ravel(), _flat_scores(field_), nbr, params.p_compact, params.p_suit,
            params.temperature, n_sweeps, rng,
        )
        acc_c += d_c
        acc_s += d_s
    if engine in ("cluster", "mixed"):
        d_c, d_s, _ = _kernels.cluster_steps(
            grid.ravel(), _flat_scores(field_), nbr, params.p_compact, params.p_suit,
            params.temperature, n_sweeps, rng,
        )
        acc_c += d_c
        acc_s += d_s
    accumulated = start.phi - params.p_compact * acc_c - params.p_suit * acc_s
    fresh = evaluate(AllocationMap(grid), field_, params).phi
    return abs(accumulated - fresh)
