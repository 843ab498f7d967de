"""Brute-force exact oracle for small grids.

Enumerates all 3^(rows*cols) allocations, computes exact objectives and
Boltzmann probabilities, and marginalizes them over land-use compositions.
State index convention: reading the map row-major as a base-3 numeral with
the first cell (row 0, col 0) as the most significant digit, so indices are
reproducible across implementations.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .errors import ConfigurationError, StateCapExceededError
from .model import AllocationMap, ModelParams, N_USES, SuitabilityField

DEFAULT_STATE_CAP = 3**16


def state_count(rows: int, cols: int) -> int:
    return N_USES ** (rows * cols)


def encode_state(map_: AllocationMap) -> int:
    """Base-3 index of a map (first cell = most significant digit)."""
    idx = 0
    for v in map_.cells.ravel():
        idx = idx * N_USES + int(v)
    return idx


def decode_state(index: int, rows: int, cols: int) -> AllocationMap:
    cells = np.empty(rows * cols, dtype=np.uint8)
    for pos in range(rows * cols - 1, -1, -1):
        cells[pos] = index % N_USES
        index //= N_USES
    return AllocationMap(cells.reshape(rows, cols))


@njit(cache=True)
def _enumerate_phis(rows, cols, scores, p_compact, p_suit):
    nm = rows * cols
    n_states = N_USES**nm
    phis = np.empty(n_states)
    comp_index = np.empty(n_states, dtype=np.int64)
    digits = np.zeros(nm, dtype=np.uint8)
    grid = digits.reshape(rows, cols)
    for s in range(n_states):
        phi_c = 0
        phi_s = 0.0
        n0 = 0
        n1 = 0
        for i in range(rows):
            for j in range(cols):
                u = grid[i, j]
                phi_s += scores[i, j, u]
                if u == 0:
                    n0 += 1
                elif u == 1:
                    n1 += 1
                for di in range(-1, 2):
                    for dj in range(-1, 2):
                        if di == 0 and dj == 0:
                            continue
                        ni = i + di
                        nj = j + dj
                        if 0 <= ni < rows and 0 <= nj < cols and grid[ni, nj] == u:
                            phi_c += 1
        phis[s] = -p_compact * phi_c - p_suit * phi_s
        comp_index[s] = n0 * (nm + 1) + n1
        # Odometer increment: last cell is the fastest digit.
        pos = nm - 1
        while pos >= 0:
            if digits[pos] == N_USES - 1:
                digits[pos] = 0
                pos -= 1
            else:
                digits[pos] += 1
                break
    return phis, comp_index


@dataclass
class EnumerationResult:
    """Exact objective and Boltzmann probability for every state."""

    rows: int
    cols: int
    temperature: float
    phis: np.ndarray  # float64 [n_states], indexed by state index
    probs: np.ndarray  # float64 [n_states], sums to 1

    @property
    def n_states(self) -> int:
        return self.phis.size

    def argmin_state(self) -> int:
        """Index of the lowest-phi state (ties broken by smallest index)."""
        return int(np.argmin(self.phis))

    def mode_state(self) -> int:
        return int(np.argmax(self.probs))

    def map_for(self, index: int) -> AllocationMap:
        return decode_state(index, self.rows, self.cols)


@dataclass
class CompositionLandscape:
    """Exact marginal over use-count triples (n0, n1, n2)."""

    rows: int
    cols: int
    temperature: float
    bins: np.ndarray  # int64 [n_bins, 3] count triples, n0+n1+n2 = rows*cols
    probs: np.ndarray  # float64 [n_bins]
    neg_log_p: np.ndarray  # float64 [n_bins], equals -T*log(p)

    def as_dict(self) -> dict[tuple[int, int, int], tuple[float, float]]:
        return {
            (int(b[0]), int(b[1]), int(b[2])): (float(p), float(nl))
            for b, p, nl in zip(self.bins, self.probs, self.neg_log_p)
        }


def _check_cap(rows: int, cols: int, state_cap: int) -> None:
    n = state_count(rows, cols)
    if n > state_cap:
        raise StateCapExceededError(
            f"enumeration of a {rows}x{cols} grid needs {n} states; "
            f"cap is {state_cap} (raise state_cap to at least {n} to force it)"
        )


def _boltzmann(phis: np.ndarray, temperature: float) -> np.ndarray:
    # Shift by the minimum so weights never overflow.
    w = np.exp(-(phis - phis.min()) / temperature)
    return w / w.sum()


def enumerate_states(
    rows: int,
    cols: int,
    field: SuitabilityField,
    params: ModelParams,
    state_cap: int = DEFAULT_STATE_CAP,
) -> EnumerationResult:
    """Exact distribution table over every allocation of the grid."""
    _check_cap(rows, cols, state_cap)
    if (field.rows, field.cols) != (rows, cols):
        raise ConfigurationError(
            f"field is {field.rows}x{field.cols}, expected {rows}x{cols}"
        )
    phis, _ = _enumerate_phis(rows, cols, field.scores, params.p_compact, params.p_suit)
    probs = _boltzmann(phis, params.temperature)
    return EnumerationResult(rows, cols, params.temperature, phis, probs)


def exact_composition_landscape(
    rows: int,
    cols: int,
    field: SuitabilityField,
    params: ModelParams,
    state_cap: int = DEFAULT_STATE_CAP,
) -> CompositionLandscape:
    """Exact probability of each use-count triple, with -T*log(p) depths."""
    _check_cap(rows, cols, state_cap)
    if (field.rows, field.cols) != (rows, cols):
        raise ConfigurationError(
            f"field is {field.rows}x{field.cols}, expected {rows}x{cols}"
        )
    phis, comp_index = _enumerate_phis(
        rows, cols, field.scores, params.p_compact, params.p_suit
    )
    probs = _boltzmann(phis, params.temperature)
    nm = rows * cols
    marginal = np.bincount(comp_index, weights=probs, minlength=(nm + 1) * (nm + 1))
    bins = []
    bin_probs = []
    for n0 in range(nm + 1):
        for n1 in range(nm + 1 - n0):
            p = marginal[n0 * (nm + 1) + n1]
            if p > 0.0:
                bins.append((n0, n1, nm - n0 - n1))
                bin_probs.append(p)
    bins_arr = np.array(bins, dtype=np.int64)
    probs_arr = np.array(bin_probs)
    neg_log_p = -params.temperature * np.log(probs_arr)
    return CompositionLandscape(rows, cols, params.temperature, bins_arr, probs_arr, neg_log_p)


def composition_of_states(rows: int, cols: int, state_cap: int = DEFAULT_STATE_CAP) -> np.ndarray:
    """(n0, n1, n2) triple of every state index, in index order."""
    _check_cap(rows, cols, state_cap)
    nm = rows * cols
    indices = np.arange(state_count(rows, cols), dtype=np.int64)
    out = np.zeros((indices.size, 3), dtype=np.int64)
    for pos in range(nm):
        digit = (indices // N_USES ** (nm - 1 - pos)) % N_USES
        for k in range(N_USES):
            out[:, k] += digit == k
    return out


def write_state_table(result: EnumerationResult, path: str | Path) -> None:
    """Golden-file CSV: one row per state (state, phi, p)."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["state", "phi", "p"])
        for s in range(result.n_states):
            writer.writerow([s, repr(float(result.phis[s])), repr(float(result.probs[s]))])


def write_composition_table(landscape: CompositionLandscape, path: str | Path) -> None:
    """Golden-file CSV: one row per occupied composition bin."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n0", "n1", "n2", "p", "neglogp"])
        for b, p, nl in zip(landscape.bins, landscape.probs, landscape.neg_log_p):
            writer.writerow([int(b[0]), int(b[1]), int(b[2]), repr(float(p)), repr(float(nl))])
