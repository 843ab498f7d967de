"""Grid state, suitability field, and exact objective evaluation.

The objective of an allocation is

    phi = -p_compact * phi_c - p_suit * phi_s

where phi_c sums, over every cell, the number of Moore neighbors (8-cell
neighborhood, open boundary) sharing the cell's land use, and phi_s sums
each cell's suitability score for its assigned use.  Lower phi is better;
phi_c counts every matching unordered pair twice (once from each end).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import ConfigurationError, ValidationError

N_USES = 3

# Moore neighborhood offsets (8 neighbors, open boundary).
MOORE_OFFSETS = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


class LandUse(IntEnum):
    AGRICULTURE = 0
    CONSTRUCTION = 1
    CONSERVATION = 2


@dataclass
class ModelParams:
    """Objective weights and sampling temperature.

    p_compact is fixed to 1 by convention; p_suit is the suitability
    pressure relative to it.
    """

    p_suit: float
    p_compact: float = 1.0
    temperature: float = 1.0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValidationError(f"temperature must be > 0, got {self.temperature}")
        if not self.p_compact > 0:
            raise ValidationError(f"p_compact must be > 0, got {self.p_compact}")
        if self.p_suit < 0:
            raise ValidationError(f"p_suit must be >= 0, got {self.p_suit}")


@dataclass
class ObjectiveValue:
    """Total objective and its two components (phi = -p_c*phi_c - p_s*phi_s)."""

    phi: float
    phi_c: float
    phi_s: float


class AllocationMap:
    """One land-use label per parcel on an N x M grid.

    cells is a row-major uint8 array of shape (rows, cols); every entry is
    in {0, 1, 2}.
    """

    __slots__ = ("cells",)

    def __init__(self, cells: np.ndarray):
        cells = np.ascontiguousarray(cells, dtype=np.uint8)
        if cells.ndim != 2 or cells.shape[0] < 1 or cells.shape[1] < 1:
            raise ValidationError(f"cells must be a 2-D grid, got shape {cells.shape}")
        if cells.max(initial=0) >= N_USES:
            raise ValidationError("cell labels must be in {0, 1, 2}")
        self.cells = cells

    @property
    def rows(self) -> int:
        return self.cells.shape[0]

    @property
    def cols(self) -> int:
        return self.cells.shape[1]

    @classmethod
    def filled(cls, rows: int, cols: int, use: int = 0) -> "AllocationMap":
        return cls(np.full((rows, cols), use, dtype=np.uint8))

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator) -> "AllocationMap":
        return cls(rng.integers(0, N_USES, size=(rows, cols), dtype=np.uint8))

    def copy(self) -> "AllocationMap":
        return AllocationMap(self.cells.copy())

    def use_counts(self) -> tuple[int, int, int]:
        counts = np.bincount(self.cells.ravel(), minlength=N_USES)
        return int(counts[0]), int(counts[1]), int(counts[2])

    def use_fractions(self) -> tuple[float, float, float]:
        n = self.cells.size
        c0, c1, c2 = self.use_counts()
        return c0 / n, c1 / n, c2 / n

    def __eq__(self, other) -> bool:
        return isinstance(other, AllocationMap) and np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash((self.rows, self.cols, self.cells.tobytes()))

    def __repr__(self):
        return f"AllocationMap({self.rows}x{self.cols})"


class SuitabilityField:
    """Per-parcel, per-use suitability scores, shape (rows, cols, 3).

    Scores must be finite and non-negative; they act as the external field
    of the objective.
    """

    __slots__ = ("scores",)

    def __init__(self, scores: np.ndarray):
        scores = np.ascontiguousarray(scores, dtype=np.float64)
        if scores.ndim != 3 or scores.shape[2] != N_USES:
            raise ValidationError(
                f"scores must have shape (rows, cols, {N_USES}), got {scores.shape}"
            )
        if scores.shape[0] < 1 or scores.shape[1] < 1:
            raise ValidationError(f"field must cover at least one parcel, got {scores.shape}")
        bad = ~np.isfinite(scores)
        if bad.any():
            i, j, k = (int(v[0]) for v in np.nonzero(bad))
            raise ValidationError(f"non-finite score at row {i}, col {j}, use {k}")
        neg = scores < 0
        if neg.any():
            i, j, k = (int(v[0]) for v in np.nonzero(neg))
            raise ValidationError(
                f"negative score {scores[i, j, k]} at row {i}, col {j}, use {k}"
            )
        self.scores = scores

    @property
    def rows(self) -> int:
        return self.scores.shape[0]

    @property
    def cols(self) -> int:
        return self.scores.shape[1]

    def copy(self) -> "SuitabilityField":
        return SuitabilityField(self.scores.copy())

    def checksum(self) -> str:
        """SHA-256 of the raw float64 buffer; identifies a field exactly."""
        h = hashlib.sha256()
        h.update(np.array(self.scores.shape, dtype=np.int64).tobytes())
        h.update(self.scores.tobytes())
        return h.hexdigest()

    def crop(self, row0: int, col0: int, rows: int, cols: int) -> "SuitabilityField":
        if row0 < 0 or col0 < 0 or row0 + rows > self.rows or col0 + cols > self.cols:
            raise ValidationError("crop window out of bounds")
        return SuitabilityField(self.scores[row0 : row0 + rows, col0 : col0 + cols, :].copy())

    def __eq__(self, other) -> bool:
        return isinstance(other, SuitabilityField) and np.array_equal(self.scores, other.scores)

    def __repr__(self):
        return f"SuitabilityField({self.rows}x{self.cols}x{N_USES})"


def _check_dims(map_: AllocationMap, field: SuitabilityField) -> None:
    if (map_.rows, map_.cols) != (field.rows, field.cols):
        raise ConfigurationError(
            f"map is {map_.rows}x{map_.cols} but field is {field.rows}x{field.cols}"
        )


def neighbor_match_count(map_: AllocationMap, i: int, j: int) -> int:
    """Number of in-bounds Moore neighbors of (i, j) sharing its land use."""
    cells = map_.cells
    rows, cols = cells.shape
    if not (0 <= i < rows and 0 <= j < cols):
        raise IndexError(f"cell ({i}, {j}) out of bounds for {rows}x{cols} grid")
    use = cells[i, j]
    count = 0
    for di, dj in MOORE_OFFSETS:
        ni, nj = i + di, j + dj
        if 0 <= ni < rows and 0 <= nj < cols and cells[ni, nj] == use:
            count += 1
    return count


def compactness_sum(cells: np.ndarray) -> int:
    """Sum of same-use Moore-neighbor counts over all cells (vectorized).

    Equals twice the number of unordered matching adjacent pairs. Computed
    from four directed shifts, each counted twice.
    """
    total = 0
    # (down, right, down-right, down-left) covers every unordered pair once.
    for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
        a = cells[max(di, 0) : cells.shape[0] + min(di, 0), max(dj, 0) : cells.shape[1] + min(dj, 0)]
        b = cells[max(-di, 0) : cells.shape[0] + min(-di, 0), max(-dj, 0) : cells.shape[1] + min(-dj, 0)]
        total += int(np.count_nonzero(a == b))
    return 2 * total


def suitability_sum(cells: np.ndarray, scores: np.ndarray) -> float:
    """Sum over cells of the score for the assigned use."""
    gathered = np.take_along_axis(scores, cells[:, :, None].astype(np.intp), axis=2)
    return float(gathered.sum())


def evaluate(map_: AllocationMap, field: SuitabilityField, params: ModelParams) -> ObjectiveValue:
    """Exact objective of a map against a field."""
    _check_dims(map_, field)
    phi_c = float(compactness_sum(map_.cells))
    phi_s = suitability_sum(map_.cells, field.scores)
    phi = -params.p_compact * phi_c - params.p_suit * phi_s
    return ObjectiveValue(phi=phi, phi_c=phi_c, phi_s=phi_s)


def delta_phi_single_flip(
    map_: AllocationMap,
    field: SuitabilityField,
    params: ModelParams,
    i: int,
    j: int,
    new_use: int,
) -> float:
    """Objective change from relabeling cell (i, j) to new_use, without a full pass.

    Each affected matching pair changes phi_c by 2, consistent with the
    double-counting in compactness_sum.
    """
    _check_dims(map_, field)
    cells = map_.cells
    rows, cols = cells.shape
    if not (0 <= i < rows and 0 <= j < cols):
        raise IndexError(f"cell ({i}, {j}) out of bounds for {rows}x{cols} grid")
    old_use = int(cells[i, j])
    new_use = int(new_use)
    if new_use == old_use:
        return 0.0
    n_old = 0
    n_new = 0
    for di, dj in MOORE_OFFSETS:
        ni, nj = i + di, j + dj
        if 0 <= ni < rows and 0 <= nj < cols:
            u = cells[ni, nj]
            if u == old_use:
                n_old += 1
            elif u == new_use:
                n_new += 1
    d_phi_c = 2.0 * (n_new - n_old)
    d_phi_s = field.scores[i, j, new_use] - field.scores[i, j, old_use]
    return -params.p_compact * d_phi_c - params.p_suit * d_phi_s
