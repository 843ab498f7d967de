"""Suitability field ingestion, persistence, and synthetic generation.

Two on-disk forms are accepted:

* long form - a single CSV with header ``i,j,k,s``, one row per
  (row, col, use) score; this is the form the writer emits.
* per-plane form - a directory containing ``plane0.csv``, ``plane1.csv``,
  ``plane2.csv``, each a headerless rows x cols grid of scores.

Floats are written with repr so a save/load round trip is bit-identical.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import IngestionError, ValidationError
from .model import N_USES, SuitabilityField

LONG_HEADER = ["i", "j", "k", "s"]


def save_field(field: SuitabilityField, path: str | Path) -> None:
    """Write a field as a long-form CSV (header i,j,k,s)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LONG_HEADER)
        scores = field.scores
        for i in range(field.rows):
            for j in range(field.cols):
                for k in range(N_USES):
                    writer.writerow([i, j, k, repr(float(scores[i, j, k]))])


def _load_long_form(path: Path, rows: int | None, cols: int | None) -> np.ndarray:
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestionError(f"{path}: empty file")
        if [h.strip() for h in header] != LONG_HEADER:
            raise IngestionError(f"{path}: expected header {','.join(LONG_HEADER)}, got {header}")
        entries = []
        max_i = max_j = -1
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                i, j, k = int(row[0]), int(row[1]), int(row[2])
                s = float(row[3])
            except (ValueError, IndexError) as exc:
                raise IngestionError(f"{path}:{lineno}: malformed row {row}") from exc
            if k < 0 or k >= N_USES:
                raise IngestionError(f"{path}:{lineno}: use plane {k} out of range (row {i}, col {j})")
            entries.append((i, j, k, s))
            max_i = max(max_i, i)
            max_j = max(max_j, j)
    if rows is None:
        rows = max_i + 1
    if cols is None:
        cols = max_j + 1
    scores = np.full((rows, cols, N_USES), np.nan)
    for i, j, k, s in entries:
        if not (0 <= i < rows and 0 <= j < cols):
            raise IngestionError(
                f"{path}: cell (row {i}, col {j}) outside the {rows}x{cols} grid"
            )
        scores[i, j, k] = s
    missing = np.argwhere(np.isnan(scores))
    if missing.size:
        i, j, k = missing[0]
        raise IngestionError(f"{path}: missing score for row {i}, col {j}, use plane {k}")
    return scores


def _load_plane_dir(path: Path, rows: int | None, cols: int | None) -> np.ndarray:
    planes = []
    for k in range(N_USES):
        plane_path = path / f"plane{k}.csv"
        if not plane_path.exists():
            raise IngestionError(f"{path}: missing use plane {k} ({plane_path.name})")
        try:
            plane = np.loadtxt(plane_path, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise IngestionError(f"{plane_path}: {exc}") from exc
        planes.append(plane)
    shapes = {p.shape for p in planes}
    if len(shapes) != 1:
        raise IngestionError(f"{path}: planes disagree on grid shape: {sorted(shapes)}")
    scores = np.stack(planes, axis=2)
    if rows is not None and cols is not None and scores.shape[:2] != (rows, cols):
        raise IngestionError(
            f"{path}: expected {rows}x{cols} grid, file holds {scores.shape[0]}x{scores.shape[1]}"
        )
    return scores


def load_field(path: str | Path, rows: int | None = None, cols: int | None = None) -> SuitabilityField:
    """Load and validate a suitability field from either accepted form.

    Raises IngestionError naming the offending row/col/plane on any defect
    (missing plane, negative or non-finite score, dimension mismatch).
    """
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"{path}: no such file or directory")
    if path.is_dir():
        scores = _load_plane_dir(path, rows, cols)
    else:
        scores = _load_long_form(path, rows, cols)
    if rows is not None and scores.shape[0] != rows:
        raise IngestionError(f"{path}: expected {rows} rows, got {scores.shape[0]}")
    if cols is not None and scores.shape[1] != cols:
        raise IngestionError(f"{path}: expected {cols} cols, got {scores.shape[1]}")
    try:
        return SuitabilityField(scores)
    except ValidationError as exc:
        raise IngestionError(f"{path}: {exc}") from exc


def _mean_filter_3x3(plane: np.ndarray) -> np.ndarray:
    """One round of 3x3 mean filtering, normalized by the in-bounds count."""
    acc = np.zeros_like(plane)
    cnt = np.zeros_like(plane)
    rows, cols = plane.shape
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            src = plane[
                max(di, 0) : rows + min(di, 0), max(dj, 0) : cols + min(dj, 0)
            ]
            dst = (
                slice(max(-di, 0), rows + min(-di, 0)),
                slice(max(-dj, 0), cols + min(-dj, 0)),
            )
            acc[dst] += src
            cnt[dst] += 1.0
    return acc / cnt


def generate_field(rows: int, cols: int, seed: int, smoothness: int = 0) -> SuitabilityField:
    """Synthetic spatially correlated field, deterministic given the seed.

    Each plane starts from i.i.d. uniform noise, gets `smoothness` rounds of
    3x3 mean filtering (in-bounds normalized), and is min-max rescaled to
    [0, 1]. Plane 0 is drawn first, then 1, then 2, from one PCG64 stream.
    """
    if rows < 1 or cols < 1:
        raise ValidationError(f"grid must be at least 1x1, got {rows}x{cols}")
    if smoothness < 0:
        raise ValidationError(f"smoothness must be >= 0, got {smoothness}")
    rng = np.random.default_rng(seed)
    scores = np.empty((rows, cols, N_USES))
    for k in range(N_USES):
        plane = rng.random((rows, cols))
        for _ in range(smoothness):
            plane = _mean_filter_3x3(plane)
        lo, hi = plane.min(), plane.max()
        if hi > lo:
            plane = (plane - lo) / (hi - lo)
        else:
            plane = np.zeros_like(plane)
        scores[:, :, k] = plane
    return SuitabilityField(scores)
