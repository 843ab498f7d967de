"""Parameter-sweep orchestration: grids of (p_suit, delta) cells, each with
many independent replicate chains, persisted as a manifest-driven result
store.

Store layout (one directory per sweep)::

    <store>/
      manifest.json            run manifest: plan, seeds, checksums, versions
      field.csv                exact copy of the suitability input
      cells/<cell_id>/
        samples.csv            chain_id,sweep_index,phi,phi_c,phi_s,n0,n1,n2
        aggregate.json         optimum estimates + use-fraction statistics
        best_map.csv           lowest-phi sampled map (long form i,j,use)
        modal_map.csv          most frequently sampled map

Every artifact is reproducible from (manifest, field, code version): each
cell's seed is a hash of the plan's master seed and the cell id, and each
chain XOR-folds its replicate index into the cell seed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import shutil
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field, replace
from pathlib import Path

import numpy as np

from . import __version__ as _code_version
from .degradation import DegradationSpec, apply_degradation
from .errors import ConfigurationError, IngestionError, ValidationError
from .field_io import generate_field, load_field, save_field
from .model import AllocationMap, ModelParams, SuitabilityField
from .sampler import ChainConfig, run_chain

STORE_FORMAT_VERSION = 1

# Six suitability pressures inside the bundled synthetic field's
# multi-step trade-off sub-window. Mixed optima with a positive
# agricultural baseline appear above ps ~ 10 for [0, 1]-normalized
# scores (below that the optimum is a uniform map), and curves show
# multiple distinct loss steps from ps ~ 13.5 up.
DEFAULT_PS_VALUES = (13.5, 14.0, 14.5, 15.0, 15.5, 16.0)
SAMPLE_COLUMNS = ["chain_id", "sweep_index", "phi", "phi_c", "phi_s", "n0", "n1", "n2"]


def default_delta_values() -> list[float]:
    return [round(0.01 * i, 2) for i in range(101)]


def fmt_value(x: float) -> str:
    """Canonical float spelling shared by cell ids, CSVs, and manifests."""
    return repr(float(x))


def cell_id(ps: float, delta: float) -> str:
    return f"ps{fmt_value(ps)}_delta{fmt_value(delta)}"


@dataclass
class FieldSource:
    """Where the suitability field comes from: a file or the generator."""

    path: str | None = None
    generate: dict | None = None  # rows, cols, seed, smoothness

    def __post_init__(self):
        if (self.path is None) == (self.generate is None):
            raise ValidationError("field source needs exactly one of path / generate")

    def load(self, base_dir: Path | None = None) -> SuitabilityField:
        if self.generate is not None:
            g = self.generate
            return generate_field(
                int(g["rows"]), int(g["cols"]), int(g["seed"]), int(g.get("smoothness", 0))
            )
        p = Path(self.path)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        return load_field(p)


@dataclass
class SweepPlan:
    """Full description of a sweep; hashable to a reproducible identity."""

    field_source: FieldSource
    ps_values: list[float] = dc_field(default_factory=lambda: list(DEFAULT_PS_VALUES))
    delta_values: list[float] = dc_field(default_factory=default_delta_values)
    replicates_per_cell: int = 50
    chain: ChainConfig = dc_field(default_factory=ChainConfig)
    temperature: float = 1.0
    p_compact: float = 1.0
    # Deterministically initialized chains run first in every cell: greedy
    # per-cell argmax starts for the cell's degradation level and nearby
    # levels, then the three uniform maps. They anchor the optimum estimate;
    # the remaining chains explore from random starts. 0 disables anchoring.
    anchor_chains: int = 7

    def __post_init__(self):
        if not self.ps_values:
            raise ValidationError("ps_values must be non-empty")
        if any(ps < 0 for ps in self.ps_values):
            raise ValidationError("all ps_values must be >= 0")
        if sorted(self.delta_values) != list(self.delta_values):
            raise ValidationError("delta_values must be sorted ascending")
        if any(not 0 <= d <= 1 for d in self.delta_values):
            raise ValidationError("delta_values must lie in [0, 1]")
        if 0.0 not in [float(d) for d in self.delta_values]:
            raise ValidationError("delta_values must contain 0 (the loss baseline)")
        if self.replicates_per_cell < 1:
            raise ValidationError("replicates_per_cell must be >= 1")
        if not 0 <= self.anchor_chains <= 7:
            raise ValidationError("anchor_chains must be in [0, 7]")

    def params_for(self, ps: float) -> ModelParams:
        return ModelParams(p_suit=ps, p_compact=self.p_compact, temperature=self.temperature)

    def cells(self) -> list[tuple[float, float]]:
        return [(ps, d) for ps in self.ps_values for d in self.delta_values]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["chain"].pop("init_map", None)  # maps are not plan-file material
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepPlan":
        d = dict(d)
        d["field_source"] = FieldSource(**d["field_source"])
        chain = dict(d.get("chain", {}))
        chain.pop("init_map", None)
        d["chain"] = ChainConfig(**chain)
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "SweepPlan":
        with Path(path).open() as fh:
            try:
                return cls.from_dict(json.load(fh))
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                raise ConfigurationError(f"{path}: bad plan file: {exc}") from exc

    def save(self, path: str | Path) -> None:
        with Path(path).open("w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def cell_seed_for(master_seed: int, cid: str) -> int:
    """Deterministic per-cell seed: SHA-256 of "<master>:<cell id>".

    Depending only on the master seed and the cell's identity (not on the
    plan's cell ordering), so extending a plan never reseeds existing cells.
    """
    digest = hashlib.sha256(f"{master_seed}:{cid}".encode()).digest()
    return int.from_bytes(digest[:8], "big") & (2**63 - 1)


def cell_seeds(plan: SweepPlan) -> dict[str, int]:
    return {
        cid: cell_seed_for(plan.chain.seed, cid)
        for ps, d in plan.cells()
        for cid in [cell_id(ps, d)]
    }


def build_manifest(plan: SweepPlan, field_checksum: str) -> dict:
    seeds = cell_seeds(plan)
    return {
        "format_version": STORE_FORMAT_VERSION,
        "code_version": _code_version,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "plan": plan.to_dict(),
        "plan_hash": plan.hash(),
        "field_checksum": field_checksum,
        "cells": {
            cid: {"ps": ps, "delta": d, "seed": seeds[cid]}
            for (ps, d) in plan.cells()
            for cid in [cell_id(ps, d)]
        },
    }


def _write_map_csv(map_: AllocationMap, path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "use"])
        for i in range(map_.rows):
            for j in range(map_.cols):
                writer.writerow([i, j, int(map_.cells[i, j])])


def load_map_csv(path: str | Path) -> AllocationMap:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["i", "j", "use"]:
            raise IngestionError(f"{path}: expected header i,j,use, got {header}")
        entries = [(int(r[0]), int(r[1]), int(r[2])) for r in reader if r]
    rows = max(e[0] for e in entries) + 1
    cols = max(e[1] for e in entries) + 1
    cells = np.zeros((rows, cols), dtype=np.uint8)
    seen = np.zeros((rows, cols), dtype=bool)
    for i, j, u in entries:
        cells[i, j] = u
        seen[i, j] = True
    if not seen.all():
        i, j = np.argwhere(~seen)[0]
        raise IngestionError(f"{path}: missing cell (row {i}, col {j})")
    return AllocationMap(cells)


def _anchor_maps(field_: SuitabilityField, delta: float, n: int) -> list[AllocationMap]:
    """Deterministic chain starts: greedy argmax maps for this and nearby
    degradation levels, then the three uniform maps."""
    maps = []
    for d in (delta, max(0.0, delta - 0.05), min(1.0, delta + 0.05), 0.0):
        degraded = apply_degradation(field_, DegradationSpec(delta_a=d))
        maps.append(AllocationMap(degraded.scores.argmax(axis=2).astype(np.uint8)))
    for k in range(3):
        maps.append(AllocationMap(np.full((field_.rows, field_.cols), k, dtype=np.uint8)))
    return maps[:n]


def run_cell(
    field_: SuitabilityField,
    ps: float,
    delta: float,
    plan: SweepPlan,
    seed: int,
    cell_dir: Path,
) -> None:
    """Run every replicate chain of one (ps, delta) cell and persist it.

    Output content is a pure function of (plan, seed, field); writes go to a
    temp directory renamed into place so interrupted cells never look done.
    """
    degraded = apply_degradation(field_, DegradationSpec(delta_a=delta))
    params = plan.params_for(ps)
    config = plan.chain.with_seed(seed)
    anchor_maps = _anchor_maps(field_, delta, plan.anchor_chains)

    best = None  # (phi, chain_id, sweep_index, map)
    map_counts: dict[bytes, int] = {}
    map_first: dict[bytes, AllocationMap] = {}
    comp_counts: dict[tuple[int, int, int], int] = {}
    fractions = []
    n_records = 0

    tmp_dir = cell_dir.parent / (cell_dir.name + ".tmp")
    if tmp_dir.exists():
        shutil.rmtree(tmp_dir)
    tmp_dir.mkdir(parents=True)
    with (tmp_dir / "samples.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SAMPLE_COLUMNS)
        for chain_id in range(plan.replicates_per_cell):
            if chain_id < len(anchor_maps):
                chain_cfg = replace(config, init="fixed-map", init_map=anchor_maps[chain_id])
            else:
                chain_cfg = config
            for rec in run_chain(chain_cfg, degraded, params, chain_id=chain_id):
                o = rec.objective
                n0, n1, n2 = rec.use_counts
                writer.writerow(
                    [
                        rec.chain_id,
                        rec.sweep_index,
                        fmt_value(o.phi),
                        int(o.phi_c),
                        fmt_value(o.phi_s),
                        n0,
                        n1,
                        n2,
                    ]
                )
                key = rec.map.cells.tobytes()
                map_counts[key] = map_counts.get(key, 0) + 1
                if key not in map_first:
                    map_first[key] = rec.map.copy()
                comp = (n0, n1, n2)
                comp_counts[comp] = comp_counts.get(comp, 0) + 1
                fractions.append(rec.use_fractions)
                if best is None or o.phi < best[0]:
                    best = (o.phi, rec.chain_id, rec.sweep_index, rec.map.copy())
                n_records += 1

    if best is None:
        raise ConfigurationError("cell produced no samples; n_samples must be >= 1 in sweeps")

    # Deterministic tie-break: earliest-sampled map among the most frequent
    # (dict order is first-encounter order).
    top = max(map_counts.values())
    modal_key = next(key for key in map_counts if map_counts[key] == top)
    modal_map = map_first[modal_key]
    best_map = best[3]

    frac = np.asarray(fractions)
    aggregate = {
        "ps": ps,
        "delta": delta,
        "seed": seed,
        "n_chains": plan.replicates_per_cell,
        "n_records": n_records,
        "phi_min": best[0],
        "phi_min_chain_id": best[1],
        "phi_min_sweep_index": best[2],
        "best_composition": list(best_map.use_counts()),
        "modal_count": map_counts[modal_key],
        "modal_composition": list(modal_map.use_counts()),
        "use_fraction_mean": [float(x) for x in frac.mean(axis=0)],
        "use_fraction_var": [float(x) for x in frac.var(axis=0)],
        "composition_histogram": {
            f"{c[0]},{c[1]},{c[2]}": n for c, n in sorted(comp_counts.items())
        },
    }
    with (tmp_dir / "aggregate.json").open("w") as fh:
        json.dump(aggregate, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_map_csv(best_map, tmp_dir / "best_map.csv")
    _write_map_csv(modal_map, tmp_dir / "modal_map.csv")

    if cell_dir.exists():
        for p in cell_dir.iterdir():
            p.unlink()
        cell_dir.rmdir()
    os.replace(tmp_dir, cell_dir)


def _run_cell_task(store: str, cid: str) -> str:
    """Worker entry: reload inputs from the store and run one cell."""
    root = Path(store)
    manifest = json.loads((root / "manifest.json").read_text())
    plan = SweepPlan.from_dict(manifest["plan"])
    field_ = load_field(root / "field.csv")
    info = manifest["cells"][cid]
    run_cell(field_, info["ps"], info["delta"], plan, info["seed"], root / "cells" / cid)
    return cid


class ResultStore:
    """Read access to a sweep output directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        manifest_path = self.root / "manifest.json"
        if not manifest_path.exists():
            raise IngestionError(f"{self.root}: not a result store (no manifest.json)")
        self.manifest = json.loads(manifest_path.read_text())
        self.plan = SweepPlan.from_dict(self.manifest["plan"])

    def cell_dir(self, ps: float, delta: float) -> Path:
        return self.root / "cells" / cell_id(ps, delta)

    def is_complete(self, ps: float, delta: float) -> bool:
        return (self.cell_dir(ps, delta) / "aggregate.json").exists()

    def missing_cells(self) -> list[str]:
        return [
            cid
            for cid, info in self.manifest["cells"].items()
            if not self.is_complete(info["ps"], info["delta"])
        ]

    def ps_values(self) -> list[float]:
        return list(self.plan.ps_values)

    def delta_values(self) -> list[float]:
        return list(self.plan.delta_values)

    def aggregate(self, ps: float, delta: float) -> dict:
        path = self.cell_dir(ps, delta) / "aggregate.json"
        if not path.exists():
            raise IngestionError(f"missing cell {cell_id(ps, delta)} in {self.root}")
        return json.loads(path.read_text())

    def composition_counts(self, ps: float, delta: float) -> dict[tuple[int, int, int], int]:
        hist = self.aggregate(ps, delta)["composition_histogram"]
        return {tuple(int(v) for v in key.split(",")): n for key, n in hist.items()}

    def samples(self, ps: float, delta: float) -> dict[str, np.ndarray]:
        path = self.cell_dir(ps, delta) / "samples.csv"
        if not path.exists():
            raise IngestionError(f"missing cell {cell_id(ps, delta)} in {self.root}")
        data = np.genfromtxt(path, delimiter=",", names=True)
        return {name: np.atleast_1d(data[name]) for name in data.dtype.names}

    def best_map(self, ps: float, delta: float) -> AllocationMap:
        return load_map_csv(self.cell_dir(ps, delta) / "best_map.csv")

    def modal_map(self, ps: float, delta: float) -> AllocationMap:
        return load_map_csv(self.cell_dir(ps, delta) / "modal_map.csv")


def execute(
    plan: SweepPlan,
    out_dir: str | Path,
    workers: int | None = None,
    base_dir: Path | None = None,
) -> ResultStore:
    """Run a full sweep into out_dir; idempotent per cell.

    Cells already completed (aggregate.json present) are skipped, which makes
    interrupted runs resumable by re-executing the same plan or manifest.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.json"
    if manifest_path.exists():
        # Resuming: the store is self-contained, use its own field copy.
        existing = json.loads(manifest_path.read_text())
        if existing["plan_hash"] != plan.hash():
            raise ConfigurationError(
                f"{out} already holds a different sweep (plan hash mismatch)"
            )
        manifest = existing
        field_ = load_field(out / "field.csv")
    else:
        field_ = plan.field_source.load(base_dir)
        manifest = build_manifest(plan, field_.checksum())
        save_field(field_, out / "field.csv")
        with manifest_path.open("w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if manifest["field_checksum"] != field_.checksum():
        raise ConfigurationError("field checksum does not match the manifest")

    (out / "cells").mkdir(exist_ok=True)
    store = ResultStore(out)
    todo = store.missing_cells()
    if not todo:
        return store
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(todo) == 1:
        for cid in todo:
            _run_cell_task(str(out), cid)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for _ in pool.map(_run_cell_task, [str(out)] * len(todo), todo):
                pass
    return ResultStore(out)


def resume(manifest_path: str | Path, workers: int | None = None) -> ResultStore:
    """Complete any missing cells of an existing store from its manifest."""
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.json"
    if not manifest_path.exists():
        raise IngestionError(f"{manifest_path}: no such manifest")
    root = manifest_path.parent
    manifest = json.loads(manifest_path.read_text())
    plan = SweepPlan.from_dict(manifest["plan"])
    return execute(plan, root, workers=workers)
