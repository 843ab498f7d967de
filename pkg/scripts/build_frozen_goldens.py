#!/usr/bin/env python3
"""Regenerate the frozen-instance goldens consumed by the acceptance suite.

Runs the committed sweep plan (data/frozen/plan.json), derives the analysis
outputs for every suitability pressure, and copies into tests/golden/frozen/:

* manifest.json                  the sweep manifest (plan + per-cell seeds)
* loss_curve_<ps>.csv            one per ps
* events_<ps>.json               one per ps
* landscape_<ps>_<delta>.csv     a representative pair per ps
* cells/<cell_id>/...            two full cells for bitwise reproduction

The full store is left at --store (default /tmp/frozen_store) and is not
committed. Expect roughly an hour of compute on two cores.
"""

import argparse
import json
import shutil
from pathlib import Path

from mola.analysis import build_events, landscape_for_cell, loss_curve
from mola.analysis import write_events_json, write_landscape_csv, write_loss_csv
from mola.sweep import ResultStore, SweepPlan, cell_id, execute

ROOT = Path(__file__).resolve().parent.parent
PLAN = ROOT / "data" / "frozen" / "plan.json"
GOLDEN = ROOT / "tests" / "golden" / "frozen"

# Cells committed for the bitwise-reproduction acceptance test.
REPRO_CELLS = [(13.5, 0.0), (15.5, 0.25)]
# Landscape snapshots bundled for the plotting front end and inspection.
LANDSCAPE_CELLS = [(13.5, 0.0), (13.5, 0.05), (13.5, 0.25)]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--store", default="/tmp/frozen_store")
    parser.add_argument("--workers", type=int, default=2)
    args = parser.parse_args()

    plan = SweepPlan.load(PLAN)
    store_dir = Path(args.store)
    store = execute(plan, store_dir, workers=args.workers)
    print(f"store complete: {len(store.manifest['cells'])} cells")

    GOLDEN.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(store_dir / "manifest.json", GOLDEN / "manifest.json")

    for ps in plan.ps_values:
        curve = loss_curve(store, ps)
        write_loss_csv(curve, GOLDEN / f"loss_curve_{ps:g}.csv")
        events = build_events(store, ps)
        write_events_json(events, GOLDEN / f"events_{ps:g}.json")
        print(f"ps={ps:g}: N_A(0)={curve[0].n_a}, delta*={events['delta_star']}, "
              f"steps={len(events['steps'])}")

    for ps, delta in LANDSCAPE_CELLS:
        hist = landscape_for_cell(store, ps, delta)
        write_landscape_csv(hist, GOLDEN / f"landscape_{ps:g}_{delta:g}.csv")

    for ps, delta in REPRO_CELLS:
        cid = cell_id(ps, delta)
        dst = GOLDEN / "cells" / cid
        if dst.exists():
            shutil.rmtree(dst)
        shutil.copytree(store_dir / "cells" / cid, dst)

    build_mini_store()
    print(f"goldens written to {GOLDEN}")
    return 0


def build_mini_store() -> None:
    """A small committed sweep store so the CLI byte-for-byte loss example
    can run straight from the repository."""
    plan_dict = json.loads(PLAN.read_text())
    plan_dict["ps_values"] = [13.5]
    plan_dict["delta_values"] = [0.0, 0.1, 0.2, 0.3, 0.5, 1.0]
    plan_dict["replicates_per_cell"] = 12
    plan_dict["chain"]["burn_in_sweeps"] = 1500
    plan_dict["chain"]["n_samples"] = 4
    plan = SweepPlan.from_dict(plan_dict)
    mini = GOLDEN.parent / "mini_store"
    if mini.exists():
        shutil.rmtree(mini)
    store = execute(plan, mini, workers=2)
    curve_path = GOLDEN.parent / "mini_loss_curve_13.5.csv"
    from mola.analysis import loss_curve as _loss_curve, write_loss_csv as _write

    _write(_loss_curve(store, 13.5), curve_path)
    print(f"mini store at {mini}")


if __name__ == "__main__":
    raise SystemExit(main())
