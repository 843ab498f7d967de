"""Command-line entry point.

Subcommands::

    mola field generate   synthesize a suitability field CSV
    mola field validate   check a field file and print its checksum
    mola sweep run        execute a sweep plan into a result store
    mola sweep resume     finish an interrupted store from its manifest
    mola analyze loss     emit loss_curve_<ps>.csv from a store
    mola analyze landscape  emit landscape_<ps>_<delta>.csv
    mola analyze events   emit events_<ps>.json (steps + classifications)
    mola oracle enumerate exact state or composition table for small grids

Exit codes: 0 success, 1 runtime failure (categorized message on stderr),
2 usage error. Every artifact-producing run writes a manifest recording the
inputs, seeds, and code version that reproduce it.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .analysis import (
    build_events,
    landscape_for_cell,
    loss_curve,
    write_events_json,
    write_landscape_csv,
    write_loss_csv,
)
from .enumerator import (
    DEFAULT_STATE_CAP,
    enumerate_states,
    exact_composition_landscape,
    write_composition_table,
    write_state_table,
)
from .errors import MolaError
from .field_io import generate_field, load_field, save_field
from .model import ModelParams
from .sweep import STORE_FORMAT_VERSION, ResultStore, SweepPlan, execute, resume


def _sidecar_manifest(output: Path, command: str, args: dict, inputs: dict) -> None:
    """Provenance sidecar: enough to reproduce the artifact exactly."""
    payload = {
        "code_version": __version__,
        "format_version": STORE_FORMAT_VERSION,
        "command": command,
        "args": args,
        "inputs": inputs,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    with Path(str(output) + ".manifest.json").open("w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_field_generate(args) -> int:
    field = generate_field(args.rows, args.cols, args.seed, args.smoothness)
    save_field(field, args.output)
    _sidecar_manifest(
        Path(args.output),
        "field generate",
        {"rows": args.rows, "cols": args.cols, "seed": args.seed, "smoothness": args.smoothness},
        {"checksum": field.checksum()},
    )
    print(f"wrote {args.rows}x{args.cols} field to {args.output} (sha256 {field.checksum()[:12]})")
    return 0


def _cmd_field_validate(args) -> int:
    field = load_field(args.path, rows=args.rows, cols=args.cols)
    print(f"{args.path}: OK ({field.rows}x{field.cols}, sha256 {field.checksum()})")
    return 0


def _load_plan(args) -> SweepPlan:
    plan = SweepPlan.load(args.plan)
    overrides = {}
    if args.replicates is not None:
        overrides["replicates_per_cell"] = args.replicates
    if args.temperature is not None:
        overrides["temperature"] = args.temperature
    if overrides:
        d = plan.to_dict()
        d.update(overrides)
        plan = SweepPlan.from_dict(d)
    return plan


def _cmd_sweep_run(args) -> int:
    plan = _load_plan(args)
    store = execute(plan, args.out, workers=args.workers, base_dir=Path(args.plan).parent)
    n = len(store.manifest["cells"])
    print(f"sweep complete: {n} cells in {store.root}")
    return 0


def _cmd_sweep_resume(args) -> int:
    store = resume(args.manifest, workers=args.workers)
    print(f"store complete: {len(store.manifest['cells'])} cells in {store.root}")
    return 0


def _cmd_analyze_loss(args) -> int:
    store = ResultStore(args.store)
    curve = loss_curve(store, args.ps)
    out = Path(args.output) if args.output else Path(f"loss_curve_{args.ps:g}.csv")
    write_loss_csv(curve, out)
    _sidecar_manifest(
        out,
        "analyze loss",
        {"ps": args.ps},
        {"store": str(store.root), "plan_hash": store.manifest["plan_hash"]},
    )
    print(f"wrote {out} ({len(curve)} points)")
    return 0


def _cmd_analyze_landscape(args) -> int:
    store = ResultStore(args.store)
    hist = landscape_for_cell(store, args.ps, args.delta)
    out = (
        Path(args.output)
        if args.output
        else Path(f"landscape_{args.ps:g}_{args.delta:g}.csv")
    )
    write_landscape_csv(hist, out)
    _sidecar_manifest(
        out,
        "analyze landscape",
        {"ps": args.ps, "delta": args.delta},
        {"store": str(store.root), "plan_hash": store.manifest["plan_hash"]},
    )
    print(f"wrote {out} ({len(hist.bins)} occupied bins)")
    return 0


def _cmd_analyze_events(args) -> int:
    store = ResultStore(args.store)
    events = build_events(
        store, args.ps, jump_threshold=args.jump_threshold, fraction_tol=args.fraction_tol
    )
    out = Path(args.output) if args.output else Path(f"events_{args.ps:g}.json")
    write_events_json(events, out)
    _sidecar_manifest(
        out,
        "analyze events",
        {"ps": args.ps, "jump_threshold": args.jump_threshold, "fraction_tol": args.fraction_tol},
        {"store": str(store.root), "plan_hash": store.manifest["plan_hash"]},
    )
    print(f"wrote {out} ({len(events['steps'])} steps, delta_star={events['delta_star']})")
    return 0


def _cmd_oracle_enumerate(args) -> int:
    field = load_field(args.field, rows=args.rows, cols=args.cols)
    params = ModelParams(p_suit=args.ps, p_compact=args.pc, temperature=args.temperature)
    if args.composition:
        landscape = exact_composition_landscape(
            args.rows, args.cols, field, params, state_cap=args.state_cap
        )
        out = Path(args.output) if args.output else Path(f"exact_landscape_{args.rows}x{args.cols}.csv")
        write_composition_table(landscape, out)
        print(f"wrote {out} ({landscape.bins.shape[0]} bins)")
    else:
        result = enumerate_states(args.rows, args.cols, field, params, state_cap=args.state_cap)
        out = Path(args.output) if args.output else Path(f"exact_states_{args.rows}x{args.cols}.csv")
        write_state_table(result, out)
        print(f"wrote {out} ({result.n_states} states)")
    _sidecar_manifest(
        out,
        "oracle enumerate",
        {
            "rows": args.rows, "cols": args.cols, "ps": args.ps, "pc": args.pc,
            "temperature": args.temperature, "composition": args.composition,
        },
        {"field": str(args.field), "field_checksum": field.checksum()},
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mola",
        description="Weighted land-allocation sampling and degradation-loss analysis.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"mola {__version__} (store format {STORE_FORMAT_VERSION})",
    )
    top = parser.add_subparsers(dest="group", required=True)

    p_field = top.add_parser("field", help="suitability field tools")
    field_sub = p_field.add_subparsers(dest="command", required=True)
    g = field_sub.add_parser("generate", help="synthesize a field CSV")
    g.add_argument("--rows", type=int, required=True)
    g.add_argument("--cols", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--smoothness", type=int, default=0)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=_cmd_field_generate)
    v = field_sub.add_parser("validate", help="validate a field file")
    v.add_argument("path")
    v.add_argument("--rows", type=int)
    v.add_argument("--cols", type=int)
    v.set_defaults(func=_cmd_field_validate)

    p_sweep = top.add_parser("sweep", help="run or resume sweeps")
    sweep_sub = p_sweep.add_subparsers(dest="command", required=True)
    r = sweep_sub.add_parser("run", help="execute a plan file")
    r.add_argument("--plan", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--workers", type=int, default=None)
    r.add_argument("--replicates", type=int, default=None, help="override plan replicates")
    r.add_argument("--temperature", type=float, default=None, help="override plan temperature")
    r.set_defaults(func=_cmd_sweep_run)
    s = sweep_sub.add_parser("resume", help="complete a store from its manifest")
    s.add_argument("--manifest", required=True)
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=_cmd_sweep_resume)

    p_an = top.add_parser("analyze", help="derive science from a result store")
    an_sub = p_an.add_subparsers(dest="command", required=True)
    lo = an_sub.add_parser("loss", help="loss curve CSV for one ps")
    lo.add_argument("--store", required=True)
    lo.add_argument("--ps", type=float, required=True)
    lo.add_argument("-o", "--output")
    lo.set_defaults(func=_cmd_analyze_loss)
    la = an_sub.add_parser("landscape", help="composition landscape CSV for one cell")
    la.add_argument("--store", required=True)
    la.add_argument("--ps", type=float, required=True)
    la.add_argument("--delta", type=float, required=True)
    la.add_argument("-o", "--output")
    la.set_defaults(func=_cmd_analyze_landscape)
    ev = an_sub.add_parser("events", help="steps + SLO/GO classifications JSON")
    ev.add_argument("--store", required=True)
    ev.add_argument("--ps", type=float, required=True)
    ev.add_argument("--jump-threshold", type=float, default=0.05)
    ev.add_argument("--fraction-tol", type=float, default=0.05)
    ev.add_argument("-o", "--output")
    ev.set_defaults(func=_cmd_analyze_events)

    p_or = top.add_parser("oracle", help="exact enumeration for small grids")
    or_sub = p_or.add_subparsers(dest="command", required=True)
    en = or_sub.add_parser("enumerate", help="exact state/composition table")
    en.add_argument("--rows", type=int, required=True)
    en.add_argument("--cols", type=int, required=True)
    en.add_argument("--field", required=True)
    en.add_argument("--ps", type=float, required=True)
    en.add_argument("--pc", type=float, default=1.0)
    en.add_argument("--temperature", type=float, default=1.0)
    en.add_argument("--composition", action="store_true", help="marginalize over compositions")
    en.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)
    en.add_argument("-o", "--output")
    en.set_defaults(func=_cmd_oracle_enumerate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MolaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
