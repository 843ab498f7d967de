"""Turns sweep results into degradation-loss science.

* loss curves: relative agricultural loss of the per-cell optimal map
  against the zero-degradation baseline,
  lambda = (N_A(0) - N_A(delta)) / N_A(0);
* step detection over a loss curve (punctuated response);
* landscape inference: -log of the empirical probability of each land-use
  composition (n0, n1, n2) at fixed sampling temperature;
* optimum extraction and classification of landscape rearrangements between
  adjacent degradation levels as global-optimum (GO) or subleading-local-
  optimum (SLO) events.

Emitted file contracts (consumed by the plotting front end):

* ``loss_curve_<ps>.csv``      columns ``delta,n_a,lambda``
* ``landscape_<ps>_<delta>.csv`` columns ``n0,n1,n2,count,p,neglogp``
* ``events_<ps>.json``         steps plus per-interval classifications
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import UndefinedBaselineError, ValidationError
from .sampler import SampleRecord
from .sweep import ResultStore, fmt_value

GO_REARRANGEMENT = "GO-rearrangement"
SLO_REARRANGEMENT = "SLO-rearrangement"
NO_REARRANGEMENT = "none"

TOTAL_LOSS_EPS = 1e-9


@dataclass
class LossPoint:
    """One point of a degradation-loss curve."""

    delta_a: float
    n_a: int
    lambda_a: float


@dataclass
class StepEvent:
    """A maximal run of adjacent super-threshold loss increments."""

    delta_start: float
    delta_end: float
    jump: float


@dataclass
class StepReport:
    steps: list[StepEvent]
    delta_star: float | None  # smallest delta with lambda >= 1 - eps, if any
    jump_threshold: float


@dataclass
class LandscapeBin:
    count: int
    p: float
    neg_log_p: float


@dataclass
class LandscapeHistogram:
    """Empirical composition landscape: occupied bins only.

    neg_log_p is -log(probability); unoccupied bins carry no entry rather
    than an infinite sentinel.
    """

    temperature: float
    n_total: int
    bins: dict[tuple[int, int, int], LandscapeBin]

    def occupied(self) -> list[tuple[int, int, int]]:
        return sorted(self.bins)

    def probability(self, bin_: tuple[int, int, int]) -> float:
        entry = self.bins.get(tuple(bin_))
        return entry.p if entry else 0.0


@dataclass
class Optimum:
    bin: tuple[int, int, int]
    depth: float  # neg_log_p at the bin
    barrier: float | None = None  # shallowest occupied escape, if estimable


@dataclass
class OptimaReport:
    """Global optimum and subleading local optima of one landscape."""

    global_opt: Optimum
    local_opts: list[Optimum] = dc_field(default_factory=list)
    classification: str | None = None  # filled for step events in event reports

    def slo_bins(self) -> list[tuple[int, int, int]]:
        return [o.bin for o in self.local_opts if o.bin != self.global_opt.bin]


def loss_curve(store: ResultStore, ps: float) -> list[LossPoint]:
    """Loss at every degradation level of one suitability pressure.

    N_A comes from the cell's lowest-phi sampled map. Refuses when the
    zero-degradation baseline has no agricultural parcels.
    """
    deltas = store.delta_values()
    if 0.0 not in [float(d) for d in deltas]:
        raise UndefinedBaselineError("store has no delta=0 cell for the loss baseline")
    baseline = int(store.aggregate(ps, 0.0)["best_composition"][0])
    if baseline <= 0:
        raise UndefinedBaselineError(
            f"N_A(0) = 0 at ps={ps}: loss is undefined for this regime"
        )
    points = []
    for d in deltas:
        n_a = int(store.aggregate(ps, d)["best_composition"][0])
        points.append(LossPoint(delta_a=float(d), n_a=n_a, lambda_a=(baseline - n_a) / baseline))
    return points


def detect_steps(curve: Sequence[LossPoint], jump_threshold: float = 0.05) -> StepReport:
    """Find maximal consecutive runs of |d(lambda)| > threshold between
    adjacent samples, and the total-loss onset delta*."""
    if any(curve[i].delta_a > curve[i + 1].delta_a for i in range(len(curve) - 1)):
        raise ValidationError("loss curve must be sorted by delta")
    steps: list[StepEvent] = []
    run_start = None
    for i in range(len(curve) - 1):
        jump = curve[i + 1].lambda_a - curve[i].lambda_a
        if abs(jump) > jump_threshold:
            if run_start is None:
                run_start = i
        elif run_start is not None:
            steps.append(_make_step(curve, run_start, i))
            run_start = None
    if run_start is not None:
        steps.append(_make_step(curve, run_start, len(curve) - 1))
    delta_star = None
    for p in curve:
        if p.lambda_a >= 1.0 - TOTAL_LOSS_EPS:
            delta_star = p.delta_a
            break
    return StepReport(steps=steps, delta_star=delta_star, jump_threshold=jump_threshold)


def _make_step(curve: Sequence[LossPoint], start: int, end: int) -> StepEvent:
    return StepEvent(
        delta_start=curve[start].delta_a,
        delta_end=curve[end].delta_a,
        jump=curve[end].lambda_a - curve[start].lambda_a,
    )


def landscape_from_counts(
    counts: dict[tuple[int, int, int], int], temperature: float
) -> LandscapeHistogram:
    if not counts:
        raise ValidationError("cannot infer a landscape from zero samples")
    total = sum(counts.values())
    bins = {}
    for comp, n in sorted(counts.items()):
        if n <= 0:
            continue
        p = n / total
        bins[tuple(int(v) for v in comp)] = LandscapeBin(count=n, p=p, neg_log_p=-math.log(p))
    return LandscapeHistogram(temperature=temperature, n_total=total, bins=bins)


def infer_landscape(
    samples: Iterable[SampleRecord] | Iterable[tuple[int, int, int]],
    temperature: float,
) -> LandscapeHistogram:
    """Bin samples by exact use-count triple; p = count/total, depth = -log p."""
    counts: dict[tuple[int, int, int], int] = {}
    for s in samples:
        comp = tuple(s.use_counts) if isinstance(s, SampleRecord) else tuple(int(v) for v in s)
        counts[comp] = counts.get(comp, 0) + 1
    return landscape_from_counts(counts, temperature)


def landscape_for_cell(store: ResultStore, ps: float, delta: float) -> LandscapeHistogram:
    return landscape_from_counts(
        store.composition_counts(ps, delta), store.plan.temperature
    )


def _neighbor_bins(bin_: tuple[int, int, int]):
    """Compositions reachable by moving one parcel between two uses."""
    n0, n1, n2 = bin_
    for src, dst in ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)):
        counts = [n0, n1, n2]
        if counts[src] == 0:
            continue
        counts[src] -= 1
        counts[dst] += 1
        yield tuple(counts)


def optima_report(hist: LandscapeHistogram) -> OptimaReport:
    """Global optimum plus strict local optima of the occupied landscape.

    A bin is a local optimum when its depth is strictly below every occupied
    neighbor bin (isolated bins qualify vacuously). The barrier estimate is
    the shallowest occupied escape step, when one exists.
    """
    if not hist.bins:
        raise ValidationError("empty landscape")
    # Global optimum: minimal neg_log_p, ties broken by smallest triple.
    go_bin = min(hist.bins, key=lambda b: (hist.bins[b].neg_log_p, b))
    go = Optimum(bin=go_bin, depth=hist.bins[go_bin].neg_log_p)
    local: list[Optimum] = []
    for b, entry in sorted(hist.bins.items()):
        neighbor_depths = [
            hist.bins[nb].neg_log_p for nb in _neighbor_bins(b) if nb in hist.bins
        ]
        if all(entry.neg_log_p < nd for nd in neighbor_depths):
            barrier = min((nd - entry.neg_log_p for nd in neighbor_depths), default=None)
            local.append(Optimum(bin=b, depth=entry.neg_log_p, barrier=barrier))
    return OptimaReport(global_opt=go, local_opts=local)


def _agri_fraction(bin_: tuple[int, int, int]) -> float:
    return bin_[0] / sum(bin_)


def classify_rearrangement(
    before: OptimaReport, after: OptimaReport, fraction_tol: float = 0.05
) -> str:
    """GO-rearrangement when the global optimum moves beyond the composition
    tolerance; SLO-rearrangement when the GO is stable but the subleading
    local optima appear, disappear, or move beyond it; none otherwise.

    SLOs are matched between reports in agricultural-fraction order, so
    motion within the tolerance is not an event.
    """
    go_motion = abs(
        _agri_fraction(after.global_opt.bin) - _agri_fraction(before.global_opt.bin)
    )
    if go_motion > fraction_tol:
        return GO_REARRANGEMENT
    slo_before = sorted(_agri_fraction(b) for b in before.slo_bins())
    slo_after = sorted(_agri_fraction(b) for b in after.slo_bins())
    if len(slo_before) != len(slo_after):
        return SLO_REARRANGEMENT
    for fa, fb in zip(slo_before, slo_after):
        if abs(fa - fb) > fraction_tol:
            return SLO_REARRANGEMENT
    return NO_REARRANGEMENT


def build_events(
    store: ResultStore,
    ps: float,
    jump_threshold: float = 0.05,
    fraction_tol: float = 0.05,
) -> dict:
    """Steps of the loss curve plus a rearrangement classification for every
    adjacent pair of degradation levels; schema of events_<ps>.json."""
    curve = loss_curve(store, ps)
    report = detect_steps(curve, jump_threshold)
    deltas = [p.delta_a for p in curve]
    optima = [
        optima_report(landscape_for_cell(store, ps, d)) for d in deltas
    ]
    classifications = []
    for i in range(len(deltas) - 1):
        label = classify_rearrangement(optima[i], optima[i + 1], fraction_tol)
        classifications.append(
            {
                "delta_start": deltas[i],
                "delta_end": deltas[i + 1],
                "label": label,
            }
        )
    return {
        "ps": ps,
        "jump_threshold": jump_threshold,
        "fraction_tol": fraction_tol,
        "delta_star": report.delta_star,
        "steps": [
            {"delta_start": s.delta_start, "delta_end": s.delta_end, "jump": s.jump}
            for s in report.steps
        ],
        "classifications": classifications,
    }


def write_loss_csv(curve: Sequence[LossPoint], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta", "n_a", "lambda"])
        for p in curve:
            writer.writerow([fmt_value(p.delta_a), p.n_a, fmt_value(p.lambda_a)])


def write_landscape_csv(hist: LandscapeHistogram, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n0", "n1", "n2", "count", "p", "neglogp"])
        for b in hist.occupied():
            entry = hist.bins[b]
            writer.writerow(
                [b[0], b[1], b[2], entry.count, fmt_value(entry.p), fmt_value(entry.neg_log_p)]
            )


def write_events_json(events: dict, path: str | Path) -> None:
    with Path(path).open("w") as fh:
        json.dump(events, fh, indent=2, sort_keys=True)
        fh.write("\n")
