"""Edge-set precision/recall/F-measure and per-cell aggregation of trials."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Iterable

from .graph import Graph


@dataclass(frozen=True)
class EdgeScore:
    precision: float
    recall: float
    f_measure: float
    true_positives: int
    false_positives: int
    false_negatives: int
    vacuous: bool = False  # both edge sets empty


def f_measure(learned: Graph, truth: Graph) -> EdgeScore:
    """Compare edge sets as unordered vertex pairs; weights are ignored.

    Two empty graphs score 1.0 across the board with ``vacuous=True``.
    """
    if learned.n != truth.n:
        raise ValueError(f"vertex counts differ: {learned.n} vs {truth.n}")
    got, want = learned.edge_set(), truth.edge_set()
    tp = len(got & want)
    fp = len(got - want)
    fn = len(want - got)
    if not got and not want:
        return EdgeScore(1.0, 1.0, 1.0, 0, 0, 0, vacuous=True)
    precision = tp / (tp + fp) if got else 0.0
    recall = tp / (tp + fn) if want else 0.0
    denom = precision + recall
    f = 2 * precision * recall / denom if denom > 0 else 0.0
    return EdgeScore(precision, recall, f, tp, fp, fn)


@dataclass
class TrialRecord:
    """Outcome of one generate/learn/recover/score run.

    ``status`` is ``ok`` or the failure kind (``degenerate``,
    ``infeasible``, ``numerical``); failed trials carry no score.
    ``relaxed`` marks trials scored from a least-violation recovery.
    """

    model: str
    noise_level: float
    sparsity: int | None
    graph_seed: int
    trial_seed: int
    k_estimate: int
    score: EdgeScore | None
    status: str = "ok"
    relaxed: bool = False
    min_max_violation: float = 0.0
    runtime_ms: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "ok" and self.score is not None


TRIAL_FIELDS = ["model", "noise_level", "sparsity", "graph_seed", "trial_seed", "k_estimate",
                "precision", "recall", "f_measure", "status", "relaxed",
                "min_max_violation", "runtime_ms"]


def trials_to_csv(records: Iterable[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIAL_FIELDS)
    for r in records:
        s = r.score
        w.writerow([r.model, repr(r.noise_level), "" if r.sparsity is None else r.sparsity,
                    r.graph_seed, r.trial_seed, r.k_estimate,
                    "" if s is None else f"{s.precision:.6f}",
                    "" if s is None else f"{s.recall:.6f}",
                    "" if s is None else f"{s.f_measure:.6f}",
                    r.status, int(r.relaxed), f"{r.min_max_violation:.3e}", r.runtime_ms])
    return buf.getvalue()


@dataclass(frozen=True)
class CellSummary:
    model: str
    axis_value: float
    mean_f: float
    std_f: float
    count: int
    failures: int = 0

    @property
    def scheduled(self) -> int:
        return self.count + self.failures


def _mean_std(values: list[float]) -> tuple[float, float]:
    mean = math.fsum(values) / len(values)
    var = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)


def aggregate(records: list[TrialRecord], axis: str = "noise") -> list[CellSummary]:
    """Mean and population standard deviation of F per (model, axis value) cell.

    ``axis`` selects ``noise`` (group by noise_level) or ``sparsity``.
    Failed trials are excluded from the statistics but counted per cell.
    Output is sorted by (model, axis value).
    """
    if not records:
        raise ValueError("aggregate needs at least one record")
    if axis not in ("noise", "sparsity"):
        raise ValueError(f"unknown axis {axis!r}")
    cells: dict[tuple[str, float], list[TrialRecord]] = {}
    for r in records:
        key_val = r.noise_level if axis == "noise" else float(r.sparsity)
        cells.setdefault((r.model, key_val), []).append(r)
    out = []
    for (model, val), recs in sorted(cells.items()):
        scores = [r.score.f_measure for r in recs if r.ok]
        failures = sum(not r.ok for r in recs)
        if scores:
            mean, std = _mean_std(scores)
        else:
            mean, std = math.nan, math.nan
        out.append(CellSummary(model, val, mean, std, len(scores), failures))
    return out


def score_dict(score: EdgeScore) -> dict:
    return asdict(score)
