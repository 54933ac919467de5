"""End-to-end experiment driver: generate, learn, recover, score, sweep.

A run is a pure function of its :class:`ExperimentConfig`. Seeds are
derived from ``master_seed`` with :func:`specgl.rng.mix_seed`:

* graph seed:  ``mix_seed(master_seed, model_index, graph_index)``
* trial seed:  ``mix_seed(master_seed, model_index, graph_index, rep_index)``

where ``model_index`` is the position in ``("RBF", "ER", "BA")``. The trial
seed drives coefficients and noise; the learner uses
``mix_seed(trial_seed, 0)``. Trial seeds do not depend on the noise or
sparsity level, so every level sees the same graphs and the same noise
shape.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DegenerateGraph, FailedConvergence
from .learn import LearnConfig, estimate_sparsity, learn_eigenbasis
from .metrics import CellSummary, TrialRecord, aggregate, f_measure, trials_to_csv
from .graph import Graph
from .recover import (DEFAULT_TAU, DEFAULT_TOL, RecoveredAdjacency, Status, binarize,
                      recover_adjacency)
from .rng import mix_seed
from .synth import GRAPH_MODELS, SignalGenConfig, gen_graph, ground_truth

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1

# Reference mean F-measures at noise level 0.3, printed beside sweep output.
REFERENCE_F = {"ER": 0.8804, "BA": 0.8964, "RBF": 0.9726}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment's output.

    Noise levels are per-entry variances unless ``noise_scale`` is ``std``,
    in which case each level is a standard deviation and gets squared.
    ``learn_k = None`` estimates sparsity per trial.
    """

    n: int = 20
    m: int = 300
    models: tuple[str, ...] = GRAPH_MODELS
    k_max: int = 5
    coeff_lo: float = 1.0
    coeff_hi: float = 2.0
    noise_levels: tuple[float, ...] = (0.3,)
    noise_scale: str = "variance"
    sparsity_levels: tuple[int, ...] = (2, 4, 6, 8, 10, 12)
    sparsity_noise_level: float = 0.0
    graphs_per_model: int = 10
    noise_reps_per_graph: int = 10
    learn_k: int | None = 5
    learn_epsilon: float = 1e-6
    learn_max_iters: int = 500
    learn_restarts: int = 5
    tau: float = DEFAULT_TAU
    lp_tol: float = DEFAULT_TOL
    sparse_objective: bool = False
    accept_relaxed: bool = True
    rbf_sigma: float = 0.5
    rbf_threshold: float = 0.75
    er_p: float = 0.2
    ba_edges_per_vertex: int = 1
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(m.upper() for m in self.models))
        self.validate()

    def validate(self) -> None:
        if not self.models:
            raise ConfigError("models must name at least one of RBF, ER, BA")
        bad = [m for m in self.models if m not in GRAPH_MODELS]
        if bad:
            raise ConfigError(f"unknown graph models {bad}")
        for name in ("n", "m", "k_max", "graphs_per_model", "noise_reps_per_graph",
                     "learn_max_iters", "learn_restarts"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if self.k_max > self.n:
            raise ConfigError("k_max must not exceed n")
        if any(v < 0 for v in self.noise_levels) or self.sparsity_noise_level < 0:
            raise ConfigError("noise levels must be nonnegative")
        if any(not 1 <= s <= self.n for s in self.sparsity_levels):
            raise ConfigError(f"sparsity levels must lie in 1..{self.n}")
        if self.learn_k is not None and not 1 <= self.learn_k <= self.n:
            raise ConfigError(f"learn_k must lie in 1..{self.n} or be auto")
        if self.noise_scale not in ("variance", "std"):
            raise ConfigError("noise_scale must be 'variance' or 'std'")
        if self.tau < 0:
            raise ConfigError("tau must be nonnegative")

    def variance(self, level: float) -> float:
        return level * level if self.noise_scale == "std" else level

    def graph_params(self, model: str) -> dict:
        if model == "RBF":
            return {"sigma": self.rbf_sigma, "keep_threshold": self.rbf_threshold}
        if model == "ER":
            return {"p": self.er_p}
        return {"edges_per_vertex": self.ba_edges_per_vertex}

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**d)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def full_scale(self) -> "ExperimentConfig":
        return self.replace(graphs_per_model=100, noise_reps_per_graph=100)


# --- config file ------------------------------------------------------------

def _parse_value(name: str, raw: str, ftype):
    raw = raw.strip()
    try:
        if name == "learn_k":
            return None if raw.lower() == "auto" else int(raw)
        if name == "models":
            return tuple(tok.strip().upper() for tok in raw.split(",") if tok.strip())
        if name == "noise_levels":
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
        if name == "sparsity_levels":
            return tuple(int(tok) for tok in raw.split(",") if tok.strip())
        if ftype == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if ftype == "int":
            return int(raw, 0)
        if ftype == "float":
            return float(raw)
        if ftype == "str":
            return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    raise ConfigError(f"unsupported config key {name}")


def load_config(path) -> ExperimentConfig:
    """Read a flat ``key = value`` config file.

    ``#`` starts a comment line. Lists are comma-separated. Unknown keys
    are errors.
    """
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                       interpolation=None)
    parser.optionxform = str
    text = Path(path).read_text()
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    types = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    for key, raw in parser["experiment"].items():
        if key not in types:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        ftype = types[key].split(" ")[0].split("[")[0]
        values[key] = _parse_value(key, raw, ftype)
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# --- trials -----------------------------------------------------------------

@dataclass(frozen=True)
class TrialSpec:
    model: str
    graph_index: int
    rep_index: int
    noise_level: float
    sparsity: int | None = None


def model_index(model: str) -> int:
    return GRAPH_MODELS.index(model)


def trial_seeds(cfg: ExperimentConfig, model: str, graph_index: int, rep_index: int):
    mi = model_index(model)
    return (mix_seed(cfg.master_seed, mi, graph_index),
            mix_seed(cfg.master_seed, mi, graph_index, rep_index))


@dataclass
class TrialInference:
    """Ground truth and recovered adjacency of one trial, before binarization.

    ``status`` is ``ok`` or a failure kind; ``recovered`` is None on failure.
    """

    graph: Graph | None
    k: int
    status: str
    recovered: RecoveredAdjacency | None = None

    @property
    def relaxed(self) -> bool:
        return self.recovered is not None and self.recovered.status is not Status.FEASIBLE


def infer_trial(cfg: ExperimentConfig, model: str, noise_level: float, graph_seed: int,
                noise_seed: int, sparsity: int | None = None) -> TrialInference:
    """Generate a ground truth and recover an adjacency matrix from its noisy signals."""
    try:
        g = gen_graph(model, cfg.n, graph_seed, **cfg.graph_params(model))
    except DegenerateGraph:
        return TrialInference(None, 0, "degenerate")
    sig = SignalGenConfig(m=cfg.m, k_max=cfg.k_max, coeff_lo=cfg.coeff_lo, coeff_hi=cfg.coeff_hi,
                          noise_level=cfg.variance(noise_level), seed=noise_seed,
                          exact_sparsity=sparsity)
    truth = ground_truth(g, sig)
    k = sparsity if sparsity is not None else cfg.learn_k
    lcfg = LearnConfig(k=k, epsilon=cfg.learn_epsilon, max_iters=cfg.learn_max_iters,
                       restarts=cfg.learn_restarts, seed=mix_seed(noise_seed, 0))
    try:
        if k is None:
            est = estimate_sparsity(truth.noisy_signals, lcfg)
            k, learned = est.k, est.result
        else:
            learned = learn_eigenbasis(truth.noisy_signals, lcfg)
    except FailedConvergence:
        return TrialInference(g, k or 0, "numerical")
    rec = recover_adjacency(learned.basis, tol=cfg.lp_tol, sparse_objective=cfg.sparse_objective)
    # A NumericalFailure with a finite optimum still carries the solver's
    # least-violation point; only a solver breakdown loses the trial.
    if rec.status is Status.NUMERICAL_FAILURE and not math.isfinite(rec.min_max_violation):
        return TrialInference(g, k, "numerical")
    return TrialInference(g, k, "ok", rec)


def run_trial(cfg: ExperimentConfig, model: str, noise_level: float, graph_seed: int,
              noise_seed: int, sparsity: int | None = None) -> TrialRecord:
    """Infer the graph of one trial, binarize at ``cfg.tau`` and score it.

    Degenerate graphs and (when relaxed recoveries are not accepted)
    infeasible recoveries come back as failed records, not exceptions.
    """
    start = time.perf_counter()
    inf = infer_trial(cfg, model, noise_level, graph_seed, noise_seed, sparsity)
    violation = inf.recovered.min_max_violation if inf.recovered is not None else 0.0
    status, score = inf.status, None
    if status == "ok":
        if inf.relaxed and not cfg.accept_relaxed:
            status = "infeasible"
        else:
            score = f_measure(binarize(inf.recovered.matrix, cfg.tau), inf.graph)
    ms = int(round((time.perf_counter() - start) * 1000))
    return TrialRecord(model, noise_level, sparsity, graph_seed, noise_seed, inf.k, score,
                       status, inf.relaxed, violation, ms)


def _run_spec(args) -> TrialRecord:
    cfg, spec = args
    gseed, tseed = trial_seeds(cfg, spec.model, spec.graph_index, spec.rep_index)
    return run_trial(cfg, spec.model, spec.noise_level, gseed, tseed, spec.sparsity)


def run_specs(cfg: ExperimentConfig, specs: list[TrialSpec], jobs: int = 1) -> list[TrialRecord]:
    """Execute trials, optionally in a process pool; output order follows ``specs``."""
    work = [(cfg, s) for s in specs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_spec, work, chunksize=max(1, len(work) // (4 * jobs))))
    return [_run_spec(w) for w in work]


def _schedule(cfg: ExperimentConfig, levels, axis: str) -> list[TrialSpec]:
    specs = []
    for model in cfg.models:
        for level in levels:
            for gi in range(cfg.graphs_per_model):
                for ri in range(cfg.noise_reps_per_graph):
                    if axis == "noise":
                        specs.append(TrialSpec(model, gi, ri, float(level)))
                    else:
                        specs.append(TrialSpec(model, gi, ri, cfg.sparsity_noise_level, int(level)))
    return specs


# --- sweeps -----------------------------------------------------------------

@dataclass
class SweepTable:
    axis: str
    rows: list[CellSummary]
    records: list[TrialRecord] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["axis,model,value,mean_f,std_f,trials,failures"]
        for r in self.rows:
            value = f"{r.axis_value:g}"
            lines.append(f"{self.axis},{r.model},{value},{r.mean_f:.6f},{r.std_f:.6f},"
                         f"{r.count},{r.failures}")
        return "\n".join(lines) + "\n"

    def cell(self, model: str, value: float) -> CellSummary:
        for r in self.rows:
            if r.model == model and r.axis_value == value:
                return r
        raise KeyError((model, value))


def sweep_noise(cfg: ExperimentConfig, jobs: int = 1) -> SweepTable:
    if not cfg.noise_levels:
        raise ConfigError("noise_levels is empty")
    records = run_specs(cfg, _schedule(cfg, cfg.noise_levels, "noise"), jobs)
    return SweepTable("noise", aggregate(records, "noise"), records)


def sweep_sparsity(cfg: ExperimentConfig, jobs: int = 1) -> SweepTable:
    """Sweep exact per-column sparsity; the learner is told the true level."""
    if not cfg.sparsity_levels:
        raise ConfigError("sparsity_levels is empty")
    records = run_specs(cfg, _schedule(cfg, cfg.sparsity_levels, "sparsity"), jobs)
    return SweepTable("sparsity", aggregate(records, "sparsity"), records)


def write_plot_files(table: SweepTable, out: Path) -> list[Path]:
    """Two-column ``x y`` data per model plus a gnuplot script that plots them."""
    out = Path(out)
    written = []
    series = {}
    for r in table.rows:
        series.setdefault(r.model, []).append(r)
    plots = []
    for model, rows in series.items():
        path = out / f"{table.axis}_{model}.dat"
        with open(path, "w") as fh:
            fh.write(f"# {table.axis} mean_f ({model})\n")
            for r in rows:
                fh.write(f"{r.axis_value:g} {r.mean_f:.6f}\n")
        written.append(path)
        plots.append(f"'{path.name}' using 1:2 with linespoints title '{model}'")
    xlabel = "noise variance" if table.axis == "noise" else "sparsity (nonzeros per signal)"
    script = out / f"{table.axis}.gp"
    script.write_text(
        "set terminal pngcairo size 640,480\n"
        f"set output '{table.axis}.png'\n"
        f"set xlabel '{xlabel}'\n"
        "set ylabel 'F-measure'\n"
        "set yrange [0:1.05]\n"
        "set grid\n"
        "plot " + ", \\\n     ".join(plots) + "\n")
    written.append(script)
    return written


# --- manifests and replay ---------------------------------------------------

def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def run_sweep(cfg: ExperimentConfig, axis: str, jobs: int = 1) -> SweepTable:
    if axis == "noise":
        return sweep_noise(cfg, jobs)
    if axis == "sparsity":
        return sweep_sparsity(cfg, jobs)
    raise ConfigError(f"unknown sweep axis {axis!r}")


def write_sweep(cfg: ExperimentConfig, table: SweepTable, out: Path) -> Path:
    """Write table, trial log, plot files and a checksummed manifest into ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    text = table.to_csv()
    table_name = f"sweep_{table.axis}.csv"
    (out / table_name).write_text(text)
    (out / f"trials_{table.axis}.csv").write_text(trials_to_csv(table.records))
    write_plot_files(table, out)
    payload = {
        "version": MANIFEST_VERSION,
        "axis": table.axis,
        "config": cfg.to_dict(),
        "table_file": table_name,
        "table_sha256": _sha256(text),
        "table": text,
    }
    manifest = dict(payload, checksum=_sha256(_canonical(payload)))
    path = out / f"manifest_{table.axis}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def load_manifest(path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("version") != MANIFEST_VERSION:
        raise ConfigError(f"manifest version {data.get('version')!r} != {MANIFEST_VERSION}")
    checksum = data.pop("checksum", None)
    if checksum != _sha256(_canonical(data)):
        raise ConfigError("manifest checksum mismatch; the file was modified")
    return data


@dataclass
class ReplayResult:
    table: SweepTable
    text: str
    identical: bool


def replay(manifest_path, models: list[str] | None = None, jobs: int = 1) -> ReplayResult:
    """Re-run a recorded sweep and compare it with the recorded table.

    With ``models`` only those models are re-run, and the comparison is
    against the matching rows of the recorded table.
    """
    data = load_manifest(manifest_path)
    cfg = ExperimentConfig.from_dict(data["config"])
    recorded = data["table"]
    if models:
        wanted = tuple(m.upper() for m in models)
        missing = [m for m in wanted if m not in cfg.models]
        if missing:
            raise ConfigError(f"models {missing} are not in the recorded run")
        cfg = cfg.replace(models=wanted)
        lines = recorded.splitlines()
        recorded = "\n".join([lines[0]] + [ln for ln in lines[1:]
                                           if ln.split(",")[1] in wanted]) + "\n"
    table = run_sweep(cfg, data["axis"], jobs)
    text = table.to_csv()
    return ReplayResult(table, text, text == recorded)
