"""Command-line interface.

Exit codes: 0 success, 1 replay mismatch, 2 usage or config error,
3 numerical failure, 4 infeasible recovery.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, FailedConvergence, NumericalFailure, SpecGLError, ZeroSignal
from .experiment import (REFERENCE_F, ExperimentConfig, load_config, replay, run_sweep,
                         write_sweep)
from .graph import Graph, adjacency_of, read_edge_list, read_matrix, write_edge_list, write_matrix
from .learn import LearnConfig, estimate_sparsity, learn_eigenbasis, pseudo_error
from .metrics import f_measure
from .recover import DEFAULT_TAU, DEFAULT_TOL, Status, binarize, recover_adjacency
from .synth import GRAPH_MODELS, SignalGenConfig, gen_graph, ground_truth

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_NUMERICAL, EXIT_INFEASIBLE = 0, 1, 2, 3, 4

# Six-vertex demonstration graph (0-based).
DEMO6_EDGES = [(0, 1), (0, 5), (1, 2), (2, 4), (2, 5), (3, 4), (4, 5)]


def _k_arg(text: str) -> int | None:
    if text.lower() == "auto":
        return None
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be an integer or 'auto', got {text!r}")
    if k < 1:
        raise argparse.ArgumentTypeError("k must be >= 1")
    return k


def _seed_arg(text: str) -> int:
    seed = int(text, 0)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def cmd_gen(args) -> int:
    g = gen_graph(args.model, args.n, args.seed)
    cfg = SignalGenConfig(m=args.m, k_max=args.k_max, noise_level=args.noise,
                          seed=args.signal_seed if args.signal_seed is not None else args.seed,
                          exact_sparsity=args.exact_sparsity)
    gt = ground_truth(g, cfg)
    out = _out_dir(args.out)
    write_edge_list(out / "graph.csv", g)
    write_matrix(out / "basis.csv", gt.basis)
    write_matrix(out / "spectrum.csv", gt.spectrum.reshape(-1, 1))
    write_matrix(out / "coefficients.csv", gt.coefficients)
    write_matrix(out / "clean_signals.csv", gt.clean_signals)
    write_matrix(out / "noisy_signals.csv", gt.noisy_signals)
    _write_json(out / "manifest.json", {
        "model": args.model, "n": args.n, "graph_seed": args.seed,
        "signals": {"m": cfg.m, "k_max": cfg.k_max, "coeff_lo": cfg.coeff_lo,
                    "coeff_hi": cfg.coeff_hi, "noise_variance": cfg.noise_level,
                    "seed": cfg.seed, "exact_sparsity": cfg.exact_sparsity},
        "edges": len(g),
    })
    print(f"{args.model} graph: n={g.n}, {len(g)} edges -> {out}")
    return EXIT_OK


def cmd_learn(args) -> int:
    x = read_matrix(args.input)
    cfg = LearnConfig(k=args.k, epsilon=args.epsilon, max_iters=args.max_iters,
                      restarts=args.restarts, seed=args.seed)
    report = {}
    if args.k is None:
        est = estimate_sparsity(x, cfg)
        res = est.result
        report["pseudo_error_curve"] = est.errors
        report["no_knee"] = est.no_knee
    else:
        res = learn_eigenbasis(x, cfg)
    out = _out_dir(args.out)
    write_matrix(out / "basis.csv", res.basis)
    write_matrix(out / "coefficients.csv", res.coefficients)
    report.update({
        "k": res.k, "iterations": res.iterations, "converged": res.converged,
        "objective_trace": res.objective_trace, "restart": res.restart,
        "restart_objectives": res.restart_objectives,
        "pseudo_error": pseudo_error(x, res.basis, res.coefficients),
    })
    _write_json(out / "learn_report.json", report)
    print(f"k={res.k} iterations={res.iterations} converged={res.converged} "
          f"objective={res.objective:.6g}")
    return EXIT_OK


def cmd_recover(args) -> int:
    v = read_matrix(args.basis)
    rec = recover_adjacency(v, tol=args.tol, sparse_objective=args.sparse_objective)
    out = _out_dir(args.out)
    write_matrix(out / "eigenvalues.csv", rec.eigenvalues.reshape(-1, 1))
    write_matrix(out / "adjacency.csv", rec.matrix)
    g = binarize(rec.matrix, args.tau)
    write_edge_list(out / "edges.csv", g)
    _write_json(out / "recover_report.json", {
        "status": rec.status.value, "residual": rec.feasibility_residual,
        "min_max_violation": rec.min_max_violation, "pivots": rec.pivots,
        "tau": args.tau, "edges": len(g),
        "note": "feasible eigenvalues are generally not unique; this is the simplex vertex found",
    })
    print(f"status={rec.status.value} residual={rec.feasibility_residual:.3e} "
          f"edges={len(g)}")
    if rec.status is Status.INFEASIBLE:
        return EXIT_INFEASIBLE
    if rec.status is Status.NUMERICAL_FAILURE:
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_eval(args) -> int:
    truth = read_edge_list(args.truth)
    learned = read_edge_list(args.learned, n=truth.n)
    s = f_measure(learned, truth)
    print(f"precision={s.precision:.4f} recall={s.recall:.4f} f_measure={s.f_measure:.4f} "
          f"tp={s.true_positives} fp={s.false_positives} fn={s.false_negatives}")
    return EXIT_OK


def _experiment_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.k is not None:
        changes["learn_k"] = _k_arg(args.k)
    if args.tau is not None:
        changes["tau"] = args.tau
    if getattr(args, "models", None):
        changes["models"] = tuple(args.models)
    if getattr(args, "levels", None):
        key = "noise_levels" if args.command == "sweep-noise" else "sparsity_levels"
        conv = float if key == "noise_levels" else int
        changes[key] = tuple(conv(x) for x in args.levels.split(","))
    if changes:
        cfg = cfg.replace(**changes)
    if args.full_scale:
        cfg = cfg.full_scale()
    return cfg


def cmd_sweep(args) -> int:
    cfg = _experiment_config(args)
    axis = "noise" if args.command == "sweep-noise" else "sparsity"
    table = run_sweep(cfg, axis, jobs=args.jobs)
    manifest = write_sweep(cfg, table, _out_dir(args.out))
    sys.stdout.write(table.to_csv())
    if axis == "noise":
        for model in cfg.models:
            print(f"# reference F-measure for {model}: {REFERENCE_F[model]}")
    print(f"# manifest: {manifest}")
    return EXIT_OK


def cmd_replay(args) -> int:
    result = replay(args.manifest, models=args.models, jobs=args.jobs)
    if args.out:
        out = _out_dir(args.out)
        (out / f"sweep_{result.table.axis}.csv").write_text(result.text)
    sys.stdout.write(result.text)
    if not result.identical:
        print("# replay MISMATCH against recorded table", file=sys.stderr)
        return EXIT_MISMATCH
    print("# replay identical")
    return EXIT_OK


def cmd_demo6(args) -> int:
    g = Graph.from_edges(6, DEMO6_EDGES)
    k = 2 if args.k in (None, "auto") else _k_arg(args.k)
    tau = DEFAULT_TAU if args.tau is None else args.tau
    seed = 0 if args.seed is None else args.seed
    gt = ground_truth(g, SignalGenConfig(m=args.m, k_max=k, noise_level=args.noise, seed=seed))
    res = learn_eigenbasis(gt.noisy_signals, LearnConfig(k=k, seed=seed))
    rec = recover_adjacency(res.basis)
    learned = binarize(rec.matrix, tau)
    score = f_measure(learned, g)

    def fmt(edges):
        return " ".join(f"{i + 1}-{j + 1}" for i, j in sorted(edges))

    print(f"true edges:    {fmt(g.edge_set())}")
    print(f"learned edges: {fmt(learned.edge_set())}")
    print(f"recovery status={rec.status.value}  F={score.f_measure:.3f} "
          f"(precision {score.precision:.3f}, recall {score.recall:.3f})")
    print("mean x'Lx / ||x||^2 over clean signals:",
          _mean_rayleigh(adjacency_of(g), gt.clean_signals))
    if args.out:
        out = _out_dir(args.out)
        write_edge_list(out / "truth.csv", g)
        write_edge_list(out / "learned.csv", learned)
        write_matrix(out / "adjacency.csv", rec.matrix)
    return EXIT_OK


def _mean_rayleigh(a, x) -> str:
    lap = np.diag(a.sum(1)) - a
    num = np.einsum("im,ij,jm->m", x, lap, x)
    return f"{float(np.mean(num / np.sum(x * x, axis=0))):.3f}"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specgl", description=(
        "Infer graph topology from spectrally sparse (wideband) graph signals."))
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a ground-truth graph and signals")
    g.add_argument("--model", choices=GRAPH_MODELS, type=str.upper, default="RBF")
    g.add_argument("--n", type=int, default=20)
    g.add_argument("--m", type=int, default=300)
    g.add_argument("--k-max", type=int, default=5)
    g.add_argument("--exact-sparsity", type=int)
    g.add_argument("--noise", type=float, default=0.0, help="noise variance per entry")
    g.add_argument("--seed", type=_seed_arg, default=0, help="graph seed")
    g.add_argument("--signal-seed", type=_seed_arg, help="defaults to --seed")
    g.add_argument("--out", default="out/gen")
    g.set_defaults(func=cmd_gen)

    lr = sub.add_parser("learn", help="learn an eigenbasis from observations")
    lr.add_argument("input", help="N x M observation matrix (dense CSV)")
    lr.add_argument("--k", type=_k_arg, default=5, help="sparsity or 'auto'")
    lr.add_argument("--epsilon", type=float, default=1e-6)
    lr.add_argument("--max-iters", type=int, default=500)
    lr.add_argument("--restarts", type=int, default=5)
    lr.add_argument("--seed", type=_seed_arg, default=0)
    lr.add_argument("--out", default="out/learn")
    lr.set_defaults(func=cmd_learn)

    rc = sub.add_parser("recover", help="recover an adjacency matrix from a basis")
    rc.add_argument("basis", help="N x N basis matrix (dense CSV)")
    rc.add_argument("--tol", type=float, default=DEFAULT_TOL)
    rc.add_argument("--tau", type=float, default=DEFAULT_TAU)
    rc.add_argument("--sparse-objective", action="store_true")
    rc.add_argument("--out", default="out/recover")
    rc.set_defaults(func=cmd_recover)

    ev = sub.add_parser("eval", help="F-measure between two edge lists")
    ev.add_argument("learned")
    ev.add_argument("truth")
    ev.set_defaults(func=cmd_eval)

    for name in ("sweep-noise", "sweep-sparsity"):
        s = sub.add_parser(name, help=f"{name.split('-')[1]} sweep over random graphs")
        s.add_argument("--config", help="flat key = value experiment config")
        s.add_argument("--seed", type=_seed_arg, help="master seed")
        s.add_argument("--out", default=f"out/{name}")
        s.add_argument("--full-scale", "--paper-scale", action="store_true",
                       help="100 graphs x 100 noise realizations per cell")
        s.add_argument("--k", help="learner sparsity or 'auto'")
        s.add_argument("--tau", type=float)
        s.add_argument("--jobs", type=int, default=1)
        s.add_argument("--models", nargs="+", type=str.upper, choices=GRAPH_MODELS)
        s.add_argument("--levels", help="comma-separated sweep levels")
        s.set_defaults(func=cmd_sweep)

    rp = sub.add_parser("replay", help="re-run a recorded sweep and compare")
    rp.add_argument("manifest")
    rp.add_argument("--models", nargs="+", type=str.upper, choices=GRAPH_MODELS)
    rp.add_argument("--out")
    rp.add_argument("--jobs", type=int, default=1)
    rp.set_defaults(func=cmd_replay)

    d = sub.add_parser("demo6", help="six-vertex demonstration")
    d.add_argument("--seed", type=_seed_arg)
    d.add_argument("--k")
    d.add_argument("--tau", type=float)
    d.add_argument("--m", type=int, default=300)
    d.add_argument("--noise", type=float, default=0.0)
    d.add_argument("--out")
    d.set_defaults(func=cmd_demo6)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FailedConvergence, NumericalFailure, ZeroSignal) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SpecGLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
