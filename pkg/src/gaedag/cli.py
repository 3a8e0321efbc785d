"""Command-line interface: generate, train, eval, bench."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench, io, metrics, synth
from .model import ArchConfig
from .optimizer import TrainConfig, TrainingDiverged, train

GENERATE_KEYS = ("d", "n", "sem_kind", "l", "expected_degree", "weight_low", "weight_high", "seeds")
TRAIN_KEYS = ("method", "l_latent", "hidden", "layers", "zero_diag", "lam", "lr", "inner_steps",
              "max_outer", "beta", "gamma", "h_tol", "rho_max", "inner_patience", "inner_rel_tol",
              "mlp_l2", "seed", "threshold")


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list, got {text!r}") from None


def _parse_str_list(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip() != ""]


# Per-command defaults for fields that are not sweep-level in bench.DEFAULTS.
_EXTRA_DEFAULTS = {"d": 10, "seed": 0, "method": "gae"}


def merge_config(keys, file_path, flags: dict) -> dict:
    """defaults <- config file <- explicitly passed flags."""
    cfg = {}
    for k in keys:
        cfg[k] = bench.DEFAULTS[k] if k in bench.DEFAULTS else _EXTRA_DEFAULTS[k]
    if file_path:
        from_file = io.load_json(file_path)
        unknown = set(from_file) - set(keys)
        if unknown:
            raise ValueError(f"config file has unknown fields for this command: {sorted(unknown)}")
        cfg.update(from_file)
    cfg.update({k: v for k, v in flags.items() if v is not None})
    return cfg


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=["gae", "gae-additive", "linear"], help="model configuration")
    p.add_argument("--l-latent", dest="l_latent", type=int, help="latent dimension (gae only)")
    p.add_argument("--hidden", type=int, help="MLP hidden width")
    p.add_argument("--layers", type=int, help="MLP layer count")
    p.add_argument("--zero-diag", dest="zero_diag", action="store_const", const=True,
                   help="hard-zero the adjacency diagonal during optimization (default)")
    p.add_argument("--keep-diag", dest="zero_diag", action="store_const", const=False,
                   help="let self-loop weights float; only the penalty suppresses them")
    p.add_argument("--lambda", dest="lam", type=float, help="l1 weight on the adjacency")
    p.add_argument("--lr", type=float, help="Adam learning rate")
    p.add_argument("--inner-steps", dest="inner_steps", type=int, help="Adam steps per outer iteration")
    p.add_argument("--max-outer", dest="max_outer", type=int, help="outer iteration cap")
    p.add_argument("--beta", type=float, help="penalty multiplier (> 1)")
    p.add_argument("--gamma", type=float, help="required constraint progress ratio (in (0,1))")
    p.add_argument("--h-tol", dest="h_tol", type=float, help="constraint tolerance")
    p.add_argument("--rho-max", dest="rho_max", type=float, help="penalty cap")
    p.add_argument("--inner-patience", dest="inner_patience", type=int,
                   help="inner plateau window before early exit (0 runs the full budget)")
    p.add_argument("--inner-rel-tol", dest="inner_rel_tol", type=float,
                   help="relative improvement that resets the plateau window")
    p.add_argument("--mlp-l2", dest="mlp_l2", type=float,
                   help="ridge on trainable MLP weight matrices (gauge pin for |A|)")
    p.add_argument("--threshold", type=float, help="edge threshold tau")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaedag",
                                     description="Causal DAG learning with a graph autoencoder")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write synthetic benchmark datasets")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--config", help="JSON config file (flags override it)")
    g.add_argument("--d", type=int, help="number of variables")
    g.add_argument("--n", type=int, help="sample count")
    g.add_argument("--kind", dest="sem_kind", choices=list(synth.SEM_KINDS), help="SEM kind")
    g.add_argument("--l", type=int, help="per-variable dimension (vector kind)")
    g.add_argument("--degree", dest="expected_degree", type=float, help="expected node degree")
    g.add_argument("--weight-low", dest="weight_low", type=float, help="min |edge weight|")
    g.add_argument("--weight-high", dest="weight_high", type=float, help="max |edge weight|")
    g.add_argument("--seeds", type=_parse_int_list, help="comma-separated seeds, one dataset each")

    t = sub.add_parser("train", help="fit a model to a dataset file")
    t.add_argument("--data", required=True, help="dataset file written by generate")
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--config", help="JSON config file (flags override it)")
    t.add_argument("--seed", type=int, help="initialization seed")
    _add_train_flags(t)

    e = sub.add_parser("eval", help="score a learned adjacency against the truth")
    e.add_argument("--pred", required=True, help="learned adjacency grid file")
    e.add_argument("--truth", required=True, help="truth adjacency grid or dataset .meta.json")
    e.add_argument("--threshold", type=float, default=bench.DEFAULTS["threshold"], help="edge threshold tau")
    e.add_argument("--out", help="also write the row to this CSV file")
    e.add_argument("--method", default="-", help="method label for the output row")
    e.add_argument("--kind", default="-", help="SEM kind label for the output row")
    e.add_argument("--seed", type=int, default=0, help="seed label for the output row")

    b = sub.add_parser("bench", help="full sweep: generate, train, eval per (method, d, seed)")
    b.add_argument("--out", required=True, help="sweep output directory")
    b.add_argument("--config", help="JSON config file (flags override it)")
    b.add_argument("--methods", type=_parse_str_list, help="comma-separated methods")
    b.add_argument("--d-list", dest="d_list", type=_parse_int_list, help="comma-separated graph sizes")
    b.add_argument("--seeds", type=_parse_int_list, help="comma-separated per-run seeds")
    b.add_argument("--kind", dest="sem_kind", choices=list(synth.SEM_KINDS), help="SEM kind")
    b.add_argument("--l", type=int, help="per-variable dimension")
    b.add_argument("--n", type=int, help="sample count")
    b.add_argument("--degree", dest="expected_degree", type=float, help="expected node degree")
    b.add_argument("--weight-low", dest="weight_low", type=float)
    b.add_argument("--weight-high", dest="weight_high", type=float)
    b.add_argument("--workers", type=int, help="parallel run slots")
    b.add_argument("--plots", action="store_const", const=True,
                   help="render summary figures next to the tables")
    _add_train_flags(b)
    return parser


def cmd_generate(args) -> int:
    flags = {k: getattr(args, k, None) for k in GENERATE_KEYS}
    cfg = merge_config(GENERATE_KEYS, args.config, flags)
    graph_spec = synth.GraphSpec(cfg["d"], cfg["expected_degree"], cfg["weight_low"], cfg["weight_high"], 0)
    sem = synth.SemSpec(cfg["sem_kind"], cfg["l"])
    problems = []
    for spec in (graph_spec, sem):
        try:
            spec.validate()
        except ValueError as err:
            problems.append(str(err))
    if cfg["n"] < 1:
        problems.append(f"invalid sample count: n must be >= 1 (got {cfg['n']})")
    if not cfg["seeds"]:
        problems.append("invalid seeds: need at least one")
    if problems:
        raise ValueError("; ".join(problems))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.save_json(out / "generate_config.json", cfg)
    for seed in cfg["seeds"]:
        graph_spec.seed = bench.derived_seed(seed, 0)
        ds = synth.generate(graph_spec, sem, cfg["n"], bench.derived_seed(seed, 1))
        ds.provenance["root_seed"] = seed
        data_path = out / f"{cfg['sem_kind']}_d{cfg['d']}_seed{seed}.csv"
        io.save_dataset(data_path, ds)
        print(f"wrote {data_path} ({cfg['n']} x {cfg['d']} x {cfg['l']})")
    return 0


def cmd_train(args) -> int:
    flags = {k: getattr(args, k, None) for k in TRAIN_KEYS}
    cfg = merge_config(TRAIN_KEYS, args.config, flags)
    ds = io.load_dataset(args.data)

    train_cfg = TrainConfig(lam=cfg["lam"], lr=cfg["lr"], inner_steps=cfg["inner_steps"],
                            max_outer=cfg["max_outer"], beta=cfg["beta"], gamma=cfg["gamma"],
                            h_tol=cfg["h_tol"], rho_max=cfg["rho_max"], seed=cfg["seed"])
    arch = ArchConfig(method=cfg["method"], l_latent=cfg["l_latent"], hidden=cfg["hidden"],
                      layers=cfg["layers"], zero_diag=bool(cfg["zero_diag"]))
    params, report = train(ds.X, train_cfg, arch)
    pred = metrics.threshold(params.A, cfg["threshold"])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    resolved = dict(cfg)
    resolved["data"] = str(args.data)
    io.save_json(out / "config.json", resolved)
    io.save_matrix(out / "adjacency.csv", params.A)
    io.save_matrix(out / "graph.csv", pred.edges.astype(np.float64))
    io.save_json(out / "report.json", report.to_dict())
    h_final = report.h_trace[-1] if report.h_trace else float("nan")
    print(f"{report.method}: d={report.d} h={h_final:.3e} edges={pred.edge_count()} "
          f"repairs={pred.repairs} outer={report.outer_iters} ({report.termination}) "
          f"time={report.wall_time_seconds:.1f}s -> {out}")
    return 0


def cmd_eval(args) -> int:
    pred_A = io.load_adjacency(args.pred)
    truth_A = io.load_adjacency(args.truth)
    if pred_A.shape != truth_A.shape:
        raise ValueError(f"graph size mismatch: pred {pred_A.shape} vs truth {truth_A.shape}")
    pred = metrics.threshold(pred_A, args.threshold)
    gm = metrics.shd(pred, truth_A)
    row = io.metrics_row(args.method, args.kind, pred.d, 1, args.seed, gm, pred.repairs)
    print(",".join(io.METRICS_COLUMNS))
    print(io.format_metrics_row(row))
    if args.out:
        io.write_metrics_csv(args.out, [row])
    return 0


def cmd_bench(args) -> int:
    keys = set(bench.DEFAULTS)
    flags = {k: getattr(args, k, None) for k in keys}
    overrides = merge_config(sorted(keys), args.config, flags)
    rows, summary, failures = bench.run_sweep(overrides, args.out,
                                              progress=lambda msg: print(msg, flush=True))
    print()
    print(",".join(bench.SUMMARY_COLUMNS))
    for cell in summary:
        print(",".join(str(cell[c]) if not isinstance(cell[c], float) else f"{cell[c]:.4g}"
                       for c in bench.SUMMARY_COLUMNS))
    if failures:
        print(f"\n{len(failures)} run(s) failed:", file=sys.stderr)
        for f in failures:
            print(f"  {f['run']}: {f['error']}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"generate": cmd_generate, "train": cmd_train, "eval": cmd_eval, "bench": cmd_bench}
    try:
        return handlers[args.command](args)
    except io.ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except TrainingDiverged as err:
        print(f"error: training diverged: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
