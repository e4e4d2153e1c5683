"""Command-line interface.

Single-case verifiers print one JSON object on stdout; sweep drivers
write a report file and print the summary JSON on stdout.  Exit code 0
means every checked identity held, 1 means a violation was found (the
reproducer is dumped to stderr), 2 means the configuration or I/O was
bad.  Wall-clock timing goes to stderr only, so stdout and report files
are byte-stable for a fixed seed.

Graph files are JSON: either {"adj": [[...]]} (optionally with "n") or a
bare adjacency matrix [[...]].  Divisors on the command line are
comma-separated integers, one per vertex.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    encode_adjacency,
    run_exhaustive,
    run_random_sweep,
)
from .graphs import (
    Divisor,
    InvalidGraphError,
    Multigraph,
    PlacementError,
    canonical_divisor,
    degree,
    genus,
)
from .rank import rank
from .toric import DEFAULT_PRIME, ToricConfig, ToricMemo, toric_rank

__all__ = ["main", "run"]


def _load_graph(path: str) -> Multigraph:
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        if "adj" not in data:
            raise ConfigError(f"graph file {path} has no 'adj' key")
        adj = data["adj"]
        if "n" in data and data["n"] != len(adj):
            raise ConfigError(
                f"graph file {path}: 'n'={data['n']} but adjacency has {len(adj)} rows"
            )
    elif isinstance(data, list):
        adj = data
    else:
        raise ConfigError(f"graph file {path} must hold an object or a matrix")
    return Multigraph.from_adjacency(adj)


def _parse_divisor(text: str, n: int) -> Divisor:
    try:
        coeffs = tuple(int(part.strip()) for part in text.split(","))
    except ValueError:
        raise ConfigError(f"divisor {text!r} is not a comma-separated integer list")
    if len(coeffs) != n:
        raise ConfigError(f"divisor has {len(coeffs)} entries, graph has {n} vertices")
    return Divisor(coeffs)


def _toric_config(args: argparse.Namespace) -> ToricConfig:
    return ToricConfig(
        prime=DEFAULT_PRIME if args.prime is None else args.prime,
        trials=args.trials,
        mode=args.mode,
        seed=args.seed,
        nonzero_entries=args.nonzero_entries,
    )


def _emit(obj: dict) -> None:
    print(json.dumps(obj, separators=(",", ":")))


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True, help="path to a JSON graph file")
    p.add_argument("--divisor", required=True, help="comma-separated coefficients")


def _add_toric_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prime", type=int, default=None, help="field modulus (default: first prime past 1e10)")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument(
        "--mode",
        choices=("block-projection", "random-vector"),
        default="block-projection",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nonzero-entries", action="store_true")


def _cmd_rank(args: argparse.Namespace) -> int:
    G = _load_graph(args.graph)
    D = _parse_divisor(args.divisor, G.n)
    res = rank(G, D)
    _emit({"rank": res.rank, "witness_failure": list(res.witness_failure.coeffs)})
    return 0


def _cmd_toric_rank(args: argparse.Namespace) -> int:
    G = _load_graph(args.graph)
    D = _parse_divisor(args.divisor, G.n)
    res = toric_rank(G, D, _toric_config(args))
    _emit({"toric_rank": res.rank, "witness_failure": list(res.witness_failure.coeffs)})
    return 0


def _reproducer(G: Multigraph, D: Divisor, extra: dict | None = None) -> None:
    obj = {"graph": encode_adjacency(G), "divisor": list(D.coeffs)}
    if extra:
        obj.update(extra)
    print("violation " + json.dumps(obj, separators=(",", ":")), file=sys.stderr)


def _cmd_rr_check(args: argparse.Namespace) -> int:
    G = _load_graph(args.graph)
    D = _parse_divisor(args.divisor, G.n)
    K = canonical_divisor(G)
    r = rank(G, D).rank
    r_dual = rank(G, K - D).rank
    residual = r - r_dual - degree(D) - 1 + genus(G)
    _emit({"holds": residual == 0, "rank": r, "rank_dual": r_dual, "residual": residual})
    if residual != 0:
        _reproducer(G, D)
        return 1
    return 0


def _cmd_toric_rr_check(args: argparse.Namespace) -> int:
    G = _load_graph(args.graph)
    D = _parse_divisor(args.divisor, G.n)
    cfg = _toric_config(args)
    memo = ToricMemo(G, cfg)
    K = canonical_divisor(G)
    rt = toric_rank(G, D, cfg, memo).rank
    rt_dual = toric_rank(G, K - D, cfg, memo).rank
    residual = rt - rt_dual - degree(D) - 1 + genus(G)
    _emit(
        {
            "holds": residual == 0,
            "toric_rank": rt,
            "toric_rank_dual": rt_dual,
            "residual": residual,
            "trial_disagreements": len(memo.trial_disagreements()),
        }
    )
    if residual != 0:
        _reproducer(G, D, {"seed": cfg.seed, "prime": cfg.prime, "trials": cfg.trials, "mode": cfg.mode})
        return 1
    return 0


def _finish_driver(report: ExperimentReport) -> int:
    _emit(report.summary)
    print(f"wall_clock_seconds={report.wall_clock_seconds:.3f}", file=sys.stderr)
    if report.violation_count:
        cfg = report.config
        for rec in report.violations[:20]:
            _reproducer(
                report.graphs[rec.graph_id],
                Divisor(rec.divisor),
                {
                    "seed": cfg.seed,
                    "prime": cfg.resolved_prime(),
                    "trials": cfg.trials,
                    "mode": cfg.toric_mode,
                },
            )
        return 1
    return 0


def _cmd_exhaustive(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig(
        mode="exhaustive",
        max_vertices=args.max_vertices,
        genus_min=args.genus_min,
        genus_max=args.genus_max,
        degree_min=args.degree_min,
        degree_max=args.degree_max,
        window=args.window,
        prime=args.prime,
        trials=args.trials,
        toric_mode=args.mode,
        seed=args.seed,
        toric=args.toric,
        nonzero_entries=args.nonzero_entries,
        output_format=args.format,
        output_path=args.out,
        workers=args.workers,
        max_multiplicity=args.max_multiplicity,
    )
    return _finish_driver(run_exhaustive(cfg))


def _cmd_random_sweep(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig(
        mode="random-sweep",
        prime=args.prime,
        trials=args.trials,
        toric_mode=args.mode,
        seed=args.seed,
        toric=args.toric,
        nonzero_entries=args.nonzero_entries,
        output_format=args.format,
        output_path=args.out,
        cases=args.cases,
        min_genus=args.min_genus,
        n_min=args.n_min,
        n_max=args.n_max,
    )
    return _finish_driver(run_random_sweep(cfg))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chipfire",
        description="Chip-firing divisor ranks and toric rank experiments on multigraphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", help="Baker-Norine rank of a divisor")
    _add_graph_args(p)
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("toric-rank", help="toric rank over a generic graph curve")
    _add_graph_args(p)
    _add_toric_args(p)
    p.set_defaults(func=_cmd_toric_rank)

    p = sub.add_parser("rr-check", help="verify the Riemann-Roch identity for one divisor")
    _add_graph_args(p)
    p.set_defaults(func=_cmd_rr_check)

    p = sub.add_parser("toric-rr-check", help="verify toric Riemann-Roch for one divisor")
    _add_graph_args(p)
    _add_toric_args(p)
    p.set_defaults(func=_cmd_toric_rr_check)

    p = sub.add_parser("exhaustive", help="sweep all 2-core graphs and divisor windows in range")
    p.add_argument("--max-vertices", type=int, default=5)
    p.add_argument("--genus-min", type=int, default=1)
    p.add_argument("--genus-max", type=int, default=2)
    p.add_argument("--degree-min", type=int, default=None)
    p.add_argument("--degree-max", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--max-multiplicity", type=int, default=3)
    p.add_argument("--toric", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="report file path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_toric_args(p)
    p.set_defaults(func=_cmd_exhaustive)

    p = sub.add_parser("random-sweep", help="random high-genus spot checks")
    p.add_argument("--cases", type=int, default=10)
    p.add_argument("--min-genus", type=int, default=4)
    p.add_argument("--n-min", type=int, default=5)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--toric", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out", default=None, help="report file path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_toric_args(p)
    p.set_defaults(func=_cmd_random_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidGraphError, PlacementError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main(sys.argv[1:]))
