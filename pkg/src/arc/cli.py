"""Command-line interface.

    arc rank        stationary-distribution sweep for one game
    arc collection  expected distribution over a type prior
    arc sweep       NE-set mass across a Silver-value grid (both mechanisms)
    arc graph       DOT export of the deviation graph with node masses
    arc bench       build+solve wall-clock per game size

Every data-producing command writes a CSV, a JSON run manifest and (unless
--no-plot) a PNG figure next to the CSV. Exit codes: 0 success, 2 input or
usage error, 3 sweep failure, 4 too many skipped samples.
"""

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, io, mechanisms, plots
from .alpha_rank import DEFAULT_M, SweepConfig, alpha_sweep, \
    stationary_distribution, transition_matrix
from .collections import (Collection, ExcessiveSkipsError, exact_collection,
                          group_marginals, monte_carlo_collection)
from .errors import ArcError, GameSpecError, SweepError
from .games import BayesianGame, NormalFormGame
from .response_graph import build_game_graph

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SWEEP = 3
EXIT_SKIPS = 4

MATCHING_STRATEGY_NAMES = ("GSB", "GBS", "SGB", "SBG", "BGS", "BSG")
OUTCOME_NAMES = ("gold", "silver", "bronze", "unmatched")


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GameSpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ExcessiveSkipsError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SKIPS
    except SweepError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SWEEP
    except ArcError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="arc", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(required=True, metavar="command")

    def add_sweep_flags(p):
        p.add_argument("--m", type=int, default=DEFAULT_M,
                       help="population size (default %(default)s)")
        p.add_argument("--alpha-start", type=float, default=1e-5,
                       help="doubling-mode starting alpha")
        p.add_argument("--alpha-fixed", type=float, default=None,
                       help="use fixed-with-decrement mode from this alpha")
        p.add_argument("--alpha-decrement", type=float, default=0.1,
                       help="decrement for fixed mode (default %(default)s)")

    def add_out_flags(p):
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--no-plot", action="store_true",
                       help="skip the PNG figure")

    p = sub.add_parser("rank", help="alpha sweep for a single game")
    p.add_argument("game", help="JSON game spec")
    add_sweep_flags(p)
    add_out_flags(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("collection", help="expectation over a type prior")
    p.add_argument("game", help="JSON Bayesian game spec")
    p.add_argument("--samples", type=int, default=1000,
                   help="Monte-Carlo sample count (default %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("ARC_THREADS", "1")),
                   help="worker threads (default $ARC_THREADS or 1)")
    p.add_argument("--exact", action="store_true",
                   help="exact expectation (finite priors only)")
    add_sweep_flags(p)
    add_out_flags(p)
    p.set_defaults(func=cmd_collection)

    p = sub.add_parser("sweep", help="NE-set mass over a Silver-value grid")
    p.add_argument("--mechanism", required=True, choices=["da", "boston"])
    p.add_argument("--grid", default="70:80:1",
                   help="Silver values as start:stop:step, inclusive "
                        "(default %(default)s)")
    p.add_argument("--v-gold", type=float, default=100.0)
    p.add_argument("--v-bronze", type=float, default=25.0)
    add_sweep_flags(p)
    add_out_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("graph", help="DOT export with node masses")
    p.add_argument("game", help="JSON game spec")
    p.add_argument("--dist", required=True,
                   help="distribution CSV (from rank or collection)")
    p.add_argument("--out", required=True, help="output DOT path")
    p.add_argument("--full-graph", action="store_true",
                   help="include strictly worsening edges")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("bench", help="runtime table over game sizes")
    p.add_argument("--m", type=int, default=DEFAULT_M)
    p.add_argument("--alpha", type=float, default=0.1,
                   help="selection intensity for the timed solve")
    p.add_argument("--actions", default="2,3,4,5,6",
                   help="per-player action counts (default %(default)s)")
    p.add_argument("--agents", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    add_out_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def _sweep_config(args):
    if args.alpha_fixed is not None:
        return SweepConfig(mode="fixed", alpha_fixed=args.alpha_fixed,
                           step=args.alpha_decrement)
    return SweepConfig(mode="doubling", alpha0=args.alpha_start)


def _paths(out):
    out = Path(out)
    base = out.with_suffix("") if out.suffix else out
    return out, Path(f"{out}.manifest.json"), base


def _manifest(command, parameters, timings, **extra):
    doc = {"command": command, "tool_version": __version__,
           "parameters": parameters, "wall_clock_seconds": timings}
    doc.update(extra)
    return doc


def cmd_rank(args):
    t0 = time.perf_counter()
    spec = io.load_json(args.game)
    game = io.game_from_spec(spec, args.game)
    if not isinstance(game, NormalFormGame):
        raise GameSpecError(
            f"{args.game}: 'rank' needs a normal-form game (got a Bayesian "
            "game; use 'collection', or add a \"types\" entry)")
    t_load = time.perf_counter() - t0

    t0 = time.perf_counter()
    res = alpha_sweep(game, m=args.m, config=_sweep_config(args))
    t_compute = time.perf_counter() - t0

    out, manifest_path, base = _paths(args.out)
    t0 = time.perf_counter()
    io.write_distribution_csv(out, res.dist.probabilities,
                              game.strategy_counts)
    if not args.no_plot:
        plots.plot_distribution(res.dist.probabilities, game.strategy_counts,
                                base.with_suffix(".png"),
                                title=f"alpha_pre={res.alpha_pre:g}")
    t_write = time.perf_counter() - t0
    io.write_manifest(manifest_path, _manifest(
        "rank",
        {"game": args.game, "m": args.m,
         "sweep": _describe_args(args), "out": str(out)},
        {"load": t_load, "compute": t_compute, "write": t_write},
        alpha_pre=res.alpha_pre, residual=res.dist.residual,
        alphas_tried=res.alphas_tried,
        game_spec=spec if "generator" in spec else None))
    print(f"alpha_pre = {res.alpha_pre:g}; wrote {out}")
    return EXIT_OK


def _describe_args(args):
    if args.alpha_fixed is not None:
        return {"mode": "fixed", "alpha_fixed": args.alpha_fixed,
                "step": args.alpha_decrement}
    return {"mode": "doubling", "alpha0": args.alpha_start}


def _group_info(spec, game_or_bg):
    """Infer reporting groups and strategy labels from the spec."""
    counts = game_or_bg.strategy_counts
    if spec.get("generator") == "matching":
        return (["Top", "Average"],
                [list(mechanisms.TOPS), list(mechanisms.AVERAGES)],
                MATCHING_STRATEGY_NAMES)
    if spec.get("generator") == "hawk_dove":
        return (["player_1", "player_2"], [[0], [1]], ("Hawk", "Dove"))
    names = [f"player_{i + 1}" for i in range(len(counts))]
    return names, [[i] for i in range(len(counts))], \
        tuple(f"s{j}" for j in range(max(counts)))


def cmd_collection(args):
    t0 = time.perf_counter()
    spec = io.load_json(args.game)
    bg = io.game_from_spec(spec, args.game)
    if not isinstance(bg, BayesianGame):
        raise GameSpecError(
            f"{args.game}: 'collection' needs a Bayesian game spec")
    if not args.exact and args.samples < 1:
        raise GameSpecError("--samples must be >= 1")
    t_load = time.perf_counter() - t0

    cfg = _sweep_config(args)
    t0 = time.perf_counter()
    if args.exact:
        coll = exact_collection(bg, m=args.m, sweep_config=cfg)
    else:
        coll = monte_carlo_collection(bg, n_samples=args.samples,
                                      master_seed=args.seed, m=args.m,
                                      sweep_config=cfg,
                                      n_threads=args.threads)
    t_compute = time.perf_counter() - t0

    out, manifest_path, base = _paths(args.out)
    t0 = time.perf_counter()
    io.write_distribution_csv(out, coll.probabilities, bg.strategy_counts,
                              stderr=coll.stderr)
    group_names, groups, strat_names = _group_info(spec, bg)
    marg = group_marginals(coll.probabilities, groups, bg.strategy_counts)
    io.write_group_marginals_csv(Path(f"{base}.groups.csv"), marg,
                                 group_names, strat_names)
    if spec.get("generator") == "matching":
        outcomes = mechanisms.expected_outcomes(spec["mechanism"],
                                                coll.probabilities)
        rows = [outcomes[list(g)].mean(axis=0) for g in groups]
        io.write_outcomes_csv(Path(f"{base}.outcomes.csv"), rows,
                              group_names, OUTCOME_NAMES)
    if not args.no_plot:
        plots.plot_distribution(coll.probabilities, bg.strategy_counts,
                                base.with_suffix(".png"),
                                stderr=(None if args.exact else coll.stderr),
                                title="collection")
    t_write = time.perf_counter() - t0
    io.write_manifest(manifest_path, _manifest(
        "collection",
        {"game": args.game, "m": args.m, "samples": args.samples,
         "seed": args.seed, "threads": args.threads, "exact": args.exact,
         "sweep": _describe_args(args), "out": str(out)},
        {"load": t_load, "compute": t_compute, "write": t_write},
        alpha_policy=coll.alpha_policy, skip_count=coll.skip_count,
        game_spec=spec if "generator" in spec else None))
    print(f"wrote {out} ({'exact' if args.exact else f'{args.samples} samples'}, "
          f"{coll.skip_count} skipped)")
    return EXIT_OK


def _parse_grid(text):
    try:
        parts = [float(x) for x in text.split(":")]
    except ValueError:
        raise GameSpecError(f"bad grid {text!r}; expected start:stop:step")
    if len(parts) == 2:
        parts.append(1.0)
    if len(parts) != 3 or parts[2] <= 0:
        raise GameSpecError(f"bad grid {text!r}; expected start:stop:step")
    start, stop, step = parts
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise GameSpecError(f"empty grid {text!r}")
    return [start + k * step for k in range(n)]


def cmd_sweep(args):
    grid = _parse_grid(args.grid)
    sets = mechanisms.named_profile_sets()
    cfg = _sweep_config(args)
    rows = []
    t0 = time.perf_counter()
    for v_s in grid:
        v = ((args.v_gold, v_s, args.v_bronze, 0.0),) * mechanisms.N_STUDENTS
        game = mechanisms.build_matching_game(args.mechanism, v)
        try:
            res = alpha_sweep(game, m=args.m, config=cfg)
        except SweepError as e:
            raise SweepError(f"grid point v_S={v_s:g}: {e}") from e
        pi = res.dist.probabilities
        rows.append((v_s, float(pi[sets["NE_DA"]].sum()),
                     float(pi[sets["NE_Bo"]].sum()), res.alpha_pre))
        print(f"v_S={v_s:g}: NE_DA={rows[-1][1]:.4f} NE_Bo={rows[-1][2]:.4f} "
              f"(alpha_pre={res.alpha_pre:g})")
    t_compute = time.perf_counter() - t0

    out, manifest_path, base = _paths(args.out)
    io.write_sweep_csv(out, rows)
    if not args.no_plot:
        plots.plot_sweep([r[0] for r in rows],
                         {"NE_DA": [r[1] for r in rows],
                          "NE_Bo": [r[2] for r in rows]},
                         base.with_suffix(".png"), xlabel="Silver value",
                         title=f"{args.mechanism} mechanism")
    io.write_manifest(manifest_path, _manifest(
        "sweep",
        {"mechanism": args.mechanism, "grid": args.grid,
         "v_gold": args.v_gold, "v_bronze": args.v_bronze, "m": args.m,
         "sweep": _describe_args(args), "out": str(out)},
        {"compute": t_compute},
        alpha_pre_per_point=[r[3] for r in rows]))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_graph(args):
    game = io.load_game_spec(args.game)
    probs, counts, _ = io.read_distribution_csv(args.dist)
    if tuple(counts) != tuple(game.strategy_counts):
        raise GameSpecError(
            f"distribution shape {counts} does not match game "
            f"{tuple(game.strategy_counts)}")
    text = io.dot_export(game, probs, include_worsening=args.full_graph)
    with open(args.out, "w") as fh:
        fh.write(text)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_bench(args):
    try:
        action_counts = [int(x) for x in args.actions.split(",")]
    except ValueError:
        raise GameSpecError(f"bad --actions {args.actions!r}")
    rng = np.random.default_rng(args.seed)
    rows = []
    for actions in action_counts:
        counts = (actions,) * args.agents
        n = int(np.prod(counts))
        payoffs = rng.uniform(0.0, 1.0, size=(args.agents, n))
        game = NormalFormGame(counts, payoffs)
        t0 = time.perf_counter()
        graph = build_game_graph(game)
        tm = transition_matrix(game, args.alpha, args.m, graph)
        stationary_distribution(tm)
        secs = time.perf_counter() - t0
        rows.append((actions, n, secs))
        print(f"|A|={actions}: |S|={n}, {secs:.3f}s")

    out, manifest_path, base = _paths(args.out)
    io.write_bench_csv(out, rows)
    if not args.no_plot:
        plots.plot_bench([r[1] for r in rows], [r[2] for r in rows],
                         base.with_suffix(".png"))
    io.write_manifest(manifest_path, _manifest(
        "bench",
        {"m": args.m, "alpha": args.alpha, "actions": args.actions,
         "agents": args.agents, "seed": args.seed, "out": str(out)},
        {"compute": sum(r[2] for r in rows)}))
    print(f"wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
