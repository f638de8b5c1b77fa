"""File formats: JSON game specs, CSV results, DOT graphs, run manifests.

CSV is the canonical result format; reals are printed with 17 significant
digits so a double round-trips losslessly through the file.
"""

import csv
import json

import numpy as np

from . import mechanisms
from .errors import GameSpecError
from .games import NormalFormGame, all_profile_coords
from .response_graph import build_game_graph

FLOAT_FMT = "%.17g"


def _fmt(x):
    return FLOAT_FMT % float(x)


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise GameSpecError(f"cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise GameSpecError(
            f"{path}: malformed JSON at line {e.lineno}, column {e.colno}: "
            f"{e.msg}")


def load_game_spec(path):
    """Load a game description.

    Normal-form games:
        {"players": N, "strategies": [|S_1|, ...],
         "payoffs": [[...], ...]}          # one row per player, len = prod |S|

    Generator-backed games:
        {"generator": "hawk_dove", "p": 0.75}
        {"generator": "hawk_dove", "types": [[V,N,C], [V,N,C]]}
        {"generator": "matching", "mechanism": "boston"|"da",
         "prior": {"mean": [100,70,25], "std": [6,3,2],
                   "max_rejections": 10000}}
        {"generator": "matching", "mechanism": ..., "types": [[vG,vS,vB,vU]x5]}

    A "types" entry realizes the generator into a NormalFormGame; otherwise a
    BayesianGame is returned.
    """
    spec = load_json(path)
    return game_from_spec(spec, path)


def game_from_spec(spec, origin="<spec>"):
    """Build a game from an already-parsed spec dictionary."""
    if not isinstance(spec, dict):
        raise GameSpecError(f"{origin}: top-level JSON value must be an object")
    if "generator" in spec:
        return _load_generator(spec, origin)
    return _load_normal_form(spec, origin)


def _load_normal_form(spec, path):
    try:
        players = int(spec["players"])
        counts = [int(n) for n in spec["strategies"]]
        payoffs = spec["payoffs"]
    except (KeyError, TypeError, ValueError) as e:
        raise GameSpecError(f"{path}: bad normal-form spec: {e}")
    if players != len(counts):
        raise GameSpecError(f"{path}: players={players} but "
                            f"{len(counts)} strategy counts")
    try:
        pay = np.asarray(payoffs, dtype=float)
    except ValueError as e:
        raise GameSpecError(f"{path}: payoffs are not rectangular: {e}")
    return NormalFormGame(tuple(counts), pay)


def _load_generator(spec, path):
    gen = spec["generator"]
    if gen == "hawk_dove":
        if "types" in spec:
            t = spec["types"]
            if len(t) != 2:
                raise GameSpecError(f"{path}: hawk_dove needs 2 type vectors")
            return mechanisms.hawk_dove_game(t[0], t[1])
        try:
            p = float(spec["p"])
        except (KeyError, TypeError, ValueError):
            raise GameSpecError(f"{path}: hawk_dove needs 'p' or 'types'")
        return mechanisms.hawk_dove_bayesian_game(p)
    if gen == "matching":
        mech = spec.get("mechanism")
        if mech not in ("da", "boston"):
            raise GameSpecError(
                f"{path}: matching generator needs mechanism 'da' or 'boston'")
        if "types" in spec:
            return mechanisms.build_matching_game(mech, spec["types"])
        prior_spec = spec.get("prior", {})
        mean = prior_spec.get("mean", [100.0, 70.0, 25.0])
        std = prior_spec.get("std", [6.0, 3.0, 2.0])
        if len(mean) != 3 or len(std) != 3:
            raise GameSpecError(
                f"{path}: matching prior mean/std are (gold, silver, bronze)")
        prior = mechanisms.matching_prior(
            *mean, *std,
            max_rejections=int(prior_spec.get("max_rejections", 10_000)))
        return mechanisms.matching_bayesian_game(mech, prior)
    raise GameSpecError(f"{path}: unknown generator {gen!r}")


def game_spec_dict(game):
    """Normal-form game back to its JSON form, for archival."""
    return {"players": game.n_players,
            "strategies": list(game.strategy_counts),
            "payoffs": [[float(x) for x in row] for row in game.payoffs]}


def write_distribution_csv(path, probabilities, strategy_counts, stderr=None):
    """Columns: profile_index, coord_0..coord_{N-1}, mass [, stderr]."""
    counts = tuple(strategy_counts)
    probs = np.asarray(probabilities, dtype=float)
    coords = all_profile_coords(counts)
    n_players = len(counts)
    header = (["profile_index"]
              + [f"coord_{i}" for i in range(n_players)]
              + ["mass"]
              + (["stderr"] if stderr is not None else []))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k in range(len(probs)):
            row = [k, *coords[k].tolist(), _fmt(probs[k])]
            if stderr is not None:
                row.append(_fmt(stderr[k]))
            w.writerow(row)


def read_distribution_csv(path):
    """Inverse of :func:`write_distribution_csv`.

    Returns (probabilities, strategy_counts, stderr_or_None).
    """
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = list(r)
    coord_cols = [h for h in header if h.startswith("coord_")]
    n_players = len(coord_cols)
    has_stderr = "stderr" in header
    mass_col = header.index("mass")
    probs = np.empty(len(rows))
    stderr = np.empty(len(rows)) if has_stderr else None
    coords = np.empty((len(rows), n_players), dtype=int)
    for row in rows:
        k = int(row[0])
        coords[k] = [int(c) for c in row[1:1 + n_players]]
        probs[k] = float(row[mass_col])
        if has_stderr:
            stderr[k] = float(row[header.index("stderr")])
    counts = tuple(int(coords[:, i].max()) + 1 for i in range(n_players))
    if len(rows) != int(np.prod(counts)):
        raise GameSpecError(f"{path}: {len(rows)} rows do not enumerate a "
                            f"full {counts} profile space")
    return probs, counts, stderr


def write_group_marginals_csv(path, marginals, group_names, strategy_names):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["group"] + list(strategy_names))
        for name, row in zip(group_names, marginals):
            w.writerow([name] + [_fmt(x) for x in row])


def write_outcomes_csv(path, outcome_rows, group_names, outcome_names):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["group"] + list(outcome_names))
        for name, row in zip(group_names, outcome_rows):
            w.writerow([name] + [_fmt(x) for x in row])


def write_sweep_csv(path, rows):
    """Rows of (param, ne_da_mass, ne_bo_mass, alpha_pre)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["param", "ne_da_mass", "ne_bo_mass", "alpha_pre"])
        for param, da_mass, bo_mass, alpha in rows:
            w.writerow([_fmt(param), _fmt(da_mass), _fmt(bo_mass),
                        _fmt(alpha)])


def write_bench_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["actions", "num_profiles", "seconds"])
        for actions, n, secs in rows:
            w.writerow([actions, n, _fmt(secs)])


def write_manifest(path, manifest):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def dot_export(game_or_bg, probabilities, include_worsening=False):
    """Render the deviation graph as DOT text.

    Node attribute ``weight`` carries the distribution mass, ``label`` the
    profile coordinates. Edge attribute ``delta`` is the deviating player's
    utility improvement; for a Bayesian game with a finite prior it is the
    prior-weighted improvement. Strictly worsening edges are omitted unless
    ``include_worsening`` is set.
    """
    from .games import BayesianGame, FinitePrior, realize

    if isinstance(game_or_bg, BayesianGame):
        bg = game_or_bg
        if not isinstance(bg.prior, FinitePrior):
            raise GameSpecError(
                "DOT export of a Bayesian game needs a finite prior")
        counts = bg.strategy_counts
        graph = None
        delta = None
        for v, p in bg.prior.support:
            g = build_game_graph(realize(bg, v))
            if graph is None:
                graph, delta = g, p * g.delta
            else:
                delta = delta + p * g.delta
        src, dst = graph.src, graph.dst
    else:
        game = game_or_bg
        counts = game.strategy_counts
        graph = build_game_graph(game)
        src, dst, delta = graph.src, graph.dst, graph.delta

    probs = np.asarray(probabilities, dtype=float)
    n = int(np.prod(counts))
    if probs.shape != (n,):
        raise GameSpecError(f"distribution length {probs.shape} does not "
                            f"match {n} profiles")
    coords = all_profile_coords(counts)
    lines = ["digraph response {"]
    for k in range(n):
        label = ",".join(str(c) for c in coords[k])
        lines.append(f'  n{k} [label="{label}" weight="{_fmt(probs[k])}"];')
    keep = np.ones(len(src), dtype=bool) if include_worsening else delta >= 0
    for e in np.flatnonzero(keep):
        lines.append(f'  n{src[e]} -> n{dst[e]} '
                     f'[delta="{_fmt(delta[e])}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
