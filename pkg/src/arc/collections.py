"""Expected limiting distributions over a type prior.

For a finite prior the expectation is the exact prior-weighted average of the
per-type sweep distributions. For continuous priors it is approximated by
Monte Carlo: each sample gets its own counter-based RNG stream derived from
(master_seed, sample index), so results are independent of evaluation order
and worker count, and the final mean is always reduced in sample-index order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .alpha_rank import DEFAULT_M, SweepConfig, alpha_sweep
from .errors import ArcError, GameSpecError, SweepError
from .games import FinitePrior, realize

MAX_SKIP_FRACTION = 0.10


class ExcessiveSkipsError(ArcError):
    """More than the tolerated fraction of samples failed to sweep."""


@dataclass(frozen=True)
class Collection:
    """Probability vector over joint profiles with per-entry MC noise.

    ``stderr`` is all zeros in exact mode (``n_samples == 0``).
    ``alpha_policy`` records the sweep mode and the alpha actually used for
    every support point or sample, so a run can be audited and reproduced.
    """

    probabilities: np.ndarray
    stderr: np.ndarray
    n_samples: int
    alpha_policy: dict

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        s = np.asarray(self.stderr, dtype=float)
        p.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "stderr", s)

    @property
    def skip_count(self):
        return len(self.alpha_policy.get("skipped", []))


def exact_collection(bg, m=DEFAULT_M, sweep_config=None):
    """Prior-weighted average of sweep distributions over a finite support."""
    if not isinstance(bg.prior, FinitePrior):
        raise GameSpecError("exact_collection requires a finite prior")
    cfg = sweep_config if sweep_config is not None else SweepConfig()
    total = np.zeros(bg.n_profiles)
    alphas = []
    for k, (v, p) in enumerate(bg.prior.support):
        if p == 0.0:
            alphas.append(None)
            continue
        try:
            res = alpha_sweep(realize(bg, v), m=m, config=cfg)
        except SweepError as e:
            raise SweepError(f"sweep failed at prior support point {k} "
                             f"(weight {p:g}): {e}") from e
        total += p * res.dist.probabilities
        alphas.append(res.alpha_pre)
    policy = {"mode": "exact", "sweep": _describe(cfg), "alphas": alphas}
    return Collection(total, np.zeros_like(total), 0, policy)


def monte_carlo_collection(bg, n_samples, master_seed, m=DEFAULT_M,
                           sweep_config=None, n_threads=1):
    """Algorithm: draw types, sweep each realized game, average in index order.

    A sample whose sweep fails is retried once with a halved starting alpha
    and otherwise skipped; more than 10% skips aborts the run.
    """
    if n_samples < 1:
        raise GameSpecError("n_samples must be >= 1")
    cfg = sweep_config if sweep_config is not None else SweepConfig()

    def run_sample(i):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((master_seed, i))))
        v = bg.prior.sample(rng)
        game = realize(bg, v)
        try:
            res = alpha_sweep(game, m=m, config=cfg)
            return res.dist.probabilities, res.alpha_pre, None
        except SweepError as first:
            if cfg.mode == "fixed":
                retry = replace(cfg, alpha_fixed=cfg.alpha_fixed / 2)
            else:
                retry = replace(cfg, alpha0=cfg.alpha0 / 2)
            try:
                res = alpha_sweep(game, m=m, config=retry)
                return res.dist.probabilities, res.alpha_pre, None
            except SweepError:
                return None, None, str(first)

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(run_sample, range(n_samples)))
    else:
        results = [run_sample(i) for i in range(n_samples)]

    rows, alphas, skipped = [], [], []
    for i, (probs, alpha, err) in enumerate(results):
        alphas.append(alpha)
        if probs is None:
            skipped.append({"sample": i, "error": err})
        else:
            rows.append(probs)
    if len(skipped) > MAX_SKIP_FRACTION * n_samples:
        raise ExcessiveSkipsError(
            f"{len(skipped)} of {n_samples} samples failed to sweep "
            f"(limit {MAX_SKIP_FRACTION:.0%})")

    stacked = np.vstack(rows)
    mean = stacked.mean(axis=0)
    n_used = len(rows)
    if n_used > 1:
        stderr = stacked.std(axis=0, ddof=1) / np.sqrt(n_used)
    else:
        stderr = np.zeros_like(mean)
    policy = {"mode": "monte_carlo", "sweep": _describe(cfg),
              "master_seed": master_seed, "m": m,
              "alphas": alphas, "skipped": skipped}
    return Collection(mean, stderr, n_samples, policy)


def hawk_dove_closed_form(p):
    """Expected evolutionary strength over (HH, HD, DH, DD) for type
    probability ``p``: (p^2, (1-p^2)/2, (1-p^2)/2, 0). Test oracle."""
    if not 0.0 <= p <= 1.0:
        raise GameSpecError(f"p={p} outside [0, 1]")
    half = (1.0 - p * p) / 2.0
    return np.array([p * p, half, half, 0.0])


def group_marginals(probabilities, groups, strategy_counts):
    """Per-group average of the players' marginal strategy distributions.

    ``groups`` must partition the player set and all players inside a group
    must share a strategy count. Rows sum to 1.
    """
    counts = tuple(int(n) for n in strategy_counts)
    probs = np.asarray(probabilities, dtype=float)
    seen = sorted(p for g in groups for p in g)
    if seen != list(range(len(counts))):
        raise GameSpecError(f"groups {groups!r} do not partition "
                            f"players 0..{len(counts) - 1}")
    cube = probs.reshape(counts)
    out = []
    for group in groups:
        sizes = {counts[p] for p in group}
        if len(sizes) != 1:
            raise GameSpecError(
                f"players in group {group!r} have differing strategy counts")
        axes_sum = np.zeros(sizes.pop())
        for p in group:
            other = tuple(ax for ax in range(len(counts)) if ax != p)
            axes_sum += cube.sum(axis=other)
        out.append(axes_sum / len(group))
    if len({len(row) for row in out}) == 1:
        return np.vstack(out)
    return out


def _describe(cfg):
    if cfg.mode == "doubling":
        return {"mode": "doubling", "alpha0": cfg.alpha0,
                "factor": cfg.factor, "max_steps": cfg.max_steps}
    return {"mode": "fixed", "alpha_fixed": cfg.alpha_fixed, "step": cfg.step}
