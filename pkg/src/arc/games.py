"""Games, joint-profile indexing, type spaces and priors.

A joint strategy profile is stored as a single mixed-radix integer: player 0's
coordinate is the most significant digit, so ``index = c_0 * |S_1|*...*|S_{N-1}|
+ ...`` (numpy C-order ravel). Payoffs live in one dense ``(n_players,
n_profiles)`` array.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GameSpecError, SamplingError


def profile_index(coords, strategy_counts):
    """Encode per-player strategy indices into a single profile index."""
    coords = tuple(int(c) for c in coords)
    counts = tuple(int(n) for n in strategy_counts)
    if len(coords) != len(counts):
        raise GameSpecError(
            f"coordinate count {len(coords)} != player count {len(counts)}")
    idx = 0
    for c, n in zip(coords, counts):
        if not 0 <= c < n:
            raise GameSpecError(f"strategy index {c} out of range [0, {n})")
        idx = idx * n + c
    return idx


def profile_coords(index, strategy_counts):
    """Decode a profile index back into per-player strategy indices."""
    counts = tuple(int(n) for n in strategy_counts)
    total = int(np.prod(counts))
    index = int(index)
    if not 0 <= index < total:
        raise GameSpecError(f"profile index {index} out of range [0, {total})")
    coords = [0] * len(counts)
    for i in range(len(counts) - 1, -1, -1):
        index, coords[i] = divmod(index, counts[i])
    return tuple(coords)


def all_profile_coords(strategy_counts):
    """(n_profiles, n_players) array of coordinates for every profile index."""
    counts = tuple(int(n) for n in strategy_counts)
    total = int(np.prod(counts))
    idx = np.arange(total)
    return np.stack(np.unravel_index(idx, counts), axis=1)


@dataclass(frozen=True)
class NormalFormGame:
    """Finite game: strategy counts per player plus a dense payoff tensor.

    ``payoffs[i, k]`` is player i's utility at joint profile index k.
    """

    strategy_counts: tuple
    payoffs: np.ndarray

    def __post_init__(self):
        counts = tuple(int(n) for n in self.strategy_counts)
        object.__setattr__(self, "strategy_counts", counts)
        if not counts or any(n < 1 for n in counts):
            raise GameSpecError(f"invalid strategy counts {counts}")
        pay = np.asarray(self.payoffs, dtype=float)
        total = int(np.prod(counts))
        if pay.shape != (len(counts), total):
            raise GameSpecError(
                f"payoff tensor shape {pay.shape} != ({len(counts)}, {total})")
        if not np.all(np.isfinite(pay)):
            raise GameSpecError("payoff tensor contains non-finite entries")
        pay = pay.copy()
        pay.setflags(write=False)
        object.__setattr__(self, "payoffs", pay)

    @property
    def n_players(self):
        return len(self.strategy_counts)

    @property
    def n_profiles(self):
        return int(np.prod(self.strategy_counts))

    def utility(self, player, profile):
        """Payoff of ``player`` at ``profile`` (an index or coordinate tuple)."""
        if not 0 <= player < self.n_players:
            raise GameSpecError(f"player {player} out of range")
        if np.ndim(profile) == 0:
            k = int(profile)
            if not 0 <= k < self.n_profiles:
                raise GameSpecError(f"profile index {k} out of range")
        else:
            k = profile_index(profile, self.strategy_counts)
        return float(self.payoffs[player, k])


class FinitePrior:
    """Prior with finite support: a list of (type vector, probability) pairs."""

    def __init__(self, support):
        self.support = [(_freeze_types(v), float(p)) for v, p in support]
        probs = np.array([p for _, p in self.support])
        if np.any(probs < 0):
            raise GameSpecError("finite prior has negative probabilities")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise GameSpecError(
                f"finite prior probabilities sum to {probs.sum()!r}, not 1")
        self._cum = np.cumsum(probs)

    def sample(self, rng):
        u = rng.random()
        k = int(np.searchsorted(self._cum, u, side="right"))
        k = min(k, len(self.support) - 1)
        return self.support[k][0]


class IndependentGaussianPrior:
    """Per-player independent normal coordinates with rejection resampling.

    Each player's vector is redrawn until ``validity(vector)`` holds; the
    generator supplying the prior owns the ordinal predicate. A fixed
    coordinate (e.g. the value of staying unmatched) is expressed with
    ``stddev = 0``.
    """

    def __init__(self, means, stddevs, validity, max_rejections=10_000):
        self.means = [np.asarray(m, dtype=float) for m in means]
        self.stddevs = [np.asarray(s, dtype=float) for s in stddevs]
        if len(self.means) != len(self.stddevs):
            raise GameSpecError("means/stddevs player counts differ")
        for m, s in zip(self.means, self.stddevs):
            if m.shape != s.shape:
                raise GameSpecError("means/stddevs shapes differ")
            if np.any(s < 0):
                raise GameSpecError("negative stddev")
        self.validity = validity
        if max_rejections < 1:
            raise GameSpecError("max_rejections must be >= 1")
        self.max_rejections = int(max_rejections)

    def sample(self, rng):
        out = []
        for m, s in zip(self.means, self.stddevs):
            for attempt in range(1, self.max_rejections + 1):
                v = m + s * rng.standard_normal(m.shape)
                if self.validity is None or self.validity(tuple(v)):
                    out.append(tuple(float(x) for x in v))
                    break
            else:
                raise SamplingError(
                    f"rejection budget exhausted after {self.max_rejections} "
                    "attempts", attempts=self.max_rejections)
        return tuple(out)


def sample_type(prior, rng):
    """Draw one type vector (tuple of per-player tuples) from a prior."""
    return prior.sample(rng)


def _freeze_types(v):
    return tuple(tuple(float(x) for x in player_v) for player_v in v)


@dataclass(frozen=True)
class BayesianGame:
    """A type-parameterized family of normal-form games.

    ``utility(player, profile_coords, v)`` evaluates one payoff; generators
    may attach ``tensor_builder(v) -> (n_players, n_profiles) array`` so that
    :func:`realize` avoids the per-profile Python loop.
    """

    strategy_counts: tuple
    type_dims: tuple
    prior: object
    utility: object
    private_values: bool = True
    tensor_builder: object = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "strategy_counts",
                           tuple(int(n) for n in self.strategy_counts))
        object.__setattr__(self, "type_dims",
                           tuple(int(d) for d in self.type_dims))

    @property
    def n_players(self):
        return len(self.strategy_counts)

    @property
    def n_profiles(self):
        return int(np.prod(self.strategy_counts))


def realize(bg, v):
    """Instantiate the normal-form game induced by type vector ``v``."""
    v = _freeze_types(v)
    if len(v) != bg.n_players:
        raise GameSpecError(f"type vector has {len(v)} players, "
                            f"game has {bg.n_players}")
    for i, (vi, d) in enumerate(zip(v, bg.type_dims)):
        if len(vi) != d:
            raise GameSpecError(
                f"player {i} type has dim {len(vi)}, expected {d}")
    if bg.tensor_builder is not None:
        pay = np.asarray(bg.tensor_builder(v), dtype=float)
    else:
        coords = all_profile_coords(bg.strategy_counts)
        pay = np.empty((bg.n_players, bg.n_profiles))
        for i in range(bg.n_players):
            for k in range(bg.n_profiles):
                pay[i, k] = bg.utility(i, tuple(coords[k]), v)
    if not np.all(np.isfinite(pay)):
        raise GameSpecError("type evaluator produced non-finite payoffs")
    return NormalFormGame(bg.strategy_counts, pay)
