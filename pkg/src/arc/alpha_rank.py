"""Finite-population transition model, stationary solve, and the alpha sweep.

The edge rule for deviator delta d and selection intensity alpha is

    eta * (1 - exp(-alpha*d)) / (1 - exp(-m*alpha*d))   if d != 0
    eta / m                                             otherwise

with eta = 1 / sum_k (|S_k| - 1). Evaluated naively this overflows for
alpha*d << 0, so the ratio is computed through expm1 with the negative branch
rescaled by exp((m-1)*alpha*d); entries that underflow to zero are genuinely
dropped, which is what ends the sweep.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import GameSpecError, NotIrreducibleError, SolverFailureError, SweepError
from .response_graph import build_game_graph

DEFAULT_M = 50
# Off-diagonal entries at or below this are treated as numerically absent
# when testing whether the chain is still one communicating class. Zero means
# an edge only disappears when its weight underflows to exact 0; the reported
# pre-limit alphas depend directly on this choice.
CONNECTIVITY_EPS = 0.0
RESIDUAL_TOL = 1e-10


def fixation_ratio(x, m):
    """(1 - e^-x) / (1 - e^-mx), elementwise, without overflow.

    Continuously extends to 1/m at x = 0. For x < 0 uses the identity
    ratio(x) = exp((m-1)x) * expm1(x)/expm1(mx); underflow to 0 there is the
    intended behavior at large negative x.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    zero = x == 0.0
    pos = x > 0.0
    neg = ~(zero | pos)
    out[zero] = 1.0 / m
    xp = x[pos]
    out[pos] = np.expm1(-xp) / np.expm1(-m * xp)
    xn = x[neg]
    out[neg] = np.exp((m - 1) * xn) * (np.expm1(xn) / np.expm1(m * xn))
    return out


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic sparse chain over joint profiles for one (alpha, m)."""

    matrix: sp.csr_matrix
    alpha: float
    m: int
    eta: float
    strategy_counts: tuple

    @property
    def n_states(self):
        return self.matrix.shape[0]


@dataclass(frozen=True)
class RankDistribution:
    """Stationary probability vector plus the alpha it was computed at."""

    probabilities: np.ndarray
    alpha_used: float
    residual: float
    converged_flag: bool = False

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)


def transition_matrix(game, alpha, m=DEFAULT_M, graph=None):
    """Build the selection-mutation chain for ``game`` at (alpha, m).

    ``graph`` may carry a prebuilt game graph so a sweep reuses the payoff
    deltas across alpha values.
    """
    if alpha <= 0:
        raise GameSpecError(f"alpha must be positive, got {alpha}")
    if m < 2:
        raise GameSpecError(f"population size m must be >= 2, got {m}")
    if graph is None:
        graph = build_game_graph(game)
    counts = graph.strategy_counts
    n = graph.n_nodes
    denom = sum(c - 1 for c in counts)
    if denom == 0:
        # Single-profile game: the chain is the 1x1 identity.
        mat = sp.csr_matrix(np.ones((1, 1)))
        return TransitionMatrix(mat, float(alpha), int(m), np.inf, counts)
    eta = 1.0 / denom

    probs = eta * fixation_ratio(alpha * graph.delta, m)
    off = sp.csr_matrix((probs, (graph.src, graph.dst)), shape=(n, n))
    row_sums = np.asarray(off.sum(axis=1)).ravel()
    diag = 1.0 - row_sums
    # Guard against accumulated round-off pushing a diagonal slightly negative.
    np.clip(diag, 0.0, 1.0, out=diag)
    mat = (off + sp.diags(diag)).tocsr()
    return TransitionMatrix(mat, float(alpha), int(m), eta, counts)


def _is_irreducible(tm, eps=CONNECTIVITY_EPS):
    mat = tm.matrix.tocoo()
    keep = (mat.row != mat.col) & (mat.data > eps)
    adj = sp.csr_matrix((np.ones(keep.sum(), dtype=np.int8),
                         (mat.row[keep], mat.col[keep])),
                        shape=mat.shape)
    n_comp, _ = connected_components(adj, directed=True, connection="strong")
    return n_comp == 1


def _solve_direct(mat):
    """Grounded dense solve of pi (C - I) = 0.

    One state is pinned to 1 and the remaining balance equations are solved
    with LAPACK; the result is renormalized afterwards. Grounding (rather
    than overwriting an equation with the normalization row) keeps the
    un-grounded system's structure intact, and the ground state is chosen
    with a few power steps so its stationary mass is large, which keeps the
    unnormalized solution entries bounded. The game graphs in scope have
    clique-rich structure that defeats sparse LU orderings, so dense LAPACK
    is the faster direct method up to ~10^4 profiles.
    """
    n = mat.shape[0]
    pi = np.full(n, 1.0 / n)
    for _ in range(10):
        pi = pi @ mat
    g = int(np.argmax(pi))

    a = mat.T.toarray()
    a[np.diag_indices(n)] -= 1.0
    keep = np.arange(n) != g
    b = -a[np.ix_(keep, [g])].ravel()
    with warnings.catch_warnings():
        # Near-reducible chains are legitimately ill-conditioned; the caller
        # checks the residual.
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        x = sla.solve(a[np.ix_(keep, keep)], b, check_finite=False)
    out = np.empty(n)
    out[keep] = x
    out[g] = 1.0
    return out


def _solve_power(mat, tol, max_iters=1_000_000):
    n = mat.shape[0]
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iters):
        nxt = pi @ mat
        if np.max(np.abs(nxt - pi)) < tol:
            return nxt
        pi = nxt
    return pi


def _solve_gth(mat, block=128):
    """Grassmann-Taksar-Heyman state reduction.

    Subtraction-free elimination: stable to entrywise relative accuracy even
    when the chain is within an ulp of reducible, which is exactly the
    regime at the top of an alpha sweep; used as the fallback when the fast
    LU path fails its own validation. Dividing each eliminated row by its
    escape mass keeps every stored entry in [0, 1] (the censored chain stays
    substochastic), so elimination cannot overflow.

    Eliminations are batched: within a block the rank-1 censoring updates
    are kept as lazy factors (applied on the fly to the rows/columns the
    block itself needs) and hit the leading submatrix as one matrix product
    per block, which moves the n^3 work into BLAS.
    """
    a = mat.toarray().astype(float)
    n = a.shape[0]
    escape = np.empty(n)
    with np.errstate(under="ignore"):
        hi = n
        while hi > 1:
            lo = max(1, hi - block)
            width = hi - lo
            cbuf = np.zeros((hi, width))
            rbuf = np.zeros((width, hi))
            used = 0
            for j in range(hi - 1, lo - 1, -1):
                row = a[j, :j].copy()
                if used:
                    row += cbuf[j, :used] @ rbuf[:used, :j]
                s = row.sum()
                if s <= 0.0:
                    # Numerically absorbing state: the chain is effectively
                    # reducible; the caller's residual gate rejects us.
                    return np.full(n, np.nan)
                escape[j] = s
                row /= s
                col = a[:j, j].copy()
                if used:
                    col += cbuf[:j, :used] @ rbuf[:used, j]
                a[j, :j] = row
                a[:j, j] = col
                cbuf[:j, used] = col
                rbuf[used, :j] = row
                used += 1
            a[:lo, :lo] += cbuf[:lo, :used] @ rbuf[:used, :lo]
            hi = lo
    # Back-substitution of the unnormalized visit measure. Ratios can exceed
    # the double range across near-closed classes, so rescale on the fly;
    # the recurrence is linear and only the direction matters (states pushed
    # below the representable range truly carry ~0 mass).
    pi = np.empty(n)
    pi[0] = 1.0
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        for k in range(1, n):
            val = (pi[:k] @ a[:k, k]) / escape[k]
            if not np.isfinite(val):
                pi[:k] *= 1e-290
                val = (pi[:k] @ a[:k, k]) / escape[k]
                if not np.isfinite(val):
                    return np.full(n, np.nan)
            pi[k] = val
            if val > 1e280:
                pi[:k + 1] /= val
        total = pi.sum()
    if not np.isfinite(total) or total <= 0.0:
        return np.full(n, np.nan)
    return pi / total


def _validate(pi, tm, tol):
    """Normalize, clamp benign round-off, and check the balance residual.

    Returns (RankDistribution, None) on success, (None, reason) otherwise.
    """
    if not np.all(np.isfinite(pi)):
        return None, "stationary solve produced non-finite values"
    total = pi.sum()
    if not np.isfinite(total) or total <= 0:
        return None, "stationary solve produced a non-normalizable vector"
    pi = pi / total
    if pi.min() < -1e-14:
        return None, (f"stationary solve produced entry "
                      f"{pi.min():.3e} < -1e-14")
    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum()
    residual = float(np.max(np.abs(pi @ tm.matrix - pi)))
    if residual > tol:
        return None, f"stationary residual {residual:.3e} exceeds {tol:.3e}"
    return RankDistribution(pi, tm.alpha, residual), None


def stationary_distribution(tm, tol=RESIDUAL_TOL, method="direct"):
    """Solve pi C = pi, sum(pi) = 1 for an irreducible chain.

    The default path is a grounded LAPACK solve; when that fails its own
    validation (nearly reducible chains with several almost-closed classes
    leave the grounded system numerically singular) it falls back to GTH
    state reduction, which is stable there. Raises NotIrreducibleError when
    the thresholded chain is not one strongly connected class (no alpha-rank
    distribution at this alpha), and SolverFailureError when no backend
    meets the residual tolerance.
    """
    n = tm.n_states
    if n == 1:
        return RankDistribution(np.ones(1), tm.alpha, 0.0)
    if not _is_irreducible(tm):
        raise NotIrreducibleError(
            f"chain is not irreducible at alpha={tm.alpha:g}")
    if method == "direct":
        dist, reason = _validate(_solve_direct(tm.matrix), tm, tol)
        if dist is None:
            dist, reason = _validate(_solve_gth(tm.matrix), tm, tol)
    elif method == "gth":
        dist, reason = _validate(_solve_gth(tm.matrix), tm, tol)
    elif method == "power":
        pi = _solve_power(tm.matrix, tol=min(tol * 1e-3, 1e-13))
        dist, reason = _validate(pi, tm, tol)
    else:
        raise GameSpecError(f"unknown solver method {method!r}")
    if dist is None:
        raise SolverFailureError(reason)
    return dist


@dataclass(frozen=True)
class SweepConfig:
    """How to pick alpha: geometric doubling or fixed-with-decrement."""

    mode: str = "doubling"        # "doubling" | "fixed"
    alpha0: float = 1e-5
    factor: float = 2.0
    max_steps: int = 60
    alpha_fixed: float = None
    step: float = 0.1
    tol: float = RESIDUAL_TOL

    def __post_init__(self):
        if self.mode not in ("doubling", "fixed"):
            raise GameSpecError(f"unknown sweep mode {self.mode!r}")
        if self.mode == "doubling" and self.alpha0 <= 0:
            raise GameSpecError("alpha0 must be positive")
        if self.mode == "fixed":
            if self.alpha_fixed is None or self.alpha_fixed <= 0:
                raise GameSpecError("fixed mode needs alpha_fixed > 0")
            if self.step <= 0:
                raise GameSpecError("fixed mode needs step > 0")


@dataclass
class SweepResult:
    alpha_pre: float
    dist: RankDistribution
    alphas_tried: list = field(default_factory=list)


def alpha_sweep(game, m=DEFAULT_M, config=None, graph=None):
    """Approach the limiting distribution by pushing alpha as high as possible.

    Doubling mode starts at ``alpha0`` (which must admit a distribution) and
    doubles until the chain stops being irreducible, returning the last
    success. Fixed mode starts at ``alpha_fixed`` and decrements by ``step``
    until the first success.

    Existence at an alpha means: the thresholded chain is strongly connected
    and the stationary solve meets its residual tolerance. The connectivity
    part is two orders of magnitude cheaper than a solve, so the ladder is
    scanned on connectivity alone and solves happen only from the top
    candidate downwards (normally exactly one solve).
    """
    if config is None:
        config = SweepConfig()
    if graph is None:
        graph = build_game_graph(game)

    def connected(alpha):
        return _is_irreducible(transition_matrix(game, alpha, m, graph))

    def solve(alpha):
        return stationary_distribution(
            transition_matrix(game, alpha, m, graph), tol=config.tol)

    if config.mode == "doubling":
        if not connected(config.alpha0):
            raise SweepError(
                f"no distribution exists at starting alpha {config.alpha0:g}")
        ladder = [config.alpha0]
        while connected(ladder[-1] * config.factor):
            ladder.append(ladder[-1] * config.factor)
            if len(ladder) > config.max_steps:
                raise SweepError(
                    f"distribution still exists after {config.max_steps} "
                    f"doublings (alpha={ladder[-1]:g}); the chain never "
                    "disconnects")
        for alpha in reversed(ladder):
            try:
                dist = solve(alpha)
            except (NotIrreducibleError, SolverFailureError):
                continue
            final = RankDistribution(dist.probabilities, dist.alpha_used,
                                     dist.residual, converged_flag=True)
            return SweepResult(alpha, final, ladder)
        raise SweepError(
            f"no alpha on the doubling ladder from {config.alpha0:g} "
            "admits a stationary solve")

    # Fixed-with-decrement. Edge weights only shrink as alpha grows, so
    # connectivity is monotone along the grid and the first connected grid
    # point can be found by bisection instead of stepping one decrement at a
    # time; the result is identical to the linear scan.
    n_steps = int(np.ceil(config.alpha_fixed / config.step))
    grid = [config.alpha_fixed - k * config.step for k in range(n_steps)]
    grid = [a for a in grid if a > 0]
    if not grid:
        raise SweepError("fixed sweep grid is empty")
    lo, hi = 0, len(grid) - 1
    if not connected(grid[hi]):
        raise SweepError(
            f"fixed sweep from {config.alpha_fixed:g} reached alpha <= 0 "
            "without finding a distribution")
    if connected(grid[lo]):
        first = lo
    else:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if connected(grid[mid]):
                hi = mid
            else:
                lo = mid
        first = hi
    tried = grid[:first]
    for alpha in grid[first:]:
        tried.append(alpha)
        try:
            dist = solve(alpha)
        except (NotIrreducibleError, SolverFailureError):
            continue
        final = RankDistribution(dist.probabilities, dist.alpha_used,
                                 dist.residual, converged_flag=True)
        return SweepResult(alpha, final, tried)
    raise SweepError(
        f"fixed sweep from {config.alpha_fixed:g} reached alpha <= 0 "
        "without finding a distribution")
