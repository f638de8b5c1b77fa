import numpy as np
import pytest
import scipy.sparse as sp

from arc.alpha_rank import (SweepConfig, TransitionMatrix, alpha_sweep,
                            fixation_ratio, stationary_distribution,
                            transition_matrix)
from arc.errors import (GameSpecError, NotIrreducibleError, SweepError)
from arc.games import NormalFormGame, profile_index
from arc.mechanisms import hawk_dove_game

from conftest import random_game

M = 50


def entry(tm, src, dst):
    return tm.matrix[src, dst]


class TestTransitionMatrix:
    def test_zero_delta_entry_is_eta_over_m(self):
        game = NormalFormGame((2, 2), np.ones((2, 4)))
        tm = transition_matrix(game, alpha=1.0, m=50)
        assert tm.eta == 0.5
        # eta/m = 0.5/50 = 0.01 exactly
        assert entry(tm, 0, 1) == 0.01
        assert entry(tm, 3, 2) == 0.01

    def test_pd_positive_delta_entry(self, pd_game):
        # (Dove,Dove) -> (Hawk,Dove): delta=+2, alpha=10, m=50, eta=1/2.
        # 0.5*(1-e^-20)/(1-e^-1000), evaluated to 20 digits with mpmath.
        tm = transition_matrix(pd_game, alpha=10.0, m=50)
        dd = profile_index((1, 1), (2, 2))
        hd = profile_index((0, 1), (2, 2))
        assert entry(tm, dd, hd) == pytest.approx(0.49999999896942318878,
                                                  rel=1e-15)

    def test_pd_large_negative_delta_underflows_to_zero(self, pd_game):
        # (Hawk,Hawk) -> (Dove,Hawk): delta=-1 at alpha=50, m=50 is
        # ~eta*e^{-(m-1)*50} < 1e-300, which underflows; the entry must be
        # absent from the sparse structure, not NaN.
        tm = transition_matrix(pd_game, alpha=50.0, m=50)
        hh = profile_index((0, 0), (2, 2))
        dh = profile_index((1, 0), (2, 2))
        assert entry(tm, hh, dh) == 0.0
        assert np.isfinite(tm.matrix.data).all()

    def test_rows_stochastic_fuzz(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            game = random_game(rng, low=-50.0, high=50.0)
            alpha = 10.0 ** rng.uniform(-5, 2)
            tm = transition_matrix(game, alpha, m=int(rng.integers(2, 100)))
            rowsums = np.asarray(tm.matrix.sum(axis=1)).ravel()
            np.testing.assert_allclose(rowsums, 1.0, rtol=0, atol=1e-12)

    def test_off_diagonal_bounded_by_eta(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            game = random_game(rng)
            tm = transition_matrix(game, 1.0, m=50)
            coo = tm.matrix.tocoo()
            off = coo.data[coo.row != coo.col]
            assert off.max() <= tm.eta + 1e-15
            assert off.min() >= 0.0

    def test_sparsity_per_row(self):
        rng = np.random.default_rng(29)
        game = random_game(rng, (3, 4, 2))
        tm = transition_matrix(game, 1.0, m=50)
        budget = sum(c - 1 for c in game.strategy_counts)
        coo = tm.matrix.tocoo()
        off_rows = coo.row[coo.row != coo.col]
        assert np.bincount(off_rows, minlength=tm.n_states).max() <= budget

    def test_alpha_must_be_positive(self, pd_game):
        with pytest.raises(GameSpecError):
            transition_matrix(pd_game, 0.0, m=50)
        with pytest.raises(GameSpecError):
            transition_matrix(pd_game, -1.0, m=50)

    def test_population_size_validated(self, pd_game):
        with pytest.raises(GameSpecError):
            transition_matrix(pd_game, 1.0, m=1)

    def test_zero_delta_limit(self):
        # entry(delta=1e-9) must approach eta/m: |ratio - 1/m| <= 1e-6/m...
        # the spec bound is 1e-6 * eta on the full entry.
        eta = 0.5
        got = eta * fixation_ratio(np.array([1e-9]), 50)[0]
        assert abs(got - eta / 50) <= 1e-6 * eta

    def test_fixation_ratio_continuous_at_zero(self):
        # ratio(x) = (1/m)(1 + (m-1)x/2 + O(x^2)): both branches approach
        # 1/m linearly and straddle it.
        m = 50
        for x in (1e-12, 1e-8, 1e-4):
            lo = fixation_ratio(np.array([-x]), m)[0]
            hi = fixation_ratio(np.array([x]), m)[0]
            assert lo < 1 / m < hi
            assert abs(hi - 1 / m) <= (m - 1) * x / m
            assert abs(lo - 1 / m) <= (m - 1) * x / m


class TestAffineInvariance:
    def test_transition_identity_200_triples(self):
        # C(alpha, a*u + b) == C(a*alpha, u) entrywise to 1e-12 relative.
        rng = np.random.default_rng(2024)
        for _ in range(200):
            game = random_game(rng)
            a = rng.uniform(0.1, 10.0)
            b = rng.uniform(-100.0, 100.0)
            alpha = rng.uniform(0.01, 0.1)
            scaled = NormalFormGame(game.strategy_counts,
                                    a * game.payoffs + b)
            c1 = transition_matrix(scaled, alpha, m=M).matrix
            c2 = transition_matrix(game, a * alpha, m=M).matrix
            diff = np.abs((c1 - c2).toarray())
            scale = np.maximum(np.abs(c1.toarray()), np.abs(c2.toarray()))
            assert (diff <= 1e-12 * scale + 1e-250).all()

    def test_distribution_level_identity(self):
        rng = np.random.default_rng(77)
        for _ in range(20):
            game = random_game(rng)
            a = rng.uniform(0.1, 10.0)
            b = rng.uniform(-100.0, 100.0)
            alpha = rng.uniform(0.01, 0.1)
            scaled = NormalFormGame(game.strategy_counts,
                                    a * game.payoffs + b)
            d1 = stationary_distribution(transition_matrix(scaled, alpha, M))
            d2 = stationary_distribution(transition_matrix(game, a * alpha, M))
            np.testing.assert_allclose(d1.probabilities, d2.probabilities,
                                       rtol=0, atol=1e-10)


def chain(rows, counts=(2,)):
    mat = sp.csr_matrix(np.asarray(rows, dtype=float))
    return TransitionMatrix(mat, alpha=1.0, m=M, eta=1.0,
                            strategy_counts=counts)


def gth_reference(dense):
    """Unblocked textbook GTH, kept here as the oracle for the blocked one."""
    a = dense.copy()
    n = a.shape[0]
    escape = np.empty(n)
    for k in range(n - 1, 0, -1):
        s = a[k, :k].sum()
        assert s > 0
        escape[k] = s
        a[k, :k] /= s
        a[:k, :k] += np.outer(a[:k, k], a[k, :k])
    pi = np.empty(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = (pi[:k] @ a[:k, k]) / escape[k]
    return pi / pi.sum()


class TestGth:
    def test_blocked_matches_reference(self):
        from arc.alpha_rank import _solve_gth
        rng = np.random.default_rng(5)
        for n in (3, 17, 64, 130, 257):
            dense = rng.random((n, n)) ** 4
            dense /= dense.sum(axis=1, keepdims=True)
            got = _solve_gth(sp.csr_matrix(dense), block=32)
            np.testing.assert_allclose(got, gth_reference(dense),
                                       rtol=1e-12, atol=0)

    def test_handles_near_reducible_two_blocks(self):
        # Two 2-state clumps coupled through 1e-280 leak edges: the grounded
        # LU cannot solve this, GTH must (and the answer is symmetric).
        from arc.alpha_rank import _solve_gth
        leak = 1e-280
        p = np.array([[0.0, 1.0, 0.0, 0.0],
                      [1.0 - leak, 0.0, leak, 0.0],
                      [0.0, 0.0, 0.0, 1.0],
                      [leak, 0.0, 1.0 - leak, 0.0]])
        pi = _solve_gth(sp.csr_matrix(p))
        np.testing.assert_allclose(pi, 0.25, rtol=1e-10)


class TestStationaryDistribution:
    def test_symmetric_two_state(self):
        d = stationary_distribution(chain([[0.5, 0.5], [0.5, 0.5]]))
        np.testing.assert_allclose(d.probabilities, [0.5, 0.5], atol=1e-14)

    def test_two_state_hand_solved(self):
        # pi solves 0.1*pi0 = 0.3*pi1 -> (0.75, 0.25).
        d = stationary_distribution(chain([[0.9, 0.1], [0.3, 0.7]]))
        np.testing.assert_allclose(d.probabilities, [0.75, 0.25], atol=1e-12)

    def test_reducible_chain_rejected(self):
        with pytest.raises(NotIrreducibleError):
            stationary_distribution(chain([[1.0, 0.0], [0.0, 1.0]]))

    def test_pd_at_alpha_pre_concentrates_on_hawk_hawk(self, pd_game):
        res = alpha_sweep(pd_game, m=M)
        hh = profile_index((0, 0), (2, 2))
        assert res.dist.probabilities[hh] >= 0.999

    def test_residual_recorded(self, pd_game):
        d = stationary_distribution(transition_matrix(pd_game, 1.0, M))
        assert 0.0 <= d.residual <= 1e-10

    def test_probabilities_clean(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            game = random_game(rng)
            d = stationary_distribution(transition_matrix(game, 1.0, M))
            assert d.probabilities.min() >= 0.0
            assert abs(d.probabilities.sum() - 1.0) <= 1e-10

    def test_power_iteration_oracle_agreement(self):
        # All shapes with |S| <= 12; direct solver vs long power iteration.
        # Alpha is kept in the mixing regime, where a million power steps
        # actually reach the stationary point; at larger alpha the chain is
        # nearly reducible and no iterative oracle is meaningful.
        rng = np.random.default_rng(41)
        shapes = [(2, 2), (3, 4), (12,), (2, 2, 3), (2, 3, 2), (6, 2)]
        for counts in shapes:
            for _ in range(3):
                game = random_game(rng, counts)
                tm = transition_matrix(game, 0.05, M)
                direct = stationary_distribution(tm, method="direct")
                power = stationary_distribution(tm, method="power")
                np.testing.assert_allclose(direct.probabilities,
                                           power.probabilities,
                                           rtol=0, atol=1e-8)


class TestSmoothness:
    @pytest.mark.parametrize("alpha", [0.1, 1.0, 5.0])
    def test_finite_difference_error_shrinks_quadratically(self, alpha):
        # f(alpha, u(., v)) is continuously differentiable in a type
        # coordinate, so the central-difference error drops ~4x when h
        # halves (exactly 5x measured against the h/4 estimate). The step
        # scales with the distribution's response width 1/((m-1)*alpha).
        base1 = np.array([1.2, 0.05, -0.9])
        base2 = np.array([0.9, -0.15, -1.25])

        def dist(t):
            v1 = base1.copy()
            v1[0] += t
            game = hawk_dove_game(v1, base2)
            tm = transition_matrix(game, alpha, m=M)
            return stationary_distribution(tm).probabilities

        def central(h):
            return (dist(h) - dist(-h)) / (2.0 * h)

        h = 1.0 / (4.0 * (M - 1) * alpha)
        d1, d2, d3 = central(h), central(h / 2), central(h / 4)
        err1 = np.max(np.abs(d1 - d3))
        err2 = np.max(np.abs(d2 - d3))
        assert err2 <= err1 / 3.0 or err1 < 1e-12


class TestAlphaSweep:
    def test_doubling_returns_largest_existing_alpha(self, pd_game):
        res = alpha_sweep(pd_game, m=M)
        assert res.dist.converged_flag
        assert res.alpha_pre == res.dist.alpha_used
        # The next doubling must fail.
        with pytest.raises(NotIrreducibleError):
            stationary_distribution(
                transition_matrix(pd_game, 2 * res.alpha_pre, M))

    def test_monotone_existence_along_trajectory(self, pd_game, ac_game):
        for game in (pd_game, ac_game):
            res = alpha_sweep(game, m=M)
            for alpha in res.alphas_tried[:-1]:
                stationary_distribution(transition_matrix(game, alpha, M))
                stationary_distribution(transition_matrix(game, alpha / 2, M))

    def test_ac_limit_splits_mass_evenly(self, ac_game):
        res = alpha_sweep(ac_game, m=M)
        pi = res.dist.probabilities
        hd = profile_index((0, 1), (2, 2))
        dh = profile_index((1, 0), (2, 2))
        assert pi[hd] == pytest.approx(0.5, abs=1e-6)
        assert pi[dh] == pytest.approx(0.5, abs=1e-6)
        assert pi[profile_index((0, 0), (2, 2))] <= 1e-6

    def test_mixed_limit_all_mass_on_hawk_dove(self, mixed_game):
        res = alpha_sweep(mixed_game, m=M)
        hd = profile_index((0, 1), (2, 2))
        assert res.dist.probabilities[hd] >= 0.999

    def test_never_disconnecting_game_errors(self):
        game = NormalFormGame((2, 2), np.zeros((2, 4)))
        with pytest.raises(SweepError):
            alpha_sweep(game, m=M)

    def test_fixed_mode_decrements_to_success(self, pd_game):
        # The binding edge is the delta=-2 entry into (Dove,Dove), which
        # underflows above alpha = 744.44/(49*2) = 7.596; starting at 16.0
        # the fixed sweep must walk the grid down to 7.0.
        cfg = SweepConfig(mode="fixed", alpha_fixed=16.0, step=1.0)
        res = alpha_sweep(pd_game, m=M, config=cfg)
        assert res.alpha_pre == pytest.approx(7.0)
        assert res.dist.converged_flag

    def test_fixed_mode_matches_linear_scan(self):
        # Bisection over the decrement grid must return the same alpha as
        # stepping down one decrement at a time.
        rng = np.random.default_rng(53)
        for _ in range(10):
            game = random_game(rng, (2, 2), low=-2.0, high=2.0)
            cfg = SweepConfig(mode="fixed", alpha_fixed=30.0, step=0.7)
            res = alpha_sweep(game, m=M, config=cfg)
            alpha = cfg.alpha_fixed
            while True:
                try:
                    stationary_distribution(transition_matrix(game, alpha, M))
                    break
                except NotIrreducibleError:
                    alpha -= cfg.step
            assert res.alpha_pre == pytest.approx(alpha)

    def test_bad_configs_rejected(self):
        with pytest.raises(GameSpecError):
            SweepConfig(mode="nope")
        with pytest.raises(GameSpecError):
            SweepConfig(mode="fixed")
        with pytest.raises(GameSpecError):
            SweepConfig(mode="fixed", alpha_fixed=1.0, step=0.0)
