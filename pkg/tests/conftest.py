import numpy as np
import pytest

from arc.games import NormalFormGame

# Hawk-Dove instances; profile order (H,H), (H,D), (D,H), (D,D).
PD_PAYOFFS = np.array([[1.0, 4.0, 0.0, 2.0],
                       [1.0, 0.0, 4.0, 2.0]])
AC_PAYOFFS = np.array([[-1.0, 2.0, 0.0, 1.0],
                       [-1.0, 0.0, 2.0, 1.0]])
MIXED_PAYOFFS = np.array([[1.0, 4.0, 0.0, 2.0],
                          [-1.0, 0.0, 2.0, 1.0]])


@pytest.fixture(scope="session")
def pd_game():
    return NormalFormGame((2, 2), PD_PAYOFFS)


@pytest.fixture(scope="session")
def ac_game():
    return NormalFormGame((2, 2), AC_PAYOFFS)


@pytest.fixture(scope="session")
def mixed_game():
    return NormalFormGame((2, 2), MIXED_PAYOFFS)


def random_game(rng, counts=None, low=-1.0, high=1.0):
    if counts is None:
        n_players = rng.integers(1, 4)
        counts = tuple(int(c) for c in rng.integers(2, 5, size=n_players))
    n = int(np.prod(counts))
    return NormalFormGame(counts, rng.uniform(low, high, (len(counts), n)))
