"""Game generators: parameterized Hawk-Dove and the 5-student school match.

The matching environment: students T1, T2, T3 (Tops) and A1, A2 (Averages);
schools Gold (2 seats), Silver (1), Bronze (1). Every school ranks all Tops
above all Averages; ties inside a group are resolved by a single uniform
lottery over within-group orderings (3! * 2! = 12 tie-break orders), applied
consistently across schools and rounds. Outcome lotteries are kept in exact
rational form (integer counts over 12) and only the final payoff tensors are
floats.
"""

import itertools
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import GameSpecError
from .games import (BayesianGame, FinitePrior, IndependentGaussianPrior,
                    NormalFormGame, profile_index)

# Outcomes and schools share indices: Gold 0, Silver 1, Bronze 2; Unmatched 3.
GOLD, SILVER, BRONZE, UNMATCHED = 0, 1, 2, 3
SCHOOL_CAPACITY = (2, 1, 1)
N_STUDENTS = 5
TOPS = (0, 1, 2)
AVERAGES = (3, 4)
STUDENT_GROUPS = (TOPS, AVERAGES)

# The six permutations of (Gold, Silver, Bronze), in the fixed order
# (G,S,B), (G,B,S), (S,G,B), (S,B,G), (B,G,S), (B,S,G).
PREFERENCE_ORDERS = ((0, 1, 2), (0, 2, 1), (1, 0, 2),
                     (1, 2, 0), (2, 0, 1), (2, 1, 0))
TRUTHFUL = 0
N_STRATEGIES = len(PREFERENCE_ORDERS)
MATCHING_COUNTS = (N_STRATEGIES,) * N_STUDENTS


def tie_break_orders():
    """All 12 strict priority orders consistent with Tops above Averages."""
    return [tops + avgs
            for tops in itertools.permutations(TOPS)
            for avgs in itertools.permutations(AVERAGES)]


def _prefs(profile):
    if len(profile) != N_STUDENTS:
        raise GameSpecError(f"profile must list {N_STUDENTS} strategies")
    out = []
    for p in profile:
        if isinstance(p, int) or np.issubdtype(type(p), np.integer):
            out.append(PREFERENCE_ORDERS[int(p)])
        else:
            p = tuple(p)
            if sorted(p) != [0, 1, 2]:
                raise GameSpecError(f"invalid preference order {p}")
            out.append(p)
    return out


def run_da(profile, tb):
    """Student-proposing deferred acceptance under tie-break order ``tb``.

    Holds are temporary: a school keeps the best applicants seen so far and
    releases a held student whenever someone with higher priority arrives.
    """
    prefs = _prefs(profile)
    rank = [0] * N_STUDENTS
    for r, s in enumerate(tb):
        rank[s] = r
    pointer = [0] * N_STUDENTS
    held = [[], [], []]
    queue = list(range(N_STUDENTS))
    while queue:
        s = queue.pop()
        if pointer[s] >= 3:
            continue
        sch = prefs[s][pointer[s]]
        slot = held[sch]
        slot.append(s)
        if len(slot) > SCHOOL_CAPACITY[sch]:
            slot.sort(key=rank.__getitem__)
            rejected = slot.pop()
            pointer[rejected] += 1
            queue.append(rejected)
    outcome = [UNMATCHED] * N_STUDENTS
    for sch, slot in enumerate(held):
        for s in slot:
            outcome[s] = sch
    return tuple(outcome)


def run_boston(profile, tb):
    """Immediate-acceptance mechanism: round-k admissions are final.

    In round k every still-unassigned student applies to the k-th school on
    her list; a school admits applicants by priority up to its remaining
    capacity, and a rejection wastes the round even if other seats are open.
    """
    prefs = _prefs(profile)
    rank = [0] * N_STUDENTS
    for r, s in enumerate(tb):
        rank[s] = r
    remaining = list(SCHOOL_CAPACITY)
    outcome = [UNMATCHED] * N_STUDENTS
    unassigned = list(range(N_STUDENTS))
    for rnd in range(3):
        if not unassigned:
            break
        applicants = [[], [], []]
        for s in unassigned:
            applicants[prefs[s][rnd]].append(s)
        for sch in range(3):
            if remaining[sch] == 0 or not applicants[sch]:
                continue
            group = sorted(applicants[sch], key=rank.__getitem__)
            for s in group[:remaining[sch]]:
                outcome[s] = sch
            remaining[sch] -= min(remaining[sch], len(group))
        unassigned = [s for s in unassigned if outcome[s] == UNMATCHED]
    return tuple(outcome)


_MECHANISMS = {"da": run_da, "boston": run_boston}


def _mechanism_fn(mechanism):
    try:
        return _MECHANISMS[mechanism.lower()]
    except KeyError:
        raise GameSpecError(f"unknown mechanism {mechanism!r}; "
                            "expected 'da' or 'boston'")


def outcome_lottery(mechanism, profile):
    """Per-student outcome distribution, averaged exactly over all 12
    tie-break orders. Entries are Fractions with denominator dividing 12."""
    fn = _mechanism_fn(mechanism)
    counts = [[0] * 4 for _ in range(N_STUDENTS)]
    for tb in tie_break_orders():
        outcome = fn(profile, tb)
        for s, o in enumerate(outcome):
            counts[s][o] += 1
    return [tuple(Fraction(c, 12) for c in row) for row in counts]


@lru_cache(maxsize=None)
def lottery_numerators(mechanism):
    """(5, 7776, 4) int array: 12ths of outcome probability per student,
    profile and outcome. Enumerates every profile under every tie-break."""
    fn = _mechanism_fn(mechanism)
    tbs = tie_break_orders()
    n_profiles = N_STRATEGIES ** N_STUDENTS
    counts = np.zeros((N_STUDENTS, n_profiles, 4), dtype=np.int16)
    prefs_by_strategy = PREFERENCE_ORDERS
    for k, combo in enumerate(itertools.product(range(N_STRATEGIES),
                                                repeat=N_STUDENTS)):
        profile = [prefs_by_strategy[c] for c in combo]
        for tb in tbs:
            outcome = fn(profile, tb)
            for s, o in enumerate(outcome):
                counts[s, k, o] += 1
    return counts


def _matching_tensor_builder(mechanism):
    nums = lottery_numerators(mechanism)

    def build(v):
        pay = np.empty((N_STUDENTS, nums.shape[1]))
        for i in range(N_STUDENTS):
            vi = np.asarray(v[i], dtype=float)
            # Integer-count dot product first, then one division by 12:
            # keeps equal lotteries exactly equal in float.
            pay[i] = (nums[i] @ vi) / 12.0
        return pay

    return build


def build_matching_game(mechanism, v):
    """Expected-utility normal-form game for one concrete type vector.

    ``v`` is one 4-vector (v_G, v_S, v_B, v_U) per student.
    """
    v = tuple(tuple(float(x) for x in vi) for vi in v)
    if len(v) != N_STUDENTS or any(len(vi) != 4 for vi in v):
        raise GameSpecError("matching types must be 5 vectors of length 4")
    if not all(np.isfinite(vi).all() for vi in map(np.asarray, v)):
        raise GameSpecError("non-finite type values")
    pay = _matching_tensor_builder(mechanism)(v)
    return NormalFormGame(MATCHING_COUNTS, pay)


def _matching_utility(mechanism):
    nums = lottery_numerators(mechanism)

    def utility(player, coords, v):
        k = profile_index(coords, MATCHING_COUNTS)
        return float(nums[player, k] @ np.asarray(v[player], dtype=float)) / 12.0

    return utility


def matching_ordinal_validity(vi):
    """The environment's ordinal constraint: v_G > v_S > v_B > v_U."""
    return vi[0] > vi[1] > vi[2] > vi[3]


def matching_prior(mean_g=100.0, mean_s=70.0, mean_b=25.0,
                   std_g=6.0, std_s=3.0, std_b=2.0, max_rejections=10_000):
    """Independent normal values per student, unmatched pinned to 0,
    resampled until v_G > v_S > v_B > 0."""
    means = [(mean_g, mean_s, mean_b, 0.0)] * N_STUDENTS
    stds = [(std_g, std_s, std_b, 0.0)] * N_STUDENTS
    return IndependentGaussianPrior(means, stds, matching_ordinal_validity,
                                    max_rejections=max_rejections)


def matching_bayesian_game(mechanism, prior=None):
    """The school-choice environment as a Bayesian game."""
    if prior is None:
        prior = matching_prior()
    return BayesianGame(strategy_counts=MATCHING_COUNTS,
                        type_dims=(4,) * N_STUDENTS,
                        prior=prior,
                        utility=_matching_utility(mechanism),
                        private_values=True,
                        tensor_builder=_matching_tensor_builder(mechanism))


def expected_outcomes(mechanism, probabilities):
    """(5, 4) expected outcome distribution per student under a profile
    distribution: row i is sum_s P(s) * L_i(s) over (G, S, B, U)."""
    nums = lottery_numerators(mechanism)
    probs = np.asarray(probabilities, dtype=float)
    if probs.shape != (nums.shape[1],):
        raise GameSpecError(f"distribution length {probs.shape} does not "
                            f"match {nums.shape[1]} profiles")
    return np.einsum("ise,s->ie", nums, probs) / 12.0


def named_profile_sets():
    """Reporting sets: the environment's known equilibrium profile families.

    NE_DA: Tops truthful, Averages arbitrary (36 profiles). NE_Bo: Tops
    truthful, Averages rank Silver first (4 profiles).
    """
    silver_first = (2, 3)   # (S,G,B), (S,B,G)
    ne_da = [profile_index((TRUTHFUL, TRUTHFUL, TRUTHFUL, a, b),
                           MATCHING_COUNTS)
             for a in range(N_STRATEGIES) for b in range(N_STRATEGIES)]
    ne_bo = [profile_index((TRUTHFUL, TRUTHFUL, TRUTHFUL, a, b),
                           MATCHING_COUNTS)
             for a in silver_first for b in silver_first]
    return {"NE_DA": np.array(ne_da), "NE_Bo": np.array(ne_bo)}


# --- Hawk-Dove ---------------------------------------------------------------

# Type coordinates are vNM values over (win resource, get nothing, cost of
# war). Row player's outcome lotteries by joint action, Hawk = 0:
_HD_LOTTERY_P1 = np.array([[0.5, 0.0, 0.5],    # Hawk, Hawk
                           [1.0, 0.0, 0.0],    # Hawk, Dove
                           [0.0, 1.0, 0.0],    # Dove, Hawk
                           [0.5, 0.5, 0.0]])   # Dove, Dove
_HD_LOTTERY_P2 = _HD_LOTTERY_P1[[0, 2, 1, 3]]

PD_TYPE = (4.0, 0.0, -2.0)
AC_TYPE = (2.0, 0.0, -4.0)


def hawk_dove_game(v1, v2):
    """2x2 Hawk-Dove instance for explicit (V, N, C) player types."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if v1.shape != (3,) or v2.shape != (3,):
        raise GameSpecError("hawk-dove types are (V, N, C) triples")
    pay = np.stack([_HD_LOTTERY_P1 @ v1, _HD_LOTTERY_P2 @ v2])
    return NormalFormGame((2, 2), pay)


def _hawk_dove_tensor_builder(v):
    return np.stack([_HD_LOTTERY_P1 @ np.asarray(v[0], dtype=float),
                     _HD_LOTTERY_P2 @ np.asarray(v[1], dtype=float)])


def _hawk_dove_utility(player, coords, v):
    k = profile_index(coords, (2, 2))
    lot = _HD_LOTTERY_P1 if player == 0 else _HD_LOTTERY_P2
    return float(lot[k] @ np.asarray(v[player], dtype=float))


def hawk_dove_bayesian_game(p):
    """Two players independently of cooperative-dilemma type with probability
    ``p`` and anti-coordination type otherwise."""
    if not 0.0 <= p <= 1.0:
        raise GameSpecError(f"type probability p={p} outside [0, 1]")
    support = [((PD_TYPE, PD_TYPE), p * p),
               ((PD_TYPE, AC_TYPE), p * (1 - p)),
               ((AC_TYPE, PD_TYPE), (1 - p) * p),
               ((AC_TYPE, AC_TYPE), (1 - p) * (1 - p))]
    return BayesianGame(strategy_counts=(2, 2),
                        type_dims=(3, 3),
                        prior=FinitePrior(support),
                        utility=_hawk_dove_utility,
                        private_values=True,
                        tensor_builder=_hawk_dove_tensor_builder)
