"""Independent oracles used across the test modules.

These deliberately avoid the closed-form payoff code paths: expectations are
built by enumerating or sampling the underlying offer/action outcomes with the
decision functions themselves.
"""

from __future__ import annotations

import numpy as np

from jointcommit import (
    GameParams,
    PopulationState,
    Strategy,
    choose_action,
    commit_probability,
    form_arrangement,
    predicted_reputations,
)
from jointcommit.payoffs import COOPERATION_COST


def brute_force_pairwise(i: Strategy, j: Strategy, r_i: float, r_j: float,
                         params: GameParams) -> float:
    """Expected payoff of i by enumerating the four offer outcomes."""
    w_ij = commit_probability(i, r_j)
    w_ji = commit_probability(j, r_i)
    expected = 0.0
    for offer_i, p_i in ((True, w_ij), (False, 1.0 - w_ij)):
        for offer_j, p_j in ((True, w_ji), (False, 1.0 - w_ji)):
            weight = p_i * p_j
            if weight == 0.0:
                continue
            a = form_arrangement(offer_i, offer_j)
            coop_i = choose_action(i, a)
            coop_j = choose_action(j, a)
            payoff = (-params.c_a * (1 if a else 0)
                      - COOPERATION_COST * (1 if coop_i else 0)
                      + params.b * (1 if coop_j else 0))
            expected += weight * payoff
    return expected


def sampled_encounters(pop: PopulationState, params: GameParams, n: int,
                       rng: np.random.Generator):
    """Sample n ordered encounters; yields (focal, partner, payoff, cooperated)."""
    reps = predicted_reputations(pop, params)
    strategies = []
    for s in pop.strategies():
        strategies.extend([s] * pop.count(s))
    N = len(strategies)
    for _ in range(n):
        x = int(rng.integers(N))
        y = int(rng.integers(N - 1))
        if y >= x:
            y += 1
        si, sj = strategies[x], strategies[y]
        offer_i = rng.random() < commit_probability(si, reps[sj])
        offer_j = rng.random() < commit_probability(sj, reps[si])
        a = form_arrangement(offer_i, offer_j)
        coop_i = choose_action(si, a)
        coop_j = choose_action(sj, a)
        payoff = (-params.c_a * (1 if a else 0)
                  - COOPERATION_COST * (1 if coop_i else 0)
                  + params.b * (1 if coop_j else 0))
        yield si, sj, payoff, coop_i


def simulate_fixation_chain(query, attempts: int, seed: int) -> float:
    """Monte Carlo absorption rate of the chain the fixation recursion solves.

    State m in 1..N-1 steps up with the logistic probability of the recursion's
    m-th payoff gap and down otherwise; absorption at N counts as success.
    Vectorized over all attempts.
    """
    from jointcommit.fixation import _payoff_gaps

    N = query.N
    gaps = _payoff_gaps(query)[::-1]           # gap used at state m is gaps[m-1]
    up = 1.0 / (1.0 + np.exp(-query.s * gaps))
    rng = np.random.default_rng(seed)
    state = np.ones(attempts, dtype=np.int64)
    fixed = 0
    while state.size:
        u = rng.random(state.size)
        state = np.where(u < up[state - 1], state + 1, state - 1)
        fixed += int(np.count_nonzero(state == N))
        state = state[(state > 0) & (state < N)]
    return fixed / attempts
