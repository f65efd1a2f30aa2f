"""Exact pairwise fixation probabilities in the rare-mutation limit.

A single invader either takes over or goes extinct under the imitation
dynamics before the next mutant appears.  The absorption probability follows
the pairwise-comparison recursion whose step ratios are exp(-s * payoff gap);
this module indexes the recursion by resident count, the convention under
which the analytic tables this toolkit validates against were produced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .payoffs import (
    GameParams,
    PopulationState,
    average_payoff,
    pairwise_payoff,
    payoff_matrix,
    predict_reputation,
    predicted_reputations,
)
from .strategies import ALL_STRATEGIES, CommitmentRule, Strategy


@dataclass(frozen=True)
class FixationQuery:
    invader: Strategy
    resident: Strategy
    game: GameParams
    N: int = 100
    s: float = 1.0

    def __post_init__(self):
        if self.invader == self.resident:
            raise ValueError("invader and resident must differ")
        if self.N < 2:
            raise ValueError(f"population size must be >= 2, got {self.N}")


@dataclass(frozen=True)
class FixationResult:
    rho: float
    drift_multiple: float   # rho * N; 1.0 means neutral drift


def state_payoffs(invader: Strategy, resident: Strategy, k: int, N: int,
                  game: GameParams) -> tuple[float, float]:
    """Average payoffs (invader, resident) with k invaders among N players.

    Reputations are classified against the two-strategy composition at this
    count, so redemption can switch on or off as k moves.
    """
    if not 1 <= k <= N - 1:
        raise ValueError(f"invader count must be in [1, {N - 1}], got {k}")
    pop = PopulationState({invader: k, resident: N - k})
    reps = predicted_reputations(pop, game)
    order = (invader, resident)
    P = payoff_matrix(order, reps, game)
    return (
        average_payoff(invader, pop, P, order),
        average_payoff(resident, pop, P, order),
    )


def _payoff_gaps(query: FixationQuery) -> np.ndarray:
    """invader-minus-resident payoff gap for every invader count 1..N-1.

    Equivalent to looping state_payoffs but without per-state population
    objects; the payoff arithmetic is shared via pairwise_payoff.
    """
    inv, res, game, N = query.invader, query.resident, query.game, query.N
    inv_1 = inv.alpha is CommitmentRule.ALWAYS
    res_1 = res.alpha is CommitmentRule.ALWAYS
    gaps = np.empty(N - 1)
    for k in range(1, N):
        committers = (k if inv_1 else 0) + (N - k if res_1 else 0)
        r_i = predict_reputation(inv, game, committers - (1 if inv_1 else 0) >= 1).value
        r_j = predict_reputation(res, game, committers - (1 if res_1 else 0) >= 1).value
        P_ii = pairwise_payoff(inv, inv, r_i, r_i, game)
        P_ij = pairwise_payoff(inv, res, r_i, r_j, game)
        P_ji = pairwise_payoff(res, inv, r_j, r_i, game)
        P_jj = pairwise_payoff(res, res, r_j, r_j, game)
        pi_i = (P_ii * (k - 1) + P_ij * (N - k)) / (N - 1)
        pi_j = (P_ji * k + P_jj * (N - k - 1)) / (N - 1)
        gaps[k - 1] = pi_i - pi_j
    return gaps


def fixation_probability(query: FixationQuery) -> FixationResult:
    """Probability that a single invader's strategy replaces the resident's.

    Evaluated in log space: the recursion's products become cumulative sums of
    -s * gap, with the m-th factor taking the payoff gap at invader count N-m
    (resident-count indexing).  When every gap is zero the direct sum is exact
    and yields 1/N bit-for-bit.
    """
    gaps = _payoff_gaps(query)[::-1]
    log_terms = np.cumsum(-query.s * gaps)
    if not np.all(np.isfinite(log_terms)):
        raise ArithmeticError("non-finite payoff gap in fixation recursion")
    peak = log_terms.max()
    if peak < 700.0:
        rho = 1.0 / (1.0 + np.exp(log_terms).sum())
    else:
        # direct sum would overflow; shift by the peak
        denom_log = peak + np.log(np.exp(-peak) + np.exp(log_terms - peak).sum())
        rho = float(np.exp(-denom_log))
    return FixationResult(rho=float(rho), drift_multiple=float(rho * query.N))


def fixation_table(game: GameParams, N: int = 100, s: float = 1.0,
                   strategies: tuple[Strategy, ...] = ALL_STRATEGIES,
                   ) -> dict[tuple[Strategy, Strategy], FixationResult]:
    """rho for every ordered (invader, resident) pair; diagonal omitted."""
    table = {}
    for inv in strategies:
        for res in strategies:
            if inv == res:
                continue
            table[(inv, res)] = fixation_probability(
                FixationQuery(inv, res, game, N=N, s=s)
            )
    return table


#: Row/column order used by the reference tables (0+ appended last).
TABLE_ORDER = tuple(
    Strategy.parse(n) for n in ("1-", "R-", "0-", "1A", "RA", "0A", "1+", "R+", "0+")
)


def format_table_text(table: dict[tuple[Strategy, Strategy], FixationResult],
                      order: tuple[Strategy, ...] = TABLE_ORDER) -> str:
    """Percent table (rows: invader, columns: resident) for eyeball diffing."""
    width = 8
    lines = ["invader\\resident".ljust(18) + "".join(s.name.rjust(width) for s in order)]
    for inv in order:
        cells = []
        for res in order:
            if inv == res:
                cells.append("-".rjust(width))
            else:
                cells.append(f"{table[(inv, res)].rho * 100:.2f}%".rjust(width))
        lines.append(inv.name.ljust(18) + "".join(cells))
    return "\n".join(lines) + "\n"
