"""Predicted long-run reputations and the analytic payoff model.

Reputations of judged players settle, per arrangement entered, at 1-eps after
cooperation and eps after defection, because every observer independently
misreads the action with probability eps.  In a finite population a player can
also absorb at reputation zero (no observer erred after a defection) and, with
no unconditional committer around, never re-enter an arrangement.  The three
prediction regimes differ only in how seriously they take that absorption.

Payoffs are expected values over one encounter: each participant pays the
arrangement cost when an arrangement forms, pays 1 when cooperating, and
receives ``b`` when the partner cooperates.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .strategies import (
    ALL_STRATEGIES,
    CommitmentRule,
    CooperationRule,
    Strategy,
)

#: Cost of one's own cooperative act; the payoff unit.
COOPERATION_COST = 1.0


class Regime(enum.Enum):
    """Horizon assumption for zero-reputation absorption without redemption.

    SHORT: absorption is too rare to matter; low/high predictions stand.
    LONG: strategies that defect in arrangements eventually absorb at zero.
    INFINITE: every judged strategy eventually absorbs at zero.
    """

    SHORT = "short"
    LONG = "long"
    INFINITE = "infinite"

    @classmethod
    def parse(cls, text: str) -> "Regime":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown regime {text!r}; expected one of "
                f"{[r.value for r in cls]}"
            ) from None


@dataclass(frozen=True)
class GameParams:
    b: float                      # benefit received per partner cooperation
    c_a: float = 1.0              # arrangement cost per participant
    epsilon: float = 0.01         # perception error probability
    regime: Regime = Regime.LONG

    def __post_init__(self):
        if self.b <= COOPERATION_COST:
            # Allowed (the sweep grid edge needs it) but economically degenerate.
            warnings.warn(
                f"b={self.b} does not exceed the cooperation cost "
                f"{COOPERATION_COST}; mutual defection dominates",
                stacklevel=2,
            )
        if self.c_a < 0:
            raise ValueError(f"arrangement cost must be >= 0, got {self.c_a}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")


class PredictionKind(enum.Enum):
    NONE = "none"    # never judged; keeps the initial good standing
    LOW = "low"      # judged after defections: r = eps
    HIGH = "high"    # judged after cooperation: r = 1 - eps
    ZERO = "zero"    # absorbed at r = 0


@dataclass(frozen=True)
class ReputationPrediction:
    kind: PredictionKind
    value: float


class PopulationState:
    """Immutable strategy counts summing to the population size."""

    __slots__ = ("_counts", "N")

    def __init__(self, counts: Mapping[Strategy, int]):
        total = 0
        arr = [0] * len(ALL_STRATEGIES)
        for s, n in counts.items():
            if not isinstance(s, Strategy):
                s = Strategy.parse(str(s))
            if n < 0 or n != int(n):
                raise ValueError(f"count for {s} must be a nonnegative integer, got {n}")
            arr[ALL_STRATEGIES.index(s)] += int(n)
            total += int(n)
        if total < 2:
            raise ValueError(f"population size must be >= 2, got {total}")
        self._counts = tuple(arr)
        self.N = total

    @classmethod
    def from_array(cls, arr: Sequence[int]) -> "PopulationState":
        return cls({s: int(n) for s, n in zip(ALL_STRATEGIES, arr) if n})

    def as_array(self) -> np.ndarray:
        return np.array(self._counts, dtype=np.int64)

    def count(self, s: Strategy) -> int:
        return self._counts[ALL_STRATEGIES.index(s)]

    def strategies(self) -> tuple[Strategy, ...]:
        return tuple(s for s, n in zip(ALL_STRATEGIES, self._counts) if n)

    def frequencies(self) -> dict[Strategy, float]:
        return {s: n / self.N for s, n in zip(ALL_STRATEGIES, self._counts) if n}

    def compact(self) -> str:
        """Stable text form, e.g. ``"RA:60;1A:30;R-:10"``."""
        return ";".join(
            f"{s.name}:{n}" for s, n in zip(ALL_STRATEGIES, self._counts) if n
        )

    @classmethod
    def parse(cls, text: str) -> "PopulationState":
        counts: dict[Strategy, int] = {}
        for part in text.split(";"):
            name, _, num = part.partition(":")
            counts[Strategy.parse(name.strip())] = int(num)
        return cls(counts)

    def __eq__(self, other):
        return isinstance(other, PopulationState) and self._counts == other._counts

    def __hash__(self):
        return hash(self._counts)

    def __repr__(self):
        return f"PopulationState({self.compact()!r})"


def redemption_possible(pop: PopulationState, focal: Strategy) -> bool:
    """Can a zero-reputation player of `focal` re-enter an arrangement?

    True when at least one unconditional committer other than the focal player
    itself is present: such a partner offers regardless of opinions, so a
    single cooperative act inside the resulting arrangement can be judged.
    """
    if pop.count(focal) < 1:
        raise ValueError(f"{focal} is not present in the population")
    committers = sum(
        pop.count(s) for s in ALL_STRATEGIES if s.alpha is CommitmentRule.ALWAYS
    )
    if focal.alpha is CommitmentRule.ALWAYS:
        committers -= 1
    return committers >= 1


def predict_reputation(strategy: Strategy, params: GameParams,
                       redemption: bool) -> ReputationPrediction:
    """Predicted long-run mean reputation of a strategy."""
    eps = params.epsilon
    if strategy.alpha is CommitmentRule.NEVER:
        return ReputationPrediction(PredictionKind.NONE, 1.0)
    faker = strategy.beta is CooperationRule.NEVER
    if redemption or params.regime is Regime.SHORT:
        if faker:
            return ReputationPrediction(PredictionKind.LOW, eps)
        return ReputationPrediction(PredictionKind.HIGH, 1.0 - eps)
    if params.regime is Regime.LONG:
        if faker:
            return ReputationPrediction(PredictionKind.ZERO, 0.0)
        return ReputationPrediction(PredictionKind.HIGH, 1.0 - eps)
    return ReputationPrediction(PredictionKind.ZERO, 0.0)


def predicted_reputations(pop: PopulationState,
                          params: GameParams) -> dict[Strategy, float]:
    """Regime-consistent reputation of every strategy present in `pop`."""
    return {
        s: predict_reputation(s, params, redemption_possible(pop, s)).value
        for s in pop.strategies()
    }


def absorption_probability(num_observers: int, epsilon: float) -> float:
    """Chance that no observer errs in one assessment wave.

    After a defection inside an arrangement this is the per-arrangement
    probability of dropping to reputation zero.
    """
    if num_observers < 1:
        raise ValueError("need at least one observer")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    return (1.0 - epsilon) ** num_observers


def commit_probability(strategy: Strategy, partner_reputation: float) -> float:
    """Probability of offering an arrangement to a partner of given repute."""
    if not 0.0 <= partner_reputation <= 1.0:
        raise ValueError(f"reputation must be in [0, 1], got {partner_reputation}")
    if strategy.alpha is CommitmentRule.ALWAYS:
        return 1.0
    if strategy.alpha is CommitmentRule.NEVER:
        return 0.0
    return partner_reputation


def _cooperation_probability(beta: CooperationRule, arrangement_prob: float) -> float:
    if beta is CooperationRule.ALWAYS:
        return 1.0
    if beta is CooperationRule.NEVER:
        return 0.0
    return arrangement_prob


def pairwise_payoff(i: Strategy, j: Strategy, r_i: float, r_j: float,
                    params: GameParams) -> float:
    """Expected payoff of an `i` player in one encounter with a `j` player.

    The arrangement forms with probability w_ij * w_ji (both offers), each
    side then pays the arrangement cost; i pays the cooperation cost with its
    own cooperation probability and earns b with j's.
    """
    w_ij = commit_probability(i, r_j)
    w_ji = commit_probability(j, r_i)
    a = w_ij * w_ji
    x_ij = _cooperation_probability(i.beta, a)
    x_ji = _cooperation_probability(j.beta, a)
    return -params.c_a * a - COOPERATION_COST * x_ij + params.b * x_ji


def payoff_matrix(strategies: Iterable[Strategy] | PopulationState,
                  reputations: Mapping[Strategy, float],
                  params: GameParams) -> np.ndarray:
    """Ordered pairwise payoffs over a strategy set (diagonal included)."""
    if isinstance(strategies, PopulationState):
        strategies = strategies.strategies()
    strategies = tuple(strategies)
    missing = [s.name for s in strategies if s not in reputations]
    if missing:
        raise ValueError(f"no reputation supplied for: {', '.join(missing)}")
    n = len(strategies)
    P = np.empty((n, n))
    for a, si in enumerate(strategies):
        for b, sj in enumerate(strategies):
            P[a, b] = pairwise_payoff(si, sj, reputations[si], reputations[sj], params)
    return P


def average_payoff(i: Strategy, pop: PopulationState, P: np.ndarray,
                   order: Sequence[Strategy] | None = None) -> float:
    """Population-average payoff of strategy `i`, self-interaction excluded.

    `P` must be a payoff matrix over `order` (defaults to the strategies
    present in `pop`, in canonical order).
    """
    if order is None:
        order = pop.strategies()
    order = tuple(order)
    if i not in order or pop.count(i) < 1:
        raise ValueError(f"{i} is not present in the population")
    row = order.index(i)
    total = 0.0
    for col, j in enumerate(order):
        n_j = pop.count(j) - (1 if j == i else 0)
        total += P[row, col] * n_j
    return total / (pop.N - 1)


def payoff_matrix_csv(strategies: Sequence[Strategy], P: np.ndarray) -> str:
    """Render a payoff matrix as CSV text with strategy-name headers."""
    lines = ["," + ",".join(s.name for s in strategies)]
    for s, row in zip(strategies, P):
        lines.append(s.name + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
