"""Strategies, norms, opinions, and the three per-round decision functions.

A strategy combines a commitment rule (offer an arrangement: always / only to
partners held in good opinion / never) with a cooperation rule (cooperate:
always / only inside an arrangement / never).  The canonical two-character
names pair the commitment character ``1``/``R``/``0`` with the cooperation
character ``+``/``A``/``-``, e.g. ``"RA"`` or ``"0-"``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class CommitmentRule(enum.Enum):
    """Offer policy for joint arrangements."""

    ALWAYS = "1"
    CONDITIONAL = "R"   # offer only when the partner is held in good opinion
    NEVER = "0"


class CooperationRule(enum.Enum):
    """Action policy in the game itself."""

    ALWAYS = "+"
    IN_ARRANGEMENT = "A"
    NEVER = "-"


class Opinion(enum.Enum):
    GOOD = 1
    BAD = 0


@dataclass(frozen=True)
class Strategy:
    alpha: CommitmentRule
    beta: CooperationRule

    @property
    def name(self) -> str:
        return self.alpha.value + self.beta.value

    @classmethod
    def parse(cls, name: str) -> "Strategy":
        """Parse a two-character strategy name like ``"RA"`` or ``"0-"``."""
        if len(name) != 2:
            raise ValueError(f"not a strategy name: {name!r}")
        try:
            return cls(CommitmentRule(name[0]), CooperationRule(name[1]))
        except ValueError:
            raise ValueError(f"not a strategy name: {name!r}") from None

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Strategy({self.name!r})"


# Canonical order used for arrays, CSV columns and payoff-matrix axes.
ALL_STRATEGIES = tuple(
    Strategy(a, b) for a in CommitmentRule for b in CooperationRule
)
STRATEGY_INDEX = {s: i for i, s in enumerate(ALL_STRATEGIES)}
STRATEGY_NAMES = tuple(s.name for s in ALL_STRATEGIES)


def is_faker(s: Strategy) -> bool:
    """Enters arrangements but defects in them (R- and 1-)."""
    return s.beta is CooperationRule.NEVER and s.alpha is not CommitmentRule.NEVER


def is_mean(s: Strategy) -> bool:
    """Never cooperates in practice: 0-, 0A, R-, 1-.

    0A conditions cooperation on arrangements it never enters, so it behaves
    like an unconditional defector.
    """
    if s.beta is CooperationRule.NEVER:
        return True
    return s.beta is CooperationRule.IN_ARRANGEMENT and s.alpha is CommitmentRule.NEVER


def is_nice(s: Strategy) -> bool:
    """Cooperative strategies other than RA: 1A, 1+, R+ and 0+."""
    return not is_mean(s) and s.name != "RA"


@dataclass(frozen=True)
class Norm:
    """Four assessment rules, one per (arrangement present?, cooperated?) context.

    ``rules`` is ordered (both, arrangement-only, cooperation-only, neither):
    index 0 -> a=1,c=1; 1 -> a=1,c=0; 2 -> a=0,c=1; 3 -> a=0,c=0.  Each rule is
    +1 (approve), -1 (disapprove) or 0 (neutral).
    """

    rules: tuple[int, int, int, int]

    def __post_init__(self):
        if len(self.rules) != 4 or any(r not in (-1, 0, 1) for r in self.rules):
            raise ValueError(f"norm rules must be four of -1/0/+1, got {self.rules!r}")

    def rule(self, arrangement: int, cooperated: int) -> int:
        return self.rules[(1 - int(bool(arrangement))) * 2 + (1 - int(bool(cooperated)))]

    def judges_outside_arrangements(self) -> bool:
        return self.rules[2] != 0 or self.rules[3] != 0


#: Approves cooperation and disapproves defection inside arrangements; is
#: indifferent to anything that happens without one.
DEFAULT_NORM = Norm((1, -1, 0, 0))


def commit_offer(strategy: Strategy, opinion_of_partner: Opinion) -> bool:
    """Whether this player offers to enter an arrangement with its partner."""
    if strategy.alpha is CommitmentRule.ALWAYS:
        return True
    if strategy.alpha is CommitmentRule.NEVER:
        return False
    return opinion_of_partner is Opinion.GOOD


def form_arrangement(offer_x: bool, offer_y: bool) -> bool:
    """An arrangement exists only when both partners offered."""
    return offer_x and offer_y


def choose_action(strategy: Strategy, arrangement: bool) -> bool:
    """Whether this player cooperates, given the arrangement state."""
    if strategy.beta is CooperationRule.ALWAYS:
        return True
    if strategy.beta is CooperationRule.NEVER:
        return False
    return arrangement


def assess(norm: Norm, arrangement: bool, perceived_cooperation: bool,
           current: Opinion) -> Opinion:
    """Updated opinion about an assessed player.

    An approving rule turns a bad opinion good, a disapproving rule turns a
    good opinion bad, a neutral rule leaves it untouched; the same rule applied
    twice therefore changes nothing further.
    """
    r = norm.rule(int(arrangement), int(perceived_cooperation))
    if r == 1:
        return Opinion.GOOD
    if r == -1:
        return Opinion.BAD
    return current
