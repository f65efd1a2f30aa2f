"""Agent-based opinion dynamics over an image matrix.

Only players whose commitment rule conditions on reputation observe anything:
their matrix rows hold private opinions of everyone (including themselves) and
are the only rows that ever change.  A player's reputation is the mean opinion
held by those observers.  Each round two random players decide on an
arrangement using their own opinion rows, act, and are then assessed by every
observer, who independently misreads the cooperation bit with probability
epsilon; arrangement presence is seen without error.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .payoffs import GameParams, PopulationState, redemption_possible
from .strategies import CommitmentRule, CooperationRule, Norm, Strategy

log = logging.getLogger(__name__)


class ImageMatrix:
    """N x N binary opinion store; row = holder, column = assessed player."""

    def __init__(self, strategies: list[Strategy]):
        self.strategies = list(strategies)
        n = len(self.strategies)
        if n < 2:
            raise ValueError("need at least two players")
        self.opinions = np.ones((n, n), dtype=np.uint8)  # start all good
        self.observers = np.flatnonzero(
            np.array([s.alpha is CommitmentRule.CONDITIONAL for s in self.strategies])
        )
        # observers laid out contiguously (the usual case) allow cheap slicing
        if len(self.observers) and np.all(np.diff(self.observers) == 1):
            self._obs_index = slice(int(self.observers[0]), int(self.observers[-1]) + 1)
        else:
            self._obs_index = self.observers

    @property
    def n_players(self) -> int:
        return len(self.strategies)

    def reputation(self, player: int) -> float | None:
        """Mean observer opinion of one player; None without observers."""
        if len(self.observers) == 0:
            return None
        return float(self.opinions[self.observers, player].mean())


@dataclass(frozen=True)
class RoundRecord:
    x: int
    y: int
    offers: tuple[bool, bool]
    arrangement: bool
    actions: tuple[bool, bool]


def _materialize(composition: PopulationState) -> list[Strategy]:
    players: list[Strategy] = []
    for s in composition.strategies():
        players.extend([s] * composition.count(s))
    return players


# opinion written per (arrangement, perceived) context: 1 -> good, 0 -> bad,
# 255 -> keep the current opinion
_KEEP = 255
_NORM_CODES: dict[tuple[int, int, int, int], np.ndarray] = {}


def _norm_codes(norm: Norm) -> np.ndarray:
    codes = _NORM_CODES.get(norm.rules)
    if codes is None:
        codes = np.empty((2, 2), dtype=np.uint8)
        for a in (0, 1):
            for c in (0, 1):
                r = norm.rule(a, c)
                codes[a, c] = 1 if r == 1 else (0 if r == -1 else _KEEP)
        _NORM_CODES[norm.rules] = codes
    return codes


def play_round(matrix: ImageMatrix, norm: Norm, epsilon: float,
               rng: np.random.Generator) -> RoundRecord:
    """One commitment-action-assessment round, mutating observer rows in place."""
    n = matrix.n_players
    ops = matrix.opinions
    strats = matrix.strategies
    x = int(rng.integers(n))
    y = int(rng.integers(n - 1))
    if y >= x:
        y += 1

    offers = []
    for me, partner in ((x, y), (y, x)):
        alpha = strats[me].alpha
        if alpha is CommitmentRule.ALWAYS:
            offers.append(True)
        elif alpha is CommitmentRule.NEVER:
            offers.append(False)
        else:
            offers.append(bool(ops[me, partner]))
    a = offers[0] and offers[1]

    actions = []
    for p in (x, y):
        beta = strats[p].beta
        if beta is CooperationRule.ALWAYS:
            actions.append(True)
        elif beta is CooperationRule.NEVER:
            actions.append(False)
        else:
            actions.append(a)

    n_obs = len(matrix.observers)
    codes = _norm_codes(norm)[int(a)]
    if n_obs and (codes[0] != _KEEP or codes[1] != _KEEP):
        oix = matrix._obs_index
        draws = rng.random(2 * n_obs)  # same stream as two per-player draws
        for slot, (player, acted) in enumerate(zip((x, y), actions)):
            errs = draws[slot * n_obs:(slot + 1) * n_obs] < epsilon
            perceived = (errs ^ acted).view(np.int8)
            written = codes[perceived]
            col = ops[oix, player]
            ops[oix, player] = np.where(written == _KEEP, col, written)
    return RoundRecord(x=x, y=y, offers=(offers[0], offers[1]),
                       arrangement=a, actions=(actions[0], actions[1]))


@dataclass
class ReputationReport:
    """Per-strategy mean reputations over the sampled rounds of one run.

    `means` is empty when the composition has no observers (reputation is not
    meaningful then).  `redemption` is the composition-level flag: every
    present strategy could redeem a zero-reputation player; the per-strategy
    split used in analyses comes from redemption_possible directly.
    """

    composition: PopulationState
    means: dict[Strategy, float]
    num_observers: int
    redemption: bool
    rounds: int
    seed: int


def composition_redemption(composition: PopulationState) -> bool:
    return all(
        redemption_possible(composition, s) for s in composition.strategies()
    )


def simulate_reputations(composition: PopulationState, params: GameParams,
                         norm: Norm, rounds: int, seed: int) -> ReputationReport:
    """Run `rounds` rounds and average reputations over the last half.

    Reputations are sampled once per round after assessment; per-strategy
    values average over time and over same-strategy players.  Deterministic
    for a given seed.  Without observers no opinion can ever change, so the
    rounds are skipped and the report carries no means.
    """
    if rounds < 2 or rounds % 2:
        raise ValueError(f"rounds must be a positive even number, got {rounds}")
    players = _materialize(composition)
    matrix = ImageMatrix(players)
    obs = matrix.observers
    n_obs = len(obs)
    redemption = composition_redemption(composition)
    if n_obs == 0:
        return ReputationReport(composition, {}, 0, redemption, rounds, seed)
    rng = np.random.default_rng(seed)
    half = rounds // 2
    oix = matrix._obs_index
    col_sum = matrix.opinions[oix, :].sum(axis=0).astype(np.int64)
    acc = np.zeros(matrix.n_players)
    eps = params.epsilon
    for t in range(rounds):
        rec = play_round(matrix, norm, eps, rng)
        col_sum[rec.x] = matrix.opinions[oix, rec.x].sum()
        col_sum[rec.y] = matrix.opinions[oix, rec.y].sum()
        if t >= half:
            acc += col_sum
    acc /= (rounds - half) * n_obs
    means: dict[Strategy, float] = {}
    start = 0
    for s in composition.strategies():
        cnt = composition.count(s)
        means[s] = float(acc[start:start + cnt].mean())
        start += cnt
    return ReputationReport(composition, means, n_obs, redemption, rounds, seed)


def sample_compositions(trajectories, count: int, rng: np.random.Generator,
                        min_turn: int = 0) -> list[PopulationState]:
    """Uniform time-step samples of compositions from stored evolution runs.

    `min_turn` drops snapshots from before that turn (useful to sample a
    scenario's characteristic mixtures rather than its start-up transient).
    No other filtering happens here; excluding observer-free compositions is
    an analysis-time decision.  If `count` exceeds the stored steps the sample
    is drawn with replacement and a warning is logged.
    """
    pool: list[np.ndarray] = []
    for traj in trajectories:
        for turn, counts in zip(traj.snapshot_turns, traj.snapshot_counts):
            if turn >= min_turn:
                pool.append(counts)
    if not pool:
        raise ValueError("no stored compositions to sample from")
    replace = count > len(pool)
    if replace:
        log.warning(
            "sampling %d compositions from only %d stored steps: "
            "drawing with replacement", count, len(pool),
        )
    idx = rng.choice(len(pool), size=count, replace=replace)
    return [PopulationState.from_array(pool[i]) for i in idx]
