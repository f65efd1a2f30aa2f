"""Selection-mutation Monte Carlo over the nine-strategy space.

Each turn is one event: with probability mu a uniformly chosen player adopts a
uniformly chosen strategy (possibly its current one), otherwise a learner
imitates a model with the logistic probability 1/(1 + exp(-s * payoff gap)).
Payoffs are the analytic strategy averages recomputed from the current
composition, so no individual games are ever sampled; the cooperation
frequency is likewise the analytic expectation for the current composition.

The per-turn loop is JIT-compiled; `evolution_step` and `run_evolution` share
the same compiled helpers and consume four uniforms per turn in a fixed order,
which makes a stepped run and a batched run bit-identical for the same seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .payoffs import GameParams, PopulationState, Regime
from .strategies import ALL_STRATEGIES, CommitmentRule, CooperationRule, Strategy

_ALPHA = np.array(
    [{CommitmentRule.ALWAYS: 0, CommitmentRule.CONDITIONAL: 1,
      CommitmentRule.NEVER: 2}[s.alpha] for s in ALL_STRATEGIES],
    dtype=np.int64,
)
_BETA = np.array(
    [{CooperationRule.ALWAYS: 0, CooperationRule.IN_ARRANGEMENT: 1,
      CooperationRule.NEVER: 2}[s.beta] for s in ALL_STRATEGIES],
    dtype=np.int64,
)
_REGIME_CODE = {Regime.SHORT: 0, Regime.LONG: 1, Regime.INFINITE: 2}
_NUM = len(ALL_STRATEGIES)


@dataclass(frozen=True)
class EvolutionParams:
    N: int = 100
    turns: int = 100_000
    mu: float = 0.01
    s: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"population size must be >= 2, got {self.N}")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mutation probability must be in [0, 1], got {self.mu}")
        if self.s < 0:
            raise ValueError(f"imitation strength must be >= 0, got {self.s}")
        if self.turns < 0:
            raise ValueError(f"turns must be >= 0, got {self.turns}")


@numba.njit(cache=True)
def _reputations(counts, eps, regime, out):
    committers = counts[0] + counts[1] + counts[2]  # canonical order: 1* first
    for i in range(9):
        if _ALPHA[i] == 2:
            out[i] = 1.0
            continue
        others = committers
        if _ALPHA[i] == 0 and counts[i] >= 1:
            others -= 1
        redemption = others >= 1
        faker = _BETA[i] == 2
        if regime == 0 or redemption:
            out[i] = eps if faker else 1.0 - eps
        elif regime == 1:
            out[i] = 0.0 if faker else 1.0 - eps
        else:
            out[i] = 0.0


@numba.njit(cache=True)
def _tables(counts, b, ca, eps, regime, N, r, P, X, pi):
    """Refresh reputations, payoff matrix, strategy averages and cooperation."""
    _reputations(counts, eps, regime, r)
    for i in range(9):
        for j in range(9):
            wi = 1.0 if _ALPHA[i] == 0 else (r[j] if _ALPHA[i] == 1 else 0.0)
            wj = 1.0 if _ALPHA[j] == 0 else (r[i] if _ALPHA[j] == 1 else 0.0)
            a = wi * wj
            xi = 1.0 if _BETA[i] == 0 else (a if _BETA[i] == 1 else 0.0)
            xj = 1.0 if _BETA[j] == 0 else (a if _BETA[j] == 1 else 0.0)
            X[i, j] = xi
            P[i, j] = -ca * a - xi + b * xj
    coop = 0.0
    for i in range(9):
        pi[i] = 0.0
        if counts[i] == 0:
            continue
        pay = 0.0
        acts = 0.0
        for j in range(9):
            nj = counts[j] - (1 if j == i else 0)
            pay += P[i, j] * nj
            acts += X[i, j] * nj
        pi[i] = pay / (N - 1)
        coop += counts[i] * acts
    return coop / (N * (N - 1.0))


@numba.njit(cache=True)
def _apply_turn(counts, u0, u1, u2, u3, pi, mu, s, N):
    """One selection-mutation event on strategy counts; True if they changed."""
    if u0 < mu:
        pick = u1 * N
        acc = 0.0
        src = 8
        for i in range(9):
            acc += counts[i]
            if pick < acc:
                src = i
                break
        tgt = min(int(u2 * 9), 8)
        if tgt != src:
            counts[src] -= 1
            counts[tgt] += 1
            return True
        return False
    pick = u1 * N
    acc = 0.0
    learner = 8
    for i in range(9):
        acc += counts[i]
        if pick < acc:
            learner = i
            break
    pick = u2 * (N - 1)
    acc = 0.0
    model = 8
    for j in range(9):
        nj = counts[j] - (1 if j == learner else 0)
        acc += nj
        if pick < acc:
            model = j
            break
    if model == learner:
        return False
    p = 1.0 / (1.0 + np.exp(-s * (pi[model] - pi[learner])))
    if u3 < p:
        counts[learner] -= 1
        counts[model] += 1
        return True
    return False


@numba.njit(cache=True)
def _run_chunk(counts, u, offset, total_turns, mu, s, N, b, ca, eps, regime,
               coop_out, events, snap_stride, snaps, decile_sums, decile_len):
    r = np.empty(9)
    P = np.empty((9, 9))
    X = np.empty((9, 9))
    pi = np.empty(9)
    coop = _tables(counts, b, ca, eps, regime, N, r, P, X, pi)
    for t in range(u.shape[0]):
        g = offset + t  # global turn index, 0-based
        if u[t, 0] < mu:
            events[g] = 1
        else:
            events[g] = 0
        changed = _apply_turn(counts, u[t, 0], u[t, 1], u[t, 2], u[t, 3],
                              pi, mu, s, N)
        if changed:
            coop = _tables(counts, b, ca, eps, regime, N, r, P, X, pi)
        coop_out[g] = coop
        d = (g * 10) // total_turns
        decile_len[d] += 1
        for i in range(9):
            decile_sums[d, i] += counts[i]
        turn = g + 1
        if turn % snap_stride == 0 or turn == total_turns:
            row = (turn - 1) // snap_stride + 1
            if turn == total_turns and total_turns % snap_stride != 0:
                row = total_turns // snap_stride + 1
            for i in range(9):
                snaps[row, i] = counts[i]


@dataclass(eq=False)
class Trajectory:
    """Recorded history of one evolutionary run."""

    game: GameParams
    params: EvolutionParams
    snapshot_turns: np.ndarray      # includes turn 0 and the final turn
    snapshot_counts: np.ndarray     # (len(snapshot_turns), 9) int64
    cooperation: np.ndarray         # per-turn analytic cooperation frequency
    decile_mean_freq: np.ndarray    # (10, 9) time-averaged frequencies per decile
    events: np.ndarray | None = None  # per-turn 1=mutation 0=imitation, if recorded

    def mean_cooperation(self) -> float:
        if len(self.cooperation) == 0:
            return float(cooperation_frequency(self.initial_state(), self.game))
        return float(self.cooperation.mean())

    def initial_state(self) -> PopulationState:
        return PopulationState.from_array(self.snapshot_counts[0])

    def final_state(self) -> PopulationState:
        return PopulationState.from_array(self.snapshot_counts[-1])

    def states(self):
        for row in self.snapshot_counts:
            yield PopulationState.from_array(row)

    def final_decile_freq(self) -> dict[Strategy, float]:
        """Mean strategy frequencies over the last tenth of the turns."""
        return {s: float(f) for s, f in zip(ALL_STRATEGIES, self.decile_mean_freq[-1])}


def _counts_of(pop: PopulationState) -> np.ndarray:
    return pop.as_array()


def cooperation_frequency(pop: PopulationState, params: GameParams) -> float:
    """Expected fraction of cooperative acts per interaction, self-pairs excluded."""
    counts = _counts_of(pop)
    r = np.empty(9); P = np.empty((9, 9)); X = np.empty((9, 9)); pi = np.empty(9)
    return float(_tables(counts, params.b, params.c_a, params.epsilon,
                         _REGIME_CODE[params.regime], pop.N, r, P, X, pi))


def strategy_average_payoffs(pop: PopulationState,
                             params: GameParams) -> dict[Strategy, float]:
    """Analytic average payoff of every strategy present, per the engine's tables."""
    counts = _counts_of(pop)
    r = np.empty(9); P = np.empty((9, 9)); X = np.empty((9, 9)); pi = np.empty(9)
    _tables(counts, params.b, params.c_a, params.epsilon,
            _REGIME_CODE[params.regime], pop.N, r, P, X, pi)
    return {s: float(pi[i]) for i, s in enumerate(ALL_STRATEGIES) if counts[i]}


def fermi_adoption_probability(payoff_gap: float, s: float) -> float:
    """Probability the learner adopts, given model-minus-learner payoff gap."""
    return 1.0 / (1.0 + np.exp(-s * payoff_gap))


def evolution_step(pop: PopulationState, game: GameParams, evo: EvolutionParams,
                   rng: np.random.Generator) -> PopulationState:
    """One turn of the process; consumes exactly four uniforms from `rng`."""
    if pop.N != evo.N:
        raise ValueError(f"population size {pop.N} does not match params N={evo.N}")
    u = rng.random(4)
    counts = _counts_of(pop)
    r = np.empty(9); P = np.empty((9, 9)); X = np.empty((9, 9)); pi = np.empty(9)
    _tables(counts, game.b, game.c_a, game.epsilon,
            _REGIME_CODE[game.regime], evo.N, r, P, X, pi)
    changed = _apply_turn(counts, u[0], u[1], u[2], u[3], pi, evo.mu, evo.s, evo.N)
    return PopulationState.from_array(counts) if changed else pop


def initial_population(evo: EvolutionParams) -> PopulationState:
    """The hardest starting point: everyone refuses and defects (all 0-)."""
    return PopulationState({Strategy.parse("0-"): evo.N})


_CHUNK_TURNS = 250_000


def run_evolution(game: GameParams, evo: EvolutionParams,
                  snapshot_stride: int = 100,
                  record_events: bool = False) -> Trajectory:
    """Run the full process from the all-defector start; deterministic per seed."""
    if snapshot_stride < 1:
        raise ValueError("snapshot stride must be >= 1")
    turns = evo.turns
    counts = _counts_of(initial_population(evo))
    n_snaps = 1 + (turns // snapshot_stride) + (1 if turns % snapshot_stride else 0)
    snaps = np.zeros((n_snaps, 9), dtype=np.int64)
    snaps[0] = counts
    snap_turns = np.arange(0, n_snaps) * snapshot_stride
    if turns % snapshot_stride:
        snap_turns[-1] = turns
    coop = np.empty(turns, dtype=np.float64)
    events = np.zeros(turns, dtype=np.uint8)
    decile_sums = np.zeros((10, 9), dtype=np.float64)
    decile_len = np.zeros(10, dtype=np.int64)
    rng = np.random.default_rng(evo.seed)
    regime = _REGIME_CODE[game.regime]
    done = 0
    while done < turns:
        block = min(_CHUNK_TURNS, turns - done)
        u = rng.random((block, 4))
        _run_chunk(counts, u, done, turns, evo.mu, evo.s, evo.N,
                   game.b, game.c_a, game.epsilon, regime,
                   coop, events, snapshot_stride, snaps, decile_sums, decile_len)
        done += block
    with np.errstate(invalid="ignore"):
        decile_freq = np.where(
            decile_len[:, None] > 0,
            decile_sums / np.maximum(decile_len[:, None], 1) / evo.N,
            0.0,
        )
    return Trajectory(
        game=game,
        params=evo,
        snapshot_turns=snap_turns,
        snapshot_counts=snaps,
        cooperation=coop,
        decile_mean_freq=decile_freq,
        events=events if record_events else None,
    )


@dataclass
class SweepPoint:
    b: float
    c_a: float
    mean_cooperation: float
    seeds: tuple[int, ...]
    seconds: float


@dataclass(eq=False)
class SweepResult:
    bs: tuple[float, ...]
    cas: tuple[float, ...]
    mean_cooperation: np.ndarray    # (len(bs), len(cas))
    replicates: int
    seed_base: int
    points: list[SweepPoint] = field(default_factory=list)


def _sweep_task(args):
    b, ca, epsilon, regime_value, evo_dict, seed = args
    game = GameParams(b=b, c_a=ca, epsilon=epsilon, regime=Regime(regime_value))
    evo = EvolutionParams(**{**evo_dict, "seed": seed})
    t0 = time.perf_counter()
    traj = run_evolution(game, evo, snapshot_stride=max(1, evo.turns or 1))
    return traj.mean_cooperation(), time.perf_counter() - t0


def sweep(bs: Sequence[float], cas: Sequence[float], game_template: GameParams,
          evo: EvolutionParams, replicates: int, seed_base: int | None = None,
          workers: int = 1) -> SweepResult:
    """Mean cooperation over a b x c_a grid, averaged over all turns and replicates.

    Every grid point runs replicates with seeds ``seed_base + replicate_index``;
    aggregation order is fixed, so results do not depend on scheduling.
    """
    if replicates < 1:
        raise ValueError("need at least one replicate")
    if not bs or not cas:
        raise ValueError("grid must be non-empty")
    if seed_base is None:
        seed_base = evo.seed
    evo_dict = dict(N=evo.N, turns=evo.turns, mu=evo.mu, s=evo.s)
    tasks = []
    for b in bs:
        for ca in cas:
            for rep in range(replicates):
                tasks.append((b, ca, game_template.epsilon,
                              game_template.regime.value, evo_dict,
                              seed_base + rep))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_sweep_task, tasks, chunksize=4))
    else:
        outcomes = [_sweep_task(t) for t in tasks]
    grid = np.empty((len(bs), len(cas)))
    points = []
    idx = 0
    for bi, b in enumerate(bs):
        for ci, ca in enumerate(cas):
            vals = [outcomes[idx + rep][0] for rep in range(replicates)]
            secs = sum(outcomes[idx + rep][1] for rep in range(replicates))
            seeds = tuple(t[5] for t in tasks[idx:idx + replicates])
            grid[bi, ci] = float(np.mean(vals))
            points.append(SweepPoint(b, ca, grid[bi, ci], seeds, secs))
            idx += replicates
    return SweepResult(tuple(bs), tuple(cas), grid, replicates, seed_base, points)
