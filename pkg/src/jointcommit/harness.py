"""Experiment configuration, execution and persistence.

An experiment is a flat key set (see ExperimentConfig) resolved from defaults,
an optional YAML config file, and CLI overrides.  run_config executes it,
writes versioned CSVs plus a JSON manifest holding the fully resolved config
and per-run seeds; re-running from the manifest reproduces the CSVs byte for
byte.  The seed discipline is fixed: within every parameter combination,
replicate r runs with seed ``seed + r`` (independent reputation simulations
use ``seed + 20000 + index``).
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .csvio import write_csv
from .evolution import (
    EvolutionParams,
    cooperation_frequency,
    run_evolution,
    sweep,
)
from .fixation import fixation_table, format_table_text
from .payoffs import GameParams, PopulationState, Regime, redemption_possible
from .reputation import sample_compositions, simulate_reputations
from .strategies import (
    ALL_STRATEGIES,
    DEFAULT_NORM,
    CommitmentRule,
    CooperationRule,
    Strategy,
)

log = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "JOINTCOMMIT_OUT"

KINDS = ("evolve", "sweep", "fixation", "reputation-validate", "compositions-sample")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


def _default_out() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, "results")


@dataclass
class ExperimentConfig:
    kind: str
    b: list[float] = field(default_factory=lambda: [5.5])
    c_a: list[float] = field(default_factory=lambda: [1.0])
    epsilon: list[float] = field(default_factory=lambda: [0.01])
    regime: list[str] = field(default_factory=lambda: ["long"])
    N: int = 100
    turns: int = 100_000
    mu: float = 0.01
    s: float = 1.0
    replicates: int = 1
    seed: int = 0
    out: str = field(default_factory=_default_out)
    rounds: int = 1_000_000          # reputation-simulation rounds
    count: int = 20                  # compositions to sample (with redemption)
    count_no_redemption: int = 5     # compositions to sample without redemption
    stratify_redemption: bool = True  # False: sample `count` compositions with
                                      # no filter beyond min_observers
    min_observers: int = 3
    skip_turns: int = 0              # ignore snapshots before this turn when sampling
    snapshot_stride: int = 100
    workers: int = 1
    label: str = ""                  # optional output-file prefix

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError("kind", f"must be one of {KINDS}, got {self.kind!r}")
        for name in ("b", "c_a", "epsilon", "regime"):
            vals = getattr(self, name)
            if not isinstance(vals, list) or not vals:
                raise ConfigError(name, "must be a non-empty list")
        for r in self.regime:
            try:
                Regime.parse(r)
            except ValueError as e:
                raise ConfigError("regime", str(e)) from None
        for name, lo in (("N", 2), ("replicates", 1), ("snapshot_stride", 1),
                         ("workers", 1), ("count", 0), ("count_no_redemption", 0),
                         ("min_observers", 0), ("turns", 0), ("skip_turns", 0)):
            if getattr(self, name) < lo:
                raise ConfigError(name, f"must be >= {lo}")
        if self.kind in ("reputation-validate", "compositions-sample"):
            sampled = (self.count + self.count_no_redemption
                       if self.stratify_redemption else self.count)
            if sampled < 1:
                raise ConfigError("count", "nothing to sample")
        if self.rounds < 2 or self.rounds % 2:
            raise ConfigError("rounds", "must be a positive even number")
        if not 0.0 <= self.mu <= 1.0:
            raise ConfigError("mu", "must be in [0, 1]")
        if self.s < 0:
            raise ConfigError("s", "must be >= 0")
        for e in self.epsilon:
            if not 0.0 <= e <= 1.0:
                raise ConfigError("epsilon", "values must be in [0, 1]")
        if self.kind == "sweep" and (len(self.epsilon) != 1 or len(self.regime) != 1):
            raise ConfigError("epsilon", "sweep takes exactly one epsilon and one regime")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown config key")
        if "kind" not in data:
            raise ConfigError("kind", "is required")
        cfg = cls(**data)
        for name in ("b", "c_a", "epsilon"):
            setattr(cfg, name, [float(v) for v in getattr(cfg, name)])
        cfg.regime = [str(r) for r in cfg.regime]
        return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    """Load a YAML config file, or the config embedded in a JSON manifest."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        data = json.loads(text)
        if "manifest_version" in data:
            data = data["config"]
    else:
        data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ConfigError("file", f"{path} does not hold a mapping")
    return ExperimentConfig.from_dict(data)


@dataclass
class RunResult:
    outputs: list[Path]
    manifest: Path
    seeds: list[int]


def _game(cfg: ExperimentConfig, b: float, ca: float, eps: float,
          regime: str) -> GameParams:
    return GameParams(b=b, c_a=ca, epsilon=eps, regime=Regime.parse(regime))


def _evo(cfg: ExperimentConfig, seed: int) -> EvolutionParams:
    return EvolutionParams(N=cfg.N, turns=cfg.turns, mu=cfg.mu, s=cfg.s, seed=seed)


_TRAJ_COLUMNS = (["b", "c_a", "epsilon", "regime", "seed", "turn"]
                 + [f"n_{s.name}" for s in ALL_STRATEGIES] + ["cooperation"])


def _initial_coop(traj) -> float:
    return cooperation_frequency(traj.initial_state(), traj.game)


def _trajectory_rows(game: GameParams, traj, seed: int):
    for t, row in zip(traj.snapshot_turns, traj.snapshot_counts):
        coop = traj.cooperation[t - 1] if t > 0 else _initial_coop(traj)
        yield ([game.b, game.c_a, game.epsilon, game.regime.value, seed, int(t)]
               + [int(n) for n in row] + [float(coop)])


def _run_evolve(cfg: ExperimentConfig, out: Path):
    rows = []
    seeds = []
    for b in cfg.b:
        for ca in cfg.c_a:
            for eps in cfg.epsilon:
                for regime in cfg.regime:
                    game = _game(cfg, b, ca, eps, regime)
                    for rep in range(cfg.replicates):
                        seed = cfg.seed + rep
                        seeds.append(seed)
                        traj = run_evolution(game, _evo(cfg, seed),
                                             snapshot_stride=cfg.snapshot_stride)
                        rows.extend(_trajectory_rows(game, traj, seed))
    path = write_csv(out / f"{cfg.label or 'evolve'}.csv", "trajectory",
                     _TRAJ_COLUMNS, rows)
    return [path], seeds


def _run_sweep(cfg: ExperimentConfig, out: Path):
    game = _game(cfg, cfg.b[0], cfg.c_a[0], cfg.epsilon[0], cfg.regime[0])
    evo = _evo(cfg, cfg.seed)
    result = sweep(cfg.b, cfg.c_a, game, evo, cfg.replicates,
                   seed_base=cfg.seed, workers=cfg.workers)
    rows = [
        (p.b, p.c_a, p.mean_cooperation, cfg.replicates, cfg.seed)
        for p in result.points
    ]
    for p in result.points:
        log.info("sweep point b=%g c_a=%g: coop=%.4f (%.1fs over %d runs)",
                 p.b, p.c_a, p.mean_cooperation, p.seconds, cfg.replicates)
    path = write_csv(out / f"{cfg.label or 'sweep'}.csv", "sweep",
                     ["b", "c_a", "mean_cooperation", "replicates", "seed_base"],
                     rows)
    return [path], [s for p in result.points for s in p.seeds]


def _run_fixation(cfg: ExperimentConfig, out: Path):
    rows = []
    texts = []
    for b in cfg.b:
        game = _game(cfg, b, cfg.c_a[0], cfg.epsilon[0], cfg.regime[0])
        table = fixation_table(game, N=cfg.N, s=cfg.s)
        for (inv, res), r in sorted(table.items(),
                                    key=lambda kv: (kv[0][0].name, kv[0][1].name)):
            rows.append((inv.name, res.name, r.rho, r.drift_multiple,
                         b, cfg.c_a[0], cfg.epsilon[0], cfg.regime[0],
                         cfg.N, cfg.s))
        texts.append((b, format_table_text(table)))
    stem = cfg.label or "fixation"
    path = write_csv(out / f"{stem}.csv", "fixation",
                     ["invader", "resident", "rho", "drift_multiple",
                      "b", "c_a", "epsilon", "regime", "N", "s"],
                     rows)
    outputs = [path]
    for b, text in texts:
        tpath = out / f"{stem}_b{b:g}.txt"
        tpath.write_text(text)
        outputs.append(tpath)
    return outputs, []


def _judged(s: Strategy) -> bool:
    return s.alpha is not CommitmentRule.NEVER


def _all_judged_can_redeem(pop: PopulationState) -> bool:
    return all(redemption_possible(pop, s) for s in pop.strategies() if _judged(s))


def _has_faker_no_redemption(pop: PopulationState) -> bool:
    fakers = [s for s in pop.strategies()
              if _judged(s) and s.beta is CooperationRule.NEVER]
    if not fakers:
        return False
    return all(not redemption_possible(pop, s) for s in fakers)


def _num_observers(pop: PopulationState) -> int:
    return sum(pop.count(s) for s in pop.strategies()
               if s.alpha is CommitmentRule.CONDITIONAL)


def _rep_task(args):
    comp_text, b, ca, eps, regime_value, rounds, seed = args
    comp = PopulationState.parse(comp_text)
    game = GameParams(b=b, c_a=ca, epsilon=eps, regime=Regime(regime_value))
    return simulate_reputations(comp, game, DEFAULT_NORM, rounds, seed)


def _sample_filtered(traces, rng, want: int, predicate, description: str,
                     min_turn: int = 0):
    picked = []
    seen = set()
    for _ in range(60):
        if len(picked) >= want:
            break
        grew = False
        for comp in sample_compositions(traces, max(4 * want, 32), rng,
                                        min_turn=min_turn):
            key = comp.compact()
            if key in seen:
                continue
            seen.add(key)
            grew = True
            if predicate(comp):
                picked.append(comp)
                if len(picked) >= want:
                    break
        if not grew:  # the candidate pool is exhausted
            break
    if len(picked) < want:
        raise RuntimeError(
            f"could not find {want} compositions with {description} "
            f"in the generated traces (found {len(picked)})"
        )
    return picked


def _generate_traces(cfg: ExperimentConfig):
    """Evolution traces the reputation experiments sample compositions from."""
    traces = []
    seeds = []
    for b in cfg.b:
        game = _game(cfg, b, cfg.c_a[0], cfg.epsilon[0], cfg.regime[0])
        for rep in range(cfg.replicates):
            seed = cfg.seed + rep
            seeds.append(seed)
            traces.append(run_evolution(game, _evo(cfg, seed),
                                        snapshot_stride=cfg.snapshot_stride))
    return traces, seeds


def _run_reputation_validate(cfg: ExperimentConfig, out: Path):
    eps = cfg.epsilon[0]
    regime = cfg.regime[0]
    traces, trace_seeds = _generate_traces(cfg)
    rng = np.random.default_rng(cfg.seed + 10_000)

    def with_redemption(pop):
        return (_num_observers(pop) >= cfg.min_observers
                and _all_judged_can_redeem(pop)
                and any(_judged(s) for s in pop.strategies()))

    def without_redemption(pop):
        # a non-faker observer strategy must be around: when every observer is
        # a faker, mutual souring halts all arrangements and opinions freeze at
        # arbitrary lattice values instead of absorbing
        live_observer = any(
            s.alpha is CommitmentRule.CONDITIONAL
            and s.beta is not CooperationRule.NEVER
            for s in pop.strategies()
        )
        return (_num_observers(pop) >= cfg.min_observers
                and live_observer
                and _has_faker_no_redemption(pop))

    observerless = set()

    def track_observerless(pop):
        if _num_observers(pop) == 0:
            observerless.add(pop.compact())

    comps = []
    if not cfg.stratify_redemption:
        comps = _sample_filtered(
            traces, rng, cfg.count,
            lambda pop: (track_observerless(pop),
                         _num_observers(pop) >= cfg.min_observers)[1],
            f">= {cfg.min_observers} observers", min_turn=cfg.skip_turns)
    else:
        if cfg.count:
            comps += _sample_filtered(
                traces, rng, cfg.count,
                lambda pop: (track_observerless(pop), with_redemption(pop))[1],
                f">= {cfg.min_observers} observers and redemption",
                min_turn=cfg.skip_turns)
        if cfg.count_no_redemption:
            comps += _sample_filtered(
                traces, rng, cfg.count_no_redemption,
                lambda pop: (track_observerless(pop), without_redemption(pop))[1],
                f">= {cfg.min_observers} observers, fakers, no redemption",
                min_turn=cfg.skip_turns)
    if observerless:
        log.info("excluded %d observer-free compositions during sampling "
                 "(reputation is undefined there)", len(observerless))

    tasks = [
        (comp.compact(), cfg.b[0], cfg.c_a[0], eps, regime, cfg.rounds,
         cfg.seed + 20_000 + i)
        for i, comp in enumerate(comps)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(_rep_task, tasks, chunksize=1))
    else:
        reports = [_rep_task(t) for t in tasks]

    rows = []
    for i, report in enumerate(reports):
        comp = report.composition
        for s in comp.strategies():
            rows.append((f"s{i:04d}", comp.compact(), s.name,
                         report.means.get(s, float("nan")),
                         report.num_observers,
                         redemption_possible(comp, s),
                         report.seed))
    path = write_csv(out / f"{cfg.label or 'reputation'}.csv", "reputation",
                     ["scenario_id", "composition", "strategy", "mean_reputation",
                      "num_observers", "redemption", "seed"],
                     rows)
    return [path], trace_seeds + [t[6] for t in tasks]


def _run_compositions_sample(cfg: ExperimentConfig, out: Path):
    traces, trace_seeds = _generate_traces(cfg)
    rng = np.random.default_rng(cfg.seed + 10_000)
    comps = sample_compositions(traces, cfg.count, rng, min_turn=cfg.skip_turns)
    rows = [
        (f"s{i:04d}", comp.compact(), _num_observers(comp),
         _all_judged_can_redeem(comp))
        for i, comp in enumerate(comps)
    ]
    path = write_csv(out / f"{cfg.label or 'compositions'}.csv", "compositions",
                     ["scenario_id", "composition", "num_observers", "redemption"],
                     rows)
    return [path], trace_seeds


_RUNNERS = {
    "evolve": _run_evolve,
    "sweep": _run_sweep,
    "fixation": _run_fixation,
    "reputation-validate": _run_reputation_validate,
    "compositions-sample": _run_compositions_sample,
}


def run_config(cfg: ExperimentConfig) -> RunResult:
    """Execute one experiment; returns output paths and the manifest path."""
    cfg.validate()
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e
    t0 = time.perf_counter()
    outputs, seeds = _RUNNERS[cfg.kind](cfg, out)
    manifest = {
        "manifest_version": 1,
        "tool": "jointcommit",
        "tool_version": __version__,
        "config": cfg.to_dict(),
        "seeds": [int(s) for s in seeds],
        "outputs": [p.name for p in outputs],
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    mpath = out / f"{cfg.label or cfg.kind}_manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2) + "\n")
    return RunResult(outputs=outputs, manifest=mpath, seeds=[int(s) for s in seeds])


# -- figure reproduction ------------------------------------------------------

FIGURE_BENEFITS = (1.5, 5.5, 9.5)

TIMESERIES_COLUMNS = (["b", "c_a", "epsilon", "regime", "turn"]
                      + [f"f_{s.name}" for s in ALL_STRATEGIES]
                      + ["cooperation", "runs"])


def averaged_timeseries_rows(game: GameParams, evo_template: EvolutionParams,
                             runs: int, snapshot_stride: int = 1000):
    """Strategy frequencies and cooperation over time, averaged across runs.

    Runs use seeds ``evo_template.seed + replicate_index``.
    """
    freq_sum = None
    coop_sum = None
    turns_axis = None
    for rep in range(runs):
        evo = EvolutionParams(N=evo_template.N, turns=evo_template.turns,
                              mu=evo_template.mu, s=evo_template.s,
                              seed=evo_template.seed + rep)
        traj = run_evolution(game, evo, snapshot_stride=snapshot_stride)
        f = traj.snapshot_counts.astype(float) / evo.N
        c = np.array([
            traj.cooperation[t - 1] if t > 0 else _initial_coop(traj)
            for t in traj.snapshot_turns
        ])
        freq_sum = f if freq_sum is None else freq_sum + f
        coop_sum = c if coop_sum is None else coop_sum + c
        turns_axis = traj.snapshot_turns
    rows = []
    for ti, t in enumerate(turns_axis):
        rows.append([game.b, game.c_a, game.epsilon, game.regime.value, int(t)]
                    + [float(v) for v in freq_sum[ti] / runs]
                    + [float(coop_sum[ti] / runs), runs])
    return rows


def reproduce_figures(out: str | Path, full_scale: bool = False,
                      workers: int = 1, seed: int = 0,
                      sweep_replicates: int | None = None,
                      runs_3a: int | None = None,
                      fig4_count: int | None = None,
                      fig4_rounds: int | None = None) -> dict[str, RunResult]:
    """Desk-scale versions of the standard figure set, one CSV per figure.

    Desk scale shrinks grid density and replicate counts only; population
    size, turns per run and the model itself stay untouched.  `full_scale`
    restores the full replicate counts (roughly an overnight run); the
    keyword overrides shrink individual figures further, e.g. for smoke tests.
    """
    out = Path(out)
    results = {}

    grid_b = [1.5, 3.5, 5.5, 7.5, 9.5] if not full_scale else \
        [1.5 + i for i in range(9)]
    grid_ca = [0.25, 0.625, 1.0, 1.375, 1.75] if not full_scale else \
        [0.25 + 0.25 * i for i in range(7)]
    results["fig2"] = run_config(ExperimentConfig(
        kind="sweep", b=grid_b, c_a=grid_ca,
        replicates=sweep_replicates or (100 if full_scale else 20),
        seed=seed, out=str(out), workers=workers, label="fig2"))

    runs_3a = runs_3a or (1000 if full_scale else 100)
    rows = []
    for b in FIGURE_BENEFITS:
        game = GameParams(b=b, c_a=1.0, epsilon=0.01, regime=Regime.LONG)
        rows.extend(averaged_timeseries_rows(game, EvolutionParams(seed=seed),
                                             runs_3a))
    fig3a = write_csv(out / "fig3a.csv", "timeseries", TIMESERIES_COLUMNS, rows)
    manifest = fig3a.with_name("fig3a_manifest.json")
    manifest.write_text(json.dumps({
        "manifest_version": 1, "tool": "jointcommit", "tool_version": __version__,
        "config": {"kind": "fig3a", "b": list(FIGURE_BENEFITS), "runs": runs_3a,
                   "seed": seed},
        "seeds": list(range(seed, seed + runs_3a)),
        "outputs": ["fig3a.csv"], "wall_time_s": None}, indent=2) + "\n")
    results["fig3a"] = RunResult([fig3a], manifest,
                                 list(range(seed, seed + runs_3a)))

    results["fig3b"] = run_config(ExperimentConfig(
        kind="fixation", b=list(FIGURE_BENEFITS), seed=seed, out=str(out),
        label="fig3b"))

    results["fig3c"] = run_config(ExperimentConfig(
        kind="evolve", b=list(FIGURE_BENEFITS), replicates=1, seed=seed,
        out=str(out), label="fig3c"))

    # Fig.-4 style: raw composition samples, excluding only the observer-free
    # ones; the redemption split happens per strategy row at analysis time.
    results["fig4"] = run_config(ExperimentConfig(
        kind="reputation-validate", b=list(FIGURE_BENEFITS), epsilon=[0.05],
        replicates=2, count=fig4_count or (1000 if full_scale else 12),
        count_no_redemption=0, stratify_redemption=False,
        rounds=fig4_rounds or 1_000_000, min_observers=1,
        seed=seed, out=str(out), workers=workers, label="fig4"))
    return results
