"""Experiment harness: seeded runs, best-episode selection, aggregation.

One *run* trains a fresh controller for ``max_episodes`` episodes on one
(map, n_uavs, mode, seed) combination; networks and memories persist
across episodes so learning accumulates, while the environment resets at
every episode start. A run's score is the total action count of its best
covering episode. Runs over several seeds aggregate to mean and sample
standard deviation, with non-covering seeds counted separately rather
than averaged in.

Everything downstream of a seed is deterministic: a single generator
seeded once per run drives weight init, action selection and replay
sampling, so reruns reproduce every action and every CSV byte.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .agent import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_EPSILON,
    DEFAULT_EPSILON_DECAY,
    DEFAULT_EPSILON_MIN,
    DEFAULT_GAMMA,
    DEFAULT_MEMORY_SIZE,
    LOCAL,
    MODES,
    ControllerConfig,
    EpsilonSchedule,
    SwarmController,
    step_swarm,
)
from .densenet import DEFAULT_LEARNING_RATE
from .gridworld import (
    GridMap,
    initial_swarm_state,
    is_coverage_complete,
    start_positions,
)

DEFAULT_SEEDS = (1, 2, 3, 4, 5)
DEFAULT_MAX_EPISODES = 30
STEP_BUDGET_PER_FREE_CELL = 100
MAX_UAVS = 9

CSV_HEADER = (
    "map_id",
    "n_uavs",
    "mode",
    "seed",
    "episode",
    "total_actions",
    "covered",
    "best_total_actions",
)
SUMMARY_LABEL = "summary"


class ConfigError(ValueError):
    """An experiment specification is inconsistent or out of range."""


class AllRunsFailedError(RuntimeError):
    """No seed of an experiment produced a covering episode."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything one experiment needs: map, swarm size, mode, seeds and
    the training hyperparameters (defaults match the reference setup)."""

    map_id: str
    grid: GridMap
    n_uavs: int = 1
    mode: str = LOCAL
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    max_episodes: int = DEFAULT_MAX_EPISODES
    step_budget: int | None = None  # None -> 100 x free cells
    epsilon: float = DEFAULT_EPSILON
    epsilon_decay: float = DEFAULT_EPSILON_DECAY
    epsilon_min: float = DEFAULT_EPSILON_MIN
    gamma: float = DEFAULT_GAMMA
    memory_size: int = DEFAULT_MEMORY_SIZE
    learning_rate: float = DEFAULT_LEARNING_RATE
    batch_size: int = DEFAULT_BATCH_SIZE
    allow_shared_cells: bool = False
    log_traces: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 1 <= self.n_uavs <= MAX_UAVS:
            raise ConfigError(f"n_uavs must be 1..{MAX_UAVS}, got {self.n_uavs}")
        if self.n_uavs > self.grid.free_count:
            raise ConfigError(
                f"{self.n_uavs} UAVs do not fit on {self.grid.free_count} free cells"
            )
        try:
            start_positions(self.grid, self.n_uavs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not self.seeds:
            raise ConfigError("seeds must not be empty")
        if self.max_episodes < 1:
            raise ConfigError("max_episodes must be positive")
        if self.step_budget is not None and self.step_budget < 0:
            raise ConfigError("step_budget must be non-negative")
        for name in ("epsilon", "epsilon_decay", "epsilon_min", "gamma"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ConfigError(f"{name} must be in (0, 1], got {value}")
        if self.learning_rate <= 0.0:
            raise ConfigError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")
        if self.memory_size < 1:
            raise ConfigError("memory_size must be positive")

    def controller_config(self) -> ControllerConfig:
        return ControllerConfig(
            mode=self.mode,
            gamma=self.gamma,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            memory_size=self.memory_size,
            allow_shared_cells=self.allow_shared_cells,
        )

    def epsilon_schedule(self) -> EpsilonSchedule:
        return EpsilonSchedule(self.epsilon, self.epsilon_decay, self.epsilon_min)


@dataclass(frozen=True)
class EpisodeRecord:
    """One episode's outcome; ``moves`` holds (uav, action) pairs when
    trace logging is on, in the exact order the moves were made."""

    episode: int
    total_actions: int
    covered: bool
    per_uav_actions: tuple[int, ...]
    moves: tuple[tuple[int, int], ...] | None = None


@dataclass(frozen=True)
class RunResult:
    """All episodes of one seeded run."""

    seed: int
    episodes: tuple[EpisodeRecord, ...]

    @property
    def best_episode(self) -> EpisodeRecord | None:
        """The covering episode with the fewest total actions, or None."""
        covering = [rec for rec in self.episodes if rec.covered]
        if not covering:
            return None
        return min(covering, key=lambda rec: rec.total_actions)

    @property
    def best_total_actions(self) -> int | None:
        best = self.best_episode
        return None if best is None else best.total_actions


@dataclass(frozen=True)
class AggregateStats:
    """Mean and sample std of best totals over the seeds that covered."""

    mean: float
    std: float
    n_runs: int
    n_failed: int


def step_budget_from_flight_time(
    grid: GridMap, n_uavs: int, override: int | None = None
) -> int:
    """Per-episode cap on total swarm actions standing in for a maximum
    flight time: 100 actions per free cell unless overridden."""
    if override is not None:
        return override
    return STEP_BUDGET_PER_FREE_CELL * grid.free_count


def run_episode(
    grid: GridMap,
    controller: SwarmController,
    episode_index: int,
    epsilon: float,
    step_budget: int,
    rng: np.random.Generator,
    record_moves: bool = False,
) -> EpisodeRecord:
    """Run one episode from a fresh environment reset until coverage or
    budget exhaustion; the controller keeps learning throughout."""
    state = initial_swarm_state(grid, controller.n_uavs)
    moves: list[tuple[int, int]] = []
    done = is_coverage_complete(grid, state) or state.global_step >= step_budget
    while not done:
        state, experiences, done = step_swarm(
            grid, state, controller, epsilon, step_budget, rng
        )
        if record_moves:
            # step_swarm serves UAVs from index 0 up, so the position in
            # the experience list is the UAV index.
            moves.extend((uav, int(exp.action)) for uav, exp in enumerate(experiences))
    return EpisodeRecord(
        episode=episode_index,
        total_actions=state.global_step,
        covered=is_coverage_complete(grid, state),
        per_uav_actions=state.per_uav_actions,
        moves=tuple(moves) if record_moves else None,
    )


def run_seed(spec: ExperimentSpec, seed: int) -> RunResult:
    """One fully deterministic run: a fresh controller trained for
    ``max_episodes`` episodes, everything driven by one generator."""
    rng = np.random.default_rng(seed)
    controller = SwarmController(spec.grid, spec.n_uavs, spec.controller_config(), rng)
    schedule = spec.epsilon_schedule()
    budget = step_budget_from_flight_time(spec.grid, spec.n_uavs, spec.step_budget)
    episodes = [
        run_episode(
            spec.grid,
            controller,
            episode,
            schedule.value(episode),
            budget,
            rng,
            record_moves=spec.log_traces,
        )
        for episode in range(spec.max_episodes)
    ]
    return RunResult(seed=seed, episodes=tuple(episodes))


def run_experiment(spec: ExperimentSpec) -> list[RunResult]:
    """Run every seed of the spec, in order."""
    return [run_seed(spec, seed) for seed in spec.seeds]


def run_sweep(
    specs: list[ExperimentSpec], parallelism: int = 1
) -> list[list[RunResult]]:
    """Run several experiments, optionally across worker processes.

    Results come back in the order of ``specs`` regardless of which
    worker finished first, so output files are reproducible.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be positive")
    if parallelism == 1 or len(specs) <= 1:
        return [run_experiment(spec) for spec in specs]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(run_experiment, specs))


def aggregate(results: list[RunResult]) -> AggregateStats:
    """Mean and sample standard deviation (n-1; a single sample has
    std 0) of best_total_actions over the seeds that achieved coverage.

    Raises AllRunsFailedError when no seed covered the map.
    """
    if not results:
        raise ValueError("no results to aggregate")
    best = [r.best_total_actions for r in results if r.best_total_actions is not None]
    n_failed = len(results) - len(best)
    if not best:
        raise AllRunsFailedError(
            f"none of the {len(results)} runs produced a covering episode"
        )
    mean = float(np.mean(best))
    std = 0.0 if len(best) == 1 else float(np.std(best, ddof=1))
    return AggregateStats(mean=mean, std=std, n_runs=len(best), n_failed=n_failed)


# ---------------------------------------------------------------------------
# Results CSV and trace sidecar.
#
# CSV layout: the fixed header, then per run its episode rows in order
# followed by one summary row. Episode rows leave best_total_actions
# empty; the summary row (episode column = "summary") carries it, along
# with whether any episode covered. Counts are written plain; any real
# number is written with 2 decimals; booleans as true/false.


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def results_rows(spec: ExperimentSpec, results: list[RunResult]) -> list[list[str]]:
    rows = []
    for result in results:
        prefix = [spec.map_id, spec.n_uavs, spec.mode, result.seed]
        for rec in result.episodes:
            rows.append(prefix + [rec.episode, rec.total_actions, rec.covered, ""])
        best = result.best_total_actions
        rows.append(
            prefix
            + [
                SUMMARY_LABEL,
                "",
                any(rec.covered for rec in result.episodes),
                best if best is not None else "",
            ]
        )
    return [[_format_value(v) for v in row] for row in rows]


def write_results_csv(handle, rows: list[list[str]]) -> None:
    """Write the header plus pre-formatted rows with LF line endings."""
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)


def trace_entries(spec: ExperimentSpec, results: list[RunResult]) -> list[dict]:
    """Replayable records of each run's best episode, for rendering.

    Only runs with a covering episode appear. Each entry is
    self-contained: it embeds the map text so a renderer needs nothing
    but the sidecar file.
    """
    if not spec.log_traces:
        return []
    entries = []
    for result in results:
        best = result.best_episode
        if best is None or best.moves is None:
            continue
        entries.append(
            {
                "map_id": spec.map_id,
                "n_uavs": spec.n_uavs,
                "mode": spec.mode,
                "seed": result.seed,
                "map": spec.grid.to_text(),
                "allow_shared_cells": spec.allow_shared_cells,
                "best_episode": best.episode,
                "total_actions": best.total_actions,
                "moves": [list(move) for move in best.moves],
            }
        )
    return entries


def write_traces(handle, entries: list[dict]) -> None:
    json.dump({"traces": entries}, handle, indent=1)
    handle.write("\n")
