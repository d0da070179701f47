"""Q-learning policy layer for the swarm.

Holds the pieces between the grid environment and the experiment loop:
the per-episode epsilon schedule, the bounded FIFO replay memory, the
Bellman target, and the controller that wires networks and memories to
UAVs in one of two modes:

* ``local``  -- every UAV owns a private network and a private memory;
* ``global`` -- one shared network and one shared memory, experiences
  appended in the interleaved order the UAVs act.

With a single UAV the two modes build identical state and consume the
random stream identically, so their runs coincide move for move.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .densenet import (
    DEFAULT_LEARNING_RATE,
    QNetwork,
    forward,
    init_network,
    train_step,
)
from .gridworld import (
    Action,
    GridMap,
    SwarmState,
    encode_observation,
    is_coverage_complete,
    transition,
)

LOCAL = "local"
GLOBAL = "global"
MODES = (LOCAL, GLOBAL)

DEFAULT_EPSILON = 0.49
DEFAULT_EPSILON_DECAY = 0.93
DEFAULT_EPSILON_MIN = 0.05
DEFAULT_GAMMA = 0.83
DEFAULT_MEMORY_SIZE = 60
DEFAULT_BATCH_SIZE = 16


@dataclass(frozen=True)
class EpsilonSchedule:
    """Per-episode exploration rate: max(minimum, initial * decay^episode)."""

    initial: float = DEFAULT_EPSILON
    decay_factor: float = DEFAULT_EPSILON_DECAY
    minimum: float = DEFAULT_EPSILON_MIN

    def value(self, episode_index: int) -> float:
        if episode_index < 0:
            raise ValueError("episode_index must be non-negative")
        return max(self.minimum, self.initial * self.decay_factor**episode_index)


@dataclass(frozen=True)
class Experience:
    """One transition as seen by a single UAV.

    ``terminal`` is true when the move finished the episode, either by
    completing coverage or by exhausting the step budget.
    """

    observation: np.ndarray
    action: Action
    reward: float
    next_observation: np.ndarray
    terminal: bool


class ReplayMemory:
    """Bounded FIFO buffer of experiences (oldest evicted first)."""

    def __init__(self, capacity: int = DEFAULT_MEMORY_SIZE) -> None:
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._buffer: deque[Experience] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._buffer)

    def __iter__(self):
        return iter(self._buffer)

    def append(self, experience: Experience) -> None:
        self._buffer.append(experience)

    def sample(self, k: int, rng: np.random.Generator) -> list[Experience]:
        """Uniform sample of min(k, len) experiences without replacement."""
        if not self._buffer:
            raise ValueError("cannot sample from an empty memory")
        k = min(k, len(self._buffer))
        indices = rng.choice(len(self._buffer), size=k, replace=False)
        return [self._buffer[int(i)] for i in indices]


@dataclass(frozen=True)
class ControllerConfig:
    mode: str = LOCAL
    gamma: float = DEFAULT_GAMMA
    learning_rate: float = DEFAULT_LEARNING_RATE
    batch_size: int = DEFAULT_BATCH_SIZE
    memory_size: int = DEFAULT_MEMORY_SIZE
    allow_shared_cells: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.memory_size < 1:
            raise ValueError("memory_size must be positive")


class SwarmController:
    """Networks and replay memories for one run, wired by mode.

    Local mode builds one (network, memory) pair per UAV; global mode
    builds a single shared pair. Construction draws initial weights from
    ``rng`` in UAV order, so a fixed seed fixes every parameter.
    """

    def __init__(
        self,
        grid: GridMap,
        n_uavs: int,
        config: ControllerConfig,
        rng: np.random.Generator,
    ) -> None:
        if n_uavs < 1:
            raise ValueError("n_uavs must be positive")
        self.config = config
        self.n_uavs = n_uavs
        n_models = n_uavs if config.mode == LOCAL else 1
        self.networks = [
            init_network(grid.rows, grid.cols, rng, config.learning_rate)
            for _ in range(n_models)
        ]
        self.memories = [ReplayMemory(config.memory_size) for _ in range(n_models)]

    def network_for(self, uav: int) -> QNetwork:
        return self.networks[uav if self.config.mode == LOCAL else 0]

    def memory_for(self, uav: int) -> ReplayMemory:
        return self.memories[uav if self.config.mode == LOCAL else 0]

    def record(self, uav: int, experience: Experience) -> None:
        self.memory_for(uav).append(experience)


def select_action(
    qvalues: np.ndarray, epsilon: float, rng: np.random.Generator
) -> Action:
    """Epsilon-greedy pick: explore uniformly with probability epsilon,
    otherwise take the argmax (ties broken by lowest action code)."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    if rng.random() < epsilon:
        return Action(int(rng.integers(len(Action))))
    return Action(int(np.argmax(qvalues)))


def bellman_target(
    reward: float, gamma: float, next_qvalues: np.ndarray, terminal: bool
) -> float:
    """One-step Q-learning target: r + gamma * max Q(s', .), or r alone
    when the transition ended the episode."""
    if terminal:
        return float(reward)
    return float(reward + gamma * np.max(next_qvalues))


def train_from_memory(
    memory: ReplayMemory,
    net: QNetwork,
    config: ControllerConfig,
    rng: np.random.Generator,
) -> float:
    """One training pass: sample up to batch_size experiences and apply a
    train_step per sample, recomputing each Bellman target with the
    network as it stands at that point. Returns the mean loss."""
    batch = memory.sample(config.batch_size, rng)
    total_loss = 0.0
    for exp in batch:
        next_qvalues = forward(net, exp.next_observation)
        target = bellman_target(exp.reward, config.gamma, next_qvalues, exp.terminal)
        _, loss = train_step(net, exp.observation, int(exp.action), target)
        total_loss += loss
    return total_loss / len(batch)


def step_swarm(
    grid: GridMap,
    state: SwarmState,
    controller: SwarmController,
    epsilon: float,
    step_budget: int,
    rng: np.random.Generator,
) -> tuple[SwarmState, list[Experience], bool]:
    """Advance the swarm one time step: each UAV in index order encodes
    its observation, picks an action, moves, records the experience, and
    trains from its memory. Stops mid-step once coverage is complete or
    the budget runs out; UAVs after the finishing move do not act.
    """
    experiences: list[Experience] = []
    done = False
    for uav in range(state.n_uavs):
        observation = encode_observation(grid, state)
        qvalues = forward(controller.network_for(uav), observation)
        action = select_action(qvalues, epsilon, rng)
        state, outcome = transition(
            grid, state, uav, action, controller.config.allow_shared_cells
        )
        next_observation = encode_observation(grid, state)
        done = is_coverage_complete(grid, state) or state.global_step >= step_budget
        experience = Experience(observation, action, outcome.reward, next_observation, done)
        experiences.append(experience)
        controller.record(uav, experience)
        train_from_memory(
            controller.memory_for(uav), controller.network_for(uav), controller.config, rng
        )
        if done:
            break
    return state, experiences, done
