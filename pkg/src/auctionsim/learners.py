"""Tabular value learners: independent Q-learning plus Friend-Q and Foe-Q.

Tables map observations to action values (independent) or joint-action
values (Friend/Foe). Friend values a state by the best joint payoff cell,
Foe by pure-strategy maximin. Exploration is epsilon-greedy with a linear
decay schedule.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .mechanisms import PASS, obs_to_str

Q_LEARNING = "q_learning"
FRIEND_Q = "friend_q"
FOE_Q = "foe_q"
ALGORITHMS = (Q_LEARNING, FRIEND_Q, FOE_Q)
JOINT_ALGORITHMS = (FRIEND_Q, FOE_Q)

INDEPENDENT = "independent"
JOINT = "joint"

LOWEST_BID = "lowest_bid"
HIGHEST_BID = "highest_bid"
UNIFORM_RANDOM = "uniform_random"
TIE_BREAKS = (LOWEST_BID, HIGHEST_BID, UNIFORM_RANDOM)


class LearnerError(ValueError):
    pass


@dataclass(frozen=True)
class LearnerConfig:
    algorithm: str = Q_LEARNING
    alpha: float = 0.1
    gamma: float = 0.95
    epsilon_start: float = 1.0
    epsilon_min: float = 0.01
    decay_fraction: float = 0.8
    tie_break: str = UNIFORM_RANDOM

    def validate(self) -> "LearnerConfig":
        if self.algorithm not in ALGORITHMS:
            raise LearnerError(f"unknown algorithm {self.algorithm!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise LearnerError(f"alpha out of (0, 1]: {self.alpha}")
        if not 0.0 <= self.gamma <= 1.0:
            raise LearnerError(f"gamma out of [0, 1]: {self.gamma}")
        for eps in (self.epsilon_start, self.epsilon_min):
            if not 0.0 <= eps <= 1.0:
                raise LearnerError(f"epsilon out of [0, 1]: {eps}")
        if self.epsilon_min > self.epsilon_start:
            raise LearnerError("epsilon_min must not exceed epsilon_start")
        if not 0.0 < self.decay_fraction <= 1.0:
            raise LearnerError(f"decay_fraction out of (0, 1]: {self.decay_fraction}")
        if self.tie_break not in TIE_BREAKS:
            raise LearnerError(f"unknown tie_break {self.tie_break!r}")
        return self

    @property
    def joint(self) -> bool:
        return self.algorithm in JOINT_ALGORITHMS


@dataclass(frozen=True)
class EpsilonSchedule:
    epsilon_start: float
    epsilon_min: float
    decay_episodes: int

    @classmethod
    def from_config(cls, cfg: LearnerConfig, episodes: int) -> "EpsilonSchedule":
        decay = max(1, int(cfg.decay_fraction * episodes))
        return cls(cfg.epsilon_start, cfg.epsilon_min, decay)


def epsilon_at(sched: EpsilonSchedule, episode: int) -> float:
    """Linear ramp from epsilon_start to epsilon_min, constant afterwards."""
    if episode < 0:
        raise LearnerError(f"episode index must be >= 0: {episode}")
    if episode >= sched.decay_episodes:
        return sched.epsilon_min
    frac = episode / sched.decay_episodes
    return sched.epsilon_start + (sched.epsilon_min - sched.epsilon_start) * frac


class QTable:
    """Value table keyed by observation and own (or joint) action.

    Actions are bid levels 0..ceiling; unvisited entries are 0.
    """

    def __init__(self, kind: str, ceiling: int):
        if kind not in (INDEPENDENT, JOINT):
            raise LearnerError(f"unknown table kind {kind!r}")
        self.kind = kind
        self.n_actions = ceiling + 1
        self._rows: dict = {}

    def _row(self, obs):
        row = self._rows.get(obs)
        if row is None:
            if self.kind == INDEPENDENT:
                row = [0.0] * self.n_actions
            else:
                row = [[0.0] * self.n_actions for _ in range(self.n_actions)]
            self._rows[obs] = row
        return row

    def value(self, obs, action: int) -> float:
        if self.kind != INDEPENDENT:
            raise LearnerError("value() needs an independent table")
        row = self._rows.get(obs)
        return 0.0 if row is None else row[action]

    def joint_cell(self, obs, own: int, opp: int) -> float:
        if self.kind != JOINT:
            raise LearnerError("joint_cell() needs a joint table")
        row = self._rows.get(obs)
        return 0.0 if row is None else row[own][opp]

    def observations(self):
        return tuple(self._rows)


def q_update(t: QTable, obs, action: int, reward: float, bootstrap: float,
             alpha: float, gamma: float) -> QTable:
    """Convex-combination update toward reward + gamma * bootstrap."""
    if t.kind != INDEPENDENT:
        raise LearnerError("q_update needs an independent table")
    row = t._row(obs)
    row[action] = (1.0 - alpha) * row[action] + alpha * (reward + gamma * bootstrap)
    return t


def joint_q_update(t: QTable, obs, own: int, opp: int, reward: float,
                   bootstrap: float, alpha: float, gamma: float) -> QTable:
    if t.kind != JOINT:
        raise LearnerError("joint_q_update needs a joint table")
    row = t._row(obs)
    row[own][opp] = (1.0 - alpha) * row[own][opp] + alpha * (reward + gamma * bootstrap)
    return t


def _break_tie(candidates: list[int], tie_break: str, rng=None) -> int:
    if len(candidates) == 1:
        return candidates[0]
    if tie_break == LOWEST_BID:
        return min(candidates)
    if tie_break == HIGHEST_BID:
        return max(candidates)
    if rng is None:
        raise LearnerError("uniform_random tie break needs an rng")
    return candidates[int(rng.integers(len(candidates)))]


def joint_value(t: QTable, obs, algorithm: str, tie_break: str = LOWEST_BID,
                rng=None, legal: tuple[int, ...] | None = None) -> tuple[float, int]:
    """State value and recommended own action for a joint table.

    Friend: the maximum over all joint cells, recommending the own half of
    the maximizing pair. Foe: pure maximin over opponent actions.
    """
    if t.kind != JOINT:
        raise LearnerError("joint_value needs a joint table")
    if algorithm not in JOINT_ALGORITHMS:
        raise LearnerError(f"joint_value needs friend_q or foe_q, got {algorithm!r}")
    actions = legal if legal is not None else tuple(range(t.n_actions))
    row = t._rows.get(obs)
    if row is None:
        row = [[0.0] * t.n_actions for _ in range(t.n_actions)]
    if algorithm == FRIEND_Q:
        score = {own: max(row[own][opp] for opp in actions) for own in actions}
    else:
        score = {own: min(row[own][opp] for opp in actions) for own in actions}
    best = max(score.values())
    achievers = [own for own in actions if score[own] == best]
    return best, _break_tie(achievers, tie_break, rng)


def select_action(t: QTable, obs, legal: tuple[int, ...], epsilon: float, rng,
                  tie_break: str = UNIFORM_RANDOM, algorithm: str = Q_LEARNING) -> int:
    """Epsilon-greedy draw over the legal set."""
    if not legal:
        raise LearnerError("empty legal action set")
    if epsilon > 0.0 and rng.random() < epsilon:
        return legal[int(rng.integers(len(legal)))]
    if t.kind == JOINT:
        _, action = joint_value(t, obs, algorithm, tie_break, rng, legal)
        return action
    values = [t.value(obs, a) for a in legal]
    best = max(values)
    achievers = [a for a, v in zip(legal, values) if v == best]
    return _break_tie(achievers, tie_break, rng)


def greedy_policy(t: QTable, legal_by_obs: dict, tie_break: str = LOWEST_BID,
                  algorithm: str = Q_LEARNING, rng=None) -> dict:
    """Epsilon-zero action per observation."""
    policy = {}
    for obs, legal in legal_by_obs.items():
        if t.kind == JOINT:
            _, action = joint_value(t, obs, algorithm, tie_break, rng, tuple(legal))
        else:
            values = [t.value(obs, a) for a in legal]
            best = max(values)
            achievers = [a for a, v in zip(legal, values) if v == best]
            action = _break_tie(achievers, tie_break, rng)
        policy[obs] = action
    return policy


def dump_table_csv(t: QTable, path) -> None:
    """Write the table as obs,own_action,opp_action,value_cents rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["obs", "own_action", "opp_action", "value_cents"])
        for obs in sorted(t._rows):
            row = t._rows[obs]
            if t.kind == INDEPENDENT:
                for own, value in enumerate(row):
                    writer.writerow([obs_to_str(obs), own, "", repr(value)])
            else:
                for own, sub in enumerate(row):
                    for opp, value in enumerate(sub):
                        writer.writerow([obs_to_str(obs), own, opp, repr(value)])


class Learner:
    """Single-owner training agent: table + schedule + exploration stream."""

    def __init__(self, config: LearnerConfig, ceiling: int, episodes: int, rng):
        self.config = config.validate()
        self.table = QTable(JOINT if config.joint else INDEPENDENT, ceiling)
        self.schedule = EpsilonSchedule.from_config(config, episodes)
        self.rng = rng
        self._trajectory: list = []

    def epsilon(self, episode: int) -> float:
        return epsilon_at(self.schedule, episode)

    def act(self, obs, legal: tuple[int, ...], episode: int) -> int:
        return select_action(self.table, obs, legal, self.epsilon(episode),
                             self.rng, self.config.tie_break, self.config.algorithm)

    def learn_simultaneous(self, obs, own: int, opp: int, reward: float) -> None:
        cfg = self.config
        if cfg.joint:
            joint_q_update(self.table, obs, own, opp, reward, 0.0, cfg.alpha, cfg.gamma)
        else:
            q_update(self.table, obs, own, reward, 0.0, cfg.alpha, cfg.gamma)

    def record_step(self, obs, action: int, legal: tuple[int, ...]) -> None:
        self._trajectory.append((obs, action, legal))

    def learn_terminal(self, reward: float) -> None:
        """Flush a sequential trajectory, bootstrapping through own steps.

        Updates run last-to-first so the terminal reward propagates within
        a single episode.
        """
        cfg = self.config
        steps = self._trajectory
        for idx in range(len(steps) - 1, -1, -1):
            obs, action, _ = steps[idx]
            if idx == len(steps) - 1:
                q_update(self.table, obs, action, reward, 0.0, cfg.alpha, cfg.gamma)
            else:
                nxt_obs, _, nxt_legal = steps[idx + 1]
                bootstrap = max(self.table.value(nxt_obs, a) for a in nxt_legal)
                q_update(self.table, obs, action, 0.0, bootstrap, cfg.alpha, cfg.gamma)
        self._trajectory = []
