"""Training harness: episode loop, logs, convergence, and verification.

A master seed is split into three independent streams (agent A
exploration, agent B exploration, tie coin) so identical experiments are
reproducible byte for byte. Rewards are credited exactly as the mechanism
returns them; the equilibrium verdict comes from the exact solver.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import equilibrium, learners, mechanisms
from .learners import Learner, LearnerConfig
from .mechanisms import PASS, Scenario, obs_to_str

GREEDY_TIE_BREAK = learners.LOWEST_BID  # reporting stays deterministic


class ExperimentError(ValueError):
    pass


@dataclass(frozen=True)
class Experiment:
    scenario: Scenario
    learner_a: LearnerConfig = LearnerConfig()
    learner_b: LearnerConfig = LearnerConfig()
    episodes: int = 3000
    seed: int = 0
    last_n: int = 100
    convergence_window: int = 200


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    bids: tuple[int, int]  # final bid level per agent, pass = 0
    rewards: tuple[int, int]  # cents, exactly the mechanism outcome
    epsilons: tuple[float, float]
    coin: int | None = None  # tie coin drawn for simultaneous episodes
    actions: tuple[tuple[int, int], ...] | None = None  # sequential (agent, level)


@dataclass
class RunResult:
    experiment: Experiment
    records: list[EpisodeRecord]
    heatmap: dict
    greedy: tuple[int, int] | dict
    greedy_path: tuple[tuple[int, int], ...] | None
    converged_at: int | None
    verdict: equilibrium.Verdict
    equilibrium_ref: dict
    tables: tuple[learners.QTable, learners.QTable] = field(repr=False, default=None)

    @property
    def final_rewards(self) -> tuple[int, int]:
        return self.records[-1].rewards


def validate_experiment(e: Experiment) -> Experiment:
    mechanisms.validate_scenario(e.scenario)
    e.learner_a.validate()
    e.learner_b.validate()
    if e.episodes < 1:
        raise ExperimentError(f"episodes must be >= 1: {e.episodes}")
    if not 1 <= e.last_n <= e.episodes:
        raise ExperimentError(f"last_n must be in [1, episodes]: {e.last_n}")
    if not 1 <= e.convergence_window <= e.episodes:
        raise ExperimentError(f"convergence_window must be in [1, episodes]: {e.convergence_window}")
    if not e.scenario.simultaneous and (e.learner_a.joint or e.learner_b.joint):
        raise ExperimentError("joint learner requires simultaneous mechanism")
    return e


def run_episode(s: Scenario, agents: tuple[Learner, Learner], coin_rng,
                episode: int) -> EpisodeRecord:
    """Play one auction and update both learners on their realized rewards."""
    eps = (agents[0].epsilon(episode), agents[1].epsilon(episode))
    if s.simultaneous:
        obs = mechanisms.observation(s, None, 0)
        legal = mechanisms.legal_actions(s)
        bid_a = agents[0].act(obs, legal, episode)
        bid_b = agents[1].act(obs, legal, episode)
        coin = int(coin_rng.integers(2))
        out = mechanisms.allocate(s, bid_a, bid_b, tie_coin=coin)
        agents[0].learn_simultaneous(obs, bid_a, bid_b, out.payoffs[0])
        agents[1].learn_simultaneous(obs, bid_b, bid_a, out.payoffs[1])
        return EpisodeRecord(episode, (bid_a, bid_b), out.payoffs, eps, coin=coin)

    if agents[0].config.joint or agents[1].config.joint:
        raise ExperimentError("joint learner requires simultaneous mechanism")
    st = mechanisms.initial_state(s)
    last_level = [PASS, PASS]
    while True:
        mover = st.to_move
        obs = mechanisms.observation(s, st, mover)
        legal = mechanisms.legal_actions(s, st)
        action = agents[mover].act(obs, legal, episode)
        agents[mover].record_step(obs, action, legal)
        last_level[mover] = action
        st, out = mechanisms.seq_step(s, st, action)
        if out is not None:
            agents[0].learn_terminal(out.payoffs[0])
            agents[1].learn_terminal(out.payoffs[1])
            return EpisodeRecord(episode, tuple(last_level), out.payoffs, eps,
                                 actions=st.history)


def detect_convergence(records: list[EpisodeRecord], window: int) -> int | None:
    """Start of the constant tail of joint play, if it spans >= window episodes."""
    if window > len(records):
        raise ExperimentError("window exceeds record count")

    def key(r: EpisodeRecord):
        return r.actions if r.actions is not None else r.bids

    tail = key(records[-1])
    start = len(records) - 1
    while start > 0 and key(records[start - 1]) == tail:
        start -= 1
    if len(records) - start >= window:
        return start
    return None


def heatmap_last_n(records: list[EpisodeRecord], n: int) -> dict:
    """Counts of joint final-bid pairs over the last n records."""
    if n > len(records):
        raise ExperimentError("n exceeds record count")
    counts: dict = {}
    for r in records[-n:]:
        counts[r.bids] = counts.get(r.bids, 0) + 1
    return counts


def heatmap_frequencies(counts: dict) -> dict:
    total = sum(counts.values())
    return {cell: Fraction(c, total) for cell, c in counts.items()}


def _greedy_behavior(s: Scenario, agents: tuple[Learner, Learner]):
    space = mechanisms.decision_space(s)
    policies = {
        i: learners.greedy_policy(agents[i].table, space[i], GREEDY_TIE_BREAK,
                                  agents[i].config.algorithm)
        for i in (0, 1)
    }
    if s.simultaneous:
        start = mechanisms.observation(s, None, 0)
        return (policies[0][start], policies[1][start]), None
    path, _ = equilibrium.rollout(s, policies)
    return policies, path


def _equilibrium_reference(s: Scenario) -> dict:
    if s.simultaneous:
        game = equilibrium.build_bimatrix(s)
        eq = equilibrium.equilibrium_set(game)
        return {
            "pure_nash": [list(ne) for ne in eq.pure_nash],
            "maximin": [
                {"value_cents": float(eq.maximin_values[i]),
                 "actions": list(eq.maximin_actions[i])}
                for i in (0, 1)
            ],
        }
    spe = equilibrium.backward_induction(s)
    return {
        "spe_path": [[agent + 1, action] for agent, action in spe.path],
        "spe_payoffs_cents": list(spe.path_payoffs),
    }


def train(e: Experiment) -> RunResult:
    """Run the full experiment and judge the converged behavior."""
    validate_experiment(e)
    s = e.scenario
    seq_a, seq_b, seq_coin = np.random.SeedSequence(e.seed).spawn(3)
    agents = (
        Learner(e.learner_a, s.ceiling, e.episodes, np.random.default_rng(seq_a)),
        Learner(e.learner_b, s.ceiling, e.episodes, np.random.default_rng(seq_b)),
    )
    coin_rng = np.random.default_rng(seq_coin)
    records = [run_episode(s, agents, coin_rng, ep) for ep in range(e.episodes)]

    greedy, greedy_path = _greedy_behavior(s, agents)
    verdict = equilibrium.is_equilibrium_consistent(s, greedy)
    return RunResult(
        experiment=e,
        records=records,
        heatmap=heatmap_last_n(records, e.last_n),
        greedy=greedy,
        greedy_path=greedy_path,
        converged_at=detect_convergence(records, e.convergence_window),
        verdict=verdict,
        equilibrium_ref=_equilibrium_reference(s),
        tables=(agents[0].table, agents[1].table),
    )


def multi_seed(e: Experiment, seeds: list[int]) -> dict:
    """Per-seed summaries plus an aggregate over the seed list."""
    if not seeds:
        raise ExperimentError("multi_seed needs at least one seed")
    runs = []
    for seed in seeds:
        exp = Experiment(e.scenario, e.learner_a, e.learner_b, e.episodes,
                         seed, e.last_n, e.convergence_window)
        runs.append(train(exp))
    summaries = [run_summary(r) for r in runs]

    greedy_keys = [_greedy_key(r) for r in runs]
    modal = max(sorted(set(greedy_keys)), key=greedy_keys.count)
    if runs[0].greedy_path is not None:
        modal_json = [[agent + 1, action] for agent, action in modal]
    else:
        modal_json = list(modal)
    consistent = sum(1 for r in runs if r.verdict.consistent)
    mean_final = [
        float(sum(r.final_rewards[i] for r in runs)) / len(runs) for i in (0, 1)
    ]
    return {
        "seeds": list(seeds),
        "runs": summaries,
        "aggregate": {
            "modal_greedy": modal_json,
            "consistency": {"consistent": consistent, "total": len(seeds),
                            "rate": consistent / len(seeds)},
            "mean_final_reward_cents": mean_final,
        },
    }


def _greedy_key(r: RunResult):
    if r.greedy_path is not None:
        return tuple(r.greedy_path)
    return tuple(r.greedy)


def _greedy_json(r: RunResult):
    if r.greedy_path is not None:
        return {
            "path": [[agent + 1, action] for agent, action in r.greedy_path],
            "strategy_a": {obs_to_str(o): a for o, a in sorted(r.greedy[0].items())},
            "strategy_b": {obs_to_str(o): a for o, a in sorted(r.greedy[1].items())},
        }
    return list(r.greedy)


def run_summary(r: RunResult) -> dict:
    e = r.experiment
    summary = {
        "config": {
            "scenario": mechanisms.scenario_to_dict(e.scenario),
            "learner_a": _learner_json(e.learner_a),
            "learner_b": _learner_json(e.learner_b),
            "episodes": e.episodes,
            "seed": e.seed,
            "last_n": e.last_n,
            "convergence_window": e.convergence_window,
        },
        "seed": e.seed,
        "greedy": _greedy_json(r),
        "converged_at": r.converged_at,
        "final_rewards_cents": list(r.final_rewards),
        "equilibrium": {
            "verdict": "consistent" if r.verdict.consistent else "inconsistent",
            **({"note": r.verdict.note} if r.verdict.note else {}),
            **r.equilibrium_ref,
        },
    }
    return summary


def _learner_json(cfg: LearnerConfig) -> dict:
    return {
        "algorithm": cfg.algorithm,
        "alpha": cfg.alpha,
        "gamma": cfg.gamma,
        "epsilon_start": cfg.epsilon_start,
        "epsilon_min": cfg.epsilon_min,
        "decay_fraction": cfg.decay_fraction,
        "tie_break": cfg.tie_break,
    }


def _format_actions(actions: tuple[tuple[int, int], ...]) -> str:
    return ";".join(f"{agent + 1}:{level}" for agent, level in actions)


def write_episodes_csv(r: RunResult, path) -> None:
    sequential = r.records and r.records[0].actions is not None
    header = "episode,bid_a,bid_b,reward_a_cents,reward_b_cents,epsilon_a,epsilon_b"
    lines = [header + (",actions" if sequential else "")]
    for rec in r.records:
        row = (f"{rec.episode},{rec.bids[0]},{rec.bids[1]},"
               f"{rec.rewards[0]},{rec.rewards[1]},"
               f"{rec.epsilons[0]!r},{rec.epsilons[1]!r}")
        if sequential:
            row += f',"{_format_actions(rec.actions)}"'
        lines.append(row)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_heatmap_csv(r: RunResult, path) -> None:
    freqs = heatmap_frequencies(r.heatmap)
    lines = ["bid_a,bid_b,count,frequency"]
    for cell in sorted(r.heatmap):
        freq = float(freqs[cell])
        lines.append(f"{cell[0]},{cell[1]},{r.heatmap[cell]},{freq!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_summary_json(r: RunResult, path) -> None:
    with open(path, "w") as fh:
        json.dump(run_summary(r), fh, indent=2, sort_keys=True)
        fh.write("\n")
