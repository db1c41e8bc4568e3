"""Exact game-theoretic references for the auction scenarios.

Builds expected-payoff bimatrices, enumerates pure Nash equilibria and
pure maximin strategies by exhaustive scan, solves sequential scenarios by
backward induction, and checks converged learner behavior against those
references. All arithmetic is exact (integer cents / fractions).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .mechanisms import (
    PASS,
    MechanismError,
    Scenario,
    SeqState,
    expected_payoffs,
    initial_state,
    legal_actions,
    observation,
    seq_step,
)


@dataclass(frozen=True)
class NormalFormGame:
    actions: tuple[int, ...]
    payoff_a: dict  # (a, b) -> Fraction, agent 0's expected payoff in cents
    payoff_b: dict


@dataclass(frozen=True)
class EquilibriumSet:
    pure_nash: tuple[tuple[int, int], ...]
    maximin_values: tuple[Fraction, Fraction]
    maximin_actions: tuple[tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True)
class SpeSolution:
    strategy: dict  # (agent, obs) -> action
    path: tuple[tuple[int, int], ...]  # (agent, action) in play order
    path_payoffs: tuple[int, int]


@dataclass(frozen=True)
class Verdict:
    consistent: bool
    note: str | None = None


def build_bimatrix(s: Scenario) -> NormalFormGame:
    """Expected-payoff bimatrix over the full bid grid of a simultaneous game."""
    if not s.simultaneous:
        raise MechanismError(f"{s.mechanism} is sequential; no bimatrix")
    actions = s.grid()
    payoff_a: dict = {}
    payoff_b: dict = {}
    for a in actions:
        for b in actions:
            pa, pb = expected_payoffs(s, a, b)
            payoff_a[(a, b)] = pa
            payoff_b[(a, b)] = pb
    return NormalFormGame(actions, payoff_a, payoff_b)


def best_responses(g: NormalFormGame, agent: int, opponent_action: int) -> tuple[int, ...]:
    """Argmax set of the agent's payoffs against a fixed opponent action."""
    if opponent_action not in g.actions:
        raise MechanismError(f"opponent action {opponent_action} not on grid")
    if agent == 0:
        values = {a: g.payoff_a[(a, opponent_action)] for a in g.actions}
    else:
        values = {b: g.payoff_b[(opponent_action, b)] for b in g.actions}
    best = max(values.values())
    return tuple(a for a in g.actions if values[a] == best)


def pure_nash(g: NormalFormGame) -> tuple[tuple[int, int], ...]:
    """Joint actions from which neither agent can strictly improve alone."""
    br_a = {b: set(best_responses(g, 0, b)) for b in g.actions}
    br_b = {a: set(best_responses(g, 1, a)) for a in g.actions}
    return tuple((a, b) for a in g.actions for b in g.actions
                 if a in br_a[b] and b in br_b[a])


def maximin(g: NormalFormGame, agent: int) -> tuple[Fraction, tuple[int, ...]]:
    """Pure-strategy maximin value and achieving action set."""
    payoff = g.payoff_a if agent == 0 else g.payoff_b
    key = (lambda own, opp: (own, opp)) if agent == 0 else (lambda own, opp: (opp, own))
    worst = {own: min(payoff[key(own, opp)] for opp in g.actions) for own in g.actions}
    value = max(worst.values())
    return value, tuple(a for a in g.actions if worst[a] == value)


def equilibrium_set(g: NormalFormGame) -> EquilibriumSet:
    va, aa = maximin(g, 0)
    vb, ab = maximin(g, 1)
    return EquilibriumSet(pure_nash(g), (va, vb), (aa, ab))


def dominant_actions(g: NormalFormGame, agent: int) -> dict[int, str]:
    """Weakly or strictly dominant actions, labelled separately.

    Weak dominance: at least as good as every alternative against every
    opponent action, strictly better somewhere. Strict: better everywhere.
    """
    payoff = g.payoff_a if agent == 0 else g.payoff_b
    key = (lambda own, opp: (own, opp)) if agent == 0 else (lambda own, opp: (opp, own))
    out: dict[int, str] = {}
    for cand in g.actions:
        strict = True
        weak = True
        somewhere_better = False
        for other in g.actions:
            if other == cand:
                continue
            for opp in g.actions:
                diff = payoff[key(cand, opp)] - payoff[key(other, opp)]
                if diff < 0:
                    weak = False
                    strict = False
                    break
                if diff == 0:
                    strict = False
                else:
                    somewhere_better = True
            if not weak:
                break
        if weak and somewhere_better:
            out[cand] = "strict" if strict else "weak"
    return out


def _state_key(st: SeqState):
    return (st.price, st.leader, st.to_move, st.counts, st.exited)


def backward_induction(s: Scenario) -> SpeSolution:
    """Exhaustive game-tree solution of a sequential scenario.

    At every node the mover maximizes its own terminal payoff given optimal
    continuation; indifference ties break toward the lower bid.
    """
    if s.simultaneous:
        raise MechanismError(f"{s.mechanism} is simultaneous; use pure_nash")
    strategy: dict = {}
    memo: dict = {}

    def solve(st: SeqState) -> tuple[int, int]:
        key = _state_key(st)
        if key in memo:
            return memo[key]
        mover = st.to_move
        best_action = None
        best_pay = None
        for action in legal_actions(s, st):  # ascending, so ties keep the lower bid
            nxt, out = seq_step(s, st, action)
            pay = out.payoffs if out is not None else solve(nxt)
            if best_pay is None or pay[mover] > best_pay[mover]:
                best_action, best_pay = action, pay
        strategy[(mover, observation(s, st, mover))] = best_action
        memo[key] = best_pay
        return best_pay

    st = initial_state(s)
    payoffs = solve(st)
    path = []
    while True:
        mover = st.to_move
        action = strategy[(mover, observation(s, st, mover))]
        path.append((mover, action))
        st, out = seq_step(s, st, action)
        if out is not None:
            assert out.payoffs == payoffs
            return SpeSolution(strategy, tuple(path), out.payoffs)


def rollout(s: Scenario, strategies: dict) -> tuple[tuple[tuple[int, int], ...], tuple[int, int]]:
    """Play a sequential scenario out with fixed per-agent strategy maps."""
    st = initial_state(s)
    path = []
    while True:
        mover = st.to_move
        action = strategies[mover][observation(s, st, mover)]
        path.append((mover, action))
        st, out = seq_step(s, st, action)
        if out is not None:
            return tuple(path), out.payoffs


def _on_path_best_response(s: Scenario, strategies: dict) -> bool:
    st = initial_state(s)
    while True:
        mover = st.to_move
        taken = strategies[mover][observation(s, st, mover)]
        values = {}
        for action in legal_actions(s, st):
            nxt, out = seq_step(s, st, action)
            if out is None:
                _, pays = _continue(s, nxt, strategies)
            else:
                pays = out.payoffs
            values[action] = pays[mover]
        if values[taken] < max(values.values()):
            return False
        st, out = seq_step(s, st, taken)
        if out is not None:
            return True


def _continue(s: Scenario, st: SeqState, strategies: dict):
    path = []
    while True:
        mover = st.to_move
        action = strategies[mover][observation(s, st, mover)]
        path.append((mover, action))
        st, out = seq_step(s, st, action)
        if out is not None:
            return tuple(path), out.payoffs


def is_equilibrium_consistent(s: Scenario, observed) -> Verdict:
    """Judge converged behavior against the exact equilibrium reference.

    Simultaneous scenarios take an observed joint action and test pure-Nash
    membership. Sequential ones take the pair of greedy strategy maps
    {0: {obs: action}, 1: {obs: action}} and test mutual best response
    along the realized path (each on-path move must be optimal against the
    opponent's observed strategy).
    """
    if s.simultaneous:
        joint = tuple(observed)
        game = build_bimatrix(s)
        nash = pure_nash(game)
        if joint in nash:
            return Verdict(True)
        note = None
        if nash:
            pa = game.payoff_a[joint]
            pb = game.payoff_b[joint]
            if all(pa > game.payoff_a[ne] and pb > game.payoff_b[ne] for ne in nash):
                note = "cooperative, not Nash"
        return Verdict(False, note)
    if not isinstance(observed, dict) or set(observed) != {0, 1}:
        raise MechanismError("sequential verdicts need strategy maps for both agents")
    return Verdict(_on_path_best_response(s, observed))
