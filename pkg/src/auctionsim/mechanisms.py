"""Auction scenarios and exact payoff resolution.

Four discrete two-bidder mechanisms: an open sequential (British) auction,
a sealed first-price auction, a multi-period open auction, and a min-price
Vickrey auction. All money is integer cents; bids are whole-dollar levels
with level 0 meaning pass/stop. Everything here is a pure function of its
inputs, with tie randomness passed in explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

PASS = 0
CENTS_PER_LEVEL = 100

OPEN_SEQUENTIAL = "open_sequential"
SEALED_FIRST_PRICE = "sealed_first_price"
MULTI_PERIOD_OPEN = "multi_period_open"
VICKREY_MIN_PRICE = "vickrey_min_price"

SIMULTANEOUS = (SEALED_FIRST_PRICE, VICKREY_MIN_PRICE)
SEQUENTIAL = (OPEN_SEQUENTIAL, MULTI_PERIOD_OPEN)
MECHANISMS = SIMULTANEOUS + SEQUENTIAL

DIVISIBLE = "divisible"
INDIVISIBLE = "indivisible"

NO_FEE = "no_fee"
LOSER_ALWAYS = "loser_always"
LOSER_IF_ENTERED = "loser_if_entered"
FEE_KINDS = (NO_FEE, LOSER_ALWAYS, LOSER_IF_ENTERED)

NO_SALE = ("no_sale",)
SPLIT = ("split",)
RESET = ("reset",)


def winner_takes_all(agent: int) -> tuple:
    return ("winner", agent)


class ScenarioError(ValueError):
    """Scenario validation failure with a machine-readable category."""

    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


class MechanismError(ValueError):
    """Operation applied to the wrong mechanism or state."""


@dataclass(frozen=True)
class FeePolicy:
    kind: str
    fee: int = 0  # cents


@dataclass(frozen=True)
class Scenario:
    mechanism: str
    ceiling: int  # dollars
    valuations: tuple[int, int]  # cents
    good: str
    fee_policy: FeePolicy
    increment: int = 1  # dollars
    vickrey_tie_fee: int | None = None  # cents
    periods: int | None = None
    seed_hint: int | None = None

    @property
    def simultaneous(self) -> bool:
        return self.mechanism in SIMULTANEOUS

    @property
    def max_bids_per_agent(self) -> int:
        if self.mechanism == MULTI_PERIOD_OPEN:
            return self.periods or 1
        return 1

    def grid(self) -> tuple[int, ...]:
        """Full bid grid including pass: (0, 1, .., ceiling)."""
        return tuple(range(self.ceiling + 1))


@dataclass(frozen=True)
class Outcome:
    allocation: tuple
    prices_paid: tuple[int, int]  # cents, price of the good only
    payoffs: tuple[int, int]  # cents

    def fractions(self) -> tuple[Fraction, Fraction]:
        if self.allocation == SPLIT:
            return (Fraction(1, 2), Fraction(1, 2))
        if self.allocation[0] == "winner":
            w = self.allocation[1]
            return (Fraction(1), Fraction(0)) if w == 0 else (Fraction(0), Fraction(1))
        return (Fraction(0), Fraction(0))


@dataclass(frozen=True)
class SeqState:
    """Phase data for a sequential auction in progress.

    price is the standing bid level (0 while nobody has bid), leader owns
    the standing bid, counts track bids placed per agent, exited marks
    agents that stopped before any bid was standing. A pass is a permanent
    stop: an exited agent never gets the move back.
    """

    price: int = 0
    leader: int | None = None
    to_move: int = 0
    counts: tuple[int, int] = (0, 0)
    exited: tuple[bool, bool] = (False, False)
    history: tuple[tuple[int, int], ...] = ()
    terminal: bool = False


def validate_scenario(s: Scenario) -> Scenario:
    """Check every scenario invariant, raising ScenarioError with a category."""
    if s.mechanism not in MECHANISMS:
        raise ScenarioError("mechanism", f"unknown mechanism {s.mechanism!r}")
    if s.ceiling < 1:
        raise ScenarioError("ceiling", f"ceiling out of range: {s.ceiling}")
    if s.increment < 1:
        raise ScenarioError("increment", f"increment out of range: {s.increment}")
    if len(s.valuations) != 2:
        raise ScenarioError("agents", "exactly 2 agents required")
    for v in s.valuations:
        if v <= 0:
            raise ScenarioError("valuations", f"valuation must be positive: {v}")
        if v % 2 != 0:
            raise ScenarioError("odd_cents", f"odd cents in valuation: {v}")
    if s.good not in (DIVISIBLE, INDIVISIBLE):
        raise ScenarioError("good", f"unknown good kind {s.good!r}")
    if s.fee_policy.kind not in FEE_KINDS:
        raise ScenarioError("fee_policy", f"unknown fee policy {s.fee_policy.kind!r}")
    if s.fee_policy.fee < 0 or s.fee_policy.fee % 2 != 0:
        raise ScenarioError("odd_cents", f"fee must be a non-negative even number of cents: {s.fee_policy.fee}")
    if s.mechanism == VICKREY_MIN_PRICE:
        if s.vickrey_tie_fee is None:
            raise ScenarioError("tie_fee", "vickrey_min_price requires vickrey_tie_fee")
        if s.vickrey_tie_fee < 0 or s.vickrey_tie_fee % 2 != 0:
            raise ScenarioError("odd_cents", f"vickrey_tie_fee must be a non-negative even number of cents: {s.vickrey_tie_fee}")
    elif s.vickrey_tie_fee is not None:
        raise ScenarioError("tie_fee", "vickrey_tie_fee only applies to vickrey_min_price")
    if s.mechanism == MULTI_PERIOD_OPEN:
        if s.periods is None or s.periods < 1:
            raise ScenarioError("periods", "multi_period_open requires periods >= 1")
    elif s.periods is not None:
        raise ScenarioError("periods", "periods only applies to multi_period_open")
    return s


def _loser_fee(s: Scenario, entered: bool) -> int:
    kind = s.fee_policy.kind
    if kind == NO_FEE:
        return 0
    if kind == LOSER_IF_ENTERED and not entered:
        return 0
    return s.fee_policy.fee


def _resolve_winner(s: Scenario, winner: int, price: int, entered: tuple[bool, bool]) -> Outcome:
    loser = 1 - winner
    payoffs = [0, 0]
    prices = [0, 0]
    prices[winner] = price
    payoffs[winner] = s.valuations[winner] - price
    payoffs[loser] = -_loser_fee(s, entered[loser])
    return Outcome(winner_takes_all(winner), tuple(prices), tuple(payoffs))


def _resolve_split(s: Scenario, level: int) -> Outcome:
    # each agent takes half the good and pays half its own bid
    half_price = level * CENTS_PER_LEVEL // 2
    payoffs = tuple(s.valuations[i] // 2 - half_price for i in (0, 1))
    return Outcome(SPLIT, (half_price, half_price), payoffs)


def allocate(s: Scenario, bid_a: int, bid_b: int, tie_coin: int = 0) -> Outcome:
    """Resolve one simultaneous auction for opening bids (levels, 0 = pass).

    tie_coin (0 or 1) picks the winner of an indivisible sealed-bid tie and
    is ignored everywhere else.
    """
    for bid in (bid_a, bid_b):
        if bid not in s.grid():
            raise MechanismError(f"illegal bid level {bid} for ceiling {s.ceiling}")
    if tie_coin not in (0, 1):
        raise MechanismError(f"tie_coin must be 0 or 1, got {tie_coin}")
    bids = (bid_a, bid_b)
    if bid_a == PASS and bid_b == PASS:
        return Outcome(NO_SALE, (0, 0), (0, 0))
    entered = tuple(b != PASS for b in bids)
    if bid_a != bid_b:
        winner = 0 if bid_a > bid_b else 1
        if s.mechanism == VICKREY_MIN_PRICE:
            price = bids[1 - winner] * CENTS_PER_LEVEL  # loser's bid, 0 on a pass
        else:
            price = bids[winner] * CENTS_PER_LEVEL
        return _resolve_winner(s, winner, price, entered)
    # equal positive bids
    if s.good == DIVISIBLE:
        return _resolve_split(s, bid_a)
    if s.mechanism == VICKREY_MIN_PRICE:
        fee = s.vickrey_tie_fee or 0
        return Outcome(RESET, (0, 0), (-fee, -fee))
    winner = tie_coin
    return _resolve_winner(s, winner, bids[winner] * CENTS_PER_LEVEL, entered)


def expected_payoffs(s: Scenario, bid_a: int, bid_b: int) -> tuple[Fraction, Fraction]:
    """Exact expectation of allocate over the tie coin (half-cent resolution)."""
    heads = allocate(s, bid_a, bid_b, tie_coin=0).payoffs
    tails = allocate(s, bid_a, bid_b, tie_coin=1).payoffs
    return tuple(Fraction(h + t, 2) for h, t in zip(heads, tails))


def initial_state(s: Scenario) -> SeqState:
    if s.simultaneous:
        raise MechanismError(f"{s.mechanism} has no sequential state")
    return SeqState()


def legal_actions(s: Scenario, st: SeqState | None = None) -> tuple[int, ...]:
    """Pass plus every admissible bid level for the state (or the opening move)."""
    if st is None or st.leader is None:
        return (PASS,) + tuple(range(1, s.ceiling + 1))
    if st.terminal:
        raise MechanismError("no legal actions in a terminal state")
    lowest = st.price + s.increment
    return (PASS,) + tuple(range(lowest, s.ceiling + 1))


def seq_step(s: Scenario, st: SeqState, action: int) -> tuple[SeqState, Outcome | None]:
    """Advance a sequential auction by one action from the agent to move.

    A pass with a standing opponent bid ends the auction in the opponent's
    favor; a pass with no bid standing is a permanent stop that hands the
    move over. Bidding when the opponent has stopped or has no bids left
    ends the auction at once.
    """
    if st.terminal:
        raise MechanismError("seq_step on terminal state")
    if action not in legal_actions(s, st):
        raise MechanismError(f"illegal action {action} at price {st.price}")
    mover = st.to_move
    opp = 1 - mover
    history = st.history + ((mover, action),)
    entered = tuple(c > 0 for c in st.counts)

    if action == PASS:
        if st.leader is not None:
            out = _resolve_winner(s, st.leader, st.price * CENTS_PER_LEVEL, entered)
            nxt = replace(st, history=history, terminal=True)
            return nxt, out
        exited = list(st.exited)
        exited[mover] = True
        if exited[opp]:  # both opened with a pass
            nxt = replace(st, history=history, exited=tuple(exited), terminal=True)
            return nxt, Outcome(NO_SALE, (0, 0), (0, 0))
        nxt = replace(st, history=history, exited=tuple(exited), to_move=opp)
        return nxt, None

    counts = list(st.counts)
    counts[mover] += 1
    entered = tuple(c > 0 for c in counts)
    opponent_done = st.exited[opp] or st.counts[opp] >= s.max_bids_per_agent
    if opponent_done:
        out = _resolve_winner(s, mover, action * CENTS_PER_LEVEL, entered)
        nxt = replace(st, price=action, leader=mover, counts=tuple(counts),
                      history=history, terminal=True)
        return nxt, out
    nxt = replace(st, price=action, leader=mover, counts=tuple(counts),
                  history=history, to_move=opp)
    return nxt, None


def observation(s: Scenario, st: SeqState | None, agent: int):
    """The agent's view of the state: a hashable, totally ordered key."""
    if s.simultaneous:
        return ("start",)
    if s.mechanism == OPEN_SEQUENTIAL:
        if agent == 0:
            return ("start",)
        first = st.history[0][1] if st is not None and st.history else PASS
        return ("seen", first)
    standing = int(st is not None and st.leader is not None and st.leader != agent)
    price = st.price if st is not None else 0
    used = st.counts[agent] if st is not None else 0
    return ("state", price, used, standing)


def obs_to_str(obs) -> str:
    return ":".join(str(part) for part in obs)


def decision_space(s: Scenario) -> dict[int, dict]:
    """All reachable (observation -> legal actions) per agent.

    For simultaneous mechanisms this is the single opening decision; for
    sequential ones the game tree is walked exhaustively.
    """
    if s.simultaneous:
        legal = legal_actions(s)
        return {0: {("start",): legal}, 1: {("start",): legal}}
    space: dict[int, dict] = {0: {}, 1: {}}
    stack = [initial_state(s)]
    seen = set()
    while stack:
        st = stack.pop()
        key = (st.price, st.leader, st.to_move, st.counts, st.exited)
        if key in seen:
            continue
        seen.add(key)
        mover = st.to_move
        legal = legal_actions(s, st)
        space[mover][observation(s, st, mover)] = legal
        for action in legal:
            nxt, out = seq_step(s, st, action)
            if out is None:
                stack.append(nxt)
    return space


def scenario_to_dict(s: Scenario) -> dict:
    doc = {
        "mechanism": s.mechanism,
        "ceiling": s.ceiling,
        "increment": s.increment,
        "valuations": list(s.valuations),
        "good": s.good,
        "fee_policy": {"kind": s.fee_policy.kind, "fee": s.fee_policy.fee},
    }
    if s.vickrey_tie_fee is not None:
        doc["vickrey_tie_fee"] = s.vickrey_tie_fee
    if s.periods is not None:
        doc["periods"] = s.periods
    if s.seed_hint is not None:
        doc["seed_hint"] = s.seed_hint
    return doc


_SCENARIO_KEYS = {"mechanism", "ceiling", "increment", "valuations", "good",
                  "fee_policy", "vickrey_tie_fee", "periods", "seed_hint"}


def scenario_from_dict(doc: dict) -> Scenario:
    """Build and validate a Scenario from its JSON document form."""
    if not isinstance(doc, dict):
        raise ScenarioError("schema", "scenario document must be an object")
    unknown = set(doc) - _SCENARIO_KEYS
    if unknown:
        raise ScenarioError("schema", f"unknown scenario key: {sorted(unknown)[0]}")
    missing = {"mechanism", "ceiling", "valuations", "good", "fee_policy"} - set(doc)
    if missing:
        raise ScenarioError("schema", f"missing scenario key: {sorted(missing)[0]}")
    fee_doc = doc["fee_policy"]
    if not isinstance(fee_doc, dict) or "kind" not in fee_doc:
        raise ScenarioError("fee_policy", "fee_policy must be an object with a kind")
    extra = set(fee_doc) - {"kind", "fee"}
    if extra:
        raise ScenarioError("fee_policy", f"unknown fee_policy key: {sorted(extra)[0]}")
    try:
        valuations = tuple(int(v) for v in doc["valuations"])
    except (TypeError, ValueError):
        raise ScenarioError("valuations", "valuations must be an array of integers") from None
    scenario = Scenario(
        mechanism=doc["mechanism"],
        ceiling=int(doc["ceiling"]),
        valuations=valuations,
        good=doc["good"],
        fee_policy=FeePolicy(kind=fee_doc["kind"], fee=int(fee_doc.get("fee", 0))),
        increment=int(doc.get("increment", 1)),
        vickrey_tie_fee=None if doc.get("vickrey_tie_fee") is None else int(doc["vickrey_tie_fee"]),
        periods=None if doc.get("periods") is None else int(doc["periods"]),
        seed_hint=None if doc.get("seed_hint") is None else int(doc["seed_hint"]),
    )
    return validate_scenario(scenario)
