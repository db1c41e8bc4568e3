import itertools

import pytest
from fractions import Fraction

from auctionsim import mechanisms as mech
from auctionsim.mechanisms import (
    DIVISIBLE,
    INDIVISIBLE,
    LOSER_ALWAYS,
    LOSER_IF_ENTERED,
    NO_FEE,
    NO_SALE,
    PASS,
    RESET,
    SPLIT,
    FeePolicy,
    Scenario,
    ScenarioError,
    MechanismError,
    allocate,
    expected_payoffs,
    initial_state,
    legal_actions,
    observation,
    scenario_from_dict,
    scenario_to_dict,
    seq_step,
    validate_scenario,
)


def make(mechanism="sealed_first_price", ceiling=5, valuations=(350, 350),
         good=INDIVISIBLE, fee_kind=LOSER_ALWAYS, fee=100, tie_fee=None,
         periods=None, increment=1):
    if mechanism == "vickrey_min_price" and tie_fee is None:
        tie_fee = 150
    return validate_scenario(Scenario(
        mechanism=mechanism, ceiling=ceiling, valuations=tuple(valuations),
        good=good, fee_policy=FeePolicy(fee_kind, fee), increment=increment,
        vickrey_tie_fee=tie_fee, periods=periods))


def play(s, actions):
    """Drive a sequential auction through a full action list."""
    st = initial_state(s)
    out = None
    for action in actions:
        st, out = seq_step(s, st, action)
    return st, out


# --- validate_scenario ---------------------------------------------------

def test_validate_accepts_paper_scenario():
    s = make()
    assert validate_scenario(s) is s
    assert s.valuations == (350, 350)


@pytest.mark.parametrize("kwargs,category", [
    (dict(ceiling=0), "ceiling"),
    (dict(ceiling=-3), "ceiling"),
    (dict(increment=0), "increment"),
    (dict(valuations=(333, 350)), "odd_cents"),
    (dict(valuations=(350,)), "agents"),
    (dict(valuations=(350, 350, 350)), "agents"),
    (dict(valuations=(0, 350)), "valuations"),
    (dict(valuations=(-200, 350)), "valuations"),
    (dict(mechanism="dutch"), "mechanism"),
    (dict(good="liquid"), "good"),
    (dict(fee_kind="winner_pays"), "fee_policy"),
    (dict(fee=75), "odd_cents"),
    (dict(tie_fee=150), "tie_fee"),  # tie fee outside vickrey
    (dict(periods=2), "periods"),  # periods outside multi_period_open
])
def test_validate_rejects_with_category(kwargs, category):
    base = dict(mechanism="sealed_first_price", ceiling=5, valuations=(350, 350),
                good=INDIVISIBLE, fee_kind=LOSER_ALWAYS, fee=100,
                tie_fee=None, periods=None, increment=1)
    base.update(kwargs)
    s = Scenario(mechanism=base["mechanism"], ceiling=base["ceiling"],
                 valuations=tuple(base["valuations"]), good=base["good"],
                 fee_policy=FeePolicy(base["fee_kind"], base["fee"]),
                 increment=base["increment"], vickrey_tie_fee=base["tie_fee"],
                 periods=base["periods"])
    with pytest.raises(ScenarioError) as err:
        validate_scenario(s)
    assert err.value.category == category


def test_validate_requires_vickrey_tie_fee():
    s = Scenario(mechanism="vickrey_min_price", ceiling=5, valuations=(350, 350),
                 good=INDIVISIBLE, fee_policy=FeePolicy(LOSER_ALWAYS, 100))
    with pytest.raises(ScenarioError) as err:
        validate_scenario(s)
    assert err.value.category == "tie_fee"


def test_validate_requires_multi_periods():
    s = Scenario(mechanism="multi_period_open", ceiling=5, valuations=(350, 350),
                 good=DIVISIBLE, fee_policy=FeePolicy(LOSER_ALWAYS, 100))
    with pytest.raises(ScenarioError) as err:
        validate_scenario(s)
    assert err.value.category == "periods"


# --- legal_actions -------------------------------------------------------

def test_legal_opening_move_is_full_grid():
    s = make()
    assert legal_actions(s) == (PASS, 1, 2, 3, 4, 5)


def test_legal_after_standing_bid_matches_grid_filter():
    s = make(mechanism="open_sequential")
    st, _ = play(s, [4])
    # oracle: enumerate the grid and keep levels at least increment above 4
    expected = (PASS,) + tuple(b for b in range(1, 6) if b >= 4 + s.increment)
    assert legal_actions(s, st) == expected == (PASS, 5)


def test_legal_after_ceiling_bid_is_pass_only():
    s = make(mechanism="open_sequential")
    st, _ = play(s, [5])
    assert legal_actions(s, st) == (PASS,)


def test_legal_respects_increment():
    s = make(mechanism="open_sequential", increment=2)
    st, _ = play(s, [3])
    assert legal_actions(s, st) == (PASS, 5)


def test_legal_on_terminal_state_raises():
    s = make(mechanism="open_sequential")
    st, out = play(s, [4, PASS])
    assert out is not None
    with pytest.raises(MechanismError):
        legal_actions(s, st)


# --- allocate ------------------------------------------------------------

def test_vickrey_divisible_tie_splits():
    # paper: both bid $4 on a divisible good and get -$0.25 each
    s = make(mechanism="vickrey_min_price", good=DIVISIBLE)
    out = allocate(s, 4, 4)
    assert out.allocation == SPLIT
    assert out.payoffs == (-25, -25)
    assert out.prices_paid == (200, 200)


def test_vickrey_indivisible_winner_pays_losing_bid():
    s = make(mechanism="vickrey_min_price")
    out = allocate(s, 5, 4)
    assert out.allocation == ("winner", 0)
    assert out.prices_paid == (400, 0)
    assert out.payoffs == (-50, -100)


def test_vickrey_indivisible_tie_resets():
    s = make(mechanism="vickrey_min_price")
    out = allocate(s, 4, 4)
    assert out.allocation == RESET
    assert out.payoffs == (-150, -150)


def test_vickrey_winner_over_pass_pays_zero():
    s = make(mechanism="vickrey_min_price")
    out = allocate(s, 3, PASS)
    assert out.payoffs == (350, -100)
    assert out.prices_paid == (0, 0)


def test_double_pass_is_no_sale_under_every_policy():
    for mechanism in ("sealed_first_price", "vickrey_min_price"):
        for fee_kind in (NO_FEE, LOSER_ALWAYS, LOSER_IF_ENTERED):
            s = make(mechanism=mechanism, fee_kind=fee_kind)
            out = allocate(s, PASS, PASS)
            assert out.allocation == NO_SALE
            assert out.payoffs == (0, 0)


def test_sealed_divisible_tie_splits_price_and_good():
    s = make(good=DIVISIBLE)
    out = allocate(s, 2, 2)
    assert out.payoffs == (75, 75)


def test_sealed_indivisible_tie_follows_coin():
    s = make()
    heads = allocate(s, 4, 4, tie_coin=0)
    tails = allocate(s, 4, 4, tie_coin=1)
    assert heads.allocation == ("winner", 0)
    assert tails.allocation == ("winner", 1)
    assert heads.payoffs == (-50, -100)
    assert tails.payoffs == (-100, -50)


def test_loser_if_entered_spares_passers():
    s = make(fee_kind=LOSER_IF_ENTERED)
    assert allocate(s, 3, PASS).payoffs == (50, 0)
    assert allocate(s, 3, 2).payoffs == (50, -100)


def test_allocate_rejects_illegal_level():
    s = make()
    with pytest.raises(MechanismError):
        allocate(s, 6, 2)
    with pytest.raises(MechanismError):
        allocate(s, -1, 2)


# --- expected_payoffs ----------------------------------------------------

def test_expected_payoffs_on_indivisible_tie_averages_coin():
    s = make()
    # oracle: average the two allocate outcomes directly
    heads = allocate(s, 4, 4, 0).payoffs
    tails = allocate(s, 4, 4, 1).payoffs
    want = tuple(Fraction(h + t, 2) for h, t in zip(heads, tails))
    assert expected_payoffs(s, 4, 4) == want == (-75, -75)


def test_expected_payoffs_without_tie_equals_allocate():
    s = make()
    assert expected_payoffs(s, 4, 3) == (-50, -100)
    sd = make(good=DIVISIBLE)
    assert expected_payoffs(sd, 2, 2) == (75, 75)


def grid_scenarios(max_ceiling=6):
    for mechanism in ("sealed_first_price", "vickrey_min_price"):
        for good in (DIVISIBLE, INDIVISIBLE):
            for fee_kind in (NO_FEE, LOSER_ALWAYS, LOSER_IF_ENTERED):
                for ceiling in (2, 4, max_ceiling):
                    yield make(mechanism=mechanism, good=good, fee_kind=fee_kind,
                               ceiling=ceiling, valuations=(350, 300))


def test_expectation_is_exact_coin_mean_on_all_grids():
    for s in grid_scenarios():
        for a, b in itertools.product(s.grid(), repeat=2):
            heads = allocate(s, a, b, 0).payoffs
            tails = allocate(s, a, b, 1).payoffs
            want = tuple(Fraction(h + t, 2) for h, t in zip(heads, tails))
            assert expected_payoffs(s, a, b) == want


# --- seq_step ------------------------------------------------------------

def test_open_sequential_bid_then_pass():
    s = make(mechanism="open_sequential")
    st, out = play(s, [4, PASS])
    assert st.terminal
    assert out.allocation == ("winner", 0)
    assert out.payoffs == (-50, -100)


def test_open_sequential_pass_then_bid():
    s = make(mechanism="open_sequential")
    st, out = play(s, [PASS, 1])
    assert out.allocation == ("winner", 1)
    assert out.payoffs[1] == 250
    assert out.payoffs[0] == -100  # loser_always charges the passer too


def test_open_sequential_overbid_wins():
    s = make(mechanism="open_sequential")
    st, out = play(s, [3, 4])
    assert out.allocation == ("winner", 1)
    assert out.payoffs == (-100, -50)


def test_open_sequential_double_pass_no_sale():
    s = make(mechanism="open_sequential")
    st, out = play(s, [PASS, PASS])
    assert out.allocation == NO_SALE
    assert out.payoffs == (0, 0)


def test_multi_period_ends_on_pass_against_standing_bid():
    s = make(mechanism="multi_period_open", periods=2, good=DIVISIBLE)
    st, out = play(s, [4, PASS])
    assert st.terminal
    assert out.payoffs == (-50, -100)


def test_multi_period_stopper_cannot_reenter():
    # opener stops, responder bids once, auction resolves immediately
    s = make(mechanism="multi_period_open", periods=2, good=DIVISIBLE)
    st, out = play(s, [PASS, 3])
    assert st.terminal
    assert out.allocation == ("winner", 1)
    assert out.payoffs == (-100, 50)


def test_multi_period_exhaustion_awards_last_bidder():
    s = make(mechanism="multi_period_open", periods=2, good=DIVISIBLE)
    st, out = play(s, [1, 2, 3, 4])
    assert st.terminal
    assert out.allocation == ("winner", 1)
    assert out.payoffs == (-100, -50)
    assert st.counts == (2, 2)


def test_seq_step_rejects_illegal_action_and_terminal_step():
    s = make(mechanism="open_sequential")
    st, _ = play(s, [4])
    with pytest.raises(MechanismError):
        seq_step(s, st, 4)  # not above the standing bid
    st, _ = play(s, [4, PASS])
    with pytest.raises(MechanismError):
        seq_step(s, st, PASS)


def test_price_never_decreases_and_history_bounded():
    s = make(mechanism="multi_period_open", periods=2, good=DIVISIBLE)
    st = initial_state(s)
    last = st.price
    for action in (1, 3, 4, 5):
        st, out = seq_step(s, st, action)
        assert st.price >= last
        last = st.price
        assert st.counts[0] <= 2 and st.counts[1] <= 2
    assert out is not None
    s1 = make(mechanism="open_sequential")
    st, out = play(s1, [2, 3])
    assert len(st.history) == 2 and out is not None


# --- observation ---------------------------------------------------------

def test_simultaneous_observation_is_bandit_start():
    s = make()
    assert observation(s, None, 0) == ("start",)
    assert observation(s, None, 1) == ("start",)


def test_open_sequential_responder_sees_openers_level():
    s = make(mechanism="open_sequential")
    st, _ = play(s, [4])
    assert observation(s, st, 0) == ("start",)
    assert observation(s, st, 1) == ("seen", 4)
    st, _ = play(s, [PASS])
    assert observation(s, st, 1) == ("seen", 0)


def test_multi_period_observation_echoes_state():
    s = make(mechanism="multi_period_open", periods=2, good=DIVISIBLE)
    st, _ = play(s, [2, 3])
    # agent 0 used 1 bid, faces an opponent bid standing at 3
    assert observation(s, st, 0) == ("state", 3, 1, 1)
    assert observation(s, st, 1) == ("state", 3, 1, 0)


def test_observations_are_ordered_and_hashable():
    s = make(mechanism="multi_period_open", periods=2, good=DIVISIBLE)
    space = mech.decision_space(s)
    for agent in (0, 1):
        keys = list(space[agent])
        assert sorted(keys)  # total order holds
        assert len(set(keys)) == len(keys)


# --- payoff invariants ---------------------------------------------------

def test_first_price_monotonicity():
    for ceiling in (4, 6):
        s = make(ceiling=ceiling)
        for b in s.grid():
            winners = [a for a in s.grid() if a > b]
            for lo, hi in itertools.combinations(winners, 2):
                drop = allocate(s, lo, b).payoffs[0] - allocate(s, hi, b).payoffs[0]
                assert drop == 100 * (hi - lo)


def test_vickrey_own_bid_independence():
    for good in (DIVISIBLE, INDIVISIBLE):
        s = make(mechanism="vickrey_min_price", good=good, ceiling=6)
        for b in s.grid():
            wins = [allocate(s, a, b).payoffs[0] for a in s.grid() if a > b]
            assert len(set(wins)) <= 1


def test_allocation_conservation():
    for s in grid_scenarios():
        for a, b in itertools.product(s.grid(), repeat=2):
            for coin in (0, 1):
                out = allocate(s, a, b, coin)
                total = sum(out.fractions())
                if out.allocation in (NO_SALE, RESET):
                    assert total == 0
                else:
                    assert total == 1


def test_payoff_symmetry_under_agent_swap():
    s = make(valuations=(350, 300))
    swapped = make(valuations=(300, 350))
    for a, b in itertools.product(s.grid(), repeat=2):
        pa, pb = expected_payoffs(s, a, b)
        qa, qb = expected_payoffs(swapped, b, a)
        assert (pa, pb) == (qb, qa)
        out = allocate(s, a, b, tie_coin=0)
        mirrored = allocate(swapped, b, a, tie_coin=1)
        assert out.payoffs == mirrored.payoffs[::-1]


def test_no_fee_means_losers_get_zero():
    for mechanism in ("sealed_first_price", "vickrey_min_price"):
        s = make(mechanism=mechanism, fee_kind=NO_FEE)
        for a, b in itertools.product(s.grid(), repeat=2):
            for coin in (0, 1):
                out = allocate(s, a, b, coin)
                if out.allocation[0] != "winner":
                    continue
                loser = 1 - out.allocation[1]
                assert out.payoffs[loser] == 0


def test_winner_payoff_identity():
    # payoff = valuation * fraction - price - fees, with no fee for winners
    for s in grid_scenarios():
        for a, b in itertools.product(s.grid(), repeat=2):
            out = allocate(s, a, b, 0)
            if out.allocation[0] == "winner":
                w = out.allocation[1]
                assert out.payoffs[w] == s.valuations[w] - out.prices_paid[w]
            elif out.allocation == SPLIT:
                for i in (0, 1):
                    assert out.payoffs[i] == s.valuations[i] // 2 - out.prices_paid[i]


# --- serialization -------------------------------------------------------

def test_scenario_dict_round_trip():
    s = make(mechanism="vickrey_min_price", good=DIVISIBLE, valuations=(300, 300))
    assert scenario_from_dict(scenario_to_dict(s)) == s
    t = make(mechanism="multi_period_open", periods=2, good=DIVISIBLE)
    assert scenario_from_dict(scenario_to_dict(t)) == t


def test_scenario_from_dict_names_unknown_key():
    doc = scenario_to_dict(make())
    doc["celing"] = 5
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(doc)
    assert "celing" in str(err.value)


def test_scenario_from_dict_rejects_unknown_mechanism():
    doc = scenario_to_dict(make())
    doc["mechanism"] = "dutch"
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(doc)
    assert err.value.category == "mechanism"
