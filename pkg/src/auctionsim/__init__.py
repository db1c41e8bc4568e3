"""Two-bidder auction simulator: tabular RL bidders vs exact equilibria."""

from importlib import resources

from .mechanisms import (  # noqa: F401
    PASS,
    FeePolicy,
    Outcome,
    Scenario,
    ScenarioError,
    allocate,
    expected_payoffs,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
)
from .learners import LearnerConfig, QTable  # noqa: F401
from .equilibrium import backward_induction, build_bimatrix, pure_nash  # noqa: F401
from .harness import Experiment, RunResult, multi_seed, train  # noqa: F401


def bundled_scenario_path(name: str):
    """Path to a scenario config shipped with the package (e.g. 'open-5')."""
    return resources.files("auctionsim").joinpath("scenarios", f"{name}.json")


def bundled_scenario_names() -> tuple[str, ...]:
    files = resources.files("auctionsim").joinpath("scenarios")
    return tuple(sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json")))
