"""Command-line front door: run, solve, verify, and sweep auction scenarios.

Exit codes: 0 success (verify: consistent), 2 config error, 3 verify found
the run outside the equilibrium reference, 4 runtime failure. Diagnostics
go to stderr only; data files and stdout never mix with logs.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import equilibrium, harness, learners, mechanisms

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INCONSISTENT = 3
EXIT_RUNTIME = 4

_EXPERIMENT_KEYS = {"learners", "learner_a", "learner_b", "episodes", "last_n",
                    "convergence_window"}
_LEARNER_KEYS = {"algorithm", "alpha", "gamma", "epsilon_start", "epsilon_min",
                 "decay_fraction", "tie_break"}


class ConfigError(ValueError):
    pass


def _load_document(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        bundled = resources.files("auctionsim").joinpath("scenarios", f"{path}.json")
        if "/" not in path and bundled.is_file():
            return json.loads(bundled.read_text())
        raise ConfigError(f"scenario file not found: {path}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed scenario file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"scenario file {path} must hold a JSON object")
    return doc


def parse_scenario(path: str) -> mechanisms.Scenario:
    """Load and validate the Scenario part of a config file."""
    doc = _load_document(path)
    scenario_doc = {k: v for k, v in doc.items() if k not in _EXPERIMENT_KEYS}
    return mechanisms.scenario_from_dict(scenario_doc)


def _learner_config(doc: dict, label: str) -> learners.LearnerConfig:
    unknown = set(doc) - _LEARNER_KEYS
    if unknown:
        raise ConfigError(f"unknown {label} key: {sorted(unknown)[0]}")
    return learners.LearnerConfig(**doc).validate()


def parse_experiment(path: str, *, seed=None, episodes=None, last_n=None) -> harness.Experiment:
    """Assemble an Experiment from a config file plus flag overrides."""
    doc = _load_document(path)
    scenario = mechanisms.scenario_from_dict(
        {k: v for k, v in doc.items() if k not in _EXPERIMENT_KEYS})
    base = doc.get("learners", {})
    cfg_a = _learner_config({**base, **doc.get("learner_a", {})}, "learner")
    cfg_b = _learner_config({**base, **doc.get("learner_b", {})}, "learner")
    n_episodes = episodes if episodes is not None else int(doc.get("episodes", 3000))
    # window defaults shrink with short runs; explicit values are kept as-is
    if last_n is None:
        last_n = int(doc["last_n"]) if "last_n" in doc else min(100, n_episodes)
    if "convergence_window" in doc:
        window = int(doc["convergence_window"])
    else:
        window = min(200, n_episodes)
    return harness.Experiment(
        scenario=scenario,
        learner_a=cfg_a,
        learner_b=cfg_b,
        episodes=n_episodes,
        seed=seed if seed is not None else (scenario.seed_hint or 0),
        last_n=last_n,
        convergence_window=window,
    )


def _out_dir(inv) -> Path:
    out = Path(inv.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(inv) -> int:
    exp = parse_experiment(inv.scenario, seed=inv.seed, episodes=inv.episodes,
                           last_n=inv.last_n)
    result = harness.train(exp)
    out = _out_dir(inv)
    harness.write_episodes_csv(result, out / "episodes.csv")
    harness.write_heatmap_csv(result, out / "heatmap.csv")
    harness.write_summary_json(result, out / "summary.json")
    if inv.dump_tables:
        learners.dump_table_csv(result.tables[0], out / "qtable_a.csv")
        learners.dump_table_csv(result.tables[1], out / "qtable_b.csv")
    return EXIT_OK


def solve_report(scenario: mechanisms.Scenario) -> dict:
    if scenario.simultaneous:
        game = equilibrium.build_bimatrix(scenario)
        eq = equilibrium.equilibrium_set(game)
        return {
            "mechanism": scenario.mechanism,
            "pure_nash": [list(ne) for ne in eq.pure_nash],
            "maximin": [
                {"value_cents": float(eq.maximin_values[i]),
                 "actions": list(eq.maximin_actions[i])}
                for i in (0, 1)
            ],
            "dominance": [
                {str(a): kind for a, kind in sorted(equilibrium.dominant_actions(game, i).items())}
                for i in (0, 1)
            ],
        }
    spe = equilibrium.backward_induction(scenario)
    return {
        "mechanism": scenario.mechanism,
        "spe_path": [[agent + 1, action] for agent, action in spe.path],
        "spe_payoffs_cents": list(spe.path_payoffs),
        "spe_strategy": [
            {mechanisms.obs_to_str(obs): act
             for (agent, obs), act in sorted(spe.strategy.items()) if agent == i}
            for i in (0, 1)
        ],
    }


def cmd_solve(inv) -> int:
    scenario = parse_scenario(inv.scenario)
    report = solve_report(scenario)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if inv.out is not None:
        (_out_dir(inv) / "equilibrium.json").write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(inv) -> int:
    exp = parse_experiment(inv.scenario, seed=inv.seed, episodes=inv.episodes,
                           last_n=inv.last_n)
    result = harness.train(exp)
    verdict = result.verdict
    label = "consistent" if verdict.consistent else "inconsistent"
    detail = f" ({verdict.note})" if verdict.note else ""
    if result.greedy_path is not None:
        behavior = "path " + ",".join(f"{a + 1}:{lvl}" for a, lvl in result.greedy_path)
    else:
        behavior = f"joint action ({result.greedy[0]},{result.greedy[1]})"
    sys.stdout.write(f"{label}{detail}: {behavior}\n")
    return EXIT_OK if verdict.consistent else EXIT_INCONSISTENT


def cmd_sweep(inv) -> int:
    seeds = [int(part) for part in inv.seeds.split(",") if part != ""]
    if not seeds:
        raise ConfigError("sweep needs at least one seed")
    exp = parse_experiment(inv.scenario, episodes=inv.episodes, last_n=inv.last_n)
    report = harness.multi_seed(exp, seeds)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if inv.out is not None:
        (_out_dir(inv) / "sweep.json").write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auctionsim",
        description="Train RL bidders in discrete auctions and check them against exact equilibria.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeds=False):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--episodes", type=int, default=None)
        p.add_argument("--last-n", dest="last_n", type=int, default=None)
        if seeds:
            p.add_argument("--seeds", required=True, help="comma-separated seed list")
        else:
            p.add_argument("--seed", type=int, default=None)

    p_run = sub.add_parser("run", help="train and write episodes/heatmap/summary files")
    common(p_run)
    p_run.set_defaults(out="out")
    p_run.add_argument("--dump-tables", action="store_true", help="also write Q-table CSVs")
    p_run.set_defaults(func=cmd_run)

    p_solve = sub.add_parser("solve", help="exact equilibrium report for a scenario")
    common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="train, then check Nash membership")
    common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="train over a seed list and aggregate")
    common(p_sweep, seeds=True)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        inv = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return inv.func(inv)
    except (ConfigError, mechanisms.ScenarioError, learners.LearnerError,
            harness.ExperimentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
