from ._pevgame import (
    InfeasibleScenario,
    Scenario,
    ScenarioError,
    __version__,
    certify,
    default_scenario,
    desk_scenario,
    load_scenario,
    oracle_check,
    run,
    save_scenario,
    scenario_from_json,
)

__all__ = [
    "InfeasibleScenario",
    "Scenario",
    "ScenarioError",
    "__version__",
    "certify",
    "default_scenario",
    "desk_scenario",
    "load_scenario",
    "oracle_check",
    "run",
    "save_scenario",
    "scenario_from_json",
]
