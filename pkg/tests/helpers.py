"""Shortcuts shared by the test modules"""

from src.netsim.world import build_world, run
from src.parser.scenario_parser import parse_program
from src.scenarios.scenario_registry import ScenarioRegistry


def scenario_text(name: str) -> str:
    return ScenarioRegistry.path_of(name).read_text(encoding="utf-8")


def run_text(text: str, rounds: int):
    return run(build_world(parse_program(text)), rounds)


def run_scenario(name: str, rounds: int):
    return run_text(scenario_text(name), rounds)


def fact_lines(trace, round_no: int, section: str):
    return list(getattr(trace.rounds[round_no - 1], section))
