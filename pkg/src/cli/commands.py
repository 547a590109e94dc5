"""Command-line interface: run, query, acl and check"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO

from colorama import Fore, Style

from src.accesscontrol.acl_store import grant_lines
from src.core.classifier import classify_rule
from src.core.errors import ScenarioError, UnknownPeer
from src.core.model import SourcePos
from src.netsim.trace import Trace
from src.netsim.world import SimulationSettings, World, build_world, query, run, run_until_quiescent
from src.parser.program import Program
from src.parser.scenario_parser import load_program, parse_atom
from src.scenarios.scenario_registry import ScenarioRegistry
from src.utils.config_loader import ConfigLoader
from src.utils.logging_setup import setup_from_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_ROUND_CAP = 2


@dataclass(frozen=True)
class RunConfig:
    scenario_path: Path
    rounds: int = 1
    until_quiescent: bool = False
    max_rounds: Optional[int] = None
    trace_path: Optional[Path] = None
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")


def _paint(text: str, color: str, stream: TextIO) -> str:
    if getattr(stream, "isatty", lambda: False)():
        return f"{color}{text}{Style.RESET_ALL}"
    return text


def ok(message: str, stream: Optional[TextIO] = None) -> None:
    stream = stream or sys.stdout
    print(f"{_paint('✓', Fore.GREEN, stream)} {message}", file=stream)


def warn(message: str, stream: Optional[TextIO] = None) -> None:
    stream = stream or sys.stdout
    print(f"{_paint('⚠', Fore.YELLOW, stream)} {message}", file=stream)


def _load(scenario: str) -> Program:
    """Parse a bundled scenario or a file; unreadable files become ScenarioError"""
    path = ScenarioRegistry.resolve(scenario)
    try:
        return load_program(path)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file {path} not found") from None
    except UnicodeDecodeError as exc:
        line = exc.object[:exc.start].count(b"\n") + 1
        raise ScenarioError(
            f"scenario file {path} is not valid UTF-8 (byte {exc.start})", SourcePos(line, 1)
        ) from None
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc.strerror or exc}") from None


def _default_rounds(scenario: str, config: Dict[str, Any]) -> int:
    entry = ScenarioRegistry.get_scenario(scenario)
    if entry is not None and not Path(scenario).exists():
        return int(entry["rounds"])
    return int(config["simulation"]["default_rounds"])


def _simulate(program: Program, cfg: RunConfig, settings: SimulationSettings):
    """Run the world per `cfg`; returns (world, trace, capped)"""
    world = build_world(program)
    cap = cfg.max_rounds if cfg.max_rounds is not None else settings.max_rounds
    if cfg.until_quiescent:
        world, trace, quiescent = run_until_quiescent(world, settings, cap)
        return world, trace, not quiescent
    if cfg.rounds > cap:
        world, trace = run(world, cap, settings)
        return world, trace, True
    world, trace = run(world, cfg.rounds, settings)
    return world, trace, False


def summary_lines(world: World, trace: Trace) -> List[str]:
    """Fact count per relation across all peers, then the rejection total"""
    counts: Counter = Counter()
    for state in world.states():
        for fact in state.edb:
            counts[str(fact.ref)] += 1
        for fact in state.idb:
            counts[str(fact.ref)] += 1
    lines = [f"  {ref}: {counts[ref]} fact(s)" for ref in sorted(counts)]
    lines.append(f"  rejections: {trace.rejections()}")
    return lines


def cmd_run(cfg: RunConfig, config: Dict[str, Any], out: Optional[TextIO] = None) -> int:
    """Print the trace (or write it to `cfg.trace_path`) and a summary

    Returns:
        EXIT_OK, or EXIT_ROUND_CAP when the round cap cut the run short
    """
    out = out or sys.stdout
    program = _load(str(cfg.scenario_path))
    settings = replace(SimulationSettings.from_config(config), seed=cfg.seed)
    world, trace, capped = _simulate(program, cfg, settings)

    if cfg.trace_path is not None:
        trace.write(cfg.trace_path)
    else:
        out.write(trace.render())

    if capped:
        warn(f"round cap hit after {world.round} round(s)", out)
    else:
        ok(f"{world.round} round(s) executed", out)
    for line in summary_lines(world, trace):
        print(line, file=out)
    return EXIT_ROUND_CAP if capped else EXIT_OK


def cmd_query(program: Program, rounds: int, who: str, pattern_text: str,
              config: Dict[str, Any], out: Optional[TextIO] = None) -> int:
    """Run `rounds` rounds, then print the facts matching the pattern that `who` may read"""
    pattern = parse_atom(pattern_text)
    world, _ = run(build_world(program), rounds, SimulationSettings.from_config(config))
    for fact in query(world, who, pattern):
        print(fact, file=out)
    return EXIT_OK


def cmd_acl_list(program: Program, peer: str, out: Optional[TextIO] = None) -> int:
    """Grants on `peer`'s relations in `grant` syntax"""
    world = build_world(program)
    principal = world.acl.principals.get(peer)
    if principal is None or not principal.is_peer:
        raise UnknownPeer(f"peer {peer} is not declared")
    for line in grant_lines(world.acl, peer):
        print(line, file=out)
    return EXIT_OK


def cmd_check(program: Program, out: Optional[TextIO] = None) -> int:
    """Classification table; kind E rules are the delegation points

    Rules reading `acl@peer` are classified like any other local rule.
    """
    decls = program.relation_index()
    rows = sorted((rule.host, classify_rule(rule, rule.host, decls), rule.text) for rule in program.rules)
    for host, kind, text in rows:
        print(f"{host} {kind.value} {text}", file=out)
    ok(f"{len(program.peers)} peer(s), {len(program.declarations)} relation(s), "
       f"{len(program.facts)} fact(s), {len(program.rules)} rule(s)", out)
    for kind in sorted({kind for _, kind, _ in rows}):
        print(f"  {kind.value}: {kind.description}", file=out)
    return EXIT_OK


def cmd_scenarios(out: Optional[TextIO] = None) -> int:
    """Bundled scenarios with their default round counts"""
    for name, entry in sorted(ScenarioRegistry.get_all_scenarios().items()):
        print(f"{name} rounds={entry['rounds']} {entry['description']}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="webdamlog",
        description="Multi-peer WebdamLog simulator with access control and provenance",
    )
    parser.add_argument("--config", type=Path, default=None, help="configuration file (JSON)")
    parser.add_argument("--log-level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="override logging.level")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and print its trace")
    run_p.add_argument("scenario", help="scenario file or bundled scenario name")
    mode = run_p.add_mutually_exclusive_group()
    mode.add_argument("--rounds", type=int, default=None)
    mode.add_argument("--until-quiescent", action="store_true")
    run_p.add_argument("--max-rounds", type=int, default=None)
    run_p.add_argument("--trace", type=Path, default=None, help="write the trace here instead of stdout")
    run_p.add_argument("--seed", type=int, default=None, help="label recorded in the trace header")

    query_p = sub.add_parser("query", help="run, then list facts readable by a principal")
    query_p.add_argument("scenario")
    query_p.add_argument("pattern", help='e.g. "allPhotos@Alice($f)"')
    query_p.add_argument("--rounds", type=int, default=None)
    query_p.add_argument("--as", dest="who", required=True, help="principal to query as")

    acl_p = sub.add_parser("acl", help="access control lists")
    acl_sub = acl_p.add_subparsers(dest="acl_command", required=True)
    list_p = acl_sub.add_parser("list", help="grants on a peer's relations, in grant syntax")
    list_p.add_argument("peer")
    list_p.add_argument("scenario")

    check_p = sub.add_parser("check", help="parse, validate and classify rules")
    check_p.add_argument("scenario")

    sub.add_parser("scenarios", help="list the bundled scenarios")
    return parser


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None,
         err: Optional[TextIO] = None) -> int:
    """CLI entry point; returns the process exit code

    Invalid scenarios, patterns and arguments print one `⚠` line to `err`
    and return EXIT_INVALID.
    """
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    config = ConfigLoader.load_config(args.config)
    setup_from_config(config, args.log_level)

    try:
        if args.command == "run":
            rounds = args.rounds if args.rounds is not None else _default_rounds(args.scenario, config)
            if rounds < 0:
                raise ScenarioError("--rounds must be >= 0")
            seed = args.seed if args.seed is not None else int(config["trace"]["seed"])
            cfg = RunConfig(
                scenario_path=ScenarioRegistry.resolve(args.scenario),
                rounds=rounds,
                until_quiescent=args.until_quiescent,
                max_rounds=args.max_rounds,
                trace_path=args.trace,
                seed=seed,
            )
            return cmd_run(cfg, config, out)
        if args.command == "query":
            rounds = args.rounds if args.rounds is not None else _default_rounds(args.scenario, config)
            return cmd_query(_load(args.scenario), rounds, args.who, args.pattern, config, out)
        if args.command == "acl":
            return cmd_acl_list(_load(args.scenario), args.peer, out)
        if args.command == "scenarios":
            return cmd_scenarios(out)
        return cmd_check(_load(args.scenario), out)
    except ScenarioError as exc:
        logger.debug("invalid input: %r", exc)
        warn(str(exc), err)
        return EXIT_INVALID
