"""Deterministic lockstep simulation of a world of peers

Items emitted in round n are delivered in round n+1. Within a round every
peer steps against the same immutable snapshot; cross-peer effects only
travel through the outboxes merged at the barrier.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from src.accesscontrol.acl_store import AclStore, Grant, build_store, grant, revoke
from src.core.errors import UnknownPrincipal, UnknownRelation
from src.core.model import Atom, Fact, PrincipalId, Token
from src.engine.evaluator import unify, view_for
from src.engine.peer_state import DEFAULT_SETTINGS, EngineSettings, InboxItem, PeerState
from src.engine.step import seal_tokens, step
from src.netsim.trace import RoundTrace, Trace, edb_lines, idb_lines
from src.parser.program import Program

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimulationSettings:
    max_rounds: int = 1000
    parallel_peers: bool = False
    max_workers: int = 4
    seed: int = 0
    engine: EngineSettings = DEFAULT_SETTINGS

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> "SimulationSettings":
        simulation = config.get("simulation", {})
        return cls(
            max_rounds=int(simulation.get("max_rounds", 1000)),
            parallel_peers=bool(simulation.get("parallel_peers", False)),
            max_workers=int(simulation.get("max_workers", 4)),
            seed=int(config.get("trace", {}).get("seed", 0)),
            engine=EngineSettings.from_config(config),
        )


DEFAULT_SIMULATION = SimulationSettings()


@dataclass(frozen=True)
class World:
    peers: Mapping[str, PeerState]
    acl: AclStore
    in_flight: Tuple[InboxItem, ...] = ()
    round: int = 0
    token_counter: int = 1

    def __post_init__(self):
        object.__setattr__(self, "peers", MappingProxyType(dict(self.peers)))

    @property
    def peer_ids(self) -> List[str]:
        return sorted(self.peers)

    def states(self) -> List[PeerState]:
        return [self.peers[p] for p in self.peer_ids]

    def grant(self, g: Grant, grantor: Union[PrincipalId, str]) -> "World":
        """Apply a grant between rounds; new acl facts get fresh tokens"""
        store, next_id = grant(self.acl, g, grantor).assign_tokens(self.token_counter)
        return replace(self, acl=store, token_counter=next_id)

    def revoke(self, g: Grant, grantor: Union[PrincipalId, str]) -> "World":
        """Apply a revocation between rounds"""
        return replace(self, acl=revoke(self.acl, g, grantor))

    def snapshot(self) -> Tuple:
        """Everything a later round depends on, rendered for comparison"""
        states = self.states()
        delegated = sorted(f"{r.host} {r.author} {r} {r.premise}" for s in states for r in s.delegated_in)
        contributed = sorted(f"{f} {p}" for s in states for f, p in s.contributed.items())
        return (
            tuple(edb_lines(states)),
            tuple(idb_lines(states)),
            tuple(delegated),
            tuple(contributed),
            tuple(sorted(str(item) for item in self.in_flight)),
        )


def build_world(program: Program) -> World:
    """Initial world of a validated program; tokens follow sorted fact order"""
    acl = build_store(program.peers + program.principals, program.declarations)
    for g in program.grants:
        acl = grant(acl, g, acl.decl(g.target).owner)

    unique: Dict[Fact, Fact] = {}
    for fact in program.facts:
        unique.setdefault(fact, fact)
    next_id = 1
    edb: Dict[str, List[Fact]] = {p.name: [] for p in program.peers}
    for fact in sorted(unique.values(), key=lambda f: f.sort_key):
        edb[fact.ref.peer].append(fact.with_token(Token(next_id, fact.ref)))
        next_id += 1
    acl, next_id = acl.assign_tokens(next_id)

    peers = {}
    for peer in program.peers:
        name = peer.name
        peers[name] = PeerState(
            id=name,
            decls=tuple(sorted((d for d in program.declarations if d.ref.peer == name),
                               key=lambda d: d.ref.sort_key)),
            edb=frozenset(edb[name]),
            installed=tuple(sorted((r for r in program.rules if r.host == name),
                                   key=lambda r: r.sort_key)),
        )
    return World(peers=peers, acl=acl, token_counter=next_id)


def _step_all(world: World, settings: SimulationSettings):
    inboxes: Dict[str, List[InboxItem]] = {p: [] for p in world.peers}
    for item in world.in_flight:
        inboxes[item.target].append(item)
    peer_ids = world.peer_ids

    def run_peer(peer_id: str):
        inbox = sorted(inboxes[peer_id], key=lambda i: i.sort_key)
        return step(world.peers[peer_id], inbox, world.acl, settings.engine)

    if settings.parallel_peers and len(peer_ids) > 1:
        with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
            results = list(pool.map(run_peer, peer_ids))
    else:
        results = [run_peer(p) for p in peer_ids]
    return list(zip(peer_ids, results))


def advance(world: World, settings: SimulationSettings = DEFAULT_SIMULATION) -> Tuple[World, RoundTrace]:
    """One synchronous round for every peer, followed by the barrier"""
    round_no = world.round + 1
    logger.debug("round %d: %d item(s) in flight", round_no, len(world.in_flight))

    next_id = world.token_counter
    peers: Dict[str, PeerState] = {}
    outbox: List[InboxItem] = []
    rejected: List[str] = []
    for peer_id, result in _step_all(world, settings):
        state, next_id = seal_tokens(result.state, next_id)
        peers[peer_id] = state
        outbox.extend(result.outbox)
        rejected.extend(result.rejected)

    outbox.sort(key=lambda i: i.sort_key)
    next_world = replace(world, peers=peers, in_flight=tuple(outbox), round=round_no,
                         token_counter=next_id)
    round_trace = RoundTrace.record(round_no, next_world.states(), outbox, rejected)
    return next_world, round_trace


def run(
    world: World,
    rounds: int,
    settings: SimulationSettings = DEFAULT_SIMULATION,
) -> Tuple[World, Trace]:
    """Advance the world by exactly `rounds` rounds

    Args:
        world: Starting world
        rounds: Number of rounds, 0 or more
        settings: Simulation settings; the seed only labels the trace

    Returns:
        The final world and the trace of every round
    """
    if rounds < 0:
        raise ValueError("rounds must be >= 0")
    trace = Trace(seed=settings.seed)
    for _ in range(rounds):
        world, round_trace = advance(world, settings)
        trace.append(round_trace)
    return world, trace


def run_until_quiescent(
    world: World,
    settings: SimulationSettings = DEFAULT_SIMULATION,
    max_rounds: Optional[int] = None,
) -> Tuple[World, Trace, bool]:
    """Run until a round leaves the world unchanged; False when the cap is hit first"""
    cap = settings.max_rounds if max_rounds is None else max_rounds
    trace = Trace(seed=settings.seed)
    for _ in range(cap):
        before = world.snapshot()
        world, round_trace = advance(world, settings)
        trace.append(round_trace)
        if world.snapshot() == before:
            logger.debug("quiescent after %d round(s)", world.round)
            return world, trace, True
    logger.warning("round cap of %d hit before quiescence", cap)
    return world, trace, False


def query(world: World, who: Union[PrincipalId, str], pattern: Atom) -> List[Fact]:
    """Facts matching `pattern` that `who` may read, sorted"""
    name = who.name if isinstance(who, PrincipalId) else who
    if name not in world.acl.principals:
        raise UnknownPrincipal(f"principal {name} is not declared")
    principal = world.acl.principals[name]
    if not pattern.ref.is_ground:
        raise UnknownRelation(f"query relation must be ground: {pattern.ref}")
    world.acl.decl(pattern.ref)

    state = world.peers[pattern.ref.peer]
    view = view_for(principal, state, world.acl)
    found = [fact for fact, _ in view.lookup(pattern.ref) if unify(pattern, fact, {}) is not None]
    return sorted(found, key=lambda f: f.sort_key)
