"""Engine against the brute-force reference on random variable-free worlds"""

import random
from dataclasses import replace

from hypothesis import given, settings

from src.accesscontrol.acl_store import is_acl_relation
from src.core.classifier import is_local_body
from src.engine.evaluator import evaluate_sandboxed, state_facts, view_for
from src.engine.peer_state import EngineSettings
from src.netsim.world import SimulationSettings, advance, build_world
from src.parser.scenario_parser import parse_program
from tests.oracle import generate_world, oracle_readable, oracle_run, random_worlds

UNCAPPED = SimulationSettings(engine=EngineSettings(max_alternatives=0))


def gatom(fact):
    return (fact.ref.relation, fact.ref.peer, fact.args)


def gprov(prov):
    return frozenset(frozenset((t.source.relation, t.source.peer) for t in d) for d in prov.alternatives)


@settings(max_examples=100, deadline=None)
@given(random_worlds)
def test_engine_matches_oracle(generated):
    oracle = generated.oracle
    world = build_world(parse_program(generated.text))
    expected = oracle_run(oracle, generated.rounds)

    for round_no, oracle_state in enumerate(expected, start=1):
        world, _ = advance(world, UNCAPPED)
        for peer in oracle.peers:
            state = world.peers[peer]
            assert {gatom(f) for f in state.edb} == oracle_state[peer].edb, f"edb of {peer} in round {round_no}"
            assert {gatom(f) for f in state.idb} == set(oracle_state[peer].idb), f"idb of {peer} in round {round_no}"

        for who in oracle.peers + oracle.principals:
            principal = world.acl.principal(who)
            seen = {
                gatom(fact)
                for state in world.states()
                for fact, _ in view_for(principal, state, world.acl).facts()
                if not is_acl_relation(fact.ref)
            }
            assert seen == oracle_readable(oracle, oracle_state, who), f"readable by {who} in round {round_no}"


@settings(max_examples=100, deadline=None)
@given(random_worlds)
def test_delegated_rules_only_use_what_the_delegator_reads(generated):
    oracle = generated.oracle
    world = build_world(parse_program(generated.text))

    for _ in range(generated.rounds):
        before = world
        world, _ = advance(world, UNCAPPED)
        for peer, state in world.peers.items():
            # the state the round evaluated its rules against
            evaluated = replace(state, edb=before.peers[peer].edb)
            known = {gatom(f): gprov(p) for f, p in state_facts(evaluated, world.acl)}
            for rule in state.delegated_in:
                if not is_local_body(rule, peer):
                    continue
                derived = evaluate_sandboxed(rule, evaluated, world.acl)
                if not derived:
                    continue
                for atom in rule.body:
                    fact = gatom(atom.to_fact())
                    assert fact in known
                    assert oracle.readable(rule.delegator.name, fact, known[fact])
                assert all(f.author == rule.delegator for f in derived)


def test_generated_worlds_span_the_size_bounds():
    sizes = []
    for seed in range(200):
        lines = generate_world(random.Random(seed)).text.splitlines()
        sizes.append(tuple(sum(line.startswith(p) for line in lines) for p in ("peer ", "rule at ", "fact ")))
    peers, rules, facts = (max(column) for column in zip(*sizes))
    assert peers == 5
    assert 12 < rules <= 20
    assert facts <= 50
