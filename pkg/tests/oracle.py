"""Brute-force reference for variable-free worlds

A second, deliberately naive implementation of the round semantics, used
to cross-check the engine. Facts are plain (relation, peer, args) tuples;
a derivation is the set of relations its base facts came from, which is
all readability depends on. Delegation is inlined: a split rule is just
its remaining atoms, carried to the next peer with the prefix provenance.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from hypothesis import strategies as st

GAtom = Tuple[str, str, Tuple[str, ...]]  # relation, peer, args
Prov = FrozenSet[FrozenSet[Tuple[str, str]]]
GRule = Tuple[GAtom, Tuple[Tuple[GAtom, bool], ...]]  # head, ((atom, hidden), ...)

ONE: Prov = frozenset([frozenset()])


def product(provs: List[Prov]) -> Prov:
    acc = ONE
    for prov in provs:
        acc = frozenset(a | d for a in acc for d in prov)
    return acc


@dataclass
class OracleWorld:
    peers: List[str]
    principals: List[str]
    kinds: Dict[Tuple[str, str], str]  # (relation, peer) -> "ext" | "int"
    grants: Set[Tuple[str, str, str, str]]  # relation, peer, grantee, privilege
    facts: Dict[str, Set[GAtom]]
    rules: Dict[str, List[GRule]]

    def may(self, who: str, rel: str, peer: str, privilege: str) -> bool:
        if (rel, peer) not in self.kinds:
            return False
        if privilege != "owner" and who == peer:
            return True
        if (rel, peer, who, "owner") in self.grants:
            return True
        return (rel, peer, who, privilege) in self.grants

    def readable(self, who: str, atom: GAtom, prov: Prov) -> bool:
        if not self.may(who, atom[0], atom[1], "read"):
            return False
        return any(all(self.may(who, r, p, "read") for r, p in d) for d in prov)


@dataclass
class PeerSnapshot:
    edb: Set[GAtom] = field(default_factory=set)
    idb: Dict[GAtom, Prov] = field(default_factory=dict)

    def known(self) -> Dict[GAtom, Prov]:
        facts = {f: frozenset([frozenset([(f[0], f[1])])]) for f in self.edb}
        facts.update(self.idb)
        return facts


def _fires(world, who, body, known) -> Optional[List[Prov]]:
    """Provenances of the visible body atoms when every body fact is readable"""
    provs = []
    for atom, hidden in body:
        if atom not in known or not world.readable(who, atom, known[atom]):
            return None
        if not hidden:
            provs.append(known[atom])
    return provs


def oracle_round(world: OracleWorld, state: Dict[str, PeerSnapshot], in_flight: list):
    """One round for every peer; returns (next state, outgoing items)"""
    nxt: Dict[str, PeerSnapshot] = {}
    outgoing = []
    for p in world.peers:
        accepted, contributed, delegated = set(), defaultdict(frozenset), []
        for item in in_flight:
            kind = item[0]
            if kind == "msg":
                _, fact, author = item
                if fact[1] == p and world.kinds.get(fact[:2]) == "ext" and world.may(author, fact[0], p, "write"):
                    accepted.add(fact)
            elif kind == "view":
                _, fact, prov, author = item
                if fact[1] == p and world.kinds.get(fact[:2]) == "int" and world.may(author, fact[0], p, "write"):
                    contributed[fact] = contributed[fact] | prov
            elif item[1] == p:
                _, target, head, body, author, premise = item
                delegated.append((head, body, author, premise))

        rules = [(head, body, p, None) for head, body in world.rules.get(p, [])] + delegated
        local = [r for r in rules if all(atom[1] == p for atom, _ in r[1])]

        edb = state[p].edb
        idb: Dict[GAtom, Prov] = dict(contributed)
        while True:
            new = dict(contributed)
            known = PeerSnapshot(edb, idb).known()
            for head, body, author, premise in local:
                if head[1] != p or world.kinds.get(head[:2]) != "int":
                    continue
                provs = _fires(world, author, body, known)
                if provs is None or not world.may(author, head[0], p, "write"):
                    continue
                if premise is not None:
                    provs.append(premise)
                new[head] = new.get(head, frozenset()) | product(provs)
            if new == idb:
                break
            idb = new

        known = PeerSnapshot(edb, idb).known()
        next_edb = set(accepted)
        for head, body, author, premise in rules:
            if (head, body, author, premise) not in local:
                prefix = []
                for atom, hidden in body:
                    if atom[1] != p:
                        break
                    prefix.append((atom, hidden))
                provs = _fires(world, author, prefix, known)
                if provs is None:
                    continue
                if premise is not None:
                    provs.append(premise)
                rest = body[len(prefix):]
                carried = product(provs) if prefix or premise is not None else None
                outgoing.append(("rule", rest[0][0][1], head, rest, author, carried))
                continue
            provs = _fires(world, author, body, known)
            if provs is None:
                continue
            if premise is not None:
                provs.append(premise)
            kind = world.kinds.get(head[:2])
            if head[1] == p:
                if kind == "ext" and world.may(author, head[0], p, "write"):
                    next_edb.add(head)
            elif kind == "ext":
                outgoing.append(("msg", head, author))
            else:
                outgoing.append(("view", head, product(provs), author))
        nxt[p] = PeerSnapshot(next_edb, idb)
    return nxt, outgoing


def oracle_run(world: OracleWorld, rounds: int) -> List[Dict[str, PeerSnapshot]]:
    state = {p: PeerSnapshot(set(world.facts.get(p, ())), {}) for p in world.peers}
    history, in_flight = [], []
    for _ in range(rounds):
        state, in_flight = oracle_round(world, state, in_flight)
        history.append(state)
    return history


def oracle_readable(world: OracleWorld, state: Dict[str, PeerSnapshot], who: str) -> Set[GAtom]:
    return {
        fact
        for p in world.peers
        for fact, prov in state[p].known().items()
        if world.readable(who, fact, prov)
    }


# -- random variable-free worlds ---------------------------------------------

CONSTANTS = ("a", "b", "c")


@dataclass
class RandomWorld:
    text: str
    oracle: OracleWorld
    rounds: int


def _atom_text(atom: GAtom) -> str:
    return f"{atom[0]}@{atom[1]}({','.join(chr(34) + a + chr(34) for a in atom[2])})"


def generate_world(rng: random.Random) -> RandomWorld:
    peers = [f"P{i}" for i in range(rng.randint(1, 5))]
    principals = ["U0"] if rng.random() < 0.5 else []
    kinds: Dict[Tuple[str, str], str] = {}
    for i in range(rng.randint(len(peers), 2 * len(peers) + 1)):
        kind = rng.choice(["ext", "int"])
        kinds[(f"{kind[0]}{i}", rng.choice(peers))] = kind
    refs = sorted(kinds)
    ext_refs = [r for r in refs if kinds[r] == "ext"]

    facts: Dict[str, Set[GAtom]] = defaultdict(set)
    if ext_refs:
        for _ in range(rng.randint(0, 50)):
            rel, peer = rng.choice(ext_refs)
            facts[peer].add((rel, peer, (rng.choice(CONSTANTS),)))

    def atom() -> GAtom:
        rel, peer = rng.choice(refs)
        return (rel, peer, (rng.choice(CONSTANTS),))

    rules: Dict[str, List[GRule]] = defaultdict(list)
    for _ in range(rng.randint(0, 20)):
        host = rng.choice(peers)
        body = tuple((atom(), rng.random() < 0.2) for _ in range(rng.randint(1, 3)))
        rules[host].append((atom(), body))

    everyone = peers + principals
    grants = set()
    for _ in range(rng.randint(0, 12)):
        rel, peer = rng.choice(refs)
        grants.add((rel, peer, rng.choice(everyone), rng.choice(["read", "write"])))

    lines = [f"peer {p}" for p in peers] + [f"principal {u}" for u in principals]
    lines += [f"relation {kinds[r]} {r[0]}@{r[1]}/1 owner {r[1]}" for r in refs]
    lines += [f"fact {_atom_text(f)}" for p in peers for f in sorted(facts[p])]
    for host in peers:
        for head, body in rules[host]:
            items = [f"[hide {_atom_text(a)}]" if h else _atom_text(a) for a, h in body]
            lines.append(f"rule at {host}: {_atom_text(head)} :- {', '.join(items)}")
    lines += [f"grant {priv} on {rel}@{peer} to {who}" for rel, peer, who, priv in sorted(grants)]

    full_grants = grants | {(r[0], r[1], r[1], "owner") for r in refs}
    oracle = OracleWorld(peers, principals, kinds, full_grants, dict(facts), dict(rules))
    return RandomWorld("\n".join(lines) + "\n", oracle, rng.randint(1, 3))


random_worlds = st.integers(min_value=0, max_value=2**32 - 1).map(
    lambda seed: generate_world(random.Random(seed))
)
