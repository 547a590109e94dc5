"""Rule evaluation over a principal's readable view of one peer

Every rule runs as its author: body atoms only match facts the author may
read under provenance-based readability.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from src.accesscontrol.acl_store import AclStore, Privilege, has_privilege, is_acl_relation
from src.core.classifier import is_local_body
from src.core.model import Atom, Fact, PrincipalId, Provenance, RelationRef, Rule, Var, is_var
from src.engine.peer_state import DEFAULT_SETTINGS, EngineSettings, PeerState
from src.provenance.provenance import (
    can_read,
    cap_alternatives,
    combine,
    fact_provenance,
    merge_alternatives,
)

logger = logging.getLogger(__name__)

Derived = Dict[Fact, Provenance]
Used = List[Tuple[Provenance, bool]]


class ReadableView:
    """Facts of one peer readable by `who`, indexed by relation"""

    def __init__(self, who: PrincipalId, facts: Iterable[Tuple[Fact, Provenance]], acl: AclStore):
        self.who = who
        self._by_ref: Dict[RelationRef, List[Tuple[Fact, Provenance]]] = defaultdict(list)
        for fact, prov in facts:
            if can_read(who, fact, prov, acl):
                self._by_ref[fact.ref].append((fact, prov))
        for entries in self._by_ref.values():
            entries.sort(key=lambda entry: entry[0].sort_key)
        self._refs = sorted(self._by_ref, key=lambda r: r.sort_key)

    def lookup(self, ref: RelationRef) -> List[Tuple[Fact, Provenance]]:
        return self._by_ref.get(ref, [])

    def refs_matching(self, ref: RelationRef) -> List[RelationRef]:
        return [
            r for r in self._refs
            if (is_var(ref.relation) or r.relation == ref.relation)
            and (is_var(ref.peer) or r.peer == ref.peer)
        ]

    def facts(self) -> Iterator[Tuple[Fact, Provenance]]:
        for ref in self._refs:
            yield from self._by_ref[ref]


def state_facts(state: PeerState, acl: AclStore) -> List[Tuple[Fact, Provenance]]:
    """edb, acl data and idb of a peer, each with its provenance"""
    facts = [(f, fact_provenance(f)) for f in state.sorted_edb()]
    facts.extend((f, fact_provenance(f)) for f in acl.facts_for(state.id))
    facts.extend(state.sorted_idb())
    return facts


def view_for(who: PrincipalId, state: PeerState, acl: AclStore) -> ReadableView:
    """What `who` may read at `state`'s peer, provenance included"""
    return ReadableView(who, state_facts(state, acl), acl)


def unify(atom: Atom, fact: Fact, binding: Mapping[Var, str]) -> Optional[Dict[Var, str]]:
    """Extend `binding` so that `atom` matches `fact`, or None"""
    if len(atom.args) != len(fact.args):
        return None
    extended = dict(binding)
    pairs = [(atom.ref.relation, fact.ref.relation), (atom.ref.peer, fact.ref.peer)]
    pairs.extend(zip(atom.args, fact.args))
    for term, value in pairs:
        if is_var(term):
            bound = extended.get(term)
            if bound is None:
                extended[term] = value
            elif bound != value:
                return None
        elif term != value:
            return None
    return extended


def match_body(
    atoms: Sequence[Atom],
    view: ReadableView,
    binding: Optional[Mapping[Var, str]] = None,
) -> Iterator[Tuple[Dict[Var, str], Used]]:
    """Left-to-right join of `atoms` against `view`

    Yields each satisfying binding with the (provenance, hidden) pair of
    every matched body fact.
    """
    yield from _match(tuple(atoms), 0, view, dict(binding or {}), [])


def _match(atoms, i, view, binding, used):
    if i == len(atoms):
        yield dict(binding), list(used)
        return
    atom = atoms[i]
    ref = atom.ref.substitute(binding)
    candidates = [ref] if ref.is_ground else view.refs_matching(ref)
    for candidate in candidates:
        for fact, prov in view.lookup(candidate):
            extended = unify(atom, fact, binding)
            if extended is None:
                continue
            used.append((prov, atom.hidden))
            yield from _match(atoms, i + 1, view, extended, used)
            used.pop()


def evaluate_rule(rule: Rule, view: ReadableView) -> Derived:
    """All head facts of `rule` over `view`, authored by the rule's author"""
    derived: Derived = {}
    for binding, used in match_body(rule.body, view):
        head = rule.head.substitute(binding)
        fact = Fact(head.ref, head.args, author=rule.author)
        prov = combine(used)
        if rule.premise is not None:
            prov = combine([(prov, False), (rule.premise, False)])
        derived[fact] = merge_alternatives(derived.get(fact), prov)
    return derived


def evaluate_sandboxed(rule: Rule, state: PeerState, acl: AclStore) -> Derived:
    """Run a delegated rule at `state.id` with the delegator's privileges

    Facts the delegator cannot read are invisible to the rule; nothing about
    them is reported back.
    """
    if not rule.is_delegated:
        raise ValueError(f"rule is not delegated: {rule}")
    if rule.host != state.id:
        raise ValueError(f"rule hosted at {rule.host}, evaluated at {state.id}")
    return evaluate_rule(rule, view_for(rule.author, state, acl))


def may_write(author: PrincipalId, ref: RelationRef, acl: AclStore) -> bool:
    """True iff facts authored by `author` may be stored in `ref`"""
    return has_privilege(acl, author, ref, Privilege.WRITE)


def local_int_check(fact: Fact, host: str, acl: AclStore) -> Optional[str]:
    """Reason a derived fact cannot enter the local idb, None when it can"""
    decl = acl.find(fact.ref)
    if decl is None:
        return "unknown-relation"
    if len(fact.args) != decl.arity:
        return "arity"
    if is_acl_relation(fact.ref):
        return "reserved"
    if not may_write(fact.author, fact.ref, acl):
        return "no-write"
    return None


def _is_local_intentional(fact: Fact, host: str, acl: AclStore) -> bool:
    decl = acl.find(fact.ref)
    return fact.ref.peer == host and decl is not None and not decl.is_extensional


def local_fixpoint(
    state: PeerState,
    acl: AclStore,
    settings: EngineSettings = DEFAULT_SETTINGS,
    notes: Optional[List[str]] = None,
) -> Derived:
    """Least fixpoint of the peer's local intentional relations

    Seeds are the accepted remote-view contributions. Every rule with an
    all-local body takes part; only derivations landing in a local
    intentional relation are kept. Rejections and provenance-cap hits are
    appended to `notes`.
    """
    host = state.id
    rules = [r for r in state.rules if is_local_body(r, host)]
    seeds = dict(state.contributed)
    idb: Derived = dict(seeds)
    rejected = set()
    capped = set()
    if not rules:
        return idb

    for iteration in range(settings.max_fixpoint_iterations):
        current = PeerState(host, state.decls, state.edb, idb, state.installed, state.delegated_in)
        views: Dict[PrincipalId, ReadableView] = {}
        new: Derived = dict(seeds)
        for rule in rules:
            if rule.author not in views:
                views[rule.author] = view_for(rule.author, current, acl)
            for fact, prov in evaluate_rule(rule, views[rule.author]).items():
                if not _is_local_intentional(fact, host, acl):
                    continue
                reason = local_int_check(fact, host, acl)
                if reason is not None:
                    rejected.add(f"{host}: {reason} {fact} author={fact.author}")
                    continue
                new[fact] = merge_alternatives(new.get(fact), prov)
        for fact, prov in new.items():
            trimmed, hit = cap_alternatives(prov, settings.max_alternatives)
            if hit:
                capped.add(f"{host}: provenance-cap {fact} kept={settings.max_alternatives}")
                new[fact] = trimmed
        if new == idb:
            break
        idb = new
    else:
        logger.warning("fixpoint at %s did not converge after %d iterations",
                       host, settings.max_fixpoint_iterations)

    for line in sorted(capped):
        logger.warning("%s", line)
    if notes is not None:
        notes.extend(sorted(rejected))
        notes.extend(sorted(capped))
    return idb
