"""One round of evaluation at one peer"""

from __future__ import annotations

import logging
from dataclasses import replace
from typing import Dict, Iterable, List, Tuple

from src.accesscontrol.acl_store import AclStore, is_acl_relation
from src.core.classifier import is_local_body
from src.core.errors import UnboundDelegationTarget
from src.core.model import Fact, PrincipalId, Provenance, Rule, Token
from src.engine.delegation import split_for_delegation
from src.engine.evaluator import (
    ReadableView,
    evaluate_rule,
    evaluate_sandboxed,
    local_fixpoint,
    may_write,
    view_for,
)
from src.engine.peer_state import (
    DEFAULT_SETTINGS,
    DelegationMsg,
    EngineSettings,
    InboxItem,
    Message,
    PeerState,
    StepResult,
)
from src.provenance.provenance import merge_alternatives

logger = logging.getLogger(__name__)


def _reject(rejected: List[str], host: str, reason: str, detail: str) -> None:
    line = f"{host}: {reason} {detail}"
    logger.info("rejected %s", line)
    rejected.append(line)


def _inbound_check(author: PrincipalId, fact: Fact, host: str, acl: AclStore, extensional: bool):
    if fact.ref.peer != host:
        return "misrouted"
    decl = acl.find(fact.ref)
    if decl is None:
        return "unknown-relation"
    if len(fact.args) != decl.arity:
        return "arity"
    if is_acl_relation(fact.ref):
        return "reserved"
    if decl.is_extensional != extensional:
        return "not-extensional" if extensional else "not-intentional"
    if not may_write(author, fact.ref, acl):
        return "no-write"
    return None


def step(
    state: PeerState,
    inbox: Iterable[InboxItem],
    acl: AclStore,
    settings: EngineSettings = DEFAULT_SETTINGS,
) -> StepResult:
    """Advance one peer by one round

    The returned state's edb is exactly the facts derived by local
    extensional-head rules plus the accepted incoming messages; facts not in
    it are gone. Facts new to the edb carry no token yet: the caller seals
    them (see `seal_tokens`).
    """
    host = state.id
    rejected: List[str] = []

    accepted: List[Fact] = []
    delegated: List[Rule] = []
    contributed: Dict[Fact, Provenance] = {}
    for item in sorted(inbox, key=lambda i: i.sort_key):
        if isinstance(item, Message):
            reason = _inbound_check(item.author, item.fact, host, acl, extensional=True)
            if reason is not None:
                _reject(rejected, host, reason, f"message {item}")
                continue
            accepted.append(item.fact.with_author(item.author))
        elif item.view:
            for fact, prov in item.view:
                reason = _inbound_check(item.author, fact, host, acl, extensional=False)
                if reason is not None:
                    _reject(rejected, host, reason, f"view {fact} from {item.sender} author={item.author}")
                    continue
                contributed[fact] = merge_alternatives(contributed.get(fact), prov)
        else:
            if item.residual.host != host:
                _reject(rejected, host, "misrouted", f"delegation {item}")
                continue
            delegated.append(replace(item.residual, author=item.author, delegator=item.author))

    current = replace(
        state,
        delegated_in=tuple(sorted(set(delegated), key=lambda r: r.sort_key)),
        contributed=contributed,
        idb={},
    )
    idb = local_fixpoint(current, acl, settings, notes=rejected)
    current = replace(current, idb=idb)

    outbox: List[InboxItem] = []
    next_edb: Dict[Fact, Fact] = {}
    views: Dict[PrincipalId, ReadableView] = {}
    for rule in current.rules:
        if not is_local_body(rule, host):
            try:
                delegations = split_for_delegation(rule, host, current, acl)
            except UnboundDelegationTarget as exc:
                _reject(rejected, host, "unbound-target", str(exc))
                continue
            for delegation in delegations:
                target = acl.principals.get(delegation.to)
                if target is None or not target.is_peer:
                    _reject(rejected, host, "unknown-peer", f"delegation {delegation}")
                    continue
                outbox.append(delegation)
            continue

        if rule.is_delegated:
            derived = evaluate_sandboxed(rule, current, acl)
        else:
            if rule.author not in views:
                views[rule.author] = view_for(rule.author, current, acl)
            derived = evaluate_rule(rule, views[rule.author])
        remote_views: Dict[str, List[Tuple[Fact, Provenance]]] = {}
        for fact, prov in derived.items():
            decl = acl.find(fact.ref)
            if decl is None:
                _reject(rejected, host, "unknown-relation", f"{fact} author={fact.author}")
                continue
            if len(fact.args) != decl.arity:
                _reject(rejected, host, "arity", f"{fact} author={fact.author}")
                continue
            if is_acl_relation(fact.ref):
                _reject(rejected, host, "reserved", f"{fact} author={fact.author}")
                continue
            if fact.ref.peer == host:
                if not decl.is_extensional:
                    continue  # kept by the fixpoint
                if not may_write(fact.author, fact.ref, acl):
                    _reject(rejected, host, "no-write", f"{fact} author={fact.author}")
                    continue
                next_edb.setdefault(fact, fact)
            elif decl.is_extensional:
                outbox.append(Message(host, rule.author, fact))
            else:
                remote_views.setdefault(fact.ref.peer, []).append((fact, prov))
        for peer in sorted(remote_views):
            view = tuple(sorted(remote_views[peer], key=lambda entry: entry[0].sort_key))
            outbox.append(DelegationMsg(host, peer, rule.author, rule, view=view))

    for fact in accepted:
        next_edb.setdefault(fact, fact)

    previous = {f: f for f in state.edb}
    edb = frozenset(
        f.with_token(previous[f].token if f in previous else None) for f in next_edb.values()
    )

    outbox.sort(key=lambda i: i.sort_key)
    logger.debug("%s: %d edb, %d idb, %d outgoing", host, len(edb), len(idb), len(outbox))
    return StepResult(replace(current, edb=edb), tuple(outbox), tuple(rejected))


def seal_tokens(state: PeerState, next_id: int) -> Tuple[PeerState, int]:
    """Assign fresh tokens to tokenless edb facts, in sorted order"""
    sealed = []
    for fact in state.sorted_edb():
        if fact.token is None:
            fact = fact.with_token(Token(next_id, fact.ref))
            next_id += 1
        sealed.append(fact)
    return replace(state, edb=frozenset(sealed)), next_id
