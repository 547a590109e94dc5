"""Splitting non-local rules into residual rules delegated to other peers"""

from __future__ import annotations

import logging
from dataclasses import replace
from typing import Dict, List

from src.accesscontrol.acl_store import AclStore
from src.core.errors import UnboundDelegationTarget
from src.core.model import PeerId, Provenance, Rule, is_var
from src.engine.evaluator import match_body, view_for
from src.engine.peer_state import DelegationMsg, PeerState
from src.provenance.provenance import combine, merge_alternatives

logger = logging.getLogger(__name__)


def local_prefix_length(rule: Rule, host: PeerId) -> int:
    count = 0
    for atom in rule.body:
        if is_var(atom.ref.peer) or atom.ref.peer != host:
            break
        count += 1
    return count


def split_for_delegation(rule: Rule, host: PeerId, state: PeerState, acl: AclStore) -> List[DelegationMsg]:
    """Evaluate the local prefix of `rule` and delegate what remains

    Each binding of the maximal local prefix (left to right, over the
    author's readable view) yields one residual rule, sent to the peer of
    the first remaining atom. Residuals that come out identical are sent
    once, with their premises merged.
    """
    k = local_prefix_length(rule, host)
    prefix, rest = rule.body[:k], rule.body[k:]
    if not rest:
        raise ValueError(f"rule has no non-local atom at {host}: {rule}")

    if prefix:
        bindings = match_body(prefix, view_for(rule.author, state, acl))
    else:
        bindings = iter([({}, [])])

    residuals: Dict[Rule, Provenance] = {}
    for binding, used in bindings:
        remaining = tuple(atom.substitute(binding) for atom in rest)
        target = remaining[0].ref.peer
        if is_var(target):
            raise UnboundDelegationTarget(
                f"peer variable {target} of {remaining[0]} is not bound by the local prefix of {rule}"
            )
        parts = []
        if used:
            parts.append((combine(used), False))
        if rule.premise is not None:
            parts.append((rule.premise, False))
        premise = combine(parts) if parts else None
        residual = Rule(
            head=rule.head.substitute(binding),
            body=remaining,
            host=target,
            author=rule.author,
            delegator=rule.author,
        )
        if residual in residuals:
            residuals[residual] = merge_alternatives(residuals[residual], premise)
        else:
            residuals[residual] = premise

    messages = [
        DelegationMsg(host, residual.host, rule.author, replace(residual, premise=premise))
        for residual, premise in residuals.items()
    ]
    messages.sort(key=lambda m: m.sort_key)
    logger.debug("split %s at %s into %d delegation(s)", rule, host, len(messages))
    return messages
