"""Why-provenance of derived facts and provenance-based readability

A provenance is a set of alternative derivations; a derivation is the set
of base-fact tokens it used. A reader may see a fact when it can read the
fact's container and every token of at least one derivation.
"""

from __future__ import annotations

import logging
from typing import Iterable, Optional, Sequence, Tuple

from src.accesscontrol.acl_store import AclStore, Privilege, Who, has_privilege
from src.core.model import Fact, Provenance

logger = logging.getLogger(__name__)

# the single empty derivation: readable by anyone who can read the container
EMPTY = Provenance(frozenset([frozenset()]))


def absorb(alternatives: Iterable[frozenset]) -> frozenset:
    """Drop every derivation that strictly contains another one"""
    kept = []
    for derivation in sorted(set(alternatives), key=len):
        if not any(k <= derivation for k in kept):
            kept.append(derivation)
    return frozenset(kept)


def base_provenance(fact: Fact) -> Provenance:
    """The single derivation made of the fact's own token"""
    if fact.token is None:
        raise ValueError(f"extensional fact {fact} has no token")
    return Provenance(frozenset([frozenset([fact.token])]))


def fact_provenance(fact: Fact) -> Provenance:
    """Base provenance, or EMPTY for a fact that has not been sealed with a token yet"""
    return base_provenance(fact) if fact.token is not None else EMPTY


def combine(body: Sequence[Tuple[Provenance, bool]]) -> Provenance:
    """Provenance of a rule firing from the provenances of its body facts

    Hidden atoms contribute nothing; visible ones are joined by cross
    product of their alternatives.
    """
    if not body:
        raise ValueError("combine needs at least one body entry")
    acc = frozenset([frozenset()])
    for prov, hidden in body:
        if hidden:
            continue
        acc = absorb(a | d for a in acc for d in prov.alternatives)
    return Provenance(acc)


def merge_alternatives(a: Optional[Provenance], b: Optional[Provenance]) -> Provenance:
    """Union of two provenances, absorbed; None stands for no derivation yet"""
    if a is None:
        return b
    if b is None:
        return a
    return Provenance(absorb(a.alternatives | b.alternatives))


def cap_alternatives(prov: Provenance, limit: int) -> Tuple[Provenance, bool]:
    """Keep the first `limit` derivations in token-id order; True when some were dropped"""
    if limit <= 0 or len(prov.alternatives) <= limit:
        return prov, False
    ordered = sorted(prov.alternatives, key=lambda d: sorted(t.id for t in d))
    return Provenance(frozenset(ordered[:limit])), True


def can_read(who: Who, fact: Fact, prov: Provenance, acl: AclStore) -> bool:
    """Read on the fact's relation and on every token of at least one derivation

    Args:
        who: Reading principal
        fact: Fact being read
        prov: Its provenance
        acl: Current ACL store

    Returns:
        True iff `who` may see `fact`
    """
    if not has_privilege(acl, who, fact.ref, Privilege.READ):
        return False
    return any(
        all(has_privilege(acl, who, t.source, Privilege.READ) for t in derivation)
        for derivation in prov.alternatives
    )
