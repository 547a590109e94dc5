"""Relation-level access control lists

Grants are stored as ordinary extensional facts of the reserved relation
`acl@peer(relationName, granteeName, privilegeName)`; the store is nothing
more than those facts plus the relation and principal catalog needed to
answer lookups.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from src.core.errors import CannotRevokeOwner, NotOwner, UnknownPrincipal, UnknownRelation
from src.core.model import (
    Fact,
    PeerId,
    PrincipalId,
    PrincipalKind,
    RelationDecl,
    RelationKind,
    RelationRef,
    SourcePos,
    Token,
)

logger = logging.getLogger(__name__)

ACL_RELATION = "acl"
ACL_ARITY = 3


class Privilege(str, Enum):
    READ = "read"
    WRITE = "write"
    OWNER = "owner"


@dataclass(frozen=True)
class Grant:
    target: RelationRef
    grantee: PrincipalId
    privilege: Privilege
    pos: Optional[SourcePos] = field(default=None, compare=False, repr=False)

    def to_fact(self) -> Fact:
        return Fact(
            acl_ref(self.target.peer),
            (self.target.relation, self.grantee.name, self.privilege.value),
            author=PrincipalId(self.target.peer),
        )

    def __str__(self) -> str:
        return f"grant {self.privilege.value} on {self.target} to {self.grantee}"


def acl_ref(peer: PeerId) -> RelationRef:
    return RelationRef(ACL_RELATION, peer)


def acl_decl(peer: PeerId) -> RelationDecl:
    return RelationDecl(acl_ref(peer), ACL_ARITY, RelationKind.EXTENSIONAL, PrincipalId(peer))


def is_acl_relation(ref: RelationRef) -> bool:
    return ref.relation == ACL_RELATION


Who = Union[PrincipalId, str]


def _name(who: Who) -> str:
    return who.name if isinstance(who, PrincipalId) else who


@dataclass(frozen=True)
class AclStore:
    """ACL facts of every peer, with the declarations they refer to

    Values are immutable: `grant`, `revoke` and `declare` return new stores.
    """

    decls: Mapping[RelationRef, RelationDecl] = field(default_factory=dict)
    principals: Mapping[str, PrincipalId] = field(default_factory=dict)
    facts: frozenset = frozenset()
    _index: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "decls", MappingProxyType(dict(self.decls)))
        object.__setattr__(self, "principals", MappingProxyType(dict(self.principals)))
        index = frozenset((f.ref.peer, f.args[0], f.args[1], f.args[2]) for f in self.facts)
        object.__setattr__(self, "_index", index)

    # -- catalog -----------------------------------------------------------

    def add_principal(self, principal: PrincipalId) -> "AclStore":
        principals = dict(self.principals)
        principals[principal.name] = principal
        store = replace(self, principals=principals)
        if principal.is_peer and acl_ref(principal.name) not in self.decls:
            store = store.declare(acl_decl(principal.name))
        return store

    def declare(self, decl: RelationDecl) -> "AclStore":
        """Register a relation and the Owner grant of its owner"""
        decls = dict(self.decls)
        decls[decl.ref] = decl
        owner_grant = Grant(decl.ref, decl.owner, Privilege.OWNER)
        return replace(self, decls=decls, facts=self.facts | {owner_grant.to_fact()})

    def find(self, ref: RelationRef) -> Optional[RelationDecl]:
        return self.decls.get(ref)

    def decl(self, ref: RelationRef) -> RelationDecl:
        found = self.decls.get(ref)
        if found is None:
            raise UnknownRelation(f"relation {ref} is not declared")
        return found

    def principal(self, name: str) -> PrincipalId:
        found = self.principals.get(name)
        if found is None:
            raise UnknownPrincipal(f"principal {name} is not declared")
        return found

    # -- grants as facts ---------------------------------------------------

    def facts_for(self, peer: PeerId) -> List[Fact]:
        return sorted((f for f in self.facts if f.ref.peer == peer), key=lambda f: f.sort_key)

    def grants(self, peer: Optional[PeerId] = None) -> List[Grant]:
        found = []
        for f in self.facts:
            if peer is not None and f.ref.peer != peer:
                continue
            relation, grantee, privilege = f.args
            principal = self.principals.get(grantee, PrincipalId(grantee, PrincipalKind.VIRTUAL))
            found.append(Grant(RelationRef(relation, f.ref.peer), principal, Privilege(privilege)))
        return sorted(found, key=str)

    def holds(self, who: Who, target: RelationRef, privilege: Privilege) -> bool:
        """Exact lookup of one acl fact; no implication between privileges"""
        return (target.peer, target.relation, _name(who), privilege.value) in self._index

    def assign_tokens(self, next_id: int) -> Tuple["AclStore", int]:
        """Give every tokenless acl fact a fresh token, in sorted order"""
        sealed = []
        for f in sorted(self.facts, key=lambda f: f.sort_key):
            if f.token is None:
                f = f.with_token(Token(next_id, f.ref))
                next_id += 1
            sealed.append(f)
        return replace(self, facts=frozenset(sealed)), next_id


def has_privilege(store: AclStore, who: Who, target: RelationRef, privilege: Privilege) -> bool:
    """True iff `who` holds `privilege` on `target`

    Owner implies read and write; a peer can always read and write the
    relations it hosts.
    """
    store.decl(target)
    if privilege is not Privilege.OWNER and _name(who) == target.peer:
        return True
    if store.holds(who, target, Privilege.OWNER):
        return True
    return store.holds(who, target, privilege)


def grant(store: AclStore, g: Grant, grantor: Who) -> AclStore:
    """Add a grant on behalf of `grantor`

    Args:
        store: Current ACL store
        g: Grant to add
        grantor: Principal issuing the grant; must own the target relation

    Returns:
        A store holding the grant; `store` itself when it already held it

    Raises:
        NotOwner: `grantor` does not own the target
        UnknownPrincipal: the grantee is not declared
    """
    store.decl(g.target)
    if not has_privilege(store, grantor, g.target, Privilege.OWNER):
        raise NotOwner(f"{_name(grantor)} does not own {g.target}")
    if g.grantee.name not in store.principals:
        raise UnknownPrincipal(f"principal {g.grantee} is not declared")
    fact = g.to_fact()
    if fact in store.facts:
        return store
    logger.debug("grant %s by %s", g, _name(grantor))
    return replace(store, facts=store.facts | {fact})


def revoke(store: AclStore, g: Grant, grantor: Who) -> AclStore:
    """Remove a grant on behalf of `grantor`; revoking an absent grant is a no-op

    Raises:
        NotOwner: `grantor` does not own the target
        CannotRevokeOwner: the grant is the declared owner's Owner privilege
    """
    decl = store.decl(g.target)
    if not has_privilege(store, grantor, g.target, Privilege.OWNER):
        raise NotOwner(f"{_name(grantor)} does not own {g.target}")
    if g.privilege is Privilege.OWNER and g.grantee.name == decl.owner.name:
        raise CannotRevokeOwner(f"{decl.owner} is the declared owner of {g.target}")
    fact = g.to_fact()
    if fact not in store.facts:
        return store
    logger.debug("revoke %s by %s", g, _name(grantor))
    return replace(store, facts=store.facts - {fact})


def build_store(
    principals: Iterable[PrincipalId],
    decls: Iterable[RelationDecl],
) -> AclStore:
    """Catalog with the acl relation of every peer and the owner grants"""
    store = AclStore()
    for principal in sorted(principals):
        store = store.add_principal(principal)
    for decl in sorted(decls, key=lambda d: d.ref.sort_key):
        store = store.declare(decl)
    return store


def grant_lines(store: AclStore, peer: PeerId) -> List[str]:
    """Grants on the relations of `peer`, one `grant` directive per line"""
    return sorted(str(g) for g in store.grants(peer))
