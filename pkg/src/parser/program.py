"""Parsed scenario: declarations, facts, rules and grants"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

from src.accesscontrol.acl_store import Grant, acl_decl
from src.core.model import Fact, PrincipalId, RelationDecl, RelationRef, Rule


@dataclass(frozen=True)
class Program:
    peers: Tuple[PrincipalId, ...] = ()
    principals: Tuple[PrincipalId, ...] = ()
    declarations: Tuple[RelationDecl, ...] = ()
    facts: Tuple[Fact, ...] = ()
    rules: Tuple[Rule, ...] = ()
    grants: Tuple[Grant, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not (self.peers or self.principals or self.declarations
                    or self.facts or self.rules or self.grants)

    def relation_index(self) -> Dict[RelationRef, RelationDecl]:
        """Declared relations plus the implicit `acl@peer` relation of every peer

        Returns:
            Mapping from relation reference to its declaration
        """
        index = {acl_decl(peer.name).ref: acl_decl(peer.name) for peer in self.peers}
        index.update((decl.ref, decl) for decl in self.declarations)
        return index
