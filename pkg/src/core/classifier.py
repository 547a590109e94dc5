"""Rule safety check and the A-E rule taxonomy"""

from __future__ import annotations

from enum import Enum
from typing import Iterable, Mapping, Union

from src.core.errors import UnknownRelation, UnsafeRule
from src.core.model import PeerId, RelationDecl, RelationKind, RelationRef, Rule, is_var


class RuleKind(str, Enum):
    A = "A"  # local body, local intentional head (view)
    B = "B"  # local body, local extensional head (insertion, persistence)
    C = "C"  # local body, remote extensional head (messaging)
    D = "D"  # local body, remote intentional head (remote view)
    E = "E"  # non-local body (delegation)

    @property
    def description(self) -> str:
        return _DESCRIPTIONS[self]


_DESCRIPTIONS = {
    RuleKind.A: "local rule with local intentional head",
    RuleKind.B: "local rule with local extensional head",
    RuleKind.C: "local rule with non-local extensional head",
    RuleKind.D: "local rule with non-local intentional head",
    RuleKind.E: "non-local rule (delegation)",
}

DeclIndex = Mapping[RelationRef, RelationDecl]


def index_decls(decls: Union[DeclIndex, Iterable[RelationDecl]]) -> DeclIndex:
    if isinstance(decls, Mapping):
        return decls
    return {d.ref: d for d in decls}


def check_safety(rule: Rule) -> None:
    """Every head variable, relation and peer variables included, must occur in the body"""
    body_vars = {v for atom in rule.body for v in atom.variables()}
    missing = sorted({v.name for v in rule.head.variables()} - {v.name for v in body_vars})
    if missing:
        names = ", ".join(f"${name}" for name in missing)
        raise UnsafeRule(f"head variable(s) {names} do not occur in the body", rule.pos)


def is_local_body(rule: Rule, host: PeerId) -> bool:
    return all(not is_var(a.ref.peer) and a.ref.peer == host for a in rule.body)


def head_kind_for_relation(relation: str, decls: DeclIndex) -> RelationKind:
    """Kind of a relation name across all peers; extensional unless every declaration is intentional"""
    kinds = {d.kind for ref, d in decls.items() if ref.relation == relation}
    if kinds == {RelationKind.INTENTIONAL}:
        return RelationKind.INTENTIONAL
    return RelationKind.EXTENSIONAL


def classify_rule(rule: Rule, host: PeerId, decls: Union[DeclIndex, Iterable[RelationDecl]]) -> RuleKind:
    """Classify `rule` as hosted at `host`

    A head with a variable peer counts as non-local; its kind is taken from
    the declarations of its relation name when that name is ground.
    """
    decls = index_decls(decls)
    check_safety(rule)
    for atom in (rule.head,) + rule.body:
        if atom.ref.is_ground and atom.ref not in decls:
            raise UnknownRelation(f"relation {atom.ref} is not declared", atom.pos or rule.pos)

    if not is_local_body(rule, host):
        return RuleKind.E

    head = rule.head.ref
    if is_var(head.peer):
        if is_var(head.relation):
            return RuleKind.C
        kind = head_kind_for_relation(head.relation, decls)
        return RuleKind.D if kind is RelationKind.INTENTIONAL else RuleKind.C

    if is_var(head.relation):
        # local peer, unknown relation: resolved per binding at evaluation time
        return RuleKind.B
    kind = decls[head].kind
    if head.peer == host:
        return RuleKind.A if kind is RelationKind.INTENTIONAL else RuleKind.B
    return RuleKind.D if kind is RelationKind.INTENTIONAL else RuleKind.C
