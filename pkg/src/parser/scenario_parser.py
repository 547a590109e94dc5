"""Scenario and rule text parser

Concrete syntax (see webdamlog.lark)::

    peer Alice
    principal Charlie
    relation ext alicePhotos@Alice/1 owner Alice
    fact alicePhotos@Alice("sunset.jpg")
    rule at Alice: allPhotos@$x($f) :- alicePhotos@Alice($f), [hide friends@Alice($x)]
    grant read on alicePhotos@Alice to Charlie
"""

from __future__ import annotations

import logging
import re
from dataclasses import replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedEOF, UnexpectedInput, VisitError
from lark.lexer import PatternStr

from src.accesscontrol.acl_store import ACL_RELATION, Grant, Privilege, acl_decl
from src.core.classifier import check_safety
from src.core.errors import (
    ArityMismatch,
    NotExtensional,
    ReservedRelation,
    ScenarioError,
    ScenarioSyntaxError,
    UnknownPeer,
    UnknownPrincipal,
    UnknownRelation,
)
from src.core.model import (
    Atom,
    Fact,
    PeerId,
    PrincipalId,
    PrincipalKind,
    RelationDecl,
    RelationKind,
    RelationRef,
    Rule,
    SourcePos,
    Var,
)
from src.parser.program import Program

logger = logging.getLogger(__name__)

GRAMMAR_PATH = Path(__file__).parent / "webdamlog.lark"

_ESCAPE = re.compile(r'\\(["\\])')


def _pos(item) -> SourcePos:
    return SourcePos(item.line, item.column)


@v_args(meta=True)
class _ToModel(Transformer):
    """Parse tree to model values; statements become tagged tuples"""

    def ident(self, meta, children):
        return str(children[0])

    def var(self, meta, children):
        return Var(str(children[0])[1:])

    def const(self, meta, children):
        return _ESCAPE.sub(r"\1", str(children[0])[1:-1])

    def rel_kind(self, meta, children):
        return RelationKind(str(children[0]))

    def privilege(self, meta, children):
        return Privilege(str(children[0]))

    def atom(self, meta, children):
        relation, peer, *args = children
        return Atom(RelationRef(relation, peer), tuple(args), pos=_pos(meta))

    def hidden_atom(self, meta, children):
        return replace(children[0], hidden=True, pos=_pos(meta))

    def rule(self, meta, children):
        head, *body = children
        return head, tuple(body), _pos(meta)

    def pattern(self, meta, children):
        return children[0]

    def peer_decl(self, meta, children):
        return ("peer", children[0])

    def principal_decl(self, meta, children):
        return ("principal", children[0])

    def relation_decl(self, meta, children):
        kind, relation, peer, arity, *owner = children
        return ("relation", kind, relation, peer, arity, owner[0] if owner else None, _pos(meta))

    def fact_decl(self, meta, children):
        relation, peer, *args = children
        values = tuple(_ESCAPE.sub(r"\1", str(a)[1:-1]) for a in args)
        return ("fact", relation, peer, values, _pos(meta))

    def rule_decl(self, meta, children):
        host, (head, body, rule_pos) = children
        return ("rule", host, head, body, _pos(meta))

    def grant_decl(self, meta, children):
        privilege, relation, peer, grantee = children
        return ("grant", privilege, relation, peer, grantee, _pos(meta))

    def start(self, meta, children):
        return children


class ScenarioParser:
    """Lark-backed parser; one instance is reusable and holds no parse state"""

    def __init__(self):
        self._lark = Lark(
            GRAMMAR_PATH.read_text(encoding="utf-8"),
            parser="lalr",
            start=["start", "rule", "pattern"],
            propagate_positions=True,
            maybe_placeholders=False,
        )

    def _tree(self, text: str, start: str):
        try:
            tree = self._lark.parse(text, start=start)
            return _ToModel().transform(tree)
        except VisitError as exc:
            if isinstance(exc.orig_exc, ScenarioError):
                raise exc.orig_exc from None
            raise
        except UnexpectedInput as exc:
            raise self._syntax_error(text, exc) from None

    def _syntax_error(self, text: str, exc: UnexpectedInput) -> ScenarioSyntaxError:
        expected = getattr(exc, "expected", None) or getattr(exc, "allowed", None) or ()
        line, column = exc.line, exc.column
        if isinstance(exc, UnexpectedEOF) or line is None or line < 1:
            line, column = _end_position(text)
        return ScenarioSyntaxError(line, column, [self._describe(name) for name in expected])

    def _describe(self, name: str) -> str:
        try:
            pattern = self._lark.get_terminal(name).pattern
        except KeyError:
            return name
        return f'"{pattern.value}"' if isinstance(pattern, PatternStr) else name

    def parse_program(self, text: str) -> Program:
        statements = self._tree(text, "start")
        return _ProgramBuilder(statements).build()

    def parse_rule(self, text: str, host: PeerId, program: Optional[Program] = None) -> Rule:
        head, body, pos = self._tree(text, "rule")
        rule = Rule(head, body, host, PrincipalId(host), pos=pos)
        check_safety(rule)
        if program is not None:
            builder = _ProgramBuilder(())
            builder.index(program)
            builder.check_rule(rule)
        return rule

    def parse_atom(self, text: str) -> Atom:
        return self._tree(text, "pattern")


def _end_position(text: str) -> Tuple[int, int]:
    lines = text.splitlines() or [""]
    return len(lines), max(1, len(lines[-1]))


class _ProgramBuilder:
    """Resolves names in parsed statements and validates them"""

    def __init__(self, statements: Iterable[tuple]):
        self.statements = list(statements)
        self.principals: Dict[str, PrincipalId] = {}
        self.decls: Dict[RelationRef, RelationDecl] = {}

    def index(self, program: Program) -> None:
        for principal in program.peers + program.principals:
            self.principals[principal.name] = principal
        self.decls.update(program.relation_index())

    def _of_kind(self, tag: str) -> List[tuple]:
        return [s for s in self.statements if s[0] == tag]

    def _peer(self, name: Token) -> PeerId:
        principal = self.principals.get(str(name))
        if principal is None or not principal.is_peer:
            raise UnknownPeer(f"peer {name} is not declared", _pos(name))
        return str(name)

    def _principal(self, name: Token) -> PrincipalId:
        principal = self.principals.get(str(name))
        if principal is None:
            raise UnknownPrincipal(f"principal {name} is not declared", _pos(name))
        return principal

    def build(self) -> Program:
        peers, principals = [], []
        for tag, name in self._of_kind("peer") + self._of_kind("principal"):
            kind = PrincipalKind.PEER if tag == "peer" else PrincipalKind.VIRTUAL
            if str(name) in self.principals:
                raise ScenarioError(f"principal {name} is declared twice", _pos(name))
            principal = PrincipalId(str(name), kind)
            self.principals[principal.name] = principal
            (peers if principal.is_peer else principals).append(principal)
        for peer in peers:
            self.decls[acl_decl(peer.name).ref] = acl_decl(peer.name)

        declarations = [self._declaration(s) for s in self._of_kind("relation")]
        facts = [self._fact(s) for s in self._of_kind("fact")]
        rules = [self._rule(s) for s in self._of_kind("rule")]
        grants = [self._grant(s) for s in self._of_kind("grant")]
        logger.debug("parsed %d peer(s), %d relation(s), %d fact(s), %d rule(s), %d grant(s)",
                     len(peers), len(declarations), len(facts), len(rules), len(grants))
        return Program(tuple(peers), tuple(principals), tuple(declarations),
                       tuple(facts), tuple(rules), tuple(grants))

    def _declaration(self, statement) -> RelationDecl:
        _, kind, relation, peer, arity, owner, pos = statement
        if str(relation) == ACL_RELATION:
            raise ReservedRelation(f"relation {ACL_RELATION} is reserved for access control", pos)
        host = self._peer(peer)
        ref = RelationRef(str(relation), host)
        if ref in self.decls:
            raise ScenarioError(f"relation {ref} is declared twice", pos)
        owner_id = self._principal(owner) if owner is not None else PrincipalId(host)
        decl = RelationDecl(ref, int(arity), kind, owner_id, pos=pos)
        self.decls[ref] = decl
        return decl

    def _lookup(self, ref: RelationRef, pos) -> RelationDecl:
        decl = self.decls.get(ref)
        if decl is None:
            raise UnknownRelation(f"relation {ref} is not declared", pos)
        return decl

    def _fact(self, statement) -> Fact:
        _, relation, peer, values, pos = statement
        host = self._peer(peer)
        ref = RelationRef(str(relation), host)
        if ref.relation == ACL_RELATION:
            raise ReservedRelation("acl facts are written with grant directives", pos)
        decl = self._lookup(ref, pos)
        if len(values) != decl.arity:
            raise ArityMismatch(f"{ref} has arity {decl.arity}, got {len(values)} argument(s)", pos)
        if not decl.is_extensional:
            raise NotExtensional(f"{ref} is intentional; facts go into extensional relations", pos)
        return Fact(ref, values, author=PrincipalId(host), pos=pos)

    def _rule(self, statement) -> Rule:
        _, host, head, body, pos = statement
        host_id = self._peer(host)
        rule = Rule(head, body, host_id, PrincipalId(host_id), pos=pos)
        check_safety(rule)
        self.check_rule(rule)
        return rule

    def check_rule(self, rule: Rule) -> None:
        peer = self.principals.get(rule.host)
        if peer is None or not peer.is_peer:
            raise UnknownPeer(f"peer {rule.host} is not declared", rule.pos)
        for atom in (rule.head,) + rule.body:
            if isinstance(atom.ref.peer, str):
                known = self.principals.get(atom.ref.peer)
                if known is None or not known.is_peer:
                    raise UnknownPeer(f"peer {atom.ref.peer} is not declared", atom.pos)
            if not atom.ref.is_ground:
                continue
            decl = self._lookup(atom.ref, atom.pos)
            if len(atom.args) != decl.arity:
                raise ArityMismatch(
                    f"{atom.ref} has arity {decl.arity}, got {len(atom.args)} argument(s)", atom.pos
                )

    def _grant(self, statement) -> Grant:
        _, privilege, relation, peer, grantee, pos = statement
        ref = RelationRef(str(relation), self._peer(peer))
        self._lookup(ref, pos)
        return Grant(ref, self._principal(grantee), privilege, pos=pos)


_default_parser: Optional[ScenarioParser] = None


def _parser() -> ScenarioParser:
    global _default_parser
    if _default_parser is None:
        _default_parser = ScenarioParser()
    return _default_parser


def parse_program(text: str) -> Program:
    """Parse and validate scenario text

    Args:
        text: Scenario source

    Returns:
        The validated Program

    Raises:
        ScenarioError: with the line and column of the first offending element
    """
    return _parser().parse_program(text)


def parse_rule(text: str, host: PeerId, program: Optional[Program] = None) -> Rule:
    """One rule hosted at `host`; names are checked against `program` when given"""
    return _parser().parse_rule(text, host, program)


def parse_atom(text: str) -> Atom:
    """A single atom, as used by query patterns"""
    return _parser().parse_atom(text)


def load_program(path: Path) -> Program:
    """Parse a scenario file; LF and CRLF line endings are both accepted"""
    return parse_program(Path(path).read_text(encoding="utf-8"))
