"""Shared data model: principals, relations, facts, rules and provenance values

Every type here is an immutable value. Identifiers, relation names and
constants are plain strings; variables are `Var` instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional, Tuple, Union

PeerId = str


@dataclass(frozen=True)
class SourcePos:
    """1-based line/column of an element in scenario text"""

    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class PrincipalKind(str, Enum):
    PEER = "peer"
    VIRTUAL = "principal"


@dataclass(frozen=True, order=True)
class PrincipalId:
    name: str
    kind: PrincipalKind = PrincipalKind.PEER

    def __post_init__(self):
        if not self.name:
            raise ValueError("principal name must be nonempty")

    @property
    def is_peer(self) -> bool:
        return self.kind is PrincipalKind.PEER

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Var:
    """A rule variable, written `$name`"""

    name: str

    def __str__(self) -> str:
        return f"${self.name}"


Term = Union[str, Var]
Binding = Mapping[Var, str]


def is_var(term: Term) -> bool:
    return isinstance(term, Var)


def quote_constant(value: str) -> str:
    """Constant as a scenario string literal; line breaks have no literal form"""
    if "\n" in value or "\r" in value:
        raise ValueError(f"constant {value!r} contains a line break")
    escaped = value.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _render_arg(term: Term) -> str:
    return str(term) if is_var(term) else quote_constant(term)


def _resolve(term: Term, binding: Binding) -> Term:
    if is_var(term):
        return binding.get(term, term)
    return term


@dataclass(frozen=True)
class RelationRef:
    """`relation@peer`; either part may be a variable inside rule atoms"""

    relation: Term
    peer: Term

    @property
    def is_ground(self) -> bool:
        return not is_var(self.relation) and not is_var(self.peer)

    @property
    def sort_key(self) -> Tuple[str, str]:
        return (str(self.peer), str(self.relation))

    def substitute(self, binding: Binding) -> "RelationRef":
        return RelationRef(_resolve(self.relation, binding), _resolve(self.peer, binding))

    def variables(self) -> Iterator[Var]:
        for term in (self.relation, self.peer):
            if is_var(term):
                yield term

    def __str__(self) -> str:
        return f"{self.relation}@{self.peer}"


class RelationKind(str, Enum):
    EXTENSIONAL = "ext"
    INTENTIONAL = "int"


@dataclass(frozen=True)
class RelationDecl:
    ref: RelationRef
    arity: int
    kind: RelationKind
    owner: PrincipalId
    pos: Optional[SourcePos] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.ref.is_ground:
            raise ValueError(f"relation declaration must be ground: {self.ref}")
        if self.arity < 0:
            raise ValueError(f"negative arity for {self.ref}")

    @property
    def is_extensional(self) -> bool:
        return self.kind is RelationKind.EXTENSIONAL


@dataclass(frozen=True, order=True)
class Token:
    """Provenance token of one extensional fact; equal iff ids are equal"""

    id: int
    source: RelationRef = field(compare=False)

    def __str__(self) -> str:
        return f"{self.source}#{self.id}"


@dataclass(frozen=True)
class Provenance:
    """Alternative derivations of a fact, each a set of tokens"""

    alternatives: frozenset

    def __post_init__(self):
        if not self.alternatives:
            raise ValueError("provenance needs at least one derivation")

    @classmethod
    def of(cls, *derivations: Iterable[Token]) -> "Provenance":
        return cls(frozenset(frozenset(d) for d in derivations))

    def sorted_alternatives(self) -> list:
        ordered = [tuple(sorted(d)) for d in self.alternatives]
        return sorted(ordered, key=lambda d: [t.id for t in d])

    def __str__(self) -> str:
        parts = ("{" + ",".join(str(t) for t in d) + "}" for d in self.sorted_alternatives())
        return "{" + ",".join(parts) + "}"


@dataclass(frozen=True)
class Fact:
    """A ground tuple in relation@peer

    Facts compare on (ref, args) only; token and author ride along.
    """

    ref: RelationRef
    args: Tuple[str, ...]
    token: Optional[Token] = field(default=None, compare=False)
    author: Optional[PrincipalId] = field(default=None, compare=False)
    pos: Optional[SourcePos] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.ref.is_ground:
            raise ValueError(f"fact relation must be ground: {self.ref}")
        object.__setattr__(self, "args", tuple(self.args))
        if any(is_var(a) for a in self.args):
            raise ValueError(f"fact arguments must be constants: {self.ref}")

    @property
    def sort_key(self):
        return (self.ref.peer, self.ref.relation, self.args)

    def with_token(self, token: Optional[Token]) -> "Fact":
        return replace(self, token=token)

    def with_author(self, author: Optional[PrincipalId]) -> "Fact":
        return replace(self, author=author)

    def __str__(self) -> str:
        return f"{self.ref}({','.join(quote_constant(a) for a in self.args)})"


@dataclass(frozen=True)
class Atom:
    ref: RelationRef
    args: Tuple[Term, ...]
    hidden: bool = False
    pos: Optional[SourcePos] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    @property
    def is_ground(self) -> bool:
        return self.ref.is_ground and not any(is_var(a) for a in self.args)

    def variables(self) -> Iterator[Var]:
        yield from self.ref.variables()
        for arg in self.args:
            if is_var(arg):
                yield arg

    def substitute(self, binding: Binding) -> "Atom":
        return replace(
            self,
            ref=self.ref.substitute(binding),
            args=tuple(_resolve(a, binding) for a in self.args),
        )

    def to_fact(self, author: Optional[PrincipalId] = None) -> Fact:
        return Fact(self.ref, self.args, author=author)

    def __str__(self) -> str:
        text = f"{self.ref}({','.join(_render_arg(a) for a in self.args)})"
        return f"[hide {text}]" if self.hidden else text


@dataclass(frozen=True)
class Rule:
    """head :- body, hosted at `host` and run with `author`'s privileges

    `delegator` is None for installed rules and the delegating principal for
    rules received by delegation. `premise` is the provenance of the
    delegator-side bindings a residual rule was produced from.
    """

    head: Atom
    body: Tuple[Atom, ...]
    host: PeerId
    author: PrincipalId
    delegator: Optional[PrincipalId] = None
    premise: Optional[Provenance] = None
    pos: Optional[SourcePos] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if not self.body:
            raise ValueError("rule body must be nonempty")
        if self.head.hidden:
            raise ValueError("hide is only allowed on body atoms")

    @property
    def is_delegated(self) -> bool:
        return self.delegator is not None

    def variables(self) -> Iterator[Var]:
        yield from self.head.variables()
        for atom in self.body:
            yield from atom.variables()

    def substitute(self, binding: Binding) -> "Rule":
        return replace(
            self,
            head=self.head.substitute(binding),
            body=tuple(a.substitute(binding) for a in self.body),
        )

    @property
    def text(self) -> str:
        return f"{self.head} :- {', '.join(str(a) for a in self.body)}"

    @property
    def sort_key(self):
        return (self.host, self.text, self.author.name, str(self.premise or ""))

    def __str__(self) -> str:
        return self.text
