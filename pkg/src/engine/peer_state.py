"""Per-peer state and the items peers exchange between rounds"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Dict, Mapping, Tuple, Union

from src.core.model import Fact, PeerId, PrincipalId, Provenance, RelationDecl, Rule


@dataclass(frozen=True)
class EngineSettings:
    max_alternatives: int = 64
    max_fixpoint_iterations: int = 10000

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> "EngineSettings":
        return cls(
            max_alternatives=int(config.get("provenance", {}).get("max_alternatives", 64)),
            max_fixpoint_iterations=int(config.get("engine", {}).get("max_fixpoint_iterations", 10000)),
        )


DEFAULT_SETTINGS = EngineSettings()


@dataclass(frozen=True)
class PeerState:
    """Everything one peer holds between two rounds

    `idb` and `contributed` are recomputed every round; `delegated_in` holds
    only the delegations received in the latest round.
    """

    id: PeerId
    decls: Tuple[RelationDecl, ...] = ()
    edb: frozenset = frozenset()
    idb: Mapping[Fact, Provenance] = field(default_factory=dict)
    installed: Tuple[Rule, ...] = ()
    delegated_in: Tuple[Rule, ...] = ()
    contributed: Mapping[Fact, Provenance] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "idb", MappingProxyType(dict(self.idb)))
        object.__setattr__(self, "contributed", MappingProxyType(dict(self.contributed)))

    @property
    def principal(self) -> PrincipalId:
        return PrincipalId(self.id)

    @property
    def rules(self) -> Tuple[Rule, ...]:
        return tuple(sorted(self.installed + self.delegated_in, key=lambda r: r.sort_key))

    def sorted_edb(self):
        return sorted(self.edb, key=lambda f: f.sort_key)

    def sorted_idb(self):
        return sorted(self.idb.items(), key=lambda item: item[0].sort_key)


@dataclass(frozen=True)
class Message:
    """A fact sent to an extensional relation at another peer"""

    sender: PeerId
    author: PrincipalId
    fact: Fact

    @property
    def target(self) -> PeerId:
        return self.fact.ref.peer

    @property
    def sort_key(self):
        return (self.sender, "message", str(self))

    def __str__(self) -> str:
        return f"{self.sender} -> {self.target} author={self.author} fact {self.fact}"


@dataclass(frozen=True)
class DelegationMsg:
    """A rule installed at a remote peer, or a materialized remote view

    With an empty `view` the residual rule is installed at `to` and run in
    a sandbox with `author`'s privileges. With a non-empty `view` the rule
    is the sender's defining rule and `view` holds the facts it derived for
    an intentional relation at `to`.
    """

    sender: PeerId
    to: PeerId
    author: PrincipalId
    residual: Rule
    view: Tuple[Tuple[Fact, Provenance], ...] = ()

    @property
    def target(self) -> PeerId:
        return self.to

    @property
    def sort_key(self):
        return (self.sender, "delegation", str(self))

    def __str__(self) -> str:
        text = f"{self.sender} -> {self.to} author={self.author} rule {self.residual}"
        if self.residual.premise is not None:
            text += f" premise={self.residual.premise}"
        if self.view:
            text += f" view={len(self.view)} facts"
        return text


InboxItem = Union[Message, DelegationMsg]


@dataclass(frozen=True)
class StepResult:
    state: PeerState
    outbox: Tuple[InboxItem, ...] = ()
    rejected: Tuple[str, ...] = ()
