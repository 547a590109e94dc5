"""Round trace: the line-oriented record of a simulation run"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

from src.engine.peer_state import DelegationMsg, InboxItem, Message, PeerState

SECTIONS = ("messages", "delegations", "edb", "idb", "rejected")


def edb_lines(states: Iterable[PeerState]) -> List[str]:
    lines = []
    for state in states:
        for fact in state.edb:
            token = str(fact.token) if fact.token is not None else "pending"
            lines.append(f"fact {fact} token={token} author={fact.author}")
    return sorted(lines)


def idb_lines(states: Iterable[PeerState]) -> List[str]:
    return sorted(f"fact {fact} prov={prov}" for state in states for fact, prov in state.idb.items())


@dataclass(frozen=True)
class RoundTrace:
    round: int
    messages: Tuple[str, ...] = ()
    delegations: Tuple[str, ...] = ()
    edb: Tuple[str, ...] = ()
    idb: Tuple[str, ...] = ()
    rejected: Tuple[str, ...] = ()

    @classmethod
    def record(
        cls,
        round_no: int,
        states: Sequence[PeerState],
        outbox: Iterable[InboxItem],
        rejected: Iterable[str],
    ) -> "RoundTrace":
        outbox = list(outbox)
        return cls(
            round=round_no,
            messages=tuple(sorted(str(m) for m in outbox if isinstance(m, Message))),
            delegations=tuple(sorted(str(d) for d in outbox if isinstance(d, DelegationMsg))),
            edb=tuple(edb_lines(states)),
            idb=tuple(idb_lines(states)),
            rejected=tuple(sorted(rejected)),
        )

    def render(self) -> List[str]:
        lines = [f"round {self.round}"]
        for section in SECTIONS:
            lines.append(f"  {section}")
            lines.extend(f"    {line}" for line in getattr(self, section))
        return lines


@dataclass
class Trace:
    seed: int = 0
    rounds: List[RoundTrace] = field(default_factory=list)

    def append(self, round_trace: RoundTrace) -> None:
        self.rounds.append(round_trace)

    def render(self) -> str:
        lines = [f"trace seed={self.seed}"]
        for round_trace in self.rounds:
            lines.extend(round_trace.render())
        return "\n".join(lines) + "\n"

    def rejections(self) -> int:
        return sum(len(r.rejected) for r in self.rounds)

    def write(self, path: Path) -> None:
        Path(path).write_text(self.render(), encoding="utf-8")
