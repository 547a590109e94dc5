"""Program to scenario text"""

from __future__ import annotations

from typing import Iterator

from src.parser.program import Program


def _lines(program: Program) -> Iterator[str]:
    """One statement per line, grouped by kind in declaration order"""
    for peer in program.peers:
        yield f"peer {peer.name}"
    for principal in program.principals:
        yield f"principal {principal.name}"
    for decl in program.declarations:
        yield f"relation {decl.kind.value} {decl.ref}/{decl.arity} owner {decl.owner.name}"
    for fact in program.facts:
        yield f"fact {fact}"
    for rule in program.rules:
        yield f"rule at {rule.host}: {rule.text}"
    for g in program.grants:
        yield str(g)


def print_program(program: Program) -> str:
    """Scenario text that parses back to an equal program

    Statements come out grouped by kind, one per line.
    """
    return "".join(line + "\n" for line in _lines(program))
