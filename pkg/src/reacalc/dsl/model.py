"""Parsed models: declarations plus named processes and specifications."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..contract import Alphabet
from ..expr import Expr
from ..lens import Domain, StateSpace


@dataclass(frozen=True)
class SpecDecl:
    """``spec NAME = [ pre |- peri | post ]`` with opaque predicates.

    The predicates range over the initial state variables, ``tt`` (the
    trace so far), ``acc`` (the accepted events, pericondition only) and
    primed variables ``x'`` (the final state, postcondition only).  A
    missing ``pre`` means "no assumption".
    """

    peri: Expr
    post: Expr
    pre: Optional[Expr] = None
    loc: Optional[tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Model:
    channels: tuple[tuple[str, Optional[Domain]], ...] = ()
    vars: tuple[tuple[str, Domain], ...] = ()
    processes: tuple[tuple[str, object], ...] = ()
    specs: tuple[tuple[str, SpecDecl], ...] = ()

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.channels)

    @property
    def space(self) -> StateSpace:
        return StateSpace(self.vars)

    @property
    def process_map(self) -> dict[str, object]:
        return dict(self.processes)

    @property
    def spec_map(self) -> dict[str, SpecDecl]:
        return dict(self.specs)

    def process(self, name: str):
        from ..errors import UnknownName

        for n, p in self.processes:
            if n == name:
                return p
        raise UnknownName(f"no process named {name!r}")
