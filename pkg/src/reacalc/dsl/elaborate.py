"""Map process syntax trees to calculated contracts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from ..contract import (
    DEFAULT_STAR_BOUND,
    Alphabet,
    Contract,
    assign,
    chaos,
    cond_contract,
    do,
    extchoice_contract,
    guard_contract,
    intchoice_contract,
    miracle,
    seq_contract,
    skip,
    stop,
    truncate,
    while_contract,
)
from ..errors import DslError, ReacalcError, UnknownName
from ..expr import Lit, Subst
from ..lens import StateSpace
from ..parallel import par_contract
from ..rel import EventExpr
from . import ast as A
from .model import Model


def _located(err: ReacalcError, loc) -> ReacalcError:
    """Attach the innermost source location to an error raised during elaboration."""
    if loc is not None and getattr(err, "loc", None) is None:
        err.loc = loc  # type: ignore[attr-defined]
        if not isinstance(err, DslError):
            err.args = (f"{loc[0]}:{loc[1]}: {err}",)
    return err


@dataclass
class Elaborator:
    alphabet: Alphabet
    space: StateSpace
    processes: Mapping[str, Any] = field(default_factory=dict)
    star_bound: int = DEFAULT_STAR_BOUND
    trace_cap: Optional[int] = None

    def __post_init__(self) -> None:
        self._cache: dict[str, Contract] = {}
        self._active: set[str] = set()

    def contract(self, p: Any) -> Contract:
        try:
            c = self._contract(p)
        except ReacalcError as e:
            raise _located(e, getattr(p, "loc", None))
        return c if self.trace_cap is None else truncate(c, self.trace_cap)

    def _flatten(self, p: Any, kind: type) -> list:
        if isinstance(p, kind):
            return self._flatten(p.left, kind) + self._flatten(p.right, kind)
        return [p]

    def _contract(self, p: Any) -> Contract:
        sp, al = self.space, self.alphabet
        if isinstance(p, A.Skip):
            return skip(sp, al)
        if isinstance(p, A.Stop):
            return stop(sp, al)
        if isinstance(p, A.Chaos):
            return chaos(sp, al)
        if isinstance(p, A.Miracle):
            return miracle(sp, al)
        if isinstance(p, A.Assign):
            return assign(Subst({p.var: p.expr}), sp, al)
        if isinstance(p, A.Prefix):
            if p.inp is not None:
                dom = al.domain(p.channel)
                branches = [
                    seq_contract(
                        do(EventExpr(p.channel, Lit(v)), sp, al),
                        self.contract(A.literal_input(p, v)),
                    )
                    for v in dom.values()
                ]
                return extchoice_contract(branches)
            return seq_contract(do(EventExpr(p.channel, p.out), sp, al), self.contract(p.body))
        if isinstance(p, A.Guard):
            return guard_contract(p.cond, self.contract(p.body))
        if isinstance(p, A.Seq):
            return seq_contract(self.contract(p.left), self.contract(p.right))
        if isinstance(p, A.ExtChoice):
            return extchoice_contract([self.contract(q) for q in self._flatten(p, A.ExtChoice)])
        if isinstance(p, A.IntChoice):
            return intchoice_contract([self.contract(q) for q in self._flatten(p, A.IntChoice)])
        if isinstance(p, A.If):
            return cond_contract(self.contract(p.then), p.cond, self.contract(p.else_))
        if isinstance(p, A.While):
            return while_contract(p.cond, self.contract(p.body), self.star_bound)
        if isinstance(p, A.Par):
            return par_contract(self.contract(p.left), p.ns1, p.cs, p.ns2, self.contract(p.right))
        if isinstance(p, A.Ref):
            return self.named(p.name)
        raise TypeError(f"not a process: {p!r}")

    def named(self, name: str) -> Contract:
        if name in self._cache:
            return self._cache[name]
        if name not in self.processes:
            raise UnknownName(f"unknown process {name!r}")
        if name in self._active:
            raise UnknownName(f"process {name!r} refers to itself; use while for iteration")
        self._active.add(name)
        try:
            c = self.contract(self.processes[name])
        finally:
            self._active.discard(name)
        self._cache[name] = c
        return c


def elaborate_process(
    p: Any,
    alphabet: Alphabet,
    space: StateSpace,
    processes: Mapping[str, Any] | None = None,
    star_bound: int = DEFAULT_STAR_BOUND,
    trace_cap: Optional[int] = None,
) -> Contract:
    return Elaborator(alphabet, space, processes or {}, star_bound, trace_cap).contract(p)


def elaborate(
    m: Model, proc: str, star_bound: int = DEFAULT_STAR_BOUND, trace_cap: Optional[int] = None
) -> Contract:
    """Calculate the contract of the process named ``proc`` in ``m``.

    With ``trace_cap`` set, terms with traces longer than the cap are dropped
    as the contract is built; use it when only short observations matter.
    """
    return Elaborator(m.alphabet, m.space, m.process_map, star_bound, trace_cap).named(proc)
