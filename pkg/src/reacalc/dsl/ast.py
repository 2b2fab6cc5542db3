"""Process syntax trees.

Every node carries an optional source location (``loc``) that is ignored by
equality, so trees parsed from different layouts of the same text compare
equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Callable, Iterator, Optional, Union

from ..expr import Expr, Lit, free_vars, replace as replace_expr

Loc = Optional[tuple[int, int]]


def _loc() -> Loc:
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Skip:
    loc: Loc = _loc()


@dataclass(frozen=True)
class Stop:
    loc: Loc = _loc()


@dataclass(frozen=True)
class Chaos:
    loc: Loc = _loc()


@dataclass(frozen=True)
class Miracle:
    loc: Loc = _loc()


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Prefix:
    """``ch -> P``, ``ch!e -> P`` or ``ch?x -> P``.

    Exactly one of ``out`` / ``inp`` is set for data-carrying channels; both
    are ``None`` for a plain synchronisation.
    """

    channel: str
    body: "Proc"
    out: Optional[Expr] = None
    inp: Optional[str] = None
    loc: Loc = _loc()


@dataclass(frozen=True)
class Guard:
    cond: Expr
    body: "Proc"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Seq:
    left: "Proc"
    right: "Proc"
    loc: Loc = _loc()


@dataclass(frozen=True)
class ExtChoice:
    left: "Proc"
    right: "Proc"
    loc: Loc = _loc()


@dataclass(frozen=True)
class IntChoice:
    left: "Proc"
    right: "Proc"
    loc: Loc = _loc()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Proc"
    else_: "Proc"
    loc: Loc = _loc()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Proc"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Par:
    """``P [| ns1 | cs | ns2 |] Q``.

    ``form`` only records which surface syntax was used (``full``, ``sync``
    for ``[| cs |]`` or ``inter`` for ``|||``) so printing round-trips.
    """

    left: "Proc"
    right: "Proc"
    ns1: frozenset = frozenset()
    cs: frozenset = frozenset()
    ns2: frozenset = frozenset()
    form: str = field(default="full", compare=False)
    loc: Loc = _loc()


@dataclass(frozen=True)
class Ref:
    name: str
    loc: Loc = _loc()


Proc = Union[Skip, Stop, Chaos, Miracle, Assign, Prefix, Guard, Seq, ExtChoice, IntChoice, If, While, Par, Ref]

_CHILDREN = ("body", "left", "right", "then", "else_")
_EXPRS = ("expr", "out", "cond")


def children(p: Proc) -> Iterator[Proc]:
    for f in fields(p):
        if f.name in _CHILDREN:
            yield getattr(p, f.name)


def walk(p: Proc) -> Iterator[Proc]:
    yield p
    for c in children(p):
        yield from walk(c)


def map_children(p: Proc, fn: Callable[[Proc], Proc]) -> Proc:
    changes = {f.name: fn(getattr(p, f.name)) for f in fields(p) if f.name in _CHILDREN}
    return replace(p, **changes) if changes else p


def substitute_ast(p: Proc, name: str, value: Expr) -> Proc:
    """Replace the local input variable ``name`` by ``value`` throughout ``p``.

    Stops at an inner input prefix that rebinds the same name.
    """
    m = {name: value}
    changes = {}
    for f in fields(p):
        v = getattr(p, f.name)
        if f.name in _EXPRS and v is not None:
            changes[f.name] = replace_expr(v, m)
    if isinstance(p, Prefix) and p.inp == name:
        return replace(p, **changes)
    for f in fields(p):
        if f.name in _CHILDREN:
            changes[f.name] = substitute_ast(getattr(p, f.name), name, value)
    return replace(p, **changes) if changes else p


def literal_input(p: Prefix, v) -> Proc:
    """The continuation of an input prefix once the value ``v`` was received."""
    return substitute_ast(p.body, p.inp, Lit(v))


def expr_vars(p: Proc) -> frozenset[str]:
    out: set[str] = set()
    for n in walk(p):
        for f in fields(n):
            v = getattr(n, f.name)
            if f.name in _EXPRS and v is not None:
                out |= free_vars(v)
    return frozenset(out)
