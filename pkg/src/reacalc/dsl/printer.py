"""Printing of models, processes and contracts.

Process and model printing produces text that parses back to the same tree.
"""

from __future__ import annotations

from typing import Any

from ..contract import Contract
from ..expr import show
from ..expr import _wrap as _wrap_expr
from . import ast as A
from .model import Model, SpecDecl

# Binding strength of process operators (higher binds tighter).
_PAR, _ICH, _ECH, _SEQ, _UNARY = 1, 2, 3, 4, 5


def _names(xs) -> str:
    return "{" + ", ".join(sorted(xs)) + "}"


def _par_op(p: A.Par) -> str:
    if p.form == "inter" and not (p.ns1 or p.cs or p.ns2):
        return "|||"
    if p.form == "sync" and not (p.ns1 or p.ns2):
        return f"[| {_names(p.cs)} |]"
    return f"[| {_names(p.ns1)} | {_names(p.cs)} | {_names(p.ns2)} |]"


def _level(p: Any) -> int:
    if isinstance(p, A.Par):
        return _PAR
    if isinstance(p, A.IntChoice):
        return _ICH
    if isinstance(p, A.ExtChoice):
        return _ECH
    if isinstance(p, A.Seq):
        return _SEQ
    return _UNARY


def _at(p: Any, need: int) -> str:
    s = show_process(p)
    return f"({s})" if _level(p) < need else s


def _cond(e) -> str:
    """A condition in a position where a leading ``if`` would be misread."""
    return _wrap_expr(e, 2)


def show_process(p: Any) -> str:
    if isinstance(p, A.Skip):
        return "skip"
    if isinstance(p, A.Stop):
        return "stop"
    if isinstance(p, A.Chaos):
        return "chaos"
    if isinstance(p, A.Miracle):
        return "miracle"
    if isinstance(p, A.Ref):
        return p.name
    if isinstance(p, A.Assign):
        return f"{p.var} := {show(p.expr)}"
    if isinstance(p, A.Prefix):
        head = p.channel
        if p.out is not None:
            head += f"!{_wrap_expr(p.out, 2)}"
        elif p.inp is not None:
            head += f"?{p.inp}"
        return f"{head} -> {_at(p.body, _UNARY)}"
    if isinstance(p, A.Guard):
        return f"{_cond(p.cond)} & {_at(p.body, _UNARY)}"
    if isinstance(p, A.If):
        return f"if {_cond(p.cond)} then {show_process(p.then)} else {_at(p.else_, _UNARY)}"
    if isinstance(p, A.While):
        return f"while {_cond(p.cond)} do {_at(p.body, _UNARY)}"
    if isinstance(p, A.Seq):
        return f"{_at(p.left, _UNARY)} ; {_at(p.right, _SEQ)}"
    if isinstance(p, A.ExtChoice):
        return f"{_at(p.left, _ECH)} [] {_at(p.right, _SEQ)}"
    if isinstance(p, A.IntChoice):
        return f"{_at(p.left, _ICH)} |~| {_at(p.right, _ECH)}"
    if isinstance(p, A.Par):
        return f"{_at(p.left, _PAR)} {_par_op(p)} {_at(p.right, _ICH)}"
    raise TypeError(f"not a process: {p!r}")


def show_spec(d: SpecDecl) -> str:
    pre = f"{show(d.pre)} |- " if d.pre is not None else ""
    return f"[ {pre}{show(d.peri)} | {show(d.post)} ]"


def show_model(m: Model) -> str:
    lines = []
    for n, d in m.channels:
        lines.append(f"channel {n}" + (f" : {d}" if d is not None else ""))
    for n, d in m.vars:
        lines.append(f"var {n} : {d}")
    for n, p in m.processes:
        lines.append(f"process {n} = {show_process(p)}")
    for n, s in m.specs:
        lines.append(f"spec {n} = {show_spec(s)}")
    return "\n".join(lines) + "\n"


def contract_text(c: Contract) -> str:
    out = c.pretty()
    if c.star_bound is not None:
        out += f"\n(loops unrolled up to {c.star_bound} iterations)"
    return out


def contract_json(c: Contract) -> dict[str, Any]:
    d: dict[str, Any] = dict(c.term_lists())
    d["star_bound"] = c.star_bound
    return d

