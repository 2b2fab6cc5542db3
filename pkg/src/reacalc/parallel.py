"""Parallel composition of contracts.

The branches of ``P ⟦ns1|cs|ns2⟧ Q`` run on private copies of the state,
synchronise on the channels in ``cs`` and interleave everything else.  On
termination the final state is rebuilt from the initial one by overriding
``ns1`` with the left branch's values and ``ns2`` with the right branch's.

Trace merging exists in two flavours.  :func:`trace_merge_concrete` follows
the recursive definition literally (including truncation when the branches
disagree on a synchronised event).  :func:`trace_merge_symbolic` works on
symbolic traces and only produces *complete* merges -- those in which both
branches agree on the projection onto ``cs`` -- turning data agreement of
synchronised events into an equality constraint.

The precondition of a parallel composition is computed with the weakest rely
(:func:`wrely`): for each divergence point of one branch and each behaviour
of the other, the merged traces at which the composition can be driven into
divergence are forbidden.  Only the minimal such traces are generated: the
diverging side is extended by exactly the synchronised events still needed
to match the other side, and nothing else.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Union

from .contract import Contract, _check_compatible, _mk
from .errors import ExtensionBoundExceeded, LensOverlap
from .expr import Event, Expr, Subst, and_, fold, is_false
from .lens import LensSet
from .rel import (
    AcceptSet,
    ETerm,
    ITerm,
    PhiTerm,
    PreRel,
    TraceExpr,
    _event_match,
    accepts_intersection,
    accepts_union,
    mk_e,
    mk_i,
    mk_phi,
    normalize_pre,
    rel,
)

ChannelSet = frozenset  # frozenset[str]


@dataclass(frozen=True)
class MergeResidual:
    """One symbolic merge result: the trace, valid when ``cond`` holds."""

    cond: Expr
    trace: TraceExpr


@dataclass(frozen=True)
class Violation:
    """The negation of an assumption ``I(s|t)``: ``s`` holds and ``t ≤ tt``.

    Used as a weakest-rely operand standing for a branch that has already
    diverged; its trace may be extended arbitrarily.
    """

    cond: Expr
    trace: TraceExpr


# ---------------------------------------------------------------------------
# Trace merge
# ---------------------------------------------------------------------------


def trace_merge_concrete(
    t1: tuple[Event, ...], t2: tuple[Event, ...], cs: Iterable[str]
) -> frozenset[tuple[Event, ...]]:
    """Merge two ground traces following the recursive definition."""
    return _merge_concrete(tuple(t1), tuple(t2), frozenset(cs))


@lru_cache(maxsize=65536)
def _merge_concrete(t1: tuple, t2: tuple, cs: frozenset) -> frozenset:
    def cons(e: Event, ts: frozenset) -> frozenset:
        return frozenset((e,) + t for t in ts)

    if not t1 and not t2:
        return frozenset({()})
    if not t2:
        e = t1[0]
        return frozenset({()}) if e.channel in cs else cons(e, _merge_concrete(t1[1:], (), cs))
    if not t1:
        e = t2[0]
        return frozenset({()}) if e.channel in cs else cons(e, _merge_concrete((), t2[1:], cs))
    e1, e2 = t1[0], t2[0]
    in1, in2 = e1.channel in cs, e2.channel in cs
    if e1 == e2:
        if in1:
            return cons(e1, _merge_concrete(t1[1:], t2[1:], cs))
        return cons(e1, _merge_concrete(t1[1:], t2, cs) | _merge_concrete(t1, t2[1:], cs))
    if in1 and in2:
        return frozenset({()})
    if in1:
        return cons(e2, _merge_concrete(t1, t2[1:], cs))
    if in2:
        return cons(e1, _merge_concrete(t1[1:], t2, cs))
    return cons(e1, _merge_concrete(t1[1:], t2, cs)) | cons(e2, _merge_concrete(t1, t2[1:], cs))


def project(t: Iterable, cs: Iterable[str]) -> tuple:
    cs = frozenset(cs)
    return tuple(e for e in t if e.channel in cs)


def _merge_symbolic(t1: TraceExpr, t2: TraceExpr, cs: frozenset) -> list[tuple[tuple[Expr, ...], TraceExpr]]:
    if not t1 and not t2:
        return [((), ())]
    out: list[tuple[tuple[Expr, ...], TraceExpr]] = []
    if t1 and t1[0].channel not in cs:
        out += [(c, (t1[0],) + tr) for c, tr in _merge_symbolic(t1[1:], t2, cs)]
    if t2 and t2[0].channel not in cs:
        out += [(c, (t2[0],) + tr) for c, tr in _merge_symbolic(t1, t2[1:], cs)]
    if t1 and t2 and t1[0].channel in cs and t1[0].channel == t2[0].channel:
        eq = _event_match(t1[0], t2[0])
        if not is_false(eq):
            out += [((eq,) + c, (t1[0],) + tr) for c, tr in _merge_symbolic(t1[1:], t2[1:], cs)]
    return out


def trace_merge_symbolic(t1: TraceExpr, t2: TraceExpr, cs: Iterable[str]) -> frozenset[MergeResidual]:
    """All complete merges of two symbolic traces with their side conditions."""
    res = set()
    for conds, tr in _merge_symbolic(tuple(t1), tuple(t2), frozenset(cs)):
        c = fold(and_(*conds))
        if not is_false(c):
            res.add(MergeResidual(c, tr))
    return frozenset(res)


# ---------------------------------------------------------------------------
# State merge
# ---------------------------------------------------------------------------


def _lens(ns: LensSet | Iterable[str]) -> LensSet:
    return ns if isinstance(ns, LensSet) else LensSet.of(ns)


def subst_par_merge(s1: Subst, ns1, s2: Subst, ns2) -> Subst:
    """Keep ``s1``'s updates inside ``ns1`` and ``s2``'s inside ``ns2``; drop the rest."""
    ns1, ns2 = _lens(ns1), _lens(ns2)
    if ns1.vars & ns2.vars:
        raise LensOverlap(f"name sets overlap on {sorted(ns1.vars & ns2.vars)}")
    d = {x: s1.get(x) for x in ns1.vars}
    d.update({x: s2.get(x) for x in ns2.vars})
    return Subst(d)


# ---------------------------------------------------------------------------
# Observation merges
# ---------------------------------------------------------------------------


def merge_finalisers(p: PhiTerm, q: PhiTerm, ns1, cs, ns2) -> frozenset[PhiTerm]:
    upd = subst_par_merge(p.update, ns1, q.update, ns2)
    return rel(
        mk_phi(and_(p.cond, q.cond, r.cond), upd, r.trace)
        for r in trace_merge_symbolic(p.trace, q.trace, cs)
    )


def _split_accepts(a: AcceptSet, cs: frozenset) -> tuple[AcceptSet, AcceptSet]:
    inside = frozenset(x for x in a if x.event.channel in cs)
    return inside, a - inside


def merged_accepts(a: AcceptSet, b: AcceptSet, cs: frozenset) -> AcceptSet:
    """``(A ∩ B ∩ cs) ∪ ((A ∪ B) ∖ cs)`` on guarded entries."""
    ai, ao = _split_accepts(a, cs)
    bi, bo = _split_accepts(b, cs)
    return accepts_union(accepts_intersection(ai, bi), ao, bo)


def merge_quiescent(p: ETerm | PhiTerm, q: ETerm | PhiTerm, cs) -> frozenset[ETerm]:
    """Merge a quiescent observation with a quiescent or terminated one."""
    cs = frozenset(cs)
    if isinstance(p, ETerm) and isinstance(q, ETerm):
        acc = merged_accepts(p.accepts, q.accepts, cs)
    elif isinstance(p, ETerm):
        acc = _split_accepts(p.accepts, cs)[1]
    elif isinstance(q, ETerm):
        acc = _split_accepts(q.accepts, cs)[1]
    else:
        raise TypeError("at least one side must be quiescent")
    return rel(
        mk_e(and_(p.cond, q.cond, r.cond), r.trace, acc)
        for r in trace_merge_symbolic(p.trace, q.trace, cs)
    )


# ---------------------------------------------------------------------------
# Weakest rely
# ---------------------------------------------------------------------------

Operand = Union[PhiTerm, ETerm, Violation]


def _prefix_match(short: TraceExpr, long: TraceExpr) -> Expr | None:
    """Condition for ``short`` to be a prefix of ``long`` (projected traces)."""
    if len(short) > len(long):
        return None
    conds = []
    for a, b in zip(short, long):
        if a.channel != b.channel:
            return None
        conds.append(_event_match(a, b))
    c = fold(and_(*conds))
    return None if is_false(c) else c


def wrely(p: Operand, q: ITerm, cs, extension_bound: int | None = None) -> PreRel:
    """Weakest rely of one behaviour ``p`` against the assumption ``q`` of the other branch.

    Returns the assumptions (a conjunction) that forbid every minimal merged
    trace at which ``q``'s branch has diverged while ``p``'s branch exhibits
    ``p``.
    """
    cs = frozenset(cs)
    t1, t2 = tuple(p.trace), tuple(q.trace)
    bound = len(t1) + len(t2) if extension_bound is None else extension_bound
    p1, p2 = project(t1, cs), project(t2, cs)
    base = and_(p.cond, q.cond)
    candidates: list[tuple[Expr, TraceExpr, TraceExpr]] = []
    # The diverged side (t2) is extended with the sync events t1 still needs.
    c = _prefix_match(p2, p1)
    if c is not None:
        candidates.append((c, t2 + p1[len(p2):], t1))
    # A violation operand may itself be extended to catch up with t2.
    if isinstance(p, Violation) and len(p1) < len(p2):
        c = _prefix_match(p1, p2)
        if c is not None:
            candidates.append((c, t2, t1 + p2[len(p1):]))
    terms = []
    for c, other, mine in candidates:
        if len(other) - len(t2) + len(mine) - len(t1) > bound:
            raise ExtensionBoundExceeded(f"extension longer than {bound} events")
        for r in trace_merge_symbolic(other, mine, cs):
            terms.append(mk_i(and_(base, c, r.cond), r.trace))
    return normalize_pre(terms)


def wrely_rel(ps: Iterable[Operand], qs: PreRel, cs) -> PreRel:
    """``(⋁ p) wrely (⋀ q) = ⋀_{p,q} (p wrely q)``."""
    qs = list(qs)
    out: list[ITerm] = []
    for p in ps:
        for q in qs:
            out.extend(wrely(p, q, cs))
    return normalize_pre(out)


# ---------------------------------------------------------------------------
# Contracts
# ---------------------------------------------------------------------------


def par_contract(c1: Contract, ns1, cs, ns2, c2: Contract) -> Contract:
    """Calculate ``c1 ⟦ns1|cs|ns2⟧ c2``."""
    _check_compatible([c1, c2])
    ns1, ns2 = _lens(ns1), _lens(ns2)
    ns1.check(c1.space)
    ns2.check(c1.space)
    if ns1.vars & ns2.vars:
        raise LensOverlap(f"name sets overlap on {sorted(ns1.vars & ns2.vars)}")
    cs = frozenset(cs)
    ops1: list[Operand] = [Violation(t.cond, t.trace) for t in c1.pre] + list(c1.peri) + list(c1.post)
    ops2: list[Operand] = [Violation(t.cond, t.trace) for t in c2.pre] + list(c2.peri) + list(c2.post)
    pre = normalize_pre(wrely_rel(ops1, c2.pre, cs) | wrely_rel(ops2, c1.pre, cs))
    peri: set[ETerm] = set()
    for a in c1.peri:
        for b in list(c2.peri) + list(c2.post):
            peri |= merge_quiescent(a, b, cs)
    for a in c1.post:
        for b in c2.peri:
            peri |= merge_quiescent(a, b, cs)
    post: set[PhiTerm] = set()
    for a in c1.post:
        for b in c2.post:
            post |= merge_finalisers(a, b, ns1, cs, ns2)
    return _mk(pre, frozenset(peri), frozenset(post), [c1, c2])


def interleave_contract(c1: Contract, c2: Contract) -> Contract:
    return par_contract(c1, LensSet(), frozenset(), LensSet(), c2)


def sync_contract(c1: Contract, cs, c2: Contract) -> Contract:
    return par_contract(c1, LensSet(), cs, LensSet(), c2)
