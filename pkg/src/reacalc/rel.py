"""Normal-form reactive relations: assumption, quiescence and finalisation terms.

Three term kinds describe everything a calculated contract can say:

``ITerm(s, t)``
    an *assumption*: if ``s`` holds initially, the trace must not reach ``t``.
    A precondition is a conjunction (a ``frozenset``) of these; the empty set
    is ``TRUE_R`` and ``{I(true | ⟨⟩)}`` is ``FALSE``.
``ETerm(s, t, A)``
    a *quiescent* observation: if ``s`` holds, the process can be stable after
    trace ``t`` accepting (at least) the events in ``A``.  ``A`` is a guarded
    list of symbolic events, refusals are its complement, so refusal sets are
    downward closed by construction.
``PhiTerm(s, σ, t)``
    a *finalisation*: if ``s`` holds the process can terminate after ``t`` with
    the state updated by ``σ``.

Pericondition and postcondition are disjunctions, again as ``frozenset``.
All conditions, traces and accept entries refer to the initial state only.
Smart constructors fold their components and return ``None`` for terms whose
condition folds to ``false``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Any, FrozenSet, Iterable, Mapping, Union

from .errors import NormalFormEscape, TraceMismatch
from .expr import (
    FALSE,
    IDENTITY,
    TRUE,
    Event,
    Expr,
    Op,
    Subst,
    and_,
    cond_implies_bounded,
    evaluate,
    fold,
    free_vars,
    is_false,
    is_true,
    not_,
    or_,
    show,
    subst_apply,
    subst_compose,
)
from .lens import StateSpace

# ---------------------------------------------------------------------------
# Symbolic events, traces and accept sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EventExpr:
    """A symbolic event ``channel.data``; ``data is None`` for pure events."""

    channel: str
    data: Expr | None = None

    def subst(self, sigma: Subst) -> "EventExpr":
        if self.data is None:
            return self
        return EventExpr(self.channel, subst_apply(sigma, self.data))

    def folded(self) -> "EventExpr":
        return self if self.data is None else EventExpr(self.channel, fold(self.data))

    def eval(self, env: Mapping[str, Any]) -> Event:
        return Event(self.channel, None if self.data is None else evaluate(self.data, env))

    def vars(self) -> frozenset[str]:
        return frozenset() if self.data is None else free_vars(self.data)

    def __str__(self) -> str:
        if self.data is None:
            return self.channel
        return show(Op("event", (self.data,), param=self.channel))


TraceExpr = tuple  # tuple[EventExpr, ...]


def trace_subst(sigma: Subst, t: TraceExpr) -> TraceExpr:
    return tuple(e.subst(sigma) for e in t)


def trace_eval(t: TraceExpr, env: Mapping[str, Any]) -> tuple[Event, ...]:
    return tuple(e.eval(env) for e in t)


def trace_str(t: TraceExpr) -> str:
    return "⟨" + ", ".join(str(e) for e in t) + "⟩"


@dataclass(frozen=True)
class AcceptEntry:
    guard: Expr
    event: EventExpr

    def __str__(self) -> str:
        if is_true(self.guard):
            return str(self.event)
        return f"{self.event} if {show(self.guard)}"


AcceptSet = FrozenSet[AcceptEntry]


def mk_accepts(entries: Iterable[AcceptEntry | EventExpr]) -> AcceptSet:
    """Fold guards and data, drop false guards and merge duplicate events."""
    by_event: dict[EventExpr, Expr] = {}
    for ent in entries:
        if isinstance(ent, EventExpr):
            ent = AcceptEntry(TRUE, ent)
        g = fold(ent.guard)
        if is_false(g):
            continue
        ev = ent.event.folded()
        if ev in by_event:
            g = fold(or_(by_event[ev], g))
        by_event[ev] = g
    return frozenset(AcceptEntry(g, ev) for ev, g in by_event.items())


def accepts_subst(sigma: Subst, a: AcceptSet) -> AcceptSet:
    return mk_accepts(AcceptEntry(subst_apply(sigma, x.guard), x.event.subst(sigma)) for x in a)


def accepts_eval(a: AcceptSet, env: Mapping[str, Any]) -> frozenset[Event]:
    return frozenset(x.event.eval(env) for x in a if evaluate(x.guard, env))


def accepts_guard(c: Expr, a: AcceptSet) -> AcceptSet:
    return mk_accepts(AcceptEntry(and_(c, x.guard), x.event) for x in a)


def accepts_union(*sets: AcceptSet) -> AcceptSet:
    return mk_accepts(x for s in sets for x in s)


def _event_match(e1: EventExpr, e2: EventExpr) -> Expr:
    """Condition under which two symbolic events denote the same event."""
    if e1.channel != e2.channel:
        return FALSE
    if e1.data is None or e2.data is None:
        return TRUE if e1.data is e2.data else FALSE
    return fold(Op("eq", (e1.data, e2.data)))


def accepts_intersection(a: AcceptSet, b: AcceptSet) -> AcceptSet:
    """Pairwise guarded intersection: exact for guarded symbolic sets."""
    return mk_accepts(
        AcceptEntry(and_(x.guard, y.guard, _event_match(x.event, y.event)), x.event)
        for x in a
        for y in b
    )


def accepts_str(a: AcceptSet) -> str:
    return "{" + ", ".join(sorted(str(x) for x in a)) + "}"


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ITerm:
    cond: Expr
    trace: TraceExpr

    def __str__(self) -> str:
        return f"C({show(self.cond)} | {trace_str(self.trace)})"


@dataclass(frozen=True)
class ETerm:
    cond: Expr
    trace: TraceExpr
    accepts: AcceptSet

    def __str__(self) -> str:
        return f"E({show(self.cond)}, {trace_str(self.trace)}, {accepts_str(self.accepts)})"


@dataclass(frozen=True)
class PhiTerm:
    cond: Expr
    update: Subst
    trace: TraceExpr

    def __str__(self) -> str:
        return f"Phi({show(self.cond)}, {self.update}, {trace_str(self.trace)})"


Term = Union[ITerm, ETerm, PhiTerm]
PreRel = FrozenSet[ITerm]
PeriRel = FrozenSet[ETerm]
PostRel = FrozenSet[PhiTerm]


def _fold_trace(t: Iterable[EventExpr]) -> TraceExpr:
    return tuple(e.folded() for e in t)


def mk_i(cond: Expr, trace: Iterable[EventExpr] = ()) -> ITerm | None:
    c = fold(cond)
    if is_false(c):
        return None
    return ITerm(c, _fold_trace(trace))


def mk_e(cond: Expr, trace: Iterable[EventExpr] = (), accepts: Iterable[Any] = ()) -> ETerm | None:
    c = fold(cond)
    if is_false(c):
        return None
    return ETerm(c, _fold_trace(trace), mk_accepts(accepts))


def mk_phi(cond: Expr, update: Subst = IDENTITY, trace: Iterable[EventExpr] = ()) -> PhiTerm | None:
    c = fold(cond)
    if is_false(c):
        return None
    return PhiTerm(c, update, _fold_trace(trace))


def rel(terms: Iterable[Term | None]) -> frozenset:
    """Collect terms into a relation, dropping ``None`` (false) entries."""
    return frozenset(t for t in terms if t is not None)


TRUE_R: PreRel = frozenset()
FALSE_PRE: PreRel = frozenset({ITerm(TRUE, ())})
EMPTY: frozenset = frozenset()


def guard_test(b: Expr) -> PhiTerm | None:
    """``⌈b⌉``: the instantaneous test that only proceeds when ``b`` holds."""
    return mk_phi(b, IDENTITY, ())


# ---------------------------------------------------------------------------
# Laws
# ---------------------------------------------------------------------------


def compose_phi_phi(p: PhiTerm, q: PhiTerm) -> PhiTerm | None:
    c = fold(and_(p.cond, subst_apply(p.update, q.cond)))
    if is_false(c):
        return None
    return mk_phi(c, subst_compose(q.update, p.update), p.trace + trace_subst(p.update, q.trace))


def compose_phi_e(p: PhiTerm, q: ETerm) -> ETerm | None:
    c = fold(and_(p.cond, subst_apply(p.update, q.cond)))
    if is_false(c):
        return None
    return mk_e(c, p.trace + trace_subst(p.update, q.trace), accepts_subst(p.update, q.accepts))


def seq_compose_rel(p: PostRel, q: frozenset) -> frozenset:
    """Sequential composition of a finaliser set with a peri- or post-relation."""
    out = []
    for a in p:
        for b in q:
            if isinstance(b, PhiTerm):
                out.append(compose_phi_phi(a, b))
            elif isinstance(b, ETerm):
                out.append(compose_phi_e(a, b))
            else:
                raise NormalFormEscape(f"cannot compose a finaliser with {type(b).__name__}")
    return rel(out)


def _cond_merge_single(a: Term, c: Expr, b: Term) -> Term | None:
    """Merged ``a ◁ c ▷ b`` for two same-kind terms that share a trace."""
    cond = fold(Op("ite", (c, a.cond, b.cond)))
    if isinstance(a, ETerm) and isinstance(b, ETerm) and a.trace == b.trace:
        acc = accepts_union(accepts_guard(c, a.accepts), accepts_guard(fold(not_(c)), b.accepts))
        return mk_e(cond, a.trace, acc)
    if isinstance(a, PhiTerm) and isinstance(b, PhiTerm) and a.trace == b.trace and a.update == b.update:
        return mk_phi(cond, a.update, a.trace)
    return None


def guard_rel(c: Expr, r: frozenset) -> frozenset:
    """Conjoin the state condition ``c`` onto every term of ``r``."""
    out: list = []
    for t in r:
        if isinstance(t, ITerm):
            out.append(mk_i(and_(c, t.cond), t.trace))
        elif isinstance(t, ETerm):
            out.append(mk_e(and_(c, t.cond), t.trace, t.accepts))
        else:
            out.append(mk_phi(and_(c, t.cond), t.update, t.trace))
    return rel(out)


def cond_distribute(p: frozenset, c: Expr, q: frozenset) -> frozenset:
    """``p ◁ c ▷ q`` for two peri- or post-relations.

    Two singletons sharing a trace (and, for finalisers, an update) are merged
    into one term with a conditional condition and guarded accept entries;
    everything else uses the split form ``{c ∧ p} ∪ {¬c ∧ q}``.
    """
    c = fold(c)
    if is_true(c):
        return p
    if is_false(c):
        return q
    if len(p) == 1 and len(q) == 1:
        (a,), (b,) = tuple(p), tuple(q)
        merged = _cond_merge_single(a, c, b)
        if merged is not None:
            return frozenset({merged})
    return guard_rel(c, p) | guard_rel(fold(not_(c)), q)


def cond_pre(p: PreRel, c: Expr, q: PreRel) -> PreRel:
    """``P1 ◁ c ▷ Q1`` for preconditions: ``(c ⇒ P1) ∧ (¬c ⇒ Q1)``."""
    c = fold(c)
    return normalize_pre(guard_rel(c, p) | guard_rel(fold(not_(c)), q))


def _same_trace(terms: Iterable[ETerm]) -> tuple[list[ETerm], TraceExpr]:
    ts = list(terms)
    if not ts:
        raise TraceMismatch("no terms given")
    t0 = ts[0].trace
    if any(t.trace != t0 for t in ts):
        raise TraceMismatch("terms do not share one trace")
    return ts, t0


def conj_quiescent(terms: Iterable[ETerm]) -> ETerm | None:
    """``⋀ E(sᵢ, t, Aᵢ) = E(⋀ sᵢ, t, ⋃ Aᵢ)``."""
    ts, t0 = _same_trace(terms)
    return mk_e(and_(*(t.cond for t in ts)), t0, accepts_union(*(t.accepts for t in ts)))


def disj_quiescent(terms: Iterable[ETerm]) -> ETerm | None:
    """``E(⋁ sᵢ, t, ⋂ Aᵢ)`` -- the law for disjoining same-trace quiescent terms.

    The result is always implied by the disjunction and coincides with it when
    every satisfiable state picks a least accept set equal to the
    intersection; in general it admits more refusals.
    """
    ts, t0 = _same_trace(terms)
    acc = ts[0].accepts
    for t in ts[1:]:
        acc = accepts_intersection(acc, t.accepts)
    return mk_e(or_(*(t.cond for t in ts)), t0, acc)


def star_finaliser(p: PostRel, n_max: int) -> PostRel:
    """Union of the 0..n_max-fold sequential self-compositions of ``p``."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    unit = frozenset({PhiTerm(TRUE, IDENTITY, ())})
    result = set(unit)
    power: PostRel = unit
    for _ in range(n_max):
        power = seq_compose_rel(power, p)
        if not power:
            break
        result |= power
    return frozenset(result)


def power_finaliser_closed_form(p: PhiTerm, n: int) -> PhiTerm | None:
    """``Φ(s,σ,t)^n`` in closed form: ``Φ(⋀_{i<n} σⁱ†s, σⁿ, ⌢_{j<n} σʲ†t)``."""
    conds: list[Expr] = []
    trace: list[EventExpr] = []
    sig = IDENTITY
    for _ in range(n):
        conds.append(subst_apply(sig, p.cond))
        trace.extend(trace_subst(sig, p.trace))
        sig = subst_compose(p.update, sig)
    return mk_phi(and_(*conds), sig, trace)


def wp_finaliser(p: PhiTerm, q: ITerm | None) -> ITerm | None:
    """``Φ wp I``; ``q=None`` stands for ``false``."""
    if q is None:
        return mk_i(p.cond, p.trace)
    return mk_i(and_(p.cond, subst_apply(p.update, q.cond)), p.trace + trace_subst(p.update, q.trace))


def wp_rel(post: PostRel, pre: PreRel) -> PreRel:
    """``(⋁ Φᵢ) wp (⋀ Iⱼ) = ⋀ᵢⱼ (Φᵢ wp Iⱼ)``."""
    return normalize_pre(rel(wp_finaliser(a, b) for a in post for b in pre))


def is_false_pre(p: PreRel) -> bool:
    return any(not t.trace and is_true(t.cond) for t in p)


def normalize_pre(p: Iterable[ITerm | None]) -> PreRel:
    """Drop false assumptions, collapse to ``FALSE`` and merge same-trace terms."""
    by_trace: dict[TraceExpr, Expr] = {}
    for t in p:
        if t is None:
            continue
        c = fold(t.cond)
        if is_false(c):
            continue
        if t.trace in by_trace:
            c = fold(or_(by_trace[t.trace], c))
        by_trace[t.trace] = c
    if () in by_trace and is_true(by_trace[()]):
        return FALSE_PRE
    return frozenset(ITerm(c, tr) for tr, c in by_trace.items())


def filter_trace(mode: str, r: Term | frozenset) -> frozenset:
    """R4 keeps terms whose trace is non-empty, R5 those whose trace is empty."""
    if mode not in ("R4", "R5"):
        raise ValueError("mode must be 'R4' or 'R5'")
    terms = r if isinstance(r, frozenset) else frozenset({r})
    keep_nonempty = mode == "R4"
    return frozenset(t for t in terms if bool(t.trace) == keep_nonempty)


def refines_quiescent(spec: ETerm, impl: ETerm, space: StateSpace) -> bool | None:
    """Single-term quiescent refinement ``spec ⊑ impl``; ``None`` when undecided.

    With a shared trace, ``impl``'s observations are included in ``spec``'s
    exactly when the impl condition implies the spec condition and, in every
    state where the impl term is active, the spec accepts no more than the
    impl does (fewer acceptances means more permitted refusals).
    """
    if spec.trace != impl.trace:
        return None
    if not cond_implies_bounded(impl.cond, spec.cond, space):
        return False
    for s in space.states():
        if evaluate(impl.cond, s):
            if not accepts_eval(spec.accepts, s) <= accepts_eval(impl.accepts, s):
                return False
    return True


# ---------------------------------------------------------------------------
# Well-formedness
# ---------------------------------------------------------------------------


def term_vars(t: Term) -> frozenset[str]:
    vs = free_vars(t.cond)
    for e in t.trace:
        vs |= e.vars()
    if isinstance(t, ETerm):
        for a in t.accepts:
            vs |= free_vars(a.guard) | a.event.vars()
    if isinstance(t, PhiTerm):
        for _, e in t.update.items:
            vs |= free_vars(e)
    return vs


def check_scoping(r: Iterable[Term], space: StateSpace) -> None:
    """Every term may mention only declared initial-state variables."""
    names = set(space.names)
    for t in r:
        stray = term_vars(t) - names
        if stray:
            raise NormalFormEscape(f"{t} mentions non-state names {sorted(stray)}")
        if isinstance(t, PhiTerm) and not t.update.domain <= names:
            raise NormalFormEscape(f"{t} updates undeclared variables")


def sorted_terms(r: Iterable[Term]) -> list:
    """Stable presentation order (by printed form)."""
    return sorted(r, key=lambda t: (len(t.trace), str(t)))


def cartesian_conj(groups: list[list[ETerm]]) -> PeriRel:
    """Conjoin one term from each group (all sharing the empty trace)."""
    return rel(conj_quiescent(choice) for choice in product(*groups))
