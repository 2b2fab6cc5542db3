"""Reactive contracts ``[pre ⊢ peri | post]`` and their calculation laws.

Every program construct maps to a function here that combines the normal-form
relations of its operands.  Loops are the only place where an approximation
enters: the star of a finaliser set is unrolled up to ``star_bound`` times and
the resulting contract remembers that bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Sequence

from .errors import AlphabetMismatch, EmptyChoice, NonProductiveBody
from .expr import (
    IDENTITY,
    TRUE,
    Event,
    Expr,
    Lit,
    Subst,
    evaluate,
    fold,
    is_false,
    is_true,
    not_,
    satisfiable,
)
from .lens import Domain, StateSpace
from .rel import (
    EMPTY,
    FALSE_PRE,
    TRUE_R,
    EventExpr,
    PeriRel,
    PostRel,
    PreRel,
    cartesian_conj,
    check_scoping,
    cond_distribute,
    cond_pre,
    filter_trace,
    guard_test,
    is_false_pre,
    mk_e,
    mk_phi,
    normalize_pre,
    rel,
    seq_compose_rel,
    sorted_terms,
    star_finaliser,
    wp_rel,
)

DEFAULT_STAR_BOUND = 3


@dataclass(frozen=True)
class Alphabet:
    """Declared channels with their (optional) finite data domains."""

    channels: tuple[tuple[str, Domain | None], ...] = ()

    @classmethod
    def of(cls, **chans: Domain | None) -> "Alphabet":
        return cls(tuple(chans.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.channels)

    def domain(self, name: str) -> Domain | None:
        for n, d in self.channels:
            if n == name:
                return d
        raise KeyError(name)

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def events(self) -> tuple[Event, ...]:
        out: list[Event] = []
        for n, d in self.channels:
            if d is None:
                out.append(Event(n))
            else:
                out.extend(Event(n, v) for v in d.values())
        return tuple(out)

    def contains_event(self, e: Event) -> bool:
        for n, d in self.channels:
            if n == e.channel:
                return e.data is None if d is None else (e.data is not None and d.contains(e.data))
        return False


@dataclass(frozen=True)
class Contract:
    """A stateful failures-divergences contract in I/E/Φ normal form.

    ``star_bound`` is ``None`` for exactly calculated contracts and the
    unrolling depth for contracts that contain a bounded star.  ``trace_cap``
    is set when terms whose trace is longer than the cap were dropped (see
    :func:`truncate`); observations up to the cap are unaffected.
    """

    pre: PreRel
    peri: PeriRel
    post: PostRel
    alphabet: Alphabet
    space: StateSpace
    star_bound: int | None = field(default=None, compare=False)
    trace_cap: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        pre = normalize_pre(self.pre)
        object.__setattr__(self, "pre", pre)
        if is_false_pre(pre):
            # Divergence from the start swallows every other observation.
            object.__setattr__(self, "peri", EMPTY)
            object.__setattr__(self, "post", EMPTY)

    @property
    def bounded(self) -> bool:
        return self.star_bound is not None or self.trace_cap is not None

    def well_formed(self) -> None:
        for r in (self.pre, self.peri, self.post):
            check_scoping(r, self.space)

    def pretty(self) -> str:
        return "\n".join(f"{k}: {v}" for k, v in self.parts().items())

    def parts(self) -> dict[str, str]:
        if not self.pre:
            pre = "true"
        elif is_false_pre(self.pre):
            pre = "false"
        else:
            pre = " ∧ ".join(str(t) for t in sorted_terms(self.pre))
        peri = " ∨ ".join(str(t) for t in sorted_terms(self.peri)) or "false"
        post = " ∨ ".join(str(t) for t in sorted_terms(self.post)) or "false"
        return {"pre": pre, "peri": peri, "post": post}

    def term_lists(self) -> dict[str, list[str]]:
        return {
            "pre": [str(t) for t in sorted_terms(self.pre)],
            "peri": [str(t) for t in sorted_terms(self.peri)],
            "post": [str(t) for t in sorted_terms(self.post)],
        }

    def __str__(self) -> str:
        return self.pretty()


def _combine_bounds(cs: Iterable[Contract]) -> int | None:
    bounds = [c.star_bound for c in cs if c.star_bound is not None]
    return max(bounds) if bounds else None


def _check_compatible(cs: Sequence[Contract]) -> None:
    first = cs[0]
    for c in cs[1:]:
        if c.alphabet != first.alphabet or c.space != first.space:
            raise AlphabetMismatch("contracts range over different alphabets or state spaces")


def _combine_caps(cs: Iterable[Contract]) -> int | None:
    caps = [c.trace_cap for c in cs if c.trace_cap is not None]
    return min(caps) if caps else None


def _mk(pre, peri, post, like: Sequence[Contract], star_bound: int | None = None) -> Contract:
    sb = _combine_bounds(like)
    if star_bound is not None:
        sb = max(sb or 0, star_bound)
    return Contract(pre, peri, post, like[0].alphabet, like[0].space, sb, _combine_caps(like))


def truncate(c: Contract, cap: int) -> Contract:
    """Drop every term whose trace has more than ``cap`` events.

    Every operator only ever extends the traces of its operands' terms, so
    truncating operands before composing them leaves all observations with
    traces of length at most ``cap`` unchanged.  The contract records the cap
    when something was actually dropped.
    """

    def keep(r):
        return frozenset(t for t in r if len(t.trace) <= cap)

    pre, peri, post = keep(c.pre), keep(c.peri), keep(c.post)
    if (pre, peri, post) == (c.pre, c.peri, c.post):
        return c
    cap = cap if c.trace_cap is None else min(cap, c.trace_cap)
    return Contract(pre, peri, post, c.alphabet, c.space, c.star_bound, cap)


# ---------------------------------------------------------------------------
# Basic operators
# ---------------------------------------------------------------------------


def skip(space: StateSpace, alphabet: Alphabet) -> Contract:
    return Contract(TRUE_R, EMPTY, rel([mk_phi(TRUE)]), alphabet, space)


def assign(sigma: Subst, space: StateSpace, alphabet: Alphabet) -> Contract:
    return Contract(TRUE_R, EMPTY, rel([mk_phi(TRUE, sigma)]), alphabet, space)


def do(ev: EventExpr, space: StateSpace, alphabet: Alphabet) -> Contract:
    return Contract(
        TRUE_R, rel([mk_e(TRUE, (), [ev])]), rel([mk_phi(TRUE, IDENTITY, (ev,))]), alphabet, space
    )


def stop(space: StateSpace, alphabet: Alphabet) -> Contract:
    return Contract(TRUE_R, rel([mk_e(TRUE, (), ())]), EMPTY, alphabet, space)


def chaos(space: StateSpace, alphabet: Alphabet) -> Contract:
    return Contract(FALSE_PRE, EMPTY, EMPTY, alphabet, space)


def miracle(space: StateSpace, alphabet: Alphabet) -> Contract:
    return Contract(TRUE_R, EMPTY, EMPTY, alphabet, space)


def accept(space: StateSpace, alphabet: Alphabet) -> Contract:
    evs = [EventExpr(e.channel, None if e.data is None else Lit(e.data)) for e in alphabet.events()]
    return Contract(TRUE_R, rel([mk_e(TRUE, (), evs)]), EMPTY, alphabet, space)


def mk_basic(kind: str, space: StateSpace, alphabet: Alphabet, arg: Any = None) -> Contract:
    """Build a basic contract by name: Skip, Stop, Chaos, Miracle, Do, Assign, Accept."""
    k = kind.lower()
    if k == "skip":
        return skip(space, alphabet)
    if k == "stop":
        return stop(space, alphabet)
    if k == "chaos":
        return chaos(space, alphabet)
    if k == "miracle":
        return miracle(space, alphabet)
    if k == "accept":
        return accept(space, alphabet)
    if k == "do":
        return do(arg, space, alphabet)
    if k == "assign":
        return assign(arg if isinstance(arg, Subst) else Subst(arg), space, alphabet)
    raise ValueError(f"unknown basic contract {kind!r}")


def guard_contract(g: Expr, c: Contract) -> Contract:
    """``g & P = P ◁ g ▷ Stop``."""
    return cond_contract(c, g, stop(c.space, c.alphabet))


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def seq_contract(c1: Contract, c2: Contract) -> Contract:
    _check_compatible([c1, c2])
    pre = normalize_pre(c1.pre | wp_rel(c1.post, c2.pre))
    peri = c1.peri | seq_compose_rel(c1.post, c2.peri)
    post = seq_compose_rel(c1.post, c2.post)
    return _mk(pre, peri, post, [c1, c2])


def intchoice_contract(cs: Sequence[Contract]) -> Contract:
    cs = list(cs)
    if not cs:
        raise EmptyChoice("internal choice over no contracts")
    _check_compatible(cs)
    pre = normalize_pre(t for c in cs for t in c.pre)
    peri = frozenset(t for c in cs for t in c.peri)
    post = frozenset(t for c in cs for t in c.post)
    return _mk(pre, peri, post, cs)


def cond_contract(c1: Contract, b: Expr, c2: Contract) -> Contract:
    _check_compatible([c1, c2])
    b = fold(b)
    if is_true(b):
        return c1
    if is_false(b):
        return c2
    pre = cond_pre(c1.pre, b, c2.pre)
    peri = cond_distribute(c1.peri, b, c2.peri)
    post = cond_distribute(c1.post, b, c2.post)
    return _mk(pre, peri, post, [c1, c2])


def extchoice_contract(cs: Sequence[Contract]) -> Contract:
    """External choice: initial quiescent offers are pooled, everything else unioned."""
    cs = list(cs)
    if not cs:
        raise EmptyChoice("external choice over no contracts")
    _check_compatible(cs)
    pre = normalize_pre(t for c in cs for t in c.pre)
    groups = [list(filter_trace("R5", c.peri)) for c in cs]
    initial = cartesian_conj(groups) if all(groups) else EMPTY
    later = frozenset(t for c in cs for t in filter_trace("R4", c.peri))
    post = frozenset(t for c in cs for t in c.post)
    return _mk(pre, initial | later, post, cs)


# ---------------------------------------------------------------------------
# Health
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HealthFlags:
    productive: bool
    instantaneous: bool
    cacc: bool
    cdc: bool = True


def _diverges_initially(c: Contract, s) -> bool:
    return any(not t.trace and evaluate(t.cond, s) for t in c.pre)


def is_cacc(c: Contract) -> bool:
    """Does the pericondition admit waiting on the empty trace with nothing refused?"""
    if is_false_pre(c.pre):
        return True
    if any(not t.trace and is_true(t.cond) for t in c.peri):
        return True
    for s in c.space.states():
        if _diverges_initially(c, s):
            continue
        if not any(not t.trace and evaluate(t.cond, s) for t in c.peri):
            return False
    return True


def health_flags(c: Contract) -> HealthFlags:
    productive = all(t.trace for t in c.post)
    instantaneous = not c.peri and all(not t.trace for t in c.post)
    return HealthFlags(productive, instantaneous, is_cacc(c), True)


def feasible_post(c: Contract) -> bool:
    return any(satisfiable(t.cond, c.space) for t in c.post)


# ---------------------------------------------------------------------------
# Iteration
# ---------------------------------------------------------------------------


def while_contract(b: Expr, body: Contract, star_bound: int = DEFAULT_STAR_BOUND) -> Contract:
    """``while b do body`` with the finaliser star unrolled ``star_bound`` times."""
    b = fold(b)
    sp, al = body.space, body.alphabet
    if is_false(b):
        return skip(sp, al)
    flags = health_flags(body)
    if not flags.productive:
        if flags.instantaneous and is_true(b) and feasible_post(body):
            return chaos(sp, al)
        raise NonProductiveBody("loop body can terminate without performing an event")
    test = rel([guard_test(b)])
    exit_test = rel([guard_test(fold(not_(b)))])
    body_step = seq_compose_rel(test, body.post)
    star = star_finaliser(body_step, star_bound)
    star_then_test = seq_compose_rel(star, test)
    pre = wp_rel(star_then_test, body.pre)
    peri = seq_compose_rel(star_then_test, body.peri)
    post = seq_compose_rel(star, exit_test)
    return _mk(pre, peri, post, [body], star_bound)


def iterate_contract(c: Contract, star_bound: int = DEFAULT_STAR_BOUND) -> Contract:
    """``[P1 ⊢ P2 | P3]★ = [P3★ wp P1 ⊢ P3★ ; P2 | P3★]`` with a bounded star."""
    star = star_finaliser(c.post, star_bound)
    pre = wp_rel(star, c.pre)
    peri = seq_compose_rel(star, c.peri)
    return _mk(pre, peri, star, [c], star_bound)


def with_star_bound(c: Contract, star_bound: int | None) -> Contract:
    return replace(c, star_bound=star_bound)
