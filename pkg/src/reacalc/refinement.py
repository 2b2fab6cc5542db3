"""Refinement checking, deadlock freedom and the reactive loop-invariant rule.

A specification may mix normal-form relations with *opaque* predicates:
boolean expressions over the initial state, ``tt`` (the trace so far),
``acc`` (the set of accepted events, pericondition only) and primed
variables ``x'`` (the final state, postcondition only).  Opaque
pericondition predicates are read as constraints on acceptances and are
assumed to be upward closed in ``acc`` (accepting more never hurts), which
is the case for every specification of the form "at least these events are
offered".

``S ⊑ P`` is checked as three obligations over every initial state and every
trace up to the bound: wherever ``S`` assumes no divergence, ``P`` does not
diverge; every quiescent observation of ``P`` allowed by ``S``'s assumption
is one of ``S``'s; likewise for terminated observations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Any, Iterable, Mapping, Optional, Union

from .contract import Alphabet, Contract, _check_compatible, health_flags, while_contract
from .errors import AlphabetMismatch, NonProductiveBody
from .expr import (
    TRUE,
    Expr,
    Subst,
    Var,
    evaluate,
    fold,
    free_vars,
    is_true,
    replace as replace_expr,
    subst_image,
)
from .lens import State, StateSpace
from .oracle import (
    Bounds,
    Divergence,
    Observation,
    Quiescent,
    Terminated,
    all_traces,
    canonical,
    canonical_diff,
    denote_bounded,
    fmt_trace,
    observation_json,
    raw_state,
)
from .rel import (
    PeriRel,
    PostRel,
    accepts_eval,
    guard_test,
    refines_quiescent,
    rel,
    seq_compose_rel,
    trace_eval,
)

# ---------------------------------------------------------------------------
# Specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OpaqueRel:
    """A predicate over one observation (see module docstring)."""

    pred: Expr

    def __str__(self) -> str:
        from .expr import show

        return show(self.pred)

    @property
    def uses_acc(self) -> bool:
        return "acc" in free_vars(self.pred)


SpecPart = Union[frozenset, OpaqueRel]


def _pre_holds(pre: SpecPart, s: Mapping[str, Any], t: tuple) -> bool:
    """Does the assumption hold after trace ``t`` (i.e. no divergence allowed yet)?"""
    if isinstance(pre, OpaqueRel):
        return bool(evaluate(pre.pred, {**s, "tt": t}))
    for term in pre:
        if evaluate(term.cond, s) and _is_prefix(trace_eval(term.trace, s), t):
            return False
    return True


def _is_prefix(a: tuple, b: tuple) -> bool:
    return len(a) <= len(b) and b[: len(a)] == a


def _peri_admits(peri: SpecPart, s: Mapping[str, Any], t: tuple, acc: frozenset) -> bool:
    if isinstance(peri, OpaqueRel):
        return bool(evaluate(peri.pred, {**s, "tt": t, "acc": acc}))
    for e in peri:
        if evaluate(e.cond, s) and trace_eval(e.trace, s) == t and accepts_eval(e.accepts, s) <= acc:
            return True
    return False


def _post_admits(post: SpecPart, s: Mapping[str, Any], t: tuple, final: Mapping[str, Any]) -> bool:
    if isinstance(post, OpaqueRel):
        env = {**s, "tt": t}
        env.update({f"{k}'": v for k, v in final.items()})
        return bool(evaluate(post.pred, env))
    for p in post:
        if evaluate(p.cond, s) and trace_eval(p.trace, s) == t:
            if subst_image(p.update, s) == dict(final):
                return True
    return False


@dataclass(frozen=True)
class SpecContract:
    """A contract whose parts may be opaque predicates."""

    pre: SpecPart
    peri: SpecPart
    post: SpecPart
    alphabet: Alphabet
    space: StateSpace

    @classmethod
    def of(cls, c: Contract) -> "SpecContract":
        return cls(c.pre, c.peri, c.post, c.alphabet, c.space)

    @classmethod
    def from_exprs(
        cls,
        peri: Expr,
        post: Expr,
        alphabet: Alphabet,
        space: StateSpace,
        pre: Optional[Expr] = None,
    ) -> "SpecContract":
        p: SpecPart = frozenset() if pre is None or is_true(fold(pre)) else OpaqueRel(fold(pre))
        return cls(p, OpaqueRel(fold(peri)), OpaqueRel(fold(post)), alphabet, space)

    def after_assign(self, sigma: Subst) -> "SpecContract":
        """``x := e ; S`` for an opaque ``S``: substitute into the initial-state variables."""

        def sub(part: SpecPart) -> SpecPart:
            if isinstance(part, OpaqueRel):
                return OpaqueRel(fold(replace_expr(part.pred, sigma.as_dict())))
            raise TypeError("only opaque parts can be shifted by an assignment")

        pre = self.pre if not self.pre else sub(self.pre)
        post = self.post
        if isinstance(post, OpaqueRel):
            # Final values of variables the assignment does not touch are
            # unaffected; initial values are replaced by the assigned expressions.
            post = sub(post)
        return replace(self, pre=pre, peri=sub(self.peri), post=post)

    def describe(self) -> dict[str, str]:
        def one(part: SpecPart) -> str:
            if isinstance(part, OpaqueRel):
                return str(part)
            return " ∧ ".join(str(t) for t in part) or "true"

        return {"pre": one(self.pre), "peri": one(self.peri), "post": one(self.post)}


def cdf(alphabet: Alphabet, space: StateSpace) -> SpecContract:
    """The deadlock-freedom specification: whenever quiescent, some event is offered."""
    from .expr import Lit, Op

    return SpecContract(
        frozenset(),
        OpaqueRel(Op("lt", (Lit(0), Op("len", (Var("acc"),))))),
        OpaqueRel(TRUE),
        alphabet,
        space,
    )


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    obligation: str
    state: State
    observation: Observation
    detail: str = ""

    def __str__(self) -> str:
        d = f" -- {self.detail}" if self.detail else ""
        return f"[{self.obligation}] from {self.state!r}: {self.observation}{d}"

    def as_json(self) -> dict[str, Any]:
        from .expr import format_value

        d = observation_json(self.observation)
        if "state" in d:
            d["final"] = d.pop("state")
        d["state"] = {k: format_value(v) for k, v in self.state.as_dict().items()}
        d["obligation"] = self.obligation
        if self.detail:
            d["detail"] = self.detail
        return d


@dataclass(frozen=True)
class Verdict:
    holds: bool
    bounded: bool
    witnesses: tuple = ()
    notes: tuple = ()

    def __post_init__(self) -> None:
        if not self.holds and not self.witnesses:
            raise ValueError("a failing verdict needs a witness")

    def __bool__(self) -> bool:
        return self.holds

    def summary(self) -> str:
        word = "holds" if self.holds else "fails"
        if self.holds and self.bounded:
            word += " (no counterexample within bounds)"
        lines = [word] + [f"  {w}" for w in self.witnesses[:5]] + [f"  note: {n}" for n in self.notes]
        return "\n".join(lines)

    def as_json(self) -> dict[str, Any]:
        return {"holds": self.holds, "bounded": self.bounded}


def _combine(verdicts: Iterable[Verdict]) -> Verdict:
    vs = list(verdicts)
    holds = all(v.holds for v in vs)
    wit = tuple(w for v in vs for w in v.witnesses)
    notes = tuple(dict.fromkeys(n for v in vs for n in v.notes))
    return Verdict(holds, any(v.bounded for v in vs), wit, notes)


class _Collector:
    def __init__(self, limit: int = 20):
        self.witnesses: list[Witness] = []
        self.limit = limit
        self.truncated = False

    def add(self, w: Witness) -> None:
        if len(self.witnesses) < self.limit:
            self.witnesses.append(w)

    @property
    def full(self) -> bool:
        return len(self.witnesses) >= self.limit


# ---------------------------------------------------------------------------
# Refinement
# ---------------------------------------------------------------------------


def _as_spec(s: Union[Contract, SpecContract]) -> SpecContract:
    return s if isinstance(s, SpecContract) else SpecContract.of(s)


def _check_same(spec: SpecContract, impl: Contract) -> None:
    if spec.alphabet != impl.alphabet or spec.space != impl.space:
        raise AlphabetMismatch("specification and implementation range over different declarations")


def _structural_subsumes(spec: SpecContract, impl: Contract) -> bool:
    """Every impl disjunct is refined by a single spec disjunct (exact, no trace bound)."""
    if isinstance(spec.pre, OpaqueRel) or spec.pre or impl.pre:
        return False
    if isinstance(spec.peri, OpaqueRel) or isinstance(spec.post, OpaqueRel):
        return False
    for e in impl.peri:
        if not any(refines_quiescent(s, e, impl.space) for s in spec.peri if s.trace == e.trace):
            return False
    for p in impl.post:
        if p not in spec.post:
            return False
    return True


def refines_contract(
    spec: Union[Contract, SpecContract], impl: Contract, b: Bounds = Bounds()
) -> Verdict:
    """Check ``spec ⊑ impl`` over every initial state and all traces up to ``b.trace_len``."""
    sp = _as_spec(spec)
    _check_same(sp, impl)
    if isinstance(spec, Contract) and spec == impl:
        return Verdict(True, impl.bounded)
    if _structural_subsumes(sp, impl):
        return Verdict(True, impl.bounded)
    L = b.trace_len
    col = _Collector()
    truncated = impl.bounded
    for s in impl.space.states(b.state_limit):
        # Obligation 1: no divergence where the specification forbids it.
        for t in impl.pre:
            if evaluate(t.cond, s):
                d = trace_eval(t.trace, s)
                if len(d) > L:
                    truncated = True
                elif _pre_holds(sp.pre, s, d):
                    col.add(Witness("pre", s, Divergence(d), "implementation diverges"))
        # Obligation 2: quiescent observations.
        for e in impl.peri:
            if evaluate(e.cond, s):
                t = trace_eval(e.trace, s)
                if len(t) > L:
                    truncated = True
                    continue
                if not _pre_holds(sp.pre, s, t) or not _pre_holds(impl.pre, s, t):
                    continue
                acc = accepts_eval(e.accepts, s)
                if not _peri_admits(sp.peri, s, t, acc):
                    col.add(Witness("peri", s, Quiescent(t, acc), "quiescent observation not allowed"))
        # Obligation 3: terminated observations.
        for p in impl.post:
            if evaluate(p.cond, s):
                t = trace_eval(p.trace, s)
                if len(t) > L:
                    truncated = True
                    continue
                if not _pre_holds(sp.pre, s, t) or not _pre_holds(impl.pre, s, t):
                    continue
                final = subst_image(p.update, s)
                if not _post_admits(sp.post, s, t, final):
                    col.add(
                        Witness("post", s, Terminated(t, raw_state(impl.space, final)), "termination not allowed")
                    )
        if col.full:
            break
    ws = tuple(sorted(col.witnesses, key=lambda w: (len(w.observation.trace), str(w))))
    return Verdict(not ws, truncated, ws)


def refines_opaque(spec: Union[Contract, SpecContract], impl: Union[Contract, SpecContract], b: Bounds = Bounds()) -> Verdict:
    """``spec ⊑ impl`` where either side may have opaque parts.

    Observations of ``impl`` are enumerated explicitly: every trace up to the
    bound, every acceptance set (when the pericondition mentions ``acc``) and
    every final state.
    """
    sp, im = _as_spec(spec), _as_spec(impl)
    if sp.alphabet != im.alphabet or sp.space != im.space:
        raise AlphabetMismatch("specification and implementation range over different declarations")
    L = b.trace_len
    space, alphabet = im.space, im.alphabet
    col = _Collector()
    for s in space.states(b.state_limit):
        env = s.as_dict()
        for t in all_traces(alphabet, L):
            if _pre_holds(sp.pre, env, t) and not _pre_holds(im.pre, env, t):
                col.add(Witness("pre", s, Divergence(t), "implementation may diverge"))
                break
        for t, acc in _inv_quiescent(im, env, L, alphabet):
            if _pre_holds(sp.pre, env, t) and _pre_holds(im.pre, env, t):
                if not _peri_admits(sp.peri, env, t, acc):
                    col.add(Witness("peri", s, Quiescent(t, acc), "quiescent observation not allowed"))
                    break
        for t, fin in _inv_final(im, env, L, alphabet, space):
            if _pre_holds(sp.pre, env, t) and _pre_holds(im.pre, env, t):
                if not _post_admits(sp.post, env, t, fin):
                    col.add(Witness("post", s, Terminated(t, raw_state(space, fin)), "termination not allowed"))
                    break
        if col.full:
            break
    ws = tuple(sorted(col.witnesses, key=lambda w: (len(w.observation.trace), str(w))))
    return Verdict(not ws, True, ws, (f"traces bounded at {L} events",))


def deadlock_check(c: Contract, b: Bounds = Bounds()) -> Verdict:
    """``CDF ⊑ c``: no divergence, and every quiescent observation offers an event.

    The check runs over every pericondition disjunct regardless of trace
    length, so it is exact for the calculated contract; the verdict is only
    marked bounded when the contract itself contains an unrolled loop.
    """
    col = _Collector()
    for s in c.space.states(b.state_limit):
        for t in c.pre:
            if evaluate(t.cond, s):
                col.add(Witness("pre", s, Divergence(trace_eval(t.trace, s)), "divergence"))
        for e in c.peri:
            if evaluate(e.cond, s):
                t = trace_eval(e.trace, s)
                if not _pre_holds(c.pre, s, t):
                    continue
                acc = accepts_eval(e.accepts, s)
                if not acc:
                    col.add(Witness("peri", s, Quiescent(t, acc), "deadlock: nothing offered"))
        if col.full:
            break
    ws = tuple(sorted(col.witnesses, key=lambda w: (len(w.observation.trace), str(w))))
    notes = (f"loops unrolled up to {c.star_bound} iterations",) if c.bounded else ()
    return Verdict(not ws, c.bounded, ws, notes)


def equal_contracts(c1: Contract, c2: Contract, b: Bounds = Bounds()) -> Verdict:
    """Observational equality of two contracts up to the trace bound."""
    _check_compatible([c1, c2])
    if c1.pre == c2.pre and c1.peri == c2.peri and c1.post == c2.post:
        return Verdict(True, c1.bounded or c2.bounded)
    col = _Collector()
    for s in c1.space.states(b.state_limit):
        x = canonical(denote_bounded(c1, s, b, extension_closed=False))
        y = canonical(denote_bounded(c2, s, b, extension_closed=False))
        if x != y:
            only1, only2 = canonical_diff(x, y)
            for o in only1[:2]:
                col.add(Witness("left only", s, o))
            for o in only2[:2]:
                col.add(Witness("right only", s, o))
            if col.full:
                break
    return Verdict(not col.witnesses, True, tuple(col.witnesses))


# ---------------------------------------------------------------------------
# Loop invariants
# ---------------------------------------------------------------------------


def _acceptance_candidates(alphabet: Alphabet, needed: bool) -> list[frozenset]:
    if not needed:
        return [frozenset()]
    evs = alphabet.events()
    return [frozenset(c) for n in range(len(evs) + 1) for c in itertools.combinations(evs, n)]


def _inv_quiescent(inv: SpecContract, s: Mapping[str, Any], max_len: int, alphabet: Alphabet):
    """Quiescent observations ``(t, acc)`` of the invariant from ``s``."""
    if isinstance(inv.peri, OpaqueRel):
        accs = _acceptance_candidates(alphabet, inv.peri.uses_acc)
        for t in all_traces(alphabet, max_len):
            for a in accs:
                if evaluate(inv.peri.pred, {**s, "tt": t, "acc": a}):
                    yield t, a
    else:
        for e in inv.peri:
            if evaluate(e.cond, s):
                t = trace_eval(e.trace, s)
                if len(t) <= max_len:
                    yield t, accepts_eval(e.accepts, s)


def _inv_final(inv: SpecContract, s: Mapping[str, Any], max_len: int, alphabet: Alphabet, space: StateSpace):
    if isinstance(inv.post, OpaqueRel):
        for t in all_traces(alphabet, max_len):
            for f in space.states():
                env = {**s, "tt": t}
                env.update({f"{k}'": v for k, v in f.items()})
                if evaluate(inv.post.pred, env):
                    yield t, f.as_dict()
    else:
        for p in inv.post:
            if evaluate(p.cond, s):
                t = trace_eval(p.trace, s)
                if len(t) <= max_len:
                    yield t, subst_image(p.update, s)


def loop_invariant_check(
    b_cond: Expr, body: Contract, inv: Union[Contract, SpecContract], bounds: Bounds = Bounds()
) -> Verdict:
    """Check that ``inv ⊑ while b do body`` via the reactive invariant rule.

    Obligations: (1) the body is productive; (2) the invariant's assumption
    implies the loop's calculated precondition; (3) the invariant's
    pericondition is established by one body step and preserved by
    prefixing a completed iteration; (4) likewise for the postcondition,
    including the exit case.  Passing (3)/(4) covers every iteration count;
    only the trace quantification is bounded.
    """
    sp = _as_spec(inv)
    _check_same(sp, body)
    L = bounds.trace_len
    space, alphabet = body.space, body.alphabet
    if not health_flags(body).productive:
        raise NonProductiveBody("loop body can terminate without performing an event")
    b_cond = fold(b_cond)
    test = rel([guard_test(b_cond)])
    step_post: PostRel = seq_compose_rel(test, body.post)
    step_peri: PeriRel = seq_compose_rel(test, body.peri)
    exit_post: PostRel = rel([guard_test(fold(_not(b_cond)))])
    col = _Collector()

    # (2) precondition: the calculated loop assumption up to L iterations.
    loop_pre = while_contract(b_cond, body, max(L, 1)).pre
    for s in space.states(bounds.state_limit):
        for t in loop_pre:
            if evaluate(t.cond, s):
                d = trace_eval(t.trace, s)
                if len(d) <= L and _pre_holds(sp.pre, s, d):
                    col.add(Witness("(2) pre", s, Divergence(d), "loop may diverge under the invariant's assumption"))

    for s in space.states(bounds.state_limit):
        # (3a) I2 ⊑ ⌈b⌉ ; Q2
        for e in step_peri:
            if evaluate(e.cond, s):
                t = trace_eval(e.trace, s)
                if len(t) > L or not _pre_holds(sp.pre, s, t):
                    continue
                acc = accepts_eval(e.accepts, s)
                if not _peri_admits(sp.peri, s, t, acc):
                    col.add(Witness("(3) peri step", s, Quiescent(t, acc), "not established by one iteration"))
        # (3b) I2 ⊑ ⌈b⌉ ; Q3 ; I2   and   (4b) I3 ⊑ ⌈b⌉ ; Q3 ; I3
        for p in step_post:
            if not evaluate(p.cond, s):
                continue
            t1 = trace_eval(p.trace, s)
            if len(t1) > L:
                continue
            mid = subst_image(p.update, s)
            for t2, acc in _inv_quiescent(sp, mid, L - len(t1), alphabet):
                t = t1 + t2
                if not _pre_holds(sp.pre, s, t):
                    continue
                if not _peri_admits(sp.peri, s, t, acc):
                    col.add(
                        Witness(
                            "(3) peri induction",
                            s,
                            Quiescent(t, acc),
                            f"not preserved after iteration {fmt_trace(t1)} reaching {_fmt_env(mid)}",
                        )
                    )
                    break
            for t2, fin in _inv_final(sp, mid, L - len(t1), alphabet, space):
                t = t1 + t2
                if _pre_holds(sp.pre, s, t) and not _post_admits(sp.post, s, t, fin):
                    col.add(
                        Witness(
                            "(4) post induction",
                            s,
                            Terminated(t, raw_state(space, fin)),
                            f"not preserved after iteration {fmt_trace(t1)}",
                        )
                    )
                    break
        # (4a) I3 ⊑ ⌈¬b⌉
        for p in exit_post:
            if evaluate(p.cond, s) and _pre_holds(sp.pre, s, ()):
                fin = subst_image(p.update, s)
                if not _post_admits(sp.post, s, (), fin):
                    col.add(Witness("(4) post exit", s, Terminated((), raw_state(space, fin)), "loop exit not allowed"))
        if col.full:
            break
    ws = tuple(sorted(col.witnesses, key=lambda w: (len(w.observation.trace), str(w))))
    return Verdict(not ws, True, ws, (f"traces bounded at {L} events; iteration count unbounded",))


def _not(e: Expr) -> Expr:
    from .expr import not_

    return not_(e)


def _fmt_env(env: Mapping[str, Any]) -> str:
    from .expr import format_value

    return "{" + ", ".join(f"{k}:{format_value(v)}" for k, v in env.items()) + "}"
