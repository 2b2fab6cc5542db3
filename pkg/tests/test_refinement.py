"""Refinement, deadlock freedom, contract equality and loop invariants."""

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from programs import MODEL as RANDOM_MODEL
from programs import random_source
from reacalc.dsl import elaborate, elaborate_process, parse_invariant, parse_model, parse_process
from reacalc.dsl.elaborate import Elaborator
from reacalc.errors import AlphabetMismatch, NonProductiveBody
from reacalc.expr import TRUE
from reacalc.oracle import Bounds, Quiescent, Terminated
from reacalc.refinement import (
    SpecContract,
    Verdict,
    cdf,
    deadlock_check,
    equal_contracts,
    loop_invariant_check,
    refines_contract,
    refines_opaque,
)

MODELS = Path(__file__).resolve().parent.parent / "models"
SMALL = parse_model((MODELS / "small.rc").read_text())
BUFFER = parse_model((MODELS / "buffer.rc").read_text())
B4 = Bounds(trace_len=4)


def calc(m, src, star=3, cap=None):
    return elaborate_process(parse_process(src, m), m.alphabet, m.space, m.process_map, star, cap)


def test_reflexive_on_examples():
    for name in ["Choice", "Pipe", "Diverge", "Stuck"]:
        c = elaborate(SMALL, name)
        assert refines_contract(c, c, B4).holds


def test_deadlock_freedom_contract():
    spec = cdf(SMALL.alphabet, SMALL.space)
    assert refines_contract(spec, elaborate(SMALL, "Pipe"), B4).holds
    v = refines_contract(spec, elaborate(SMALL, "Stuck"), B4)
    assert not v.holds
    assert v.witnesses[0].observation == Quiescent((), frozenset())


def test_deadlock_check():
    assert deadlock_check(elaborate(SMALL, "Pipe"), B4).holds
    v = deadlock_check(elaborate(SMALL, "Stuck"), B4)
    assert not v.holds and v.witnesses[0].observation == Quiescent((), frozenset())
    m = parse_model("channel a\nvar x : bool\n")
    v = deadlock_check(calc(m, "x & a -> skip"), B4)
    assert not v.holds
    assert all(w.state["x"] is False for w in v.witnesses)
    assert not deadlock_check(elaborate(SMALL, "Diverge"), B4).holds


def test_deadlock_check_agrees_with_refining_cdf():
    spec = cdf(SMALL.alphabet, SMALL.space)
    for name in ["Choice", "Pipe", "Stuck", "Serial", "Left", "DivPar"]:
        c = elaborate(SMALL, name)
        assert deadlock_check(c, B4).holds == refines_contract(spec, c, B4).holds, name


def test_buffer_is_deadlock_free():
    v = deadlock_check(elaborate(BUFFER, "Buffer", 3), B4)
    assert v.holds and v.bounded


def test_equal_contracts_examples():
    m = parse_model((MODELS / "sequential.rc").read_text())
    assert equal_contracts(elaborate(m, "P"), elaborate(m, "Q"), B4).holds
    v = equal_contracts(calc(SMALL, "skip"), calc(SMALL, "stop"), B4)
    assert not v.holds
    assert any(isinstance(w.observation, Terminated) and w.observation.trace == () for w in v.witnesses)


def test_mismatched_declarations_are_rejected():
    with pytest.raises(AlphabetMismatch):
        refines_contract(elaborate(SMALL, "Choice"), elaborate(BUFFER, "Body"), B4)


def test_failing_verdict_needs_a_witness():
    with pytest.raises(ValueError):
        Verdict(False, False)


# -- loop invariants ----------------------------------------------------------


def _buffer_parts(inv_src):
    inv = parse_invariant(inv_src, BUFFER)
    spec = SpecContract.from_exprs(inv.peri, inv.post, BUFFER.alphabet, BUFFER.space, inv.pre)
    body = Elaborator(BUFFER.alphabet, BUFFER.space, BUFFER.process_map).named("Body")
    return spec, body


def test_buffer_order_invariant_holds():
    spec, body = _buffer_parts((MODELS / "buffer.inv").read_text())
    v = loop_invariant_check(TRUE, body, spec, B4)
    assert v.holds, v.summary()


def test_wrong_invariant_fails_after_one_input():
    spec, body = _buffer_parts("peri: proj(tt, out) = proj(tt, inp)\npost: false\n")
    v = loop_invariant_check(TRUE, body, spec, B4)
    assert not v.holds
    first = v.witnesses[0]
    assert len(first.observation.trace) == 1 and first.observation.trace[0].channel == "inp"


def test_trivial_invariant_holds_for_productive_bodies():
    spec, body = _buffer_parts("peri: true\npost: true\n")
    assert loop_invariant_check(TRUE, body, spec, Bounds(trace_len=2)).holds


def test_invariant_rule_needs_a_productive_body():
    spec, _ = _buffer_parts("peri: true\npost: true\n")
    with pytest.raises(NonProductiveBody):
        loop_invariant_check(TRUE, calc(BUFFER, "bf := []"), spec, B4)


def test_order_spec_is_met_from_the_initialisation():
    spec, _ = _buffer_parts((MODELS / "buffer.inv").read_text())
    order = BUFFER.spec_map["Order"]
    s = SpecContract.from_exprs(order.peri, order.post, BUFFER.alphabet, BUFFER.space, order.pre)
    from reacalc.expr import Lit, Subst

    assert refines_opaque(s, spec.after_assign(Subst({"bf": Lit(())})), Bounds(trace_len=3)).holds
    assert not refines_opaque(s, spec, Bounds(trace_len=2)).holds


# -- properties on random programs -------------------------------------------

RM = RANDOM_MODEL
B3 = Bounds(trace_len=3, star_bound=2)
SEEDS = st.integers(0, 2**32 - 1)


def rcalc(src):
    return calc(RM, src, 2, B3.trace_len)


@settings(max_examples=60, deadline=None)
@given(SEEDS, SEEDS, SEEDS)
def test_refinement_is_a_preorder(s1, s2, s3):
    p, q, r = (random_source(s, 2) for s in (s1, s2, s3))
    top = rcalc(p)
    mid = rcalc(f"({p}) |~| ({q})")
    low = rcalc(f"({p}) |~| ({q}) |~| ({r})")
    assert refines_contract(top, top, B3).holds
    assert refines_contract(mid, top, B3).holds
    assert refines_contract(low, mid, B3).holds
    assert refines_contract(low, top, B3).holds
    # Transitivity on unrelated triples as well.
    x, y, z = rcalc(p), rcalc(q), rcalc(r)
    if refines_contract(x, y, B3).holds and refines_contract(y, z, B3).holds:
        assert refines_contract(x, z, B3).holds


@settings(max_examples=60, deadline=None)
@given(SEEDS, SEEDS, SEEDS, st.sampled_from(["|||", "[| {a} |]", "[| {c} |]", "[| {x} | {a, c} | {y} |]"]))
def test_parallel_is_monotonic(s1, s2, s3, op):
    p2, r, q = (random_source(s, 2) for s in (s1, s2, s3))
    p1 = f"({p2}) |~| ({r})"
    assert refines_contract(rcalc(p1), rcalc(p2), B3).holds
    lhs = rcalc(f"({p1}) {op} ({q})")
    rhs = rcalc(f"({p2}) {op} ({q})")
    v = refines_contract(lhs, rhs, B3)
    assert v.holds, v.summary()


@settings(max_examples=60, deadline=None)
@given(SEEDS, SEEDS)
def test_symbolic_and_enumerating_checks_agree(s1, s2):
    p, q = rcalc(random_source(s1, 2)), rcalc(random_source(s2, 2))
    assert refines_contract(p, q, B3).holds == refines_opaque(p, q, B3).holds
