"""Contract constructors, composition laws, health flags and loops."""

import pytest

from reacalc.contract import (
    Contract,
    assign,
    chaos,
    do,
    extchoice_contract,
    guard_contract,
    health_flags,
    intchoice_contract,
    iterate_contract,
    miracle,
    mk_basic,
    seq_contract,
    skip,
    stop,
    cond_contract,
    truncate,
    while_contract,
)
from reacalc.dsl import elaborate_process, parse_expr, parse_model, parse_process
from reacalc.errors import AlphabetMismatch, EmptyChoice, NonProductiveBody
from reacalc.expr import FALSE, TRUE, Lit, Subst
from reacalc.oracle import Bounds
from reacalc.refinement import equal_contracts
from reacalc.rel import FALSE_PRE, TRUE_R, EventExpr, mk_e, mk_i, mk_phi, rel

MODEL = parse_model(
    """
channel a, b, c
channel d : int[0..3]
channel inp : int[0..1]
var x : int[0..3]
"""
)
SP, AL = MODEL.space, MODEL.alphabet
B = Bounds(trace_len=3, star_bound=3)


def E(src):
    return parse_expr(src, MODEL)


def ev(ch, data=None):
    return EventExpr(ch, None if data is None else E(data))


def calc(src, star_bound=3):
    return elaborate_process(parse_process(src, MODEL), AL, SP, {}, star_bound)


def same(c1, c2, b=B):
    v = equal_contracts(c1, c2, b)
    assert v.holds, v.summary()


def test_basic_operators():
    assert do(ev("a"), SP, AL).peri == rel([mk_e(TRUE, (), [ev("a")])])
    x1 = assign(Subst({"x": Lit(1)}), SP, AL)
    assert x1.post == rel([mk_phi(TRUE, Subst({"x": Lit(1)}))]) and not x1.peri
    assert skip(SP, AL) == assign(Subst(), SP, AL)
    assert stop(SP, AL).peri == rel([mk_e(TRUE, (), [])]) and not stop(SP, AL).post
    assert chaos(SP, AL).pre == FALSE_PRE
    assert miracle(SP, AL) == Contract(TRUE_R, frozenset(), frozenset(), AL, SP)
    acc = mk_basic("accept", SP, AL)
    (term,) = acc.peri
    assert len(term.accepts) == len(AL.events())
    with pytest.raises(ValueError):
        mk_basic("nothing", SP, AL)


def test_sequence_examples():
    c = calc("x := 1 ; d!x -> skip ; x := x + 2")
    assert c.pre == TRUE_R
    assert c.peri == rel([mk_e(TRUE, (), [ev("d", "1")])])
    assert c.post == rel([mk_phi(TRUE, Subst({"x": Lit(3)}), [ev("d", "1")])])
    c = calc("b -> chaos")
    assert c.pre == rel([mk_i(TRUE, [ev("b")])])
    assert c.peri == rel([mk_e(TRUE, (), [ev("b")])]) and not c.post
    for src in ["a -> b -> skip", "x := 2 ; stop", "(a -> skip) [] (b -> chaos)"]:
        p = calc(src)
        assert seq_contract(skip(SP, AL), p) == p
        assert seq_contract(p, skip(SP, AL)) == p


def test_choice_examples():
    p = calc("a -> b -> skip")
    assert intchoice_contract([p]) == p
    both = intchoice_contract([do(ev("a"), SP, AL), do(ev("b"), SP, AL)])
    assert both.peri == rel([mk_e(TRUE, (), [ev("a")]), mk_e(TRUE, (), [ev("b")])])
    ext = calc("(a -> b -> skip) [] (c -> skip)")
    assert ext.peri == rel([mk_e(TRUE, (), [ev("a"), ev("c")]), mk_e(TRUE, [ev("a")], [ev("b")])])
    assert extchoice_contract([p, stop(SP, AL)]) == p
    with pytest.raises(EmptyChoice):
        intchoice_contract([])
    with pytest.raises(EmptyChoice):
        extchoice_contract([])


def test_input_prefix_is_a_choice_over_the_domain():
    same(calc("inp?v -> x := v"), calc("(inp!0 -> x := 0) [] (inp!1 -> x := 1)"))


def test_conditional_and_guard():
    p, q = calc("a -> skip"), calc("b -> skip")
    assert cond_contract(p, TRUE, q) == p
    assert cond_contract(p, FALSE, q) == q
    g = E("x < 2")
    same(guard_contract(g, p), cond_contract(p, g, stop(SP, AL)))
    same(calc("x < 2 & a -> skip"), calc("if x < 2 then a -> skip else stop"))


def test_alphabet_mismatch():
    other = parse_model("channel a\nvar x : int[0..3]\n")
    with pytest.raises(AlphabetMismatch):
        seq_contract(skip(SP, AL), skip(other.space, other.alphabet))


def test_health_flags():
    fa = health_flags(do(ev("a"), SP, AL))
    assert fa.productive and not fa.instantaneous and fa.cacc
    fs = health_flags(skip(SP, AL))
    assert not fs.productive and fs.instantaneous
    assert health_flags(chaos(SP, AL)).cacc
    assert health_flags(stop(SP, AL)).cacc
    assert not health_flags(skip(SP, AL)).cacc
    assert not health_flags(calc("x = 0 & a -> skip ; skip [] (x := 1)")).cacc
    assert all(health_flags(calc(s)).cdc for s in ["a -> skip", "stop", "chaos"])


def test_while_examples():
    assert calc("while false do a -> skip") == skip(SP, AL)
    assert calc("while true do x := x + 1") == chaos(SP, AL)
    with pytest.raises(NonProductiveBody):
        calc("while x < 3 do x := x + 1")
    # A miraculous body never terminates, so it is vacuously productive.
    assert while_contract(TRUE, miracle(SP, AL)) == miracle(SP, AL)
    loop = calc("while x < 2 do (a -> x := x + 1)", star_bound=3)
    assert loop.star_bound == 3 and loop.bounded
    same(loop, calc("if x < 2 then a -> x := x + 1 ; (if x < 2 then a -> x := x + 1 ; "
                    "(if x < 2 then a -> x := x + 1 else skip) else skip) else skip"))


def test_iterate_examples():
    assert iterate_contract(skip(SP, AL), 3) == skip(SP, AL)
    star = iterate_contract(do(ev("a"), SP, AL), 2)
    assert {len(t.trace) for t in star.post} == {0, 1, 2}
    assert iterate_contract(chaos(SP, AL), 2).pre == FALSE_PRE


def test_truncate_keeps_short_observations():
    c = calc("a -> b -> c -> skip")
    t = truncate(c, 1)
    assert t.trace_cap == 1 and t.bounded
    assert all(len(x.trace) <= 1 for x in t.peri | t.post)
    same(c, t, Bounds(trace_len=1))
    assert truncate(c, 5).trace_cap is None
