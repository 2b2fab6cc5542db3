"""Normal-form relations: composition, conditionals, star, wp and filtering."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from programs import MODEL as RANDOM_MODEL
from programs import random_process
from reacalc.dsl import elaborate_process, parse_expr, parse_model
from reacalc.errors import TraceMismatch
from reacalc.expr import FALSE, TRUE, Lit, Subst, fold, subst_image
from reacalc.rel import (
    FALSE_PRE,
    TRUE_R,
    AcceptEntry,
    ETerm,
    EventExpr,
    ITerm,
    PhiTerm,
    accepts_eval,
    check_scoping,
    compose_phi_phi,
    cond_distribute,
    conj_quiescent,
    disj_quiescent,
    filter_trace,
    mk_accepts,
    mk_e,
    mk_i,
    mk_phi,
    normalize_pre,
    power_finaliser_closed_form,
    refines_quiescent,
    rel,
    seq_compose_rel,
    star_finaliser,
    trace_eval,
    wp_finaliser,
    wp_rel,
)

MODEL = parse_model(
    """
channel a : int[0..3]
channel b, c
channel out : int[0..1]
var x : int[0..3]
var bf : seq[2] int[0..1]
"""
)
SPACE = MODEL.space


def E(src):
    return parse_expr(src, MODEL)


def ev(ch, data=None):
    return EventExpr(ch, None if data is None else E(data))


def test_phi_then_e():
    p = mk_phi(TRUE, Subst({"x": Lit(1)}))
    q = mk_e(TRUE, (), [ev("a", "x")])
    assert seq_compose_rel(rel([p]), rel([q])) == rel([mk_e(TRUE, (), [ev("a", "1")])])


def test_phi_then_phi():
    p = mk_phi(TRUE, Subst({"x": Lit(1)}), [ev("a", "1")])
    q = mk_phi(TRUE, Subst({"x": E("x + 2")}))
    assert compose_phi_phi(p, q) == mk_phi(TRUE, Subst({"x": Lit(3)}), [ev("a", "1")])


def test_identity_finaliser_is_left_unit():
    unit = rel([mk_phi(TRUE)])
    r = rel([mk_e(E("x > 0"), [ev("b")], [ev("c")]), mk_e(TRUE, (), [ev("a", "x")])])
    assert seq_compose_rel(unit, r) == r
    post = rel([mk_phi(E("x < 2"), Subst({"x": E("x + 1")}), [ev("b")])])
    assert seq_compose_rel(unit, post) == post


def test_cond_distribute_true_picks_left():
    p = rel([mk_phi(TRUE, Subst({"x": Lit(1)}), [ev("b")])])
    q = rel([mk_phi(TRUE, Subst({"x": Lit(2)}), [ev("c")])])
    assert cond_distribute(p, TRUE, q) == p
    assert cond_distribute(p, FALSE, q) == q


def test_cond_distribute_builds_guarded_accepts():
    offer = rel([mk_e(TRUE, (), [ev("out", "head(bf)")])])
    nothing = rel([mk_e(TRUE, (), [])])
    g = E("0 < #bf")
    got = cond_distribute(offer, g, nothing)
    assert got == rel([mk_e(TRUE, (), [AcceptEntry(g, ev("out", "head(bf)"))])])


def test_cond_distribute_matches_split_form():
    p = rel([mk_phi(E("x > 1"), Subst({"x": Lit(0)}), [ev("b")])])
    q = rel([mk_phi(TRUE, Subst({"x": Lit(3)}), [ev("c")])])
    c = E("x = 3")
    got = cond_distribute(p, c, q)
    for s in SPACE.states():
        def obs(r, s=s):
            return {(trace_eval(t.trace, s), tuple(sorted(subst_image(t.update, s).items())))
                    for t in r if fold(t.cond) == TRUE or bool(_ev(t.cond, s))}
        want = obs(p) if _ev(c, s) else obs(q)
        assert obs(got) == want


def _ev(e, s):
    from reacalc.expr import evaluate

    return evaluate(e, s)


def test_conj_quiescent():
    t1 = mk_e(TRUE, (), [ev("b")])
    t2 = mk_e(TRUE, (), [ev("c")])
    assert conj_quiescent([t1, t2]) == mk_e(TRUE, (), [ev("b"), ev("c")])
    assert conj_quiescent([t1, t1]) == t1
    u1 = mk_e(E("x > 0"), (), [ev("b")])
    u2 = mk_e(E("x < 2"), (), [ev("c")])
    got = conj_quiescent([u1, u2])
    for s in SPACE.states():
        assert _ev(got.cond, s) == (s["x"] == 1)
    assert accepts_eval(got.accepts, {}) == {ev("b").eval({}), ev("c").eval({})}
    with pytest.raises(TraceMismatch):
        conj_quiescent([t1, mk_e(TRUE, [ev("b")], [])])


def test_disj_quiescent():
    u = mk_e(E("x > 0"), (), [ev("b"), ev("c")])
    v = mk_e(TRUE, (), [ev("b")])
    assert disj_quiescent([u, v]) == mk_e(TRUE, (), [ev("b")])
    assert disj_quiescent([u, u]) == u
    never = ETerm(FALSE, (), mk_accepts([ev("c")]))
    w = mk_e(E("x > 2"), (), [ev("b"), ev("c")])
    assert disj_quiescent([never, w]) == mk_e(E("x > 2"), (), [ev("c")])


def test_star_examples():
    unit = rel([mk_phi(TRUE)])
    for n in range(4):
        assert star_finaliser(unit, n) == unit
    step = mk_phi(TRUE, Subst({"x": E("x + 1")}), [ev("b")])
    got = star_finaliser(rel([step]), 2)
    assert got == rel(
        [
            mk_phi(TRUE),
            step,
            mk_phi(TRUE, Subst({"x": E("x + 2")}), [ev("b"), ev("b")]),
        ]
    )


PHIS = st.builds(
    lambda c, u, t: mk_phi(E(c), Subst({"x": E(u)}), [ev("a", d) for d in t]),
    st.sampled_from(["true", "x < 3", "x != 1", "x = 0 or x = 2"]),
    st.sampled_from(["x", "x + 1", "3 - x", "0", "if x < 2 then x + 2 else x - 2"]),
    st.lists(st.sampled_from(["x", "0", "3 - x"]), max_size=2),
)


@settings(max_examples=100)
@given(PHIS, st.integers(0, 4))
def test_star_closed_form_matches_iteration(p, n):
    power = rel([mk_phi(TRUE)])
    for _ in range(n):
        power = seq_compose_rel(power, rel([p]))
    closed = power_finaliser_closed_form(p, n)
    assert power == rel([closed])


def test_wp_examples():
    p = mk_phi(TRUE, Subst(), [ev("b")])
    assert wp_finaliser(p, None) == mk_i(TRUE, [ev("b")])
    assert wp_rel(rel([p]), TRUE_R) == TRUE_R
    q = mk_phi(TRUE, Subst({"x": Lit(1)}))
    assert wp_finaliser(q, mk_i(E("x > 0"), [ev("b")])) == mk_i(TRUE, [ev("b")])


def test_normalize_pre():
    assert normalize_pre([ITerm(FALSE, (ev("b"),))]) == TRUE_R
    assert normalize_pre([ITerm(TRUE, ())]) == FALSE_PRE
    got = normalize_pre([mk_i(E("x > 0"), [ev("b")]), mk_i(E("x = 0"), [ev("b")])])
    (term,) = got
    assert all(_ev(term.cond, s) for s in SPACE.states())


def test_filter_trace():
    empty = mk_phi(E("x > 0"), Subst({"x": Lit(0)}))
    assert filter_trace("R4", empty) == frozenset()
    e0 = mk_e(TRUE, (), [ev("b")])
    assert filter_trace("R5", e0) == rel([e0])
    e1 = mk_e(TRUE, [ev("b")], [ev("c")])
    assert filter_trace("R4", e1) == rel([e1])
    with pytest.raises(ValueError):
        filter_trace("R6", e1)


def test_refines_quiescent():
    small = mk_e(TRUE, (), [ev("b")])
    big = mk_e(TRUE, (), [ev("b"), ev("c")])
    assert refines_quiescent(small, big, SPACE) is True
    assert refines_quiescent(big, big, SPACE) is True
    assert refines_quiescent(big, small, SPACE) is False
    assert refines_quiescent(small, mk_e(TRUE, [ev("b")], [ev("b")]), SPACE) is None


def test_false_conditions_are_dropped():
    assert mk_e(FALSE, (), []) is None
    assert mk_phi(E("1 > 2"), Subst()) is None
    assert mk_i(E("true and false")) is None
    assert rel([None, mk_phi(TRUE)]) == rel([mk_phi(TRUE)])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_elaborated_contracts_are_well_scoped(seed):
    m = RANDOM_MODEL
    c = elaborate_process(random_process(seed), m.alphabet, m.space, {}, 2, 4)
    for r in (c.pre, c.peri, c.post):
        check_scoping(r, m.space)
    assert all(isinstance(t, ITerm) for t in c.pre)
    assert all(isinstance(t, ETerm) for t in c.peri)
    assert all(isinstance(t, PhiTerm) for t in c.post)
