"""Symbolic expressions over state variables and the substitution algebra.

Expressions are immutable trees built from three node classes:

* :class:`Lit`  -- a literal value (bool, int, enum constant, tuple for
  sequences, :class:`Event`, frozenset of events);
* :class:`Var`  -- a variable reference;
* :class:`Op`   -- an operator application with a string tag.

Folding (:func:`fold`) performs constant evaluation plus a handful of local
identities (boolean units, sequence-literal merging, ...).  It never changes
meaning: ``evaluate(fold(e), s) == evaluate(e, s)`` wherever the right-hand
side is defined.  Expressions that would raise at evaluation time (``head``
of an empty literal) are left unfolded rather than turned into errors,
because they typically sit under a guard that is false.

A :class:`Subst` maps variables to expressions; variables outside the map are
left unchanged.  Identity entries are never stored, so the identity
substitution is the empty map and structural equality of substitutions is
meaningful.
"""

from __future__ import annotations

import functools
from typing import Any, Callable, Iterable, Mapping, NamedTuple

from .errors import EvalError, SpaceTooLarge
from .lens import DEFAULT_STATE_LIMIT, StateSpace


class Event(NamedTuple):
    """A concrete event ``channel.data``; ``data`` is ``None`` for pure events."""

    channel: str
    data: Any = None

    def __str__(self) -> str:
        if self.data is None:
            return self.channel
        return f"{self.channel}.{format_value(self.data, nested=True)}"


def format_value(v: Any, nested: bool = False) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return f"({v})" if (nested and v < 0) else str(v)
    if isinstance(v, str):
        return v
    if isinstance(v, Event):
        return str(v)
    if isinstance(v, tuple):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    if isinstance(v, frozenset):
        return "{" + ", ".join(sorted(format_value(x) for x in v)) + "}"
    return repr(v)


# ---------------------------------------------------------------------------
# Nodes
# ---------------------------------------------------------------------------


class Expr:
    """Base class of expression nodes.  Nodes cache their hash."""

    __slots__ = ("_hash",)

    def _key(self) -> tuple:
        raise NotImplementedError

    def __hash__(self) -> int:
        try:
            return self._hash
        except AttributeError:
            h = hash(self._key())
            object.__setattr__(self, "_hash", h)
            return h

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Expr) or type(self) is not type(other):
            return False
        if hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("expressions are immutable")

    def __str__(self) -> str:
        return show(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {show(self)}>"


def _value_key(v: Any) -> Any:
    # bool is an int subclass; keep True and 1 apart structurally.
    if isinstance(v, tuple) and not isinstance(v, Event):
        return ("seq", tuple(_value_key(x) for x in v))
    if isinstance(v, Event):
        return ("ev", v.channel, _value_key(v.data))
    if isinstance(v, frozenset):
        return ("set", frozenset(_value_key(x) for x in v))
    return (type(v).__name__, v)


class Lit(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Any):
        object.__setattr__(self, "value", value)

    def _key(self) -> tuple:
        return ("lit", _value_key(self.value))


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self) -> tuple:
        return ("var", self.name)


class Op(Expr):
    __slots__ = ("op", "args", "param")

    def __init__(self, op: str, args: Iterable[Expr] = (), param: Any = None):
        if op not in ARITY:
            raise ValueError(f"unknown operator {op!r}")
        args = tuple(args)
        n = ARITY[op]
        if n >= 0 and len(args) != n:
            raise ValueError(f"{op} expects {n} arguments, got {len(args)}")
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "param", param)

    def _key(self) -> tuple:
        return ("op", self.op, self.param, self.args)


# -1 marks variadic operators.
ARITY: dict[str, int] = {
    "add": 2, "sub": 2, "mul": 2, "neg": 1,
    "eq": 2, "ne": 2, "lt": 2, "le": 2, "gt": 2, "ge": 2,
    "and": 2, "or": 2, "implies": 2, "not": 1,
    "concat": 2, "head": 1, "tail": 1, "len": 1, "seq": -1,
    "ite": 3, "event": -1, "proj": 1, "filter": 1, "in": 2, "set": -1,
}

TRUE = Lit(True)
FALSE = Lit(False)
EMPTY_SEQ = Lit(())


# Small constructors -- they do not fold; call :func:`fold` for that.

def lit(v: Any) -> Lit:
    return Lit(v)


def var(name: str) -> Var:
    return Var(name)


def and_(*xs: Expr) -> Expr:
    xs = tuple(xs)
    if not xs:
        return TRUE
    acc = xs[0]
    for x in xs[1:]:
        acc = Op("and", (acc, x))
    return acc


def or_(*xs: Expr) -> Expr:
    xs = tuple(xs)
    if not xs:
        return FALSE
    acc = xs[0]
    for x in xs[1:]:
        acc = Op("or", (acc, x))
    return acc


def not_(x: Expr) -> Expr:
    return Op("not", (x,))


def eq(a: Expr, b: Expr) -> Expr:
    return Op("eq", (a, b))


def ite(c: Expr, a: Expr, b: Expr) -> Expr:
    return Op("ite", (c, a, b))


def event_expr(channel: str, data: Expr | None = None) -> Expr:
    return Op("event", () if data is None else (data,), param=channel)


# ---------------------------------------------------------------------------
# Traversal helpers
# ---------------------------------------------------------------------------


def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Op):
        out: frozenset[str] = frozenset()
        for a in e.args:
            out |= free_vars(a)
        return out
    return frozenset()


def replace(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Simultaneous syntactic replacement of variables (no folding)."""
    if not mapping:
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Op):
        new = tuple(replace(a, mapping) for a in e.args)
        if all(x is y for x, y in zip(new, e.args)):
            return e
        return Op(e.op, new, e.param)
    return e


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _as_int(v: Any, op: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise EvalError(f"{op} expects integers, got {v!r}")
    return v


def _as_bool(v: Any, op: str) -> bool:
    if not isinstance(v, bool):
        raise EvalError(f"{op} expects booleans, got {v!r}")
    return v


def _as_seq(v: Any, op: str) -> tuple:
    if not isinstance(v, tuple) or isinstance(v, Event):
        raise EvalError(f"{op} expects a sequence, got {v!r}")
    return v


def _is_prefix(a: tuple, b: tuple) -> bool:
    return len(a) <= len(b) and b[: len(a)] == a


def _order(op: str, a: Any, b: Any) -> bool:
    if isinstance(a, tuple) and isinstance(b, tuple) and not isinstance(a, Event):
        if op == "le":
            return _is_prefix(a, b)
        if op == "lt":
            return _is_prefix(a, b) and a != b
        if op == "ge":
            return _is_prefix(b, a)
        return _is_prefix(b, a) and a != b
    x, y = _as_int(a, op), _as_int(b, op)
    return {"lt": x < y, "le": x <= y, "gt": x > y, "ge": x >= y}[op]


def _same(a: Any, b: Any) -> bool:
    return _value_key(a) == _value_key(b)


def evaluate(e: Expr, env: Mapping[str, Any]) -> Any:
    """Evaluate ``e`` under ``env`` (a :class:`~reacalc.lens.State` or any mapping)."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvalError(f"unbound variable {e.name}") from None
    assert isinstance(e, Op)
    op = e.op
    # Short-circuiting connectives first: guards protect partial operations.
    if op == "and":
        return _as_bool(evaluate(e.args[0], env), op) and _as_bool(evaluate(e.args[1], env), op)
    if op == "or":
        return _as_bool(evaluate(e.args[0], env), op) or _as_bool(evaluate(e.args[1], env), op)
    if op == "implies":
        return (not _as_bool(evaluate(e.args[0], env), op)) or _as_bool(evaluate(e.args[1], env), op)
    if op == "ite":
        c = _as_bool(evaluate(e.args[0], env), op)
        return evaluate(e.args[1] if c else e.args[2], env)
    vals = [evaluate(a, env) for a in e.args]
    if op == "add":
        return _as_int(vals[0], op) + _as_int(vals[1], op)
    if op == "sub":
        return _as_int(vals[0], op) - _as_int(vals[1], op)
    if op == "mul":
        return _as_int(vals[0], op) * _as_int(vals[1], op)
    if op == "neg":
        return -_as_int(vals[0], op)
    if op == "eq":
        return _same(vals[0], vals[1])
    if op == "ne":
        return not _same(vals[0], vals[1])
    if op in ("lt", "le", "gt", "ge"):
        return _order(op, vals[0], vals[1])
    if op == "not":
        return not _as_bool(vals[0], op)
    if op == "concat":
        return _as_seq(vals[0], op) + _as_seq(vals[1], op)
    if op == "head":
        s = _as_seq(vals[0], op)
        if not s:
            raise EvalError("head of empty sequence")
        return s[0]
    if op == "tail":
        s = _as_seq(vals[0], op)
        if not s:
            raise EvalError("tail of empty sequence")
        return s[1:]
    if op == "len":
        v = vals[0]
        if isinstance(v, frozenset):
            return len(v)
        return len(_as_seq(v, op))
    if op == "seq":
        return tuple(vals)
    if op == "set":
        return frozenset(vals)
    if op == "event":
        return Event(e.param, vals[0] if vals else None)
    if op == "proj":
        return tuple(ev.data for ev in _as_seq(vals[0], op) if ev.channel == e.param)
    if op == "filter":
        return tuple(ev for ev in _as_seq(vals[0], op) if ev.channel in e.param)
    if op == "in":
        coll = vals[1]
        if not isinstance(coll, (tuple, frozenset)):
            raise EvalError(f"'in' expects a collection, got {coll!r}")
        return any(_same(vals[0], x) for x in coll)
    raise EvalError(f"cannot evaluate operator {op}")  # pragma: no cover


def eval_expr(e: Expr, s: Mapping[str, Any]) -> Any:
    return evaluate(e, s)


# ---------------------------------------------------------------------------
# Folding
# ---------------------------------------------------------------------------


def _is_lit(e: Expr, value: Any = ...) -> bool:
    if not isinstance(e, Lit):
        return False
    return value is ... or _same(e.value, value)


def _negation_of(a: Expr, b: Expr) -> bool:
    return (isinstance(a, Op) and a.op == "not" and a.args[0] == b) or (
        isinstance(b, Op) and b.op == "not" and b.args[0] == a
    )


def _seq_items(e: Expr) -> tuple[Expr, ...] | None:
    """Items of a sequence-literal-like expression, else ``None``."""
    if isinstance(e, Lit) and isinstance(e.value, tuple) and not isinstance(e.value, Event):
        return tuple(Lit(v) for v in e.value)
    if isinstance(e, Op) and e.op == "seq":
        return e.args
    return None


def _mk_seq(items: tuple[Expr, ...]) -> Expr:
    if all(isinstance(i, Lit) for i in items):
        return Lit(tuple(i.value for i in items))  # type: ignore[union-attr]
    return Op("seq", items)


def _concat_parts(e: Expr) -> list[Expr]:
    if isinstance(e, Op) and e.op == "concat":
        return _concat_parts(e.args[0]) + _concat_parts(e.args[1])
    return [e]


def _fold_concat(a: Expr, b: Expr) -> Expr:
    parts: list[Expr] = []
    for p in _concat_parts(a) + _concat_parts(b):
        items = _seq_items(p)
        if items is not None:
            if not items:
                continue
            if parts and _seq_items(parts[-1]) is not None:
                parts[-1] = _mk_seq(_seq_items(parts[-1]) + items)  # type: ignore[operator]
                continue
            parts.append(_mk_seq(items))
        else:
            parts.append(p)
    if not parts:
        return EMPTY_SEQ
    acc = parts[0]
    for p in parts[1:]:
        acc = Op("concat", (acc, p))
    return acc


def _try_eval(op: Op) -> Expr:
    try:
        return Lit(evaluate(op, {}))
    except EvalError:
        return op


def fold(e: Expr) -> Expr:
    """Constant-fold and locally simplify ``e`` (semantics preserving)."""
    if not isinstance(e, Op):
        return e
    return _fold_op(e)


@functools.lru_cache(maxsize=1 << 16)
def _fold_op(e: Op) -> Expr:
    op = e.op
    args = tuple(fold(a) for a in e.args)

    if op == "and":
        a, b = args
        if _is_lit(a, False) or _is_lit(b, False) or _negation_of(a, b):
            return FALSE
        if _is_lit(a, True):
            return b
        if _is_lit(b, True) or a == b:
            return a
        return Op(op, args)
    if op == "or":
        a, b = args
        if _is_lit(a, True) or _is_lit(b, True) or _negation_of(a, b):
            return TRUE
        if _is_lit(a, False):
            return b
        if _is_lit(b, False) or a == b:
            return a
        return Op(op, args)
    if op == "implies":
        a, b = args
        if _is_lit(a, False) or _is_lit(b, True) or a == b:
            return TRUE
        if _is_lit(a, True):
            return b
        if _is_lit(b, False):
            return fold(not_(a))
        return Op(op, args)
    if op == "not":
        (a,) = args
        if isinstance(a, Lit):
            return _try_eval(Op(op, args))
        if isinstance(a, Op) and a.op == "not":
            return a.args[0]
        if isinstance(a, Op) and a.op == "eq":
            return Op("ne", a.args)
        if isinstance(a, Op) and a.op == "ne":
            return Op("eq", a.args)
        return Op(op, args)
    if op == "ite":
        c, a, b = args
        if _is_lit(c, True):
            return a
        if _is_lit(c, False):
            return b
        if a == b:
            return a
        if _is_lit(a, True) and _is_lit(b, False):
            return c
        if _is_lit(a, False) and _is_lit(b, True):
            return fold(not_(c))
        if _is_lit(b, False):
            return fold(and_(c, a))
        if _is_lit(a, True):
            return fold(or_(c, b))
        if _is_lit(a, False):
            return fold(and_(not_(c), b))
        if _is_lit(b, True):
            return fold(or_(not_(c), a))
        return Op(op, args)
    if op in ("eq", "ne"):
        a, b = args
        if a == b:
            return Lit(op == "eq")
    if op == "concat":
        return _fold_concat(*args)
    if op == "seq":
        return _mk_seq(args)
    if op == "head":
        items = _seq_items(args[0])
        if items:
            return items[0]
        if isinstance(args[0], Op) and args[0].op == "concat":
            first = _concat_parts(args[0])[0]
            fi = _seq_items(first)
            if fi:
                return fi[0]
    if op == "tail":
        items = _seq_items(args[0])
        if items:
            return _mk_seq(items[1:])
        if isinstance(args[0], Op) and args[0].op == "concat":
            parts = _concat_parts(args[0])
            fi = _seq_items(parts[0])
            if fi:
                rest = parts[1:]
                acc: Expr = _mk_seq(fi[1:])
                for p in rest:
                    acc = Op("concat", (acc, p))
                return fold(acc)
    if op == "len":
        items = _seq_items(args[0])
        if items is not None:
            return Lit(len(items))
        if isinstance(args[0], Op) and args[0].op == "concat":
            x, y = args[0].args
            return fold(Op("add", (Op("len", (x,)), Op("len", (y,)))))
    if op == "add":
        a, b = args
        if _is_lit(b, 0) and not isinstance(b.value, bool):  # type: ignore[union-attr]
            return a
        if _is_lit(a, 0) and not isinstance(a.value, bool):  # type: ignore[union-attr]
            return b
        # (x + k1) + k2  ->  x + (k1 + k2)
        if (
            isinstance(b, Lit)
            and isinstance(a, Op)
            and a.op == "add"
            and isinstance(a.args[1], Lit)
            and not isinstance(a.args[0], Lit)
        ):
            return fold(Op("add", (a.args[0], Lit(a.args[1].value + b.value))))
    if all(isinstance(a, Lit) for a in args):
        return _try_eval(Op(op, args, e.param))
    return Op(op, args, e.param)


simplify = fold


def is_true(e: Expr) -> bool:
    return _is_lit(e, True)


def is_false(e: Expr) -> bool:
    return _is_lit(e, False)


# ---------------------------------------------------------------------------
# Substitutions
# ---------------------------------------------------------------------------


class Subst:
    """A finite map from variables to expressions; the identity elsewhere."""

    __slots__ = ("items", "_map", "_hash")

    def __init__(self, mapping: Mapping[str, Expr] | Iterable[tuple[str, Expr]] = ()):
        pairs = dict(mapping.items() if isinstance(mapping, Mapping) else mapping)
        folded = ((k, fold(v)) for k, v in pairs.items())
        clean = tuple(sorted((k, v) for k, v in folded if not (isinstance(v, Var) and v.name == k)))
        object.__setattr__(self, "items", clean)
        object.__setattr__(self, "_map", dict(clean))
        object.__setattr__(self, "_hash", hash(clean))

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("substitutions are immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Subst) and self.items == other.items

    def __bool__(self) -> bool:
        return bool(self.items)

    def __contains__(self, name: str) -> bool:
        return name in self._map

    def __len__(self) -> int:
        return len(self.items)

    def get(self, name: str) -> Expr:
        return self._map.get(name, Var(name))

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self._map)

    def as_dict(self) -> dict[str, Expr]:
        return dict(self._map)

    def __str__(self) -> str:
        if not self.items:
            return "id"
        return "{" + ", ".join(f"{k}:={show(v)}" for k, v in self.items) + "}"

    __repr__ = __str__


IDENTITY = Subst()


def subst_apply(sigma: Subst, e: Expr) -> Expr:
    """``σ † e``: evaluate ``e`` in the state produced by ``σ``."""
    if not sigma:
        return fold(e)
    return fold(replace(e, sigma._map))


def subst_update(sigma: Subst, x: str, e: Expr) -> Subst:
    """``σ(x ↦ e)`` -- later updates to ``x`` override earlier ones."""
    d = sigma.as_dict()
    d[x] = e
    return Subst(d)


def subst_compose(sigma2: Subst, sigma1: Subst) -> Subst:
    """``σ2 ∘ σ1``: first ``σ1`` then ``σ2`` (each ``x ↦ σ1 † σ2(x)``)."""
    d: dict[str, Expr] = {}
    for x in sigma1.domain | sigma2.domain:
        d[x] = subst_apply(sigma1, sigma2.get(x))
    return Subst(d)


def subst_image(sigma: Subst, env: Mapping[str, Any]) -> dict[str, Any]:
    """The valuation obtained by applying ``σ`` to ``env`` (no domain check)."""
    out = dict(env)
    for x, e in sigma.items:
        out[x] = evaluate(e, env)
    return out


def cond_implies_bounded(
    c1: Expr, c2: Expr, space: StateSpace, limit: int = DEFAULT_STATE_LIMIT
) -> bool:
    """Exhaustively decide ``∀ s. c1(s) ⇒ c2(s)`` over ``space``."""
    return implication_witness(c1, c2, space, limit) is None


def implication_witness(c1: Expr, c2: Expr, space: StateSpace, limit: int = DEFAULT_STATE_LIMIT):
    """First state with ``c1 ∧ ¬c2``, or ``None``."""
    c1, c2 = fold(c1), fold(c2)
    if is_false(c1) or is_true(c2) or c1 == c2:
        return None
    if space.size > limit:
        raise SpaceTooLarge(f"{space.size} states exceeds limit {limit}")
    for s in space.states(limit):
        if evaluate(c1, s) and not evaluate(c2, s):
            return s
    return None


def satisfiable(c: Expr, space: StateSpace, limit: int = DEFAULT_STATE_LIMIT) -> bool:
    return not cond_implies_bounded(c, FALSE, space, limit)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_BINARY = {
    "implies": ("=>", 2), "or": ("or", 3), "and": ("and", 4),
    "eq": ("=", 6), "ne": ("!=", 6), "lt": ("<", 6), "le": ("<=", 6),
    "gt": (">", 6), "ge": (">=", 6), "in": ("in", 6),
    "concat": ("^", 7), "add": ("+", 8), "sub": ("-", 8), "mul": ("*", 9),
}


def _prec(e: Expr) -> int:
    if isinstance(e, Op):
        if e.op == "ite":
            return 1
        if e.op in _BINARY:
            return _BINARY[e.op][1]
        if e.op == "not":
            return 5
        if e.op in ("neg", "len"):
            return 10
    if isinstance(e, Lit) and isinstance(e.value, int) and not isinstance(e.value, bool) and e.value < 0:
        return 10
    return 11


def _wrap(e: Expr, need: int) -> str:
    s = show(e)
    return f"({s})" if _prec(e) < need else s


def show(e: Expr) -> str:
    """Render ``e`` in the concrete syntax accepted by the DSL parser."""
    if isinstance(e, Lit):
        return format_value(e.value)
    if isinstance(e, Var):
        return e.name
    assert isinstance(e, Op)
    op = e.op
    if op in _BINARY:
        sym, p = _BINARY[op]
        a, b = e.args
        if op == "implies":  # right associative
            return f"{_wrap(a, p + 1)} {sym} {_wrap(b, p)}"
        if p == 6:  # non-associative
            return f"{_wrap(a, p + 1)} {sym} {_wrap(b, p + 1)}"
        return f"{_wrap(a, p)} {sym} {_wrap(b, p + 1)}"
    if op == "not":
        return f"not {_wrap(e.args[0], 5)}"
    if op == "neg":
        return f"-{_wrap(e.args[0], 10)}"
    if op == "len":
        return f"#{_wrap(e.args[0], 10)}"
    if op == "ite":
        c, a, b = e.args
        return f"if {_wrap(c, 2)} then {_wrap(a, 2)} else {_wrap(b, 1)}"
    if op in ("head", "tail"):
        return f"{op}({show(e.args[0])})"
    if op == "seq":
        return "[" + ", ".join(show(a) for a in e.args) + "]"
    if op == "set":
        return "{" + ", ".join(show(a) for a in e.args) + "}"
    if op == "event":
        if not e.args:
            return e.param
        return f"{e.param}.{_wrap(e.args[0], 11)}"
    if op == "proj":
        return f"proj({show(e.args[0])}, {e.param})"
    if op == "filter":
        return f"filter({show(e.args[0])}, {{{', '.join(sorted(e.param))}}})"
    raise ValueError(op)  # pragma: no cover


def map_exprs(e: Expr, fn: Callable[[Expr], Expr]) -> Expr:
    """Bottom-up rebuild applying ``fn`` at every node."""
    if isinstance(e, Op):
        e = Op(e.op, tuple(map_exprs(a, fn) for a in e.args), e.param)
    return fn(e)
