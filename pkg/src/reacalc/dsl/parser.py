"""Lexer, recursive-descent parser and type checker for the process language.

Grammar summary (``//`` starts a comment)::

    model   := decl*
    decl    := 'channel' NAME (',' NAME)* [':' type]
             | 'var' NAME (',' NAME)* ':' type
             | 'process' NAME '=' proc
             | 'spec' NAME '=' '[' [expr '|-'] expr '|' expr ']'
    type    := 'bool' | 'int' '[' INT '..' INT ']' | 'enum' '{' NAME,* '}' | 'seq' '[' INT ']' type
    proc    := ichoice (parop ichoice)*          parop := '[|' ... '|]' | '|||'
    ichoice := echoice ('|~|' echoice)*
    echoice := seq ('[]' seq)*
    seq     := unary [';' seq]
    unary   := CH ['!' expr | '?' NAME] '->' unary | expr '&' unary
             | 'if' expr 'then' proc 'else' unary | 'while' expr 'do' unary
             | 'skip' | 'stop' | 'chaos' | 'miracle' | NAME ':=' expr | NAME | '(' proc ')'

Expressions use ``if-then-else``, ``=>``, ``or``, ``and``, ``not``,
comparisons (``= != < <= > >= in``; ``<=`` on sequences is the prefix order),
``^`` (concatenation), ``+ -``, ``*``, unary ``-`` and ``#`` (length),
sequence literals ``[..]`` / ``⟨..⟩``, set literals ``{..}``, events
``ch`` / ``ch.e`` and the functions ``head``, ``tail``, ``proj(e, ch)`` and
``filter(e, {chs})``.  Inside specifications ``tt`` is the trace so far,
``acc`` the set of accepted events and ``x'`` the final value of ``x``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Optional

from ..errors import DslError, SyntaxError_, TypeError_, UnknownName
from ..expr import Expr, Lit, Op, Var, fold, free_vars
from ..lens import BoolDomain, Domain, EnumDomain, IntDomain, SeqDomain
from . import ast as A
from .model import Model, SpecDecl

# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

KEYWORDS = {
    "channel", "var", "process", "spec", "skip", "stop", "chaos", "miracle", "if", "then",
    "else", "while", "do", "true", "false", "and", "or", "not", "in", "head", "tail",
    "proj", "filter", "bool", "int", "enum", "seq", "hide", "rename",
}

_UNICODE = {"∧": "and", "∨": "or", "¬": "not", "⇒": "=>", "⌢": "^", "≤": "<=", "≥": ">=", "≠": "!=", "⟨": "⟨", "⟩": "⟩"}

_SYMBOLS = [
    "[|", "|]", "|~|", "|||", "|-", "->", ":=", "..", "<=", ">=", "!=", "=>", "[]",
    "[", "]", "{", "}", "(", ")", "<", ">", "=", "&", ";", "|", "!", "?", ":", ",",
    "+", "-", "*", "#", "^", ".",
]

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>//[^\n]*)"
    r"|(?P<num>\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*'?)"
    r"|(?P<uni>[∧∨¬⇒⌢≤≥≠⟨⟩])"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in _SYMBOLS) + r")"
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'name', 'kw', 'sym', 'eof'
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        col = pos - line_start + 1
        if not m:
            raise SyntaxError_(f"unexpected character {src[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "num":
            toks.append(Token("num", text, line, col))
        elif kind == "name":
            toks.append(Token("kw" if text in KEYWORDS else "name", text, line, col))
        elif kind == "uni":
            t = _UNICODE[text]
            toks.append(Token("kw" if t in KEYWORDS else "sym", t, line, col))
        elif kind == "sym":
            toks.append(Token("sym", text, line, col))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

ANY = "any"


def type_of_domain(d: Optional[Domain]) -> Any:
    if d is None:
        return None
    if isinstance(d, BoolDomain):
        return "bool"
    if isinstance(d, IntDomain):
        return "int"
    if isinstance(d, EnumDomain):
        return ("enum", d.names)
    if isinstance(d, SeqDomain):
        return ("seq", type_of_domain(d.elem))
    raise TypeError(d)


def compatible(a: Any, b: Any) -> bool:
    if a == ANY or b == ANY:
        return True
    if isinstance(a, tuple) and isinstance(b, tuple) and a[0] == b[0] and a[0] in ("seq", "set"):
        return compatible(a[1], b[1])
    return a == b


def unify(a: Any, b: Any) -> Any:
    if a == ANY:
        return b
    if b == ANY:
        return a
    if isinstance(a, tuple) and a[0] in ("seq", "set"):
        return (a[0], unify(a[1], b[1]))
    return a


def type_str(t: Any) -> str:
    if t is None:
        return "no data"
    if isinstance(t, tuple):
        if t[0] == "enum":
            return "enum{" + ",".join(t[1]) + "}"
        return f"{t[0]} of {type_str(t[1])}"
    return str(t)


TRACE_T = ("seq", "event")
ACC_T = ("set", "event")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


@dataclass
class Scope:
    """What names mean while parsing one process or specification."""

    vars: dict[str, Any]  # state variables and bound inputs -> type
    locals: frozenset = frozenset()  # bound input names (not assignable)
    spec: bool = False  # tt / acc / primed variables allowed


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0
        self.channels: dict[str, Optional[Domain]] = {}
        self.vars: dict[str, Domain] = {}
        self.enum_consts: dict[str, tuple[str, ...]] = {}
        self.proc_names: set[str] = set()
        self.spec_names: set[str] = set()
        self.last_type: Any = ANY
        self.pending_refs: list[tuple[str, Token]] = []

    # -- token helpers ---------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "kw") and t.text in texts

    def error(self, msg: str, expected: tuple[str, ...] = (), tok: Token | None = None) -> SyntaxError_:
        t = tok or self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        full = f"{msg}; found {found}" if expected or msg.startswith("expected") else msg
        return SyntaxError_(full, t.line, t.col, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}", (text,))
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def name(self, what: str = "name") -> Token:
        t = self.tok
        if t.kind == "kw" and t.text in ("hide", "rename"):
            raise SyntaxError_(f"'{t.text}' is not supported", t.line, t.col, ())
        if t.kind != "name" or t.text.endswith("'"):
            raise self.error(f"expected {what}", (what,))
        self.i += 1
        return t

    def integer(self) -> int:
        neg = self.accept("-")
        t = self.tok
        if t.kind != "num":
            raise self.error("expected integer", ("integer",))
        self.i += 1
        return -int(t.text) if neg else int(t.text)

    # -- model -----------------------------------------------------------------

    def model(self) -> Model:
        channels: list[tuple[str, Optional[Domain]]] = []
        vars_: list[tuple[str, Domain]] = []
        procs: list[tuple[str, Any]] = []
        specs: list[tuple[str, SpecDecl]] = []
        while self.tok.kind != "eof":
            t = self.tok
            if self.accept("channel"):
                names = self._name_list("channel name")
                dom = self.type_() if self.accept(":") else None
                for n in names:
                    self._declare(n)
                    self.channels[n.text] = dom
                    channels.append((n.text, dom))
            elif self.accept("var"):
                names = self._name_list("variable name")
                self.expect(":")
                dom = self.type_()
                for n in names:
                    self._declare(n)
                    self.vars[n.text] = dom
                    vars_.append((n.text, dom))
            elif self.accept("process"):
                n = self.name("process name")
                self._declare(n)
                self.proc_names.add(n.text)
                self.expect("=")
                procs.append((n.text, self.proc(self._scope())))
            elif self.accept("spec"):
                n = self.name("specification name")
                self._declare(n)
                self.spec_names.add(n.text)
                self.expect("=")
                specs.append((n.text, self.spec_body(n)))
            elif t.kind == "kw" and t.text in ("hide", "rename"):
                raise SyntaxError_(f"'{t.text}' is not supported", t.line, t.col, ())
            else:
                raise self.error("expected a declaration", ("channel", "var", "process", "spec"))
        for name, tok in self.pending_refs:
            if name not in self.proc_names:
                raise UnknownName(f"unknown process {name!r}", tok.line, tok.col)
        return Model(tuple(channels), tuple(vars_), tuple(procs), tuple(specs))

    def _name_list(self, what: str) -> list[Token]:
        out = [self.name(what)]
        while self.accept(","):
            out.append(self.name(what))
        return out

    def _declare(self, n: Token) -> None:
        taken = set(self.channels) | set(self.vars) | self.proc_names | set(self.enum_consts) | self.spec_names
        if n.text in taken or n.text in ("tt", "acc"):
            raise TypeError_(f"name {n.text!r} is already declared", n.line, n.col)

    def _scope(self, spec: bool = False) -> Scope:
        return Scope({k: type_of_domain(d) for k, d in self.vars.items()}, frozenset(), spec)

    def type_(self) -> Domain:
        t = self.tok
        if self.accept("bool"):
            return BoolDomain()
        if self.accept("int"):
            self.expect("[")
            lo = self.integer()
            self.expect("..")
            hi = self.integer()
            self.expect("]")
            if lo > hi:
                raise TypeError_(f"empty range {lo}..{hi}", t.line, t.col)
            return IntDomain(lo, hi)
        if self.accept("enum"):
            self.expect("{")
            names = [n.text for n in self._name_list("enumeration constant")]
            self.expect("}")
            if len(set(names)) != len(names):
                raise TypeError_("duplicate enumeration constants", t.line, t.col)
            for n in names:
                if n in self.enum_consts and self.enum_consts[n] != tuple(names):
                    raise TypeError_(f"constant {n!r} belongs to another enumeration", t.line, t.col)
                self.enum_consts[n] = tuple(names)
            return EnumDomain(tuple(names))
        if self.accept("seq"):
            self.expect("[")
            n = self.integer()
            self.expect("]")
            if n < 0:
                raise TypeError_("negative sequence bound", t.line, t.col)
            return SeqDomain(n, self.type_())
        raise self.error("expected a type", ("bool", "int", "enum", "seq"))

    def spec_body(self, name: Token) -> SpecDecl:
        self.expect("[")
        sc = self._scope(spec=True)
        first = self.bool_expr(sc)
        pre = None
        if self.accept("|-"):
            pre, first = first, self.bool_expr(sc)
        self.expect("|")
        post = self.bool_expr(sc)
        self.expect("]")
        return SpecDecl(first, post, pre, (name.line, name.col))

    # -- processes ---------------------------------------------------------------

    def proc(self, sc: Scope) -> Any:
        left = self.ichoice(sc)
        while True:
            t = self.tok
            if self.accept("|||"):
                right = self.ichoice(sc)
                left = A.Par(left, right, form="inter", loc=(t.line, t.col))
            elif self.accept("[|"):
                sets = [self._brace_names()]
                while self.accept("|"):
                    sets.append(self._brace_names())
                self.expect("|]")
                if len(sets) == 1:
                    ns1, cs, ns2, form = (), sets[0], (), "sync"
                elif len(sets) == 3:
                    (ns1, cs, ns2), form = sets, "full"
                else:
                    raise self.error("parallel needs {chans} or {vars} | {chans} | {vars}", tok=t)
                self._check_names(ns1, self.vars, "variable")
                self._check_names(ns2, self.vars, "variable")
                self._check_names(cs, self.channels, "channel")
                n1, n2 = frozenset(x.text for x in ns1), frozenset(x.text for x in ns2)
                if n1 & n2:
                    raise TypeError_(f"name sets overlap on {sorted(n1 & n2)}", t.line, t.col)
                right = self.ichoice(sc)
                left = A.Par(
                    left, right, n1, frozenset(x.text for x in cs), n2, form=form, loc=(t.line, t.col)
                )
            else:
                return left

    def _brace_names(self) -> list[Token]:
        self.expect("{")
        out: list[Token] = []
        if not self.at("}"):
            out = self._name_list("name")
        self.expect("}")
        return out

    def _check_names(self, toks: list[Token], table: dict, what: str) -> None:
        for t in toks:
            if t.text not in table:
                raise UnknownName(f"unknown {what} {t.text!r}", t.line, t.col)

    def ichoice(self, sc: Scope) -> Any:
        left = self.echoice(sc)
        while True:
            t = self.tok
            if not self.accept("|~|"):
                return left
            left = A.IntChoice(left, self.echoice(sc), loc=(t.line, t.col))

    def echoice(self, sc: Scope) -> Any:
        left = self.seq(sc)
        while True:
            t = self.tok
            if not self.accept("[]"):
                return left
            left = A.ExtChoice(left, self.seq(sc), loc=(t.line, t.col))

    def seq(self, sc: Scope) -> Any:
        left = self.unary(sc)
        t = self.tok
        if self.accept(";"):
            return A.Seq(left, self.seq(sc), loc=(t.line, t.col))
        return left

    def unary(self, sc: Scope) -> Any:
        t = self.tok
        loc = (t.line, t.col)
        if t.kind == "kw" and t.text in ("hide", "rename"):
            raise SyntaxError_(f"'{t.text}' is not supported", t.line, t.col, ())
        if self.accept("skip"):
            return A.Skip(loc=loc)
        if self.accept("stop"):
            return A.Stop(loc=loc)
        if self.accept("chaos"):
            return A.Chaos(loc=loc)
        if self.accept("miracle"):
            return A.Miracle(loc=loc)
        if self.accept("if"):
            c = self.bool_expr(sc)
            self.expect("then")
            p = self.proc(sc)
            self.expect("else")
            return A.If(c, p, self.unary(sc), loc=loc)
        if self.accept("while"):
            c = self.bool_expr(sc)
            self.expect("do")
            return A.While(c, self.unary(sc), loc=loc)
        if t.kind == "name" and t.text in self.channels and self.peek().text in ("->", "!", "?"):
            return self.prefix(sc)
        if t.kind == "name" and self.peek().text == ":=":
            return self.assign(sc)
        guarded = self._try_guard(sc)
        if guarded is not None:
            return guarded
        if self.accept("("):
            p = self.proc(sc)
            self.expect(")")
            return p
        if t.kind == "name" and not t.text.endswith("'"):
            self.i += 1
            if t.text in self.vars or t.text in sc.vars or t.text in self.channels:
                raise self.error(f"{t.text!r} is not a process", ("->", ":=", "&"), tok=self.tok)
            self.pending_refs.append((t.text, t))
            return A.Ref(t.text, loc=loc)
        raise self.error("expected a process", ("skip", "stop", "chaos", "miracle", "(", "name"))

    def _try_guard(self, sc: Scope) -> Any:
        start = self.i
        t = self.tok
        try:
            c = self.expr(sc)
        except DslError:
            self.i = start
            return None
        if not self.accept("&"):
            self.i = start
            return None
        self._need("bool", t)
        self._process_expr(sc, c, t)
        return A.Guard(c, self.unary(sc), loc=(t.line, t.col))

    def prefix(self, sc: Scope) -> Any:
        ch = self.name("channel")
        loc = (ch.line, ch.col)
        dom = self.channels[ch.text]
        if self.accept("!"):
            if dom is None:
                raise TypeError_(f"channel {ch.text!r} carries no data", ch.line, ch.col)
            et = self.tok
            e = self.expr(sc)
            self._need(type_of_domain(dom), et)
            self._process_expr(sc, e, et)
            self.expect("->")
            return A.Prefix(ch.text, self.unary(sc), out=e, loc=loc)
        if self.accept("?"):
            if dom is None:
                raise TypeError_(f"channel {ch.text!r} carries no data", ch.line, ch.col)
            x = self.name("input variable")
            if x.text in self.vars or x.text in self.channels or x.text in self.enum_consts:
                raise TypeError_(f"input variable {x.text!r} clashes with a declaration", x.line, x.col)
            self.expect("->")
            inner = Scope({**sc.vars, x.text: type_of_domain(dom)}, sc.locals | {x.text}, sc.spec)
            return A.Prefix(ch.text, self.unary(inner), inp=x.text, loc=loc)
        if dom is not None:
            raise TypeError_(f"channel {ch.text!r} needs '!' or '?'", ch.line, ch.col)
        self.expect("->")
        return A.Prefix(ch.text, self.unary(sc), loc=loc)

    def assign(self, sc: Scope) -> Any:
        x = self.name("variable")
        if x.text in sc.locals:
            raise TypeError_(f"cannot assign to input variable {x.text!r}", x.line, x.col)
        if x.text not in self.vars:
            raise UnknownName(f"unknown variable {x.text!r}", x.line, x.col)
        self.expect(":=")
        et = self.tok
        e = self.expr(sc)
        self._need(type_of_domain(self.vars[x.text]), et)
        self._process_expr(sc, e, et)
        return A.Assign(x.text, e, loc=(x.line, x.col))

    # -- expressions -------------------------------------------------------------

    def _need(self, want: Any, tok: Token) -> None:
        """Check the type of the expression parsed last."""
        if not compatible(self.last_type, want):
            raise TypeError_(f"expected {type_str(want)}, got {type_str(self.last_type)}", tok.line, tok.col)

    def _process_expr(self, sc: Scope, e: Expr, tok: Token) -> None:
        if not sc.spec and "tt" in free_vars(e):
            raise TypeError_("'tt' is only available in specifications", tok.line, tok.col)

    def bool_expr(self, sc: Scope) -> Expr:
        t = self.tok
        e = self.expr(sc)
        self._need("bool", t)
        self._process_expr(sc, e, t)
        return e

    def expr(self, sc: Scope) -> Expr:
        """Parse, type-check and fold an expression; its type is left in ``last_type``."""
        raw, ty = self._ite(sc)
        self.last_type = ty
        return fold(raw)

    def _bin(self, op: str, a: tuple, b: tuple, tok: Token) -> tuple[Expr, Any]:
        (ea, ta), (eb, tb) = a, b
        bad = lambda: TypeError_(  # noqa: E731
            f"operator {tok.text!r} cannot combine {type_str(ta)} and {type_str(tb)}", tok.line, tok.col
        )
        if op in ("add", "sub", "mul"):
            if not (compatible(ta, "int") and compatible(tb, "int")):
                raise bad()
            ty: Any = "int"
        elif op in ("and", "or", "implies"):
            if not (compatible(ta, "bool") and compatible(tb, "bool")):
                raise bad()
            ty = "bool"
        elif op in ("eq", "ne"):
            if not compatible(ta, tb):
                raise bad()
            ty = "bool"
        elif op in ("lt", "le", "gt", "ge"):
            ok = (compatible(ta, "int") and compatible(tb, "int")) or (
                isinstance(unify(ta, tb), tuple) and unify(ta, tb)[0] == "seq" and compatible(ta, tb)
            )
            if not ok:
                raise bad()
            ty = "bool"
        elif op == "concat":
            if not (compatible(ta, ("seq", ANY)) and compatible(tb, ("seq", ANY)) and compatible(ta, tb)):
                raise bad()
            ty = unify(ta, tb)
        elif op == "in":
            if not (isinstance(tb, tuple) and tb[0] in ("seq", "set") and compatible(ta, tb[1])) and tb != ANY:
                raise bad()
            ty = "bool"
        else:  # pragma: no cover
            raise ValueError(op)
        return Op(op, (ea, eb)), ty

    def _ite(self, sc: Scope) -> tuple[Expr, Any]:
        t = self.tok
        if self.accept("if"):
            c = self._ite(sc)
            if not compatible(c[1], "bool"):
                raise TypeError_("condition must be bool", t.line, t.col)
            self.expect("then")
            a = self._ite(sc)
            self.expect("else")
            b = self._ite(sc)
            if not compatible(a[1], b[1]):
                raise TypeError_("branches of a conditional differ in type", t.line, t.col)
            return Op("ite", (c[0], a[0], b[0])), unify(a[1], b[1])
        return self._implies(sc)

    def _implies(self, sc: Scope) -> tuple[Expr, Any]:
        a = self._or(sc)
        t = self.tok
        if self.accept("=>"):
            return self._bin("implies", a, self._implies(sc), t)
        return a

    def _or(self, sc: Scope) -> tuple[Expr, Any]:
        a = self._and(sc)
        while True:
            t = self.tok
            if not self.accept("or"):
                return a
            a = self._bin("or", a, self._and(sc), t)

    def _and(self, sc: Scope) -> tuple[Expr, Any]:
        a = self._not(sc)
        while True:
            t = self.tok
            if not self.accept("and"):
                return a
            a = self._bin("and", a, self._not(sc), t)

    def _not(self, sc: Scope) -> tuple[Expr, Any]:
        t = self.tok
        if self.accept("not"):
            e, ty = self._not(sc)
            if not compatible(ty, "bool"):
                raise TypeError_("'not' needs a bool", t.line, t.col)
            return Op("not", (e,)), "bool"
        return self._cmp(sc)

    _CMP = {"=": "eq", "!=": "ne", "<": "lt", "<=": "le", ">": "gt", ">=": "ge", "in": "in"}

    def _cmp(self, sc: Scope) -> tuple[Expr, Any]:
        a = self._cat(sc)
        t = self.tok
        if t.kind in ("sym", "kw") and t.text in self._CMP:
            self.i += 1
            return self._bin(self._CMP[t.text], a, self._cat(sc), t)
        return a

    def _cat(self, sc: Scope) -> tuple[Expr, Any]:
        a = self._add(sc)
        while True:
            t = self.tok
            if not self.accept("^"):
                return a
            a = self._bin("concat", a, self._add(sc), t)

    def _add(self, sc: Scope) -> tuple[Expr, Any]:
        a = self._mul(sc)
        while True:
            t = self.tok
            if self.accept("+"):
                a = self._bin("add", a, self._mul(sc), t)
            elif self.accept("-"):
                a = self._bin("sub", a, self._mul(sc), t)
            else:
                return a

    def _mul(self, sc: Scope) -> tuple[Expr, Any]:
        a = self._unary(sc)
        while True:
            t = self.tok
            if not self.accept("*"):
                return a
            a = self._bin("mul", a, self._unary(sc), t)

    def _unary(self, sc: Scope) -> tuple[Expr, Any]:
        t = self.tok
        if self.accept("-"):
            e, ty = self._unary(sc)
            if not compatible(ty, "int"):
                raise TypeError_("unary '-' needs an int", t.line, t.col)
            if isinstance(e, Lit) and isinstance(e.value, int) and not isinstance(e.value, bool):
                return Lit(-e.value), "int"
            return Op("neg", (e,)), "int"
        if self.accept("#"):
            e, ty = self._unary(sc)
            if not (isinstance(ty, tuple) and ty[0] in ("seq", "set")) and ty != ANY:
                raise TypeError_("'#' needs a sequence or set", t.line, t.col)
            return Op("len", (e,)), "int"
        return self._atom(sc)

    def _items(self, sc: Scope, close: str) -> tuple[list[Expr], Any]:
        items: list[Expr] = []
        ty: Any = ANY
        if not self.at(close):
            while True:
                t = self.tok
                e, et = self._ite(sc)
                if not compatible(ty, et):
                    raise TypeError_("elements differ in type", t.line, t.col)
                ty = unify(ty, et)
                items.append(e)
                if not self.accept(","):
                    break
        self.expect(close)
        return items, ty

    def _atom(self, sc: Scope) -> tuple[Expr, Any]:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Lit(int(t.text)), "int"
        if self.accept("true"):
            return Lit(True), "bool"
        if self.accept("false"):
            return Lit(False), "bool"
        if self.accept("("):
            e = self._ite(sc)
            self.expect(")")
            return e
        if self.accept("[]"):
            return Lit(()), ("seq", ANY)
        if self.accept("["):
            items, ty = self._items(sc, "]")
            return Op("seq", items), ("seq", ty)
        if self.accept("⟨"):
            items, ty = self._items(sc, "⟩")
            return Op("seq", items), ("seq", ty)
        if self.accept("{"):
            items, ty = self._items(sc, "}")
            return Op("set", items), ("set", ty)
        if self.at("head", "tail"):
            op = t.text
            self.i += 1
            self.expect("(")
            e, ty = self._ite(sc)
            self.expect(")")
            if not compatible(ty, ("seq", ANY)):
                raise TypeError_(f"{op} needs a sequence", t.line, t.col)
            elem = ty[1] if isinstance(ty, tuple) else ANY
            return Op(op, (e,)), (elem if op == "head" else ty)
        if self.accept("proj"):
            self.expect("(")
            e, ty = self._ite(sc)
            self.expect(",")
            ch = self.name("channel")
            self.expect(")")
            if ch.text not in self.channels:
                raise UnknownName(f"unknown channel {ch.text!r}", ch.line, ch.col)
            if not compatible(ty, TRACE_T):
                raise TypeError_("proj needs a trace", t.line, t.col)
            return Op("proj", (e,), ch.text), ("seq", type_of_domain(self.channels[ch.text]) or ANY)
        if self.accept("filter"):
            self.expect("(")
            e, ty = self._ite(sc)
            self.expect(",")
            chs = self._brace_names()
            self.expect(")")
            self._check_names(chs, self.channels, "channel")
            if not compatible(ty, TRACE_T):
                raise TypeError_("filter needs a trace", t.line, t.col)
            return Op("filter", (e,), frozenset(c.text for c in chs)), TRACE_T
        if t.kind == "name":
            return self._name_atom(sc)
        raise self.error("expected an expression", ("expression",))

    def _name_atom(self, sc: Scope) -> tuple[Expr, Any]:
        t = self.tok
        self.i += 1
        n = t.text
        if n.endswith("'"):
            base = n[:-1]
            if not sc.spec or base not in self.vars:
                raise UnknownName(f"unknown name {n!r}", t.line, t.col)
            return Var(n), type_of_domain(self.vars[base])
        if n in sc.vars:
            return Var(n), sc.vars[n]
        if n == "tt":
            return Var("tt"), TRACE_T
        if n == "acc" and sc.spec:
            return Var("acc"), ACC_T
        if n in self.enum_consts:
            return Lit(n), ("enum", self.enum_consts[n])
        if n in self.channels:
            dom = self.channels[n]
            if self.accept("."):
                dt = self.tok
                e, ty = self._atom(sc)
                if dom is None or not compatible(ty, type_of_domain(dom)):
                    raise TypeError_(f"bad data for channel {n!r}", dt.line, dt.col)
                return Op("event", (e,), n), "event"
            if dom is not None:
                raise TypeError_(f"channel {n!r} needs data ('{n}.e')", t.line, t.col)
            return Op("event", (), n), "event"
        raise UnknownName(f"unknown name {n!r}", t.line, t.col)


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def parse_model(src: str) -> Model:
    """Parse a complete model (declarations, processes and specifications)."""
    return Parser(src).model()


def parse_process(src: str, model: Model) -> Any:
    """Parse a single process over the declarations of ``model``."""
    p = _parser_for(src, model)
    out = p.proc(p._scope())
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing input")
    for name, tok in p.pending_refs:
        if name not in p.proc_names:
            raise UnknownName(f"unknown process {name!r}", tok.line, tok.col)
    return out


def parse_expr(src: str, model: Model, spec: bool = True) -> Expr:
    p = _parser_for(src, model)
    out = p.expr(p._scope(spec=spec))
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing input")
    return out


def _parser_for(src: str, model: Model) -> Parser:
    p = Parser(src)
    p.channels = dict(model.channels)
    p.vars = dict(model.vars)
    for _, d in model.vars + tuple((n, d) for n, d in model.channels if d is not None):
        _collect_enums(d, p.enum_consts)
    p.proc_names = {n for n, _ in model.processes}
    return p


def _collect_enums(d: Domain, out: dict) -> None:
    if isinstance(d, EnumDomain):
        for n in d.names:
            out[n] = d.names
    elif isinstance(d, SeqDomain):
        _collect_enums(d.elem, out)


def parse_invariant(src: str, model: Model) -> SpecDecl:
    """Parse an invariant file with ``pre:``, ``peri:`` and ``post:`` lines.

    ``peri`` and ``post`` default to ``true`` when absent; a line may be
    continued on following lines that do not start a new key.
    """
    parts: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, line in enumerate(src.splitlines(), 1):
        body = line.split("//", 1)[0]
        m = re.match(r"\s*(pre|peri|post)\s*:(.*)$", body)
        if m:
            current = m.group(1)
            if current in parts:
                raise SyntaxError_(f"duplicate '{current}' entry", lineno, 1)
            parts[current] = [(lineno, m.group(2))]
        elif body.strip():
            if current is None:
                raise SyntaxError_("expected 'pre:', 'peri:' or 'post:'", lineno, 1, ("pre", "peri", "post"))
            parts[current].append((lineno, body))
    exprs: dict[str, Expr] = {}
    for key, chunks in parts.items():
        text = "\n" * (chunks[0][0] - 1) + "\n".join(c for _, c in chunks)
        exprs[key] = parse_expr(text, model, spec=True)
    return SpecDecl(exprs.get("peri", Lit(True)), exprs.get("post", Lit(True)), exprs.get("pre"))
