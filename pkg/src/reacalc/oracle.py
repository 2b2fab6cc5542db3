"""Bounded brute-force semantics.

Two independent routes to the same observations:

* :func:`denote_bounded` reads a calculated contract pointwise: every term
  whose condition holds in the initial state contributes one observation.
* :func:`explore_bounded` runs the program text with small-step rules and
  collects what it sees, trace level by trace level.

:func:`cross_check` compares the two after putting both into a canonical
form: minimal divergence traces, the ⊆-minimal acceptance sets per trace
(which determine the refusals), and the terminated (trace, state) pairs, with
everything at or above a divergence discarded.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Union

import networkx as nx

from .contract import Alphabet, Contract
from .dsl import ast as A
from .errors import BoundExceeded, StuckConfiguration, UnknownName
from .expr import Event, evaluate, format_value, subst_image
from .lens import DEFAULT_STATE_LIMIT, State, StateSpace
from .rel import accepts_eval, trace_eval

# ---------------------------------------------------------------------------
# Observations
# ---------------------------------------------------------------------------

Trace = tuple  # tuple[Event, ...]


def fmt_trace(t: Iterable[Event]) -> str:
    return "⟨" + ", ".join(str(e) for e in t) + "⟩"


def fmt_events(es: Iterable[Event]) -> str:
    return "{" + ", ".join(sorted(str(e) for e in es)) + "}"


@dataclass(frozen=True)
class Quiescent:
    trace: Trace
    acceptances: frozenset
    kind = "quiescent"

    def __str__(self) -> str:
        return f"Quiescent({fmt_trace(self.trace)}, {fmt_events(self.acceptances)})"


@dataclass(frozen=True)
class Terminated:
    trace: Trace
    final: State
    kind = "terminated"

    def __str__(self) -> str:
        return f"Terminated({fmt_trace(self.trace)}, {self.final!r})"


@dataclass(frozen=True)
class Divergence:
    trace: Trace
    kind = "divergence"

    def __str__(self) -> str:
        return f"Divergence({fmt_trace(self.trace)})"


Observation = Union[Quiescent, Terminated, Divergence]


@dataclass(frozen=True)
class Bounds:
    trace_len: int = 4
    star_bound: int = 3
    state_limit: int = DEFAULT_STATE_LIMIT
    config_limit: int = 200_000

    def __post_init__(self) -> None:
        if min(self.trace_len, self.star_bound, self.state_limit) < 0:
            raise ValueError("bounds must be non-negative")


def raw_state(space: StateSpace, values: Mapping[str, Any]) -> State:
    """A state that is not checked against the declared domains.

    Intermediate and final states of a run may leave the declared domains
    (a bounded buffer that overflows, a counter that passes its range); the
    oracles report them as they are instead of failing.
    """
    return State(space, tuple(values[n] for n in space.names))


def all_traces(alphabet: Alphabet, max_len: int, prefix: Trace = ()) -> Iterable[Trace]:
    """Every trace extending ``prefix`` up to ``max_len`` events (prefix included)."""
    evs = alphabet.events()
    for n in range(0, max_len - len(prefix) + 1):
        for ext in itertools.product(evs, repeat=n):
            yield prefix + ext


# ---------------------------------------------------------------------------
# Denotation of a contract
# ---------------------------------------------------------------------------


def denote_bounded(
    c: Contract, init: State, b: Bounds, extension_closed: bool = True
) -> frozenset[Observation]:
    """The observations of ``c`` from ``init`` with traces of at most ``b.trace_len`` events."""
    L = b.trace_len
    out: set[Observation] = set()
    for t in c.pre:
        if evaluate(t.cond, init):
            tr = trace_eval(t.trace, init)
            if len(tr) <= L:
                if extension_closed:
                    out.update(Divergence(x) for x in all_traces(c.alphabet, L, tr))
                else:
                    out.add(Divergence(tr))
    for e in c.peri:
        if evaluate(e.cond, init):
            tr = trace_eval(e.trace, init)
            if len(tr) <= L:
                out.add(Quiescent(tr, accepts_eval(e.accepts, init)))
    for p in c.post:
        if evaluate(p.cond, init):
            tr = trace_eval(p.trace, init)
            if len(tr) <= L:
                out.add(Terminated(tr, raw_state(c.space, subst_image(p.update, init))))
    return frozenset(out)


# ---------------------------------------------------------------------------
# Canonical comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Canonical:
    divergences: frozenset  # minimal divergent traces
    failures: frozenset  # (trace, minimal acceptance set)
    terminations: frozenset  # (trace, final state)


def _is_prefix(a: tuple, b: tuple) -> bool:
    return len(a) <= len(b) and b[: len(a)] == a


def canonical(obs: Iterable[Observation]) -> Canonical:
    obs = list(obs)
    divs = {o.trace for o in obs if isinstance(o, Divergence)}
    minimal = frozenset(d for d in divs if not any(e != d and _is_prefix(e, d) for e in divs))

    def blocked(t: tuple) -> bool:
        return any(_is_prefix(d, t) for d in minimal)

    acc: dict[tuple, set[frozenset]] = {}
    terms = set()
    for o in obs:
        if isinstance(o, Divergence) or blocked(o.trace):
            continue
        if isinstance(o, Quiescent):
            acc.setdefault(o.trace, set()).add(o.acceptances)
        else:
            terms.add((o.trace, o.final))
    failures = set()
    for t, sets in acc.items():
        for a in sets:
            if not any(b < a for b in sets):
                failures.add((t, a))
    return Canonical(minimal, frozenset(failures), frozenset(terms))


def canonical_diff(x: Canonical, y: Canonical) -> tuple[list[Observation], list[Observation]]:
    """Observations present only in ``x`` and only in ``y``."""

    def obs(c: Canonical) -> set[Observation]:
        s: set[Observation] = {Divergence(d) for d in c.divergences}
        s |= {Quiescent(t, a) for t, a in c.failures}
        s |= {Terminated(t, st) for t, st in c.terminations}
        return s

    ox, oy = obs(x), obs(y)
    key = lambda o: (len(o.trace), str(o))  # noqa: E731
    return sorted(ox - oy, key=key), sorted(oy - ox, key=key)


# ---------------------------------------------------------------------------
# Small-step configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CTick:
    """About to terminate in ``state``."""

    state: State


@dataclass(frozen=True)
class CTerm:
    """Terminated (only appears as a parallel component or a ✓-target)."""

    state: State


@dataclass(frozen=True)
class CStop:
    pass


@dataclass(frozen=True)
class CChaos:
    pass


@dataclass(frozen=True)
class CMiracle:
    pass


@dataclass(frozen=True)
class CPrefix:
    event: Event
    body: Any
    state: State


@dataclass(frozen=True)
class CInt:
    options: tuple
    state: State


@dataclass(frozen=True)
class CSeq:
    first: Any
    rest: Any


@dataclass(frozen=True)
class CExt:
    branches: tuple


@dataclass(frozen=True)
class CPar:
    left: Any
    right: Any
    ns1: frozenset
    cs: frozenset
    ns2: frozenset
    s0: State


Config = Union[CTick, CTerm, CStop, CChaos, CMiracle, CPrefix, CInt, CSeq, CExt, CPar]


class _Tau:
    def __repr__(self) -> str:
        return "τ"


class _Tick:
    def __repr__(self) -> str:
        return "✓"


TAU = _Tau()
TICK = _Tick()
Label = Union[Event, _Tau, _Tick]


@dataclass
class Semantics:
    """Small-step rules for a process language over one alphabet and state space."""

    alphabet: Alphabet
    space: StateSpace
    processes: Mapping[str, Any] = field(default_factory=dict)

    # -- activation: resolve the purely structural parts of a process --------

    def activate(self, p: Any, s: State) -> Config:
        if isinstance(p, A.Skip):
            return CTick(s)
        if isinstance(p, A.Stop):
            return CStop()
        if isinstance(p, A.Chaos):
            return CChaos()
        if isinstance(p, A.Miracle):
            return CMiracle()
        if isinstance(p, A.Assign):
            d = s.as_dict()
            d[p.var] = evaluate(p.expr, s)
            return CTick(raw_state(self.space, d))
        if isinstance(p, A.Prefix):
            if p.inp is not None:
                dom = self.alphabet.domain(p.channel)
                return self._ext(
                    [CPrefix(Event(p.channel, v), A.literal_input(p, v), s) for v in dom.values()]
                )
            data = None if p.out is None else evaluate(p.out, s)
            return CPrefix(Event(p.channel, data), p.body, s)
        if isinstance(p, A.Guard):
            return self.activate(p.body, s) if evaluate(p.cond, s) else CStop()
        if isinstance(p, A.If):
            return self.activate(p.then if evaluate(p.cond, s) else p.else_, s)
        if isinstance(p, A.Seq):
            return CSeq(self.activate(p.left, s), p.right)
        if isinstance(p, A.While):
            if evaluate(p.cond, s):
                return CSeq(self.activate(p.body, s), p)
            return CTick(s)
        if isinstance(p, A.ExtChoice):
            return self._ext([self.activate(p.left, s), self.activate(p.right, s)])
        if isinstance(p, A.IntChoice):
            return CInt((p.left, p.right), s)
        if isinstance(p, A.Par):
            return CPar(self.activate(p.left, s), self.activate(p.right, s), p.ns1, p.cs, p.ns2, s)
        if isinstance(p, A.Ref):
            if p.name not in self.processes:
                raise UnknownName(f"unknown process {p.name!r}")
            return self.activate(self.processes[p.name], s)
        raise TypeError(f"not a process: {p!r}")

    @staticmethod
    def _ext(branches: list) -> Config:
        flat: list = []
        for b in branches:
            flat.extend(b.branches if isinstance(b, CExt) else [b])
        return flat[0] if len(flat) == 1 else CExt(tuple(flat))

    # -- classification -------------------------------------------------------

    def miraculous(self, c: Config) -> bool:
        if isinstance(c, CMiracle):
            return True
        if isinstance(c, CSeq):
            return self.miraculous(c.first)
        if isinstance(c, CPar):
            return self.miraculous(c.left) or self.miraculous(c.right)
        return False

    def divergent(self, c: Config) -> bool:
        if isinstance(c, CChaos):
            return True
        if isinstance(c, CSeq):
            return self.divergent(c.first)
        if isinstance(c, CExt):
            return any(self.divergent(b) for b in c.branches)
        if isinstance(c, CPar):
            return self.divergent(c.left) or self.divergent(c.right)
        return False

    # -- transitions ------------------------------------------------------------

    def step(self, c: Config) -> list[tuple[Label, Config]]:
        if isinstance(c, CTick):
            return [(TICK, CTerm(c.state))]
        if isinstance(c, (CTerm, CStop, CChaos)):
            return []
        if isinstance(c, CMiracle):
            raise StuckConfiguration("a miraculous configuration has no transitions")
        if isinstance(c, CPrefix):
            return [(c.event, self.activate(c.body, c.state))]
        if isinstance(c, CInt):
            return [(TAU, self.activate(o, c.state)) for o in c.options]
        if isinstance(c, CSeq):
            out = []
            for lab, nxt in self.step(c.first):
                if lab is TICK:
                    out.append((TAU, self.activate(c.rest, nxt.state)))
                else:
                    out.append((lab, CSeq(nxt, c.rest)))
            return out
        if isinstance(c, CExt):
            out = []
            for i, b in enumerate(c.branches):
                for lab, nxt in self.step(b):
                    if lab is TAU:
                        bs = list(c.branches)
                        bs[i] = nxt
                        out.append((TAU, self._ext(bs)))
                    else:
                        out.append((lab, nxt))
            return out
        if isinstance(c, CPar):
            return self._step_par(c)
        raise TypeError(f"not a configuration: {c!r}")

    def _step_par(self, c: CPar) -> list[tuple[Label, Config]]:
        if isinstance(c.left, CTerm) and isinstance(c.right, CTerm):
            d = c.s0.as_dict()
            d.update({x: c.left.state[x] for x in c.ns1})
            d.update({x: c.right.state[x] for x in c.ns2})
            return [(TICK, CTerm(raw_state(self.space, d)))]
        ls, rs = self.step(c.left), self.step(c.right)
        out: list[tuple[Label, Config]] = []

        def own(lab: Label, nxt: Config) -> tuple[Label, Config]:
            return (TAU, CTerm(nxt.state)) if lab is TICK else (lab, nxt)

        for lab, nxt in ls:
            if isinstance(lab, Event) and lab.channel in c.cs:
                for lab2, nxt2 in rs:
                    if lab2 == lab:
                        out.append((lab, CPar(nxt, nxt2, c.ns1, c.cs, c.ns2, c.s0)))
                continue
            lab, nxt = own(lab, nxt)
            out.append((lab, CPar(nxt, c.right, c.ns1, c.cs, c.ns2, c.s0)))
        for lab, nxt in rs:
            if isinstance(lab, Event) and lab.channel in c.cs:
                continue
            lab, nxt = own(lab, nxt)
            out.append((lab, CPar(c.left, nxt, c.ns1, c.cs, c.ns2, c.s0)))
        return out

    # -- exploration ------------------------------------------------------------

    def explore(self, p: Any, init: State, b: Bounds) -> frozenset[Observation]:
        return self.explore_config(self.activate(p, init), b)

    def explore_config(self, start: Config, b: Bounds) -> frozenset[Observation]:
        out: set[Observation] = set()
        level: dict[tuple, set] = {(): {start}}
        for _ in range(b.trace_len + 1):
            nxt_level: dict[tuple, set] = {}
            for tr, cfgs in level.items():
                self._expand(tr, cfgs, b, out, nxt_level)
            level = nxt_level
        return frozenset(out)

    def _expand(self, tr: tuple, cfgs: set, b: Bounds, out: set, nxt_level: dict) -> None:
        graph = nx.DiGraph()
        seen: set = set()
        todo = list(cfgs)
        visible: list[tuple[Config, list]] = []
        diverges = False
        while todo:
            c = todo.pop()
            if c in seen:
                continue
            seen.add(c)
            if len(seen) > b.config_limit:
                raise BoundExceeded(f"more than {b.config_limit} configurations after {fmt_trace(tr)}")
            if self.miraculous(c):
                continue
            if self.divergent(c):
                diverges = True
                break
            steps = self.step(c)
            graph.add_node(c)
            for lab, n in steps:
                if lab is TAU:
                    graph.add_edge(c, n)
                    todo.append(n)
            visible.append((c, steps))
        if diverges or not nx.is_directed_acyclic_graph(graph):
            out.add(Divergence(tr))
            return
        for c, steps in visible:
            labels = {lab for lab, _ in steps}
            if TAU not in labels and TICK not in labels:
                out.add(Quiescent(tr, frozenset(labels)))
            for lab, n in steps:
                if lab is TICK:
                    out.add(Terminated(tr, n.state))
                elif isinstance(lab, Event) and len(tr) < b.trace_len:
                    nxt_level.setdefault(tr + (lab,), set()).add(n)


def explore_bounded(
    p: Any,
    init: State,
    b: Bounds,
    alphabet: Alphabet,
    processes: Mapping[str, Any] | None = None,
) -> frozenset[Observation]:
    """Run ``p`` from ``init`` and collect its observations up to ``b.trace_len`` events."""
    return Semantics(alphabet, init.space, processes or {}).explore(p, init, b)


def step(
    p: Any, s: State, alphabet: Alphabet, processes: Mapping[str, Any] | None = None
) -> list[tuple[Label, Config]]:
    """The transitions of a freshly activated process."""
    sem = Semantics(alphabet, s.space, processes or {})
    return sem.step(sem.activate(p, s))


# ---------------------------------------------------------------------------
# Cross-check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mismatch:
    state: State
    only_operational: tuple
    only_denotational: tuple


@dataclass(frozen=True)
class CrossCheckReport:
    ok: bool
    states_checked: int
    mismatches: tuple
    star_bound: Optional[int]
    trace_len: int

    @property
    def bounded(self) -> bool:
        return True

    def summary(self) -> str:
        if self.ok:
            return f"match on {self.states_checked} initial states (trace bound {self.trace_len})"
        m = self.mismatches[0]
        lines = [f"{len(self.mismatches)} of {self.states_checked} initial states disagree; first at {m.state!r}"]
        lines += [f"  operational only:  {o}" for o in m.only_operational[:5]]
        lines += [f"  denotational only: {o}" for o in m.only_denotational[:5]]
        return "\n".join(lines)


def cross_check(
    p: Any,
    c: Contract,
    b: Bounds,
    processes: Mapping[str, Any] | None = None,
    max_mismatches: int = 10,
) -> CrossCheckReport:
    """Compare the operational and denotational observations from every initial state."""
    sem = Semantics(c.alphabet, c.space, processes or {})
    mismatches = []
    n = 0
    for s in c.space.states(b.state_limit):
        n += 1
        op = canonical(sem.explore(p, s, b))
        den = canonical(denote_bounded(c, s, b, extension_closed=False))
        if op != den:
            x, y = canonical_diff(op, den)
            mismatches.append(Mismatch(s, tuple(x), tuple(y)))
            if len(mismatches) >= max_mismatches:
                break
    return CrossCheckReport(not mismatches, n, tuple(mismatches), c.star_bound, b.trace_len)


def observation_json(o: Observation) -> dict[str, Any]:
    d: dict[str, Any] = {"kind": o.kind, "trace": [str(e) for e in o.trace]}
    if isinstance(o, Quiescent):
        d["acceptances"] = sorted(str(e) for e in o.acceptances)
    if isinstance(o, Terminated):
        d["state"] = {k: format_value(v) for k, v in o.final.as_dict().items()}
    return d
