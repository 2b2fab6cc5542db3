"""Seeded generator of small random programs over a fixed model.

The model has one plain channel ``a``, one data channel ``c`` carrying
``0``/``1`` and two variables ``x``, ``y`` over ``0..1``.  Generated
programs never leave the variable domains, and every loop body starts with
an event so that loops are productive.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from reacalc.dsl import parse_model, parse_process

HEADER = """\
channel a
channel c : int[0..1]
var x : int[0..1]
var y : int[0..1]
"""

MODEL = parse_model(HEADER)


@dataclass(frozen=True)
class Options:
    miracle: bool = False
    chaos: bool = True
    stop: bool = True
    loops: bool = True
    parallel: bool = True
    inputs: bool = True


def _expr(rng: random.Random, env: list[str]) -> str:
    atoms = ["0", "1", "x", "y", "1 - x", "1 - y"] + env + [f"1 - {v}" for v in env]
    return rng.choice(atoms)


def _cond(rng: random.Random, env: list[str]) -> str:
    a, b = _expr(rng, env), _expr(rng, env)
    return rng.choice([f"{a} = {b}", f"{a} < {b}", f"{a} != {b}", "true", f"not ({a} = {b})"])


def _leaf(rng: random.Random, env: list[str], o: Options) -> str:
    opts = ["skip", "x := E", "y := E", "a -> skip", "a -> skip", "c!E -> skip", "c!E -> skip"]
    if o.stop:
        opts.append("stop")
    if o.chaos and rng.random() < 0.5:
        opts.append("chaos")
    if o.miracle:
        opts.append("miracle")
    s = rng.choice(opts)
    return s.replace("E", _expr(rng, env))


def _event_prefix(rng: random.Random, env: list[str], o: Options, depth: int) -> str:
    k = rng.randrange(3 if o.inputs else 2)
    if k == 0:
        return f"a -> ({gen(rng, depth, env, o)})"
    if k == 1:
        return f"c!{_expr(rng, env)} -> ({gen(rng, depth, env, o)})"
    v = f"v{len(env)}"
    return f"c?{v} -> ({gen(rng, depth, env + [v], o)})"


def gen(rng: random.Random, depth: int, env: list[str] | None = None, o: Options = Options()) -> str:
    """A random process of syntactic depth at most ``depth``."""
    env = env or []
    if depth <= 0 or rng.random() < 0.15:
        return _leaf(rng, env, o)
    d = depth - 1
    kinds = ["prefix", "prefix", "guard", "seq", "ext", "int", "if"]
    if o.loops:
        kinds.append("while")
    if o.parallel:
        kinds.append("par")
    k = rng.choice(kinds)
    if k == "prefix":
        return _event_prefix(rng, env, o, d)
    if k == "guard":
        return f"({_cond(rng, env)}) & ({gen(rng, d, env, o)})"
    if k == "seq":
        return f"({gen(rng, d, env, o)}) ; ({gen(rng, d, env, o)})"
    if k == "ext":
        return f"({gen(rng, d, env, o)}) [] ({gen(rng, d, env, o)})"
    if k == "int":
        return f"({gen(rng, d, env, o)}) |~| ({gen(rng, d, env, o)})"
    if k == "if":
        return f"if {_cond(rng, env)} then ({gen(rng, d, env, o)}) else ({gen(rng, d, env, o)})"
    if k == "while":
        inner = Options(o.miracle, o.chaos, o.stop, False, o.parallel, o.inputs)
        return f"while {_cond(rng, env)} do ({_event_prefix(rng, env, inner, max(d - 1, 0))})"
    ns1 = rng.choice(["", "x"])
    ns2 = rng.choice(["", "y"])
    cs = rng.choice(["", "a", "c", "a, c"])
    return f"({gen(rng, d, env, o)}) [| {{{ns1}}} | {{{cs}}} | {{{ns2}}} |] ({gen(rng, d, env, o)})"


def random_source(seed: int, depth: int = 3, o: Options = Options()) -> str:
    return gen(random.Random(seed), depth, None, o)


def random_process(seed: int, depth: int = 3, o: Options = Options()):
    return parse_process(random_source(seed, depth, o), MODEL)
