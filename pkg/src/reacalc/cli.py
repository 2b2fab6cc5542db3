"""Command-line interface: ``reacalc calc | refine | deadlock | verify-loop | cross-check``.

Exit status: 0 when the property holds (or the calculation succeeded), 1 when
it fails, 2 for usage, parse, type or calculation errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any, Optional

import click

from .contract import DEFAULT_STAR_BOUND, Contract
from .dsl import ast as A
from .dsl import contract_json, contract_text, elaborate, parse_invariant, parse_model
from .dsl.elaborate import Elaborator
from .dsl.model import Model
from .errors import ReacalcError, UnknownName
from .expr import Subst
from .oracle import Bounds, cross_check
from .refinement import (
    SpecContract,
    Verdict,
    Witness,
    deadlock_check,
    loop_invariant_check,
    refines_contract,
    refines_opaque,
)


class Failure(Exception):
    """Raised inside a command to exit with status 2 and a message."""


def _load(path: str) -> Model:
    try:
        return parse_model(Path(path).read_text(encoding="utf-8"))
    except ReacalcError as e:
        raise Failure(f"{path}:{e}") from None


def _emit(as_json: bool, doc: dict[str, Any], text: str) -> None:
    if as_json:
        click.echo(json.dumps(doc, indent=2, ensure_ascii=False))
    else:
        click.echo(text)


def _doc(command: str, process: str, trace: Optional[int], star: Optional[int]) -> dict[str, Any]:
    return {"command": command, "process": process, "bounds": {"trace": trace, "star": star}}


def _verdict_doc(doc: dict[str, Any], v: Verdict) -> dict[str, Any]:
    doc["verdict"] = v.as_json()
    doc["witnesses"] = [w.as_json() for w in v.witnesses]
    if v.notes:
        doc["notes"] = list(v.notes)
    return doc


def _run(fn) -> None:
    try:
        code = fn()
    except Failure as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    except ReacalcError as e:
        click.echo(f"error: {type(e).__name__}: {e}", err=True)
        sys.exit(2)
    sys.exit(code)


@click.group()
@click.version_option(package_name="reacalc")
def main() -> None:
    """Calculate reactive contracts and check refinement properties."""


star_opt = click.option(
    "--star-bound", type=click.IntRange(min=0), default=DEFAULT_STAR_BOUND, show_default=True,
    help="Unrolling depth for loops.",
)
json_opt = click.option("--json", "as_json", is_flag=True, help="Emit a JSON report.")
trace_opt = click.option(
    "--trace-bound", type=click.IntRange(min=0), required=True, help="Maximum trace length explored."
)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--process", "process", required=True, help="Process to calculate.")
@star_opt
@json_opt
def calc(file: str, process: str, star_bound: int, as_json: bool) -> None:
    """Print the contract of a process."""

    def go() -> int:
        m = _load(file)
        c = elaborate(m, process, star_bound)
        doc = _doc("calc", process, None, star_bound)
        doc["contract"] = contract_json(c)
        _emit(as_json, doc, contract_text(c))
        return 0

    _run(go)


def _spec_or_process(m: Model, name: str, star_bound: int, trace_cap: int) -> Contract | SpecContract:
    specs = m.spec_map
    if name in specs:
        d = specs[name]
        return SpecContract.from_exprs(d.peri, d.post, m.alphabet, m.space, d.pre)
    return elaborate(m, name, star_bound, trace_cap)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--spec", "spec", required=True, help="Specification (process or spec declaration).")
@click.option("--impl", "impl", required=True, help="Implementation process.")
@trace_opt
@star_opt
@json_opt
def refine(file: str, spec: str, impl: str, trace_bound: int, star_bound: int, as_json: bool) -> None:
    """Check that IMPL refines SPEC."""

    def go() -> int:
        m = _load(file)
        s = _spec_or_process(m, spec, star_bound, trace_bound)
        i = elaborate(m, impl, star_bound, trace_bound)
        v = refines_contract(s, i, Bounds(trace_len=trace_bound, star_bound=star_bound))
        doc = _verdict_doc(_doc("refine", impl, trace_bound, star_bound), v)
        doc["spec"] = spec
        _emit(as_json, doc, f"{spec} ⊑ {impl}: {v.summary()}")
        return 0 if v.holds else 1

    _run(go)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--process", "process", required=True)
@trace_opt
@star_opt
@json_opt
def deadlock(file: str, process: str, trace_bound: int, star_bound: int, as_json: bool) -> None:
    """Check that a process is deadlock free."""

    def go() -> int:
        m = _load(file)
        c = elaborate(m, process, star_bound)
        v = deadlock_check(c, Bounds(trace_len=trace_bound, star_bound=star_bound))
        doc = _verdict_doc(_doc("deadlock", process, trace_bound, star_bound), v)
        _emit(as_json, doc, f"deadlock freedom of {process}: {v.summary()}")
        return 0 if v.holds else 1

    _run(go)


def _split_loop(p: Any, procs: dict) -> tuple[list, A.While]:
    """Split ``P1 ; ... ; while b do B`` into its prefix steps and the loop."""
    while isinstance(p, A.Ref):
        if p.name not in procs:
            raise UnknownName(f"unknown process {p.name!r}")
        p = procs[p.name]
    if isinstance(p, A.While):
        return [], p
    if isinstance(p, A.Seq):
        head, loop = _split_loop(p.right, procs)
        return [p.left] + head, loop
    raise Failure("the process must end with a while loop")


def _assignments(steps: list) -> Optional[Subst]:
    """The combined substitution of a prefix made only of assignments."""
    from .expr import subst_compose

    sigma = Subst()
    for st in steps:
        if isinstance(st, A.Skip):
            continue
        if not isinstance(st, A.Assign):
            return None
        sigma = subst_compose(Subst({st.var: st.expr}), sigma)
    return sigma


@main.command("verify-loop")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--process", "process", required=True)
@click.option("--invariant", "invariant", required=True, type=click.Path(exists=True, dir_okay=False))
@trace_opt
@click.option("--spec", "spec", default=None, help="Also check SPEC ⊑ (initialisation ; invariant).")
@json_opt
def verify_loop(file: str, process: str, invariant: str, trace_bound: int, spec: Optional[str], as_json: bool) -> None:
    """Verify a reactive loop invariant for the final loop of a process."""

    def go() -> int:
        m = _load(file)
        try:
            d = parse_invariant(Path(invariant).read_text(encoding="utf-8"), m)
        except ReacalcError as e:
            raise Failure(f"{invariant}:{e}") from None
        inv = SpecContract.from_exprs(d.peri, d.post, m.alphabet, m.space, d.pre)
        steps, loop = _split_loop(m.process(process), m.process_map)
        body = Elaborator(m.alphabet, m.space, m.process_map).contract(loop.body)
        b = Bounds(trace_len=trace_bound)
        v = loop_invariant_check(loop.cond, body, inv, b)
        # Obligation (1), a productive body, is enforced by raising NonProductiveBody.
        obligations = [
            {"obligation": f"({k})", "holds": not any(w.obligation.startswith(f"({k})") for w in v.witnesses)}
            for k in range(1, 5)
        ]
        spec_doc = None
        text = f"loop invariant for {process}: {v.summary()}"
        if spec is not None:
            specs = m.spec_map
            if spec not in specs:
                raise Failure(f"no spec declaration named {spec!r}")
            sigma = _assignments(steps)
            if sigma is None:
                raise Failure("--spec needs the loop to be preceded by assignments only")
            sd = specs[spec]
            s = SpecContract.from_exprs(sd.peri, sd.post, m.alphabet, m.space, sd.pre)
            v2 = refines_opaque(s, inv.after_assign(sigma), b)
            text += f"\n{spec} ⊑ initialisation ; invariant: {v2.summary()}"
            spec_doc = {"name": spec, **v2.as_json()}
            v = Verdict(v.holds and v2.holds, v.bounded or v2.bounded, v.witnesses + v2.witnesses, v.notes)
        doc = _verdict_doc(_doc("verify-loop", process, trace_bound, None), v)
        doc["obligations"] = obligations
        if spec_doc is not None:
            doc["spec"] = spec_doc
        _emit(as_json, doc, text)
        return 0 if v.holds else 1

    _run(go)


@main.command("cross-check")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--process", "process", required=True)
@trace_opt
@star_opt
@json_opt
def cross_check_cmd(file: str, process: str, trace_bound: int, star_bound: int, as_json: bool) -> None:
    """Compare the calculated contract with a run of the program."""

    def go() -> int:
        m = _load(file)
        sb = max(star_bound, trace_bound)
        c = elaborate(m, process, sb, trace_bound)
        r = cross_check(m.process(process), c, Bounds(trace_len=trace_bound, star_bound=sb), m.process_map)
        ws = []
        for mm in r.mismatches:
            for side, obs in (("operational only", mm.only_operational), ("denotational only", mm.only_denotational)):
                ws.extend(Witness(side, mm.state, o) for o in obs)
        v = Verdict(r.ok, True, tuple(ws))
        doc = _verdict_doc(_doc("cross-check", process, trace_bound, sb), v)
        doc["states_checked"] = r.states_checked
        _emit(as_json, doc, f"cross-check of {process}: {r.summary()}")
        return 0 if r.ok else 1

    _run(go)


if __name__ == "__main__":  # pragma: no cover
    main()
