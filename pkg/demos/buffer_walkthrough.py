"""Walk through the two-place buffer: calculate, check deadlock freedom, prove order.

Run with ``python demos/buffer_walkthrough.py`` from the repository root.
"""

from pathlib import Path

from reacalc.dsl import Elaborator, contract_text, elaborate, parse_invariant, parse_model
from reacalc.expr import Lit, Subst
from reacalc.oracle import Bounds, cross_check
from reacalc.refinement import SpecContract, deadlock_check, loop_invariant_check, refines_opaque

MODELS = Path(__file__).resolve().parent.parent / "models"
model = parse_model((MODELS / "buffer.rc").read_text())
bounds = Bounds(trace_len=4)

print("== one iteration of the loop body ==")
body = elaborate(model, "Body")
print(contract_text(body))

print("\n== the whole buffer, loop unrolled three times ==")
buffer = elaborate(model, "Buffer", 3)
print(f"{len(buffer.peri)} quiescent terms, {len(buffer.post)} final terms, {contract_text(buffer).splitlines()[0]}")

print("\n== deadlock freedom ==")
print(deadlock_check(buffer, bounds).summary())

print("\n== the calculated body agrees with a run of the program ==")
print(cross_check(model.process("Body"), body, Bounds(trace_len=3), model.process_map).summary())

print("\n== order: outputs are always a prefix of inputs ==")
inv_decl = parse_invariant((MODELS / "buffer.inv").read_text(), model)
inv = SpecContract.from_exprs(inv_decl.peri, inv_decl.post, model.alphabet, model.space, inv_decl.pre)
loop_body = Elaborator(model.alphabet, model.space, model.process_map).named("Body")
print("invariant:", loop_invariant_check(Lit(True), loop_body, inv, bounds).summary())
order = model.spec_map["Order"]
spec = SpecContract.from_exprs(order.peri, order.post, model.alphabet, model.space, order.pre)
print("Order ⊑ bf := [] ; invariant:", refines_opaque(spec, inv.after_assign(Subst({"bf": Lit(())})), bounds).summary())
