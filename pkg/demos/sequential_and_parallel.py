"""Small calculations: assignments around events, divergence, choice and a pipe.

Run with ``python demos/sequential_and_parallel.py`` from the repository root.
"""

from pathlib import Path

from reacalc.dsl import contract_text, elaborate, parse_model
from reacalc.oracle import Bounds
from reacalc.refinement import equal_contracts, refines_contract

MODELS = Path(__file__).resolve().parent.parent / "models"
seq = parse_model((MODELS / "sequential.rc").read_text())
small = parse_model((MODELS / "small.rc").read_text())
b4 = Bounds(trace_len=4)


for name in ["P", "Q"]:
    print(f"== {name} ==")
    print(contract_text(elaborate(seq, name)))
print("P and Q have identical contracts:", elaborate(seq, "P") == elaborate(seq, "Q"))

for name in ["Diverge", "Choice", "Pipe"]:
    print(f"\n== {name} ==")
    print(contract_text(elaborate(small, name)))

pipe, serial = elaborate(small, "Pipe"), elaborate(small, "Serial")
print("\nSerial ⊑ Pipe:", refines_contract(serial, pipe, b4).summary())
print("Pipe ⊑ Serial:", refines_contract(pipe, serial, b4).summary())
print("DivPar = DivSeq:", equal_contracts(elaborate(small, "DivPar"), elaborate(small, "DivSeq"), Bounds(trace_len=3)).summary())
