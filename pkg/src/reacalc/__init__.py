"""Symbolic calculation of stateful failures-divergences contracts.

The main entry points are re-exported here; see the submodules for the
full API:

* :mod:`reacalc.lens` -- state spaces and variable-set lenses
* :mod:`reacalc.expr` -- expressions, substitutions and simplification
* :mod:`reacalc.rel` -- normal-form relations over traces and states
* :mod:`reacalc.contract` -- contracts and the calculational laws
* :mod:`reacalc.parallel` -- trace merge and parallel composition
* :mod:`reacalc.oracle` -- bounded operational semantics and cross-checking
* :mod:`reacalc.refinement` -- refinement, deadlock and loop-invariant checks
* :mod:`reacalc.dsl` -- concrete syntax
"""

from .contract import (
    Alphabet,
    Contract,
    assign,
    chaos,
    cond_contract,
    do,
    extchoice_contract,
    guard_contract,
    health_flags,
    intchoice_contract,
    miracle,
    seq_contract,
    skip,
    stop,
    while_contract,
)
from .dsl import elaborate, parse_model, parse_process
from .errors import ReacalcError
from .lens import StateSpace
from .oracle import Bounds, cross_check, explore_bounded
from .parallel import par_contract
from .refinement import (
    SpecContract,
    Verdict,
    deadlock_check,
    loop_invariant_check,
    refines_contract,
    refines_opaque,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "Bounds",
    "Contract",
    "ReacalcError",
    "SpecContract",
    "StateSpace",
    "Verdict",
    "assign",
    "chaos",
    "cond_contract",
    "cross_check",
    "deadlock_check",
    "do",
    "elaborate",
    "explore_bounded",
    "extchoice_contract",
    "guard_contract",
    "health_flags",
    "intchoice_contract",
    "loop_invariant_check",
    "miracle",
    "par_contract",
    "parse_model",
    "parse_process",
    "refines_contract",
    "refines_opaque",
    "seq_contract",
    "skip",
    "stop",
    "while_contract",
]
