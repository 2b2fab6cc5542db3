"""Concrete syntax for processes: parsing, printing and elaboration."""

from .ast import substitute_ast
from .elaborate import Elaborator, elaborate, elaborate_process
from .model import Model, SpecDecl
from .parser import parse_expr, parse_invariant, parse_model, parse_process, tokenize
from .printer import contract_json, contract_text, show_model, show_process, show_spec

__all__ = [
    "Elaborator",
    "Model",
    "SpecDecl",
    "contract_json",
    "contract_text",
    "elaborate",
    "elaborate_process",
    "parse_expr",
    "parse_invariant",
    "parse_model",
    "parse_process",
    "show_model",
    "show_process",
    "show_spec",
    "substitute_ast",
    "tokenize",
]
