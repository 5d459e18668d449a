"""Tabled logic programming with a hash-consed table area."""

from .terms import Store, SymbolTable, TermError
from .arena import TableArena, ArenaError
from .hashcons import TermsTable
from .copier import copy_term, copy_subgoal_args
from .hashing import term_hcode, prefix3_hcode
from .errors import EngineError, UndefinedPredicate, InstantiationError, ArithmeticTypeError
from .tabling import Engine, format_statistics
from .programs import source as bundled_program

__all__ = [
    "Store", "SymbolTable", "TermError", "TableArena", "ArenaError", "TermsTable",
    "copy_term", "copy_subgoal_args", "term_hcode", "prefix3_hcode",
    "EngineError", "UndefinedPredicate", "InstantiationError", "ArithmeticTypeError",
    "Engine", "format_statistics", "bundled_program",
]
