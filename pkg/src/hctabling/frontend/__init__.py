"""Reader, native predicates and command line."""

from .reader import (
    PrologSyntaxError, Var, Atom, Struct, Clause, Program,
    parse_program, parse_goal, parse_term, format_term, format_program,
)
