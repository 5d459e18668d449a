"""Native predicates.  Each takes ``(engine, goal, rest, cps)`` and returns
``(ok, continuation)`` like a user call.  Only between/3 leaves a
choicepoint."""

from .._layout import INT, REF, STR, TAG_MASK, INT_MIN, INT_MAX, R_HTOP, R_TRTOP
from ..errors import InstantiationError, ArithmeticTypeError
from ..terms import k_unify, k_compare

CP_BETWEEN = 3


def _arg(s, g, i):
    return s.deref(int(s.heap[(g >> 3) + i]))


def _unify(s, a, b):
    return bool(k_unify(s.heap, s.arena, s.trail, s.regs, s.syms, s.ws, a, b))


def eval_arith(s, c):
    """Evaluate an integer expression cell."""
    c = s.deref(c)
    tag = c & TAG_MASK
    if tag == INT:
        return c >> 3
    if tag == REF:
        raise InstantiationError("arguments are not sufficiently instantiated")
    if tag == STR:
        name, arity = s.functor(c)
        args = s.args(c)
        if arity == 2:
            a = eval_arith(s, args[0])
            b = eval_arith(s, args[1])
            op = _BINARY.get(name)
            if op is not None:
                return _check_range(op(a, b))
        elif arity == 1 and name == "-":
            return _check_range(-eval_arith(s, args[0]))
    raise ArithmeticTypeError(f"type error: evaluable expected, found {s.term_to_str(c)}")


_BINARY = {"+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b,
           "min": min, "max": max}


def _check_range(v):
    if not INT_MIN <= v <= INT_MAX:
        raise ArithmeticTypeError(f"integer overflow: {v}")
    return v


def _true(e, g, rest, cps):
    return True, rest


def _fail(e, g, rest, cps):
    return False, None


def _eq(e, g, rest, cps):
    s = e.store
    return (_unify(s, _arg(s, g, 1), _arg(s, g, 2)), rest)


def _identical(e, g, rest, cps):
    s = e.store
    same = k_compare(s.heap, s.arena, s.syms, s.ws, _arg(s, g, 1), _arg(s, g, 2), False)
    return (True, rest) if same else (False, None)


def _not_identical(e, g, rest, cps):
    s = e.store
    same = k_compare(s.heap, s.arena, s.syms, s.ws, _arg(s, g, 1), _arg(s, g, 2), False)
    return (False, None) if same else (True, rest)


def _is(e, g, rest, cps):
    s = e.store
    v = eval_arith(s, _arg(s, g, 2))
    return (_unify(s, _arg(s, g, 1), s.make_int(v)), rest)


def _compare(test):
    def run(e, g, rest, cps):
        s = e.store
        a = eval_arith(s, _arg(s, g, 1))
        b = eval_arith(s, _arg(s, g, 2))
        return (True, rest) if test(a, b) else (False, None)
    return run


def _int_arg(s, c):
    if c & TAG_MASK == REF:
        raise InstantiationError("arguments are not sufficiently instantiated")
    if c & TAG_MASK != INT:
        raise ArithmeticTypeError(f"type error: integer expected, found {s.term_to_str(c)}")
    return c >> 3


def _between(e, g, rest, cps):
    s = e.store
    lo = _int_arg(s, _arg(s, g, 1))
    hi = _int_arg(s, _arg(s, g, 2))
    x = _arg(s, g, 3)
    if x & TAG_MASK != REF:
        v = _int_arg(s, x)
        return (True, rest) if lo <= v <= hi else (False, None)
    if lo > hi:
        return False, None
    if lo < hi:
        cps.append([CP_BETWEEN, int(s.regs[R_TRTOP]), int(s.regs[R_HTOP]), rest, x, lo + 1, hi])
    _unify(s, x, s.make_int(lo))
    return True, rest


def _between_retry(e, cp, cps):
    s = e.store
    v = cp[5]
    if v >= cp[6]:
        cps.pop()
    else:
        cp[5] = v + 1
    _unify(s, cp[4], s.make_int(v))
    return True, cp[3]


def _range(e, g, rest, cps):
    s = e.store
    lo = _int_arg(s, _arg(s, g, 1))
    hi = _int_arg(s, _arg(s, g, 2))
    lst = s.make_int_list(range(lo, hi + 1))
    return (_unify(s, _arg(s, g, 3), lst), rest)


BUILTINS = {
    ("true", 0): _true,
    ("fail", 0): _fail,
    ("=", 2): _eq,
    ("==", 2): _identical,
    ("\\==", 2): _not_identical,
    ("is", 2): _is,
    ("<", 2): _compare(lambda a, b: a < b),
    (">", 2): _compare(lambda a, b: a > b),
    ("=<", 2): _compare(lambda a, b: a <= b),
    (">=", 2): _compare(lambda a, b: a >= b),
    ("=:=", 2): _compare(lambda a, b: a == b),
    ("=\\=", 2): _compare(lambda a, b: a != b),
    ("between", 3): _between,
    ("range", 3): _range,
}


def install(engine):
    syms = engine.store.symbols
    for (name, arity), fn in BUILTINS.items():
        engine.builtins[syms.intern(name, arity)] = fn
    engine.builtins_retry = {CP_BETWEEN: _between_retry}


def is_builtin(name, arity):
    return (name, arity) in BUILTINS
