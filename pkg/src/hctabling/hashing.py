"""Hash codes for table-resident terms.

Codes are 64-bit words combined with wraparound arithmetic.  Code 0 is
reserved for non-ground terms: ``seq_hcode`` absorbs it, and every ground
combination that happens to wrap to 0 is remapped to 1.

The pure-Python functions take and return unsigned ints.  The ``nb_*``
twins are numba kernels working on the same bit patterns held as signed
``int64``; ``to_signed``/``to_unsigned`` convert between the two views.
"""

import numpy as np
from numba import njit

from ._layout import ATM, INT, LST, STR, TAG_MASK, TABLE_BIT, MODE_ENHANCED, R_MODE, R_STEPS, \
    R_COMBINES
from .terms import deref

MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

def to_signed(x):
    x &= MASK64
    return x - (1 << 64) if x >> 63 else x

def to_unsigned(x):
    return int(x) & MASK64

def _mix64(z):
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)

def _nonzero(h):
    return h if h else 1

def _fnv1a(data, h=_FNV_OFFSET):
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h

def atom_hcode(name):
    return _nonzero(_fnv1a(name.encode("utf-8")))

def int_hcode(value):
    return _nonzero(_mix64((value + _GOLDEN) & MASK64))

def functor_seed(name, arity):
    """Initial code of a structure: a hash of its name and arity."""
    if arity == 0:
        return atom_hcode(name)
    h = _fnv1a(name.encode("utf-8"))
    return _nonzero(_mix64(h ^ ((arity * _GOLDEN) & MASK64)))

def atomic_hcode(value):
    """Code of an atom (given by name) or an integer."""
    if isinstance(value, str):
        return atom_hcode(value)
    return int_hcode(int(value))

def seq_hcode(code1, code2):
    if code1 == 0 or code2 == 0:
        return 0
    return _nonzero((code1 + 31 * code2 + 1) & MASK64)

def bucket_index(code, size):
    """Python twin of ``nb_bucket`` for an unsigned code."""
    code &= MASK64
    return (code ^ (code >> 32)) & (size - 1)

def table_key_hcode(code1, code2):
    return (code1 * 33 + code2 + 1) & MASK64

def is_ground_hcode(code):
    return code != 0

# ---------------------------------------------------------------------------
# int64 kernels

_S_GOLDEN = to_signed(_GOLDEN)
_S_MIX1 = to_signed(_MIX1)
_S_MIX2 = to_signed(_MIX2)
LIST_SEED = to_signed(functor_seed(".", 2))

# Wraparound arithmetic is done on uint64: numba marks int64 add and mul
# as non-overflowing, so LLVM may fold an overflowing signed hash to any
# value.  Every operand must be uint64; mixing in a plain int promotes the
# expression to float64.
_U = np.uint64
_U_GOLDEN = _U(_GOLDEN)
_U_MIX1 = _U(_MIX1)
_U_MIX2 = _U(_MIX2)
_U1 = _U(1)
_U31 = _U(31)
_U33 = _U(33)
_SH27 = _U(27)
_SH30 = _U(30)
_SH31 = _U(31)
_SH32 = _U(32)


@njit(cache=True, _nrt=False)
def nb_int_hcode(v):
    z = _U(v) + _U_GOLDEN
    z = (z ^ (z >> _SH30)) * _U_MIX1
    z = (z ^ (z >> _SH27)) * _U_MIX2
    r = np.int64(z ^ (z >> _SH31))
    if r == 0:
        return 1
    return r


@njit(cache=True, inline="always")
def nb_seq_hcode(a, b):
    if a == 0 or b == 0:
        return 0
    r = np.int64(_U(a) + _U31 * _U(b) + _U1)
    if r == 0:
        return 1
    return r


@njit(cache=True, inline="always")
def nb_table_key_hcode(a, b):
    return np.int64(_U(a) * _U33 + _U(b) + _U1)


@njit(cache=True, inline="always")
def nb_bucket(code, size):
    """Bucket of ``code`` in a power-of-two table of ``size`` slots.  The high
    half is folded in first: codes built by the affine combiners above have
    low bits that cycle quickly along a list of equal elements."""
    u = _U(code)
    return np.int64(u ^ (u >> _SH32)) & (size - 1)


@njit(cache=True, inline="always")
def nb_atomic_hcode(syms, c):
    if (c & TAG_MASK) == INT:
        return nb_int_hcode(c >> 3)
    return syms[c >> 3, 1]

@njit(cache=True, _nrt=False)
def k_term_hash(heap, arena, regs, syms, ws, c, use_memo):
    """Structural hash of ``c`` by post-order traversal with explicit stacks.

    Variables (bound-to-NUMVAR or unbound) contribute 0.  With ``use_memo`` a
    table-resident compound yields its memoized code without traversal.
    """
    fc = ws[0]
    fp = ws[1]
    vals = ws[2]
    cap = fc.shape[0]
    fc[0] = c
    fp[0] = 0
    nf = 1
    nv = 0
    steps = 0
    combines = 0
    while nf > 0:
        nf -= 1
        cell = fc[nf]
        if fp[nf] == 0:
            steps += 1
            d = deref(heap, arena, cell)
            t = d & TAG_MASK
            if t == ATM or t == INT:
                v = nb_atomic_hcode(syms, d)
            elif t == LST or t == STR:
                a = d >> 3
                if use_memo and a >= TABLE_BIT:
                    v = arena[a - TABLE_BIT - 1]
                else:
                    if t == LST:
                        n = 2
                    else:
                        n = syms[(arena[a - TABLE_BIT] if a >= TABLE_BIT else heap[a]) >> 3, 0]
                    if nf + n + 1 > cap:
                        raise MemoryError("term nesting exceeds the workspace")
                    fc[nf] = d
                    fp[nf] = 1
                    nf += 1
                    off = 0 if t == LST else 1
                    for i in range(n - 1, -1, -1):
                        fc[nf] = (arena[a + off + i - TABLE_BIT] if a + off + i >= TABLE_BIT else heap[a + off + i])
                        fp[nf] = 0
                        nf += 1
                    continue
            else:
                v = 0
        else:
            a = cell >> 3
            if (cell & TAG_MASK) == LST:
                nv -= 2
                v = nb_seq_hcode(vals[nv], vals[nv + 1])
                combines += 1
            else:
                f = (arena[a - TABLE_BIT] if a >= TABLE_BIT else heap[a]) >> 3
                n = syms[f, 0]
                nv -= n
                v = syms[f, 1]
                for i in range(n):
                    v = nb_seq_hcode(v, vals[nv + i])
                combines += n
        vals[nv] = v
        nv += 1
    regs[R_STEPS] += steps
    regs[R_COMBINES] += combines
    return vals[0]

@njit(cache=True, _nrt=False)
def k_prefix3_hcode(heap, arena, regs, syms, ws, c):
    memo = regs[R_MODE] == MODE_ENHANCED
    d = deref(heap, arena, c)
    t = d & TAG_MASK
    if t != LST and not (t == ATM and (d >> 3) == 0):
        return k_term_hash(heap, arena, regs, syms, ws, d, memo)
    h = LIST_SEED
    k = 0
    while k < 3 and (d & TAG_MASK) == LST:
        a = d >> 3
        h = nb_table_key_hcode(h, k_term_hash(heap, arena, regs, syms, ws, (arena[a - TABLE_BIT] if a >= TABLE_BIT else heap[a]), memo))
        regs[R_COMBINES] += 1
        d = deref(heap, arena, (arena[a + 1 - TABLE_BIT] if a + 1 >= TABLE_BIT else heap[a + 1]))
        k += 1
    return h

def term_hcode(store, c, use_memo=False):
    """Structural hash of a heap or table term (unsigned)."""
    return to_unsigned(k_term_hash(store.heap, store.arena, store.regs, store.syms, store.ws, c,
                                   use_memo))

def prefix3_hcode(store, c):
    return to_unsigned(k_prefix3_hcode(store.heap, store.arena, store.regs, store.syms, store.ws, c))
