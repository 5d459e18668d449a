"""Tagged-cell term representation shared by the heap and the table area.

The heap, the trail and the table area are flat ``int64`` arrays owned by a
:class:`Store` and reserved once at a fixed capacity.  The numba kernels
take those arrays explicitly and raise ``MemoryError`` on overflow.
"""

import re

import numpy as np
from numba import njit

from ._layout import (
    ATM, INT, LST, NUMVAR, REF, STR, TAG_MASK, TABLE_BIT, ADDR_MASK, INT_MIN,
    INT_MAX, N_REGS, R_HTOP, R_TRTOP, R_ATOP, R_MODE, R_FLAVOR, R_STEPS,
    MODES, FLAVORS, HEAP_CELLS, TRAIL_CELLS, ARENA_CELLS, WS_ROWS, WS_CELLS, MIN_CELLS,
)


class TermError(Exception):
    """Raised for malformed term construction or misuse of the term store."""


# ---------------------------------------------------------------------------
# kernels
#
# Arrays are reserved at full capacity up front and never reallocated inside
# a kernel: numba compiles loops that may rebind an array variable far less
# efficiently.  Traversal stacks are rows of the store's workspace ``ws``.


@njit(cache=True, inline="always")
def deref(heap, arena, c):
    # the early exit keeps the common non-variable case cheap
    if (c & TAG_MASK) != REF:
        return c
    while True:
        a = c >> 3
        v = arena[a - TABLE_BIT] if a >= TABLE_BIT else heap[a]
        if v == c or (v & TAG_MASK) != REF:
            return v
        c = v


@njit(cache=True, inline="always")
def k_bind(heap, arena, trail, regs, addr, value):
    """Trailed store; False when the trail is full (nothing is written)."""
    n = regs[R_TRTOP]
    if 2 * n + 2 > trail.shape[0]:
        return False
    trail[2 * n] = addr
    trail[2 * n + 1] = (arena[addr - TABLE_BIT] if addr >= TABLE_BIT else heap[addr])
    regs[R_TRTOP] = n + 1
    if addr >= TABLE_BIT:
        arena[addr - TABLE_BIT] = value
    else:
        heap[addr] = value
    return True


@njit(cache=True, _nrt=False)
def k_undo_to(heap, arena, trail, regs, mark):
    n = regs[R_TRTOP]
    while n > mark:
        n -= 1
        w = trail[2 * n]
        if w >= TABLE_BIT:
            arena[w - TABLE_BIT] = trail[2 * n + 1]
        else:
            heap[w] = trail[2 * n + 1]
    regs[R_TRTOP] = n


@njit(cache=True, _nrt=False)
def k_unify(heap, arena, trail, regs, syms, ws, a, b):
    """Unify without occurs check; partial bindings are undone on failure."""
    mark = regs[R_TRTOP]
    st = ws[0]
    cap = st.shape[0]
    st[0] = a
    st[1] = b
    n = 2
    ok = True
    while n > 0:
        n -= 2
        x = deref(heap, arena, st[n])
        y = deref(heap, arena, st[n + 1])
        if x == y:
            continue
        tx = x & TAG_MASK
        ty = y & TAG_MASK
        if tx == REF:
            if ty == REF and (y >> 3) > (x >> 3):
                if not k_bind(heap, arena, trail, regs, y >> 3, x):
                    raise MemoryError("trail exhausted")
            else:
                if not k_bind(heap, arena, trail, regs, x >> 3, y):
                    raise MemoryError("trail exhausted")
            continue
        if ty == REF:
            if not k_bind(heap, arena, trail, regs, y >> 3, x):
                raise MemoryError("trail exhausted")
            continue
        if tx != ty:
            ok = False
            break
        if tx == LST:
            ax = x >> 3
            ay = y >> 3
            if n + 4 > cap:
                raise MemoryError("term nesting exceeds the workspace")
            st[n] = (arena[ax + 1 - TABLE_BIT] if ax + 1 >= TABLE_BIT else heap[ax + 1])
            st[n + 1] = (arena[ay + 1 - TABLE_BIT] if ay + 1 >= TABLE_BIT else heap[ay + 1])
            st[n + 2] = (arena[ax - TABLE_BIT] if ax >= TABLE_BIT else heap[ax])
            st[n + 3] = (arena[ay - TABLE_BIT] if ay >= TABLE_BIT else heap[ay])
            n += 4
        elif tx == STR:
            ax = x >> 3
            ay = y >> 3
            f = (arena[ax - TABLE_BIT] if ax >= TABLE_BIT else heap[ax])
            if f != (arena[ay - TABLE_BIT] if ay >= TABLE_BIT else heap[ay]):
                ok = False
                break
            k = syms[f >> 3, 0]
            if n + 2 * k > cap:
                raise MemoryError("term nesting exceeds the workspace")
            for i in range(k, 0, -1):
                st[n] = (arena[ax + i - TABLE_BIT] if ax + i >= TABLE_BIT else heap[ax + i])
                st[n + 1] = (arena[ay + i - TABLE_BIT] if ay + i >= TABLE_BIT else heap[ay + i])
                n += 2
        else:
            ok = False
            break
    if not ok:
        k_undo_to(heap, arena, trail, regs, mark)
    return ok


@njit(cache=True, _nrt=False)
def k_number_vars(heap, arena, trail, regs, syms, ws, c, start):
    """Bind unbound variables of ``c`` to NUMVAR cells, first occurrence first.

    Table-resident subterms are skipped: only ground terms are ever shared
    into the heap.  Returns the next free ordinal.
    """
    k = start
    st = ws[0]
    cap = st.shape[0]
    st[0] = c
    n = 1
    steps = 0
    while n > 0:
        n -= 1
        d = deref(heap, arena, st[n])
        steps += 1
        t = d & TAG_MASK
        if t == REF:
            if not k_bind(heap, arena, trail, regs, d >> 3, (k << 3) | NUMVAR):
                raise MemoryError("trail exhausted")
            k += 1
        elif t == LST:
            a = d >> 3
            if a < TABLE_BIT:
                if n + 2 > cap:
                    raise MemoryError("term nesting exceeds the workspace")
                st[n] = heap[a + 1]
                st[n + 1] = heap[a]
                n += 2
        elif t == STR:
            a = d >> 3
            if a < TABLE_BIT:
                m = syms[heap[a] >> 3, 0]
                if n + m > cap:
                    raise MemoryError("term nesting exceeds the workspace")
                for i in range(m, 0, -1):
                    st[n] = heap[a + i]
                    n += 1
    regs[R_STEPS] += steps
    return k


@njit(cache=True, _nrt=False)
def k_compare(heap, arena, syms, ws, x0, y0, canon):
    """Structural identity of two terms (variables compare by identity).

    With ``canon`` set, a table-resident compound reached on the ``x`` side
    is known to be a canonical hash-consed ground term, so it can only equal
    the very same cell on the ``y`` side.
    """
    st = ws[0]
    cap = st.shape[0]
    st[0] = x0
    st[1] = y0
    n = 2
    while n > 0:
        n -= 2
        x = deref(heap, arena, st[n])
        y = deref(heap, arena, st[n + 1])
        if x == y:
            continue
        tx = x & TAG_MASK
        if tx != (y & TAG_MASK):
            return False
        if tx == LST or tx == STR:
            ax = x >> 3
            ay = y >> 3
            if canon and ax >= TABLE_BIT:
                return False
            if tx == LST:
                if n + 4 > cap:
                    raise MemoryError("term nesting exceeds the workspace")
                st[n] = (arena[ax + 1 - TABLE_BIT] if ax + 1 >= TABLE_BIT else heap[ax + 1])
                st[n + 1] = (arena[ay + 1 - TABLE_BIT] if ay + 1 >= TABLE_BIT else heap[ay + 1])
                st[n + 2] = (arena[ax - TABLE_BIT] if ax >= TABLE_BIT else heap[ax])
                st[n + 3] = (arena[ay - TABLE_BIT] if ay >= TABLE_BIT else heap[ay])
                n += 4
            else:
                f = (arena[ax - TABLE_BIT] if ax >= TABLE_BIT else heap[ax])
                if f != (arena[ay - TABLE_BIT] if ay >= TABLE_BIT else heap[ay]):
                    return False
                k = syms[f >> 3, 0]
                if n + 2 * k > cap:
                    raise MemoryError("term nesting exceeds the workspace")
                for i in range(k, 0, -1):
                    st[n] = (arena[ax + i - TABLE_BIT] if ax + i >= TABLE_BIT else heap[ax + i])
                    st[n + 1] = (arena[ay + i - TABLE_BIT] if ay + i >= TABLE_BIT else heap[ay + i])
                    n += 2
        else:
            return False
    return True


@njit(cache=True, _nrt=False)
def k_fill_int_list(heap, base, values, tail):
    """Write the list ``values ++ tail`` as consecutive conses at ``base``."""
    n = values.shape[0]
    for i in range(n):
        a = base + 2 * i
        heap[a] = (values[i] << 3) | INT
        if i + 1 < n:
            heap[a + 1] = ((a + 2) << 3) | LST
        else:
            heap[a + 1] = tail
    return (base << 3) | LST


# ---------------------------------------------------------------------------
# python-side helpers


def tag_of(c):
    return c & TAG_MASK


def payload_of(c):
    return c >> 3


def make_cell(tag, payload):
    return (payload << 3) | tag


def int_cell(v):
    if not INT_MIN <= v <= INT_MAX:
        raise TermError(f"integer out of range: {v}")
    return (v << 3) | INT


def is_heap_reference(addr):
    """True iff ``addr`` lies in the heap region (not the table area)."""
    return addr < TABLE_BIT


_PLAIN_ATOM = re.compile(r"^[a-z][A-Za-z0-9_]*$")
_SYMBOL_ATOM = re.compile(r"^[+\-*/\\^<>=~:.?@#&$]+$")


def format_atom(name):
    if name == "[]" or _PLAIN_ATOM.match(name) or _SYMBOL_ATOM.match(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


class SymbolTable:
    """Interned (name, arity) pairs with per-symbol arity and hash columns."""

    NIL = 0

    def __init__(self):
        self.names = []
        self.arities = []
        self.ids = {}
        self.table = np.zeros((256, 2), np.int64)
        self.intern("[]", 0)

    def intern(self, name, arity=0):
        key = (name, arity)
        sid = self.ids.get(key)
        if sid is not None:
            return sid
        sid = len(self.names)
        if sid >= self.table.shape[0]:
            t = np.zeros((self.table.shape[0] * 2, 2), np.int64)
            t[:sid] = self.table[:sid]
            self.table = t
        self.names.append(name)
        self.arities.append(arity)
        self.ids[key] = sid
        self.table[sid, 0] = arity
        from . import hashing
        self.table[sid, 1] = hashing.to_signed(hashing.functor_seed(name, arity))
        return sid

    def lookup(self, name, arity):
        return self.ids.get((name, arity))

    def name(self, sid):
        return self.names[sid]

    def arity(self, sid):
        return self.arities[sid]

    def __len__(self):
        return len(self.names)


def _reserve(cells, rows=None):
    """Zeroed int64 storage, halving the request if the OS refuses it."""
    while True:
        try:
            shape = cells if rows is None else (rows, cells)
            return np.zeros(shape, np.int64)
        except MemoryError:
            if cells <= MIN_CELLS:
                raise
            cells //= 2


class Store:
    """Heap, trail, table area and register file of one engine instance."""

    def __init__(self, mode="enhanced", hash_flavor="full", heap_cells=HEAP_CELLS,
                 arena_cells=ARENA_CELLS):
        if mode not in MODES:
            raise ValueError(f"unknown sharing mode {mode!r}")
        if hash_flavor not in FLAVORS:
            raise ValueError(f"unknown hash flavor {hash_flavor!r}")
        self.mode = mode
        self.hash_flavor = hash_flavor
        self.heap = _reserve(heap_cells)
        self.trail = _reserve(TRAIL_CELLS)
        self.arena = _reserve(arena_cells)
        self.ws = _reserve(WS_CELLS, WS_ROWS)
        self.regs = np.zeros(N_REGS, np.int64)
        self.regs[R_ATOP] = 1  # cell 0 is the null link
        self.regs[R_MODE] = MODES[mode]
        self.regs[R_FLAVOR] = FLAVORS[hash_flavor]
        self.symbols = SymbolTable()
        self.nil = ATM  # symbol 0 is '[]'

    @property
    def syms(self):
        return self.symbols.table

    # -- heap allocation ---------------------------------------------------

    @property
    def heap_top(self):
        return int(self.regs[R_HTOP])

    def halloc(self, n):
        top = int(self.regs[R_HTOP])
        if top + n > self.heap.shape[0]:
            raise MemoryError("heap exhausted")
        self.regs[R_HTOP] = top + n
        return top

    def reset_heap(self, top):
        self.regs[R_HTOP] = top

    # -- construction ------------------------------------------------------

    def make_atom(self, name):
        return (self.symbols.intern(name, 0) << 3) | ATM

    def make_int(self, value):
        return int_cell(value)

    def new_var(self):
        a = self.halloc(1)
        c = (a << 3) | REF
        self.heap[a] = c
        return c

    def make_cons(self, car, cdr):
        a = self.halloc(2)
        self.heap[a] = car
        self.heap[a + 1] = cdr
        return (a << 3) | LST

    def make_struct(self, functor, args):
        """Build ``functor(args...)``; ``functor`` is a name or a symbol id."""
        args = list(args)
        if isinstance(functor, str):
            if not args:
                raise TermError(f"structure {functor} needs arity >= 1; use make_atom")
            sid = self.symbols.intern(functor, len(args))
        else:
            sid = functor
            if self.symbols.arity(sid) != len(args):
                raise TermError(
                    f"arity mismatch for {self.symbols.name(sid)}/{self.symbols.arity(sid)}:"
                    f" got {len(args)} arguments")
        if not args:
            raise TermError("structures need arity >= 1 (atoms are ATM cells)")
        n = len(args)
        a = self.halloc(n + 1)
        self.heap[a] = (sid << 3) | ATM
        for i, x in enumerate(args, 1):
            self.heap[a + i] = x
        return (a << 3) | STR

    def make_list(self, items, tail=None):
        """Build a proper (or ``tail``-terminated) list of cells or ints."""
        tail = self.nil if tail is None else tail
        items = list(items)
        if not items:
            return tail
        base = self.halloc(2 * len(items))
        h = self.heap
        for i, x in enumerate(items):
            a = base + 2 * i
            h[a] = x
            h[a + 1] = ((a + 2) << 3) | LST if i + 1 < len(items) else tail
        return (base << 3) | LST

    def make_int_list(self, values, tail=None):
        tail = self.nil if tail is None else tail
        values = np.asarray(values, dtype=np.int64)
        if values.size == 0:
            return tail
        if values.min() < INT_MIN or values.max() > INT_MAX:
            raise TermError("integer out of range")
        base = self.halloc(2 * values.size)
        return int(k_fill_int_list(self.heap, base, values, tail))

    # -- access --------------------------------------------------------------

    def cell_at(self, addr):
        if addr >= TABLE_BIT:
            return int(self.arena[addr - TABLE_BIT])
        return int(self.heap[addr])

    def deref(self, c):
        return int(deref(self.heap, self.arena, c))

    def functor(self, c):
        """(name, arity) of a dereferenced atom or structure, else None."""
        c = self.deref(c)
        t = c & TAG_MASK
        if t == ATM:
            return self.symbols.name(c >> 3), 0
        if t == STR:
            sid = self.cell_at(c >> 3) >> 3
            return self.symbols.name(sid), self.symbols.arity(sid)
        if t == LST:
            return ".", 2
        return None

    def args(self, c):
        c = self.deref(c)
        t = c & TAG_MASK
        a = c >> 3
        if t == LST:
            return [self.cell_at(a), self.cell_at(a + 1)]
        if t == STR:
            n = self.symbols.arity(self.cell_at(a) >> 3)
            return [self.cell_at(a + i) for i in range(1, n + 1)]
        return []

    # -- binding and trail -----------------------------------------------------

    @property
    def trail_top(self):
        return int(self.regs[R_TRTOP])

    def bind(self, var, value):
        v = self.deref(var)
        if v & TAG_MASK != REF:
            raise TermError("bind: target is not an unbound variable")
        if not k_bind(self.heap, self.arena, self.trail, self.regs, v >> 3, value):
            raise MemoryError("trail exhausted")

    def undo_to(self, mark):
        k_undo_to(self.heap, self.arena, self.trail, self.regs, mark)

    def unify(self, a, b):
        return bool(k_unify(self.heap, self.arena, self.trail, self.regs, self.syms,
                            self.ws, a, b))

    def number_vars(self, c, start=0):
        """Number the variables of ``c``; returns how many were numbered."""
        k = k_number_vars(self.heap, self.arena, self.trail, self.regs,
                          self.syms, self.ws, c, start)
        return int(k) - start

    def variant(self, a, b):
        return bool(k_compare(self.heap, self.arena, self.syms, self.ws, a, b, False))

    identical = variant

    # -- printing --------------------------------------------------------------

    def term_to_str(self, c, max_depth=100000):
        out = []
        self._write(c, out, max_depth)
        return "".join(out)

    def _write(self, c, out, depth):
        if depth <= 0:
            out.append("...")
            return
        c = self.deref(c)
        t = c & TAG_MASK
        if t == INT:
            out.append(str(c >> 3))
        elif t == ATM:
            out.append(format_atom(self.symbols.name(c >> 3)))
        elif t == NUMVAR:
            out.append(f"_{c >> 3}")
        elif t == REF:
            out.append(f"_G{c >> 3}")
        elif t == LST:
            out.append("[")
            first = True
            while True:
                a = c >> 3
                if not first:
                    out.append(",")
                first = False
                self._write(self.cell_at(a), out, depth - 1)
                c = self.deref(self.cell_at(a + 1))
                if c & TAG_MASK == LST:
                    continue
                if c != self.nil:
                    out.append("|")
                    self._write(c, out, depth - 1)
                break
            out.append("]")
        else:
            a = c >> 3
            sid = self.cell_at(a) >> 3
            out.append(format_atom(self.symbols.name(sid)))
            out.append("(")
            for i in range(1, self.symbols.arity(sid) + 1):
                if i > 1:
                    out.append(",")
                self._write(self.cell_at(a + i), out, depth - 1)
            out.append(")")

    def python_value(self, c):
        """Convert a ground term to nested Python data (ints, str, lists, tuples)."""
        c = self.deref(c)
        t = c & TAG_MASK
        if t == INT:
            return c >> 3
        if t == ATM:
            return self.symbols.name(c >> 3)
        if t == LST:
            items = []
            while c & TAG_MASK == LST:
                a = c >> 3
                items.append(self.python_value(self.cell_at(a)))
                c = self.deref(self.cell_at(a + 1))
            return items
        if t == STR:
            name, _ = self.functor(c)
            return (name, *[self.python_value(x) for x in self.args(c)])
        return None


def region_of(addr):
    return "table" if addr >= TABLE_BIT else "heap"


def table_index(addr):
    return addr & ADDR_MASK
