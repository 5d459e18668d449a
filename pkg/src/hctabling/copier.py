"""Copying heap terms into the table area.

One iterative kernel serves all three sharing modes:

* ``none``      every compound gets a fresh block;
* ``hashcons``  ground compounds are interned, a duplicate block is rolled
                back right after the terms-table reports a hit;
* ``enhanced``  blocks carry a leading hash cell, and a compound that is
                already table-resident is returned as is with its stored code.

Lists are copied in two passes over the spine.  The first pass walks the
cdr links and overwrites each cdr cell with a link back to the previous
cons, so the list is reversed in place.  The second pass walks those links
back, restores every cdr and builds the copy suffix-first, which is the
order hash codes are needed in.  Neither pass recurses along the spine.
"""

import numpy as np
from numba import njit

from ._layout import (
    ATM, INT, LST, NUMVAR, REF, STR, TAG_MASK, TABLE_BIT, MODE_NONE, MODE_ENHANCED,
    R_MODE, R_STEPS, R_COMBINES, R_COPIED, R_TERM_CELLS, R_TT_COUNT, R_TT_SIZE,
)
from .terms import deref, k_bind, TermError
from .arena import k_try_alloc, k_dealloc
from .hashing import nb_atomic_hcode, nb_seq_hcode, to_unsigned, to_signed
from .hashcons import k_hc_probe, k_tt_expand

_EVAL = 0
_STR_DONE = 1
_LIST_STEP = 2
_LIST_CONS = 3


@njit(cache=True, inline="always")
def _emit(arena, regs, syms, tag, functor, vc, off, nargs, code):
    """Allocate a block for a compound whose children are ``vc[off:off+nargs]``.
    Returns its canonical cell, or -1 when the table area is full."""
    mode = regs[R_MODE]
    extra = 1 if mode == MODE_ENHANCED else 0
    size = nargs + extra + (1 if tag == STR else 0)
    idx = k_try_alloc(arena, regs, size)
    if idx < 0:
        return -1
    blk = idx + extra
    if extra:
        arena[idx] = code
    p = blk
    if tag == STR:
        arena[blk] = functor
        p += 1
    for i in range(nargs):
        arena[p + i] = vc[off + i]
    cell = ((TABLE_BIT + blk) << 3) | tag
    regs[R_COPIED] += size
    if mode != MODE_NONE and code != 0:
        found = k_hc_probe(arena, regs, syms, cell, code)
        if found < 0:
            return -1
        if found != cell:
            k_dealloc(regs, size)
            return found
    regs[R_TERM_CELLS] += size
    return cell


@njit(cache=True, _nrt=False)
def k_copy(heap, arena, regs, syms, ws, c):
    """Copy ``c`` into the table area.

    Returns ``(cell, code, ok)``; ``ok`` is False when an unbound
    variable was met (the copy then holds a dangling reference and must be
    discarded, but the heap is still restored).
    """
    memo = regs[R_MODE] == MODE_ENHANCED
    fk = ws[0]
    fx = ws[1]
    fy = ws[2]
    vc = ws[3]
    vh = ws[4]
    aux = ws[5]
    cap = fk.shape[0]
    nf = 0
    nv = 0
    na = 0
    steps = 0
    combines = 0
    ok = True
    fk[0] = _EVAL
    fx[0] = c
    nf = 1
    while nf > 0:
        nf -= 1
        k = fk[nf]
        x = fx[nf]
        y = fy[nf]
        if k == _EVAL:
            steps += 1
            d = deref(heap, arena, x)
            t = d & TAG_MASK
            vcell = d
            vcode = 0
            if t == ATM or t == INT:
                vcode = nb_atomic_hcode(syms, d)
            elif t == NUMVAR:
                vcode = 0
            elif t == REF:
                ok = False
            elif memo and d >> 3 >= TABLE_BIT:
                vcode = arena[(d >> 3) - TABLE_BIT - 1]
            elif t == STR:
                a = d >> 3
                n = syms[(arena[a - TABLE_BIT] if a >= TABLE_BIT else heap[a]) >> 3, 0]
                if nf + n + 1 > cap:
                    raise MemoryError("term nesting exceeds the workspace")
                fk[nf] = _STR_DONE
                fx[nf] = d
                nf += 1
                for i in range(n, 0, -1):
                    fk[nf] = _EVAL
                    fx[nf] = (arena[a + i - TABLE_BIT] if a + i >= TABLE_BIT else heap[a + i])
                    nf += 1
                continue
            else:
                # first pass: reverse the spine in place
                a = d >> 3
                pred = -1
                while True:
                    steps += 1
                    raw = (arena[a + 1 - TABLE_BIT] if a + 1 >= TABLE_BIT else heap[a + 1])
                    nd = deref(heap, arena, raw)
                    more = (nd & TAG_MASK) == LST and not (memo and nd >> 3 >= TABLE_BIT)
                    flag = 0
                    if not more or raw != nd:
                        if na + 1 > cap:
                            raise MemoryError("list spine exceeds the workspace")
                        aux[na] = raw
                        na += 1
                        flag = 1
                    w = a + 1
                    if w >= TABLE_BIT:
                        arena[w - TABLE_BIT] = ((((pred + 1) << 1) | flag) << 3) | NUMVAR
                    else:
                        heap[w] = ((((pred + 1) << 1) | flag) << 3) | NUMVAR
                    if not more:
                        break
                    pred = a
                    a = nd >> 3
                if nf + 2 > cap:
                    raise MemoryError("term nesting exceeds the workspace")
                fk[nf] = _LIST_STEP
                fx[nf] = a
                fy[nf] = 0
                fk[nf + 1] = _EVAL
                fx[nf + 1] = nd
                nf += 2
                continue
        elif k == _LIST_STEP:
            # second pass: restore this cons's cdr, then copy its car
            enc = (arena[x + 1 - TABLE_BIT] if x + 1 >= TABLE_BIT else heap[x + 1]) >> 3
            pred = (enc >> 1) - 1
            if enc & 1:
                na -= 1
                w = x + 1
                if w >= TABLE_BIT:
                    arena[w - TABLE_BIT] = aux[na]
                else:
                    heap[w] = aux[na]
            else:
                w = x + 1
                if w >= TABLE_BIT:
                    arena[w - TABLE_BIT] = (y << 3) | LST
                else:
                    heap[w] = (y << 3) | LST
            if nf + 2 > cap:
                raise MemoryError("term nesting exceeds the workspace")
            fk[nf] = _LIST_CONS
            fx[nf] = x
            fy[nf] = pred
            fk[nf + 1] = _EVAL
            fx[nf + 1] = (arena[x - TABLE_BIT] if x >= TABLE_BIT else heap[x])
            nf += 2
            continue
        elif k == _LIST_CONS:
            nv -= 2
            # stack holds [cdr, car]; the block wants [car, cdr]
            cdr_cell = vc[nv]
            cdr_code = vh[nv]
            vc[nv] = vc[nv + 1]
            vc[nv + 1] = cdr_cell
            vcode = nb_seq_hcode(vh[nv + 1], cdr_code)
            combines += 1
            vcell = _emit(arena, regs, syms, LST, 0, vc, nv, 2, vcode)
            if vcell < 0:
                raise MemoryError("table area exhausted")
            if y >= 0:
                fk[nf] = _LIST_STEP
                fx[nf] = y
                fy[nf] = x
                nf += 1
        else:
            a = x >> 3
            f = (arena[a - TABLE_BIT] if a >= TABLE_BIT else heap[a])
            n = syms[f >> 3, 0]
            nv -= n
            vcode = syms[f >> 3, 1]
            for i in range(n):
                vcode = nb_seq_hcode(vcode, vh[nv + i])
            combines += n
            vcell = _emit(arena, regs, syms, STR, f, vc, nv, n, vcode)
            if vcell < 0:
                raise MemoryError("table area exhausted")
        vc[nv] = vcell
        vh[nv] = vcode
        nv += 1
    regs[R_STEPS] += steps
    regs[R_COMBINES] += combines
    cell = vc[0]
    code = vh[0]
    # expansion is deferred while spines are reversed: rehashing in plain
    # mode traverses interned terms, which may be the ones being copied
    if regs[R_TT_SIZE] > 0 and regs[R_TT_COUNT] > regs[R_TT_SIZE]:
        k_tt_expand(heap, arena, regs, syms, ws)
    return cell, code, ok


@njit(cache=True, _nrt=False)
def k_copy_args(heap, arena, regs, syms, ws, src, n, dest, seed, redir_addr, redir_cell):
    """Copy ``n`` argument cells at ``src`` into arena cells ``dest..``.

    Returns ``(folded code, number of redirect candidates, ok)``.  In
    enhanced mode every ground compound argument whose slot does not
    already point at its table copy is recorded in ``redir_*``.
    """
    h = seed
    nr = 0
    ok = True
    enhanced = regs[R_MODE] == MODE_ENHANCED
    for i in range(n):
        src_cell = (arena[src + i - TABLE_BIT] if src + i >= TABLE_BIT else heap[src + i])
        cell, code, good = k_copy(heap, arena, regs, syms, ws, src_cell)
        ok = ok and good
        arena[dest + i] = cell
        h = nb_seq_hcode(h, code)
        t = cell & TAG_MASK
        if enhanced and code != 0 and (t == LST or t == STR) and src_cell != cell:
            redir_addr[nr] = src + i
            redir_cell[nr] = cell
            nr += 1
    regs[R_COMBINES] += n
    return h, nr, ok


# ---------------------------------------------------------------------------
# python API


def _check(ok):
    if not ok:
        raise TermError("copy met an unbound variable; number the term first")


def copy_term(store, t, dest=None):
    """Copy ``t`` to the table area, optionally storing the result at ``dest``.

    Returns ``(cell, hcode)`` with ``hcode`` unsigned (0 for non-ground).
    """
    s = store
    cell, code, ok = k_copy(s.heap, s.arena, s.regs, s.syms, s.ws, t)
    _check(ok)
    cell = int(cell)
    if dest is not None:
        s.arena[dest - TABLE_BIT] = cell
    return cell, to_unsigned(code)


def copy_list_iterative(store, t, dest=None):
    d = store.deref(t)
    if d & TAG_MASK != LST and d != store.nil:
        raise TermError("copy_list_iterative expects a list")
    return copy_term(store, d, dest)


def copy_subgoal_args(store, src, dest, arity, seed=None, redirect=True):
    """Copy the ``arity`` argument slots starting at heap address ``src``.

    ``seed`` defaults to 1; the engine passes the predicate's functor code.
    With ``redirect`` (and enhanced mode) ground compound slots are
    overwritten, on the trail, by references to their table copies.
    Returns the folded code.
    """
    s = store
    seed = 1 if seed is None else seed
    ra = np.empty(max(arity, 1), np.int64)
    rc = np.empty(max(arity, 1), np.int64)
    h, nr, ok = k_copy_args(s.heap, s.arena, s.regs, s.syms, s.ws, src, arity,
                            dest - TABLE_BIT, to_signed(seed), ra, rc)
    _check(ok)
    if redirect:
        for i in range(int(nr)):
            if not k_bind(s.heap, s.arena, s.trail, s.regs, int(ra[i]), int(rc[i])):
                raise MemoryError("trail exhausted")
    return to_unsigned(h)


def counters(store):
    r = store.regs
    return {
        "cells_copied": int(r[R_COPIED]),
        "traversal_steps": int(r[R_STEPS]),
        "hash_combines": int(r[R_COMBINES]),
        "term_cells": int(r[R_TERM_CELLS]),
    }
