"""Kernels for the subgoal table and the per-subgoal answer tables.

Subgoal record (arena cells):  [key, next, sym, answer_table, state, A1..An]
Answer-table header:           [buckets, nbuckets, count, first, last]
Answer record:                 [key, next_in_bucket, next_in_order, ground_mask, A1..An]

All links are arena indices; 0 is the null link.
"""

from numba import njit

from ._layout import (
    ATM, INT, LST, NUMVAR, STR, TAG_MASK, TABLE_BIT, MODE_NONE, MODE_ENHANCED,
    FLAVOR_PREFIX3, SUBGOAL_TABLE_INIT, ANSWER_TABLE_INIT,
    R_MODE, R_FLAVOR, R_ST_BASE, R_ST_SIZE, R_ST_COUNT, R_COMPARES, R_COMBINES,
    R_BUCKET_CELLS, R_ANSWERS, R_TRTOP, R_HTOP,
    SG_KEY, SG_NEXT, SG_SYM, SG_ATAB, SG_STATE, SG_ARGS,
    AT_BUCKETS, AT_SIZE, AT_COUNT, AT_FIRST, AT_LAST, AT_HEADER,
    AN_KEY, AN_NEXT_BUCKET, AN_NEXT, AN_GROUND, AN_ARGS,
)
from .terms import deref, k_bind, k_undo_to, k_number_vars, k_compare, k_unify
from .arena import k_alloc
from .hashing import k_term_hash, k_prefix3_hcode, nb_table_key_hcode, nb_seq_hcode, nb_bucket
from .copier import k_copy


@njit(cache=True, inline="always")
def _goal_shape(heap, arena, syms, goal):
    """(symbol id, arity, address of first argument) of an ATM/STR goal."""
    if (goal & TAG_MASK) == ATM:
        return goal >> 3, 0, 0
    a = goal >> 3
    sym = (arena[a - TABLE_BIT] if a >= TABLE_BIT else heap[a]) >> 3
    return sym, syms[sym, 0], a + 1


@njit(cache=True, _nrt=False)
def _zeroed(arena, regs, n):
    idx = k_alloc(arena, regs, n)
    arena[idx:idx + n] = 0
    return idx


@njit(cache=True, _nrt=False)
def k_subgoal_key(heap, arena, regs, syms, ws, sym, n, args):
    memo = regs[R_MODE] == MODE_ENHANCED
    p3 = regs[R_FLAVOR] == FLAVOR_PREFIX3
    key = syms[sym, 1]
    for i in range(n):
        c = (arena[args + i - TABLE_BIT] if args + i >= TABLE_BIT else heap[args + i])
        d = deref(heap, arena, c)
        if p3 and ((d & TAG_MASK) == LST or d == ATM):
            h = k_prefix3_hcode(heap, arena, regs, syms, ws, d)
            p3 = False
        else:
            h = k_term_hash(heap, arena, regs, syms, ws, d, memo)
        key = nb_table_key_hcode(key, h)
    regs[R_COMBINES] += n
    return key


@njit(cache=True, _nrt=False)
def _st_expand(arena, regs):
    old = regs[R_ST_BASE]
    size = regs[R_ST_SIZE]
    nsize = size * 2
    base = _zeroed(arena, regs, nsize)
    regs[R_BUCKET_CELLS] += nsize
    for b in range(size):
        rec = arena[old + b]
        while rec != 0:
            nxt = arena[rec + SG_NEXT]
            nb = nb_bucket(arena[rec + SG_KEY], nsize)
            arena[rec + SG_NEXT] = arena[base + nb]
            arena[base + nb] = rec
            rec = nxt
    regs[R_ST_BASE] = base
    regs[R_ST_SIZE] = nsize


@njit(cache=True, _nrt=False)
def k_subgoal_lookup(heap, arena, trail, regs, syms, ws, goal, redir_addr, redir_cell):
    """Find or register the variant of ``goal`` (a dereferenced ATM/STR cell).

    Returns ``(record index, is_new, ok)``.  Variable numbering
    is undone before returning; in enhanced mode the goal's ground compound
    argument slots are then redirected to the table copies, on the trail.
    """
    mark = regs[R_TRTOP]
    k_number_vars(heap, arena, trail, regs, syms, ws, goal, 0)
    sym, n, args = _goal_shape(heap, arena, syms, goal)
    key = k_subgoal_key(heap, arena, regs, syms, ws, sym, n, args)
    if regs[R_ST_SIZE] == 0:
        base = _zeroed(arena, regs, SUBGOAL_TABLE_INIT)
        regs[R_ST_BASE] = base
        regs[R_ST_SIZE] = SUBGOAL_TABLE_INIT
        regs[R_BUCKET_CELLS] += SUBGOAL_TABLE_INIT
    canon = regs[R_MODE] != MODE_NONE
    b = nb_bucket(key, regs[R_ST_SIZE])
    rec = arena[regs[R_ST_BASE] + b]
    while rec != 0:
        regs[R_COMPARES] += 1
        if arena[rec + SG_KEY] == key and arena[rec + SG_SYM] == sym:
            same = True
            for i in range(n):
                if not k_compare(heap, arena, syms, ws, (arena[args + i - TABLE_BIT] if args + i >= TABLE_BIT else heap[args + i]),
                                 arena[rec + SG_ARGS + i], canon):
                    same = False
                    break
            if same:
                break
        rec = arena[rec + SG_NEXT]
    is_new = rec == 0
    ok = True
    nr = 0
    if is_new:
        rec = k_alloc(arena, regs, SG_ARGS + n)
        arena[rec + SG_KEY] = key
        arena[rec + SG_SYM] = sym
        arena[rec + SG_STATE] = 0
        atab = _zeroed(arena, regs, AT_HEADER)
        arena[rec + SG_ATAB] = atab
        enhanced = regs[R_MODE] == MODE_ENHANCED
        h = syms[sym, 1]
        for i in range(n):
            src = (arena[args + i - TABLE_BIT] if args + i >= TABLE_BIT else heap[args + i])
            cell, code, good = k_copy(heap, arena, regs, syms, ws, src)
            ok = ok and good
            arena[rec + SG_ARGS + i] = cell
            h = nb_seq_hcode(h, code)
            t = cell & TAG_MASK
            if enhanced and code != 0 and (t == LST or t == STR) and src != cell:
                redir_addr[nr] = args + i
                redir_cell[nr] = cell
                nr += 1
        regs[R_COMBINES] += n
        base = regs[R_ST_BASE]
        arena[rec + SG_NEXT] = arena[base + b]
        arena[base + b] = rec
        regs[R_ST_COUNT] += 1
        if regs[R_ST_COUNT] > regs[R_ST_SIZE]:
            _st_expand(arena, regs)
    k_undo_to(heap, arena, trail, regs, mark)
    for j in range(nr):
        if not k_bind(heap, arena, trail, regs, redir_addr[j], redir_cell[j]):
            raise MemoryError("trail exhausted")
    return rec, is_new, ok


@njit(cache=True, _nrt=False)
def _at_expand(arena, regs, atab):
    size = arena[atab + AT_SIZE] * 2
    base = _zeroed(arena, regs, size)
    regs[R_BUCKET_CELLS] += size
    an = arena[atab + AT_FIRST]
    while an != 0:
        b = nb_bucket(arena[an + AN_KEY], size)
        arena[an + AN_NEXT_BUCKET] = arena[base + b]
        arena[base + b] = an
        an = arena[an + AN_NEXT]
    arena[atab + AT_BUCKETS] = base
    arena[atab + AT_SIZE] = size


@njit(cache=True, _nrt=False)
def k_answer_register(heap, arena, trail, regs, syms, ws, rec, goal):
    """Add the current instance of ``goal`` to ``rec``'s answers unless a
    variant is already there.  Returns a status:
    1 for a new answer, 0 for a duplicate, -1 for a copy error."""
    mark = regs[R_TRTOP]
    k_number_vars(heap, arena, trail, regs, syms, ws, goal, 0)
    sym, n, args = _goal_shape(heap, arena, syms, goal)
    memo = regs[R_MODE] == MODE_ENHANCED
    key = 1
    for i in range(n):
        key = nb_table_key_hcode(key, k_term_hash(heap, arena, regs, syms, ws,
                                                  (arena[args + i - TABLE_BIT] if args + i >= TABLE_BIT else heap[args + i]), memo))
    regs[R_COMBINES] += n
    atab = arena[rec + SG_ATAB]
    if arena[atab + AT_SIZE] == 0:
        base = _zeroed(arena, regs, ANSWER_TABLE_INIT)
        regs[R_BUCKET_CELLS] += ANSWER_TABLE_INIT
        arena[atab + AT_BUCKETS] = base
        arena[atab + AT_SIZE] = ANSWER_TABLE_INIT
    canon = regs[R_MODE] != MODE_NONE
    b = nb_bucket(key, arena[atab + AT_SIZE])
    an = arena[arena[atab + AT_BUCKETS] + b]
    while an != 0:
        regs[R_COMPARES] += 1
        if arena[an + AN_KEY] == key:
            same = True
            for i in range(n):
                if not k_compare(heap, arena, syms, ws, (arena[args + i - TABLE_BIT] if args + i >= TABLE_BIT else heap[args + i]),
                                 arena[an + AN_ARGS + i], canon):
                    same = False
                    break
            if same:
                k_undo_to(heap, arena, trail, regs, mark)
                return 0
        an = arena[an + AN_NEXT_BUCKET]
    an = k_alloc(arena, regs, AN_ARGS + n)
    arena[an + AN_KEY] = key
    arena[an + AN_NEXT] = 0
    ground = 0
    ok = True
    for i in range(n):
        cell, code, good = k_copy(heap, arena, regs, syms, ws, (arena[args + i - TABLE_BIT] if args + i >= TABLE_BIT else heap[args + i]))
        ok = ok and good
        arena[an + AN_ARGS + i] = cell
        if code != 0 and i < 63:
            ground |= 1 << i
    arena[an + AN_GROUND] = ground
    bucket = arena[atab + AT_BUCKETS] + b
    arena[an + AN_NEXT_BUCKET] = arena[bucket]
    arena[bucket] = an
    last = arena[atab + AT_LAST]
    if last == 0:
        arena[atab + AT_FIRST] = an
    else:
        arena[last + AN_NEXT] = an
    arena[atab + AT_LAST] = an
    arena[atab + AT_COUNT] += 1
    regs[R_ANSWERS] += 1
    if arena[atab + AT_COUNT] > arena[atab + AT_SIZE]:
        _at_expand(arena, regs, atab)
    k_undo_to(heap, arena, trail, regs, mark)
    return 1 if ok else -1


@njit(cache=True, _nrt=False)
def k_instantiate(heap, arena, regs, syms, ws, c, nvars):
    """Heap instance of table term ``c``.

    NUMVAR k becomes the variable in ``ws[5][k]``, created on first use;
    entries from ``nvars`` on are not yet initialised.  Ground table
    subterms are shared, not copied.  Returns ``(cell, nvars)``.
    """
    memo = regs[R_MODE] == MODE_ENHANCED
    fc = ws[1]
    fp = ws[2]
    vc = ws[3]
    vg = ws[4]
    vars_ = ws[5]
    cap = fc.shape[0]
    fc[0] = c
    fp[0] = 0
    nf = 1
    nv = 0
    while nf > 0:
        nf -= 1
        x = fc[nf]
        if fp[nf] == 0:
            t = x & TAG_MASK
            cell = x
            g = 1
            if t == NUMVAR:
                k = x >> 3
                if k >= cap:
                    raise MemoryError("too many variables in an answer")
                while nvars <= k:
                    vars_[nvars] = -1
                    nvars += 1
                if vars_[k] < 0:
                    h = regs[R_HTOP]
                    if h + 1 > heap.shape[0]:
                        raise MemoryError("heap exhausted")
                    heap[h] = h << 3
                    regs[R_HTOP] = h + 1
                    vars_[k] = h << 3
                cell = vars_[k]
                g = 0
            elif t == LST or t == STR:
                a = (x >> 3) - TABLE_BIT
                if not (memo and arena[a - 1] != 0):
                    n = 2 if t == LST else syms[arena[a] >> 3, 0]
                    off = 0 if t == LST else 1
                    if nf + n + 1 > cap:
                        raise MemoryError("term nesting exceeds the workspace")
                    fc[nf] = x
                    fp[nf] = 1
                    nf += 1
                    for i in range(n - 1, -1, -1):
                        fc[nf] = arena[a + off + i]
                        fp[nf] = 0
                        nf += 1
                    continue
        else:
            t = x & TAG_MASK
            a = (x >> 3) - TABLE_BIT
            n = 2 if t == LST else syms[arena[a] >> 3, 0]
            nv -= n
            g = 1
            for i in range(n):
                g &= vg[nv + i]
            cell = x
            if g == 0:
                size = n if t == LST else n + 1
                h = regs[R_HTOP]
                if h + size > heap.shape[0]:
                    raise MemoryError("heap exhausted")
                regs[R_HTOP] = h + size
                p = h
                if t == STR:
                    heap[h] = arena[a]
                    p += 1
                for i in range(n):
                    heap[p + i] = vc[nv + i]
                cell = (h << 3) | t
        vc[nv] = cell
        vg[nv] = g
        nv += 1
    return vc[0], nvars


@njit(cache=True, _nrt=False)
def k_answer_return(heap, arena, trail, regs, syms, ws, an, goal):
    """Unify ``goal`` with answer record ``an``; undone completely on failure."""
    sym, n, args = _goal_shape(heap, arena, syms, goal)
    mask = arena[an + AN_GROUND]
    nvars = 0
    mark = regs[R_TRTOP]
    htop = regs[R_HTOP]
    for i in range(n):
        c = arena[an + AN_ARGS + i]
        t = c & TAG_MASK
        if not ((i < 63 and (mask >> i) & 1) or t == ATM or t == INT):
            c, nvars = k_instantiate(heap, arena, regs, syms, ws, c, nvars)
        if not k_unify(heap, arena, trail, regs, syms, ws, (arena[args + i - TABLE_BIT] if args + i >= TABLE_BIT else heap[args + i]), c):
            k_undo_to(heap, arena, trail, regs, mark)
            regs[R_HTOP] = htop
            return False
    return True
