"""The terms-table: one canonical table-resident copy of every interned
ground compound term.

Buckets live in the table area.  A bucket slot is 0 when empty, holds the
term cell itself when one term hashes there, and otherwise holds a
REF-tagged pointer to a 2-cell chain node ``[term, rest]`` whose ``rest``
follows the same convention.  Because children of interned terms are
already canonical, two candidates are equal iff their blocks are equal
cell for cell.

In enhanced mode every interned block is preceded by its hash code, so
chain walks compare codes before blocks and expansion never traverses a
term.  Plain hash-consing keeps no codes; expansion recomputes them.
"""

import numpy as np
from numba import njit

from ._layout import (
    ATM, INT, LST, STR, REF, TAG_MASK, TABLE_BIT, MODE_ENHANCED, TERMS_TABLE_INIT, R_MODE,
    R_TT_BASE, R_TT_SIZE, R_TT_COUNT, R_TT_SLOTS, R_TT_NODES, R_HITS, R_MISSES,
    R_COMPARES, R_BLOCK_EQS, R_EXPANSIONS, R_BUCKET_CELLS, R_HC_CALLS, R_STEPS, R_COMBINES,
)
from .arena import k_try_alloc
from .hashing import (
    k_term_hash, nb_bucket, nb_atomic_hcode, nb_seq_hcode, bucket_index, to_unsigned, to_signed,
    _U_GOLDEN, _SH32,
)
from .terms import deref


@njit(cache=True, inline="always")
def k_block_eq(arena, syms, x, y):
    if (x & TAG_MASK) != (y & TAG_MASK):
        return False
    ax = (x >> 3) - TABLE_BIT
    ay = (y >> 3) - TABLE_BIT
    if (x & TAG_MASK) == LST:
        n = 2
    else:
        if arena[ax] != arena[ay]:
            return False
        n = syms[arena[ax] >> 3, 0] + 1
    for i in range(n):
        if arena[ax + i] != arena[ay + i]:
            return False
    return True


@njit(cache=True, inline="always")
def k_tt_init(arena, regs, size):
    """Allocate the bucket array; False when the table area is full."""
    idx = k_try_alloc(arena, regs, size)
    if idx < 0:
        return False
    for i in range(idx, idx + size):
        arena[i] = 0
    regs[R_TT_BASE] = idx
    regs[R_TT_SIZE] = size
    regs[R_BUCKET_CELLS] += size
    return True


@njit(cache=True, inline="always")
def k_chain_lookup(arena, regs, syms, b, t, code):
    """Walk bucket ``b`` for a term equal to block ``t``; 0 if absent."""
    enhanced = regs[R_MODE] == MODE_ENHANCED
    cur = arena[regs[R_TT_BASE] + b]
    while cur != 0:
        if (cur & TAG_MASK) == REF:
            node = cur >> 3
            s = arena[node]
            cur = arena[node + 1]
        else:
            s = cur
            cur = 0
        regs[R_COMPARES] += 1
        if enhanced:
            if arena[(s >> 3) - TABLE_BIT - 1] != code:
                continue
        regs[R_BLOCK_EQS] += 1
        if k_block_eq(arena, syms, s, t):
            return s
    return 0


@njit(cache=True, inline="always")
def _link(arena, regs, base, b, t, node):
    """Insert ``t`` at the head of bucket ``b``.  ``node`` is a free chain
    node to use if one is needed, or 0 to allocate one.  Returns 1 when
    ``node`` was consumed, 0 when not, -1 when the table area is full."""
    slot = arena[base + b]
    if slot == 0:
        arena[base + b] = t
        regs[R_TT_SLOTS] += 1
        return 0
    used = 1 if node != 0 else 0
    if not used:
        node = k_try_alloc(arena, regs, 2)
        if node < 0:
            return -1
        regs[R_TT_NODES] += 2
    arena[node] = t
    arena[node + 1] = slot
    arena[base + b] = (node << 3) | REF
    return used


@njit(cache=True)
def k_tt_entries(arena, regs):
    """All interned term cells and the chain nodes holding them."""
    count = regs[R_TT_COUNT]
    base = regs[R_TT_BASE]
    terms = np.empty(count, np.int64)
    nodes = np.empty(count, np.int64)
    nt = 0
    nn = 0
    for b in range(regs[R_TT_SIZE]):
        cur = arena[base + b]
        while cur != 0:
            if (cur & TAG_MASK) == REF:
                node = cur >> 3
                terms[nt] = arena[node]
                nodes[nn] = node
                nn += 1
                cur = arena[node + 1]
            else:
                terms[nt] = cur
                cur = 0
            nt += 1
    return terms[:nt], nodes[:nn]


@njit(cache=True, inline="always")
def _cache_slot(d, mask):
    return np.int64((np.uint64(d) * _U_GOLDEN) >> _SH32) & mask


@njit(cache=True, _nrt=False)
def k_rehash_code(heap, arena, regs, syms, ws, c, mask):
    """Structural hash of an interned term for a plain-mode rehash.

    Codes of compound subterms go into a direct-mapped cache (keys in
    ``ws[3]``, codes in ``ws[4]``, ``mask + 1`` slots) that lives only for
    one expansion, so a suffix shared by many entries is walked once.
    """
    fc = ws[0]
    fp = ws[1]
    vals = ws[2]
    ck = ws[3]
    cv = ws[4]
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
            if t == LST or t == STR:
                slot = _cache_slot(d, mask)
                if ck[slot] == d:
                    v = cv[slot]
                else:
                    a = d >> 3
                    n = 2 if t == LST else syms[(arena[a - TABLE_BIT] if a >= TABLE_BIT else heap[a]) >> 3, 0]
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
            elif t == ATM or t == INT:
                v = nb_atomic_hcode(syms, d)
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
            slot = _cache_slot(cell, mask)
            ck[slot] = cell
            cv[slot] = v
        vals[nv] = v
        nv += 1
    regs[R_STEPS] += steps
    regs[R_COMBINES] += combines
    return vals[0]


@njit(cache=True, _nrt=False)
def k_stored_code(heap, arena, regs, syms, ws, t, mask):
    if regs[R_MODE] == MODE_ENHANCED:
        return arena[(t >> 3) - TABLE_BIT - 1]
    return k_rehash_code(heap, arena, regs, syms, ws, t, mask)


@njit(cache=True, _nrt=False)
def k_tt_expand(heap, arena, regs, syms, ws):
    """Double the bucket array, reusing the existing chain nodes.

    Nodes are unthreaded into a list first and their terms relinked, which
    leaves spare nodes for the terms that sat directly in a bucket slot.
    Doubling only splits buckets, so the spares always suffice.
    """
    old = regs[R_TT_BASE]
    osize = regs[R_TT_SIZE]
    size = osize * 2
    idx = k_try_alloc(arena, regs, size)
    if idx < 0:
        raise MemoryError("table area exhausted")
    for i in range(idx, idx + size):
        arena[i] = 0
    regs[R_BUCKET_CELLS] += size
    regs[R_TT_SLOTS] = 0
    mask = 0
    if regs[R_MODE] != MODE_ENHANCED:
        slots = 1
        while slots < 2 * regs[R_TT_COUNT] and slots < ws.shape[1]:
            slots *= 2
        ck = ws[3]
        for i in range(slots):
            ck[i] = 0
        mask = slots - 1
    head = -1
    for b in range(old, old + osize):
        cur = arena[b]
        while cur != 0 and (cur & TAG_MASK) == REF:
            node = cur >> 3
            cur = arena[node + 1]
            arena[node + 1] = head
            head = node
        arena[b] = cur
    spare = -1
    while head != -1:
        node = head
        head = arena[node + 1]
        t = arena[node]
        code = k_stored_code(heap, arena, regs, syms, ws, t, mask)
        if _link(arena, regs, idx, nb_bucket(code, size), t, node) == 0:
            arena[node + 1] = spare
            spare = node
    for b in range(old, old + osize):
        t = arena[b]
        if t == 0:
            continue
        code = k_stored_code(heap, arena, regs, syms, ws, t, mask)
        node = spare if spare != -1 else 0
        nxt = arena[spare + 1] if spare != -1 else -1
        r = _link(arena, regs, idx, nb_bucket(code, size), t, node)
        if r < 0:
            raise MemoryError("table area exhausted")
        if r == 1:
            spare = nxt
    regs[R_TT_BASE] = idx
    regs[R_TT_SIZE] = size
    regs[R_EXPANSIONS] += 1


@njit(cache=True, inline="always")
def k_hc_probe(arena, regs, syms, t, code):
    """Canonical cell for block ``t``, inserting ``t`` on a miss; -1 when
    the table area is full.  Never expands and never raises, so it is
    cheap to inline into the copy loop."""
    if regs[R_TT_SIZE] == 0:
        if not k_tt_init(arena, regs, TERMS_TABLE_INIT):
            return -1
    regs[R_HC_CALLS] += 1
    b = nb_bucket(code, regs[R_TT_SIZE])
    found = k_chain_lookup(arena, regs, syms, b, t, code)
    if found != 0:
        regs[R_HITS] += 1
        return found
    regs[R_MISSES] += 1
    if _link(arena, regs, regs[R_TT_BASE], b, t, 0) < 0:
        return -1
    regs[R_TT_COUNT] += 1
    return t


@njit(cache=True, _nrt=False)
def k_hash_consing(heap, arena, regs, syms, ws, t, code, expand):
    """Return the canonical cell for block ``t``; inserts ``t`` on a miss.

    With ``expand`` false an overfull table is left for the caller to grow.
    """
    found = k_hc_probe(arena, regs, syms, t, code)
    if found < 0:
        raise MemoryError("table area exhausted")
    if expand and regs[R_TT_COUNT] > regs[R_TT_SIZE]:
        k_tt_expand(heap, arena, regs, syms, ws)
    return found


class TermsTable:
    """Python view of the terms-table of a store."""

    def __init__(self, store):
        self.store = store

    def create(self, size=TERMS_TABLE_INIT):
        """Allocate the bucket array now (normally done on first use)."""
        if size & (size - 1):
            raise ValueError("bucket count must be a power of two")
        s = self.store
        if s.regs[R_TT_SIZE]:
            raise RuntimeError("terms-table already exists")
        if not k_tt_init(s.arena, s.regs, size):
            raise MemoryError("table area exhausted")

    @property
    def size(self):
        return int(self.store.regs[R_TT_SIZE])

    @property
    def count(self):
        return int(self.store.regs[R_TT_COUNT])

    def hash_consing(self, t, hcode):
        if hcode == 0:
            raise ValueError("only ground terms can be interned")
        s = self.store
        found = k_hash_consing(s.heap, s.arena, s.regs, s.syms, s.ws, t, to_signed(hcode), True)
        return int(found)

    def chain_lookup(self, bucket, t, hcode):
        s = self.store
        if not self.size:
            return None
        found = k_chain_lookup(s.arena, s.regs, s.syms, bucket, t, to_signed(hcode))
        return int(found) or None

    def lookup(self, t, hcode):
        if not self.size:
            return None
        return self.chain_lookup(bucket_index(hcode, self.size), t, hcode)

    def bucket_of(self, hcode):
        return bucket_index(hcode, self.size)

    def expand_and_rehash(self):
        s = self.store
        k_tt_expand(s.heap, s.arena, s.regs, s.syms, s.ws)

    def stored_hcode(self, t):
        s = self.store
        if s.regs[R_MODE] != MODE_ENHANCED:
            raise RuntimeError("memoized codes exist only in enhanced mode")
        if (t & TAG_MASK) not in (LST, STR) or (t >> 3) < TABLE_BIT:
            raise ValueError("not a table-resident compound term")
        return to_unsigned(s.arena[(t >> 3) - TABLE_BIT - 1])

    def entries(self):
        s = self.store
        if not self.size:
            return []
        terms, _ = k_tt_entries(s.arena, s.regs)
        return [int(x) for x in terms]

    def audit(self):
        """Recompute every entry's hash by full traversal and cross-check.

        Returns a dict with the number of entries checked and lists of
        problems found (empty lists mean the table is consistent).
        """
        s = self.store
        saved = int(s.regs[R_STEPS]), int(s.regs[R_COMBINES])
        enhanced = s.regs[R_MODE] == MODE_ENHANCED
        bad_code, misplaced, dupes, nonground = [], [], [], []
        seen = set()
        size = self.size
        base = int(s.regs[R_TT_BASE])
        placed = {}
        for b in range(size):
            cur = int(s.arena[base + b])
            while cur:
                if cur & TAG_MASK == REF:
                    node = cur >> 3
                    placed[int(s.arena[node])] = b
                    cur = int(s.arena[node + 1])
                else:
                    placed[cur] = b
                    cur = 0
        for t, b in placed.items():
            code = int(k_term_hash(s.heap, s.arena, s.regs, s.syms, s.ws, t, False))
            if code == 0:
                nonground.append(t)
            if enhanced and int(s.arena[(t >> 3) - TABLE_BIT - 1]) != code:
                bad_code.append(t)
            if bucket_index(code, size) != b:
                misplaced.append(t)
            a = (t >> 3) - TABLE_BIT
            n = 2 if t & TAG_MASK == LST else s.symbols.arity(int(s.arena[a]) >> 3) + 1
            key = (t & TAG_MASK, tuple(int(x) for x in s.arena[a:a + n]))
            if key in seen:
                dupes.append(t)
            seen.add(key)
        s.regs[R_STEPS], s.regs[R_COMBINES] = saved
        return {
            "entries": len(placed),
            "count": self.count,
            "bad_code": bad_code,
            "misplaced": misplaced,
            "duplicates": dupes,
            "nonground": nonground,
            "ok": not (bad_code or misplaced or dupes or nonground) and len(placed) == self.count,
        }

    def stats(self):
        r = self.store.regs
        return {
            "hits": int(r[R_HITS]),
            "misses": int(r[R_MISSES]),
            "comparisons": int(r[R_COMPARES]),
            "structural_comparisons": int(r[R_BLOCK_EQS]),
            "expansions": int(r[R_EXPANSIONS]),
            "terms": int(r[R_TT_COUNT]),
            "buckets": int(r[R_TT_SIZE]),
            "slots_used": int(r[R_TT_SLOTS]),
            "node_cells": int(r[R_TT_NODES]),
        }
