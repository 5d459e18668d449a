"""Table-area allocator.

The table area is one flat ``int64`` array addressed by index; an address
handed out to the rest of the engine is ``TABLE_BIT + index``.  Index 0 is
never issued so that 0 can serve as a null link inside table records.

Allocations of at most ``BLOCK_CELLS`` cells never straddle a 64K block
boundary; larger ones (bucket arrays of big hash tables) start on one.
Only the most recent allocation can be rolled back.
"""

from numba import njit

from ._layout import (
    BLOCK_CELLS, BLOCK_MASK, TABLE_BIT, R_ATOP, R_AUSED, R_LAST_ADDR, R_LAST_SIZE,
    R_LAST_PREV,
)


class ArenaError(RuntimeError):
    """Stack discipline of the table area was violated."""


@njit(cache=True, inline="always")
def k_try_alloc(arena, regs, n):
    """Reserve ``n`` cells; returns the start index, or -1 when full.

    Hot paths use this form: a callee that can raise keeps numba from
    pruning reference counting around the call, which costs far more than
    the allocation itself."""
    top = regs[R_ATOP]
    off = top & BLOCK_MASK
    if n <= BLOCK_CELLS:
        if off + n > BLOCK_CELLS:
            top += BLOCK_CELLS - off
    elif off != 0:
        top += BLOCK_CELLS - off
    if top + n > arena.shape[0]:
        return -1
    regs[R_LAST_PREV] = regs[R_ATOP]
    regs[R_LAST_ADDR] = top
    regs[R_LAST_SIZE] = n
    regs[R_ATOP] = top + n
    regs[R_AUSED] += n
    return top


@njit(cache=True, _nrt=False)
def k_alloc(arena, regs, n):
    idx = k_try_alloc(arena, regs, n)
    if idx < 0:
        raise MemoryError("table area exhausted")
    return idx


@njit(cache=True, inline="always")
def k_dealloc(regs, n):
    if regs[R_LAST_SIZE] == 0 or regs[R_LAST_SIZE] != n:
        return False
    regs[R_ATOP] = regs[R_LAST_PREV]
    regs[R_AUSED] -= n
    regs[R_LAST_SIZE] = 0
    return True


def in_table(addr):
    return addr >= TABLE_BIT


class TableArena:
    """View of a :class:`~hctabling.terms.Store`'s table area."""

    def __init__(self, store):
        self.store = store

    def allocate_from_table(self, n):
        if n < 1:
            raise ValueError("allocation size must be >= 1")
        s = self.store
        idx = k_alloc(s.arena, s.regs, n)
        return TABLE_BIT + int(idx)

    def deallocate_to_table(self, n):
        if not k_dealloc(self.store.regs, n):
            raise ArenaError(
                f"deallocate_to_table({n}) does not match the most recent allocation")

    @staticmethod
    def in_table(addr):
        return in_table(addr)

    def used_cells(self):
        return int(self.store.regs[R_AUSED])

    @property
    def last_alloc(self):
        r = self.store.regs
        if r[R_LAST_SIZE] == 0:
            return None
        return TABLE_BIT + int(r[R_LAST_ADDR]), int(r[R_LAST_SIZE])

    def read(self, addr):
        return int(self.store.arena[addr - TABLE_BIT])

    def write(self, addr, value):
        self.store.arena[addr - TABLE_BIT] = value
