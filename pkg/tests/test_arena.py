import pytest

from hctabling import Store, TableArena, ArenaError
from hctabling._layout import TABLE_BIT, BLOCK_CELLS


@pytest.fixture
def arena():
    return TableArena(Store("none"))


def test_fresh_arena_is_empty(arena):
    assert arena.used_cells() == 0
    assert arena.last_alloc is None


def test_allocate_counts_cells(arena):
    a = arena.allocate_from_table(2)
    assert arena.used_cells() == 2
    assert arena.in_table(a)
    b = arena.allocate_from_table(3)
    assert b >= a + 2
    assert arena.used_cells() == 5


def test_rollback_reissues_address(arena):
    a = arena.allocate_from_table(3)
    arena.deallocate_to_table(3)
    assert arena.used_cells() == 0
    assert arena.allocate_from_table(3) == a
    assert arena.in_table(a)


def test_rollback_must_match(arena):
    with pytest.raises(ArenaError):
        arena.deallocate_to_table(2)
    arena.allocate_from_table(4)
    with pytest.raises(ArenaError):
        arena.deallocate_to_table(2)
    arena.deallocate_to_table(4)
    with pytest.raises(ArenaError):
        arena.deallocate_to_table(4)


def test_heap_addresses_are_not_in_table(arena):
    s = arena.store
    assert not arena.in_table(s.make_int_list([1]) >> 3)


def test_bad_size(arena):
    with pytest.raises(ValueError):
        arena.allocate_from_table(0)


def test_allocations_never_span_blocks(arena):
    spans = []
    for n in [BLOCK_CELLS - 10, 7, 20, 3, BLOCK_CELLS - 1, 5]:
        a = arena.allocate_from_table(n) - TABLE_BIT
        spans.append((a, a + n))
        assert a // BLOCK_CELLS == (a + n - 1) // BLOCK_CELLS
    spans.sort()
    assert all(x[1] <= y[0] for x, y in zip(spans, spans[1:]))


def test_used_cells_ledger(arena, rng):
    total = 0
    for _ in range(500):
        n = rng.randrange(1, 40)
        arena.allocate_from_table(n)
        total += n
        if rng.random() < 0.3:
            arena.deallocate_to_table(n)
            total -= n
        assert arena.used_cells() == total


def test_read_write(arena):
    a = arena.allocate_from_table(1)
    arena.write(a, 42)
    assert arena.read(a) == 42
