import sys

import numpy as np
import pytest

from hctabling import Store, Engine, bundled_program, TermError, term_hcode
from hctabling.copier import copy_term, copy_list_iterative, copy_subgoal_args, counters
from hctabling.hashing import atomic_hcode, functor_seed
from hctabling._layout import LST, STR, NUMVAR, TAG_MASK, TABLE_BIT, R_AUSED

from conftest import build, random_ground, ref_seq


def recursive_reference(s, c):
    """Plain recursive copy model: (printed text, code, cells in mode none)."""
    c = s.deref(c)
    t = c & TAG_MASK
    if t == NUMVAR:
        return f"_{c >> 3}", 0, 0
    if t == LST:
        car, cdr = s.args(c)
        ta, ca, na = recursive_reference(s, car)
        tb, cb, nb = recursive_reference(s, cdr)
        text = "[" + ta + ("]" if tb == "[]" else ("," + tb[1:] if tb.startswith("[") else "|" + tb + "]"))
        return text, ref_seq(ca, cb), na + nb + 2
    if t == STR:
        name, arity = s.functor(c)
        code, cells, parts = functor_seed(name, arity), arity + 1, []
        for x in s.args(c):
            tx, cx, nx = recursive_reference(s, x)
            code, cells = ref_seq(code, cx), cells + nx
            parts.append(tx)
        return f"{name}({','.join(parts)})", code, cells
    text = s.term_to_str(c)
    return text, atomic_hcode(s.python_value(c)), 0


def test_numvar_copied_verbatim(mode):
    s = Store(mode)
    v = s.new_var()
    s.number_vars(v)
    cell, code = copy_term(s, v)
    assert cell == (0 << 3) | NUMVAR and code == 0


def test_unnumbered_variable_is_an_error(mode):
    s = Store(mode)
    with pytest.raises(TermError):
        copy_term(s, s.make_cons(s.new_var(), s.nil))


def test_lists_match_recursive_reference(rng):
    for n in list(range(0, 12)) + [50, 100]:
        s = Store("none")
        vals = [rng.randrange(5) for _ in range(n)]
        l = s.make_int_list(vals)
        text, code, cells = recursive_reference(s, l)
        before = int(s.regs[R_AUSED])
        cell, got = copy_list_iterative(s, l)
        assert s.term_to_str(cell) == text == "[" + ",".join(map(str, vals)) + "]"
        assert got == code
        assert int(s.regs[R_AUSED]) - before == cells == 2 * n


def test_random_terms_match_reference(rng, mode):
    s = Store(mode)
    for _ in range(1000):
        t = build(s, random_ground(rng))
        text, code, _ = recursive_reference(s, t)
        cell, got = copy_term(s, t)
        assert got == code == term_hcode(s, t)
        assert s.term_to_str(cell) == text


def test_nonground_copies(rng, mode):
    s = Store(mode)
    for _ in range(200):
        x = s.new_var()
        t = s.make_struct("w", [build(s, random_ground(rng)), x, s.make_cons(x, s.nil)])
        s.number_vars(t)
        text, code, _ = recursive_reference(s, t)
        cell, got = copy_term(s, t)
        assert got == 0 == code
        assert s.term_to_str(cell) == text


def test_improper_list(mode):
    s = Store(mode)
    l = s.make_int_list([1], tail=s.make_atom("foo"))
    cell, code = copy_term(s, l)
    assert s.term_to_str(cell) == "[1|foo]" and code != 0


def test_block_sizes_per_mode():
    cells = {}
    for mode in ("none", "hashcons", "enhanced"):
        s = Store(mode)
        copy_term(s, s.make_struct("f", [s.make_int(1), s.make_int(2)]))
        cells[mode] = counters(s)["term_cells"]
    assert cells == {"none": 3, "hashcons": 3, "enhanced": 4}


def test_table_resident_is_returned_as_is():
    s = Store("enhanced")
    cell, code = copy_term(s, s.make_int_list(range(50)))
    steps = counters(s)["traversal_steps"]
    again, code2 = copy_term(s, cell)
    assert again == cell and code2 == code
    assert counters(s)["traversal_steps"] - steps == 1


def test_duplicate_copy_is_arena_neutral():
    for mode in ("hashcons", "enhanced"):
        s = Store(mode)
        copy_term(s, s.make_int_list([3, 1, 4, 1, 5]))
        used = int(s.regs[R_AUSED])
        copy_term(s, s.make_int_list([3, 1, 4, 1, 5]))
        assert int(s.regs[R_AUSED]) == used


def test_long_list_restores_heap(mode):
    s = Store(mode)
    l = s.make_int_list(range(100_000))
    top = s.heap_top
    snap = s.heap[:top].copy()
    limit = sys.getrecursionlimit()
    cell, code = copy_term(s, l)
    assert sys.getrecursionlimit() == limit
    assert np.array_equal(s.heap[:top], snap)
    assert code == term_hcode(s, l)


def test_long_list_with_shared_tail():
    # a tail that is already table-resident ends the spine walk early
    s = Store("enhanced")
    tail, _ = copy_term(s, s.make_int_list(range(1000)))
    l = s.make_int_list([7, 8], tail=tail)
    top = s.heap_top
    snap = s.heap[:top].copy()
    cell, _ = copy_term(s, l)
    assert np.array_equal(s.heap[:top], snap)
    assert s.term_to_str(cell).startswith("[7,8,0,1,2")


# -- subgoal argument copying ---------------------------------------------------


def _args_block(s, args):
    t = s.make_struct("g", args)
    return (t >> 3) + 1


def test_copy_subgoal_args_redirects_ground_slots():
    s = Store("enhanced")
    src = _args_block(s, [s.make_int_list([1, 2, 3])])
    dest = TABLE_BIT + 0  # scratch: allocate a record cell first
    from hctabling import TableArena
    dest = TableArena(s).allocate_from_table(1)
    copy_subgoal_args(s, src, dest, 1)
    slot = int(s.heap[src])
    assert slot & TAG_MASK == LST and (slot >> 3) >= TABLE_BIT
    assert s.term_to_str(slot) == "[1,2,3]"


def test_copy_subgoal_args_leaves_nonground_slots():
    s = Store("enhanced")
    x = s.new_var()
    lst = s.make_cons(x, s.make_int_list([2, 3]))
    src = _args_block(s, [lst])
    s.number_vars(lst)
    from hctabling import TableArena
    dest = TableArena(s).allocate_from_table(1)
    code = copy_subgoal_args(s, src, dest, 1)
    assert code == 0
    assert int(s.heap[src]) == lst
    # the ground suffix [2,3] was interned anyway
    assert TableArena(s).used_cells() > 1


def test_copy_subgoal_args_zero_arity():
    s = Store("enhanced")
    from hctabling import TableArena
    dest = TableArena(s).allocate_from_table(1)
    assert copy_subgoal_args(s, 0, dest, 0, seed=12345) == 12345


def test_descendant_call_copies_in_constant_time():
    e = Engine(bundled_program("is_list"), mode="enhanced")
    steps = []
    for n in (500, 4000):
        e = Engine(bundled_program("is_list"), mode="enhanced")
        list(e.solve("is_list(L)", {"L": [1] * n}, render=False))
        steps.append(e.table_statistics()["traversal_steps"])
    per = [steps[0] / 500, steps[1] / 4000]
    assert per[1] <= 1.3 * per[0]
