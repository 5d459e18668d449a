import pytest

from hctabling import Store, TermsTable, term_hcode
from hctabling.copier import copy_term
from hctabling.hashing import seq_hcode, functor_seed, atomic_hcode

from conftest import build, random_ground, to_text


def compound_subterms(value, out):
    """Printed forms of every compound subterm, list suffixes included."""
    if isinstance(value, list):
        for i in range(len(value)):
            out.add(to_text(value[i:]))
            compound_subterms(value[i], out)
    elif isinstance(value, tuple):
        out.add(to_text(value))
        for x in value[1:]:
            compound_subterms(x, out)
    return out


@pytest.fixture(params=["hashcons", "enhanced"])
def hmode(request):
    return request.param


def test_first_and_second_insert(hmode):
    s = Store(hmode)
    tt = TermsTable(s)
    a, _ = copy_term(s, s.make_int_list([1, 2]))
    assert tt.count == 2  # [1,2] and its suffix [2]
    used = s.regs[3]
    b, _ = copy_term(s, s.make_int_list([1, 2]))
    assert a == b
    assert s.regs[3] == used
    st = tt.stats()
    assert st["hits"] == 2 and st["misses"] == 2


def test_hits_plus_misses_is_calls(hmode, rng):
    from hctabling import Engine, bundled_program
    e = Engine(bundled_program("edit"), mode=hmode)
    e.ask("edit([1,2,3,1],[2,1,3],D)")
    st = e.table_statistics()
    assert st["hits"] + st["misses"] == st["hash_consing_calls"] > 0


def test_seventeen_into_sixteen(hmode):
    s = Store(hmode)
    tt = TermsTable(s)
    tt.create(16)
    cells = [copy_term(s, s.make_struct("k", [s.make_int(i)]))[0] for i in range(17)]
    assert tt.size == 32 and tt.count == 17
    for i, c in enumerate(cells):
        t = s.make_struct("k", [s.make_int(i)])
        assert copy_term(s, t)[0] == c
    assert tt.audit()["ok"]


def test_expansion_keeps_addresses(hmode, rng):
    s = Store(hmode)
    tt = TermsTable(s)
    vals = [random_ground(rng) for _ in range(150)]
    first = [copy_term(s, build(s, v)) for v in vals]
    tt.expand_and_rehash()
    tt.expand_and_rehash()
    for v, (cell, code) in zip(vals, first):
        if code and cell & 7 in (4, 5):
            assert tt.lookup(cell, code) == cell
    assert tt.audit()["ok"]


def test_enhanced_expansion_does_not_traverse():
    s = Store("enhanced")
    tt = TermsTable(s)
    tt.create(16)
    for i in range(16):
        copy_term(s, s.make_int_list([i, i + 1, i + 2]))
    while tt.count < tt.size:
        copy_term(s, s.make_int_list([tt.count + 100]))
    steps = s.regs[19]
    tt.expand_and_rehash()
    assert s.regs[19] == steps
    assert tt.audit()["ok"]


def test_plain_expansion_rehashes_by_traversal():
    s = Store("hashcons")
    tt = TermsTable(s)
    tt.create(16)
    for i in range(8):
        copy_term(s, s.make_int_list([i, i + 1]))
    steps = s.regs[19]
    tt.expand_and_rehash()
    assert s.regs[19] > steps


def test_stored_hcode():
    s = Store("enhanced")
    tt = TermsTable(s)
    l = s.make_int_list([1, 2])
    cell, code = copy_term(s, l)
    assert tt.stored_hcode(cell) == code == term_hcode(s, l)
    f, _ = copy_term(s, s.make_struct("f", [s.make_int(1)]))
    assert tt.stored_hcode(f) == seq_hcode(functor_seed("f", 1), atomic_hcode(1))
    tt.expand_and_rehash()
    assert tt.stored_hcode(cell) == code


def test_stored_hcode_needs_enhanced():
    s = Store("hashcons")
    cell, _ = copy_term(s, s.make_int_list([1]))
    with pytest.raises(RuntimeError):
        TermsTable(s).stored_hcode(cell)


def test_engineered_collision():
    # f(A,B) folds to seed + 31*(code(A)+code(B)) + 2, so swapping the
    # arguments keeps the code and changes the term
    s = Store("enhanced")
    tt = TermsTable(s)
    a = s.make_struct("f", [s.make_int(1), s.make_int(2)])
    b = s.make_struct("f", [s.make_int(2), s.make_int(1)])
    assert term_hcode(s, a) == term_hcode(s, b)
    ca, _ = copy_term(s, a)
    before = tt.stats()
    cb, _ = copy_term(s, b)
    after = tt.stats()
    assert ca != cb and tt.count == 2
    assert after["structural_comparisons"] - before["structural_comparisons"] == 1
    assert after["misses"] - before["misses"] == 1


def test_distinct_codes_skip_structural_compare():
    s = Store("enhanced")
    tt = TermsTable(s)
    tt.create(4)
    code0 = term_hcode(s, s.make_struct("q", [s.make_int(0)]))
    copy_term(s, s.make_struct("q", [s.make_int(0)]))
    same_bucket = [j for j in range(1, 200)
                   if tt.bucket_of(term_hcode(s, s.make_struct("q", [s.make_int(j)]))) == tt.bucket_of(code0)]
    st0 = tt.stats()
    copy_term(s, s.make_struct("q", [s.make_int(same_bucket[0])]))
    copy_term(s, s.make_struct("q", [s.make_int(same_bucket[1])]))
    st1 = tt.stats()
    assert tt.count == 3
    assert st1["comparisons"] - st0["comparisons"] == 3
    assert st1["structural_comparisons"] == st0["structural_comparisons"]


def test_canonical_count_matches_distinct_subterms(hmode, rng):
    s = Store(hmode)
    tt = TermsTable(s)
    seen = set()
    for _ in range(300):
        v = random_ground(rng)
        compound_subterms(v, seen)
        copy_term(s, build(s, v))
    assert tt.count == len(seen)
    assert tt.audit()["ok"]


def test_audit_detects_tampering():
    s = Store("enhanced")
    tt = TermsTable(s)
    cell, _ = copy_term(s, s.make_int_list([5, 6]))
    s.arena[(cell >> 3) - (1 << 40) - 1] += 1
    assert not tt.audit()["ok"]


def test_nonground_rejected():
    s = Store("enhanced")
    with pytest.raises(ValueError):
        TermsTable(s).hash_consing(s.make_int_list([1]), 0)
