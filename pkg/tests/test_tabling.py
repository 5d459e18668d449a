import pytest

from hctabling import Engine, bundled_program, UndefinedPredicate, InstantiationError
from hctabling._layout import TABLE_BIT, TAG_MASK, LST, SG_ARGS, AN_ARGS

from conftest import edit_distance_dp, transitive_closure

PATH_ABC = bundled_program("path") + "edge(a,b).\nedge(b,a).\nedge(b,c).\n"


def test_generator_then_consumer():
    e = Engine(bundled_program("is_list"))
    rec, role = e.subgoal_lookup_register(e.build("is_list([1,2])"))
    assert role == "generator"
    rec2, role2 = e.subgoal_lookup_register(e.build("is_list([1,2])"))
    assert (rec2, role2) == (rec, "consumer")


def test_renamed_variants_are_consumers(rng):
    e = Engine("p(_,_,_).\n:- table p/3.\n")
    rec, _ = e.subgoal_lookup_register(e.build("p(X,f(Y,X),[Z|Y])"))
    for a, b, c in [("A", "B", "C"), ("Q", "R", "S"), ("X1", "Y2", "Z3")]:
        r, role = e.subgoal_lookup_register(e.build(f"p({a},f({b},{a}),[{c}|{b}])"))
        assert (r, role) == (rec, "consumer")
    _, role = e.subgoal_lookup_register(e.build("p(X,f(X,X),[Z|X])"))
    assert role == "generator"


def test_is_list_three_subgoals(mode):
    e = Engine(bundled_program("is_list"), mode=mode)
    assert e.ask("is_list([1,2])") == [{}]
    goals = sorted(e.describe_subgoal(r)["goal"] for r in e.subgoal_records())
    assert goals == ["is_list([1,2])", "is_list([2])", "is_list([])"]
    st = e.table_statistics()
    assert st["subgoals"] == 3 and st["answers"] == 3


def test_answer_registration_dedups():
    e = Engine(bundled_program("is_list"))
    rec, _ = e.subgoal_lookup_register(e.build("is_list([1,2])"))
    assert e.answer_lookup_register(rec, e.build("is_list([1,2])")) == "new"
    assert e.answer_lookup_register(rec, e.build("is_list([1,2])")) == "duplicate"
    assert e.describe_subgoal(rec)["answers"] == 1


def test_nonground_answers_are_variants():
    e = Engine("q(_).\n:- table q/1.\n")
    rec, _ = e.subgoal_lookup_register(e.build("q(L)"))
    assert e.answer_lookup_register(rec, e.build("q([X])")) == "new"
    assert e.answer_lookup_register(rec, e.build("q([Y])")) == "duplicate"
    assert e.answer_strings(rec) == [("[_0]",)]


def test_ground_answer_shares_subgoal_copy():
    e = Engine(bundled_program("is_list"), mode="enhanced")
    e.ask("is_list([1,2,3])")
    arena = e.store.arena
    for rec in e.subgoal_records():
        an = next(e.answer_records(rec))
        sub = int(arena[rec + SG_ARGS])
        assert int(arena[an + AN_ARGS]) == sub


def test_answer_return_sequence():
    e = Engine(bundled_program("is_list"))
    e.ask("is_list([1,2])")
    rec, role = e.subgoal_lookup_register(e.build("is_list([1,2])"))
    assert role == "consumer"
    s = e.store
    mark = s.trail_top
    goal = e.build("is_list([1,2])")
    cur = e.answer_return(rec, 0, goal)
    assert cur is not None
    s.undo_to(mark)
    assert e.answer_return(rec, cur, goal) is None


def test_answer_return_fresh_shared_variable():
    e = Engine("r(_).\n:- table r/1.\n")
    rec, _ = e.subgoal_lookup_register(e.build("r(T)"))
    e.answer_lookup_register(rec, e.build("r(f(X,X,Y))"))
    s = e.store
    t = s.new_var()
    goal = s.make_struct("r", [t])
    assert e.answer_return(rec, 0, goal)
    a, b, c = s.args(s.deref(t))
    assert s.deref(a) == s.deref(b) != s.deref(c)
    assert s.deref(a) & TAG_MASK == 0


def test_ground_answer_return_copies_nothing():
    e = Engine(bundled_program("is_list"), mode="enhanced")
    e.ask("is_list([1,2,3,4,5])")
    rec, _ = e.subgoal_lookup_register(e.build("is_list([1,2,3,4,5])"))
    s = e.store
    t = s.new_var()
    goal = s.make_struct("is_list", [t])
    top = s.heap_top
    assert e.answer_return(rec, 0, goal)
    assert s.heap_top == top
    cell = s.deref(t)
    assert cell & TAG_MASK == LST and (cell >> 3) >= TABLE_BIT


def test_path_example():
    e = Engine(PATH_ABC)
    assert {sol["X"] for sol in e.solve("path(a,X)")} == {"a", "b", "c"}


@pytest.mark.parametrize("n", [5, 50])
def test_n_plus_one_subgoals(n, mode):
    e = Engine(bundled_program("is_list"), mode=mode)
    goal = "is_list([" + ",".join(str(i) for i in range(1, n + 1)) + "])"
    assert e.ask(goal) == [{}]
    st = e.table_statistics()
    assert st["subgoals"] == n + 1 and st["answers"] == n + 1


def test_edit_small_example():
    e = Engine(bundled_program("edit"))
    ds = [int(sol["D"]) for sol in e.solve("edit([a,b],[b],D)")]
    assert 1 in ds and min(ds) == 1


def test_edit_matches_dp(rng):
    for _ in range(15):
        a = [rng.randrange(3) for _ in range(rng.randrange(7))]
        b = [rng.randrange(3) for _ in range(rng.randrange(7))]
        e = Engine(bundled_program("edit"))
        ds = [int(sol["D"]) for sol in e.solve(f"edit({a},{b},D)".replace(" ", ""))]
        assert min(ds) == edit_distance_dp(a, b)


def test_fresh_statistics_are_zero():
    st = Engine().table_statistics()
    assert all(v == 0 for v in st.values())


def _cells(mode, n):
    e = Engine(bundled_program("is_list"), mode=mode)
    e.ask("is_list([" + ",".join(map(str, range(n))) + "])")
    st = e.table_statistics()
    return st["term_cells"], st["used_cells"]


def test_none_uses_more_cells_than_hashcons():
    # term data is smaller from N = 2 on; the total only from the point where
    # the saved list cells outweigh the terms-table bucket array
    for n in range(2, 12):
        assert _cells("none", n)[0] > _cells("hashcons", n)[0]
    for n in (24, 40, 80):
        assert _cells("none", n)[1] > _cells("hashcons", n)[1]


def test_insertion_order_consumption():
    prog = ":- table n/1.\nn(3).\nn(1).\nn(2).\nn(1).\nn(X) :- n(Y), Y < 3, X is Y + 10.\n"
    e = Engine(prog)
    first = [sol["X"] for sol in e.solve("n(X)")]
    rec, _ = e.subgoal_lookup_register(e.build("n(X)"))
    stored = [a[0] for a in e.answer_strings(rec)]
    assert first == stored == ["3", "1", "2", "11", "12"]


def test_completion_stability():
    e = Engine(PATH_ABC)
    first = sorted(sol["Y"] for sol in e.solve("path(X,Y)"))
    runs = e.generator_runs
    steps = e.table_statistics()["subgoals"]
    again = sorted(sol["Y"] for sol in e.solve("path(X,Y)"))
    assert again == first
    assert e.generator_runs == runs
    assert e.table_statistics()["subgoals"] == steps


def test_cyclic_programs_terminate(rng):
    for _ in range(20):
        n = rng.randrange(1, 8)
        edges = {(rng.randrange(n), rng.randrange(n)) for _ in range(3 * n)}
        prog = bundled_program("path") + "".join(f"edge({a},{b}).\n" for a, b in sorted(edges))
        e = Engine(prog)
        got = {(int(s["X"]), int(s["Y"])) for s in e.solve("path(X,Y)")}
        assert got == transitive_closure(edges)
        assert e.table_statistics()["subgoals"] <= n + 2


def test_mixed_tabled_and_plain():
    prog = PATH_ABC + "reach2(X,Y) :- path(X,Z), path(Z,Y).\n"
    e = Engine(prog)
    got = {sol["Y"] for sol in e.solve("reach2(c,Y)")}
    assert got == set()
    got = {sol["Y"] for sol in e.solve("reach2(a,Y)")}
    assert got == {"a", "b", "c"}


def test_undefined_predicate():
    e = Engine(bundled_program("is_list"))
    with pytest.raises(UndefinedPredicate, match="nope/1"):
        e.ask("nope(1)")


def test_instantiation_error_surfaces():
    e = Engine("f(X, Y) :- Y is X + 1.\n")
    with pytest.raises(InstantiationError):
        e.ask("f(A, B)")


def test_mode_independent_answers(rng):
    prog = bundled_program("edit")
    outs = set()
    for mode in ("none", "hashcons", "enhanced"):
        for flavor in ("full", "prefix3"):
            e = Engine(prog, mode=mode, hash_flavor=flavor)
            outs.add(tuple(sorted(str(s) for s in e.solve("edit([1,2,1,3],[2,2,3],D)"))))
    assert len(outs) == 1


def test_abandoned_query_can_be_rerun():
    e = Engine(PATH_ABC)
    it = e.solve("path(a,X)")
    next(it)
    it.close()
    assert {sol["X"] for sol in e.solve("path(a,X)")} == {"a", "b", "c"}
