"""Walk through one small query and watch the table area fill up.

    python3 demos/sharing_walkthrough.py

``is_list([1,2])`` creates three tabled subgoals, one per suffix of the
list.  Without sharing, each subgoal and each answer gets a private copy
of its suffix: 2 * (2 + 1) list cells of two words each, 12 in all.  With
hash-consing the suffix [2] is stored once, [1,2] points at it, and the
answers reuse the same two list cells.
"""

from hctabling import Engine, bundled_program

PROGRAM = bundled_program("is_list")


def show(mode):
    eng = Engine(PROGRAM, mode=mode)
    eng.ask("is_list([1,2])")
    st = eng.table_statistics()
    print(f"\n== mode {mode}")
    for rec in eng.subgoal_records():
        d = eng.describe_subgoal(rec)
        print(f"   {d['goal']:<16} complete={d['complete']} answers={d['answers']}")
    print(f"   cells holding terms: {st['term_cells']}")
    print(f"   chain node cells:    {st['chain_node_cells']}")
    print(f"   terms-table probes:  {st['hash_consing_calls']} ({st['hits']} hits)")
    print(f"   hash combines:       {st['hash_combines']}")
    return st


print(__doc__.split("\n\n", 1)[1])
stats = {m: show(m) for m in ("none", "hashcons", "enhanced")}

print("\nThe enhanced layout spends one extra cell per compound on its hash")
print("code, which is why it sits between the other two:")
print("   " + ", ".join(f"{m}={s['term_cells']}" for m, s in stats.items()))
