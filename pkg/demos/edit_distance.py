"""Edit distance as a tabled program, checked against a DP table.

    python3 demos/edit_distance.py

Every edit/3 subgoal pairs a suffix of the first list with a suffix of the
second.  With hash-consing those suffixes are shared between all the
subgoals that mention them, which keeps the table area proportional to
the number of subgoals rather than to their total printed size.
"""

import random

from hctabling import Engine, bundled_program


def dp(a, b):
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


print(__doc__.split("\n\n", 1)[1])
rng = random.Random(3)
for _ in range(6):
    a = [rng.choice("acgt") for _ in range(rng.randint(3, 9))]
    b = [rng.choice("acgt") for _ in range(rng.randint(3, 9))]
    q = f"edit([{','.join(a)}],[{','.join(b)}],D)"
    eng = Engine(bundled_program("edit"))
    d = eng.ask(q)[0]["D"]
    st = eng.table_statistics()
    print(f"{''.join(a):>10} vs {''.join(b):<10} D={d} (DP {dp(a, b)})  "
          f"subgoals={st['subgoals']:<4} term_cells={st['term_cells']}")

print("\nSame query, three table layouts:")
a, b = "gattaca", "tacgatac"
q = f"edit([{','.join(a)}],[{','.join(b)}],D)"
for mode in ("none", "hashcons", "enhanced"):
    eng = Engine(bundled_program("edit"), mode=mode)
    d = eng.ask(q)[0]["D"]
    print(f"   {mode:<9} D={d}  term_cells={eng.table_statistics()['term_cells']}")
