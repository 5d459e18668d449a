"""Why sharing matters as inputs grow.

    python3 demos/scaling_story.py

Runs is_list over [1,1,...,1] of growing length in each mode and fits a
log-log slope.  Copying every suffix separately is quadratic in space.
Sharing the suffixes makes space linear, but the plain hash-consing mode
still rehashes each suffix from scratch, so its hashing work stays
quadratic.  Storing the hash code beside each compound removes that too.
"""

from hctabling.bench import run_one, warm_up, fit_scaling

SIZES = [250, 500, 1000, 2000]

print(__doc__.split("\n\n", 1)[1])
print("compiling kernels...")
warm_up()

print(f"\n{'mode':<9} {'n':>5} {'used_cells':>11} {'work':>10} {'seconds':>8}")
series = {}
for mode in ("none", "hashcons", "enhanced"):
    rows = [run_one("is_list_repeat", n, mode)[0] for n in SIZES]
    series[mode] = rows
    for r in rows:
        work = r.hash_combines + r.traversal_steps
        print(f"{mode:<9} {r.n:>5} {r.cells:>11} {work:>10} {r.seconds:>8.3f}")

print("\nslopes (1 = linear, 2 = quadratic)")
for mode, rows in series.items():
    space = fit_scaling(rows, "cells").slope
    work = fit_scaling(rows, "hash_combines").slope
    print(f"   {mode:<9} space {space:.2f}   hash combines {work:.2f}")

print("\nA hash that only looks at the first three list elements cannot tell")
print("the suffixes of [1,1,...] apart, so every lookup walks a long chain:")
for flavor in ("full", "prefix3"):
    rows = [run_one("is_list_repeat", n, "enhanced", flavor)[0] for n in SIZES]
    print(f"   {flavor:<8} comparisons slope {fit_scaling(rows, 'comparisons').slope:.2f}")
