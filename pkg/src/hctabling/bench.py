"""Benchmark workloads, CSV output and log-log scaling fits.

Every row comes from a fresh engine.  Timing uses ``time.perf_counter``
and covers query evaluation only; numba compilation happens on first import
and is excluded by a warm-up run.

``path_cyclic`` is an addition to the list-based workloads: transitive
closure over a ring with chords, a fixpoint-heavy correctness workload.
"""

import csv
import math
import time
from dataclasses import dataclass, fields

import numpy as np

from .tabling import Engine
from .programs import source

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1

DEFAULT_SIZES = {
    "is_list_repeat": list(range(500, 4001, 500)),
    "is_list_random": list(range(500, 4001, 500)),
    "edit_repeat": [30, 60, 90, 120],
    "edit_random": [30, 60, 90, 120],
    "create_list": [200, 400, 800, 1600],
    "path_cyclic": [20, 40, 80, 160],
}


class SplitMix64:
    """Deterministic 64-bit generator (splitmix64 constants)."""

    def __init__(self, seed):
        self.state = seed & _MASK

    def next(self):
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, bound):
        return self.next() % bound


def gen_repeated_list(n):
    if n < 1:
        raise ValueError("n must be at least 1")
    return [1] * n


def gen_random_list(n, seed):
    """``n`` pseudo-random integers in [0, 2**30)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = SplitMix64(seed)
    return [rng.next() >> 34 for _ in range(n)]


def ring_with_chords(n, seed):
    """Edges of a directed n-ring plus n//4 random chords."""
    rng = SplitMix64(seed)
    edges = {(i, (i + 1) % n) for i in range(n)}
    for _ in range(n // 4):
        edges.add((rng.below(n), rng.below(n)))
    return sorted(edges)


@dataclass
class BenchRow:
    benchmark: str
    n: int
    mode: str
    hash: str
    seconds: float
    cells: int
    subgoals: int
    answers: int
    hash_combines: int
    traversal_steps: int
    hits: int
    misses: int
    comparisons: int


CSV_HEADER = [f.name for f in fields(BenchRow)]


def _workload(name, n, seed):
    """(program text, query text, list-valued arguments built natively)."""
    if name == "is_list_repeat":
        return source("is_list"), "is_list(L)", {"L": gen_repeated_list(n)}
    if name == "is_list_random":
        return source("is_list"), "is_list(L)", {"L": gen_random_list(n, seed)}
    if name == "edit_repeat":
        return source("edit"), "edit(L1,L2,D)", {"L1": gen_repeated_list(n), "L2": gen_repeated_list(n)}
    if name == "edit_random":
        return (source("edit"), "edit(L1,L2,D)",
                {"L1": gen_random_list(n, seed), "L2": gen_random_list(n, seed + 1)})
    if name == "create_list":
        return source("create_list"), f"create_list({n},L)", {}
    if name == "path_cyclic":
        edges = ring_with_chords(n, seed)
        prog = source("path") + "".join(f"edge({a},{b}).\n" for a, b in edges)
        return prog, "path(0,Y)", {}
    raise KeyError(f"unknown benchmark {name!r}; choose from {', '.join(DEFAULT_SIZES)}")


def run_one(name, n, mode="enhanced", hash_flavor="full", seed=1, collect=False):
    """Run one benchmark instance; returns ``(BenchRow, answers or None)``."""
    prog, query, lists = _workload(name, n, seed)
    eng = Engine(prog, mode=mode, hash_flavor=hash_flavor)
    answers = eng.solve(query, lists, render=collect)
    out = [] if collect else None
    start = time.perf_counter()
    for sol in answers:
        if collect:
            out.append(sol)
    seconds = time.perf_counter() - start
    st = eng.table_statistics()
    row = BenchRow(name, n, mode, hash_flavor, round(seconds, 6), st["used_cells"],
                   st["subgoals"], st["answers"], st["hash_combines"], st["traversal_steps"],
                   st["hits"], st["misses"], st["comparisons"])
    return row, out


def run_benchmark(name, sizes=None, mode="enhanced", hash_flavor="full", seed=1):
    if name not in DEFAULT_SIZES:
        raise KeyError(f"unknown benchmark {name!r}; choose from {', '.join(DEFAULT_SIZES)}")
    sizes = DEFAULT_SIZES[name] if sizes is None else list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    warm_up()
    return [run_one(name, n, mode, hash_flavor, seed)[0] for n in sizes]


_warm = False


def warm_up():
    """Compile every kernel once so timings exclude JIT work."""
    global _warm
    if not _warm:
        for mode in ("none", "hashcons", "enhanced"):
            for flavor in ("full", "prefix3"):
                run_one("edit_repeat", 3, mode, flavor)
                run_one("create_list", 3, mode, flavor)
                run_one("path_cyclic", 4, mode, flavor)
        _warm = True


@dataclass
class ScalingVerdict:
    metric: str
    slope: float
    low: float
    high: float
    passed: bool


def fit_scaling(rows, metric, bounds=(-math.inf, math.inf)):
    """Least-squares slope of log(metric) against log(n)."""
    pts = [(r.n, getattr(r, metric)) for r in rows]
    pts = [(n, v) for n, v in pts if n > 0 and v > 0]
    if len(pts) < 4:
        raise ValueError(f"need at least 4 positive points to fit {metric}, got {len(pts)}")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope = float(np.polyfit(x, y, 1)[0])
    lo, hi = bounds
    return ScalingVerdict(metric, slope, lo, hi, lo <= slope <= hi)


def write_csv(rows, path):
    try:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow([getattr(r, k) for k in CSV_HEADER])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def read_csv(path):
    types = {f.name: f.type for f in fields(BenchRow)}
    conv = {"str": str, "int": int, "float": float}
    with open(path, newline="") as f:
        return [BenchRow(**{k: conv[types[k] if isinstance(types[k], str) else types[k].__name__](v)
                            for k, v in rec.items()})
                for rec in csv.DictReader(f)]
