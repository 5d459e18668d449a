"""Shared fixtures and independent oracles.

The oracles below deliberately avoid the engine: they work on plain Python
data, so agreement with the engine is evidence rather than a tautology.
"""

import random
import sys
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

MASK = (1 << 64) - 1


# -- oracles -----------------------------------------------------------------


def edit_distance_dp(a, b):
    """Unit-cost Levenshtein distance by the textbook table."""
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def transitive_closure(edges):
    """Naive bottom-up fixpoint of path(X,Y) :- edge(X,Y) ; path(X,Z), edge(Z,Y)."""
    paths = set(edges)
    while True:
        step = {(x, w) for (x, y) in paths for (z, w) in edges if y == z}
        if step <= paths:
            return paths
        paths |= step


def ref_seq(a, b):
    # code1 + 31*code2 + 1 on 64-bit words, with 0 kept for non-ground
    if a == 0 or b == 0:
        return 0
    return ((a + 31 * b + 1) & MASK) or 1


def ref_hash(value, leaf_code, functor_code):
    """Structural hash of nested Python data.

    Lists are Python lists, compounds are tuples ``(name, *args)``, ``None``
    is a variable.  Leaf and functor codes are supplied by the caller, so
    only the combination rule is under test.
    """
    if value is None:
        return 0
    if isinstance(value, list):
        code = leaf_code("[]")
        for x in reversed(value):
            code = ref_seq(ref_hash(x, leaf_code, functor_code), code)
        return code
    if isinstance(value, tuple):
        code = functor_code(value[0], len(value) - 1)
        for x in value[1:]:
            code = ref_seq(code, ref_hash(x, leaf_code, functor_code))
        return code
    return leaf_code(value)


def random_ground(rng, depth=3):
    """Random ground term as nested Python data (ints, atoms, lists, tuples)."""
    r = rng.random()
    if depth == 0 or r < 0.3:
        return rng.choice([rng.randrange(-50, 50), rng.choice(["a", "b", "c", "[]", "foo"])])
    if r < 0.65:
        return [random_ground(rng, depth - 1) for _ in range(rng.randrange(0, 5))]
    name = rng.choice(["f", "g", "h"])
    return (name, *[random_ground(rng, depth - 1) for _ in range(rng.randrange(1, 4))])


def to_text(value):
    if isinstance(value, list):
        return "[" + ",".join(to_text(x) for x in value) + "]"
    if isinstance(value, tuple):
        return value[0] + "(" + ",".join(to_text(x) for x in value[1:]) + ")"
    return str(value)


def build(store, value):
    """Build nested Python data on a store's heap."""
    if isinstance(value, list):
        return store.make_list([build(store, x) for x in value])
    if isinstance(value, tuple):
        return store.make_struct(value[0], [build(store, x) for x in value[1:]])
    if isinstance(value, str):
        return store.make_atom(value)
    return store.make_int(value)


# -- fixtures ------------------------------------------------------------------


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(params=["none", "hashcons", "enhanced"])
def mode(request):
    return request.param


# -- acceptance summary ----------------------------------------------------------


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import ACCEPTANCE
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
