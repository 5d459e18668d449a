"""Subgoal and answer tables plus a linear-tabling evaluator.

Evaluation is iterative: a continuation is a linked tuple of goal cells
and a choicepoint stack drives backtracking, so neither long lists nor
deep recursion touch the Python call stack.

A tabled call is a *generator* the first time its variant is seen; its
clauses run with a continuation that registers each solution as an
answer and then fails (lazy consumption).  When the clauses are
exhausted the generator either

* re-runs, if some consumer read its incomplete answer table during the
  round and new answers appeared;
* hands its dependencies to the frame below, if it consumed answers of an
  older incomplete subgoal (it stays incomplete);
* or completes every subgoal registered since it started.

It then returns its answers like any consumer.
"""

import time

import numpy as np

from ._layout import (
    ATM, INT, LST, REF, STR, TAG_MASK, TABLE_BIT, R_HTOP, R_TRTOP, R_AUSED, R_TERM_CELLS,
    R_TT_COUNT, R_TT_NODES, R_ST_COUNT, R_COPIED, R_STEPS, R_COMBINES, R_HITS,
    R_MISSES, R_COMPARES, R_EXPANSIONS, R_BUCKET_CELLS, R_ANSWERS, R_HC_CALLS, R_BLOCK_EQS,
    SG_SYM, SG_ATAB, SG_STATE, SG_ARGS, AT_COUNT, AT_FIRST, AN_NEXT, AN_ARGS,
)
from .terms import Store, k_unify, k_undo_to, deref
from .arena import TableArena
from .hashcons import TermsTable
from ._tables import k_subgoal_lookup, k_answer_register, k_answer_return
from .errors import EngineError, UndefinedPredicate
from .frontend.reader import (
    Var, Atom, Struct, Program, parse_program, parse_goal, functor_of,
)

_INF = 1 << 62

CP_CLAUSES = 0
CP_GEN = 1
CP_ANSWERS = 2
CP_BETWEEN = 3


# ---------------------------------------------------------------------------
# clause templates


class Template:
    """A clause compiled to relocatable heap cells.

    Cell 0 is the head, cells ``1..ngoals`` the body goals, the rest the
    blocks they point to.  ``reloc`` marks cells whose payload is an address
    relative to the template start.
    """

    __slots__ = ("cells", "reloc", "ngoals", "size")

    def __init__(self, cells, reloc, ngoals):
        self.cells = np.asarray(cells, dtype=np.int64)
        self.reloc = np.asarray(reloc, dtype=np.int64)
        self.ngoals = ngoals
        self.size = len(cells)

    def instantiate(self, store):
        base = store.halloc(self.size)
        store.heap[base:base + self.size] = self.cells + self.reloc * (base << 3)
        return base


def compile_clause(store, head, body):
    syms = store.symbols
    cells = [0] * (1 + len(body))
    reloc = [0] * (1 + len(body))
    where = {}

    def alloc(n):
        p = len(cells)
        cells.extend([0] * n)
        reloc.extend([0] * n)
        return p

    def put(slot, t):
        while True:
            if isinstance(t, Var):
                if t.name.endswith("#") or t not in where:
                    where[t] = slot
                    cells[slot] = (slot << 3) | REF
                else:
                    cells[slot] = (where[t] << 3) | REF
                reloc[slot] = 1
            elif isinstance(t, bool) or not isinstance(t, (int, Atom, Struct)):
                raise EngineError(f"unsupported term {t!r}")
            elif isinstance(t, int):
                cells[slot] = store.make_int(t)
            elif isinstance(t, Atom):
                cells[slot] = (syms.intern(t.name, 0) << 3) | ATM
            elif t.name == "." and len(t.args) == 2:
                p = alloc(2)
                cells[slot] = (p << 3) | LST
                reloc[slot] = 1
                put(p, t.args[0])
                slot, t = p + 1, t.args[1]
                continue
            else:
                n = len(t.args)
                p = alloc(n + 1)
                cells[slot] = (p << 3) | STR
                reloc[slot] = 1
                cells[p] = (syms.intern(t.name, n) << 3) | ATM
                for i, a in enumerate(t.args[:-1], 1):
                    put(p + i, a)
                slot, t = p + n, t.args[-1]
                continue
            return

    put(0, head)
    for i, g in enumerate(body, 1):
        put(i, g)
    return Template(cells, reloc, len(body))


# ---------------------------------------------------------------------------
# evaluator state


class _Info:
    __slots__ = ("rec", "pos", "complete", "frame", "last_eval")

    def __init__(self, rec, pos):
        self.rec = rec
        self.pos = pos
        self.complete = False
        self.frame = None
        self.last_eval = -1


class _Frame:
    __slots__ = ("info", "goal", "rest", "depth", "scope_start", "round_start",
                 "ans_start", "looped", "min_dep", "clauses")

    def __init__(self, info, goal, rest, depth, scope_start, round_start, ans_start, clauses):
        self.info = info
        self.goal = goal
        self.rest = rest
        self.depth = depth
        self.scope_start = scope_start
        self.round_start = round_start
        self.ans_start = ans_start
        self.looped = False
        self.min_dep = _INF
        self.clauses = clauses


class Engine:
    """One program, one store, one set of tables."""

    def __init__(self, program=None, mode="enhanced", hash_flavor="full"):
        from .frontend.builtins import install
        self.store = Store(mode, hash_flavor)
        self.arena = TableArena(self.store)
        self.terms_table = TermsTable(self.store)
        self.mode = mode
        self.hash_flavor = hash_flavor
        self.clauses = {}
        self.tabled = set()
        self.builtins = {}
        install(self)
        self._infos = {}
        self._complist = []
        self._stack = []
        self._round = 0
        self._redir = (np.empty(256, np.int64), np.empty(256, np.int64))
        self.elapsed = 0.0
        self.generator_runs = 0
        if program is not None:
            self.load(program)

    # -- program loading -------------------------------------------------------

    def load(self, program):
        if isinstance(program, str):
            program = parse_program(program)
        syms = self.store.symbols
        for name, arity in program.tabled:
            sid = syms.intern(name, arity)
            if sid in self.builtins:
                raise EngineError(f"builtin {name}/{arity} cannot be tabled")
            self.tabled.add(sid)
            self.clauses.setdefault(sid, [])
        for c in program.clauses:
            name, arity = functor_of(c.head)
            sid = syms.intern(name, arity)
            if sid in self.builtins:
                raise EngineError(f"cannot redefine builtin {name}/{arity}")
            self.clauses.setdefault(sid, []).append(compile_clause(self.store, c.head, c.body))
        return self

    consult = load

    # -- queries -----------------------------------------------------------------

    def solve(self, query, lists=None, render=True):
        """Yield one ``{name: printed term}`` dict per solution of ``query``.

        ``query`` is goal text or a list of goal ASTs.  ``lists`` maps query
        variable names to Python integer lists bound before the run; those
        variables are left out of the printed solutions.  With ``render``
        false nothing is printed and each solution is yielded as ``None``.
        """
        if isinstance(query, str):
            goals, named = parse_goal(query)
        else:
            goals = list(query)
            named = {}
            for g in goals:
                _collect_vars(g, named)
        s = self.store
        head = Struct("$query", tuple(named.values())) if named else Atom("$query")
        tmpl = compile_clause(s, head, goals)
        mark = s.trail_top
        htop = s.heap_top
        base = tmpl.instantiate(s)
        hcell = int(s.heap[base])
        cont = None
        for j in range(tmpl.ngoals, 0, -1):
            cont = (int(s.heap[base + j]), cont)
        shown = list(enumerate(named))
        if lists:
            for i, name in shown:
                if name in lists:
                    s.unify(int(s.heap[(hcell >> 3) + 1 + i]), s.make_int_list(lists[name]))
            shown = [(i, name) for i, name in shown if name not in lists]
        started = time.perf_counter()
        run = self._run(cont)
        try:
            for _ in run:
                out = None
                if render:
                    out = {name: s.term_to_str(int(s.heap[(hcell >> 3) + 1 + i])) for i, name in shown}
                self.elapsed += time.perf_counter() - started
                yield out
                started = time.perf_counter()
        finally:
            run.close()
            self.elapsed += time.perf_counter() - started
            self._abandon()
            s.undo_to(mark)
            s.reset_heap(htop)

    def ask(self, query, limit=None):
        """All solutions of ``query`` (or the first ``limit``) as a list."""
        out = []
        for sol in self.solve(query):
            out.append(sol)
            if limit is not None and len(out) >= limit:
                break
        return out

    def _abandon(self):
        # frames left active by an abandoned query are demoted to
        # "evaluated, incomplete" so a later call re-runs them
        for f in self._stack:
            f.info.frame = None
            f.info.last_eval = -1
        self._stack.clear()

    # -- the machine -------------------------------------------------------------

    def _run(self, cont):
        s = self.store
        cps = []
        ok = True
        while True:
            if ok:
                if cont is None:
                    yield
                    ok = False
                    continue
                item, rest = cont
                if item.__class__ is int:
                    ok, cont = self._call(item, rest, cps)
                else:
                    self._add_answer(item)
                    ok = False
            else:
                if not cps:
                    return
                cp = cps[-1]
                k_undo_to(s.heap, s.arena, s.trail, s.regs, cp[1])
                s.regs[R_HTOP] = cp[2]
                kind = cp[0]
                if kind == CP_CLAUSES:
                    cps.pop()
                    ok, cont = self._resolve(cp[4], cp[5], cp[6], cp[3], cps)
                elif kind == CP_ANSWERS:
                    ok, cont = self._next_answer(cp, cps, True)
                elif kind == CP_GEN:
                    ok, cont = self._round_end(cp, cps)
                else:
                    ok, cont = self.builtins_retry[kind](self, cp, cps)

    def _call(self, goal, rest, cps):
        s = self.store
        g = int(deref(s.heap, s.arena, goal))
        tag = g & TAG_MASK
        if tag == STR:
            sym = int(s.heap[g >> 3]) >> 3
        elif tag == ATM:
            sym = g >> 3
        else:
            raise EngineError(f"goal is not callable: {s.term_to_str(g)}")
        b = self.builtins.get(sym)
        if b is not None:
            return b(self, g, rest, cps)
        if sym in self.tabled:
            return self._tabled(g, sym, rest, cps)
        cl = self.clauses.get(sym)
        if cl is None:
            raise UndefinedPredicate(s.symbols.name(sym), s.symbols.arity(sym))
        return self._resolve(g, cl, 0, rest, cps)

    def _resolve(self, g, clauses, i, rest, cps):
        s = self.store
        regs = s.regs
        mark = int(regs[R_TRTOP])
        htop = int(regs[R_HTOP])
        n = len(clauses)
        while i < n:
            t = clauses[i]
            i += 1
            base = t.instantiate(s)
            if k_unify(s.heap, s.arena, s.trail, regs, s.syms, s.ws, g, s.heap[base]):
                if i < n:
                    cps.append([CP_CLAUSES, mark, htop, rest, g, clauses, i])
                cont = rest
                if t.ngoals:
                    for c in reversed(s.heap[base + 1:base + 1 + t.ngoals].tolist()):
                        cont = (c, cont)
                return True, cont
            regs[R_HTOP] = htop
        return False, None

    # -- tabled calls --------------------------------------------------------------

    def _lookup(self, g):
        s = self.store
        ra, rc = self._redir
        rec, new, ok = k_subgoal_lookup(
            s.heap, s.arena, s.trail, s.regs, s.syms, s.ws, g, ra, rc)
        if not ok:
            raise EngineError("internal error: unnumbered variable in subgoal copy")
        return int(rec), bool(new)

    def _info(self, rec):
        info = self._infos.get(rec)
        if info is None:
            info = self._infos[rec] = _Info(rec, len(self._complist))
            self._complist.append(info)
        return info

    def _tabled(self, g, sym, rest, cps):
        rec, new = self._lookup(g)
        info = self._info(rec)
        if info.complete:
            return self._consume(info, g, rest, cps)
        if new:
            return self._generate(info, g, rest, cps, info.pos, sym)
        if info.frame is not None:
            self._depend(info.frame)
            return self._consume(info, g, rest, cps)
        owner = None
        for f in reversed(self._stack):
            if f.scope_start <= info.pos:
                owner = f
                break
        if owner is None or info.last_eval < owner.round_start:
            return self._generate(info, g, rest, cps, len(self._complist), sym)
        self._depend(owner)
        return self._consume(info, g, rest, cps)

    def _depend(self, target):
        top = self._stack[-1]
        if target.depth < top.min_dep:
            top.min_dep = target.depth
        target.looped = True

    def _generate(self, info, g, rest, cps, scope_start, sym):
        s = self.store
        self._round += 1
        self.generator_runs += 1
        f = _Frame(info, g, rest, len(self._stack), scope_start, self._round,
                   int(s.regs[R_ANSWERS]), self.clauses.get(sym, ()))
        info.frame = f
        info.last_eval = f.round_start
        self._stack.append(f)
        cps.append([CP_GEN, s.trail_top, s.heap_top, rest, f])
        return self._resolve(g, f.clauses, 0, (f, None), cps)

    def _add_answer(self, f):
        s = self.store
        status = k_answer_register(
            s.heap, s.arena, s.trail, s.regs, s.syms, s.ws, f.info.rec, f.goal)
        if status < 0:
            raise EngineError("internal error: unnumbered variable in answer copy")

    def _round_end(self, cp, cps):
        s = self.store
        f = cp[4]
        info = f.info
        if f.min_dep < f.depth:
            self._stack.pop()
            parent = self._stack[-1]
            if f.min_dep < parent.min_dep:
                parent.min_dep = f.min_dep
            info.frame = None
            cps.pop()
            return self._consume(info, f.goal, f.rest, cps)
        if f.looped and int(s.regs[R_ANSWERS]) > f.ans_start:
            self._round += 1
            f.round_start = self._round
            info.last_eval = f.round_start
            f.ans_start = int(s.regs[R_ANSWERS])
            f.looped = False
            f.min_dep = _INF
            return self._resolve(f.goal, f.clauses, 0, (f, None), cps)
        arena = s.arena
        for other in self._complist[f.scope_start:]:
            other.complete = True
            arena[other.rec + SG_STATE] = 1
        del self._complist[f.scope_start:]
        info.complete = True
        s.arena[info.rec + SG_STATE] = 1
        self._stack.pop()
        info.frame = None
        cps.pop()
        return self._consume(info, f.goal, f.rest, cps)

    def _consume(self, info, g, rest, cps):
        s = self.store
        cp = [CP_ANSWERS, s.trail_top, s.heap_top, rest, info, g, 0]
        return self._next_answer(cp, cps, False)

    def _next_answer(self, cp, cps, on_stack):
        s = self.store
        info = cp[4]
        arena = s.arena
        an = cp[6]
        an = int(arena[arena[info.rec + SG_ATAB] + AT_FIRST]) if an == 0 else int(arena[an + AN_NEXT])
        while an:
            cp[6] = an
            if k_answer_return(s.heap, s.arena, s.trail, s.regs, s.syms, s.ws, an, cp[5]):
                more = not info.complete or s.arena[an + AN_NEXT] != 0
                if more and not on_stack:
                    cps.append(cp)
                elif not more and on_stack:
                    cps.pop()
                return True, cp[3]
            an = int(s.arena[an + AN_NEXT])
        if on_stack:
            cps.pop()
        return False, None

    # -- table primitives as a public API ------------------------------------------

    def build(self, text):
        """Build the term written in ``text`` on the heap; returns its cell."""
        from .frontend.reader import parse_term
        tmpl = compile_clause(self.store, Struct("$t", (parse_term(text),)), [])
        base = tmpl.instantiate(self.store)
        return int(self.store.heap[(int(self.store.heap[base]) >> 3) + 1])

    def subgoal_lookup_register(self, goal):
        """Find or register the variant of heap goal ``goal``.

        Returns ``(record, role)`` with role ``"generator"`` for a new record
        and ``"consumer"`` otherwise.
        """
        g = self.store.deref(goal)
        rec, new = self._lookup(g)
        self._info(rec)
        return rec, ("generator" if new else "consumer")

    def answer_lookup_register(self, rec, goal):
        s = self.store
        status = k_answer_register(
            s.heap, s.arena, s.trail, s.regs, s.syms, s.ws, rec, s.deref(goal))
        if status < 0:
            raise EngineError("answer contains an unbound variable that could not be numbered")
        return "new" if status == 1 else "duplicate"

    def answer_records(self, rec):
        arena = self.store.arena
        an = int(arena[arena[rec + SG_ATAB] + AT_FIRST])
        while an:
            yield an
            an = int(arena[an + AN_NEXT])

    def answer_return(self, rec, cursor, goal):
        """Unify ``goal`` with the answer after ``cursor`` (0 = first).

        Returns the cursor of the answer used, or None when exhausted.
        Bindings of a previous return should be undone by the caller.
        """
        s = self.store
        arena = s.arena
        an = int(arena[arena[rec + SG_ATAB] + AT_FIRST]) if cursor == 0 else int(arena[cursor + AN_NEXT])
        g = s.deref(goal)
        while an:
            if k_answer_return(s.heap, s.arena, s.trail, s.regs, s.syms, s.ws, an, g):
                return an
            an = int(s.arena[an + AN_NEXT])
        return None

    def subgoal_records(self):
        return list(self._infos)

    def describe_subgoal(self, rec):
        s = self.store
        arena = s.arena
        sym = int(arena[rec + SG_SYM])
        n = s.symbols.arity(sym)
        args = [s.term_to_str(int(arena[rec + SG_ARGS + i])) for i in range(n)]
        name = s.symbols.name(sym)
        text = name if not n else f"{name}({','.join(args)})"
        atab = int(arena[rec + SG_ATAB])
        return {
            "goal": text,
            "complete": bool(arena[rec + SG_STATE]),
            "answers": int(arena[atab + AT_COUNT]),
        }

    def answer_strings(self, rec):
        s = self.store
        arena = s.arena
        n = s.symbols.arity(int(arena[rec + SG_SYM]))
        out = []
        for an in self.answer_records(rec):
            out.append(tuple(s.term_to_str(int(arena[an + AN_ARGS + i])) for i in range(n)))
        return out

    def table_statistics(self):
        r = self.store.regs
        used = int(r[R_AUSED])
        term = int(r[R_TERM_CELLS])
        buckets = int(r[R_BUCKET_CELLS])
        nodes = int(r[R_TT_NODES])
        return {
            "subgoals": int(r[R_ST_COUNT]),
            "answers": int(r[R_ANSWERS]),
            "used_cells": used,
            "term_cells": term,
            "bucket_cells": buckets,
            "chain_node_cells": nodes,
            "record_cells": used - term - buckets - nodes,
            "interned_terms": int(r[R_TT_COUNT]),
            "hits": int(r[R_HITS]),
            "misses": int(r[R_MISSES]),
            "hash_consing_calls": int(r[R_HC_CALLS]),
            "comparisons": int(r[R_COMPARES]),
            "structural_comparisons": int(r[R_BLOCK_EQS]),
            "expansions": int(r[R_EXPANSIONS]),
            "cells_copied": int(r[R_COPIED]),
            "traversal_steps": int(r[R_STEPS]),
            "hash_combines": int(r[R_COMBINES]),
            "elapsed": round(self.elapsed, 6),
        }


def format_statistics(stats):
    return "\n".join(f"% {k} = {v}" for k, v in stats.items())


def _collect_vars(t, out):
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            if not x.name.startswith("_"):
                out.setdefault(x.name, x)
        elif isinstance(x, Struct):
            stack.extend(reversed(x.args))
