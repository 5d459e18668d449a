"""Tokenizer and operator-precedence parser for the supported Prolog subset."""

from dataclasses import dataclass, field
import re
import warnings


class PrologSyntaxError(Exception):
    def __init__(self, msg, line=None, col=None):
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(msg + where)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Struct:
    name: str
    args: tuple


NIL = Atom("[]")


def make_list(items, tail=NIL):
    out = tail
    for x in reversed(list(items)):
        out = Struct(".", (x, out))
    return out


@dataclass
class Clause:
    head: object
    body: list = field(default_factory=list)


@dataclass
class Program:
    clauses: list = field(default_factory=list)
    tabled: list = field(default_factory=list)

    def predicates(self):
        seen = []
        for c in self.clauses:
            k = functor_of(c.head)
            if k not in seen:
                seen.append(k)
        return seen


def functor_of(t):
    if isinstance(t, Atom):
        return t.name, 0
    if isinstance(t, Struct):
        return t.name, len(t.args)
    raise TypeError(f"not callable: {t!r}")


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<atom>[a-z][A-Za-z0-9_]*)
  | (?P<qatom>'(?:[^'\\]|\\.|'')*')
  | (?P<punct>[()\[\],|!;])
  | (?P<sym>[+\-*/\\^<>=~:.?@#&$]+)
""", re.VERBOSE)


@dataclass
class Tok:
    kind: str   # int var atom punct end eof
    text: str
    line: int
    col: int
    fn: bool = False  # atom immediately followed by '('


def tokenize(text):
    toks = []
    pos = 0
    line = 1
    lstart = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if not m:
            raise PrologSyntaxError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1)
        kind = m.lastgroup
        s = m.group()
        col = pos - lstart + 1
        if kind == "ws":
            pass
        elif kind == "sym" and s == "." and (m.end() >= n or text[m.end()] in " \t\r\n%"):
            toks.append(Tok("end", ".", line, col))
        elif kind == "sym" and s.endswith(".") and len(s) > 1 and (
                m.end() >= n or text[m.end()] in " \t\r\n%"):
            toks.append(Tok("atom", s[:-1], line, col))
            toks.append(Tok("end", ".", line, col + len(s) - 1))
        else:
            if kind == "qatom":
                body = s[1:-1].replace("''", "'")
                s = re.sub(r"\\(.)", lambda mm: {"n": "\n", "t": "\t"}.get(mm.group(1), mm.group(1)), body)
                kind = "atom"
            elif kind == "sym":
                kind = "atom"
            toks.append(Tok(kind, s, line, col, fn=m.end() < n and text[m.end()] == "("))
        nl = s.count("\n") if kind == "ws" else 0
        if nl:
            line += nl
            lstart = pos + m.group().rfind("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - lstart + 1))
    return toks


# ---------------------------------------------------------------------------
# parser

_INFIX = {
    ":-": (1200, "xfx"),
    ",": (1000, "xfy"),
    "=": (700, "xfx"), "==": (700, "xfx"), "\\==": (700, "xfx"),
    "<": (700, "xfx"), ">": (700, "xfx"), "=<": (700, "xfx"), ">=": (700, "xfx"),
    "=:=": (700, "xfx"), "=\\=": (700, "xfx"), "is": (700, "xfx"),
    "+": (500, "yfx"), "-": (500, "yfx"),
    "*": (400, "yfx"), "/": (400, "yfx"), "//": (400, "yfx"),
}
_PREFIX = {":-": (1200, "fx"), "table": (1150, "fx"), "-": (200, "fy")}


class Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0
        self.varmap = {}

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind, text=None):
        t = self.next()
        if t.kind != kind or (text is not None and t.text != text):
            what = text or kind
            if t.kind == "eof":
                raise PrologSyntaxError(f"expected {what!r} but reached end of input", t.line, t.col)
            raise PrologSyntaxError(f"expected {what!r}, found {t.text!r}", t.line, t.col)
        return t

    def _var(self, name):
        if name == "_":
            self._anon = getattr(self, "_anon", 0) + 1
            return Var(f"_{self._anon}#")
        v = self.varmap.get(name)
        if v is None:
            v = self.varmap[name] = Var(name)
        return v

    def _infix_op(self, t):
        if t.kind == "atom" and t.text in _INFIX and not t.fn:
            return t.text
        if t.kind == "punct" and t.text == ",":
            return ","
        return None

    def parse(self, maxprec=1200):
        left, lprec = self.primary(maxprec)
        while True:
            t = self.peek()
            op = self._infix_op(t)
            if op is None:
                break
            prec, kind = _INFIX[op]
            if prec > maxprec:
                break
            la = prec - 1 if kind[0] == "x" else prec
            if lprec > la:
                break
            self.next()
            ra = prec - 1 if kind[2] == "x" else prec
            right = self.parse(ra)
            left, lprec = Struct(op, (left, right)), prec
        return left

    def _args(self):
        self.expect("punct", "(")
        args = [self.parse(999)]
        while self.peek().kind == "punct" and self.peek().text == ",":
            self.next()
            args.append(self.parse(999))
        self.expect("punct", ")")
        return tuple(args)

    def primary(self, maxprec):
        t = self.next()
        if t.kind == "int":
            return int(t.text), 0
        if t.kind == "var":
            return self._var(t.text), 0
        if t.kind == "punct":
            if t.text == "(":
                inner = self.parse(1200)
                self.expect("punct", ")")
                return inner, 0
            if t.text == "[":
                return self._list(), 0
            if t.text == "!":
                return Atom("!"), 0
            raise PrologSyntaxError(f"unexpected {t.text!r}", t.line, t.col)
        if t.kind == "atom":
            if t.fn:
                return Struct(t.text, self._args()), 0
            if t.text == "-" and self.peek().kind == "int":
                n = self.next()
                return -int(n.text), 0
            if t.text in _PREFIX and self._starts_term(self.peek()):
                prec, kind = _PREFIX[t.text]
                if prec > maxprec:
                    prec = 999
                arg = self.parse(prec - 1 if kind == "fx" else prec)
                return Struct(t.text, (arg,)), prec
            return Atom(t.text), 0
        if t.kind == "eof":
            raise PrologSyntaxError("syntax error at end of input", t.line, t.col)
        raise PrologSyntaxError(f"unexpected {t.text!r}", t.line, t.col)

    @staticmethod
    def _starts_term(t):
        if t.kind in ("int", "var"):
            return True
        if t.kind == "punct":
            return t.text in "(["
        if t.kind == "atom":
            return t.text not in _INFIX or t.fn
        return False

    def _list(self):
        if self.peek().kind == "punct" and self.peek().text == "]":
            self.next()
            return NIL
        items = [self.parse(999)]
        while self.peek().kind == "punct" and self.peek().text == ",":
            self.next()
            items.append(self.parse(999))
        tail = NIL
        if self.peek().kind == "punct" and self.peek().text == "|":
            self.next()
            tail = self.parse(999)
        self.expect("punct", "]")
        return make_list(items, tail)

    def clause_term(self):
        self.varmap = {}
        t = self.parse(1200)
        self.expect("end")
        return t


def conj_to_list(t):
    out = []
    while isinstance(t, Struct) and t.name == "," and len(t.args) == 2:
        out.extend(conj_to_list(t.args[0]))
        t = t.args[1]
    out.append(t)
    return out


def _table_specs(t):
    for spec in conj_to_list(t):
        if not (isinstance(spec, Struct) and spec.name == "/" and len(spec.args) == 2
                and isinstance(spec.args[0], Atom) and isinstance(spec.args[1], int)):
            raise PrologSyntaxError(f"bad table declaration: {format_term(spec)}")
        yield spec.args[0].name, spec.args[1]


def _check_callable(t, what):
    if isinstance(t, (Atom, Struct)):
        if isinstance(t, Atom) and t.name == "!":
            raise PrologSyntaxError("cut is not supported")
        return t
    raise PrologSyntaxError(f"{what} is not callable: {format_term(t)}")


def parse_program(text):
    """Parse program text into a :class:`Program`."""
    p = Parser(text)
    prog = Program()
    while p.peek().kind != "eof":
        t = p.clause_term()
        if isinstance(t, Struct) and t.name == ":-" and len(t.args) == 1:
            d = t.args[0]
            if isinstance(d, Struct) and d.name == "table" and len(d.args) == 1:
                for spec in _table_specs(d.args[0]):
                    if spec in prog.tabled:
                        warnings.warn(f"duplicate table declaration for {spec[0]}/{spec[1]}")
                    else:
                        prog.tabled.append(spec)
                continue
            raise PrologSyntaxError(f"unsupported directive: {format_term(d)}")
        if isinstance(t, Struct) and t.name == ":-" and len(t.args) == 2:
            head = _check_callable(t.args[0], "clause head")
            body = [_check_callable(g, "goal") for g in conj_to_list(t.args[1])]
            body = [g for g in body if g != Atom("true")]
            prog.clauses.append(Clause(head, body))
        else:
            prog.clauses.append(Clause(_check_callable(t, "clause head"), []))
    return prog


def parse_goal(text):
    """Parse a query; returns (list of goals, {name: Var}) in first-seen order."""
    text = text.strip()
    if text.endswith("."):
        text = text[:-1]
    p = Parser(text + " .")
    t = p.clause_term()
    goals = [_check_callable(g, "goal") for g in conj_to_list(t)]
    named = {k: v for k, v in p.varmap.items() if not k.startswith("_")}
    return goals, named


def parse_term(text):
    p = Parser(text.strip().rstrip(".") + " .")
    return p.clause_term()


# ---------------------------------------------------------------------------
# printing (canonical notation, re-readable by the parser)

_PLAIN = re.compile(r"^[a-z][A-Za-z0-9_]*$")
_SYMBOLIC = re.compile(r"^[+\-*/\\^<>=~:.?@#&$]+$")


def format_atom(name):
    if name == "[]" or _PLAIN.match(name) or _SYMBOLIC.match(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def format_term(t):
    if isinstance(t, int):
        return str(t)
    if isinstance(t, Var):
        return t.name if not t.name.endswith("#") else "_"
    if isinstance(t, Atom):
        return format_atom(t.name)
    if t.name == "." and len(t.args) == 2:
        items = []
        while isinstance(t, Struct) and t.name == "." and len(t.args) == 2:
            items.append(format_term(t.args[0]))
            t = t.args[1]
        tail = "" if t == NIL else "|" + format_term(t)
        return "[" + ",".join(items) + tail + "]"
    return format_atom(t.name) + "(" + ",".join(format_term(a) for a in t.args) + ")"


def format_clause(c):
    if not c.body:
        return format_term(c.head) + "."
    return format_term(c.head) + " :- " + ", ".join(format_term(g) for g in c.body) + "."


def format_program(prog):
    lines = [f":- table {n}/{a}." for n, a in prog.tabled]
    lines += [format_clause(c) for c in prog.clauses]
    return "\n".join(lines) + "\n"
