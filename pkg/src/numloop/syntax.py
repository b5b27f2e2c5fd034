"""Abstract syntax, parser and printer for the analysed Prolog subset.

The surface language is a small Prolog fragment::

    :- analyze(p/2).
    :- intpos(p/2, [1, 2]).
    :- interarg(minus/3, "$3 =< $1").
    p(X, Y) :- X > Y, Z is X - Y, p(Z, Y).

Arithmetic expressions are ordinary terms whose functors are ``+``, ``-``,
``*`` and ``div`` (unary ``-`` is a one-argument ``-``).  Adorned predicate
names print as ``p{<condition>}`` and parse back.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.msg = msg
        self.line = line
        self.col = col


# --------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("empty variable name")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Int:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Compound:
    functor: str
    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError("compound term needs at least one argument")

    def __str__(self):
        return render_term(self)


Term = Union[Var, Int, Compound]

ARITH_BINARY = ("+", "-", "*", "div")


def is_arith(t: Term) -> bool:
    """True if ``t`` is built from integers, variables and arithmetic functors."""
    if isinstance(t, (Var, Int)):
        return True
    if t.functor in ARITH_BINARY and len(t.args) == 2:
        return all(is_arith(a) for a in t.args)
    if t.functor == "-" and len(t.args) == 1:
        return is_arith(t.args[0])
    return False


def term_vars(t: Term, acc: Optional[list] = None) -> list:
    """Variables of ``t`` in first-occurrence order."""
    if acc is None:
        acc = []
    if isinstance(t, Var):
        if t not in acc:
            acc.append(t)
    elif isinstance(t, Compound):
        for a in t.args:
            term_vars(a, acc)
    return acc


def is_linear(t: Term) -> bool:
    if isinstance(t, (Var, Int)):
        return True
    if not is_arith(t):
        return False
    if len(t.args) == 1:
        return is_linear(t.args[0])
    a, b = t.args
    if t.functor in ("+", "-"):
        return is_linear(a) and is_linear(b)
    if t.functor == "*":
        if term_vars(a) and term_vars(b):
            return False
        return is_linear(a) and is_linear(b)
    # div is never treated as linear
    return False


# --------------------------------------------------------------------------
# literals, clauses, programs


class Pred(NamedTuple):
    name: str
    arity: int
    adornment: object = None  # lincon.Condition when adorned

    def base(self) -> "Pred":
        return Pred(self.name, self.arity)

    def __str__(self):
        return f"{render_pred_name(self.name, self.adornment)}/{self.arity}"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple = ()
    adornment: object = None

    @property
    def pred(self) -> Pred:
        return Pred(self.name, len(self.args), self.adornment)

    def with_adornment(self, adornment) -> "Call":
        return Call(self.name, self.args, adornment)


COMPARE_OPS = ("<", ">", "=<", ">=")


@dataclass(frozen=True)
class Compare:
    op: str
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class IsBinding:
    target: Term
    expr: Term


Literal = Union[Call, Compare, IsBinding]


@dataclass(frozen=True)
class Clause:
    head: Call
    body: tuple = ()


@dataclass(frozen=True)
class Analyze:
    pred: Pred


@dataclass(frozen=True)
class IntPos:
    pred: Pred
    positions: frozenset


@dataclass(frozen=True)
class InterArg:
    pred: Pred
    condition: object  # lincon.Condition over $i


Directive = Union[Analyze, IntPos, InterArg]


@dataclass(frozen=True)
class Program:
    clauses: tuple = ()
    directives: tuple = ()

    def predicates(self) -> list:
        """Defined predicates in order of first definition."""
        seen = {}
        for c in self.clauses:
            seen.setdefault(c.head.pred, None)
        return list(seen)

    def clauses_for(self, pred: Pred) -> list:
        return [c for c in self.clauses if c.head.pred == pred]

    def analyze_targets(self) -> list:
        return [d.pred for d in self.directives if isinstance(d, Analyze)]


def literal_vars(lit: Literal) -> list:
    acc: list = []
    if isinstance(lit, Call):
        for a in lit.args:
            term_vars(a, acc)
    elif isinstance(lit, Compare):
        term_vars(lit.lhs, acc)
        term_vars(lit.rhs, acc)
    else:
        term_vars(lit.target, acc)
        term_vars(lit.expr, acc)
    return acc


def clause_vars(c: Clause) -> list:
    acc: list = []
    for a in c.head.args:
        term_vars(a, acc)
    for lit in c.body:
        for v in literal_vars(lit):
            if v not in acc:
                acc.append(v)
    return acc


# --------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+|%[^\n]*)
  | (?P<nl>\n)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<denom>\$\d+)
  | (?P<string>"[^"\n]*")
  | (?P<op>:-|=<|>=|/\\|\\/|[-+*/<>=(),.\[\]{}|])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int
    adorn: Optional[str] = None  # raw "{...}" text following a name


def tokenize(text: str) -> list:
    toks = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            tok = Token(kind, m.group(), line, col)
            end = m.end()
            if kind == "name" and end < n and text[end] == "{":
                depth, j = 0, end
                while j < n:
                    if text[j] == "{":
                        depth += 1
                    elif text[j] == "}":
                        depth -= 1
                        if depth == 0:
                            break
                    elif text[j] == "\n":
                        raise ParseError("unterminated adornment", line, col)
                    j += 1
                if j >= n:
                    raise ParseError("unterminated adornment", line, col)
                tok.adorn = text[end + 1:j]
                end = j + 1
            toks.append(tok)
            pos = end
            continue
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "name") and t.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    # expressions: additive > multiplicative > unary > primary
    def expr(self) -> Term:
        left = self.mul()
        while self.at("+") or self.at("-"):
            op = self.next().text
            left = Compound(op, (left, self.mul()))
        return left

    def mul(self) -> Term:
        left = self.unary()
        while self.at("*") or self.at("div"):
            op = self.next().text
            left = Compound(op, (left, self.unary()))
        return left

    def unary(self) -> Term:
        if self.at("-"):
            self.next()
            if self.tok.kind == "int":
                return Int(-int(self.next().text))
            return Compound("-", (self.unary(),))
        if self.at("+"):
            self.next()
            return self.unary()
        return self.primary()

    def primary(self) -> Term:
        t = self.tok
        if t.kind == "int":
            self.next()
            return Int(int(t.text))
        if t.kind == "var":
            self.next()
            return Var(t.text)
        if t.kind == "name":
            self.next()
            if t.adorn is not None:
                self.error("adorned name used as a term", t)
            if not self.at("("):
                self.error(f"bare atom {t.text!r} is not supported as a term", t)
            return Compound(t.text, self.arglist())
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        self.error(f"unexpected {t.text or 'end of input'!r}")

    def arglist(self) -> tuple:
        self.expect("(")
        args = [self.expr()]
        while self.at(","):
            self.next()
            args.append(self.expr())
        self.expect(")")
        return tuple(args)

    def atom(self) -> Call:
        t = self.tok
        if t.kind != "name":
            self.error("expected a predicate name")
        self.next()
        adornment = None
        if t.adorn is not None:
            adornment = parse_condition(t.adorn)
        args = self.arglist() if self.at("(") else ()
        return Call(t.text, args, adornment)

    def literal(self) -> list:
        start = self.tok
        if start.kind == "name":
            call = self.atom()
            if call.name == "true" and not call.args and call.adornment is None:
                return []
            return [call]
        lhs = self.expr()
        if self.at("is"):
            self.next()
            if not isinstance(lhs, (Var, Int)):
                self.error("left side of 'is' must be a variable or integer", start)
            return [IsBinding(lhs, self.expr())]
        t = self.tok
        if t.kind == "op" and t.text in COMPARE_OPS + ("=",):
            self.next()
            rhs = self.expr()
            if t.text == "=":
                return [Compare("=<", lhs, rhs), Compare(">=", lhs, rhs)]
            return [Compare(t.text, lhs, rhs)]
        self.error("expected a comparison or 'is'")

    def pred_indicator(self) -> Pred:
        t = self.tok
        if t.kind != "name":
            self.error("expected name/arity")
        self.next()
        self.expect("/")
        a = self.tok
        if a.kind != "int":
            self.error("expected arity")
        self.next()
        return Pred(t.text, int(a.text))

    def directive(self) -> Directive:
        t = self.tok
        if t.kind != "name":
            self.error("expected a directive name")
        self.next()
        self.expect("(")
        pred = self.pred_indicator()
        if t.text == "analyze":
            d = Analyze(pred)
        elif t.text == "intpos":
            self.expect(",")
            self.expect("[")
            positions = []
            while not self.at("]"):
                p = self.tok
                if p.kind != "int":
                    self.error("expected a position")
                self.next()
                positions.append(int(p.text))
                if self.at(","):
                    self.next()
            self.next()
            bad = [i for i in positions if not 1 <= i <= pred.arity]
            if bad:
                self.error(f"position {bad[0]} out of range for {pred}", t)
            d = IntPos(pred, frozenset(positions))
        elif t.text == "interarg":
            self.expect(",")
            s = self.tok
            if s.kind != "string":
                self.error("expected a quoted condition")
            self.next()
            try:
                cond = parse_condition(s.text[1:-1])
            except ParseError as e:
                raise ParseError(f"in interarg condition: {e.msg}", s.line, s.col) from None
            bad = [k for k in cond.variables() if not _denom_in_range(k, pred.arity)]
            if bad:
                self.error(f"{bad[0]} out of range for {pred}", s)
            d = InterArg(pred, cond)
        else:
            self.error(f"unknown directive {t.text!r}", t)
        self.expect(")")
        return d

    def program(self) -> Program:
        clauses, directives = [], []
        while self.tok.kind != "eof":
            if self.at(":-"):
                self.next()
                directives.append(self.directive())
                self.expect(".")
                continue
            head = self.atom()
            body: list = []
            if self.at(":-"):
                self.next()
                body.extend(self.literal())
                while self.at(","):
                    self.next()
                    body.extend(self.literal())
            self.expect(".")
            clauses.append(Clause(head, tuple(body)))
        prog = Program(tuple(clauses), tuple(directives))
        _check_arities(prog)
        return prog


def _denom_in_range(key: str, arity: int) -> bool:
    return key.startswith("$") and 1 <= int(key[1:]) <= arity


def _check_arities(prog: Program) -> None:
    arity: dict = {}

    def note(name, n, where):
        if name in arity and arity[name] != n:
            raise ParseError(f"predicate {name} used with arity {arity[name]} and {n} ({where})")
        arity.setdefault(name, n)

    for i, c in enumerate(prog.clauses, 1):
        note(c.head.name, len(c.head.args), f"clause {i}")
        for lit in c.body:
            if isinstance(lit, Call):
                note(lit.name, len(lit.args), f"clause {i}")
    for d in prog.directives:
        note(d.pred.name, d.pred.arity, "directive")


def parse_program(text: str) -> Program:
    return _Parser(text).program()


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.expr()
    if p.tok.kind != "eof":
        p.error("trailing input")
    return t


def parse_query(text: str) -> Call:
    p = _Parser(text)
    c = p.atom()
    if p.at("."):
        p.next()
    if p.tok.kind != "eof":
        p.error("trailing input")
    return c


# --------------------------------------------------------------------------
# conditions


def parse_condition(text: str):
    """Parse ``$1 > 0 /\\ $2 =< $1 + $3`` style text into a DNF Condition."""
    from . import lincon

    p = _CondParser(text)
    dnf = p.disj()
    if p.tok.kind != "eof":
        p.error("trailing input in condition")
    return lincon.simplify(dnf)


class _CondParser(_Parser):
    def primary(self) -> Term:
        t = self.tok
        if t.kind == "denom":
            self.next()
            if int(t.text[1:]) < 1:
                self.error("argument positions start at 1", t)
            return Var(t.text)
        if t.kind == "var":
            self.next()
            return Var(t.text)
        return super().primary()

    def disj(self):
        from . import lincon

        c = self.conj()
        while self.at("\\/"):
            self.next()
            c = lincon.disjoin(c, self.conj())
        return c

    def conj(self):
        from . import lincon

        c = self.cond_atom()
        while self.at("/\\"):
            self.next()
            c = lincon.conjoin(c, self.cond_atom())
        return c

    def cond_atom(self):
        from . import lincon

        if self.at("true"):
            self.next()
            return lincon.TRUE
        if self.at("false"):
            self.next()
            return lincon.FALSE
        if self.at("("):
            # either a parenthesised condition or a parenthesised expression
            save = self.i
            self.next()
            try:
                c = self.disj()
                if self.at(")"):
                    self.next()
                    return c
            except ParseError:
                pass
            self.i = save
        start = self.tok
        lhs = self.expr()
        t = self.tok
        if not (t.kind == "op" and t.text in COMPARE_OPS + ("=",)):
            self.error("expected a comparison operator")
        self.next()
        rhs = self.expr()
        try:
            if t.text == "=":
                return lincon.Condition.of(
                    lincon.normalize("=<", lhs, rhs), lincon.normalize(">=", lhs, rhs))
            return lincon.Condition.of(lincon.normalize(t.text, lhs, rhs))
        except lincon.NonlinearAtom as e:
            raise ParseError(f"nonlinear atom in condition: {e}", start.line, start.col) from None


# --------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "div": 2}


def render_term(t: Term, prec: int = 0) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Int):
        s = str(t.value)
        return f"({s})" if t.value < 0 and prec > 2 else s
    if len(t.args) == 2 and t.functor in _PREC:
        p = _PREC[t.functor]
        left = render_term(t.args[0], p)
        right = render_term(t.args[1], p + 1)
        op = " div " if t.functor == "div" else f" {t.functor} "
        s = f"{left}{op}{right}"
        return f"({s})" if p < prec else s
    if t.functor == "-" and len(t.args) == 1:
        inner = render_term(t.args[0], 3)
        if isinstance(t.args[0], Int) and t.args[0].value >= 0:
            inner = f"({inner})"
        s = f"-{inner}"
        return f"({s})" if prec > 2 else s
    return f"{t.functor}({', '.join(render_term(a) for a in t.args)})"


def render_pred_name(name: str, adornment) -> str:
    if adornment is None:
        return name
    from . import lincon

    return f"{name}{{{lincon.render(adornment)}}}"


def render_literal(lit: Literal) -> str:
    if isinstance(lit, Call):
        name = render_pred_name(lit.name, lit.adornment)
        if not lit.args:
            return name
        return f"{name}({', '.join(render_term(a) for a in lit.args)})"
    if isinstance(lit, Compare):
        return f"{render_term(lit.lhs)} {lit.op} {render_term(lit.rhs)}"
    return f"{render_term(lit.target)} is {render_term(lit.expr)}"


def render_clause(c: Clause) -> str:
    head = render_literal(c.head)
    if not c.body:
        return f"{head}."
    return f"{head} :- {', '.join(render_literal(l) for l in c.body)}."


def render_directive(d: Directive) -> str:
    if isinstance(d, Analyze):
        return f":- analyze({d.pred.name}/{d.pred.arity})."
    if isinstance(d, IntPos):
        ps = ", ".join(str(i) for i in sorted(d.positions))
        return f":- intpos({d.pred.name}/{d.pred.arity}, [{ps}])."
    from . import lincon

    return f':- interarg({d.pred.name}/{d.pred.arity}, "{lincon.render(d.condition)}").'


def render_program(p: Program) -> str:
    lines = [render_directive(d) for d in p.directives]
    lines += [render_clause(c) for c in p.clauses]
    return "".join(line + "\n" for line in lines)
