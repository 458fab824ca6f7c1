"""Formula AST, concrete grammar, parser, printer, validation and metrics.

Grammar (ASCII):

    formula := quant | binary
    quant   := ("A"|"E") var "." formula
             | ("E2log[" int "]" | "A2log[" int "]") RELVAR ":" int "." formula
    binary  := chain of & | -> over unary, precedence ! > & > | > ->
    unary   := "!" unary | atom | "(" formula ")" | ifp
    ifp     := "ifp[" RELVAR "(" vars ")" "<-" formula "](" terms ")"
    atom    := NAME "(" terms ")" | term "=" term | term "<" term
             | "BIT(" term "," term ")"
    term    := var | INT | "logn"

Element variables are lowercase identifiers, relation names and relation
variables are uppercase identifiers.  "Ex" lexes as the quantifier E over
variable x when followed by "."; "E(x,y)" stays an atom.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .core import Signature
from .errors import (
    ArityMismatch,
    FormulaSyntaxError,
    IfpShapeError,
    OrderUsedUnordered,
    UnknownRelation,
)

# --- terms ---


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Lit:
    """Numeric literal: the i-th domain element under the built-in order."""

    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class LogN:
    """Built-in nullary term with value ceil_log(n)."""

    def __str__(self):
        return "logn"


Term = Var | Lit | LogN


# --- formulas ---


@dataclass(frozen=True)
class Atom:
    """Relation atom; `name` is either a signature relation or a relation
    variable, resolved by context."""

    name: str
    args: tuple


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Less:
    left: Term
    right: Term


@dataclass(frozen=True)
class Bit:
    """BIT(y, x): bit x of the binary expansion of element y is 1."""

    value: Term
    index: Term


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Ifp:
    """[IFP_{vars relvar} body](terms), |vars| == |terms| == arity(relvar)."""

    vars: tuple
    relvar: str
    body: "Formula"
    terms: tuple


@dataclass(frozen=True)
class ExistsLog:
    """Second-order exists over relations of size <= ceil_log(n)**k."""

    k: int
    relvar: str
    arity: int
    body: "Formula"


@dataclass(frozen=True)
class ForallLog:
    k: int
    relvar: str
    arity: int
    body: "Formula"


Formula = (
    Atom | Eq | Less | Bit | Not | And | Or | Implies
    | Exists | Forall | Ifp | ExistsLog | ForallLog
)

_BINARY = {And: "&", Or: "|", Implies: "->"}


def conj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        raise ValueError("empty conjunction")
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        raise ValueError("empty disjunction")
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


# --- pretty printer ---


def pretty(f: Formula) -> str:
    return _pp(f, operand=False)


def _pp(f: Formula, operand: bool) -> str:
    t = type(f)
    if t is Atom:
        return f"{f.name}({','.join(str(a) for a in f.args)})"
    if t is Eq:
        return f"{f.left}={f.right}"
    if t is Less:
        return f"{f.left}<{f.right}"
    if t is Bit:
        return f"BIT({f.value},{f.index})"
    if t is Not:
        inner = f.body
        if type(inner) in (Atom, Eq, Less, Bit, Ifp):
            return "!" + _pp(inner, True)
        return "!(" + _pp(inner, False) + ")"
    if t in _BINARY:
        return f"({_pp(f.left, True)} {_BINARY[t]} {_pp(f.right, True)})"
    if t is Exists:
        s = f"E{f.var}. {_pp(f.body, False)}"
    elif t is Forall:
        s = f"A{f.var}. {_pp(f.body, False)}"
    elif t is ExistsLog:
        s = f"E2log[{f.k}] {f.relvar}:{f.arity} . {_pp(f.body, False)}"
    elif t is ForallLog:
        s = f"A2log[{f.k}] {f.relvar}:{f.arity} . {_pp(f.body, False)}"
    elif t is Ifp:
        head = f"{f.relvar}({','.join(f.vars)})"
        return f"ifp[{head} <- {_pp(f.body, False)}]({','.join(str(x) for x in f.terms)})"
    else:
        raise TypeError(f"not a formula: {f!r}")
    return f"({s})" if operand else s


# --- lexer ---

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<int>\d+)|(?P<op>->|<-|[()\[\].,=<:!&|#]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise FormulaSyntaxError(at, "a token", text[at])
        if m.lastgroup is None and m.group().strip() == "":
            pos = m.end()
            continue
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


_QUANT_RE = re.compile(r"^([AE])([a-z][A-Za-z0-9_]*)$")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, ahead=0):
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        if tok[0] != "eof":
            self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.peek()
        if val != value:
            raise FormulaSyntaxError(pos, repr(value), val or "end of input")
        return self.next()

    def fail(self, expected):
        kind, val, pos = self.peek()
        raise FormulaSyntaxError(pos, expected, val or "end of input")

    # formula := quant | binary (implication is right-associative)
    def formula(self):
        q = self.try_quantifier()
        if q is not None:
            return q
        left = self.or_level()
        if self.peek()[1] == "->":
            self.next()
            return Implies(left, self.formula_after_arrow())
        return left

    def formula_after_arrow(self):
        q = self.try_quantifier()
        if q is not None:
            return q
        left = self.or_level()
        if self.peek()[1] == "->":
            self.next()
            return Implies(left, self.formula_after_arrow())
        return left

    def try_quantifier(self):
        kind, val, pos = self.peek()
        if kind != "ident":
            return None
        if val in ("E2log", "A2log") and self.peek(1)[1] == "[":
            self.next()
            self.expect("[")
            ktok = self.peek()
            if ktok[0] != "int":
                self.fail("an integer exponent")
            k = int(self.next()[1])
            self.expect("]")
            rv = self.peek()
            if rv[0] != "ident" or not rv[1][0].isupper():
                self.fail("a relation variable")
            relvar = self.next()[1]
            self.expect(":")
            atok = self.peek()
            if atok[0] != "int":
                self.fail("an arity")
            arity = int(self.next()[1])
            self.expect(".")
            body = self.formula()
            cls = ExistsLog if val == "E2log" else ForallLog
            if k < 1:
                raise FormulaSyntaxError(pos, "exponent k >= 1", str(k))
            if arity < 1:
                raise FormulaSyntaxError(pos, "arity >= 1", str(arity))
            return cls(k, relvar, arity, body)
        m = _QUANT_RE.match(val)
        if m and self.peek(1)[1] == ".":
            self.next()
            self.expect(".")
            body = self.formula()
            return (Exists if m.group(1) == "E" else Forall)(m.group(2), body)
        if val in ("E", "A") and self.peek(1)[0] == "ident" and self.peek(1)[1][0].islower() \
                and self.peek(2)[1] == ".":
            self.next()
            var = self.next()[1]
            self.expect(".")
            body = self.formula()
            return (Exists if val == "E" else Forall)(var, body)
        return None

    def or_level(self):
        left = self.and_level()
        while self.peek()[1] == "|":
            self.next()
            left = Or(left, self.and_level())
        return left

    def and_level(self):
        left = self.unary()
        while self.peek()[1] == "&":
            self.next()
            left = And(left, self.unary())
        return left

    def unary(self):
        # a quantifier may start an operand; its body extends maximally right
        q = self.try_quantifier()
        if q is not None:
            return q
        kind, val, pos = self.peek()
        if val == "!":
            self.next()
            return Not(self.unary())
        if val == "(":
            self.next()
            inner = self.formula()
            self.expect(")")
            return inner
        if val == "ifp":
            return self.ifp()
        return self.atom()

    def ifp(self):
        self.expect("ifp")
        self.expect("[")
        rv = self.peek()
        if rv[0] != "ident" or not rv[1][0].isupper():
            self.fail("a relation variable")
        relvar = self.next()[1]
        self.expect("(")
        vars_ = [self.var_name()]
        while self.peek()[1] == ",":
            self.next()
            vars_.append(self.var_name())
        self.expect(")")
        self.expect("<-")
        body = self.formula()
        self.expect("]")
        self.expect("(")
        terms = [self.term()]
        while self.peek()[1] == ",":
            self.next()
            terms.append(self.term())
        self.expect(")")
        return Ifp(tuple(vars_), relvar, body, tuple(terms))

    def var_name(self):
        kind, val, pos = self.peek()
        if kind != "ident" or not val[0].islower() or val == "logn":
            self.fail("an element variable")
        return self.next()[1]

    def term(self):
        kind, val, pos = self.peek()
        if kind == "int":
            self.next()
            return Lit(int(val))
        if kind == "ident" and val == "logn":
            self.next()
            return LogN()
        if kind == "ident" and val[0].islower():
            self.next()
            return Var(val)
        self.fail("a term")

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "ident" and val == "BIT":
            self.next()
            self.expect("(")
            value = self.term()
            self.expect(",")
            index = self.term()
            self.expect(")")
            return Bit(value, index)
        if kind == "ident" and val[0].isupper():
            name = self.next()[1]
            self.expect("(")
            args = [self.term()]
            while self.peek()[1] == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
            return Atom(name, tuple(args))
        left = self.term()
        op = self.peek()[1]
        if op == "=":
            self.next()
            return Eq(left, self.term())
        if op == "<":
            self.next()
            return Less(left, self.term())
        self.fail("'=' or '<'")


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    kind, val, pos = p.peek()
    if kind != "eof":
        raise FormulaSyntaxError(pos, "end of input", val)
    return f


# --- validation ---


def validate(f: Formula, sig: Signature):
    """Arity/order checks.  Returns (free element vars, {free relvar: arity})."""
    free_elem: set[str] = set()
    free_rel: dict[str, int] = {}

    def term_check(t: Term, bound: frozenset):
        if isinstance(t, Var):
            if t.name not in bound:
                free_elem.add(t.name)
        elif isinstance(t, (Lit, LogN)):
            if not sig.ordered:
                raise OrderUsedUnordered(f"term {t} needs the built-in order")
        else:
            raise TypeError(f"not a term: {t!r}")

    def relvar_seen(name: str, arity: int, bound_rel: dict):
        declared = bound_rel.get(name, free_rel.get(name))
        if declared is None:
            free_rel[name] = arity
        elif declared != arity:
            raise ArityMismatch(f"relation variable {name} used with arities {declared} and {arity}")

    def walk(g: Formula, bound: frozenset, bound_rel: dict):
        t = type(g)
        if t is Atom:
            for a in g.args:
                term_check(a, bound)
            if sig.has(g.name):
                if len(g.args) != sig.arity(g.name):
                    raise ArityMismatch(
                        f"{g.name} expects {sig.arity(g.name)} args, got {len(g.args)}"
                    )
            else:
                relvar_seen(g.name, len(g.args), bound_rel)
        elif t in (Eq, Less):
            if t is Less and not sig.ordered:
                raise OrderUsedUnordered("'<' used on an unordered signature")
            term_check(g.left, bound)
            term_check(g.right, bound)
        elif t is Bit:
            if not sig.ordered:
                raise OrderUsedUnordered("BIT used on an unordered signature")
            term_check(g.value, bound)
            term_check(g.index, bound)
        elif t is Not:
            walk(g.body, bound, bound_rel)
        elif t in (And, Or, Implies):
            walk(g.left, bound, bound_rel)
            walk(g.right, bound, bound_rel)
        elif t in (Exists, Forall):
            walk(g.body, bound | {g.var}, bound_rel)
        elif t in (ExistsLog, ForallLog):
            walk(g.body, bound, {**bound_rel, g.relvar: g.arity})
        elif t is Ifp:
            if len(g.vars) != len(g.terms):
                raise IfpShapeError(
                    f"ifp over {g.relvar}: {len(g.vars)} variables vs {len(g.terms)} terms"
                )
            if len(set(g.vars)) != len(g.vars):
                raise IfpShapeError(f"ifp variables {g.vars} not distinct")
            if sig.has(g.relvar):
                raise UnknownRelation(f"ifp variable {g.relvar} shadows a signature relation")
            for x in g.terms:
                term_check(x, bound)
            walk(g.body, bound | set(g.vars), {**bound_rel, g.relvar: len(g.vars)})
        else:
            raise TypeError(f"not a formula: {g!r}")

    walk(f, frozenset(), {})
    for name in free_rel:
        if sig.has(name):
            raise UnknownRelation(name)
    return frozenset(free_elem), dict(free_rel)


# --- metrics ---


@dataclass(frozen=True)
class Metrics:
    mva: int
    height: int
    lqr: int
    prenex_existential: bool
    num_element_vars: int


def lqr(f: Formula) -> int:
    t = type(f)
    if t in (Atom, Eq, Less, Bit):
        return 0
    if t is Not:
        return lqr(f.body)
    if t in (And, Or, Implies):
        return max(lqr(f.left), lqr(f.right))
    if t in (Exists, Forall):
        return lqr(f.body)
    if t in (ExistsLog, ForallLog):
        return lqr(f.body) + 1
    if t is Ifp:
        return lqr(f.body)
    raise TypeError(f"not a formula: {f!r}")


def height(f: Formula) -> int:
    t = type(f)
    if t in (Atom, Eq, Less, Bit):
        return 0
    if t is Not:
        return height(f.body)
    if t in (And, Or, Implies):
        return max(height(f.left), height(f.right))
    if t in (Exists, Forall):
        return height(f.body)
    if t in (ExistsLog, ForallLog):
        return max(f.k, height(f.body))
    if t is Ifp:
        return height(f.body)
    raise TypeError(f"not a formula: {f!r}")


def _has_log_quantifier(f: Formula) -> bool:
    return height(f) > 0


def _is_prenex_existential(f: Formula) -> bool:
    while type(f) is ExistsLog:
        f = f.body
    return not _has_log_quantifier(f)


def element_variables(f: Formula) -> frozenset:
    out: set[str] = set()

    def term(t):
        if isinstance(t, Var):
            out.add(t.name)

    def walk(g):
        t = type(g)
        if t is Atom:
            for a in g.args:
                term(a)
        elif t in (Eq, Less):
            term(g.left)
            term(g.right)
        elif t is Bit:
            term(g.value)
            term(g.index)
        elif t is Not:
            walk(g.body)
        elif t in (And, Or, Implies):
            walk(g.left)
            walk(g.right)
        elif t in (Exists, Forall):
            out.add(g.var)
            walk(g.body)
        elif t in (ExistsLog, ForallLog):
            walk(g.body)
        elif t is Ifp:
            out.update(g.vars)
            for x in g.terms:
                term(x)
            walk(g.body)

    walk(f)
    return frozenset(out)


def metrics(f: Formula, sig: Signature | None = None) -> Metrics:
    """mva counts relation variables that are free or log-quantified;
    names belonging to `sig` (when given) are relations, not variables."""
    arities: list[int] = []

    def is_sig(name):
        return sig is not None and sig.has(name)

    def walk(g, bound_rel: frozenset):
        t = type(g)
        if t is Atom:
            if not is_sig(g.name) and g.name not in bound_rel:
                arities.append(len(g.args))  # free relation variable
        elif t is Not:
            walk(g.body, bound_rel)
        elif t in (And, Or, Implies):
            walk(g.left, bound_rel)
            walk(g.right, bound_rel)
        elif t in (Exists, Forall):
            walk(g.body, bound_rel)
        elif t in (ExistsLog, ForallLog):
            arities.append(g.arity)
            walk(g.body, bound_rel | {g.relvar})
        elif t is Ifp:
            walk(g.body, bound_rel | {g.relvar})

    walk(f, frozenset())
    return Metrics(
        mva=max(arities, default=0),
        height=height(f),
        lqr=lqr(f),
        prenex_existential=_is_prenex_existential(f),
        num_element_vars=len(element_variables(f)),
    )
