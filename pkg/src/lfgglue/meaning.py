"""The meaning language: an untyped lambda calculus with constants,
intension/extension operators and three-place generalized quantifiers.

Terms are immutable.  ``normalize`` computes the beta-eta normal form with
the extra rule ``ˇ^M -> M``; ``alpha_equal`` compares terms up to renaming
of bound variables.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .syntax import TokenStream, tokenize

DEFAULT_MAX_STEPS = 10_000

DEFAULT_DETERMINERS = frozenset(
    {"a", "all", "every", "each", "some", "no", "most", "few", "many", "the",
     "two", "three", "four", "several"}
)

# Internal names (hypothesis constants, search metavariables) use prefixes the
# concrete syntax cannot produce.
RESERVED_PREFIXES = ("#", "?")


class NormalizationError(RuntimeError):
    """Raised when reduction exceeds the step bound."""


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Const:
    name: str
    arity: int | None = field(default=None, compare=False)

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class App:
    fun: "Term"
    args: tuple["Term", ...]

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise ValueError("application needs at least one argument")

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Lam:
    binder: str
    body: "Term"

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Intension:
    body: "Term"

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Extension:
    body: "Term"

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Quant:
    det: str
    binder: str
    restriction: "Term"
    scope: "Term"

    def __str__(self):
        return format_term(self)


Term = Union[Var, Const, App, Lam, Intension, Extension, Quant]
Substitution = Mapping[str, Term]


def is_reserved(name: str) -> bool:
    return name.startswith(RESERVED_PREFIXES)


# ---------------------------------------------------------------------------
# variables and substitution


def free_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Const):
        return frozenset()
    if isinstance(t, App):
        out = free_vars(t.fun)
        for a in t.args:
            out |= free_vars(a)
        return out
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.binder}
    if isinstance(t, (Intension, Extension)):
        return free_vars(t.body)
    if isinstance(t, Quant):
        return (free_vars(t.restriction) | free_vars(t.scope)) - {t.binder}
    raise TypeError(f"not a meaning term: {t!r}")


def constants(t: Term) -> set[str]:
    out: set[str] = set()
    for sub in subterms(t):
        if isinstance(sub, Const):
            out.add(sub.name)
        elif isinstance(sub, Quant):
            out.add(sub.det)
    return out


def subterms(t: Term):
    yield t
    if isinstance(t, App):
        yield from subterms(t.fun)
        for a in t.args:
            yield from subterms(a)
    elif isinstance(t, (Lam, Intension, Extension)):
        yield from subterms(t.body)
    elif isinstance(t, Quant):
        yield from subterms(t.restriction)
        yield from subterms(t.scope)


_SUFFIX = re.compile(r"\d+$")


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    if base not in avoid:
        return base
    stem = _SUFFIX.sub("", base) or "v"
    for i in itertools.count(1):
        cand = f"{stem}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


def substitute(t: Term, s: Substitution) -> Term:
    """Capture-avoiding simultaneous substitution of free variables."""
    if not s:
        return t
    return _subst(t, dict(s))


def _subst(t: Term, s: dict[str, Term]) -> Term:
    if isinstance(t, Var):
        return s.get(t.name, t)
    if isinstance(t, Const):
        return t
    if isinstance(t, App):
        return App(_subst(t.fun, s), tuple(_subst(a, s) for a in t.args))
    if isinstance(t, Intension):
        return Intension(_subst(t.body, s))
    if isinstance(t, Extension):
        return Extension(_subst(t.body, s))
    if isinstance(t, Lam):
        binder, body = _under_binder(t.binder, [t.body], s)
        return Lam(binder, body[0])
    if isinstance(t, Quant):
        binder, (r, sc) = _under_binder(t.binder, [t.restriction, t.scope], s)
        return Quant(t.det, binder, r, sc)
    raise TypeError(f"not a meaning term: {t!r}")


def _under_binder(binder: str, bodies: list[Term], s: dict[str, Term]):
    inner = {k: v for k, v in s.items() if k != binder}
    if not inner:
        return binder, bodies
    relevant = set()
    for b in bodies:
        relevant |= free_vars(b)
    inner = {k: v for k, v in inner.items() if k in relevant}
    if not inner:
        return binder, bodies
    incoming = set()
    for v in inner.values():
        incoming |= free_vars(v)
    if binder in incoming:
        new = fresh_name(binder, incoming | relevant | set(inner))
        inner[binder] = Var(new)
        binder = new
    return binder, [_subst(b, inner) for b in bodies]


def replace_subterm(t: Term, target: Term, repl: Term) -> Term:
    """Replace every occurrence of a closed subterm (no binder handling)."""
    if t == target:
        return repl
    if isinstance(t, App):
        return App(replace_subterm(t.fun, target, repl),
                   tuple(replace_subterm(a, target, repl) for a in t.args))
    if isinstance(t, Lam):
        return Lam(t.binder, replace_subterm(t.body, target, repl))
    if isinstance(t, Intension):
        return Intension(replace_subterm(t.body, target, repl))
    if isinstance(t, Extension):
        return Extension(replace_subterm(t.body, target, repl))
    if isinstance(t, Quant):
        return Quant(t.det, t.binder, replace_subterm(t.restriction, target, repl),
                     replace_subterm(t.scope, target, repl))
    return t


# ---------------------------------------------------------------------------
# normalization


class _Budget:
    def __init__(self, limit: int):
        self.left = limit

    def spend(self):
        self.left -= 1
        if self.left < 0:
            raise NormalizationError("reduction step bound exceeded")


def normalize(t: Term, max_steps: int = DEFAULT_MAX_STEPS) -> Term:
    """Beta-eta normal form, also cancelling ``ˇ^M`` to ``M``."""
    try:
        return _nf(t, _Budget(max_steps))
    except RecursionError:
        raise NormalizationError("term too deep to normalize") from None


def _nf(t: Term, budget: _Budget) -> Term:
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, Lam):
        body = _nf(t.body, budget)
        return _eta(Lam(t.binder, body))
    if isinstance(t, Intension):
        return Intension(_nf(t.body, budget))
    if isinstance(t, Extension):
        body = _nf(t.body, budget)
        if isinstance(body, Intension):
            budget.spend()
            return body.body
        return Extension(body)
    if isinstance(t, Quant):
        return Quant(t.det, t.binder, _nf(t.restriction, budget), _nf(t.scope, budget))
    if isinstance(t, App):
        fun = _nf(t.fun, budget)
        args = list(t.args)
        while args:
            if isinstance(fun, Lam):
                budget.spend()
                fun = _nf(substitute(fun.body, {fun.binder: args.pop(0)}), budget)
                continue
            if isinstance(fun, App):
                fun, args = fun.fun, list(fun.args) + args
                continue
            break
        if not args:
            return fun
        return App(fun, tuple(_nf(a, budget) for a in args))
    raise TypeError(f"not a meaning term: {t!r}")


def _eta(lam: Lam) -> Term:
    body = lam.body
    if (isinstance(body, App) and body.args[-1] == Var(lam.binder)):
        rest = body.args[:-1]
        head = body.fun if not rest else App(body.fun, rest)
        if lam.binder not in free_vars(head):
            return head
    return lam


def is_normal(t: Term) -> bool:
    for sub in subterms(t):
        if isinstance(sub, App) and isinstance(sub.fun, (Lam, App)):
            return False
        if isinstance(sub, Extension) and isinstance(sub.body, Intension):
            return False
        if isinstance(sub, Lam) and _eta(sub) is not sub:
            return False
    return True


# ---------------------------------------------------------------------------
# alpha-equivalence and canonical ordering


def alpha_equal(a: Term, b: Term) -> bool:
    return _alpha(a, b, {}, {}, 0)


def _alpha(a: Term, b: Term, env_a: dict, env_b: dict, depth: int) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        ia, ib = env_a.get(a.name), env_b.get(b.name)
        if ia is None and ib is None:
            return a.name == b.name
        return ia == ib
    if isinstance(a, Const):
        return a.name == b.name
    if isinstance(a, App):
        return (len(a.args) == len(b.args)
                and _alpha(a.fun, b.fun, env_a, env_b, depth)
                and all(_alpha(x, y, env_a, env_b, depth) for x, y in zip(a.args, b.args)))
    if isinstance(a, (Intension, Extension)):
        return _alpha(a.body, b.body, env_a, env_b, depth)
    if isinstance(a, Lam):
        return _alpha(a.body, b.body, {**env_a, a.binder: depth}, {**env_b, b.binder: depth}, depth + 1)
    if isinstance(a, Quant):
        if a.det != b.det:
            return False
        ea, eb = {**env_a, a.binder: depth}, {**env_b, b.binder: depth}
        return (_alpha(a.restriction, b.restriction, ea, eb, depth + 1)
                and _alpha(a.scope, b.scope, ea, eb, depth + 1))
    raise TypeError(f"not a meaning term: {a!r}")


def canonical_key(t: Term, rank: Mapping[str, int] | None = None):
    """A total-order key invariant under alpha-renaming.

    Constants are compared by ``rank`` first (unranked ones sort after all
    ranked ones), then by name.  Node kinds order as
    Const < Var < App < Quant < Lam < Intension < Extension.
    """
    rank = rank or {}
    big = len(rank) + 1

    def const_key(name):
        return (rank.get(name, big), name)

    def go(t, env, depth):
        if isinstance(t, Const):
            return (0, const_key(t.name))
        if isinstance(t, Var):
            if t.name in env:
                return (1, (0, depth - env[t.name], ""))
            return (1, (1, 0, t.name))
        if isinstance(t, App):
            return (2, go(t.fun, env, depth), tuple(go(a, env, depth) for a in t.args))
        if isinstance(t, Quant):
            inner = {**env, t.binder: depth + 1}
            return (3, const_key(t.det), go(t.restriction, inner, depth + 1),
                    go(t.scope, inner, depth + 1))
        if isinstance(t, Lam):
            return (4, go(t.body, {**env, t.binder: depth + 1}, depth + 1))
        if isinstance(t, Intension):
            return (5, go(t.body, env, depth))
        if isinstance(t, Extension):
            return (6, go(t.body, env, depth))
        raise TypeError(f"not a meaning term: {t!r}")

    return go(t, {}, 0)


def count_quantifiers(t: Term) -> int:
    return sum(1 for sub in subterms(t) if isinstance(sub, Quant))


# ---------------------------------------------------------------------------
# concrete syntax


def format_term(t: Term) -> str:
    if isinstance(t, (Var, Const)):
        return t.name
    if isinstance(t, App):
        if isinstance(t.fun, (Var, Const)):
            head = t.fun.name
        else:
            head = f"[{format_term(t.fun)}]"
        return f"{head}({', '.join(format_term(a) for a in t.args)})"
    if isinstance(t, Lam):
        return f"\\{t.binder}. {format_term(t.body)}"
    if isinstance(t, Intension):
        return "^" + format_term(t.body)
    if isinstance(t, Extension):
        return "ˇ" + format_term(t.body)
    if isinstance(t, Quant):
        return (f"{t.det}({t.binder}, {format_term(t.restriction)}, "
                f"{format_term(t.scope)})")
    raise TypeError(f"not a meaning term: {t!r}")


def parse_term(text: str, variables: Iterable[str] = (),
               determiners: Iterable[str] = DEFAULT_DETERMINERS) -> Term:
    """Parse a term.  Names in ``variables`` or bound by ``\\`` or a
    quantifier become ``Var``; every other name is a ``Const``."""
    stream = TokenStream(tokenize(text))
    parser = TermParser(stream, frozenset(determiners))
    t = parser.term(frozenset(variables))
    if not stream.done():
        raise stream.error(f"unexpected {stream.peek().text!r}")
    return t


class TermParser:
    """Recursive-descent term parser over a shared token stream, so the glue
    parser can embed terms."""

    def __init__(self, stream: TokenStream, determiners: frozenset[str] = DEFAULT_DETERMINERS,
                 on_name=None):
        self.s = stream
        self.determiners = determiners
        # hook for callers (the glue parser) that resolve names themselves
        self.on_name = on_name

    def term(self, bound: frozenset[str]) -> Term:
        s = self.s
        if s.at("\\"):
            s.next()
            names = [s.expect("ident").text]
            while s.at("ident"):
                names.append(s.next().text)
            s.expect(".")
            body = self.term(bound | set(names))
            for n in reversed(names):
                body = Lam(n, body)
            return body
        return self.prefix(bound)

    def prefix(self, bound) -> Term:
        s = self.s
        if s.at("^"):
            s.next()
            return Intension(self.prefix(bound))
        if s.at("ext"):
            s.next()
            return Extension(self.prefix(bound))
        return self.postfix(bound)

    def postfix(self, bound) -> Term:
        s = self.s
        tok = s.peek()
        if (tok is not None and tok.kind == "ident" and tok.text in self.determiners
                and s.at("(", 1) and s.at("ident", 2) and s.at(",", 3)):
            s.next()
            s.next()
            binder = s.next().text
            s.next()
            inner = bound | {binder}
            restr = self.term(inner)
            s.expect(",")
            scope = self.term(inner)
            s.expect(")")
            t: Term = Quant(tok.text, binder, restr, scope)
        else:
            t = self.primary(bound)
        while s.at("("):
            s.next()
            args = [self.term(bound)]
            while s.at(","):
                s.next()
                args.append(self.term(bound))
            s.expect(")")
            t = App(t, tuple(args))
        return t

    def primary(self, bound) -> Term:
        s = self.s
        if s.at("("):
            s.next()
            t = self.term(bound)
            s.expect(")")
            return t
        if s.at("["):
            s.next()
            t = self.term(bound)
            s.expect("]")
            return t
        if s.at("\\"):
            return self.term(bound)
        tok = s.peek()
        if tok is None or tok.kind != "ident":
            found = "end of input" if tok is None else repr(tok.text)
            raise s.error(f"expected a term, found {found}")
        s.next()
        if self.on_name is not None:
            return self.on_name(tok, bound)
        if tok.text in bound:
            return Var(tok.text)
        return Const(tok.text)

