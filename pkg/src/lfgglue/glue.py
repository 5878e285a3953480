"""The glue language: the tensor fragment of linear logic over meaning atoms
``handle ~ term`` and R-relation atoms, with sorted universal quantification
and the bang modality.

DSL::

    forall X,Y. (f SUBJ)~X * (f OBJ)~Y -o f~supported(X, Y)
    ! forall X,Y. (f CONJ)~X * f~Y -o f~and(X, Y)
    forall H,S. (forall x. h~x -o H~S(x)) -o H~two(z, trade-bill(z), S(z))

``-o`` is right-associative and binds loosest, then ``*``, then the prefix
``!``.  Variable sorts are inferred from names unless annotated
(``forall v:handle.``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from . import meaning as m
from .meaning import Term
from .syntax import ParseError, Token, TokenStream, tokenize

UP = "^"  # the metavariable for the f-structure of the lexical item
MAX_NESTING = 3


class Sort(enum.Enum):
    MEANING = "meaning"
    FUNCTION = "function"
    HANDLE = "handle"
    LABEL = "label"
    ATTR = "attr"

    @property
    def is_term(self):
        return self in (Sort.MEANING, Sort.FUNCTION)


def infer_sort(name: str) -> Sort:
    head = name[0]
    if head == "H" or (head == "s" and (len(name) == 1 or name[1:].isdigit())):
        return Sort.HANDLE
    if head in "FG":
        return Sort.LABEL
    if head == "P":
        return Sort.ATTR
    if head in "SQ":
        return Sort.FUNCTION
    return Sort.MEANING


class SortError(ValueError):
    pass


@dataclass(frozen=True)
class GVar:
    """A glue-level variable standing for a handle, label or attribute."""
    name: str

    def __str__(self):
        return self.name


LabelSlot = Union[str, GVar]


@dataclass(frozen=True)
class Proj:
    """Semantic projection of a label, or of a length-1 path from a label."""
    label: LabelSlot
    attr: LabelSlot | None = None

    def __str__(self):
        return format_handle(self)


Handle = Union[Proj, GVar]


@dataclass(frozen=True)
class MeansAtom:
    handle: Handle
    term: Term

    def __str__(self):
        return format_glue(self)


@dataclass(frozen=True)
class RAtom:
    parent: LabelSlot
    attr: LabelSlot
    child: LabelSlot

    def __str__(self):
        return format_glue(self)


@dataclass(frozen=True)
class Tensor:
    left: "GlueFormula"
    right: "GlueFormula"

    def __str__(self):
        return format_glue(self)


@dataclass(frozen=True)
class Lolli:
    antecedent: "GlueFormula"
    consequent: "GlueFormula"

    def __str__(self):
        return format_glue(self)


@dataclass(frozen=True)
class Bang:
    body: "GlueFormula"

    def __str__(self):
        return format_glue(self)


@dataclass(frozen=True)
class Forall:
    var: str
    sort: Sort
    body: "GlueFormula"

    def __str__(self):
        return format_glue(self)


GlueFormula = Union[MeansAtom, RAtom, Tensor, Lolli, Bang, Forall]
Atom = (MeansAtom, RAtom)


def tensor_of(parts: list[GlueFormula]) -> GlueFormula:
    out = parts[0]
    for p in parts[1:]:
        out = Tensor(out, p)
    return out


def tensor_parts(f: GlueFormula) -> list[GlueFormula]:
    if isinstance(f, Tensor):
        return tensor_parts(f.left) + tensor_parts(f.right)
    return [f]


def strip_foralls(f: GlueFormula) -> tuple[list[tuple[str, Sort]], GlueFormula]:
    out = []
    while isinstance(f, Forall):
        out.append((f.var, f.sort))
        f = f.body
    return out, f


def nesting(f: GlueFormula) -> int:
    """Implication depth, counting one level per antecedent nesting."""
    if isinstance(f, Lolli):
        return max(1 + nesting(f.antecedent), nesting(f.consequent))
    if isinstance(f, Tensor):
        return max(nesting(f.left), nesting(f.right))
    if isinstance(f, (Bang, Forall)):
        return nesting(f.body)
    return 0


# ---------------------------------------------------------------------------
# printing


def format_handle(h: Handle) -> str:
    if isinstance(h, GVar):
        return h.name
    if h.attr is None:
        return str(h.label)
    return f"({h.label} {h.attr})"


def format_glue(f: GlueFormula, ctx: str = "formula") -> str:
    if isinstance(f, MeansAtom):
        return f"{format_handle(f.handle)}~{m.format_term(f.term)}"
    if isinstance(f, RAtom):
        return f"R({f.parent}, {f.attr}, {f.child})"
    if isinstance(f, Bang):
        if isinstance(f.body, Atom):
            return "!" + format_glue(f.body)
        return f"!({format_glue(f.body)})"
    if isinstance(f, Forall):
        chain, body = strip_foralls(f)
        names = ",".join(v if s == infer_sort(v) else f"{v}:{s.value}" for v, s in chain)
        text = f"forall {names}. {format_glue(body)}"
        return text if ctx == "formula" else f"({text})"
    if isinstance(f, Lolli):
        text = f"{format_glue(f.antecedent, 'antecedent')} -o {format_glue(f.consequent)}"
        return text if ctx == "formula" else f"({text})"
    if isinstance(f, Tensor):
        text = f"{format_glue(f.left, 'antecedent')} * {format_glue(f.right, 'factor')}"
        return text if ctx in ("formula", "antecedent") else f"({text})"
    raise TypeError(f"not a glue formula: {f!r}")


# ---------------------------------------------------------------------------
# parsing


def _is_single_var_name(name: str) -> bool:
    return len(name) == 1 and name.isupper()


class GlueParser:
    def __init__(self, stream: TokenStream, determiners=m.DEFAULT_DETERMINERS):
        self.s = stream
        self.terms = m.TermParser(stream, frozenset(determiners), on_name=self._term_name)
        self.scope: dict[str, Sort] = {}

    # names inside meaning terms
    def _term_name(self, tok: Token, bound):
        name = tok.text
        if name in bound:
            return m.Var(name)
        sort = self.scope.get(name)
        if sort is not None:
            if not sort.is_term:
                raise self._err(tok, f"sort clash: {sort.value} variable {name} used as a meaning")
            return m.Var(name)
        if _is_single_var_name(name):
            raise self._err(tok, f"unbound variable {name}")
        return m.Const(name)

    def _err(self, tok: Token, msg: str) -> ParseError:
        return ParseError(msg, tok.line, tok.column, self.s.source)

    def formula(self) -> GlueFormula:
        s = self.s
        if s.at_word("forall"):
            s.next()
            decls = []
            while True:
                tok = s.expect("ident")
                if s.at(":"):
                    s.next()
                    sort_tok = s.expect("ident")
                    try:
                        sort = Sort(sort_tok.text)
                    except ValueError:
                        raise self._err(sort_tok, f"unknown sort {sort_tok.text!r}") from None
                else:
                    sort = infer_sort(tok.text)
                decls.append((tok.text, sort))
                if not s.at(","):
                    break
                s.next()
            s.expect(".")
            saved = dict(self.scope)
            for name, sort in decls:
                self.scope[name] = sort
            try:
                body = self.formula()
            finally:
                self.scope = saved
            for name, sort in reversed(decls):
                body = Forall(name, sort, body)
            return body
        left = self.tensor()
        if s.at("lolli"):
            s.next()
            return Lolli(left, self.formula())
        return left

    def tensor(self) -> GlueFormula:
        left = self.unary()
        while self.s.at("*"):
            self.s.next()
            left = Tensor(left, self.unary())
        return left

    def unary(self) -> GlueFormula:
        s = self.s
        if s.at("!"):
            s.next()
            return Bang(self.unary())
        if s.at_word("forall"):
            return self.formula()
        if s.at("(") and not self._handle_ahead():
            s.next()
            f = self.formula()
            s.expect(")")
            return f
        return self.atom()

    def _handle_ahead(self) -> bool:
        s = self.s
        return ((s.at("ident", 1) or s.at("^", 1)) and s.at("ident", 2)
                and s.at(")", 3) and s.at("~", 4))

    def atom(self) -> GlueFormula:
        s = self.s
        if s.at_word("R") and s.at("(", 1):
            s.next()
            s.next()
            parent = self.label_slot()
            s.expect(",")
            attr = self.attr_slot()
            s.expect(",")
            child = self.label_slot()
            s.expect(")")
            return RAtom(parent, attr, child)
        handle = self.handle()
        s.expect("~")
        term = self.terms.term(frozenset())
        return MeansAtom(handle, term)

    def handle(self) -> Handle:
        s = self.s
        if s.at("("):
            s.next()
            base = self.label_slot()
            attr = self.attr_slot()
            s.expect(")")
            return Proj(base, attr)
        if s.at("^"):
            s.next()
            return Proj(UP)
        tok = s.expect("ident")
        sort = self.scope.get(tok.text)
        if sort is Sort.HANDLE:
            return GVar(tok.text)
        if sort is Sort.LABEL:
            return Proj(GVar(tok.text))
        if sort is not None:
            raise self._err(tok, f"sort clash: {sort.value} variable {tok.text} used as a handle")
        if _is_single_var_name(tok.text):
            raise self._err(tok, f"unbound variable {tok.text}")
        return Proj(tok.text)

    def label_slot(self) -> LabelSlot:
        s = self.s
        if s.at("^"):
            s.next()
            return UP
        tok = s.expect("ident")
        sort = self.scope.get(tok.text)
        if sort is Sort.LABEL:
            return GVar(tok.text)
        if sort is not None:
            raise self._err(tok, f"sort clash: {sort.value} variable {tok.text} used as a label")
        if _is_single_var_name(tok.text):
            raise self._err(tok, f"unbound variable {tok.text}")
        return tok.text

    def attr_slot(self) -> LabelSlot:
        tok = self.s.expect("ident")
        sort = self.scope.get(tok.text)
        if sort is Sort.ATTR:
            return GVar(tok.text)
        if sort is not None:
            raise self._err(tok, f"sort clash: {sort.value} variable {tok.text} used as an attribute")
        if _is_single_var_name(tok.text):
            raise self._err(tok, f"unbound variable {tok.text}")
        return tok.text.upper()


def parse_glue(text: str, determiners: Iterable[str] = m.DEFAULT_DETERMINERS,
               source: str | None = None, line_offset: int = 0) -> GlueFormula:
    tokens = tokenize(text, source)
    if line_offset:
        tokens = [Token(t.kind, t.text, t.line + line_offset, t.column) for t in tokens]
    stream = TokenStream(tokens, source)
    parser = GlueParser(stream, frozenset(determiners))
    f = parser.formula()
    if not stream.done():
        raise stream.error(f"unexpected {stream.peek().text!r}")
    if nesting(f) > MAX_NESTING:
        first = tokens[0]
        raise ParseError("implications nested too deeply in antecedent position",
                         first.line, first.column, source)
    return f


# ---------------------------------------------------------------------------
# variables, substitution, instantiation


def glue_free_vars(f) -> tuple[set[str], set[str]]:
    """(free meaning variables, free glue variables)."""
    if isinstance(f, MeansAtom):
        return set(m.free_vars(f.term)), _handle_vars(f.handle)
    if isinstance(f, RAtom):
        return set(), {x.name for x in (f.parent, f.attr, f.child) if isinstance(x, GVar)}
    if isinstance(f, (Tensor, Lolli)):
        a, b = (f.left, f.right) if isinstance(f, Tensor) else (f.antecedent, f.consequent)
        ma, ga = glue_free_vars(a)
        mb, gb = glue_free_vars(b)
        return ma | mb, ga | gb
    if isinstance(f, Bang):
        return glue_free_vars(f.body)
    if isinstance(f, Forall):
        mv, gv = glue_free_vars(f.body)
        return mv - {f.var}, gv - {f.var}
    raise TypeError(f"not a glue formula: {f!r}")


def _handle_vars(h: Handle) -> set[str]:
    if isinstance(h, GVar):
        return {h.name}
    return {x.name for x in (h.label, h.attr) if isinstance(x, GVar)}


def is_closed(f: GlueFormula) -> bool:
    mv, gv = glue_free_vars(f)
    return not mv and not gv


def _value_vars(v) -> set[str]:
    if isinstance(v, GVar):
        return {v.name}
    if isinstance(v, Proj):
        return _handle_vars(v)
    if isinstance(v, str):
        return set()
    return set(m.free_vars(v))


def subst_handle(h: Handle, gsub: Mapping[str, object]) -> Handle:
    if isinstance(h, GVar):
        return gsub.get(h.name, h)
    label = gsub.get(h.label.name, h.label) if isinstance(h.label, GVar) else h.label
    attr = gsub.get(h.attr.name, h.attr) if isinstance(h.attr, GVar) else h.attr
    return Proj(label, attr)


def _subst_slot(x, gsub):
    return gsub.get(x.name, x) if isinstance(x, GVar) else x


def subst_formula(f: GlueFormula, msub: Mapping[str, Term] | None = None,
                  gsub: Mapping[str, object] | None = None) -> GlueFormula:
    """Capture-avoiding substitution of meaning and glue variables."""
    msub = dict(msub or {})
    gsub = dict(gsub or {})
    if not msub and not gsub:
        return f
    return _subst(f, msub, gsub)


def _subst(f, msub, gsub):
    if isinstance(f, MeansAtom):
        return MeansAtom(subst_handle(f.handle, gsub), m.substitute(f.term, msub))
    if isinstance(f, RAtom):
        return RAtom(_subst_slot(f.parent, gsub), _subst_slot(f.attr, gsub), _subst_slot(f.child, gsub))
    if isinstance(f, Tensor):
        return Tensor(_subst(f.left, msub, gsub), _subst(f.right, msub, gsub))
    if isinstance(f, Lolli):
        return Lolli(_subst(f.antecedent, msub, gsub), _subst(f.consequent, msub, gsub))
    if isinstance(f, Bang):
        return Bang(_subst(f.body, msub, gsub))
    if isinstance(f, Forall):
        msub = {k: v for k, v in msub.items() if k != f.var}
        gsub = {k: v for k, v in gsub.items() if k != f.var}
        if not msub and not gsub:
            return f
        incoming = set()
        for v in list(msub.values()) + list(gsub.values()):
            incoming |= _value_vars(v)
        var = f.var
        body = f.body
        if var in incoming:
            mv, gv = glue_free_vars(body)
            new = m.fresh_name(var, incoming | mv | gv | set(msub) | set(gsub))
            if f.sort.is_term:
                body = _subst(body, {var: m.Var(new)}, {})
            else:
                body = _subst(body, {}, {var: GVar(new)})
            var = new
        return Forall(var, f.sort, _subst(body, msub, gsub))
    raise TypeError(f"not a glue formula: {f!r}")


def map_terms(f: GlueFormula, fn) -> GlueFormula:
    if isinstance(f, MeansAtom):
        return MeansAtom(f.handle, fn(f.term))
    if isinstance(f, RAtom):
        return f
    if isinstance(f, Tensor):
        return Tensor(map_terms(f.left, fn), map_terms(f.right, fn))
    if isinstance(f, Lolli):
        return Lolli(map_terms(f.antecedent, fn), map_terms(f.consequent, fn))
    if isinstance(f, Bang):
        return Bang(map_terms(f.body, fn))
    if isinstance(f, Forall):
        return Forall(f.var, f.sort, map_terms(f.body, fn))
    raise TypeError(f"not a glue formula: {f!r}")


def normalize_formula(f: GlueFormula) -> GlueFormula:
    return map_terms(f, m.normalize)


def check_sort(name: str, sort: Sort, value) -> None:
    if sort.is_term:
        ok = _is_term(value)
    elif sort is Sort.HANDLE:
        ok = isinstance(value, (Proj, GVar))
    else:
        ok = isinstance(value, (str, GVar))
    if not ok:
        raise SortError(f"sort clash: {name} is a {sort.value} variable, got {value!r}")


def _is_term(v) -> bool:
    return isinstance(v, (m.Var, m.Const, m.App, m.Lam, m.Intension, m.Extension, m.Quant))


def instantiate(f: GlueFormula, bindings: Mapping[str, object]) -> GlueFormula:
    """Universal instantiation of the outermost quantifier prefix.

    Unbound prefix variables keep their quantifiers; meaning terms in the
    result are normalized.
    """
    chain, body = strip_foralls(f)
    sorts = dict(chain)
    for name, value in bindings.items():
        if name not in sorts:
            raise SortError(f"unbound target variable {name}")
        check_sort(name, sorts[name], value)
    msub = {k: v for k, v in bindings.items() if sorts[k].is_term}
    gsub = {k: v for k, v in bindings.items() if not sorts[k].is_term}
    remaining = [(v, s) for v, s in chain if v not in bindings]
    out = body
    for var, sort in reversed(remaining):
        out = Forall(var, sort, out)
    return normalize_formula(subst_formula(out, msub, gsub))


# ---------------------------------------------------------------------------
# equality up to renaming and normalization


def formula_equal(a: GlueFormula, b: GlueFormula) -> bool:
    return _feq(a, b, {}, {}, 0)


def _rename_term(t: Term, ren: Mapping[str, str]) -> Term:
    return m.substitute(t, {k: m.Var(v) for k, v in ren.items()})


def _slot_eq(x, y, ra, rb) -> bool:
    if isinstance(x, GVar) and isinstance(y, GVar):
        return ra.get(x.name, x.name) == rb.get(y.name, y.name)
    if isinstance(x, GVar) or isinstance(y, GVar):
        return False
    return x == y


def _handle_eq(x: Handle, y: Handle, ra, rb) -> bool:
    if isinstance(x, GVar) or isinstance(y, GVar):
        return isinstance(x, GVar) and isinstance(y, GVar) and _slot_eq(x, y, ra, rb)
    if (x.attr is None) != (y.attr is None):
        return False
    return _slot_eq(x.label, y.label, ra, rb) and (x.attr is None or _slot_eq(x.attr, y.attr, ra, rb))


def _feq(a, b, ra, rb, depth) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, MeansAtom):
        if not _handle_eq(a.handle, b.handle, ra, rb):
            return False
        ta = m.normalize(_rename_term(a.term, ra))
        tb = m.normalize(_rename_term(b.term, rb))
        return m.alpha_equal(ta, tb)
    if isinstance(a, RAtom):
        return all(_slot_eq(x, y, ra, rb) for x, y in
                   ((a.parent, b.parent), (a.attr, b.attr), (a.child, b.child)))
    if isinstance(a, Tensor):
        return _feq(a.left, b.left, ra, rb, depth) and _feq(a.right, b.right, ra, rb, depth)
    if isinstance(a, Lolli):
        return (_feq(a.antecedent, b.antecedent, ra, rb, depth)
                and _feq(a.consequent, b.consequent, ra, rb, depth))
    if isinstance(a, Bang):
        return _feq(a.body, b.body, ra, rb, depth)
    if isinstance(a, Forall):
        if a.sort != b.sort:
            return False
        canon = f"${depth}"
        return _feq(a.body, b.body, {**ra, a.var: canon}, {**rb, b.var: canon}, depth + 1)
    raise TypeError(f"not a glue formula: {a!r}")


# ---------------------------------------------------------------------------
# built-in schemata

AXIOM_I = parse_glue("! forall F,G,P,X. G~X -o !(R(F, P, G) -o (F P)~X)")

QNP_DUPLICATION = parse_glue(
    "!(forall F,Q. (forall H,S. (forall x. F~x -o H~S(x)) -o H~Q(S))"
    " -o (forall H,S. (forall x. F~x -o H~S(x)) -o H~Q(S))"
    " * (forall H,S. (forall x. F~x -o H~S(x)) -o H~Q(S)))"
)


def axiom_i_consequence(label: str, meaning: Term) -> GlueFormula:
    """What Axiom I yields from ``label ~ meaning``:
    ``!(forall F,P. R(F,P,label) -o (F P)~meaning)``."""
    f_var, p_var = GVar("F"), GVar("P")
    inner = Lolli(RAtom(f_var, p_var, label), MeansAtom(Proj(f_var, p_var), meaning))
    return Bang(Forall("F", Sort.LABEL, Forall("P", Sort.ATTR, inner)))


def qnp_site(f: GlueFormula) -> str | None:
    """If ``f`` has the quantified-NP constructor shape
    ``forall H,S. (forall x. l~x -o H~S(x)) -o H~M``, return ``l``."""
    chain, body = strip_foralls(f)
    sorts = dict(chain)
    if not isinstance(body, Lolli) or not isinstance(body.consequent, MeansAtom):
        return None
    head = body.consequent.handle
    if not isinstance(head, GVar) or sorts.get(head.name) is not Sort.HANDLE:
        return None
    ant = body.antecedent
    if not isinstance(ant, Forall) or not ant.sort.is_term:
        return None
    inner = ant.body
    if not (isinstance(inner, Lolli) and isinstance(inner.antecedent, MeansAtom)
            and isinstance(inner.consequent, MeansAtom)):
        return None
    hyp, goal = inner.antecedent, inner.consequent
    if hyp.term != m.Var(ant.var) or not isinstance(hyp.handle, Proj) or hyp.handle.attr is not None:
        return None
    if goal.handle != head:
        return None
    t = goal.term
    if not (isinstance(t, m.App) and isinstance(t.fun, m.Var) and t.args == (m.Var(ant.var),)
            and sorts.get(t.fun.name) in (Sort.FUNCTION, Sort.MEANING)):
        return None
    label = hyp.handle.label
    return label if isinstance(label, str) else None
