"""Lexical entries and their instantiation against an f-structure.

Lexicon files hold one block per entry::

    entry support { glue: forall X,Y. (^ SUBJ)~X * (^ OBJ)~Y -o ^~supported(X, Y); }
    entry and {
        glue:  forall X,Y. (^ CONJ)~X * (^ CONJ)~Y -o ^~and(X, Y);
        glue!: forall X,Y. (^ CONJ)~X * ^~Y -o ^~and(X, Y);
    }
    entry two[det] { glue: forall H,S. (forall x. ^~x -o H~S(x)) -o H~two(z, %RESTR%(z), S(z)); }

In handle position ``^`` stands for the node carrying the PRED (or SPEC, or
CONJTYPE); ``glue!`` marks a template that may be used any number of times.
A ``[det]`` entry is looked up by a node's SPEC value, and ``%RESTR%`` is
replaced by that node's PRED.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import glue as g
from . import meaning as m
from .fstruct import Atomic, Complex, FStructure, RRelation, SemanticForm, SetNode, extract_r_relations
from .syntax import ParseError, TokenStream, tokenize

RESTR = "%RESTR%"


class LexiconError(ValueError):
    def __init__(self, message: str, label: str | None = None, key: str | None = None):
        self.label = label
        self.key = key
        super().__init__(message)


@dataclass(frozen=True)
class Template:
    formula: g.GlueFormula
    banged: bool = False


@dataclass(frozen=True)
class LexEntry:
    key: str
    templates: tuple[Template, ...]
    det: bool = False


@dataclass
class Lexicon:
    entries: dict[str, LexEntry] = field(default_factory=dict)

    def __contains__(self, key):
        return key in self.entries

    def __getitem__(self, key) -> LexEntry:
        return self.entries[key]

    def __len__(self):
        return len(self.entries)

    @property
    def determiners(self) -> frozenset[str]:
        return frozenset(k for k, e in self.entries.items() if e.det) | m.DEFAULT_DETERMINERS


@dataclass(frozen=True)
class Premise:
    ref: str
    formula: g.GlueFormula
    label: str
    key: str

    def __str__(self):
        return f"{self.ref} ({self.key}@{self.label}): {self.formula}"


@dataclass(frozen=True)
class PremiseSet:
    linear: tuple[Premise, ...]
    banged: tuple[Premise, ...]
    facts: tuple[RRelation, ...]
    determiners: frozenset[str] = m.DEFAULT_DETERMINERS

    def by_ref(self) -> dict[str, g.GlueFormula]:
        out = {p.ref: p.formula for p in self.linear + self.banged}
        for i, r in enumerate(self.facts):
            out[f"r{i}"] = fact_formula(r)
        return out

    def constant_rank(self) -> dict[str, int]:
        """Constants in order of first appearance in the premises."""
        rank: dict[str, int] = {}
        for p in self.linear + self.banged:
            for t in _terms(p.formula):
                for sub in m.subterms(t):
                    name = sub.name if isinstance(sub, m.Const) else getattr(sub, "det", None)
                    if name is not None and name not in rank:
                        rank[name] = len(rank)
        return rank


def fact_formula(r: RRelation) -> g.RAtom:
    return g.RAtom(r.parent, r.attr, r.child)


def _terms(f):
    if isinstance(f, g.MeansAtom):
        yield f.term
    elif isinstance(f, (g.Tensor,)):
        yield from _terms(f.left)
        yield from _terms(f.right)
    elif isinstance(f, g.Lolli):
        yield from _terms(f.antecedent)
        yield from _terms(f.consequent)
    elif isinstance(f, (g.Bang, g.Forall)):
        yield from _terms(f.body)


# ---------------------------------------------------------------------------
# parsing


def parse_lexicon(text: str, source: str | None = None) -> Lexicon:
    tokens = tokenize(text, source)
    dets = set(m.DEFAULT_DETERMINERS)
    for i, tok in enumerate(tokens[:-4]):
        if (tok.kind == "ident" and tok.text == "entry" and tokens[i + 2].kind == "["
                and tokens[i + 3].text == "det"):
            dets.add(tokens[i + 1].text)
    s = TokenStream(tokens, source)
    lex = Lexicon()
    while not s.done():
        if not s.at_word("entry"):
            raise s.error("expected 'entry'")
        s.next()
        key_tok = s.expect("ident")
        key = key_tok.text
        det = False
        if s.at("["):
            s.next()
            flag = s.expect("ident")
            if flag.text != "det":
                raise ParseError(f"unknown entry flag {flag.text!r}", flag.line, flag.column, source)
            det = True
            s.expect("]")
        if key in lex.entries:
            raise ParseError(f"duplicate entry {key!r}", key_tok.line, key_tok.column, source)
        s.expect("{")
        templates = []
        while not s.at("}"):
            word = s.expect("ident")
            if word.text != "glue":
                raise ParseError(f"expected 'glue', found {word.text!r}", word.line, word.column, source)
            banged = False
            if s.at("!"):
                s.next()
                banged = True
            s.expect(":")
            parser = g.GlueParser(s, frozenset(dets))
            start = s.peek()
            formula = parser.formula()
            if g.nesting(formula) > g.MAX_NESTING:
                raise ParseError("implications nested too deeply in antecedent position",
                                 start.line, start.column, source)
            s.expect(";")
            templates.append(Template(formula, banged))
        s.expect("}")
        if not templates:
            raise ParseError(f"entry {key!r} has no templates", key_tok.line, key_tok.column, source)
        lex.entries[key] = LexEntry(key, tuple(templates), det)
    return lex


# ---------------------------------------------------------------------------
# instantiation


def _slot(x, label):
    return label if x == g.UP else x


def fill_template(f: g.GlueFormula, label: str, restriction: str | None = None) -> g.GlueFormula:
    """Replace ``^`` by ``label`` (and ``%RESTR%`` by ``restriction``)."""
    if isinstance(f, g.MeansAtom):
        h = f.handle
        if isinstance(h, g.Proj):
            h = g.Proj(_slot(h.label, label), h.attr)
        term = f.term
        if restriction is not None:
            term = m.replace_subterm(term, m.Const(RESTR), m.Const(restriction))
        return g.MeansAtom(h, term)
    if isinstance(f, g.RAtom):
        return g.RAtom(_slot(f.parent, label), f.attr, _slot(f.child, label))
    if isinstance(f, g.Tensor):
        return g.Tensor(fill_template(f.left, label, restriction), fill_template(f.right, label, restriction))
    if isinstance(f, g.Lolli):
        return g.Lolli(fill_template(f.antecedent, label, restriction),
                       fill_template(f.consequent, label, restriction))
    if isinstance(f, g.Bang):
        return g.Bang(fill_template(f.body, label, restriction))
    if isinstance(f, g.Forall):
        return g.Forall(f.var, f.sort, fill_template(f.body, label, restriction))
    raise TypeError(f"not a glue formula: {f!r}")


def _value_text(v) -> str | None:
    if isinstance(v, SemanticForm):
        return v.pred
    if isinstance(v, Atomic):
        return v.value
    return None


def _lookup(lex: Lexicon, key: str, label: str, what: str) -> LexEntry:
    if key not in lex:
        raise LexiconError(f"no lexicon entry for {what} '{key}' at label {label}", label, key)
    return lex[key]


def instantiate_entries(fs: FStructure, lex: Lexicon) -> PremiseSet:
    """One instantiation per node, in document order, however many paths
    reach the node."""
    linear: list[Premise] = []
    banged: list[Premise] = []
    for label in fs.labels():
        node = fs.nodes[label]
        restriction = None
        if isinstance(node, SetNode):
            key = _value_text(node.get("CONJTYPE"))
            if key is None:
                continue
            entry = _lookup(lex, key, label, "CONJTYPE")
        else:
            assert isinstance(node, Complex)
            pred = _value_text(node.get("PRED"))
            spec = _value_text(node.get("SPEC"))
            if spec is not None:
                entry = _lookup(lex, spec, label, "SPEC")
                restriction = pred
            elif pred is not None:
                entry = _lookup(lex, pred, label, "PRED")
            else:
                continue
        for t in entry.templates:
            f = fill_template(t.formula, label, restriction)
            if t.banged:
                banged.append(Premise(f"b{len(banged)}", g.Bang(f), label, entry.key))
            else:
                linear.append(Premise(f"p{len(linear)}", f, label, entry.key))
    return PremiseSet(tuple(linear), tuple(banged), tuple(extract_r_relations(fs)), lex.determiners)
