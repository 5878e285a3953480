"""Labeled, re-entrant f-structures, their path sets and R-relations.

Text format::

    f:[ PRED 'support' SUBJ g:[PRED 'Bill'] OBJ h:[PRED 'nafta'] ]
    f:{ CONJTYPE 'and' | f1:[ ... ], f2:[ ... ] }

A bare label as a value refers back to a node defined elsewhere, which is how
structure sharing is written.  Attribute values in single quotes are semantic
forms, in double quotes atoms.  Set nodes may carry atomic attributes before a
``|``; membership edges count as the attribute ``CONJ``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .syntax import ParseError

CONJ = "CONJ"

Path = tuple[str, ...]


class FStructureError(ValueError):
    pass


def attr_name(name: str) -> str:
    if not name:
        raise ValueError("attribute name must be nonempty")
    return name.upper()


@dataclass(frozen=True)
class Atomic:
    value: str


@dataclass(frozen=True)
class SemanticForm:
    pred: str


Value = Union[Atomic, SemanticForm, str]  # str is a node Label


@dataclass(frozen=True)
class Complex:
    attrs: tuple[tuple[str, Value], ...]

    def get(self, attr: str):
        for a, v in self.attrs:
            if a == attr:
                return v
        return None


@dataclass(frozen=True)
class SetNode:
    members: tuple[str, ...]
    attrs: tuple[tuple[str, Value], ...] = ()

    def get(self, attr: str):
        for a, v in self.attrs:
            if a == attr:
                return v
        return None


Node = Union[Complex, SetNode]


@dataclass(frozen=True)
class RRelation:
    parent: str
    attr: str
    child: str

    def __str__(self):
        return f"R({self.parent}, {self.attr}, {self.child})"


@dataclass(frozen=True)
class PathSet:
    owner: str
    paths: frozenset[Path]


@dataclass(frozen=True)
class FStructure:
    root: str
    nodes: Mapping[str, Node]

    def __post_init__(self):
        object.__setattr__(self, "nodes", dict(self.nodes))
        self._validate()

    def __hash__(self):
        return hash((self.root, tuple(sorted(self.nodes))))

    def _validate(self):
        if self.root not in self.nodes:
            raise FStructureError(f"root label {self.root!r} has no node")
        for label, node in self.nodes.items():
            for _, child in self.node_edges(label):
                if child not in self.nodes:
                    raise FStructureError(f"node {label!r} refers to undefined label {child!r}")
            if isinstance(node, SetNode) and len(set(node.members)) != len(node.members):
                raise FStructureError(f"set node {label!r} lists a member twice")
            if isinstance(node, SetNode):
                for attr, v in node.attrs:
                    if isinstance(v, str):
                        raise FStructureError(
                            f"set node {label!r}: attribute {attr} must be atomic")
        order = self.labels()
        orphans = set(self.nodes) - set(order)
        if orphans:
            raise FStructureError(f"unreachable nodes: {', '.join(sorted(orphans))}")
        self._check_acyclic()

    def _check_acyclic(self):
        state: dict[str, int] = {}

        def visit(label, trail):
            state[label] = 1
            for _, child in self.node_edges(label):
                if state.get(child) == 1:
                    cycle = " -> ".join(trail + [label, child])
                    raise FStructureError(f"cycle detected: {cycle}")
                if child not in state:
                    visit(child, trail + [label])
            state[label] = 2

        visit(self.root, [])

    def node_edges(self, label: str) -> Iterator[tuple[str, str]]:
        """Outgoing (attribute, child label) edges; set members use CONJ."""
        node = self.nodes[label]
        if isinstance(node, SetNode):
            for m in node.members:
                yield CONJ, m
        else:
            for attr, v in node.attrs:
                if isinstance(v, str):
                    yield attr, v

    def edges(self) -> Iterator[tuple[str, str, str]]:
        for label in self.labels():
            for attr, child in self.node_edges(label):
                yield label, attr, child

    def labels(self) -> list[str]:
        """Labels in document order (pre-order, first occurrence)."""
        seen: list[str] = []
        marked = set()

        def visit(label):
            if label in marked:
                return
            marked.add(label)
            seen.append(label)
            for _, child in self.node_edges(label):
                if child in self.nodes:
                    visit(child)

        visit(self.root)
        return seen

    def relabel(self, mapping: Mapping[str, str]) -> "FStructure":
        def m(v):
            return mapping.get(v, v) if isinstance(v, str) else v

        nodes = {}
        for label, node in self.nodes.items():
            if isinstance(node, SetNode):
                new = SetNode(tuple(m(x) for x in node.members), node.attrs)
            else:
                new = Complex(tuple((a, m(v)) for a, v in node.attrs))
            nodes[mapping.get(label, label)] = new
        return FStructure(mapping.get(self.root, self.root), nodes)


# ---------------------------------------------------------------------------
# path sets and R-relations


def path_sets(fs: FStructure) -> dict[str, PathSet]:
    """All root paths reaching each node.  Set membership steps are written
    ``CONJ:i`` (1-based member position) so that distinct members give
    distinct paths."""
    paths: dict[str, set[Path]] = {label: set() for label in fs.nodes}

    def walk(label, prefix):
        paths[label].add(prefix)
        node = fs.nodes[label]
        if isinstance(node, SetNode):
            for i, m in enumerate(node.members, 1):
                walk(m, prefix + (f"{CONJ}:{i}",))
        else:
            for attr, v in node.attrs:
                if isinstance(v, str):
                    walk(v, prefix + (attr,))

    walk(fs.root, ())
    return {label: PathSet(label, frozenset(ps)) for label, ps in paths.items()}


def extract_r_relations(fs: FStructure) -> list[RRelation]:
    """One R-relation per attribute edge and per set-membership edge, in
    document order."""
    return [RRelation(p, a, c) for p, a, c in fs.edges()]


def path_step_attr(step: str) -> str:
    return step.split(":", 1)[0]


# ---------------------------------------------------------------------------
# text format

_FS_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<sform>'[^'\n]*')
  | (?P<atom>"[^"\n]*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_\-]*)
  | (?P<punct>[:\[\]{},|])
    """,
    re.VERBOSE,
)


def _fs_tokens(text: str, source: str | None):
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _FS_TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, source)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            if kind == "punct":
                kind = m.group()
            out.append((kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    return out


class _FSParser:
    def __init__(self, text: str, source: str | None):
        self.toks = _fs_tokens(text, source)
        self.i = 0
        self.source = source
        self.nodes: dict[str, Node] = {}
        self.refs: list[tuple[str, int, int]] = []

    def error(self, msg, tok=None):
        tok = tok or (self.toks[self.i] if self.i < len(self.toks) else None)
        if tok is None:
            last = self.toks[-1] if self.toks else ("", "", 1, 0)
            return ParseError(msg, last[2], last[3] + len(last[1]), self.source)
        return ParseError(msg, tok[2], tok[3], self.source)

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, kind):
        tok = self.peek()
        if tok is None or tok[0] != kind:
            found = "end of input" if tok is None else repr(tok[1])
            raise self.error(f"expected {kind!r}, found {found}")
        self.i += 1
        return tok

    def parse(self) -> FStructure:
        if not self.toks:
            raise self.error("empty f-structure document")
        root = self.definition()
        if self.peek() is not None:
            raise self.error(f"unexpected {self.peek()[1]!r} after root structure")
        for label, line, col in self.refs:
            if label not in self.nodes:
                raise ParseError(f"undefined label {label!r}", line, col, self.source)
        try:
            return FStructure(root, self.nodes)
        except FStructureError as e:
            raise ParseError(str(e), 1, 1, self.source) from None

    def definition(self) -> str:
        label_tok = self.take("ident")
        label = label_tok[1]
        self.take(":")
        if label in self.nodes:
            raise self.error(f"duplicate definition of label {label!r}", label_tok)
        self.nodes[label] = Complex(())  # placeholder, catches self-nesting
        tok = self.peek()
        if tok is not None and tok[0] == "[":
            self.i += 1
            attrs = self.attr_list(closer="]")
            self.take("]")
            self.nodes[label] = Complex(tuple(attrs))
        elif tok is not None and tok[0] == "{":
            self.i += 1
            attrs = []
            # attributes before '|' belong to the set itself
            j = self.i
            depth = 0
            has_bar = False
            while j < len(self.toks):
                k = self.toks[j][0]
                if k in "[{":
                    depth += 1
                elif k in "]}":
                    if depth == 0:
                        break
                    depth -= 1
                elif k == "|" and depth == 0:
                    has_bar = True
                    break
                j += 1
            if has_bar:
                attrs = self.attr_list(closer="|")
                self.take("|")
            members = []
            if self.peek() is not None and self.peek()[0] != "}":
                members.append(self.value_label())
                while self.peek() is not None and self.peek()[0] == ",":
                    self.i += 1
                    members.append(self.value_label())
            self.take("}")
            if len(set(members)) != len(members):
                raise self.error(f"set node {label!r} lists a member twice", label_tok)
            self.nodes[label] = SetNode(tuple(members), tuple(attrs))
        else:
            raise self.error("expected '[' or '{' after label")
        return label

    def attr_list(self, closer):
        attrs = []
        seen = set()
        while self.peek() is not None and self.peek()[0] != closer:
            tok = self.take("ident")
            name = attr_name(tok[1])
            if name in seen:
                raise self.error(f"attribute {name} given twice", tok)
            seen.add(name)
            attrs.append((name, self.value()))
        return attrs

    def value(self) -> Value:
        tok = self.peek()
        if tok is None:
            raise self.error("expected a value")
        if tok[0] == "sform":
            self.i += 1
            return SemanticForm(tok[1][1:-1])
        if tok[0] == "atom":
            self.i += 1
            return Atomic(tok[1][1:-1])
        return self.value_label()

    def value_label(self) -> str:
        tok = self.take("ident")
        nxt = self.peek()
        if nxt is not None and nxt[0] == ":":
            self.i -= 1
            return self.definition()
        self.refs.append((tok[1], tok[2], tok[3]))
        return tok[1]


def parse_fstructure(text: str, source: str | None = None) -> FStructure:
    fs = _FSParser(text, source).parse()
    return fs


def format_fstructure(fs: FStructure) -> str:
    """Single-line serialization; each node is written in full at its first
    occurrence in document order and referenced by label afterwards."""
    done: set[str] = set()

    def val(v):
        if isinstance(v, SemanticForm):
            return f"'{v.pred}'"
        if isinstance(v, Atomic):
            return f'"{v.value}"'
        return node(v)

    def node(label):
        if label in done:
            return label
        done.add(label)
        n = fs.nodes[label]
        if isinstance(n, SetNode):
            head = " ".join(f"{a} {val(v)}" for a, v in n.attrs)
            members = ", ".join(node(m) for m in n.members)
            return f"{label}:{{ {head} | {members} }}" if head else f"{label}:{{ {members} }}"
        body = " ".join(f"{a} {val(v)}" for a, v in n.attrs)
        return f"{label}:[ {body} ]" if body else f"{label}:[ ]"

    return node(fs.root)
