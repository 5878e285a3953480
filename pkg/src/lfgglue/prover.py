"""Resource-sensitive proof search over instantiated meaning constructors.

The search is goal directed.  A goal is a handle; it is met by focusing on a
linear resource (or a copy of a banged one) whose consequent has that
handle, or by Axiom I through an unused R-relation.  Antecedents are proved
left to right with the remaining resources threaded through, so every linear
premise ends up consumed exactly once.  Nested implications in antecedent
position are proved hypothetically with fresh constants from a reserved
namespace.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple

from . import glue as g
from . import meaning as m
from .glue import Bang, Forall, GlueFormula, Lolli, MeansAtom, Proj, RAtom, Sort, Tensor
from .lexicon import PremiseSet, fact_formula
from .meaning import Term

RULES = ("Instantiate", "ModusPonens", "TensorIntro", "TensorSplit", "AxiomI",
         "Hypothesis", "Discharge", "QNPDup", "BangCopy")


class RuleError(ValueError):
    """A rule was applied to formulas of the wrong shape."""


class StepLimitExceeded(RuntimeError):
    pass


class NoReadingError(RuntimeError):
    def __init__(self, message: str, unconsumed: tuple[str, ...] = ()):
        self.unconsumed = tuple(unconsumed)
        super().__init__(message)


@dataclass(frozen=True)
class SearchLimits:
    max_qnp_dups: int = 2
    max_bang_uses_per_formula: int | None = None  # None: number of facts
    max_hypothesis_depth: int = 2
    max_steps: int = 100_000

    def __post_init__(self):
        for name in ("max_qnp_dups", "max_hypothesis_depth", "max_steps"):
            if getattr(self, name) < 0 or (name == "max_steps" and self.max_steps == 0):
                raise ValueError(f"{name} must be positive")
        if self.max_bang_uses_per_formula is not None and self.max_bang_uses_per_formula < 0:
            raise ValueError("max_bang_uses_per_formula must be positive")


@dataclass(frozen=True)
class DerivationStep:
    index: int
    rule: str
    inputs: tuple
    output: GlueFormula
    info: dict = field(default_factory=dict, compare=False)

    def __str__(self):
        refs = ", ".join(str(r) for r in self.inputs)
        return f"step {self.index}: {self.rule} [{refs}] => {g.format_glue(self.output)}"


@dataclass(frozen=True)
class Reading:
    meaning: Term
    trace: tuple[DerivationStep, ...]
    qnp_dups: int
    bang_uses: Mapping[str, int]
    fact_uses: Mapping[str, int]
    root: str

    @property
    def conclusion(self) -> GlueFormula:
        return self.trace[-1].output

    def format_trace(self) -> str:
        return format_trace(self.trace)


def format_trace(steps) -> str:
    return "\n".join(str(s) for s in steps)


# ---------------------------------------------------------------------------
# single rule applications


def apply_axiom_i(atom: MeansAtom, fact: RAtom) -> MeansAtom:
    """From ``G~X`` and ``R(F, P, G)`` conclude ``(F P)~X``."""
    h = atom.handle
    if not (isinstance(h, Proj) and h.attr is None and h.label == fact.child):
        raise RuleError(f"Axiom I: {g.format_glue(atom)} does not match {g.format_glue(fact)}")
    return MeansAtom(Proj(fact.parent, fact.attr), atom.term)


def modus_ponens(impl: GlueFormula, arg: GlueFormula) -> GlueFormula:
    if not isinstance(impl, Lolli):
        raise RuleError(f"not an implication: {g.format_glue(impl)}")
    if not g.formula_equal(impl.antecedent, arg):
        raise RuleError(f"{g.format_glue(arg)} does not match antecedent of {g.format_glue(impl)}")
    return g.normalize_formula(impl.consequent)


def qnp_duplicate(q: GlueFormula, used: int = 0, limit: int = 1) -> tuple[GlueFormula, GlueFormula]:
    if g.qnp_site(q) is None:
        raise RuleError(f"not a quantified-NP constructor: {g.format_glue(q)}")
    if used >= limit:
        raise RuleError(f"QNP duplication limit {limit} reached")
    return q, q


# ---------------------------------------------------------------------------
# higher-order pattern matching on meaning terms


def _is_meta(name: str) -> bool:
    return name.startswith("?")


def _metas(t: Term) -> set[str]:
    return {v for v in m.free_vars(t) if _is_meta(v)}


def _var_names(t: Term) -> set[str]:
    out = set()
    for s in m.subterms(t):
        if isinstance(s, m.Var):
            out.add(s.name)
        elif isinstance(s, (m.Lam, m.Quant)):
            out.add(s.binder)
    return out


def match_pattern(pattern: Term, value: Term) -> dict[str, Term] | None:
    """Bindings for the metavariables of ``pattern`` making it equal to the
    normal term ``value``, or None.  Handles a bare metavariable, ground
    patterns, and ``V(a1, .., an)`` with ground arguments (solved by
    abstracting the arguments out of ``value``)."""
    metas = _metas(pattern)
    if not metas:
        return {} if m.alpha_equal(m.normalize(pattern), value) else None
    if isinstance(pattern, m.Var):
        return {pattern.name: value}
    if (isinstance(pattern, m.App) and isinstance(pattern.fun, m.Var) and _is_meta(pattern.fun.name)
            and not any(_metas(a) for a in pattern.args)):
        return _abstract(pattern.fun.name, pattern.args, value)
    if isinstance(pattern, m.App) and isinstance(value, m.App) and len(pattern.args) == len(value.args):
        out: dict[str, Term] = {}
        for p, v in zip((pattern.fun,) + pattern.args, (value.fun,) + value.args):
            sub = match_pattern(m.substitute(p, out), v)
            if sub is None:
                return None
            out.update(sub)
        return out
    return None


def _abstract(meta: str, args, value: Term):
    avoid = _var_names(value)
    qs = []
    for _ in args:
        q = m.fresh_name("Q", avoid)
        avoid.add(q)
        qs.append(q)
    body = value
    for arg, q in zip(args, qs):
        if isinstance(arg, m.Intension):
            body = m.replace_subterm(body, arg, m.Var(q))
            body = m.replace_subterm(body, arg.body, m.Extension(m.Var(q)))
        else:
            body = m.replace_subterm(body, arg, m.Var(q))
    eigen = {c for a in args for c in m.constants(a) if m.is_reserved(c)}
    if eigen & m.constants(body):
        return None
    cand = body
    for q in reversed(qs):
        cand = m.Lam(q, cand)
    cand = m.normalize(cand)
    if not m.alpha_equal(m.normalize(m.App(cand, tuple(args))), value):
        return None
    return {meta: cand}


# ---------------------------------------------------------------------------
# search state


@dataclass(frozen=True)
class _Res:
    ref: object
    formula: GlueFormula
    deps: frozenset


@dataclass(frozen=True)
class _Record:
    label: str
    term: Term
    deps: frozenset
    ref: int


class _State(NamedTuple):
    ctx: tuple
    records: tuple
    facts: frozenset
    bang: tuple
    qnp: int
    steps: tuple
    depth: int
    floor: int
    fresh: int


def _emit(st: _State, rule: str, inputs, output, **info):
    idx = len(st.steps) + 1
    step = DerivationStep(idx, rule, tuple(inputs), output, info)
    return idx, st._replace(steps=st.steps + (step,))


def _ground_handle(h) -> bool:
    return isinstance(h, Proj) and isinstance(h.label, str) and (h.attr is None or isinstance(h.attr, str))


def _unify_slot(p, v, genv):
    if isinstance(p, g.GVar):
        if p.name in genv:
            return genv if genv[p.name] == v else None
        return {**genv, p.name: v}
    return genv if p == v else None


def _unify_handle(p, goal: Proj, genv):
    if isinstance(p, g.GVar):
        return _unify_slot(p, goal, genv)
    if (p.attr is None) != (goal.attr is None):
        return None
    genv = _unify_slot(p.label, goal.label, genv)
    if genv is None or p.attr is None:
        return genv
    return _unify_slot(p.attr, goal.attr, genv)


def _head(f: GlueFormula):
    _, body = g.strip_foralls(f)
    if isinstance(body, Lolli):
        body = body.consequent
    return body.handle if isinstance(body, MeansAtom) else None


def _atoms(f):
    if isinstance(f, MeansAtom):
        yield f
    elif isinstance(f, Tensor):
        yield from _atoms(f.left)
        yield from _atoms(f.right)
    elif isinstance(f, Lolli):
        yield from _atoms(f.antecedent)
        yield from _atoms(f.consequent)
    elif isinstance(f, (Bang, g.Forall)):
        yield from _atoms(f.body)


def _qnp_capacity(premises: PremiseSet) -> tuple[dict, float]:
    """Upper bound on how many copies of each quantified NP can be used.

    Every copy assumes ``site~x`` and that assumption must be consumed,
    either by Axiom I with its own R-relation or by an atom of some other
    premise that could match ``site~x``.
    """
    cap: dict = {}
    for r in premises.facts:
        cap[r.child] = cap.get(r.child, 0) + 1
    loose = 0
    for p in premises.linear + premises.banged:
        if g.qnp_site(p.formula) is not None:
            continue
        for a in _atoms(p.formula):
            h = a.handle
            if isinstance(h, g.GVar) or (isinstance(h, Proj) and h.attr is None):
                n = math.inf if p in premises.banged else 1
                if isinstance(h, Proj) and isinstance(h.label, str):
                    cap[h.label] = cap.get(h.label, 0) + n
                else:
                    loose += n
    return cap, loose


class _Search:
    def __init__(self, premises: PremiseSet, limits: SearchLimits, all_orders: bool = False):
        self.p = premises
        self.lim = limits
        self.all_orders = all_orders
        self.facts = premises.facts
        self.banged = premises.banged
        bang_max = limits.max_bang_uses_per_formula
        self.bang_max = len(self.facts) if bang_max is None else bang_max
        self.ticks = 0
        self.best: tuple[str, ...] | None = None
        self.capacity, self.loose = _qnp_capacity(premises)

    def tick(self):
        self.ticks += 1
        if self.ticks > self.lim.max_steps:
            raise StepLimitExceeded(f"search exceeded {self.lim.max_steps} steps")

    def initial(self) -> _State:
        return _State(
            ctx=tuple(_Res(p.ref, p.formula, frozenset()) for p in self.p.linear),
            records=(), facts=frozenset(range(len(self.facts))),
            bang=(0,) * len(self.banged), qnp=0, steps=(), depth=0, floor=0, fresh=1)

    def usable(self, deps, st) -> bool:
        # inside an intensional argument only its own hypotheses (and those
        # opened further in) may be used, besides hypothesis-free material
        return all(d >= st.floor for d in deps)

    # -- goals ---------------------------------------------------------------

    def prove_atom(self, goal: Proj, st: _State) -> Iterator:
        """Yield (term, ref, deps, state) for each way of deriving goal~term."""
        self.tick()
        seen = set()
        for i, r in enumerate(st.ctx):
            if r.formula in seen or not self.usable(r.deps, st):
                continue
            head = _head(r.formula)
            if head is None or _unify_handle(head, goal, {}) is None:
                continue
            seen.add(r.formula)
            rest = st._replace(ctx=st.ctx[:i] + st.ctx[i + 1:])
            yield from self.use(r.formula, r.ref, r.deps, goal, rest)
            if st.qnp < self.lim.max_qnp_dups and self.can_duplicate(r.formula, st):
                f = r.formula
                dup, s2 = _emit(rest, "QNPDup", (r.ref,), Tensor(f, f))
                left, s2 = _emit(s2, "TensorSplit", (dup,), f, side=0)
                right, s2 = _emit(s2, "TensorSplit", (dup,), f, side=1)
                s2 = s2._replace(ctx=s2.ctx + (_Res(right, f, r.deps),), qnp=s2.qnp + 1)
                yield from self.use(f, left, r.deps, goal, s2)
        for j, b in enumerate(self.banged):
            if st.bang[j] >= self.bang_max:
                continue
            body = b.formula.body
            head = _head(body)
            if head is None or _unify_handle(head, goal, {}) is None:
                continue
            cid, s2 = _emit(st, "BangCopy", (b.ref,), body)
            s2 = s2._replace(bang=st.bang[:j] + (st.bang[j] + 1,) + st.bang[j + 1:])
            yield from self.use(body, cid, frozenset(), goal, s2)
        if goal.attr is not None:
            yield from self.axiom_i(goal, st)

    def can_duplicate(self, f, st: _State) -> bool:
        site = g.qnp_site(f)
        if site is None:
            return False
        copies = 1 + sum(1 for s in st.steps
                         if s.rule == "QNPDup" and g.qnp_site(s.output.left) == site)
        return copies < self.capacity.get(site, 0) + self.loose

    def axiom_i(self, goal: Proj, st: _State):
        for idx in sorted(st.facts):
            fact = self.facts[idx]
            if fact.parent != goal.label or fact.attr != goal.attr:
                continue
            s0 = st._replace(facts=st.facts - {idx})
            for rec in s0.records:
                if rec.label == fact.child and self.usable(rec.deps, s0):
                    yield self.use_record(rec, idx, s0)
            for term, ref, deps, s1 in self.prove_atom(Proj(fact.child), s0):
                ax, s2 = _emit(s1, "AxiomI", (ref,), g.axiom_i_consequence(fact.child, term))
                rec = _Record(fact.child, term, deps, ax)
                s2 = s2._replace(records=s2.records + (rec,))
                yield self.use_record(rec, idx, s2)

    def use_record(self, rec: _Record, idx: int, st: _State):
        fact = self.facts[idx]
        body = g.axiom_i_consequence(rec.label, rec.term).body
        cid, st = _emit(st, "BangCopy", (rec.ref,), body)
        inst = g.instantiate(body, {"F": fact.parent, "P": fact.attr})
        iid, st = _emit(st, "Instantiate", (cid,), inst, bindings={"F": fact.parent, "P": fact.attr})
        mp, st = _emit(st, "ModusPonens", (iid, f"r{idx}"), inst.consequent)
        return rec.term, mp, rec.deps, st

    # -- focusing ------------------------------------------------------------

    def use(self, formula, ref, deps, goal: Proj, st: _State):
        if isinstance(formula, MeansAtom):
            if formula.handle == goal:
                yield formula.term, ref, deps, st
            return
        yield from self.focus(formula, ref, deps, goal, st)

    def focus(self, formula, ref, deps, goal: Proj, st: _State):
        chain, body = g.strip_foralls(formula)
        msub, gsub, metas = {}, {}, {}
        n = st.fresh
        for var, sort in chain:
            name = f"?{var}#{n}"
            n += 1
            metas[var] = (name, sort)
            if sort.is_term:
                msub[var] = m.Var(name)
            else:
                gsub[var] = g.GVar(name)
        st = st._replace(fresh=n)
        body = g.subst_formula(body, msub, gsub)
        if isinstance(body, MeansAtom):
            ant, cons = None, body
        elif isinstance(body, Lolli) and isinstance(body.consequent, MeansAtom):
            ant, cons = body.antecedent, body.consequent
        else:
            return
        genv = _unify_handle(cons.handle, goal, {})
        if genv is None:
            return
        parts = g.tensor_parts(ant) if ant is not None else []
        orders = itertools.permutations(range(len(parts))) if self.all_orders else [range(len(parts))]
        for order in orders:
            for menv, genv2, proofs, d2, s2 in self.prove_parts(parts, list(order), 0, {}, genv,
                                                                 {}, deps, st):
                done = self.finish(formula, ref, chain, metas, parts, menv, genv2, proofs, s2)
                if done is not None:
                    term, out_ref, s3 = done
                    yield term, out_ref, d2, s3

    def prove_parts(self, parts, order, k, menv, genv, proofs, deps, st):
        if k == len(order):
            yield menv, genv, proofs, deps, st
            return
        i = order[k]
        part = g.subst_formula(parts[i], menv, genv)
        if isinstance(part, MeansAtom):
            if not _ground_handle(part.handle):
                return
            for term, ref, d, s1 in self.prove_atom(part.handle, st):
                b = match_pattern(part.term, term)
                if b is None:
                    continue
                atom = MeansAtom(part.handle, term)
                yield from self.prove_parts(parts, order, k + 1, {**menv, **b}, genv,
                                            {**proofs, i: (ref, atom)}, deps | d, s1)
        elif isinstance(part, RAtom):
            for idx in sorted(st.facts):
                fact = self.facts[idx]
                genv1 = genv
                for p, v in ((part.parent, fact.parent), (part.attr, fact.attr), (part.child, fact.child)):
                    genv1 = None if genv1 is None else _unify_slot(p, v, genv1)
                if genv1 is None:
                    continue
                s1 = st._replace(facts=st.facts - {idx})
                yield from self.prove_parts(parts, order, k + 1, menv, genv1,
                                            {**proofs, i: (f"r{idx}", fact_formula(fact))}, deps, s1)
        elif isinstance(part, (Forall, Lolli)):
            for ref, out, b, d, s1 in self.hypothetical(part, st):
                yield from self.prove_parts(parts, order, k + 1, {**menv, **b}, genv,
                                            {**proofs, i: (ref, out)}, deps | d, s1)

    def finish(self, formula, ref, chain, metas, parts, menv, genv, proofs, st):
        bindings = {}
        for var, (name, sort) in metas.items():
            if sort.is_term:
                if name not in menv:
                    return None
                val = m.normalize(menv[name])
                if _metas(val):
                    return None
                bindings[var] = val
            else:
                val = genv.get(name)
                if val is None or isinstance(val, g.GVar):
                    return None
                bindings[var] = val
        impl, impl_ref = formula, ref
        if chain:
            impl = g.instantiate(formula, bindings)
            impl_ref, st = _emit(st, "Instantiate", (ref,), impl, bindings=bindings)
        if not parts:
            return impl.term, impl_ref, st
        arg_ref, arg = proofs[0]
        for i in range(1, len(parts)):
            r2, f2 = proofs[i]
            arg = Tensor(arg, f2)
            arg_ref, st = _emit(st, "TensorIntro", (arg_ref, r2), arg)
        out = g.normalize_formula(impl.consequent)
        out_ref, st = _emit(st, "ModusPonens", (impl_ref, arg_ref), out)
        return out.term, out_ref, st

    # -- hypothetical reasoning ----------------------------------------------

    def hypothetical(self, part, st: _State):
        if st.depth >= self.lim.max_hypothesis_depth:
            return
        level = st.depth + 1
        chain, body = g.strip_foralls(part)
        msub, gsub, eigen = {}, {}, {}
        n = st.fresh
        opaque = False
        meaning_eigen = set()
        for var, sort in chain:
            if sort.is_term:
                c = m.Const(f"#c{n}")
                msub[var] = c
                meaning_eigen.add(c.name)
                eigen[var] = c
            elif sort is Sort.HANDLE:
                gsub[var] = eigen[var] = Proj(f"#s{n}")
                opaque = True
            else:
                gsub[var] = eigen[var] = f"#l{n}"
            n += 1
        st = st._replace(fresh=n)
        body = g.subst_formula(body, msub, gsub)
        if not (isinstance(body, Lolli) and isinstance(body.consequent, MeansAtom)):
            return
        cons = body.consequent
        if not _ground_handle(cons.handle):
            return
        hyps = g.tensor_parts(body.antecedent)
        if any(_metas_in(h) for h in hyps):
            return
        hyp_refs = []
        for h in hyps:
            hid, st = _emit(st, "Hypothesis", (), h, level=level)
            hyp_refs.append(hid)
            st = st._replace(ctx=st.ctx + (_Res(hid, h, frozenset([level])),))
        inner = st._replace(depth=level, floor=level if opaque else st.floor)
        hyp_set = set(hyp_refs)
        for term, ref, deps, s1 in self.prove_atom(cons.handle, inner):
            if any(r.ref in hyp_set for r in s1.ctx):
                continue
            consts = m.constants(term)
            if not meaning_eigen <= consts or any(term == c for c in msub.values()):
                continue
            b = match_pattern(cons.term, term)
            if b is None:
                continue
            if any(m.constants(v) & meaning_eigen for v in b.values()):
                continue
            out = g.subst_formula(part, b, {})
            if _metas_in(out):
                continue
            out = g.normalize_formula(out)
            records = tuple(r for r in s1.records if level not in r.deps)
            s2 = s1._replace(depth=st.depth, floor=st.floor, records=records)
            did, s2 = _emit(s2, "Discharge", (ref,), out, hyps=tuple(hyp_refs), eigen=eigen)
            yield did, out, b, deps - {level}, s2


def _metas_in(f: GlueFormula) -> bool:
    mv, gv = g.glue_free_vars(f)
    return any(_is_meta(v) for v in mv | gv)


# ---------------------------------------------------------------------------
# entry points


def _reading(term, st: _State, premises: PremiseSet, root: str) -> Reading:
    trace = st.steps
    cites = Counter(r for s in trace for r in s.inputs if isinstance(r, str))
    bang_uses = {b.ref: cites.get(b.ref, 0) for b in premises.banged}
    fact_uses = {f"r{i}": cites.get(f"r{i}", 0) for i in range(len(premises.facts))}
    qnp = sum(1 for s in trace if s.rule == "QNPDup")
    return Reading(term, trace, qnp, bang_uses, fact_uses, root)


def _complete(search: _Search, premises: PremiseSet, root: str, goal) -> Iterator[Reading]:
    st0 = search.initial()
    if goal is None:
        results = ((t, s) for t, _, _, s in search.prove_atom(Proj(root), st0))
    else:
        results = ((m.Const("true"), s) for _, _, _, _, s in search.hypothetical(goal, st0))
    for term, st in results:
        left = tuple(str(r.ref) for r in st.ctx) + tuple(f"r{i}" for i in sorted(st.facts))
        if left:
            if search.best is None or len(left) < len(search.best):
                search.best = left
            continue
        yield _reading(term, st, premises, root)


def enumerate_derivations(premises: PremiseSet, root: str, limits: SearchLimits | None = None,
                          all_orders: bool = False, goal: GlueFormula | None = None) -> Iterator[Reading]:
    """Every complete derivation within the limits, without deduplication.

    With ``all_orders`` antecedent components are tried in every order, so
    derivations differing only in the order of subproofs are all produced.
    ``goal`` replaces the default ``root~M`` with a closed implication to be
    proved hypothetically from the premises.
    """
    search = _Search(premises, limits or SearchLimits(), all_orders)
    yield from _complete(search, premises, root, goal)


def _describe_leftover(premises: PremiseSet, refs) -> tuple[str, ...]:
    by_ref = premises.by_ref()
    out = []
    for r in refs:
        f = by_ref.get(r)
        out.append(f"{r}: {g.format_glue(f)}" if f is not None else str(r))
    return tuple(out)


def derive_readings(premises: PremiseSet, root: str, limits: SearchLimits | None = None) -> list[Reading]:
    """All alpha-distinct readings of ``root``, fewest QNP duplications
    first, ties broken by canonical term order."""
    search = _Search(premises, limits or SearchLimits())
    found: list[Reading] = []
    for r in _complete(search, premises, root, None):
        for i, old in enumerate(found):
            if m.alpha_equal(old.meaning, r.meaning):
                if r.qnp_dups < old.qnp_dups:
                    found[i] = r
                break
        else:
            found.append(r)
    if not found:
        best = search.best
        if best is None:
            left = tuple(p.ref for p in premises.linear)
            raise NoReadingError(f"no derivation of {root} found", _describe_leftover(premises, left))
        raise NoReadingError(f"no complete derivation of {root}; unconsumed resources: "
                             + ", ".join(best), _describe_leftover(premises, best))
    rank = premises.constant_rank()
    found.sort(key=lambda r: (r.qnp_dups, m.canonical_key(r.meaning, rank)))
    return found


# ---------------------------------------------------------------------------
# independent trace checking


def _step_ok(s: DerivationStep, get) -> bool:
    ins = [get(r) for r in s.inputs]
    out = s.output
    if s.rule == "Instantiate":
        return len(ins) == 1 and g.formula_equal(g.instantiate(ins[0], s.info.get("bindings", {})), out)
    if s.rule == "ModusPonens":
        return len(ins) == 2 and g.formula_equal(modus_ponens(ins[0], ins[1]), out)
    if s.rule == "TensorIntro":
        return len(ins) == 2 and g.formula_equal(Tensor(ins[0], ins[1]), out)
    if s.rule == "TensorSplit":
        side = s.info.get("side")
        return (len(ins) == 1 and isinstance(ins[0], Tensor) and side in (0, 1)
                and g.formula_equal((ins[0].left, ins[0].right)[side], out))
    if s.rule == "BangCopy":
        return len(ins) == 1 and isinstance(ins[0], Bang) and g.formula_equal(ins[0].body, out)
    if s.rule == "AxiomI":
        a = ins[0] if len(ins) == 1 else None
        return (isinstance(a, MeansAtom) and isinstance(a.handle, Proj) and a.handle.attr is None
                and isinstance(a.handle.label, str)
                and g.formula_equal(g.axiom_i_consequence(a.handle.label, a.term), out))
    if s.rule == "QNPDup":
        if len(ins) != 1:
            return False
        q1, q2 = qnp_duplicate(ins[0], 0, 1)
        return g.formula_equal(Tensor(q1, q2), out)
    if s.rule == "Hypothesis":
        return not ins
    if s.rule == "Discharge":
        hyps = [get(h) for h in s.info.get("hyps", ())]
        eigen = s.info.get("eigen", {})
        if len(ins) != 1 or not hyps:
            return False
        body = g.instantiate(out, eigen) if eigen else out
        return g.formula_equal(body, Lolli(g.tensor_of(hyps), ins[0]))
    return False


def validate_trace(r: Reading, p: PremiseSet) -> bool:
    """Re-derive every step of ``r.trace`` from its cited inputs and check
    that the resources balance: each linear premise and each R-relation is
    used exactly once, banged formulas only through copies, hypotheses are
    discharged in scope, and the last step concludes ``r.meaning`` at the
    root."""
    premises = p.by_ref()
    steps = list(r.trace)
    if not steps:
        return False
    outputs: dict[int, GlueFormula] = {}
    deps: dict[object, frozenset] = {}
    rules: dict[int, DerivationStep] = {}
    cites: Counter = Counter()
    bang_cites: Counter = Counter()
    split_sides: dict[int, list] = {}

    def get(ref):
        if isinstance(ref, int):
            return outputs[ref]
        return premises[ref]

    for n, s in enumerate(steps, 1):
        if s.index != n or s.rule not in RULES:
            return False
        for ref in s.inputs:
            if isinstance(ref, int) and ref not in outputs:
                return False  # forward or dangling reference
            if isinstance(ref, str) and ref not in premises:
                return False
        try:
            if not _step_ok(s, get):
                return False
        except (RuleError, g.SortError, m.NormalizationError, KeyError, TypeError):
            return False
        for ref in s.inputs:
            if s.rule == "BangCopy":
                bang_cites[ref] += 1
            else:
                cites[ref] += 1
        if s.rule == "TensorSplit":
            split_sides.setdefault(s.inputs[0], []).append(s.info.get("side"))
        d = frozenset().union(*(deps.get(ref, frozenset()) for ref in s.inputs))
        if s.rule == "Hypothesis":
            d = frozenset([n])
        elif s.rule == "Discharge":
            hyps = set(s.info["hyps"])
            if not hyps <= d:
                return False
            if any(rules[h].rule != "Hypothesis" for h in hyps):
                return False
            d = d - hyps
        outputs[n] = s.output
        deps[n] = d
        rules[n] = s

    last = steps[-1]
    # premise accounting
    for q in p.linear:
        if cites[q.ref] != 1 or bang_cites[q.ref]:
            return False
    for b in p.banged:
        if cites[b.ref]:
            return False
    for i in range(len(p.facts)):
        if cites[f"r{i}"] != 1 or bang_cites[f"r{i}"]:
            return False
    # intermediate accounting
    for n, s in rules.items():
        used = cites[n]
        if s.rule == "AxiomI" or isinstance(s.output, Bang):
            if used or bang_cites[n] < 1:
                return False
        elif s.rule == "QNPDup":
            if sorted(split_sides.get(n, [])) != [0, 1] or bang_cites[n]:
                return False
        elif bang_cites[n]:
            return False
        elif s.rule == "Hypothesis":
            if used != 1:
                return False
        elif n == last.index:
            if used:
                return False
        elif used != 1:
            return False
    # hypotheses discharged, each by exactly one Discharge
    discharged = Counter(h for s in steps if s.rule == "Discharge" for h in s.info["hyps"])
    if any(discharged[n] != 1 for n, s in rules.items() if s.rule == "Hypothesis"):
        return False
    if deps[last.index]:
        return False
    out = last.output
    if not (isinstance(out, MeansAtom) and out.handle == Proj(r.root)):
        return False
    if not (m.is_normal(r.meaning) and not m.free_vars(r.meaning)
            and not any(m.is_reserved(c) for c in m.constants(r.meaning))):
        return False
    if not m.alpha_equal(out.term, r.meaning):
        return False
    return r.qnp_dups == sum(1 for s in steps if s.rule == "QNPDup")
