"""Acceptance criteria; each test prints one PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -s -q``.
"""

import random
import time
from collections import Counter

import pytest

from lfgglue import meaning as m
from lfgglue.fstruct import RRelation
from lfgglue.lexicon import instantiate_entries
from lfgglue.prover import NoReadingError, SearchLimits, derive_readings, enumerate_derivations, validate_trace

import small_step
from conftest import load
from forward_oracle import enumerate_meanings
from generators import random_case, random_relabeling, random_term, term_depth

RANDOM_CASES = 200
RANDOM_TERMS = 500


@pytest.fixture
def report(capsys):
    def emit(n, title, checks):
        failed = [name for name, ok in checks if not ok]
        line = f"criterion {n} ({title}): " + ("PASS" if not failed else "FAIL " + "; ".join(failed))
        with capsys.disabled():
            print("\n" + line)
        assert not failed, line
    return emit


def term(text):
    return m.parse_term(text)


def quants(t):
    return sum(1 for s in m.subterms(t) if isinstance(s, m.Quant))


def test_criterion_1_basic(report):
    _, _, ps = load("basic")
    rs = derive_readings(ps, "f")
    traces = {r.format_trace() for r in enumerate_derivations(ps, "f", all_orders=True)}
    report(1, "basic derivation", [
        ("exactly one reading", len(rs) == 1),
        ("meaning supported(Bill, NAFTA)", m.alpha_equal(rs[0].meaning, term("supported(Bill, NAFTA)"))),
        ("at least two derivation orders", len(traces) >= 2),
    ])


def test_criterion_2_coordinate(report):
    _, _, ps = load("coordinate")
    top = derive_readings(ps, "f")[0]
    nafta = next(p.ref for p in ps.linear if p.key == "nafta")
    cites = Counter(x for s in top.trace for x in s.inputs)
    obj_facts = [f"r{i}" for i, r in enumerate(ps.facts) if r.attr == "OBJ" and r.child == "h"]
    report(2, "coordinate right-node raising", [
        ("top reading", m.alpha_equal(top.meaning, term("and(supported(Bill, NAFTA), opposed(Hillary, NAFTA))"))),
        ("qnp=0", top.qnp_dups == 0),
        ("NAFTA consumed once", cites[nafta] == 1),
        ("both OBJ facts used", set(ps.facts[int(r[1:])] for r in obj_facts)
         == {RRelation("f1", "OBJ", "h"), RRelation("f2", "OBJ", "h")}
         and all(cites[r] == 1 for r in obj_facts)),
        ("trace validates", validate_trace(top, ps)),
    ])


def test_criterion_3_quantified(report):
    _, _, ps = load("quantified")
    rs = derive_readings(ps, "f")
    top = rs[0]
    doubles = [i for i, r in enumerate(rs) if quants(r.meaning) >= 2]
    report(3, "quantified right-node raising", [
        ("top reading", m.alpha_equal(top.meaning, term(
            "two(z, trade-bill(z), and(supported(Bill, z), opposed(Hillary, z)))"))),
        ("one quantifier", quants(top.meaning) == 1),
        ("double-quantifier readings exist", bool(doubles)),
        ("double-quantifier readings have qnp>=1", all(rs[i].qnp_dups >= 1 for i in doubles)),
        ("and rank strictly lower", all(rs[i].qnp_dups > top.qnp_dups and i > 0 for i in doubles)),
    ])


def test_criterion_4_intensional(report):
    _, _, ps = load("intensional")
    rs = derive_readings(ps, "f", SearchLimits(max_qnp_dups=2))
    top = rs[0]
    target = term("and(wanted(Hillary, ^\\Q. two(x, candidate(x), [ˇQ](x))),"
                  " two(z, candidate(z), and(found(Hillary, z), supported(Hillary, z))))")
    separate_scopes = term("and(wanted(Hillary, ^\\Q. two(x, candidate(x), [ˇQ](x))),"
                        " and(two(z, candidate(z), found(Hillary, z)), two(y, candidate(y), supported(Hillary, y))))")
    pr = [i for i, r in enumerate(rs) if m.alpha_equal(r.meaning, separate_scopes)]
    report(4, "intensional three-verb case", [
        ("top reading is the target", m.alpha_equal(top.meaning, target)),
        ("top qnp=1", top.qnp_dups == 1),
        ("three-quantifier reading present", len(pr) == 1),
        ("three-quantifier reading at qnp=2", all(rs[i].qnp_dups == 2 for i in pr)),
        ("ranked below", all(i > 0 for i in pr)),
        ("all traces validate", all(validate_trace(r, ps) for r in rs)),
    ])


def test_criterion_5_noncoordinate(report):
    _, lex, ps = load("noncoordinate")
    rs = derive_readings(ps, "f")
    oracle = enumerate_meanings(ps, "f", max_qnp=2)
    best = min(q for _, q in oracle)
    oracle_top = [t for t, q in oracle if q == best]

    def same(xs, ys):
        return len(xs) == len(ys) and all(any(m.alpha_equal(a, b) and p == q for b, q in ys) for a, p in xs)

    report(5, "noncoordinate right-node raising", [
        ("no conjunction entry", "and" not in lex),
        ("derivation succeeds", bool(rs)),
        ("reading set equals oracle", same([(r.meaning, r.qnp_dups) for r in rs], oracle)),
        ("top reading equals oracle's", len(oracle_top) == 1 and m.alpha_equal(rs[0].meaning, oracle_top[0])),
    ])


def _meaning_set(rs):
    return [(r.meaning, r.qnp_dups) for r in rs]


def _same_set(a, b):
    return len(a) == len(b) and all(any(m.alpha_equal(x, y) and p == q for y, q in b) for x, p in a)


def _readings(fs, lex):
    ps = instantiate_entries(fs, lex)
    try:
        return ps, derive_readings(ps, fs.root)
    except NoReadingError:
        return ps, []


def test_criterion_6_resource_accounting(report):
    rng = random.Random(20240601)
    start = time.perf_counter()
    stats = Counter()
    for _ in range(RANDOM_CASES):
        fs, lex = random_case(rng)
        ps, rs = _readings(fs, lex)
        stats["cases"] += 1
        stats["small"] += len(ps.linear) <= 6 and len(ps.facts) <= 8
        stats["readings"] += len(rs)
        for r in rs:
            stats["valid"] += validate_trace(r, ps)
            cites = Counter(x for s in r.trace for x in s.inputs if isinstance(x, str))
            stats["exactly_once"] += all(cites[p.ref] == 1 for p in ps.linear)
            stats["no_reserved"] += not any(m.is_reserved(c) for c in m.constants(r.meaning))
        fs2 = fs.relabel(random_relabeling(fs, rng))
        _, rs2 = _readings(fs2, lex)
        stats["relabel"] += _same_set(_meaning_set(rs), _meaning_set(rs2))
    elapsed = time.perf_counter() - start
    n, k = stats["cases"], stats["readings"]
    report(6, f"resource accounting, {n} cases, {k} readings, {elapsed:.1f}s", [
        (f"{n} >= {RANDOM_CASES} cases", n >= RANDOM_CASES),
        ("premise sets within size bounds", stats["small"] == n),
        ("readings produced", k > 0),
        ("every trace validates", stats["valid"] == k),
        ("exactly-once consumption", stats["exactly_once"] == k),
        ("no reserved constants", stats["no_reserved"] == k),
        ("relabeling invariance", stats["relabel"] == n),
        ("under 60 s", elapsed < 60),
    ])


def _rename_bound(t, counter):
    """An alpha-variant of ``t`` with every binder renamed apart."""
    def fresh():
        counter[0] += 1
        return f"v{counter[0]}"

    if isinstance(t, m.Lam):
        v = fresh()
        return m.Lam(v, _rename_bound(m.substitute(t.body, {t.binder: m.Var(v)}), counter))
    if isinstance(t, m.Quant):
        v = fresh()
        r = m.substitute(t.restriction, {t.binder: m.Var(v)})
        s = m.substitute(t.scope, {t.binder: m.Var(v)})
        return m.Quant(t.det, v, _rename_bound(r, counter), _rename_bound(s, counter))
    if isinstance(t, m.App):
        return m.App(_rename_bound(t.fun, counter), tuple(_rename_bound(a, counter) for a in t.args))
    if isinstance(t, (m.Intension, m.Extension)):
        return type(t)(_rename_bound(t.body, counter))
    return t


def _no_redexes(t):
    for s in m.subterms(t):
        if isinstance(s, m.App) and isinstance(s.fun, m.Lam):
            return False
        if isinstance(s, m.Extension) and isinstance(s.body, m.Intension):
            return False
    return True


def test_criterion_7_normalization(report):
    rng = random.Random(7)
    start = time.perf_counter()
    stats = Counter()
    counter = [0]
    prev = None
    while stats["terms"] < RANDOM_TERMS:
        t = random_term(rng, rng.randint(1, 6))
        try:
            n = m.normalize(t)
        except m.NormalizationError:
            stats["diverging"] += 1
            continue
        stats["terms"] += 1
        stats["deep"] += term_depth(t) > 6
        stats["idempotent"] += m.normalize(n) == n
        stats["normal"] += m.is_normal(n) and _no_redexes(n)
        stats["oracle"] += small_step.reduce(t) == small_step.to_db(n)
        a = _rename_bound(t, counter)
        b = _rename_bound(a, counter)
        stats["reflexive"] += m.alpha_equal(t, t)
        stats["symmetric"] += m.alpha_equal(t, a) and m.alpha_equal(a, t)
        stats["transitive"] += m.alpha_equal(t, b)
        stats["invariant"] += m.alpha_equal(m.normalize(a), n)
        if prev is not None:
            stats["symmetric_pairs"] += m.alpha_equal(prev, n) == m.alpha_equal(n, prev)
        prev = n
    elapsed = time.perf_counter() - start
    k = stats["terms"]
    report(7, f"normalization, {k} terms, {elapsed:.1f}s", [
        (f"{k} >= {RANDOM_TERMS} terms", k >= RANDOM_TERMS),
        ("depth <= 6", stats["deep"] == 0),
        ("idempotent", stats["idempotent"] == k),
        ("no redexes or cancelling pairs", stats["normal"] == k),
        ("agrees with small-step reducer", stats["oracle"] == k),
        ("alpha reflexive", stats["reflexive"] == k),
        ("alpha symmetric", stats["symmetric"] == k and stats["symmetric_pairs"] == k - 1),
        ("alpha transitive", stats["transitive"] == k),
        ("normalize respects alpha", stats["invariant"] == k),
        ("under 10 s", elapsed < 10),
    ])
