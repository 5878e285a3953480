import pytest

from lfgglue import glue as g
from lfgglue import meaning as m
from lfgglue.glue import (
    AXIOM_I, QNP_DUPLICATION, Bang, Forall, GVar, Lolli, MeansAtom, Proj, RAtom, Sort, SortError,
    Tensor, axiom_i_consequence, format_glue, formula_equal, instantiate, is_closed, parse_glue,
    qnp_site,
)
from lfgglue.syntax import ParseError

SUPPORTED = "forall X,Y. (f SUBJ)~X * (f OBJ)~Y -o f~supported(X, Y)"
AND2 = "! forall X,Y. (f CONJ)~X * f~Y -o f~and(X, Y)"
TWO_TRADE_BILLS = "forall H,S. (forall x. h~x -o H~S(x)) -o H~two(z, trade-bill(z), S(z))"
WANTED = ("forall X,Y. (f1 SUBJ)~X * (forall s,p. (forall X. (f1 OBJ)~X -o s~p(X)) -o s~Y(^p))"
          " -o f1~wanted(X, ^Y)")


def test_supported_constructor_structure():
    f = parse_glue(SUPPORTED)
    chain, body = g.strip_foralls(f)
    assert chain == [("X", Sort.MEANING), ("Y", Sort.MEANING)]
    assert isinstance(body, Lolli)
    left, right = g.tensor_parts(body.antecedent)
    assert left == MeansAtom(Proj("f", "SUBJ"), m.Var("X"))
    assert right == MeansAtom(Proj("f", "OBJ"), m.Var("Y"))
    assert body.consequent.handle == Proj("f")


def test_atom():
    assert parse_glue("g ~ Bill") == MeansAtom(Proj("g"), m.Const("Bill"))


def test_and2_is_banged():
    f = parse_glue(AND2)
    assert isinstance(f, Bang) and isinstance(f.body, Forall)


@pytest.mark.parametrize("text", [SUPPORTED, AND2, TWO_TRADE_BILLS, WANTED, "g~Bill",
                                  "R(f, SUBJ, g)", "forall v:handle. v~a -o v~b"])
def test_print_parse_round_trip(text):
    f = parse_glue(text)
    assert parse_glue(format_glue(f)) == f


def test_sorts_inferred():
    f = parse_glue(TWO_TRADE_BILLS)
    chain, body = g.strip_foralls(f)
    assert chain == [("H", Sort.HANDLE), ("S", Sort.FUNCTION)]
    inner = body.antecedent
    assert isinstance(inner, Forall) and inner.sort is Sort.MEANING
    chain, _ = g.strip_foralls(parse_glue(WANTED).body.body.antecedent.right)
    assert chain == [("s", Sort.HANDLE), ("p", Sort.MEANING)]


@pytest.mark.parametrize("text, needle", [
    ("forall X. f~X -o f~g(Y)", "unbound variable"),
    ("forall H. f~H", "sort clash"),
    ("forall X. (f SUBJ)~X -o", "expected"),
    ("(((a~x -o b~x) -o c~x) -o d~x) -o e~x", "nested too deeply"),
])
def test_parse_errors(text, needle):
    with pytest.raises(ParseError, match=needle):
        parse_glue(text)


def test_axiom_i_instantiation():
    inst = instantiate(AXIOM_I.body, {"F": "f", "P": "SUBJ", "G": "g", "X": m.Const("Bill")})
    assert isinstance(inst, Lolli)
    assert inst.antecedent == MeansAtom(Proj("g"), m.Const("Bill"))
    inner = inst.consequent
    assert isinstance(inner, Bang)
    assert format_glue(inner.body) == "R(f, SUBJ, g) -o (f SUBJ)~Bill"


def test_axiom_i_consequence_shape():
    f = axiom_i_consequence("h", m.Const("NAFTA"))
    assert format_glue(f) == "!(forall F,P. R(F, P, h) -o (F P)~NAFTA)"
    assert is_closed(f)


def test_partial_instantiation():
    f = instantiate(parse_glue(SUPPORTED), {"X": m.Const("Bill")})
    assert isinstance(f, Forall) and f.var == "Y"
    assert format_glue(f) == "forall Y. (f SUBJ)~Bill * (f OBJ)~Y -o f~supported(Bill, Y)"


def test_quantifier_instantiation():
    f = parse_glue(TWO_TRADE_BILLS)
    scope = m.parse_term("\\x. and(supported(Bill, x), opposed(Hillary, x))")
    inst = instantiate(f, {"H": Proj("f"), "S": scope})
    assert format_glue(inst.consequent) == \
        "f~two(z, trade-bill(z), and(supported(Bill, z), opposed(Hillary, z)))"
    assert is_closed(inst)


def test_instantiate_sort_errors():
    f = parse_glue(SUPPORTED)
    with pytest.raises(SortError):
        instantiate(f, {"X": "f"})
    with pytest.raises(SortError):
        instantiate(f, {"Z": m.Const("a")})
    with pytest.raises(SortError):
        instantiate(parse_glue(TWO_TRADE_BILLS), {"H": m.Const("a")})


def test_capture_avoiding_handle_substitution():
    f = Forall("H", Sort.HANDLE, Lolli(MeansAtom(GVar("H"), m.Var("a")), MeansAtom(GVar("K"), m.Var("a"))))
    out = g.subst_formula(f, {}, {"K": GVar("H")})
    assert out.var != "H"
    assert out.body.consequent.handle == GVar("H")


def test_formula_equal_up_to_renaming_and_beta():
    a = parse_glue("forall X. f~X -o f~g(X)")
    b = parse_glue("forall Z. f~Z -o f~[\\y. g(y)](Z)")
    assert formula_equal(a, b)
    assert not formula_equal(a, parse_glue("forall X. f~X -o h~g(X)"))


def test_qnp_site():
    assert qnp_site(parse_glue(TWO_TRADE_BILLS)) == "h"
    assert qnp_site(parse_glue("g~Hillary")) is None
    assert qnp_site(parse_glue(SUPPORTED)) is None


def test_builtin_schemata_are_closed():
    assert is_closed(AXIOM_I) and is_closed(QNP_DUPLICATION)
    assert isinstance(QNP_DUPLICATION.body.body.body.consequent, Tensor)


def test_r_atom_with_variables():
    f = parse_glue("forall F,P. R(F, P, g) -o (F P)~Bill")
    _, body = g.strip_foralls(f)
    assert body.antecedent == RAtom(GVar("F"), GVar("P"), "g")
