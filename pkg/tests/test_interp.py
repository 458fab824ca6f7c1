"""Interpretations: application, backward formula translation, and the
relation-encoding reduction."""

import random

import pytest

from logifp.core import STR_SIG, Signature, Structure, from_text, make_structure, render
from logifp.encode import j_encode
from logifp.errors import (
    EmptyUniverse,
    LogQuantifierUnsupported,
    NotLinearOrder,
    SignatureMismatch,
    UnsupportedTerm,
)
from logifp.evaluate import evaluate
from logifp.formula import (
    And,
    Exists,
    Ifp,
    parse_formula,
    validate,
)
from logifp.interp import (
    Interpretation,
    apply_interpretation,
    build_J_reduction,
    canon_vars,
    interpretation_from_json,
    interpretation_to_json,
    transform_formula,
)

DIGRAPH = Signature((("E", 2),), ordered=False)
ORDERED_DIGRAPH = Signature((("E", 2),), ordered=True)
ORDERED_F = Signature((("F", 2),), ordered=True)


def pairing_interpretation():
    """Width-2 pairing: universe = all pairs, F((a,b),(c,d)) iff E(b,c)."""
    return Interpretation(
        width=2,
        source=ORDERED_DIGRAPH,
        target=ORDERED_F,
        uni=parse_formula("x1=x1 & x2=x2"),
        rels={"F": parse_formula("E(x2,x3) & x1=x1 & x4=x4")},
        less=parse_formula("x1<x3 | (x1=x3 & x2<x4)"),
    )


def test_canon_vars():
    assert canon_vars(3) == ("x1", "x2", "x3")


def test_interpretation_validation():
    with pytest.raises(SignatureMismatch):
        Interpretation(width=1, source=ORDERED_DIGRAPH, target=ORDERED_F,
                       uni=parse_formula("x1=x1"), rels={})
    with pytest.raises(SignatureMismatch):
        Interpretation(width=1, source=ORDERED_DIGRAPH, target=ORDERED_F,
                       uni=parse_formula("x9=x9"),
                       rels={"F": parse_formula("x1=x2")},
                       less=parse_formula("x1<x2"))
    with pytest.raises(NotLinearOrder):
        Interpretation(width=1, source=ORDERED_DIGRAPH, target=ORDERED_F,
                       uni=parse_formula("x1=x1"),
                       rels={"F": parse_formula("x1=x2")})


def test_pairing_universe_size():
    a = make_structure(ORDERED_DIGRAPH, 2, {"E": {(0, 1)}})
    b = apply_interpretation(pairing_interpretation(), a)
    assert b.n == 4
    # universe indices are the pairs in lexicographic order; F holds where
    # the middle components form an E-edge: ((0,0),(1,0)) needs E(0,1)
    assert (0, 2) in b.rels["F"]
    assert (1, 2) not in b.rels["F"]  # would need E(1,1)


def test_apply_rejects_wrong_source():
    with pytest.raises(SignatureMismatch):
        apply_interpretation(pairing_interpretation(),
                             make_structure(ORDERED_F, 2, {}))


def test_apply_empty_universe():
    i = Interpretation(width=1, source=ORDERED_DIGRAPH, target=ORDERED_F,
                       uni=parse_formula("x1<x1"),
                       rels={"F": parse_formula("x1=x2")},
                       less=parse_formula("x1<x2"))
    with pytest.raises(EmptyUniverse):
        apply_interpretation(i, make_structure(ORDERED_DIGRAPH, 2, {}))


def test_apply_rejects_non_linear_order():
    i = Interpretation(width=1, source=ORDERED_DIGRAPH, target=ORDERED_F,
                       uni=parse_formula("x1=x1"),
                       rels={"F": parse_formula("x1=x2")},
                       less=parse_formula("x1=x1"))  # reflexive
    with pytest.raises(NotLinearOrder):
        apply_interpretation(i, make_structure(ORDERED_DIGRAPH, 2, {}))


def test_transform_exists_shape():
    f = transform_formula(parse_formula("Ex. F(x,x)"), pairing_interpretation())
    # the element quantifier becomes a width-2 block guarded by the
    # universe formula
    assert isinstance(f, Exists)
    assert isinstance(f.body, Exists)
    assert isinstance(f.body.body, And)


def test_transform_widens_fixed_point_arity():
    f = parse_formula("ifp[Y(u,v) <- F(u,v) | Ez.(F(u,z) & Y(z,v))](x,y)")
    g = transform_formula(f, pairing_interpretation())

    def find_ifp(h):
        if isinstance(h, Ifp):
            return h
        for attr in ("body", "left", "right"):
            if hasattr(h, attr):
                found = find_ifp(getattr(h, attr))
                if found is not None:
                    return found
        return None

    widened = find_ifp(g)
    assert widened is not None
    assert len(widened.vars) == 4  # arity 2 times width 2
    assert len(widened.terms) == 4


def test_transform_result_is_wellformed():
    i = pairing_interpretation()
    for text in ("Ex. F(x,x)", "Ax.Ey.(F(x,y) & !(x=y))", "Ex.Ay. (x<y | x=y)"):
        g = transform_formula(parse_formula(text), i)
        free_elem, free_rel = validate(g, ORDERED_DIGRAPH)
        assert not free_rel
        assert not free_elem  # sentences stay sentences


def test_transform_fundamental_property():
    i = pairing_interpretation()
    sentences = [
        "Ex.Ey.F(x,y)",
        "Ax.Ey.(F(x,y) -> Ez.(F(y,z) | y=z))",
        "Ex.Ay.(x<y | x=y)",
        "Ex.Ey.(ifp[Y(u,v) <- F(u,v) | Ez.(F(u,z) & Y(z,v))](x,y) & !(x=y))",
    ]
    rng = random.Random(3)
    for _ in range(15):
        n = rng.randint(2, 4)
        a = make_structure(ORDERED_DIGRAPH, n, {
            "E": {(rng.randrange(n), rng.randrange(n))
                  for _ in range(rng.randint(1, n * n))}})
        b = apply_interpretation(i, a)
        for text in sentences:
            f = parse_formula(text)
            assert evaluate(a, transform_formula(f, i)) == evaluate(b, f)


def test_transform_avoids_capture_under_shadowing():
    i = pairing_interpretation()
    f = parse_formula("Ex.(F(x,x) & Ex. F(x,x))")
    a = make_structure(ORDERED_DIGRAPH, 2, {"E": {(0, 0)}})
    assert evaluate(a, transform_formula(f, i)) == \
        evaluate(apply_interpretation(i, a), f)


def test_transform_rejects_untranslatable_terms():
    i = pairing_interpretation()
    with pytest.raises(UnsupportedTerm):
        transform_formula(parse_formula("Ex.Ey.BIT(x,y)"), i)
    with pytest.raises(LogQuantifierUnsupported):
        transform_formula(parse_formula("E2log[1] X:1 . Ex. X(x)"), i)


def test_build_j_reduction_widths():
    assert build_J_reduction(1).width == 6
    assert build_J_reduction(2).width == 7
    assert build_J_reduction(4).width == 8


def test_build_j_reduction_signatures():
    red = build_J_reduction(2)
    assert red.target == STR_SIG
    assert red.source.ordered
    assert red.source.has("R1") and red.source.has("R2")
    assert red.source.arity("R1") == 2


def _reduction_input(red, u_text, rels):
    n = len(u_text)
    u = from_text(u_text)
    relmap = {p: set(u.rels[p]) for p in STR_SIG.names}
    for j, rel in enumerate(rels):
        relmap[f"R{j + 1}"] = set(rel)
    return Structure(red.source, n, relmap)


def test_build_j_reduction_equation_single_relation():
    red = build_J_reduction(1)
    rng = random.Random(7)
    for _ in range(5):
        n = rng.randint(5, 7)
        u_text = "".join(rng.choice("01") for _ in range(n))
        rel = frozenset((rng.randrange(n), rng.randrange(n))
                        for _ in range(rng.randint(0, 3)))
        a = _reduction_input(red, u_text, [rel])
        out = apply_interpretation(red, a)
        assert render(out) == u_text + "#" + j_encode(n, rel)


def test_build_j_reduction_equation_two_relations():
    red = build_J_reduction(2)
    rng = random.Random(8)
    for _ in range(3):
        n = rng.randint(5, 6)
        u_text = "".join(rng.choice("01") for _ in range(n))
        rels = [frozenset((rng.randrange(n), rng.randrange(n))
                          for _ in range(rng.randint(0, 2))) for _ in range(2)]
        a = _reduction_input(red, u_text, rels)
        out = apply_interpretation(red, a)
        assert render(out) == u_text + "#" + "".join(j_encode(n, r) for r in rels)


def test_interpretation_json_round_trip():
    i = pairing_interpretation()
    doc = interpretation_to_json(i)
    j = interpretation_from_json(doc)
    assert j.width == i.width and j.source == i.source and j.target == i.target
    a = make_structure(ORDERED_DIGRAPH, 3, {"E": {(0, 1), (2, 2)}})
    assert apply_interpretation(j, a) == apply_interpretation(i, a)
