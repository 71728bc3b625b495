import pytest

from absmc import corpus, lang
from absmc.lang import (
    AddAssign,
    Assign,
    Cmp,
    IntLit,
    Kind,
    LangError,
    Program,
    Var,
    parse,
    to_source,
    validate,
)


def test_parse_fig1_structure(figs):
    p = figs["fig1"]
    assert p.declarations == (("x", Kind.INT), ("i", Kind.INT))
    kinds = [type(s).__name__ for s in p.body]
    assert kinds == ["Know", "Assign", "While"]
    assert isinstance(p.outcome, Cmp)
    assert p.outcome == Cmp(Var("x"), "<", IntLit(3))


def test_parse_fig4_wrapped_block(figs):
    p = figs["fig4"]
    assert [name for name, _ in p.declarations] == ["x", "y", "z"]
    assert type(p.body[-1]).__name__ == "If"


def test_corpus_parses_without_error():
    for name in corpus.NAMES:
        program = corpus.load(name)
        assert validate(program) == []


def test_minimal_program():
    p = parse("int x; know(x<3);")
    assert p.body == ()
    assert p.outcome == Cmp(Var("x"), "<", IntLit(3))


def test_kind_mismatch_rejected():
    with pytest.raises(LangError, match="assign"):
        parse("int x; x = uniform(); know(x<3);")


def test_mixed_expression_rejected():
    with pytest.raises(LangError, match="mixed"):
        parse("int x; double y; x = x + y; know(x<3);")


def test_comparison_kind_mismatch_rejected():
    with pytest.raises(LangError, match="comparison"):
        parse("int x; double y; know(x < y);")


def test_missing_outcome():
    with pytest.raises(LangError, match="missing outcome"):
        parse("int x; x = 0;")


def test_syntax_error_carries_position():
    with pytest.raises(LangError) as err:
        parse("int x;\nx = ;")
    assert err.value.line == 2
    assert "expected expression" in str(err.value)


def test_undeclared_variable():
    with pytest.raises(LangError, match="undeclared variable 'y'"):
        parse("int x; x = y; know(x<3);")


def test_duplicate_declaration_rejected():
    with pytest.raises(LangError, match="duplicate"):
        parse("int x; int x; know(x<3);")


def test_increment_desugars():
    p = parse("int i; i = 0; i++; know(i>0);")
    assert p.body[1] == AddAssign(0, "i", IntLit(1))
    q = parse("double i; i = 0.; i++; i--; know(i>=0.);")
    assert q.body[1].expr == lang.RealLit(1.0)


def test_bare_block_splices():
    p = parse("int x; { x = 1; { x += 1; } } know(x>0);")
    assert [type(s).__name__ for s in p.body] == ["Assign", "AddAssign"]


def test_query_overrides_outcome(figs):
    src = corpus.source("fig1")
    p = parse(src, query="x < 100")
    assert p.outcome == Cmp(Var("x"), "<", IntLit(100))
    # the source's outcome know is dropped, assumptions stay
    assert [type(s).__name__ for s in p.body] == ["Know", "Assign", "While"]


def test_query_on_source_without_know():
    p = parse("int x; x = 0;", query="x == 0")
    assert p.outcome == Cmp(Var("x"), "==", IntLit(0))


def test_boolean_parentheses_group():
    p = parse("int x, y; know((x < 0 || y < 0) && x < y); know(x<1);")
    cond = p.body[0].cond
    assert isinstance(cond, lang.And)
    assert isinstance(cond.left, lang.Or)


def test_multiplication_requires_literal():
    p = parse("int x, y; x = 3 * y; know(x<1);")
    assert isinstance(p.body[0].expr, lang.MulConst)
    q = parse("int x, y; x = y * 3; know(x<1);")
    assert q.body[0].expr == p.body[0].expr
    with pytest.raises(LangError, match="literal factor"):
        parse("int x, y; x = x * y; know(x<1);")


def test_negative_literals():
    p = parse("int x; x = -2; know(x < 0-1);")
    assert p.body[0].expr == IntLit(-2)


def test_comments_skipped():
    p = parse("int x; /* set x\n   to one */ x = 1; know(x>0);")
    assert p.body == (Assign(0, "x", IntLit(1)),)
    with pytest.raises(LangError, match="unterminated comment"):
        parse("int x; /* oops")


@pytest.mark.parametrize("name", corpus.NAMES)
def test_round_trip_corpus(name):
    p = corpus.load(name)
    assert parse(to_source(p)) == p


def test_round_trip_handwritten():
    samples = [
        "int x; know(x<3);",
        "int x, i; i = 0; while (i < 5) { if (x < i) { x += 2 * i; } else { x -= 1; } i++; } know(x<3);",
        "double a, b; a = uniform(); b = a - -1.5; know(a < b || b >= 2.0 && a != 0.0);",
    ]
    for src in samples:
        p = parse(src)
        assert parse(to_source(p)) == p
        # printing is a fixed point after one normalization
        assert to_source(parse(to_source(p))) == to_source(p)


def test_generator_sites_distinct(figs):
    for p in figs.values():
        sites = [g.site for g in lang.generator_sites(p)]
        assert len(sites) == len(set(sites))


def test_generator_sites_ordinals(figs):
    gens = lang.generator_sites(figs["fig4"])
    assert [g.ordinal for g in gens] == [1, 2, 3]
    assert all(not g.coin for g in gens)
    assert [g.inside_loop for g in gens] == [False, False, False]
    loop_gen = lang.generator_sites(figs["fig1"])
    assert loop_gen[0].coin and loop_gen[0].inside_loop


def test_validate_duplicate_declaration_diagnostic():
    p = Program((("x", Kind.INT), ("x", Kind.INT)), (), Cmp(Var("x"), "<", IntLit(3)))
    issues = validate(p)
    assert len(issues) == 1
    assert "duplicate" in issues[0]


def test_validate_undeclared_use_diagnostic():
    p = Program(
        (("x", Kind.INT),),
        (Assign(1, "x", Var("y")),),
        Cmp(Var("x"), "<", IntLit(3)),
    )
    issues = validate(p)
    assert len(issues) == 1
    assert "undeclared variable 'y'" in issues[0]


def test_validate_missing_outcome_diagnostic():
    p = Program((("x", Kind.INT),), (), None)
    assert validate(p) == ["missing outcome"]


def test_validate_well_formed_fig4(figs):
    assert validate(figs["fig4"]) == []


def test_parse_condition_rejects_trailing_input():
    with pytest.raises(LangError):
        lang.parse_condition("x < 1 x", {"x": Kind.INT})


def test_last_know_anywhere_is_outcome():
    p = parse("int x; know(x>=0); x = 1;")
    assert p.outcome == Cmp(Var("x"), ">=", IntLit(0))
    assert [type(s).__name__ for s in p.body] == ["Assign"]
