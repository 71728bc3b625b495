import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from absmc import lang
from absmc.intervals import INF, AbstractEnv, DomainError, Interval, arith, filter_env
from absmc.lang import Kind

I = lambda lo, hi: Interval.make(Kind.INT, lo, hi)  # noqa: E731
R = lambda lo, hi: Interval.make(Kind.REAL, lo, hi)  # noqa: E731
BOT_I = Interval.bottom(Kind.INT)


def gamma(iv):
    """Concretization of a small integer interval."""
    assert not math.isinf(iv.lo) and not math.isinf(iv.hi) or iv.is_bottom()
    if iv.is_bottom():
        return set()
    return set(range(int(iv.lo), int(iv.hi) + 1))


# --- documented examples -----------------------------------------------------


def test_join_examples():
    assert I(0, 1).join(I(3, 5)) == I(0, 5)
    assert BOT_I.join(I(1, 2)) == I(1, 2)
    assert I(0, 2).join(I(1, 3)) == I(0, 3)


def test_meet_examples():
    assert I(0, 5).meet(I(3, 9)) == I(3, 5)
    assert I(0, 1).meet(I(2, 3)).is_bottom()
    assert I(0, INF).meet(I(-INF, 3)) == I(0, 3)


def test_widen_examples():
    assert I(0, 1).widen(I(0, 2)) == I(0, INF)
    assert I(0, 1).widen(I(0, 1)) == I(0, 1)
    assert I(-1, 1).widen(I(-2, 1)) == I(-INF, 1)


def test_narrow_examples():
    assert I(0, INF).narrow(I(0, 4)) == I(0, 4)
    assert I(0, 5).narrow(I(1, 4)) == I(0, 5)  # finite bounds kept
    assert BOT_I.narrow(BOT_I).is_bottom()


def test_arith_examples():
    assert arith("add", I(0, 2), I(3, 4)) == I(3, 6)
    assert arith("sub", I(1, 2), I(0, 1)) == I(0, 2)
    assert arith("mul_const", I(1, 3), -2) == I(-6, -2)


def test_kind_mismatch_raises():
    with pytest.raises(DomainError):
        I(0, 1).join(R(0.0, 1.0))
    with pytest.raises(DomainError):
        I(0, 1).add(R(0.0, 1.0))


def env_of(**ivs):
    return AbstractEnv(dict(ivs))


def test_filter_examples():
    out = filter_env(env_of(x=I(0, 10)), lang.parse_condition("x < 3", {"x": Kind.INT}))
    assert out.get("x") == I(0, 2)

    out = filter_env(
        env_of(x=R(0.0, 1.0)),
        lang.parse_condition("x < 2.0", {"x": Kind.REAL}),
        polarity=False,
    )
    assert out.is_bottom()  # x >= 2 intersected with [0, 1]


def test_filter_derived_example_matches_brute_force():
    # every (x, y) with x in [0,5], y in [0,1] and x < y + 4, hulled
    sat = [(x, y) for x in range(6) for y in range(2) if x < y + 4]
    hull_x = (min(x for x, _ in sat), max(x for x, _ in sat))
    hull_y = (min(y for _, y in sat), max(y for _, y in sat))
    assert hull_x == (0, 4) and hull_y == (0, 1)

    env = env_of(x=I(0, 5), y=I(0, 1))
    cond = lang.parse_condition("x < y + 4", {"x": Kind.INT, "y": Kind.INT})
    out = filter_env(env, cond)
    assert out.get("x") == I(*hull_x)
    assert out.get("y") == I(*hull_y)


def test_filter_definite_decisions_are_exact():
    # a strict real comparison on a touching bound is definitely false
    env = env_of(i=R(3.0, 3.0))
    cond = lang.parse_condition("i < 3.0", {"i": Kind.REAL})
    assert filter_env(env, cond, True).is_bottom()
    assert filter_env(env, cond, False).get("i") == R(3.0, 3.0)


def test_rendering():
    assert I(0, 5).render() == "[0, 5]"
    assert I(0, INF).render() == "[0, +inf)"
    assert R(-INF, 3.0).render() == "(-inf, 3.0]"
    assert BOT_I.render() == "bottom"
    assert R(0.1, 0.1).render() == "[0.1, 0.1]"


def test_env_operations():
    bot = AbstractEnv.unreachable()
    env = AbstractEnv.tops({"x": Kind.INT})
    assert bot.join(env) == env and env.join(bot) == env
    assert bot.is_bottom()
    assert env.assign("x", BOT_I).is_bottom()
    with pytest.raises(DomainError):
        env.get("nope")


# --- property tests -----------------------------------------------------------

small = st.integers(min_value=-8, max_value=8)


@st.composite
def small_interval(draw):
    if draw(st.booleans()) and draw(st.integers(0, 9)) == 0:
        return BOT_I
    a, b = draw(small), draw(small)
    return I(min(a, b), max(a, b))


@given(small_interval(), small_interval())
def test_join_is_exact_hull(a, b):
    j = a.join(b)
    union = gamma(a) | gamma(b)
    assert union <= gamma(j)
    if union:
        assert gamma(j) == set(range(min(union), max(union) + 1))
    else:
        assert j.is_bottom()


@given(small_interval(), small_interval())
def test_meet_is_exact_intersection(a, b):
    assert gamma(a.meet(b)) == gamma(a) & gamma(b)


@given(small_interval(), small_interval())
def test_add_sub_exact(a, b):
    sums = {x + y for x in gamma(a) for y in gamma(b)}
    diffs = {x - y for x in gamma(a) for y in gamma(b)}
    assert gamma(a.add(b)) == (set(range(min(sums), max(sums) + 1)) if sums else set())
    assert gamma(a.sub(b)) == (set(range(min(diffs), max(diffs) + 1)) if diffs else set())


@given(small_interval(), st.integers(min_value=-4, max_value=4))
def test_mul_const_sound_and_exact(a, k):
    prods = {k * x for x in gamma(a)}
    got = gamma(a.scale(k))
    assert prods <= got
    if prods:
        assert min(got) == min(prods) and max(got) == max(prods)


@given(st.lists(small_interval().filter(lambda v: not v.is_bottom()), min_size=1, max_size=12))
def test_widening_chain_stabilizes(chain):
    # ascending chain: cumulative joins
    ascending = []
    acc = chain[0]
    for iv in chain:
        acc = acc.join(iv)
        ascending.append(acc)
    w = ascending[0]
    lo_changes = hi_changes = 0
    for nxt in ascending[1:]:
        new = w.widen(w.join(nxt))
        lo_changes += new.lo != w.lo
        hi_changes += new.hi != w.hi
        w = new
    assert lo_changes <= 2 and hi_changes <= 2
    assert ascending[-1].leq(w)
    assert w.widen(w.join(ascending[-1])) == w  # stabilized


finite_float = st.floats(
    min_value=-1e9, max_value=1e9, allow_nan=False, allow_infinity=False
)


@given(finite_float, finite_float, finite_float, finite_float)
@settings(max_examples=300)
def test_real_arith_outward_rounding_sound(a, b, c, d):
    x = R(min(a, b), max(a, b))
    y = R(min(c, d), max(c, d))
    s = x.add(y)
    diff = x.sub(y)
    # exact rational endpoints must lie inside the computed intervals
    for ex in (Fraction(x.lo) + Fraction(y.lo), Fraction(x.hi) + Fraction(y.hi)):
        assert Fraction(s.lo) <= ex <= Fraction(s.hi)
    for ex in (Fraction(x.lo) - Fraction(y.hi), Fraction(x.hi) - Fraction(y.lo)):
        assert Fraction(diff.lo) <= ex <= Fraction(diff.hi)


@given(finite_float, finite_float, st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
@settings(max_examples=300)
def test_real_scale_outward_rounding_sound(a, b, k):
    x = R(min(a, b), max(a, b))
    p = x.scale(k)
    for ex in (Fraction(k) * Fraction(x.lo), Fraction(k) * Fraction(x.hi)):
        assert Fraction(p.lo) <= ex <= Fraction(p.hi)


@given(small_interval(), small_interval(), st.sampled_from(lang.RELOPS))
def test_filter_atom_soundness_and_exactness(xs, ys, op):
    env = env_of(x=xs, y=ys)
    cond = lang.Cmp(lang.Var("x"), op, lang.Var("y"))
    out = filter_env(env, cond, True)
    opf = {
        "<": lambda p, q: p < q,
        "<=": lambda p, q: p <= q,
        ">": lambda p, q: p > q,
        ">=": lambda p, q: p >= q,
        "==": lambda p, q: p == q,
        "!=": lambda p, q: p != q,
    }[op]
    sat = [(p, q) for p in gamma(xs) for q in gamma(ys) if opf(p, q)]
    if not sat:
        assert out.is_bottom()
    else:
        xs_hull = {p for p, _ in sat}
        ys_hull = {q for _, q in sat}
        assert gamma(out.get("x")) >= xs_hull
        assert gamma(out.get("y")) >= ys_hull
        if op != "!=":  # != refines only exposed endpoints; soundness only
            assert min(gamma(out.get("x"))) == min(xs_hull)
            assert max(gamma(out.get("x"))) == max(xs_hull)
            assert min(gamma(out.get("y"))) == min(ys_hull)
            assert max(gamma(out.get("y"))) == max(ys_hull)


@given(small_interval(), small_interval(), st.sampled_from(lang.RELOPS))
def test_filter_negation_covers_complement(xs, ys, op):
    env = env_of(x=xs, y=ys)
    cond = lang.Cmp(lang.Var("x"), op, lang.Var("y"))
    pos = filter_env(env, cond, True)
    neg = filter_env(env, cond, False)
    # every concrete point lands in at least one side
    for p in gamma(xs):
        for q in gamma(ys):
            side = pos if eval(f"p {op} q") else neg
            assert not side.is_bottom()
            assert side.get("x").contains(p) and side.get("y").contains(q)
