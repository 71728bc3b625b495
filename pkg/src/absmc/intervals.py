"""Interval domain over program variables.

Values are closed intervals with optionally infinite ends, one flavor per
scalar kind.  INT intervals keep finite bounds as Python integers, so
their arithmetic is exact.  REAL intervals are double precision with
outward rounding: whenever a bound computation is inexact in floating
point it is nudged one ulp outward, so every operation result contains
the exact real-arithmetic image of its inputs.

The empty interval (bottom) is the canonical ``[+inf, -inf]``; an
AbstractEnv is either unreachable or a total map from declared variables
to intervals, with unreachability absorbing every operation.

Lattice operations follow the classic scheme:

* join is the interval hull, meet the intersection;
* widening jumps any unstable bound to infinity, so ascending chains
  stabilize after at most two widenings per bound;
* narrowing refines only infinite bounds, so descending iteration
  terminates while staying above the limit.

Guard filtering (`filter_env`) refines an environment by a condition.
Comparisons of shape ``var op e`` and ``e op var`` refine the variable
against the interval of ``e``; other shapes refine nothing, which is
sound.  Decisions about definite emptiness use exact comparison
semantics; only the refined intervals weaken strict real inequalities
to their closed form (the boundary has measure zero).
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import lang
from .lang import Kind

INF = float("inf")
_MAX = sys.float_info.max


class DomainError(Exception):
    """Kind mismatch or malformed interval operation."""


# ---------------------------------------------------------------------------
# Outward-rounded double arithmetic
#
# IEEE add/sub/mul are correctly rounded, so the exact result is within
# one ulp of the computed one; a single nextafter step is enough.
# ---------------------------------------------------------------------------


def _sum_is_exact(a: float, b: float, s: float) -> bool:
    # TwoSum error term; zero iff a + b == s exactly.
    bv = s - a
    av = s - bv
    return (a - av) == 0.0 and (b - bv) == 0.0


def _add_down(a: float, b: float) -> float:
    s = a + b
    if s != s:
        raise DomainError("undefined sum of infinities")
    if s == -INF:
        return s
    if s == INF:
        return INF if (a == INF or b == INF) else _MAX
    if math.isinf(a) or math.isinf(b):
        return s
    return s if _sum_is_exact(a, b, s) else math.nextafter(s, -INF)


def _add_up(a: float, b: float) -> float:
    s = a + b
    if s != s:
        raise DomainError("undefined sum of infinities")
    if s == INF:
        return s
    if s == -INF:
        return -INF if (a == -INF or b == -INF) else -_MAX
    if math.isinf(a) or math.isinf(b):
        return s
    return s if _sum_is_exact(a, b, s) else math.nextafter(s, INF)


def _mul_is_exact(a: float, b: float, p: float) -> bool:
    return Fraction(a) * Fraction(b) == Fraction(p)


def _mul_down(a: float, b: float) -> float:
    p = a * b
    if p != p:
        raise DomainError("undefined product with infinity")
    if p == -INF:
        return p
    if p == INF:
        return INF if (math.isinf(a) or math.isinf(b)) else _MAX
    if math.isinf(a) or math.isinf(b):
        return p
    return p if _mul_is_exact(a, b, p) else math.nextafter(p, -INF)


def _mul_up(a: float, b: float) -> float:
    p = a * b
    if p != p:
        raise DomainError("undefined product with infinity")
    if p == INF:
        return p
    if p == -INF:
        return -INF if (math.isinf(a) or math.isinf(b)) else -_MAX
    if math.isinf(a) or math.isinf(b):
        return p
    return p if _mul_is_exact(a, b, p) else math.nextafter(p, INF)


# ---------------------------------------------------------------------------
# Interval
# ---------------------------------------------------------------------------


def _norm_bound(kind: Kind, x) -> int | float:
    if kind is Kind.INT:
        if type(x) is int:
            return x
        if math.isinf(x):
            return x
        i = int(x)
        if i != x:
            raise DomainError(f"non-integral bound {x!r} for an integer interval")
        return i
    if type(x) is float:
        return x
    return float(x)


@dataclass(frozen=True, slots=True)
class Interval:
    """A closed interval of one scalar kind; construct via the factories."""

    kind: Kind
    lo: int | float
    hi: int | float

    @staticmethod
    def make(kind: Kind, lo, hi) -> "Interval":
        if lo > hi:
            return Interval.bottom(kind)
        return Interval(kind, _norm_bound(kind, lo), _norm_bound(kind, hi))

    @staticmethod
    def bottom(kind: Kind) -> "Interval":
        return _BOTTOM[kind]

    @staticmethod
    def top(kind: Kind) -> "Interval":
        return _TOP[kind]

    @staticmethod
    def const(kind: Kind, value) -> "Interval":
        v = _norm_bound(kind, value)
        return Interval(kind, v, v)

    def is_bottom(self) -> bool:
        return self.lo > self.hi

    def contains(self, x) -> bool:
        return not self.is_bottom() and self.lo <= x <= self.hi

    def _require_same_kind(self, other: "Interval") -> None:
        if self.kind is not other.kind:
            raise DomainError(f"kind mismatch: {self.kind.value} vs {other.kind.value}")

    # lattice

    def leq(self, other: "Interval") -> bool:
        self._require_same_kind(other)
        if self.is_bottom():
            return True
        if other.is_bottom():
            return False
        return other.lo <= self.lo and self.hi <= other.hi

    def join(self, other: "Interval") -> "Interval":
        self._require_same_kind(other)
        if self.is_bottom():
            return other
        if other.is_bottom():
            return self
        return Interval(self.kind, min(self.lo, other.lo), max(self.hi, other.hi))

    def meet(self, other: "Interval") -> "Interval":
        self._require_same_kind(other)
        if self.is_bottom() or other.is_bottom():
            return Interval.bottom(self.kind)
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return Interval.bottom(self.kind)
        return Interval(self.kind, lo, hi)

    def widen(self, other: "Interval") -> "Interval":
        """Bounds of ``other`` strictly beyond ours become infinite."""

        self._require_same_kind(other)
        if self.is_bottom():
            return other
        if other.is_bottom():
            return self
        lo = self.lo if other.lo >= self.lo else -INF
        hi = self.hi if other.hi <= self.hi else INF
        return Interval(self.kind, lo, hi)

    def narrow(self, other: "Interval") -> "Interval":
        """Refine infinite bounds to ``other``'s; requires other <= self."""

        self._require_same_kind(other)
        if other.is_bottom() or self.is_bottom():
            return Interval.bottom(self.kind)
        lo = other.lo if self.lo == -INF else self.lo
        hi = other.hi if self.hi == INF else self.hi
        return Interval.make(self.kind, lo, hi)

    # arithmetic

    def add(self, other: "Interval") -> "Interval":
        self._require_same_kind(other)
        if self.is_bottom() or other.is_bottom():
            return Interval.bottom(self.kind)
        if self.kind is Kind.INT:
            return Interval.make(self.kind, self.lo + other.lo, self.hi + other.hi)
        return Interval.make(
            self.kind, _add_down(self.lo, other.lo), _add_up(self.hi, other.hi)
        )

    def sub(self, other: "Interval") -> "Interval":
        self._require_same_kind(other)
        if self.is_bottom() or other.is_bottom():
            return Interval.bottom(self.kind)
        if self.kind is Kind.INT:
            return Interval.make(self.kind, self.lo - other.hi, self.hi - other.lo)
        return Interval.make(
            self.kind, _add_down(self.lo, -other.hi), _add_up(self.hi, -other.lo)
        )

    def scale(self, coeff) -> "Interval":
        """Multiply by a literal coefficient of the same kind."""

        if self.is_bottom():
            return self
        if coeff == 0:
            return Interval.const(self.kind, coeff)
        if self.kind is Kind.INT:
            a, b = coeff * self.lo, coeff * self.hi
            return Interval.make(self.kind, min(a, b), max(a, b))
        c = float(coeff)
        if c > 0:
            return Interval.make(self.kind, _mul_down(c, self.lo), _mul_up(c, self.hi))
        return Interval.make(self.kind, _mul_down(c, self.hi), _mul_up(c, self.lo))

    # rendering

    def render(self) -> str:
        if self.is_bottom():
            return "bottom"
        left = "(-inf" if self.lo == -INF else "[" + _fmt(self.kind, self.lo)
        right = "+inf)" if self.hi == INF else _fmt(self.kind, self.hi) + "]"
        return f"{left}, {right}"

    def __str__(self) -> str:
        return self.render()


def _fmt(kind: Kind, x) -> str:
    if kind is Kind.INT and not math.isinf(x):
        return str(int(x))
    return repr(float(x))


_BOTTOM = {k: Interval(k, INF, -INF) for k in Kind}
_TOP = {k: Interval(k, -INF, INF) for k in Kind}


def arith(op: str, a: Interval, b) -> Interval:
    """Dispatch helper: op in {"add", "sub", "mul_const"}; for mul_const,
    ``b`` is the literal coefficient."""

    if op == "add":
        return a.add(b)
    if op == "sub":
        return a.sub(b)
    if op == "mul_const":
        return a.scale(b)
    raise DomainError(f"unknown arithmetic operation {op!r}")


# ---------------------------------------------------------------------------
# Abstract environments
# ---------------------------------------------------------------------------


class AbstractEnv:
    """Either unreachable (bottom) or a total map variable -> Interval."""

    __slots__ = ("values",)

    def __init__(self, values: dict[str, Interval] | None):
        self.values = values

    @classmethod
    def unreachable(cls) -> "AbstractEnv":
        return cls(None)

    @classmethod
    def tops(cls, kinds: dict[str, Kind]) -> "AbstractEnv":
        return cls({name: Interval.top(kind) for name, kind in kinds.items()})

    def is_bottom(self) -> bool:
        return self.values is None

    def get(self, name: str) -> Interval:
        if self.values is None:
            raise DomainError("lookup in unreachable environment")
        try:
            return self.values[name]
        except KeyError:
            raise DomainError(f"undeclared variable '{name}'") from None

    def assign(self, name: str, iv: Interval) -> "AbstractEnv":
        if self.values is None:
            return self
        if name not in self.values:
            raise DomainError(f"undeclared variable '{name}'")
        if iv.is_bottom():
            return AbstractEnv.unreachable()
        values = dict(self.values)
        values[name] = iv
        return AbstractEnv(values)

    def join(self, other: "AbstractEnv") -> "AbstractEnv":
        if self.values is None:
            return other
        if other.values is None:
            return self
        return AbstractEnv(
            {name: iv.join(other.values[name]) for name, iv in self.values.items()}
        )

    def widen(self, other: "AbstractEnv") -> "AbstractEnv":
        if self.values is None:
            return other
        if other.values is None:
            return self
        return AbstractEnv(
            {name: iv.widen(other.values[name]) for name, iv in self.values.items()}
        )

    def narrow(self, other: "AbstractEnv") -> "AbstractEnv":
        if self.values is None or other.values is None:
            return AbstractEnv.unreachable()
        return AbstractEnv(
            {name: iv.narrow(other.values[name]) for name, iv in self.values.items()}
        )

    def leq(self, other: "AbstractEnv") -> bool:
        if self.values is None:
            return True
        if other.values is None:
            return False
        return all(iv.leq(other.values[name]) for name, iv in self.values.items())

    def __eq__(self, other) -> bool:
        return isinstance(other, AbstractEnv) and self.values == other.values

    def __repr__(self) -> str:
        return f"AbstractEnv({self.render()})"

    def render(self) -> str:
        if self.values is None:
            return "unreachable"
        return " ".join(f"{name}={iv.render()}" for name, iv in self.values.items())


# ---------------------------------------------------------------------------
# Expression ranges and guard filtering
# ---------------------------------------------------------------------------


def eval_range(expr: lang.Expr, env: AbstractEnv) -> Interval:
    """Interval of an expression's possible values; generators contribute
    their full range (this evaluator never samples)."""

    if isinstance(expr, lang.IntLit):
        return Interval.const(Kind.INT, expr.value)
    if isinstance(expr, lang.RealLit):
        return Interval.const(Kind.REAL, expr.value)
    if isinstance(expr, lang.Var):
        return env.get(expr.name)
    if isinstance(expr, lang.Add):
        return eval_range(expr.left, env).add(eval_range(expr.right, env))
    if isinstance(expr, lang.Sub):
        return eval_range(expr.left, env).sub(eval_range(expr.right, env))
    if isinstance(expr, lang.MulConst):
        return eval_range(expr.expr, env).scale(expr.coeff.value)
    if isinstance(expr, lang.CoinFlip):
        return Interval(Kind.INT, 0, 1)
    if isinstance(expr, lang.Uniform):
        return Interval(Kind.REAL, 0.0, 1.0)
    raise DomainError(f"unknown expression node {type(expr).__name__}")


_NEGATED = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


def _definitely_empty(op: str, a: Interval, b: Interval) -> bool:
    """No pair (x in a, y in b) satisfies ``x op y``.  Exact, including
    strict comparisons on reals."""

    if a.is_bottom() or b.is_bottom():
        return True
    if op == "<":
        return a.lo >= b.hi
    if op == "<=":
        return a.lo > b.hi
    if op == ">":
        return a.hi <= b.lo
    if op == ">=":
        return a.hi < b.lo
    if op == "==":
        return max(a.lo, b.lo) > min(a.hi, b.hi)
    if op == "!=":
        return a.lo == a.hi == b.lo == b.hi
    raise DomainError(f"unknown comparison operator {op!r}")


def _constraint(op: str, b: Interval, kind: Kind) -> Interval:
    """Values of the left operand compatible with ``left op b`` for some
    value of b.  Strict real comparisons weaken to their closed form."""

    if op == "<":
        hi = b.hi - 1 if (kind is Kind.INT and not math.isinf(b.hi)) else b.hi
        return Interval.make(kind, -INF, hi)
    if op == "<=":
        return Interval.make(kind, -INF, b.hi)
    if op == ">":
        lo = b.lo + 1 if (kind is Kind.INT and not math.isinf(b.lo)) else b.lo
        return Interval.make(kind, lo, INF)
    if op == ">=":
        return Interval.make(kind, b.lo, INF)
    if op == "==":
        return b
    raise DomainError(f"unknown comparison operator {op!r}")


def _refine_var(env: AbstractEnv, name: str, op: str, b: Interval) -> AbstractEnv:
    cur = env.get(name)
    if op == "!=":
        if b.lo == b.hi and cur.kind is Kind.INT and not b.is_bottom():
            v = b.lo
            lo = cur.lo + 1 if cur.lo == v else cur.lo
            hi = cur.hi - 1 if cur.hi == v else cur.hi
            nv = Interval.make(cur.kind, lo, hi)
        else:
            nv = cur
    else:
        nv = cur.meet(_constraint(op, b, cur.kind))
    if nv.is_bottom():
        return AbstractEnv.unreachable()
    return env.assign(name, nv)


_MIRROR = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}


def _refine_cmp(env: AbstractEnv, cmp: lang.Cmp) -> AbstractEnv:
    li = eval_range(cmp.left, env)
    ri = eval_range(cmp.right, env)
    if _definitely_empty(cmp.op, li, ri):
        return AbstractEnv.unreachable()
    out = env
    if isinstance(cmp.left, lang.Var):
        out = _refine_var(out, cmp.left.name, cmp.op, ri)
        if out.is_bottom():
            return out
    if isinstance(cmp.right, lang.Var):
        out = _refine_var(out, cmp.right.name, _MIRROR[cmp.op], li)
    return out


def filter_env(env: AbstractEnv, cond: lang.BoolExpr, polarity: bool = True) -> AbstractEnv:
    """Sound refinement of ``env`` by ``cond`` (or its negation when
    polarity is false); every concrete environment satisfying the
    condition stays inside the result."""

    if env.is_bottom():
        return env
    if isinstance(cond, lang.Cmp):
        if polarity:
            return _refine_cmp(env, cond)
        flipped = lang.Cmp(cond.left, _NEGATED[cond.op], cond.right, pos=cond.pos)
        return _refine_cmp(env, flipped)
    if isinstance(cond, lang.And):
        if polarity:
            return filter_env(filter_env(env, cond.left, True), cond.right, True)
        return filter_env(env, cond.left, False).join(filter_env(env, cond.right, False))
    if isinstance(cond, lang.Or):
        if polarity:
            return filter_env(env, cond.left, True).join(filter_env(env, cond.right, True))
        return filter_env(filter_env(env, cond.left, False), cond.right, False)
    raise DomainError(f"unknown condition node {type(cond).__name__}")
