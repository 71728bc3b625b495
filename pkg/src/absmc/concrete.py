"""Concrete reference semantics and the brute-force oracle.

`run_concrete` executes a program on fully concrete values.  Generator
calls are resolved through a ChoiceSource: recorded draws are replayed by
their (site, iteration word) key and unseen keys fall back to a
pseudorandom stream, which realizes sampling from the product measure
over all possible draw positions.  A `know` assumption that evaluates
false prunes the execution as vacuous (result 0); the result is 1 iff
the final state satisfies the outcome.

`oracle_estimate` approximates the probability that SOME admissible
value of the unconstrained inputs drives the program into the outcome
set.  The existential is realized by maximizing over a finite grid of
each unconstrained variable's admissible range, which yields a lower
bound on the true supremum:

* exact mode (coin_flip programs only) enumerates the tree of coin
  assignments, weighting each leaf class by 2^-draws, and returns the
  exact weighted sum as a Fraction-backed float;
* sampled mode estimates by Monte Carlo, running all grid points against
  shared per-sample draws.  Samples are evaluated in vectorized batches
  (numpy) so million-sample references stay affordable.

The unconstrained (nondeterministic) inputs are the variables read
before any assignment; their admissible ranges come from the `know`
assumptions that precede their first use.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import lang
from .intervals import INF, AbstractEnv, filter_env
from .lang import Kind


class OracleError(Exception):
    """The requested oracle computation is infeasible."""


class MissingChoice(Exception):
    """A draw was requested for a key absent from an enumerating source."""

    def __init__(self, key):
        self.key = key
        super().__init__(f"missing choice for {key}")


class ChoiceSource:
    """Recorded draws plus an optional pseudorandom fallback.

    Keys seen once are memoized, so each (site, word) position has one
    value per source regardless of how many grid points consult it.
    """

    def __init__(self, table=None, rng: random.Random | None = None):
        self.values: dict[tuple[int, tuple[int, ...]], int | float] = dict(table or {})
        self.rng = rng

    def draw(self, site: int, word: tuple[int, ...], coin: bool):
        key = (site, word)
        if key in self.values:
            return self.values[key]
        if self.rng is None:
            raise MissingChoice(key)
        value = self.rng.getrandbits(1) if coin else self.rng.random()
        self.values[key] = value
        return value


class _Pruned(Exception):
    pass


class _OutOfSteps(Exception):
    pass


def run_concrete(
    program: lang.Program,
    init: dict[str, int | float],
    choices: ChoiceSource,
    *,
    step_budget: int = 1_000_000,
    diagnostics: list[str] | None = None,
) -> int:
    """Standard semantics; returns 1 iff the final state satisfies the
    outcome.  Divergent executions never reach the final state and
    return 0 with a diagnostic."""

    if program.outcome is None:
        raise OracleError("program has no outcome")
    kinds = program.kinds()
    env: dict[str, int | float] = {}
    for name, kind in kinds.items():
        v = init.get(name, 0)
        env[name] = int(v) if kind is Kind.INT else float(v)
    word: list[int] = []
    budget = [step_budget]

    def tick():
        budget[0] -= 1
        if budget[0] < 0:
            raise _OutOfSteps()

    def ev(expr: lang.Expr):
        if isinstance(expr, (lang.IntLit, lang.RealLit)):
            return expr.value
        if isinstance(expr, lang.Var):
            return env[expr.name]
        if isinstance(expr, lang.Add):
            return ev(expr.left) + ev(expr.right)
        if isinstance(expr, lang.Sub):
            return ev(expr.left) - ev(expr.right)
        if isinstance(expr, lang.MulConst):
            return expr.coeff.value * ev(expr.expr)
        if isinstance(expr, lang.CoinFlip):
            return choices.draw(expr.site, tuple(word), True)
        if isinstance(expr, lang.Uniform):
            return choices.draw(expr.site, tuple(word), False)
        raise OracleError(f"unknown expression node {type(expr).__name__}")

    def bv(cond: lang.BoolExpr) -> bool:
        # Both operands always evaluate, keeping draw positions aligned
        # with the abstract interpreter.
        if isinstance(cond, lang.Cmp):
            left, right = ev(cond.left), ev(cond.right)
            return {
                "<": left < right,
                "<=": left <= right,
                ">": left > right,
                ">=": left >= right,
                "==": left == right,
                "!=": left != right,
            }[cond.op]
        if isinstance(cond, lang.And):
            lres, rres = bv(cond.left), bv(cond.right)
            return lres and rres
        if isinstance(cond, lang.Or):
            lres, rres = bv(cond.left), bv(cond.right)
            return lres or rres
        raise OracleError(f"unknown condition node {type(cond).__name__}")

    def ex_block(stmts) -> None:
        for s in stmts:
            tick()
            if isinstance(s, lang.Assign):
                env[s.name] = ev(s.expr)
            elif isinstance(s, lang.AddAssign):
                env[s.name] = env[s.name] + ev(s.expr)
            elif isinstance(s, lang.SubAssign):
                env[s.name] = env[s.name] - ev(s.expr)
            elif isinstance(s, lang.Know):
                if not bv(s.cond):
                    raise _Pruned()
            elif isinstance(s, lang.If):
                if bv(s.cond):
                    ex_block(s.then)
                else:
                    ex_block(s.orelse)
            elif isinstance(s, lang.While):
                word.append(1)
                try:
                    while bv(s.cond):
                        tick()
                        ex_block(s.body)
                        word[-1] += 1
                finally:
                    word.pop()
            else:
                raise OracleError(f"unknown statement node {type(s).__name__}")

    try:
        ex_block(program.body)
    except _Pruned:
        return 0
    except _OutOfSteps:
        if diagnostics is not None:
            diagnostics.append("nonterminating path: step budget exceeded")
        return 0
    return 1 if bv(program.outcome) else 0


# ---------------------------------------------------------------------------
# Nondeterministic input specification
# ---------------------------------------------------------------------------


def _stmt_reads(stmt: lang.Stmt) -> set[str]:
    names = set()
    for e in lang._stmt_exprs(stmt):
        if isinstance(e, lang.Var):
            names.add(e.name)
    if isinstance(stmt, lang.If):
        for s in itertools.chain(stmt.then, stmt.orelse):
            names |= _stmt_reads(s)
    elif isinstance(stmt, lang.While):
        for s in stmt.body:
            names |= _stmt_reads(s)
    if isinstance(stmt, (lang.AddAssign, lang.SubAssign)):
        names.add(stmt.name)
    return names


def _cond_reads(cond: lang.BoolExpr) -> set[str]:
    return {e.name for e in lang.iter_cond_exprs(cond) if isinstance(e, lang.Var)}


def _collect_unassigned_reads(stmts, assigned: set[str], found: set[str]) -> None:
    """Reads that can happen before any assignment, in execution order.
    A variable assigned in only one If branch, or only inside a loop body,
    does not count as assigned afterwards (the other path may run)."""

    for stmt in stmts:
        if isinstance(stmt, (lang.Assign, lang.AddAssign, lang.SubAssign)):
            reads = {e.name for e in lang.iter_exprs(stmt.expr) if isinstance(e, lang.Var)}
            if isinstance(stmt, (lang.AddAssign, lang.SubAssign)):
                reads.add(stmt.name)
            found |= reads - assigned
            assigned.add(stmt.name)
        elif isinstance(stmt, lang.Know):
            found |= _cond_reads(stmt.cond) - assigned
        elif isinstance(stmt, lang.If):
            found |= _cond_reads(stmt.cond) - assigned
            then_assigned = set(assigned)
            else_assigned = set(assigned)
            _collect_unassigned_reads(stmt.then, then_assigned, found)
            _collect_unassigned_reads(stmt.orelse, else_assigned, found)
            assigned |= then_assigned & else_assigned
        elif isinstance(stmt, lang.While):
            found |= _cond_reads(stmt.cond) - assigned
            body_assigned = set(assigned)
            _collect_unassigned_reads(stmt.body, body_assigned, found)


def _stmt_writes(stmt: lang.Stmt) -> set[str]:
    names = set()
    for s in lang.iter_stmts([stmt]):
        if isinstance(s, (lang.Assign, lang.AddAssign, lang.SubAssign)):
            names.add(s.name)
    return names


@dataclass(frozen=True)
class NondetSpec:
    """Admissible ranges of the unconstrained inputs plus grid resolution."""

    ranges: dict[str, tuple[int | float, int | float]]
    grid: int = 64

    @classmethod
    def from_program(cls, program: lang.Program, grid: int = 64) -> "NondetSpec":
        """Derive specs from the source: a variable is unconstrained when
        it is read before any assignment; its range comes from the `know`
        assumptions preceding its first use in a non-know statement."""

        kinds = program.kinds()
        decl_order = [name for name, _ in program.declarations]
        found: set[str] = set()
        assigned: set[str] = set()
        _collect_unassigned_reads(program.body, assigned, found)
        if program.outcome is not None:
            found |= _cond_reads(program.outcome) - assigned
        nondet = [name for name in decl_order if name in found]  # reproducible order

        env = AbstractEnv.tops(kinds)
        locked: set[str] = set()
        for stmt in program.body:
            if isinstance(stmt, lang.Know):
                refined = filter_env(env, stmt.cond, True)
                if refined.is_bottom():
                    raise OracleError("contradictory know assumptions")
                env = AbstractEnv(
                    {
                        name: (env.get(name) if name in locked else refined.get(name))
                        for name in kinds
                    }
                )
            else:
                locked |= _stmt_reads(stmt) | _stmt_writes(stmt)

        ranges: dict[str, tuple[int | float, int | float]] = {}
        for name in nondet:
            iv = env.get(name)
            if iv.lo == -INF or iv.hi == INF:
                raise OracleError(
                    f"unconstrained variable '{name}' has an unbounded admissible range"
                )
            ranges[name] = (iv.lo, iv.hi)
        return cls(ranges, grid)

    def grid_points(self, program: lang.Program) -> dict[str, list[int | float]]:
        kinds = program.kinds()
        points: dict[str, list[int | float]] = {}
        for name, (lo, hi) in self.ranges.items():
            if kinds[name] is Kind.INT:
                span = int(hi) - int(lo) + 1
                if span <= self.grid:
                    pts = list(range(int(lo), int(hi) + 1))
                else:
                    pts = sorted(
                        {int(round(lo + (hi - lo) * k / (self.grid - 1))) for k in range(self.grid)}
                    )
            elif self.grid == 1:
                pts = [float(lo)]
            else:
                pts = [lo + (hi - lo) * k / (self.grid - 1) for k in range(self.grid)]
                pts[0], pts[-1] = float(lo), float(hi)  # endpoints exactly
            points[name] = pts
        return points

    def combos(self, program: lang.Program) -> list[dict[str, int | float]]:
        points = self.grid_points(program)
        if not points:
            return [{}]
        names = list(points)
        return [dict(zip(names, combo)) for combo in itertools.product(*points.values())]


# ---------------------------------------------------------------------------
# Oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleReport:
    mode: str
    estimate: float
    paths_or_samples: int
    grid: int
    seed: int | None
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "estimate": self.estimate,
            "paths_or_samples": self.paths_or_samples,
            "grid": self.grid,
            "seed": self.seed,
            "diagnostics": list(self.diagnostics),
        }


def _has_uniform(program: lang.Program) -> bool:
    return any(not g.coin for g in lang.generator_sites(program))


def oracle_estimate(
    program: lang.Program,
    *,
    mode: str,
    n: int = 1_000_000,
    grid: int = 64,
    seed: int | None = 0,
    spec: NondetSpec | None = None,
    node_budget: int = 500_000,
    step_budget: int = 1_000_000,
) -> OracleReport:
    """Reference estimate of the worst-case outcome probability."""

    if mode not in ("exact", "sampled"):
        raise OracleError(f"unknown oracle mode {mode!r}")
    spec = spec or NondetSpec.from_program(program, grid)
    combos = spec.combos(program)
    if mode == "exact":
        if _has_uniform(program):
            raise OracleError("exact mode requires all generators to be coin_flip")
        total, leaves = _exact_discrete(program, combos, node_budget, step_budget)
        return OracleReport("exact", float(total), leaves, spec.grid, None)
    if n < 1:
        raise OracleError("sampled mode needs n >= 1")
    rng = np.random.default_rng(seed)
    hits = 0
    diagnostics: list[str] = []
    remaining = n
    while remaining > 0:
        m = min(remaining, 1 << 17)
        hits += int(_sampled_batch(program, combos, m, rng, diagnostics, step_budget).sum())
        remaining -= m
    return OracleReport("sampled", hits / n, n, spec.grid, seed, tuple(diagnostics[:4]))


def _exact_discrete(program, combos, node_budget, step_budget=1_000_000) -> tuple[Fraction, int]:
    """Exact expectation of the grid-maximized hit indicator, by lazy
    enumeration of coin assignments: a class of coin sequences splits only
    when some grid point actually reads an unassigned key."""

    budget = [node_budget]
    leaves = [0]

    def explore(assignment: dict) -> Fraction:
        budget[0] -= 1
        if budget[0] < 0:
            raise OracleError("exact enumeration exceeded its path budget")
        missing = None
        for combo in combos:
            src = ChoiceSource(assignment, rng=None)
            try:
                if run_concrete(program, combo, src, step_budget=step_budget) == 1:
                    leaves[0] += 1
                    return Fraction(1, 2 ** len(assignment))
            except MissingChoice as m:
                if missing is None:
                    missing = m.key
        if missing is None:
            leaves[0] += 1
            return Fraction(0)
        zero = dict(assignment)
        zero[missing] = 0
        one = dict(assignment)
        one[missing] = 1
        return explore(zero) + explore(one)

    total = explore({})
    return total, leaves[0]


class _VectorRun:
    """Vectorized concrete execution of one grid point over a batch of
    samples.  Draw arrays are shared across grid points through the
    caller's table, mirroring the shared product measure."""

    def __init__(self, program, table, rng, m, step_budget=1_000_000):
        self.program = program
        self.kinds = program.kinds()
        self.table = table
        self.rng = rng
        self.m = m
        self.budget = step_budget
        self.diagnosed = False

    def _draw(self, site, word, coin):
        key = (site, word)
        arr = self.table.get(key)
        if arr is None:
            if coin:
                arr = self.rng.integers(0, 2, size=self.m, dtype=np.int64)
            else:
                arr = self.rng.random(self.m)
            self.table[key] = arr
        return arr

    def run(self, combo: dict) -> np.ndarray:
        self.env = {}
        for name, kind in self.kinds.items():
            dtype = np.int64 if kind is Kind.INT else np.float64
            value = combo.get(name, 0)
            self.env[name] = np.full(self.m, value, dtype=dtype)
        self.alive = np.ones(self.m, dtype=bool)
        self.word: list[int] = []
        self._block(self.program.body, np.ones(self.m, dtype=bool))
        return self._bool(self.program.outcome) & self.alive

    def _ev(self, expr):
        if isinstance(expr, (lang.IntLit, lang.RealLit)):
            return expr.value
        if isinstance(expr, lang.Var):
            return self.env[expr.name]
        if isinstance(expr, lang.Add):
            return self._ev(expr.left) + self._ev(expr.right)
        if isinstance(expr, lang.Sub):
            return self._ev(expr.left) - self._ev(expr.right)
        if isinstance(expr, lang.MulConst):
            return expr.coeff.value * self._ev(expr.expr)
        if isinstance(expr, lang.CoinFlip):
            return self._draw(expr.site, tuple(self.word), True)
        if isinstance(expr, lang.Uniform):
            return self._draw(expr.site, tuple(self.word), False)
        raise OracleError(f"unknown expression node {type(expr).__name__}")

    def _bool(self, cond) -> np.ndarray:
        if isinstance(cond, lang.Cmp):
            left, right = self._ev(cond.left), self._ev(cond.right)
            op = cond.op
            if op == "<":
                out = left < right
            elif op == "<=":
                out = left <= right
            elif op == ">":
                out = left > right
            elif op == ">=":
                out = left >= right
            elif op == "==":
                out = left == right
            else:
                out = left != right
            return np.broadcast_to(out, (self.m,)) if np.ndim(out) == 0 else out
        if isinstance(cond, lang.And):
            return self._bool(cond.left) & self._bool(cond.right)
        if isinstance(cond, lang.Or):
            return self._bool(cond.left) | self._bool(cond.right)
        raise OracleError(f"unknown condition node {type(cond).__name__}")

    def _block(self, stmts, mask) -> None:
        for s in stmts:
            if not mask.any():
                return
            if isinstance(s, lang.Assign):
                np.copyto(self.env[s.name], self._ev(s.expr), where=mask, casting="same_kind")
            elif isinstance(s, lang.AddAssign):
                value = self.env[s.name] + self._ev(s.expr)
                np.copyto(self.env[s.name], value, where=mask, casting="same_kind")
            elif isinstance(s, lang.SubAssign):
                value = self.env[s.name] - self._ev(s.expr)
                np.copyto(self.env[s.name], value, where=mask, casting="same_kind")
            elif isinstance(s, lang.Know):
                ok = self._bool(s.cond)
                self.alive &= ~mask | ok
            elif isinstance(s, lang.If):
                hold = self._bool(s.cond)
                self._block(s.then, mask & hold)
                self._block(s.orelse, mask & ~hold)
            elif isinstance(s, lang.While):
                self.word.append(1)
                try:
                    active = mask & self._bool(s.cond) & self.alive
                    while active.any():
                        self.budget -= 1
                        if self.budget < 0:
                            # divergent lanes never reach the final state
                            self.alive &= ~active
                            self.diagnosed = True
                            break
                        self._block(s.body, active)
                        self.word[-1] += 1
                        active = active & self._bool(s.cond) & self.alive
                finally:
                    self.word.pop()
            else:
                raise OracleError(f"unknown statement node {type(s).__name__}")


def _sampled_batch(program, combos, m, rng, diagnostics, step_budget=1_000_000) -> np.ndarray:
    table: dict = {}
    hit = np.zeros(m, dtype=bool)
    runner = _VectorRun(program, table, rng, m, step_budget)
    for combo in combos:
        hit |= runner.run(combo)
        if hit.all():
            break
    if runner.diagnosed:
        diagnostics.append("nonterminating paths hit the step budget; counted as misses")
    return hit
