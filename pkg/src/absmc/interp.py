"""Randomized abstract interpretation trials.

One trial propagates an interval environment forward through the program.
Random generators behave in two modes, tracked by the context's
``randomize`` flag:

* outside any fixpoint computation, a generator draws a concrete value
  from the trial's random stream, records it in the choice table under
  the key (site, iteration word), and evaluates to the singleton
  interval;
* inside a fixpoint computation, a generator evaluates to its full range
  and records nothing.

The iteration word is the vector of 1-based iteration counters of the
enclosing loops, outermost first, so each dynamic draw has its own key
and can be replayed exactly by the concrete semantics.

Loops run in two phases.  Phase 1 (dynamic unrolling, only while
``randomize`` is on) executes the body as long as the guard is definitely
true, up to ``unroll_limit`` iterations, sampling generators concretely.
Phase 2 computes an ascending fixpoint with generators at full range,
joining ``widening_delay`` times before widening, then refines with
``narrowing_passes`` descending iterations; the loop's result is the
fixpoint filtered by the negated guard.

A trial's verdict is 1 when the outcome event cannot be ruled out for
some choice of the unconstrained inputs consistent with the recorded
draws, and 0 when it is impossible.  Trials that exhaust their step
budget abort conservatively with verdict 1.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from . import lang
from .intervals import AbstractEnv, Interval, filter_env
from .lang import Kind


class InterpError(Exception):
    """Internal invariant violation during a trial."""


class StepBudgetExceeded(Exception):
    """The per-trial operation budget ran out."""


@dataclass(frozen=True, slots=True)
class TrialConfig:
    """Per-trial knobs; defaults reproduce the shipped corpus results."""

    unroll_limit: int = 64
    widening_delay: int = 2
    narrowing_passes: int = 2
    step_budget: int = 1_000_000

    def to_dict(self) -> dict:
        return {
            "unroll_limit": self.unroll_limit,
            "widening_delay": self.widening_delay,
            "narrowing_passes": self.narrowing_passes,
            "step_budget": self.step_budget,
        }


ChoiceKey = tuple[int, tuple[int, ...]]


@dataclass
class TrialContext:
    """Mutable state owned by exactly one trial."""

    rng: random.Random
    config: TrialConfig
    restriction: dict[int, tuple[float, float]] | None = None
    table: dict[ChoiceKey, int | float] = field(default_factory=dict)
    randomize: bool = True
    word: list[int] = field(default_factory=list)
    steps: int = 0
    widened_loops: int = 0
    trace: Callable[[str], None] | None = None

    def tick(self, cost: int = 1) -> None:
        self.steps += cost
        if self.steps > self.config.step_budget:
            raise StepBudgetExceeded(f"exceeded {self.config.step_budget} steps")


@dataclass
class TrialOutcome:
    """Result of one trial."""

    hit: int  # 1: outcome possible; 0: outcome ruled out
    env: AbstractEnv | None  # final environment (None when aborted)
    table: dict[ChoiceKey, int | float]
    widened_loops: int
    seed: int | None
    aborted: bool = False
    steps: int = 0


def draw_coin(ctx: TrialContext, site: int) -> int:
    if ctx.restriction and site in ctx.restriction:
        lo, hi = ctx.restriction[site]
        allowed = [v for v in (0, 1) if lo <= v <= hi]
        if len(allowed) == 1:
            return allowed[0]
    return ctx.rng.getrandbits(1)


def draw_uniform(ctx: TrialContext, site: int) -> float:
    if ctx.restriction and site in ctx.restriction:
        lo, hi = ctx.restriction[site]
        return lo + (hi - lo) * ctx.rng.random()
    return ctx.rng.random()


def eval_generator(gen: lang.CoinFlip | lang.Uniform, ctx: TrialContext) -> Interval:
    coin = isinstance(gen, lang.CoinFlip)
    if not ctx.randomize:
        return Interval(Kind.INT, 0, 1) if coin else Interval(Kind.REAL, 0.0, 1.0)
    key: ChoiceKey = (gen.site, tuple(ctx.word))
    if key in ctx.table:
        raise InterpError(f"duplicate choice key {key}")
    value = draw_coin(ctx, gen.site) if coin else draw_uniform(ctx, gen.site)
    ctx.table[key] = value
    if ctx.trace is not None:
        kind = "coin_flip" if coin else "uniform"
        ctx.trace(f"draw site {gen.site} w={key[1]} {kind} -> {value!r}")
    kind_ = Kind.INT if coin else Kind.REAL
    return Interval.const(kind_, value)


def eval_expr(expr: lang.Expr, env: AbstractEnv, ctx: TrialContext) -> Interval:
    ctx.tick()
    if isinstance(expr, lang.IntLit):
        return Interval.const(Kind.INT, expr.value)
    if isinstance(expr, lang.RealLit):
        return Interval.const(Kind.REAL, expr.value)
    if isinstance(expr, lang.Var):
        return env.get(expr.name)
    if isinstance(expr, lang.Add):
        return eval_expr(expr.left, env, ctx).add(eval_expr(expr.right, env, ctx))
    if isinstance(expr, lang.Sub):
        return eval_expr(expr.left, env, ctx).sub(eval_expr(expr.right, env, ctx))
    if isinstance(expr, lang.MulConst):
        return eval_expr(expr.expr, env, ctx).scale(expr.coeff.value)
    if isinstance(expr, (lang.CoinFlip, lang.Uniform)):
        return eval_generator(expr, ctx)
    raise InterpError(f"unknown expression node {type(expr).__name__}")


def eval_block(stmts, env: AbstractEnv, ctx: TrialContext) -> AbstractEnv:
    for s in stmts:
        if env.is_bottom():
            return env
        env = eval_stmt(s, env, ctx)
    return env


def eval_stmt(stmt: lang.Stmt, env: AbstractEnv, ctx: TrialContext) -> AbstractEnv:
    ctx.tick()
    if env.is_bottom():
        return env
    if isinstance(stmt, lang.Assign):
        out = env.assign(stmt.name, eval_expr(stmt.expr, env, ctx))
    elif isinstance(stmt, lang.AddAssign):
        out = env.assign(stmt.name, env.get(stmt.name).add(eval_expr(stmt.expr, env, ctx)))
    elif isinstance(stmt, lang.SubAssign):
        out = env.assign(stmt.name, env.get(stmt.name).sub(eval_expr(stmt.expr, env, ctx)))
    elif isinstance(stmt, lang.Know):
        out = filter_env(env, stmt.cond, True)
    elif isinstance(stmt, lang.If):
        then_env = eval_block(stmt.then, filter_env(env, stmt.cond, True), ctx)
        else_env = eval_block(stmt.orelse, filter_env(env, stmt.cond, False), ctx)
        out = then_env.join(else_env)
    elif isinstance(stmt, lang.While):
        out = eval_loop(stmt, env, ctx)
    else:
        raise InterpError(f"unknown statement node {type(stmt).__name__}")
    if ctx.trace is not None:
        ctx.trace(f"site {stmt.site} {type(stmt).__name__}: {out.render()}")
    return out


def eval_loop(stmt: lang.While, env: AbstractEnv, ctx: TrialContext) -> AbstractEnv:
    # Phase 1: unroll while the guard is definitely true, drawing fresh
    # concrete values each iteration.
    if ctx.randomize:
        ctx.word.append(1)
        try:
            for _ in range(ctx.config.unroll_limit):
                ctx.tick()
                enter = filter_env(env, stmt.cond, True)
                leave = filter_env(env, stmt.cond, False)
                if enter.is_bottom():
                    return leave
                if not leave.is_bottom():
                    break
                env = eval_block(stmt.body, enter, ctx)
                ctx.word[-1] += 1
        finally:
            ctx.word.pop()
    return _loop_fixpoint(stmt, env, ctx)


def _loop_fixpoint(stmt: lang.While, env: AbstractEnv, ctx: TrialContext) -> AbstractEnv:
    saved = ctx.randomize
    ctx.randomize = False
    try:
        acc = env
        joins = 0
        widened = False
        while True:
            ctx.tick()
            nxt = acc.join(eval_block(stmt.body, filter_env(acc, stmt.cond, True), ctx))
            if nxt == acc:
                break
            if joins >= ctx.config.widening_delay:
                acc = acc.widen(nxt)
                widened = True
            else:
                acc = nxt
            joins += 1
        for _ in range(ctx.config.narrowing_passes):
            ctx.tick()
            refined = env.join(eval_block(stmt.body, filter_env(acc, stmt.cond, True), ctx))
            nacc = acc.narrow(refined)
            if nacc == acc:
                break
            acc = nacc
        if widened:
            ctx.widened_loops += 1
        return filter_env(acc, stmt.cond, False)
    finally:
        ctx.randomize = saved


def analyze_trial(
    program: lang.Program,
    seed: int | None,
    config: TrialConfig | None = None,
    *,
    rng: random.Random | None = None,
    restriction: dict[int, tuple[float, float]] | None = None,
    trace: Callable[[str], None] | None = None,
) -> TrialOutcome:
    """Run one trial.  Deterministic in (program, seed, config); the
    optional ``rng`` overrides seeding for tests."""

    if program.outcome is None:
        raise InterpError("program has no outcome")
    cfg = config or TrialConfig()
    ctx = TrialContext(
        rng=rng if rng is not None else random.Random(seed),
        config=cfg,
        restriction=restriction,
        trace=trace,
    )
    env = AbstractEnv.tops(program.kinds())
    try:
        env = eval_block(program.body, env, ctx)
        final = filter_env(env, program.outcome, True)
        hit = 0 if final.is_bottom() else 1
        return TrialOutcome(
            hit=hit,
            env=env,
            table=ctx.table,
            widened_loops=ctx.widened_loops,
            seed=seed,
            steps=ctx.steps,
        )
    except StepBudgetExceeded:
        return TrialOutcome(
            hit=1,
            env=None,
            table=ctx.table,
            widened_loops=ctx.widened_loops,
            seed=seed,
            aborted=True,
            steps=ctx.steps,
        )
