"""Statistical driver: many trials, one published bound.

The analyzer runs n independent trials and reports the experimental hit
rate p_hat together with the Chernoff-Hoeffding upper bound

    p_prime = min(1, p_hat + sqrt(ln(1/epsilon) / (2 n)))

which exceeds the true worst-case outcome probability with probability
at least 1 - epsilon, because Pr[E[V] >= mean + t] <= exp(-2 n t^2) for
any [0,1]-valued V.  Inverting the bound gives the trial count needed
for a target margin t: n = ceil(ln(1/epsilon) / (2 t^2)).

Per-trial seeds derive from the master seed by a counter-based split
(SHA-256 of "master:index"), so results are independent of scheduling:
a run with any worker count produces the identical Report, field by
field, except for elapsed time.

Rare-event sharpening: when every hit is known to draw its value at some
generator site inside a sub-range R of the support, sampling that site
conditionally on R and rescaling by Pr(R) estimates the same expectation
with a Pr(R)-times smaller absolute margin.  The containment hypothesis
is the caller's assertion; restricted Reports are flagged accordingly.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import lang
from .interp import TrialConfig, analyze_trial


def hoeffding_margin(n: int, epsilon: float) -> float:
    """t such that n trials underestimate the mean by more than t with
    probability at most epsilon."""

    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must be in (0, 1]")
    return math.sqrt(math.log(1.0 / epsilon) / (2.0 * n))


def bound(p_hat: float, n: int, epsilon: float) -> float:
    """Upper confidence bound min(1, p_hat + margin)."""

    if not 0.0 <= p_hat <= 1.0:
        raise ValueError("p_hat must be in [0, 1]")
    return min(1.0, p_hat + hoeffding_margin(n, epsilon))


def plan_trials(t: float, epsilon: float) -> int:
    """Smallest n with margin at most t at confidence 1 - epsilon."""

    if not 0.0 < t <= 1.0:
        raise ValueError("t must be in (0, 1]")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    return max(1, math.ceil(math.log(1.0 / epsilon) / (2.0 * t * t)))


def derive_seed(master_seed: int, index: int) -> int:
    """Counter-based per-trial seed; fixed derivation, documented here:
    the first 8 bytes of SHA-256("{master}:{index}") as a big-endian
    integer."""

    digest = hashlib.sha256(f"{master_seed}:{index}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


# ---------------------------------------------------------------------------
# Restriction of generator sites
# ---------------------------------------------------------------------------


class RestrictionError(Exception):
    """Invalid restriction specification."""


@dataclass(frozen=True)
class RestrictionSpec:
    """Sub-ranges for generator sites outside loops.

    ``prob`` is the probability that unrestricted sampling lands inside
    every sub-range; the caller asserts that all outcome-reaching draws
    do.  ``sites`` maps site identifiers to inclusive (lo, hi) ranges.
    """

    sites: dict[int, tuple[float, float]]
    prob: float

    @classmethod
    def by_ordinal(
        cls, program: lang.Program, entries: dict[int, tuple[float, float]]
    ) -> "RestrictionSpec":
        """Build from 1-based generator ordinals in source order."""

        gens = {g.ordinal: g for g in lang.generator_sites(program)}
        sites: dict[int, tuple[float, float]] = {}
        prob = 1.0
        for ordinal, (lo, hi) in entries.items():
            g = gens.get(ordinal)
            if g is None:
                raise RestrictionError(f"no generator with ordinal {ordinal}")
            if g.inside_loop:
                raise RestrictionError(
                    f"generator {ordinal} sits inside a loop and may be"
                    " abstracted during fixpoints; it cannot be restricted"
                )
            if lo > hi:
                raise RestrictionError(f"empty range for generator {ordinal}")
            if g.coin:
                allowed = [v for v in (0, 1) if lo <= v <= hi]
                if not allowed:
                    raise RestrictionError(
                        f"range for coin_flip generator {ordinal} excludes both 0 and 1"
                    )
                prob *= len(allowed) / 2.0
            else:
                lo, hi = max(0.0, float(lo)), min(1.0, float(hi))
                if lo > hi:
                    raise RestrictionError(
                        f"range for uniform generator {ordinal} lies outside [0, 1]"
                    )
                if hi == lo:
                    raise RestrictionError(
                        f"range for uniform generator {ordinal} has measure zero"
                    )
                prob *= hi - lo
            sites[g.site] = (float(lo), float(hi))
        if not 0.0 < prob <= 1.0:
            raise RestrictionError("restriction probability must be in (0, 1]")
        return cls(sites, prob)


# ---------------------------------------------------------------------------
# Reports and the trial loop
# ---------------------------------------------------------------------------


@dataclass
class Report:
    """Published result of a batch of trials."""

    program: str
    n: int
    hits: int
    p_hat: float
    epsilon: float
    margin: float
    p_prime: float
    seed: int
    jobs: int
    elapsed_ms: float
    config: dict
    warnings: list[str] = field(default_factory=list)
    widened_trials: int = 0
    aborted_trials: int = 0

    def to_dict(self) -> dict:
        return {
            "program": self.program,
            "n": self.n,
            "hits": self.hits,
            "p_hat": self.p_hat,
            "epsilon": self.epsilon,
            "margin": self.margin,
            "p_prime": self.p_prime,
            "seed": self.seed,
            "jobs": self.jobs,
            "elapsed_ms": self.elapsed_ms,
            "config": self.config,
            "warnings": list(self.warnings),
        }


def _trial_chunk(args) -> tuple[int, int, int]:
    program, config, restriction, master_seed, start, stop = args
    hits = widened = aborted = 0
    for index in range(start, stop):
        outcome = analyze_trial(
            program, derive_seed(master_seed, index), config, restriction=restriction
        )
        hits += outcome.hit
        if outcome.widened_loops:
            widened += 1
        if outcome.aborted:
            aborted += 1
    return hits, widened, aborted


def run(
    program: lang.Program,
    n: int,
    epsilon: float,
    master_seed: int = 0,
    jobs: int = 1,
    config: TrialConfig | None = None,
    *,
    program_name: str | None = None,
    restriction: RestrictionSpec | None = None,
) -> Report:
    """Run n trials and assemble the Report.  Identical output for any
    ``jobs`` value (except elapsed_ms)."""

    if n < 1:
        raise ValueError("n must be >= 1")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    t = hoeffding_margin(n, epsilon)
    cfg = config or TrialConfig()
    sites = restriction.sites if restriction is not None else None
    started = time.perf_counter()
    if jobs == 1 or n < 2 * jobs:
        hits, widened, aborted = _trial_chunk((program, cfg, sites, master_seed, 0, n))
    else:
        chunk = max(1, -(-n // (jobs * 4)))
        tasks = [
            (program, cfg, sites, master_seed, lo, min(lo + chunk, n))
            for lo in range(0, n, chunk)
        ]
        hits = widened = aborted = 0
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for h, w, a in pool.map(_trial_chunk, tasks):
                hits += h
                widened += w
                aborted += a
    elapsed_ms = (time.perf_counter() - started) * 1000.0

    raw_mean = hits / n
    config_echo = cfg.to_dict()
    warnings: list[str] = []
    if restriction is None:
        p_hat = raw_mean
        p_prime = min(1.0, p_hat + t)
    else:
        p_hat = restriction.prob * raw_mean
        p_prime = min(1.0, restriction.prob * (raw_mean + t))
        config_echo["restriction"] = {str(s): list(r) for s, r in restriction.sites.items()}
        config_echo["restriction_prob"] = restriction.prob
        warnings.append(
            "restricted sampling: sound only under the asserted containment"
            " of all outcome-reaching draws in the restriction"
        )
    if widened:
        warnings.append(f"widening engaged in {widened} of {n} trials")
    if aborted:
        warnings.append(f"{aborted} trial(s) exceeded the step budget and count as hits")
    return Report(
        program=program_name or program.name,
        n=n,
        hits=hits,
        p_hat=p_hat,
        epsilon=epsilon,
        margin=t,
        p_prime=p_prime,
        seed=master_seed,
        jobs=jobs,
        elapsed_ms=elapsed_ms,
        config=config_echo,
        warnings=warnings,
        widened_trials=widened,
        aborted_trials=aborted,
    )


def run_restricted(
    program: lang.Program,
    spec: RestrictionSpec,
    n: int,
    epsilon: float,
    master_seed: int = 0,
    jobs: int = 1,
    config: TrialConfig | None = None,
    *,
    program_name: str | None = None,
) -> Report:
    """`run` with conditional sampling on ``spec`` and Pr(R) rescaling."""

    return run(
        program,
        n,
        epsilon,
        master_seed,
        jobs,
        config,
        program_name=program_name,
        restriction=spec,
    )
