"""Degree-distribution search maximizing the empirical success threshold.

Candidate variable-side distributions satisfy two linear constraints (unit
mass and a fixed mean degree), so a support of s degrees leaves s-2 free
fractions, enumerated on a grid.  Bimodal supports are fully determined:
for degrees a < mean < b the mixture is (b - mean)/(b - a) on a.

The search screens every candidate with cheap probes (small n, few trials,
coarse resolution) and then re-estimates the leaders at full fidelity.
Candidates within one screening standard error of the leader all advance,
so Monte Carlo noise cannot silently drop the true optimum.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from math import ceil, floor, log2
from typing import IO, Iterator, Optional

from .analysis import Seed, ThresholdResult, find_threshold, _seed_list
from .distributions import DegreeDistribution, make_distribution
from .ensemble import SignalModel, WeightModel, nearest_feasible_n
from .errors import InfeasibleEdgeBudget, ValidationError
from .seeds import SCREEN_SALT

DEAD_CANDIDATE = -1.0

INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class SearchSpace:
    """Constraints of one search: target means, degree cap, support size.

    Exactly one of ``rho`` (fixed check side) or ``dc_mean`` (search a
    bimodal check side too) must be given.
    """

    dv_mean: float
    rho: Optional[DegreeDistribution] = None
    dc_mean: Optional[float] = None
    max_degree: int = 20
    max_components: int = 2
    grid_step: float = 1e-3

    def __post_init__(self):
        if (self.rho is None) == (self.dc_mean is None):
            raise ValidationError("give exactly one of rho or dc_mean")
        if self.max_degree < ceil(self.dv_mean):
            raise ValidationError("max_degree below the target mean degree")
        if not 1 <= self.max_components <= 4:
            raise ValidationError("max_components must be in 1..4")
        if self.grid_step <= 0:
            raise ValidationError("grid_step must be positive")

    def candidates(self) -> list[tuple[DegreeDistribution, DegreeDistribution]]:
        if self.max_components <= 2:
            lams = enumerate_bimodal(self.dv_mean, self.max_degree)
        else:
            lams = enumerate_sparse(self.dv_mean, self.max_degree, self.max_components, self.grid_step)
        if self.rho is not None:
            rhos = [self.rho.with_side("check")]
        else:
            rhos = [r.with_side("check") for r in enumerate_bimodal(self.dc_mean, self.max_degree)]
        return [(l, r) for l in lams for r in rhos]


@dataclass
class Candidate:
    lam: DegreeDistribution
    rho: DegreeDistribution
    threshold_estimate: float
    evidence: Optional[ThresholdResult] = None
    stage: str = "screen"

    def sort_key(self):
        return (
            -self.threshold_estimate,
            self.lam.num_components + self.rho.num_components,
            max(self.lam.max_degree, self.rho.max_degree),
            self.lam.to_text(),
            self.rho.to_text(),
        )


def enumerate_bimodal(d_bar: float, max_degree: int) -> list[DegreeDistribution]:
    """All two-degree mixtures with mean d_bar and degrees <= max_degree,
    plus the regular case when d_bar is an integer."""
    if not 1 <= d_bar <= max_degree:
        raise ValidationError(f"need 1 <= mean {d_bar} <= max_degree {max_degree}")
    out: list[DegreeDistribution] = []
    if abs(d_bar - round(d_bar)) < INTEGER_TOL:
        out.append(make_distribution([(int(round(d_bar)), 1.0)]))
    hi_lo = floor(d_bar - INTEGER_TOL)
    lo_hi = ceil(d_bar + INTEGER_TOL)
    for a in range(1, hi_lo + 1):
        for b in range(lo_hi, max_degree + 1):
            frac_a = (b - d_bar) / (b - a)
            out.append(make_distribution([(a, frac_a), (b, 1.0 - frac_a)]))
    return out


def iter_sparse(
    d_bar: float,
    max_degree: int,
    max_components: int,
    grid_step: float,
) -> Iterator[DegreeDistribution]:
    """Lazily enumerate distributions with <= max_components support
    degrees, unit mass, and mean d_bar; free fractions walk a grid."""
    if not 1 <= max_components <= 4:
        raise ValidationError("max_components must be in 1..4")
    seen: set = set()

    def emit(entries):
        dd = make_distribution(entries)
        key = tuple((d, round(f / grid_step)) for d, f in dd.entries)
        if key not in seen:
            seen.add(key)
            return dd
        return None

    for dd in enumerate_bimodal(d_bar, max_degree):
        if dd.num_components <= max_components:
            got = emit(dd.entries)
            if got is not None:
                yield got
    if max_components < 3:
        return

    steps = int(round(1.0 / grid_step))
    for size in range(3, max_components + 1):
        for support in combinations(range(1, max_degree + 1), size):
            d = list(support)
            if not d[0] < d_bar < d[-1]:
                continue
            ncols = size - 2
            free = [0] * ncols

            def solve(free_vals):
                f_rest = [k * grid_step for k in free_vals]
                mass = 1.0 - sum(f_rest)
                mean_rest = d_bar - sum(di * fi for di, fi in zip(d[2:], f_rest))
                d1, d2 = d[0], d[1]
                f2 = (mean_rest - d1 * mass) / (d2 - d1)
                f1 = mass - f2
                if f1 <= 0 or f2 <= 0 or any(f <= 0 for f in f_rest):
                    return None
                return [(d1, f1), (d2, f2)] + list(zip(d[2:], f_rest))

            if ncols == 1:
                for k in range(1, steps):
                    entries = solve([k])
                    if entries is None:
                        if k * grid_step * d[2] > d_bar:
                            break
                        continue
                    got = emit(entries)
                    if got is not None:
                        yield got
            else:
                for k1 in range(1, steps):
                    if k1 * grid_step * d[2] > d_bar:
                        break
                    for k2 in range(1, steps):
                        entries = solve([k1, k2])
                        if entries is None:
                            if k2 * grid_step * d[3] > d_bar:
                                break
                            continue
                        got = emit(entries)
                        if got is not None:
                            yield got


def enumerate_sparse(
    d_bar: float,
    max_degree: int,
    max_components: int,
    grid_step: float,
) -> list[DegreeDistribution]:
    return list(iter_sparse(d_bar, max_degree, max_components, grid_step))


@dataclass(frozen=True)
class EvaluatorConfig:
    """Fidelity tiers for screening and final refinement.

    max_refine, when set, caps how many leaders advance to full fidelity
    (useful on huge candidate sets where the within-one-standard-error
    rule would admit too many near-ties).
    """

    screen_n: int = 4000
    screen_trials: int = 24
    screen_resolution: float = 5e-3
    full_n: int = 100_000
    full_trials: int = 200
    full_resolution: float = 1e-3
    bracket: tuple[float, float] = (0.05, 0.95)
    success_level: float = 0.5
    advance_fraction: float = 0.05
    max_refine: Optional[int] = None
    weight_model: WeightModel = field(default_factory=WeightModel.constant)
    signal_model: SignalModel = field(default_factory=SignalModel.gaussian)


@dataclass
class OptimizeResult:
    candidates: list[Candidate]
    probes_used: int
    budget_exhausted: bool

    @property
    def best(self) -> Candidate:
        return self.candidates[0]

    def write_csv(self, fh: IO[str], header: Optional[dict] = None) -> None:
        for k, v in (header or {}).items():
            fh.write(f"# {k}={v}\n")
        fh.write("lambda,rho,threshold_estimate,lower,upper,probes,stage\n")
        for c in self.candidates:
            lower = c.evidence.lower if c.evidence else ""
            upper = c.evidence.upper if c.evidence else ""
            nprobes = len(c.evidence.probes) if c.evidence else 0
            fh.write(
                f"{c.lam.to_text()},{c.rho.to_text()},{c.threshold_estimate!r},"
                f"{lower!r},{upper!r},{nprobes},{c.stage}\n"
            )


def _screen_one(args) -> tuple[int, float, int]:
    index, lam, rho, cfg, seed = args
    try:
        n = nearest_feasible_n(lam, rho, cfg.screen_n)
    except InfeasibleEdgeBudget:
        return index, DEAD_CANDIDATE, 0
    res = find_threshold(
        lam,
        rho,
        n=n,
        trials_per_probe=cfg.screen_trials,
        bracket=cfg.bracket,
        resolution=cfg.screen_resolution,
        success_level=cfg.success_level,
        seed=tuple(_seed_list(seed) + [SCREEN_SALT, index]),
        signal_model=cfg.signal_model,
        weight_model=cfg.weight_model,
        clamp_bad_bracket=True,
    )
    return index, res.estimate, len(res.probes)


def optimize(
    space: SearchSpace,
    evaluator: Optional[EvaluatorConfig] = None,
    budget: int = 10_000,
    seed: Seed = 0,
    workers: int = 1,
) -> OptimizeResult:
    """Screen every candidate cheaply, refine the leaders at full
    fidelity, return candidates ranked by estimated threshold.

    ``budget`` caps the total number of probes (each probe is one batch of
    Monte Carlo trials at one density factor); when it runs out, the
    best-so-far ranking is returned with ``budget_exhausted`` set.  Ties
    prefer fewer components, then lower maximum degree.
    """
    cfg = evaluator or EvaluatorConfig()
    pairs = space.candidates()
    if not pairs:
        raise ValidationError("empty search space")
    probes_used = 0
    exhausted = False

    # Screening stage: candidates are independent, so they may run across
    # processes; a rough per-candidate probe cost bounds how many fit.
    per_screen_cost = 2 + max(1, ceil(_log2_ratio(cfg.bracket, cfg.screen_resolution)))
    n_screen = min(len(pairs), max(1, budget // per_screen_cost))
    if n_screen < len(pairs):
        exhausted = True
    todo = [(idx, lam, rho, cfg, seed) for idx, (lam, rho) in enumerate(pairs[:n_screen])]
    estimates: dict[int, float] = {}
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, est, used in pool.map(_screen_one, todo, chunksize=4):
                estimates[index] = est
                probes_used += used
    else:
        for args in todo:
            index, est, used = _screen_one(args)
            estimates[index] = est
            probes_used += used

    screened = [
        (idx, Candidate(pairs[idx][0], pairs[idx][1], est, None, "screen"))
        for idx, est in sorted(estimates.items())
    ]
    screened.sort(key=lambda pair: pair[1].sort_key())

    # Refinement stage: top quantile plus anything within one screening
    # standard error of the leader.
    leader = screened[0][1].threshold_estimate
    n_top = max(1, ceil(cfg.advance_fraction * len(screened)))
    advance_ranks = {
        rank
        for rank, (_, c) in enumerate(screened)
        if rank < n_top or c.threshold_estimate >= leader - cfg.screen_resolution
    }
    if cfg.max_refine is not None and len(advance_ranks) > cfg.max_refine:
        advance_ranks = set(sorted(advance_ranks)[: cfg.max_refine])
    final: list[Candidate] = []
    for rank, (idx, c) in enumerate(screened):
        if rank not in advance_ranks or c.threshold_estimate == DEAD_CANDIDATE:
            final.append(c)
            continue
        if probes_used >= budget:
            exhausted = True
            final.append(c)
            continue
        lo = max(cfg.bracket[0], c.threshold_estimate - 8 * cfg.screen_resolution)
        hi = min(cfg.bracket[1], c.threshold_estimate + 8 * cfg.screen_resolution)
        res = find_threshold(
            c.lam,
            c.rho,
            n=nearest_feasible_n(c.lam, c.rho, cfg.full_n),
            trials_per_probe=cfg.full_trials,
            bracket=(lo, hi),
            resolution=cfg.full_resolution,
            success_level=cfg.success_level,
            seed=tuple(_seed_list(seed) + [SCREEN_SALT + 1, idx]),
            signal_model=cfg.signal_model,
            weight_model=cfg.weight_model,
            workers=workers,
            clamp_bad_bracket=True,
        )
        probes_used += len(res.probes)
        final.append(Candidate(c.lam, c.rho, res.estimate, res, "full"))
    final.sort(key=Candidate.sort_key)
    return OptimizeResult(final, probes_used, exhausted)


def _log2_ratio(bracket: tuple[float, float], resolution: float) -> float:
    width = max(bracket[1] - bracket[0], resolution)
    return log2(width / resolution)
