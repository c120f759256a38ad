"""Monte Carlo success estimation and threshold search.

A trial samples a fresh graph and signal from independent streams derived
from (seed, trial index), runs the decoder with the true signal attached,
and counts perfect recovery.  The success threshold for a degree pair is
bracketed by binary search over the initial density factor: the retained
lower endpoint always meets the success level, the upper endpoint never
does, and the search stops once the bracket is narrower than the requested
resolution.

Probes may stop sampling early once the verdict against the success level
is decided at three standard errors (or cannot flip); the decision points
are fixed batch boundaries, so outcomes are reproducible and independent
of worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import sqrt
from typing import IO, Optional, Sequence, Union

import numpy as np

from .distributions import DegreeDistribution
from .ensemble import EnsembleSpec, SignalModel, WeightModel, sample_instance
from .errors import BadBracket, ValidationError
from .recovery import RecoveryOptions, run_sbb
from .seeds import PROBE_SALT, TRIAL_SALT, alpha_key

Seed = Union[int, tuple]
BATCH = 32
DECISION_Z = 3.0


@dataclass(frozen=True)
class StoppingCriteria:
    """Trajectory classification thresholds."""

    success_tol: float = 1e-7
    stall_tol: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.stall_tol < self.success_tol < 1.0:
            raise ValidationError("need 0 < stall_tol < success_tol < 1")


def classify_trajectory(traj: Sequence[float], criteria: Optional[StoppingCriteria] = None) -> str:
    """'success' if the final value is at or below success_tol; 'failure'
    if it sits above with the last step below stall_tol; else 'undecided'."""
    criteria = criteria or StoppingCriteria()
    if len(traj) == 0:
        raise ValidationError("empty trajectory")
    final = traj[-1]
    if final <= criteria.success_tol:
        return "success"
    if len(traj) >= 2 and abs(final - traj[-2]) < criteria.stall_tol:
        return "failure"
    return "undecided"


def _seed_list(seed: Seed) -> list:
    return list(seed) if isinstance(seed, tuple) else [seed]


def _fast_options(base: Optional[RecoveryOptions]) -> RecoveryOptions:
    if base is None:
        return RecoveryOptions(record_events=False)
    return base


def _run_one_trial(args) -> tuple[bool, list[float], float]:
    spec, seed_path, want_traj, opts = args
    graph, signal, meas = sample_instance(spec, tuple(seed_path))
    report = run_sbb(graph, meas, options=opts, oracle=signal)
    return (
        bool(report.success),
        report.trajectory if want_traj else [],
        report.unverified_fraction,
    )


@dataclass
class TrialSet:
    """Outcomes of (up to) a requested number of independent trials."""

    success_fraction: float
    outcomes: np.ndarray
    trials_requested: int
    trials_run: int
    seed: Seed
    trajectories: list[list[float]] = field(default_factory=list)
    unverified_fractions: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def stderr(self) -> float:
        p = self.success_fraction
        return sqrt(max(p * (1.0 - p), 0.0) / self.trials_run)

    @property
    def mean_unverified_fraction(self) -> float:
        return float(np.mean(self.unverified_fractions))


def _decided(successes: int, done: int, total: int, level: float) -> bool:
    if done >= total:
        return True
    if successes / total >= level:
        return True
    if (successes + (total - done)) / total < level:
        return True
    p = successes / done
    se = sqrt(max(p * (1.0 - p), 0.0) / done)
    if se == 0.0:
        se = 0.5 / done
    return abs(p - level) > DECISION_Z * se


def run_trials(
    spec: EnsembleSpec,
    trials: int,
    seed: Seed,
    success_rule: str = "perfect_recovery",
    workers: int = 1,
    early_exit_level: Optional[float] = None,
    rec_options: Optional[RecoveryOptions] = None,
    collect_trajectories: bool = False,
) -> TrialSet:
    """Fraction of perfect recoveries over independent trials.

    Trial t draws its graph and signal from streams derived from
    (seed, t).  With ``early_exit_level`` set, sampling stops at the first
    batch boundary where the verdict against that level is statistically
    decided; the batch size is fixed, so results do not depend on
    ``workers``.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if success_rule != "perfect_recovery":
        raise ValidationError(f"unknown success rule {success_rule!r}")
    opts = _fast_options(rec_options)
    base = _seed_list(seed)
    outcomes = np.zeros(trials, dtype=bool)
    unverified = np.zeros(trials, dtype=np.float64)
    trajectories: list[list[float]] = []
    done = 0
    successes = 0
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while done < trials:
            batch = min(BATCH, trials - done)
            args = [
                (spec, base + [TRIAL_SALT, t], collect_trajectories, opts)
                for t in range(done, done + batch)
            ]
            if pool is not None:
                results = list(pool.map(_run_one_trial, args, chunksize=max(1, batch // workers)))
            else:
                results = [_run_one_trial(a) for a in args]
            for i, (ok, traj, unv) in enumerate(results):
                outcomes[done + i] = ok
                unverified[done + i] = unv
                if collect_trajectories:
                    trajectories.append(traj)
                successes += ok
            done += batch
            if early_exit_level is not None and _decided(successes, done, trials, early_exit_level):
                break
    finally:
        if pool is not None:
            pool.shutdown()
    return TrialSet(
        success_fraction=successes / done,
        outcomes=outcomes[:done],
        trials_requested=trials,
        trials_run=done,
        seed=seed,
        trajectories=trajectories,
        unverified_fractions=unverified[:done],
    )


@dataclass
class TrajectoryStats:
    """Elementwise mean of per-trial unverified-non-zero fractions."""

    mean_alpha: np.ndarray
    trial_count: int
    n: int
    spec: EnsembleSpec

    def write_csv(self, fh: IO[str], header: Optional[dict] = None) -> None:
        for k, v in (header or {}).items():
            fh.write(f"# {k}={v}\n")
        fh.write("iteration,alpha_hat\n")
        for i, a in enumerate(self.mean_alpha):
            fh.write(f"{i},{float(a)!r}\n")


def trajectory(
    spec: EnsembleSpec,
    trials: int,
    seed: Seed,
    workers: int = 1,
    rec_options: Optional[RecoveryOptions] = None,
    min_length: int = 0,
) -> TrajectoryStats:
    """Average trajectory over trials, padding early stops with their
    final value so the mean stays defined per iteration.

    A stopped decoder's state never changes again, so padding a trial by
    its final value evaluates the exact fixed point; ``min_length``
    extends every trial at least that far.
    """
    ts = run_trials(
        spec,
        trials,
        seed,
        workers=workers,
        rec_options=rec_options,
        collect_trajectories=True,
    )
    length = max(min_length, max(len(t) for t in ts.trajectories))
    acc = np.zeros(length, dtype=np.float64)
    for t in ts.trajectories:
        arr = np.asarray(t, dtype=np.float64)
        if arr.shape[0] < length:
            arr = np.concatenate([arr, np.full(length - arr.shape[0], arr[-1])])
        acc += arr
    return TrajectoryStats(acc / len(ts.trajectories), len(ts.trajectories), spec.n, spec)


@dataclass(frozen=True)
class ProbeResult:
    alpha: float
    success_fraction: float
    trials: int
    stderr: float


@dataclass
class ThresholdResult:
    """Final bracket around the empirical success threshold."""

    lower: float
    upper: float
    estimate: float
    probes: list[ProbeResult]
    resolution: float
    seed: Seed
    n: int
    trials_per_probe: int
    success_level: float
    bracket_history: list[tuple[float, float]] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "estimate": self.estimate,
            "resolution": self.resolution,
            "seed": str(self.seed),
            "n": self.n,
            "trials_per_probe": self.trials_per_probe,
            "success_level": self.success_level,
            "probes": [
                {
                    "alpha": p.alpha,
                    "success_fraction": p.success_fraction,
                    "trials": p.trials,
                    "stderr": p.stderr,
                }
                for p in self.probes
            ],
            "bracket_history": self.bracket_history,
        }

    def write_json(self, fh: IO[str], config: Optional[dict] = None) -> None:
        payload = self.to_json_dict()
        if config:
            payload["config"] = config
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    def write_probe_csv(self, fh: IO[str], header: Optional[dict] = None) -> None:
        for k, v in (header or {}).items():
            fh.write(f"# {k}={v}\n")
        fh.write("alpha,success_fraction,trials,stderr\n")
        for p in self.probes:
            fh.write(f"{p.alpha!r},{p.success_fraction!r},{p.trials},{p.stderr!r}\n")


def find_threshold(
    lam: DegreeDistribution,
    rho: DegreeDistribution,
    n: int,
    trials_per_probe: int,
    bracket: tuple[float, float],
    resolution: float,
    success_level: float = 0.5,
    seed: Seed = 0,
    workers: int = 1,
    signal_model: Optional[SignalModel] = None,
    weight_model: Optional[WeightModel] = None,
    early_exit: bool = True,
    rec_options: Optional[RecoveryOptions] = None,
    clamp_bad_bracket: bool = False,
) -> ThresholdResult:
    """Bisect the density factor until the success/failure bracket is
    narrower than ``resolution``.

    The lower endpoint must initially meet the success level and the upper
    endpoint must fail it (BadBracket otherwise; with
    ``clamp_bad_bracket`` a degenerate result pinned to the violating
    endpoint is returned instead, for use inside screening loops).
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0.0 <= lo < hi <= 1.0):
        raise BadBracket(f"bracket ({lo}, {hi}) must satisfy 0 <= lo < hi <= 1")
    if resolution <= 0:
        raise ValidationError("resolution must be positive")
    probes: list[ProbeResult] = []
    history: list[tuple[float, float]] = []
    base = _seed_list(seed)

    def probe(alpha: float) -> float:
        spec = EnsembleSpec(
            n=n,
            lam=lam,
            rho=rho,
            alpha=alpha,
            weight_model=weight_model or WeightModel.constant(),
            signal_model=signal_model or SignalModel.gaussian(),
        )
        ts = run_trials(
            spec,
            trials_per_probe,
            tuple(base + [PROBE_SALT, alpha_key(alpha)]),
            workers=workers,
            early_exit_level=success_level if early_exit else None,
            rec_options=rec_options,
        )
        probes.append(ProbeResult(alpha, ts.success_fraction, ts.trials_run, ts.stderr))
        return ts.success_fraction

    def result() -> ThresholdResult:
        return ThresholdResult(
            lower=lo,
            upper=hi,
            estimate=0.5 * (lo + hi),
            probes=probes,
            resolution=resolution,
            seed=seed,
            n=n,
            trials_per_probe=trials_per_probe,
            success_level=success_level,
            bracket_history=history,
        )

    if probe(lo) < success_level:
        if clamp_bad_bracket:
            hi = lo
            return result()
        raise BadBracket(f"lower endpoint alpha={lo} does not meet success level {success_level}")
    if probe(hi) >= success_level:
        if clamp_bad_bracket:
            lo = hi
            return result()
        raise BadBracket(f"upper endpoint alpha={hi} does not fail success level {success_level}")
    history.append((lo, hi))
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if probe(mid) >= success_level:
            lo = mid
        else:
            hi = mid
        history.append((lo, hi))
    return result()
