"""Verification-based recovery over a sensing graph (the SBB rule set).

The decoder alternates two rounds per iteration.  Round 1 repeats a
degree-one-check pass (D1CN) and an equal-check unique-common-neighbor
pass (ECN rule 2) to a fixed point; these verify non-zero signal elements.
Round 2 repeats a zero-check pass (ZCN) and the equal-check zero pass
(ECN rule 1); these verify zero elements.  Verified variables are peeled:
their contribution is subtracted from neighboring checks and the edges are
logically removed by decrementing residual degrees.

Residual subtractions are applied with a compensated (two-sum) update, so
effective residuals track the exact real values to within a few ulp of the
measurement scale.  That lets the zero test and the equal-value clustering
use tolerances far above accumulated rounding error yet far below the
spacing of distinct subset sums, which is what keeps the probability of a
false verification negligible at simulation scale.  Tolerances are
relative to the initial measurement scale and configurable; ``exact=True``
switches to exact comparisons for integer-valued test signals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .ensemble import MeasurementVector, SensingGraph, SignalVector
from .errors import AlreadyVerified, ConflictingAssignment, DimensionMismatch, OracleRequired

RULE_ZCN = 0
RULE_D1CN = 1
RULE_ECN_ZERO = 2
RULE_ECN_UNIQUE = 3
RULE_NAMES = ("ZCN", "D1CN", "ECN-zero", "ECN-unique")
RULE_CODES = {name: code for code, name in enumerate(RULE_NAMES)}

STOP_ALL_VERIFIED = "all_verified"
STOP_STALLED = "stalled"
STOP_ITERATION_CAP = "iteration_cap"


@dataclass(frozen=True)
class RecoveryOptions:
    """Tolerances and limits for one recovery run.

    zero_tol_rel and eq_tol_rel scale with (1 + max |c_i|) of the initial
    measurements.  Defaults are sized so that compensated float64 error
    stays at least an order of magnitude below each threshold while
    coincidental near-equalities between independent subset sums stay
    negligible across full Monte Carlo campaigns.
    """

    zero_tol_rel: float = 1e-12
    eq_tol_rel: float = 4e-15
    exact: bool = False
    max_iterations: int = 2000
    record_events: bool = True


@dataclass(frozen=True)
class VerificationEvent:
    variable: int
    value: float
    rule: str
    iteration: int
    round: int
    half_round: int


class EventLog(Sequence):
    """Compact append-only event store, materializing dataclasses lazily."""

    __slots__ = ("_var", "_val", "_rule", "_iter", "_round", "_half", "_size")

    def __init__(self):
        self._size = 0
        cap = 16
        self._var = np.empty(cap, dtype=np.int64)
        self._val = np.empty(cap, dtype=np.float64)
        self._rule = np.empty(cap, dtype=np.int8)
        self._iter = np.empty(cap, dtype=np.int32)
        self._round = np.empty(cap, dtype=np.int8)
        self._half = np.empty(cap, dtype=np.int32)

    def _grow(self, need: int) -> None:
        cap = self._var.shape[0]
        if self._size + need <= cap:
            return
        new_cap = max(2 * cap, self._size + need)
        for name in ("_var", "_val", "_rule", "_iter", "_round", "_half"):
            old = getattr(self, name)
            arr = np.empty(new_cap, dtype=old.dtype)
            arr[: self._size] = old[: self._size]
            setattr(self, name, arr)

    def append_batch(self, variables, values, rule_code, iteration, rnd, half_round) -> None:
        k = len(variables)
        if k == 0:
            return
        self._grow(k)
        s, e = self._size, self._size + k
        self._var[s:e] = variables
        self._val[s:e] = values
        self._rule[s:e] = rule_code
        self._iter[s:e] = iteration
        self._round[s:e] = rnd
        self._half[s:e] = half_round
        self._size = e

    def __len__(self) -> int:
        return self._size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(self._size))]
        if i < 0:
            i += self._size
        if not 0 <= i < self._size:
            raise IndexError(i)
        return VerificationEvent(
            int(self._var[i]),
            float(self._val[i]),
            RULE_NAMES[self._rule[i]],
            int(self._iter[i]),
            int(self._round[i]),
            int(self._half[i]),
        )

    @property
    def variables(self) -> np.ndarray:
        return self._var[: self._size]

    @property
    def values(self) -> np.ndarray:
        return self._val[: self._size]

    @property
    def rules(self) -> np.ndarray:
        return self._rule[: self._size]

    def write_csv(self, fh) -> None:
        fh.write("iteration,round,half_round,rule,variable,value\n")
        for i in range(self._size):
            fh.write(
                f"{self._iter[i]},{self._round[i]},{self._half[i]},"
                f"{RULE_NAMES[self._rule[i]]},{self._var[i]},{float(self._val[i])!r}\n"
            )


class RecoveryState:
    """Evolving decoder state over one (graph, measurements) instance."""

    __slots__ = (
        "graph",
        "measurements",
        "oracle",
        "residual_value",
        "comp",
        "residual_degree",
        "verified",
        "verified_value",
        "iteration",
        "round",
        "half_round",
        "num_verified",
        "zero_tol",
        "eq_tol",
        "value_tol",
        "options",
        "events",
        "_nonzero",
    )

    def __init__(self, graph: SensingGraph, measurements: np.ndarray, oracle, options: RecoveryOptions):
        self.graph = graph
        self.measurements = measurements
        self.oracle = oracle
        self.options = options
        self.residual_value = measurements.astype(np.float64, copy=True)
        self.comp = np.zeros(graph.m, dtype=np.float64)
        self.residual_degree = np.diff(graph.chk_ptr).astype(np.int64)
        self.verified = np.zeros(graph.n, dtype=bool)
        self.verified_value = np.zeros(graph.n, dtype=np.float64)
        self.iteration = 0
        self.round = 0
        self.half_round = 0
        self.num_verified = 0
        scale = 1.0 + (float(np.max(np.abs(measurements))) if graph.m else 0.0)
        if options.exact:
            self.zero_tol = 0.0
            self.eq_tol = 0.0
            self.value_tol = 0.0
        else:
            self.zero_tol = options.zero_tol_rel * scale
            self.eq_tol = options.eq_tol_rel * scale
            self.value_tol = options.zero_tol_rel * scale
        self.events = EventLog()
        self._nonzero = (oracle != 0.0) if oracle is not None else None

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.graph.m

    def effective_residuals(self) -> np.ndarray:
        return self.residual_value + self.comp

    @property
    def unverified_nonzero_fraction(self) -> float:
        if self._nonzero is None:
            raise OracleRequired("attach the true signal to track alpha-hat")
        return float(np.count_nonzero(self._nonzero & ~self.verified)) / self.n

    def all_verified(self) -> bool:
        return self.num_verified == self.graph.n


@dataclass
class RecoveryReport:
    """Outcome of one recovery run."""

    success: bool
    iterations_run: int
    events: EventLog
    trajectory: list[float]
    stop_reason: str
    n: int
    value_tol: float
    verified_count: int = 0

    @property
    def unverified_fraction(self) -> float:
        return 1.0 - self.verified_count / self.n

    def write_trajectory_csv(self, fh) -> None:
        fh.write("iteration,alpha_hat\n")
        for i, a in enumerate(self.trajectory):
            fh.write(f"{i},{a!r}\n")


def _as_values(measurements) -> np.ndarray:
    if isinstance(measurements, MeasurementVector):
        return measurements.values
    return np.asarray(measurements, dtype=np.float64)


def _as_signal(oracle) -> Optional[np.ndarray]:
    if oracle is None:
        return None
    if isinstance(oracle, SignalVector):
        return oracle.values
    return np.asarray(oracle, dtype=np.float64)


def init_state(
    graph: SensingGraph,
    measurements,
    oracle=None,
    options: Optional[RecoveryOptions] = None,
) -> RecoveryState:
    """Fresh state: residuals are the raw measurements, degrees are full."""
    c = _as_values(measurements)
    if c.shape[0] != graph.m:
        raise DimensionMismatch(f"measurement length {c.shape[0]} != m {graph.m}")
    v = _as_signal(oracle)
    if v is not None and v.shape[0] != graph.n:
        raise DimensionMismatch(f"oracle length {v.shape[0]} != n {graph.n}")
    return RecoveryState(graph, c, v, options or RecoveryOptions())


def _gather(ptr: np.ndarray, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Edge-array offsets for a batch of nodes in a CSR structure."""
    counts = ptr[nodes + 1] - ptr[nodes]
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), counts
    rep = np.repeat(np.arange(nodes.shape[0]), counts)
    prefix = np.zeros(nodes.shape[0], dtype=np.int64)
    np.cumsum(counts[:-1], out=prefix[1:])
    offs = np.arange(total, dtype=np.int64) - prefix[rep] + ptr[nodes][rep]
    return offs, counts


def _peel_batch(state: RecoveryState, variables: np.ndarray, values: np.ndarray, rule_code: int) -> np.ndarray:
    """Verify a batch of distinct unverified variables and peel their edges.

    Returns the checks whose residuals or degrees changed.  Subtractions go
    through a two-sum so the rounding error of every update is retained in
    ``state.comp`` exactly.
    """
    g = state.graph
    state.verified[variables] = True
    state.verified_value[variables] = values
    state.num_verified += variables.shape[0]
    if state.options.record_events:
        state.events.append_batch(
            variables, values, rule_code, state.iteration, state.round, state.half_round
        )
    offs, counts = _gather(g.var_ptr, variables)
    if offs.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    cids = g.var_checks[offs].astype(np.int64, copy=False)
    order = np.argsort(cids, kind="stable")
    cs = cids[order]
    starts = np.flatnonzero(np.r_[True, cs[1:] != cs[:-1]])
    uc = cs[starts]
    group_sizes = np.diff(np.append(starts, cs.shape[0]))
    state.residual_degree[uc] -= group_sizes
    if rule_code in (RULE_D1CN, RULE_ECN_UNIQUE):
        deltas = (g.var_weights[offs] * np.repeat(values, counts))[order]
        sums = np.add.reduceat(deltas, starts)
        a = state.residual_value[uc]
        b = -sums
        s = a + b
        bb = s - a
        err = (a - (s - bb)) + (b - bb)
        state.residual_value[uc] = s
        state.comp[uc] += err
    return uc


def verify_and_peel(state: RecoveryState, variable: int, value: float, rule: str) -> VerificationEvent:
    """Verify one variable and subtract its contribution from its checks.

    Raises AlreadyVerified when the variable was verified before; the rule
    applicators never do this, so hitting it signals a scheduling bug.
    """
    if state.verified[variable]:
        raise AlreadyVerified(f"variable {variable} verified twice")
    code = RULE_CODES[rule]
    _peel_batch(state, np.asarray([variable], dtype=np.int64), np.asarray([value]), code)
    return VerificationEvent(
        int(variable), float(value), rule, state.iteration, state.round, state.half_round
    )


def _first_occurrence_order(values: np.ndarray) -> np.ndarray:
    """Indices of first occurrences, in original order."""
    _, first = np.unique(values, return_index=True)
    first.sort()
    return first


def _collect_zcn(state: RecoveryState, reff: np.ndarray) -> np.ndarray:
    """Variables adjacent to a zero-valued check, in ascending check order."""
    g = state.graph
    zero_checks = np.flatnonzero((state.residual_degree >= 1) & (np.abs(reff) <= state.zero_tol))
    if zero_checks.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    offs, _ = _gather(g.chk_ptr, zero_checks)
    vids = g.chk_vars[offs].astype(np.int64, copy=False)
    vids = vids[~state.verified[vids]]
    if vids.shape[0] == 0:
        return vids
    return vids[_first_occurrence_order(vids)]


def _zcn_pass(state: RecoveryState) -> int:
    """Zero-valued checks verify all their unverified neighbors as zero."""
    variables = _collect_zcn(state, state.effective_residuals())
    if variables.shape[0] == 0:
        return 0
    _peel_batch(state, variables, np.zeros(variables.shape[0]), RULE_ZCN)
    return variables.shape[0]


def _collect_d1cn(state: RecoveryState, reff: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(variables, values) implied by degree-one non-zero checks."""
    g = state.graph
    cand = np.flatnonzero((state.residual_degree == 1) & (np.abs(reff) > state.zero_tol))
    if cand.shape[0] == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    offs, counts = _gather(g.chk_ptr, cand)
    vids = g.chk_vars[offs].astype(np.int64, copy=False)
    unv = ~state.verified[vids]
    owners = np.repeat(cand, counts)[unv]
    vids = vids[unv]
    weights = g.chk_weights[offs][unv]
    values = reff[owners] / weights
    keep = _first_occurrence_order(vids)
    return vids[keep], values[keep]


def _apply_d1cn_events(state: RecoveryState, variables: np.ndarray, values: np.ndarray) -> int:
    """Peel D1CN assignments; a check left with no unverified neighbors
    must hold a near-zero residual, else two degree-one checks implied
    different values for one variable (ConflictingAssignment)."""
    if variables.shape[0] == 0:
        return 0
    touched = _peel_batch(state, variables, values, RULE_D1CN)
    if touched.shape[0]:
        now_zero_deg = touched[state.residual_degree[touched] == 0]
        if now_zero_deg.shape[0]:
            leftovers = state.residual_value[now_zero_deg] + state.comp[now_zero_deg]
            bad = np.abs(leftovers) > state.zero_tol
            if np.any(bad):
                chk = int(now_zero_deg[np.argmax(bad)])
                raise ConflictingAssignment(
                    f"check {chk} exhausted its neighbors with residual "
                    f"{float(leftovers[np.argmax(bad)])!r}"
                )
    return variables.shape[0]


def _d1cn_pass(state: RecoveryState) -> int:
    variables, values = _collect_d1cn(state, state.effective_residuals())
    return _apply_d1cn_events(state, variables, values)


def _collect_ecn(
    state: RecoveryState, reff: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Equal-valued check classes and the events they imply.

    Classes are maximal groups of checks (with unverified neighbors and
    non-zero residual) whose effective residuals chain within eq_tol after
    sorting.  For a class C, variables adjacent to some but not all of C
    are zero (rule 1); a unique variable adjacent to all of C carries the
    common value (rule 2).  Classes are ordered by smallest check index;
    returns (rule1_variables, rule2_variables, rule2_values), each deduped
    to first occurrence, computed from the given snapshot without applying
    anything.
    """
    g = state.graph
    n = state.n
    empty = np.empty(0, dtype=np.int64)
    active = np.flatnonzero((state.residual_degree >= 1) & (np.abs(reff) > state.zero_tol))
    if active.shape[0] < 2:
        return empty, empty, np.empty(0)
    vals = reff[active]
    sidx = np.argsort(vals, kind="stable")
    sorted_checks = active[sidx]
    sorted_vals = vals[sidx]
    new_class = np.r_[True, np.diff(sorted_vals) > state.eq_tol]
    labels = np.cumsum(new_class) - 1
    sizes = np.bincount(labels)
    member = sizes[labels] >= 2
    if not np.any(member):
        return empty, empty, np.empty(0)
    m_checks = sorted_checks[member]
    m_labels = labels[member]
    # Relabel classes by ascending smallest member check index.
    order = np.lexsort((m_checks, m_labels))
    mc = m_checks[order]
    ml = m_labels[order]
    boundaries = np.r_[True, ml[1:] != ml[:-1]]
    class_starts = np.flatnonzero(boundaries)
    k = class_starts.shape[0]
    first_check = mc[class_starts]
    rank_by_min = np.argsort(first_check, kind="stable")
    rank = np.empty(k, dtype=np.int64)
    rank[rank_by_min] = np.arange(k)
    dense = np.cumsum(boundaries) - 1
    new_labels = rank[dense]
    order2 = np.lexsort((mc, new_labels))
    mc = mc[order2]
    ml = new_labels[order2]
    class_sizes = np.bincount(ml, minlength=k)
    rep_idx = np.flatnonzero(np.r_[True, ml[1:] != ml[:-1]])
    class_value = reff[mc[rep_idx]]

    offs, counts = _gather(g.chk_ptr, mc)
    e_vid = g.chk_vars[offs].astype(np.int64, copy=False)
    e_w = g.chk_weights[offs]
    e_cls = np.repeat(ml, counts)
    unv = ~state.verified[e_vid]
    e_vid = e_vid[unv]
    e_w = e_w[unv]
    e_cls = e_cls[unv]
    if e_vid.shape[0] == 0:
        return empty, empty, np.empty(0)
    key = e_cls * np.int64(n) + e_vid
    korder = np.argsort(key, kind="stable")
    ks = key[korder]
    gstarts = np.flatnonzero(np.r_[True, ks[1:] != ks[:-1]])
    gcounts = np.diff(np.append(gstarts, ks.shape[0]))
    g_cls = ks[gstarts] // n
    g_vid = ks[gstarts] % n
    g_w = e_w[korder][gstarts]
    is_common = gcounts == class_sizes[g_cls]

    rule1_vars = empty
    nc_vid = g_vid[~is_common]
    if nc_vid.shape[0]:
        rule1_vars = nc_vid[_first_occurrence_order(nc_vid)]
    rule2_vars = empty
    rule2_vals = np.empty(0)
    commons_per_class = np.bincount(g_cls[is_common], minlength=k)
    sel = is_common & (commons_per_class[g_cls] == 1)
    if np.any(sel):
        vids2 = g_vid[sel]
        vals2 = class_value[g_cls[sel]] / g_w[sel]
        keep = _first_occurrence_order(vids2)
        rule2_vars = vids2[keep]
        rule2_vals = vals2[keep]
    return rule1_vars, rule2_vars, rule2_vals


def _apply_zero_events(state: RecoveryState, variables: np.ndarray, rule_code: int) -> int:
    """Verify still-unverified variables as zero."""
    if variables.shape[0] == 0:
        return 0
    variables = variables[~state.verified[variables]]
    if variables.shape[0] == 0:
        return 0
    _peel_batch(state, variables, np.zeros(variables.shape[0]), rule_code)
    return variables.shape[0]


def _apply_value_events(state: RecoveryState, variables: np.ndarray, values: np.ndarray, rule_code: int) -> int:
    """Verify still-unverified variables with the given values."""
    if variables.shape[0] == 0:
        return 0
    still = ~state.verified[variables]
    variables = variables[still]
    values = values[still]
    if variables.shape[0] == 0:
        return 0
    _peel_batch(state, variables, values, rule_code)
    return variables.shape[0]


def _ecn_pass(state: RecoveryState, do_rule1: bool, do_rule2: bool) -> int:
    rule1_vars, rule2_vars, rule2_vals = _collect_ecn(state, state.effective_residuals())
    fired = 0
    if do_rule1:
        fired += _apply_zero_events(state, rule1_vars, RULE_ECN_ZERO)
    if do_rule2:
        fired += _apply_value_events(state, rule2_vars, rule2_vals, RULE_ECN_UNIQUE)
    return fired


def _materialize_new(state: RecoveryState, start: int) -> list[VerificationEvent]:
    return [state.events[i] for i in range(start, len(state.events))]


def apply_zcn(state: RecoveryState) -> list[VerificationEvent]:
    """One ZCN pass over the current zero-valued checks."""
    state.half_round += 1
    start = len(state.events)
    _zcn_pass(state)
    return _materialize_new(state, start)


def apply_d1cn(state: RecoveryState) -> list[VerificationEvent]:
    """One D1CN pass over the current degree-one checks."""
    state.half_round += 1
    start = len(state.events)
    _d1cn_pass(state)
    return _materialize_new(state, start)


def apply_ecn(state: RecoveryState) -> list[VerificationEvent]:
    """One full ECN pass (rule 1 then rule 2 per class)."""
    state.half_round += 1
    start = len(state.events)
    _ecn_pass(state, do_rule1=True, do_rule2=True)
    return _materialize_new(state, start)


def run_sbb(
    graph: SensingGraph,
    measurements,
    options: Optional[RecoveryOptions] = None,
    oracle=None,
    instrument: Optional[Callable[[RecoveryState, str], None]] = None,
) -> RecoveryReport:
    """Run the full two-round iteration to a stop condition.

    One iteration is Round 1 (D1CN and ECN rule 2, both computed from the
    pre-round state and applied as one wave; verifies non-zero elements)
    followed by Round 2 (a ZCN wave; verifies zero elements).  Equal-class
    zero verifications are realized through the cascade: once rule 2 peels
    a class's common neighbor, the class checks become zero-valued and ZCN
    picks up their remaining neighbors in round 2, so an explicit rule-1
    wave would only add the rare classes rule 2 cannot resolve, while
    breaking the round-2 characterization that exactly the neighbors of
    zero-valued checks are verified.  Computing each round's events from
    its snapshot is what makes the round-level verification
    characterizations testable: anything a wave enables fires in the next
    iteration, not the current one.  Stops when an iteration produces no
    event, when every variable is verified, or at the iteration cap.

    With the true signal attached, the fraction of unverified non-zero
    elements is recorded per iteration (recording stops once it reaches
    zero).  ``instrument`` is called with (state, phase) at phases
    "iteration_start", "pre_round2", and "iteration_end"; it must treat
    the state as read-only.
    """
    state = init_state(graph, measurements, oracle, options)
    opts = state.options
    trajectory: list[float] = []
    if state.oracle is not None:
        trajectory.append(state.unverified_nonzero_fraction)
    stop = None
    while True:
        if state.all_verified():
            stop = STOP_ALL_VERIFIED
            break
        if state.iteration >= opts.max_iterations:
            stop = STOP_ITERATION_CAP
            break
        state.iteration += 1
        if instrument is not None:
            instrument(state, "iteration_start")
        fired = 0

        state.round = 1
        reff = state.effective_residuals()
        d1_vars, d1_vals = _collect_d1cn(state, reff)
        _, r2_vars, r2_vals = _collect_ecn(state, reff)
        state.half_round = 1
        fired += _apply_d1cn_events(state, d1_vars, d1_vals)
        state.half_round = 2
        fired += _apply_value_events(state, r2_vars, r2_vals, RULE_ECN_UNIQUE)

        if instrument is not None:
            instrument(state, "pre_round2")

        state.round = 2
        state.half_round = 1
        zcn_vars = _collect_zcn(state, state.effective_residuals())
        fired += _apply_zero_events(state, zcn_vars, RULE_ZCN)

        if state.oracle is not None and (not trajectory or trajectory[-1] > 0.0):
            trajectory.append(state.unverified_nonzero_fraction)
        if instrument is not None:
            instrument(state, "iteration_end")
        if fired == 0:
            stop = STOP_STALLED
            break
    success = state.all_verified()
    if success and state.oracle is not None:
        success = bool(
            np.all(np.abs(state.verified_value - state.oracle) <= state.value_tol)
        )
    return RecoveryReport(
        success=success,
        iterations_run=state.iteration,
        events=state.events,
        trajectory=trajectory,
        stop_reason=stop,
        n=graph.n,
        value_tol=state.value_tol,
        verified_count=state.num_verified,
    )


def check_false_verification(report: RecoveryReport, oracle) -> bool:
    """True iff every event assigned the variable its true value."""
    v = _as_signal(oracle)
    if v is None:
        raise OracleRequired("check_false_verification needs the true signal")
    ev = report.events
    if len(ev) == 0:
        return True
    return bool(np.all(np.abs(ev.values - v[ev.variables]) <= report.value_tol))


def recompute_residuals(graph: SensingGraph, measurements, state: RecoveryState) -> tuple[np.ndarray, np.ndarray]:
    """From-scratch residual values and degrees given the verified set.

    Independent of the incremental bookkeeping: subtracts every verified
    neighbor's contribution from the raw measurements in one shot.
    """
    c = _as_values(measurements)
    done = state.verified[graph.chk_vars]
    contrib = np.where(done, graph.chk_weights * state.verified_value[graph.chk_vars], 0.0)
    values = c - np.add.reduceat(contrib, graph.chk_ptr[:-1])
    degrees = np.add.reduceat((~done).astype(np.int64), graph.chk_ptr[:-1])
    return values, degrees


def residuals_from_oracle(graph: SensingGraph, oracle, verified: np.ndarray) -> np.ndarray:
    """Residuals implied by the true signal: sums over unverified neighbors."""
    v = _as_signal(oracle)
    keep = ~verified[graph.chk_vars]
    contrib = np.where(keep, graph.chk_weights * v[graph.chk_vars], 0.0)
    return np.add.reduceat(contrib, graph.chk_ptr[:-1])
