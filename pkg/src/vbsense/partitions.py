"""Set-partition instrumentation for instrumented (oracle-attached) runs.

With the true signal attached, the unverified variables split into the
non-zero set and the zero set.  Checks of original degree d_c are counted
by (i, j) = (number of unverified non-zero neighbors, number of unverified
zero neighbors).  N_1 denotes the checks with i == 1; N_{1,0} those with
i == 1 and j == 0 (residual degree one).  Unverified non-zero variables of
degree d_v are counted by how many of their checks lie in N_1; unverified
zero variables by how many of their checks are currently zero-valued
(i == 0).

These partitions characterize what the two rounds verify: round 1 should
verify exactly the non-zero variables with at least two N_1 neighbors plus
those whose single N_1 neighbor has residual degree one, and round 2
exactly the zero variables adjacent to a zero-valued check.  The
characterization is an ensemble-average statement; finite graphs violate
it in rare structured neighborhoods (see check_round_theorems).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ensemble import SensingGraph
from .errors import OracleRequired
from .recovery import (
    RecoveryOptions,
    RecoveryReport,
    RecoveryState,
    _as_signal,
    run_sbb,
)


@dataclass(frozen=True)
class PartitionSnapshot:
    """Counts of the check and variable partitions at one instant."""

    N_counts: dict[tuple[int, int, int], int]
    K_counts: dict[tuple[int, int], int]
    Delta_counts: dict[tuple[int, int], int]
    K_hat_1: int

    def checks_of_degree(self, dc: int) -> int:
        return sum(c for (d, _, _), c in self.N_counts.items() if d == dc)


def _partition_arrays(state: RecoveryState, oracle: np.ndarray):
    """Per-check (i, j) counts and per-variable N_1 statistics."""
    g = state.graph
    unv = ~state.verified
    nz = oracle != 0.0
    unv_nz = unv & nz
    unv_z = unv & ~nz

    evid = g.chk_vars
    i_counts = np.add.reduceat(unv_nz[evid].astype(np.int64), g.chk_ptr[:-1])
    j_counts = np.add.reduceat(unv_z[evid].astype(np.int64), g.chk_ptr[:-1])

    in_n1 = i_counts == 1
    in_n10 = in_n1 & (j_counts == 0)
    zero_valued = i_counts == 0

    vcid = g.var_checks
    n1_per_var = np.add.reduceat(in_n1[vcid].astype(np.int64), g.var_ptr[:-1])
    n10_per_var = np.add.reduceat(in_n10[vcid].astype(np.int64), g.var_ptr[:-1])
    zerochk_per_var = np.add.reduceat(zero_valued[vcid].astype(np.int64), g.var_ptr[:-1])
    return unv_nz, unv_z, i_counts, j_counts, n1_per_var, n10_per_var, zerochk_per_var


def compute_partitions(state: RecoveryState, oracle=None) -> PartitionSnapshot:
    """Snapshot the check/variable partitions of the current state."""
    v = _as_signal(oracle) if oracle is not None else state.oracle
    if v is None:
        raise OracleRequired("compute_partitions needs the true signal")
    g = state.graph
    unv_nz, unv_z, i_counts, j_counts, n1_per_var, n10_per_var, zerochk_per_var = _partition_arrays(state, v)

    dc = np.diff(g.chk_ptr)
    keys = np.stack([dc, i_counts, j_counts], axis=1)
    uniq, counts = np.unique(keys, axis=0, return_counts=True)
    n_counts = {(int(a), int(b), int(c)): int(x) for (a, b, c), x in zip(uniq, counts)}

    dv = np.diff(g.var_ptr)
    k_keys = np.stack([dv[unv_nz], n1_per_var[unv_nz]], axis=1)
    if k_keys.shape[0]:
        uniq, counts = np.unique(k_keys, axis=0, return_counts=True)
        k_counts = {(int(a), int(b)): int(x) for (a, b), x in zip(uniq, counts)}
    else:
        k_counts = {}

    d_keys = np.stack([dv[unv_z], zerochk_per_var[unv_z]], axis=1)
    if d_keys.shape[0]:
        uniq, counts = np.unique(d_keys, axis=0, return_counts=True)
        delta_counts = {(int(a), int(b)): int(x) for (a, b), x in zip(uniq, counts)}
    else:
        delta_counts = {}

    k_hat_1 = int(np.count_nonzero(unv_nz & (n1_per_var == 1) & (n10_per_var > 0)))
    return PartitionSnapshot(n_counts, k_counts, delta_counts, k_hat_1)


def round1_predicted_set(state: RecoveryState, oracle=None) -> np.ndarray:
    """Non-zero variables the round-1 characterization says get verified."""
    v = _as_signal(oracle) if oracle is not None else state.oracle
    if v is None:
        raise OracleRequired("round1_predicted_set needs the true signal")
    unv_nz, _, _, _, n1_per_var, n10_per_var, _ = _partition_arrays(state, v)
    return np.flatnonzero(unv_nz & ((n1_per_var >= 2) | ((n1_per_var == 1) & (n10_per_var > 0))))


def round2_predicted_set(state: RecoveryState, oracle=None) -> np.ndarray:
    """Zero variables the round-2 characterization says get verified."""
    v = _as_signal(oracle) if oracle is not None else state.oracle
    if v is None:
        raise OracleRequired("round2_predicted_set needs the true signal")
    _, unv_z, _, _, _, _, zerochk_per_var = _partition_arrays(state, v)
    return np.flatnonzero(unv_z & (zerochk_per_var >= 1))


@dataclass
class RoundCheckRecord:
    iteration: int
    round1_predicted: np.ndarray
    round1_actual: np.ndarray
    round2_predicted: np.ndarray
    round2_actual: np.ndarray

    @property
    def round1_exact(self) -> bool:
        return np.array_equal(self.round1_predicted, self.round1_actual)

    @property
    def round2_exact(self) -> bool:
        return np.array_equal(self.round2_predicted, self.round2_actual)


@dataclass
class TheoremCheckResult:
    """Per-iteration comparison of predicted vs actually verified sets."""

    records: list[RoundCheckRecord] = field(default_factory=list)
    report: Optional[RecoveryReport] = None

    @property
    def round1_all_exact(self) -> bool:
        return all(r.round1_exact for r in self.records)

    @property
    def round2_all_exact(self) -> bool:
        return all(r.round2_exact for r in self.records)

    def mismatches(self) -> list[tuple[int, str, int, int]]:
        out = []
        for r in self.records:
            if not r.round1_exact:
                out.append((r.iteration, "round1", r.round1_predicted.size, r.round1_actual.size))
            if not r.round2_exact:
                out.append((r.iteration, "round2", r.round2_predicted.size, r.round2_actual.size))
        return out


def check_round_theorems(
    graph: SensingGraph,
    measurements,
    signal,
    options: Optional[RecoveryOptions] = None,
) -> TheoremCheckResult:
    """Run one instrumented recovery comparing each round against its
    predicted verification set, both computed from pre-round snapshots."""
    oracle = _as_signal(signal)
    result = TheoremCheckResult()
    holder: dict = {}

    def observer(state: RecoveryState, phase: str) -> None:
        if phase == "iteration_start":
            holder["pred1"] = round1_predicted_set(state)
            holder["before_r1"] = state.verified.copy()
        elif phase == "pre_round2":
            before = holder["before_r1"]
            holder["actual1"] = np.flatnonzero(state.verified & ~before)
            holder["pred2"] = round2_predicted_set(state)
            holder["before_r2"] = state.verified.copy()
        elif phase == "iteration_end":
            before = holder["before_r2"]
            actual2 = np.flatnonzero(state.verified & ~before)
            result.records.append(
                RoundCheckRecord(
                    iteration=state.iteration,
                    round1_predicted=holder["pred1"],
                    round1_actual=holder["actual1"],
                    round2_predicted=holder["pred2"],
                    round2_actual=actual2,
                )
            )

    result.report = run_sbb(graph, measurements, options=options, oracle=oracle, instrument=observer)
    return result
