"""Random sensing graphs, sparse signals, and the measuring operation.

A sensing graph is a simple bipartite graph between n variable nodes and m
check nodes, sampled configuration-model style: node degrees are fixed
exactly by integerizing the degree distributions, sockets are matched by a
seeded permutation, and parallel edges are repaired by random double-edge
swaps.  Measurements are c[i] = sum of weight * signal over the neighbors
of check i, accumulated in ascending variable order for reproducibility.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import IO, Optional

import numpy as np

from .distributions import DegreeDistribution, expand_degrees, node_counts
from .errors import DimensionMismatch, InfeasibleEdgeBudget, RepairStall, ValidationError
from .seeds import GRAPH_SALT, SIGNAL_SALT, derive_rng

REPAIR_CAP_FACTOR = 100


@dataclass(frozen=True)
class WeightModel:
    """Edge-weight model: constant value or a continuous distribution."""

    kind: str = "constant"
    value: float = 1.0
    low: float = 0.5
    high: float = 1.5

    @classmethod
    def constant(cls, value: float = 1.0) -> "WeightModel":
        if value == 0:
            raise ValidationError("edge weights must be non-zero")
        return cls(kind="constant", value=value)

    @classmethod
    def uniform(cls, low: float = 0.5, high: float = 1.5) -> "WeightModel":
        if not (0 < low < high):
            raise ValidationError("uniform weights need 0 < low < high")
        return cls(kind="uniform", low=low, high=high)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(size, self.value, dtype=np.float64)
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high, size=size)
        raise ValidationError(f"unknown weight model {self.kind!r}")


@dataclass(frozen=True)
class SignalModel:
    """Distribution of non-zero signal values.

    gaussian: standard normal.  uniform: on (low, high).  big_int: uniform
    non-zero integers in [-magnitude, magnitude], exactly representable in
    float64, for tolerance-free exact-arithmetic testing.
    """

    kind: str = "gaussian"
    low: float = -1.0
    high: float = 1.0
    magnitude: int = 2**40

    @classmethod
    def gaussian(cls) -> "SignalModel":
        return cls(kind="gaussian")

    @classmethod
    def uniform(cls, low: float, high: float) -> "SignalModel":
        return cls(kind="uniform", low=low, high=high)

    @classmethod
    def big_int(cls, magnitude: int = 2**40) -> "SignalModel":
        return cls(kind="big_int", magnitude=int(magnitude))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high, size=size)
        if self.kind == "big_int":
            vals = rng.integers(1, self.magnitude + 1, size=size)
            signs = rng.integers(0, 2, size=size) * 2 - 1
            return (vals * signs).astype(np.float64)
        raise ValidationError(f"unknown signal model {self.kind!r}")


@dataclass(frozen=True)
class SignalVector:
    """Length-n signal; support is the index set of non-zero entries."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values != 0.0)

    @property
    def k(self) -> int:
        return int(np.count_nonzero(self.values))


@dataclass(frozen=True)
class MeasurementVector:
    values: np.ndarray

    @property
    def m(self) -> int:
        return int(self.values.shape[0])


class SensingGraph:
    """Simple weighted bipartite graph in dual CSR form.

    var_ptr/var_checks/var_weights give each variable's (check, weight)
    neighbors in ascending check order; chk_ptr/chk_vars/chk_weights give
    the transpose in ascending variable order.  Both views describe the
    same edge multiset.
    """

    __slots__ = (
        "n",
        "m",
        "var_ptr",
        "var_checks",
        "var_weights",
        "chk_ptr",
        "chk_vars",
        "chk_weights",
    )

    def __init__(self, n: int, m: int, var_ids: np.ndarray, chk_ids: np.ndarray, weights: np.ndarray):
        if var_ids.shape != chk_ids.shape or var_ids.shape != weights.shape:
            raise DimensionMismatch("edge arrays must have equal length")
        self.n = int(n)
        self.m = int(m)
        order = np.lexsort((chk_ids, var_ids))
        v_sorted = var_ids[order]
        self.var_checks = np.ascontiguousarray(chk_ids[order], dtype=np.int32)
        self.var_weights = np.ascontiguousarray(weights[order], dtype=np.float64)
        self.var_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(v_sorted, minlength=n), out=self.var_ptr[1:])

        order = np.lexsort((var_ids, chk_ids))
        c_sorted = chk_ids[order]
        self.chk_vars = np.ascontiguousarray(var_ids[order], dtype=np.int32)
        self.chk_weights = np.ascontiguousarray(weights[order], dtype=np.float64)
        self.chk_ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(np.bincount(c_sorted, minlength=m), out=self.chk_ptr[1:])

    @property
    def num_edges(self) -> int:
        return int(self.var_checks.shape[0])

    @property
    def variable_degrees(self) -> np.ndarray:
        return np.diff(self.var_ptr).astype(np.int32)

    @property
    def check_degrees(self) -> np.ndarray:
        return np.diff(self.chk_ptr).astype(np.int32)

    def var_adj(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        s, e = self.var_ptr[j], self.var_ptr[j + 1]
        return self.var_checks[s:e], self.var_weights[s:e]

    def chk_adj(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        s, e = self.chk_ptr[i], self.chk_ptr[i + 1]
        return self.chk_vars[s:e], self.chk_weights[s:e]

    def degree_histogram(self, side: str) -> dict[int, int]:
        degs = self.variable_degrees if side == "variable" else self.check_degrees
        vals, counts = np.unique(degs, return_counts=True)
        return {int(d): int(c) for d, c in zip(vals, counts)}

    def edge_list(self) -> np.ndarray:
        """(num_edges, 3) array of (check, variable, weight) rows, sorted."""
        out = np.empty((self.num_edges, 3), dtype=np.float64)
        chk_ids = np.repeat(np.arange(self.m), np.diff(self.chk_ptr))
        out[:, 0] = chk_ids
        out[:, 1] = self.chk_vars
        out[:, 2] = self.chk_weights
        return out

    def write_edge_csv(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check_index", "variable_index", "weight"])
        chk_ids = np.repeat(np.arange(self.m), np.diff(self.chk_ptr))
        for c, v, wt in zip(chk_ids, self.chk_vars, self.chk_weights):
            w.writerow([int(c), int(v), repr(float(wt))])

    def same_edges(self, other: "SensingGraph") -> bool:
        return (
            self.n == other.n
            and self.m == other.m
            and np.array_equal(self.chk_ptr, other.chk_ptr)
            and np.array_equal(self.chk_vars, other.chk_vars)
            and np.array_equal(self.chk_weights, other.chk_weights)
        )


@dataclass(frozen=True)
class EnsembleSpec:
    """Everything needed to sample one (graph, signal) instance.

    m is derived as round(n * mean_var_degree / mean_check_degree); the
    common edge budget is round(n * mean_var_degree) and both sides must
    integerize to it exactly.
    """

    n: int
    lam: DegreeDistribution
    rho: DegreeDistribution
    alpha: float
    weight_model: WeightModel = field(default_factory=WeightModel.constant)
    signal_model: SignalModel = field(default_factory=SignalModel.gaussian)

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha {self.alpha} outside [0, 1]")

    @property
    def m(self) -> int:
        return int(round(self.n * self.lam.mean_degree / self.rho.mean_degree))

    @property
    def edge_budget(self) -> int:
        return int(round(self.n * self.lam.mean_degree))

    def with_alpha(self, alpha: float) -> "EnsembleSpec":
        return EnsembleSpec(self.n, self.lam, self.rho, alpha, self.weight_model, self.signal_model)

    def summary(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "lambda": self.lam.to_text(),
            "rho": self.rho.to_text(),
            "alpha": self.alpha,
            "edge_budget": self.edge_budget,
            "weight_model": self.weight_model.kind,
            "signal_model": self.signal_model.kind,
        }


def nearest_feasible_n(
    lam: DegreeDistribution,
    rho: DegreeDistribution,
    n: int,
    max_shift: int = 200,
) -> int:
    """Closest variable count to n where both sides integerize exactly.

    Exact rational fractions impose divisibility on n (e.g. a 14/15 + 1/15
    mixture needs 15 | n); evaluating at the nearest feasible n shifts the
    problem size by well under a percent, far below Monte Carlo resolution.
    """
    for shift in range(max_shift + 1):
        for cand in {n + shift, n - shift}:
            if cand < 1:
                continue
            budget = int(round(cand * lam.mean_degree))
            m = int(round(budget / rho.mean_degree))
            if m < 1:
                continue
            try:
                node_counts(lam, cand, budget)
                node_counts(rho, m, budget)
            except (InfeasibleEdgeBudget, ValidationError):
                continue
            return cand
    raise InfeasibleEdgeBudget(
        f"no feasible n within {max_shift} of {n} for {lam.to_text()} / {rho.to_text()}"
    )


def sample_graph(spec: EnsembleSpec, seed) -> SensingGraph:
    """Sample a simple graph with exact degree histograms on both sides.

    Sockets on each side follow the integerized node counts; a seeded
    permutation matches them; duplicate (variable, check) pairs are then
    repaired by random double-edge swaps, capped at 100 * num_edges
    attempts (RepairStall beyond that).
    """
    budget = spec.edge_budget
    var_counts = node_counts(spec.lam, spec.n, budget)
    chk_counts = node_counts(spec.rho, spec.m, budget)
    var_deg = np.asarray(expand_degrees(var_counts), dtype=np.int64)
    chk_deg = np.asarray(expand_degrees(chk_counts), dtype=np.int64)

    rng = derive_rng(seed, GRAPH_SALT)
    var_sockets = np.repeat(np.arange(spec.n, dtype=np.int64), var_deg)
    chk_sockets = np.repeat(np.arange(spec.m, dtype=np.int64), chk_deg)
    chk_sockets = chk_sockets[rng.permutation(budget)]

    # Repair parallel edges: re-wire duplicate edges against random partners
    # until the (variable, check) keys are unique.  Degree sequences are
    # preserved because only check endpoints are exchanged.
    keys = var_sockets * np.int64(spec.m) + chk_sockets
    attempts_left = REPAIR_CAP_FACTOR * budget
    while True:
        order = np.argsort(keys, kind="stable")
        sorted_keys = keys[order]
        dup_mask = np.zeros(budget, dtype=bool)
        dup_mask[order[1:]] = sorted_keys[1:] == sorted_keys[:-1]
        dup_idx = np.flatnonzero(dup_mask)
        if dup_idx.size == 0:
            break
        if attempts_left <= 0:
            raise RepairStall(
                f"could not remove {dup_idx.size} parallel edges within the attempt cap"
            )
        partners = rng.integers(0, budget, size=dup_idx.size)
        for e, f in zip(dup_idx, partners):
            attempts_left -= 1
            chk_sockets[e], chk_sockets[f] = chk_sockets[f], chk_sockets[e]
        keys = var_sockets * np.int64(spec.m) + chk_sockets

    weights = spec.weight_model.sample(rng, budget)
    return SensingGraph(spec.n, spec.m, var_sockets, chk_sockets.astype(np.int64), weights)


def sample_signal(
    n: int,
    alpha: float,
    g: Optional[SignalModel] = None,
    seed=0,
) -> SignalVector:
    """Each element is 0 with probability 1-alpha, else a draw from g."""
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha {alpha} outside [0, 1]")
    g = g or SignalModel.gaussian()
    rng = derive_rng(seed, SIGNAL_SALT)
    mask = rng.random(n) < alpha
    values = np.zeros(n, dtype=np.float64)
    k = int(mask.sum())
    if k:
        values[mask] = g.sample(rng, k)
    return SignalVector(values)


def measure(graph: SensingGraph, signal: SignalVector) -> MeasurementVector:
    """c[i] = sum over neighbors of check i of weight * signal value.

    Accumulation runs in ascending variable order within each check, so
    repeated calls are bit-identical.
    """
    v = signal.values if isinstance(signal, SignalVector) else np.asarray(signal, dtype=np.float64)
    if v.shape[0] != graph.n:
        raise DimensionMismatch(f"signal length {v.shape[0]} != n {graph.n}")
    terms = graph.chk_weights * v[graph.chk_vars]
    out = np.add.reduceat(terms, graph.chk_ptr[:-1]) if graph.num_edges else np.zeros(graph.m)
    # reduceat misbehaves on empty segments; degree >= 1 is guaranteed by
    # DegreeDistribution, so only the all-empty case needs a guard.
    return MeasurementVector(out.astype(np.float64, copy=False))


def sample_instance(spec: EnsembleSpec, seed) -> tuple[SensingGraph, SignalVector, MeasurementVector]:
    """Fresh (graph, signal, measurements) triple for one trial."""
    graph = sample_graph(spec, seed)
    signal = sample_signal(spec.n, spec.alpha, spec.signal_model, seed)
    return graph, signal, measure(graph, signal)


def graph_summary(graph: SensingGraph) -> dict:
    return {
        "n": graph.n,
        "m": graph.m,
        "num_edges": graph.num_edges,
        "variable_degree_histogram": graph.degree_histogram("variable"),
        "check_degree_histogram": graph.degree_histogram("check"),
    }


def write_graph_summary(graph: SensingGraph, fh: IO[str], config: Optional[dict] = None) -> None:
    payload = {"config": config or {}, "summary": graph_summary(graph)}
    json.dump(payload, fh, indent=2, sort_keys=True)
    fh.write("\n")
