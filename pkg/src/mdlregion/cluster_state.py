"""Per-cluster sufficient statistics and merge evaluation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codelength import LOG_FACTORIAL, InvariantError, member_cost, table_cost


@dataclass(frozen=True, eq=False)
class SymbolMatrix:
    """N x T matrix of symbols in ``1..alphabet_size``."""

    values: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        v = np.ascontiguousarray(self.values)
        if v.ndim != 2:
            raise ValueError("symbol matrix must be 2-D (N x T)")
        if not np.issubdtype(v.dtype, np.integer):
            if not np.all(np.isfinite(v)) or np.any(v != np.round(v)):
                raise ValueError("symbol matrix must hold integers with no missing entries")
        v = v.astype(np.int64)
        if self.alphabet_size < 1:
            raise ValueError("alphabet size must be >= 1")
        if v.size and (v.min() < 1 or v.max() > self.alphabet_size):
            raise ValueError(f"symbols must lie in 1..{self.alphabet_size}, "
                             f"found range {v.min()}..{v.max()}")
        object.__setattr__(self, "values", v)

    @property
    def n_series(self) -> int:
        return self.values.shape[0]

    @property
    def series_length(self) -> int:
        return self.values.shape[1]

    @property
    def codes(self) -> np.ndarray:
        """Zero-based symbol codes."""
        return self.values - 1

    def one_hot(self, rows=None) -> np.ndarray:
        """(n, T, S) int32 indicator array for the selected rows."""
        codes = self.codes if rows is None else self.codes[rows]
        out = np.zeros(codes.shape + (self.alphabet_size,), dtype=np.int32)
        np.put_along_axis(out, codes[..., None], 1, axis=-1)
        return out


def majority_vote_driver(counts: np.ndarray) -> np.ndarray:
    """Per-time argmax of the symbol counts, ties to the smallest symbol (1-based)."""
    counts = np.asarray(counts)
    if np.any(counts.sum(axis=-1) == 0):
        raise InvariantError("majority vote over an empty column of counts")
    return counts.argmax(axis=-1) + 1


def contingency_from_counts(counts: np.ndarray, driver: np.ndarray) -> np.ndarray:
    """c[r, s] = sum over t with driver_t == r of counts[t, s]."""
    S = counts.shape[-1]
    c = np.zeros((S, S), dtype=np.int64)
    np.add.at(c, driver - 1, counts)
    return c


def batch_cluster_costs(counts: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Table plus member bits for a stack of clusters given their (k, T, S) counts.

    The multinomial numerator log2((n c_r)!) of the member term cancels against
    the denominator of the multiset coefficient, leaving
    sum_r [log2((n c_r + S - 1)!) - log2((S - 1)!)] - sum_rs log2(c_rs!).
    """
    k, T, S = counts.shape
    drv = counts.argmax(axis=2)
    onehot = (drv[:, :, None] == np.arange(S)).astype(counts.dtype)
    cont = np.matmul(onehot.transpose(0, 2, 1), counts)
    marg = onehot.sum(axis=1)
    row_tot = np.asarray(sizes)[:, None] * marg + (S - 1)
    tab = LOG_FACTORIAL.ensure(int(row_tot.max()))
    return (tab[row_tot].sum(axis=1) - S * tab[S - 1]) - tab[cont].sum(axis=(1, 2))


@dataclass(frozen=True, eq=False)
class ClusterState:
    members: tuple[int, ...]
    counts: np.ndarray
    driver: np.ndarray
    driver_marginals: np.ndarray
    contingency: np.ndarray
    cached_cost: float

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def alphabet_size(self) -> int:
        return self.counts.shape[1]

    @classmethod
    def from_counts(cls, members, counts: np.ndarray) -> "ClusterState":
        members = tuple(sorted(int(m) for m in members))
        counts = np.asarray(counts, dtype=np.int64)
        n_d = len(members)
        if np.any(counts.sum(axis=1) != n_d):
            raise InvariantError("time-symbol counts do not sum to the cluster size")
        S = counts.shape[1]
        driver = majority_vote_driver(counts)
        marg = np.bincount(driver - 1, minlength=S)
        cont = contingency_from_counts(counts, driver)
        cost = table_cost(marg, n_d, S) + member_cost(cont)
        return cls(members, counts, driver, marg, cont, cost)

    @classmethod
    def from_members(cls, z: SymbolMatrix, members) -> "ClusterState":
        members = sorted(int(m) for m in members)
        counts = z.one_hot(members).sum(axis=0, dtype=np.int64)
        return cls.from_counts(members, counts)

    def check(self) -> None:
        """Validate every stored invariant; raises InvariantError."""
        n_d = self.size
        S = self.alphabet_size
        if list(self.members) != sorted(set(self.members)):
            raise InvariantError("members not sorted/unique")
        if np.any(self.counts.sum(axis=1) != n_d):
            raise InvariantError("counts rows do not sum to n_d")
        if not np.array_equal(self.driver, majority_vote_driver(self.counts)):
            raise InvariantError("driver is not the majority vote")
        if self.driver_marginals.sum() != self.series_length:
            raise InvariantError("driver marginals do not sum to T")
        if not np.array_equal(self.contingency.sum(axis=1), n_d * self.driver_marginals):
            raise InvariantError("contingency rows do not match n_d * marginals")
        expect = table_cost(self.driver_marginals, n_d, S) + member_cost(self.contingency)
        if abs(expect - self.cached_cost) > 1e-9 * max(1.0, abs(expect)):
            raise InvariantError("cached cost is stale")

    @property
    def series_length(self) -> int:
        return self.counts.shape[0]


def init_singletons(z: SymbolMatrix) -> list[ClusterState]:
    onehot = z.one_hot().astype(np.int64)
    return [ClusterState.from_counts((i,), onehot[i]) for i in range(z.n_series)]


def _check_disjoint(a: ClusterState, b: ClusterState) -> None:
    if set(a.members) & set(b.members):
        raise InvariantError(f"clusters overlap: {sorted(set(a.members) & set(b.members))[:5]}")


def merge_delta(a: ClusterState, b: ClusterState) -> float:
    """Change in the cluster-local bits (table + member) caused by merging a and b.

    Global terms that depend only on D are left to the caller.
    """
    _check_disjoint(a, b)
    merged = ClusterState.from_counts(a.members + b.members, a.counts + b.counts)
    return merged.cached_cost - (a.cached_cost + b.cached_cost)


def apply_merge(a: ClusterState, b: ClusterState) -> ClusterState:
    _check_disjoint(a, b)
    return ClusterState.from_counts(a.members + b.members, a.counts + b.counts)


def states_from_labels(z: SymbolMatrix, labels) -> list[ClusterState]:
    """Cluster states for a label vector, ordered by each cluster's smallest member."""
    labels = np.asarray(labels)
    order = []
    seen = {}
    for i, lab in enumerate(labels.tolist()):
        if lab not in seen:
            seen[lab] = len(order)
            order.append([])
        order[seen[lab]].append(i)
    return [ClusterState.from_members(z, m) for m in order]
