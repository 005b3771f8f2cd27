"""Description-length arithmetic, in bits.

Every quantity here is a base-2 logarithm of a count of configurations. The
functions are pure; nothing in this module touches cluster state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

LN2 = math.log(2.0)
_EXACT_MAX = 20
_EXACT = [math.log2(math.factorial(n)) for n in range(_EXACT_MAX + 1)]


class InvariantError(RuntimeError):
    """Raised when internal bookkeeping is found to be inconsistent."""


def log_factorial(n: int) -> float:
    """log2(n!), exact table for n <= 20 and log-gamma above."""
    if n < 0:
        raise ValueError(f"log_factorial needs n >= 0, got {n}")
    if n <= _EXACT_MAX:
        return _EXACT[n]
    return math.lgamma(n + 1) / LN2


def log_factorial_array(n_max: int) -> np.ndarray:
    """Lookup table ``tab[n] = log2(n!)`` for ``0 <= n <= n_max``."""
    n = np.arange(n_max + 1, dtype=np.float64)
    tab = gammaln(n + 1.0) / LN2
    k = min(n_max, _EXACT_MAX) + 1
    tab[:k] = _EXACT[:k]
    return tab


class LogFactorialTable:
    """Growable log2(n!) lookup shared by the vectorised cost kernels."""

    def __init__(self, n_max: int = 1024):
        self._tab = log_factorial_array(n_max)

    def ensure(self, n_max: int) -> np.ndarray:
        if n_max >= self._tab.size:
            self._tab = log_factorial_array(max(n_max, 2 * self._tab.size))
        return self._tab

    def __call__(self, counts: np.ndarray) -> np.ndarray:
        tab = self.ensure(int(np.max(counts, initial=0)))
        return tab[counts]


LOG_FACTORIAL = LogFactorialTable()


def log_binomial(n: int, k: int) -> float:
    """log2 C(n, k)."""
    if k < 0 or n < 0 or k > n:
        raise ValueError(f"log_binomial undefined for n={n}, k={k}")
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k)


def log_multiset(n: int, k: int) -> float:
    """log2 of the multiset coefficient ((n, k)) = C(n + k - 1, k)."""
    if k < 0 or n < 0:
        raise ValueError(f"log_multiset undefined for n={n}, k={k}")
    if n == 0:
        if k > 0:
            raise ValueError("log_multiset: no way to pick k > 0 items from an empty set")
        return 0.0
    return log_binomial(n + k - 1, k)


def partition_cost(n_locations: int, n_clusters: int, spanning_tree_bits: float) -> float:
    """Bits to send a contiguous partition: a spanning tree plus D-1 cuts of it."""
    if not 1 <= n_clusters <= n_locations:
        raise ValueError(f"need 1 <= D <= N, got D={n_clusters}, N={n_locations}")
    return spanning_tree_bits + log_binomial(n_locations - 1, n_clusters - 1)


def driver_cost(n_clusters: int, series_length: int, alphabet_size: int) -> float:
    return n_clusters * series_length * math.log2(alphabet_size)


def table_cost(driver_marginals: Sequence[int], cluster_size: int, alphabet_size: int) -> float:
    """Bits for the rows of a driver/member contingency table given its row sums."""
    total = 0.0
    for c in driver_marginals:
        c = int(c)
        if c < 0:
            raise ValueError(f"negative driver marginal {c}")
        total += log_multiset(alphabet_size, cluster_size * c)
    return total


def member_cost(contingency: np.ndarray | Iterable[Iterable[int]]) -> float:
    """Bits for member series given the contingency table (sum of row multinomials)."""
    total = 0.0
    for row in np.asarray(contingency, dtype=np.int64):
        total += log_factorial(int(row.sum())) - sum(log_factorial(int(c)) for c in row)
    return total


@dataclass(frozen=True)
class CodelengthBreakdown:
    spanning_tree_bits: float
    partition_choice_bits: float
    driver_bits: float
    table_bits: float
    member_bits: float
    total_bits: float

    def __post_init__(self):
        parts = (self.spanning_tree_bits, self.partition_choice_bits, self.driver_bits,
                 self.table_bits, self.member_bits)
        if any(p < -1e-9 for p in parts):
            raise InvariantError(f"negative codelength component in {self}")
        s = math.fsum(parts)
        if abs(s - self.total_bits) > 1e-9 * max(1.0, abs(s)):
            raise InvariantError(f"total_bits {self.total_bits} != sum of parts {s}")

    @classmethod
    def from_parts(cls, spanning_tree_bits, partition_choice_bits, driver_bits,
                   table_bits, member_bits) -> "CodelengthBreakdown":
        total = math.fsum((spanning_tree_bits, partition_choice_bits, driver_bits,
                           table_bits, member_bits))
        return cls(spanning_tree_bits, partition_choice_bits, driver_bits,
                   table_bits, member_bits, total)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def total_description_length(states, n_locations: int, series_length: int,
                             alphabet_size: int, spanning_tree_bits: float = 0.0
                             ) -> CodelengthBreakdown:
    """Assemble the full objective for a set of cluster states.

    ``states`` is any iterable of objects exposing ``members``, ``driver_marginals``
    and ``contingency`` (see :class:`mdlregion.cluster_state.ClusterState`).
    """
    states = list(states)
    seen = sorted(m for st in states for m in st.members)
    if seen != list(range(n_locations)):
        raise InvariantError("cluster members do not partition the node set")
    tbits = []
    mbits = []
    for st in states:
        n_d = len(st.members)
        marg = np.asarray(st.driver_marginals)
        cont = np.asarray(st.contingency)
        if marg.sum() != series_length or not np.array_equal(cont.sum(axis=1), n_d * marg):
            raise InvariantError(f"contingency inconsistent with driver for cluster {st.members[:5]}")
        tbits.append(table_cost(marg, n_d, alphabet_size))
        mbits.append(member_cost(cont))
    D = len(states)
    return CodelengthBreakdown.from_parts(
        spanning_tree_bits,
        log_binomial(n_locations - 1, D - 1),
        driver_cost(D, series_length, alphabet_size),
        math.fsum(tbits),
        math.fsum(mbits),
    )
