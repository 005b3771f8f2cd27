"""Partition quality: adjusted mutual information and inverse compression ratio."""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .codelength import CodelengthBreakdown


def _contingency(a, b) -> np.ndarray:
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def mutual_information(a, b) -> float:
    """Mutual information in nats between two labelings."""
    table = _contingency(a, b)
    n = table.sum()
    nz = table > 0
    rows = table.sum(axis=1, keepdims=True)
    cols = table.sum(axis=0, keepdims=True)
    nij = table[nz]
    return float((nij / n * np.log(n * nij / (rows @ cols)[nz])).sum())


def expected_mutual_information(row_sums: np.ndarray, col_sums: np.ndarray) -> float:
    """E[MI] under random permutation of labels with fixed marginals (hypergeometric model)."""
    a = np.asarray(row_sums, dtype=np.int64)
    b = np.asarray(col_sums, dtype=np.int64)
    n = int(a.sum())
    if n == 0:
        return 0.0
    lg = gammaln(np.arange(n + 2, dtype=np.float64))  # lg[k] = ln((k-1)!)
    lf = lg[1:]  # lf[k] = ln(k!)
    ai = a[:, None]
    bj = b[None, :]
    lo = np.maximum(1, ai + bj - n)
    hi = np.minimum(ai, bj)
    total = 0.0
    for nij in range(1, int(hi.max(initial=0)) + 1):
        ok = (lo <= nij) & (nij <= hi)
        if not ok.any():
            continue
        A, B = np.broadcast_to(ai, ok.shape)[ok], np.broadcast_to(bj, ok.shape)[ok]
        log_p = (lf[A] + lf[B] + lf[n - A] + lf[n - B]
                 - lf[n] - lf[nij] - lf[A - nij] - lf[B - nij] - lf[n - A - B + nij])
        term = nij / n * np.log(n * nij / (A * B))
        total += float((term * np.exp(log_p)).sum())
    return total


def adjusted_mutual_information(a, b) -> float:
    """AMI with the max-entropy normalisation, natural logs, exact E[MI].

    Returns 0 when either labeling has a single cluster, and 0 for any other
    zero denominator unless the two partitions coincide.
    """
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise ValueError(f"label vectors differ in length ({a.size} vs {b.size})")
    if a.size == 0:
        raise ValueError("empty label vectors")
    table = _contingency(a, b)
    if table.shape[0] == 1 or table.shape[1] == 1:
        return 0.0
    n = a.size
    rows, cols = table.sum(axis=1), table.sum(axis=0)
    same = table.shape[0] == table.shape[1] and np.count_nonzero(table) == table.shape[0]
    h = max(_entropy(rows, n), _entropy(cols, n))
    mi = mutual_information(a, b)
    emi = expected_mutual_information(rows, cols)
    denom = h - emi
    if abs(denom) < 1e-15:
        return 1.0 if same else 0.0
    if same:
        return 1.0
    return float((mi - emi) / denom)


def inverse_compression_ratio(selected: CodelengthBreakdown, baseline: CodelengthBreakdown) -> float:
    """eta = selected / baseline total bits; smaller means more compression."""
    if baseline.total_bits <= 0:
        raise ValueError("baseline codelength is zero; compression ratio undefined")
    return selected.total_bits / baseline.total_bits
