"""Slow, from-scratch reference implementations used only by the tests.

Nothing here imports the package. Combinatorial quantities are computed as
exact Python integers and only converted to bits at the end.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter


def log2_int(x: int) -> float:
    """log2 of an exact positive integer, accurate for huge values."""
    if x <= 0:
        raise ValueError(x)
    shift = max(0, x.bit_length() - 64)
    return math.log2(x >> shift) + shift


def majority(column: list[int]) -> int:
    counts = Counter(column)
    best = max(counts.values())
    return min(s for s, c in counts.items() if c == best)


def cluster_bits(rows: list[list[int]], S: int) -> tuple[float, float, list[int]]:
    """(table bits, member bits, driver) of one cluster of 1-based symbol rows."""
    n_d = len(rows)
    T = len(rows[0])
    driver = [majority([r[t] for r in rows]) for t in range(T)]
    marg = Counter(driver)
    table = 0
    member_num = 1
    for r in range(1, S + 1):
        c_r = marg.get(r, 0)
        table_count = math.comb(n_d * c_r + S - 1, S - 1)
        row = Counter(rows[i][t] for i in range(n_d) for t in range(T) if driver[t] == r)
        multinom = math.factorial(n_d * c_r)
        for v in row.values():
            multinom //= math.factorial(v)
        table = table + log2_int(table_count)
        member_num *= multinom
    return table, log2_int(member_num), driver


def description_length(z: list[list[int]], labels: list[int], S: int, tree_bits: float = 0.0
                       ) -> dict:
    """Total bits of a labelled partition, recomputed from the raw symbols."""
    N, T = len(z), len(z[0])
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    D = len(groups)
    table = member = 0.0
    drivers = []
    for lab in sorted(groups, key=lambda k: groups[k][0]):
        tb, mb, drv = cluster_bits([z[i] for i in groups[lab]], S)
        table += tb
        member += mb
        drivers.append(drv)
    choice = log2_int(math.comb(N - 1, D - 1))
    driver_bits = D * T * math.log2(S)
    return {"total": tree_bits + choice + driver_bits + table + member,
            "table": table, "member": member, "choice": choice,
            "driver": driver_bits, "drivers": drivers}


def spanning_tree_count(n: int, edges: list[tuple[int, int]]) -> int:
    """Number of spanning trees by deletion-contraction on a multigraph."""
    edges = [tuple(sorted(e)) for e in edges if e[0] != e[1]]

    def connected(n_, es):
        parent = list(range(n_))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for a, b in es:
            parent[find(a)] = find(b)
        return len({find(v) for v in range(n_)}) == 1

    memo: dict = {}

    def rec(n_, es):
        if n_ == 1:
            return 1
        if n_ == 2:
            return len(es)
        key = (n_, tuple(sorted(es)))
        if key in memo:
            return memo[key]
        if not connected(n_, es):
            memo[key] = 0
            return 0
        if len(es) == n_ - 1:
            memo[key] = 1
            return 1
        a, b = es[0]
        rest = es[1:]
        # contract b into a, relabel the last vertex into b's slot
        last = n_ - 1
        contracted = []
        for u, v in rest:
            u = a if u == b else u
            v = a if v == b else v
            if u == v:
                continue
            u = b if u == last and b != last else u
            v = b if v == last and b != last else v
            contracted.append((min(u, v), max(u, v)))
        memo[key] = rec(n_, rest) + rec(n_ - 1, contracted)
        return memo[key]

    return rec(n, edges)


def prim_mst_weight(n: int, weighted_edges: list[tuple[int, int, float]]) -> float:
    """Total weight of a minimum spanning tree, O(n^2) Prim."""
    adj = [[math.inf] * n for _ in range(n)]
    for i, j, w in weighted_edges:
        adj[i][j] = adj[j][i] = min(adj[i][j], w)
    in_tree = [False] * n
    best = [math.inf] * n
    best[0] = 0.0
    total = 0.0
    for _ in range(n):
        u = min((v for v in range(n) if not in_tree[v]), key=lambda v: best[v])
        in_tree[u] = True
        total += best[u]
        for v in range(n):
            if not in_tree[v] and adj[u][v] < best[v]:
                best[v] = adj[u][v]
    return total


def _mi(a, b) -> float:
    n = len(a)
    joint = Counter(zip(a, b))
    ca, cb = Counter(a), Counter(b)
    return sum(c / n * math.log(n * c / (ca[x] * cb[y])) for (x, y), c in joint.items())


def _entropy(a) -> float:
    n = len(a)
    return -sum(c / n * math.log(c / n) for c in Counter(a).values())


def ami_by_permutation(a, b) -> float:
    """AMI (max normalisation) with E[MI] averaged over all n! relabellings of b."""
    perms = list(itertools.permutations(b))
    emi = math.fsum(_mi(a, p) for p in perms) / len(perms)
    h = max(_entropy(a), _entropy(b))
    return (_mi(a, b) - emi) / (h - emi)


def connected_set_partitions(n: int, edges: list[tuple[int, int]]) -> list[tuple[int, ...]]:
    """All set partitions of range(n) whose blocks induce connected subgraphs.

    Returned as canonical label tuples (1..D by smallest member).
    """
    nbr = {v: set() for v in range(n)}
    for i, j in edges:
        nbr[i].add(j)
        nbr[j].add(i)

    def block_connected(block):
        block = set(block)
        start = next(iter(block))
        seen, stack = {start}, [start]
        while stack:
            u = stack.pop()
            for v in nbr[u] & block:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen == block

    out = []

    def rec(i, blocks):
        if i == n:
            if all(block_connected(b) for b in blocks):
                lab = [0] * n
                for k, b in enumerate(blocks, 1):
                    for v in b:
                        lab[v] = k
                out.append(tuple(lab))
            return
        for b in blocks:
            b.append(i)
            rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        rec(i + 1, blocks)
        blocks.pop()

    rec(0, [])
    return out
