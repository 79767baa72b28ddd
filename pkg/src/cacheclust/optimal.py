"""Exhaustive clustering oracles and search-space counting.

Enumerates every way of grouping applications into clusters (optionally
bounded in size) together with every way of splitting the way budget
among the clusters, evaluates them all, and keeps the lexicographic
(unfairness, -stp) minimum. Intended as a correctness oracle for the
heuristic policies, so clarity and determinism win over pruning.
"""

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from cacheclust.model import Cluster, ClusteringSolution, eval_solution

INF = float("inf")


@dataclass(frozen=True)
class SearchSpec:
    """Search-space description; max_cluster_size None means unbounded."""

    nr_ways: int
    max_cluster_size: int = None

    def __post_init__(self):
        if self.max_cluster_size is not None and self.max_cluster_size < 1:
            raise ValueError("max_cluster_size must be >= 1")


@dataclass(frozen=True)
class SearchResult:
    best: ClusteringSolution
    eval: object
    explored: int


def enumerate_app_partitions(n, max_cluster_size=None):
    """Yield every partition of {0..n-1} into blocks of bounded size.

    Partitions appear exactly once, in restricted-growth-string order
    (element t joins existing blocks in order before opening a new one).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    blocks = []

    def rec(t):
        if t == n:
            yield [tuple(b) for b in blocks]
            return
        for b in blocks:
            if max_cluster_size is None or len(b) < max_cluster_size:
                b.append(t)
                yield from rec(t + 1)
                b.pop()
        blocks.append([t])
        yield from rec(t + 1)
        blocks.pop()

    yield from rec(0)


def enumerate_way_splits(k, budget):
    """Yield every k-tuple of positive ints summing to budget."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > budget:
        raise ValueError("cannot split %d ways into %d positive parts" % (budget, k))
    for dividers in itertools.combinations(range(1, budget), k - 1):
        bounds = (0,) + dividers + (budget,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(k))


def count_clusterings(n):
    """Number of ways to cluster n applications (Bell number), exact."""
    if n < 1:
        raise ValueError("n must be >= 1")
    row = [1]
    for _ in range(n - 1):
        new = [row[-1]]
        for v in row:
            new.append(new[-1] + v)
        row = new
    return row[-1]


def _search_chunk(partitions, offsets, profiles, nr_ways, memo):
    """Scan a slice of the partition list; return (best_key, best, explored)."""
    best_key = (INF, INF, INF, INF)
    best = None
    explored = 0
    for p_idx, partition in zip(offsets, partitions):
        k = len(partition)
        if k > nr_ways:
            continue
        for s_idx, split in enumerate(enumerate_way_splits(k, nr_ways)):
            solution = ClusteringSolution(
                clusters=tuple(Cluster(members=m, ways=w)
                               for m, w in zip(partition, split)),
                nr_ways=nr_ways)
            res = eval_solution(solution, profiles, memo=memo)
            explored += 1
            key = (res.unfairness, -res.stp, p_idx, s_idx)
            if key < best_key:
                best_key = key
                best = (solution, res)
    return best_key, best, explored


def search_optimal(profiles, spec, workers=1):
    """Exhaustive (partition, way-split) search for minimum unfairness.

    Lexicographic objective (unfairness, -stp); ties resolved by
    canonical enumeration order, so the result is independent of the
    worker count. `explored` counts evaluated candidates.
    """
    n = len(profiles)
    if n < 1:
        raise ValueError("need at least one profile")
    if spec.nr_ways < 1:
        raise ValueError("nr_ways must be >= 1")
    partitions = list(enumerate_app_partitions(n, spec.max_cluster_size))
    if all(len(p) > spec.nr_ways for p in partitions):
        raise ValueError("no feasible partition fits in %d ways" % spec.nr_ways)
    memo = {}
    workers = max(1, workers)
    if workers == 1 or len(partitions) < 2 * workers:
        chunks = [(partitions, range(len(partitions)))]
    else:
        step = (len(partitions) + workers - 1) // workers
        chunks = [(partitions[i:i + step], range(i, min(i + step, len(partitions))))
                  for i in range(0, len(partitions), step)]
    if len(chunks) == 1:
        results = [_search_chunk(chunks[0][0], chunks[0][1], profiles,
                                 spec.nr_ways, memo)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_search_chunk, part, offs, profiles,
                                   spec.nr_ways, memo)
                       for part, offs in chunks]
            results = [f.result() for f in futures]
    best_key = (INF, INF, INF, INF)
    best = None
    explored = 0
    for key, candidate, count in results:
        explored += count
        if candidate is not None and key < best_key:
            best_key = key
            best = candidate
    solution, res = best
    return SearchResult(best=solution, eval=res, explored=explored)
