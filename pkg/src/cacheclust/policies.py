"""Fairness-oriented cache-clustering policies.

`lfoc_partition` isolates streaming apps in small partitions, gives each
cache-sensitive app its own partition sized by greedy lookahead, and
scatters light-sharing apps over the result. `pair_clustering` refines
the sensitive-app distribution by way transfers (T1), merging two 1-way
partitions to free a way for the most-slowed app (T2), and merging two
partitions outright (T3); `lfoc_plus_partition` plugs it into the LFOC
scaffold and additionally coalesces streaming partitions.
"""

import math
from dataclasses import dataclass

from cacheclust.lookahead import ucp_slowdown
from cacheclust.model import (
    Cluster,
    ClusteringSolution,
    SharedCurveCache,
    eval_solution,
)
from cacheclust.profiles import AppClass, DEFAULT_CLASSIFIER, classify

INF = float("inf")


class InfeasibleError(ValueError):
    """The workload cannot be laid out within the available ways."""


@dataclass(frozen=True)
class PolicyConfig:
    nr_ways: int
    max_str_parts: int = 5
    gaps_per_str: int = 3
    ways_str: int = 1
    merge_streaming: bool = False

    def __post_init__(self):
        if self.nr_ways < 2:
            raise ValueError("nr_ways must be >= 2")
        if self.ways_str < 1 or self.max_str_parts < 1 or self.gaps_per_str < 0:
            raise ValueError("bad streaming-partition parameters")


@dataclass(frozen=True)
class ClassifiedWorkload:
    """Workload split into streaming / cache-sensitive / light-sharing sets."""

    profiles: tuple
    st: tuple
    cs: tuple
    ls: tuple

    def __post_init__(self):
        object.__setattr__(self, "profiles", tuple(self.profiles))
        st, cs, ls = tuple(self.st), tuple(self.cs), tuple(self.ls)
        combined = list(st) + list(cs) + list(ls)
        if sorted(combined) != list(range(len(self.profiles))):
            raise ValueError("ST/CS/LS must partition the application indices")
        object.__setattr__(self, "st", st)
        object.__setattr__(self, "cs", cs)
        object.__setattr__(self, "ls", ls)


_CLASS_BUCKET = {
    AppClass.STREAMING: "st",
    AppClass.SENSITIVE: "cs",
    AppClass.LIGHT_SHARING: "ls",
}


def classify_workload(profiles, cfg=DEFAULT_CLASSIFIER, overrides=None):
    """Build a ClassifiedWorkload, honoring per-app class overrides."""
    buckets = {"st": [], "cs": [], "ls": []}
    for i, p in enumerate(profiles):
        cls = None
        if overrides is not None:
            cls = overrides.get(i)
        if cls is None:
            cls = classify(p, cfg)
        buckets[_CLASS_BUCKET[cls]].append(i)
    return ClassifiedWorkload(profiles=tuple(profiles),
                              st=tuple(buckets["st"]),
                              cs=tuple(buckets["cs"]),
                              ls=tuple(buckets["ls"]))


def _table_slowdown(profile, w):
    """Slowdown table lookup, flat beyond the measured range."""
    return profile.slowdown[min(w, profile.nr_ways) - 1]


def initial_partitioning(profiles, total_ways):
    """Strict per-app way assignment: lookahead plus fairness transfers.

    Starts from ucp_slowdown and repeatedly moves one way (a T1
    transfer) from the cheapest donor to the app with the highest
    slowdown, as long as a donor exists that would not itself become
    more slowed than the recipient. Each app receives at most one extra
    way this way.
    """
    n = len(profiles)
    if n == 0:
        return []
    W = ucp_slowdown(profiles, total_ways)
    extra_way = [False] * n
    for _ in range(n):
        i = max(range(n),
                key=lambda k: (_table_slowdown(profiles[k], W[k]), -k))
        if extra_way[i]:
            return W
        si_next = _table_slowdown(profiles[i], W[i] + 1)
        si_cur = _table_slowdown(profiles[i], W[i])
        if si_next >= si_cur:
            # An extra way would not reduce the max slowdown; since the
            # loop only ever grants to the most slowed app, stop here.
            break
        best_cost = INF
        best_j = -1
        for j in range(n):
            if extra_way[j] or j == i or W[j] == 1:
                continue
            sj_donated = _table_slowdown(profiles[j], W[j] - 1)
            if sj_donated > si_next:
                continue
            cost = (si_next - si_cur) - (_table_slowdown(profiles[j], W[j]) - sj_donated)
            if cost < best_cost:
                best_cost = cost
                best_j = j
        if best_j < 0:
            break
        W[i] += 1
        W[best_j] -= 1
        extra_way[i] = True
    return W


def bmerge(i, merged, cache, cost1w, W, profiles):
    """Best merge transformation benefiting app i.

    Considers stealing the way freed by merging the cheapest pair of
    1-way singleton clusters (T2, candidate pair not involving i), and
    merging app i's cluster with any unmerged peer j (T3). Returns
    (cost, a1, a2) for the cheapest option with cost <= 0, or
    (inf, -1, -1) when none qualifies. T2 is signalled by a pair that
    does not contain i.
    """
    best = (INF, -1, -1)
    for j in range(len(profiles)):
        if merged[j]:
            continue
        if j == i:
            candidates = [(c, k, l) for (c, k, l) in cost1w
                          if not merged[k] and not merged[l] and k != i and l != i]
            if not candidates:
                continue
            cost_steal, k, l = min(candidates)
            cost = _table_slowdown(profiles[i], W[i] + 1) - cost_steal / 2.0
            pair = (k, l)
        else:
            wc = W[i] + W[j]
            si_shared, sj_shared = cache.pair_at(profiles, i, j, wc)
            cost = ((si_shared + sj_shared)
                    - (_table_slowdown(profiles[i], W[i])
                       + _table_slowdown(profiles[j], W[j])))
            pair = (i, j) if i < j else (j, i)
        if cost <= 0 and cost <= best[0]:
            best = (cost, pair[0], pair[1])
    return best


def _solution_from_blocks(blocks, W, nr_ways):
    clusters = []
    for block in blocks:
        ways = sum(W[m] for m in block)
        clusters.append(Cluster(members=tuple(sorted(block)), ways=ways))
    return ClusteringSolution(clusters=tuple(clusters), nr_ways=nr_ways)


def pair_clustering_solutions(profiles, total_ways, cache=None):
    """All solutions the pair-clustering heuristic evaluates, in order.

    Returns a list of (ClusteringSolution, unfairness, stp); the first
    entry is the initial strict partitioning.
    """
    n = len(profiles)
    if n == 0:
        raise ValueError("need at least one application")
    if total_ways < n:
        raise InfeasibleError(
            "%d ways cannot host %d sensitive applications" % (total_ways, n))
    if cache is None:
        cache = SharedCurveCache()
    memo = {}

    W = initial_partitioning(profiles, total_ways)
    blocks = [[i] for i in range(n)]
    solutions = []

    def record():
        sol = _solution_from_blocks(blocks, W, total_ways)
        res = eval_solution(sol, profiles, memo=memo)
        solutions.append((sol, res.unfairness, res.stp))

    record()
    if n == 1:
        return solutions

    cost1w = []
    for i in range(n):
        for j in range(i + 1, n):
            if W[i] == 1 and W[j] == 1:
                si_shared, sj_shared = cache.pair_at(profiles, i, j, 1)
                cost = ((si_shared + sj_shared)
                        - (_table_slowdown(profiles[i], 1)
                           + _table_slowdown(profiles[j], 1)))
                cost1w.append((cost, i, j))

    merged = [False] * n
    order = sorted(range(n),
                   key=lambda k: (-_table_slowdown(profiles[k], W[k]), k))
    for i in order:
        if merged[i]:
            continue
        cost, a1, a2 = bmerge(i, merged, cache, cost1w, W, profiles)
        if cost > 0:
            continue
        if a1 != i and a2 != i:
            # T2: merge the 1-way pair, give the freed way to app i.
            W[i] += 1
            cost1w = [(c, k, l) for (c, k, l) in cost1w if (k, l) != (a1, a2)]
        else:
            # T3: coalesce the two clusters.
            W[a1] += W[a2]
        merged[a1] = True
        merged[a2] = True
        W[a2] = 0
        block_a2 = next(b for b in blocks if a2 in b)
        blocks.remove(block_a2)
        next(b for b in blocks if a1 in b).extend(block_a2)
        record()
    return solutions


def pair_clustering(profiles, total_ways, cache=None):
    """Cluster sensitive apps into groups of at most two for fairness.

    Returns the evaluated solution with the smallest (unfairness, -stp)
    pair; never worse than the initial strict partitioning.
    """
    solutions = pair_clustering_solutions(profiles, total_ways, cache=cache)
    return min(solutions, key=lambda item: (item[1], -item[2]))[0]


def ucp_distributor(profiles, total_ways):
    """Strict distribution: one singleton cluster per app, lookahead-sized."""
    W = ucp_slowdown(profiles, total_ways)
    return [([i], w) for i, w in enumerate(W)]


def pair_distributor(profiles, total_ways):
    """Pair-clustering distribution over local app positions."""
    sol = pair_clustering(profiles, total_ways)
    return [(list(c.members), c.ways) for c in sol.clusters]


def lfoc_partition(workload, cfg, distributor=ucp_distributor):
    """LFOC layout: streaming isolation, lookahead for sensitive apps.

    `distributor` maps (sensitive profiles, way budget) to a list of
    (member positions, ways) clusters; swapping it for the pair
    distributor yields LFOC+'s sensitive-app layout.
    """
    st, cs, ls = list(workload.st), list(workload.cs), list(workload.ls)
    n = len(workload.profiles)
    if not cs:
        single = Cluster(members=tuple(range(n)), ways=cfg.nr_ways)
        return ClusteringSolution(clusters=(single,), nr_ways=cfg.nr_ways)

    clusters = []          # list of [member list, ways]
    streaming_ids = []
    r = 0
    used = 0
    if st:
        parts4str = min(2, math.ceil(len(st) / cfg.max_str_parts))
        r = math.ceil(len(st) / parts4str)
        used = parts4str * cfg.ways_str
        if cfg.merge_streaming and parts4str == 2:
            streaming_ids.append(len(clusters))
            clusters.append([list(st), 2 * cfg.ways_str])
        else:
            for k in range(parts4str):
                streaming_ids.append(len(clusters))
                clusters.append([st[k * r:(k + 1) * r], cfg.ways_str])

    budget = cfg.nr_ways - used
    if budget < len(cs):
        raise InfeasibleError(
            "%d ways left for %d cache-sensitive applications"
            % (budget, len(cs)))
    for local_members, ways in distributor([workload.profiles[i] for i in cs], budget):
        clusters.append([[cs[k] for k in local_members], ways])

    for cid in streaming_ids:
        members, _ = clusters[cid]
        gaps_avail = r - len(members) * cfg.gaps_per_str
        if ls and gaps_avail > 0:
            take = min(gaps_avail, len(ls))
            members.extend(ls[:take])
            del ls[:take]
    non_streaming = [cid for cid in range(len(clusters)) if cid not in streaming_ids]
    for k, app in enumerate(ls):
        clusters[non_streaming[k % len(non_streaming)]][0].append(app)

    return ClusteringSolution(
        clusters=tuple(Cluster(members=tuple(sorted(m)), ways=w)
                       for m, w in clusters),
        nr_ways=cfg.nr_ways)


def lfoc_plus_partition(workload, cfg=None, nr_ways=None):
    """LFOC+ layout: pair clustering plus streaming-partition merging."""
    if cfg is None:
        cfg = PolicyConfig(nr_ways=nr_ways, merge_streaming=True)
    elif not cfg.merge_streaming:
        cfg = PolicyConfig(nr_ways=cfg.nr_ways, max_str_parts=cfg.max_str_parts,
                           gaps_per_str=cfg.gaps_per_str, ways_str=cfg.ways_str,
                           merge_streaming=True)
    return lfoc_partition(workload, cfg, distributor=pair_distributor)
