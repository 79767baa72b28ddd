"""Clustering solutions and their evaluation.

A clustering solution maps disjoint groups of applications to LLC
partitions of an integer number of ways. The space each member of a
shared partition effectively occupies is estimated with a miss-rate
proportional fixed point over the LLCMPKC curves; per-application
slowdowns then follow from the profile curves, and the workload-level
unfairness (max/min slowdown) and STP (sum of reciprocal slowdowns)
are derived from them.
"""

import threading
from dataclasses import dataclass

from cacheclust.profiles import llcmpkc_at, slowdown_at

# Fixed-point iteration parameters for the shared-occupancy estimator.
OCCUPANCY_DAMPING = 0.5
OCCUPANCY_TOL = 1e-6
OCCUPANCY_MAX_ITERS = 100
# Apps with no measured misses still need nonzero occupancy; far below
# the streaming threshold so it can never affect classification.
MISS_RATE_FLOOR = 1e-4


class ConvergenceError(RuntimeError):
    """Fixed-point iteration failed to converge; carries the last iterate."""

    def __init__(self, message, last_iterate):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass(frozen=True)
class Cluster:
    """A group of application indices sharing one partition of `ways` ways."""

    members: tuple
    ways: int

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("cluster must have at least one member")
        if len(set(members)) != len(members):
            raise ValueError("duplicate member in cluster")
        if self.ways < 1:
            raise ValueError("cluster ways must be >= 1")
        object.__setattr__(self, "members", members)


@dataclass(frozen=True)
class ClusteringSolution:
    clusters: tuple
    nr_ways: int

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(self.clusters))

    def validate(self, n_apps):
        """Check disjoint cover of n_apps, the way budget and cluster count."""
        seen = set()
        for c in self.clusters:
            overlap = seen.intersection(c.members)
            if overlap:
                raise ValueError("apps %r appear in multiple clusters" % sorted(overlap))
            seen.update(c.members)
        if seen != set(range(n_apps)):
            raise ValueError(
                "clusters cover %r, expected 0..%d" % (sorted(seen), n_apps - 1))
        total = sum(c.ways for c in self.clusters)
        if total > self.nr_ways:
            raise ValueError(
                "cluster ways sum to %d > nr_ways %d" % (total, self.nr_ways))
        if len(self.clusters) > self.nr_ways:
            raise ValueError("more clusters than ways")

    def assignment(self):
        """Map app index -> (cluster_id, ways)."""
        out = {}
        for cid, c in enumerate(self.clusters):
            for m in c.members:
                out[m] = (cid, c.ways)
        return out


@dataclass(frozen=True)
class EvalResult:
    slowdowns: tuple
    unfairness: float
    stp: float


def _clamped_miss_rate(profile, e):
    eff = min(max(e, 1.0), float(profile.nr_ways))
    return max(llcmpkc_at(profile, eff), MISS_RATE_FLOOR)


def shared_occupancy(profiles, ways):
    """Effective ways each app occupies when sharing a `ways`-way partition.

    Damped fixed point of e_i = ways * m_i(e_i) / sum_j m_j(e_j) with the
    m_i taken from the LLCMPKC curves. The returned occupancies are
    positive and sum to `ways`.
    """
    if ways < 1:
        raise ValueError("ways must be >= 1")
    n = len(profiles)
    if n == 0:
        raise ValueError("empty profile list")
    if n == 1:
        return [float(ways)]
    e = [ways / n] * n
    alpha = OCCUPANCY_DAMPING
    prev_step = None
    for _ in range(OCCUPANCY_MAX_ITERS):
        m = [_clamped_miss_rate(p, ei) for p, ei in zip(profiles, e)]
        total = sum(m)
        new = [(1.0 - alpha) * ei + alpha * ways * mi / total
               for ei, mi in zip(e, m)]
        step = [a - b for a, b in zip(new, e)]
        # Steep miss curves make the map oscillate; damp harder when
        # successive steps reverse direction.
        if prev_step is not None and sum(a * b for a, b in zip(step, prev_step)) < 0:
            alpha *= 0.5
        prev_step = step
        delta = max(abs(s) for s in step)
        e = new
        if delta < OCCUPANCY_TOL:
            return e
    raise ConvergenceError(
        "occupancy fixed point did not converge in %d iterations"
        % OCCUPANCY_MAX_ITERS, e)


def shared_slowdowns(profiles, ways):
    """Per-app slowdown estimates for apps sharing a `ways`-way partition."""
    occ = shared_occupancy(profiles, ways)
    return [slowdown_at(p, min(max(e, 1.0), float(p.nr_ways)))
            for p, e in zip(profiles, occ)]


class SharedCurveCache:
    """Memoized pairwise shared-slowdown curves.

    Entries are computed lazily per (pair, way-count); repeated requests
    return the stored values without recomputation. Safe to share across
    threads: a racing first computation of the same entry is benign
    because the computed value is deterministic.
    """

    def __init__(self):
        self._entries = {}
        self._lock = threading.Lock()
        self.computations = 0

    def pair_at(self, profiles, i, j, ways):
        """Slowdowns of apps i and j sharing a `ways`-way partition."""
        if i == j:
            raise ValueError("need two distinct applications")
        a, b = (i, j) if i < j else (j, i)
        key = (a, b, ways)
        entry = self._entries.get(key)
        if entry is None:
            sa, sb = shared_slowdowns([profiles[a], profiles[b]], ways)
            entry = (sa, sb)
            with self._lock:
                self._entries.setdefault(key, entry)
                self.computations += 1
        sa, sb = entry
        return (sa, sb) if i == a else (sb, sa)


def get_scurves(profiles, i, j, ways_max, cache):
    """Shared slowdown curves of apps i and j for 1..ways_max total ways.

    Returns two lists S_i, S_j where S_i[w-1] is app i's estimated
    slowdown when i and j share a w-way partition. Results are memoized
    in `cache`.
    """
    si = []
    sj = []
    for w in range(1, ways_max + 1):
        a, b = cache.pair_at(profiles, i, j, w)
        si.append(a)
        sj.append(b)
    return si, sj


def unfairness(slowdowns):
    """Max slowdown over min slowdown (1.0 is perfectly fair)."""
    if not slowdowns:
        raise ValueError("empty slowdown list")
    if any(s <= 0 for s in slowdowns):
        raise ValueError("slowdowns must be positive")
    return max(slowdowns) / min(slowdowns)


def stp(slowdowns):
    """System throughput: sum of reciprocal slowdowns."""
    if not slowdowns:
        raise ValueError("empty slowdown list")
    if any(s <= 0 for s in slowdowns):
        raise ValueError("slowdowns must be positive")
    return sum(1.0 / s for s in slowdowns)


def eval_solution(solution, profiles, memo=None, degradation_hook=None):
    """Evaluate a clustering solution: per-app slowdowns, unfairness, STP.

    `memo` optionally caches cluster evaluations keyed by
    (member tuple, ways) across calls. `degradation_hook(app_index)` is
    an extension point returning an additive slowdown term per app
    (e.g. for a bandwidth-contention model); default none.
    """
    n = sum(len(c.members) for c in solution.clusters)
    slowdowns = [0.0] * n
    for cluster in solution.clusters:
        key = (cluster.members, cluster.ways)
        vals = memo.get(key) if memo is not None else None
        if vals is None:
            vals = shared_slowdowns([profiles[m] for m in cluster.members],
                                    cluster.ways)
            if memo is not None:
                memo[key] = vals
        for m, s in zip(cluster.members, vals):
            slowdowns[m] = s
    if degradation_hook is not None:
        slowdowns = [s + degradation_hook(i) for i, s in enumerate(slowdowns)]
    return EvalResult(
        slowdowns=tuple(slowdowns),
        unfairness=unfairness(slowdowns),
        stp=stp(slowdowns),
    )
