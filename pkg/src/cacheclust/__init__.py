"""Fairness-aware last-level-cache clustering toolkit.

Builds and evaluates way-partitioned LLC clustering solutions over offline
per-application cache profiles: greedy lookahead allocation, the LFOC and
LFOC+ clustering policies, and exhaustive brute-force oracles.
"""

from cacheclust.profiles import (
    AppClass,
    AppProfile,
    ClassifierConfig,
    ProfileError,
    classify,
    critical_size,
    generate_synthetic,
    llcmpkc_at,
    load_profile,
    slowdown_at,
    write_profile,
)
from cacheclust.model import (
    Cluster,
    ClusteringSolution,
    ConvergenceError,
    EvalResult,
    SharedCurveCache,
    eval_solution,
    get_scurves,
    shared_occupancy,
    shared_slowdowns,
    stp,
    unfairness,
)
from cacheclust.lookahead import lookahead, ucp_slowdown
from cacheclust.policies import (
    ClassifiedWorkload,
    InfeasibleError,
    PolicyConfig,
    classify_workload,
    initial_partitioning,
    lfoc_partition,
    lfoc_plus_partition,
    pair_clustering,
    pair_clustering_solutions,
    ucp_distributor,
)
from cacheclust.optimal import (
    SearchResult,
    SearchSpec,
    count_clusterings,
    enumerate_app_partitions,
    enumerate_way_splits,
    search_optimal,
)

__version__ = "0.1.0"
