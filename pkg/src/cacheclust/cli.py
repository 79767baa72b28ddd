"""Experiment harness CLI.

Verbs:
  run       evaluate clustering policies over a workload manifest
  bench     time the LFOC+ solver on synthetic workloads
  classify  classify a single profile CSV
  count     exact clustering-search-space sizes (Bell numbers)

Exit codes: 0 success, 1 usage/input error, 2 infeasible layout or
oversized oracle request.
"""

import argparse
import json
import os
import statistics
import sys
import time

from cacheclust.lookahead import ucp_slowdown
from cacheclust.model import Cluster, ClusteringSolution, eval_solution
from cacheclust.optimal import SearchSpec, count_clusterings, search_optimal
from cacheclust.policies import (
    ClassifiedWorkload,
    InfeasibleError,
    PolicyConfig,
    classify_workload,
    lfoc_partition,
    lfoc_plus_partition,
    pair_distributor,
    ucp_distributor,
)
from cacheclust.profiles import (
    AppClass,
    ClassifierConfig,
    ProfileError,
    classify,
    critical_size,
    generate_synthetic,
    load_profile,
)

POLICIES = ("lfoc", "lfoc-plus", "ucp-slowdown-strict", "best-static", "best-2c")

CSV_COLUMNS = ("workload", "policy", "app", "class", "cluster_id",
               "cluster_ways", "est_slowdown", "unfairness", "stp", "solve_us")


class UsageError(ValueError):
    pass


class OracleLimitError(ValueError):
    pass


def _load_manifest(path):
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError("cannot read manifest %s: %s" % (path, exc)) from None
    if "entries" not in data or not data["entries"]:
        raise UsageError("manifest needs at least one entry")
    if int(data.get("nr_ways", 0)) < 2:
        raise UsageError("manifest nr_ways must be >= 2")
    return data


_CLASS_NAMES = {c.value: c for c in AppClass}


def _build_workload(manifest, manifest_dir):
    nr_ways = int(manifest["nr_ways"])
    profiles = []
    overrides = {}
    for idx, entry in enumerate(manifest["entries"]):
        path = entry["profile"]
        if not os.path.isabs(path):
            path = os.path.join(manifest_dir, path)
        profiles.append(load_profile(path, nr_ways))
        if "class" in entry:
            cls = _CLASS_NAMES.get(entry["class"])
            if cls is None:
                raise UsageError(
                    "entry %d: unknown class %r (expected one of %s)"
                    % (idx, entry["class"], sorted(_CLASS_NAMES)))
            overrides[idx] = cls
    classifier = ClassifierConfig(**manifest.get("classifier", {}))
    workload = classify_workload(profiles, classifier, overrides)
    policy_cfg = PolicyConfig(nr_ways=nr_ways, **manifest.get("policy", {}))
    return workload, policy_cfg


def _solve(policy, workload, policy_cfg, workers, oracle_max_apps):
    profiles = workload.profiles
    nr_ways = policy_cfg.nr_ways
    if policy == "lfoc":
        return lfoc_partition(workload, policy_cfg, distributor=ucp_distributor)
    if policy == "lfoc-plus":
        return lfoc_plus_partition(workload, policy_cfg)
    if policy == "ucp-slowdown-strict":
        if nr_ways < len(profiles):
            raise InfeasibleError(
                "%d apps need at least %d ways for strict partitioning"
                % (len(profiles), len(profiles)))
        W = ucp_slowdown(list(profiles), nr_ways)
        return ClusteringSolution(
            clusters=tuple(Cluster(members=(i,), ways=w) for i, w in enumerate(W)),
            nr_ways=nr_ways)
    if policy in ("best-static", "best-2c"):
        if len(profiles) > oracle_max_apps:
            raise OracleLimitError(
                "%d apps exceed the oracle limit of %d (--oracle-max-apps)"
                % (len(profiles), oracle_max_apps))
        spec = SearchSpec(nr_ways=nr_ways,
                          max_cluster_size=2 if policy == "best-2c" else None)
        return search_optimal(profiles, spec, workers=workers).best
    raise UsageError("unknown policy %r (expected one of %s)"
                     % (policy, ", ".join(POLICIES)))


def _app_classes(workload):
    classes = {}
    for i in workload.st:
        classes[i] = AppClass.STREAMING
    for i in workload.cs:
        classes[i] = AppClass.SENSITIVE
    for i in workload.ls:
        classes[i] = AppClass.LIGHT_SHARING
    return classes


def run_report(name, workload, policy_cfg, policy_names, workers=1,
               oracle_max_apps=8, timing=True):
    """Evaluate each policy; returns (csv rows, per-policy solution dicts)."""
    classes = _app_classes(workload)
    rows = []
    solutions = []
    for policy in policy_names:
        t0 = time.perf_counter()
        solution = _solve(policy, workload, policy_cfg, workers, oracle_max_apps)
        solve_us = (time.perf_counter() - t0) * 1e6
        solution.validate(len(workload.profiles))
        res = eval_solution(solution, workload.profiles)
        assignment = solution.assignment()
        for app in range(len(workload.profiles)):
            cid, ways = assignment[app]
            rows.append([
                name, policy, workload.profiles[app].name,
                classes[app].value, cid, ways,
                repr(res.slowdowns[app]), repr(res.unfairness), repr(res.stp),
                "%.3f" % solve_us if timing else "0",
            ])
        solutions.append({
            "policy": policy,
            "unfairness": res.unfairness,
            "stp": res.stp,
            "clusters": [{"members": list(c.members), "ways": c.ways}
                         for c in solution.clusters],
        })
    return rows, solutions


def _write_csv(rows, out):
    import csv
    if out in (None, "-"):
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(rows)
    else:
        with open(out, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            writer.writerows(rows)


def _cmd_run(args):
    manifest = _load_manifest(args.manifest)
    workload, policy_cfg = _build_workload(manifest,
                                           os.path.dirname(os.path.abspath(args.manifest)))
    if args.ways is not None:
        policy_cfg = PolicyConfig(nr_ways=args.ways,
                                  max_str_parts=policy_cfg.max_str_parts,
                                  gaps_per_str=policy_cfg.gaps_per_str,
                                  ways_str=policy_cfg.ways_str)
    policy_names = [p.strip() for p in args.policies.split(",") if p.strip()]
    if not policy_names:
        raise UsageError("no policies requested")
    for p in policy_names:
        if p not in POLICIES:
            raise UsageError("unknown policy %r (expected one of %s)"
                             % (p, ", ".join(POLICIES)))
    rows, solutions = run_report(
        manifest.get("name", os.path.basename(args.manifest)),
        workload, policy_cfg, policy_names,
        workers=args.workers, oracle_max_apps=args.oracle_max_apps,
        timing=not args.no_timing)
    _write_csv(rows, args.out)
    if args.solutions_json:
        with open(args.solutions_json, "w", encoding="utf-8") as f:
            json.dump(solutions, f, indent=2, sort_keys=True)
            f.write("\n")
    return 0


def bench_workload(n_apps, seed, nr_ways):
    """Deterministic synthetic classified workload for benchmarking."""
    n_sens = min(4, max(1, n_apps // 4))
    n_str = max(1, n_apps // 4)
    n_ls = n_apps - n_sens - n_str
    profiles = []
    st, cs, ls = [], [], []
    for k in range(n_str):
        st.append(len(profiles))
        profiles.append(generate_synthetic(AppClass.STREAMING, seed * 1000 + k, nr_ways))
    for k in range(n_sens):
        cs.append(len(profiles))
        profiles.append(generate_synthetic(AppClass.SENSITIVE, seed * 1000 + k, nr_ways))
    for k in range(n_ls):
        ls.append(len(profiles))
        profiles.append(generate_synthetic(AppClass.LIGHT_SHARING, seed * 1000 + k, nr_ways))
    return ClassifiedWorkload(profiles=tuple(profiles), st=tuple(st),
                              cs=tuple(cs), ls=tuple(ls))


def bench(n_apps, trials, seed, nr_ways=11):
    """Time the LFOC+ solver; returns per-trial wall times in seconds."""
    if n_apps < 2:
        raise UsageError("need at least 2 applications")
    cfg = PolicyConfig(nr_ways=nr_ways, merge_streaming=True)
    times = []
    for t in range(trials):
        workload = bench_workload(n_apps, seed + t, nr_ways)
        t0 = time.perf_counter()
        lfoc_plus_partition(workload, cfg)
        times.append(time.perf_counter() - t0)
    return times


def _cmd_bench(args):
    times = bench(args.apps, args.trials, args.seed, nr_ways=args.ways or 11)
    med = statistics.median(times)
    p95 = sorted(times)[max(0, int(0.95 * len(times)) - 1)]
    print("apps=%d trials=%d median_us=%.2f p95_us=%.2f"
          % (args.apps, args.trials, med * 1e6, p95 * 1e6))
    return 0


def _cmd_classify(args):
    profile = load_profile(args.profile, args.ways)
    cls = classify(profile)
    line = "%s: %s" % (profile.name, cls.value)
    if cls is AppClass.SENSITIVE:
        line += " (critical size: %d ways)" % critical_size(profile)
    print(line)
    return 0


def _cmd_count(args):
    for n in args.n:
        print("%d %d" % (n, count_clusterings(n)))
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="cacheclust",
        description="Fairness-aware LLC cache-clustering policies and oracles.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run policies over a workload manifest")
    p_run.add_argument("manifest", help="workload manifest (JSON)")
    p_run.add_argument("--policies", default="lfoc,lfoc-plus",
                       help="comma-separated policy names (%s)" % ",".join(POLICIES))
    p_run.add_argument("--ways", type=int, default=None,
                       help="override the manifest's nr_ways")
    p_run.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p_run.add_argument("--oracle-max-apps", type=int, default=8)
    p_run.add_argument("--out", default=None, help="report CSV path (default stdout)")
    p_run.add_argument("--solutions-json", default=None,
                       help="also dump chosen solutions as JSON")
    p_run.add_argument("--no-timing", action="store_true",
                       help="write 0 in solve_us for byte-stable output")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.set_defaults(func=_cmd_run)

    p_bench = sub.add_parser("bench", help="time the LFOC+ solver")
    p_bench.add_argument("--apps", type=int, default=16)
    p_bench.add_argument("--trials", type=int, default=100)
    p_bench.add_argument("--seed", type=int, default=1)
    p_bench.add_argument("--ways", type=int, default=None)
    p_bench.set_defaults(func=_cmd_bench)

    p_cls = sub.add_parser("classify", help="classify one profile CSV")
    p_cls.add_argument("profile")
    p_cls.add_argument("--ways", type=int, default=None,
                       help="expected row count (default: inferred)")
    p_cls.set_defaults(func=_cmd_classify)

    p_count = sub.add_parser("count", help="clustering search-space sizes")
    p_count.add_argument("n", type=int, nargs="+")
    p_count.set_defaults(func=_cmd_count)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (UsageError, ProfileError, ValueError) as exc:
        if isinstance(exc, (InfeasibleError, OracleLimitError)):
            print("error: %s" % exc, file=sys.stderr)
            return 2
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
