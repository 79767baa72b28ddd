"""Per-application cache profiles: loading, interpolation and classification.

A profile stores, for every possible way count w in 1..nr_ways, the IPC,
the slowdown relative to running with the whole LLC, and the LLC misses
per kilo-cycle (LLCMPKC) measured with w ways.
"""

import csv
import math
import random
from dataclasses import dataclass, field
from enum import Enum

# Measured curves contain noise; slowdowns marginally below 1 are clamped,
# anything further below is rejected as a bad measurement.
SLOWDOWN_TOLERANCE = 0.005

CSV_HEADER = ["ways", "ipc", "slowdown", "llcmpkc"]


class ProfileError(ValueError):
    """Raised for malformed profile files or invariant violations."""


class AppClass(Enum):
    STREAMING = "streaming"
    SENSITIVE = "sensitive"
    LIGHT_SHARING = "light-sharing"


@dataclass(frozen=True)
class ClassifierConfig:
    """Thresholds for the three-way application classifier.

    Defaults were tuned for an 11-way Skylake LLC; treat them as
    platform-specific configuration.
    """

    streaming_slowdown_lo: float = 1.03
    streaming_slowdown_hi: float = 1.06
    streaming_llcmpkc_min: float = 10.0
    sensitive_slowdown_min: float = 1.05
    sensitive_min_ways: int = 2

    def __post_init__(self):
        if not self.streaming_slowdown_lo < self.streaming_slowdown_hi:
            raise ValueError("streaming_slowdown_lo must be < streaming_slowdown_hi")
        for name in ("streaming_slowdown_lo", "streaming_slowdown_hi",
                     "streaming_llcmpkc_min", "sensitive_slowdown_min"):
            if getattr(self, name) <= 0:
                raise ValueError("%s must be positive" % name)


DEFAULT_CLASSIFIER = ClassifierConfig()


@dataclass(frozen=True)
class AppProfile:
    """Immutable per-way performance curves for one application.

    All three curves are 1-indexed by way count: ipc[w-1] is the IPC
    observed with w ways.
    """

    name: str
    nr_ways: int
    ipc: tuple = field(repr=False)
    slowdown: tuple = field(repr=False)
    llcmpkc: tuple = field(repr=False)

    def __post_init__(self):
        if self.nr_ways < 1:
            raise ProfileError("nr_ways must be >= 1")
        ipc = tuple(float(v) for v in self.ipc)
        slowdown = tuple(float(v) for v in self.slowdown)
        llcmpkc = tuple(float(v) for v in self.llcmpkc)
        for label, arr in (("ipc", ipc), ("slowdown", slowdown), ("llcmpkc", llcmpkc)):
            if len(arr) != self.nr_ways:
                raise ProfileError(
                    "%s: %s array has %d entries, expected %d"
                    % (self.name, label, len(arr), self.nr_ways))
            if not all(math.isfinite(v) for v in arr):
                raise ProfileError("%s: non-finite value in %s" % (self.name, label))
        if any(v <= 0 for v in ipc):
            raise ProfileError("%s: ipc values must be positive" % self.name)
        if any(v < 0 for v in llcmpkc):
            raise ProfileError("%s: llcmpkc values must be non-negative" % self.name)
        clamped = []
        for w, v in enumerate(slowdown, start=1):
            if v < 1.0 - SLOWDOWN_TOLERANCE:
                raise ProfileError(
                    "%s: slowdown %.6g below 1 at way %d" % (self.name, v, w))
            clamped.append(max(v, 1.0))
        object.__setattr__(self, "ipc", ipc)
        object.__setattr__(self, "slowdown", tuple(clamped))
        object.__setattr__(self, "llcmpkc", llcmpkc)


def _curve_at(values, effective_ways):
    """Linear interpolation over a 1-indexed per-way curve."""
    n = len(values)
    if not 1.0 <= effective_ways <= n:
        raise ValueError(
            "effective_ways %.4g outside [1, %d]" % (effective_ways, n))
    lo = int(effective_ways)
    if lo == effective_ways or lo == n:
        return values[lo - 1]
    frac = effective_ways - lo
    return values[lo - 1] + frac * (values[lo] - values[lo - 1])


def slowdown_at(profile, effective_ways):
    """Slowdown at a (possibly fractional) way count in [1, nr_ways]."""
    return _curve_at(profile.slowdown, effective_ways)


def llcmpkc_at(profile, effective_ways):
    """LLCMPKC at a (possibly fractional) way count in [1, nr_ways]."""
    return _curve_at(profile.llcmpkc, effective_ways)


def classify(profile, cfg=DEFAULT_CLASSIFIER):
    """Assign one of the three application classes to a profile.

    Streaming: low slowdown everywhere but a high miss rate at some small
    allocation. Sensitive: a noticeable slowdown remains at >= 2 ways.
    Light-sharing: everything else.
    """
    sd = profile.slowdown
    mpkc = profile.llcmpkc
    streaming = (
        any(s <= cfg.streaming_slowdown_lo and m >= cfg.streaming_llcmpkc_min
            for s, m in zip(sd, mpkc))
        and all(s < cfg.streaming_slowdown_hi for s in sd)
    )
    if streaming:
        return AppClass.STREAMING
    if any(sd[w - 1] >= cfg.sensitive_slowdown_min
           for w in range(cfg.sensitive_min_ways, profile.nr_ways + 1)):
        return AppClass.SENSITIVE
    return AppClass.LIGHT_SHARING


def critical_size(profile, threshold=1.05):
    """Smallest way count whose slowdown drops below the threshold.

    Falls back to nr_ways when the slowdown never drops that low.
    """
    for w, s in enumerate(profile.slowdown, start=1):
        if s < threshold:
            return w
    return profile.nr_ways


def load_profile(path, nr_ways=None):
    """Load a profile CSV (header ``ways,ipc,slowdown,llcmpkc``).

    Rows must cover way counts 1..nr_ways in ascending order. When
    nr_ways is None it is taken from the row count.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ProfileError("%s: empty file" % path) from None
        if [h.strip() for h in header] != CSV_HEADER:
            raise ProfileError(
                "%s:1: bad header %r, expected %r" % (path, header, CSV_HEADER))
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ProfileError(
                    "%s:%d: expected 4 columns, got %d" % (path, lineno, len(row)))
            try:
                parsed = [float(v) for v in row]
            except ValueError:
                raise ProfileError(
                    "%s:%d: non-numeric field in %r" % (path, lineno, row)) from None
            rows.append((lineno, parsed))
    if nr_ways is None:
        nr_ways = len(rows)
    if len(rows) != nr_ways:
        raise ProfileError(
            "%s: row count mismatch: %d data rows, expected %d"
            % (path, len(rows), nr_ways))
    for expected, (lineno, parsed) in enumerate(rows, start=1):
        if parsed[0] != expected:
            raise ProfileError(
                "%s:%d: ways column is %g, expected %d (ascending from 1)"
                % (path, lineno, parsed[0], expected))
    import os
    name = os.path.splitext(os.path.basename(path))[0]
    try:
        return AppProfile(
            name=name,
            nr_ways=nr_ways,
            ipc=tuple(r[1] for _, r in rows),
            slowdown=tuple(r[2] for _, r in rows),
            llcmpkc=tuple(r[3] for _, r in rows),
        )
    except ProfileError as exc:
        raise ProfileError("%s: %s" % (path, exc)) from None


def write_profile(profile, path):
    """Write a profile in the CSV format accepted by load_profile."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for w in range(1, profile.nr_ways + 1):
            writer.writerow([
                w,
                repr(profile.ipc[w - 1]),
                repr(profile.slowdown[w - 1]),
                repr(profile.llcmpkc[w - 1]),
            ])


_CLASS_SEED_SALT = {
    AppClass.STREAMING: 0,
    AppClass.SENSITIVE: 1,
    AppClass.LIGHT_SHARING: 2,
}


def generate_synthetic(app_class, seed, nr_ways):
    """Deterministic synthetic profile of a given class.

    The returned profile classifies back to ``app_class`` under the
    default thresholds. Curves are non-increasing in the way count.
    """
    rng = random.Random(
        seed * 1_000_003 + nr_ways * 131 + _CLASS_SEED_SALT[app_class])
    ipc_max = rng.uniform(0.5, 3.0)

    if app_class is AppClass.STREAMING:
        base = rng.uniform(1.0, 1.015)
        bump = rng.uniform(0.0, 0.01)
        slowdown = [base + bump * math.exp(-0.5 * (w - 1)) for w in range(1, nr_ways + 1)]
        mpkc0 = rng.uniform(12.0, 40.0)
        decay = rng.uniform(0.0, 0.05)
        llcmpkc = [max(10.5, mpkc0 * math.exp(-decay * (w - 1)))
                   for w in range(1, nr_ways + 1)]
    elif app_class is AppClass.SENSITIVE:
        sd1 = rng.uniform(1.3, 3.0)
        rate = rng.uniform(0.3, 0.9)
        slowdown = [1.0 + (sd1 - 1.0) * math.exp(-rate * (w - 1))
                    for w in range(1, nr_ways + 1)]
        mpkc0 = rng.uniform(2.0, 30.0)
        mrate = rng.uniform(0.2, 0.8)
        llcmpkc = [mpkc0 * math.exp(-mrate * (w - 1)) for w in range(1, nr_ways + 1)]
    else:
        base = rng.uniform(1.0, 1.01)
        bump = rng.uniform(0.0, 0.02)
        slowdown = [base + bump * math.exp(-0.7 * (w - 1)) for w in range(1, nr_ways + 1)]
        mpkc0 = rng.uniform(0.1, 3.0)
        mrate = rng.uniform(0.1, 0.6)
        llcmpkc = [mpkc0 * math.exp(-mrate * (w - 1)) for w in range(1, nr_ways + 1)]

    return AppProfile(
        name="%s-%d" % (app_class.value, seed),
        nr_ways=nr_ways,
        ipc=tuple(ipc_max / s for s in slowdown),
        slowdown=tuple(slowdown),
        llcmpkc=tuple(llcmpkc),
    )
