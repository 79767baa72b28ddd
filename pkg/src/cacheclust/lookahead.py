"""Greedy marginal-utility way allocation (UCP lookahead variant).

Distributes a budget of LLC ways among applications described by
per-way, lower-is-better metric tables (MPKI, slowdown, ...). Each
iteration grants one way to the application whose metric drops the most
from the extra way.
"""


def lookahead(tables, budget):
    """Allocate `budget` ways among apps with lower-is-better metric tables.

    Every app starts with 1 way. Ways are then granted one at a time to
    the app with the largest marginal reduction table[w] - table[w+1]
    (ties to the lowest index). Once no positive reduction remains, any
    leftover ways are handed out round-robin in app-index order, so the
    result always sums to the full budget.
    """
    n = len(tables)
    if n == 0:
        return []
    if budget < n:
        raise ValueError("budget %d < %d applications" % (budget, n))
    alloc = [1] * n
    remaining = budget - n
    while remaining > 0:
        best_gain = 0.0
        best_i = -1
        for i, table in enumerate(tables):
            w = alloc[i]
            if w >= len(table):
                continue
            gain = table[w - 1] - table[w]
            if gain > best_gain:
                best_gain = gain
                best_i = i
        if best_i < 0:
            break
        alloc[best_i] += 1
        remaining -= 1
    i = 0
    while remaining > 0:
        alloc[i % n] += 1
        i += 1
        remaining -= 1
    return alloc


def ucp_slowdown(profiles, budget):
    """Lookahead fed with the applications' slowdown curves.

    An empty profile list yields an empty assignment (callers guard the
    non-empty case themselves).
    """
    if not profiles:
        return []
    return lookahead([p.slowdown for p in profiles], budget)
