"""Slow, independent reference computations used only by the tests."""

import itertools
from fractions import Fraction

from truthsched.mechanisms import Label


def brute_opt(rows):
    n, m = len(rows), len(rows[0])
    best = None
    for assign in itertools.product(range(n), repeat=m):
        loads = [Fraction(0)] * n
        for j, i in enumerate(assign):
            loads[i] += rows[i][j]
        if best is None or max(loads) < best:
            best = max(loads)
    return best


def clustered_rows(n, clusters, dummies, theta):
    """Expanded matrix built from scratch."""
    rows = [[] for _ in range(n)]
    for c, cl in enumerate(clusters):
        for t, s in cl:
            for i in range(n):
                rows[i].append(t if i == 0 else s if i == c + 1 else theta)
    for k, d in enumerate(dummies):
        for i in range(n):
            rows[i].append(d if i == k else theta)
    return rows


def clustered_opt(n, clusters, dummies):
    """Optimum over theta-free allocations by plain subset enumeration."""
    best = None
    for masks in itertools.product(*[range(1 << len(cl)) for cl in clusters]):
        loads = list(dummies)
        for c, (cl, mask) in enumerate(zip(clusters, masks)):
            for k, (t, s) in enumerate(cl):
                if mask >> k & 1:
                    loads[0] += t
                else:
                    loads[c + 1] += s
        if best is None or max(loads) < best:
            best = max(loads)
    return best


def affine_label(t1, t2, s1, s2, lp, lam, p12=0, p1=0, p2=0, pn=0):
    vals = [
        (lp * (t1 + t2) + p12, 0, Label.BOTH),
        (lp * t1 + lam * s2 + p1, 1, Label.FIRST),
        (lp * t2 + lam * s1 + p2, 2, Label.SECOND),
        (lam * (s1 + s2) + pn, 3, Label.NONE),
    ]
    return min(vals, key=lambda v: (v[0], v[1]))[2]


def sqrt_ge(x, k):
    """x >= sqrt(k) for rational x, exactly."""
    return x >= 0 and x * x >= k
