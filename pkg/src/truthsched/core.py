"""Instance and allocation model, exact makespan evaluation and exact solvers.

Every quantity is a :class:`fractions.Fraction`; nothing in this module rounds.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

DEFAULT_ENUMERATION_BUDGET = 10**8
DEFAULT_CLUSTER_BUDGET = 2**16
DEFAULT_THETA_SAFETY = 1000


class ContractViolation(ValueError):
    """An operation was called with arguments that break its precondition."""


class BudgetExceeded(RuntimeError):
    pass


class DegenerateInstance(ValueError):
    pass


class ConfigurationError(ValueError):
    pass


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings. Floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not processing times")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError(f"refusing float {x!r}: pass an exact rational")
    raise TypeError(f"cannot interpret {x!r} as a rational")


@dataclass(frozen=True)
class CostMatrix:
    """``values[i][j]`` is the time machine ``i`` needs for task ``j``."""

    values: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(as_fraction(v) for v in row) for row in self.values)
        if len(rows) < 2:
            raise ContractViolation("need at least 2 machines")
        m = len(rows[0])
        if m < 1:
            raise ContractViolation("need at least 1 task")
        for row in rows:
            if len(row) != m:
                raise ContractViolation("ragged cost matrix")
            for v in row:
                if v < 0:
                    raise ContractViolation(f"negative processing time {v}")
        object.__setattr__(self, "values", rows)

    @classmethod
    def of(cls, rows: Iterable[Iterable]) -> "CostMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return len(self.values[0])

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.values)

    def with_row(self, i: int, row: Sequence) -> "CostMatrix":
        rows = list(self.values)
        rows[i] = tuple(as_fraction(v) for v in row)
        return CostMatrix(tuple(rows))

    def permute_tasks(self, perm: Sequence[int]) -> "CostMatrix":
        """Column ``k`` of the result is column ``perm[k]`` of ``self``."""
        return CostMatrix(tuple(tuple(row[p] for p in perm) for row in self.values))


@dataclass(frozen=True)
class Allocation:
    """``assignment[j]`` is the machine that processes task ``j``."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(x) for x in self.assignment)
        if any(x < 0 for x in a):
            raise ContractViolation("negative machine index")
        object.__setattr__(self, "assignment", a)

    @classmethod
    def of(cls, assignment: Iterable[int]) -> "Allocation":
        return cls(tuple(assignment))

    @property
    def m(self) -> int:
        return len(self.assignment)

    def indicator(self, i: int, j: int) -> int:
        return 1 if self.assignment[j] == i else 0

    def tasks_of(self, i: int) -> frozenset[int]:
        return frozenset(j for j, a in enumerate(self.assignment) if a == i)

    def check_against(self, matrix: CostMatrix) -> None:
        if self.m != matrix.m:
            raise ContractViolation(
                f"allocation covers {self.m} tasks, matrix has {matrix.m}"
            )
        for a in self.assignment:
            if a >= matrix.n:
                raise ContractViolation(f"machine index {a} out of range [0, {matrix.n})")

    def permute_tasks(self, perm: Sequence[int]) -> "Allocation":
        return Allocation(tuple(self.assignment[p] for p in perm))


def machine_loads(matrix: CostMatrix, alloc: Allocation) -> list[Fraction]:
    alloc.check_against(matrix)
    loads = [Fraction(0)] * matrix.n
    for j, i in enumerate(alloc.assignment):
        loads[i] += matrix.values[i][j]
    return loads


def makespan(matrix: CostMatrix, alloc: Allocation) -> Fraction:
    return max(machine_loads(matrix, alloc))


def _integer_scaled(matrix: CostMatrix) -> tuple[list[list[int]], int]:
    den = 1
    for row in matrix.values:
        for v in row:
            den = math.lcm(den, v.denominator)
    rows = [[v.numerator * (den // v.denominator) for v in row] for row in matrix.values]
    return rows, den


def optimal_makespan(
    matrix: CostMatrix, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> tuple[Fraction, Allocation]:
    """Exact optimum by branch and bound over all ``n**m`` assignments.

    A first pass finds the optimal value, starting from the greedy
    column-minimum incumbent and cutting branches whose partial makespan or
    average-load bound reaches it. A second pass walks assignments in
    lexicographic order under the bound ``<= opt``, so the witness is the
    lexicographically smallest optimal assignment vector.
    """
    n, m = matrix.n, matrix.m
    if n**m > budget:
        raise BudgetExceeded(
            f"instance too large for exact enumeration: {n}^{m} states exceeds "
            f"the budget of {budget}"
        )
    rows, den = _integer_scaled(matrix)
    cols = [[rows[i][j] for i in range(n)] for j in range(m)]
    suffix = [0] * (m + 1)
    for j in range(m - 1, -1, -1):
        suffix[j] = suffix[j + 1] + min(cols[j])
    orders = [sorted(range(n), key=col.__getitem__) for col in cols]
    loads = [0] * n
    for j, col in enumerate(cols):
        loads[orders[j][0]] += col[orders[j][0]]
    best = [max(loads)]
    loads = [0] * n

    def improve(j: int, partial_max: int, total: int) -> None:
        if j == m:
            best[0] = partial_max
            return
        col = cols[j]
        for i in orders[j]:
            new = loads[i] + col[i]
            pm = new if new > partial_max else partial_max
            if pm >= best[0] or -(-(total + col[i] + suffix[j + 1]) // n) >= best[0]:
                continue
            loads[i] = new
            improve(j + 1, pm, total + col[i])
            loads[i] -= col[i]

    improve(0, 0, 0)
    opt = best[0]
    current = [0] * m

    def first(j: int, partial_max: int, total: int) -> bool:
        if j == m:
            return True
        col = cols[j]
        for i in range(n):
            new = loads[i] + col[i]
            if new > opt or -(-(total + col[i] + suffix[j + 1]) // n) > opt:
                continue
            loads[i] = new
            current[j] = i
            if first(j + 1, max(new, partial_max), total + col[i]):
                return True
            loads[i] -= col[i]
        return False

    first(0, 0, 0)
    return Fraction(opt, den), Allocation(tuple(current))


def brute_force_makespan(matrix: CostMatrix) -> Fraction:
    """Plain product enumeration; a slow oracle for small tests."""
    best = None
    for assign in itertools.product(range(matrix.n), repeat=matrix.m):
        loads = [Fraction(0)] * matrix.n
        for j, i in enumerate(assign):
            loads[i] += matrix.values[i][j]
        v = max(loads)
        if best is None or v < best:
            best = v
    return best


def approx_ratio(matrix: CostMatrix, alloc: Allocation, opt: Fraction | None = None) -> Fraction:
    if opt is None:
        opt, _ = optimal_makespan(matrix)
    if opt == 0:
        raise DegenerateInstance("optimal makespan is 0; the ratio is undefined")
    return makespan(matrix, alloc) / opt


# ---------------------------------------------------------------------------
# clustered instances


@dataclass(frozen=True)
class TaskValues:
    t: Fraction
    s: Fraction

    def __post_init__(self):
        object.__setattr__(self, "t", as_fraction(self.t))
        object.__setattr__(self, "s", as_fraction(self.s))


@dataclass(frozen=True)
class ClusteredInstance:
    """Player 0 (the t-player) against n-1 cluster owners.

    Cluster ``c`` (0-based) belongs to player ``c + 1``. A cluster task costs
    ``t`` for player 0, ``s`` for the owner and ``theta`` for everyone else.
    Dummy ``d_i`` costs ``dummies[i]`` for player ``i`` and ``theta`` for the
    rest. Column order of the expanded matrix: cluster 0 tasks, cluster 1
    tasks, ..., then ``d_0 .. d_{n-1}``.
    """

    n: int
    ell: int
    clusters: tuple[tuple[TaskValues, ...], ...]
    dummies: tuple[Fraction, ...]
    theta: Fraction
    big_b: Fraction
    safety: int = field(default=DEFAULT_THETA_SAFETY, compare=False)

    def __post_init__(self):
        clusters = tuple(
            tuple(tv if isinstance(tv, TaskValues) else TaskValues(*tv) for tv in c)
            for c in self.clusters
        )
        object.__setattr__(self, "clusters", clusters)
        object.__setattr__(self, "dummies", tuple(as_fraction(d) for d in self.dummies))
        object.__setattr__(self, "theta", as_fraction(self.theta))
        object.__setattr__(self, "big_b", as_fraction(self.big_b))
        n, ell = self.n, self.ell
        if n < 2:
            raise ContractViolation("need n >= 2")
        if ell < 0:
            raise ContractViolation("ell must be >= 0")
        if self.safety < 1:
            raise ContractViolation("theta safety factor must be >= 1")
        if len(clusters) != n - 1:
            raise ContractViolation(f"expected {n - 1} clusters, got {len(clusters)}")
        for c in clusters:
            if len(c) != ell + 1:
                raise ContractViolation(f"every cluster needs ell+1={ell + 1} tasks")
            for tv in c:
                if not tv.t > 0:
                    raise ContractViolation(f"t-value must be positive, got {tv.t}")
                if not 0 < tv.s < self.big_b:
                    raise ContractViolation(f"s-value {tv.s} outside (0, B)")
        if len(self.dummies) != n:
            raise ContractViolation(f"expected {n} dummy values")
        for d in self.dummies:
            if not 0 <= d < self.big_b:
                raise ContractViolation(f"dummy value {d} outside [0, B)")
        if not self.theta > self.safety * n * (ell + 1) * self.big_b:
            raise ContractViolation(
                "theta too small: need theta / ((ell+1) B) > "
                f"{self.safety} * n"
            )

    @property
    def m(self) -> int:
        return (self.ell + 1) * (self.n - 1) + self.n

    def task_index(self, cluster: int, k: int) -> int:
        return cluster * (self.ell + 1) + k

    def dummy_index(self, i: int) -> int:
        return (self.ell + 1) * (self.n - 1) + i

    def locate(self, j: int) -> tuple[int, int]:
        """``(cluster, position)`` of cluster task ``j``."""
        if not 0 <= j < (self.ell + 1) * (self.n - 1):
            raise ContractViolation(f"task {j} is not a cluster task")
        return divmod(j, self.ell + 1)

    def owner(self, j: int) -> int:
        """The cheap non-zero player of task ``j`` (dummy owner for dummies)."""
        split = (self.ell + 1) * (self.n - 1)
        if j >= split:
            return j - split
        return j // (self.ell + 1) + 1

    def values_of(self, j: int) -> TaskValues:
        c, k = self.locate(j)
        return self.clusters[c][k]

    def with_task(self, j: int, t=None, s=None) -> "ClusteredInstance":
        c, k = self.locate(j)
        old = self.clusters[c][k]
        new = TaskValues(old.t if t is None else t, old.s if s is None else s)
        cl = list(self.clusters)
        row = list(cl[c])
        row[k] = new
        cl[c] = tuple(row)
        return replace(self, clusters=tuple(cl))

    def with_cluster(self, c: int, tasks: Sequence[TaskValues]) -> "ClusteredInstance":
        cl = list(self.clusters)
        cl[c] = tuple(tasks)
        return replace(self, clusters=tuple(cl))

    def with_dummy(self, i: int, value) -> "ClusteredInstance":
        d = list(self.dummies)
        d[i] = as_fraction(value)
        return replace(self, dummies=tuple(d))


def expand_clustered(ci: ClusteredInstance) -> CostMatrix:
    n = ci.n
    cols: list[list[Fraction]] = []
    for c, cluster in enumerate(ci.clusters):
        for tv in cluster:
            col = [ci.theta] * n
            col[0] = tv.t
            col[c + 1] = tv.s
            cols.append(col)
    for i, d in enumerate(ci.dummies):
        col = [ci.theta] * n
        col[i] = d
        cols.append(col)
    return CostMatrix(tuple(tuple(col[i] for col in cols) for i in range(n)))


def clustered_makespan(ci: ClusteredInstance, alloc: Allocation) -> Fraction:
    """Makespan of an allocation that never uses a theta entry."""
    if alloc.m != ci.m:
        raise ContractViolation("allocation does not match the instance")
    loads = list(ci.dummies)
    for i, d in enumerate(ci.dummies):
        if alloc.assignment[ci.dummy_index(i)] != i:
            raise ContractViolation(f"dummy d_{i} placed on a theta entry")
    for c, cluster in enumerate(ci.clusters):
        for k, tv in enumerate(cluster):
            who = alloc.assignment[ci.task_index(c, k)]
            if who == 0:
                loads[0] += tv.t
            elif who == c + 1:
                loads[c + 1] += tv.s
            else:
                raise ContractViolation(f"task {ci.task_index(c, k)} placed on a theta entry")
    return max(loads)


def _cluster_frontier(cluster: Sequence[TaskValues]) -> tuple[list[Fraction], list[Fraction], list[int]]:
    """Pareto frontier of one cluster's splits.

    Returns ``(owner_loads, zero_loads, masks)`` with owner loads strictly
    increasing and player-0 loads strictly decreasing (bit set = task goes to
    player 0). Between frontier points the player-0 load is constant, so only
    frontier owner loads can be optimal caps. Subset sums run over integers.
    """
    den = 1
    for tv in cluster:
        den = math.lcm(den, tv.t.denominator, tv.s.denominator)
    ts = [tv.t.numerator * (den // tv.t.denominator) for tv in cluster]
    ss = [tv.s.numerator * (den // tv.s.denominator) for tv in cluster]
    size = 1 << len(cluster)
    r = [0] * size
    l = [0] * size
    l[0] = sum(ss)
    for mask in range(1, size):
        low = mask & -mask
        k = low.bit_length() - 1
        prev = mask ^ low
        r[mask] = r[prev] + ts[k]
        l[mask] = l[prev] - ss[k]
    order = sorted(range(size), key=lambda mask: (l[mask], r[mask], mask))
    loads, best, masks = [], [], []
    for mask in order:
        if not best or r[mask] < best[-1]:
            if loads and loads[-1] == l[mask]:
                continue  # same owner load, worse player-0 load
            loads.append(l[mask])
            best.append(r[mask])
            masks.append(mask)
    return [Fraction(x, den) for x in loads], [Fraction(x, den) for x in best], masks


def optimal_makespan_clustered(
    ci: ClusteredInstance, budget: int = DEFAULT_CLUSTER_BUDGET
) -> tuple[Fraction, Allocation]:
    """Exact optimum over allocations that avoid every theta entry.

    For a cap ``c`` on the owners' loads, each cluster independently picks the
    split with least player-0 load subject to ``d_i + l_i <= c``; the player-0
    load ``R(c)`` is non-increasing in ``c``. The optimum is the minimum over
    candidate caps (achievable owner loads) of ``max(R(c), c)``, located by
    binary search on the crossing of ``R`` and the identity.
    """
    if (1 << (ci.ell + 1)) > budget:
        raise BudgetExceeded(
            f"cluster subset enumeration needs 2^{ci.ell + 1} states, budget is {budget}"
        )
    frontiers = [_cluster_frontier(c) for c in ci.clusters]
    floor_cap = max(ci.dummies[1:])
    caps = sorted(
        {ci.dummies[c + 1] + l for c, fr in enumerate(frontiers) for l in fr[0]}
        | {floor_cap}
    )
    caps = caps[bisect.bisect_left(caps, floor_cap):]

    def zero_load(cap):
        total = ci.dummies[0]
        choice = []
        for c, (loads, best, masks) in enumerate(frontiers):
            k = bisect.bisect_right(loads, cap - ci.dummies[c + 1]) - 1
            total += best[k]
            choice.append(masks[k])
        return total, choice

    # first cap index where R(c) <= c; the optimum is at that index or just before
    lo, hi = 0, len(caps) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if zero_load(caps[mid])[0] <= caps[mid]:
            hi = mid
        else:
            lo = mid + 1
    best_val, best_choice = None, None
    for idx in (lo - 1, lo):
        if 0 <= idx < len(caps):
            r, choice = zero_load(caps[idx])
            v = max(r, caps[idx])
            if best_val is None or v < best_val:
                best_val, best_choice = v, choice
    assign = []
    for c, mask in enumerate(best_choice):
        for k in range(ci.ell + 1):
            assign.append(0 if mask >> k & 1 else c + 1)
    assign.extend(range(ci.n))
    alloc = Allocation(tuple(assign))
    return clustered_makespan(ci, alloc), alloc


# ---------------------------------------------------------------------------
# constants


ALPHA_TOLERANCE = Fraction(1, 10**9)


def ceil_inv_sqrt(k: int) -> Fraction:
    """Rational ``a >= 1/sqrt(k)`` with ``a - 1/sqrt(k) <= 1e-12 / k``; exact for squares."""
    if k < 1:
        raise ContractViolation("k must be positive")
    r = math.isqrt(k)
    if r * r == k:
        return Fraction(1, r)
    scale = 10**12
    return Fraction(math.isqrt(k * scale * scale) + 1, scale * k)


def within_inv_sqrt(a: Fraction, k: int, tol: Fraction = ALPHA_TOLERANCE) -> bool:
    """Exact test of ``|a - 1/sqrt(k)| <= tol``."""
    hi = a + tol
    if hi * hi * k < 1:
        return False
    lo = a - tol
    return lo <= 0 or lo * lo * k <= 1


def target_ratio(n: int, alpha: Fraction, delta_prime: Fraction) -> Fraction:
    bad = 1 / (alpha + (n - 1) * delta_prime)
    good = (n - 1) * alpha / (1 + (n - 1) * delta_prime)
    return 1 - delta_prime + min(bad, good)


@dataclass(frozen=True)
class ConstantsProfile:
    n: int
    alpha: Fraction
    beta: Fraction
    delta: Fraction
    delta_prime: Fraction
    rho: Fraction
    ell: int

    def __post_init__(self):
        for name in ("alpha", "beta", "delta", "delta_prime", "rho"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.n < 2:
            raise ConfigurationError("n must be >= 2")
        if not within_inv_sqrt(self.alpha, self.n - 1):
            raise ConfigurationError("alpha must approximate 1/sqrt(n-1) within 1e-9")
        if self.delta_prime != 2 * self.delta:
            raise ConfigurationError("delta' must equal 2*delta exactly")
        if (2 * self.n / self.delta).denominator != 1:
            raise ConfigurationError("2n/delta must be an integer")
        if not 0 < self.beta < self.delta < 1:
            raise ConfigurationError("need 0 < beta < delta < 1")
        if self.rho != target_ratio(self.n, self.alpha, self.delta_prime):
            raise ConfigurationError("rho does not match the target-ratio formula")
        if self.ell < 0:
            raise ConfigurationError("ell must be >= 0")

    @classmethod
    def build(cls, n: int, *, delta=None, beta=Fraction(1, 10**6), ell: int = 7, alpha=None):
        alpha = ceil_inv_sqrt(n - 1) if alpha is None else as_fraction(alpha)
        delta = default_delta(n) if delta is None else as_fraction(delta)
        return cls(
            n=n,
            alpha=alpha,
            beta=as_fraction(beta),
            delta=delta,
            delta_prime=2 * delta,
            rho=target_ratio(n, alpha, 2 * delta),
            ell=ell,
        )

    @property
    def grid_size(self) -> int:
        """Number of points of the ``q * delta / (2n)`` grid, ``q = 0..2n/delta``."""
        return int(2 * self.n / self.delta) + 1


def default_delta(n: int) -> Fraction:
    """Largest delta <= 1/(10 n^2) with 2n/delta integral."""
    bound = Fraction(1, 10 * n * n)
    k = math.ceil(2 * n / bound)
    return Fraction(2 * n, k)
