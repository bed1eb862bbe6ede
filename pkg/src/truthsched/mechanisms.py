"""Allocation rules: VCG, weighted VCG, the 2x2 mechanism classes and a non-monotone control.

A mechanism is a callable ``CostMatrix -> Allocation``. The 2x2 families
additionally expose ``label(t1, t2, s1, s2)``, the set of tasks the t-player
(row 0) receives; everything else goes to the s-player (row 1).
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .core import (
    Allocation,
    ClusteredInstance,
    ConfigurationError,
    ContractViolation,
    CostMatrix,
    as_fraction,
)

INF = math.inf


class UnsupportedMechanism(TypeError):
    pass


class Label(enum.Enum):
    """Tasks held by the t-player in a 2x2 slice; preference order is declaration order."""

    BOTH = "12"
    FIRST = "1"
    SECOND = "2"
    NONE = "none"

    @property
    def tasks(self) -> frozenset[int]:
        return _LABEL_TASKS[self]

    def has(self, task: int) -> bool:
        """``task`` is 1 or 2."""
        return task in _LABEL_TASKS[self]

    @classmethod
    def from_tasks(cls, first: bool, second: bool) -> "Label":
        if first and second:
            return cls.BOTH
        if first:
            return cls.FIRST
        if second:
            return cls.SECOND
        return cls.NONE


_LABEL_TASKS = {
    Label.BOTH: frozenset({1, 2}),
    Label.FIRST: frozenset({1}),
    Label.SECOND: frozenset({2}),
    Label.NONE: frozenset(),
}


def parse_extended(x):
    """Rational or one of ``"inf"``/``"-inf"`` (also accepts ``math.inf``)."""
    if isinstance(x, float) and math.isinf(x):
        return x
    if isinstance(x, str) and x.strip().lower() in ("inf", "+inf", "-inf", "infinity", "-infinity"):
        return -INF if x.strip().startswith("-") else INF
    return as_fraction(x)


def format_extended(x) -> str:
    if isinstance(x, float):
        return "inf" if x > 0 else "-inf"
    return str(x)


def _ext_add(x: Fraction, pi):
    return pi if isinstance(pi, float) else x + pi


class Mechanism:
    """Deterministic allocation rule with metadata."""

    name: str = "mechanism"
    tie_break: str = ""
    shape: tuple[int, int] | None = None
    truthful: bool = True

    def allocate(self, matrix: CostMatrix) -> Allocation:
        raise NotImplementedError

    def __call__(self, matrix: CostMatrix) -> Allocation:
        if self.shape is not None and (matrix.n, matrix.m) != self.shape:
            raise ContractViolation(
                f"{self.name} expects a {self.shape[0]}x{self.shape[1]} matrix, "
                f"got {matrix.n}x{matrix.m}"
            )
        return self.allocate(matrix)


@dataclass(frozen=True)
class VCG(Mechanism):
    name: str = "vcg"
    tie_break: str = "lowest machine index"

    def allocate(self, matrix):
        return vcg_allocate(matrix)


def vcg_allocate(matrix: CostMatrix) -> Allocation:
    assign = []
    for j in range(matrix.m):
        col = matrix.column(j)
        best = min(col)
        assign.append(col.index(best))
    return Allocation(tuple(assign))


def _wvcg_task(col: Sequence[Fraction], n: int) -> int:
    """Player 0 iff sqrt(n-1) * t_0 <= min_{i>0} t_i, compared in squares."""
    others = col[1:]
    best = min(others)
    if (n - 1) * col[0] * col[0] <= best * best:
        return 0
    return 1 + others.index(best)


@dataclass(frozen=True)
class WeightedVCG(Mechanism):
    name: str = "wvcg"
    tie_break: str = "player 0 at equality, else lowest machine index"

    def allocate(self, matrix):
        n = matrix.n
        return Allocation(tuple(_wvcg_task(matrix.column(j), n) for j in range(matrix.m)))


def weighted_vcg_allocate(ci: ClusteredInstance, n: int | None = None) -> Allocation:
    n = ci.n if n is None else n
    if n != ci.n:
        raise ContractViolation(f"weighted VCG parameter n={n} differs from instance n={ci.n}")
    assign = []
    for c, cluster in enumerate(ci.clusters):
        for tv in cluster:
            assign.append(0 if (n - 1) * tv.t * tv.t <= tv.s * tv.s else c + 1)
    # theta dominates every weighted comparison, so dummies stay with their owners
    assign.extend(range(n))
    return Allocation(tuple(assign))


@dataclass(frozen=True)
class MaxCost(Mechanism):
    """Gives each task to its most expensive machine. Not weakly monotone."""

    name: str = "maxcost"
    tie_break: str = "lowest machine index"
    truthful: bool = False

    def allocate(self, matrix):
        assign = []
        for j in range(matrix.m):
            col = matrix.column(j)
            assign.append(col.index(max(col)))
        return Allocation(tuple(assign))


def max_cost_allocate(matrix: CostMatrix) -> Allocation:
    return MaxCost().allocate(matrix)


# ---------------------------------------------------------------------------
# 2x2 families


class TwoByTwo(Mechanism):
    shape = (2, 2)

    def label(self, t1, t2, s1, s2) -> Label:
        raise NotImplementedError

    def allocate(self, matrix):
        (t1, t2), (s1, s2) = matrix.values
        lab = self.label(t1, t2, s1, s2)
        return Allocation((0 if lab.has(1) else 1, 0 if lab.has(2) else 1))


@dataclass(frozen=True)
class BoundaryTable:
    """Non-decreasing piecewise-linear function given by sorted breakpoints.

    Left of the first breakpoint the function is constant; right of the last it
    continues with slope ``tail_slope``. A repeated abscissa encodes a jump and
    the function is right-continuous there.
    """

    points: tuple[tuple[Fraction, Fraction], ...]
    tail_slope: Fraction = Fraction(0)

    def __post_init__(self):
        pts = tuple((as_fraction(x), as_fraction(y)) for x, y in self.points)
        if not pts:
            raise ConfigurationError("boundary table needs at least one breakpoint")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "tail_slope", as_fraction(self.tail_slope))
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x1 < x0:
                raise ConfigurationError("breakpoints must be sorted")
            if y1 < y0:
                raise ConfigurationError("boundary must be non-decreasing")
        if pts[0][1] < 0:
            raise ConfigurationError("boundary values must be nonnegative")
        if self.tail_slope < 0:
            raise ConfigurationError("tail slope must be nonnegative")
        object.__setattr__(self, "_xs", tuple(x for x, _ in pts))
        object.__setattr__(
            self, "_slopes", tuple((y1 - y0) / (x1 - x0) if x1 != x0 else Fraction(0) for (x0, y0), (x1, y1) in zip(pts, pts[1:]))
        )

    @classmethod
    def linear(cls, slope, intercept=0) -> "BoundaryTable":
        """``max(0, slope*x + intercept)`` for ``x >= 0``."""
        slope, intercept = as_fraction(slope), as_fraction(intercept)
        if intercept >= 0:
            return cls(((Fraction(0), intercept),), slope)
        root = -intercept / slope
        return cls(((Fraction(0), Fraction(0)), (root, Fraction(0))), slope)

    @classmethod
    def identity(cls) -> "BoundaryTable":
        return cls.linear(1)

    @classmethod
    def constant(cls, value) -> "BoundaryTable":
        return cls(((Fraction(0), as_fraction(value)),))

    def __call__(self, x) -> Fraction:
        pts = self.points
        k = bisect.bisect_right(self._xs, x) - 1
        if k < 0:
            return pts[0][1]
        if k == len(pts) - 1:
            xk, yk = pts[k]
            return yk + self.tail_slope * (x - xk)
        x0, y0 = pts[k]
        return y0 + self._slopes[k] * (x - x0)

    def covers(self, lo, hi) -> bool:
        """Breakpoints span ``[lo, hi]`` without relying on extrapolation."""
        return self.points[0][0] <= lo and self.points[-1][0] >= hi


@dataclass(frozen=True)
class AffineMinimizerConfig2x2:
    lambda_prime: Fraction
    lam: Fraction
    pi_12: object = Fraction(0)
    pi_1: object = Fraction(0)
    pi_2: object = Fraction(0)
    pi_none: object = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "lambda_prime", as_fraction(self.lambda_prime))
        object.__setattr__(self, "lam", as_fraction(self.lam))
        for f in ("pi_12", "pi_1", "pi_2", "pi_none"):
            object.__setattr__(self, f, parse_extended(getattr(self, f)))
        if not (self.lambda_prime > 0 and self.lam > 0):
            raise ConfigurationError("lambda' and lambda must be positive")
        if all(p == INF for p in (self.pi_12, self.pi_1, self.pi_2, self.pi_none)):
            raise ConfigurationError("all four affine expressions are +inf")
        # integer-scaled coefficients for the hot path; infinite pi stay floats
        pis = (self.pi_12, self.pi_1, self.pi_2, self.pi_none)
        k = math.lcm(
            self.lambda_prime.denominator,
            self.lam.denominator,
            *(p.denominator for p in pis if not isinstance(p, float)),
        )
        scaled = tuple(p if isinstance(p, float) else int(p * k) for p in pis)
        object.__setattr__(self, "_scaled", (int(self.lambda_prime * k), int(self.lam * k), scaled))

    @property
    def slope(self) -> Fraction:
        """Slope of the task boundaries in the s-value: lambda / lambda'."""
        return self.lam / self.lambda_prime

    @property
    def bundle_bias(self):
        """``pi_1 + pi_2 - pi_12 - pi_none``: >0 bundling shape, <0 flipping, 0 independent."""
        vals = (self.pi_1, self.pi_2, self.pi_12, self.pi_none)
        if any(isinstance(v, float) for v in vals):
            return None
        return self.pi_1 + self.pi_2 - self.pi_12 - self.pi_none


_AFFINE_LABELS = (Label.BOTH, Label.FIRST, Label.SECOND, Label.NONE)


def affine_minimizer_2x2(t1, t2, s1, s2, cfg: AffineMinimizerConfig2x2) -> Label:
    # every expression is scaled by the same positive integer, so the argmin is unchanged
    lp, lam, pis = cfg._scaled
    t1, t2, s1, s2 = (as_fraction(x) for x in (t1, t2, s1, s2))
    den = math.lcm(t1.denominator, t2.denominator, s1.denominator, s2.denominator)
    a = lp * (t1.numerator * (den // t1.denominator))
    b = lp * (t2.numerator * (den // t2.denominator))
    c = lam * (s1.numerator * (den // s1.denominator))
    d = lam * (s2.numerator * (den // s2.denominator))
    best_val = best_lab = None
    for val, pi, lab in zip((a + b, a + d, b + c, c + d), pis, _AFFINE_LABELS):
        val = pi if isinstance(pi, float) else val + pi * den
        if best_lab is None or val < best_val:
            best_val, best_lab = val, lab
    return best_lab


@dataclass(frozen=True)
class AffineMinimizer2x2(TwoByTwo):
    cfg: AffineMinimizerConfig2x2 = None
    name: str = "affmin2"
    tie_break: str = "t-player favored: 12 > 1 > 2 > none"

    def label(self, t1, t2, s1, s2):
        return affine_minimizer_2x2(t1, t2, s1, s2, self.cfg)


@dataclass(frozen=True)
class RelaxedAffineMinimizerConfig2x2:
    """Affine minimizer whose small-value corner is a bundling tail.

    Inside ``s1+s2 < d_s`` and ``t1+t2 < d_t`` the t-player takes both tasks iff
    ``t1+t2 <= zeta(s1+s2)`` and nothing otherwise. :meth:`with_tail` derives
    thresholds under which the result stays weakly monotone.
    """

    base: AffineMinimizerConfig2x2
    d_s: Fraction
    d_t: Fraction
    zeta: BoundaryTable

    def __post_init__(self):
        object.__setattr__(self, "d_s", as_fraction(self.d_s))
        object.__setattr__(self, "d_t", as_fraction(self.d_t))
        if not (self.d_s > 0 and self.d_t > 0):
            raise ConfigurationError("tail thresholds must be positive")
        if not self.zeta.covers(0, self.d_s):
            raise ConfigurationError("tail table must cover [0, D_s)")

    @classmethod
    def with_tail(cls, lambda_prime, lam, pi_1, pi_2, zeta: BoundaryTable):
        """Base with ``pi_12 = pi_none = 0`` and positive ``pi_1, pi_2``.

        Below ``s1+s2 < min(pi_1, pi_2)/lam`` or ``t1+t2 < min(pi_1, pi_2)/lam'``
        such a base realizes only the bundle or nothing, so swapping its
        linear bundle boundary for any non-decreasing ``zeta`` keeps both
        players weakly monotone.
        """
        base = AffineMinimizerConfig2x2(lambda_prime, lam, 0, pi_1, pi_2, 0)
        if not (base.pi_1 > 0 and base.pi_2 > 0):
            raise ConfigurationError("pi_1 and pi_2 must be positive for a bundling tail")
        low = min(base.pi_1, base.pi_2)
        return cls(base, low / base.lam, low / base.lambda_prime, zeta)


def relaxed_affine_minimizer_2x2(t1, t2, s1, s2, cfg: RelaxedAffineMinimizerConfig2x2) -> Label:
    ssum, tsum = s1 + s2, t1 + t2
    if ssum < cfg.d_s and tsum < cfg.d_t:
        return Label.BOTH if tsum <= cfg.zeta(ssum) else Label.NONE
    return affine_minimizer_2x2(t1, t2, s1, s2, cfg.base)


@dataclass(frozen=True)
class RelaxedAffineMinimizer2x2(TwoByTwo):
    cfg: RelaxedAffineMinimizerConfig2x2 = None
    name: str = "relaxed-affmin2"
    tie_break: str = "t-player favored at every boundary"

    def label(self, t1, t2, s1, s2):
        return relaxed_affine_minimizer_2x2(t1, t2, s1, s2, self.cfg)


def task_independent_2x2(t1, t2, s1, s2, psi1: BoundaryTable, psi2: BoundaryTable) -> Label:
    return Label.from_tasks(t1 <= psi1(s1), t2 <= psi2(s2))


@dataclass(frozen=True)
class TaskIndependent2x2(TwoByTwo):
    psi1: BoundaryTable = field(default_factory=BoundaryTable.identity)
    psi2: BoundaryTable = field(default_factory=BoundaryTable.identity)
    name: str = "taskind2"
    tie_break: str = "t-player at t_i == psi_i(s_i)"

    def label(self, t1, t2, s1, s2):
        return task_independent_2x2(t1, t2, s1, s2, self.psi1, self.psi2)


ONE_DIM_VARIANTS = ("bundling", "task1-only", "task2-only")


def one_dimensional_2x2(t1, t2, s1, s2, variant: str, boundary: BoundaryTable) -> Label:
    if variant == "bundling":
        return Label.BOTH if t1 + t2 <= boundary(s1 + s2) else Label.NONE
    if variant == "task1-only":
        return Label.FIRST if t1 <= boundary(s1) else Label.NONE
    if variant == "task2-only":
        return Label.SECOND if t2 <= boundary(s2) else Label.NONE
    raise ConfigurationError(f"unknown 1-dimensional variant {variant!r}")


@dataclass(frozen=True)
class OneDimensional2x2(TwoByTwo):
    variant: str = "bundling"
    boundary: BoundaryTable = field(default_factory=BoundaryTable.identity)
    name: str = "onedim2"
    tie_break: str = "t-player at the boundary"

    def __post_init__(self):
        if self.variant not in ONE_DIM_VARIANTS:
            raise ConfigurationError(f"unknown 1-dimensional variant {self.variant!r}")

    def label(self, t1, t2, s1, s2):
        return one_dimensional_2x2(t1, t2, s1, s2, self.variant, self.boundary)


def constant_2x2(t1, t2, s1, s2, fixed: Label) -> Label:
    return fixed


@dataclass(frozen=True)
class Constant2x2(TwoByTwo):
    fixed: Label = Label.BOTH
    name: str = "const2"
    tie_break: str = "n/a"

    def label(self, t1, t2, s1, s2):
        return self.fixed


@dataclass(frozen=True)
class EmbeddedSlice(Mechanism):
    """Runs ``base`` except on tasks ``p, p_prime``, which a 2x2 rule splits
    between player 0 and ``owner`` using only those two players' bids."""

    base: Mechanism = field(default_factory=VCG)
    rule: TwoByTwo = None
    p: int = 0
    p_prime: int = 1
    owner: int = 1
    name: str = "embedded"
    tie_break: str = "inherited"

    def __post_init__(self):
        if self.p == self.p_prime:
            raise ContractViolation("embedded slice needs two distinct tasks")
        if self.owner == 0:
            raise ContractViolation("slice owner must be a non-zero player")

    @property
    def truthful(self):
        return self.base.truthful and self.rule.truthful

    def allocate(self, matrix):
        a = list(self.base.allocate(matrix).assignment)
        v = matrix.values
        lab = self.rule.label(v[0][self.p], v[0][self.p_prime], v[self.owner][self.p], v[self.owner][self.p_prime])
        a[self.p] = 0 if lab.has(1) else self.owner
        a[self.p_prime] = 0 if lab.has(2) else self.owner
        return Allocation(tuple(a))


@dataclass(frozen=True)
class FunctionMechanism(Mechanism):
    """Adapter for ad-hoc rules (tests, planted counterexamples)."""

    fn: Callable[[CostMatrix], Allocation] = None
    name: str = "custom"
    tie_break: str = "declared by fn"
    truthful: bool = False
    shape: tuple[int, int] | None = None

    def allocate(self, matrix):
        return self.fn(matrix)


# ---------------------------------------------------------------------------
# payments


@dataclass(frozen=True)
class Surd:
    """Exact ``a + b*sqrt(d)`` with rational ``a, b`` and square-free-or-not ``d >= 1``."""

    a: Fraction
    b: Fraction = Fraction(0)
    d: int = 1

    def _coerce(self, other):
        if isinstance(other, Surd):
            if other.d != self.d and other.b and self.b:
                raise ValueError("mixed radicands")
            return other if other.b else Surd(other.a, Fraction(0), self.d)
        return Surd(as_fraction(other), Fraction(0), self.d)

    def __add__(self, other):
        o = self._coerce(other)
        d = self.d if self.b else o.d
        return Surd(self.a + o.a, self.b + o.b, d)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def sign(self) -> int:
        a, b, d = self.a, self.b, self.d
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0 or sa == sb:
            return sa if sa else sb
        if sa == 0:
            return sb
        # opposite signs: compare a^2 with b^2 d
        cmp = (a * a > b * b * d) - (a * a < b * b * d)
        return sa * cmp

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __eq__(self, other):
        if not isinstance(other, (Surd, Fraction, int)):
            return NotImplemented
        return (self - other).sign() == 0

    def __hash__(self):
        return hash((self.a, self.b, self.d)) if self.b else hash(self.a)

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def rational(self) -> Fraction:
        if self.b:
            raise ValueError("irrational value")
        return self.a


def _weights(mech: Mechanism, n: int):
    """Per-player weights as Surds, or raise for non-VCG-family rules."""
    if isinstance(mech, VCG):
        return [Surd(Fraction(1))] * n
    if isinstance(mech, WeightedVCG):
        d = n - 1
        r = math.isqrt(d)
        lam = Surd(Fraction(r)) if r * r == d else Surd(Fraction(0), Fraction(1), d)
        return [lam] + [Surd(Fraction(1))] * (n - 1)
    raise UnsupportedMechanism(f"Clarke payments are defined only for the VCG family, not {mech.name}")


def _mul(w: Surd, x: Fraction) -> Surd:
    return Surd(w.a * x, w.b * x, w.d)


def _div(x: Surd, w: Surd) -> Surd:
    if not w.b:
        return Surd(x.a / w.a, x.b / w.a, x.d)
    # w = c sqrt(d): (a + b sqrt d) / (c sqrt d) = (b + (a/d) sqrt d) / c
    if w.a:
        raise ValueError("only pure square-root weights are supported")
    return Surd(x.b / w.b, x.a / (w.b * w.d), w.d)


def clarke_payments(matrix: CostMatrix, mech: Mechanism) -> list[Surd]:
    """Clarke pivot payments for (weighted) VCG, per task.

    ``P_i = (h_i - sum_{k != i} w_k t_k(A_k)) / w_i`` where ``h_i`` is the
    weighted optimum of the others with ``i`` removed. The family is
    separable, so both terms are sums of per-task minima. Values are exact
    (``a + b*sqrt(n-1)`` when the weight is irrational).
    """
    n = matrix.n
    w = _weights(mech, n)
    alloc = mech(matrix)
    pay = [Surd(Fraction(0), Fraction(0), w[0].d)] * n
    for j in range(matrix.m):
        col = matrix.column(j)
        winner = alloc.assignment[j]
        # only the winner's payment moves: others' h_i and realized costs cancel on this task
        others = [_mul(w[k], col[k]) for k in range(n) if k != winner]
        best = others[0]
        for o in others[1:]:
            if o < best:
                best = o
        pay[winner] = pay[winner] + _div(best, w[winner])
    return pay


def utilities(matrix: CostMatrix, mech: Mechanism, true_row: Sequence[Fraction], i: int) -> Surd:
    """Player ``i``'s utility when it reports ``matrix`` row ``i`` but has costs ``true_row``."""
    alloc = mech(matrix)
    pay = clarke_payments(matrix, mech)[i]
    cost = sum((true_row[j] for j in alloc.tasks_of(i)), Fraction(0))
    return pay - cost


# ---------------------------------------------------------------------------
# registry

MECHANISM_IDS = ("vcg", "wvcg", "affmin2", "relaxed-affmin2", "taskind2", "onedim2", "const2", "maxcost")


def _table_from_json(obj) -> BoundaryTable:
    if obj is None:
        return BoundaryTable.identity()
    if isinstance(obj, dict):
        return BoundaryTable(tuple(tuple(p) for p in obj["points"]), obj.get("tail_slope", 0))
    return BoundaryTable(tuple(tuple(p) for p in obj))


def _table_to_json(tab: BoundaryTable) -> dict:
    return {"points": [[str(x), str(y)] for x, y in tab.points], "tail_slope": str(tab.tail_slope)}


def build_mechanism(mech_id: str, config: dict | None = None) -> Mechanism:
    """Instantiate a registered mechanism; ``config`` follows the JSON ``mechanism`` block."""
    config = dict(config or {})
    if mech_id == "vcg":
        return VCG()
    if mech_id == "wvcg":
        return WeightedVCG()
    if mech_id == "maxcost":
        return MaxCost()
    if mech_id == "affmin2":
        return AffineMinimizer2x2(_affine_from_json(config))
    if mech_id == "relaxed-affmin2":
        if "base" in config:
            base = _affine_from_json(config["base"])
            cfg = RelaxedAffineMinimizerConfig2x2(
                base, config["d_s"], config["d_t"], _table_from_json(config["zeta"])
            )
        else:
            zeta = _table_from_json(
                config.get("zeta", {"points": [["0", "0"], ["1/4", "1/2"], ["1", "3/4"], ["4", "1"]]})
            )
            cfg = RelaxedAffineMinimizerConfig2x2.with_tail(
                config.get("lambda_prime", 1), config.get("lambda", 1),
                config.get("pi_1", 1), config.get("pi_2", 1), zeta,
            )
        return RelaxedAffineMinimizer2x2(cfg)
    if mech_id == "taskind2":
        return TaskIndependent2x2(_table_from_json(config.get("psi1")), _table_from_json(config.get("psi2")))
    if mech_id == "onedim2":
        return OneDimensional2x2(config.get("variant", "bundling"), _table_from_json(config.get("boundary")))
    if mech_id == "const2":
        return Constant2x2(Label(config.get("label", "12")))
    raise ConfigurationError(f"unknown mechanism id {mech_id!r}; known: {', '.join(MECHANISM_IDS)}")


def _affine_from_json(config: dict) -> AffineMinimizerConfig2x2:
    return AffineMinimizerConfig2x2(
        config.get("lambda_prime", 1),
        config.get("lambda", 2),
        config.get("pi_12", 0),
        config.get("pi_1", 1),
        config.get("pi_2", 0),
        config.get("pi_none", 0),
    )


def mechanism_config(mech: Mechanism) -> dict:
    """Inverse of :func:`build_mechanism` for the registered families."""
    if isinstance(mech, AffineMinimizer2x2):
        return _affine_to_json(mech.cfg)
    if isinstance(mech, RelaxedAffineMinimizer2x2):
        c = mech.cfg
        return {"base": _affine_to_json(c.base), "d_s": str(c.d_s), "d_t": str(c.d_t), "zeta": _table_to_json(c.zeta)}
    if isinstance(mech, TaskIndependent2x2):
        return {"psi1": _table_to_json(mech.psi1), "psi2": _table_to_json(mech.psi2)}
    if isinstance(mech, OneDimensional2x2):
        return {"variant": mech.variant, "boundary": _table_to_json(mech.boundary)}
    if isinstance(mech, Constant2x2):
        return {"label": mech.fixed.value}
    return {}


def _affine_to_json(cfg: AffineMinimizerConfig2x2) -> dict:
    return {
        "lambda_prime": str(cfg.lambda_prime),
        "lambda": str(cfg.lam),
        "pi_12": format_extended(cfg.pi_12),
        "pi_1": format_extended(cfg.pi_1),
        "pi_2": format_extended(cfg.pi_2),
        "pi_none": format_extended(cfg.pi_none),
    }
