"""Seeded random instances and 2x2 mechanism configurations."""

from __future__ import annotations

import random
from fractions import Fraction

from .core import ClusteredInstance, CostMatrix, TaskValues
from .mechanisms import (
    ONE_DIM_VARIANTS,
    AffineMinimizer2x2,
    AffineMinimizerConfig2x2,
    BoundaryTable,
    Constant2x2,
    Label,
    OneDimensional2x2,
    RelaxedAffineMinimizer2x2,
    RelaxedAffineMinimizerConfig2x2,
    TaskIndependent2x2,
)

F = Fraction
CLASS_OF = {
    "affmin2": "AffineMinimizer",
    "relaxed-affmin2": "RelaxedAffineMinimizer",
    "taskind2": "TaskIndependent",
    "onedim2": "OneDimensional",
    "const2": "Constant",
}


def random_matrix(rng: random.Random, n: int, m: int, denom: int = 8, top: int = 32) -> CostMatrix:
    """Entries on the grid ``{k/denom : 1 <= k <= top}``."""
    return CostMatrix(tuple(tuple(F(rng.randint(1, top), denom) for _ in range(m)) for _ in range(n)))


def theta_for(n: int, ell: int, big_b, safety: int = 10**6) -> Fraction:
    return F(safety * n * (ell + 1)) * F(big_b)


def random_clustered(
    rng: random.Random,
    n: int,
    ell: int,
    *,
    denom: int = 8,
    top: int = 24,
    big_b=F(1000),
    dummy_prob: float = 0.5,
) -> ClusteredInstance:
    """Cluster t/s values and dummy values on the grid ``{k/denom}``."""
    clusters = tuple(
        tuple(TaskValues(F(rng.randint(1, top), denom), F(rng.randint(1, top), denom)) for _ in range(ell + 1))
        for _ in range(n - 1)
    )
    dummies = tuple(F(rng.randint(0, top), denom) if rng.random() < dummy_prob else F(0) for _ in range(n))
    return ClusteredInstance(n, ell, clusters, dummies, theta_for(n, ell, big_b), F(big_b))


# ---------------------------------------------------------------------------
# 2x2 configurations whose features sit inside the default probe window


def random_affine(rng: random.Random) -> AffineMinimizer2x2:
    while True:
        lp = rng.choice((F(1, 2), F(1), F(3, 2), F(2)))
        ratio = rng.choice((F(1, 3), F(1, 2), F(2, 3), F(1), F(3, 2), F(2), F(3)))
        pis = [F(rng.randint(0, 4), 4) for _ in range(4)]
        cfg = AffineMinimizerConfig2x2(lp, lp * ratio, *pis)
        # lam >= 1/2 lets s-values up to 4 dominate every pi difference
        if abs(cfg.bundle_bias) >= F(1, 4) and cfg.lam >= F(1, 2):
            return AffineMinimizer2x2(cfg)


def random_monotone_table(rng: random.Random, lo=F(1, 8), hi=F(6), strict=False) -> BoundaryTable:
    xs = sorted(rng.sample(range(1, 32), rng.randint(2, 4)))
    ys = sorted(rng.sample(range(int(lo * 8), int(hi * 8) + 1), len(xs) + 1))
    if not strict and rng.random() < 0.3:
        ys[1] = ys[0]  # a flat piece
    pts = [(F(0), F(ys[0], 8))] + [(F(x, 8), F(y, 8)) for x, y in zip(xs, ys[1:])]
    return BoundaryTable(tuple(pts), rng.choice((F(0), F(1, 2), F(1))))


def random_task_independent(rng: random.Random) -> TaskIndependent2x2:
    return TaskIndependent2x2(random_monotone_table(rng), random_monotone_table(rng))


def random_one_dimensional(rng: random.Random) -> OneDimensional2x2:
    return OneDimensional2x2(rng.choice(ONE_DIM_VARIANTS), random_monotone_table(rng, strict=True))


def random_constant(rng: random.Random) -> Constant2x2:
    return Constant2x2(rng.choice(list(Label)))


def random_relaxed(rng: random.Random) -> RelaxedAffineMinimizer2x2:
    """Tail width ``D_s`` in ``[1/4, 1]``; zeta is kinked and stays below ``D_t``."""
    while True:
        lp = rng.choice((F(1, 2), F(1), F(2)))
        lam = lp * rng.choice((F(1, 2), F(1), F(2)))
        low = lam * F(rng.randint(1, 4), 4)
        p1, p2 = low, low + F(rng.randint(0, 4), 4)
        if rng.random() < 0.5:
            p1, p2 = p2, p1
        d_s, d_t = low / lam, low / lp
        kink = d_s * F(rng.randint(3, 7), 10)
        y1 = d_t * F(rng.randint(2, 6), 10)
        y2 = y1 + (d_t - y1) * F(rng.randint(1, 5), 10)
        # reject near-linear tails and tails hugging the base bundle line at the kink:
        # both would be indistinguishable from the base inside the probe window
        if abs(y1 / kink - y2 / d_s) < F(1, 10) * (d_t / d_s):
            continue
        if abs(y1 - lam / lp * kink) < F(1, 10) * d_t:
            continue
        zeta = BoundaryTable(((F(0), F(0)), (kink, y1), (d_s, y2)))
        return RelaxedAffineMinimizer2x2(RelaxedAffineMinimizerConfig2x2.with_tail(lp, lam, p1, p2, zeta))


GENERATORS_2X2 = {
    "affmin2": random_affine,
    "relaxed-affmin2": random_relaxed,
    "taskind2": random_task_independent,
    "onedim2": random_one_dimensional,
    "const2": random_constant,
}
