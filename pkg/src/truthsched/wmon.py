"""Weak-monotonicity checks for arbitrary allocation rules.

A passing scan means only that no violation was found in the sampled
deviations. It never proves truthfulness.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import Allocation, ContractViolation, CostMatrix, as_fraction
from .mechanisms import Mechanism

GRID = tuple(Fraction(k, 16) for k in range(65))
GENERATORS = ("mixed", "uniform", "single", "structured")


@dataclass(frozen=True)
class WmonViolation:
    machine: int
    row: tuple[Fraction, ...]
    alt_row: tuple[Fraction, ...]
    matrix: CostMatrix
    alloc: Allocation
    alt_alloc: Allocation
    total: Fraction

    def __post_init__(self):
        if not self.total > 0:
            raise ContractViolation("a WMON violation needs a strictly positive sum")

    def to_json(self) -> dict:
        return {
            "machine": self.machine,
            "row": [str(v) for v in self.row],
            "alt_row": [str(v) for v in self.alt_row],
            "others": [[str(v) for v in r] for k, r in enumerate(self.matrix.values) if k != self.machine],
            "matrix": [[str(v) for v in r] for r in self.matrix.values],
            "alloc": list(self.alloc.assignment),
            "alt_alloc": list(self.alt_alloc.assignment),
            "sum": str(self.total),
        }


def wmon_sum(mech: Mechanism, matrix: CostMatrix, i: int, alt_row: Sequence) -> tuple[Fraction, Allocation, Allocation]:
    """``sum_j (a_ij(t') - a_ij(t)) (t'_ij - t_ij)`` for ``t' = (alt_row, t_-i)``."""
    if len(alt_row) != matrix.m:
        raise ContractViolation(f"alternative row has {len(alt_row)} entries, expected {matrix.m}")
    alt = matrix.with_row(i, alt_row)
    a, b = mech(matrix), mech(alt)
    row, new = matrix.values[i], alt.values[i]
    total = Fraction(0)
    for j in range(matrix.m):
        da = (b.assignment[j] == i) - (a.assignment[j] == i)
        if da:
            total += da * (new[j] - row[j])
    return total, a, b


def wmon_check_pair(mech: Mechanism, matrix: CostMatrix, i: int, alt_row: Sequence) -> WmonViolation | None:
    total, a, b = wmon_sum(mech, matrix, i, alt_row)
    if total > 0:
        return WmonViolation(i, matrix.values[i], tuple(as_fraction(v) for v in alt_row), matrix, a, b, total)
    return None


# ---------------------------------------------------------------------------
# randomized search


def _shape(mech: Mechanism, rng: random.Random) -> tuple[int, int]:
    if mech.shape is not None:
        return mech.shape
    return rng.randint(2, 4), rng.randint(1, 3)


def _random_matrix(rng, n, m) -> CostMatrix:
    return CostMatrix(tuple(tuple(rng.choice(GRID) for _ in range(m)) for _ in range(n)))


def _gen_uniform(mech, rng):
    n, m = _shape(mech, rng)
    matrix = _random_matrix(rng, n, m)
    i = rng.randrange(n)
    return matrix, i, tuple(rng.choice(GRID) for _ in range(m))


def _gen_single(mech, rng):
    n, m = _shape(mech, rng)
    matrix = _random_matrix(rng, n, m)
    i = rng.randrange(n)
    row = list(matrix.values[i])
    row[rng.randrange(m)] = rng.choice(GRID)
    return matrix, i, tuple(row)


def _gen_structured(mech, rng):
    """Lower some of player i's won tasks, raise some of its lost ones."""
    n, m = _shape(mech, rng)
    matrix = _random_matrix(rng, n, m)
    i = rng.randrange(n)
    won = mech(matrix).tasks_of(i)
    row = list(matrix.values[i])
    for j in range(m):
        if rng.random() < 0.5:
            continue
        step = rng.choice(GRID[1:17])
        if j in won:
            row[j] = max(Fraction(0), row[j] - step)
        else:
            row[j] = row[j] + step
    return matrix, i, tuple(row)


_GEN = {"uniform": _gen_uniform, "single": _gen_single, "structured": _gen_structured}


def generate_triple(generator: str, mech: Mechanism, rng: random.Random, trial: int):
    if generator == "mixed":
        generator = ("uniform", "single", "structured")[trial % 3]
    try:
        return _GEN[generator](mech, rng)
    except KeyError:
        raise ContractViolation(f"unknown generator {generator!r}; known: {', '.join(GENERATORS)}") from None


@dataclass
class WmonReport:
    mechanism: str
    generator: str
    seed: int
    trials: int
    violations: int = 0
    first: WmonViolation | None = None
    seeds: list[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def summary(self) -> str:
        if self.passed:
            return (
                f"{self.mechanism}: no violation found in {self.trials} trials "
                f"(generator={self.generator}, seed={self.seed})"
            )
        return (
            f"{self.mechanism}: {self.violations} violation(s) in {self.trials} trials "
            f"(generator={self.generator}, seed={self.seed}); first sum = {self.first.total}"
        )

    def to_json(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "generator": self.generator,
            "seed": self.seed,
            "worker_seeds": self.seeds,
            "trials": self.trials,
            "violations": self.violations,
            "verdict": "no violation found" if self.passed else "violation found",
            "first_violation": None if self.first is None else self.first.to_json(),
        }


def _scan_shard(mech: Mechanism, generator: str, trials: int, seed: int, stop_at_first: bool):
    rng = random.Random(seed)
    count, first = 0, None
    for trial in range(trials):
        matrix, i, alt = generate_triple(generator, mech, rng, trial)
        v = wmon_check_pair(mech, matrix, i, alt)
        if v is not None:
            count += 1
            if first is None:
                first = v
            if stop_at_first:
                return count, first, trial + 1
    return count, first, trials


def wmon_scan(
    mech: Mechanism,
    generator: str = "mixed",
    trials: int = 10_000,
    seed: int = 0,
    *,
    workers: int = 1,
    stop_at_first: bool = False,
) -> WmonReport:
    """Seeded search for violations; worker ``k`` uses seed ``seed + k``."""
    if trials < 1:
        raise ContractViolation("trials must be >= 1")
    if generator not in GENERATORS:
        raise ContractViolation(f"unknown generator {generator!r}; known: {', '.join(GENERATORS)}")
    workers = max(1, min(workers, trials))
    shares = [trials // workers + (k < trials % workers) for k in range(workers)]
    seeds = [seed + k for k in range(workers)]
    if workers == 1:
        results = [_scan_shard(mech, generator, trials, seed, stop_at_first)]
    else:
        with ProcessPoolExecutor(workers) as pool:
            futs = [pool.submit(_scan_shard, mech, generator, sh, sd, stop_at_first) for sh, sd in zip(shares, seeds)]
            results = [f.result() for f in futs]
    report = WmonReport(mech.name, generator, seed, sum(r[2] for r in results), seeds=seeds)
    for count, first, _ in results:
        report.violations += count
        if report.first is None and first is not None:
            report.first = first
    return report


# ---------------------------------------------------------------------------
# structured checks


@dataclass(frozen=True)
class ToolCounterexample:
    machine: int
    matrix: CostMatrix
    alt_row: tuple[Fraction, ...]
    kept_before: frozenset[int]
    kept_after: frozenset[int]
    tasks: frozenset[int]


def lemma_tool_check(
    mech: Mechanism,
    matrix: CostMatrix,
    i: int,
    S: Iterable[int],
    S_prime: Iterable[int],
    decrements: Mapping[int, Fraction],
    increments: Mapping[int, Fraction],
) -> ToolCounterexample | None:
    """Lower player ``i``'s bids on won tasks ``S``, raise them on lost tasks
    ``S'``, and confirm ``i``'s allocation on ``S | S'`` is unchanged."""
    S, S_prime = frozenset(S), frozenset(S_prime)
    held = mech(matrix).tasks_of(i)
    if not S <= held:
        raise ContractViolation(f"tasks {sorted(S - held)} are not allocated to machine {i}")
    if S_prime & held:
        raise ContractViolation(f"tasks {sorted(S_prime & held)} are allocated to machine {i}")
    row = list(matrix.values[i])
    for j in S:
        d = as_fraction(decrements[j])
        if not d > 0:
            raise ContractViolation("decrements must be strictly positive")
        if row[j] - d < 0:
            raise ContractViolation(f"decrement on task {j} makes the bid negative")
        row[j] -= d
    for j in S_prime:
        d = as_fraction(increments[j])
        if not d > 0:
            raise ContractViolation("increments must be strictly positive")
        row[j] += d
    after = mech(matrix.with_row(i, row)).tasks_of(i)
    scope = S | S_prime
    if (after & scope) != (held & scope):
        return ToolCounterexample(i, matrix, tuple(row), held & scope, after & scope, scope)
    return None


def restriction_check(
    mech: Mechanism,
    matrix: CostMatrix,
    fixed_tasks: Iterable[int],
    probes: Iterable[tuple[int, Sequence]],
) -> WmonViolation | None:
    """WMON on the tasks outside ``fixed_tasks``, whose values every probe keeps."""
    fixed = frozenset(fixed_tasks)
    for i, alt in probes:
        alt = tuple(as_fraction(v) for v in alt)
        for j in fixed:
            if alt[j] != matrix.values[i][j]:
                raise ContractViolation(f"probe changes fixed task {j}")
        v = wmon_check_pair(mech, matrix, i, alt)
        if v is not None:
            return v
    return None


def random_restriction_probes(matrix: CostMatrix, fixed: Iterable[int], count: int, seed: int) -> list[tuple[int, tuple]]:
    rng = random.Random(seed)
    fixed = frozenset(fixed)
    probes = []
    for _ in range(count):
        i = rng.randrange(matrix.n)
        row = tuple(v if j in fixed else rng.choice(GRID) for j, v in enumerate(matrix.values[i]))
        probes.append((i, row))
    return probes
