"""Good sets, bad tasks and ratio certificates at desk scale.

A certificate is a concrete clustered instance together with the mechanism's
allocation on it and the exact optimum, so anyone can re-derive its ratio.
Good-set verdicts come from finitely many samples of a perturbation box.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    Allocation,
    ClusteredInstance,
    ConstantsProfile,
    ContractViolation,
    TaskValues,
    expand_clustered,
    makespan,
    optimal_makespan_clustered,
)
from .mechanisms import Mechanism
from .slicelab import SliceSpec, boundary_psi

DESK_B = Fraction(1000)
DESK_THETA_FACTOR = 10**6
CORNER = 1 - Fraction(1, 2**20)
EPSILONS = (Fraction(1, 2**10), Fraction(1, 2**20))
EPS_PRIME = Fraction(1, 2**20)
DEFAULT_SAMPLES = 64
MIN_CERT_RATIO = 1 + Fraction(1, 10**6)

CAVEAT = (
    "CAVEAT: the bound column is a reference value, never asserted. The argument "
    "that guarantees a good set needs ell > 3 n^3 (3n/delta)^(n-3) tasks per "
    "cluster; desk runs use a far smaller ell. The lower bound over all truthful "
    "mechanisms is a universal statement that sampling cannot reproduce; these "
    "runs only measure the given mechanism."
)


def desk_theta(n: int, ell: int, big_b=DESK_B) -> Fraction:
    return Fraction(DESK_THETA_FACTOR * n * (ell + 1)) * big_b


# ---------------------------------------------------------------------------
# instances


def make_standard_instance(
    n: int,
    consts: ConstantsProfile,
    cluster_set: Iterable[int] | None = None,
    trivial: Sequence[TaskValues] | None = None,
) -> ClusteredInstance:
    """Clusters in ``cluster_set`` (1-based owners) get only ``(beta, 1)`` tasks;
    the others are trivial, by default one ``(delta, 1/2)`` task and the rest
    ``(beta, 1)``. Dummies are 0."""
    if n != consts.n:
        raise ContractViolation(f"constants are for n={consts.n}, not n={n}")
    chosen = set(range(1, n)) if cluster_set is None else set(cluster_set)
    if not chosen <= set(range(1, n)):
        raise ContractViolation("cluster_set must be a subset of 1..n-1")
    size = consts.ell + 1
    std = TaskValues(consts.beta, Fraction(1))
    if trivial is None:
        trivial = (TaskValues(consts.delta, Fraction(1, 2)),) + (std,) * (size - 1)
    trivial = tuple(tv if isinstance(tv, TaskValues) else TaskValues(*tv) for tv in trivial)
    if len(trivial) != size:
        raise ContractViolation(f"trivial cluster needs {size} tasks")
    if trivial_cost(trivial) > consts.delta_prime:
        raise ContractViolation("trivial cluster costs more than delta'")
    clusters = tuple((std,) * size if c in chosen else trivial for c in range(1, n))
    return ClusteredInstance(n, consts.ell, clusters, (Fraction(0),) * n, desk_theta(n, consts.ell), DESK_B)


def trivial_cost(cluster: Sequence[TaskValues]) -> Fraction:
    """Optimal makespan of one cluster against its owner alone."""
    ell = len(cluster) - 1
    ci = ClusteredInstance(2, ell, (tuple(cluster),), (0, 0), desk_theta(2, ell), DESK_B)
    return optimal_makespan_clustered(ci)[0]


def check_regular(T: ClusteredInstance, P: Sequence[int]) -> tuple[int, ...]:
    P = tuple(P)
    clusters = [T.locate(p)[0] for p in P]
    if len(set(clusters)) != len(clusters):
        raise ContractViolation("a regular set takes at most one task per cluster")
    return P


def _require_standard(T: ClusteredInstance, P, consts) -> None:
    for p in P:
        v = T.values_of(p)
        if v.t != consts.beta or v.s != 1:
            raise ContractViolation(f"instance is not standard for task {p}: values ({v.t}, {v.s})")


def make_hat(
    T: ClusteredInstance, P: Sequence[int], consts: ConstantsProfile, s_values: dict | None = None
) -> ClusteredInstance:
    """Raise each ``p`` in ``P`` to ``(alpha, s)`` with ``s = 1`` unless overridden."""
    P = check_regular(T, P)
    s_values = s_values or {}
    out = T
    for p in P:
        v = T.values_of(p)
        if v.t not in (consts.beta, consts.alpha):
            raise ContractViolation(f"task {p} is neither standard nor already raised")
        out = out.with_task(p, t=consts.alpha, s=s_values.get(p, Fraction(1)))
    return out


@dataclass(frozen=True)
class PerturbationBox:
    tasks: tuple[int, ...]
    lows: tuple[Fraction, ...]
    thetas: tuple[Fraction, ...]

    def __post_init__(self):
        if not len(self.tasks) == len(self.lows) == len(self.thetas):
            raise ContractViolation("box fields must have equal length")

    def check(self, beta: Fraction) -> None:
        for th in self.thetas:
            if not 0 < th < beta:
                raise ContractViolation("every theta must lie in (0, beta)")

    def corner(self) -> tuple[Fraction, ...]:
        return tuple(lo + th * CORNER for lo, th in zip(self.lows, self.thetas))

    def to_json(self) -> dict:
        return {
            "tasks": list(self.tasks),
            "lows": [str(x) for x in self.lows],
            "thetas": [str(x) for x in self.thetas],
        }


def default_box(hat: ClusteredInstance, P: Sequence[int], consts: ConstantsProfile) -> PerturbationBox:
    P = tuple(P)
    box = PerturbationBox(P, tuple(hat.values_of(p).t for p in P), (consts.beta / 2,) * len(P))
    box.check(consts.beta)
    return box


def sample_box(hat: ClusteredInstance, box: PerturbationBox, count: int, seed: int) -> list[ClusteredInstance]:
    """Sample 0 is the near-supremum corner; the rest are uniform on a 2^-20 lattice."""
    if count < 1:
        raise ContractViolation("count must be >= 1")
    rng = random.Random(seed)
    points = [box.corner()]
    for _ in range(count - 1):
        points.append(
            tuple(lo + th * Fraction(rng.randrange(1, 2**20), 2**20) for lo, th in zip(box.lows, box.thetas))
        )
    out = []
    for pt in points:
        inst = hat
        for p, t in zip(box.tasks, pt):
            inst = inst.with_task(p, t=t)
        out.append(inst)
    return out


def _holds_all(mech: Mechanism, inst: ClusteredInstance, P) -> tuple[bool, Allocation]:
    alloc = mech(expand_clustered(inst))
    return all(alloc.assignment[p] == 0 for p in P), alloc


# ---------------------------------------------------------------------------
# good sets


@dataclass
class GoodSetVerdict:
    P: tuple[int, ...]
    verdict: str  # good | good-empirical | notGood | inconclusive
    box: PerturbationBox | None = None
    failing: ClusteredInstance | None = None
    failing_alloc: Allocation | None = None
    samples: int = 0
    wmon_suspect: bool = False

    @property
    def good(self) -> bool:
        return self.verdict in ("good", "good-empirical")

    def to_json(self) -> dict:
        return {
            "P": list(self.P),
            "verdict": self.verdict,
            "samples": self.samples,
            "box": None if self.box is None else self.box.to_json(),
            "wmon_suspect": self.wmon_suspect,
        }


def is_good_set(
    mech: Mechanism,
    T: ClusteredInstance,
    P: Sequence[int],
    consts: ConstantsProfile,
    sample_count: int = DEFAULT_SAMPLES,
    seed: int = 0,
    *,
    s_values: dict | None = None,
) -> GoodSetVerdict:
    """Does ``mech`` give all of ``P`` to player 0 throughout the default box above T-hat(P)?

    For truthful mechanisms a passing corner certifies the whole box, since
    every interior point only lowers player 0's bids on tasks it holds. An
    interior failure after a passing corner is therefore flagged as a
    suspected weak-monotonicity breach.
    """
    P = check_regular(T, P)
    _require_standard(T, P, consts)
    hat = make_hat(T, P, consts, s_values)
    box = default_box(hat, P, consts)
    samples = sample_box(hat, box, sample_count, seed)
    ok, alloc = _holds_all(mech, samples[0], P)
    if not ok:
        return GoodSetVerdict(P, "notGood", None, samples[0], alloc, 1)
    for k, inst in enumerate(samples[1:], start=2):
        ok, alloc = _holds_all(mech, inst, P)
        if not ok:
            return GoodSetVerdict(P, "inconclusive", None, inst, alloc, k, wmon_suspect=True)
    verdict = "good" if mech.truthful else "good-empirical"
    return GoodSetVerdict(P, verdict, box, None, None, len(samples))


def _q_values(consts: ConstantsProfile) -> list[Fraction]:
    """``q delta / (2n)`` for ``q = 0..2n/delta``, with 0 replaced by ``delta / (4n)``."""
    step = consts.delta / (2 * consts.n)
    vals = [q * step for q in range(consts.grid_size)]
    vals[0] = consts.delta / (4 * consts.n)
    return vals


def is_potentially_good(
    mech: Mechanism,
    T: ClusteredInstance,
    P: Sequence[int],
    consts: ConstantsProfile,
    seed: int = 0,
    *,
    sample_count: int = 8,
) -> tuple[bool, dict]:
    """Every ``P - p_i`` is good, also when ``p_k`` is cheapened to
    ``(delta, q delta / (2n))`` over the whole q-grid."""
    P = check_regular(T, P)
    if len(P) < 2:
        raise ContractViolation("need |P| >= 2")
    _require_standard(T, P, consts)
    ev: dict = {"subsets": [], "grid_size": consts.grid_size, "grid_checks": 0, "q0_replacement": str(consts.delta / (4 * consts.n))}
    for i in range(len(P)):
        sub = P[:i] + P[i + 1:]
        v = is_good_set(mech, T, sub, consts, sample_count, seed + i)
        ev["subsets"].append(v.to_json())
        if not v.good:
            ev["failed"] = {"subset": list(sub)}
            return False, ev
    qs = _q_values(consts)
    for k, pk in enumerate(P):
        sub = P[:k] + P[k + 1:]
        for q, s in enumerate(qs):
            Tq = T.with_task(pk, t=consts.delta, s=s)
            v = is_good_set(mech, Tq, sub, consts, sample_count, seed + 1000 * k + q)
            ev["grid_checks"] += 1
            if not v.good:
                ev["failed"] = {"replaced": pk, "q": q, "verdict": v.verdict}
                return False, ev
    # every check used the same default box, so the witness intersection is that box
    ev["witness"] = default_box(make_hat(T, P, consts), P, consts).to_json()
    return True, ev


@dataclass
class SearchResult:
    P: tuple[int, ...] | None
    box: PerturbationBox | None
    instance: ClusteredInstance | None
    log: list[str] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.P is not None


def search_good_set(
    mech: Mechanism,
    n: int,
    target_k: int,
    consts: ConstantsProfile,
    budget: int = 256,
    seed: int = 0,
    *,
    sample_count: int = DEFAULT_SAMPLES,
) -> SearchResult:
    """Grow a good set one random cluster at a time, retrying siblings on failure."""
    if not 1 <= target_k <= n - 1:
        raise ContractViolation("target_k must lie in 1..n-1")
    rng = random.Random(seed)
    log: list[str] = []
    P: list[int] = []
    free = list(range(n - 1))
    rng.shuffle(free)
    calls = 0
    box = T = None
    while len(P) < target_k:
        c = free.pop()
        positions = list(range(consts.ell + 1))
        rng.shuffle(positions)
        chosen = {p // (consts.ell + 1) + 1 for p in P} | {c + 1}
        T = make_standard_instance(n, consts, chosen)
        extended = False
        for k in positions:
            if calls >= budget:
                log.append(f"budget of {budget} good-set checks exhausted")
                return SearchResult(None, None, None, log)
            p = T.task_index(c, k)
            calls += 1
            v = is_good_set(mech, T, P + [p], consts, sample_count, seed + calls)
            log.append(f"P={P + [p]}: {v.verdict}")
            if v.good:
                P.append(p)
                box = v.box
                extended = True
                break
            if not P:
                log.append("branch (ii): singleton is not good, a bad task exists")
                return SearchResult(None, None, None, log)
        if not extended:
            log.append(f"no sibling in cluster {c} extends {P}")
            return SearchResult(None, None, None, log)
    return SearchResult(tuple(P), box, T, log)


# ---------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    kind: str  # BadTask | GoodSet | DirectRatio
    mechanism: str
    instance: ClusteredInstance
    allocation: Allocation
    mech_value: Fraction
    opt_value: Fraction
    ratio: Fraction
    consts: ConstantsProfile | None = None
    pre_boost_ratio: Fraction | None = None
    notes: dict = field(default_factory=dict)

    def recheck(self) -> bool:
        """Replay the stored allocation and re-solve the optimum from scratch."""
        mech_value = makespan(expand_clustered(self.instance), self.allocation)
        opt_value = optimal_makespan_clustered(self.instance)[0]
        return (
            mech_value == self.mech_value
            and opt_value == self.opt_value
            and self.ratio == mech_value / opt_value
            and self.ratio > 1
        )


def _certify_instance(kind, mech, inst, consts, pre=None, notes=None) -> Certificate:
    alloc = mech(expand_clustered(inst))
    mv = makespan(expand_clustered(inst), alloc)
    ov = optimal_makespan_clustered(inst)[0]
    return Certificate(kind, mech.name, inst, alloc, mv, ov, mv / ov, consts, pre, notes or {})


def _ratio(mech, inst) -> Fraction:
    m = expand_clustered(inst)
    return makespan(m, mech(m)) / optimal_makespan_clustered(inst)[0]


def find_bad_task(
    mech: Mechanism, n: int, consts: ConstantsProfile, seed: int = 0, *, sample_count: int = DEFAULT_SAMPLES
) -> Certificate | None:
    """Scan singletons (also with the s-value lowered to ``1 - eps``); on the first
    bad task, boost the owner's dummy and certify."""
    T = make_standard_instance(n, consts)
    for c in range(n - 1):
        for k in range(consts.ell + 1):
            p = T.task_index(c, k)
            for s in (Fraction(1),) + tuple(1 - e for e in EPSILONS):
                v = is_good_set(mech, T, [p], consts, sample_count, seed + p, s_values={p: s})
                if v.verdict != "notGood":
                    continue
                owner = c + 1
                failing = v.failing
                pre = _ratio(mech, failing)
                boosted = failing.with_task(p, s=s - EPS_PRIME).with_dummy(
                    owner, consts.alpha + (n - 1) * consts.delta_prime
                )
                notes = {"task": p, "owner": owner, "s": str(s), "t": str(failing.values_of(p).t)}
                return _certify_instance("BadTask", mech, boosted, consts, pre, notes)
    return None


def good_set_certificate(mech: Mechanism, res: SearchResult, consts: ConstantsProfile) -> Certificate:
    n = consts.n
    inst = res.instance
    for p, t in zip(res.box.tasks, res.box.corner()):
        inst = inst.with_task(p, t=t)
    pre = _ratio(mech, inst)
    boosted = inst.with_dummy(0, 1 + (n - 1) * consts.delta_prime)
    cert = _certify_instance("GoodSet", mech, boosted, consts, pre, {"P": list(res.P)})
    floor = (n - 1) * consts.alpha + 1 + (n - 1) * consts.delta_prime
    cert.notes["mech_floor"] = str(floor)
    cert.notes["mech_floor_met"] = cert.mech_value >= floor
    return cert


def killer_pair_probes(mech: Mechanism, n: int, consts: ConstantsProfile) -> Certificate | None:
    """Sibling pairs ``[t=big, s=beta]`` and ``[t=beta, s=big]``: only a split
    allocation is cheap, so bundling rules pay ``big``."""
    big = min(Fraction(n**3), DESK_B / 2)
    T = make_standard_instance(n, consts)
    best = None
    for c in range(n - 1):
        for a in range(consts.ell + 1):
            for b in range(a + 1, consts.ell + 1):
                p, q = T.task_index(c, a), T.task_index(c, b)
                inst = T.with_task(p, t=big, s=consts.beta).with_task(q, t=consts.beta, s=big)
                cert = _certify_instance("DirectRatio", mech, inst, consts, notes={"probe": "killer-pair", "pair": [p, q]})
                if best is None or cert.ratio > best.ratio:
                    best = cert
    return best


def lambda_probes(
    mech: Mechanism, n: int, consts: ConstantsProfile, *, s_big=None, tol=Fraction(1, 10**6)
) -> Certificate | None:
    """Locate each task's boundary at a large s-value, then stack a dummy on
    whichever side the boundary slope punishes."""
    s_big = DESK_B / 2 if s_big is None else Fraction(s_big)
    T = make_standard_instance(n, consts)
    size = consts.ell + 1
    best = None
    for c in range(n - 1):
        for k in range(size):
            p = T.task_index(c, k)
            partner = T.task_index(c, (k + 1) % size)
            spec = SliceSpec(T, p, partner)
            iv = boundary_psi(mech, spec, 1, consts.beta, (s_big, Fraction(1)), tol, t_max=16 * s_big)
            if not iv.finite:
                continue
            owner = c + 1
            base = T.with_task(p, s=s_big)
            cands = [
                ("keep", base.with_task(p, t=iv.lo).with_dummy(0, s_big)),
                ("lose", base.with_task(p, t=iv.hi).with_dummy(owner, min(iv.hi, DESK_B - 1))),
            ]
            for side, inst in cands:
                cert = _certify_instance(
                    "DirectRatio", mech, inst, consts,
                    notes={"probe": "lambda", "task": p, "side": side, "psi": iv.to_json()},
                )
                if best is None or cert.ratio > best.ratio:
                    best = cert
    return best


@dataclass
class CertifyResult:
    certificate: Certificate | None
    branch: str  # bad-task | good-set | direct | none
    log: list[str] = field(default_factory=list)


def certify_lower_bound(
    mech: Mechanism,
    n: int,
    consts: ConstantsProfile | None = None,
    seed: int = 0,
    *,
    budget: int = 256,
    sample_count: int = DEFAULT_SAMPLES,
) -> CertifyResult:
    """Trichotomy driver. (i) a bundling pair whose killer instance already
    reaches the target ratio; (ii) a bad task; (iii) a good set of size n-1.
    When none applies, the best direct probe above ratio 1 + 1e-6 is returned."""
    consts = consts or ConstantsProfile.build(n)
    log: list[str] = []
    killer = killer_pair_probes(mech, n, consts)
    if killer is not None and killer.ratio >= consts.rho:
        log.append(f"branch (i): sibling pair {killer.notes['pair']} is bundled")
        return CertifyResult(killer, "direct", log)
    cert = find_bad_task(mech, n, consts, seed, sample_count=sample_count)
    if cert is not None and cert.ratio >= MIN_CERT_RATIO:
        log.append(f"branch (ii): bad task {cert.notes['task']}")
        return CertifyResult(cert, "bad-task", log)
    log.append("no bad task among singletons")
    res = search_good_set(mech, n, n - 1, consts, budget, seed, sample_count=sample_count)
    log.extend(res.log)
    if res.found:
        cert = good_set_certificate(mech, res, consts)
        if cert.ratio >= MIN_CERT_RATIO:
            log.append(f"branch (iii): good set {list(res.P)}")
            return CertifyResult(cert, "good-set", log)
        log.append("good-set instance did not exceed the minimum ratio")
    best = killer
    lam = lambda_probes(mech, n, consts)
    if lam is not None and (best is None or lam.ratio > best.ratio):
        best = lam
    if best is not None and best.ratio >= MIN_CERT_RATIO:
        log.append(f"direct probe {best.notes['probe']} gave ratio {float(best.ratio):.6f}")
        return CertifyResult(best, "direct", log)
    log.append("no certificate above ratio 1 + 1e-6 found")
    return CertifyResult(None, "none", log)


# ---------------------------------------------------------------------------
# bad-set fraction


@dataclass
class BadFractionEstimate:
    k: int
    trials: int
    bad: int
    inconclusive: int
    estimate: float
    ci_low: float
    ci_high: float
    reference_bound: float
    ell: int
    caveat: str = CAVEAT

    def __post_init__(self):
        if not 0 <= self.estimate <= 1:
            raise ContractViolation("estimate must lie in [0, 1]")

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "trials": self.trials,
            "bad": self.bad,
            "inconclusive": self.inconclusive,
            "estimate": self.estimate,
            "ci95": [self.ci_low, self.ci_high],
            "reference_bound": self.reference_bound,
            "ell": self.ell,
            "caveat": self.caveat,
        }


def clopper_pearson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    from scipy.stats import beta

    a = (1 - level) / 2
    lo = 0.0 if successes == 0 else float(beta.ppf(a, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta.ppf(1 - a, successes + 1, trials - successes))
    return lo, hi


def reference_bad_bound(n: int, k: int, consts: ConstantsProfile) -> float:
    """``(3n/delta)^(k-2) * 3 n^3 / ell``, evaluated in floating point."""
    if consts.ell == 0:
        return math.inf
    return (3 * n / float(consts.delta)) ** (k - 2) * 3 * n**3 / consts.ell


def estimate_bad_fraction(
    mech: Mechanism,
    n: int,
    k: int,
    trials: int,
    consts: ConstantsProfile | None = None,
    seed: int = 0,
    *,
    sample_count: int = 8,
) -> BadFractionEstimate:
    """Monte Carlo share of random regular k-sets that are not good."""
    if trials < 30:
        raise ContractViolation("trials must be >= 30")
    if not 1 <= k <= n - 1:
        raise ContractViolation("k must lie in 1..n-1")
    consts = consts or ConstantsProfile.build(n)
    rng = random.Random(seed)
    bad = inconclusive = 0
    for trial in range(trials):
        clusters = rng.sample(range(n - 1), k)
        T = make_standard_instance(n, consts, {c + 1 for c in clusters})
        P = [T.task_index(c, rng.randrange(consts.ell + 1)) for c in clusters]
        v = is_good_set(mech, T, P, consts, sample_count, seed + trial)
        bad += v.verdict == "notGood"
        inconclusive += v.verdict == "inconclusive"
    lo, hi = clopper_pearson(bad, trials)
    return BadFractionEstimate(
        k, trials, bad, inconclusive, bad / trials, lo, hi, reference_bad_bound(n, k, consts), consts.ell
    )
