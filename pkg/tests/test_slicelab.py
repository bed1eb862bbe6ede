import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from truthsched.core import ConstantsProfile, ContractViolation
from truthsched.corpus import GENERATORS_2X2, random_affine, random_clustered
from truthsched.lowerbound import make_standard_instance
from truthsched.mechanisms import (
    AffineMinimizer2x2,
    AffineMinimizerConfig2x2,
    BoundaryTable,
    Constant2x2,
    Label,
    OneDimensional2x2,
    VCG,
)
from truthsched.slicelab import (
    BoundaryFit,
    DegenerateFit,
    GridUndecided,
    NotThresholdLike,
    PsiInterval,
    SliceSpec,
    as_slice,
    boundary_psi,
    classify_2x2,
    fit_linear_boundary,
    lipschitz_probe,
    minimax_line,
    ratio_probe_from_lambda,
    shape_classify,
)

TOL = F(1, 10**6)


@pytest.fixture(scope="module")
def vcg_spec():
    base = make_standard_instance(3, ConstantsProfile.build(3, ell=1))
    return SliceSpec(base, 0, 1)


# --- boundary bisection -----------------------------------------------------


def test_vcg_slice_psi(vcg_spec):
    iv = boundary_psi(VCG(), vcg_spec, 1, 1, (F(1, 2), 1))
    assert iv.finite and iv.lo <= F(1, 2) < iv.hi and iv.hi - iv.lo <= TOL


def test_constant_is_always():
    iv = boundary_psi(Constant2x2(Label.BOTH), None, 1, 1, (1, 1))
    assert iv.marker == "always"
    iv = boundary_psi(Constant2x2(Label.NONE), None, 2, 1, (1, 1))
    assert iv.marker == "never"


def test_affine_crossover_closed_form():
    cfg = AffineMinimizerConfig2x2(1, 2)
    # t2 large: task 2 goes to the s-player, task 1 compares lp*t1 + lam*s2 with lam*(s1+s2)
    want = cfg.lam * 1 / cfg.lambda_prime
    iv = boundary_psi(AffineMinimizer2x2(cfg), None, 1, 16, (1, 1), t_max=8)
    assert iv.lo <= want < iv.hi and iv.hi - iv.lo <= TOL


def test_not_threshold_like():
    # t-player holds task 1 only inside a band: a planted monotonicity breach
    fn = lambda t1, t2, s1, s2: Label.from_tasks(1 <= t1 <= 2, False)  # noqa: E731
    with pytest.raises(NotThresholdLike):
        boundary_psi(fn, None, 1, 1, (1, 1))


def test_boundary_args():
    with pytest.raises(ContractViolation):
        boundary_psi(VCG(), None, 1, 1, (1, 1))
    with pytest.raises(ContractViolation):
        boundary_psi(Constant2x2(), None, 3, 1, (1, 1))
    with pytest.raises(ContractViolation):
        boundary_psi(Constant2x2(), None, 1, 1, (1, 1), tol=0)


@given(st.integers(0, 10**6))
def test_task_independent_psi_invariant(seed):
    rng = random.Random(seed)
    mech = GENERATORS_2X2["taskind2"](rng)
    s1 = F(rng.randint(1, 32), 8)
    ref = boundary_psi(mech, None, 1, 1, (s1, 1), t_max=16)
    for _ in range(100):
        ctx_t, ctx_s = F(rng.randint(1, 256), 8), F(rng.randint(1, 32), 8)
        iv = boundary_psi(mech, None, 1, ctx_t, (s1, ctx_s), t_max=16)
        assert iv.marker == ref.marker
        if ref.finite:
            assert abs(iv.mid - ref.mid) <= 2 * TOL
        if ref.marker != "always":
            assert abs(iv.mid - mech.psi1(s1)) <= TOL or (ref.marker == "never" and mech.psi1(s1) < 1)


@given(st.integers(0, 10**6))
def test_task_independent_psi_monotone(seed):
    mech = GENERATORS_2X2["taskind2"](random.Random(seed))
    prev = None
    for k in range(1, 33):
        iv = boundary_psi(mech, None, 2, 1, (1, F(k, 8)), t_max=16)
        val = {"never": F(0), "always": F(16)}.get(iv.marker, iv.mid)
        if prev is not None:
            assert val >= prev - TOL
        prev = val


# --- shapes -----------------------------------------------------------------


def segment_length(cfg, s1, s2, t_max):
    """Exact t1-extent of the bundle/none or 1/2 boundary segment, clipped to the window."""
    lp, lam = cfg.lambda_prime, cfg.lam
    if cfg.bundle_bias > 0:
        k = (lam * (s1 + s2) + cfg.pi_none - cfg.pi_12) / lp
        u1 = (lam * s1 + cfg.pi_2 - cfg.pi_12) / lp
        u2 = (lam * s2 + cfg.pi_1 - cfg.pi_12) / lp
        lo, hi = max(0, k - u2, k - t_max), min(t_max, u1, k)
    else:
        c = (lam * s1 + cfg.pi_2 - lam * s2 - cfg.pi_1) / lp
        u2 = (lam * s2 + cfg.pi_1 - cfg.pi_12) / lp
        w1 = (lam * s1 + cfg.pi_none - cfg.pi_1) / lp
        lo, hi = max(0, u2 + c, c), min(t_max, w1, t_max + c)
    return max(F(0), hi - lo)


def test_shape_vcg_slice_crossing(vcg_spec):
    assert shape_classify(VCG(), vcg_spec, (1, 1)).kind == "Crossing"


def test_shape_onedim_bundling():
    sc = shape_classify(OneDimensional2x2("bundling"), None, (1, 1))
    assert sc.kind == "QuasiBundling" and len(sc.witnesses) > 60


def test_shape_affine_examples():
    assert shape_classify(AffineMinimizer2x2(AffineMinimizerConfig2x2(1, 2, 0, 1)), None, (1, 1)).kind == "QuasiBundling"
    assert shape_classify(AffineMinimizer2x2(AffineMinimizerConfig2x2(1, 2, 1, 0)), None, (1, 1)).kind == "QuasiFlipping"


def test_shape_random_affine_never_crossing():
    rng = random.Random(11)
    checked = 0
    for _ in range(100):
        mech = random_affine(rng)
        t_max, grid = F(4), 64
        if segment_length(mech.cfg, 1, 1, t_max) < 4 * t_max / grid:
            continue
        want = "QuasiBundling" if mech.cfg.bundle_bias > 0 else "QuasiFlipping"
        assert shape_classify(mech, None, (1, 1), grid, t_max=t_max).kind == want
        checked += 1
    assert checked >= 50


def test_shape_grid_undecided():
    # a 1/2 boundary plus a 12/none boundary in the same window
    def fn(t1, t2, s1, s2):
        if t1 < 1:
            return Label.FIRST if t2 > t1 else Label.SECOND
        return Label.BOTH if t2 < 1 else Label.NONE

    with pytest.raises(GridUndecided):
        shape_classify(fn, None, (1, 1))
    with pytest.raises(ContractViolation):
        shape_classify(fn, None, (1, 1), grid=8)


# --- fits -------------------------------------------------------------------


def _samples(f, xs, tol=TOL):
    return [(x, PsiInterval(f(x) - tol / 2, f(x) + tol / 2)) for x in xs]


def test_fit_line():
    fit = fit_linear_boundary(_samples(lambda s: 2 * s - 1, [1, 2, 3, 4]))
    assert (fit.lam, fit.gamma) == (2, 1) and fit.residual <= TOL
    fit = fit_linear_boundary(_samples(lambda s: s, [F(1, 2), 1, 2, 4]))
    assert (fit.lam, fit.gamma, fit.residual) == (1, 0, 0)


def test_fit_concave_tail_has_residual():
    zeta = BoundaryTable(((0, 0), (F(1, 4), F(1, 2)), (1, F(3, 4)), (4, 1)))
    fit = fit_linear_boundary(_samples(zeta, [F(1, 16), F(1, 8), F(1, 4), F(1, 2), 1, 2]))
    assert fit.residual > TOL


def test_fit_degenerate():
    never = PsiInterval(F(0), F(1, 10**6), "never")
    with pytest.raises(DegenerateFit):
        fit_linear_boundary([(1, never), (2, never), (3, never)])
    with pytest.raises(DegenerateFit):
        fit_linear_boundary(_samples(lambda s: s, [1, 2]))


@given(st.lists(st.tuples(st.integers(1, 40), st.integers(0, 40)), min_size=3, max_size=8, unique_by=lambda p: p[0]))
def test_minimax_line_is_optimal(pts):
    pts = [(F(x), F(y)) for x, y in pts]
    slope, icpt, err = minimax_line(pts)
    assert max(abs(y - slope * x - icpt) for x, y in pts) == err
    # no pairwise-slope line does better
    for (x0, y0) in pts:
        for (x1, y1) in pts:
            if x0 != x1:
                m = (y1 - y0) / (x1 - x0)
                r = [y - m * x for x, y in pts]
                assert (max(r) - min(r)) / 2 >= err


# --- diagnostics ------------------------------------------------------------


def test_lipschitz_cases(vcg_spec):
    ctx = [F(1, 4), F(1, 2), 1, 2]
    assert lipschitz_probe(VCG(), vcg_spec, 1, (1, 1), ctx).passed
    aff = AffineMinimizer2x2(AffineMinimizerConfig2x2(1, 2, 0, 1))
    assert lipschitz_probe(aff, None, 1, (1, 1), ctx).passed
    fake = lambda t1, t2, s1, s2: Label.from_tasks(t1 <= 2 * t2, t2 <= s2)  # noqa: E731
    res = lipschitz_probe(fake, None, 1, (1, 1), ctx)
    assert not res.passed and res.breach is not None


@pytest.mark.parametrize("lam, want", [(F(1), 2), (F(3), 4), (F(1, 4), 5)])
def test_ratio_probe(lam, want):
    c = ConstantsProfile.build(3)
    assert ratio_probe_from_lambda(BoundaryFit(lam, F(0), F(0)), c) == want - c.delta_prime


def test_ratio_probe_premise():
    c = ConstantsProfile.build(3)
    assert ratio_probe_from_lambda(BoundaryFit(F(1), F(2), F(0)), c) is None


# --- classification ---------------------------------------------------------


def test_classify_vcg_slice(vcg_spec):
    r = classify_2x2(VCG(), vcg_spec)
    assert r.cls == "TaskIndependent"
    for key, iv in r.evidence["psi"].items():
        s = F(key.split("=")[1])
        assert abs(F(iv["lo"]) - s) <= 2 * TOL


def test_classify_affine_example():
    r = classify_2x2(AffineMinimizer2x2(AffineMinimizerConfig2x2(1, 2, 0, 1)))
    assert r.cls == "AffineMinimizer"
    assert abs(F(r.evidence["lambda"]) - 2) <= F(1, 10**4)


def test_classify_simple_classes():
    assert classify_2x2(OneDimensional2x2("bundling")).cls == "OneDimensional"
    r = classify_2x2(Constant2x2(Label.SECOND))
    assert r.cls == "Constant" and r.evidence["fixed"] == "2"


@pytest.mark.parametrize("cls, name", [
    ("taskind2", "TaskIndependent"),
    ("relaxed-affmin2", "RelaxedAffineMinimizer"),
    ("affmin2", "AffineMinimizer"),
])
def test_classify_random_configs(cls, name):
    rng = random.Random(99)
    for _ in range(3):
        assert classify_2x2(GENERATORS_2X2[cls](rng)).cls == name


def test_classify_budget_guard():
    with pytest.raises(ContractViolation):
        classify_2x2(Constant2x2(), budget=10)
    r = classify_2x2(AffineMinimizer2x2(AffineMinimizerConfig2x2(1, 2, 0, 1)), budget=1000)
    assert r.cls == "Unknown" and "stopped" in r.evidence


@pytest.mark.parametrize("band", [(1, 2), (1, 3)])
def test_classify_breach_is_unknown(band):
    lo, hi = band
    fn = lambda t1, t2, s1, s2: Label.from_tasks(lo <= t1 <= hi, t2 <= s2 and s1 > 1)  # noqa: E731
    assert classify_2x2(fn).cls == "Unknown"


def test_as_slice_requires_spec():
    with pytest.raises(ContractViolation):
        as_slice(VCG())
    base = random_clustered(random.Random(0), 3, 1)
    assert SliceSpec(base, 0, 1).sibling and not SliceSpec(base, 0, 2).sibling
