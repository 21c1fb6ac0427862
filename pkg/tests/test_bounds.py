import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpapprox.bounds import (
    BernoulliProfile,
    BoundReport,
    IndepProfile,
    LocalDepProfile,
    kdep_m,
    ub_cp_independent,
    ub_cp_kdep_general,
    ub_cp_kdep_moments,
    ub_cp_kdep_quadrant,
    ub_po_bernoulli,
    ub_po_iid_refined,
)
from cpapprox.metrics import tv_distance
from cpapprox.oracle import exact_run_count_pmf, random_indep_profile, runs_general_inputs, sum_law
from cpapprox.pmf import (
    CompoundSpec,
    IntPmf,
    bernoulli_pmf,
    compound_poisson_pmf,
    poisson_binomial_pmf,
    poisson_pmf,
)
from cpapprox.runs import RunsConfig, declumped_profile, run_indicator_profile, runs_cp_norm
from cpapprox.smoothness import numeric_delta2_l1, poisson_delta2_l1_exact

LN2 = math.log(2)


def _bernoulli_indep(ps):
    return IndepProfile.from_marginals([bernoulli_pmf(p) for p in ps])


def _consistent(rep: BoundReport):
    assert abs(rep.total - (rep.c_term + rep.smooth_term)) <= 1e-12


def test_indep_all_zero():
    rep = ub_cp_independent(_bernoulli_indep([0.0] * 5), 4.0)
    assert rep.total == 0.0 and rep.valid


def test_indep_ten_tenths():
    norm = 3 * math.exp(-1)
    rep = ub_cp_independent(_bernoulli_indep([0.1] * 10), norm)
    assert rep.c_term == pytest.approx(0.01, rel=1e-12)
    assert rep.total == pytest.approx(0.01 + 0.2759095 * (0.1 / 0.8096748), abs=1e-7)
    assert rep.total == pytest.approx(0.044077, abs=1e-6)
    exact = tv_distance(poisson_binomial_pmf([0.1] * 10), poisson_pmf(1.0))
    assert exact.value <= rep.total
    _consistent(rep)


def test_po_bernoulli_examples():
    rep = ub_po_bernoulli(BernoulliProfile((0.1,)))
    expected = 1e-4 + 0.25 * poisson_delta2_l1_exact(0.1) * 0.01 / (2 * math.exp(-0.1) - 1)
    assert rep.total == pytest.approx(expected, rel=1e-14)
    assert rep.total >= 0.009516
    ps = [0.05, 0.1, 0.15]
    rep = ub_po_bernoulli(BernoulliProfile(tuple(ps)))
    assert tv_distance(poisson_binomial_pmf(ps), poisson_pmf(sum(ps))).value <= rep.total
    bad = ub_po_bernoulli(BernoulliProfile((0.7,)))
    assert not bad.valid and any("ln 2" in n for n in bad.notes)


def test_refined_iid_examples():
    rep = ub_po_iid_refined(100, 0.05)
    c = (2 * 0.0025 / 3) * (math.log(15 / 0.85) + 1) + 2 * 1.25e-4
    assert rep.c_term == pytest.approx(c, rel=1e-14)
    assert rep.valid and rep.notes
    assert ub_po_iid_refined(1000, 0.05).c_term < (1000 * 0.05**2) ** 2
    assert not ub_po_iid_refined(100, 0.4).valid
    assert not ub_po_iid_refined(5, 0.05).valid  # lambda = 0.25 < 1/3 + p
    exact = tv_distance(poisson_binomial_pmf([0.05] * 100), poisson_pmf(5.0)).value
    assert exact <= rep.total


def test_profile_validation():
    with pytest.raises(ValueError):
        IndepProfile((0.1,), (0.5,), (IntPmf.point_mass(1),))  # sq_means inconsistent
    with pytest.raises(ValueError):
        IndepProfile((0.1,), (0.01,), (IntPmf.point_mass(0),))  # severity at 0
    with pytest.raises(ValueError):
        LocalDepProfile(1, (0.1, 0.1), (0.1, 0.1), (0.01, 0.01), {(1, 0): 0.0}, {(1, 0): 0.5}, {},
                        (IntPmf.point_mass(1),) * 2)
    with pytest.raises(ValueError):
        LocalDepProfile(1, (0.1, 0.1), (0.1, 0.1), (0.01, 0.01), {(1, 0): -0.1}, {}, {},
                        (IntPmf.point_mass(1),) * 2)
    with pytest.raises(ValueError):
        LocalDepProfile(1, (0.1, 0.1), (0.1, 0.1), (0.01, 0.01), {(5, 0): 0.0}, {}, {},
                        (IntPmf.point_mass(1),) * 2)


def test_profiles_round_trip_json():
    ind = random_indep_profile(np.random.default_rng(1), 4, 0.3, 3)
    assert IndepProfile.from_dict(json.loads(json.dumps(ind.to_dict()))) == ind
    loc = run_indicator_profile(RunsConfig(12, 3, 0.3))
    back = LocalDepProfile.from_dict(json.loads(loc.to_json()))
    assert back == loc
    rep = ub_cp_kdep_moments(loc, 0.5)
    assert BoundReport.from_dict(json.loads(json.dumps(rep.to_dict()))) == rep
    assert "lambda" in rep.to_dict()


def _zero_local(n, k):
    return LocalDepProfile(k, (0.0,) * n, (0.0,) * n, (0.0,) * n, {}, {}, {}, (IntPmf.point_mass(1),) * n)


def test_kdep_all_zero():
    assert ub_cp_kdep_moments(_zero_local(6, 2), 3.0).total == 0.0
    assert ub_cp_kdep_quadrant(_zero_local(6, 2), 3.0).total == 0.0
    assert ub_cp_kdep_general([0.0] * 5, 2, [0.0] * 5, [0.0] * 5, [0.0] * 5, 3.0).total == 0.0


def _independent_local(ps):
    n = len(ps)
    return LocalDepProfile(1, tuple(ps), tuple(ps), tuple(p * p for p in ps), {}, {}, {}, (IntPmf.point_mass(1),) * n)


def test_kdep_independent_reduction():
    ps = [0.05, 0.1, 0.02, 0.08]
    norm = 1.3
    prof = _independent_local(ps)
    a = ub_cp_kdep_moments(prof, norm)
    m = max(ps)
    assert kdep_m(ps, 1) == pytest.approx(m, rel=1e-15)
    assert a.smooth_term == pytest.approx(norm / (2 * (2 * math.exp(-m) - 1)) * sum(0.5 * p * p for p in ps), rel=1e-14)
    b = ub_cp_kdep_quadrant(prof, norm)
    assert b.total == pytest.approx(a.total, rel=1e-14)


def test_runs_profile_dominates_exact():
    cfg = RunsConfig(60, 3, 0.1)
    norm = poisson_delta2_l1_exact(cfg.lam_po)
    rep = ub_cp_kdep_moments(run_indicator_profile(cfg), norm)
    exact = tv_distance(exact_run_count_pmf(cfg), poisson_pmf(cfg.lam_po))
    assert rep.valid
    assert exact.value <= rep.total


@pytest.mark.parametrize("n,k,p", [(30, 2, 0.2), (60, 3, 0.1), (100, 4, 0.3), (200, 5, 0.2)])
def test_quadrant_at_most_moments_on_associated_runs(n, k, p):
    cfg = RunsConfig(n, k, p)
    prof = run_indicator_profile(cfg)
    norm = poisson_delta2_l1_exact(cfg.lam_po)
    assert ub_cp_kdep_quadrant(prof, norm).total <= ub_cp_kdep_moments(prof, norm).total


def _hand_quadrant(n, k, p, norm):
    """1-based transcription of the covariance-form bound for truncated clump sizes."""
    q = 1 - p
    K = 2 * k
    nv = n - k + 1
    pi = q * p**k
    mu = p**k * (1 - p**k)

    def moment(i, j):  # E Y'_j Y'_i, j < i
        d = i - j
        if d <= k:
            return 0.0
        if d < K:
            return p ** (2 * k) * (1 - p ** (d - k)) * (1 - p**k)
        return mu * mu

    def joint(i, j):
        d = i - j
        return 0.0 if d <= k else pi * pi

    def cov(i, j):
        return moment(i, j) - mu * mu

    m = 0.0
    for i in range(1, nv + 1):
        m = max(m, sum(pi for j in range(max(1, i - 3 * K + 3), i + 1)))
    smooth_sum = 0.0
    for i in range(1, nv + 1):
        smooth_sum += sum(abs(cov(i, j)) for j in range(max(1, i - K + 1), i)) + 0.5 * mu * mu
    c = 0.0
    for i in range(1, nv + 1):
        first = 0.0
        for j in range(1, i - 3 * K + 3):
            first += sum(abs(cov(j, t)) for t in range(max(1, j - K + 1), j)) + 0.5 * mu * mu
        mid = sum(pi for j in range(max(1, i - 3 * K + 3), i - 2 * K + 2))
        second = 2 * sum(joint(i, j) + pi * pi for j in range(max(1, i - K + 1), i)) + pi * pi
        c += (2 * first + mid) * second
    c *= 2
    smooth = norm / (2 * (1 - 2 * (1 - math.exp(-m)))) * smooth_sum
    return c, smooth


@pytest.mark.parametrize("n,k,p", [(40, 2, 0.3), (80, 3, 0.4), (25, 2, 0.1)])
def test_declumped_quadrant_matches_hand_evaluation(n, k, p):
    cfg = RunsConfig(n, k, p)
    norm = runs_cp_norm(cfg)
    rep = ub_cp_kdep_quadrant(declumped_profile(cfg), norm)
    c, smooth = _hand_quadrant(n, k, p, norm)
    assert rep.c_term == pytest.approx(c, rel=1e-12)
    assert rep.smooth_term == pytest.approx(smooth, rel=1e-12)


def test_declumped_quadrant_infinite_when_m_exceeds_ln2():
    cfg = RunsConfig(80, 3, 0.5)
    rep = ub_cp_kdep_quadrant(declumped_profile(cfg), runs_cp_norm(cfg))
    assert not rep.valid and math.isinf(rep.smooth_term)


def test_general_with_window_bound_reproduces_moment_smooth_term():
    cfg = RunsConfig(50, 3, 0.2)
    prof = run_indicator_profile(cfg)
    k = prof.k
    terms = []
    for i in range(prof.n):
        w = sum(prof.cross_moments.get((i, j), 0.0) + prof.means[i] * prof.means[j] for j in range(max(0, i - k + 1), i))
        terms.append(w + 0.5 * prof.sq_means[i])
    norm = 0.7
    gen = ub_cp_kdep_general(prof.ps, k, terms, [0.0] * prof.n, [0.0] * prof.n, norm)
    assert gen.smooth_term == pytest.approx(ub_cp_kdep_moments(prof, norm).smooth_term, rel=1e-14)


@pytest.mark.parametrize("n,k,p", [(40, 2, 0.1), (60, 3, 0.1), (80, 4, 0.3)])
def test_general_with_exact_terms_at_most_moment_bound(n, k, p):
    cfg = RunsConfig(n, k, p)
    zt, dp, wj = runs_general_inputs(cfg)
    norm = poisson_delta2_l1_exact(cfg.lam_po)
    gen = ub_cp_kdep_general([p**k] * cfg.windows, k, zt, dp, wj, norm)
    mom = ub_cp_kdep_moments(run_indicator_profile(cfg), norm)
    assert gen.total <= mom.total
    exact = tv_distance(exact_run_count_pmf(cfg), poisson_pmf(cfg.lam_po)).value
    assert exact <= gen.total


def test_general_length_mismatch():
    with pytest.raises(ValueError):
        ub_cp_kdep_general([0.1, 0.1], 1, [0.0], [0.0, 0.0], [0.0, 0.0], 1.0)


def test_hypothesis_gating():
    assert ub_cp_independent(_bernoulli_indep([0.7, 0.1]), 1.0).valid is False
    assert ub_cp_independent(_bernoulli_indep([0.69, 0.1]), 1.0).valid is True
    heavy = _independent_local([0.7])
    assert not ub_cp_kdep_moments(heavy, 1.0).valid
    rep = ub_cp_kdep_moments(run_indicator_profile(RunsConfig(10, 2, 0.6)), 1.0)
    assert not rep.valid and math.isinf(rep.total)


def test_poisson_norm_mode_dominates_exact():
    # Bernoulli k-dependent profile with the Poisson norm bounds the distance to Po(lam)
    for n, k, p in [(30, 2, 0.15), (120, 4, 0.3)]:
        cfg = RunsConfig(n, k, p)
        norm = poisson_delta2_l1_exact(cfg.lam_po)
        for fn in (ub_cp_kdep_moments, ub_cp_kdep_quadrant):
            rep = fn(run_indicator_profile(cfg), norm)
            exact = tv_distance(exact_run_count_pmf(cfg), poisson_pmf(cfg.lam_po)).value
            assert exact <= rep.total


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_monotone_in_norm(seed, a, b):
    lo, hi = min(a, b), max(a, b)
    rng = np.random.default_rng(seed)
    ind = random_indep_profile(rng, 5, 0.3, 3)
    assert ub_cp_independent(ind, lo).total <= ub_cp_independent(ind, hi).total
    loc = run_indicator_profile(RunsConfig(int(rng.integers(5, 40)), int(rng.integers(1, 4)), rng.uniform(0.05, 0.5)))
    for fn in (ub_cp_kdep_moments, ub_cp_kdep_quadrant):
        assert fn(loc, lo).total <= fn(loc, hi).total


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 0.99), min_size=1, max_size=8))
def test_gating_exactly_at_ln2(ps):
    rep = ub_po_bernoulli(BernoulliProfile(tuple(ps)))
    assert rep.valid == all(p < LN2 for p in ps)
    if rep.valid:
        _consistent(rep)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_independent_dominance_property(seed):
    rng = np.random.default_rng(seed)
    prof = random_indep_profile(rng, int(rng.integers(1, 9)), 0.3, 4)
    if prof.lam == 0:
        return
    cp = compound_poisson_pmf(CompoundSpec(prof.lam, prof.compounding()))
    rep = ub_cp_independent(prof, numeric_delta2_l1(cp))
    exact = tv_distance(sum_law(prof), cp)
    assert exact.value <= rep.total + exact.error_bar
