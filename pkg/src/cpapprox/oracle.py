"""Exact brute-force laws and inequality checks used to verify the bounds.

Everything here is computed exactly (up to float rounding and explicitly
tracked truncation): run-count laws by dynamic programming or by full
enumeration, sums by convolution, and joint laws by listing atoms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .bounds import (
    BernoulliProfile,
    IndepProfile,
    ub_cp_independent,
    ub_cp_kdep_general,
    ub_cp_kdep_moments,
    ub_po_bernoulli,
)
from .metrics import tv_distance, zeta2
from .pmf import (
    DEFAULT_EPS,
    CompoundSpec,
    IntPmf,
    bernoulli_pmf,
    compound_poisson_pmf,
    convolve,
    poisson_binomial_pmf,
    poisson_pmf,
    polya_aeppli_pmf,
    zero_inflate,
)
from .runs import RunsConfig, run_indicator_profile, runs_po_bound, total_pa_bound
from .smoothness import numeric_delta2_l1, poisson_delta2_l1_exact

DEFAULT_SEED = 20240917
DEFAULT_CASES = 200
RUN_COUNT_CAP = 500
ENUMERATION_CAP = 22
JOINT_ATOM_CAP = 10_000
# slack for comparisons between independently rounded exact quantities
ROUNDING_SLACK = 1e-12


class CheckResult(NamedTuple):
    lhs: float
    rhs: float
    holds: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


# --- joint laws -----------------------------------------------------------


@dataclass(frozen=True)
class JointPmf:
    """Finite joint law of an integer vector: row ``points[r]`` has mass ``probs[r]``."""

    points: np.ndarray
    probs: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.int64)
        pr = np.asarray(self.probs, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] != pr.size:
            raise ValueError("points must be (m, d) with one prob per row")
        if np.any(pr < 0) or not np.all(np.isfinite(pr)):
            raise ValueError("probabilities must be finite and non-negative")
        if abs(math.fsum(pr) - 1.0) > 1e-12:
            raise ValueError("joint probabilities must sum to 1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "probs", pr)

    @classmethod
    def from_pairs(cls, entries: Sequence[tuple[Sequence[int], float]]) -> JointPmf:
        pts = [list(pt) for pt, _ in entries]
        return cls(np.array(pts, dtype=np.int64), np.array([w for _, w in entries]))

    @classmethod
    def independent(cls, laws: Sequence[IntPmf]) -> JointPmf:
        """Product law of independent coordinates."""
        grids = np.meshgrid(*[law.support for law in laws], indexing="ij")
        weights = np.ones(grids[0].shape)
        for axis, law in enumerate(laws):
            shape = [1] * len(laws)
            shape[axis] = law.probs.size
            weights = weights * law.probs.reshape(shape)
        pts = np.stack([g.ravel() for g in grids], axis=1)
        w = weights.ravel()
        return cls(pts, w / math.fsum(w))

    @classmethod
    def from_bits(cls, bit_ps: Sequence[float], func: Callable[[np.ndarray], np.ndarray]) -> JointPmf:
        """Law of ``func(Z)`` for independent Bernoulli bits Z_j ~ Bern(bit_ps[j]).

        ``func`` maps a (2^b, b) 0/1 array to a (2^b, d) integer array.
        """
        b = len(bit_ps)
        codes = np.arange(1 << b, dtype=np.int64)
        bits = (codes[:, None] >> np.arange(b)) & 1
        ps = np.asarray(bit_ps, dtype=np.float64)
        w = np.prod(np.where(bits == 1, ps, 1.0 - ps), axis=1)
        return cls(func(bits), w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def _law_of(self, values: np.ndarray) -> IntPmf:
        lo = int(values.min())
        acc = np.bincount(values - lo, weights=self.probs)
        return IntPmf(lo, acc)

    def marginal(self, i: int) -> IntPmf:
        return self._law_of(self.points[:, i])

    def sum_law(self, cols: Sequence[int] | None = None) -> IntPmf:
        cols = list(range(self.dim)) if cols is None else list(cols)
        if not cols:
            return IntPmf.point_mass(0)
        return self._law_of(self.points[:, cols].sum(axis=1))

    def expect(self, values: np.ndarray) -> float:
        return math.fsum(self.probs * values)

    def mean(self, i: int) -> float:
        return self.expect(self.points[:, i].astype(np.float64))

    def cross_moment(self, i: int, j: int) -> float:
        return self.expect((self.points[:, i] * self.points[:, j]).astype(np.float64))

    def is_independent(self, left: Sequence[int], right: Sequence[int], tol: float = 1e-12) -> bool:
        """Whether the sub-vectors on ``left`` and ``right`` columns are independent."""
        left, right = list(left), list(right)
        if not left or not right:
            return True
        _, li = np.unique(self.points[:, left], axis=0, return_inverse=True)
        _, ri = np.unique(self.points[:, right], axis=0, return_inverse=True)
        li, ri = li.ravel(), ri.ravel()
        table = np.zeros((li.max() + 1, ri.max() + 1))
        np.add.at(table, (li, ri), self.probs)
        outer = np.outer(table.sum(axis=1), table.sum(axis=0))
        return bool(np.max(np.abs(table - outer)) <= tol)


# --- run counts -----------------------------------------------------------


def exact_run_count_pmf(cfg: RunsConfig, cap: int = RUN_COUNT_CAP) -> IntPmf:
    """Exact law of the number of overlapping k-runs in n Bernoulli(p) trials.

    Dynamic programming over (current streak capped at k-1, runs so far).
    After a success at streak k-1 a run is completed and the streak stays at
    k-1, because the next success completes the next overlapping run.
    """
    if cfg.n > cap:
        raise ValueError(f"n = {cfg.n} exceeds the cap {cap}")
    n, k, p, q = cfg.n, cfg.k, cfg.p, cfg.q
    top = n - k + 1
    dist = np.zeros((k, top + 1))
    dist[0, 0] = 1.0
    for _ in range(n):
        nxt = np.zeros_like(dist)
        nxt[0] = q * dist.sum(axis=0)
        if k > 1:
            nxt[1:k] += p * dist[0 : k - 1]
            nxt[k - 1, 1:] += p * dist[k - 1, :-1]
        else:
            nxt[0, 1:] += p * dist[0, :-1]
        dist = nxt
    return IntPmf(0, dist.sum(axis=0))


def _run_counts(codes: np.ndarray, n: int, k: int) -> np.ndarray:
    starts = codes.copy()
    for s in range(1, k):
        starts &= codes >> s
    starts &= (1 << (n - k + 1)) - 1
    return np.bitwise_count(starts).astype(np.int64)


def enumerate_run_count_pmf(cfg: RunsConfig) -> IntPmf:
    """Same law as :func:`exact_run_count_pmf`, by summing over all 2^n outcomes."""
    if cfg.n > ENUMERATION_CAP:
        raise ValueError(f"enumeration needs n <= {ENUMERATION_CAP}")
    n, k = cfg.n, cfg.k
    codes = np.arange(1 << n, dtype=np.uint64)
    ones = np.bitwise_count(codes).astype(np.int64)
    weights = np.exp(ones * math.log(cfg.p) + (n - ones) * math.log(cfg.q))
    counts = _run_counts(codes, n, k)
    probs = np.zeros(n - k + 2)
    order = np.argsort(counts, kind="stable")
    counts, weights = counts[order], weights[order]
    bounds = np.searchsorted(counts, np.arange(n - k + 3))
    for c in range(n - k + 2):
        probs[c] = math.fsum(weights[bounds[c] : bounds[c + 1]])
    return IntPmf(0, probs)


def run_indicator_joint(k: int, p: float, count: int) -> JointPmf:
    """Joint law of ``count`` consecutive run indicators X_j = Z_j ... Z_{j+k-1}."""
    nbits = count + k - 1

    def indicators(bits):
        out = np.ones((bits.shape[0], count), dtype=np.int64)
        for s in range(k):
            out &= bits[:, s : s + count]
        return out

    return JointPmf.from_bits([p] * nbits, indicators)


def compound_poisson_direct(spec: CompoundSpec, eps: float = DEFAULT_EPS) -> IntPmf:
    """CP law as a Poisson mixture of convolution powers, sum_n Po(n) F^{*n}.

    Independent of the recursive construction in :mod:`cpapprox.pmf`.
    """
    lam, sev = spec.rate, spec.compounding
    counts = poisson_pmf(lam, eps / 2.0)
    parts, weights = [], []
    power = IntPmf.point_mass(0)
    for n in range(counts.support_max + 1):
        if n > 0:
            power = convolve(power, sev)
        w = counts(n)
        if w > 0:
            parts.append(power)
            weights.append(w)
    hi = max(part.support_max for part in parts)
    acc = np.zeros(hi + 1)
    for w, part in zip(weights, parts):
        acc += w * part.dense(0, hi)
    return IntPmf(0, acc)


# --- lemma checks ---------------------------------------------------------


def _close_or_below(lhs: float, rhs: float, slack: float) -> bool:
    return lhs <= rhs + slack


def check_smoothing_inequality(x: IntPmf, y: IntPmf, z: IntPmf) -> CheckResult:
    """d_TV(X+Z, Y+Z) <= 1/2 ||Δ²f_Z||_1 zeta2(X, Y) for Z independent of X, Y."""
    tv = tv_distance(convolve(x, z), convolve(y, z))
    zt = zeta2(x, y)
    rhs = 0.5 * numeric_delta2_l1(z) * zt.value
    slack = tv.error_bar + 2.0 * zt.error_bar + ROUNDING_SLACK
    return CheckResult(tv.value, rhs, _close_or_below(tv.value, rhs, slack))


def check_product_coupling(x: IntPmf, y: IntPmf, z: IntPmf, w: IntPmf) -> CheckResult:
    """|d_TV(Z+X, Z+Y) - d_TV(W+X, W+Y)| <= 2 d_TV(X, Y) d_TV(Z, W)."""
    a = tv_distance(convolve(z, x), convolve(z, y))
    b = tv_distance(convolve(w, x), convolve(w, y))
    dxy, dzw = tv_distance(x, y), tv_distance(z, w)
    lhs = abs(a.value - b.value)
    rhs = 2.0 * dxy.value * dzw.value
    slack = a.error_bar + b.error_bar + 2.0 * (dxy.error_bar + dzw.error_bar) + ROUNDING_SLACK
    return CheckResult(lhs, rhs, _close_or_below(lhs, rhs, slack))


def check_shift_inequality(x: IntPmf, y: IntPmf, w: IntPmf) -> CheckResult:
    """d_TV(X, Y) <= (1 - 2P(W != 0))^{-1} d_TV(X+W, Y+W) when P(W != 0) < 1/2."""
    nonzero = 1.0 - w(0)
    if nonzero >= 0.5:
        raise ValueError("the shift inequality needs P(W != 0) < 1/2")
    lhs = tv_distance(x, y)
    shifted = tv_distance(convolve(x, w), convolve(y, w))
    factor = 1.0 / (1.0 - 2.0 * nonzero)
    rhs = factor * shifted.value
    slack = lhs.error_bar + factor * shifted.error_bar + ROUNDING_SLACK
    return CheckResult(lhs.value, rhs, _close_or_below(lhs.value, rhs, slack))


def sum_law(profile: IndepProfile) -> IntPmf:
    """Exact law of sum X_i for an independent profile, by convolution."""
    acc = IntPmf.point_mass(0)
    for p, g in zip(profile.ps, profile.severities):
        acc = convolve(acc, zero_inflate(p, g))
    return acc


def check_zeta2_cp_identity(profile: IndepProfile, eps: float = DEFAULT_EPS) -> CheckResult:
    """zeta2(L sum X_i, CP(lam, F)) = 1/2 sum_i (E X_i)^2 for independent X_i."""
    if len(profile.ps) > 8 or any(g.support_max > 5 for g in profile.severities):
        raise ValueError("identity check is limited to n <= 8 and severities on {1..5}")
    rhs = 0.5 * math.fsum(profile.sq_means)
    lam = profile.lam
    if lam == 0:
        return CheckResult(0.0, rhs, rhs == 0.0)
    cp = compound_poisson_pmf(CompoundSpec(lam, profile.compounding()), eps)
    z = zeta2(sum_law(profile), cp)
    return CheckResult(z.value, rhs, abs(z.value - rhs) <= z.error_bar + 1e-9)


def check_zeta2_coupling(joint: JointPmf, k: int) -> CheckResult:
    """Window bound for a k-dependent vector (X_l, ..., X_i) = the columns of ``joint``.

    zeta2(L sum_j X_j, L(sum_{j<i} X_j + X_i')) <= sum_{j=i-k+1}^{i-1} (E X_i X_j + E X_i E X_j),
    X_i' an independent copy of the last coordinate.  Needs at least k columns
    and the last coordinate independent of those at distance >= k.
    """
    if joint.size > JOINT_ATOM_CAP:
        raise ValueError(f"joint law has more than {JOINT_ATOM_CAP} atoms")
    d = joint.dim
    if d < k:
        raise ValueError("need at least k coordinates")
    last = d - 1
    if not joint.is_independent(range(0, d - k), [last]):
        raise ValueError("last coordinate is not independent of coordinates at distance >= k")
    whole = joint.sum_law()
    swapped = convolve(joint.sum_law(range(last)), joint.marginal(last))
    lhs = zeta2(whole, swapped)
    mu_i = joint.mean(last)
    rhs = math.fsum(joint.cross_moment(last, j) + mu_i * joint.mean(j) for j in range(max(0, d - k), last))
    return CheckResult(lhs.value, rhs, _close_or_below(lhs.value, rhs, lhs.error_bar + 1e-9))


def check_zeta2_lemma(joint: JointPmf) -> CheckResult:
    """|zeta2(X+Z, Y+Z) - zeta2(X+W, Y+W)| <= E|(X-Y)(Z-W)| for columns (X, Y, Z, W), E X = E Y."""
    if joint.dim != 4:
        raise ValueError("joint law must have columns (X, Y, Z, W)")
    a = zeta2(joint.sum_law([0, 2]), joint.sum_law([1, 2]))
    b = zeta2(joint.sum_law([0, 3]), joint.sum_law([1, 3]))
    x, y, z, w = joint.points.T
    rhs = joint.expect(np.abs((x - y) * (z - w)).astype(np.float64))
    lhs = abs(a.value - b.value)
    return CheckResult(lhs, rhs, _close_or_below(lhs, rhs, a.error_bar + b.error_bar + 1e-9))


# --- random instance generators -------------------------------------------


def random_pmf(rng: np.random.Generator, lo: int, hi: int, alpha: float = 0.7) -> IntPmf:
    return IntPmf(lo, rng.dirichlet(np.full(hi - lo + 1, alpha)))


def equal_mean_pair(rng: np.random.Generator, hi: int = 6) -> tuple[IntPmf, IntPmf]:
    """Two random laws on {0..hi}; the second is mixed with a point mass at 0 or hi to match means."""
    x = rng.dirichlet(np.full(hi + 1, 0.7))
    y = rng.dirichlet(np.full(hi + 1, 0.7))
    support = np.arange(hi + 1)
    mx, my = float(x @ support), float(y @ support)
    target = 0 if my > mx else hi
    t = (my - mx) / (my - target) if my != mx else 0.0
    y = (1.0 - t) * y
    y[target] += t
    return IntPmf(0, x), IntPmf(0, y)


def random_shift_law(rng: np.random.Generator, hi: int = 5) -> IntPmf:
    w0 = rng.uniform(0.6, 1.0)
    rest = rng.dirichlet(np.full(hi, 0.7)) * (1.0 - w0)
    return IntPmf(0, np.concatenate(([w0], rest)))


def random_indep_profile(rng: np.random.Generator, n: int, max_p: float, max_value: int) -> IndepProfile:
    laws = []
    for _ in range(n):
        sev = random_pmf(rng, 1, max_value)
        laws.append(zero_inflate(rng.uniform(0.0, max_p), sev))
    return IndepProfile.from_marginals(laws)


def random_kdep_joint(rng: np.random.Generator, d: int, k: int, max_value: int = 3) -> JointPmf:
    """X_j = h_j(Z_j, ..., Z_{j+k-1}) with random tables h_j and random bit probabilities."""
    bit_ps = rng.uniform(0.1, 0.9, size=d + k - 1)
    tables = rng.integers(0, max_value + 1, size=(d, 1 << k))
    weights = 1 << np.arange(k)

    def func(bits):
        cols = [tables[j][bits[:, j : j + k] @ weights] for j in range(d)]
        return np.stack(cols, axis=1)

    return JointPmf.from_bits(bit_ps, func)


def random_lemma_joint(rng: np.random.Generator, hi: int = 3) -> JointPmf:
    """Random dependent (X, Y, Z, W) on {0..hi}^4 with E X = E Y."""
    atoms = int(rng.integers(2, 12))
    pts = rng.integers(0, hi + 1, size=(atoms, 4))
    w = rng.dirichlet(np.ones(atoms))
    gap = float(w @ (pts[:, 0] - pts[:, 1]))
    if gap != 0.0:
        fix = np.array([[0, hi, 0, 0]] if gap > 0 else [[hi, 0, 0, 0]])
        fix[0, 2:] = rng.integers(0, hi + 1, size=2)
        t = abs(gap) / (abs(gap) + hi)
        pts = np.vstack([pts, fix])
        w = np.concatenate([(1.0 - t) * w, [t]])
    return JointPmf(pts, w / math.fsum(w))


# --- suites ---------------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    results: list

    @property
    def failures(self) -> int:
        return sum(1 for r in self.results if not r.holds)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        ratios = [r.lhs / r.rhs for r in self.results if r.rhs > 0]
        return {
            "name": self.name,
            "cases": len(self.results),
            "failures": self.failures,
            "passed": self.passed,
            "max_lhs_over_rhs": max(ratios) if ratios else 0.0,
        }


def _case_rngs(seed: int, cases: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(cases)]


def smoothing_suite(seed: int = DEFAULT_SEED, cases: int = DEFAULT_CASES) -> SuiteResult:
    z = poisson_pmf(3.0)
    out = []
    for rng in _case_rngs(seed, cases):
        x, y = equal_mean_pair(rng)
        out.append(check_smoothing_inequality(x, y, z))
    return SuiteResult("smoothing", out)


def product_coupling_suite(seed: int = DEFAULT_SEED, cases: int = DEFAULT_CASES) -> SuiteResult:
    out = []
    for rng in _case_rngs(seed + 1, cases):
        x, y, z, w = (random_pmf(rng, 0, 5) for _ in range(4))
        out.append(check_product_coupling(x, y, z, w))
    return SuiteResult("product_coupling", out)


def shift_suite(seed: int = DEFAULT_SEED, cases: int = DEFAULT_CASES) -> SuiteResult:
    out = []
    for rng in _case_rngs(seed + 2, cases):
        x, y = random_pmf(rng, 0, 5), random_pmf(rng, 0, 5)
        out.append(check_shift_inequality(x, y, random_shift_law(rng)))
    return SuiteResult("shift", out)


def zeta2_identity_suite(seed: int = DEFAULT_SEED, cases: int = 20) -> SuiteResult:
    out = []
    for rng in _case_rngs(seed + 3, cases):
        n = int(rng.integers(1, 9))
        out.append(check_zeta2_cp_identity(random_indep_profile(rng, n, 0.6, 5)))
    return SuiteResult("zeta2_cp_identity", out)


def zeta2_coupling_cases() -> list[tuple[str, JointPmf, int]]:
    """Deterministic enumerated cases for the k-dependent window bound."""
    cases = [
        ("independent", JointPmf.independent([bernoulli_pmf(0.3), bernoulli_pmf(0.6), bernoulli_pmf(0.2)]), 1),
        ("runs of 2 on 3 flips", run_indicator_joint(2, 0.5, 2), 2),
        ("comonotone pair", JointPmf.from_pairs([((0, 0), 0.8), ((1, 1), 0.2)]), 2),
    ]
    for k in (2, 3, 4):
        for p in (0.2, 0.5, 0.8):
            for count in (k, 2 * k - 1):
                cases.append((f"run indicators k={k} p={p} window={count}", run_indicator_joint(k, p, count), k))
    return cases


def zeta2_coupling_suite(seed: int = DEFAULT_SEED, cases: int = 40) -> SuiteResult:
    out = [check_zeta2_coupling(joint, k) for _, joint, k in zeta2_coupling_cases()]
    for rng in _case_rngs(seed + 4, cases):
        k = int(rng.integers(1, 4))
        d = int(rng.integers(k, k + 4))
        out.append(check_zeta2_coupling(random_kdep_joint(rng, d, k), k))
    return SuiteResult("zeta2_coupling", out)


def zeta2_lemma_suite(seed: int = DEFAULT_SEED, cases: int = DEFAULT_CASES) -> SuiteResult:
    out = [check_zeta2_lemma(random_lemma_joint(rng)) for rng in _case_rngs(seed + 5, cases)]
    return SuiteResult("zeta2_lemma", out)


def lemma_suites(seed: int = DEFAULT_SEED) -> list[SuiteResult]:
    return [
        smoothing_suite(seed),
        product_coupling_suite(seed),
        shift_suite(seed),
        zeta2_identity_suite(seed),
        zeta2_coupling_suite(seed),
        zeta2_lemma_suite(seed),
    ]


def independent_dominance_suite(
    seed: int = DEFAULT_SEED, bernoulli_cases: int = 100, integer_cases: int = 50, eps: float = DEFAULT_EPS
) -> tuple[SuiteResult, SuiteResult]:
    """Exact d_TV of independent sums against the Poisson and compound Poisson bounds."""
    bern = []
    for rng in _case_rngs(seed + 6, bernoulli_cases):
        ps = rng.uniform(0.0, 0.2, size=int(rng.integers(1, 13)))
        report = ub_po_bernoulli(BernoulliProfile(tuple(ps)))
        lam = float(ps.sum())
        if lam == 0:
            bern.append(CheckResult(0.0, report.total, True))
            continue
        tv = tv_distance(poisson_binomial_pmf(ps), poisson_pmf(lam, eps))
        bern.append(CheckResult(tv.value, report.total, tv.value <= report.total + tv.error_bar))
    integer = []
    for rng in _case_rngs(seed + 7, integer_cases):
        profile = random_indep_profile(rng, int(rng.integers(1, 13)), 0.2, 3)
        cp = compound_poisson_pmf(CompoundSpec(profile.lam, profile.compounding()), eps)
        report = ub_cp_independent(profile, numeric_delta2_l1(cp), "numeric")
        tv = tv_distance(sum_law(profile), cp)
        integer.append(CheckResult(tv.value, report.total, tv.value <= report.total + tv.error_bar))
    return SuiteResult("independent_poisson", bern), SuiteResult("independent_compound_poisson", integer)


RUNS_GRID_N = (20, 60, 120, 200)
RUNS_GRID_K = (2, 3, 4, 5)
RUNS_GRID_P = (0.05, 0.1, 0.2, 0.3)


@dataclass(frozen=True)
class RunsDominance:
    cfg: RunsConfig
    target: str
    exact: float
    error_bar: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.exact <= self.bound + self.error_bar

    # CheckResult-compatible view for SuiteResult
    @property
    def lhs(self) -> float:
        return self.exact

    @property
    def rhs(self) -> float:
        return self.bound

    def to_dict(self) -> dict:
        return {
            "n": self.cfg.n,
            "k": self.cfg.k,
            "p": self.cfg.p,
            "target": self.target,
            "exact": self.exact,
            "error_bar": self.error_bar,
            "bound": self.bound,
            "holds": self.holds,
        }


def runs_dominance_suite(cap: int = RUN_COUNT_CAP, eps: float = DEFAULT_EPS) -> SuiteResult:
    """Exact run-count distances against the Poisson and Pólya–Aeppli bounds on the grid.

    Instances with m >= ln 2 on a given route, or with n above ``cap``, are skipped.
    """
    out = []
    for n in RUNS_GRID_N:
        if n > cap:
            continue
        for k in RUNS_GRID_K:
            for p in RUNS_GRID_P:
                cfg = RunsConfig(n, k, p)
                law = exact_run_count_pmf(cfg, cap)
                po = runs_po_bound(cfg)
                if po.valid:
                    tv = tv_distance(law, poisson_pmf(cfg.lam_po, eps))
                    out.append(RunsDominance(cfg, "poisson", tv.value, tv.error_bar, po.total))
                pa = total_pa_bound(cfg, eps=eps)
                if pa.valid:
                    tv = tv_distance(law, polya_aeppli_pmf(cfg.lam_cp, p, eps))
                    out.append(RunsDominance(cfg, "polya_aeppli", tv.value, tv.error_bar, pa.total))
    return SuiteResult("runs_dominance", out)


# --- exact inputs for the general k-dependent bound on runs ---------------


def runs_general_inputs(cfg: RunsConfig, eps: float = DEFAULT_EPS) -> tuple[list[float], list[float], list[float]]:
    """(zeta_terms, dtv_prefix_terms, window_joint) for run indicators, computed exactly.

    zeta terms use the joint law of at most 2k-1 consecutive indicators, the
    prefix distances use the run-count DP against a Poisson law, and the
    window probabilities come from the same enumerated joint laws.
    """
    k, p = cfg.k, cfg.p
    pk = p**k
    nv = cfg.windows
    zeta_terms, prefix, window = [], [], []
    joints: dict[int, JointPmf] = {}
    noise = poisson_pmf(pk, eps)
    for i in range(nv):
        count = min(i, 2 * k - 2) + 1
        if count not in joints:
            joints[count] = run_indicator_joint(k, p, count)
        joint = joints[count]
        last = count - 1
        whole = joint.sum_law()
        replaced = convolve(joint.sum_law(range(last)), noise)
        zeta_terms.append(zeta2(whole, replaced).value)
        near = list(range(max(0, last - k + 1), last))
        if near:
            any_near = joint.points[:, near].sum(axis=1) > 0
            window.append(joint.expect((any_near & (joint.points[:, last] > 0)).astype(np.float64)))
        else:
            window.append(0.0)
        t = i - 3 * k + 3
        if t > 0:
            sub = RunsConfig(t + k - 1, k, p)
            prefix.append(tv_distance(exact_run_count_pmf(sub), poisson_pmf(t * pk, eps)).value)
        else:
            prefix.append(0.0)
    return zeta_terms, prefix, window


def runs_general_bound(cfg: RunsConfig, eps: float = DEFAULT_EPS):
    """Master k-dependent bound on runs with exact inputs and the exact Poisson norm."""
    zt, dp, wj = runs_general_inputs(cfg, eps)
    norm = poisson_delta2_l1_exact(cfg.lam_po)
    return ub_cp_kdep_general([cfg.p**cfg.k] * cfg.windows, cfg.k, zt, dp, wj, norm, "exact_poisson")


def runs_moment_bound(cfg: RunsConfig):
    """Moment-form k-dependent bound on runs with the exact Poisson norm."""
    norm = poisson_delta2_l1_exact(cfg.lam_po)
    return ub_cp_kdep_moments(run_indicator_profile(cfg), norm, "exact_poisson")
