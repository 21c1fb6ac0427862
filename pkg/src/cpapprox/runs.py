"""Poisson and compound Poisson bounds for the number of overlapping success runs.

Trials Z_1..Z_n are i.i.d. Bernoulli(p); X_i = Z_i Z_{i+1} ... Z_{i+k-1} marks a
run of length k starting at trial i, and the statistic is sum_i X_i.  The
compound Poisson route works with truncated clump sizes Y'_i (clumps of
overlapping runs starting at i, capped at k) which are 2k-dependent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bounds import BoundReport, LocalDepProfile, shift_factor
from .pmf import DEFAULT_EPS, CompoundSpec, IntPmf, compound_poisson_pmf, geometric_pmf, truncated_geometric_pmf
from .smoothness import NormMethod, numeric_delta2_l1, poisson_delta2_l1_exact

LN2 = math.log(2.0)
ASYMPTOTIC_NOTE = "asymptotic-only, not a certified bound"


@dataclass(frozen=True)
class RunsConfig:
    n: int
    k: int
    p: float
    q: float = field(init=False)

    def __post_init__(self) -> None:
        if int(self.n) != self.n or int(self.k) != self.k:
            raise ValueError("n and k must be integers")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))
        if self.k < 1 or self.n < self.k:
            raise ValueError("need 1 <= k <= n")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        object.__setattr__(self, "q", 1.0 - self.p)

    @property
    def windows(self) -> int:
        """Number of positions where a run can start, n - k + 1."""
        return self.n - self.k + 1

    @property
    def lam_po(self) -> float:
        """Expected number of runs, (n-k+1) p^k."""
        return self.windows * self.p**self.k

    @property
    def lam_cp(self) -> float:
        """Expected number of clumps, (n-k+1) q p^k."""
        return self.windows * self.q * self.p**self.k

    @property
    def m_po(self) -> float:
        return (3 * self.k - 2) * self.p**self.k

    @property
    def m_cp(self) -> float:
        return (6 * self.k - 2) * self.q * self.p**self.k


def _require_clumps(cfg: RunsConfig) -> None:
    if cfg.k < 2:
        raise ValueError("the declumped compound Poisson route needs k >= 2")


def _gate(m: float) -> list[str]:
    return [f"m = {m:.6g} >= ln 2"] if m >= LN2 else []


def _assemble(c_term, smooth_num, m, norm, method, lam, notes) -> BoundReport:
    violations = _gate(m)
    d = shift_factor(m)
    notes = list(notes)
    if d > 0:
        smooth = smooth_num / d
    else:
        smooth = math.inf
        notes.append("shift factor 1 - 2(1 - e^-m) is not positive; smooth term is infinite")
    if isinstance(method, NormMethod):
        method = method.value
    return BoundReport(c_term + smooth, c_term, smooth, norm, method, lam, not violations, notes + violations)


def runs_po_bound(cfg: RunsConfig) -> BoundReport:
    """UB_{n,p} = 4(lam² p²/q)(1 + q k p^{k-1}/lam)(1 + q k p^{k-1})
    + lam p ||Δ²f_Po(lam)||_1 / (2q(1 - 2(1 - e^{-m}))),  lam = (n-k+1)p^k, m = (3k-2)p^k.
    """
    n, k, p, q = cfg.n, cfg.k, cfg.p, cfg.q
    lam = cfg.lam_po
    norm = poisson_delta2_l1_exact(lam)
    a = q * k * p ** (k - 1)
    c_term = 4.0 * (lam * lam * p * p / q) * (1.0 + a / lam) * (1.0 + a)
    smooth_num = lam * p * norm / (2.0 * q)
    notes = [f"Poisson target with lambda = (n-k+1)p^k = {lam:.6g}"]
    return _assemble(c_term, smooth_num, cfg.m_po, norm, NormMethod.EXACT_POISSON, lam, notes)


def declumping_bound(cfg: RunsConfig) -> float:
    """Bound on P(Y != Y'): (n-2k+1)^+ q p^{2k} + 2p^{k+1}."""
    n, k, p, q = cfg.n, cfg.k, cfg.p, cfg.q
    return max(n - 2 * k + 1, 0) * q * p ** (2 * k) + 2.0 * p ** (k + 1)


def clump_severity(cfg: RunsConfig) -> IntPmf:
    """F_k: law of a truncated clump size, geometric(p) folded at k."""
    return truncated_geometric_pmf(cfg.p, cfg.k)


def runs_cp_norm(cfg: RunsConfig, eps: float = DEFAULT_EPS) -> float:
    """Numeric ||Δ²f_CP(lam, F_k)||_1 with lam = (n-k+1) q p^k."""
    law = compound_poisson_pmf(CompoundSpec(cfg.lam_cp, clump_severity(cfg)), eps)
    return numeric_delta2_l1(law)


def runs_cp_bound(cfg: RunsConfig, norm: float | None = None, eps: float = DEFAULT_EPS) -> BoundReport:
    """UB_{n,k} = (1 + 2/(3 lam))(6 lam k q p^k)²
    + (norm/4)/(1 - 2(1 - e^{-m})) (lam/q)(6k-3)p^k,  lam = (n-k+1)qp^k, m = (6k-2)qp^k.
    """
    _require_clumps(cfg)
    k, p, q = cfg.k, cfg.p, cfg.q
    lam = cfg.lam_cp
    method = "supplied"
    if norm is None:
        norm, method = runs_cp_norm(cfg, eps), NormMethod.NUMERIC
    pk = p**k
    c_term = (1.0 + 2.0 / (3.0 * lam)) * (6.0 * lam * k * q * pk) ** 2
    smooth_num = 0.25 * norm * (lam / q) * (6 * k - 3) * pk
    notes = [f"CP(lambda, F_k) target with lambda = (n-k+1)qp^k = {lam:.6g}"]
    return _assemble(c_term, smooth_num, cfg.m_cp, norm, method, lam, notes)


def runs_cp_bound_improved(cfg: RunsConfig, norm: float | None = None, eps: float = DEFAULT_EPS) -> BoundReport:
    """UB'_{n,k} = 12(1 + 1/(kq) + 2q²/lam)(lam k p^k)²
    + (norm/2)/(1 - 2(1 - e^{-m})) (1 + (1+p)/(2kq)) (lam/q) k p^k.

    Relies on the clump sizes being negatively quadrant dependent.
    """
    _require_clumps(cfg)
    k, p, q = cfg.k, cfg.p, cfg.q
    lam = cfg.lam_cp
    method = "supplied"
    if norm is None:
        norm, method = runs_cp_norm(cfg, eps), NormMethod.NUMERIC
    pk = p**k
    c_term = 12.0 * (1.0 + 1.0 / (k * q) + 2.0 * q * q / lam) * (lam * k * pk) ** 2
    smooth_num = 0.5 * norm * (1.0 + (1.0 + p) / (2.0 * k * q)) * (lam / q) * k * pk
    notes = [f"CP(lambda, F_k) target with lambda = (n-k+1)qp^k = {lam:.6g}", "uses NQD of declumped partial sums"]
    return _assemble(c_term, smooth_num, cfg.m_cp, norm, method, lam, notes)


def compounding_swap_bound(lam: float, cfg: RunsConfig) -> float:
    """d_TV(CP(lam, F_k), PA(lam, p)) <= lam d_TV(F_k, Geom(p)) = lam p^k."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return lam * cfg.p**cfg.k


def total_pa_bound(cfg: RunsConfig, norm: float | None = None, eps: float = DEFAULT_EPS) -> BoundReport:
    """Triangle bound on d_TV(run count, PA(lam, p)), lam = (n-k+1)qp^k.

    declumping + UB_{n,k} + lam p^k; the declumping and swap terms are folded
    into ``c_term``.
    """
    cp = runs_cp_bound(cfg, norm, eps)
    dec = declumping_bound(cfg)
    swap = compounding_swap_bound(cfg.lam_cp, cfg)
    notes = [
        f"Polya-Aeppli target with lambda = (n-k+1)qp^k = {cfg.lam_cp:.6g}",
        f"declumping term {dec:.6g}, CP term {cp.total:.6g}, compounding swap term {swap:.6g}",
    ] + cp.notes[1:]
    return BoundReport(
        total=dec + cp.c_term + swap + cp.smooth_term,
        c_term=dec + cp.c_term + swap,
        smooth_term=cp.smooth_term,
        norm_used=cp.norm_used,
        norm_method=cp.norm_method,
        lam=cp.lam,
        valid=cp.valid,
        notes=notes,
    )


class SteinChenComparators(NamedTuple):
    """Leading-order sizes of competing Stein-Chen bounds (not certified bounds)."""

    ub_cs_po: float | None
    ub_cs_cp: float | None
    ub_cs_cp_small_p: float | None
    notes: tuple[str, ...]


def stein_chen_comparators(cfg: RunsConfig) -> SteinChenComparators:
    """2p/q for the Poisson target; for the CP target
    log⁺(lam q (1-2p)) / (q²(1-2p)) 6k p^k when p <= 1/3 and 6q/(1-5p) k p^k when p <= 1/5.
    """
    k, p, q = cfg.k, cfg.p, cfg.q
    pk = p**k
    po = cp = small = None
    if p <= 1.0 / 3.0:
        po = 2.0 * p / q
        x = cfg.lam_cp * q * (1.0 - 2.0 * p)
        log_plus = max(math.log(x), 0.0) if x > 0 else 0.0
        cp = log_plus / (q * q * (1.0 - 2.0 * p)) * 6.0 * k * pk
    if p <= 0.2:
        small = 6.0 * q / (1.0 - 5.0 * p) * k * pk if p < 0.2 else math.inf
    return SteinChenComparators(po, cp, small, (ASYMPTOTIC_NOTE,))


def run_indicator_profile(cfg: RunsConfig) -> LocalDepProfile:
    """Moments of the run indicators X_i (k-dependent, associated).

    For lag d < k: E X_i X_j = P(X_i X_j != 0) = p^{k+d}, Cov = p^{k+d} - p^{2k};
    for k <= d < 2k the indicators are independent.
    """
    k, p = cfg.k, cfg.p
    nv = cfg.windows
    pk = p**k
    cross, joint, cov = {}, {}, {}
    for i in range(nv):
        for d in range(1, min(2 * k, i + 1)):
            both = p ** (k + d) if d < k else pk * pk
            cross[(i, i - d)] = both
            joint[(i, i - d)] = both
            cov[(i, i - d)] = both - pk * pk
    return LocalDepProfile(
        k=k,
        ps=(pk,) * nv,
        means=(pk,) * nv,
        sq_means=(pk * pk,) * nv,
        cross_moments=cross,
        joint_nonzero=joint,
        covariances=cov,
        severities=(IntPmf.point_mass(1),) * nv,
    )


def declumped_profile(cfg: RunsConfig) -> LocalDepProfile:
    """Moments of the truncated clump sizes Y'_i (2k-dependent, stationary).

    P(Y'_i != 0) = q p^k, E Y'_i = p^k(1 - p^k); for lag d:
    d <= k: the two clumps cannot both start, all joint moments vanish;
    k < d < 2k: E Y'_j Y'_i = p^{2k}(1 - p^{d-k})(1 - p^k), P(both != 0) = q² p^{2k};
    2k <= d < 4k: independent.
    """
    _require_clumps(cfg)
    k, p, q = cfg.k, cfg.p, cfg.q
    nv = cfg.windows
    pk = p**k
    pi = q * pk
    mu = pk * (1.0 - pk)
    kk = 2 * k
    cross, joint, cov = {}, {}, {}
    for i in range(nv):
        for d in range(1, min(2 * kk, i + 1)):
            if d <= k:
                both_moment, both_nonzero = 0.0, 0.0
            elif d < kk:
                both_moment = pk * pk * (1.0 - p ** (d - k)) * (1.0 - pk)
                both_nonzero = pi * pi
            else:
                both_moment, both_nonzero = mu * mu, pi * pi
            cross[(i, i - d)] = both_moment
            joint[(i, i - d)] = both_nonzero
            cov[(i, i - d)] = both_moment - mu * mu
    sev = clump_severity(cfg)
    return LocalDepProfile(
        k=kk,
        ps=(pi,) * nv,
        means=(mu,) * nv,
        sq_means=(mu * mu,) * nv,
        cross_moments=cross,
        joint_nonzero=joint,
        covariances=cov,
        severities=(sev,) * nv,
    )


TABLE1_LAMBDAS = (1.0, 5.0, 10.0, 100.0)
TABLE1_PS = (0.2, 0.5, 0.8)


@dataclass(frozen=True)
class NormRow:
    lam: float
    p: float
    norm: float
    approx: float

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "p": self.p, "norm": self.norm, "approx": self.approx}


def polya_aeppli_norm(lam: float, p: float, eps: float = DEFAULT_EPS) -> float:
    """Numeric ||Δ²f_PA(lam, p)||_1, i.e. the CP(lam, Geom(p)) smoothness norm."""
    sev = geometric_pmf(p, eps / (2.0 * lam))
    return numeric_delta2_l1(compound_poisson_pmf(CompoundSpec(lam, sev), eps / 2.0))


def geometric_heuristic(lam: float, p: float) -> float:
    """4/(lam E(W²) sqrt(2 pi e)) with W ~ Geom(p) on {1, 2, ...}, E(W²) = (1+p)/q²."""
    q = 1.0 - p
    return 4.0 / (lam * (1.0 + p) / (q * q) * math.sqrt(2.0 * math.pi * math.e))


def table1(eps: float = DEFAULT_EPS) -> list[NormRow]:
    """Numeric Pólya–Aeppli norms next to their normal heuristic, row-major in p."""
    return [
        NormRow(lam, p, polya_aeppli_norm(lam, p, eps), geometric_heuristic(lam, p))
        for p in TABLE1_PS
        for lam in TABLE1_LAMBDAS
    ]


def table1_array(rows: list[NormRow]) -> np.ndarray:
    """Shape (len(TABLE1_PS), len(TABLE1_LAMBDAS), 2): [..., 0] norm, [..., 1] approx."""
    out = np.empty((len(TABLE1_PS), len(TABLE1_LAMBDAS), 2))
    for row in rows:
        i, j = TABLE1_PS.index(row.p), TABLE1_LAMBDAS.index(row.lam)
        out[i, j] = row.norm, row.approx
    return out
