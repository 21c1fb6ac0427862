"""Total variation error bounds for (compound) Poisson approximation of sums.

Each bound takes the smoothness norm ||Δ²f||_1 of the approximating law as
an explicit argument; choose it with :mod:`cpapprox.smoothness`.

Indexing is 0-based throughout.  Windowed sums whose lower index falls below
0 are truncated there (variables before the first are identically zero), and
an empty index range sums to zero.  Pairwise maps are keyed ``(i, j)`` with
``i > j``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .pmf import IntPmf, mean, mixture
from .smoothness import NormMethod, poisson_delta2_l1_exact

LN2 = math.log(2.0)


def shift_factor(p: float) -> float:
    """1 - 2(1 - e^{-p}); positive exactly when p < ln 2."""
    return 2.0 * math.exp(-p) - 1.0


@dataclass
class BoundReport:
    total: float
    c_term: float
    smooth_term: float
    norm_used: float
    norm_method: str
    lam: float
    valid: bool = True
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "c_term": self.c_term,
            "smooth_term": self.smooth_term,
            "norm_used": self.norm_used,
            "norm_method": self.norm_method,
            "lambda": self.lam,
            "valid": self.valid,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> BoundReport:
        return cls(
            total=data["total"],
            c_term=data["c_term"],
            smooth_term=data["smooth_term"],
            norm_used=data["norm_used"],
            norm_method=data["norm_method"],
            lam=data["lambda"],
            valid=data["valid"],
            notes=list(data["notes"]),
        )


def _report(c_term, smooth_num, denom, norm, method, lam, violations, notes=()) -> BoundReport:
    notes = list(notes)
    if denom > 0:
        smooth = smooth_num / denom
    else:
        smooth = math.inf
        notes.append("shift factor 1 - 2(1 - e^-p) is not positive; smooth term is infinite")
    notes.extend(violations)
    if isinstance(method, NormMethod):
        method = method.value
    return BoundReport(
        total=c_term + smooth,
        c_term=c_term,
        smooth_term=smooth,
        norm_used=norm,
        norm_method=method,
        lam=lam,
        valid=not violations,
        notes=notes,
    )


@dataclass(frozen=True)
class BernoulliProfile:
    """Success probabilities of independent Bernoulli summands."""

    ps: tuple[float, ...]

    def __post_init__(self) -> None:
        ps = tuple(float(p) for p in self.ps)
        if any(not 0.0 <= p <= 1.0 for p in ps):
            raise ValueError("Bernoulli parameters must lie in [0, 1]")
        object.__setattr__(self, "ps", ps)

    @property
    def lam(self) -> float:
        return math.fsum(self.ps)

    def to_dict(self) -> dict:
        return {"ps": list(self.ps)}

    @classmethod
    def from_dict(cls, data: Mapping) -> BernoulliProfile:
        return cls(tuple(data["ps"]))


@dataclass(frozen=True)
class IndepProfile:
    """Independent Z_+-valued summands X_i described by

    ``ps[i] = P(X_i != 0)``, ``severities[i]`` = law of X_i given X_i != 0,
    and ``sq_means[i] = (E X_i)^2``.
    """

    ps: tuple[float, ...]
    sq_means: tuple[float, ...]
    severities: tuple[IntPmf, ...]

    def __post_init__(self) -> None:
        ps = tuple(float(p) for p in self.ps)
        sq = tuple(float(s) for s in self.sq_means)
        sev = tuple(self.severities)
        if not len(ps) == len(sq) == len(sev):
            raise ValueError("ps, sq_means and severities must have equal length")
        for p, s, g in zip(ps, sq, sev):
            if not 0.0 <= p <= 1.0:
                raise ValueError("each p_i must lie in [0, 1]")
            if s < 0:
                raise ValueError("sq_means must be non-negative")
            if g.offset < 1:
                raise ValueError("severity laws must live on positive integers")
            if abs(s - (p * mean(g)) ** 2) > 1e-9:
                raise ValueError("sq_means[i] must equal (p_i * mean(G_i))^2")
        object.__setattr__(self, "ps", ps)
        object.__setattr__(self, "sq_means", sq)
        object.__setattr__(self, "severities", sev)

    @classmethod
    def from_marginals(cls, laws: Sequence[IntPmf]) -> IndepProfile:
        """Decompose each non-negative law into (p_i, G_i, (E X_i)^2)."""
        ps, sq, sev = [], [], []
        for law in laws:
            if law.offset < 0:
                raise ValueError("summands must be non-negative")
            p0 = law(0)
            p = 1.0 - p0 - law.deficit
            if p <= 0:
                ps.append(0.0)
                sev.append(IntPmf.point_mass(1))
                sq.append(0.0)
                continue
            start = max(law.offset, 1)
            g = IntPmf(start, law.dense(start, law.support_max) / p)
            ps.append(p)
            sev.append(g)
            sq.append((p * mean(g)) ** 2)
        return cls(tuple(ps), tuple(sq), tuple(sev))

    @property
    def lam(self) -> float:
        return math.fsum(self.ps)

    def compounding(self) -> IntPmf:
        """F = sum_i (p_i / lam) G_i."""
        lam = self.lam
        if lam == 0:
            raise ValueError("all p_i are zero; the compounding law is undefined")
        weights = [p / lam for p in self.ps]
        # renormalise so the weights sum to 1 to machine precision
        total = math.fsum(weights)
        return mixture([w / total for w in weights], self.severities)

    def to_dict(self) -> dict:
        return {
            "ps": list(self.ps),
            "sq_means": list(self.sq_means),
            "severities": [g.to_dict() for g in self.severities],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> IndepProfile:
        return cls(
            tuple(data["ps"]),
            tuple(data["sq_means"]),
            tuple(IntPmf.from_json(g) for g in data["severities"]),
        )


Pairs = Mapping[tuple[int, int], float]


def _pair_key(key) -> tuple[int, int]:
    if isinstance(key, str):
        i, j = key.split(",")
        return int(i), int(j)
    i, j = key
    return int(i), int(j)


@dataclass(frozen=True)
class LocalDepProfile:
    """First and second order description of k-dependent summands X_0..X_{n-1}.

    ``cross_moments[(i, j)] = E(X_i X_j)``, ``joint_nonzero[(i, j)] =
    P(X_i != 0, X_j != 0)`` and ``covariances[(i, j)] = Cov(X_i, X_j)`` for
    ``0 < i - j < 2k``; missing pairs count as zero.
    """

    k: int
    ps: tuple[float, ...]
    means: tuple[float, ...]
    sq_means: tuple[float, ...]
    cross_moments: Pairs
    joint_nonzero: Pairs
    covariances: Pairs
    severities: tuple[IntPmf, ...]

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("dependence range k must be an integer >= 1")
        n = len(self.ps)
        if not len(self.means) == len(self.sq_means) == len(self.severities) == n:
            raise ValueError("per-index sequences must have equal length")
        object.__setattr__(self, "ps", tuple(float(p) for p in self.ps))
        object.__setattr__(self, "means", tuple(float(x) for x in self.means))
        object.__setattr__(self, "sq_means", tuple(float(x) for x in self.sq_means))
        object.__setattr__(self, "severities", tuple(self.severities))
        for name in ("cross_moments", "joint_nonzero", "covariances"):
            pairs = {_pair_key(key): float(v) for key, v in getattr(self, name).items()}
            for i, j in pairs:
                if not 0 < i - j < 2 * self.k or i >= n:
                    raise ValueError(f"{name} key {(i, j)} outside 0 < i - j < 2k")
            object.__setattr__(self, name, pairs)
        if any(not 0.0 <= p <= 1.0 for p in self.ps):
            raise ValueError("each p_i must lie in [0, 1]")
        for (i, j), v in self.joint_nonzero.items():
            if j >= 0 and v > min(self.ps[i], self.ps[j]) + 1e-12:
                raise ValueError(f"joint_nonzero{(i, j)} exceeds min(p_i, p_j)")
        if any(v < 0 for v in self.cross_moments.values()):
            raise ValueError("cross moments of non-negative variables are non-negative")

    @property
    def n(self) -> int:
        return len(self.ps)

    @property
    def lam(self) -> float:
        return math.fsum(self.ps)

    def compounding(self) -> IntPmf:
        lam = self.lam
        if lam == 0:
            raise ValueError("all p_i are zero; the compounding law is undefined")
        weights = [p / lam for p in self.ps]
        total = math.fsum(weights)
        return mixture([w / total for w in weights], self.severities)

    def to_dict(self) -> dict:
        def pairs(d):
            return {f"{i},{j}": v for (i, j), v in sorted(d.items())}

        return {
            "k": self.k,
            "ps": list(self.ps),
            "means": list(self.means),
            "sq_means": list(self.sq_means),
            "cross_moments": pairs(self.cross_moments),
            "joint_nonzero": pairs(self.joint_nonzero),
            "covariances": pairs(self.covariances),
            "severities": [g.to_dict() for g in self.severities],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> LocalDepProfile:
        return cls(
            k=int(data["k"]),
            ps=tuple(data["ps"]),
            means=tuple(data["means"]),
            sq_means=tuple(data["sq_means"]),
            cross_moments=dict(data.get("cross_moments", {})),
            joint_nonzero=dict(data.get("joint_nonzero", {})),
            covariances=dict(data.get("covariances", {})),
            severities=tuple(IntPmf.from_json(g) for g in data["severities"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _window(i: int, lo_shift: int, hi_shift: int) -> range:
    """Indices i+lo_shift .. i+hi_shift, clipped below at 0."""
    return range(max(0, i + lo_shift), i + hi_shift + 1)


def kdep_m(ps: Sequence[float], k: int) -> float:
    """m = max_i sum_{j=i-3k+3}^{i} p_j."""
    if not len(ps):
        return 0.0
    c = np.concatenate(([0.0], np.cumsum(ps)))
    n = len(ps)
    idx = np.arange(n)
    lo = np.maximum(0, idx - 3 * k + 3)
    return float(np.max(c[idx + 1] - c[lo]))


def _independent_smooth(ps, sq_means, norm: float) -> float:
    """norm/4 * sum_i sq_means[i] / (1 - 2(1 - e^{-p_i})), infinite if any factor is <= 0."""
    terms = []
    for p, s in zip(ps, sq_means):
        d = shift_factor(p)
        if d <= 0:
            return math.inf
        terms.append(s / d)
    return 0.25 * norm * math.fsum(terms)


def _inf_note(smooth: float) -> list[str]:
    if math.isinf(smooth):
        return ["shift factor 1 - 2(1 - e^-p_i) is not positive for some i; smooth term is infinite"]
    return []


def ub_cp_independent(profile: IndepProfile, norm: float, norm_method: str = "supplied") -> BoundReport:
    """(sum p_i^2)^2 + norm/4 * sum_i (E X_i)^2 / (1 - 2(1 - e^{-p_i})).

    ``norm`` is ||Δ²f_CP(lam, F)||_1 with lam = sum p_i, F = sum (p_i/lam) G_i.
    """
    ps = profile.ps
    c_term = math.fsum(p * p for p in ps) ** 2
    violations = [f"p_{i} = {p:.6g} >= ln 2" for i, p in enumerate(ps) if p >= LN2]
    smooth = _independent_smooth(ps, profile.sq_means, norm)
    return _report(c_term, smooth, 1.0, norm, norm_method, profile.lam, violations, _inf_note(smooth))


def ub_po_bernoulli(profile: BernoulliProfile, norm: float | None = None) -> BoundReport:
    """(sum p_i^2)^2 + norm/4 * sum_i p_i^2 / (1 - 2(1 - e^{-p_i})), target Po(sum p_i)."""
    lam = profile.lam
    method = NormMethod.EXACT_POISSON
    if norm is None:
        norm = poisson_delta2_l1_exact(lam) if lam > 0 else 4.0
    else:
        method = "supplied"
    ps = profile.ps
    c_term = math.fsum(p * p for p in ps) ** 2
    violations = [f"p_{i} = {p:.6g} >= ln 2" for i, p in enumerate(ps) if p >= LN2]
    smooth = _independent_smooth(ps, [p * p for p in ps], norm)
    return _report(c_term, smooth, 1.0, norm, method, lam, violations, _inf_note(smooth))


def ub_po_iid_refined(n: int, p: float) -> BoundReport:
    """i.i.d. Bernoulli(p) version with the sharper first term

    (2p²/3)(log(3np/(1-3p)) + 1) + 2p³ replacing (n p²)².
    Needs p < 1/3 and lam = n p >= 1/3 + p.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    lam = n * p
    norm = poisson_delta2_l1_exact(lam)
    violations = []
    if p >= 1.0 / 3.0:
        violations.append(f"p = {p:.6g} >= 1/3")
    if lam < 1.0 / 3.0 + p:
        violations.append(f"lambda = {lam:.6g} < 1/3 + p")
    notes = ["first term replaces (sum p_i^2)^2 of the heterogeneous Bernoulli bound"]
    if p < 1.0 / 3.0:
        c_term = (2.0 * p * p / 3.0) * (math.log(3.0 * n * p / (1.0 - 3.0 * p)) + 1.0) + 2.0 * p**3
    else:
        c_term = math.inf
    return _report(c_term, 0.25 * norm * n * p * p, shift_factor(p), norm, NormMethod.EXACT_POISSON, lam,
                   violations, notes)


def _kdep_violations(ps: Sequence[float], k: int) -> tuple[float, list[str]]:
    m = kdep_m(ps, k)
    return m, ([f"m = {m:.6g} >= ln 2"] if m >= LN2 else [])


def _second_factor(profile: LocalDepProfile, i: int) -> float:
    """2 sum_{j=i-k+1}^{i-1} (P(X_j != 0, X_i != 0) + p_i p_j) + p_i^2."""
    ps, k = profile.ps, profile.k
    acc = math.fsum(profile.joint_nonzero.get((i, j), 0.0) + ps[i] * ps[j] for j in _window(i, -k + 1, -1))
    return 2.0 * acc + ps[i] * ps[i]


def _kdep_c_term(profile: LocalDepProfile, inner) -> float:
    """C_n = 2 sum_i (2 sum_{j <= i-3k+2} inner(j) + sum_{j=i-3k+3}^{i-2k+1} p_j) * second_factor(i)."""
    ps, k, n = profile.ps, profile.k, profile.n
    inner_vals = [inner(j) for j in range(n)]
    prefix = np.concatenate(([0.0], np.cumsum(inner_vals)))
    pc = np.concatenate(([0.0], np.cumsum(ps)))
    terms = []
    for i in range(n):
        top = i - 3 * k + 2
        first = 2.0 * prefix[top + 1] if top >= 0 else 0.0
        lo, hi = max(0, i - 3 * k + 3), i - 2 * k + 1
        mid = pc[hi + 1] - pc[lo] if hi >= lo else 0.0
        terms.append((first + mid) * _second_factor(profile, i))
    return 2.0 * math.fsum(terms)


def ub_cp_kdep_moments(profile: LocalDepProfile, norm: float, norm_method: str = "supplied") -> BoundReport:
    """Moment form of the k-dependent bound, valid for any dependence shape.

    smooth = norm / (2(1 - 2(1 - e^{-m}))) * sum_i ( sum_{j=i-k+1}^{i-1} (E X_iX_j + E X_i E X_j)
    + (E X_i)^2 / 2 ), plus the C_n term built from joint non-zero probabilities.
    """
    ps, k, mu = profile.ps, profile.k, profile.means
    m, violations = _kdep_violations(ps, k)

    def inner(j):
        s = math.fsum(profile.joint_nonzero.get((j, t), 0.0) + ps[t] * ps[j] for t in _window(j, -k + 1, -1))
        return s + 0.5 * ps[j] * ps[j]

    c_term = _kdep_c_term(profile, inner)
    acc = []
    for i in range(profile.n):
        w = math.fsum(profile.cross_moments.get((i, j), 0.0) + mu[i] * mu[j] for j in _window(i, -k + 1, -1))
        acc.append(w + 0.5 * profile.sq_means[i])
    return _report(c_term, norm * math.fsum(acc), 2.0 * shift_factor(m), norm, norm_method, profile.lam, violations)


def ub_cp_kdep_quadrant(profile: LocalDepProfile, norm: float, norm_method: str = "supplied") -> BoundReport:
    """Covariance form, for summands whose partial sums are PQD or NQD with the next term.

    The quadrant dependence is the caller's declaration; it is not checked.
    """
    ps, k = profile.ps, profile.k
    m, violations = _kdep_violations(ps, k)
    cov = profile.covariances

    def inner(j):
        s = math.fsum(abs(cov.get((j, t), 0.0)) for t in _window(j, -k + 1, -1))
        return s + 0.5 * profile.sq_means[j]

    c_term = _kdep_c_term(profile, inner)
    acc = []
    for i in range(profile.n):
        w = math.fsum(abs(cov.get((i, j), 0.0)) for j in _window(i, -k + 1, -1))
        acc.append(w + 0.5 * profile.sq_means[i])
    return _report(c_term, norm * math.fsum(acc), 2.0 * shift_factor(m), norm, norm_method, profile.lam,
                   violations, ["PQD/NQD dependence declared by caller, not verified"])


def ub_cp_kdep_general(
    ps: Sequence[float],
    k: int,
    zeta_terms: Sequence[float],
    dtv_prefix_terms: Sequence[float],
    window_joint: Sequence[float],
    norm: float,
    norm_method: str = "supplied",
) -> BoundReport:
    """The k-dependent master bound with caller-supplied distances.

    ``zeta_terms[i]``: zeta2(L sum_{j=i-2k+2}^{i} X_j, L(sum_{j=i-2k+2}^{i-1} X_j + N_i)).
    ``dtv_prefix_terms[i]``: d_TV(L sum_{j<=i-3k+2} X_j, L sum_{j<=i-3k+2} N_j).
    ``window_joint[i]``: P((X_{i-k+1}, ..., X_{i-1}) != 0, X_i != 0).
    """
    n = len(ps)
    if not len(zeta_terms) == len(dtv_prefix_terms) == len(window_joint) == n:
        raise ValueError("all per-index sequences must have length n")
    if int(k) != k or k < 1:
        raise ValueError("dependence range k must be an integer >= 1")
    ps = [float(p) for p in ps]
    m, violations = _kdep_violations(ps, k)
    pc = np.concatenate(([0.0], np.cumsum(ps)))
    terms = []
    for i in range(n):
        lo, hi = max(0, i - 3 * k + 3), i - 2 * k + 1
        mid = pc[hi + 1] - pc[lo] if hi >= lo else 0.0
        wlo = max(0, i - k + 1)
        near = pc[i] - pc[wlo]
        second = 2.0 * window_joint[i] + 2.0 * ps[i] * near + ps[i] * ps[i]
        terms.append((dtv_prefix_terms[i] + mid) * second)
    c_term = 2.0 * math.fsum(terms)
    lam = math.fsum(ps)
    return _report(c_term, norm * math.fsum(zeta_terms), 2.0 * shift_factor(m), norm, norm_method, lam, violations)
