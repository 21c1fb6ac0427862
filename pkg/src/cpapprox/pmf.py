"""Finite-support integer pmfs with explicit truncation accounting.

Every infinite-support constructor takes a tolerance ``eps`` and returns a
pmf whose ``deficit`` (mass truncated away) is at most ``eps``.  Downstream
metrics use the deficit to attach error bars to their results.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

DEFAULT_EPS = 1e-12
MASS_TOL = 1e-12
# Deficits below this are summation rounding, not truncation.
_ROUNDING_DEFICIT = 2.0**-49

# Panjer runs in linear space; below this e^{-rate} loses precision.
_MIN_P0 = 1e-300
_MAX_RECURSION = 10_000_000


@dataclass(frozen=True, eq=False)
class IntPmf:
    """Probability weights ``probs`` on ``offset, offset+1, ...``.

    ``deficit`` is ``1 - sum(probs)``; it is derived, never supplied, so the
    mass-conservation invariant holds by construction.  Leading and trailing
    exact zeros are trimmed so two equal pmfs have equal representations.
    """

    offset: int
    probs: np.ndarray
    deficit: float = field(init=False)

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64).ravel()
        if probs.size == 0:
            raise ValueError("a pmf needs at least one support point")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite")
        if np.any(probs < 0.0):
            raise ValueError("probabilities must be non-negative")
        nz = np.flatnonzero(probs)
        offset = int(self.offset)
        if nz.size == 0:
            probs = np.zeros(1)
        else:
            offset += int(nz[0])
            probs = probs[nz[0] : nz[-1] + 1].copy()
        total = math.fsum(probs)
        if total > 1.0 + MASS_TOL:
            raise ValueError(f"total mass {total!r} exceeds 1")
        probs.setflags(write=False)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "probs", probs)
        deficit = 1.0 - total
        object.__setattr__(self, "deficit", deficit if deficit > _ROUNDING_DEFICIT else 0.0)

    @classmethod
    def point_mass(cls, x: int) -> IntPmf:
        return cls(x, np.ones(1))

    @classmethod
    def from_dict(cls, weights: dict[int, float]) -> IntPmf:
        """Build from ``{support point: probability}``."""
        if not weights:
            raise ValueError("empty pmf")
        lo, hi = min(weights), max(weights)
        probs = np.zeros(hi - lo + 1)
        for x, w in weights.items():
            probs[x - lo] += w
        return cls(lo, probs)

    @property
    def support_max(self) -> int:
        return self.offset + self.probs.size - 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.probs.size)

    def __call__(self, x: int) -> float:
        i = x - self.offset
        if 0 <= i < self.probs.size:
            return float(self.probs[i])
        return 0.0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntPmf):
            return NotImplemented
        return self.offset == other.offset and np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash((self.offset, self.probs.tobytes()))

    def __repr__(self) -> str:
        return f"IntPmf(offset={self.offset}, size={self.probs.size}, deficit={self.deficit:.3g})"

    def dense(self, lo: int, hi: int) -> np.ndarray:
        """Weights on ``lo..hi`` inclusive (zeros outside the support)."""
        out = np.zeros(hi - lo + 1)
        a = max(lo, self.offset)
        b = min(hi, self.support_max)
        if a <= b:
            out[a - lo : b - lo + 1] = self.probs[a - self.offset : b - self.offset + 1]
        return out

    def to_dict(self) -> dict:
        return {"offset": self.offset, "probs": [float(p) for p in self.probs], "deficit": self.deficit}

    def to_json(self) -> str:
        probs = ", ".join(format(float(p), ".17g") for p in self.probs)
        return f'{{"offset": {self.offset}, "probs": [{probs}], "deficit": {self.deficit:.17g}}}'

    @classmethod
    def from_json(cls, text: str | dict) -> IntPmf:
        data = json.loads(text) if isinstance(text, str) else text
        pmf = cls(int(data["offset"]), np.asarray(data["probs"], dtype=np.float64))
        if "deficit" in data and abs(pmf.deficit - float(data["deficit"])) > MASS_TOL:
            raise ValueError("deficit field inconsistent with probs")
        return pmf


@dataclass(frozen=True)
class CompoundSpec:
    """CP(rate, compounding): Poisson number of i.i.d. positive severities."""

    rate: float
    compounding: IntPmf

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ValueError("compound Poisson rate must be positive")
        if self.compounding.offset < 1:
            raise ValueError("compounding law must put no mass at or below 0")


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")


def _stirlerr(n: np.ndarray) -> np.ndarray:
    """log(n!) - log(sqrt(2 pi n) (n/e)^n), accurate for all n >= 1."""
    n = np.asarray(n, dtype=np.float64)
    out = np.empty_like(n)
    small = n <= 15.0
    ns = n[small]
    out[small] = gammaln(ns + 1.0) - (ns + 0.5) * np.log(ns) + ns - 0.5 * math.log(2 * math.pi)
    nl = n[~small]
    nn = nl * nl
    s0, s1, s2, s3, s4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188
    out[~small] = (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / nl
    return out


def _bd0(x: np.ndarray, mu: float) -> np.ndarray:
    """x log(x/mu) + mu - x without cancellation."""
    x = np.asarray(x, dtype=np.float64)
    out = x * np.log(x / mu) + mu - x
    near = np.abs(x - mu) < 0.1 * (x + mu)
    if np.any(near):
        xn = x[near]
        v = (xn - mu) / (xn + mu)
        s = (xn - mu) * v
        ej = 2.0 * xn * v
        v2 = v * v
        for j in range(1, 200):
            ej = ej * v2
            s1 = s + ej / (2 * j + 1)
            if np.all(s1 == s):
                break
            s = s1
        out[near] = s
    return out


def poisson_logpmf(k: np.ndarray, rate: float) -> np.ndarray:
    """log P(Po(rate) = k) via the saddle-point form (relative error ~1e-15).

    The direct ``k log(rate) - rate - lgamma(k+1)`` loses about
    ``log10(rate)`` digits to cancellation, which breaks mass conservation
    at 1e-12 for rates near 10^4.
    """
    k = np.asarray(k, dtype=np.float64)
    if rate == 0.0:
        return np.where(k == 0, 0.0, -np.inf)
    out = np.full(k.shape, -np.inf)
    out[k == 0] = -rate
    pos = k >= 1
    kp = k[pos]
    out[pos] = -_stirlerr(kp) - _bd0(kp, rate) - 0.5 * np.log(2 * math.pi * kp)
    return out


def poisson_pmf(rate: float, eps: float = DEFAULT_EPS) -> IntPmf:
    """Po(rate) truncated on both sides so that the deficit is at most eps."""
    if rate < 0 or not math.isfinite(rate):
        raise ValueError("Poisson rate must be finite and non-negative")
    _check_eps(eps)
    if rate == 0.0:
        return IntPmf.point_mass(0)
    spread = 40.0 * math.sqrt(rate) + 40.0
    lo = max(0, int(math.floor(rate - spread)))
    hi = int(math.ceil(rate + spread))
    probs = np.exp(poisson_logpmf(np.arange(lo, hi + 1), rate))
    # Drop at most eps/2 from each tail.
    left = np.cumsum(probs)
    i = int(np.searchsorted(left, eps / 2, side="right"))
    right = np.cumsum(probs[::-1])
    j = int(np.searchsorted(right, eps / 2, side="right"))
    return IntPmf(lo + i, probs[i : probs.size - j])


def compound_poisson_pmf(spec: CompoundSpec, eps: float = DEFAULT_EPS) -> IntPmf:
    """CP(rate, F) on {0, 1, ...} by the Poisson (Panjer) recursion.

    p_0 = e^{-rate}; p_n = (rate/n) sum_j j f(j) p_{n-j}.  Runs until the
    produced mass reaches its attainable total minus eps.  A truncated
    compounding law (deficit d) caps the attainable mass at e^{-rate d}, so
    the result's deficit is at most eps + (1 - e^{-rate d}).
    """
    _check_eps(eps)
    lam = float(spec.rate)
    p0 = math.exp(-lam)
    if p0 < _MIN_P0:
        raise ValueError(f"e^-rate underflows for rate={lam!r}; linear-space recursion unusable")
    sev = spec.compounding
    jf = np.zeros(sev.support_max + 1)
    jf[sev.offset :] = np.arange(sev.offset, sev.support_max + 1) * sev.probs
    jf_rev = jf[::-1].copy()
    smax = sev.support_max
    target = math.exp(-lam * sev.deficit) - eps

    buf = np.zeros(max(64, 4 * int(lam * (sev.offset + smax)) + 64))
    buf[0] = p0
    total = p0
    n = 0
    while total < target:
        n += 1
        if n >= _MAX_RECURSION:
            raise RuntimeError("compound Poisson recursion did not reach the requested mass")
        if n >= buf.size:
            buf = np.concatenate([buf, np.zeros(buf.size)])
        m = min(n, smax)
        # sum_{j=1}^{m} j f(j) p_{n-j}
        val = lam / n * float(np.dot(jf_rev[smax - m : smax], buf[n - m : n]))
        buf[n] = val
        total += val
    return IntPmf(0, buf[: n + 1])


def geometric_pmf(p: float, eps: float = DEFAULT_EPS) -> IntPmf:
    """P(x) = (1-p) p^(x-1) on x = 1, 2, ...; mean 1/(1-p)."""
    if not 0.0 < p < 1.0:
        raise ValueError("geometric parameter must lie in (0, 1)")
    _check_eps(eps)
    # tail beyond K is p^K
    K = max(1, int(math.ceil(math.log(eps) / math.log(p))))
    x = np.arange(1, K + 1)
    return IntPmf(1, (1.0 - p) * p ** (x - 1))


def truncated_geometric_pmf(p: float, k: int) -> IntPmf:
    """Geometric law with all mass beyond k folded onto k."""
    if not 0.0 < p < 1.0:
        raise ValueError("geometric parameter must lie in (0, 1)")
    if int(k) != k or k < 1:
        raise ValueError("truncation point k must be an integer >= 1")
    x = np.arange(1, k + 1)
    probs = (1.0 - p) * p ** (x - 1)
    probs[-1] = p ** (k - 1)
    return IntPmf(1, probs)


def polya_aeppli_pmf(lam: float, p: float, eps: float = DEFAULT_EPS) -> IntPmf:
    """PA(lam, p) = CP(lam, geometric(p)) with total deficit at most eps."""
    if not lam > 0:
        raise ValueError("Polya-Aeppli rate must be positive")
    _check_eps(eps)
    # severity tail loses at most lam * eps_sev = eps/2 of CP mass
    severity = geometric_pmf(p, eps / (2.0 * lam))
    return compound_poisson_pmf(CompoundSpec(lam, severity), eps / 2.0)


def convolve(a: IntPmf, b: IntPmf) -> IntPmf:
    """Law of the sum of independent variables with laws a and b."""
    return IntPmf(a.offset + b.offset, np.convolve(a.probs, b.probs))


def mixture(weights: Sequence[float], parts: Sequence[IntPmf]) -> IntPmf:
    """Pointwise weighted sum of pmfs."""
    if len(weights) != len(parts):
        raise ValueError("weights and parts must have equal length")
    if not parts:
        raise ValueError("mixture of nothing")
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or abs(math.fsum(w) - 1.0) > 1e-12:
        raise ValueError("mixture weights must be non-negative and sum to 1")
    lo = min(part.offset for part in parts)
    hi = max(part.support_max for part in parts)
    acc = np.zeros(hi - lo + 1)
    for wi, part in zip(w, parts):
        if wi:
            acc += wi * part.dense(lo, hi)
    return IntPmf(lo, acc)


def bernoulli_pmf(p: float) -> IntPmf:
    if not 0.0 <= p <= 1.0:
        raise ValueError("Bernoulli parameter must lie in [0, 1]")
    return IntPmf(0, np.array([1.0 - p, p]))


def poisson_binomial_pmf(ps: Sequence[float]) -> IntPmf:
    """Exact law of a sum of independent Bernoulli(p_i)."""
    ps = np.asarray(ps, dtype=np.float64)
    if np.any((ps < 0) | (ps > 1)):
        raise ValueError("Bernoulli parameters must lie in [0, 1]")
    probs = np.ones(1)
    for p in ps:
        nxt = np.zeros(probs.size + 1)
        nxt[:-1] = probs * (1.0 - p)
        nxt[1:] += probs * p
        probs = nxt
    return IntPmf(0, probs)


def moments(a: IntPmf) -> tuple[float, float, float]:
    """(mean, second raw moment, variance) summed over the stored support.

    The truncated tail is ignored; callers account for ``a.deficit``.
    """
    x = a.support.astype(np.float64)
    mean = math.fsum(x * a.probs)
    second = math.fsum(x * x * a.probs)
    var = math.fsum((x - mean) ** 2 * a.probs)
    return mean, second, var


def mean(a: IntPmf) -> float:
    return math.fsum(a.support.astype(np.float64) * a.probs)


def zero_inflate(p: float, severity: IntPmf) -> IntPmf:
    """Law of X with P(X != 0) = p and X | X != 0 ~ severity."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if severity.offset < 1:
        raise ValueError("severity must live on positive integers")
    if p == 0.0:
        return IntPmf.point_mass(0)
    if p == 1.0:
        return severity
    return mixture([1.0 - p, p], [IntPmf.point_mass(0), severity])
