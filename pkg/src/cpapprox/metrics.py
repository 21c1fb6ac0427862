"""Total variation distance and the order-2 Zolotarev metric on integer pmfs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pmf import IntPmf, mean

OVERLAP_TOL = 1e-12


class OverlapIdentityError(ArithmeticError):
    """Half-L1 and one-minus-overlap forms of d_TV disagreed."""


class MeanMismatchError(ValueError):
    """zeta2 was asked to compare laws with different means."""


@dataclass(frozen=True)
class MetricValue:
    value: float
    error_bar: float = 0.0

    def __post_init__(self) -> None:
        if self.value < 0 or self.error_bar < 0:
            raise ValueError("metric value and error bar must be non-negative")

    @property
    def upper(self) -> float:
        return self.value + self.error_bar

    @property
    def lower(self) -> float:
        return max(0.0, self.value - self.error_bar)

    def to_dict(self) -> dict:
        return {"value": self.value, "error_bar": self.error_bar}


def _aligned(a: IntPmf, b: IntPmf) -> tuple[int, np.ndarray, np.ndarray]:
    lo = min(a.offset, b.offset)
    hi = max(a.support_max, b.support_max)
    return lo, a.dense(lo, hi), b.dense(lo, hi)


def overlap(a: IntPmf, b: IntPmf) -> float:
    """sum_k min(a(k), b(k)), the non-disagreement mass of a maximal coupling."""
    _, x, y = _aligned(a, b)
    return math.fsum(np.minimum(x, y))


def tv_distance(a: IntPmf, b: IntPmf) -> MetricValue:
    """d_TV = 1/2 sum_k |a(k) - b(k)|.

    Every call cross-checks the maximal-coupling form
    ``1 - sum_k min(a(k), b(k)) - (a.deficit + b.deficit)/2`` and raises
    :class:`OverlapIdentityError` if the two disagree beyond 1e-12.
    The error bar covers mass that truncation removed from either pmf.
    """
    _, x, y = _aligned(a, b)
    half_l1 = 0.5 * math.fsum(np.abs(x - y))
    coupled = 1.0 - math.fsum(np.minimum(x, y)) - 0.5 * (a.deficit + b.deficit)
    if abs(half_l1 - coupled) > OVERLAP_TOL:
        raise OverlapIdentityError(f"half-L1 {half_l1!r} != one-minus-overlap {coupled!r}")
    error_bar = 0.5 * (a.deficit + b.deficit)
    value = min(half_l1, 1.0 - error_bar)
    return MetricValue(max(value, 0.0), error_bar)


def zeta2(a: IntPmf, b: IntPmf, mean_tol: float = 1e-9) -> MetricValue:
    """Zolotarev's ideal metric of order 2 for equal-mean integer laws.

    sum_k |sum_{u >= k} (F_a(u) - F_b(u))|, evaluated with one right-to-left
    cumulative sweep over the union support.  Terms left of the support are
    (up to the mean mismatch) zero and are not summed.
    """
    mu_a, mu_b = mean(a), mean(b)
    if abs(mu_a - mu_b) > mean_tol:
        raise MeanMismatchError(f"zeta2 needs equal means, got {mu_a!r} and {mu_b!r}")
    lo, x, y = _aligned(a, b)
    diff = np.cumsum(x) - np.cumsum(y)
    tails = np.cumsum(diff[::-1])[::-1]
    value = math.fsum(np.abs(tails))
    width = x.size + 1
    error_bar = (a.deficit + b.deficit) * width + abs(mu_a - mu_b)
    return MetricValue(value, error_bar)
