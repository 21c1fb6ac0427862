"""Smoothness factors ||Δf||_∞ and ||Δ²f||_1 of an approximating pmf.

Numeric versions work for any pmf; the Poisson versions are closed forms
built from the two sign changes of the second difference of the Poisson pmf.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .pmf import IntPmf, moments, poisson_logpmf

SQRT_2PIE = math.sqrt(2.0 * math.pi * math.e)
# 4/sqrt(2 pi e): limit of lam * ||Δ²f_Po(lam)||_1
POISSON_DELTA2_LIMIT = 4.0 / SQRT_2PIE

_BOUNDARY_TOL = 1e-9


class NormMethod(str, enum.Enum):
    NUMERIC = "numeric"
    EXACT_POISSON = "exact_poisson"
    CRUDE = "crude"
    NORMAL_HEURISTIC = "normal_heuristic"


@dataclass(frozen=True)
class SmoothnessReport:
    delta1_sup: float
    delta2_l1: float
    method: NormMethod

    def to_dict(self) -> dict:
        return {"delta1_sup": self.delta1_sup, "delta2_l1": self.delta2_l1, "method": self.method.value}


def numeric_delta1_sup(a: IntPmf) -> float:
    """max_k |a(k) - a(k-1)| over the support padded by one zero each side."""
    padded = np.concatenate(([0.0], a.probs, [0.0]))
    return float(np.max(np.abs(np.diff(padded))))


def numeric_delta2_l1(a: IntPmf) -> float:
    """sum_k |a(k) - 2a(k-1) + a(k-2)| over the support padded by two zeros."""
    padded = np.concatenate(([0.0, 0.0], a.probs, [0.0, 0.0]))
    return math.fsum(np.abs(np.diff(padded, 2)))


def numeric_smoothness(a: IntPmf) -> SmoothnessReport:
    return SmoothnessReport(numeric_delta1_sup(a), numeric_delta2_l1(a), NormMethod.NUMERIC)


def _check_rate(lam: float) -> None:
    if not (lam > 0 and math.isfinite(lam)):
        raise ValueError(f"Poisson rate must be positive and finite, got {lam!r}")


def _poisson_first_difference(k: int, lam: float) -> float:
    """Δf_Po(lam)(k) = f(k)(1 - k/lam); zero for k < 0."""
    if k < 0:
        return 0.0
    f = math.exp(float(poisson_logpmf(np.array([k]), lam)[0]))
    return f * (lam - k) / lam


def _floor_guarded(rho: float, lam: float, pick) -> int:
    m = math.floor(rho)
    if abs(rho - round(rho)) > _BOUNDARY_TOL:
        return m
    # rho sits on an integer: the floor is decided by the extremum itself.
    candidates = [c for c in (m - 1, m, m + 1) if c >= 0]
    return pick(candidates, key=lambda c: _poisson_first_difference(c, lam))


def poisson_turning_points(lam: float) -> tuple[int, int]:
    """(k_lam, u_lam): where Δf_Po(lam) attains its maximum and minimum.

    k_lam = floor(lam - sqrt(lam + 1/4) + 1/2), u_lam = floor(lam + sqrt(lam + 1/4) + 1/2).
    """
    _check_rate(lam)
    r = math.sqrt(lam + 0.25)
    k = _floor_guarded(lam - r + 0.5, lam, max)
    u = _floor_guarded(lam + r + 0.5, lam, min)
    return k, u


def poisson_delta1_sup_exact(lam: float) -> float:
    """||Δf_Po(lam)||_∞ = e^{-lam} lam^k / k! (1 - k/lam) at k = k_lam."""
    k, _ = poisson_turning_points(lam)
    return _poisson_first_difference(k, lam)


def poisson_delta2_l1_exact(lam: float) -> float:
    """||Δ²f_Po(lam)||_1 = 2(Δf(k_lam) - Δf(u_lam)).

    Equivalently 2e^{-lam}(lam^{k-1}(lam-k)/k! - lam^{u-1}(lam-u)/u!).
    """
    k, u = poisson_turning_points(lam)
    return 2.0 * (_poisson_first_difference(k, lam) - _poisson_first_difference(u, lam))


def poisson_delta2_l1_crude(lam: float) -> float:
    """min(4, 4(1 - e^{-3 lam})/(3 lam)), an upper bound on the exact norm."""
    _check_rate(lam)
    return min(4.0, -4.0 * math.expm1(-3.0 * lam) / (3.0 * lam))


def normal_heuristic_delta2(lam: float, second_raw_severity: float) -> float:
    """4/(lam E(W²) sqrt(2 pi e)).

    Only a large-lam approximation for CP(lam, F) when that law is close to
    normal; it is never used inside a bound.
    """
    if not (lam > 0 and second_raw_severity > 0):
        raise ValueError("rate and severity second moment must be positive")
    return 4.0 / (lam * second_raw_severity * SQRT_2PIE)


def poisson_smoothness(lam: float) -> SmoothnessReport:
    return SmoothnessReport(poisson_delta1_sup_exact(lam), poisson_delta2_l1_exact(lam), NormMethod.EXACT_POISSON)


def crude_smoothness(lam: float) -> SmoothnessReport:
    # ||Δf_Po||_∞ <= 1/(3 lam) is only claimed for lam >= 2
    delta1 = 1.0 / (3.0 * lam) if lam >= 2 else 1.0
    return SmoothnessReport(delta1, poisson_delta2_l1_crude(lam), NormMethod.CRUDE)


def heuristic_smoothness(lam: float, severity: IntPmf | None = None) -> SmoothnessReport:
    """Normal-approximation values; severity defaults to unit jumps (Poisson)."""
    second = 1.0 if severity is None else moments(severity)[1]
    delta2 = normal_heuristic_delta2(lam, second)
    return SmoothnessReport(delta2 / 4.0, delta2, NormMethod.NORMAL_HEURISTIC)
