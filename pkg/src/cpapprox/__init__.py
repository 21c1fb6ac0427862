"""Compound Poisson and Poisson approximation error bounds for sums of integer variables."""

from .bounds import (
    BernoulliProfile,
    BoundReport,
    IndepProfile,
    LocalDepProfile,
    ub_cp_independent,
    ub_cp_kdep_general,
    ub_cp_kdep_moments,
    ub_cp_kdep_quadrant,
    ub_po_bernoulli,
    ub_po_iid_refined,
)
from .metrics import MetricValue, tv_distance, zeta2
from .pmf import CompoundSpec, IntPmf, compound_poisson_pmf, poisson_pmf
from .runs import RunsConfig, runs_cp_bound, runs_po_bound, total_pa_bound

__version__ = "0.1.0"

__all__ = [
    "BernoulliProfile",
    "BoundReport",
    "CompoundSpec",
    "IndepProfile",
    "IntPmf",
    "LocalDepProfile",
    "MetricValue",
    "RunsConfig",
    "compound_poisson_pmf",
    "poisson_pmf",
    "runs_cp_bound",
    "runs_po_bound",
    "total_pa_bound",
    "tv_distance",
    "ub_cp_independent",
    "ub_cp_kdep_general",
    "ub_cp_kdep_moments",
    "ub_cp_kdep_quadrant",
    "ub_po_bernoulli",
    "ub_po_iid_refined",
    "zeta2",
]
