"""Command-line front end: norms, bounds, the Pólya–Aeppli norm table, verification suites.

Exit codes: 0 success, 1 usage error, 2 a bound hypothesis fails, 3 a
verification check fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import bounds, oracle, runs
from .pmf import DEFAULT_EPS, CompoundSpec, IntPmf, compound_poisson_pmf, geometric_pmf
from .smoothness import (
    crude_smoothness,
    heuristic_smoothness,
    numeric_smoothness,
    poisson_smoothness,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_HYPOTHESIS = 2
EXIT_VERIFY = 3

# Published norm table: (lambda, p) -> (numeric norm, normal heuristic).
REFERENCE_TABLE1 = {
    (1.0, 0.2): (0.97120, 0.516204),
    (5.0, 0.2): (0.115414, 0.103241),
    (10.0, 0.2): (0.054341, 0.051620),
    (100.0, 0.2): (0.005189, 0.005162),
    (1.0, 0.5): (1.10364, 0.161314),
    (5.0, 0.5): (0.040737, 0.032263),
    (10.0, 0.5): (0.017866, 0.016131),
    (100.0, 0.5): (0.001628, 0.001613),
    (1.0, 0.8): (1.32437, 0.021509),
    (5.0, 0.8): (0.019508, 0.004302),
    (10.0, 0.8): (0.002474, 0.002151),
    (100.0, 0.8): (0.000218, 0.000215),
}
TABLE1_APPROX_TOL = 1e-6


def table1_norm_tol(lam: float, p: float) -> float:
    return 2e-6 if (lam, p) == (100.0, 0.8) else 1e-4


BOUND_KINDS = (
    "po-independent",
    "cp-independent",
    "po-iid-refined",
    "kdep-moments",
    "kdep-quadrant",
    "runs-po",
    "runs-cp",
    "runs-cp-improved",
    "runs-total",
)


class UsageError(Exception):
    pass


@dataclass
class Report:
    command: str
    inputs: dict
    results: Any
    warnings: list[str] = field(default_factory=list)
    exit_code: int = EXIT_OK

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "warnings": list(self.warnings),
            "exit_code": self.exit_code,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True)

    @classmethod
    def from_json(cls, text: str) -> Report:
        data = json.loads(text)
        return cls(data["command"], data["inputs"], data["results"], list(data["warnings"]), data["exit_code"])


def default_eps() -> float:
    raw = os.environ.get("CPX_EPS")
    if raw is None:
        return DEFAULT_EPS
    try:
        value = float(raw)
    except ValueError as exc:
        raise UsageError(f"CPX_EPS is not a number: {raw!r}") from exc
    return value


def _bound_result(rep: bounds.BoundReport) -> dict:
    out = rep.to_dict()
    out["provenance"] = "formula"
    return out


# --- commands -------------------------------------------------------------


def cmd_table1(eps: float) -> Report:
    rows = []
    for row in runs.table1(eps):
        ref_norm, ref_approx = REFERENCE_TABLE1[(row.lam, row.p)]
        rows.append(
            {
                "lambda": row.lam,
                "p": row.p,
                "norm": row.norm,
                "norm_provenance": "numeric",
                "approx": row.approx,
                "approx_provenance": "formula",
                "reference_norm": ref_norm,
                "reference_approx": ref_approx,
            }
        )
    return Report("table1", {"eps": eps}, rows)


def _load_params(raw: str | None) -> dict:
    if raw is None:
        raise UsageError("--params is required for this bound kind")
    path = Path(raw)
    text = path.read_text() if path.is_file() else raw
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--params is neither a file nor valid JSON: {exc}") from exc


def _cp_norm(lam: float, compounding: IntPmf, eps: float) -> float:
    return numeric_smoothness(compound_poisson_pmf(CompoundSpec(lam, compounding), eps)).delta2_l1


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + n for n in missing))


def cmd_bound(kind: str, args, eps: float) -> Report:
    inputs: dict = {"kind": kind, "eps": eps}
    warnings: list[str] = []
    if kind == "po-independent":
        _need(args, "ps")
        ps = _parse_floats(args.ps)
        inputs["ps"] = ps
        rep = bounds.ub_po_bernoulli(bounds.BernoulliProfile(tuple(ps)), args.norm)
    elif kind == "cp-independent":
        data = _load_params(args.params)
        inputs["params"] = data
        profile = bounds.IndepProfile.from_dict(data)
        norm, method = args.norm, "supplied"
        if norm is None:
            norm, method = _cp_norm(profile.lam, profile.compounding(), eps), "numeric"
        rep = bounds.ub_cp_independent(profile, norm, method)
    elif kind == "po-iid-refined":
        _need(args, "n", "p")
        inputs.update(n=args.n, p=args.p)
        rep = bounds.ub_po_iid_refined(args.n, args.p)
    elif kind in ("kdep-moments", "kdep-quadrant"):
        data = _load_params(args.params)
        inputs["params"] = data
        profile = bounds.LocalDepProfile.from_dict(data)
        norm, method = args.norm, "supplied"
        if norm is None:
            norm, method = _cp_norm(profile.lam, profile.compounding(), eps), "numeric"
        fn = bounds.ub_cp_kdep_moments if kind == "kdep-moments" else bounds.ub_cp_kdep_quadrant
        rep = fn(profile, norm, method)
    else:
        _need(args, "n", "k", "p")
        cfg = runs.RunsConfig(args.n, args.k, args.p)
        inputs.update(n=cfg.n, k=cfg.k, p=cfg.p)
        if kind == "runs-po":
            rep = runs.runs_po_bound(cfg)
        elif kind == "runs-cp":
            rep = runs.runs_cp_bound(cfg, args.norm, eps)
        elif kind == "runs-cp-improved":
            rep = runs.runs_cp_bound_improved(cfg, args.norm, eps)
        else:
            rep = runs.total_pa_bound(cfg, args.norm, eps)
        sc = runs.stein_chen_comparators(cfg)
        warnings.append("Stein-Chen comparators are " + runs.ASYMPTOTIC_NOTE)
        result = _bound_result(rep)
        result["stein_chen_asymptotic"] = {
            "ub_cs_po": sc.ub_cs_po,
            "ub_cs_cp": sc.ub_cs_cp,
            "ub_cs_cp_small_p": sc.ub_cs_cp_small_p,
        }
        return _finish(Report("bound", inputs, result, warnings), rep)
    return _finish(Report("bound", inputs, _bound_result(rep), warnings), rep)


def _finish(report: Report, rep: bounds.BoundReport) -> Report:
    if not rep.valid:
        report.warnings.extend(rep.notes)
        report.exit_code = EXIT_HYPOTHESIS
    return report


def _table1_checks(eps: float) -> dict:
    rows = runs.table1(eps)
    entries = []
    for row in rows:
        ref_norm, ref_approx = REFERENCE_TABLE1[(row.lam, row.p)]
        tol = table1_norm_tol(row.lam, row.p)
        entries.append(
            {
                "lambda": row.lam,
                "p": row.p,
                "norm": row.norm,
                "norm_ok": abs(row.norm - ref_norm) <= tol,
                "approx": row.approx,
                "approx_ok": abs(row.approx - ref_approx) <= TABLE1_APPROX_TOL,
            }
        )
    failures = sum(1 for e in entries if not (e["norm_ok"] and e["approx_ok"]))
    return {"name": "table1", "cases": len(entries), "failures": failures, "passed": failures == 0, "entries": entries}


def cmd_verify(suite: str, seed: int, cap: int, eps: float) -> Report:
    results = []
    if suite in ("lemmas", "all"):
        results.extend(s.to_dict() for s in oracle.lemma_suites(seed))
    if suite in ("runs", "all"):
        results.append(oracle.runs_dominance_suite(cap, eps).to_dict())
    if suite == "all":
        results.extend(s.to_dict() for s in oracle.independent_dominance_suite(seed, eps=eps))
    if suite in ("table1", "all"):
        results.append(_table1_checks(eps))
    report = Report("verify", {"suite": suite, "seed": seed, "cap": cap, "eps": eps}, results)
    failed = [r["name"] for r in results if not r["passed"]]
    if failed:
        report.warnings.append("failed suites: " + ", ".join(failed))
        report.exit_code = EXIT_VERIFY
    return report


def cmd_norms(lam: float, geom_p: float | None, severity: IntPmf | None, eps: float) -> Report:
    if not (lam > 0 and math.isfinite(lam)):
        raise UsageError("--lambda must be positive and finite")
    exact = poisson_smoothness(lam)
    crude = crude_smoothness(lam)
    results: dict = {
        "poisson_exact": {**exact.to_dict(), "provenance": "formula"},
        "poisson_crude": {**crude.to_dict(), "provenance": "formula"},
        "poisson_heuristic": {**heuristic_smoothness(lam).to_dict(), "provenance": "formula"},
    }
    inputs: dict = {"lambda": lam, "eps": eps}
    if geom_p is not None and severity is not None:
        raise UsageError("give at most one of --geom-p and --severity")
    if geom_p is not None:
        if not 0.0 < geom_p < 1.0:
            raise UsageError("--geom-p must lie in (0, 1)")
        inputs["geom_p"] = geom_p
        severity = geometric_pmf(geom_p, eps / (2.0 * lam))
        cp_eps = eps / 2.0
    else:
        cp_eps = eps
    if severity is not None:
        inputs.setdefault("severity", severity.to_dict())
        law = compound_poisson_pmf(CompoundSpec(lam, severity), cp_eps)
        results["cp_numeric"] = {**numeric_smoothness(law).to_dict(), "provenance": "numeric", "deficit": law.deficit}
        results["cp_heuristic"] = {**heuristic_smoothness(lam, severity).to_dict(), "provenance": "formula"}
    return Report("norms", inputs, results)


# --- rendering ------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _flatten(prefix: str, value, out: list) -> None:
    if isinstance(value, dict):
        for key, v in value.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), v, out)
    elif isinstance(value, list) and value and isinstance(value[0], dict):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, value))


def render_text(report: Report) -> str:
    lines = []
    if report.command == "table1":
        lines.append(f"{'p':>5} {'lambda':>7} {'norm':>12} {'approx':>12}")
        for row in report.results:
            lines.append(f"{row['p']:>5g} {row['lambda']:>7g} {row['norm']:>12.6g} {row['approx']:>12.6g}")
    elif report.command == "verify":
        for suite in report.results:
            status = "PASS" if suite["passed"] else "FAIL"
            lines.append(f"{status} {suite['name']}: {suite['cases'] - suite['failures']}/{suite['cases']}")
    else:
        rows: list = []
        _flatten("", report.results, rows)
        lines.extend(f"{key}: {_fmt(v)}" for key, v in rows)
    lines.extend(f"warning: {w}" for w in report.warnings)
    return "\n".join(lines)


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if report.command == "table1":
        writer.writerow(["p", "lambda", "norm", "approx"])
        for row in report.results:
            writer.writerow([row["p"], row["lambda"], repr(row["norm"]), repr(row["approx"])])
    else:
        rows: list = []
        _flatten("", report.results, rows)
        writer.writerow(["key", "value"])
        for key, v in rows:
            writer.writerow([key, repr(v) if isinstance(v, float) else v])
    return buf.getvalue()


# --- argument parsing -----------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--eps", type=float, default=None, help="truncation tolerance (default 1e-12 or $CPX_EPS)")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="emit the full report as JSON")
    fmt.add_argument("--csv", action="store_true", help="emit results as CSV")

    parser = _Parser(prog="cpapprox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("table1", parents=[common], help="numeric Polya-Aeppli norms vs the normal heuristic")

    b = sub.add_parser("bound", parents=[common], help="evaluate an error bound")
    b.add_argument("kind", choices=BOUND_KINDS)
    b.add_argument("--ps", help="comma-separated success probabilities")
    b.add_argument("--params", help="JSON profile, inline or a file path")
    b.add_argument("--norm", type=float, help="override the smoothness norm")
    b.add_argument("--n", type=int)
    b.add_argument("--k", type=int)
    b.add_argument("--p", type=float)

    v = sub.add_parser("verify", parents=[common], help="run exact verification suites")
    v.add_argument("suite", choices=("lemmas", "runs", "table1", "all"))
    v.add_argument("--seed", type=int, default=oracle.DEFAULT_SEED)
    v.add_argument("--cap", type=int, default=oracle.RUN_COUNT_CAP, help="largest n for exact run-count laws")

    nm = sub.add_parser("norms", parents=[common], help="smoothness norms for a given rate")
    nm.add_argument("--lambda", dest="lam", type=float, required=True)
    nm.add_argument("--geom-p", type=float, help="geometric compounding parameter")
    nm.add_argument("--severity", help="compounding law as JSON {offset, probs}")
    return parser


def run(argv: list[str] | None = None) -> tuple[Report, str]:
    args = build_parser().parse_args(argv)
    eps = args.eps if args.eps is not None else default_eps()
    if not 0.0 < eps < 1.0:
        raise UsageError("eps must lie in (0, 1)")
    if args.command == "table1":
        report = cmd_table1(eps)
    elif args.command == "bound":
        report = cmd_bound(args.kind, args, eps)
    elif args.command == "verify":
        report = cmd_verify(args.suite, args.seed, args.cap, eps)
    else:
        severity = IntPmf.from_json(args.severity) if args.severity else None
        report = cmd_norms(args.lam, args.geom_p, severity, eps)
    if args.json:
        text = report.to_json()
    elif args.csv:
        text = render_csv(report)
    else:
        text = render_text(report)
    return report, text


def main(argv: list[str] | None = None) -> int:
    try:
        report, text = run(argv)
    except (UsageError, ValueError, KeyError, OSError) as exc:
        print(f"cpapprox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
