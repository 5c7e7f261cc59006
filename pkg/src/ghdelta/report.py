"""CSV report rows for classify and sweep runs.

Numbers are written with ``repr`` of a Python float (the shortest string that
reads back to the same double), so a fixed scenario always yields the same
bytes.  Missing values are empty cells.
"""

from __future__ import annotations

import csv
import math
from typing import IO, Iterable, Sequence

from .derivative import DerivativeResult, derivative
from .scenario import Scenario

SWEEP_HEADER = ("t0", "pointClass", "caseTag", "alpha0", "alpha", "a", "b", "sigmaResidual")


def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x + 0.0)  # folds -0.0 into 0.0


def alpha_label(alpha: float) -> str:
    return f"{float(alpha):g}"


def analyze(scn: Scenario) -> list[DerivativeResult]:
    """Derivative results for every selected point, sorted by time."""
    pts = sorted(set(float(p) for p in scn.resolved_points()))
    return [derivative(scn.function, t, scn.plan, scn.tolerances) for t in pts]


def classify_header(scn: Scenario) -> list[str]:
    cols = ["t0", "pointClass", "caseTag", "alpha0"]
    for a in scn.grid.levels:
        lab = alpha_label(a)
        cols += [f"a_{lab}", f"b_{lab}"]
    return cols + ["sigmaResidual", "uniformityDeficit"]


def classify_rows(scn: Scenario, results: Iterable[DerivativeResult]) -> list[list[str]]:
    rows = []
    n = len(scn.grid)
    for r in results:
        rep = r.case_report
        row = [fmt(r.t0), rep.point_class.label, rep.case_tag.value, fmt(rep.alpha0)]
        if r.derivative is not None:
            for lo, up in zip(r.derivative.lower, r.derivative.upper):
                row += [fmt(lo), fmt(up)]
        else:
            row += [""] * (2 * n)
        row += [fmt(r.sigma_residual), fmt(r.uniformity_deficit)]
        rows.append(row)
    return rows


def sweep_rows(scn: Scenario, results: Iterable[DerivativeResult]) -> list[list[str]]:
    rows = []
    for r in results:
        rep = r.case_report
        head = [fmt(r.t0), rep.point_class.label, rep.case_tag.value, fmt(rep.alpha0)]
        for k, a in enumerate(scn.grid.levels):
            if r.derivative is not None:
                ab = [fmt(r.derivative.lower[k]), fmt(r.derivative.upper[k])]
            else:
                ab = ["", ""]
            rows.append(head + [fmt(a)] + ab + [fmt(r.sigma_residual)])
    return rows


def write_csv(fh: IO[str], header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def render_sweep(scn: Scenario) -> str:
    import io

    buf = io.StringIO()
    write_csv(buf, SWEEP_HEADER, sweep_rows(scn, analyze(scn)))
    return buf.getvalue()
