"""Measured linear-system sizes and solve times per degree, next to the closed-form bounds.

Usage: python scripts/timing.py [noon3|noon4|bell3|table1-rowR] [--max-degree D] [--grading G]
"""

import argparse

from lonogo import bounds
from lonogo.compiler import compile_task
from lonogo.nulla import CertificateSearchOptions, certify
from lonogo.reproduce import bell_task, noon_task, table1_task


def task_by_name(name: str):
    if name.startswith("noon"):
        return noon_task(int(name[4:]))
    if name == "bell3":
        return bell_task()
    if name.startswith("table1-row"):
        return table1_task(int(name[len("table1-row"):]), 0, seed=0)
    raise SystemExit(f"unknown task {name!r}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("task", nargs="?", default="noon3")
    ap.add_argument("--max-degree", type=int, default=4)
    ap.add_argument("--grading", default="torus", choices=("off", "degree", "torus"))
    a = ap.parse_args()
    ps = compile_task(task_by_name(a.task))
    report = certify(ps, CertificateSearchOptions(d_max=a.max_degree, grading=a.grading))
    info = report.system.info
    geom = tuple(info.get(k) for k in ("n", "m", "N", "M"))
    print(f"{a.task}: {len(report.system.equations)} equations, {len(report.system.vs)} variables, "
          f"verdict {report.verdict}" + (f" at degree {report.certificate_degree}" if report.certificate else ""))
    print(f"{'d':>3} {'cols':>8} {'col bound':>12} {'rows':>8} {'row bound':>12} {'solved':>10} {'sec':>8}")
    for o in report.degrees:
        cb = bounds.column_bound(*geom, o.degree) if None not in geom else "-"
        rb = bounds.row_bound(*geom, o.degree) if None not in geom else "-"
        print(f"{o.degree:>3} {o.columns:>8} {cb:>12} {o.rows:>8} {rb:>12} "
              f"{o.component_columns:>10} {o.elapsed:>8.2f}")
