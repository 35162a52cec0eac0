"""Named reproduction experiments and the suite runner.

Every experiment carries its expected outcome, taken from the published
results: a verdict and, for infeasible tasks, a ceiling on the certificate
degree. An experiment passes when the verdict matches and the measured
degree does not exceed the ceiling. Resource aborts are reported as
``skipped (resources)``.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .compiler import build_multi_system, compile_task
from .errors import ResourceLimitError
from .fock import MultiTaskSpec, PureState, TaskSpec, canonicalize, haar_random_target, parse_state
from .nulla import (
    INFEASIBLE,
    UNDECIDED,
    CertificateSearchOptions,
    certify,
    parse_certificate,
    verify_certificate,
)

NOON_CEILINGS = {3: 3, 4: 4, 5: 5, 6: 6, 7: 8}

# row -> (input photons n, heralding photons m, target modes, expected degree or None)
TABLE1_ROWS = {
    1: (2, 0, 3, 4),
    2: (3, 1, 3, None),
    3: (2, 0, 4, 4),
    4: (3, 1, 4, 9),
}

CNOT_TRUTH_TABLE = (
    ((1, 0, 1, 0), (1, 0, 1, 0)),
    ((1, 0, 0, 1), (1, 0, 0, 1)),
    ((0, 1, 1, 0), (0, 1, 0, 1)),
    ((0, 1, 0, 1), (0, 1, 1, 0)),
)


def noon_task(n: int) -> TaskSpec:
    """``|2,1,...,1>`` into ``|n,0> + |0,n>``, heralding vacuum on the extra modes."""
    modes = n - 1
    return TaskSpec(modes, PureState.fock((2,) + (1,) * (n - 2)), (0,) * (modes - 2),
                    parse_state(f"1 : {n} 0 ; 1 : 0 {n}"), name=f"noon{n}")


def bell_task() -> TaskSpec:
    bell = parse_state("1 : 1 0 1 0 ; 1 : 0 1 0 1")
    return replace(canonicalize(3, 1, bell), name="bell3")


def cnot_task(ancilla_photons: int = 1) -> MultiTaskSpec:
    """Dual-rail CNOT truth table with ``ancilla_photons`` heralded single photons."""
    k = ancilla_photons
    pairs = tuple((PureState.fock(i + (1,) * k), PureState.fock(o)) for i, o in CNOT_TRUTH_TABLE)
    return MultiTaskSpec(4 + k, (1,) * k, pairs, name=f"cnot{k}")


def table1_task(row: int, sample: int, seed: int) -> TaskSpec:
    n, m, nt, _ = TABLE1_ROWS[row]
    target = haar_random_target(2, nt, seed + sample)
    return replace(canonicalize(n, m, target), name=f"table1-row{row}-sample{sample}")


@dataclass
class Experiment:
    name: str
    kind: str
    expected_verdict: str
    ceiling: int | None
    d_max: int
    params: dict = field(default_factory=dict)
    source: str = "published result"

    def tasks(self, seed: int):
        if self.kind == "noon":
            return [noon_task(self.params["n"])]
        if self.kind == "bell":
            return [bell_task()]
        if self.kind == "cnot":
            return [cnot_task(self.params.get("ancilla", 1))]
        if self.kind == "table1":
            return [table1_task(self.params["row"], k, seed) for k in range(self.params["samples"])]
        raise ValueError(f"unknown experiment kind {self.kind!r}")


def noon(n: int) -> Experiment:
    c = NOON_CEILINGS[n]
    return Experiment(f"noon{n}", "noon", INFEASIBLE, c, c, {"n": n})


def table1(row: int, samples: int, d_max: int | None = None) -> Experiment:
    expected = TABLE1_ROWS[row][3]
    if expected is None:
        return Experiment(f"table1-row{row}", "table1", UNDECIDED, None, d_max if d_max is not None else 3,
                          {"row": row, "samples": samples})
    return Experiment(f"table1-row{row}", "table1", INFEASIBLE, expected,
                      d_max if d_max is not None else expected, {"row": row, "samples": samples})


def default_suite() -> list[Experiment]:
    return [noon(3), noon(4), table1(1, 20), table1(3, 20), table1(2, 5, 3)]


def extended_suite() -> list[Experiment]:
    return [
        Experiment("bell3", "bell", INFEASIBLE, 9, 9),
        Experiment("cnot1", "cnot", INFEASIBLE, 6, 6, {"ancilla": 1}),
        noon(5), noon(6), noon(7),
        table1(2, 5, 9),
        table1(4, 5),
    ]


def suite_by_name(name: str) -> list[Experiment]:
    """``default``, ``extended``, ``all`` or a single experiment name such as ``noon5``."""
    if name == "default":
        return default_suite()
    if name == "extended":
        return extended_suite()
    if name == "all":
        return default_suite() + extended_suite()
    for e in default_suite() + extended_suite():
        if e.name == name:
            return [e]
    if name.startswith("noon") and name[4:].isdigit() and int(name[4:]) in NOON_CEILINGS:
        return [noon(int(name[4:]))]
    raise ValueError(f"unknown suite or experiment {name!r}")


@dataclass
class SampleResult:
    task: str
    verdict: str
    degree: int | None
    passed: bool
    skipped: bool = False
    certificate_file: str = ""
    reverified: bool | None = None
    note: str = ""
    elapsed: float = 0.0


@dataclass
class ExperimentResult:
    experiment: Experiment
    status: str
    samples: list[SampleResult]
    elapsed: float = 0.0

    @property
    def max_degree(self) -> int | None:
        degs = [s.degree for s in self.samples if s.degree is not None]
        return max(degs) if degs else None

    def to_dict(self) -> dict:
        exp = asdict(self.experiment)
        samples = []
        for s in self.samples:
            d = asdict(s)
            d.pop("elapsed")
            samples.append(d)
        return {"experiment": exp, "status": self.status, "measured_degree": self.max_degree,
                "samples": samples}

    def line(self) -> str:
        e = self.experiment
        want = f"{e.expected_verdict}" + (f", degree <= {e.ceiling}" if e.ceiling is not None else
                                         f" up to d={e.d_max}")
        got = ", ".join(sorted({s.verdict for s in self.samples}))
        deg = self.max_degree
        return (f"{self.status.upper():<20} {e.name:<14} expected {want}; got {got}"
                + (f" at degree {deg}" if deg is not None else "") + f" [{len(self.samples)} task(s), "
                + f"{self.elapsed:.1f}s]")


def _run_one(task, exp: Experiment, memory_budget: int, out_dir: Path | None) -> SampleResult:
    t0 = time.perf_counter()
    opts = CertificateSearchOptions(d_max=exp.d_max, memory_budget=memory_budget)
    ps = build_multi_system(task) if isinstance(task, MultiTaskSpec) else compile_task(task)
    try:
        report = certify(ps, opts)
    except ResourceLimitError as e:
        return SampleResult(task.name, "skipped", None, False, True, note=str(e),
                            elapsed=time.perf_counter() - t0)
    res = SampleResult(task.name, report.verdict, report.certificate_degree, False)
    if report.certificate is not None:
        text = report.certificate.serialize()
        if out_dir is not None:
            path = out_dir / f"{task.name}.cert"
            path.write_text(text, encoding="utf-8")
            res.certificate_file = path.name
        res.reverified = bool(verify_certificate(report.system, parse_certificate(text, report.system)))
    if exp.expected_verdict == INFEASIBLE:
        res.passed = (report.verdict == INFEASIBLE and bool(res.reverified)
                      and report.certificate_degree <= exp.ceiling)
    else:
        res.passed = report.verdict == exp.expected_verdict
    res.elapsed = time.perf_counter() - t0
    return res


def run_experiment(exp: Experiment, seed: int = 0, memory_budget: int = 20_000_000,
                   out_dir: Path | None = None, progress=None) -> ExperimentResult:
    t0 = time.perf_counter()
    samples = []
    for task in exp.tasks(seed):
        s = _run_one(task, exp, memory_budget, out_dir)
        samples.append(s)
        if progress:
            progress(f"  {task.name}: {s.verdict}" + (f" (degree {s.degree})" if s.degree is not None else ""))
    if any(not s.passed and not s.skipped for s in samples):
        status = "fail"
    elif any(s.skipped for s in samples):
        status = "skipped (resources)"
    else:
        status = "pass"
    return ExperimentResult(exp, status, samples, time.perf_counter() - t0)


def _worker(args):
    exp, seed, budget, out_dir = args
    return run_experiment(exp, seed, budget, Path(out_dir) if out_dir else None)


def run_suite(experiments: list[Experiment], seed: int = 0, memory_budget: int = 20_000_000,
              out_dir=None, workers: int = 1, progress=None) -> tuple[dict, list[ExperimentResult]]:
    """Run experiments, optionally in parallel; return ``(report, results)``.

    Results are listed in suite order whatever the worker count. Wall-clock
    times live under ``timing`` so the rest of the report is reproducible.
    """
    out = Path(out_dir) if out_dir else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    if workers > 1 and len(experiments) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_worker, [(e, seed, memory_budget, str(out) if out else None)
                                              for e in experiments]))
        if progress:
            for r in results:
                progress(r.line())
    else:
        results = []
        for e in experiments:
            if progress:
                progress(f"running {e.name}")
            r = run_experiment(e, seed, memory_budget, out, progress)
            results.append(r)
            if progress:
                progress(r.line())
    config = {"experiments": [e.name for e in experiments], "seed": seed, "memory_budget": memory_budget}
    report = {
        "config": config,
        "config_digest": hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest(),
        "results": [r.to_dict() for r in results],
        "summary": {r.experiment.name: r.status for r in results},
        "timing": {r.experiment.name: {"total": round(r.elapsed, 3),
                                       "tasks": {s.task: round(s.elapsed, 3) for s in r.samples}}
                   for r in results},
    }
    return report, results
