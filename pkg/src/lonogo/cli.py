"""Command-line front end.

Exit codes: 0 infeasibility proven (or verification passed), 2 undecided,
3 feasibility proven, 1 any error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import bounds
from .compiler import PolynomialSystem, build_multi_system, compile_task, parse_system
from .errors import LonogoError, ParseError, ResourceLimitError, ValidationError
from .fock import canonicalize, haar_random_target, parse_state, serialize_state
from .nulla import (
    FEASIBLE,
    INFEASIBLE,
    CertificateSearchOptions,
    certify,
    default_memory_budget,
    default_rss_limit_mb,
    parse_certificate,
    verify_certificate,
)
from .reproduce import run_suite, suite_by_name
from .taskio import format_task, parse_multi_task, parse_task

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNDECIDED = 2
EXIT_FEASIBLE = 3

VERDICT_EXIT = {INFEASIBLE: EXIT_OK, FEASIBLE: EXIT_FEASIBLE}

TABLE1_GEOMETRIES = ((2, 0, 3, 0), (3, 1, 4, 1), (2, 0, 4, 0), (3, 1, 5, 1))


def _on_off(text: str) -> bool:
    if text in ("on", "true", "yes", "1"):
        return True
    if text in ("off", "false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError("expected on or off")


def _grading(text: str) -> str:
    mapping = {"on": "torus", "off": "off", "torus": "torus", "degree": "degree"}
    if text not in mapping:
        raise argparse.ArgumentTypeError("expected on, off, torus or degree")
    return mapping[text]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_system(args) -> tuple[PolynomialSystem, str]:
    """Compiled system and a digest of the raw input file."""
    if bool(args.task) == bool(args.multi_task):
        raise LonogoError("give exactly one of --task or --multi-task")
    path = Path(args.task or args.multi_task)
    text = path.read_text(encoding="utf-8")
    digest = hashlib.sha256(text.encode()).hexdigest()
    if args.multi_task:
        return build_multi_system(parse_multi_task(text)), digest
    return compile_task(parse_task(text)), digest


def _search_options(args) -> CertificateSearchOptions:
    return CertificateSearchOptions(
        d_max=args.max_degree,
        include_gamma_in_beta=args.gamma_in_beta,
        grading=args.grading,
        arithmetic=args.arithmetic,
        float_residual_tol=args.tol,
        formulation=args.formulation,
        memory_budget=args.memory_budget if args.memory_budget is not None else default_memory_budget(),
        rss_limit_mb=args.rss_limit_mb if args.rss_limit_mb is not None else default_rss_limit_mb(),
    )


def cmd_compile(args) -> int:
    ps, _ = _load_system(args)
    if args.formulation == "absorbed":
        ps = ps.absorb_gamma()
    _emit(ps.serialize(), args.out)
    return EXIT_OK


def _write_report(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_certify(args) -> int:
    ps, digest = _load_system(args)
    opts = _search_options(args)
    config = {"subcommand": "certify", "input": args.task or args.multi_task, "input_digest": digest,
              "options": opts.to_dict()}
    try:
        report = certify(ps, opts)
    except ResourceLimitError as e:
        partial = getattr(e, "report", None)
        payload = {"config": config, "error": str(e), "resource_stats": e.stats}
        if partial is not None:
            payload["partial"] = partial.to_dict()
            payload["timing"] = partial.to_dict(timing=True)["timing"]
        _write_report(args, payload)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    payload = {"config": config, "report": report.to_dict()}
    if report.certificate is not None:
        cert_path = args.certificate or (str(Path(args.out).with_suffix(".cert")) if args.out else None)
        if cert_path:
            Path(cert_path).write_text(report.certificate.serialize(), encoding="utf-8")
            payload["certificate_file"] = cert_path
    payload["timing"] = report.to_dict(timing=True)["timing"]
    _write_report(args, payload)
    summary = report.verdict
    if report.certificate is not None:
        summary += f" (certificate degree {report.certificate_degree})"
    print(summary, file=sys.stderr)
    return VERDICT_EXIT.get(report.verdict, EXIT_UNDECIDED)


def cmd_verify(args) -> int:
    ps, _ = _load_system(args)
    text = Path(args.certificate).read_text(encoding="utf-8")
    header_form = next((ln.split(":", 1)[1].strip() for ln in text.splitlines()
                        if ln.startswith("form:")), ps.form)
    if header_form == "absorbed" and ps.form == "gamma":
        ps = ps.absorb_gamma()
    cert = parse_certificate(text, ps)
    result = verify_certificate(ps, cert)
    if result:
        print(f"certificate verified: {result.message} (degree {cert.degree})")
        return EXIT_OK
    print(f"certificate rejected: {result.message}")
    return EXIT_ERROR


def cmd_canonicalize(args) -> int:
    target_text = Path(args.target).read_text(encoding="utf-8").strip() if Path(args.target).is_file() \
        else args.target
    target = parse_state(target_text)
    task = canonicalize(args.photons, args.herald_photons, target, args.arithmetic)
    _emit(format_task(task), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    if args.table1:
        rows = []
        for n, m, N, M in TABLE1_GEOMETRIES:
            rows.append({"n": n, "m": m, "N": N, "M": M, "N_T": N - M,
                         "K": bounds.degree_upper_bound(n, m, N, M),
                         "rigorous": bounds.degree_bound_is_rigorous(n)})
        if args.json:
            _emit(json.dumps(rows, indent=2) + "\n", args.out)
        else:
            lines = [f"{'N_T':>4} {'m':>3} {'n':>3} {'N':>3} {'K':>10}"]
            lines += [f"{r['N_T']:>4} {r['m']:>3} {r['n']:>3} {r['N']:>3} {r['K']:>10}" for r in rows]
            _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK
    if None in (args.n, args.m, args.N, args.M):
        raise LonogoError("bounds needs --n, --m, --N and --M (or --table1)")
    prof = bounds.scaling_profile(args.n, args.m, args.N, args.M, range(args.max_degree + 1))
    if args.json:
        _emit(json.dumps(prof.to_dict(), indent=2) + "\n", args.out)
    else:
        _emit(prof.format_text() + "\n", args.out)
    return EXIT_OK


def cmd_random_target(args) -> int:
    state = haar_random_target(args.photons, args.modes, args.seed, args.denominator)
    _emit(serialize_state(state) + "\n", args.out)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    names = args.suite or ["default"]
    if args.extended and names == ["default"]:
        names = ["all"]
    experiments = []
    for name in names:
        experiments += suite_by_name(name)
    if args.max_degree_override is not None:
        experiments = [replace(e, d_max=args.max_degree_override) for e in experiments]
    budget = args.memory_budget if args.memory_budget is not None else default_memory_budget()
    out_dir = Path(args.out) if args.out else None
    report, results = run_suite(experiments, args.seed, budget, out_dir, args.workers,
                                progress=lambda s: print(s, flush=True))
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out_dir is not None:
        (out_dir / "report.json").write_text(text, encoding="utf-8")
    failed = [r for r in results if r.status == "fail"]
    print(f"{len(results) - len(failed)}/{len(results)} experiments without failure")
    return EXIT_ERROR if failed else EXIT_OK


def _add_source(p) -> None:
    p.add_argument("--task", help="task file")
    p.add_argument("--multi-task", dest="multi_task", help="multi-pair task file")


def _add_search(p) -> None:
    p.add_argument("--max-degree", type=int, default=4, help="largest multiplier degree to try")
    p.add_argument("--gamma-in-beta", type=_on_off, default=True, metavar="on|off")
    p.add_argument("--grading", type=_grading, default="torus", metavar="on|off|torus|degree")
    p.add_argument("--arithmetic", choices=("exact", "float"), default="exact")
    p.add_argument("--tol", type=float, default=1e-9, help="float-mode residual tolerance")
    p.add_argument("--formulation", choices=("absorbed", "gamma"), default="absorbed")
    p.add_argument("--memory-budget", type=int, default=None,
                   help="cap on stored nonzeros (default NULLA_MEMORY_BUDGET or 2e7)")
    p.add_argument("--rss-limit-mb", type=float, default=None,
                   help="abort past this peak resident memory (default NULLA_RSS_LIMIT_MB or 3/4 of RAM)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lonogo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a task into a polynomial system")
    _add_source(p)
    p.add_argument("--formulation", choices=("gamma", "absorbed"), default="gamma")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("certify", help="search for an infeasibility certificate")
    _add_source(p)
    _add_search(p)
    p.add_argument("--out", help="report file (JSON); certificate goes next to it")
    p.add_argument("--certificate", help="certificate output path")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="re-verify a certificate against a task")
    _add_source(p)
    p.add_argument("--certificate", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("canonicalize", help="optimal input and heralding for a target")
    p.add_argument("--photons", "-n", type=int, required=True)
    p.add_argument("--herald-photons", "-m", type=int, required=True)
    p.add_argument("--target", required=True, help="state file or state text")
    p.add_argument("--arithmetic", choices=("exact", "float"), default="exact")
    p.add_argument("--out")
    p.set_defaults(func=cmd_canonicalize)

    p = sub.add_parser("bounds", help="degree bound and linear-system sizes")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--max-degree", type=int, default=9)
    p.add_argument("--table1", action="store_true", help="the four Haar-random geometries")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("random-target", help="rationalized Haar-random target state")
    p.add_argument("--photons", type=int, required=True)
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--denominator", type=int, default=2 ** 16)
    p.add_argument("--out")
    p.set_defaults(func=cmd_random_target)

    p = sub.add_parser("reproduce", help="run the published experiments")
    p.add_argument("suite", nargs="*", help="default, extended, all, or experiment names")
    p.add_argument("--extended", action="store_true", help="include the long-running experiments")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--memory-budget", type=int, default=None)
    p.add_argument("--max-degree", dest="max_degree_override", type=int, default=None,
                   help="override every experiment's degree cap")
    p.add_argument("--out", help="directory for report.json and certificate files")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ParseError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (LonogoError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
