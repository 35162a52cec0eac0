"""Nullstellensatz certificate search (NulLA).

For a degree ``d`` every equation ``f_k`` gets a multiplier ``beta_k`` with
unknown coefficients on the monomials of degree ``<= d``. Matching
coefficients of ``sum_k beta_k f_k = 1`` monomial by monomial gives a sparse
linear system; any solution is an infeasibility certificate.

Three lossless reductions keep that system small:

* multiplier monomials only use variables occurring in some equation
  (set the others to zero in a certificate and it stays one);
* the grading filter of :mod:`lonogo.grading`;
* only the connected component of the constant-monomial row is solved,
  because the other blocks have a zero right-hand side.

A certificate is emitted only after ``sum beta_k f_k`` has been expanded
symbolically and compared with 1.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import bounds
from .algebra import (
    ONE,
    ZERO,
    GaussianRational,
    MultiPoly,
    format_exponent,
    grevlex_key,
    parse_terms,
    poly_mul,
    serialize_terms,
)
from .compiler import PolynomialSystem
from .errors import ContractError, InternalConsistencyError, ParseError, ResourceLimitError
from .grading import GRADINGS, Grading
from .linsolve import SparseMatrix, solve_exact, solve_float

log = logging.getLogger(__name__)

INFEASIBLE = "INFEASIBLE_PROVEN"
UNDECIDED = "UNDECIDED"
FEASIBLE = "FEASIBLE_PROVEN"

DEFAULT_MEMORY_BUDGET = 20_000_000


def default_memory_budget() -> int:
    env = os.environ.get("NULLA_MEMORY_BUDGET")
    return int(env) if env else DEFAULT_MEMORY_BUDGET


def default_rss_limit_mb() -> float | None:
    """``NULLA_RSS_LIMIT_MB``, else three quarters of physical memory."""
    env = os.environ.get("NULLA_RSS_LIMIT_MB")
    if env:
        return float(env)
    try:
        return 0.75 * os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_PHYS_PAGES") / 2 ** 20
    except (ValueError, OSError, AttributeError):
        return None


@dataclass
class CertificateSearchOptions:
    """Knobs of the search.

    ``grading`` is ``"torus"``, ``"degree"`` or ``"off"`` (``True``/``False``
    map to ``"torus"``/``"off"``). ``formulation`` chooses between keeping
    gamma as a variable (``"gamma"``) and scaling it into ``A``
    (``"absorbed"``). ``memory_budget`` caps stored nonzeros and
    ``rss_limit_mb`` the process's peak resident memory during elimination.
    """

    d_max: int = 4
    include_gamma_in_beta: bool = True
    grading: str = "torus"
    arithmetic: str = "exact"
    float_residual_tol: float = 1e-9
    formulation: str = "absorbed"
    memory_budget: int = field(default_factory=default_memory_budget)
    rss_limit_mb: float | None = field(default_factory=default_rss_limit_mb)
    support_only: bool = True
    component_only: bool = True

    def __post_init__(self):
        if self.grading is True:
            self.grading = "torus"
        elif self.grading is False:
            self.grading = "off"
        if self.d_max < 0:
            raise ContractError("d_max must be nonnegative")
        if self.grading not in GRADINGS:
            raise ContractError(f"grading must be one of {GRADINGS}")
        if self.arithmetic not in ("exact", "float"):
            raise ContractError("arithmetic must be 'exact' or 'float'")
        if self.formulation not in ("gamma", "absorbed"):
            raise ContractError("formulation must be 'gamma' or 'absorbed'")
        if self.float_residual_tol < 0:
            raise ContractError("float_residual_tol must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)


def prepare_system(ps: PolynomialSystem, opts: CertificateSearchOptions) -> PolynomialSystem:
    if opts.formulation == "absorbed" and ps.form == "gamma":
        return ps.absorb_gamma()
    if opts.formulation == "gamma" and ps.form != "gamma":
        raise ContractError("the gamma formulation needs a gamma-form system")
    return ps


# ---------------------------------------------------------------------------
# assembly


def monomials_upto(nvars: int, d: int) -> np.ndarray:
    """All exponent rows of total degree ``<= d``, in ascending grevlex order."""
    arr = np.zeros((1, 0), dtype=np.int16)
    deg = np.zeros(1, dtype=np.int64)
    for _ in range(nvars):
        reps = d - deg + 1
        total = int(reps.sum())
        offsets = np.repeat(np.cumsum(reps) - reps, reps)
        e = np.arange(total) - offsets
        arr = np.concatenate([np.repeat(arr, reps, axis=0), e[:, None].astype(np.int16)], axis=1)
        deg = np.repeat(deg, reps) + e
    if nvars == 0:
        return arr
    keys = [-arr[:, k] for k in range(nvars)] + [deg]
    return arr[np.lexsort(keys)]


@dataclass
class SparseLinearSystem:
    matrix: SparseMatrix
    rhs: list[GaussianRational]
    rows: list[tuple[int, ...]]
    columns: list[tuple[int, tuple[int, ...]]]
    const_row: int
    degree: int

    @property
    def nnz(self) -> int:
        return self.matrix.nnz


def beta_candidates(ps: PolynomialSystem, d: int, opts: CertificateSearchOptions,
                    grading: Grading | None = None) -> list[np.ndarray]:
    """Per equation, the multiplier monomials allowed at degree ``<= d``."""
    V = len(ps.vs)
    g = ps.vs.gamma_index
    if opts.support_only:
        used = sorted({k for f in ps.equations for e in f.terms for k, x in enumerate(e) if x})
    else:
        used = list(range(V))
    if g is not None and not opts.include_gamma_in_beta:
        used = [k for k in used if k != g]
    count = bounds.comb(len(used) + d, d)
    if count > opts.memory_budget:
        raise ResourceLimitError(
            f"{count} candidate multiplier monomials exceed the memory budget {opts.memory_budget}",
            {"degree": d, "candidates": count},
        )
    sub = monomials_upto(len(used), d)
    full = np.zeros((len(sub), V), dtype=np.int16)
    full[:, used] = sub
    if grading is None:
        return [full] * len(ps.equations)
    classes = grading.classes(full)
    out = []
    cache: dict[bytes, np.ndarray] = {}
    for k in range(len(ps.equations)):
        key = grading.targets[k].tobytes()
        if key not in cache:
            cache[key] = full[grading.allowed(full, k, classes)]
        out.append(cache[key])
    return out


def make_grading(ps: PolynomialSystem, opts: CertificateSearchOptions) -> Grading | None:
    if opts.grading == "off":
        return None
    return Grading(ps.vs, ps.equations, opts.grading)


def assemble(ps: PolynomialSystem, d: int, opts: CertificateSearchOptions,
             grading: Grading | None = None, candidates: list[np.ndarray] | None = None
             ) -> SparseLinearSystem:
    """Build the degree-``d`` linear system for the multiplier coefficients.

    Columns are ``(equation, monomial)`` pairs in equation order then grevlex
    order; rows are the product monomials, in lexicographic order of their
    exponent tuples, with the constant monomial always present.
    """
    if d > opts.d_max:
        raise ContractError(f"degree {d} exceeds d_max={opts.d_max}")
    if candidates is None:
        if grading is None and opts.grading != "off":
            grading = make_grading(ps, opts)
        candidates = beta_candidates(ps, d, opts, grading)
    V = len(ps.vs)
    projected = sum(len(c) * len(f) for c, f in zip(candidates, ps.equations))
    if projected > opts.memory_budget:
        raise ResourceLimitError(
            f"degree {d} needs about {projected} nonzeros, over the memory budget {opts.memory_budget}",
            {"degree": d, "projected_nnz": projected},
        )
    columns = []
    prods = []
    col_ids = []
    coefs = []
    col = 0
    for k, (cands, f) in enumerate(zip(candidates, ps.equations)):
        if not len(cands):
            continue
        terms = sorted(f.terms.items(), key=lambda t: grevlex_key(t[0]))
        T = np.array([e for e, _ in terms], dtype=np.int16).reshape(-1, V)
        P = (cands[:, None, :] + T[None, :, :]).reshape(-1, V)
        prods.append(P)
        ncols = len(cands)
        col_ids.append(np.repeat(np.arange(col, col + ncols), len(terms)))
        coefs.extend([c for _, c in terms] * ncols)
        columns.extend((k, tuple(int(x) for x in nu)) for nu in cands)
        col += ncols
    zero = np.zeros((1, V), dtype=np.int16)
    allp = np.concatenate(prods + [zero]) if prods else zero
    uniq, inv = np.unique(allp, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    const_row = int(inv[-1])
    inv = inv[:-1]
    cids = np.concatenate(col_ids) if col_ids else np.zeros(0, dtype=np.int64)
    M = SparseMatrix(len(uniq), len(columns))
    rows = M.rows
    for r, c, v in zip(inv.tolist(), cids.tolist(), coefs):
        row = rows[r]
        if c in row:
            s = row[c] + v
            if s:
                row[c] = s
            else:
                del row[c]
        else:
            row[c] = v
    rhs = [ZERO] * len(uniq)
    rhs[const_row] = ONE
    return SparseLinearSystem(M, rhs, [tuple(int(x) for x in u) for u in uniq], columns, const_row, d)


def constant_component(ls: SparseLinearSystem) -> tuple[list[int], list[int]]:
    """Rows and columns connected to the constant-monomial row."""
    import scipy.sparse as sp
    from scipy.sparse.csgraph import connected_components

    R, C = ls.matrix.nrows, ls.matrix.ncols
    ri, ci = [], []
    for r, row in enumerate(ls.matrix.rows):
        for c in row:
            ri.append(r)
            ci.append(R + c)
    g = sp.coo_matrix((np.ones(len(ri), dtype=np.int8), (ri, ci)), shape=(R + C, R + C))
    _, labels = connected_components(g, directed=False)
    lab = labels[ls.const_row]
    rows = [r for r in range(R) if labels[r] == lab]
    cols = [c for c in range(C) if labels[R + c] == lab]
    return rows, cols


# ---------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    degree: int
    betas: list[MultiPoly]
    tags: list[str]
    provenance: dict = field(default_factory=dict)

    @property
    def vs(self):
        return self.betas[0].vs

    def serialize(self) -> str:
        prov = dict(self.provenance)
        lines = [
            "# lonogo certificate v1",
            f"system_digest: {prov.pop('system_digest', '')}",
            f"form: {prov.pop('form', '')}",
            f"degree: {self.degree}",
            f"options: {json.dumps(prov.pop('options', {}), sort_keys=True)}",
            f"provenance: {json.dumps(prov, sort_keys=True)}",
            f"variables: {' '.join(self.vs.names())}",
            f"equations: {len(self.betas)}",
        ]
        for tag, b in zip(self.tags, self.betas):
            lines.append(f"{tag} := {serialize_terms(b)}")
        return "\n".join(lines) + "\n"


def parse_certificate(text: str, ps: PolynomialSystem) -> Certificate:
    """Read a certificate file against the system it claims to certify."""
    header: dict[str, str] = {}
    betas, tags = [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if ":=" in line:
            tag, _, body = line.partition(":=")
            try:
                betas.append(parse_terms(body, ps.vs))
            except ParseError as e:
                raise ParseError(str(e), line=lineno) from None
            tags.append(tag.strip())
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ParseError("expected 'key: value'", line=lineno)
        header[key.strip()] = value.strip()
    if header.get("variables", "").split() != ps.vs.names():
        raise ParseError("certificate variable order does not match the system")
    if len(betas) != len(ps.equations):
        raise ParseError(f"certificate has {len(betas)} multipliers for {len(ps.equations)} equations")
    prov = json.loads(header.get("provenance", "{}"))
    prov.update(system_digest=header.get("system_digest", ""), form=header.get("form", ""),
                options=json.loads(header.get("options", "{}")))
    return Certificate(int(header.get("degree", "0")), betas, tags, prov)


@dataclass
class VerificationResult:
    ok: bool
    message: str = ""
    monomial: tuple[int, ...] | None = None
    coefficient: GaussianRational | None = None

    def __bool__(self) -> bool:
        return self.ok


def certificate_sum(ps: PolynomialSystem, betas: list[MultiPoly]) -> MultiPoly:
    total = MultiPoly.zero(ps.vs)
    for b, f in zip(betas, ps.equations):
        if b:
            total = total + poly_mul(b, f)
    return total


def verify_certificate(ps: PolynomialSystem, cert: Certificate) -> VerificationResult:
    """Expand ``sum beta_k f_k`` exactly and compare with the constant 1."""
    if cert.vs != ps.vs:
        return VerificationResult(False, "variable order differs from the system")
    if len(cert.betas) != len(ps.equations):
        return VerificationResult(False, "wrong number of multipliers")
    digest = cert.provenance.get("system_digest")
    if digest and digest != ps.digest():
        return VerificationResult(False, "certificate was issued for a different system")
    total = certificate_sum(ps, cert.betas)
    want = MultiPoly.constant(ps.vs, 1)
    diff = total - want
    if diff:
        e, c = diff.sorted_terms()[0]
        return VerificationResult(
            False, f"sum differs from 1 at monomial [{format_exponent(e)}] by {c}", e, c)
    actual = max((b.degree() for b in cert.betas), default=-1)
    if actual != cert.degree:
        return VerificationResult(False, f"declared degree {cert.degree}, multipliers reach {actual}")
    return VerificationResult(True, "sum of beta_k f_k equals 1")


def _rationalize(z: complex, max_den: int = 10 ** 6) -> GaussianRational:
    return GaussianRational(Fraction(z.real).limit_denominator(max_den),
                            Fraction(z.imag).limit_denominator(max_den))


def _betas_from_solution(ps, ls, cols, x) -> list[dict]:
    betas = [dict() for _ in ps.equations]
    for c, v in zip(cols, x):
        if v:
            k, nu = ls.columns[c]
            betas[k][nu] = v
    return betas


@dataclass
class DegreeOutcome:
    degree: int
    columns: int
    rows: int
    nonzeros: int
    component_rows: int
    component_columns: int
    outcome: str
    elapsed: float = 0.0
    note: str = ""

    def to_dict(self, timing: bool = False) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("elapsed")
        return d


def _search_degree(ps, d, opts, grading, candidates, prov) -> tuple[Certificate | None, DegreeOutcome]:
    t0 = time.perf_counter()
    ls = assemble(ps, d, opts, grading, candidates)
    if opts.component_only:
        rows, cols = constant_component(ls)
    else:
        rows, cols = list(range(ls.matrix.nrows)), list(range(ls.matrix.ncols))
    cpos = {c: p for p, c in enumerate(cols)}
    sub = SparseMatrix(len(rows), len(cols))
    for p, r in enumerate(rows):
        sub.rows[p] = {cpos[c]: v for c, v in ls.matrix.rows[r].items() if c in cpos}
    rhs = [ls.rhs[r] for r in rows]
    outcome = DegreeOutcome(d, ls.matrix.ncols, ls.matrix.nrows, ls.nnz, len(rows), len(cols), "none")
    x = None
    if opts.arithmetic == "exact":
        res = solve_exact(sub, rhs, max_entries=opts.memory_budget, max_rss_mb=opts.rss_limit_mb)
        if res.consistent:
            x = res.solution
    else:
        fres = solve_float(sub, rhs, tol=opts.float_residual_tol)
        outcome.note = f"float residual {fres.residual:.3e} ({fres.status})"
        if fres.status == "consistent-at-tol":
            x = [_rationalize(complex(v)) for v in fres.solution]
    cert = None
    if x is not None:
        terms = _betas_from_solution(ps, ls, cols, x)
        betas = [MultiPoly(ps.vs, t) for t in terms]
        degree = max((b.degree() for b in betas), default=0)
        cert = Certificate(degree, betas, list(ps.tags), dict(prov))
        check = verify_certificate(ps, cert)
        if not check:
            if opts.arithmetic == "exact":
                raise InternalConsistencyError(
                    f"solver returned a solution at degree {d} that fails verification: {check.message}")
            outcome.note += "; rationalized candidate failed exact verification"
            cert = None
    if cert is not None:
        outcome.outcome = "certificate"
    outcome.elapsed = time.perf_counter() - t0
    return cert, outcome


def _provenance(ps: PolynomialSystem, opts: CertificateSearchOptions) -> dict:
    return {"system_digest": ps.digest(), "form": ps.form, "options": opts.to_dict()}


def find_certificate(ps: PolynomialSystem, d: int, opts: CertificateSearchOptions) -> Certificate | None:
    """Certificate with multipliers of degree ``<= d``, or ``None``."""
    ps = prepare_system(ps, opts)
    grading = make_grading(ps, opts)
    cands = beta_candidates(ps, d, opts, grading)
    cert, _ = _search_degree(ps, d, opts, grading, cands, _provenance(ps, opts))
    return cert


@dataclass
class NullaReport:
    verdict: str
    degrees: list[DegreeOutcome]
    certificate: Certificate | None
    system: PolynomialSystem
    options: CertificateSearchOptions
    degree_bound: int | None = None
    degree_bound_note: str = ""
    aborted: str = ""

    @property
    def certificate_degree(self) -> int | None:
        return self.certificate.degree if self.certificate else None

    @property
    def first_success_degree(self) -> int | None:
        for o in self.degrees:
            if o.outcome == "certificate":
                return o.degree
        return None

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "verdict": self.verdict,
            "certificate_degree": self.certificate_degree,
            "first_success_degree": self.first_success_degree,
            "system_digest": self.system.digest(),
            "formulation": self.system.form,
            "equations": len(self.system.equations),
            "variables": len(self.system.vs),
            "degree_bound": self.degree_bound,
            "degree_bound_note": self.degree_bound_note,
            "options": self.options.to_dict(),
            "degrees": [o.to_dict() for o in self.degrees],
        }
        if self.aborted:
            out["aborted"] = self.aborted
        if timing:
            out["timing"] = {str(o.degree): round(o.elapsed, 6) for o in self.degrees}
        return out


def _degree_bound(ps: PolynomialSystem) -> tuple[int | None, str, bool]:
    info = ps.info
    keys = ("n", "m", "N", "M")
    if ps.form != "absorbed" or not all(k in info for k in keys) or info.get("pairs"):
        return None, "no closed-form bound for this system", False
    n, m, N, M = (info[k] for k in keys)
    if n < 2 or n <= m:
        return None, "bound undefined for n < 2", False
    K = bounds.degree_upper_bound(n, m, N, M)
    rigorous = bounds.degree_bound_is_rigorous(n) and len(ps.vs) >= 2
    note = "Kollar" if rigorous else bounds.N2_BRANCH_NOTE
    return K, note, rigorous


def certify(ps: PolynomialSystem, opts: CertificateSearchOptions) -> NullaReport:
    """Search degrees ``0..d_max`` and stop at the first certificate.

    A resource abort raises :class:`ResourceLimitError` whose ``report``
    attribute holds the partial report.
    """
    ps = prepare_system(ps, opts)
    grading = make_grading(ps, opts)
    prov = _provenance(ps, opts)
    K, note, rigorous = _degree_bound(ps)
    report = NullaReport(UNDECIDED, [], None, ps, opts, K, note)
    prev_sizes = None
    prev_outcome = None
    for d in range(opts.d_max + 1):
        try:
            cands = beta_candidates(ps, d, opts, grading)
            sizes = [len(c) for c in cands]
            if sizes == prev_sizes and prev_outcome is not None:
                o = DegreeOutcome(d, prev_outcome.columns, prev_outcome.rows, prev_outcome.nonzeros,
                                  prev_outcome.component_rows, prev_outcome.component_columns,
                                  "none", 0.0, "no new multiplier monomials")
                report.degrees.append(o)
                continue
            cert, o = _search_degree(ps, d, opts, grading, cands, prov)
        except ResourceLimitError as e:
            report.aborted = f"resource limit at degree {d}: {e}"
            e.report = report
            raise
        log.info("degree %d: %d columns, %d rows, outcome %s", d, o.columns, o.rows, o.outcome)
        report.degrees.append(o)
        prev_sizes, prev_outcome = sizes, o
        if cert is not None:
            report.verdict = INFEASIBLE
            report.certificate = cert
            return report
    if (opts.arithmetic == "exact" and rigorous and K is not None and opts.d_max >= K):
        report.verdict = FEASIBLE
    return report
