"""Exact sparse linear solver over Q(i), plus a floating-point screen.

Elimination keeps every row as a ``{col: value}`` dict. Pivots are chosen
by the sparsest remaining column, then the sparsest row inside it, with
ties broken by lowest index, so runs are fully deterministic.

Systems whose entries are all real are eliminated over Q with plain
``mpq`` values. The rank of a rational matrix does not change when
passing to Q(i), so the verdict is the same and the arithmetic is cheaper.
"""

from __future__ import annotations

import heapq
import resource
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from gmpy2 import mpq

from .algebra import ONE, ZERO, GaussianRational, format_gaussian, parse_gaussian
from .errors import ContractError, ParseError, ResourceLimitError


class SparseMatrix:
    """Row-major sparse matrix of Gaussian rationals without stored zeros."""

    def __init__(self, nrows: int, ncols: int, entries: Iterable[tuple[int, int, object]] = ()):
        self.nrows = nrows
        self.ncols = ncols
        self.rows: list[dict[int, GaussianRational]] = [dict() for _ in range(nrows)]
        for r, c, v in entries:
            self.add(r, c, v)

    def add(self, r: int, c: int, v) -> None:
        if not (0 <= r < self.nrows and 0 <= c < self.ncols):
            raise ContractError(f"entry ({r}, {c}) outside a {self.nrows}x{self.ncols} matrix")
        v = GaussianRational.coerce(v)
        row = self.rows[r]
        s = row[c] + v if c in row else v
        if s:
            row[c] = s
        else:
            row.pop(c, None)

    @classmethod
    def from_rows(cls, ncols: int, rows: Sequence[dict]) -> "SparseMatrix":
        m = cls(len(rows), ncols)
        for r, row in enumerate(rows):
            for c, v in row.items():
                m.add(r, c, v)
        return m

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence]) -> "SparseMatrix":
        ncols = len(dense[0]) if dense else 0
        return cls(len(dense), ncols,
                   ((r, c, v) for r, row in enumerate(dense) for c, v in enumerate(row) if v))

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def triplets(self) -> list[tuple[int, int, GaussianRational]]:
        return [(r, c, v) for r, row in enumerate(self.rows) for c, v in sorted(row.items())]

    def columns(self) -> list[dict[int, GaussianRational]]:
        cols: list[dict[int, GaussianRational]] = [dict() for _ in range(self.ncols)]
        for r, row in enumerate(self.rows):
            for c, v in row.items():
                cols[c][r] = v
        return cols

    def matvec(self, x: Sequence) -> list[GaussianRational]:
        return [sum((v * x[c] for c, v in row.items()), ZERO) for row in self.rows]

    def rmatvec(self, y: Sequence) -> list[GaussianRational]:
        """``y^T M`` as a list over columns."""
        out = [ZERO] * self.ncols
        for r, row in enumerate(self.rows):
            if y[r]:
                for c, v in row.items():
                    out[c] = out[c] + y[r] * v
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.ncols, self.nrows, ((c, r, v) for r, c, v in self.triplets()))

    def is_real(self) -> bool:
        return all(v.is_real() for row in self.rows for v in row.values())

    def to_scipy(self):
        import scipy.sparse as sp

        data, ri, ci = [], [], []
        for r, c, v in self.triplets():
            data.append(complex(v))
            ri.append(r)
            ci.append(c)
        return sp.csr_matrix((np.array(data, dtype=complex), (ri, ci)), shape=(self.nrows, self.ncols))

    def dump(self) -> str:
        """Debug dump: ``rows cols nnz`` header then one triplet per line."""
        lines = [f"{self.nrows} {self.ncols} {self.nnz}"]
        lines += [f"{r} {c} {format_gaussian(v)}" for r, c, v in self.triplets()]
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "SparseMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        try:
            nrows, ncols, nnz = (int(x) for x in lines[0].split())
        except (IndexError, ValueError):
            raise ParseError("bad matrix header", line=1) from None
        m = cls(nrows, ncols)
        for k, ln in enumerate(lines[1:], start=2):
            parts = ln.split()
            if len(parts) != 3:
                raise ParseError("expected 'row col value'", line=k)
            m.add(int(parts[0]), int(parts[1]), parse_gaussian(parts[2]))
        if m.nnz != nnz:
            raise ParseError(f"header announces {nnz} entries, found {m.nnz}", line=1)
        return m


@dataclass
class SolveOutcome:
    consistent: bool
    solution: list[GaussianRational] | None = None
    witness_row: int | None = None
    witness_value: GaussianRational | None = None
    stats: dict = field(default_factory=dict)


def peak_rss_mb() -> float:
    """Peak resident memory of this process in MiB (Linux reports KiB)."""
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024


def solve_exact(M: SparseMatrix, b: Sequence, max_entries: int | None = None,
                max_rss_mb: float | None = None) -> SolveOutcome:
    """Decide whether ``M x = b`` has a solution over Q(i).

    On success one solution is returned with all free variables set to 0.
    On failure ``witness_row`` names an original row that was reduced to
    ``0 = witness_value`` with a nonzero right-hand side.
    ``max_entries`` caps the number of stored nonzeros during elimination.
    Entry counts do not bound the size of the rationals, so ``max_rss_mb``
    also aborts once the process's peak resident memory passes that mark.

    Purely real systems run on plain rationals. Splitting a complex system
    into its real block form was tried and is slower: the doubled system
    fills in far more.
    """
    if len(b) != M.nrows:
        raise ContractError(f"right-hand side has length {len(b)}, matrix has {M.nrows} rows")
    t0 = time.perf_counter()
    bb = [GaussianRational.coerce(v) for v in b]
    real = M.is_real() and all(v.is_real() for v in bb)
    stats = {"rows": M.nrows, "cols": M.ncols, "nnz": M.nnz}
    if real:
        stats["field"] = "Q"
        rows = [{c: v.re for c, v in row.items()} for row in M.rows]
        rhs = [v.re for v in bb]
        out = _eliminate(rows, rhs, M.ncols, mpq(0), max_entries, max_rss_mb, stats, t0)
        if out.consistent:
            out.solution = [GaussianRational._make(v, ZERO.im) for v in out.solution]
        else:
            out.witness_value = GaussianRational._make(out.witness_value, ZERO.im)
        return out
    # Q(i) entries travel as (re, im) pairs of rationals; the object
    # wrappers cost more than the arithmetic itself in the inner loop
    stats["field"] = "Q(i)"
    rows = [{c: _QiPair(v.re, v.im) for c, v in row.items()} for row in M.rows]
    rhs = [_QiPair(v.re, v.im) for v in bb]
    out = _eliminate(rows, rhs, M.ncols, _QiPair(mpq(0), mpq(0)), max_entries, max_rss_mb, stats, t0)
    if out.consistent:
        out.solution = [GaussianRational._make(v[0], v[1]) for v in out.solution]
    else:
        out.witness_value = GaussianRational._make(*out.witness_value)
    return out


class _QiPair(tuple):
    """Bare ``(re, im)`` element of Q(i) used only inside elimination."""

    __slots__ = ()

    def __new__(cls, re, im):
        return tuple.__new__(cls, (re, im))

    def __bool__(self):
        return bool(self[0]) or bool(self[1])

    def __sub__(self, o):
        return _QiPair(self[0] - o[0], self[1] - o[1])

    def __mul__(self, o):
        a, b = self
        c, d = o
        if not b and not d:
            return _QiPair(a * c, b)
        return _QiPair(a * c - b * d, a * d + b * c)

    def __neg__(self):
        return _QiPair(-self[0], -self[1])

    def __truediv__(self, o):
        a, b = self
        c, d = o
        if not d:
            return _QiPair(a / c, b / c)
        n = c * c + d * d
        return _QiPair((a * c + b * d) / n, (b * c - a * d) / n)


def _eliminate(rows: list[dict], rhs: list, ncols: int, zero, max_entries, max_rss_mb, stats,
               t0) -> SolveOutcome:
    nrows = len(rows)
    nnz0 = sum(len(r) for r in rows)
    col_rows: dict[int, set[int]] = {}
    for r, row in enumerate(rows):
        for c in row:
            col_rows.setdefault(c, set()).add(r)
    heap = [(len(rs), c) for c, rs in col_rows.items()]
    heapq.heapify(heap)
    active = set(range(nrows))
    pivots: list[tuple[int, int]] = []
    stored = nnz0
    peak = stored

    def fail(r: int) -> SolveOutcome:
        stats.update(pivots=len(pivots), peak_entries=peak, fill_in=peak - nnz0,
                     elapsed=time.perf_counter() - t0)
        return SolveOutcome(False, witness_row=r, witness_value=rhs[r], stats=stats)

    for r in range(nrows):
        if not rows[r] and rhs[r]:
            return fail(r)

    while heap:
        cnt, c = heapq.heappop(heap)
        rs = col_rows.get(c)
        if not rs:
            continue
        if cnt != len(rs):
            heapq.heappush(heap, (len(rs), c))
            continue
        pr = min(rs, key=lambda r: (len(rows[r]), r))
        prow = rows[pr]
        pval = prow[c]
        prhs = rhs[pr]
        active.discard(pr)
        touched = set()
        for cc in prow:
            col_rows[cc].discard(pr)
            touched.add(cc)
        pivots.append((pr, c))
        for r2 in sorted(col_rows[c]):
            row2 = rows[r2]
            factor = row2[c] / pval
            for cc, v in prow.items():
                if cc in row2:
                    nv = row2[cc] - factor * v
                    if nv:
                        row2[cc] = nv
                    else:
                        del row2[cc]
                        col_rows[cc].discard(r2)
                        stored -= 1
                        touched.add(cc)
                else:
                    row2[cc] = -factor * v
                    col_rows[cc].add(r2)
                    stored += 1
                    touched.add(cc)
            if prhs:
                rhs[r2] = rhs[r2] - factor * prhs
            if not row2 and rhs[r2]:
                return fail(r2)
        if stored > peak:
            peak = stored
            if max_entries is not None and peak > max_entries:
                stats.update(pivots=len(pivots), peak_entries=peak, elapsed=time.perf_counter() - t0)
                raise ResourceLimitError(
                    f"elimination needs more than {max_entries} stored entries", stats)
        if max_rss_mb is not None and len(pivots) % 64 == 1 and peak_rss_mb() > max_rss_mb:
            stats.update(pivots=len(pivots), peak_entries=peak, elapsed=time.perf_counter() - t0)
            raise ResourceLimitError(
                f"elimination passed the resident-memory limit of {max_rss_mb:.0f} MiB", stats)
        for cc in touched:
            k = len(col_rows[cc])
            if k:
                heapq.heappush(heap, (k, cc))

    for r in sorted(active):
        if rhs[r]:
            return fail(r)

    x = [zero] * ncols
    for pr, c in reversed(pivots):
        row = rows[pr]
        acc = rhs[pr]
        for cc, v in row.items():
            if cc != c and x[cc]:
                acc = acc - v * x[cc]
        x[c] = acc / row[c]
    stats.update(pivots=len(pivots), peak_entries=peak, fill_in=peak - nnz0,
                 elapsed=time.perf_counter() - t0)
    return SolveOutcome(True, solution=x, stats=stats)


def inconsistency_witness(M: SparseMatrix, b: Sequence) -> list[GaussianRational] | None:
    """Row combination ``y`` with ``y^T M = 0`` and ``y^T b = 1``, if one exists.

    Such a ``y`` exists exactly when ``M x = b`` is inconsistent; it is found
    by solving the transposed system with ``b`` appended as an extra column.
    """
    bb = [GaussianRational.coerce(v) for v in b]
    T = SparseMatrix(M.ncols + 1, M.nrows)
    for r, c, v in M.triplets():
        T.add(c, r, v)
    for r, v in enumerate(bb):
        if v:
            T.add(M.ncols, r, v)
    rhs = [ZERO] * M.ncols + [ONE]
    out = solve_exact(T, rhs)
    return out.solution if out.consistent else None


@dataclass
class FloatOutcome:
    status: str
    solution: np.ndarray | None
    residual: float
    iterations: int


def solve_float(M: SparseMatrix, b: Sequence, tol: float = 1e-9) -> FloatOutcome:
    """Least-squares candidate in double precision.

    ``status`` is ``"consistent-at-tol"`` when the residual norm is at most
    ``tol`` and ``"inconsistent-at-tol"`` otherwise. Non-convergence reports
    an infinite residual.
    """
    if tol <= 0:
        raise ContractError("tol must be positive")
    if len(b) != M.nrows:
        raise ContractError("right-hand side length does not match the row count")
    bvec = np.array([complex(GaussianRational.coerce(v)) for v in b], dtype=complex)
    if M.nrows * M.ncols <= 4_000_000:
        dense = M.to_scipy().toarray()
        x, *_ = np.linalg.lstsq(dense, bvec, rcond=None)
        resid = float(np.linalg.norm(dense @ x - bvec))
        iters = 1
    else:
        from scipy.sparse.linalg import lsqr

        A = M.to_scipy()
        res = lsqr(A, bvec, atol=1e-15, btol=1e-15, iter_lim=50 * max(M.ncols, 1))
        x, istop, iters = res[0], res[1], res[2]
        resid = float(np.linalg.norm(A @ x - bvec))
        if istop == 7 and resid > tol:
            resid = float("inf")
    if not np.isfinite(resid):
        return FloatOutcome("nonconvergent", None, float("inf"), iters)
    status = "consistent-at-tol" if resid <= tol else "inconsistent-at-tol"
    return FloatOutcome(status, x, resid, iters)
