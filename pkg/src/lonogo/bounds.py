"""Closed-form size accounting for certificate searches.

All counts are exact Python integers. ``V_max = min(N*n, N**2)`` is the
number of matrix entries that can appear, and ``s`` the number of
polynomial equations before pruning.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from math import comb

from .errors import ContractError

N2_BRANCH_NOTE = "n=2 branch 2*2^k-2 fitted to the reference two-photon values"


def _check(n: int, m: int, N: int, M: int) -> None:
    if not (n > m >= 0 and N > M >= 0):
        raise ContractError(f"invalid bookkeeping n={n}, m={m}, N={N}, M={M}")


def v_max(n: int, N: int) -> int:
    return min(N * n, N * N)


def equation_count(n: int, m: int, N: int, M: int) -> int:
    _check(n, m, N, M)
    return comb(n - m + N - M - 1, n - m)


def column_bound(n: int, m: int, N: int, M: int, d: int, V: int | None = None) -> int:
    """Unknowns of the degree-``d`` linear system: ``s * C(V+d, d)``."""
    if d < 0:
        raise ContractError("d must be nonnegative")
    V = v_max(n, N) if V is None else V
    return equation_count(n, m, N, M) * comb(V + d, d)


def row_bound(n: int, m: int, N: int, M: int, d: int, V: int | None = None) -> int:
    """Equations of the degree-``d`` linear system (distinct monomials of the products)."""
    if d < 0:
        raise ContractError("d must be nonnegative")
    _check(n, m, N, M)
    V = v_max(n, N) if V is None else V
    if d >= n - 1:
        return comb(V + d + n, V)
    return comb(V + d + n, V) - comb(V - 1 + n, V) + comb(V + d, V)


def degree_upper_bound(n: int, m: int, N: int, M: int) -> int:
    """Certificate degree sufficient to decide feasibility.

    Kollar's bound ``n**min(V_max, s) - n`` for ``n >= 3``. For ``n = 2`` the
    value ``2 * 2**min(V_max, s) - 2`` is used, which matches the reference
    two-photon values but is a fitted closed form.
    """
    _check(n, m, N, M)
    if n < 2:
        raise ContractError("degree bound needs n >= 2")
    k = min(v_max(n, N), equation_count(n, m, N, M))
    if n == 2:
        return 2 * 2 ** k - 2
    return n ** k - n


def degree_bound_is_rigorous(n: int) -> bool:
    return n >= 3


@dataclass
class ScalingProfile:
    n: int
    m: int
    N: int
    M: int
    N_T: int
    V_max: int
    s: int
    columns: dict[int, int]
    rows: dict[int, int]
    K_bound: int
    K_note: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["columns"] = {str(k): v for k, v in self.columns.items()}
        d["rows"] = {str(k): v for k, v in self.rows.items()}
        return d

    def format_text(self) -> str:
        lines = [
            f"n = {self.n}   m = {self.m}   N = {self.N}   M = {self.M}   N_T = {self.N_T}",
            f"V_max = {self.V_max}",
            f"equations s = {self.s}",
            f"degree upper bound K = {self.K_bound}" + (f"  ({self.K_note})" if self.K_note else ""),
            f"{'d':>4} {'columns':>24} {'rows':>24}",
        ]
        for d in sorted(self.columns):
            lines.append(f"{d:>4} {self.columns[d]:>24} {self.rows[d]:>24}")
        return "\n".join(lines)


def scaling_profile(n: int, m: int, N: int, M: int, degrees=range(0, 10)) -> ScalingProfile:
    s = equation_count(n, m, N, M)
    K = degree_upper_bound(n, m, N, M) if n >= 2 else -1
    note = N2_BRANCH_NOTE if n == 2 else ("" if n >= 3 else "undefined for n < 2")
    return ScalingProfile(
        n, m, N, M, N - M, v_max(n, N), s,
        {d: column_bound(n, m, N, M, d) for d in degrees},
        {d: row_bound(n, m, N, M, d) for d in degrees},
        K, note,
    )
