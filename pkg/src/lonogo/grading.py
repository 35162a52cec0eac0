"""Gradings that let the certificate search discard multiplier monomials.

Give every variable an integer weight vector. Let ``L`` be the lattice
spanned by differences of weights of monomials inside the same equation.
Each ``f_k`` is then homogeneous in ``Z^r / L`` with some class ``c_k``, and
the constant 1 has class 0. Projecting an identity ``sum beta_k f_k = 1`` on
class 0 keeps only multiplier monomials ``nu`` with ``w(nu) + c_k`` in ``L``
and never raises the degree, so the filter loses no certificates.

Weight maps:

``degree``
    A-entries weigh ``(1, 0)``, gamma weighs ``(0, 1)``. For the gamma form
    this is the A-degree = n * gamma-degree filter.
``torus``
    ``A[i, j]`` weighs ``e_row(i) + e_col(j)``, gamma its own unit vector. This
    is the scaling symmetry ``A -> diag(r) A diag(c)`` and is strictly finer.
"""

from __future__ import annotations

import numpy as np

from .algebra import VariableSpace
from .errors import ContractError

GRADINGS = ("off", "degree", "torus")


def weight_matrix(vs: VariableSpace, kind: str) -> np.ndarray:
    """``V x r`` integer matrix whose row ``k`` is the weight of variable ``k``."""
    if kind == "degree":
        r = 2
        W = np.zeros((len(vs), r), dtype=np.int64)
        for k, v in enumerate(vs):
            W[k, 0 if v.kind == "A" else 1] = 1
        return W
    if kind == "torus":
        rows = vs.rows
        cols = sorted({v.col for v in vs if v.kind == "A"})
        rpos = {i: p for p, i in enumerate(rows)}
        cpos = {j: len(rows) + p for p, j in enumerate(cols)}
        r = len(rows) + len(cols) + 1
        W = np.zeros((len(vs), r), dtype=np.int64)
        for k, v in enumerate(vs):
            if v.kind == "A":
                W[k, rpos[v.row]] = 1
                W[k, cpos[v.col]] = 1
            else:
                W[k, r - 1] = 1
        return W
    raise ContractError(f"unknown grading {kind!r}")


class IntegerLattice:
    """Sublattice of ``Z^r`` kept as an echelon (Hermite-style) basis."""

    def __init__(self, generators, dim: int):
        self.dim = dim
        rows = [[int(x) for x in g] for g in generators if any(g)]
        basis: list[list[int]] = []
        for col in range(dim):
            while True:
                nz = [r for r in rows if r[col]]
                if len(nz) <= 1:
                    break
                piv = min(nz, key=lambda r: abs(r[col]))
                for r in nz:
                    if r is not piv:
                        q = r[col] // piv[col]
                        for t in range(dim):
                            r[t] -= q * piv[t]
                rows = [r for r in rows if any(r)]
            nz = [r for r in rows if r[col]]
            if nz:
                piv = nz[0]
                if piv[col] < 0:
                    piv[:] = [-x for x in piv]
                basis.append(piv)
                rows = [r for r in rows if r is not piv and any(r)]
        self.pivots = []
        for b in basis:
            c = next(t for t, x in enumerate(b) if x)
            self.pivots.append((c, b))

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, W: np.ndarray) -> np.ndarray:
        """Canonical coset representatives of the rows of ``W``."""
        W = np.array(W, dtype=np.int64, copy=True)
        single = W.ndim == 1
        if single:
            W = W[None, :]
        for c, b in self.pivots:
            q = np.floor_divide(W[:, c], b[c])
            W -= q[:, None] * np.asarray(b, dtype=np.int64)[None, :]
        return W[0] if single else W

    def contains(self, w) -> bool:
        return not np.any(self.reduce(np.asarray(w)))


class Grading:
    """Lattice grading induced by a weight map on a list of equations."""

    def __init__(self, vs: VariableSpace, equations, kind: str):
        self.kind = kind
        self.W = weight_matrix(vs, kind)
        r = self.W.shape[1]
        gens = []
        self.eq_weight = []
        for f in equations:
            exps = np.array(list(f.terms), dtype=np.int64).reshape(-1, len(vs))
            ws = exps @ self.W
            if len(ws):
                gens.extend(ws[1:] - ws[0])
                self.eq_weight.append(ws[0])
            else:
                self.eq_weight.append(np.zeros(r, dtype=np.int64))
        self.lattice = IntegerLattice(gens, r)
        # multiplier monomials for equation k must reduce to this target
        self.targets = [self.lattice.reduce(-w) for w in self.eq_weight]

    def classes(self, exps: np.ndarray) -> np.ndarray:
        return self.lattice.reduce(exps.astype(np.int64) @ self.W)

    def allowed(self, exps: np.ndarray, k: int, classes: np.ndarray | None = None) -> np.ndarray:
        if classes is None:
            classes = self.classes(exps)
        return np.all(classes == self.targets[k][None, :], axis=1)
