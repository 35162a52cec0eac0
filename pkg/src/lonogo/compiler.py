"""Compile heralded generation tasks into polynomial systems.

The input state is pushed through an unknown matrix ``A``: every creation
operator ``a_i`` of an occupied input mode becomes ``sum_j A[i,j] a_j``. The
heralding pattern selects output monomials, and matching coefficients
against the target gives one equation per target-mode monomial::

    gamma * g_k(A) - q_k = 0

Global normalization constants (``1/sqrt(n_i!)``, ``1/prod m_j!``) multiply a
whole side of ``gamma*G = Q`` and are absorbed into ``gamma``. What cannot be
absorbed is a *relative* factor between monomials, e.g. the ``sqrt(s!)`` that
converts Fock amplitudes into monomial coefficients. Those are handled
exactly by splitting each ``sqrt(k)`` into ``r*sqrt(D)`` with ``D``
square-free; all terms of one state must share ``D``.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import (
    ONE,
    ZERO,
    Exponent,
    GaussianRational,
    MultiPoly,
    Variable,
    VariableSpace,
    format_exponent,
    parse_terms,
    serialize_terms,
)
from .errors import ContractError, ParseError, ValidationError
from .fock import (
    MultiTaskSpec,
    Occupation,
    PureState,
    TaskSpec,
    occupation_factorial,
    occupations,
    validate_multi_task,
    validate_task,
)

RYSER_MAX_DIM = 12


# ---------------------------------------------------------------------------
# exact handling of sqrt(s!) factors


def squarefree_split(k: int) -> tuple[int, int]:
    """Write ``k = r**2 * D`` with ``D`` square-free; returns ``(r, D)``."""
    if k < 1:
        raise ContractError("squarefree_split needs a positive integer")
    r, D = 1, 1
    p = 2
    while p * p <= k:
        e = 0
        while k % p == 0:
            k //= p
            e += 1
        r *= p ** (e // 2)
        if e % 2:
            D *= p
        p += 1
    return r, D * k


def monomial_coefficients(state: PureState) -> tuple[dict[Occupation, GaussianRational], int]:
    """Creation-operator coefficients of ``state`` up to a global ``1/sqrt(D)``.

    Returns ``(coeffs, D)`` such that the state polynomial equals
    ``sum coeffs[s] * a^s / sqrt(D)``. Floating amplitudes are converted
    numerically and then read as exact binary rationals.
    """
    if state.basis == "monomial":
        return {s: _exactify(a) for s, a in state.amplitudes.items()}, 1
    if not state.is_exact:
        out = {}
        for s, a in state.amplitudes.items():
            out[s] = _exactify(complex(a) / math.sqrt(occupation_factorial(s)))
        return out, 1
    out = {}
    classes = set()
    for s, a in state.amplitudes.items():
        r, D = squarefree_split(occupation_factorial(s))
        classes.add(D)
        out[s] = a / r
    if len(classes) > 1:
        raise ContractError(
            "Fock amplitudes need different square roots "
            f"(square-free classes {sorted(classes)}); give the state in the monomial basis "
            "or use float arithmetic"
        )
    return out, classes.pop()


def _exactify(a) -> GaussianRational:
    if isinstance(a, GaussianRational):
        return a
    a = complex(a)
    return GaussianRational(Fraction(a.real), Fraction(a.imag))


# ---------------------------------------------------------------------------
# expansion


@dataclass
class OutputExpansion:
    """Output monomial ``a^s`` -> coefficient polynomial in the A-variables."""

    vs: VariableSpace
    modes: int
    photons: int
    coeffs: dict[Occupation, MultiPoly]
    scale_class: int = 1


def _linear_power(row: int, k: int, ncols: int):
    """Terms of ``(sum_j A[row,j] a_j)^k`` as ``(alpha, multinomial)`` pairs."""
    for alpha in occupations(k, ncols):
        coef = math.factorial(k)
        for x in alpha:
            coef //= math.factorial(x)
        yield alpha, coef


def expand_evolution(state: PureState, vs: VariableSpace) -> OutputExpansion:
    """Expand ``prod_i (sum_j A[i,j] a_j)^{n_i}`` for every input term and sum.

    Each term is weighted by its exact monomial coefficient; the shared
    ``1/sqrt(D)`` is reported as ``scale_class`` and otherwise dropped.
    """
    N = state.modes
    n = state.photons
    if n < 1:
        raise ContractError("input state carries no photons")
    coeffs_in, D = monomial_coefficients(state)
    nv = len(vs)
    var_of = {}
    for i in {i for occ in coeffs_in for i, x in enumerate(occ) if x}:
        for j in range(N):
            var_of[i, j] = vs.entry(i, j)
    acc: dict[tuple[Occupation, Exponent], GaussianRational] = {}
    for occ, amp in coeffs_in.items():
        partial: dict[tuple[Occupation, tuple], int] = {((0,) * N, (0,) * nv): 1}
        for i, k in enumerate(occ):
            if not k:
                continue
            nxt: dict[tuple[Occupation, tuple], int] = {}
            for alpha, mult in _linear_power(i, k, N):
                for (out, ex), c in partial.items():
                    out2 = tuple(a + b for a, b in zip(out, alpha))
                    ex2 = list(ex)
                    for j, aj in enumerate(alpha):
                        if aj:
                            ex2[var_of[i, j]] += aj
                    key = (out2, tuple(ex2))
                    nxt[key] = nxt.get(key, 0) + c * mult
            partial = nxt
        for key, c in partial.items():
            v = amp * c
            acc[key] = acc[key] + v if key in acc else v
    coeffs: dict[Occupation, dict] = {}
    for (out, ex), c in acc.items():
        if c:
            coeffs.setdefault(out, {})[ex] = c
    polys = {out: MultiPoly(vs, terms) for out, terms in coeffs.items()}
    polys = {out: p for out, p in sorted(polys.items(), reverse=True) if p}
    return OutputExpansion(vs, N, n, polys, D)


@dataclass
class HeraldedMap:
    vs: VariableSpace
    modes: int
    photons: int
    input_photons: int
    coeffs: dict[Occupation, MultiPoly]
    scale_class: int = 1


def herald_project(exp: OutputExpansion, pattern: Sequence[int]) -> HeraldedMap:
    """Keep output monomials whose last ``M`` entries equal ``pattern``; strip them.

    This is the derivative-and-set-to-zero projection up to a global factor.
    """
    M = len(pattern)
    if M >= exp.modes:
        raise ContractError(f"heralding {M} of {exp.modes} modes leaves no target modes")
    m = sum(pattern)
    if m > exp.photons:
        raise ContractError(f"heralding pattern has {m} photons, input only {exp.photons}")
    pattern = tuple(pattern)
    keep = exp.modes - M
    out = {}
    for occ, p in exp.coeffs.items():
        if occ[keep:] == pattern:
            out[occ[:keep]] = p
    return HeraldedMap(exp.vs, keep, exp.photons - m, exp.photons, out, exp.scale_class)


# ---------------------------------------------------------------------------
# systems


@dataclass
class PolynomialSystem:
    """Equations ``f_k = 0`` over a shared variable space.

    ``form`` is ``"gamma"`` (gamma is the last variable; equations read
    ``gamma*g_k - q_k`` or are homogeneous suppression equations) or
    ``"absorbed"`` (gamma scaled into ``A``; equations read ``g_k - q_k``).
    """

    vs: VariableSpace
    equations: list[MultiPoly]
    tags: list[str]
    photons: int
    form: str = "gamma"
    pre_prune: int = 0
    pruned: int = 0
    info: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.equations)

    def absorb_gamma(self) -> "PolynomialSystem":
        """Replace ``gamma*g - q`` by ``g - q``, i.e. rescale ``A`` by ``gamma**(1/n)``.

        Over C this preserves feasibility when every gamma-bearing ``g`` is
        homogeneous of one common degree ``n`` and every other equation is
        homogeneous in ``A``.
        """
        if self.form == "absorbed":
            return self
        g = self.vs.gamma_index
        if g is None:
            raise ContractError("system has no gamma variable")
        degs = set()
        new_vs = self.vs.without_gamma()
        eqs = []
        for f, tag in zip(self.equations, self.tags):
            terms = {}
            for e, c in f.terms.items():
                if e[g] > 1:
                    raise ContractError(f"equation {tag} is not linear in gamma")
                a = e[:g]
                if e[g]:
                    degs.add(sum(a))
                elif sum(a) and not tag.startswith("suppress"):
                    raise ContractError(f"equation {tag} has a gamma-free nonconstant term")
                terms[a] = c
            eqs.append(MultiPoly(new_vs, terms))
        if len(degs) > 1:
            raise ContractError(f"gamma multiplies polynomials of different degrees {sorted(degs)}")
        for f, tag in zip(eqs, self.tags):
            if tag.startswith("suppress") and not f.is_homogeneous():
                raise ContractError(f"suppression equation {tag} is not homogeneous")
        return replace(self, vs=new_vs, equations=eqs, form="absorbed",
                       info=dict(self.info, absorbed_from="gamma"))

    def serialize(self) -> str:
        lines = [
            "# lonogo polynomial system v1",
            f"form: {self.form}",
            f"photons: {self.photons}",
            f"variables: {' '.join(self.vs.names())}",
            f"pre_prune: {self.pre_prune}",
            f"pruned: {self.pruned}",
            f"equations: {len(self.equations)}",
        ]
        for tag, f in zip(self.tags, self.equations):
            lines.append(f"{tag} := {serialize_terms(f)}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()


def _parse_var(name: str) -> Variable:
    if name == "g":
        return Variable("gamma")
    if name.startswith("A") and "_" in name:
        i, j = name[1:].split("_")
        return Variable("A", int(i) - 1, int(j) - 1)
    raise ParseError(f"unknown variable name {name!r}")


def parse_system(text: str) -> PolynomialSystem:
    header: dict[str, str] = {}
    eqs, tags = [], []
    vs = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if ":=" in line:
            if vs is None:
                raise ParseError("equation before the variable table", line=lineno)
            tag, _, body = line.partition(":=")
            try:
                eqs.append(parse_terms(body, vs))
            except ParseError as e:
                raise ParseError(str(e), line=lineno) from None
            tags.append(tag.strip())
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ParseError("expected 'key: value'", line=lineno)
        header[key.strip()] = value.strip()
        if key.strip() == "variables":
            vs = VariableSpace(_parse_var(x) for x in value.split())
    if vs is None:
        raise ParseError("missing variable table")
    if int(header.get("equations", len(eqs))) != len(eqs):
        raise ParseError("equation count does not match the header")
    return PolynomialSystem(vs, eqs, tags, int(header.get("photons", 0)), header.get("form", "gamma"),
                            int(header.get("pre_prune", len(eqs))), int(header.get("pruned", 0)))


def _gamma_times(p: MultiPoly, vs: VariableSpace) -> MultiPoly:
    g = vs.gamma_index
    out = {}
    for e, c in p.terms.items():
        e2 = list(e)
        e2[g] += 1
        out[tuple(e2)] = c
    return MultiPoly._raw(vs, out)


def _tag(prefix: str, occ: Occupation) -> str:
    return f"{prefix}[{' '.join(map(str, occ))}]"


def build_system(G: HeraldedMap, target: PureState, prefix: str = "target") -> PolynomialSystem:
    """One ``gamma*g_k - q_k`` per degree-(n-m) monomial over the target modes.

    Trivial ``0 = 0`` equations are pruned (and counted); unreachable target
    monomials leave the nonzero constant ``-q_k`` in place.
    """
    if target.modes != G.modes or target.photons != G.photons:
        raise ContractError(
            f"target has {target.photons} photons in {target.modes} modes, heralded output "
            f"has {G.photons} in {G.modes}"
        )
    vs = G.vs
    if vs.gamma_index is None:
        raise ContractError("variable space lacks gamma")
    q, _ = monomial_coefficients(target)
    const = (0,) * len(vs)
    eqs, tags = [], []
    monos = occupations(G.photons, G.modes)
    pruned = 0
    for s in monos:
        g = G.coeffs.get(s)
        f = _gamma_times(g, vs) if g is not None else MultiPoly.zero(vs)
        if s in q:
            f = f - MultiPoly._raw(vs, {const: q[s]})
        if not f:
            pruned += 1
            continue
        eqs.append(f)
        tags.append(_tag(prefix, s))
    return PolynomialSystem(vs, eqs, tags, G.input_photons, "gamma", len(monos), pruned)


def compile_task(task: TaskSpec) -> PolynomialSystem:
    """Validate, expand, herald and build the gamma-form system of a single task."""
    v = validate_task(task)
    vs = VariableSpace.for_matrix(v.active_rows, task.modes, gamma=True)
    exp = expand_evolution(task.input, vs)
    G = herald_project(exp, task.herald_pattern)
    ps = build_system(G, task.target)
    ps.info.update(N=task.modes, M=task.herald_modes, n=v.n, m=v.m, N_T=v.target_modes,
                   active_rows=list(v.active_rows))
    return ps


def build_multi_system(mt: MultiTaskSpec) -> PolynomialSystem:
    """Shared-gamma system for several input/target pairs plus suppression inputs.

    Each suppression input contributes ``g' = 0`` for every heralded output
    monomial, forcing its heralding probability to vanish.
    """
    n, m, rows = validate_multi_task(mt)
    vs = VariableSpace.for_matrix(rows, mt.modes, gamma=True)
    eqs, tags = [], []
    pre, pruned = 0, 0
    classes = set()
    for p, (inp, tgt) in enumerate(mt.pairs, start=1):
        exp = expand_evolution(inp, vs)
        G = herald_project(exp, mt.herald_pattern)
        _, Dt = monomial_coefficients(tgt)
        classes.add(squarefree_split(exp.scale_class * Dt)[1])
        sub = build_system(G, tgt, prefix=f"pair{p}")
        eqs += sub.equations
        tags += sub.tags
        pre += sub.pre_prune
        pruned += sub.pruned
    if len(classes) > 1 and mt.arithmetic == "exact":
        raise ValidationError([
            "pairs carry normalization factors that differ by irrational ratios "
            f"(square-free classes {sorted(classes)}); a single shared gamma cannot absorb them"
        ])
    for k, st in enumerate(mt.suppress, start=1):
        if st.photons < m:
            continue
        exp = expand_evolution(st, vs)
        G = herald_project(exp, mt.herald_pattern)
        for s in occupations(G.photons, G.modes):
            pre += 1
            g = G.coeffs.get(s)
            if g is None:
                pruned += 1
                continue
            eqs.append(g)
            tags.append(_tag(f"suppress{k}", s))
    ps = PolynomialSystem(vs, eqs, tags, n, "gamma", pre, pruned)
    ps.info.update(N=mt.modes, M=mt.herald_modes, n=n, m=m, pairs=len(mt.pairs),
                   suppress=len(mt.suppress), active_rows=list(rows))
    return ps


# ---------------------------------------------------------------------------
# permanent oracle


def ryser_permanent(matrix: Sequence[Sequence]) -> GaussianRational:
    """Permanent by Ryser's inclusion-exclusion formula with Gray-code updates."""
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ContractError("matrix is not square")
    if n > RYSER_MAX_DIM:
        raise ContractError(f"dimension {n} exceeds the cap {RYSER_MAX_DIM}")
    if n == 0:
        return ONE
    a = [[GaussianRational.coerce(x) for x in row] for row in matrix]
    row_sums = [ZERO] * n
    total = ZERO
    gray_prev = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        j = (gray ^ gray_prev).bit_length() - 1
        add = gray & (1 << j)
        for i in range(n):
            row_sums[i] = row_sums[i] + a[i][j] if add else row_sums[i] - a[i][j]
        gray_prev = gray
        prod = ONE
        for s in row_sums:
            prod = prod * s
            if not prod:
                break
        if bin(gray).count("1") % 2:
            total = total - prod
        else:
            total = total + prod
    return total if n % 2 == 0 else -total
