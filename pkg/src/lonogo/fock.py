"""Fock-space task model: states, task validation, canonical tasks, random targets.

A :class:`PureState` maps occupation tuples to amplitudes. In the default
``"fock"`` basis the amplitudes are ordinary state-vector components on
normalized Fock states. In the ``"monomial"`` basis they are coefficients of
the creation-operator monomials ``prod_j a_j^{s_j}``, which differ from Fock
amplitudes by ``sqrt(prod_j s_j!)``. The monomial basis lets states whose Fock
amplitudes involve different square roots stay exact.

States are stored unnormalized; global scale is irrelevant to feasibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import GaussianRational, format_gaussian, parse_gaussian_ex, to_rational
from .errors import ContractError, ParseError, ValidationError

Occupation = tuple[int, ...]

BASES = ("fock", "monomial")


def occupations(photons: int, modes: int) -> list[Occupation]:
    """All occupation vectors with the given photon total, lexicographically descending."""
    if modes == 0:
        return [()] if photons == 0 else []
    if modes == 1:
        return [(photons,)]
    out = []
    for k in range(photons, -1, -1):
        for rest in occupations(photons - k, modes - 1):
            out.append((k,) + rest)
    return out


def occupation_factorial(s: Sequence[int]) -> int:
    return math.prod(math.factorial(x) for x in s)


@dataclass(frozen=True)
class PureState:
    modes: int
    amplitudes: Mapping[Occupation, object]
    basis: str = "fock"

    def __post_init__(self):
        problems = []
        if self.modes < 1:
            problems.append("a state needs at least one mode")
        if self.basis not in BASES:
            problems.append(f"unknown basis {self.basis!r}")
        amps: dict[Occupation, object] = {}
        totals = set()
        for occ, a in self.amplitudes.items():
            occ = tuple(int(x) for x in occ)
            if len(occ) != self.modes:
                problems.append(f"occupation {occ} has {len(occ)} modes, expected {self.modes}")
                continue
            if any(x < 0 for x in occ):
                problems.append(f"negative photon count in {occ}")
                continue
            if not isinstance(a, (GaussianRational, complex)):
                a = GaussianRational.coerce(a)
            if a:
                amps[occ] = a
                totals.add(sum(occ))
        if not amps:
            problems.append("state has no nonzero amplitude")
        if len(totals) > 1:
            problems.append(f"basis terms carry different photon numbers {sorted(totals)}")
        if problems:
            raise ValidationError(problems)
        object.__setattr__(self, "amplitudes", dict(sorted(amps.items(), reverse=True)))

    @classmethod
    def fock(cls, occ: Sequence[int]) -> "PureState":
        """A single Fock basis state with unit amplitude."""
        return cls(len(occ), {tuple(occ): 1})

    @property
    def photons(self) -> int:
        return sum(next(iter(self.amplitudes)))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(a, GaussianRational) for a in self.amplitudes.values())

    @property
    def is_product(self) -> bool:
        return len(self.amplitudes) == 1

    def max_occupancy(self) -> int:
        return max(max(occ) for occ in self.amplitudes)

    def scaled(self, c) -> "PureState":
        c = GaussianRational.coerce(c)
        return PureState(self.modes, {o: a * c for o, a in self.amplitudes.items()}, self.basis)

    def squared_norm(self):
        """Squared norm of the state vector; exact for exact states."""
        total = to_rational(0) if self.is_exact else 0.0
        for occ, a in self.amplitudes.items():
            w = occupation_factorial(occ) if self.basis == "monomial" else 1
            if isinstance(a, GaussianRational):
                total += a.norm2() * w
            else:
                total += abs(a) ** 2 * w
        return total


# ---------------------------------------------------------------------------
# tasks


@dataclass(frozen=True)
class TaskSpec:
    """Heralded generation task; heralding modes are the last ``M`` modes."""

    modes: int
    input: PureState
    herald_pattern: tuple[int, ...]
    target: PureState
    arithmetic: str = "exact"
    mode_order: tuple[int, ...] | None = None
    name: str = ""

    @property
    def herald_modes(self) -> int:
        return len(self.herald_pattern)


@dataclass(frozen=True)
class ValidatedTask:
    task: TaskSpec
    n: int
    m: int
    target_modes: int
    active_rows: tuple[int, ...]


def _active_rows(states: Iterable[PureState]) -> tuple[int, ...]:
    rows = set()
    for st in states:
        for occ in st.amplitudes:
            rows.update(i for i, x in enumerate(occ) if x)
    return tuple(sorted(rows))


def _arith_problems(state: PureState, arithmetic: str, what: str) -> list[str]:
    if arithmetic not in ("exact", "float"):
        return [f"unknown arithmetic mode {arithmetic!r}"]
    if arithmetic == "exact" and not state.is_exact:
        return [f"{what} has floating-point amplitudes but arithmetic is exact"]
    return []


def validate_task(t: TaskSpec) -> ValidatedTask:
    """Check photon bookkeeping and mode counts; report every violation at once."""
    problems = []
    N, M = t.modes, t.herald_modes
    if not 0 <= M < N:
        problems.append(f"need 0 <= M < N, got M={M}, N={N}")
    if t.input.modes != N:
        problems.append(f"input has {t.input.modes} modes, task has N={N}")
    if any(x < 0 for x in t.herald_pattern):
        problems.append("heralding pattern has negative counts")
    n = t.input.photons
    m = sum(t.herald_pattern)
    nt = t.target.modes
    if nt + M > N:
        problems.append(f"target modes {nt} + heralding modes {M} exceed N={N}")
    if nt != N - M:
        problems.append(f"target has {nt} modes, expected N-M={N - M}")
    if n - m != t.target.photons:
        problems.append(f"n-m = {n}-{m} = {n - m} but the target has {t.target.photons} photons")
    if n < 1:
        problems.append("input carries no photons")
    problems += _arith_problems(t.input, t.arithmetic, "input")
    problems += _arith_problems(t.target, t.arithmetic, "target")
    if problems:
        raise ValidationError(problems)
    return ValidatedTask(t, n, m, nt, _active_rows([t.input]))


def canonicalize(n: int, m: int, target: PureState, arithmetic: str = "exact") -> TaskSpec:
    """Optimal configuration for ``n`` input and ``m`` heralding photons.

    Single photons in the first ``n`` of ``N = max(n, N_T + m)`` modes, and one
    heralding photon in each of the last ``m`` modes. If ``n > N_T + m`` the
    remaining non-target modes are heralded on vacuum.
    """
    problems = []
    if n < 1:
        problems.append("n must be at least 1")
    if m < 0:
        problems.append("m must be nonnegative")
    if n - m != target.photons:
        problems.append(f"n-m = {n - m} but the target has {target.photons} photons")
    if problems:
        raise ValidationError(problems)
    N = max(n, target.modes + m)
    # when n > N_T + m the surplus modes are heralded on vacuum
    pattern = (0,) * (N - target.modes - m) + (1,) * m
    occ = (1,) * n + (0,) * (N - n)
    task = TaskSpec(N, PureState.fock(occ), pattern, target, arithmetic,
                    name=f"canonical n={n} m={m}")
    validate_task(task)
    return task


@dataclass(frozen=True)
class MultiTaskSpec:
    modes: int
    herald_pattern: tuple[int, ...]
    pairs: tuple[tuple[PureState, PureState], ...]
    suppress: tuple[PureState, ...] = ()
    arithmetic: str = "exact"
    mode_order: tuple[int, ...] | None = None
    name: str = ""

    @property
    def herald_modes(self) -> int:
        return len(self.herald_pattern)

    def pair_task(self, p: int) -> TaskSpec:
        inp, tgt = self.pairs[p]
        return TaskSpec(self.modes, inp, self.herald_pattern, tgt, self.arithmetic)


def validate_multi_task(mt: MultiTaskSpec) -> tuple[int, int, tuple[int, ...]]:
    """Returns ``(n, m, active_rows)``; raises :class:`ValidationError`."""
    problems = []
    if not mt.pairs:
        problems.append("a multi-task needs at least one input/target pair")
    ns = set()
    for p in range(len(mt.pairs)):
        try:
            v = validate_task(mt.pair_task(p))
            ns.add(v.n)
        except ValidationError as e:
            problems += [f"pair {p + 1}: {msg}" for msg in e.problems]
    m = sum(mt.herald_pattern)
    for k, st in enumerate(mt.suppress):
        if st.modes != mt.modes:
            problems.append(f"suppression input {k + 1} has {st.modes} modes, expected {mt.modes}")
        if st.photons in ns:
            problems.append(f"suppression input {k + 1} has the target photon number {st.photons}")
        problems += _arith_problems(st, mt.arithmetic, f"suppression input {k + 1}")
    if problems:
        raise ValidationError(problems)
    rows = _active_rows([inp for inp, _ in mt.pairs] + list(mt.suppress))
    return max(ns), m, rows


# ---------------------------------------------------------------------------
# random targets


def _round_to_grid(x: float, denom: int) -> Fraction:
    return Fraction(round(x * denom), denom)


def haar_random_target(photons: int, modes: int, seed: int, denom_bound: int = 2 ** 16,
                       retries: int = 8) -> PureState:
    """Rationalized Haar-random pure state with a fixed photon number.

    Complex standard normal amplitudes are drawn per Fock basis vector and
    normalized. Each amplitude is divided by ``sqrt(s!)`` to get the
    creation-operator coefficient, whose real and imaginary parts are rounded
    to multiples of ``1/denom_bound``. The result is an exact state in the
    monomial basis; it is the object any later no-go statement refers to.
    """
    if photons < 1 or modes < 2:
        raise ContractError("need photons >= 1 and modes >= 2")
    if denom_bound < 2 ** 16 or denom_bound & (denom_bound - 1):
        raise ContractError("denom_bound must be a power of two >= 2**16")
    basis = occupations(photons, modes)
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        z = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        z /= np.linalg.norm(z)
        amps = {}
        for occ, c in zip(basis, z):
            q = c / math.sqrt(occupation_factorial(occ))
            re, im = _round_to_grid(q.real, denom_bound), _round_to_grid(q.imag, denom_bound)
            if re or im:
                amps[occ] = GaussianRational(re, im)
        if amps:
            return PureState(modes, amps, basis="monomial")
    raise ContractError(f"rationalization produced the zero state {retries} times")


# ---------------------------------------------------------------------------
# text format


def serialize_state(s: PureState) -> str:
    terms = []
    for occ, a in s.amplitudes.items():
        if isinstance(a, GaussianRational):
            amp = format_gaussian(a)
        else:
            amp = f"{a.real!r}{'+' if a.imag >= 0 else '-'}{abs(a.imag)!r}i"
        terms.append(f"{amp} : {' '.join(map(str, occ))}")
    head = "basis=monomial ; " if s.basis == "monomial" else ""
    return head + " ; ".join(terms)


def parse_state(text: str, modes: int | None = None) -> PureState:
    """Parse ``amp : occ ; amp : occ ...``.

    Decimal amplitudes are kept as Python complex numbers so that exact-mode
    validation can reject them. An optional leading ``basis=monomial`` term
    switches the basis.
    """
    chunks = [c.strip() for c in text.split(";")]
    basis = "fock"
    if chunks and chunks[0].replace(" ", "").startswith("basis="):
        basis = chunks.pop(0).replace(" ", "").split("=", 1)[1]
        if basis not in BASES:
            raise ParseError(f"unknown basis {basis!r}")
    amps: dict[Occupation, object] = {}
    width = modes
    for k, chunk in enumerate(chunks):
        if not chunk:
            raise ParseError(f"empty term {k + 1}")
        amp_text, sep, occ_text = chunk.rpartition(":")
        if not sep:
            raise ParseError(f"term {k + 1} ({chunk!r}) lacks 'amplitude : occupation'")
        try:
            occ = tuple(int(x) for x in occ_text.split())
        except ValueError:
            raise ParseError(f"malformed occupation {occ_text.strip()!r}") from None
        if not occ:
            raise ParseError(f"term {k + 1} has an empty occupation")
        if width is None:
            width = len(occ)
        if len(occ) != width:
            raise ParseError(f"occupation {occ} has {len(occ)} modes, expected {width}")
        if occ in amps:
            raise ParseError(f"duplicate basis vector {occ}")
        amp, decimal = parse_gaussian_ex(amp_text)
        amps[occ] = complex(amp) if decimal else amp
    if not amps:
        raise ParseError("state has no terms")
    try:
        return PureState(width, amps, basis)
    except ValidationError as e:
        raise ParseError(str(e)) from None
