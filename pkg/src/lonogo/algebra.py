"""Exact scalars and sparse multivariate polynomials.

The scalar field is the Gaussian rationals Q(i): a complex number with
arbitrary-precision rational real and imaginary parts. Rationals are
``gmpy2.mpq`` values, which are always kept in lowest terms.

Polynomials are sparse dicts from exponent tuples to nonzero coefficients,
tied to an immutable :class:`VariableSpace`. Monomials are ordered by total
degree with ties broken reverse-lexicographically (grevlex).
"""

from __future__ import annotations

import itertools
import math
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import gmpy2
from gmpy2 import mpq

from .errors import ContractError, ParseError, ResourceLimitError

ZERO_Q = mpq(0)
ONE_Q = mpq(1)

Exponent = tuple[int, ...]


# ---------------------------------------------------------------------------
# rationals


def to_rational(x) -> mpq:
    """Coerce ints, Fractions, mpq and rational strings to ``mpq``.

    Floats are converted exactly (every binary float is a dyadic rational).
    """
    if isinstance(x, type(ZERO_Q)):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ContractError(f"non-finite value {x!r}")
        f = Fraction(x)
        return mpq(f.numerator, f.denominator)
    if isinstance(x, str):
        return parse_rational(x)
    if type(x).__name__ == "mpz":
        return mpq(x)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def format_rational(x: mpq) -> str:
    return f"{x.numerator}/{x.denominator}"


_RAT_RE = re.compile(r"^[+-]?\d+(?:/\d+)?$")
_DEC_RE = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")


def parse_rational(text: str) -> mpq:
    """Parse ``p/q`` or ``p``; decimal literals are read exactly."""
    s = text.strip()
    if _RAT_RE.match(s):
        num, _, den = s.partition("/")
        if den and int(den) == 0:
            raise ParseError(f"zero denominator in {text!r}")
        return mpq(int(num), int(den) if den else 1)
    if _DEC_RE.match(s):
        f = Fraction(s)
        return mpq(f.numerator, f.denominator)
    raise ParseError(f"malformed rational {text!r}")


def is_normalized(x: mpq) -> bool:
    return x.denominator >= 1 and gmpy2.gcd(x.numerator, x.denominator) == 1


# ---------------------------------------------------------------------------
# Gaussian rationals


class GaussianRational:
    """Immutable element of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", to_rational(re))
        object.__setattr__(self, "im", to_rational(im))

    @classmethod
    def _make(cls, re: mpq, im: mpq) -> "GaussianRational":
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        return obj

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(x.real, x.imag)
        return cls._make(to_rational(x), ZERO_Q)

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def __reduce__(self):
        return (GaussianRational, (Fraction(int(self.re.numerator), int(self.re.denominator)),
                                   Fraction(int(self.im.numerator), int(self.im.denominator))))

    # -- predicates
    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return not self.im

    def __eq__(self, other) -> bool:
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction, type(ZERO_Q))) and not isinstance(other, bool):
            return self.im == 0 and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    # -- arithmetic
    def __add__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = GaussianRational.coerce(other)
            except TypeError:
                return NotImplemented
        return GaussianRational._make(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = GaussianRational.coerce(other)
            except TypeError:
                return NotImplemented
        return GaussianRational._make(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __neg__(self):
        return GaussianRational._make(-self.re, -self.im)

    def __mul__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = GaussianRational.coerce(other)
            except TypeError:
                return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational._make(a * c, ZERO_Q)
        return GaussianRational._make(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def norm2(self) -> mpq:
        """Squared modulus |z|^2."""
        return self.re * self.re + self.im * self.im

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._make(self.re, -self.im)

    def inverse(self) -> "GaussianRational":
        if not self:
            raise ZeroDivisionError("inverse of zero in Q(i)")
        if not self.im:
            return GaussianRational._make(ONE_Q / self.re, ZERO_Q)
        n = self.norm2()
        return GaussianRational._make(self.re / n, -self.im / n)

    def __truediv__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = GaussianRational.coerce(other)
            except TypeError:
                return NotImplemented
        if not other:
            raise ZeroDivisionError("division by zero in Q(i)")
        if not other.im:
            return GaussianRational._make(self.re / other.re, self.im / other.re)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = ONE
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self) -> str:
        return f"GaussianRational({format_gaussian(self)!r})"

    def __str__(self) -> str:
        return format_gaussian(self)


ZERO = GaussianRational._make(ZERO_Q, ZERO_Q)
ONE = GaussianRational._make(ONE_Q, ZERO_Q)
I = GaussianRational._make(ZERO_Q, ONE_Q)


def gaussian_arith(a: GaussianRational, b: GaussianRational, kind: str) -> GaussianRational:
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        return a / b
    raise ContractError(f"unknown operation {kind!r}")


def format_gaussian(z: GaussianRational) -> str:
    """Canonical text: ``p/q+r/si`` with the imaginary sign folded in."""
    im = z.im
    sign = "-" if im < 0 else "+"
    return f"{format_rational(z.re)}{sign}{format_rational(abs(im))}i"


_NUM = r"(?:\d+(?:/\d+)?|\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)"
_GAUSS_RE = re.compile(
    rf"^(?:(?P<re>[+-]?{_NUM})(?=$|[+-]))?(?:(?P<isign>[+-]?)(?P<im>[+-]?{_NUM})?i)?$"
)


def parse_gaussian_ex(text: str) -> tuple[GaussianRational, bool]:
    """Parse a Gaussian rational; also report whether decimal literals were used."""
    s = text.replace(" ", "")
    m = _GAUSS_RE.match(s)
    if not s or m is None or (m.group("re") is None and not s.endswith("i")):
        raise ParseError(f"malformed amplitude {text!r}")
    decimal = bool(re.search(r"[.eE]", s))
    re_part = parse_rational(m.group("re")) if m.group("re") else ZERO_Q
    im_part = ZERO_Q
    if s.endswith("i"):
        mag = m.group("im")
        im_part = parse_rational(mag) if mag else ONE_Q
        if m.group("isign") == "-":
            im_part = -im_part
    return GaussianRational._make(re_part, im_part), decimal


def parse_gaussian(text: str) -> GaussianRational:
    return parse_gaussian_ex(text)[0]


# ---------------------------------------------------------------------------
# variables and monomials


@dataclass(frozen=True)
class Variable:
    """A matrix entry ``A[row, col]`` (0-based) or the scaling variable gamma."""

    kind: str
    row: int = -1
    col: int = -1

    @property
    def name(self) -> str:
        if self.kind == "gamma":
            return "g"
        return f"A{self.row + 1}_{self.col + 1}"


class VariableSpace:
    """Fixed, ordered list of variables. Gamma, if present, is last."""

    __slots__ = ("_vars", "_index", "_gamma")

    def __init__(self, variables: Iterable[Variable]):
        vs = tuple(variables)
        index: dict[Variable, int] = {}
        for k, v in enumerate(vs):
            if v.kind not in ("A", "gamma"):
                raise ContractError(f"unknown variable kind {v.kind!r}")
            if v in index:
                raise ContractError(f"duplicate variable {v.name}")
            if v.kind == "gamma" and k != len(vs) - 1:
                raise ContractError("gamma must be the last variable")
            index[v] = k
        self._vars = vs
        self._index = index
        self._gamma = len(vs) - 1 if vs and vs[-1].kind == "gamma" else None

    @classmethod
    def for_matrix(cls, rows: Sequence[int], ncols: int, gamma: bool = True) -> "VariableSpace":
        vs = [Variable("A", i, j) for i in sorted(rows) for j in range(ncols)]
        if gamma:
            vs.append(Variable("gamma"))
        return cls(vs)

    @classmethod
    def generic(cls, count: int) -> "VariableSpace":
        """``count`` anonymous A-variables in a single row; handy for tests."""
        return cls(Variable("A", 0, j) for j in range(count))

    def __len__(self) -> int:
        return len(self._vars)

    def __iter__(self) -> Iterator[Variable]:
        return iter(self._vars)

    def __getitem__(self, k: int) -> Variable:
        return self._vars[k]

    def __eq__(self, other) -> bool:
        return isinstance(other, VariableSpace) and self._vars == other._vars

    def __hash__(self) -> int:
        return hash(self._vars)

    def __repr__(self) -> str:
        return f"VariableSpace({' '.join(self.names())})"

    def index(self, v: Variable) -> int:
        return self._index[v]

    def entry(self, row: int, col: int) -> int:
        try:
            return self._index[Variable("A", row, col)]
        except KeyError:
            raise ContractError(f"variable A[{row + 1},{col + 1}] not in variable space") from None

    @property
    def gamma_index(self) -> int | None:
        return self._gamma

    @property
    def rows(self) -> tuple[int, ...]:
        return tuple(sorted({v.row for v in self._vars if v.kind == "A"}))

    def names(self) -> list[str]:
        return [v.name for v in self._vars]

    def without_gamma(self) -> "VariableSpace":
        if self._gamma is None:
            return self
        return VariableSpace(self._vars[:-1])


def degree(e: Exponent) -> int:
    return sum(e)


def grevlex_key(e: Exponent):
    """Ascending sort key: total degree first, then reverse-lexicographic."""
    return (sum(e), tuple(-x for x in reversed(e)))


def compare_monomials(a: Exponent, b: Exponent) -> int:
    ka, kb = grevlex_key(a), grevlex_key(b)
    return (ka > kb) - (ka < kb)


def format_exponent(e: Exponent) -> str:
    return " ".join(map(str, e))


def parse_exponent(text: str, nvars: int) -> Exponent:
    parts = text.split()
    if len(parts) != nvars:
        raise ParseError(f"exponent tuple {text!r} has {len(parts)} entries, expected {nvars}")
    try:
        e = tuple(int(p) for p in parts)
    except ValueError:
        raise ParseError(f"malformed exponent tuple {text!r}") from None
    if any(x < 0 for x in e):
        raise ParseError(f"negative exponent in {text!r}")
    return e


def _exact_degree_tuples(nvars: int, d: int) -> list[Exponent]:
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), d):
        e = [0] * nvars
        for k in combo:
            e[k] += 1
        out.append(tuple(e))
    out.sort(key=grevlex_key)
    return out


def monomial_count(nvars: int, d: int, mode: str = "up_to") -> int:
    if mode == "up_to":
        return math.comb(nvars + d, d)
    if mode == "exact":
        return math.comb(nvars + d - 1, d) if nvars else int(d == 0)
    raise ContractError(f"no closed-form count for mode {mode!r}")


def enumerate_monomials(vs: VariableSpace | int, d: int, mode: str = "up_to",
                        n: int | None = None, limit: int | None = None) -> list[Exponent]:
    """All exponent tuples of the requested degree range, in grevlex order.

    ``mode`` is ``"up_to"`` (degree <= d), ``"exact"`` (degree == d) or
    ``"w_graded"``: degree <= d and A-degree == n * gamma-degree, which needs
    gamma in the space and the photon number ``n``.
    """
    nvars = vs if isinstance(vs, int) else len(vs)
    if d < 0:
        raise ContractError("degree must be nonnegative")
    if mode == "w_graded":
        if isinstance(vs, int) or vs.gamma_index is None:
            raise ContractError("w_graded enumeration needs gamma in the variable space")
        if n is None or n < 1:
            raise ContractError("w_graded enumeration needs the photon number n >= 1")
        g = vs.gamma_index
        out = []
        t = 0
        while t * (n + 1) <= d:
            for a_part in _exact_degree_tuples(nvars - 1, n * t):
                out.append(a_part + (t,))
            t += 1
        out.sort(key=grevlex_key)
        return out
    if mode not in ("up_to", "exact"):
        raise ContractError(f"unknown enumeration mode {mode!r}")
    count = monomial_count(nvars, d, mode)
    cap = sys.maxsize if limit is None else limit
    if count > cap:
        raise ResourceLimitError(
            f"{count} monomials in {nvars} variables of degree {d} exceed the limit {cap}",
            {"count": count},
        )
    if mode == "exact":
        return _exact_degree_tuples(nvars, d)
    out = []
    for k in range(d + 1):
        out.extend(_exact_degree_tuples(nvars, k))
    return out


def add_exponents(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# polynomials


class MultiPoly:
    """Sparse polynomial over Q(i) in a fixed variable space.

    Zero coefficients are never stored; the zero polynomial has no terms.
    """

    __slots__ = ("vs", "terms")

    def __init__(self, vs: VariableSpace, terms: Mapping[Exponent, object] | None = None):
        self.vs = vs
        clean: dict[Exponent, GaussianRational] = {}
        nv = len(vs)
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != nv or any(x < 0 for x in e):
                raise ContractError(f"exponent {e} does not fit a space of {nv} variables")
            c = GaussianRational.coerce(c)
            if c:
                clean[e] = clean[e] + c if e in clean else c
                if not clean[e]:
                    del clean[e]
        self.terms = clean

    @classmethod
    def _raw(cls, vs: VariableSpace, terms: dict) -> "MultiPoly":
        p = object.__new__(cls)
        p.vs = vs
        p.terms = terms
        return p

    @classmethod
    def constant(cls, vs: VariableSpace, c=1) -> "MultiPoly":
        return cls(vs, {(0,) * len(vs): c})

    @classmethod
    def zero(cls, vs: VariableSpace) -> "MultiPoly":
        return cls._raw(vs, {})

    @classmethod
    def variable(cls, vs: VariableSpace, k: int) -> "MultiPoly":
        e = [0] * len(vs)
        e[k] = 1
        return cls._raw(vs, {tuple(e): ONE})

    def _check(self, other: "MultiPoly"):
        if not isinstance(other, MultiPoly):
            raise ContractError("operand is not a MultiPoly")
        if other.vs is not self.vs and other.vs != self.vs:
            raise ContractError("polynomials live in different variable spaces")

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            return self.vs == other.vs and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out[e] + c if e in out else c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MultiPoly._raw(self.vs, out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly._raw(self.vs, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def scale(self, c) -> "MultiPoly":
        c = GaussianRational.coerce(c)
        if not c:
            return MultiPoly.zero(self.vs)
        return MultiPoly._raw(self.vs, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        return poly_mul(self, other)

    def __rmul__(self, other) -> "MultiPoly":
        return self.scale(other)

    def __pow__(self, k: int) -> "MultiPoly":
        result = MultiPoly.constant(self.vs, 1)
        for _ in range(k):
            result = result * self
        return result

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self, weights: Sequence[int] | None = None) -> bool:
        ws = weights or [1] * len(self.vs)
        vals = {sum(w * x for w, x in zip(ws, e)) for e in self.terms}
        return len(vals) <= 1

    def constant_term(self) -> GaussianRational:
        return self.terms.get((0,) * len(self.vs), ZERO)

    def sorted_terms(self) -> list[tuple[Exponent, GaussianRational]]:
        return sorted(self.terms.items(), key=lambda t: grevlex_key(t[0]))

    def eval(self, assignment) -> GaussianRational:
        return poly_eval(self, assignment)

    def __repr__(self) -> str:
        return f"MultiPoly({format_poly(self)})"


def poly_mul(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    p._check(q)
    out: dict[Exponent, GaussianRational] = {}
    for e1, c1 in p.terms.items():
        for e2, c2 in q.terms.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            c = c1 * c2
            if e in out:
                s = out[e] + c
                if s:
                    out[e] = s
                else:
                    del out[e]
            else:
                out[e] = c
    return MultiPoly._raw(p.vs, out)


def poly_eval(p: MultiPoly, assignment) -> GaussianRational:
    """Evaluate at a point given as a sequence (variable order) or a mapping.

    Mapping keys may be variable indices, :class:`Variable` objects or names.
    """
    nv = len(p.vs)
    if isinstance(assignment, Mapping):
        vals: list = [None] * nv
        names = {name: k for k, name in enumerate(p.vs.names())}
        for key, value in assignment.items():
            if isinstance(key, Variable):
                k = p.vs.index(key)
            elif isinstance(key, str):
                k = names[key]
            else:
                k = int(key)
            vals[k] = GaussianRational.coerce(value)
    else:
        vals = [GaussianRational.coerce(v) for v in assignment]
        if len(vals) != nv:
            raise ContractError(f"assignment has {len(vals)} values for {nv} variables")
    total = ZERO
    for e, c in p.terms.items():
        term = c
        for k, x in enumerate(e):
            if x:
                if vals[k] is None:
                    raise ContractError(f"assignment misses variable {p.vs[k].name}")
                term = term * vals[k] ** x
        total = total + term
    return total


def format_poly(p: MultiPoly) -> str:
    """Human-readable rendering; not the serialization format."""
    if not p.terms:
        return "0"
    names = p.vs.names()
    parts = []
    for e, c in reversed(p.sorted_terms()):
        mono = "*".join(
            names[k] if x == 1 else f"{names[k]}^{x}" for k, x in enumerate(e) if x
        )
        coeff = format_gaussian(c)
        parts.append(f"({coeff})*{mono}" if mono else f"({coeff})")
    return " + ".join(parts)


def serialize_terms(p: MultiPoly) -> str:
    """Sparse term list ``coef @ e1 e2 ... ; coef @ ...`` in grevlex order."""
    return " ; ".join(f"{format_gaussian(c)} @ {format_exponent(e)}" for e, c in p.sorted_terms())


def parse_terms(text: str, vs: VariableSpace) -> MultiPoly:
    text = text.strip()
    if not text:
        return MultiPoly.zero(vs)
    terms: dict[Exponent, GaussianRational] = {}
    for chunk in text.split(";"):
        coef, sep, exp = chunk.partition("@")
        if not sep:
            raise ParseError(f"term {chunk.strip()!r} lacks '@'")
        e = parse_exponent(exp, len(vs))
        if e in terms:
            raise ParseError(f"duplicate monomial {format_exponent(e)}")
        terms[e] = parse_gaussian(coef)
    return MultiPoly(vs, terms)
