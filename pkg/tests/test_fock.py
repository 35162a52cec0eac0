from fractions import Fraction
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lonogo.algebra import GaussianRational
from lonogo.errors import ParseError, ValidationError
from lonogo.fock import (
    MultiTaskSpec,
    PureState,
    TaskSpec,
    canonicalize,
    haar_random_target,
    occupations,
    parse_state,
    serialize_state,
    validate_multi_task,
    validate_task,
)

BELL = "1/1+0/1i : 1 0 1 0 ; 1/1+0/1i : 0 1 0 1"


@given(st.integers(0, 5), st.integers(1, 4))
def test_occupation_count_and_order(n, N):
    occs = occupations(n, N)
    assert len(occs) == comb(n + N - 1, n)
    assert occs == sorted(occs, reverse=True)
    assert all(sum(o) == n for o in occs)


def test_bell_state_parses():
    s = parse_state(BELL)
    assert s.modes == 4 and s.photons == 2
    assert s.amplitudes == {(1, 0, 1, 0): GaussianRational(1), (0, 1, 0, 1): GaussianRational(1)}


def test_canonical_text_round_trip():
    assert serialize_state(parse_state(BELL)) == BELL
    hom = "1/1+0/1i : 2 0 ; -1/1+0/1i : 0 2"
    assert serialize_state(parse_state(hom)) == hom


amp = st.builds(GaussianRational, st.fractions(max_denominator=9), st.fractions(max_denominator=9))


@given(st.dictionaries(st.sampled_from(occupations(3, 3)), amp, min_size=1))
def test_state_round_trip(amps):
    if not any(amps.values()):
        return
    s = PureState(3, amps)
    assert parse_state(serialize_state(s)) == s


def test_monomial_basis_round_trip():
    s = haar_random_target(2, 3, seed=4)
    text = serialize_state(s)
    assert text.startswith("basis=monomial")
    assert parse_state(text) == s


@pytest.mark.parametrize("text", [
    "1 : 1 0 ; 1 : 1 0",          # duplicate
    "1 : 1 0 ; 1 : 1 0 0",        # inconsistent widths
    "x : 1 0",                    # malformed amplitude
    "1 1 0",                      # no separator
    "1 : 2 0 ; 1 : 0 1",          # mixed photon numbers
    "basis=weird ; 1 : 1 0",
])
def test_state_parse_errors(text):
    with pytest.raises(ParseError):
        parse_state(text)


def test_decimal_amplitudes_rejected_in_exact_tasks():
    target = parse_state("0.5 : 1 0")
    task = TaskSpec(2, PureState.fock((1, 0)), (), target, "exact")
    with pytest.raises(ValidationError):
        validate_task(task)
    validate_task(TaskSpec(2, PureState.fock((1, 0)), (), target, "float"))


def test_validation_collects_every_problem():
    task = TaskSpec(3, PureState.fock((1, 1)), (1, 1, 1), parse_state("1 : 1 0"))
    with pytest.raises(ValidationError) as info:
        validate_task(task)
    assert len(info.value.problems) >= 3


def test_canonicalize_bell():
    task = canonicalize(3, 1, parse_state(BELL))
    assert task.modes == 5
    assert task.input.amplitudes == {(1, 1, 1, 0, 0): 1}
    assert task.herald_pattern == (1,)


def test_canonicalize_two_photons_three_modes():
    target = haar_random_target(2, 3, seed=1)
    task = canonicalize(2, 0, target)
    assert next(iter(task.input.amplitudes)) == (1, 1, 0)
    assert task.herald_pattern == ()


def test_canonicalize_single_photon_is_swap():
    task = canonicalize(1, 0, parse_state("1 : 0 1"))
    assert task.modes == 2
    assert next(iter(task.input.amplitudes)) == (1, 0)
    assert task.herald_pattern == ()


def test_canonicalize_surplus_photons_herald_vacuum():
    # n = 4 > N_T + m = 3: one extra mode heralded on vacuum, ones on the last m modes
    task = canonicalize(4, 1, parse_state("1 : 3 0 ; 1 : 0 3"))
    assert task.modes == 4
    assert task.herald_pattern == (0, 1)
    assert next(iter(task.input.amplitudes)) == (1, 1, 1, 1)


@given(st.integers(1, 5), st.integers(0, 3), st.integers(1, 4))
def test_canonical_mode_count(n, m, nt):
    if n - m < 1:
        return
    occ = (n - m,) + (0,) * (nt - 1)
    task = canonicalize(n, m, PureState.fock(occ))
    assert task.modes == max(n, nt + m)
    assert sum(task.herald_pattern) == m
    validate_task(task)


def test_canonicalize_rejects_bad_bookkeeping():
    with pytest.raises(ValidationError):
        canonicalize(2, 1, parse_state(BELL))


def test_haar_target_shape_and_determinism():
    s = haar_random_target(2, 4, seed=11)
    assert len(s.amplitudes) == 10
    assert s == haar_random_target(2, 4, seed=11)
    assert s != haar_random_target(2, 4, seed=12)
    for a in s.amplitudes.values():
        assert (a.re * 2 ** 16).denominator == 1 and (a.im * 2 ** 16).denominator == 1
    # unit norm up to the rounding grid
    assert abs(float(s.squared_norm()) - 1) < 1e-3


def test_multi_task_validation():
    pairs = ((PureState.fock((1, 0, 1)), PureState.fock((1, 0))),
             (PureState.fock((0, 1, 1)), PureState.fock((0, 1))))
    mt = MultiTaskSpec(3, (1,), pairs, suppress=(PureState.fock((1, 0, 0)),))
    n, m, rows = validate_multi_task(mt)
    assert (n, m, rows) == (2, 1, (0, 1, 2))
    bad = MultiTaskSpec(3, (1,), pairs, suppress=(PureState.fock((1, 1, 0)),))
    with pytest.raises(ValidationError):
        validate_multi_task(bad)


def test_scaled_state():
    s = parse_state(BELL).scaled(Fraction(1, 2))
    assert set(s.amplitudes.values()) == {GaussianRational(Fraction(1, 2))}
