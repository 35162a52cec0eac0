import random
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lonogo import bounds
from lonogo.compiler import compile_task
from lonogo.errors import ContractError
from lonogo.fock import canonicalize, haar_random_target


@pytest.mark.parametrize("geometry,K", [
    ((2, 0, 3, 0), 126),
    ((3, 1, 4, 1), 726),
    ((2, 0, 4, 0), 510),
    ((3, 1, 5, 1), 59046),
])
def test_table_bounds(geometry, K):
    assert bounds.degree_upper_bound(*geometry) == K


def test_n4_geometry_uses_the_formula():
    # n=4, m=1, N=4, M=1: V_max = 16, s = C(5,3) = 10, so 4**10 - 4
    assert bounds.degree_upper_bound(4, 1, 4, 1) == 4 ** 10 - 4


def test_equation_counts():
    # two target photons in four modes; also the Bell task's equation count
    assert bounds.equation_count(3, 1, 5, 1) == comb(5, 2) == 10
    assert bounds.equation_count(1, 0, 1, 0) == 1
    assert bounds.equation_count(2, 0, 3, 0) == 6


def test_column_and_row_examples():
    assert bounds.column_bound(3, 0, 2, 0, 3) == 140
    assert bounds.column_bound(3, 0, 2, 0, 0) == bounds.equation_count(3, 0, 2, 0)
    assert bounds.row_bound(3, 0, 2, 0, 3) == 210
    assert bounds.row_bound(3, 0, 2, 0, 1) == 60


def test_invalid_bookkeeping():
    with pytest.raises(ContractError):
        bounds.equation_count(1, 1, 3, 0)
    with pytest.raises(ContractError):
        bounds.degree_upper_bound(1, 0, 2, 0)
    with pytest.raises(ContractError):
        bounds.column_bound(2, 0, 2, 0, -1)


geometries = st.tuples(st.integers(2, 6), st.integers(0, 3), st.integers(2, 7), st.integers(0, 3)).filter(
    lambda g: g[0] > g[1] and g[2] > g[3])


@given(geometries, st.integers(0, 9))
def test_formulas_match_definitions(g, d):
    n, m, N, M = g
    V = min(N * n, N * N)
    s = comb(n - m + N - M - 1, n - m)
    assert bounds.v_max(n, N) == V
    assert bounds.equation_count(*g) == s
    assert bounds.column_bound(*g, d) == s * comb(V + d, d)
    if d >= n - 1:
        assert bounds.row_bound(*g, d) == comb(V + d + n, V)
    else:
        assert bounds.row_bound(*g, d) == comb(V + d + n, V) - comb(V - 1 + n, V) + comb(V + d, V)
    k = min(V, s)
    assert bounds.degree_upper_bound(*g) == (2 * 2 ** k - 2 if n == 2 else n ** k - n)


def test_twenty_random_geometries():
    rng = random.Random(20)
    for _ in range(20):
        n = rng.randint(2, 6)
        m = rng.randint(0, n - 1)
        N = rng.randint(2, 8)
        M = rng.randint(0, N - 1)
        V = min(N * n, N * N)
        assert bounds.equation_count(n, m, N, M) == comb(n - m + N - M - 1, n - m)
        for d in range(6):
            assert bounds.column_bound(n, m, N, M, d) == comb(n - m + N - M - 1, n - m) * comb(V + d, d)


def test_equation_count_matches_compiler():
    for n, m, nt, seed in [(2, 0, 3, 0), (2, 0, 4, 1), (3, 1, 3, 2), (3, 0, 3, 3)]:
        target = haar_random_target(n - m, nt, seed)
        task = canonicalize(n, m, target)
        ps = compile_task(task)
        assert ps.pre_prune == bounds.equation_count(n, m, task.modes, task.herald_modes)


def test_profile_is_exact_and_serializable():
    prof = bounds.scaling_profile(3, 1, 5, 1, range(4))
    d = prof.to_dict()
    assert d["K_bound"] == 59046 and d["s"] == 10 and d["V_max"] == 15
    assert "59046" in prof.format_text()
    n2 = bounds.scaling_profile(2, 0, 3, 0, range(2))
    assert "fitted" in n2.K_note
