from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fibqkd.hilbert import (
    BipartiteKet,
    ContractError,
    DomainError,
    OamKet,
    c_ket,
    d_ket,
    fib,
    inner_product,
    project_alice,
    project_bob,
    superposition_ket,
)


def test_fib_values():
    assert [fib(m) for m in range(1, 12)] == [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144]


@pytest.mark.parametrize("m", [0, -3])
def test_fib_rejects_nonpositive(m):
    with pytest.raises(DomainError):
        fib(m)


@given(st.integers(1, 60))
def test_fib_recurrence(m):
    assert fib(m + 2) == fib(m + 1) + fib(m)


def test_zero_amplitudes_dropped():
    k = OamKet({1: 0j, 2: 1 + 0j})
    assert k.support() == (2,)


def test_basis_orthonormal():
    for exact in (False, True):
        a, b = OamKet.basis(3, exact), OamKet.basis(4, exact)
        assert inner_product(a, a) == 1
        assert inner_product(a, b) == 0


@given(st.integers(-6, 20))
def test_c_and_d_orthogonal_and_normalized(n):
    c, d = c_ket(n, exact=True), d_ket(n, exact=True)
    assert inner_product(c, d).is_zero()
    assert c.norm2() == 1 and d.norm2() == 1


def test_adjacent_superpositions_overlap_half():
    s1, s2 = superposition_ket(5, exact=True), superposition_ket(7, exact=True)
    assert inner_product(s1, s2).as_fraction() == Fraction(1, 2)
    assert inner_product(s1, superposition_ket(9, exact=True)).is_zero()


def test_inner_product_conjugates_first_argument():
    a = OamKet({1: 1j})
    b = OamKet({1: 1 + 0j})
    assert inner_product(a, b) == -1j
    assert inner_product(b, a) == 1j


def test_project_bob_weight_and_collapse():
    h = 1 / math.sqrt(2)
    state = BipartiteKet({(1, 2): h, (2, 1): h})
    w, post = project_bob(state, OamKet.basis(2))
    assert w == pytest.approx(0.5)
    assert post.approx_equal(BipartiteKet({(1, 2): 1.0}))
    w, post = project_alice(state, OamKet.basis(5))
    assert w == 0 and len(post) == 0


def test_projection_requires_normalized_ket():
    state = BipartiteKet({(1, 2): 1.0})
    with pytest.raises(ContractError):
        project_bob(state, OamKet({2: 2.0}))
