from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fibqkd.hilbert import ContractError, DomainError
from fibqkd.protocol import (
    OUT_D,
    OUT_L,
    Basis,
    Kind,
    Outcome,
    ProtocolConfig,
    aggregate,
    detector_bank,
    outcome_from_index,
    outcome_index,
    outcome_labels,
    require_alphabet,
    source_state,
)


def test_defaults():
    c = ProtocolConfig()
    assert (c.n, c.m0, c.pump_lo, c.pump_hi, c.dim) == (8, 2, 0, 14, 26)
    assert list(c.alphabet()) == list(range(2, 10))


@pytest.mark.parametrize(
    "kwargs",
    [dict(n=1), dict(m0=1), dict(eta=-0.1), dict(eta=1.5), dict(pump_lo=3), dict(pump_hi=11)],
)
def test_invalid_configs(kwargs):
    with pytest.raises(DomainError):
        ProtocolConfig(**kwargs)


def test_eve_disabled_zeroes_eta():
    assert ProtocolConfig(eta=0.4, eve_enabled=False).effective_eta == 0.0


def test_index_layout_n8():
    c = ProtocolConfig()
    assert outcome_index(OUT_L, c) == 1
    assert outcome_index(Outcome(Kind.EIGEN, 2), c) == 2
    assert outcome_index(Outcome(Kind.EIGEN, 9), c) == 9
    assert outcome_index(OUT_D, c) == 10
    assert outcome_index(Outcome(Kind.C, 2), c) == 11
    assert outcome_index(Outcome(Kind.D, 9), c) == 26


def test_unaggregated_outcome_rejected():
    with pytest.raises(DomainError):
        outcome_index(Outcome(Kind.EIGEN, 10), ProtocolConfig())


@given(st.integers(2, 12), st.integers(2, 6))
def test_index_roundtrip(n, m0):
    c = ProtocolConfig(n=n, m0=m0)
    for i in range(1, c.dim + 1):
        assert outcome_index(outcome_from_index(i, c), c) == i
    assert len(set(outcome_labels(c))) == c.dim


def test_aggregate():
    c = ProtocolConfig()
    assert aggregate(Outcome(Kind.EIGEN, 1), c) is OUT_L
    assert aggregate(Outcome(Kind.D, 10), c) is OUT_D
    assert aggregate(Outcome(Kind.C, 5), c) == Outcome(Kind.C, 5)


def test_detector_banks_are_complete_povms():
    c = ProtocolConfig()
    for basis in Basis:
        bank = detector_bank(basis, c, exact=True)
        # sum of weighted diagonal elements at an interior site equals 1
        site = 5
        total = sum(d.weight * d.ket[site].abs2().as_fraction() for d in bank if site in d.ket.support())
        assert total == 1
    assert all(d.weight == Fraction(1, 2) for d in detector_bank(Basis.D, c))


def test_source_normalized():
    assert source_state(ProtocolConfig()).is_normalized()


def test_require_alphabet():
    c = ProtocolConfig()
    require_alphabet(Outcome(Kind.EIGEN, 4), c)
    with pytest.raises(ContractError):
        require_alphabet(OUT_L, c)
