from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from fibqkd import reconcile as rc
from fibqkd.hilbert import fib
from fibqkd.protocol import Basis, Kind, Outcome, ProtocolConfig, outcome_index


def test_ll_table():
    assert [rc.ll_bit(m) for m in range(2, 10)] == list("01100110")


def test_ld_table():
    assert [rc.ld_code(m, 2) for m in range(2, 10)] == ["01", "10", "00", "01", "10", "00", "01", "10"]


def test_dd_table():
    assert [rc.dd_code(n) for n in range(1, 11)] == ["00", "00", "01", "01", "10", "10", "11", "11", "00", "00"]


def test_ll_decode_example():
    cfg = ProtocolConfig()
    # Bob holds F=3 (site 3) and hears bit 0: candidates 2 -> 0, 4 -> 1
    assert rc.alice_message(Basis.L, Basis.L, 2, cfg) == "0"
    assert rc.decode(Basis.L, Basis.L, Basis.L, 3, "0", cfg) == [2]


def test_ld_message_example():
    assert rc.alice_message(Basis.L, Basis.D, 5, ProtocolConfig()) == "01"


@pytest.mark.parametrize("n,m0", [(8, 2), (5, 3), (11, 2)])
def test_code_distance_properties(n, m0):
    sites = range(m0 - 4, m0 + n + 4)
    for m in sites:
        assert rc.ll_bit(m) != rc.ll_bit(m + 2)
        assert rc.min_code_distance_ok([rc.ld_code(m + d, m0) for d in (0, 2, 4)])
        assert rc.min_code_distance_ok([rc.dd_code(m + d) for d in (0, 2, 4, 6)])


@pytest.mark.parametrize("n", [4, 8, 16])
def test_classical_guess_probability(n):
    assert rc.classical_guess_probability(ProtocolConfig(n=n)) == Fraction(2, n)


def test_unique_decoding_on_every_honest_pair(p0_exact, cfg):
    """Every in-alphabet outcome pair with P0 > 0 decodes uniquely to Alice's site."""
    kinds = {Basis.L: (Kind.EIGEN,), Basis.D: (Kind.C, Kind.D)}
    for ab, bb in itertools.product(Basis, Basis):
        for ak, bk in itertools.product(kinds[ab], kinds[bb]):
            for am, bm in itertools.product(cfg.alphabet(), cfg.alphabet()):
                i = outcome_index(Outcome(ak, am), cfg) - 1
                j = outcome_index(Outcome(bk, bm), cfg) - 1
                if p0_exact.entries[j, i] == 0:
                    continue
                msg = rc.alice_message(ab, bb, am, cfg)
                assert rc.decode(ab, bb, bb, bm, msg, cfg) == [am], (ab, bb, am, bm)


def test_candidates_restricted_to_alphabet():
    cfg = ProtocolConfig()
    assert rc.candidates(Basis.L, Basis.L, 2, cfg) == [3]
    assert rc.candidates(Basis.D, Basis.D, 9, cfg) == [6, 8]


def test_key_symbols_are_fibonacci():
    assert [fib(m) for m in ProtocolConfig().alphabet()] == [2, 3, 5, 8, 13, 21, 34, 55]
