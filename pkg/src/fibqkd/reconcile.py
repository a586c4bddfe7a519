"""Classical reconciliation: Alice's public hint and the receiver's decoding.

Only Alice transmits.  The hint depends on the basis pair:

* LL: one bit, ``1`` iff ``m mod 4`` is 0 or 3.  The receiver's candidates for
  Alice's site are his two neighbours, which sit two sites apart.
* LD and DL: two bits cycling ``01, 10, 00`` from ``m0``.  Candidates are
  spaced by two over a span of four sites.
* DD: two bits ``00, 00, 01, 01, 10, 10, 11, 11`` repeating from ``S_1``.
  Candidates are spaced by two over a span of six sites.

The key symbol is always Alice's value ``F_m`` (her eigenvalue, or the
superposition index she registered).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .protocol import Basis, ProtocolConfig

LD_CYCLE = ("01", "10", "00")
DD_CYCLE = ("00", "01", "10", "11")

# receiver-site offsets at which Alice's site can lie, keyed by (alice, receiver) basis
_CANDIDATE_OFFSETS: Dict[Tuple[Basis, Basis], Tuple[int, ...]] = {
    (Basis.L, Basis.L): (-1, 1),
    (Basis.L, Basis.D): (-2, 0, 2),
    (Basis.D, Basis.L): (-2, 0, 2),
    (Basis.D, Basis.D): (-3, -1, 1, 3),
}


def ll_bit(m: int) -> str:
    return "1" if m % 4 in (0, 3) else "0"


def ld_code(m: int, m0: int) -> str:
    return LD_CYCLE[(m - m0) % 3]


def dd_code(n: int) -> str:
    return DD_CYCLE[((n - 1) % 8) // 2]


def alice_message(alice_basis: Basis, bob_basis: Basis, site: int, config: ProtocolConfig) -> str:
    """Bits Alice announces for her in-alphabet site given both bases."""
    alice_basis, bob_basis = Basis(alice_basis), Basis(bob_basis)
    if alice_basis is Basis.L and bob_basis is Basis.L:
        return ll_bit(site)
    if alice_basis is Basis.D and bob_basis is Basis.D:
        return dd_code(site)
    return ld_code(site, config.m0)


def candidates(alice_basis: Basis, receiver_basis: Basis, receiver_site: int, config: ProtocolConfig) -> List[int]:
    """In-alphabet sites Alice may hold, given a receiver's own detection."""
    offs = _CANDIDATE_OFFSETS[(Basis(alice_basis), Basis(receiver_basis))]
    return [receiver_site + d for d in offs if config.in_alphabet(receiver_site + d)]


def decode(
    alice_basis: Basis,
    bob_basis: Basis,
    receiver_basis: Basis,
    receiver_site: int,
    message: str,
    config: ProtocolConfig,
) -> List[int]:
    """Candidates consistent with the receiver's detection and Alice's message.

    ``bob_basis`` selects the code table Alice used; ``receiver_basis`` is the
    basis the decoding party actually measured in (Bob's own, or Eve's).
    """
    return [
        m
        for m in candidates(alice_basis, receiver_basis, receiver_site, config)
        if alice_message(alice_basis, bob_basis, m, config) == message
    ]


def classical_guess_probability(config: ProtocolConfig) -> Fraction:
    """Exact success probability of guessing Alice's LL key from her bit alone."""
    groups: Dict[str, int] = {}
    for m in config.alphabet():
        b = ll_bit(m)
        groups[b] = groups.get(b, 0) + 1
    n = config.n
    # for each announced bit, guess uniformly within the matching group
    return sum((Fraction(count, n) * Fraction(1, count) for count in groups.values()), Fraction(0))


def min_code_distance_ok(codes: Sequence[str]) -> bool:
    return len(set(codes)) == len(codes)
