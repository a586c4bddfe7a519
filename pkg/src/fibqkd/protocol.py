"""Protocol configuration, source state, detectors and outcome indexing.

D-basis outcomes are labelled by the superposition they register: the
detector pair tuned to ``|S_m> = (|F_{m-1}> + |F_{m+1}>)/sqrt 2`` reports
``CDetect(m)`` (constructive port, ket ``i|S_m>``) or ``DDetect(m)``
(destructive port, ket ``(|F_{m+1}> - |F_{m-1}>)/sqrt 2``).  With that
labelling the D-basis alphabet ``S_{m0} .. S_{m0+N-1}`` lines up with the
L-basis alphabet ``F_{m0} .. F_{m0+N-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional

from .hilbert import (
    BipartiteKet,
    ContractError,
    DomainError,
    OamKet,
    c_ket,
    d_ket,
    one,
)


class Basis(str, Enum):
    L = "L"
    D = "D"


class Kind(str, Enum):
    EIGEN = "F"
    C = "C"
    D = "D"
    OUT_L = "Lout"
    OUT_D = "Dout"


@dataclass(frozen=True)
class ProtocolConfig:
    """Alphabet, source spectrum and eavesdropping fraction.

    ``pump_lo``/``pump_hi`` bound the pump components ``n`` of the source; each
    contributes the adjacent pairs ``(n-1, n-2)`` and ``(n-2, n-1)``.  The
    defaults make the photons populate every ladder site within four of the
    alphabet, which is the farthest an intercepted-and-resent photon can be
    moved into a detector that still registers an in-alphabet outcome.
    """

    n: int = 8
    m0: int = 2
    pump_lo: Optional[int] = None
    pump_hi: Optional[int] = None
    eta: float = 0.0
    eve_enabled: bool = True

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"alphabet size must be >= 2, got {self.n}")
        if self.m0 < 2:
            raise DomainError(f"m0 must be >= 2, got {self.m0}")
        if self.pump_lo is None:
            object.__setattr__(self, "pump_lo", self.m0 - 2)
        if self.pump_hi is None:
            object.__setattr__(self, "pump_hi", self.m0 + self.n + 4)
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")
        # every in-alphabet site of either basis must see the full local source
        if self.pump_lo > self.m0 or self.pump_hi < self.m0 + self.n + 2:
            raise DomainError(
                f"pump range [{self.pump_lo}, {self.pump_hi}] too narrow for alphabet "
                f"[{self.m0}, {self.m0 + self.n - 1}]; need pump_lo <= m0 and "
                f"pump_hi >= m0 + N + 2"
            )

    @property
    def hi(self) -> int:
        """Highest in-alphabet ladder site."""
        return self.m0 + self.n - 1

    @property
    def dim(self) -> int:
        return 3 * self.n + 2

    @property
    def effective_eta(self) -> float:
        return self.eta if self.eve_enabled else 0.0

    def in_alphabet(self, m: int) -> bool:
        return self.m0 <= m <= self.hi

    def alphabet(self) -> range:
        return range(self.m0, self.hi + 1)

    def photon_sites(self) -> range:
        """Ladder sites carried by either photon of the source."""
        return range(self.pump_lo - 2, self.pump_hi)

    def eigen_sites(self) -> range:
        # a resent superposition reaches one site past the photon support
        return range(self.pump_lo - 4, self.pump_hi + 2)

    def superposition_sites(self) -> range:
        return range(self.pump_lo - 5, self.pump_hi + 3)


@dataclass(frozen=True)
class Outcome:
    """A detector firing, tagged by kind and ladder/superposition index.

    ``EIGEN``, ``C`` and ``D`` outcomes may carry any site; they are mapped to
    the out-of-range tags by :func:`aggregate` when the site lies outside the
    alphabet.
    """

    kind: Kind
    m: Optional[int] = None

    @property
    def basis(self) -> Basis:
        return Basis.L if self.kind in (Kind.EIGEN, Kind.OUT_L) else Basis.D

    @property
    def out_of_range(self) -> bool:
        return self.kind in (Kind.OUT_L, Kind.OUT_D)

    @property
    def label(self) -> str:
        if self.out_of_range:
            return self.kind.value
        return f"{self.kind.value}{self.m}"

    def __str__(self) -> str:
        return self.label


OUT_L = Outcome(Kind.OUT_L)
OUT_D = Outcome(Kind.OUT_D)


def aggregate(outcome: Outcome, config: ProtocolConfig) -> Outcome:
    """Collapse detections outside the alphabet onto the basis' out-of-range tag."""
    if outcome.out_of_range or config.in_alphabet(outcome.m):
        return outcome
    return OUT_L if outcome.basis is Basis.L else OUT_D


def outcome_index(outcome: Outcome, config: ProtocolConfig) -> int:
    """1-based matrix index of an outcome.

    ``1`` is the L-basis out-of-range tag, ``2..N+1`` the eigenstates,
    ``N+2`` the D-basis out-of-range tag and ``N+2k+3``/``N+2k+4`` the
    C/D firings for superposition ``m0+k``.
    """
    if outcome.kind is Kind.OUT_L:
        return 1
    if outcome.kind is Kind.OUT_D:
        return config.n + 2
    if outcome.m is None or not config.in_alphabet(outcome.m):
        raise DomainError(
            f"{outcome.kind.name} outcome at site {outcome.m} is outside the alphabet; "
            "aggregate it to an out-of-range tag first"
        )
    k = outcome.m - config.m0
    if outcome.kind is Kind.EIGEN:
        return k + 2
    if outcome.kind is Kind.C:
        return config.n + 2 * k + 3
    return config.n + 2 * k + 4


def outcome_from_index(i: int, config: ProtocolConfig) -> Outcome:
    n = config.n
    if not 1 <= i <= config.dim:
        raise DomainError(f"outcome index {i} outside [1, {config.dim}]")
    if i == 1:
        return OUT_L
    if i <= n + 1:
        return Outcome(Kind.EIGEN, config.m0 + i - 2)
    if i == n + 2:
        return OUT_D
    k, r = divmod(i - n - 3, 2)
    return Outcome(Kind.C if r == 0 else Kind.D, config.m0 + k)


def outcome_labels(config: ProtocolConfig) -> List[str]:
    return [outcome_from_index(i, config).label for i in range(1, config.dim + 1)]


@dataclass(frozen=True)
class DetectorSpec:
    """One detector: the raw firing it reports, its ket and POVM weight.

    The D-basis apparatus splits every incoming eigenstate between two
    detector pairs, so its POVM elements are ``|ket><ket| / 2``.
    """

    outcome: Outcome
    ket: OamKet
    weight: Fraction

    @property
    def site(self) -> int:
        return self.outcome.m


def detector_bank(basis: Basis, config: ProtocolConfig, exact: bool = False) -> List[DetectorSpec]:
    """All detectors of one basis over the extended ladder window."""
    basis = Basis(basis)
    if basis is Basis.L:
        return [
            DetectorSpec(Outcome(Kind.EIGEN, m), OamKet.basis(m, exact), Fraction(1))
            for m in config.eigen_sites()
        ]
    bank = []
    for m in config.superposition_sites():
        bank.append(DetectorSpec(Outcome(Kind.C, m), c_ket(m + 1, exact), Fraction(1, 2)))
        bank.append(DetectorSpec(Outcome(Kind.D, m), d_ket(m + 1, exact), Fraction(1, 2)))
    return bank


def source_terms(config: ProtocolConfig, exact: bool = False) -> BipartiteKet:
    """Unnormalized source state with unit amplitude on every adjacent pair."""
    u = one(exact)
    terms = []
    for n in range(config.pump_lo, config.pump_hi + 1):
        terms.append(((n - 1, n - 2), u))
        terms.append(((n - 2, n - 1), u))
    return BipartiteKet(terms)


def source_state(config: ProtocolConfig) -> BipartiteKet:
    """Normalized biphoton state summed over the pump components."""
    width = config.pump_hi - config.pump_lo + 1
    return source_terms(config).scaled(1.0 / math.sqrt(2 * width))


def require_alphabet(outcome: Outcome, config: ProtocolConfig) -> None:
    if outcome.out_of_range or not config.in_alphabet(outcome.m):
        raise ContractError(f"outcome {outcome} is not an in-alphabet detection")
