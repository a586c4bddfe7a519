"""Joint outcome probability matrices with and without an intercept-resend Eve.

Rows are Bob's outcome index, columns Alice's (both 1-based in the docs,
0-based in the arrays).  Each of the four basis-combination blocks is
normalized to carry probability 1/4 after discarding events that are out of
range for both parties.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .hilbert import DomainError, OamKet, bob_conditional, inner_product
from .protocol import (
    Basis,
    DetectorSpec,
    ProtocolConfig,
    aggregate,
    detector_bank,
    outcome_index,
    source_terms,
)
from .surd import Surd

BLOCK_MASS = Fraction(1, 4)


@dataclass(frozen=True)
class EveModel:
    """Intercept-resend attack on Bob's channel.

    Attributes:
        basis_prob: probability that Eve measures in the L basis.
        target: channel she taps; only ``"bob"`` is supported.
    """

    basis_prob: float = 0.5
    target: str = "bob"

    def __post_init__(self):
        if not 0.0 <= self.basis_prob <= 1.0:
            raise DomainError(f"basis_prob must lie in [0, 1], got {self.basis_prob}")
        if self.target != "bob":
            raise DomainError("only interception of Bob's channel is modelled")


@dataclass(frozen=True, eq=False)
class JointProbabilityMatrix:
    """A ``(3N+2) x (3N+2)`` joint outcome distribution, rows = Bob.

    ``entries`` is a float array, or an object array of ``Fraction`` in exact
    mode.
    """

    entries: np.ndarray
    n: int

    @property
    def exact(self) -> bool:
        return self.entries.dtype == object

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    def _split(self) -> int:
        return self.n + 1

    @property
    def L(self) -> np.ndarray:
        s = self._split()
        return self.entries[:s, :s]

    @property
    def C(self) -> np.ndarray:
        s = self._split()
        return self.entries[:s, s:]

    @property
    def F(self) -> np.ndarray:
        s = self._split()
        return self.entries[s:, :s]

    @property
    def D(self) -> np.ndarray:
        s = self._split()
        return self.entries[s:, s:]

    def blocks(self) -> Dict[str, np.ndarray]:
        return {"L": self.L, "C": self.C, "F": self.F, "D": self.D}

    def total(self):
        return self.entries.sum()

    def to_float(self) -> "JointProbabilityMatrix":
        if not self.exact:
            return self
        return JointProbabilityMatrix(self.entries.astype(float), self.n)

    def as_array(self) -> np.ndarray:
        return self.to_float().entries

    def __array__(self, dtype=None):
        return self.as_array() if dtype is None else self.as_array().astype(dtype)


def _block_slices(n: int) -> Dict[Tuple[Basis, Basis], Tuple[slice, slice]]:
    """(alice_basis, bob_basis) -> (row slice, column slice)."""
    s = n + 1
    lo, hi = slice(0, s), slice(s, 3 * n + 2)
    return {
        (Basis.L, Basis.L): (lo, lo),
        (Basis.D, Basis.L): (lo, hi),
        (Basis.L, Basis.D): (hi, lo),
        (Basis.D, Basis.D): (hi, hi),
    }


class _Bank:
    """Detectors of one basis indexed by the ladder sites their kets touch."""

    def __init__(self, detectors: Sequence[DetectorSpec], config: ProtocolConfig, exact: bool):
        self.detectors = list(detectors)
        self.exact = exact
        self.weights = [d.weight if exact else float(d.weight) for d in self.detectors]
        self.index = [outcome_index(aggregate(d.outcome, config), config) - 1 for d in self.detectors]
        self._by_site: Dict[int, List[int]] = defaultdict(list)
        for k, d in enumerate(self.detectors):
            for site in d.ket.support():
                self._by_site[site].append(k)
        lo, hi = min(self._by_site), max(self._by_site)
        self.window = (lo, hi)

    def overlapping(self, ket: OamKet) -> List[int]:
        ks = set()
        for site in ket.support():
            ks.update(self._by_site.get(site, ()))
        return sorted(ks)

    def born(self, ket: OamKet) -> Iterable[Tuple[int, object]]:
        """Yield ``(detector, weight * |<det|ket>|^2)`` for nonzero terms."""
        for k in self.overlapping(ket):
            amp = inner_product(self.detectors[k].ket, ket)
            p = _prob(amp, self.exact)
            if p:
                yield k, self.weights[k] * p


def _prob(amp, exact: bool):
    if exact:
        return amp.abs2().as_fraction()
    return amp.real * amp.real + amp.imag * amp.imag


def _banks(config: ProtocolConfig, exact: bool) -> Dict[Basis, _Bank]:
    return {b: _Bank(detector_bank(b, config, exact), config, exact) for b in Basis}


def _check_support(ket: OamKet, bank: _Bank) -> None:
    lo, hi = bank.window
    sup = ket.support()
    if sup and (sup[0] < lo or sup[-1] > hi):
        raise RuntimeError(f"state support {sup[0]}..{sup[-1]} escapes detector window {lo}..{hi}")


def _empty(config: ProtocolConfig, exact: bool) -> np.ndarray:
    if exact:
        m = np.empty((config.dim, config.dim), dtype=object)
        m.fill(Fraction(0))
        return m
    return np.zeros((config.dim, config.dim))


def _oor(config: ProtocolConfig) -> Tuple[int, int]:
    return 0, config.n + 1


def _normalize_blocks(raw: np.ndarray, config: ProtocolConfig, exact: bool) -> np.ndarray:
    quarter = BLOCK_MASS if exact else 0.25
    out = raw.copy()
    for rows, cols in _block_slices(config.n).values():
        mass = raw[rows, cols].sum()
        if mass == 0:
            raise RuntimeError("basis-combination block has no probability mass")
        out[rows, cols] = raw[rows, cols] * (quarter / mass)
    return out


def _accumulate(raw, i, j, p, oor):
    if i in oor and j in oor:
        return
    raw[j, i] += p


def joint_prob_no_eve(config: ProtocolConfig, exact: bool = False) -> JointProbabilityMatrix:
    """Joint distribution ``P0`` of Alice's and Bob's outcomes without Eve."""
    psi = source_terms(config, exact)
    banks = _banks(config, exact)
    raw = _empty(config, exact)
    oor = _oor(config)
    for a_basis in Basis:
        abank = banks[a_basis]
        for ka, det in enumerate(abank.detectors):
            phi = bob_conditional(psi, det.ket)
            if not len(phi):
                continue
            wa = abank.weights[ka]
            i = abank.index[ka]
            for b_basis in Basis:
                bbank = banks[b_basis]
                _check_support(phi, bbank)
                for kb, p in bbank.born(phi):
                    _accumulate(raw, i, bbank.index[kb], wa * p, oor)
    return JointProbabilityMatrix(_normalize_blocks(raw, config, exact), config.n)


def joint_prob_with_eve(
    config: ProtocolConfig, eve: EveModel = EveModel(), exact: bool = False
) -> JointProbabilityMatrix:
    """Joint distribution ``P_E`` when Eve intercepts every photon bound for Bob.

    Eve measures Bob's photon in L (probability ``eve.basis_prob``) or D and
    forwards the ket of the detector that fired.
    """
    psi = source_terms(config, exact)
    banks = _banks(config, exact)
    raw = _empty(config, exact)
    oor = _oor(config)
    if exact:
        pl = Fraction(eve.basis_prob).limit_denominator(10**12)
        e_probs = {Basis.L: pl, Basis.D: 1 - pl}
    else:
        e_probs = {Basis.L: eve.basis_prob, Basis.D: 1.0 - eve.basis_prob}
    # Bob's distribution for each possible resent ket, memoized per Eve detector
    resent: Dict[Tuple[Basis, int, Basis], List[Tuple[int, object]]] = {}
    for a_basis in Basis:
        abank = banks[a_basis]
        for ka, det in enumerate(abank.detectors):
            phi = bob_conditional(psi, det.ket)
            if not len(phi):
                continue
            wa = abank.weights[ka]
            i = abank.index[ka]
            for e_basis in Basis:
                pe_basis = e_probs[e_basis]
                if not pe_basis:
                    continue
                ebank = banks[e_basis]
                _check_support(phi, ebank)
                for ke, pe in ebank.born(phi):
                    ket = ebank.detectors[ke].ket
                    for b_basis in Basis:
                        key = (e_basis, ke, b_basis)
                        if key not in resent:
                            _check_support(ket, banks[b_basis])
                            resent[key] = list(banks[b_basis].born(ket))
                        bidx = banks[b_basis].index
                        for kb, pb in resent[key]:
                            _accumulate(raw, i, bidx[kb], wa * pe_basis * pe * pb, oor)
    return JointProbabilityMatrix(_normalize_blocks(raw, config, exact), config.n)


def mix(p0: JointProbabilityMatrix, pe: JointProbabilityMatrix, eta) -> JointProbabilityMatrix:
    """``(1 - eta) P0 + eta P_E``."""
    if p0.shape != pe.shape:
        raise DomainError(f"shape mismatch {p0.shape} vs {pe.shape}")
    if not 0 <= eta <= 1:
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    if p0.exact and pe.exact:
        eta = Fraction(eta)
        return JointProbabilityMatrix((1 - eta) * p0.entries + eta * pe.entries, p0.n)
    a, b = p0.as_array(), pe.as_array()
    return JointProbabilityMatrix((1.0 - eta) * a + eta * b, p0.n)


def delta(p: JointProbabilityMatrix, p0: JointProbabilityMatrix) -> np.ndarray:
    """Signed change ``P - P0``."""
    if p.shape != p0.shape:
        raise DomainError(f"shape mismatch {p.shape} vs {p0.shape}")
    if p.exact and p0.exact:
        return p.entries - p0.entries
    return p.as_array() - p0.as_array()


def support(m) -> np.ndarray:
    """Boolean mask of nonzero entries."""
    arr = m.entries if isinstance(m, JointProbabilityMatrix) else np.asarray(m)
    return np.vectorize(lambda x: x != 0, otypes=[bool])(arr)


def to_exact_fraction_array(values) -> np.ndarray:
    arr = np.empty(np.shape(values), dtype=object)
    for idx, v in np.ndenumerate(np.asarray(values, dtype=object)):
        arr[idx] = v.as_fraction() if isinstance(v, Surd) else Fraction(v)
    return arr
