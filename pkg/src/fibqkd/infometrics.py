"""Disturbance, Shannon information and secret key rate."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import List, Sequence, Tuple

import numpy as np

from .engine import (
    EveModel,
    JointProbabilityMatrix,
    delta,
    joint_prob_no_eve,
    joint_prob_with_eve,
    mix,
)
from .hilbert import DomainError
from .protocol import ProtocolConfig


@dataclass(frozen=True)
class SecurityMetrics:
    eta: float
    disturbance: float
    hA: float
    hB: float
    hAB: float
    iAB: float
    iAE: float
    retained: float
    keyRate: float

    @classmethod
    def columns(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> List[float]:
        return [getattr(self, c) for c in self.columns()]

    def as_dict(self) -> dict:
        return asdict(self)


def disturbance(dp) -> float:
    """Root-sum-square of the entries of ``P - P0``."""
    arr = np.asarray(dp, dtype=float)
    return float(math.sqrt(float(np.sum(arr * arr))))


def _entropy(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def mutual_information(p) -> Tuple[float, float, float, float]:
    """Return ``(hA, hB, hAB, iAB)`` in bits.

    Columns are Alice's outcomes and rows Bob's, so Alice's marginal sums over
    rows.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0):
        raise DomainError("probability matrix has negative entries")
    h_a = _entropy(arr.sum(axis=0))
    h_b = _entropy(arr.sum(axis=1))
    h_ab = _entropy(arr.ravel())
    return h_a, h_b, h_ab, h_a + h_b - h_ab


def retained_fraction(p, n: int) -> float:
    """Probability that neither party's outcome is out of range."""
    arr = np.asarray(p, dtype=float)
    oor = [0, n + 1]
    keep = np.ones(arr.shape[1], dtype=bool)
    keep[oor] = False
    return float(arr[np.ix_(keep, keep)].sum())


def eve_information(eta: float, retained: float, i_ab: float) -> float:
    """Eve's information per trial: fraction tapped x fraction kept x ``I_AB``."""
    return eta * retained * i_ab


def key_rate(i_ab: float, i_ae: float) -> float:
    return i_ab - i_ae


def security_metrics(
    p: JointProbabilityMatrix, p0: JointProbabilityMatrix, eta: float
) -> SecurityMetrics:
    h_a, h_b, h_ab, i_ab = mutual_information(p)
    r = retained_fraction(p, p.n)
    i_ae = eve_information(eta, r, i_ab)
    return SecurityMetrics(
        eta=float(eta),
        disturbance=disturbance(delta(p, p0)),
        hA=h_a,
        hB=h_b,
        hAB=h_ab,
        iAB=i_ab,
        iAE=i_ae,
        retained=r,
        keyRate=key_rate(i_ab, i_ae),
    )


def eta_grid(count: int = 101) -> np.ndarray:
    if count < 2:
        raise DomainError("an eta grid needs at least two points")
    return np.linspace(0.0, 1.0, count)


def sweep(
    config: ProtocolConfig,
    etas: Sequence[float] | None = None,
    eve: EveModel = EveModel(),
    exact: bool = False,
) -> List[SecurityMetrics]:
    """Security metrics along a grid of eavesdropping fractions.

    ``K`` against ``D`` follows parametrically from the same rows.
    """
    etas = eta_grid() if etas is None else etas
    p0 = joint_prob_no_eve(config, exact=exact)
    pe = joint_prob_with_eve(config, eve, exact=exact)
    return [security_metrics(mix(p0, pe, float(eta)), p0, float(eta)) for eta in etas]
