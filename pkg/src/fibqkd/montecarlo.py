"""Trial-by-trial simulation of the protocol.

Each trial is sampled sequentially: Alice's basis and detection from the
source, then (with probability ``eta``) Eve's basis and detection on Bob's
conditional photon followed by a resend of her detector's ket, then Bob's
basis and detection.  The conditional distributions come from the same
projection rules as the analytic engine, tabulated once per configuration so
that millions of trials can be drawn with vectorized numpy calls.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Dict, Iterator, List, Optional, Sequence, Union

import numpy as np

from . import reconcile as rc
from .engine import EveModel, JointProbabilityMatrix, _block_slices, joint_prob_no_eve
from .hilbert import ContractError, DomainError, OamKet, bob_conditional, fib, inner_product
from .infometrics import disturbance
from .protocol import (
    Basis,
    Outcome,
    ProtocolConfig,
    aggregate,
    detector_bank,
    outcome_index,
    source_state,
)

BASES = (Basis.L, Basis.D)
CHUNK = 1 << 16
MIN_BLOCK_COUNT = 30


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream for one worker."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class TrialRecord:
    """One trial; ``eveAction`` is ``(basis, raw Outcome)`` or ``None``."""

    aliceBasis: Basis
    bobBasis: Basis
    eveAction: Optional[tuple]
    aliceOutcome: Outcome
    bobOutcome: Outcome
    classicalBits: Optional[str] = None
    aliceKey: Optional[int] = None
    bobKey: Optional[int] = None
    eveKey: Optional[int] = None
    retained: bool = False

    def to_json(self, config: ProtocolConfig) -> dict:
        """Log form: outcomes become 1-based matrix indices."""
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["aliceBasis"] = self.aliceBasis.value
        out["bobBasis"] = self.bobBasis.value
        if self.eveAction is not None:
            eb, eo = self.eveAction
            out["eveAction"] = {"basis": eb.value, "outcome": eo.label}
        out["aliceOutcome"] = outcome_index(self.aliceOutcome, config)
        out["bobOutcome"] = outcome_index(self.bobOutcome, config)
        return out


class ProtocolSampler:
    """Tabulated conditional distributions for one configuration.

    Detectors of both bases share one id space: ids ``0..nL-1`` are L-basis
    eigenstate detectors, the rest D-basis C/D detectors.  Bob's incoming
    photon is identified by a state id: ``a`` for the photon conditioned on
    Alice's detector ``a``, ``K + e`` for a copy of Eve's detector ``e``.
    """

    def __init__(self, config: ProtocolConfig, eve: EveModel = EveModel()):
        self.config = config
        self.eve = eve
        self.detectors = detector_bank(Basis.L, config) + detector_bank(Basis.D, config)
        K = self.n_det = len(self.detectors)
        self.det_basis = np.array([0 if d.outcome.basis is Basis.L else 1 for d in self.detectors], np.int8)
        self.det_site = np.array([d.site for d in self.detectors], np.int64)
        self.det_index = np.array(
            [outcome_index(aggregate(d.outcome, config), config) - 1 for d in self.detectors], np.int64
        )
        self.det_in = np.array([config.in_alphabet(d.site) for d in self.detectors])
        weights = np.array([float(d.weight) for d in self.detectors])

        psi = source_state(config)
        self._bob_states: List[OamKet] = []
        alice_p = np.zeros((2, K))
        for k, det in enumerate(self.detectors):
            phi = bob_conditional(psi, det.ket)
            p = weights[k] * phi.norm2()
            alice_p[self.det_basis[k], k] = p
            self._bob_states.append(phi.normalized() if p > 0 else phi)
        self.alice_p = _rownorm(alice_p)

        # Born weights of every detector on every Bob-bound state
        states = self._bob_states + [d.ket for d in self.detectors]
        born = np.zeros((2, len(states), K))
        for s, ket in enumerate(states):
            if not len(ket):
                continue
            for k, det in enumerate(self.detectors):
                amp = inner_product(det.ket, ket)
                born[self.det_basis[k], s, k] = weights[k] * abs(amp) ** 2
        self.eve_p = _rownorm(born[:, :K, :])
        self.bob_p = _rownorm(born)
        self._alice_cum = np.cumsum(self.alice_p, axis=1)
        self._eve_cum = np.cumsum(self.eve_p, axis=2)
        self._bob_cum = np.cumsum(self.bob_p, axis=2)
        self._build_decode_tables()

    # --- reconciliation lookup -------------------------------------------
    def _build_decode_tables(self):
        K, cfg = self.n_det, self.config
        self.bob_key_table = np.full((K, K), -1, np.int64)
        self.eve_key_table = np.full((K, 2, K), -1, np.int64)
        for a in range(K):
            if not self.det_in[a]:
                continue
            ab = BASES[self.det_basis[a]]
            am = int(self.det_site[a])
            for bb_i, bb in enumerate(BASES):
                msg = rc.alice_message(ab, bb, am, cfg)
                for r in range(K):
                    rb = BASES[self.det_basis[r]]
                    cands = rc.decode(ab, bb, rb, int(self.det_site[r]), msg, cfg)
                    if rb is bb and self.det_in[r] and len(cands) == 1:
                        self.bob_key_table[a, r] = cands[0]
                    if cands:
                        self.eve_key_table[a, bb_i, r] = cands[0]

    # --- sampling --------------------------------------------------------
    def sample(self, trials: int, rng: np.random.Generator) -> "TrialBatch":
        parts = []
        remaining = trials
        while remaining > 0:
            n = min(CHUNK, remaining)
            parts.append(self._sample_chunk(n, rng))
            remaining -= n
        return TrialBatch.concatenate(parts, self)

    def _sample_chunk(self, n: int, rng: np.random.Generator) -> "TrialBatch":
        eta = self.config.effective_eta
        a_basis = (rng.random(n) >= 0.5).astype(np.int8)
        a_det = _categorical(self._alice_cum, a_basis, rng.random(n))
        tapped = rng.random(n) < eta
        e_basis = (rng.random(n) >= self.eve.basis_prob).astype(np.int8)
        e_det = _categorical(self._eve_cum[e_basis, a_det], None, rng.random(n))
        state = np.where(tapped, self.n_det + e_det, a_det)
        b_basis = (rng.random(n) >= 0.5).astype(np.int8)
        b_det = _categorical(self._bob_cum[b_basis, state], None, rng.random(n))
        e_basis = np.where(tapped, e_basis, -1).astype(np.int8)
        e_det = np.where(tapped, e_det, -1)
        return TrialBatch(self, a_basis, b_basis, e_basis, a_det, e_det, b_det)

    def sample_trial(self, rng: np.random.Generator) -> TrialRecord:
        return next(iter(self.sample(1, rng).records()))


def _rownorm(a: np.ndarray) -> np.ndarray:
    s = a.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(s > 0, a / np.where(s > 0, s, 1.0), 0.0)
    return out


def _categorical(cum: np.ndarray, rows: Optional[np.ndarray], u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw; ``cum`` is ``(R, K)`` indexed by ``rows`` or already per-trial."""
    table = cum if rows is None else cum[rows]
    idx = (table < (u * table[:, -1])[:, None]).sum(axis=1)
    return np.minimum(idx, table.shape[1] - 1)


@dataclass
class TrialBatch:
    """Column store of sampled trials plus their reconciliation results."""

    sampler: ProtocolSampler
    alice_basis: np.ndarray
    bob_basis: np.ndarray
    eve_basis: np.ndarray
    alice_det: np.ndarray
    eve_det: np.ndarray
    bob_det: np.ndarray
    alice_key: np.ndarray = field(init=False)
    bob_key: np.ndarray = field(init=False)
    eve_key: np.ndarray = field(init=False)

    def __post_init__(self):
        s = self.sampler
        self.alice_index = s.det_index[self.alice_det]
        self.bob_index = s.det_index[self.bob_det]
        self.retained = s.det_in[self.alice_det] & s.det_in[self.bob_det]
        oor = (0, s.config.n + 1)
        a_oor = np.isin(self.alice_index, oor)
        b_oor = np.isin(self.bob_index, oor)
        self.included = ~(a_oor & b_oor)
        self._reconcile()

    def _reconcile(self):
        s = self.sampler
        keep = self.retained
        site = s.det_site[self.alice_det]
        self.alice_key = np.where(keep, site, -1)
        self.bob_key = np.where(keep, s.bob_key_table[self.alice_det, self.bob_det], -1)
        tapped = self.eve_det >= 0
        eve = s.eve_key_table[self.alice_det, self.bob_basis, np.maximum(self.eve_det, 0)]
        self.eve_key = np.where(keep & tapped, eve, -1)

    def __len__(self) -> int:
        return len(self.alice_det)

    @property
    def config(self) -> ProtocolConfig:
        return self.sampler.config

    @property
    def tapped(self) -> np.ndarray:
        return self.eve_det >= 0

    def subset(self, mask: np.ndarray) -> "TrialBatch":
        return TrialBatch(
            self.sampler,
            self.alice_basis[mask],
            self.bob_basis[mask],
            self.eve_basis[mask],
            self.alice_det[mask],
            self.eve_det[mask],
            self.bob_det[mask],
        )

    @classmethod
    def concatenate(cls, parts: Sequence["TrialBatch"], sampler: ProtocolSampler) -> "TrialBatch":
        if not parts:
            e = np.zeros(0, np.int64)
            return cls(sampler, e.astype(np.int8), e.astype(np.int8), e.astype(np.int8), e, e, e)
        cat = lambda name: np.concatenate([getattr(p, name) for p in parts])
        return cls(
            sampler,
            cat("alice_basis"),
            cat("bob_basis"),
            cat("eve_basis"),
            cat("alice_det"),
            cat("eve_det"),
            cat("bob_det"),
        )

    def records(self) -> Iterator[TrialRecord]:
        s, cfg = self.sampler, self.sampler.config
        for t in range(len(self)):
            a, b = int(self.alice_det[t]), int(self.bob_det[t])
            ab, bb = BASES[self.alice_basis[t]], BASES[self.bob_basis[t]]
            eve = None
            if self.eve_det[t] >= 0:
                e = int(self.eve_det[t])
                eve = (BASES[self.eve_basis[t]], s.detectors[e].outcome)
            retained = bool(self.retained[t])
            bits = rc.alice_message(ab, bb, int(s.det_site[a]), cfg) if retained else None
            yield TrialRecord(
                aliceBasis=ab,
                bobBasis=bb,
                eveAction=eve,
                aliceOutcome=aggregate(s.detectors[a].outcome, cfg),
                bobOutcome=aggregate(s.detectors[b].outcome, cfg),
                classicalBits=bits,
                aliceKey=_key(self.alice_key[t]),
                bobKey=_key(self.bob_key[t]),
                eveKey=_key(self.eve_key[t]),
                retained=retained,
            )


def _key(site) -> Optional[int]:
    return None if site < 0 else fib(int(site))


# --- public operations ---------------------------------------------------

def sample_trial(config: ProtocolConfig, rng: Union[RngStream, np.random.Generator], eve: EveModel = EveModel()) -> TrialRecord:
    """Draw one reconciled trial."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return ProtocolSampler(config, eve).sample_trial(gen)


def reconcile(trial: TrialRecord, config: ProtocolConfig) -> TrialRecord:
    """Fill in Alice's announcement and both parties' key symbols for one trial."""
    if trial.aliceOutcome.out_of_range or trial.bobOutcome.out_of_range:
        raise ContractError("reconciliation needs in-alphabet outcomes on both sides")
    ab, bb = trial.aliceBasis, trial.bobBasis
    a_site, b_site = trial.aliceOutcome.m, trial.bobOutcome.m
    bits = rc.alice_message(ab, bb, a_site, config)
    cands = rc.decode(ab, bb, bb, b_site, bits, config)
    bob_key = fib(cands[0]) if len(cands) == 1 else None
    eve_key = None
    if trial.eveAction is not None:
        eb, eo = trial.eveAction
        ec = rc.decode(ab, bb, eb, eo.m, bits, config)
        eve_key = fib(ec[0]) if ec else None
    return TrialRecord(
        aliceBasis=ab,
        bobBasis=bb,
        eveAction=trial.eveAction,
        aliceOutcome=trial.aliceOutcome,
        bobOutcome=trial.bobOutcome,
        classicalBits=bits,
        aliceKey=fib(a_site),
        bobKey=bob_key,
        eveKey=eve_key,
        retained=True,
    )


def simulate(
    config: ProtocolConfig,
    trials: int,
    seed: int = 0,
    workers: int = 1,
    eve: EveModel = EveModel(),
    sampler: Optional[ProtocolSampler] = None,
) -> TrialBatch:
    """Run ``trials`` trials split over ``workers`` independent streams.

    The output depends only on ``(config, trials, seed, workers)``.
    """
    if trials < 1:
        raise DomainError("need at least one trial")
    if workers < 1:
        raise DomainError("need at least one worker")
    sampler = sampler or ProtocolSampler(config, eve)
    base, extra = divmod(trials, workers)
    sizes = [base + (1 if w < extra else 0) for w in range(workers)]

    def run(w: int) -> TrialBatch:
        return sampler.sample(sizes[w], RngStream(seed, w).generator())

    if workers == 1:
        parts = [run(0)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(workers)))
    return TrialBatch.concatenate(parts, sampler)


def _as_batch(trials, config: ProtocolConfig) -> TrialBatch:
    if isinstance(trials, TrialBatch):
        return trials
    raise TypeError("expected a TrialBatch")


def block_counts(trials: TrialBatch) -> np.ndarray:
    """``(dim, dim)`` histogram of included outcome pairs, rows = Bob."""
    cfg = trials.config
    inc = trials.included
    flat = trials.bob_index[inc] * cfg.dim + trials.alice_index[inc]
    return np.bincount(flat, minlength=cfg.dim * cfg.dim).reshape(cfg.dim, cfg.dim).astype(float)


def empirical_matrix(trials, config: ProtocolConfig) -> JointProbabilityMatrix:
    """Estimate of the joint outcome matrix from simulated trials.

    Events out of range for both parties are dropped.  Each observed
    basis-combination block is normalized separately and all observed blocks
    get equal mass, matching the analytic normalization; the bases are public
    so Alice and Bob can always do this.
    """
    if isinstance(trials, TrialBatch):
        counts = block_counts(trials)
    else:
        trials = list(trials)
        if not trials:
            raise DomainError("empirical matrix needs at least one trial")
        counts = np.zeros((config.dim, config.dim))
        for t in trials:
            if t.aliceOutcome.out_of_range and t.bobOutcome.out_of_range:
                continue
            counts[outcome_index(t.bobOutcome, config) - 1, outcome_index(t.aliceOutcome, config) - 1] += 1
    if counts.sum() == 0:
        raise DomainError("empirical matrix needs at least one included trial")
    out = np.zeros_like(counts)
    slices = list(_block_slices(config.n).values())
    seen = [(r, c) for r, c in slices if counts[r, c].sum() > 0]
    for r, c in seen:
        out[r, c] = counts[r, c] / counts[r, c].sum() / len(seen)
    return JointProbabilityMatrix(out, config.n)


def key_agreement_rate(trials: TrialBatch) -> float:
    """Fraction of retained trials on which Bob's decoded key equals Alice's.

    A failed decoding (no unique candidate) counts as disagreement.
    """
    keep = trials.retained
    if not keep.any():
        raise DomainError("no retained trials")
    return float(np.mean(trials.bob_key[keep] == trials.alice_key[keep]))


def eve_guess_accuracy(trials: TrialBatch) -> float:
    """Fraction of tapped, retained trials on which Eve's decoded key is Alice's."""
    mask = trials.retained & trials.tapped
    if not mask.any():
        raise DomainError("no tapped retained trials")
    return float(np.mean(trials.eve_key[mask] == trials.alice_key[mask]))


@dataclass(frozen=True)
class SecurityCheck:
    status: str  # "ok" or "inconclusive"
    disturbance: Optional[float]
    eve_detected: Optional[bool]
    threshold: Optional[float]
    null_mean: Optional[float]
    null_std: Optional[float]
    checked: np.ndarray  # mask of trials spent on the check

    @property
    def key_mask(self) -> np.ndarray:
        return ~self.checked


def null_disturbances(p0: JointProbabilityMatrix, block_sizes: Dict[tuple, int], runs: int, rng: np.random.Generator) -> np.ndarray:
    """Disturbance of η=0 empirical matrices with the given per-block counts."""
    ref = p0.as_array()
    out = np.empty(runs)
    slices = _block_slices(p0.n)
    probs = {}
    for key, (r, c) in slices.items():
        block = ref[r, c]
        probs[key] = block.ravel() / block.sum()
    seen = [k for k, v in block_sizes.items() if v > 0]
    for t in range(runs):
        est = np.zeros_like(ref)
        for key in seen:
            r, c = slices[key]
            draw = rng.multinomial(block_sizes[key], probs[key]).reshape(ref[r, c].shape)
            est[r, c] = draw / block_sizes[key] / len(seen)
        out[t] = disturbance(est - ref)
    return out


def security_check(
    trials: TrialBatch,
    config: ProtocolConfig,
    check_fraction: float,
    seed: int = 0,
    null_runs: int = 1000,
    p0: Optional[JointProbabilityMatrix] = None,
) -> SecurityCheck:
    """Spend a random subset of trials on comparing the observed matrix with P0.

    The detection threshold is the mean plus three standard deviations of the
    disturbance of ``null_runs`` simulated η=0 checks with the same number of
    events per basis combination.
    """
    if not 0.0 < check_fraction < 1.0:
        raise DomainError(f"check fraction must lie in (0, 1), got {check_fraction}")
    rng = RngStream(seed, 1 << 20).generator()
    n = len(trials)
    k = int(round(check_fraction * n))
    checked = np.zeros(n, dtype=bool)
    checked[rng.permutation(n)[:k]] = True
    subset = trials.subset(checked)
    p0 = p0 or joint_prob_no_eve(config)
    sizes = {}
    counts = block_counts(subset) if k else np.zeros((config.dim, config.dim))
    for key, (r, c) in _block_slices(config.n).items():
        sizes[key] = int(counts[r, c].sum())
    if min(sizes.values()) < MIN_BLOCK_COUNT:
        return SecurityCheck("inconclusive", None, None, None, None, None, checked)
    observed = disturbance(empirical_matrix(subset, config).as_array() - p0.as_array())
    null = null_disturbances(p0, sizes, null_runs, rng)
    mu, sd = float(null.mean()), float(null.std(ddof=1))
    threshold = mu + 3.0 * sd
    return SecurityCheck("ok", observed, observed > threshold, threshold, mu, sd, checked)


def intercept_resend_branch(
    photon: OamKet,
    eve_basis: Basis,
    bob_basis: Basis,
    trials: int,
    rng: np.random.Generator,
    config: ProtocolConfig,
) -> Dict[Outcome, float]:
    """Outcome frequencies when Eve measures a given photon and Bob measures her copy.

    Raw (unaggregated) Bob outcomes are returned.
    """
    photon = photon.normalized()
    ebank = detector_bank(eve_basis, config)
    bbank = detector_bank(bob_basis, config)
    pe = np.array([float(d.weight) * abs(inner_product(d.ket, photon)) ** 2 for d in ebank])
    pb = np.array([[float(b.weight) * abs(inner_product(b.ket, e.ket)) ** 2 for b in bbank] for e in ebank])
    pe_cum = np.cumsum(pe / pe.sum())[None, :]
    pb_cum = np.cumsum(_rownorm(pb), axis=1)
    e = _categorical(pe_cum, np.zeros(trials, np.int64), rng.random(trials))
    b = _categorical(pb_cum, e, rng.random(trials))
    hist = np.bincount(b, minlength=len(bbank)) / trials
    return {bbank[k].outcome: float(f) for k, f in enumerate(hist) if f > 0}
