"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary section at the
end of the run repeats every criterion's line.
"""

from __future__ import annotations

import filecmp
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from fibqkd import montecarlo as mc
from fibqkd import reconcile as rc
from fibqkd.cli import main
from fibqkd.engine import _block_slices, joint_prob_no_eve, joint_prob_with_eve, mix
from fibqkd.hilbert import OamKet
from fibqkd.infometrics import eta_grid, sweep
from fibqkd.protocol import Basis, Kind, Outcome, ProtocolConfig
from fibqkd.verify import run_verify

from conftest import ACCEPTANCE_RESULTS

SEED = 2026
MILLION = 1_000_000


def record(key: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS[key] = (ok, detail)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")
    assert ok, detail


def test_criterion_1_matrix_reproduction():
    t0 = time.perf_counter()
    cfg = ProtocolConfig(n=8, m0=2)
    joint_prob_no_eve(cfg, exact=True)
    joint_prob_with_eve(cfg, exact=True)
    seconds = time.perf_counter() - t0
    report = run_verify(trials=10 * MILLION, seed=SEED, workers=4)
    c = report.comparisons
    unprimed = {k: c[k].max_rel_dev for k in ("L0", "C0", "D0")}
    unprimed_ok = all(v == 0 for v in unprimed.values())
    primed_ok = all(c[k].flagged and c[k].cross_checked for k in ("Lp", "Cp", "Dp", "Fp") if not c[k].matched)
    fp_flag = c["Fp"].dimension_flag
    verdicts = {k: c[k].verdict_counts() for k in ("Lp", "Cp", "Dp")}
    detail = (
        f"exact engine {seconds:.2f}s; max rel dev "
        + ", ".join(f"{k}={v:.3g}" for k, v in unprimed.items())
        + f"; primed flagged+cross-checked={primed_ok}, F' dimension flag={fp_flag}; MC verdicts {verdicts}"
    )
    record("1", unprimed_ok and primed_ok and fp_flag and seconds < 10, detail)


def test_criterion_2_disturbance_linearity(cfg):
    rows = sweep(cfg, eta_grid(101))
    d1 = rows[-1].disturbance
    err = max(abs(r.disturbance - r.eta * d1) for r in rows)
    record("2", err <= 1e-9 and d1 > 0, f"max |D(eta) - eta D(1)| = {err:.2e} over 101 points, D(1) = {d1:.6g}")


def test_criterion_3_case_i_branches(cfg):
    m = 5
    rng = mc.RngStream(SEED).generator()
    freq = mc.intercept_resend_branch(OamKet.basis(m), Basis.D, Basis.L, MILLION, rng, cfg)
    got = [freq.get(Outcome(Kind.EIGEN, k), 0.0) for k in (m, m - 2, m + 2)]
    err = max(abs(g - e) for g, e in zip(got, (0.5, 0.25, 0.25)))
    others = 1.0 - sum(got)
    record("3", err <= 0.005 and others == 0, f"F_m, F_m-2, F_m+2 = {got[0]:.4f}, {got[1]:.4f}, {got[2]:.4f} (max err {err:.4f})")


def test_criterion_4_security_dominance(cfg):
    rows = sweep(cfg, eta_grid(101))
    dom = all(r.iAE < r.iAB for r in rows)
    pos = all(r.keyRate > 0 for r in rows)
    kmin = min(r.keyRate for r in rows)
    record("4", dom and pos, f"I_AE < I_AB at all 101 points: {dom}; min K = {kmin:.4f} bits")


def test_criterion_5_eve_guess_rate():
    batch = mc.simulate(ProtocolConfig(eta=1.0), MILLION, seed=SEED, workers=4)
    acc = mc.eve_guess_accuracy(batch)
    n = int((batch.retained & batch.tapped).sum())
    record("5", abs(acc - 0.75) <= 0.01, f"Eve decoded-key accuracy {acc:.4f} over {n} intercepted retained trials (target 0.75 +- 0.01)")


def test_criterion_6_reconciliation(cfg):
    batch = mc.simulate(cfg, 2_400_000, seed=SEED, workers=4)
    kept = int(batch.retained.sum())
    rate = mc.key_agreement_rate(batch)
    m0, n = cfg.m0, cfg.n
    sites = range(m0 - 4, m0 + n + 4)
    ll = all(rc.ll_bit(m) != rc.ll_bit(m + 2) for m in sites)
    ld = all(len({rc.ld_code(m + d, m0) for d in (0, 2, 4)}) == 3 for m in sites)
    dd = all(len({rc.dd_code(m + d) for d in (0, 2, 4, 6)}) == 4 for m in sites)
    guess = rc.classical_guess_probability(cfg)
    ok = kept >= MILLION and rate == 1.0 and ll and ld and dd and guess == Fraction(2, n)
    record("6", ok, f"agreement {rate} over {kept} retained trials; code distances LL={ll} LD={ld} DD={dd}; classical guess {guess}")


@pytest.fixture(scope="module")
def analytic(cfg):
    return joint_prob_no_eve(cfg), joint_prob_with_eve(cfg)


def test_criterion_7_oracle_equivalence(cfg, analytic):
    p0, pe = analytic
    lines, ok = [], True
    for k, eta in enumerate((0.0, 0.25, 0.5, 1.0)):
        c = ProtocolConfig(eta=eta)
        batch = mc.simulate(c, MILLION, seed=SEED + k, workers=4)
        ref = mix(p0, pe, eta).as_array()
        tv = 0.5 * float(np.abs(mc.empirical_matrix(batch, c).as_array() - ref).sum())
        counts = mc.block_counts(batch)
        chi2, dof = 0.0, 0
        for rows, cols in _block_slices(c.n).values():
            obs = counts[rows, cols].ravel()
            exp = ref[rows, cols].ravel() / ref[rows, cols].sum() * obs.sum()
            keep = exp >= 5
            chi2 += float(((obs[keep] - exp[keep]) ** 2 / exp[keep]).sum())
            dof += int(keep.sum()) - 1
        p = float(stats.chi2.sf(chi2, dof))
        ok &= tv < 0.01 and p > 0.001
        lines.append(f"eta={eta}: TV {tv:.4f}, chi2 p {p:.3g}")
    record("7", ok, "; ".join(lines))


def test_criterion_8_determinism(tmp_path):
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        args = ["simulate", "--eta", "0.5", "--trials", "200000", "--seed", str(SEED), "--workers", "3",
                "--trial-log", "--out", str(out)]
        assert main(args) == 0
        assert main(["analytic", "--eta", "0.5", "--exact", "--format", "json", "--out", str(out / "an")]) == 0
        outs.append(out)
    cmp = filecmp.dircmp(outs[0], outs[1])
    files = sorted(p.name for p in outs[0].iterdir() if p.is_file())
    an = sorted(p.name for p in (outs[0] / "an").iterdir())
    same = all(filecmp.cmp(outs[0] / f, outs[1] / f, shallow=False) for f in files)
    same &= all(filecmp.cmp(outs[0] / "an" / f, outs[1] / "an" / f, shallow=False) for f in an)
    record("8", same and not cmp.left_only and not cmp.right_only, f"byte-identical reruns across {len(files) + len(an)} files")
