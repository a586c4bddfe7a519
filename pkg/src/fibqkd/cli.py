"""Command-line front end.

Subcommands::

    fibqkd analytic  [--n N --m0 M --eta E --exact --format csv|json --out DIR]
    fibqkd simulate  [... --trials T --seed S --workers W --check-fraction F --trial-log]
    fibqkd sweep     [... --eta-grid COUNT]
    fibqkd verify    [--trials T --seed S --workers W --out DIR]

A ``--config`` JSON file may supply any of the long options (underscored
names, e.g. ``check_fraction``); flags given on the command line win.

The simulate trial log (``trials.jsonl``) holds one JSON object per trial with
keys ``aliceBasis``, ``bobBasis``, ``eveAction`` (``null`` or
``{"basis", "outcome"}``), ``aliceOutcome`` and ``bobOutcome`` (1-based matrix
indices), ``classicalBits``, ``aliceKey``, ``bobKey``, ``eveKey`` and
``retained``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from . import io
from . import montecarlo as mc
from .engine import delta, joint_prob_no_eve, joint_prob_with_eve, mix
from .hilbert import DomainError
from .infometrics import disturbance, eta_grid, security_metrics, sweep
from .protocol import ProtocolConfig
from .verify import run_verify

DEFAULTS = {
    "n": 8,
    "m0": 2,
    "pump_lo": None,
    "pump_hi": None,
    "eta": 0.0,
    "trials": 1_000_000,
    "seed": 0,
    "workers": 1,
    "check_fraction": 0.1,
    "out": "out",
    "format": "csv",
    "exact": False,
    "eta_grid": 101,
    "trial_log": False,
}


@dataclass(frozen=True)
class RunConfig:
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    trials: int = 1_000_000
    seed: int = 0
    workers: int = 1
    check_fraction: float = 0.1
    output_dir: Path = Path("out")
    format: str = "csv"
    exact: bool = False
    eta_grid: int = 101
    trial_log: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")
        if not 0.0 < self.check_fraction < 1.0:
            raise DomainError("check fraction must lie in (0, 1)")
        if self.format not in ("csv", "json"):
            raise DomainError(f"unknown format {self.format!r}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_options(cls, opts: dict) -> "RunConfig":
        proto = ProtocolConfig(
            n=opts["n"], m0=opts["m0"], pump_lo=opts["pump_lo"], pump_hi=opts["pump_hi"], eta=opts["eta"]
        )
        return cls(
            protocol=proto,
            trials=opts["trials"],
            seed=opts["seed"],
            workers=opts["workers"],
            check_fraction=opts["check_fraction"],
            output_dir=Path(opts["out"]),
            format=opts["format"],
            exact=opts["exact"],
            eta_grid=opts["eta_grid"],
            trial_log=opts["trial_log"],
        )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with option values")
    common.add_argument("--n", type=int, help="alphabet size N")
    common.add_argument("--m0", type=int, help="lowest alphabet index")
    common.add_argument("--pump-lo", type=int, dest="pump_lo")
    common.add_argument("--pump-hi", type=int, dest="pump_hi")
    common.add_argument("--eta", type=float, help="fraction of trials Eve intercepts")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--check-fraction", type=float, dest="check_fraction")
    common.add_argument("--out", type=str, help="output directory")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--exact", action="store_true", default=None, help="rational arithmetic")
    common.add_argument("--eta-grid", type=int, dest="eta_grid", help="number of sweep points")
    common.add_argument("--trial-log", action="store_true", default=None, dest="trial_log")

    p = argparse.ArgumentParser(prog="fibqkd", description="Fibonacci OAM key distribution simulator")
    sub = p.add_subparsers(dest="cmd", required=True)
    sub.add_parser("analytic", parents=[common], help="write P0, P_E, P(eta), dP and metrics")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo run with reconciliation and security check")
    sub.add_parser("sweep", parents=[common], help="security metrics over an eta grid")
    sub.add_parser("verify", parents=[common], help="compare against the printed reference matrices")
    return p


def resolve_options(ns: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if ns.config is not None:
        data = json.loads(Path(ns.config).read_text())
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        opts.update(data)
    for key in DEFAULTS:
        val = getattr(ns, key, None)
        if val is not None:
            opts[key] = val
    return opts


def _out_dir(run: RunConfig) -> Path:
    out = run.output_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    return out


def cmd_analytic(run: RunConfig) -> List[Path]:
    cfg, out = run.protocol, _out_dir(run)
    p0 = joint_prob_no_eve(cfg, exact=run.exact)
    pe = joint_prob_with_eve(cfg, exact=run.exact)
    p = mix(p0, pe, cfg.eta)
    dp = delta(p, p0)
    written = [
        io.write_matrix(out / "p0", p0, cfg, run.format),
        io.write_matrix(out / "pe", pe, cfg, run.format),
        io.write_matrix(out / "p", p, cfg, run.format),
        io.write_matrix(out / "dp", dp, cfg, run.format),
        io.write_metrics(out / "metrics", [security_metrics(p, p0, cfg.eta)], run.format),
    ]
    return written


def cmd_sweep(run: RunConfig) -> List[Path]:
    cfg, out = run.protocol, _out_dir(run)
    rows = sweep(cfg, eta_grid(run.eta_grid), exact=run.exact)
    return [io.write_metrics(out / "sweep", rows, run.format)]


def cmd_simulate(run: RunConfig) -> List[Path]:
    cfg, out = run.protocol, _out_dir(run)
    batch = mc.simulate(cfg, run.trials, run.seed, run.workers)
    check = mc.security_check(batch, cfg, run.check_fraction, seed=run.seed)
    key_trials = batch.subset(check.key_mask)
    p0 = joint_prob_no_eve(cfg)
    emp = mc.empirical_matrix(batch, cfg)
    d1 = disturbance(delta(joint_prob_with_eve(cfg), p0))
    report = {
        "trials": run.trials,
        "seed": run.seed,
        "workers": run.workers,
        "eta": cfg.eta,
        "retained_trials": int(key_trials.retained.sum()),
        "key_agreement_rate": _maybe(mc.key_agreement_rate, key_trials),
        "eve_guess_accuracy": _maybe(mc.eve_guess_accuracy, key_trials),
        "empirical_disturbance": disturbance(emp.as_array() - p0.as_array()),
        "analytic_disturbance": cfg.eta * d1,
        "security_check": {
            "status": check.status,
            "checked_trials": int(check.checked.sum()),
            "disturbance": check.disturbance,
            "threshold": check.threshold,
            "eve_detected": check.eve_detected,
        },
    }
    written = [
        io.write_matrix(out / "empirical", emp, cfg, run.format),
        io.write_metrics(out / "metrics", [security_metrics(emp, p0, cfg.eta)], run.format),
        io.write_json(out / "report.json", report),
    ]
    if run.trial_log:
        written.append(io.write_trial_log(out / "trials.jsonl", batch.records(), cfg))
    return written


def _maybe(fn, batch):
    try:
        return fn(batch)
    except DomainError:
        return None


def cmd_verify(run: RunConfig) -> int:
    out = _out_dir(run)
    report = run_verify(trials=run.trials, seed=run.seed, workers=run.workers)
    (out / "verify.txt").write_text(report.to_text())
    io.write_json(out / "verify.json", report.to_dict())
    sys.stdout.write(report.to_text())
    return 0 if report.passed else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        opts = resolve_options(ns)
        if ns.cmd == "verify" and ns.trials is None and "trials" not in _config_keys(ns):
            opts["trials"] = 10_000_000
        if ns.cmd == "verify" and ns.workers is None and "workers" not in _config_keys(ns):
            opts["workers"] = 4
        run = RunConfig.from_options(opts)
    except (DomainError, ValueError, OSError) as exc:
        parser.error(str(exc))
    if ns.cmd == "verify":
        return cmd_verify(run)
    handler = {"analytic": cmd_analytic, "simulate": cmd_simulate, "sweep": cmd_sweep}[ns.cmd]
    for path in handler(run):
        print(path)
    return 0


def _config_keys(ns) -> set:
    if ns.config is None:
        return set()
    return set(json.loads(Path(ns.config).read_text()))


if __name__ == "__main__":
    raise SystemExit(main())
