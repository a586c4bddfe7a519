"""Printed reference matrices for the default ``N=8, m0=2`` configuration.

The integer listings live in ``data/reference_matrices.json``; each printed block
is ``entries / denominator``.  The file is transcribed once and guarded by a
checksum so that an accidental edit is caught rather than silently compared.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Dict

import numpy as np

FIXTURE_NAMES = ("L0", "C0", "D0", "Lp", "Cp", "Dp", "Fp")
TRANSCRIPTION_SHA256 = "05966ed92fcfbb0666eaa68816faca9148a65fcb27cbf243fccccf20c10b8ab9"

# fixture -> (matrix, block); matrix "P0" is the no-Eve matrix, "PE" the full-Eve one
BLOCK_OF = {
    "L0": ("P0", "L"),
    "C0": ("P0", "C"),
    "D0": ("P0", "D"),
    "Lp": ("PE", "L"),
    "Cp": ("PE", "C"),
    "Dp": ("PE", "D"),
    "Fp": ("PE", "F"),
}


class ChecksumError(RuntimeError):
    pass


@dataclass(frozen=True)
class ReferenceFixture:
    name: str
    denominator: int
    entries: np.ndarray  # int64

    @property
    def primed(self) -> bool:
        return self.name.endswith("p")

    def as_fractions(self) -> np.ndarray:
        out = np.empty(self.entries.shape, dtype=object)
        for idx, v in np.ndenumerate(self.entries):
            out[idx] = Fraction(int(v), self.denominator)
        return out


def _canonical(raw: dict) -> str:
    return json.dumps({k: raw[k] for k in sorted(raw)}, sort_keys=True, separators=(",", ":"))


def checksum(raw: dict) -> str:
    return hashlib.sha256(_canonical(raw).encode()).hexdigest()


def load_raw() -> dict:
    text = resources.files("fibqkd").joinpath("data/reference_matrices.json").read_text()
    return json.loads(text)


def load_fixtures(verify_checksum: bool = True) -> Dict[str, ReferenceFixture]:
    raw = load_raw()
    if verify_checksum and checksum(raw) != TRANSCRIPTION_SHA256:
        raise ChecksumError("reference matrix file does not match its recorded checksum")
    return {
        name: ReferenceFixture(name, int(raw[name]["denominator"]), np.array(raw[name]["entries"], dtype=np.int64))
        for name in FIXTURE_NAMES
    }
