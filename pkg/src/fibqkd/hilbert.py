"""Sparse state algebra over the Fibonacci-indexed OAM ladder.

Basis states are labelled by their position ``m`` on the Fibonacci ladder,
not by the OAM value ``F_m`` itself; ``fib`` recovers the physical value.
Positions below 1 are allowed as formal ladder sites so that a source
spectrum can extend symmetrically below the alphabet.

Amplitudes are either Python ``complex`` numbers (floating mode) or
:class:`~fibqkd.surd.Surd` values (exact mode).  The two never mix inside one
ket.
"""

from __future__ import annotations

import math
from functools import lru_cache
from types import MappingProxyType
from typing import Hashable, Iterable, Iterator, Mapping, Tuple

from .surd import Surd

NORM_TOL = 1e-12


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ContractError(ValueError):
    """A documented precondition of an operation was violated."""


@lru_cache(maxsize=None)
def fib(m: int) -> int:
    """Return ``F_m`` with ``F_1 = 1``, ``F_2 = 2``.

    >>> [fib(m) for m in range(1, 10)]
    [1, 2, 3, 5, 8, 13, 21, 34, 55]
    """
    if not isinstance(m, int) or m < 1:
        raise DomainError(f"Fibonacci index must be an integer >= 1, got {m!r}")
    a, b = 1, 2
    for _ in range(m - 1):
        a, b = b, a + b
    return a


def _is_zero(x) -> bool:
    if isinstance(x, Surd):
        return x.is_zero()
    return x == 0


def _abs2(x):
    if isinstance(x, Surd):
        return x.abs2()
    return x.real * x.real + x.imag * x.imag


class _SparseVector:
    """Immutable finite map from basis labels to nonzero amplitudes."""

    __slots__ = ("_amps",)

    def __init__(self, amplitudes: Mapping[Hashable, object] | Iterable = ()):
        items = amplitudes.items() if isinstance(amplitudes, Mapping) else amplitudes
        acc: dict = {}
        for key, amp in items:
            acc[key] = acc[key] + amp if key in acc else amp
        self._amps = MappingProxyType({k: v for k, v in sorted(acc.items()) if not _is_zero(v)})

    @property
    def amplitudes(self) -> Mapping:
        return self._amps

    def __getitem__(self, key):
        return self._amps.get(key, 0)

    def __iter__(self) -> Iterator:
        return iter(self._amps)

    def __len__(self) -> int:
        return len(self._amps)

    def items(self):
        return self._amps.items()

    @property
    def exact(self) -> bool:
        return any(isinstance(v, Surd) for v in self._amps.values())

    def norm2(self):
        """Squared norm; a float in floating mode, a ``Surd`` in exact mode."""
        total = Surd() if self.exact else 0.0
        for v in self._amps.values():
            total = total + _abs2(v)
        return total

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        n2 = self.norm2()
        if isinstance(n2, Surd):
            return n2 == 1
        return abs(n2 - 1.0) <= tol

    def scaled(self, c):
        return type(self)((k, c * v) for k, v in self._amps.items())

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(list(self._amps.items()) + list(other._amps.items()))

    def __sub__(self, other):
        return self + other.scaled(-1)

    def __mul__(self, c):
        return self.scaled(c)

    __rmul__ = __mul__

    def to_float(self):
        return type(self)((k, complex(v)) for k, v in self._amps.items())

    def normalized(self):
        n2 = self.norm2()
        if isinstance(n2, Surd):
            n2 = float(n2)
            return self.to_float().scaled(1.0 / math.sqrt(n2))
        if n2 == 0:
            raise DomainError("cannot normalize the zero vector")
        return self.scaled(1.0 / math.sqrt(n2))

    def approx_equal(self, other, tol: float = 1e-12) -> bool:
        keys = set(self._amps) | set(other._amps)
        return all(abs(complex(self[k]) - complex(other[k])) <= tol for k in keys)

    def __eq__(self, other) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return dict(self._amps) == dict(other._amps)

    def __hash__(self) -> int:
        return hash(tuple(self._amps.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v}" for k, v in self._amps.items())
        return f"{type(self).__name__}({{{body}}})"


class OamKet(_SparseVector):
    """Single-photon ket over ladder positions."""

    @classmethod
    def basis(cls, m: int, exact: bool = False) -> "OamKet":
        return cls({m: Surd(1) if exact else 1 + 0j})

    def support(self) -> Tuple[int, ...]:
        return tuple(self._amps)


class BipartiteKet(_SparseVector):
    """Two-photon ket keyed by ``(alice_position, bob_position)``."""

    @classmethod
    def product(cls, alice: OamKet, bob: OamKet) -> "BipartiteKet":
        return cls(((a, b), va * vb) for a, va in alice.items() for b, vb in bob.items())


def inner_product(a: OamKet, b: OamKet):
    """Return ``<a|b>``, conjugate-linear in the first argument."""
    if len(a) > len(b):
        return _conj(inner_product(b, a))
    total = Surd() if (a.exact or b.exact) else 0j
    for k, va in a.items():
        vb = b[k]
        if not _is_zero(vb):
            total = total + _conj(va) * vb
    return total


def _conj(x):
    return x.conjugate()


def root_half(exact: bool):
    """The scalar 1/sqrt(2) in the requested arithmetic."""
    return Surd.inv_sqrt2() if exact else 1.0 / math.sqrt(2.0)


def imag_unit(exact: bool):
    return Surd.i() if exact else 1j


def one(exact: bool):
    return Surd(1) if exact else 1 + 0j


def bob_conditional(state: BipartiteKet, alice_ket: OamKet) -> OamKet:
    """Bob-side vector ``(<alice_ket| (x) 1) |state>``, not renormalized."""
    return OamKet(
        (b, _conj(alice_ket[a]) * amp)
        for (a, b), amp in state.items()
        if not _is_zero(alice_ket[a])
    )


def alice_conditional(state: BipartiteKet, bob_ket: OamKet) -> OamKet:
    """Alice-side vector ``(1 (x) <bob_ket|) |state>``, not renormalized."""
    return OamKet(
        (a, _conj(bob_ket[b]) * amp)
        for (a, b), amp in state.items()
        if not _is_zero(bob_ket[b])
    )


def _check_normalized(ket: OamKet, who: str) -> None:
    if not ket.is_normalized():
        raise ContractError(f"{who} projector ket must be normalized (norm^2 = {ket.norm2()})")


def project_bob(state: BipartiteKet, bob_ket: OamKet):
    """Project Bob's photon onto ``bob_ket``.

    Returns:
        ``(weight, collapsed)`` where ``weight`` is the squared norm of the
        projected state and ``collapsed`` is the renormalized product state
        ``(sum_a c_a |a>) (x) |bob_ket>``.  A zero weight gives an empty ket.
    """
    _check_normalized(bob_ket, "Bob")
    alice_part = alice_conditional(state, bob_ket)
    weight = alice_part.norm2()
    if len(alice_part) == 0:
        return weight, BipartiteKet()
    return weight, BipartiteKet.product(alice_part.normalized(), bob_ket.to_float())


def project_alice(state: BipartiteKet, alice_ket: OamKet):
    """Mirror of :func:`project_bob` acting on Alice's photon."""
    _check_normalized(alice_ket, "Alice")
    bob_part = bob_conditional(state, alice_ket)
    weight = bob_part.norm2()
    if len(bob_part) == 0:
        return weight, BipartiteKet()
    return weight, BipartiteKet.product(alice_ket.to_float(), bob_part.normalized())


def superposition_ket(n: int, exact: bool = False) -> OamKet:
    """``|S_n> = (|F_{n-1}> + |F_{n+1}>)/sqrt(2)``."""
    h = root_half(exact)
    return OamKet({n - 1: h, n + 1: h})


def c_ket(n: int, exact: bool = False) -> OamKet:
    """Ket registered by detector ``C_n``: ``(i/sqrt 2)(|F_n> + |F_{n-2}>)``."""
    h = imag_unit(exact) * root_half(exact)
    return OamKet({n: h, n - 2: h})


def d_ket(n: int, exact: bool = False) -> OamKet:
    """Ket registered by detector ``D_n``: ``(|F_n> - |F_{n-2}>)/sqrt(2)``."""
    h = root_half(exact)
    return OamKet({n: h, n - 2: -h})
