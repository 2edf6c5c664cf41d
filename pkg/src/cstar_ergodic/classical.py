"""Finite measure-theoretic dynamical systems and their commutative embedding.

Atoms are ``0..m-1``.  Weights given as :class:`fractions.Fraction` (or ints)
are kept exact, so the measure conditions are decided in rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .algebra import StarAlgebra, State, diagonal_algebra
from .dynamics import DynamicalMap, DynamicalSystem, classical_map, is_ergodic, make_system
from .errors import HypothesisError, StateError, ZeroProbabilityError

FLOAT_TOL = 1e-15


def _is_exact(w) -> bool:
    return isinstance(w, (Fraction, int)) and not isinstance(w, bool)


@dataclass(frozen=True)
class FiniteMeasureSystem:
    weights: tuple
    table: tuple[int, ...]

    def __post_init__(self):
        weights = tuple(Fraction(w) if _is_exact(w) else float(w) for w in self.weights)
        table = tuple(int(x) for x in self.table)
        if not weights:
            raise StateError("need at least one atom")
        if len(table) != len(weights):
            raise HypothesisError("ill-formed", "map table and weights must have equal length")
        if any(not 0 <= x < len(weights) for x in table):
            raise HypothesisError("ill-formed", "map table entries must be atom indices")
        if any(w < 0 for w in weights):
            raise StateError("state not positive: negative weight")
        total = sum(weights)
        if self.exact:
            if total != 1:
                raise StateError(f"weights sum to {total}, not 1")
        elif abs(float(total) - 1.0) > max(FLOAT_TOL * len(weights), FLOAT_TOL):
            raise StateError(f"weights sum to {float(total)!r}, not 1")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "table", table)

    @property
    def m(self) -> int:
        return len(self.weights)

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.weights)

    def measure(self, S: Iterable[int]):
        return sum((self.weights[a] for a in set(S)), Fraction(0) if self.exact else 0.0)

    def preimage(self, S: Iterable[int], k: int = 1) -> set[int]:
        out = set(S)
        for _ in range(k):
            out = {a for a in range(self.m) if self.table[a] in out}
        return out

    def apply(self, a: int, k: int = 1) -> int:
        for _ in range(k):
            a = self.table[a]
        return a

    def _le(self, x, y) -> bool:
        return x <= y if self.exact else x <= y + FLOAT_TOL

    def is_non_increasing(self) -> bool:
        """``mu(T^{-1}(S)) <= mu(S)`` for every set; atoms suffice since both sides are additive."""
        return all(self._le(self.measure(self.preimage({a})), self.weights[a]) for a in range(self.m))

    def is_measure_preserving(self) -> bool:
        if self.exact:
            return all(self.measure(self.preimage({a})) == self.weights[a] for a in range(self.m))
        return all(abs(self.measure(self.preimage({a})) - self.weights[a]) <= FLOAT_TOL * self.m
                   for a in range(self.m))

    def is_permutation(self) -> bool:
        return sorted(self.table) == list(range(self.m))

    def cycles(self) -> list[tuple[int, ...]]:
        """Cycles of the map (the periodic orbits); transient atoms are omitted."""
        seen, out = set(), []
        for start in range(self.m):
            path, a = [], start
            pos = {}
            while a not in pos and a not in seen:
                pos[a] = len(path)
                path.append(a)
                a = self.table[a]
            if a in pos:
                out.append(tuple(path[pos[a]:]))
            seen.update(path)
        return out


def uniform_system(table: Sequence[int]) -> FiniteMeasureSystem:
    m = len(table)
    return FiniteMeasureSystem(tuple(Fraction(1, m) for _ in range(m)), tuple(table))


def cyclic_system(m: int) -> FiniteMeasureSystem:
    """Uniform measure on ``m`` atoms with ``T(a) = a + 1 mod m``."""
    return uniform_system([(a + 1) % m for a in range(m)])


def embedding_data(sys: FiniteMeasureSystem) -> tuple[StarAlgebra, State, DynamicalMap]:
    """``(B(atoms), integral against mu, f -> f o T)`` without any checks."""
    alg = diagonal_algebra(sys.m)
    state = State(alg, np.diag([float(w) for w in sys.weights]).astype(complex))
    return alg, state, classical_map(sys.table)


def embed(sys: FiniteMeasureSystem) -> DynamicalSystem:
    if not sys.is_non_increasing():
        raise HypothesisError("not-contractive", "measure-increasing map: mu(T^-1(S)) > mu(S) for some S")
    alg, state, tau = embedding_data(sys)
    return make_system(alg, state, tau, label="classical")


def is_ergodic_classical(sys: FiniteMeasureSystem) -> bool:
    return is_ergodic(embed(sys)).is_ergodic


def indicator(m: int, S: Iterable[int]) -> np.ndarray:
    d = np.zeros(m, dtype=complex)
    for a in S:
        d[a] = 1.0
    return np.diag(d)


def conditional_probability(weights, A_set: Iterable[int], B_set: Iterable[int]):
    """``mu(A ∩ B) / mu(B)``; exact when the weights are rational."""
    exact = all(_is_exact(w) for w in weights)
    w = [Fraction(x) for x in weights] if exact else [float(x) for x in weights]
    A, B = set(A_set), set(B_set)
    zero = Fraction(0) if exact else 0.0
    pB = sum((w[a] for a in B), zero)
    if pB == 0:
        raise ZeroProbabilityError("p(B) = 0")
    return sum((w[a] for a in A & B), zero) / pB
