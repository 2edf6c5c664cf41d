"""Bounded mechanical systems, energy levels and the named example systems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import (
    TOL_PROB,
    Interval,
    StarAlgebra,
    State,
    diagonal_algebra,
    full_matrix_algebra,
    is_hermitian,
    spectral_levels,
    spectral_projection,
    trace_state,
    vector_state,
)
from .classical import FiniteMeasureSystem, embed
from .dynamics import (
    DynamicalMap,
    DynamicalSystem,
    cesaro_mean,
    hamiltonian_step_map,
    is_ergodic,
    make_system,
)
from .errors import CertificateError, HypothesisError, NotHermitianError

MAX_HALVINGS = 200
CERT_TOL = 1e-9


@dataclass(frozen=True)
class BoundedQuantumSystem:
    """Finite factor ``M_N`` with Hamiltonian ``H`` observed at a fixed step ``t_step``."""

    alg: StarAlgebra
    H: np.ndarray = field(repr=False)
    t_step: float = 1.0

    def __post_init__(self):
        H = self.alg.check(self.H, "Hamiltonian")
        if not is_hermitian(H):
            raise NotHermitianError("Hamiltonian must be Hermitian")
        object.__setattr__(self, "H", (H + H.conj().T) / 2)

    @property
    def tau(self) -> DynamicalMap:
        return hamiltonian_step_map(self.alg, self.H, self.t_step)

    def system(self, state: State | None = None) -> DynamicalSystem:
        """The *-dynamical system for ``state`` (default: the trace)."""
        state = trace_state(self.alg) if state is None else state
        return make_system(self.alg, state, self.tau, label="quantum")


@dataclass(frozen=True)
class ClassicalMechanicalSystem:
    """Finite measure system with an energy function conserved by the map."""

    measure_system: FiniteMeasureSystem
    energy: tuple[float, ...]

    def __post_init__(self):
        energy = tuple(float(e) for e in self.energy)
        if len(energy) != self.measure_system.m:
            raise HypothesisError("ill-formed", "one energy value per atom required")
        object.__setattr__(self, "energy", energy)

    def conserves_energy(self) -> bool:
        T = self.measure_system.table
        return all(self.energy[T[a]] == self.energy[a] for a in range(len(T)))

    @property
    def H(self) -> np.ndarray:
        return np.diag(self.energy).astype(complex)

    @property
    def alg(self) -> StarAlgebra:
        return diagonal_algebra(self.measure_system.m)

    def system(self, state: State | None = None) -> DynamicalSystem:
        sys = embed(self.measure_system)
        if state is None:
            return sys
        return make_system(sys.alg, state, sys.tau, label="classical")


@dataclass(frozen=True)
class EnergyProfile:
    levels: tuple[float, ...]
    multiplicities: tuple[int, ...]
    probs: tuple[float, ...]
    multi_level: bool
    witness_interval: Interval | None
    witness_prob: float | None
    min_level_gap: float | None

    def to_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "multiplicities": list(self.multiplicities),
            "probs": list(self.probs),
            "multi_level": self.multi_level,
            "witness_interval": self.witness_interval.to_dict() if self.witness_interval else None,
            "witness_prob": self.witness_prob,
            "min_level_gap": self.min_level_gap,
        }


def _halving_witness(H, omega: State, alg: StarAlgebra, levels) -> tuple[Interval, float]:
    """Bisect a bounded interval of full probability until one half has probability in ``(0, 1)``."""
    lo, hi = levels[0].value, levels[-1].value
    pad = max(1.0, hi - lo)
    current = Interval(lo - pad, hi + pad)

    def prob(iv: Interval) -> float:
        return omega(spectral_projection(H, iv, alg)).real

    p = prob(current)
    if TOL_PROB < p < 1 - TOL_PROB:
        return current, p
    for _ in range(MAX_HALVINGS):
        left, right = current.halves()
        pl = prob(left)
        if TOL_PROB < pl < 1 - TOL_PROB:
            return left, pl
        pr = prob(right)
        if TOL_PROB < pr < 1 - TOL_PROB:
            return right, pr
        current = left if pl >= pr else right
    raise CertificateError("halving did not separate the energy levels")


def energy_profile(H, omega: State, alg: StarAlgebra | None = None) -> EnergyProfile:
    """Level probabilities ``omega(chi_level(H))`` and, if several levels occur, a witness interval."""
    alg = omega.alg if alg is None else alg
    H = alg.check(H, "Hamiltonian")
    levels = spectral_levels(H, alg)
    probs = tuple(float(omega(l.projection).real) for l in levels)
    occupied = [p > TOL_PROB for p in probs]
    multi = sum(occupied) >= 2
    gaps = [b.value - a.value for a, b in zip(levels, levels[1:])]
    witness, wp = (None, None)
    if multi:
        witness, wp = _halving_witness(H, omega, alg, levels)
    return EnergyProfile(
        levels=tuple(l.value for l in levels),
        multiplicities=tuple(l.multiplicity for l in levels),
        probs=probs,
        multi_level=multi,
        witness_interval=witness,
        witness_prob=wp,
        min_level_gap=min(gaps) if gaps else None,
    )


@dataclass(frozen=True)
class NonErgodicityCertificate:
    projection: np.ndarray = field(repr=False)
    interval: Interval
    a1: complex
    a2: complex
    p: float
    residual_formula_value: float
    residuals: dict
    is_ergodic: bool

    def to_dict(self) -> dict:
        return {
            "interval": self.interval.to_dict(),
            "a1": [self.a1.real, self.a1.imag],
            "a2": [self.a2.real, self.a2.imag],
            "p": self.p,
            "residual_formula_value": self.residual_formula_value,
            "residuals": {str(k): v for k, v in self.residuals.items()},
            "is_ergodic": self.is_ergodic,
        }


def non_ergodicity_certificate(system, omega: State | None = None, ns: Sequence[int] = (10, 100, 1000, 10_000),
                               a1: complex = 1.0, a2: complex = 0.0) -> NonErgodicityCertificate | None:
    """Certificate that an energy-conserving evolution is not ergodic for ``omega``.

    Returns ``None`` ("not applicable") when ``omega`` sees only one energy
    level.  Otherwise ``P = chi_I(H)`` is taken from the witness interval,
    ``tau(P) = P`` is verified, and the Cesàro residual of
    ``A = a1 P + a2 (1 - P)`` is checked to stay at ``|a1 - a2| sqrt(p (1 - p))``.
    """
    if isinstance(system, ClassicalMechanicalSystem) and not system.conserves_energy():
        raise HypothesisError("not-conserving", "H o T != H")
    dyn = system.system(omega)
    omega = dyn.state
    alg = dyn.alg
    profile = energy_profile(system.H, omega, alg)
    if not profile.multi_level:
        return None
    P = spectral_projection(system.H, profile.witness_interval, alg)
    if np.linalg.norm(dyn.tau(P) - P) > CERT_TOL:
        raise CertificateError("energy projection is not invariant under the evolution")
    one = alg.identity()
    A = a1 * P + a2 * (one - P)
    p = float(omega(P).real)
    formula = abs(a1 - a2) * math.sqrt(p * (1 - p))
    traj = cesaro_mean(dyn, A, max(ns))
    residuals = {int(n): float(traj.residuals[n - 1]) for n in ns}
    if any(abs(r - formula) > CERT_TOL for r in residuals.values()):
        raise CertificateError(f"residuals {residuals} differ from {formula}")
    report = is_ergodic(dyn)
    if report.is_ergodic:
        raise CertificateError("certificate issued but the fixed-point test reports ergodic")
    return NonErgodicityCertificate(P, profile.witness_interval, complex(a1), complex(a2), p,
                                    formula, residuals, report.is_ergodic)


def damped_swap_map(c1: complex, c2: complex) -> DynamicalMap:
    """``[[a11, a12], [a21, a22]] -> [[a22, c1 a12], [c2 a21, a11]]`` on ``M_2``."""
    alg = full_matrix_algebra(2)
    c1, c2 = complex(c1), complex(c2)

    def f(A):
        return np.array([[A[1, 1], c1 * A[0, 1]], [c2 * A[1, 0], A[0, 0]]], dtype=complex)

    m = DynamicalMap.from_function(alg, f)
    return DynamicalMap(alg, m.superop, "damped-swap", {"c1": c1, "c2": c2})


def damped_swap_system(c1: complex, c2: complex) -> DynamicalSystem:
    """The swap-and-damp map on ``M_2`` with the normalized trace.

    Contractive iff ``|c1|, |c2| <= 1``; ergodic iff additionally
    ``c1 != 1`` and ``c2 != 1``.
    """
    alg = full_matrix_algebra(2)
    return make_system(alg, trace_state(alg), damped_swap_map(c1, c2), label="damped-swap")


def spin_half_hamiltonian(E: float) -> np.ndarray:
    return np.diag([E, -E]).astype(complex)


def spin_half_system(E: float, state: str | State = "vector", t: float = 1.0) -> DynamicalSystem:
    """Spin-1/2 in a field: ``H = diag(E, -E)``, one step ``A -> e^{iH} A e^{-iH}``.

    ``state="vector"`` uses the ground vector ``e_1`` (``omega(A) = a_11``),
    ``state="trace"`` the normalized trace.
    """
    alg = full_matrix_algebra(2)
    if isinstance(state, State):
        omega = state
    elif state == "vector":
        omega = vector_state(alg, [1.0, 0.0])
    elif state == "trace":
        omega = trace_state(alg)
    else:
        raise ValueError(f"unknown spin-1/2 state {state!r}")
    return make_system(alg, omega, hamiltonian_step_map(alg, spin_half_hamiltonian(E), t), label="spin-half")


def spin_half_bounded(E: float, t: float = 1.0) -> BoundedQuantumSystem:
    return BoundedQuantumSystem(full_matrix_algebra(2), spin_half_hamiltonian(E), t)


def classical_two_cycle() -> ClassicalMechanicalSystem:
    """Eight uniform atoms, two invariant 4-cycles at energies 0 and 1."""
    from .classical import uniform_system

    table = [1, 2, 3, 0, 5, 6, 7, 4]
    return ClassicalMechanicalSystem(uniform_system(table), (0, 0, 0, 0, 1, 1, 1, 1))
