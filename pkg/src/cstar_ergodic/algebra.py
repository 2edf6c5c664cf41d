"""Finite-dimensional *-algebras realized as block-diagonal matrix algebras.

An algebra with blocks ``(d_1, ..., d_m)`` is the direct sum of the full
matrix algebras ``M_{d_i}(C)``, embedded block-diagonally in ``M_N(C)`` with
``N = sum(d_i)``.  A single block of size ``N`` is all of ``L(C^N)``; ``m``
blocks of size one give the commutative algebra of functions on ``m`` atoms.

Elements are plain complex numpy arrays.  States are stored through a weight
matrix ``rho`` so that ``phi(A) = tr(rho @ A)`` in every case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AlgebraError,
    NotHermitianError,
    NotProjectionError,
    StateError,
    ZeroProbabilityError,
)

TOL_HERM = 1e-9
TOL_PROJ = 1e-9
TOL_PSD = 1e-10
TOL_NORM = 1e-9
TOL_PROB = 1e-12
CLUSTER_RTOL = 1e-9


def _scale(A: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(A, 2))) if A.size else 1.0


@dataclass(frozen=True)
class StarAlgebra:
    """Block-diagonal matrix algebra ``M_{d_1} + ... + M_{d_m}``."""

    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        if not blocks:
            raise AlgebraError("block list must be non-empty")
        if any(b < 1 for b in blocks):
            raise AlgebraError(f"block dimensions must be >= 1, got {blocks}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def total_dim(self) -> int:
        """Linear dimension ``D = sum(d_i**2)``."""
        return sum(b * b for b in self.blocks)

    @property
    def ambient(self) -> int:
        """Matrix side length ``N = sum(d_i)``."""
        return sum(self.blocks)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for b in self.blocks:
            out.append(acc)
            acc += b
        return tuple(out)

    @property
    def is_commutative(self) -> bool:
        return all(b == 1 for b in self.blocks)

    @cached_property
    def mask(self) -> np.ndarray:
        """Boolean ``N x N`` array, true on the allowed (in-block) entries."""
        m = np.zeros((self.ambient, self.ambient), dtype=bool)
        for off, b in zip(self.offsets, self.blocks):
            m[off:off + b, off:off + b] = True
        return m

    @cached_property
    def basis_index(self) -> tuple[tuple[int, int], ...]:
        """Matrix-unit positions ``(row, col)`` in block order, row-major."""
        idx = []
        for off, b in zip(self.offsets, self.blocks):
            for r in range(b):
                for c in range(b):
                    idx.append((off + r, off + c))
        return tuple(idx)

    def identity(self) -> np.ndarray:
        return np.eye(self.ambient, dtype=complex)

    def zero(self) -> np.ndarray:
        return np.zeros((self.ambient, self.ambient), dtype=complex)

    def unit(self, i: int) -> np.ndarray:
        """The ``i``-th matrix unit of the canonical basis."""
        E = self.zero()
        E[self.basis_index[i]] = 1.0
        return E

    def basis(self) -> list[np.ndarray]:
        return [self.unit(i) for i in range(self.total_dim)]

    def check(self, A, name: str = "element") -> np.ndarray:
        """Return ``A`` as a complex array after validating block conformity."""
        A = np.asarray(A, dtype=complex)
        N = self.ambient
        if A.shape != (N, N):
            raise AlgebraError(f"{name} has shape {A.shape}, expected {(N, N)}")
        if np.any(A[~self.mask] != 0):
            raise AlgebraError(f"{name} has non-zero entries outside the blocks {self.blocks}")
        return A

    def contains(self, A) -> bool:
        try:
            self.check(A)
        except AlgebraError:
            return False
        return True

    def coords(self, A) -> np.ndarray:
        """Coordinates of ``A`` in the matrix-unit basis (length ``D``)."""
        A = np.asarray(A, dtype=complex)
        rows, cols = zip(*self.basis_index)
        return A[list(rows), list(cols)]

    def element(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=complex)
        if coords.shape != (self.total_dim,):
            raise AlgebraError(f"coordinate vector must have length {self.total_dim}")
        A = self.zero()
        rows, cols = zip(*self.basis_index)
        A[list(rows), list(cols)] = coords
        return A

    def project(self, X) -> np.ndarray:
        """Zero the off-block entries of an arbitrary ``N x N`` matrix."""
        X = np.array(X, dtype=complex)
        X[~self.mask] = 0
        return X

    def left_multiplication(self, A) -> np.ndarray:
        """``D x D`` matrix of ``B -> A @ B`` in coordinates."""
        A = self.check(A)
        cols = [self.coords(A @ B) for B in self.basis()]
        return np.column_stack(cols)

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        z = rng.normal(size=self.total_dim) + 1j * rng.normal(size=self.total_dim)
        return self.element(scale * z)

    def random_hermitian(self, rng: np.random.Generator) -> np.ndarray:
        A = self.random_element(rng)
        return (A + A.conj().T) / 2

    def random_unit_vector(self, rng: np.random.Generator) -> np.ndarray:
        x = rng.normal(size=self.ambient) + 1j * rng.normal(size=self.ambient)
        return x / np.linalg.norm(x)

    def block_slices(self) -> list[slice]:
        return [slice(o, o + b) for o, b in zip(self.offsets, self.blocks)]


def make_algebra(blocks: Iterable[int]) -> StarAlgebra:
    return StarAlgebra(tuple(blocks))


def full_matrix_algebra(n: int) -> StarAlgebra:
    return StarAlgebra((n,))


def diagonal_algebra(m: int) -> StarAlgebra:
    return StarAlgebra((1,) * m)


def mul(A, B) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape or A.ndim != 2:
        raise AlgebraError(f"shape mismatch: {A.shape} vs {B.shape}")
    return A @ B


def adjoint(A) -> np.ndarray:
    return np.asarray(A, dtype=complex).conj().T


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    """``E_ij`` in ``M_n`` with one-based indices."""
    E = np.zeros((n, n), dtype=complex)
    E[i - 1, j - 1] = 1.0
    return E


def is_hermitian(A, tol: float = TOL_HERM) -> bool:
    A = np.asarray(A, dtype=complex)
    return bool(np.linalg.norm(A - A.conj().T, 2) <= tol * _scale(A))


def is_projection(P, tol: float = TOL_PROJ) -> bool:
    P = np.asarray(P, dtype=complex)
    if not is_hermitian(P, tol):
        return False
    return bool(np.linalg.norm(P @ P - P, 2) <= tol * _scale(P))


def check_projection(P, alg: StarAlgebra | None = None) -> np.ndarray:
    P = alg.check(P, "projection") if alg is not None else np.asarray(P, dtype=complex)
    if not is_projection(P):
        raise NotProjectionError("matrix is not an orthogonal projection (P^2 = P = P*)")
    return P


@dataclass(frozen=True)
class State:
    """Positive normalized functional ``phi(A) = tr(rho @ A)`` on ``alg``."""

    alg: StarAlgebra
    weight: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.alg.check(self.weight, "state weight"), dtype=complex)
        if not is_hermitian(rho):
            raise StateError("state not positive: weight matrix is not Hermitian")
        rho = (rho + rho.conj().T) / 2
        evals = np.linalg.eigvalsh(rho)
        if evals.size and evals.min() < -TOL_PSD:
            raise StateError(f"state not positive: weight eigenvalue {evals.min():.3e} < 0")
        total = np.trace(rho).real
        if abs(total - 1.0) > TOL_NORM:
            raise StateError(f"state not normalized: phi(1) = {total!r}")
        rho.setflags(write=False)
        object.__setattr__(self, "weight", rho)

    def __call__(self, A) -> complex:
        A = np.asarray(A, dtype=complex)
        return complex(np.sum(self.weight.T * A))

    def expectation_functional(self) -> np.ndarray:
        """Row vector ``w`` with ``phi(A) = w @ alg.coords(A)``."""
        return self.alg.coords(self.weight.T)

    def is_faithful(self, tol: float = TOL_PSD) -> bool:
        return bool(np.linalg.eigvalsh(self.weight).min() > tol)

    def is_tracial(self, tol: float = 1e-12) -> bool:
        """True when ``phi(AB) = phi(BA)`` on the whole algebra."""
        for s in self.alg.block_slices():
            blk = self.weight[s, s]
            c = blk[0, 0]
            if np.linalg.norm(blk - c * np.eye(blk.shape[0])) > tol:
                return False
        return True


def density_state(alg: StarAlgebra, rho) -> State:
    return State(alg, np.asarray(rho, dtype=complex))


def trace_state(alg: StarAlgebra, block_weights: Sequence[float] | None = None) -> State:
    """Tracial state; the default is the normalized ambient trace ``tr/N``.

    ``block_weights`` (summing to one) selects another tracial state
    ``sum_i w_i tr_i / d_i`` on a direct sum.
    """
    if block_weights is None:
        return State(alg, alg.identity() / alg.ambient)
    w = np.asarray(block_weights, dtype=float)
    if w.shape != (len(alg.blocks),) or np.any(w < 0):
        raise StateError("state not positive: block weights must be non-negative, one per block")
    rho = alg.zero()
    for wi, s, d in zip(w, alg.block_slices(), alg.blocks):
        rho[s, s] = wi / d * np.eye(d)
    return State(alg, rho)


def vector_state(alg: StarAlgebra, x) -> State:
    """``omega(A) = <x, A x>`` for a unit vector ``x`` in ``C^N``."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.shape != (alg.ambient,):
        raise AlgebraError(f"vector must have length {alg.ambient}")
    if abs(np.linalg.norm(x) - 1.0) > TOL_NORM:
        raise StateError(f"vector is not a unit vector (norm {np.linalg.norm(x)!r})")
    return State(alg, alg.project(np.outer(x, x.conj())))


def weights_state(weights) -> State:
    """Probability vector on atoms as a state of the diagonal algebra."""
    mu = np.asarray([float(w) for w in weights], dtype=float)
    if np.any(mu < 0):
        raise StateError("state not positive: negative weight")
    alg = diagonal_algebra(len(mu))
    return State(alg, np.diag(mu).astype(complex))


def luders_update(omega: State, P) -> State:
    """State after a "yes" outcome: ``A -> omega(P A P) / omega(P)``."""
    P = check_projection(P, omega.alg)
    prob = omega(P).real
    if prob <= TOL_PROB:
        raise ZeroProbabilityError(f"zero-probability conditioning: omega(P) = {prob!r}")
    return State(omega.alg, P @ omega.weight @ P / prob)


@dataclass(frozen=True)
class Interval:
    """Real interval; half-open ``[lo, hi)`` by default."""

    lo: float
    hi: float
    closed_lo: bool = True
    closed_hi: bool = False

    def __contains__(self, x: float) -> bool:
        above = x >= self.lo if self.closed_lo else x > self.lo
        below = x <= self.hi if self.closed_hi else x < self.hi
        return bool(above and below)

    def halves(self) -> tuple["Interval", "Interval"]:
        mid = (self.lo + self.hi) / 2
        return Interval(self.lo, mid, self.closed_lo, False), Interval(mid, self.hi, True, self.closed_hi)

    @classmethod
    def coerce(cls, value) -> "Interval":
        if isinstance(value, Interval):
            return value
        lo, hi = value
        return cls(float(lo), float(hi))

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "closed_lo": self.closed_lo, "closed_hi": self.closed_hi}


@dataclass(frozen=True)
class EnergyLevel:
    value: float
    multiplicity: int
    projection: np.ndarray = field(repr=False)


def spectral_levels(A, alg: StarAlgebra | None = None) -> list[EnergyLevel]:
    """Distinct eigenvalues of a Hermitian element with their spectral projections.

    Eigenvalues closer than ``CLUSTER_RTOL`` times the spectral radius are
    merged into one level whose value is the cluster mean.
    """
    A = np.asarray(A, dtype=complex)
    if not is_hermitian(A):
        raise NotHermitianError("spectral projections need a Hermitian element")
    A = (A + A.conj().T) / 2
    if alg is None:
        alg = StarAlgebra((A.shape[0],))
    A = alg.check(A)
    pairs = []
    for s in alg.block_slices():
        vals, vecs = np.linalg.eigh(A[s, s])
        for k in range(len(vals)):
            v = np.zeros(alg.ambient, dtype=complex)
            v[s] = vecs[:, k]
            pairs.append((float(vals[k]), v))
    pairs.sort(key=lambda p: p[0])
    radius = max(abs(p[0]) for p in pairs)
    tol = CLUSTER_RTOL * radius
    clusters: list[list[tuple[float, np.ndarray]]] = [[pairs[0]]]
    for val, vec in pairs[1:]:
        if val - clusters[-1][-1][0] <= tol:
            clusters[-1].append((val, vec))
        else:
            clusters.append([(val, vec)])
    levels = []
    for cl in clusters:
        V = np.column_stack([v for _, v in cl])
        levels.append(EnergyLevel(float(np.mean([v for v, _ in cl])), len(cl), alg.project(V @ V.conj().T)))
    return levels


def spectral_projection(A, interval, alg: StarAlgebra | None = None) -> np.ndarray:
    """Projection onto the eigenvectors of ``A`` whose eigenvalue lies in ``interval``."""
    interval = Interval.coerce(interval)
    levels = spectral_levels(A, alg)
    P = np.zeros_like(levels[0].projection)
    for lvl in levels:
        if lvl.value in interval:
            P = P + lvl.projection
    return P
