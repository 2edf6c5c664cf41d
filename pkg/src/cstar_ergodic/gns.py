"""Numerical GNS construction for a state on a block matrix algebra.

The Gram matrix ``G[i, j] = phi(B_i^* B_j)`` over the matrix-unit basis
``{B_i}`` is diagonalized; eigenvectors with eigenvalue at most
``TOL_NULL * lambda_max`` span the null space of the seminorm
``||A||_phi = sqrt(phi(A^* A))``.  The quotient is coordinatized by the
remaining eigenvectors scaled by ``sqrt(lambda)``, so that the GNS inner
product becomes the standard one on ``C^dim``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import StarAlgebra, State
from .errors import StateError

TOL_GNS = 1e-8
TOL_NULL = 1e-10


def gram_matrix(alg: StarAlgebra, phi: State) -> np.ndarray:
    """``G[i, j] = phi(B_i^* B_j)`` by direct evaluation on matrix units."""
    basis = alg.basis()
    D = alg.total_dim
    G = np.empty((D, D), dtype=complex)
    for i, Bi in enumerate(basis):
        Bi_star = Bi.conj().T
        for j, Bj in enumerate(basis):
            G[i, j] = phi(Bi_star @ Bj)
    return G


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of every column made real positive
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col)))
        if abs(col[idx]) > 0:
            out[:, k] = col * (abs(col[idx]) / col[idx])
    return out


@dataclass(frozen=True)
class GnsSpace:
    """GNS data for ``(alg, phi)``.

    ``iota_matrix`` maps algebra coordinates to GNS coordinates and
    ``lift`` is its right inverse (a section of the quotient map).
    """

    alg: StarAlgebra
    state: State
    gram: np.ndarray = field(repr=False)
    iota_matrix: np.ndarray = field(repr=False)
    lift: np.ndarray = field(repr=False)
    null_basis: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.iota_matrix.shape[0]

    @property
    def omega(self) -> np.ndarray:
        """Cyclic vector ``iota(1)``."""
        return self.iota(self.alg.identity())

    def iota(self, A) -> np.ndarray:
        return self.iota_matrix @ self.alg.coords(A)

    def iota_coords(self, a) -> np.ndarray:
        return self.iota_matrix @ np.asarray(a, dtype=complex)

    @staticmethod
    def inner(x, y) -> complex:
        return complex(np.vdot(x, y))

    def operator(self, superop: np.ndarray) -> np.ndarray:
        """Matrix on the GNS space of a linear map given in algebra coordinates.

        Only meaningful when the map sends the null space into itself.
        """
        return self.iota_matrix @ superop @ self.lift

    def pi(self, A) -> np.ndarray:
        """Representation ``pi(A)`` with ``pi(A) iota(B) = iota(AB)``; built on demand."""
        return self.operator(self.alg.left_multiplication(A))

    def element_of(self, x) -> np.ndarray:
        """A representative ``A`` with ``iota(A) = x``."""
        return self.alg.element(self.lift @ np.asarray(x, dtype=complex))

    def span_rank(self, elements, rtol: float = TOL_GNS) -> int:
        if not elements:
            return 0
        M = np.column_stack([self.iota(A) for A in elements])
        s = np.linalg.svd(M, compute_uv=False)
        if s.size == 0 or s[0] == 0:
            return 0
        return int(np.sum(s > rtol * max(1.0, s[0])))


def gns_construct(alg: StarAlgebra, phi: State) -> GnsSpace:
    if phi.alg != alg:
        raise StateError("state is defined on a different algebra")
    G = gram_matrix(alg, phi)
    G = (G + G.conj().T) / 2
    vals, vecs = np.linalg.eigh(G)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], _fix_signs(vecs[:, order])
    lam_max = max(vals[0], 0.0)
    cutoff = TOL_NULL * lam_max
    if vals[-1] < -cutoff - 1e-15:
        raise StateError(f"state not positive: Gram eigenvalue {vals[-1]:.3e}")
    keep = vals > cutoff
    V = vecs[:, keep]
    lam = vals[keep]
    iota_matrix = np.sqrt(lam)[:, None] * V.conj().T
    lift = V / np.sqrt(lam)[None, :]
    return GnsSpace(alg, phi, G, iota_matrix, lift, vecs[:, ~keep], vals)


def seminorm(phi: State, A) -> float:
    """``||A||_phi = sqrt(phi(A^* A))``."""
    A = np.asarray(A, dtype=complex)
    return float(np.sqrt(max(phi(A.conj().T @ A).real, 0.0)))


def is_phi_total(phi: State, gens) -> bool:
    """Whether the linear span of ``gens`` is dense for ``||.||_phi``.

    At finite dimension this means ``iota(gens)`` spans the GNS space.
    """
    space = gns_construct(phi.alg, phi)
    return space.span_rank(list(gens)) == space.dim
