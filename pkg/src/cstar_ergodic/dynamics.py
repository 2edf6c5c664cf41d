"""*-dynamical systems, the induced contraction and ergodicity.

A linear map ``tau`` on the algebra is stored as a ``D x D`` superoperator
acting on matrix-unit coordinates.  ``make_system`` checks ``tau(1) = 1`` and
the contraction inequality ``phi(tau(A)^* tau(A)) <= phi(A^* A)``, which in
coordinates reads ``G - S^H G S >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .algebra import TOL_PSD, StarAlgebra, State, is_hermitian
from .errors import HypothesisError, NotHermitianError
from .gns import GnsSpace, gns_construct

TOL_DYN = 1e-9
TOL_FIX = 1e-8
DEFAULT_HORIZON = 10_000


class KahanSum:
    """Compensated running sum of numpy arrays (or scalars)."""

    def __init__(self, zero):
        self.total = np.array(zero, dtype=complex)
        self._c = np.zeros_like(self.total)

    def add(self, x) -> None:
        y = x - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t


@dataclass(frozen=True)
class DynamicalMap:
    """Linear map on an algebra, stored as a superoperator on coordinates."""

    alg: StarAlgebra
    superop: np.ndarray = field(repr=False)
    kind: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        S = np.array(self.superop, dtype=complex)
        D = self.alg.total_dim
        if S.shape != (D, D):
            raise HypothesisError("ill-formed", f"superoperator must be {D}x{D}, got {S.shape}")
        S.setflags(write=False)
        object.__setattr__(self, "superop", S)

    @classmethod
    def from_function(cls, alg: StarAlgebra, f: Callable[[np.ndarray], np.ndarray],
                      kind: str = "custom", **params) -> "DynamicalMap":
        cols = [alg.coords(alg.check(f(B), "image")) for B in alg.basis()]
        return cls(alg, np.column_stack(cols), kind, params)

    @classmethod
    def identity(cls, alg: StarAlgebra) -> "DynamicalMap":
        return cls(alg, np.eye(alg.total_dim), "identity")

    def __call__(self, A) -> np.ndarray:
        return self.alg.element(self.superop @ self.alg.coords(self.alg.check(A)))

    def power(self, A, k: int) -> np.ndarray:
        a = self.alg.coords(self.alg.check(A))
        for _ in range(k):
            a = self.superop @ a
        return self.alg.element(a)

    def unital_defect(self) -> float:
        one = self.alg.identity()
        return float(np.linalg.norm(self(one) - one))

    def is_star_homomorphism(self, tol: float = 1e-9) -> bool:
        basis = self.alg.basis()
        images = [self(B) for B in basis]
        for B, TB in zip(basis, images):
            if np.linalg.norm(self(B.conj().T) - TB.conj().T) > tol:
                return False
        for i, Bi in enumerate(basis):
            for j, Bj in enumerate(basis):
                if np.linalg.norm(self(Bi @ Bj) - images[i] @ images[j]) > tol:
                    return False
        return True


def unitary_conjugation_map(alg: StarAlgebra, V) -> DynamicalMap:
    """``A -> V^* A V`` for a unitary ``V`` in the algebra."""
    V = alg.check(V, "unitary")
    return DynamicalMap.from_function(alg, lambda A: V.conj().T @ A @ V, "unitary-conjugation")


def hamiltonian_step_map(alg: StarAlgebra, H, t: float) -> DynamicalMap:
    """Heisenberg step ``A -> e^{iHt} A e^{-iHt}``."""
    H = alg.check(H, "Hamiltonian")
    if not is_hermitian(H):
        raise NotHermitianError("Hamiltonian must be Hermitian")
    H = (H + H.conj().T) / 2
    Ut = expm(-1j * float(t) * H)
    Ut = alg.project(Ut)
    m = DynamicalMap.from_function(alg, lambda A: Ut.conj().T @ A @ Ut, "unitary-conjugation")
    return DynamicalMap(alg, m.superop, "unitary-conjugation", {"H": H, "t": float(t)})


def classical_map(table) -> DynamicalMap:
    """``f -> f o T`` on the diagonal algebra, with ``T`` given as an index table."""
    from .algebra import diagonal_algebra

    table = [int(x) for x in table]
    m = len(table)
    if any(not 0 <= x < m for x in table):
        raise HypothesisError("ill-formed", "map table entries must be atom indices")
    alg = diagonal_algebra(m)
    S = np.zeros((m, m), dtype=complex)
    for i, Ti in enumerate(table):
        S[i, Ti] = 1.0
    return DynamicalMap(alg, S, "classical-map", {"T": tuple(table)})


@dataclass(frozen=True)
class DynamicalSystem:
    """Verified triple ``(alg, phi, tau)`` together with its GNS space."""

    alg: StarAlgebra
    state: State
    tau: DynamicalMap
    gns: GnsSpace = field(repr=False)
    label: str = ""

    @property
    def phi(self) -> State:
        return self.state

    def contraction_defect(self) -> float:
        """Most negative eigenvalue of ``G - S^H G S`` (zero when contractive)."""
        return _contraction_margin(self.gns.gram, self.tau.superop)


def _contraction_margin(G: np.ndarray, S: np.ndarray) -> float:
    M = G - S.conj().T @ G @ S
    M = (M + M.conj().T) / 2
    return float(np.linalg.eigvalsh(M).min())


def make_system(alg: StarAlgebra, phi: State, tau: DynamicalMap, label: str = "") -> DynamicalSystem:
    if tau.alg != alg or phi.alg != alg:
        raise HypothesisError("ill-formed", "algebra, state and map must share one algebra")
    defect = tau.unital_defect()
    if defect > TOL_DYN:
        raise HypothesisError("not-unital", f"||tau(1) - 1|| = {defect:.3e}")
    space = gns_construct(alg, phi)
    margin = _contraction_margin(space.gram, tau.superop)
    scale = max(1.0, float(np.linalg.norm(space.gram, 2)))
    if margin < -TOL_PSD * scale:
        raise HypothesisError(
            "not-contractive",
            f"G - S^H G S has eigenvalue {margin:.3e}; phi(tau(A)^* tau(A)) > phi(A^* A) for some A",
        )
    return DynamicalSystem(alg, phi, tau, space, label)


def induced_contraction(sys: DynamicalSystem, gns: GnsSpace | None = None) -> np.ndarray:
    """Matrix of ``iota(A) -> iota(tau(A))`` on the GNS space."""
    space = sys.gns if gns is None else gns
    S = sys.tau.superop
    if space.null_basis.size:
        leak = np.linalg.norm(space.iota_matrix @ S @ space.null_basis, 2)
        if leak > TOL_DYN * max(1.0, np.linalg.norm(S, 2)):
            raise HypothesisError("ill-defined", f"tau does not preserve the null space (leak {leak:.3e})")
    U = space.operator(S)
    norm = np.linalg.norm(U, 2) if U.size else 0.0
    if norm > 1 + TOL_DYN:
        raise HypothesisError("not-contractive", f"||U|| = {norm!r} > 1")
    return U


def cesaro_operator(U: np.ndarray, n: int) -> np.ndarray:
    """``(1/n) sum_{k<n} U^k`` by direct iteration."""
    dim = U.shape[0]
    acc = KahanSum(np.zeros((dim, dim)))
    M = np.eye(dim, dtype=complex)
    for _ in range(n):
        acc.add(M)
        M = U @ M
    return acc.total / n


def fixed_point_projection(U: np.ndarray, tol: float = TOL_FIX) -> tuple[np.ndarray, int]:
    """Orthogonal projection onto ``ker(U - I)`` from the SVD of ``U - I``."""
    U = np.asarray(U, dtype=complex)
    dim = U.shape[0]
    if dim == 0:
        return np.zeros((0, 0), dtype=complex), 0
    _, s, Vh = np.linalg.svd(U - np.eye(dim))
    null = Vh[s <= tol].conj().T
    return null @ null.conj().T, int(null.shape[1])


@dataclass(frozen=True)
class ErgodicReport:
    fixed_dim: int
    is_ergodic: bool
    U: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)
    omega_residual: float
    projection_defect: float
    cesaro_check: float | None = None

    def to_dict(self) -> dict:
        out = {
            "fixed_dim": self.fixed_dim,
            "is_ergodic": self.is_ergodic,
            "gns_dim": int(self.U.shape[0]),
            "omega_residual": self.omega_residual,
            "projection_defect": self.projection_defect,
        }
        if self.cesaro_check is not None:
            out["cesaro_check"] = self.cesaro_check
        return out


def is_ergodic(sys: DynamicalSystem, n_check: int | None = None) -> ErgodicReport:
    """Ergodicity verdict: the fixed space of ``U`` is spanned by ``Omega``.

    With ``n_check`` the SVD projection is compared to the Cesàro mean of
    ``U`` at that horizon and the distance is reported as ``cesaro_check``.
    """
    U = induced_contraction(sys)
    P, fixed_dim = fixed_point_projection(U)
    omega = sys.gns.omega
    omega_residual = float(np.linalg.norm(U @ omega - omega))
    rank_one = np.outer(omega, omega.conj())
    check = None
    if n_check:
        check = float(np.linalg.norm(P - cesaro_operator(U, n_check), 2))
    return ErgodicReport(
        fixed_dim=fixed_dim,
        is_ergodic=fixed_dim == 1,
        U=U,
        P=P,
        omega_residual=omega_residual,
        projection_defect=float(np.linalg.norm(P - rank_one, 2)),
        cesaro_check=check,
    )


@dataclass(frozen=True)
class CesaroTrajectory:
    """Time means of ``A`` and their distance to the state mean.

    ``residuals[j]`` is ``||(1/n) sum_{k<n} tau^k(A) - phi(A)||_phi`` for
    ``n = j + 1``; ``rate_constant`` is ``max_n n * residual_n``.
    """

    mean: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    state_mean: complex
    rate_constant: float

    def rows(self):
        return [(n + 1, float(r)) for n, r in enumerate(self.residuals)]


def cesaro_mean(sys: DynamicalSystem, A, n: int = DEFAULT_HORIZON) -> CesaroTrajectory:
    if n < 1:
        raise ValueError("n must be >= 1")
    alg = sys.alg
    S = sys.tau.superop
    G = sys.gns.gram
    a = alg.coords(alg.check(A))
    mean_phi = sys.state(A)
    target = mean_phi * alg.coords(alg.identity())
    acc = KahanSum(np.zeros_like(a))
    residuals = np.empty(n)
    v = a
    for k in range(n):
        acc.add(v)
        c = acc.total / (k + 1) - target
        residuals[k] = np.sqrt(max(np.vdot(c, G @ c).real, 0.0))
        v = S @ v
    counts = np.arange(1, n + 1)
    return CesaroTrajectory(alg.element(acc.total / n), residuals, mean_phi, float(np.max(counts * residuals)))


def cesaro_correlation(sys: DynamicalSystem, A, B, n: int = DEFAULT_HORIZON) -> np.ndarray:
    """Partial means ``(1/m) sum_{k<m} phi(A tau^k(B))`` for ``m = 1..n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    alg = sys.alg
    A = alg.check(A)
    # phi(A X) as a row vector acting on the coordinates of X
    w = np.array([sys.state(A @ Bj) for Bj in alg.basis()])
    S = sys.tau.superop
    v = alg.coords(alg.check(B))
    acc = KahanSum(0.0)
    out = np.empty(n, dtype=complex)
    for k in range(n):
        acc.add(w @ v)
        out[k] = acc.total / (k + 1)
        v = S @ v
    return out


def is_state_invariant(sys: DynamicalSystem, tol: float = 1e-12) -> bool:
    """``phi(tau(A)) = phi(A)`` on the whole algebra."""
    w = sys.state.expectation_functional()
    return bool(np.linalg.norm(w @ sys.tau.superop - w) <= tol * max(1.0, np.linalg.norm(w)))
