"""Khintchine-type recurrence sets and additive (Poincaré-type) recurrence.

Relative density cannot be certified by a finite scan.  Every scan reports
the admitted indices on ``1..K`` together with the largest gap, counting the
gap from ``0`` to the first member.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .algebra import TOL_PROB, State, check_projection, luders_update, trace_state
from .dynamics import (
    DEFAULT_HORIZON,
    DynamicalSystem,
    hamiltonian_step_map,
    is_ergodic,
)
from .errors import HypothesisError, StateError

GUARD = 1e-12


def _max_gap(indices) -> int | None:
    if not indices:
        return None
    prev, gap = 0, 0
    for k in indices:
        gap = max(gap, k - prev)
        prev = k
    return gap


@dataclass(frozen=True)
class RecurrenceSet:
    indices: tuple[int, ...]
    horizon: int
    epsilon: float
    threshold: float
    values: np.ndarray = field(repr=False)
    max_gap: int | None

    def admits(self, k: int) -> bool:
        """Re-evaluate the defining strict inequality at ``k``."""
        return bool(self.values[k - 1] > self.threshold + GUARD)

    def __len__(self) -> int:
        return len(self.indices)

    def rows(self):
        idx = set(self.indices)
        return [(k, float(self.values[k - 1]), k in idx) for k in range(1, self.horizon + 1)]

    def summary(self) -> dict:
        return {
            "horizon": self.horizon,
            "epsilon": self.epsilon,
            "threshold": self.threshold,
            "count": len(self.indices),
            "first": self.indices[0] if self.indices else None,
            "max_gap": self.max_gap,
        }


def _scan(values: np.ndarray, threshold: float, epsilon: float) -> RecurrenceSet:
    indices = tuple(int(k) + 1 for k in np.nonzero(values > threshold + GUARD)[0])
    return RecurrenceSet(indices, len(values), float(epsilon), float(threshold), values, _max_gap(indices))


def _correlations(sys: DynamicalSystem, left, right, K: int) -> np.ndarray:
    """``|phi(left tau^k(right))|`` for ``k = 1..K``, iterating the superoperator."""
    alg = sys.alg
    w = np.array([sys.state(left @ Bj) for Bj in alg.basis()])
    S = sys.tau.superop
    v = alg.coords(right)
    out = np.empty(K)
    for k in range(K):
        v = S @ v
        out[k] = abs(w @ v)
    return out


def khintchine_set(sys: DynamicalSystem, A, epsilon: float, K: int = DEFAULT_HORIZON) -> RecurrenceSet:
    """``{k : |phi(A^* tau^k(A))| > |phi(A)|^2 - epsilon}`` on ``1..K``."""
    if epsilon <= 0 or K < 1:
        raise ValueError("need epsilon > 0 and K >= 1")
    A = sys.alg.check(A)
    values = _correlations(sys, A.conj().T, A, K)
    return _scan(values, abs(sys.state(A)) ** 2 - epsilon, epsilon)


def khintchine_pair_set(sys: DynamicalSystem, A, B, epsilon: float, K: int = DEFAULT_HORIZON,
                        check_ergodic: bool = True) -> RecurrenceSet:
    """``{k : |phi(A tau^k(B))| > |phi(A) phi(B)| - epsilon}`` on ``1..K``.

    Relative density is only guaranteed for ergodic systems; a warning is
    issued otherwise.
    """
    if epsilon <= 0 or K < 1:
        raise ValueError("need epsilon > 0 and K >= 1")
    A = sys.alg.check(A)
    B = sys.alg.check(B)
    if check_ergodic and not is_ergodic(sys).is_ergodic:
        warnings.warn("system is not ergodic; the pair recurrence set may be empty", RuntimeWarning, stacklevel=2)
    values = _correlations(sys, A, B, K)
    return _scan(values, abs(sys.state(A) * sys.state(B)) - epsilon, epsilon)


def hilbert_recurrence_set(U: np.ndarray, P: np.ndarray, x, y, epsilon: float, K: int) -> RecurrenceSet:
    """``{k : |<x, U^k y>| > |<x, P y>| - epsilon}`` for a contraction ``U``."""
    x = np.asarray(x, dtype=complex)
    v = np.asarray(y, dtype=complex)
    values = np.empty(K)
    for k in range(K):
        v = U @ v
        values[k] = abs(np.vdot(x, v))
    return _scan(values, abs(np.vdot(x, P @ np.asarray(y, dtype=complex))) - epsilon, epsilon)


def center_trace(alg, X) -> np.ndarray:
    """Center-valued trace: the normalized trace of each block."""
    X = np.asarray(X, dtype=complex)
    return np.array([np.trace(X[s, s]).real / d for s, d in zip(alg.block_slices(), alg.blocks)])


@dataclass(frozen=True)
class RecurrenceSearch:
    n: int | None
    horizon: int
    value: float | None
    guaranteed: bool

    def to_dict(self) -> dict:
        return {"n": self.n, "horizon": self.horizon, "value": self.value,
                "guaranteed": self.guaranteed, "found": self.n is not None}


def _check_additive_hypotheses(sys: DynamicalSystem, tol: float = 1e-9) -> None:
    if not sys.tau.is_star_homomorphism(tol):
        raise HypothesisError("not-homomorphic", "tau must be a *-homomorphism")
    w = sys.state.expectation_functional()
    if np.linalg.norm(w @ sys.tau.superop - w) > tol:
        raise HypothesisError("not-invariant", "phi(tau(X)) != phi(X)")


def additive_recurrence_search(sys: DynamicalSystem, P, K: int = DEFAULT_HORIZON,
                               center_valued: bool = False) -> RecurrenceSearch:
    """Smallest ``n <= K`` with ``phi(P tau^n(P) P) > 0``.

    Requires ``tau`` to be a *-homomorphism leaving ``phi`` invariant.  With
    ``center_valued`` the positivity test uses the blockwise trace instead of
    ``phi``.  ``guaranteed`` records whether existence is assured (``phi``
    faithful or the algebra commutative, and ``phi(P) > 0``); a miss up to
    ``K`` is a scan bound, not a counterexample.
    """
    alg = sys.alg
    P = check_projection(P, alg)
    _check_additive_hypotheses(sys)
    phi = sys.state

    def value(X) -> float:
        if center_valued:
            return float(center_trace(alg, X).max())
        return phi(X).real

    additive = phi.is_faithful() or alg.is_commutative
    guaranteed = additive and value(P) > TOL_PROB
    S = sys.tau.superop
    v = alg.coords(P)
    for n in range(1, K + 1):
        v = S @ v
        val = value(P @ alg.element(v) @ P)
        if val > TOL_PROB:
            return RecurrenceSearch(n, K, val, guaranteed)
    return RecurrenceSearch(None, K, None, guaranteed)


def is_additive_witness(phi: State, projections, tol: float = 1e-10) -> bool:
    """Check ``sum phi(P_k) <= 1`` on a family with ``phi(P_k P_l P_k) = 0`` for ``k < l``.

    Families that do not meet the orthogonality premise are accepted
    vacuously.
    """
    Ps = [check_projection(P, phi.alg) for P in projections]
    for k in range(len(Ps)):
        for l in range(k + 1, len(Ps)):
            if abs(phi(Ps[k] @ Ps[l] @ Ps[k])) > tol:
                return True
    return sum(phi(P).real for P in Ps) <= 1 + tol


@dataclass(frozen=True)
class ReturnScan:
    """Return probabilities ``p = omega(tau_{n t}(P))`` over a grid of steps ``t``."""

    rows: tuple[tuple[float, int | None, float], ...]
    trace_p: float
    epsilon: float
    windows: tuple[tuple[float, float], ...]
    max_jump: float

    def to_dict(self) -> dict:
        return {"trace_p": self.trace_p, "epsilon": self.epsilon,
                "windows": [list(w) for w in self.windows], "max_jump": self.max_jump,
                "points": len(self.rows)}


def return_probability_scan(H, P, t_grid, epsilon: float, n_rule="first", K: int = 1000,
                            alg=None) -> ReturnScan:
    """Scan the repeat-"yes" probability after conditioning the trace on ``P``.

    ``omega = luders_update(tr, P)``.  For each step ``t`` the repeat time is
    ``n(t)``: a fixed integer, or with ``n_rule="first"`` the first ``n <= K``
    with ``tr(P tau_{n t}(P)) > 0``.  Windows are maximal runs of grid points
    with ``p > tr(P) - epsilon``; ``max_jump`` is the largest change of ``p``
    between neighbouring grid points.
    """
    from .algebra import StarAlgebra

    H = np.asarray(H, dtype=complex)
    if alg is None:
        alg = StarAlgebra((H.shape[0],))
    tr = trace_state(alg)
    P = check_projection(P, alg)
    tr_p = tr(P).real
    if tr_p <= TOL_PROB:
        raise StateError("tr(P) = 0: nothing to condition on")
    omega = luders_update(tr, P)
    rows = []
    for t in np.asarray(t_grid, dtype=float):
        tau = hamiltonian_step_map(alg, H, t)
        S = tau.superop
        v = alg.coords(P)
        if n_rule == "first":
            n = None
            for m in range(1, K + 1):
                v = S @ v
                if tr(P @ alg.element(v)).real > TOL_PROB:
                    n = m
                    break
            p = omega(alg.element(v)).real if n is not None else 0.0
        else:
            n = int(n_rule)
            for _ in range(n):
                v = S @ v
            p = omega(alg.element(v)).real
        rows.append((float(t), n, float(p)))
    ps = np.array([r[2] for r in rows])
    admitted = ps > tr_p - epsilon
    windows = []
    start = None
    for i, ok in enumerate(admitted):
        if ok and start is None:
            start = i
        if start is not None and (not ok or i == len(admitted) - 1):
            end = i if ok else i - 1
            windows.append((rows[start][0], rows[end][0]))
            start = None
    max_jump = float(np.max(np.abs(np.diff(ps)))) if len(ps) > 1 else 0.0
    return ReturnScan(tuple(rows), tr_p, float(epsilon), tuple(windows), max_jump)
