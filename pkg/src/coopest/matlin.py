"""Dense complex linear algebra for small operators.

Everything here works on plain ``numpy`` complex arrays.  The bipartite
convention is ``B (x) F`` with ``B`` the slow index, i.e. the basis
ordering ``|00>, |01>, |10>, |11>`` for two qubits.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

__all__ = [
    "DimensionError",
    "NonHermitianError",
    "InconsistentSystemError",
    "HermitianCheckReport",
    "EigenDecomposition",
    "as_matrix",
    "check_hermitian",
    "kron",
    "partial_trace",
    "herm_eig",
    "solve_anticommutator",
]

HERMITIAN_TOL = 1e-10
DEGENERACY_TOL = 1e-10


class DimensionError(ValueError):
    """Operator shapes do not fit together."""


class NonHermitianError(ValueError):
    """An operator that must be Hermitian is not."""


class InconsistentSystemError(ArithmeticError):
    """``a x + x a = 2 b`` has no exact solution.

    Raised when a pair of eigenvalues of ``a`` sums to (numerically) zero
    while the matching entry of ``b`` in the eigenbasis does not vanish.
    """


@dataclass(frozen=True)
class HermitianCheckReport:
    max_asymmetry: float
    is_hermitian: bool


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.conj().T


def as_matrix(m) -> np.ndarray:
    """Validate ``m`` as a finite square complex matrix and return a copy."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> HermitianCheckReport:
    a = np.asarray(m, dtype=complex)
    asym = float(np.linalg.norm(a - a.conj().T))
    scale = max(1.0, float(np.linalg.norm(a)))
    return HermitianCheckReport(asym, asym <= tol * scale)


def _require_hermitian(a: np.ndarray, what: str = "matrix") -> None:
    rep = check_hermitian(a)
    if not rep.is_hermitian:
        raise NonHermitianError(f"{what} is not Hermitian (|M - M^H|_F = {rep.max_asymmetry:.3e})")


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m, dims: Tuple[int, int], keep: str) -> np.ndarray:
    """Reduce an operator on ``B (x) F`` to one factor.

    Parameters
    ----------
    m : (dB*dF, dB*dF) array
    dims : (dB, dF)
    keep : ``"B"`` or ``"F"``
    """
    dB, dF = dims
    a = np.asarray(m, dtype=complex)
    if a.shape != (dB * dF, dB * dF):
        raise DimensionError(f"shape {a.shape} does not match dims {dims}")
    t = a.reshape(dB, dF, dB, dF)
    if keep == "B":
        return np.einsum("ijkj->ik", t)
    if keep == "F":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'B' or 'F', got {keep!r}")


def _fix_phases(q: np.ndarray) -> np.ndarray:
    # first non-negligible component of each column made real positive
    q = q.copy()
    for k in range(q.shape[1]):
        col = q[:, k]
        idx = int(np.argmax(np.abs(col) > 1e-12))
        z = col[idx]
        if z != 0:
            q[:, k] = col * (abs(z) / z)
    return q


def herm_eig(m) -> EigenDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    Eigenvalues ascend; each eigenvector has its first non-negligible
    component real and positive so the output is reproducible.
    """
    a = as_matrix(m)
    _require_hermitian(a)
    a = 0.5 * (a + a.conj().T)
    w, q = np.linalg.eigh(a)
    return EigenDecomposition(w, _fix_phases(q))


def solve_anticommutator(a, b, tol: float = DEGENERACY_TOL):
    """Solve ``a x + x a = 2 b`` for Hermitian ``x``.

    The system is diagonal in the eigenbasis of ``a``:
    ``x~_ij = 2 b~_ij / (l_i + l_j)``.  Pairs with
    ``|l_i + l_j| <= tol * max|l|`` are null directions; their entries are
    set to zero, which picks the minimum-norm solution.

    Returns
    -------
    x : ndarray
    degenerate : bool
        True when at least one null pair was met (solution not unique).
    residual : float
        ``||a x + x a - 2 b||_F``.

    Raises
    ------
    InconsistentSystemError
        A null pair carries a non-vanishing ``b~_ij``.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    _require_hermitian(a, "a")
    _require_hermitian(b, "b")
    a = 0.5 * (a + a.conj().T)
    b = 0.5 * (b + b.conj().T)
    lam, q = np.linalg.eigh(a)
    bt = q.conj().T @ b @ q
    denom = lam[:, None] + lam[None, :]
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    null = np.abs(denom) <= tol * scale
    degenerate = bool(np.any(null))
    if degenerate:
        bnorm = float(np.linalg.norm(b))
        if np.any(np.abs(bt[null]) > 100.0 * tol * max(bnorm, 1e-300)):
            raise InconsistentSystemError(
                "anticommutator equation has no solution: b has weight on a null pair of a"
            )
    xt = np.zeros_like(bt)
    ok = ~null
    xt[ok] = 2.0 * bt[ok] / denom[ok]
    x = q @ xt @ q.conj().T
    x = 0.5 * (x + x.conj().T)
    residual = float(np.linalg.norm(a @ x + x @ a - 2.0 * b))
    return x, degenerate, residual
