"""Minimum mean-square-error estimation on a single output.

For a family of states ``rho(s)`` with prior ``p(s)`` the Bayes cost of a
Hermitian estimator ``S`` is

    C(S) = int p(s) Tr[rho(s) (S - s)^2] ds
         = Tr[W0 S^2] - 2 Tr[W1 S] + m2,

with ``W0 = int p rho``, ``W1 = int s p rho`` and ``m2 = int s^2 p``.  The
minimiser solves ``W0 S + S W0 = 2 W1`` and its spectral measurement is
optimal among all POVMs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .matlin import (
    DimensionError,
    NonHermitianError,
    check_hermitian,
    herm_eig,
    partial_trace,
    solve_anticommutator,
)
from .quantum import IsometryFamily, Prior, ProbeState, joint_outputs

__all__ = [
    "MomentOperators",
    "EstimatorSolution",
    "moments",
    "family_moments",
    "personik_solve",
    "cost_of",
    "cost_by_quadrature",
    "min_cost",
    "privacy",
    "weak_privacy",
    "default_probe_grid",
    "haar_probe_grid",
    "spectral_measurement",
]


@dataclass(frozen=True)
class MomentOperators:
    w0: np.ndarray
    w1: np.ndarray
    m2: float
    mean: float

    @property
    def dim(self) -> int:
        return self.w0.shape[0]

    @property
    def variance(self) -> float:
        return self.m2 - self.mean ** 2

    def reduce(self, dims, keep: str) -> "MomentOperators":
        """Marginal moments on one factor of ``B (x) F``."""
        return MomentOperators(
            partial_trace(self.w0, dims, keep),
            partial_trace(self.w1, dims, keep),
            self.m2,
            self.mean,
        )


@dataclass(frozen=True)
class EstimatorSolution:
    estimator: np.ndarray
    cost: float
    residual: float
    degenerate: bool


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _moments_from_stack(rhos: np.ndarray, prior: Prior) -> MomentOperators:
    s, w = prior.rule
    w0 = np.einsum("n,nij->ij", w, rhos)
    w1 = np.einsum("n,nij->ij", w * s, rhos)
    return MomentOperators(_hermitize(w0), _hermitize(w1), float(np.dot(w, s * s)), float(np.dot(w, s)))


def moments(rho_of_s: Callable[[float], np.ndarray], prior: Prior) -> MomentOperators:
    """Quadrature moments of ``s -> rho(s)`` under ``prior``."""
    s, _ = prior.rule
    rhos = np.array([np.asarray(rho_of_s(float(x)), dtype=complex) for x in s])
    return _moments_from_stack(rhos, prior)


def family_moments(f: IsometryFamily, probe: ProbeState, side: str = "BF") -> MomentOperators:
    """Moments of the joint output (``"BF"``) or of one marginal (``"B"``, ``"F"``)."""
    s, _ = f.prior.rule
    m = _moments_from_stack(joint_outputs(f, probe, s), f.prior)
    if side == "BF":
        return m
    return m.reduce(f.dims, side)


def cost_of(estimator, m: MomentOperators) -> float:
    s_hat = np.asarray(estimator, dtype=complex)
    if s_hat.shape != m.w0.shape:
        raise DimensionError(f"estimator shape {s_hat.shape} vs moments {m.w0.shape}")
    if not check_hermitian(s_hat).is_hermitian:
        raise NonHermitianError("estimator must be Hermitian")
    quad = np.trace(m.w0 @ s_hat @ s_hat).real
    lin = np.trace(m.w1 @ s_hat).real
    return float(quad - 2.0 * lin + m.m2)


def cost_by_quadrature(estimator, rho_of_s: Callable[[float], np.ndarray], prior: Prior) -> float:
    """Direct ``int p(s) Tr[rho(s)(S - s)^2] ds``; cross-check for ``cost_of``."""
    s_hat = np.asarray(estimator, dtype=complex)
    eye = np.eye(s_hat.shape[0])
    total = 0.0
    for x, w in zip(*prior.rule):
        d = s_hat - x * eye
        total += w * np.trace(np.asarray(rho_of_s(float(x))) @ d @ d).real
    return float(total)


def personik_solve(m: MomentOperators, tol: float = 1e-10) -> EstimatorSolution:
    x, degenerate, residual = solve_anticommutator(m.w0, m.w1, tol)
    return EstimatorSolution(x, cost_of(x, m), residual, degenerate)


def min_cost(f: IsometryFamily, probe: ProbeState, side: str) -> float:
    """Minimum Bayes cost when only ``side`` (``"B"`` or ``"F"``) is measured."""
    return personik_solve(family_moments(f, probe, side)).cost


def privacy(cB: float, cF: float) -> float:
    return max(cF - cB, 0.0)


def default_probe_grid(gamma_step: float = 0.1, phi_step: float = np.pi / 8) -> List[ProbeState]:
    """Probe grid with ``phi = 2pi`` dropped as a copy of ``phi = 0``."""
    gammas = np.round(np.arange(0.0, 1.0 + 0.5 * gamma_step, gamma_step), 12)
    nphi = int(round(2 * np.pi / phi_step))
    phis = phi_step * np.arange(nphi)
    return [ProbeState(float(min(g, 1.0)), float(p)) for g in gammas for p in phis]


def haar_probe_grid(n: int, seed: int = 0) -> List[ProbeState]:
    """``n`` Haar-random pure qubit probes (uniform on the Bloch sphere)."""
    rng = np.random.default_rng(seed)
    gammas = rng.uniform(0.0, 1.0, n)
    phis = rng.uniform(0.0, 2 * np.pi, n)
    return [ProbeState(float(g), float(p)) for g, p in zip(gammas, phis)]


def weak_privacy(f: IsometryFamily, probe: ProbeState, averaging_grid: Sequence[ProbeState]) -> float:
    """Privacy against an adversary that does not know the probe.

    The adversary's cost is averaged over ``averaging_grid``.
    """
    if len(averaging_grid) == 0:
        raise ValueError("averaging grid must not be empty")
    cB = min_cost(f, probe, "B")
    cF = float(np.mean([min_cost(f, q, "F") for q in averaging_grid]))
    return max(cF - cB, 0.0)


def spectral_measurement(estimator, merge_tol: float = 1e-10) -> List[Tuple[float, np.ndarray]]:
    """Outcomes and projectors of the estimator's spectral measurement.

    Eigenvalues closer than ``merge_tol`` (relative) share one projector.
    """
    dec = herm_eig(estimator)
    lam, q = dec.eigenvalues, dec.eigenvectors
    scale = max(1.0, float(np.max(np.abs(lam))))
    out: List[Tuple[float, np.ndarray]] = []
    start = 0
    for k in range(1, len(lam) + 1):
        if k == len(lam) or lam[k] - lam[start] > merge_tol * scale:
            cols = q[:, start:k]
            out.append((float(np.mean(lam[start:k])), cols @ cols.conj().T))
            start = k
    return out
