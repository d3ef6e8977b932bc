"""Cooperative estimation with local measurements on ``B`` and ``F``.

The estimator is restricted to products ``S_B (x) S_F``.  Three solvers are
provided and :func:`cooperative_solve` keeps the cheapest pair found:

``fixed_point``
    alternate the two coupled stationarity equations
    ``W~_B S_B + S_B W~_B = 2 W1_B`` and ``W~_F S_F + S_F W~_F = 2 W1_F``
    with ``W~_B = Tr_F[W0 (I (x) S_F)]`` and ``W~_F = Tr_B[W0 (S_B (x) I)]``.
``exact_alternating``
    block-coordinate descent on the product cost; each half-step is an
    exact convex minimisation, so the cost never increases.
``random_search``
    draw ``S_F`` from the Gaussian unitary ensemble (plus ``S_F = I``) and
    solve only the ``B`` equation for each draw.

The pair ``(c S_B, S_F / c)`` gives the same estimator for any ``c != 0``;
returned pairs are normalised to ``||S_F||_F = sqrt(dF)``, ``Tr S_F >= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from . import _backend
from .estimation import MomentOperators, cost_of, family_moments
from .matlin import DimensionError, InconsistentSystemError, check_hermitian, partial_trace
from .quantum import IsometryFamily, ProbeState

__all__ = [
    "METHODS",
    "CoopConfig",
    "SolverReport",
    "LocalEstimatorPair",
    "tilde_moments",
    "coupled_residuals",
    "gue_matrix",
    "start_candidates",
    "fixed_point_solve",
    "exact_alternating_solve",
    "gue_random_search",
    "cooperative_solve",
    "cooperative_min",
    "delta",
]

METHODS = ("fixed_point", "exact_alternating", "random_search")
# fixed points of the coupled equations and minimisers of the product cost
# are reported as disagreeing beyond this gap
STATIONARITY_GAP = 1e-6


@dataclass(frozen=True)
class CoopConfig:
    tolerance: float = 1e-10
    max_iterations: int = 500
    restarts: int = 32
    seed: int = 0
    methods: Tuple[str, ...] = METHODS

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ValueError(f"methods must be a non-empty subset of {METHODS}")


@dataclass(frozen=True)
class SolverReport:
    method: str
    iterations: int
    residual_1a: float
    residual_1b: float
    converged: bool
    restarts_used: int
    seed: int
    degenerate: bool = False
    start_index: int = 0
    max_cost_increase: float = 0.0
    notes: Tuple[str, ...] = ()


@dataclass(frozen=True)
class LocalEstimatorPair:
    sB: np.ndarray
    sF: np.ndarray
    cost: float
    report: SolverReport

    @property
    def estimator(self) -> np.ndarray:
        return np.kron(self.sB, self.sF)


def _dims_of(m: MomentOperators, dims) -> Tuple[int, int]:
    dB, dF = int(dims[0]), int(dims[1])
    if m.w0.shape != (dB * dF, dB * dF):
        raise DimensionError(f"joint moments of shape {m.w0.shape} do not match dims {dims}")
    return dB, dF


def tilde_moments(w0, sB, sF, dims):
    """``(Tr_F[W0 (I (x) S_F)], Tr_B[W0 (S_B (x) I)])``."""
    dB, dF = dims
    w0 = np.asarray(w0, dtype=complex)
    sB = np.asarray(sB, dtype=complex)
    sF = np.asarray(sF, dtype=complex)
    if w0.shape != (dB * dF, dB * dF) or sB.shape != (dB, dB) or sF.shape != (dF, dF):
        raise DimensionError("operator shapes do not match dims")
    wtB = partial_trace(w0 @ np.kron(np.eye(dB), sF), dims, "B")
    wtF = partial_trace(w0 @ np.kron(sB, np.eye(dF)), dims, "F")
    return wtB, wtF


def coupled_residuals(m: MomentOperators, sB, sF, dims) -> Tuple[float, float]:
    """Frobenius residuals of the two coupled stationarity equations."""
    wtB, wtF = tilde_moments(m.w0, sB, sF, dims)
    w1B = partial_trace(m.w1, dims, "B")
    w1F = partial_trace(m.w1, dims, "F")
    rB = wtB @ sB + sB @ wtB - 2.0 * w1B
    rF = wtF @ sF + sF @ wtF - 2.0 * w1F
    return float(np.linalg.norm(rB)), float(np.linalg.norm(rF))


def gue_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    """``(G + G^H)/2`` with iid standard complex Gaussian entries."""
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    return 0.5 * (g + g.conj().T)


def start_candidates(dF: int, cfg: CoopConfig) -> np.ndarray:
    """``cfg.restarts`` starting points for ``S_F``; the identity comes first."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    out = np.empty((cfg.restarts, dF, dF), dtype=complex)
    out[0] = np.eye(dF)
    for k in range(1, cfg.restarts):
        out[k] = gue_matrix(rng, dF)
    return out


def _check_init(init_sF, dF) -> np.ndarray:
    if init_sF is None:
        return np.eye(dF, dtype=complex)
    s = np.asarray(init_sF, dtype=complex)
    if s.shape != (dF, dF):
        raise DimensionError(f"init_sF must be {dF}x{dF}")
    if not check_hermitian(s).is_hermitian:
        raise ValueError("init_sF must be Hermitian")
    if not np.any(s):
        raise ValueError("init_sF must be non-zero")
    return 0.5 * (s + s.conj().T)


def _pair(m, dims, sB, sF, report) -> LocalEstimatorPair:
    return LocalEstimatorPair(sB, sF, cost_of(np.kron(sB, sF), m), report)


def fixed_point_solve(m: MomentOperators, dims, cfg: CoopConfig = CoopConfig(),
                      init_sF=None, backend=None) -> LocalEstimatorPair:
    """Iterate the coupled equations from ``init_sF`` (identity by default).

    Non-convergence is reported through ``report.converged``; an
    inconsistent null pair in either sub-equation raises
    :class:`InconsistentSystemError`.
    """
    k = backend or _backend.kernels
    dB, dF = _dims_of(m, dims)
    s0 = _check_init(init_sF, dF)
    sB, sF, it, ra, rb, conv, deg = k.fixed_point(
        m.w0, m.w1, dB, dF, s0, cfg.tolerance, cfg.max_iterations)
    rep = SolverReport("fixed_point", it, ra, rb, conv, 1, cfg.seed, deg)
    return _pair(m, dims, sB, sF, rep)


def exact_alternating_solve(m: MomentOperators, dims, cfg: CoopConfig = CoopConfig(),
                            init_sF=None, backend=None) -> LocalEstimatorPair:
    """Block-coordinate descent on ``C(S_B (x) S_F)`` from ``init_sF``."""
    k = backend or _backend.kernels
    dB, dF = _dims_of(m, dims)
    s0 = _check_init(init_sF, dF)
    sB, sF, it, _, conv, inc, deg = k.exact_alternating(
        m.w0, m.w1, m.m2, dB, dF, s0, cfg.tolerance, cfg.max_iterations)
    ra, rb = coupled_residuals(m, sB, sF, (dB, dF))
    rep = SolverReport("exact_alternating", it, ra, rb, conv, 1, cfg.seed, deg,
                       max_cost_increase=inc)
    return _pair(m, dims, sB, sF, rep)


def _gauge(sB, sF):
    n = np.linalg.norm(sF)
    if n == 0.0:
        return sB, sF
    c = np.sqrt(sF.shape[0]) / n
    if np.trace(sF).real < 0:
        c = -c
    return sB / c, sF * c


def _search(m, dB, dF, cands, cfg, k) -> Optional[LocalEstimatorPair]:
    best, sB, _, skipped = k.search_1a(m.w0, m.w1, m.m2, dB, dF, cands, cfg.tolerance)
    if best < 0:
        return None
    sB, sF = _gauge(sB, cands[best].copy())
    ra, rb = coupled_residuals(m, sB, sF, (dB, dF))
    notes = (f"{skipped} candidates skipped (inconsistent B equation)",) if skipped else ()
    rep = SolverReport("random_search", 1, ra, rb, True, len(cands), cfg.seed,
                       start_index=int(best), notes=notes)
    return _pair(m, (dB, dF), sB, sF, rep)


def gue_random_search(m: MomentOperators, dims, cfg: CoopConfig = CoopConfig(),
                      backend=None) -> LocalEstimatorPair:
    """Best of ``cfg.restarts`` candidates ``S_F`` (identity first, then GUE draws).

    With ``S_F = I`` the B equation is the single-system one, so the result
    never costs more than estimating from ``B`` alone.
    """
    k = backend or _backend.kernels
    dB, dF = _dims_of(m, dims)
    out = _search(m, dB, dF, start_candidates(dF, cfg), cfg, k)
    if out is None:
        raise InconsistentSystemError("every random-search candidate was inconsistent")
    return out


def cooperative_solve(m: MomentOperators, dims, cfg: CoopConfig = CoopConfig(),
                      backend=None) -> LocalEstimatorPair:
    """Cheapest product estimator over every enabled method and start.

    Candidates are reduced in a fixed order (methods in ``METHODS`` order,
    starts in index order, first minimum wins), so the answer does not
    depend on scheduling.
    """
    k = backend or _backend.kernels
    dB, dF = _dims_of(m, dims)
    cands = start_candidates(dF, cfg)
    best = None
    best_cost = np.inf
    per_method = {}
    failures = 0
    for method in METHODS:
        if method not in cfg.methods:
            continue
        if method == "random_search":
            try:
                res = _search(m, dB, dF, cands, cfg, k)
            except InconsistentSystemError:
                res = None
            runs = [] if res is None else [(res.cost, res.sB, res.sF, res.report)]
            failures += res is None
        else:
            runs = []
            for idx, s0 in enumerate(cands):
                try:
                    if method == "fixed_point":
                        sB, sF, it, ra, rb, conv, deg = k.fixed_point(
                            m.w0, m.w1, dB, dF, s0, cfg.tolerance, cfg.max_iterations)
                        inc = 0.0
                    else:
                        sB, sF, it, _, conv, inc, deg = k.exact_alternating(
                            m.w0, m.w1, m.m2, dB, dF, s0, cfg.tolerance, cfg.max_iterations)
                        ra = rb = np.nan
                except InconsistentSystemError:
                    failures += 1
                    continue
                c = k.product_cost(sB, sF, m.w0, m.w1, m.m2)
                if not np.isfinite(c):
                    failures += 1
                    continue
                rep = SolverReport(method, it, ra, rb, conv, cfg.restarts, cfg.seed, deg,
                                   start_index=idx, max_cost_increase=inc)
                runs.append((c, sB, sF, rep))
        if runs:
            c, sB, sF, rep = min(runs, key=lambda r: r[0])
            per_method[method] = c
            if c < best_cost:
                best_cost, best = c, (sB, sF, rep)
    if best is None:
        raise InconsistentSystemError("all cooperative solvers failed")
    sB, sF, rep = best
    ra, rb = coupled_residuals(m, sB, sF, (dB, dF))
    notes = list(rep.notes)
    if failures:
        notes.append(f"{failures} runs failed")
    if "fixed_point" in per_method and "exact_alternating" in per_method:
        gap = per_method["fixed_point"] - per_method["exact_alternating"]
        if abs(gap) > STATIONARITY_GAP:
            notes.append(f"stationarity gap {gap:.3e} between coupled-equation fixed point "
                         f"and product-cost minimum")
    rep = replace(rep, residual_1a=ra, residual_1b=rb, notes=tuple(notes))
    return _pair(m, (dB, dF), sB, sF, rep)


def cooperative_min(f: IsometryFamily, probe: ProbeState, cfg: CoopConfig = CoopConfig(),
                    backend=None) -> LocalEstimatorPair:
    return cooperative_solve(family_moments(f, probe, "BF"), f.dims, cfg, backend)


def delta(cB_min: float, cBF_min: float) -> float:
    """Cooperative advantage ``C_B - C_BF`` (not clamped)."""
    return cB_min - cBF_min
