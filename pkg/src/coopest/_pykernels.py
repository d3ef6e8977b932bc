"""Pure numpy versions of the hot kernels.

Same call signatures as the compiled ``_ckernels`` module; used when the
extension is not built or ``COOPEST_BACKEND=python`` is set.  Inputs are
trusted (validated by the callers in ``cooperative``).
"""
import numpy as np

from .matlin import InconsistentSystemError

NAME = "python"


def anticomm(a, b, tol):
    lam, q = np.linalg.eigh(a)
    bt = q.conj().T @ b @ q
    denom = lam[:, None] + lam[None, :]
    null = np.abs(denom) <= tol * np.max(np.abs(lam))
    degenerate = bool(null.any())
    if degenerate:
        if np.any(np.abs(bt[null]) > 100.0 * tol * max(np.linalg.norm(b), 1e-300)):
            raise InconsistentSystemError("no solution: b has weight on a null pair of a")
        denom = np.where(null, 1.0, denom)
        bt = np.where(null, 0.0, bt)
    x = q @ (2.0 * bt / denom) @ q.conj().T
    x = 0.5 * (x + x.conj().T)
    return x, degenerate, float(np.linalg.norm(a @ x + x @ a - 2.0 * b))


def _tr_f(m, dB, dF):
    return np.einsum("ijkj->ik", m.reshape(dB, dF, dB, dF))


def _tr_b(m, dB, dF):
    return np.einsum("ijil->jl", m.reshape(dB, dF, dB, dF))


def _herm(m):
    return 0.5 * (m + m.conj().T)


def tilde_b(w0, sF, dB, dF):
    return _herm(_tr_f(w0 @ np.kron(np.eye(dB), sF), dB, dF))


def tilde_f(w0, sB, dB, dF):
    return _herm(_tr_b(w0 @ np.kron(sB, np.eye(dF)), dB, dF))


def product_cost(sB, sF, w0, w1, m2):
    s = np.kron(sB, sF)
    return float(np.trace(w0 @ s @ s).real - 2.0 * np.trace(w1 @ s).real + m2)


def _gauge(sB, sF, dF):
    n = np.linalg.norm(sF)
    if n == 0.0:
        return sB, sF
    c = np.sqrt(dF) / n
    if np.trace(sF).real < 0:
        c = -c
    return sB / c, sF * c


def fixed_point(w0, w1, dB, dF, sF0, tol, max_iter):
    """Alternate the two coupled stationarity equations.

    Returns ``(sB, sF, iterations, res_a, res_b, converged, degenerate)``.
    """
    w1B = _herm(_tr_f(w1, dB, dF))
    w1F = _herm(_tr_b(w1, dB, dF))
    sF = sF0.astype(complex)
    sB = np.zeros((dB, dB), complex)
    degenerate = False
    res_a = res_b = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        wb = tilde_b(w0, sF, dB, dF)
        sB, dg1, _ = anticomm(wb, w1B, tol)
        wf = tilde_f(w0, sB, dB, dF)
        sF, dg2, res_b = anticomm(wf, w1F, tol)
        degenerate = dg1 or dg2
        wb = tilde_b(w0, sF, dB, dF)
        res_a = float(np.linalg.norm(wb @ sB + sB @ wb - 2.0 * w1B))
        if res_a <= tol and res_b <= tol:
            sB, sF = _gauge(sB, sF, dF)
            return sB, sF, it, res_a, res_b, True, degenerate
    sB, sF = _gauge(sB, sF, dF)
    return sB, sF, it, res_a, res_b, False, degenerate


def exact_alternating(w0, w1, m2, dB, dF, sF0, tol, max_iter):
    """Block-coordinate descent on the product-estimator cost.

    Returns ``(sB, sF, iterations, cost, converged, max_increase, degenerate)``
    where ``max_increase`` is the largest cost rise seen over any half-step.
    """
    sF = sF0.astype(complex)
    eyeB = np.eye(dB)
    eyeF = np.eye(dF)
    prev = np.inf
    max_inc = 0.0
    degenerate = False
    cost = np.inf
    sB = np.zeros((dB, dB), complex)
    it = 0
    for it in range(1, max_iter + 1):
        m = _herm(_tr_f(w0 @ np.kron(eyeB, sF @ sF), dB, dF))
        n = _herm(_tr_f(w1 @ np.kron(eyeB, sF), dB, dF))
        sB, dg1, _ = anticomm(m, n, tol)
        c_half = product_cost(sB, sF, w0, w1, m2)
        m = _herm(_tr_b(w0 @ np.kron(sB @ sB, eyeF), dB, dF))
        n = _herm(_tr_b(w1 @ np.kron(sB, eyeF), dB, dF))
        sF, dg2, _ = anticomm(m, n, tol)
        cost = product_cost(sB, sF, w0, w1, m2)
        degenerate = degenerate or dg1 or dg2
        if np.isfinite(prev):
            max_inc = max(max_inc, c_half - prev)
        max_inc = max(max_inc, cost - c_half)
        sB, sF = _gauge(sB, sF, dF)
        if it > 1 and prev - cost <= tol * max(abs(prev), 1e-300):
            return sB, sF, it, cost, True, max_inc, degenerate
        prev = cost
    return sB, sF, it, cost, False, max_inc, degenerate


def search_1a(w0, w1, m2, dB, dF, candidates, tol):
    """Solve the B-side stationarity equation for each candidate ``sF``.

    Returns ``(best_index, sB, cost, skipped)``; ``best_index`` is -1 when
    every candidate was skipped.  Ties keep the earliest candidate.
    """
    w1B = _herm(_tr_f(w1, dB, dF))
    best, best_cost, best_sB, skipped = -1, np.inf, None, 0
    for k, sF in enumerate(candidates):
        try:
            sB, _, _ = anticomm(tilde_b(w0, sF, dB, dF), w1B, tol)
        except InconsistentSystemError:
            skipped += 1
            continue
        c = product_cost(sB, sF, w0, w1, m2)
        if not np.isfinite(c):
            skipped += 1
            continue
        if c < best_cost:
            best, best_cost, best_sB = k, c, sB
    return best, best_sB, best_cost, skipped
