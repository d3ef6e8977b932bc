# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

Mirrors ``_pykernels`` call for call.  Small dense complex matrices are
handled as row-major ``double complex`` buffers; the Hermitian
eigenproblem is solved by cyclic complex Jacobi rotations, which is exact
in one rotation for 2x2 blocks and cheap for the 4x4 joint operators.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY, isfinite
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memset

from .matlin import InconsistentSystemError

cnp.import_array()

NAME = "cython"

ctypedef double complex cplx

cdef enum:
    OK = 0
    INCONSISTENT = 1
    NO_CONVERGENCE = 2


cdef inline double cabs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline double cabs_(cplx z) noexcept nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef inline cplx conj_(cplx z) noexcept nogil:
    return z.conjugate()


# ------------------------------------------------------------------ algebra

cdef void matmul(const cplx* a, const cplx* b, cplx* out, int n) noexcept nogil:
    cdef int i, j, k
    cdef cplx acc
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = acc + a[i * n + k] * b[k * n + j]
            out[i * n + j] = acc


cdef void hermitize(cplx* a, int n) noexcept nogil:
    cdef int i, j
    cdef cplx z
    for i in range(n):
        a[i * n + i] = a[i * n + i].real
        for j in range(i + 1, n):
            z = 0.5 * (a[i * n + j] + conj_(a[j * n + i]))
            a[i * n + j] = z
            a[j * n + i] = conj_(z)


cdef double fro(const cplx* a, int n) noexcept nogil:
    cdef int i
    cdef double s = 0.0
    for i in range(n * n):
        s += cabs2(a[i])
    return sqrt(s)


cdef double tr_prod_re(const cplx* a, const cplx* b, int n) noexcept nogil:
    # Re Tr(a b)
    cdef int i, k
    cdef double s = 0.0
    for i in range(n):
        for k in range(n):
            s += (a[i * n + k] * b[k * n + i]).real
    return s


cdef int jacobi_eigh(cplx* a, double* w, cplx* v, int n) noexcept nogil:
    """Diagonalise Hermitian ``a`` in place; ``v`` receives eigenvectors (columns).

    Eigenvalues ascend and each eigenvector has its first non-negligible
    component real positive.
    """
    cdef int p, q, k, sweep, i, j, best
    cdef double off, total, apq_abs, tau, t, c, s, app, aqq, tmpd
    cdef cplx apq, ph, akp, akq, z
    memset(v, 0, n * n * sizeof(cplx))
    for i in range(n):
        v[i * n + i] = 1.0
    total = fro(a, n)
    if total == 0.0:
        for i in range(n):
            w[i] = 0.0
        return OK
    for sweep in range(100):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += cabs2(a[p * n + q])
        if sqrt(off) <= 1e-17 * total:
            break
        for p in range(n):
            for q in range(p + 1, n):
                apq = a[p * n + q]
                apq_abs = cabs_(apq)
                if apq_abs <= 1e-300:
                    continue
                ph = apq / apq_abs          # e^{i alpha}
                app = a[p * n + p].real
                aqq = a[q * n + q].real
                tau = (aqq - app) / (2.0 * apq_abs)
                if tau >= 0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                # a <- a G, G = [[c, s], [-s e^{-ia}, c e^{-ia}]] on (p, q)
                for k in range(n):
                    akp = a[k * n + p]
                    akq = a[k * n + q]
                    a[k * n + p] = c * akp - s * conj_(ph) * akq
                    a[k * n + q] = s * akp + c * conj_(ph) * akq
                    akp = v[k * n + p]
                    akq = v[k * n + q]
                    v[k * n + p] = c * akp - s * conj_(ph) * akq
                    v[k * n + q] = s * akp + c * conj_(ph) * akq
                # a <- G^H a
                for k in range(n):
                    akp = a[p * n + k]
                    akq = a[q * n + k]
                    a[p * n + k] = c * akp - s * ph * akq
                    a[q * n + k] = s * akp + c * ph * akq
                a[p * n + q] = 0
                a[q * n + p] = 0
    for i in range(n):
        w[i] = a[i * n + i].real
    # selection sort, ascending; stable for ties
    for i in range(n):
        best = i
        for j in range(i + 1, n):
            if w[j] < w[best]:
                best = j
        if best != i:
            tmpd = w[i]; w[i] = w[best]; w[best] = tmpd
            for k in range(n):
                z = v[k * n + i]; v[k * n + i] = v[k * n + best]; v[k * n + best] = z
    for j in range(n):
        for k in range(n):
            if cabs_(v[k * n + j]) > 1e-12:
                ph = conj_(v[k * n + j]) / cabs_(v[k * n + j])
                for i in range(n):
                    v[i * n + j] = v[i * n + j] * ph
                break
    return OK


cdef struct Work:
    int n
    double* w
    cplx* a
    cplx* q
    cplx* t1
    cplx* t2


cdef int work_init(Work* wk, int n) noexcept nogil:
    wk.n = n
    wk.w = <double*> malloc(n * sizeof(double))
    wk.a = <cplx*> malloc(n * n * sizeof(cplx))
    wk.q = <cplx*> malloc(n * n * sizeof(cplx))
    wk.t1 = <cplx*> malloc(n * n * sizeof(cplx))
    wk.t2 = <cplx*> malloc(n * n * sizeof(cplx))
    if wk.w == NULL or wk.a == NULL or wk.q == NULL or wk.t1 == NULL or wk.t2 == NULL:
        return 1
    return 0


cdef void work_free(Work* wk) noexcept nogil:
    free(wk.w); free(wk.a); free(wk.q); free(wk.t1); free(wk.t2)


cdef int anticomm_c(const cplx* a, const cplx* b, cplx* x, int n, double tol,
                    Work* wk, bint* degenerate, double* residual) noexcept nogil:
    """Solve a x + x a = 2 b; minimum-norm on null pairs."""
    cdef int i, j, k
    cdef double scale = 0.0, d, bnorm, thr
    cdef cplx acc
    memcpy(wk.a, a, n * n * sizeof(cplx))
    jacobi_eigh(wk.a, wk.w, wk.q, n)
    for i in range(n):
        if fabs(wk.w[i]) > scale:
            scale = fabs(wk.w[i])
    # t1 = b q
    matmul(b, wk.q, wk.t1, n)
    # t2 = q^H t1  (b in the eigenbasis)
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = acc + conj_(wk.q[k * n + i]) * wk.t1[k * n + j]
            wk.t2[i * n + j] = acc
    degenerate[0] = False
    bnorm = fro(b, n)
    thr = 100.0 * tol * (bnorm if bnorm > 1e-300 else 1e-300)
    for i in range(n):
        for j in range(n):
            d = wk.w[i] + wk.w[j]
            if fabs(d) <= tol * scale:
                degenerate[0] = True
                if cabs_(wk.t2[i * n + j]) > thr:
                    return INCONSISTENT
                wk.t2[i * n + j] = 0
            else:
                wk.t2[i * n + j] = 2.0 * wk.t2[i * n + j] / d
    # x = q t2 q^H
    matmul(wk.q, wk.t2, wk.t1, n)
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = acc + wk.t1[i * n + k] * conj_(wk.q[j * n + k])
            x[i * n + j] = acc
    hermitize(x, n)
    # residual
    matmul(a, x, wk.t1, n)
    matmul(x, a, wk.t2, n)
    d = 0.0
    for i in range(n * n):
        d += cabs2(wk.t1[i] + wk.t2[i] - 2.0 * b[i])
    residual[0] = sqrt(d)
    return OK


# ------------------------------------------------------------ partial traces

cdef void tr_f_right(const cplx* m, const cplx* s, cplx* out, int dB, int dF) noexcept nogil:
    """out = Tr_F[m (I_B (x) s)]."""
    cdef int N = dB * dF, i, k, j, l
    cdef cplx acc
    for i in range(dB):
        for k in range(dB):
            acc = 0
            for j in range(dF):
                for l in range(dF):
                    acc = acc + m[(i * dF + j) * N + k * dF + l] * s[l * dF + j]
            out[i * dB + k] = acc


cdef void tr_b_right(const cplx* m, const cplx* s, cplx* out, int dB, int dF) noexcept nogil:
    """out = Tr_B[m (s (x) I_F)]."""
    cdef int N = dB * dF, i, k, j, l
    cdef cplx acc
    for j in range(dF):
        for l in range(dF):
            acc = 0
            for i in range(dB):
                for k in range(dB):
                    acc = acc + m[(i * dF + j) * N + k * dF + l] * s[k * dB + i]
            out[j * dF + l] = acc


cdef double prod_cost_c(const cplx* sB, const cplx* sF, const cplx* w0, const cplx* w1,
                        double m2, int dB, int dF, cplx* sq_b, cplx* sq_f, cplx* tmp_b) noexcept nogil:
    matmul(sB, sB, sq_b, dB)
    matmul(sF, sF, sq_f, dF)
    tr_f_right(w0, sq_f, tmp_b, dB, dF)
    cdef double quad = tr_prod_re(tmp_b, sq_b, dB)
    tr_f_right(w1, sF, tmp_b, dB, dF)
    cdef double lin = tr_prod_re(tmp_b, sB, dB)
    return quad - 2.0 * lin + m2


cdef void gauge_c(cplx* sB, cplx* sF, int dB, int dF) noexcept nogil:
    cdef double nrm = fro(sF, dF), c, tr = 0.0
    cdef int i
    if nrm == 0.0:
        return
    for i in range(dF):
        tr += sF[i * dF + i].real
    c = sqrt(<double> dF) / nrm
    if tr < 0:
        c = -c
    for i in range(dF * dF):
        sF[i] = sF[i] * c
    for i in range(dB * dB):
        sB[i] = sB[i] / c


# ------------------------------------------------------------ python surface

cdef cnp.ndarray _as_c(x):
    return np.ascontiguousarray(x, dtype=np.complex128)


cdef inline cplx* _ptr(cnp.ndarray a):
    return <cplx*> cnp.PyArray_DATA(a)


def herm_eigh(a):
    cdef cnp.ndarray m = np.array(a, dtype=np.complex128, order="C", copy=True)
    cdef int n = m.shape[0]
    cdef cnp.ndarray w = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray v = np.empty((n, n), dtype=np.complex128)
    jacobi_eigh(_ptr(m), <double*> cnp.PyArray_DATA(w), _ptr(v), n)
    return w, v


def anticomm(a, b, double tol):
    cdef cnp.ndarray aa = _as_c(a), bb = _as_c(b)
    cdef int n = aa.shape[0]
    cdef cnp.ndarray x = np.empty((n, n), dtype=np.complex128)
    cdef Work wk
    cdef bint deg = False
    cdef double res = 0.0
    cdef int st
    if work_init(&wk, n):
        work_free(&wk)
        raise MemoryError()
    st = anticomm_c(_ptr(aa), _ptr(bb), _ptr(x), n, tol, &wk, &deg, &res)
    work_free(&wk)
    if st == INCONSISTENT:
        raise InconsistentSystemError("no solution: b has weight on a null pair of a")
    return x, bool(deg), res


def tilde_b(w0, sF, int dB, int dF):
    cdef cnp.ndarray m = _as_c(w0), s = _as_c(sF)
    cdef cnp.ndarray out = np.empty((dB, dB), dtype=np.complex128)
    tr_f_right(_ptr(m), _ptr(s), _ptr(out), dB, dF)
    hermitize(_ptr(out), dB)
    return out


def tilde_f(w0, sB, int dB, int dF):
    cdef cnp.ndarray m = _as_c(w0), s = _as_c(sB)
    cdef cnp.ndarray out = np.empty((dF, dF), dtype=np.complex128)
    tr_b_right(_ptr(m), _ptr(s), _ptr(out), dB, dF)
    hermitize(_ptr(out), dF)
    return out


def product_cost(sB, sF, w0, w1, double m2):
    cdef cnp.ndarray b = _as_c(sB), f = _as_c(sF), a0 = _as_c(w0), a1 = _as_c(w1)
    cdef int dB = b.shape[0], dF = f.shape[0]
    cdef cnp.ndarray t1 = np.empty((dB, dB), np.complex128)
    cdef cnp.ndarray t2 = np.empty((dF, dF), np.complex128)
    cdef cnp.ndarray t3 = np.empty((dB, dB), np.complex128)
    return prod_cost_c(_ptr(b), _ptr(f), _ptr(a0), _ptr(a1), m2, dB, dF,
                       _ptr(t1), _ptr(t2), _ptr(t3))


cdef class _Buffers:
    """Per-call scratch: a workspace per factor plus named matrices."""
    cdef Work wb, wf
    cdef cnp.ndarray sB, sF, mB, nB, mF, nF, sqB, sqF, tB, w1B, w1F

    def __cinit__(self, int dB, int dF):
        if work_init(&self.wb, dB) or work_init(&self.wf, dF):
            raise MemoryError()
        self.sB = np.zeros((dB, dB), np.complex128)
        self.sF = np.zeros((dF, dF), np.complex128)
        self.mB = np.zeros((dB, dB), np.complex128)
        self.nB = np.zeros((dB, dB), np.complex128)
        self.mF = np.zeros((dF, dF), np.complex128)
        self.nF = np.zeros((dF, dF), np.complex128)
        self.sqB = np.zeros((dB, dB), np.complex128)
        self.sqF = np.zeros((dF, dF), np.complex128)
        self.tB = np.zeros((dB, dB), np.complex128)
        self.w1B = np.zeros((dB, dB), np.complex128)
        self.w1F = np.zeros((dF, dF), np.complex128)

    def __dealloc__(self):
        work_free(&self.wb)
        work_free(&self.wf)


cdef void _eye(cplx* a, int n) noexcept nogil:
    memset(a, 0, n * n * sizeof(cplx))
    cdef int i
    for i in range(n):
        a[i * n + i] = 1.0


def fixed_point(w0, w1, int dB, int dF, sF0, double tol, int max_iter):
    cdef cnp.ndarray a0 = _as_c(w0), a1 = _as_c(w1)
    cdef _Buffers bf = _Buffers(dB, dF)
    cdef cplx* W0 = _ptr(a0)
    cdef cplx* W1 = _ptr(a1)
    cdef cplx* sB = _ptr(bf.sB)
    cdef cplx* sF = _ptr(bf.sF)
    cdef cplx* mB = _ptr(bf.mB)
    cdef cplx* mF = _ptr(bf.mF)
    cdef cplx* w1B = _ptr(bf.w1B)
    cdef cplx* w1F = _ptr(bf.w1F)
    cdef cplx* tB = _ptr(bf.tB)
    cdef cplx* eB = _ptr(bf.sqB)
    cdef cplx* eF = _ptr(bf.sqF)
    cdef int it = 0, st = OK, i
    cdef bint d1 = False, d2 = False, deg = False, conv = False
    cdef double res_a = INFINITY, res_b = INFINITY, r, acc
    cdef cnp.ndarray init = _as_c(sF0)
    memcpy(sF, _ptr(init), dF * dF * sizeof(cplx))
    with nogil:
        _eye(eB, dB)
        _eye(eF, dF)
        tr_f_right(W1, eF, w1B, dB, dF)
        hermitize(w1B, dB)
        tr_b_right(W1, eB, w1F, dB, dF)
        hermitize(w1F, dF)
        while it < max_iter:
            it += 1
            tr_f_right(W0, sF, mB, dB, dF)
            hermitize(mB, dB)
            st = anticomm_c(mB, w1B, sB, dB, tol, &bf.wb, &d1, &r)
            if st != OK:
                break
            tr_b_right(W0, sB, mF, dB, dF)
            hermitize(mF, dF)
            st = anticomm_c(mF, w1F, sF, dF, tol, &bf.wf, &d2, &res_b)
            if st != OK:
                break
            deg = d1 or d2
            tr_f_right(W0, sF, mB, dB, dF)
            hermitize(mB, dB)
            matmul(mB, sB, tB, dB)
            acc = 0.0
            for i in range(dB * dB):
                acc += cabs2(tB[i] + conj_(tB[(i % dB) * dB + i // dB]) - 2.0 * w1B[i])
            res_a = sqrt(acc)
            if res_a <= tol and res_b <= tol:
                conv = True
                break
        if st == OK:
            gauge_c(sB, sF, dB, dF)
    if st == INCONSISTENT:
        raise InconsistentSystemError("fixed point step hit an inconsistent null pair")
    return bf.sB.copy(), bf.sF.copy(), it, res_a, res_b, bool(conv), bool(deg)


def exact_alternating(w0, w1, double m2, int dB, int dF, sF0, double tol, int max_iter):
    cdef cnp.ndarray a0 = _as_c(w0), a1 = _as_c(w1)
    cdef _Buffers bf = _Buffers(dB, dF)
    cdef cplx* W0 = _ptr(a0)
    cdef cplx* W1 = _ptr(a1)
    cdef cplx* sB = _ptr(bf.sB)
    cdef cplx* sF = _ptr(bf.sF)
    cdef cplx* mB = _ptr(bf.mB)
    cdef cplx* nB = _ptr(bf.nB)
    cdef cplx* mF = _ptr(bf.mF)
    cdef cplx* nF = _ptr(bf.nF)
    cdef cplx* sqB = _ptr(bf.sqB)
    cdef cplx* sqF = _ptr(bf.sqF)
    cdef int it = 0, st = OK
    cdef bint d1 = False, d2 = False, deg = False, conv = False
    cdef double prev = INFINITY, cost = INFINITY, c_half, r, max_inc = 0.0
    cdef cnp.ndarray init = _as_c(sF0)
    memcpy(sF, _ptr(init), dF * dF * sizeof(cplx))
    with nogil:
        while it < max_iter:
            it += 1
            matmul(sF, sF, sqF, dF)
            tr_f_right(W0, sqF, mB, dB, dF)
            hermitize(mB, dB)
            tr_f_right(W1, sF, nB, dB, dF)
            hermitize(nB, dB)
            st = anticomm_c(mB, nB, sB, dB, tol, &bf.wb, &d1, &r)
            if st != OK:
                break
            matmul(sB, sB, sqB, dB)
            c_half = tr_prod_re(mB, sqB, dB) - 2.0 * tr_prod_re(nB, sB, dB) + m2
            tr_b_right(W0, sqB, mF, dB, dF)
            hermitize(mF, dF)
            tr_b_right(W1, sB, nF, dB, dF)
            hermitize(nF, dF)
            st = anticomm_c(mF, nF, sF, dF, tol, &bf.wf, &d2, &r)
            if st != OK:
                break
            matmul(sF, sF, sqF, dF)
            cost = tr_prod_re(mF, sqF, dF) - 2.0 * tr_prod_re(nF, sF, dF) + m2
            deg = deg or d1 or d2
            if isfinite(prev) and c_half - prev > max_inc:
                max_inc = c_half - prev
            if cost - c_half > max_inc:
                max_inc = cost - c_half
            gauge_c(sB, sF, dB, dF)
            if it > 1 and prev - cost <= tol * (fabs(prev) if fabs(prev) > 1e-300 else 1e-300):
                conv = True
                break
            prev = cost
    if st == INCONSISTENT:
        raise InconsistentSystemError("alternating step hit an inconsistent null pair")
    return bf.sB.copy(), bf.sF.copy(), it, cost, bool(conv), max_inc, bool(deg)


def search_1a(w0, w1, double m2, int dB, int dF, candidates, double tol):
    cdef cnp.ndarray a0 = _as_c(w0), a1 = _as_c(w1)
    cdef cnp.ndarray cands = np.ascontiguousarray(candidates, dtype=np.complex128)
    cdef _Buffers bf = _Buffers(dB, dF)
    cdef cplx* W0 = _ptr(a0)
    cdef cplx* W1 = _ptr(a1)
    cdef cplx* C = _ptr(cands)
    cdef cplx* sB = _ptr(bf.sB)
    cdef cplx* mB = _ptr(bf.mB)
    cdef cplx* w1B = _ptr(bf.w1B)
    cdef cplx* eF = _ptr(bf.sqF)
    cdef int k, K = cands.shape[0], best = -1, skipped = 0, st
    cdef bint deg
    cdef double r, c, best_cost = INFINITY
    cdef cnp.ndarray best_sB = np.zeros((dB, dB), np.complex128)
    cdef cplx* best_p = _ptr(best_sB)
    cdef cplx* sq1 = _ptr(bf.sqB)
    cdef cplx* sq2 = _ptr(bf.mF)
    cdef cplx* tmp = _ptr(bf.tB)
    with nogil:
        _eye(eF, dF)
        tr_f_right(W1, eF, w1B, dB, dF)
        hermitize(w1B, dB)
        for k in range(K):
            tr_f_right(W0, C + k * dF * dF, mB, dB, dF)
            hermitize(mB, dB)
            st = anticomm_c(mB, w1B, sB, dB, tol, &bf.wb, &deg, &r)
            if st != OK:
                skipped += 1
                continue
            c = prod_cost_c(sB, C + k * dF * dF, W0, W1, m2, dB, dF, sq1, sq2, tmp)
            if not isfinite(c):
                skipped += 1
                continue
            if c < best_cost:
                best_cost = c
                best = k
                memcpy(best_p, sB, dB * dB * sizeof(cplx))
    if best < 0:
        return -1, None, INFINITY, skipped
    return best, best_sB, best_cost, skipped
