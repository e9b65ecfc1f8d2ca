# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Dormand-Prince 5(4) integrator for the arch systems.

Same interface and algorithm as :mod:`archswitch._pykernels`; see there for
the system kinds and parameter layout.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, pow, isfinite
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef enum:
    STOPPED = 0
    REACHED_END = 1
    MAX_STEPS = 2
    STEP_UNDERFLOW = 3
    NON_FINITE = 4

cdef double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0, A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0, B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0


cdef struct System:
    int kind
    int n        # modes (modal kinds)
    int dim      # state size
    double Q2, c, F0, nu, S0, K, e0
    double *a
    double *M2
    double *M4
    double *ld


cdef void rhs(System *s, double t, double *y, double *out) noexcept nogil:
    cdef int i, n = s.n
    cdef double S, k, F
    if s.kind == 0 or s.kind == 1:
        S = s.S0
        for i in range(n):
            S -= y[i] * y[i] * s.M2[i]
        k = 1.5 * s.Q2 * S
        F = s.F0 + s.nu * t
        if s.kind == 0:
            for i in range(n):
                out[i] = y[n + i]
                out[n + i] = (-s.c * y[n + i]
                              - 2.0 * (0.5 * (y[i] - s.a[i]) * s.M4[i] - k * y[i] * s.M2[i])
                              - 0.5 * F * s.ld[i])
        else:
            for i in range(n):
                out[i] = -(2.0 / s.c) * (0.5 * (y[i] - s.a[i]) * s.M4[i] - k * y[i] * s.M2[i]
                                         + 0.25 * F * s.ld[i])
    elif s.kind == 2:
        out[0] = (s.e0 + s.nu * t + s.K * y[0] * y[0]) / s.c
    else:
        out[0] = y[1]
        out[1] = s.e0 + s.nu * t + s.K * y[0] * y[0] - s.c * y[1]


cdef double rms(double *v, double *sc, int n) noexcept nogil:
    cdef double acc = 0.0, q
    cdef int i
    for i in range(n):
        q = v[i] / sc[i]
        acc += q * q
    return sqrt(acc / n)


cdef class _Recorder:
    cdef public object ts, ys, dys
    cdef Py_ssize_t size, cap
    cdef int n

    def __init__(self, int n):
        self.n = n
        self.cap = 256
        self.size = 0
        self.ts = np.empty(self.cap)
        self.ys = np.empty((self.cap, n))
        self.dys = np.empty((self.cap, n))

    cdef void push(self, double t, double *y, double *dy):
        cdef Py_ssize_t i
        cdef double[::1] tv
        cdef double[:, ::1] yv, dv
        if self.size == self.cap:
            self.cap *= 2
            self.ts = np.resize(self.ts, self.cap)
            self.ys = np.resize(self.ys, (self.cap, self.n))
            self.dys = np.resize(self.dys, (self.cap, self.n))
        tv = self.ts
        yv = self.ys
        dv = self.dys
        tv[self.size] = t
        for i in range(self.n):
            yv[self.size, i] = y[i]
            dv[self.size, i] = dy[i]
        self.size += 1

    def arrays(self):
        return (self.ts[: self.size].copy(), self.ys[: self.size].copy(), self.dys[: self.size].copy())


cdef inline double herm(double th, double h, double a, double b, double da, double db) noexcept nogil:
    cdef double t2 = th * th, t3 = t2 * th
    return ((2 * t3 - 3 * t2 + 1) * a + (t3 - 2 * t2 + th) * h * da
            + (-2 * t3 + 3 * t2) * b + (t3 - t2) * h * db)


def state_size(int kind, params):
    if kind == 0:
        return 2 * int(params[0])
    if kind == 1:
        return int(params[0])
    if kind == 2:
        return 1
    if kind == 3:
        return 2
    raise ValueError(f"unknown system kind {kind}")


def integrate(int kind, params, y0, double t0, double t_end, double rtol, double atol,
              double h0, long max_steps, stop_w, double stop_offset, double stop_value,
              long record_stride, double dense_after):
    """Adaptive Dormand-Prince integration with an optional linear stop event.

    Returns ``(status, t, y, ts, ys, dys, nfev, n_accept, n_reject)``.
    """
    cdef double[::1] p = np.ascontiguousarray(params, dtype=float)
    cdef int dim = state_size(kind, params)
    cdef double[::1] y0v = np.ascontiguousarray(y0, dtype=float)
    cdef double[::1] wv = np.ascontiguousarray(stop_w, dtype=float)
    if y0v.shape[0] != dim:
        raise ValueError("initial state has the wrong size")
    cdef bint use_stop = wv.shape[0] > 0
    if use_stop and wv.shape[0] != dim:
        raise ValueError("stop functional has the wrong size")
    if record_stride < 1:
        record_stride = 1

    cdef System s
    cdef int i, n = 0
    s.kind = kind
    s.dim = dim
    s.n = 0
    s.a = NULL
    s.M2 = NULL
    s.M4 = NULL
    s.ld = NULL
    if kind == 0 or kind == 1:
        n = <int> p[0]
        s.n = n
        s.Q2 = p[1]
        s.c = p[2]
        s.F0 = p[3]
        s.nu = p[4]
        s.a = &p[5]
        s.M2 = &p[5 + n]
        s.M4 = &p[5 + 2 * n]
        s.ld = &p[5 + 3 * n]
        s.S0 = 0.0
        for i in range(n):
            s.S0 += s.a[i] * s.a[i] * s.M2[i]
    else:
        s.K = p[0]
        s.c = p[1]
        s.e0 = p[2]
        s.nu = p[3]

    cdef double *buf = <double *> malloc(12 * dim * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double *y = buf
    cdef double *yt = buf + dim
    cdef double *ynew = buf + 2 * dim
    cdef double *k1 = buf + 3 * dim
    cdef double *k2 = buf + 4 * dim
    cdef double *k3 = buf + 5 * dim
    cdef double *k4 = buf + 6 * dim
    cdef double *k5 = buf + 7 * dim
    cdef double *k6 = buf + 8 * dim
    cdef double *k7 = buf + 9 * dim
    cdef double *e = buf + 10 * dim
    cdef double *sc = buf + 11 * dim
    cdef double *tmp

    cdef _Recorder rec = _Recorder(dim)
    cdef double t = t0, h, hh, d0, d1, d2, m, h1, err, fac, tnew
    cdef double s_prev = 0.0, s_new, sd0, sd1, lo, hi, mid, sm, th
    cdef long nfev = 0, n_acc = 0, n_rej = 0, step = 0
    cdef int status = -1, bad = 0
    cdef bint rejected_last = False, last, finite
    cdef double[::1] yc = np.empty(dim)
    cdef double[::1] dc = np.empty(dim)
    cdef double t_out

    try:
        for i in range(dim):
            y[i] = y0v[i]
        rhs(&s, t, y, k1)
        nfev = 1
        rec.push(t, y, k1)
        t_out = t
        if use_stop:
            s_prev = stop_offset
            for i in range(dim):
                s_prev += wv[i] * y[i]
            if s_prev >= stop_value:
                status = STOPPED
        if status < 0 and t_end <= t:
            status = REACHED_END

        if status < 0:
            if h0 > 0.0:
                h = h0
            else:
                for i in range(dim):
                    sc[i] = atol + rtol * fabs(y[i])
                d0 = rms(y, sc, dim)
                d1 = rms(k1, sc, dim)
                if d0 < 1e-5 or d1 < 1e-5:
                    hh = 1e-6
                else:
                    hh = 0.01 * d0 / d1
                for i in range(dim):
                    yt[i] = y[i] + hh * k1[i]
                rhs(&s, t + hh, yt, k2)
                nfev += 1
                for i in range(dim):
                    e[i] = k2[i] - k1[i]
                d2 = rms(e, sc, dim) / hh
                m = d1 if d1 > d2 else d2
                if m <= 1e-15:
                    h1 = hh * 1e-3 if hh * 1e-3 > 1e-6 else 1e-6
                else:
                    h1 = pow(0.01 / m, 0.2)
                h = 100.0 * hh if 100.0 * hh < h1 else h1
            if h > t_end - t:
                h = t_end - t

        while status < 0:
            if n_acc + n_rej >= max_steps:
                status = MAX_STEPS
                break
            if h < 16.0 * 2.220446049250313e-16 * (fabs(t) if fabs(t) > 1.0 else 1.0):
                status = STEP_UNDERFLOW
                break
            last = t + h >= t_end
            if last:
                h = t_end - t
            for i in range(dim):
                yt[i] = y[i] + h * A21 * k1[i]
            rhs(&s, t + C2 * h, yt, k2)
            for i in range(dim):
                yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
            rhs(&s, t + C3 * h, yt, k3)
            for i in range(dim):
                yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            rhs(&s, t + C4 * h, yt, k4)
            for i in range(dim):
                yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            rhs(&s, t + C5 * h, yt, k5)
            for i in range(dim):
                yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
            rhs(&s, t + h, yt, k6)
            for i in range(dim):
                ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
            tnew = t + h
            rhs(&s, tnew, ynew, k7)
            nfev += 6
            finite = True
            for i in range(dim):
                if not (isfinite(ynew[i]) and isfinite(k7[i])):
                    finite = False
            if not finite:
                err = 1e300
            else:
                for i in range(dim):
                    e[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
                    sc[i] = atol + rtol * (fabs(y[i]) if fabs(y[i]) > fabs(ynew[i]) else fabs(ynew[i]))
                err = rms(e, sc, dim)
            if err <= 1.0:
                bad = 0
                n_acc += 1
                step += 1
                if use_stop:
                    s_new = stop_offset
                    sd0 = 0.0
                    sd1 = 0.0
                    for i in range(dim):
                        s_new += wv[i] * ynew[i]
                        sd0 += wv[i] * k1[i]
                        sd1 += wv[i] * k7[i]
                    if s_new >= stop_value:
                        lo = 0.0
                        hi = 1.0
                        for _ in range(200):
                            mid = 0.5 * (lo + hi)
                            if mid <= lo or mid >= hi:
                                break
                            sm = herm(mid, h, s_prev, s_new, sd0, sd1)
                            if sm >= stop_value:
                                hi = mid
                            else:
                                lo = mid
                        th = hi
                        for i in range(dim):
                            yc[i] = herm(th, h, y[i], ynew[i], k1[i], k7[i])
                        t = t + th * h
                        rhs(&s, t, &yc[0], &dc[0])
                        nfev += 1
                        for i in range(dim):
                            y[i] = yc[i]
                        rec.push(t, &yc[0], &dc[0])
                        status = STOPPED
                        break
                    s_prev = s_new
                t = tnew
                tmp = y
                y = ynew
                ynew = tmp
                tmp = k1
                k1 = k7
                k7 = tmp
                if t >= dense_after or step % record_stride == 0 or last:
                    rec.push(t, y, k1)
                if last:
                    status = REACHED_END
                    break
                if err == 0.0:
                    fac = 10.0
                else:
                    fac = 0.9 * pow(err, -0.2)
                    if fac < 0.2:
                        fac = 0.2
                    if fac > 10.0:
                        fac = 10.0
                if rejected_last and fac > 1.0:
                    fac = 1.0
                h *= fac
                rejected_last = False
            else:
                n_rej += 1
                if not finite:
                    bad += 1
                    if bad > 60:
                        status = NON_FINITE
                        break
                    h *= 0.2
                else:
                    fac = 0.9 * pow(err, -0.2)
                    h *= fac if fac > 0.2 else 0.2
                rejected_last = True

        t_out = t
        y_out = np.empty(dim)
        for i in range(dim):
            y_out[i] = y[i]
    finally:
        free(buf)
    ts, ys, dys = rec.arrays()
    return (status, t_out, y_out, ts, ys, dys, nfev, n_acc, n_rej)
