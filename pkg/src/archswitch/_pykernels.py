"""Pure-Python Dormand-Prince 5(4) integrator for the arch systems.

Mirrors the compiled ``_kernels`` extension line for line; used when the
extension is unavailable or ``ARCHSWITCH_PURE_PYTHON=1`` is set.

System kinds
------------
0  full modal:        A' = V,  V' = -c V - 2 f(A) - (F/2) l
1  overdamped modal:  A' = -(2/c) (f(A) + (F/4) l)
2  reduced damped:    y' = (e0 + nu t + K y^2) / c
3  reduced inertial:  y' = v,  v' = e0 + nu t + K y^2 - c v

Modal params: ``[N, Q^2, c, F0, nu, a(N), M2(N), M4(N), l(N)]`` with the
load ``F = F0 + nu t``.  Reduced params: ``[K, c, e0, nu]``.
"""

from __future__ import annotations

import math

import numpy as np

STOPPED, REACHED_END, MAX_STEPS, STEP_UNDERFLOW, NON_FINITE = 0, 1, 2, 3, 4

# Dormand-Prince tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


def state_size(kind: int, params) -> int:
    if kind == 0:
        return 2 * int(params[0])
    if kind == 1:
        return int(params[0])
    if kind == 2:
        return 1
    if kind == 3:
        return 2
    raise ValueError(f"unknown system kind {kind}")


def _make_rhs(kind: int, params):
    p = [float(v) for v in params]
    if kind in (0, 1):
        n = int(p[0])
        Q2, c, F0, nu = p[1], p[2], p[3], p[4]
        a = p[5 : 5 + n]
        M2 = p[5 + n : 5 + 2 * n]
        M4 = p[5 + 2 * n : 5 + 3 * n]
        ld = p[5 + 3 * n : 5 + 4 * n]
        S0 = sum(a[i] * a[i] * M2[i] for i in range(n))
        rng = range(n)

        def forces(A):
            S = S0
            for i in rng:
                S -= A[i] * A[i] * M2[i]
            k = 1.5 * Q2 * S
            return [0.5 * (A[i] - a[i]) * M4[i] - k * A[i] * M2[i] for i in rng]

        if kind == 0:

            def rhs(t, y):
                F = F0 + nu * t
                f = forces(y[:n])
                return y[n:] + [-c * y[n + i] - 2.0 * f[i] - 0.5 * F * ld[i] for i in rng]

        else:
            g = 2.0 / c

            def rhs(t, y):
                F = F0 + nu * t
                f = forces(y)
                return [-g * (f[i] + 0.25 * F * ld[i]) for i in rng]

        return rhs
    K, c, e0, nu = p[0], p[1], p[2], p[3]
    if kind == 2:

        def rhs(t, y):
            return [(e0 + nu * t + K * y[0] * y[0]) / c]

        return rhs
    if kind == 3:

        def rhs(t, y):
            return [y[1], e0 + nu * t + K * y[0] * y[0] - c * y[1]]

        return rhs
    raise ValueError(f"unknown system kind {kind}")


def _rms(vals, sc):
    s = 0.0
    for v, w in zip(vals, sc):
        q = v / w
        s += q * q
    return math.sqrt(s / len(vals))


def _hermite(theta, h, y0, y1, f0, f1):
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + theta
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    return [h00 * a + h10 * h * da + h01 * b + h11 * h * db for a, b, da, db in zip(y0, y1, f0, f1)]


def integrate(
    kind,
    params,
    y0,
    t0,
    t_end,
    rtol,
    atol,
    h0,
    max_steps,
    stop_w,
    stop_offset,
    stop_value,
    record_stride,
    dense_after,
):
    """Adaptive Dormand-Prince integration with an optional linear stop event.

    The run stops when ``stop_w . y + stop_offset`` first reaches
    ``stop_value`` (pass an empty ``stop_w`` to disable).  Every
    ``record_stride``-th accepted step is recorded, and every step once
    ``t >= dense_after``.

    Returns ``(status, t, y, ts, ys, dys, nfev, n_accept, n_reject)``.  When
    stopped, ``t, y`` are the Hermite-interpolated crossing.
    """
    rhs = _make_rhs(kind, params)
    n = state_size(kind, params)
    y = [float(v) for v in y0]
    if len(y) != n:
        raise ValueError("initial state has the wrong size")
    w = [float(v) for v in stop_w]
    use_stop = len(w) > 0
    if use_stop and len(w) != n:
        raise ValueError("stop functional has the wrong size")
    t = float(t0)
    f0 = rhs(t, y)
    nfev = 1
    ts = [t]
    ys = [list(y)]
    dys = [list(f0)]

    def finish(status, t_out, y_out):
        return (
            status,
            t_out,
            np.array(y_out, dtype=float),
            np.array(ts),
            np.array(ys, dtype=float).reshape(len(ts), n),
            np.array(dys, dtype=float).reshape(len(ts), n),
            nfev,
            n_acc,
            n_rej,
        )

    n_acc = 0
    n_rej = 0
    if use_stop:
        s_prev = sum(a * b for a, b in zip(w, y)) + stop_offset
        if s_prev >= stop_value:
            return finish(STOPPED, t, y)
    if t_end <= t:
        return finish(REACHED_END, t, y)

    # initial step
    if h0 > 0.0:
        h = float(h0)
    else:
        sc = [atol + rtol * abs(v) for v in y]
        d0 = _rms(y, sc)
        d1 = _rms(f0, sc)
        hh = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        y1 = [a + hh * b for a, b in zip(y, f0)]
        f1 = rhs(t + hh, y1)
        nfev += 1
        d2 = _rms([a - b for a, b in zip(f1, f0)], sc) / hh
        m = max(d1, d2)
        h1 = max(1e-6, hh * 1e-3) if m <= 1e-15 else (0.01 / m) ** 0.2
        h = min(100.0 * hh, h1)
    h = min(h, t_end - t)

    k1 = f0
    rejected_last = False
    step = 0
    bad = 0
    while True:
        if n_acc + n_rej >= max_steps:
            return finish(MAX_STEPS, t, y)
        if h < 16.0 * 2.220446049250313e-16 * max(abs(t), 1.0):
            return finish(STEP_UNDERFLOW, t, y)
        last = t + h >= t_end
        if last:
            h = t_end - t
        yt = [y[i] + h * _A21 * k1[i] for i in range(n)]
        k2 = rhs(t + _C2 * h, yt)
        yt = [y[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in range(n)]
        k3 = rhs(t + _C3 * h, yt)
        yt = [y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(n)]
        k4 = rhs(t + _C4 * h, yt)
        yt = [y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i]) for i in range(n)]
        k5 = rhs(t + _C5 * h, yt)
        yt = [
            y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
            for i in range(n)
        ]
        k6 = rhs(t + h, yt)
        ynew = [
            y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
            for i in range(n)
        ]
        tnew = t + h
        k7 = rhs(tnew, ynew)
        nfev += 6
        if not all(math.isfinite(v) for v in ynew) or not all(math.isfinite(v) for v in k7):
            err = math.inf
        else:
            e = [
                h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
                for i in range(n)
            ]
            sc = [atol + rtol * max(abs(y[i]), abs(ynew[i])) for i in range(n)]
            err = _rms(e, sc)
        if err <= 1.0:
            bad = 0
            n_acc += 1
            step += 1
            if use_stop:
                s_new = sum(a * b for a, b in zip(w, ynew)) + stop_offset
                if s_new >= stop_value:
                    # root of the Hermite interpolant of the stop functional
                    sd0 = sum(a * b for a, b in zip(w, k1))
                    sd1 = sum(a * b for a, b in zip(w, k7))
                    lo, hi = 0.0, 1.0
                    for _ in range(200):
                        mid = 0.5 * (lo + hi)
                        if mid <= lo or mid >= hi:
                            break
                        sm = _hermite(mid, h, [s_prev], [s_new], [sd0], [sd1])[0]
                        if sm >= stop_value:
                            hi = mid
                        else:
                            lo = mid
                    th = hi
                    yc = _hermite(th, h, y, ynew, k1, k7)
                    dc = list(rhs(t + th * h, yc))
                    nfev += 1
                    ts.append(t + th * h)
                    ys.append(yc)
                    dys.append(dc)
                    return finish(STOPPED, t + th * h, yc)
                s_prev = s_new
            t, y, k1 = tnew, ynew, k7
            if tnew >= dense_after or step % record_stride == 0 or last:
                ts.append(t)
                ys.append(list(y))
                dys.append(list(k1))
            if last:
                return finish(REACHED_END, t, y)
            fac = 10.0 if err == 0.0 else min(10.0, max(0.2, 0.9 * err**-0.2))
            if rejected_last:
                fac = min(fac, 1.0)
            h *= fac
            rejected_last = False
        else:
            n_rej += 1
            if not math.isfinite(err):
                bad += 1
                if bad > 60:
                    return finish(NON_FINITE, t, y)
                h *= 0.2
            else:
                h *= max(0.2, 0.9 * err**-0.2)
            rejected_last = True
