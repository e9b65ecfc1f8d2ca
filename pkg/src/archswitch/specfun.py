"""Special functions used by the closed-form switching laws.

Incomplete elliptic integral of the first kind (Carlson's symmetric form
with periodic extension in the amplitude) and Airy functions Ai, Bi with
their derivatives on the real line.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import OverflowGuard, ValidationError

__all__ = [
    "carlson_rf",
    "elliptic_K",
    "elliptic_F",
    "AiryPair",
    "airy",
    "airy_first_negative_zero",
    "airy_ai_log_derivative",
    "AIRY_SERIES_LIMIT",
]

# |z| at which the Airy evaluation switches from the power series to the
# asymptotic expansions.  Below ~7.5 the asymptotic series cannot reach 1e-10.
AIRY_SERIES_LIMIT = 8.0
_AIRY_RANGE = 50.0

_DIGITS = 40
# Ai(0) and -Ai'(0) to 45 digits.
_AI0 = Decimal("0.355028053887817239260063186004183176397979174")
_AIP0 = Decimal("0.258819403792806798405183560189203963479091138")

_SQRT_PI = math.sqrt(math.pi)


def carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson's symmetric integral R_F(x, y, z) for nonnegative arguments.

    At most one argument may be zero.  Duplication iteration with the
    fifth-order series; relative error below ~1e-16.
    """
    if min(x, y, z) < 0.0 or (x == 0.0) + (y == 0.0) + (z == 0.0) > 1:
        raise ValidationError("carlson_rf needs nonnegative arguments, at most one zero")
    A0 = (x + y + z) / 3.0
    Am = A0
    q = 3.0e-16 ** (-1.0 / 6.0) * max(abs(A0 - x), abs(A0 - y), abs(A0 - z))
    xm, ym, zm = x, y, z
    pow4 = 1.0
    while pow4 * q >= abs(Am):
        sx, sy, sz = math.sqrt(xm), math.sqrt(ym), math.sqrt(zm)
        lam = sx * sy + sy * sz + sz * sx
        xm = 0.25 * (xm + lam)
        ym = 0.25 * (ym + lam)
        zm = 0.25 * (zm + lam)
        Am = 0.25 * (Am + lam)
        pow4 *= 0.25
    X = (A0 - x) * pow4 / Am
    Y = (A0 - y) * pow4 / Am
    Z = -(X + Y)
    E2 = X * Y - Z * Z
    E3 = X * Y * Z
    return (1.0 - E2 / 10.0 + E3 / 14.0 + E2 * E2 / 24.0 - 3.0 * E2 * E3 / 44.0) / math.sqrt(Am)


def _check_modulus(k: float) -> float:
    k = float(k)
    if not (0.0 <= k < 1.0):
        raise ValidationError(f"elliptic modulus must satisfy 0 <= k < 1, got {k!r}")
    return k


def elliptic_K(k: float) -> float:
    """Complete integral K(k) = F(pi/2, k)."""
    k = _check_modulus(k)
    return carlson_rf(0.0, 1.0 - k * k, 1.0)


def _elliptic_F_scalar(phi: float, k: float) -> float:
    if not math.isfinite(phi):
        raise ValidationError("elliptic amplitude must be finite")
    n = math.floor(phi / math.pi + 0.5)
    r = phi - n * math.pi
    s = math.sin(r)
    c = math.cos(r)
    base = s * carlson_rf(c * c, 1.0 - k * k * s * s, 1.0) if s != 0.0 else 0.0
    if n == 0:
        return base
    return 2.0 * n * carlson_rf(0.0, 1.0 - k * k, 1.0) + base


def elliptic_F(phi, k: float):
    """Incomplete elliptic integral of the first kind, Legendre form.

    ``F(phi, k) = int_0^phi dtheta / sqrt(1 - k^2 sin^2 theta)``; amplitudes
    outside [-pi/2, pi/2] use ``F(phi + n pi, k) = F(phi, k) + 2 n K(k)``.
    Accepts scalar or array ``phi``.
    """
    k = _check_modulus(k)
    if np.ndim(phi) == 0:
        return _elliptic_F_scalar(float(phi), k)
    arr = np.asarray(phi, dtype=float)
    return np.array([_elliptic_F_scalar(p, k) for p in arr.ravel()]).reshape(arr.shape)


class AiryPair(NamedTuple):
    ai: float
    bi: float
    aip: float
    bip: float


def _airy_series(z: float) -> AiryPair:
    # Maclaurin series of the two standard solutions, summed in 40-digit
    # decimal arithmetic: for |z| near 8 the terms are ~1e6 times the result.
    with localcontext() as ctx:
        ctx.prec = _DIGITS + 5
        zd = Decimal(z)
        z3 = zd * zd * zd
        eps = Decimal(10) ** (-_DIGITS)
        # f = sum c_{3k} z^{3k}, g = sum c_{3k+1} z^{3k+1}
        f = Decimal(1)
        fp = Decimal(0)
        g = zd
        gp = Decimal(1)
        tf = Decimal(1)  # c_{3k} z^{3k}
        tg = zd  # c_{3k+1} z^{3k+1}
        k = 0
        while True:
            k += 1
            n = 3 * k
            tf = tf * z3 / (n * (n - 1))
            tg = tg * z3 / ((n + 1) * n)
            f += tf
            g += tg
            # derivatives: d/dz of c z^n = n c z^(n-1)
            if zd != 0:
                fp += n * tf / zd
                gp += (n + 1) * tg / zd
            if abs(tf) + abs(tg) < eps * (1 + abs(f) + abs(g)) and k > 2:
                break
        sqrt3 = Decimal(3).sqrt()
        ai = _AI0 * f - _AIP0 * g
        aip = _AI0 * fp - _AIP0 * gp
        bi = sqrt3 * (_AI0 * f + _AIP0 * g)
        bip = sqrt3 * (_AI0 * fp + _AIP0 * gp)
        return AiryPair(float(ai), float(bi), float(aip), float(bip))


def _asymptotic_coeffs(zeta: float):
    """Terms u_k / zeta^k and v_k / zeta^k up to the smallest term."""
    us = [1.0]
    vs = [1.0]
    u = 1.0
    k = 0
    while True:
        k += 1
        u_next = u * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k) / zeta
        if abs(u_next) > abs(u) or abs(u_next) < 1e-18:
            break
        u = u_next
        us.append(u)
        vs.append(-(6 * k + 1) / (6 * k - 1) * u)
    return us, vs


def _airy_asymptotic(z: float) -> AiryPair:
    if z > 0.0:
        zeta = 2.0 / 3.0 * z**1.5
        us, vs = _asymptotic_coeffs(zeta)
        alt = [(-1) ** k for k in range(len(us))]
        su_alt = math.fsum(s * u for s, u in zip(alt, us))
        sv_alt = math.fsum(s * v for s, v in zip(alt, vs))
        su = math.fsum(us)
        sv = math.fsum(vs)
        z14 = z**0.25
        em = math.exp(-zeta)
        ep = math.exp(zeta)
        ai = em / (2.0 * _SQRT_PI * z14) * su_alt
        aip = -z14 * em / (2.0 * _SQRT_PI) * sv_alt
        bi = ep / (_SQRT_PI * z14) * su
        bip = z14 * ep / _SQRT_PI * sv
        return AiryPair(ai, bi, aip, bip)
    x = -z
    zeta = 2.0 / 3.0 * x**1.5
    us, vs = _asymptotic_coeffs(zeta)
    # even/odd parts with alternating signs
    pu = math.fsum(((-1) ** (k // 2)) * u for k, u in enumerate(us) if k % 2 == 0)
    qu = math.fsum(((-1) ** (k // 2)) * u for k, u in enumerate(us) if k % 2 == 1)
    pv = math.fsum(((-1) ** (k // 2)) * v for k, v in enumerate(vs) if k % 2 == 0)
    qv = math.fsum(((-1) ** (k // 2)) * v for k, v in enumerate(vs) if k % 2 == 1)
    th = zeta - math.pi / 4.0
    c, s = math.cos(th), math.sin(th)
    x14 = x**0.25
    ai = (c * pu + s * qu) / (_SQRT_PI * x14)
    bi = (-s * pu + c * qu) / (_SQRT_PI * x14)
    aip = x14 * (s * pv - c * qv) / _SQRT_PI
    bip = x14 * (c * pv + s * qv) / _SQRT_PI
    return AiryPair(ai, bi, aip, bip)


def airy(z: float) -> AiryPair:
    """Ai, Bi, Ai', Bi' at a real argument ``|z| <= 50``."""
    z = float(z)
    if not math.isfinite(z) or abs(z) > _AIRY_RANGE:
        raise OverflowGuard(f"airy argument {z!r} outside [-{_AIRY_RANGE}, {_AIRY_RANGE}]")
    if abs(z) <= AIRY_SERIES_LIMIT:
        return _airy_series(z)
    return _airy_asymptotic(z)


@lru_cache(maxsize=None)
def airy_first_negative_zero() -> float:
    """Smallest ``z* > 0`` with ``Ai(-z*) = 0`` (about 2.33810741)."""
    lo, hi = 2.0, 3.0
    f_lo = airy(-lo).ai
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        f_mid = airy(-mid).ai
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    z = 0.5 * (lo + hi)
    for _ in range(20):
        p = airy(-z)
        # d/dz Ai(-z) = -Ai'(-z)
        step = p.ai / (-p.aip)
        z -= step
        if abs(step) < 1e-15 * z:
            break
    return z


def airy_ai_log_derivative(x: float) -> float:
    """``Ai'(x) / Ai(x)`` for real ``x`` below the first negative zero's image.

    For ``x > AIRY_SERIES_LIMIT`` the ratio of the asymptotic sums is used
    directly, so arbitrarily large ``x`` does not underflow.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError("argument must be finite")
    if x <= AIRY_SERIES_LIMIT:
        p = airy(x)
        return p.aip / p.ai
    zeta = 2.0 / 3.0 * x**1.5
    us, vs = _asymptotic_coeffs(zeta)
    su = math.fsum(((-1) ** k) * u for k, u in enumerate(us))
    sv = math.fsum(((-1) ** k) * v for k, v in enumerate(vs))
    return -math.sqrt(x) * sv / su
