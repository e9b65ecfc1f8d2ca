"""Closed-form switching times and reduced trajectories near the fold.

All laws concern the scalar normal form ``y'' + c y' = e(tau) + K y^2``
(``y'' `` dropped in the damped limit, ``c y'`` dropped in the undamped
one), where ``e`` is either a constant perturbation ``eps`` or a ramp
``nu * taubar`` measured from the moment the load crosses the fold.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ValidationError
from .model import LoadProgram, NondimArch
from .specfun import airy, airy_ai_log_derivative, airy_first_negative_zero, elliptic_F
from .statics import CriticalPoint, critical_point

__all__ = [
    "Regime",
    "SwitchingPrediction",
    "STATIC_UNDAMPED_COEFF",
    "RAMP_UNDAMPED_COEFF",
    "boutroux_coefficient",
    "switch_time_static_damped",
    "switch_time_static_undamped",
    "switch_time_ramp_damped",
    "switch_time_ramp_undamped",
    "trajectory_static_damped",
    "trajectory_static_undamped_time_of",
    "trajectory_ramp_damped",
    "predict",
]

_SQRT_HALF = math.sqrt(0.5)

#: ``(1/sqrt 2) 3^(1/4) F(pi, 1/sqrt 2)``, about 3.4508.
STATIC_UNDAMPED_COEFF = _SQRT_HALF * 3.0**0.25 * elliptic_F(math.pi, _SQRT_HALF)

#: Delay coefficient of the undamped ramp law, kept at its published value.
RAMP_UNDAMPED_COEFF = 3.22


class Regime(str, enum.Enum):
    STATIC_DAMPED = "static-damped"
    STATIC_UNDAMPED = "static-undamped"
    RAMP_DAMPED = "ramp-damped"
    RAMP_UNDAMPED = "ramp-undamped"

    @property
    def is_ramp(self) -> bool:
        return self in (Regime.RAMP_DAMPED, Regime.RAMP_UNDAMPED)

    @property
    def is_damped(self) -> bool:
        return self in (Regime.STATIC_DAMPED, Regime.RAMP_DAMPED)

    @classmethod
    def select(cls, damped: bool, ramp: bool) -> "Regime":
        if ramp:
            return cls.RAMP_DAMPED if damped else cls.RAMP_UNDAMPED
        return cls.STATIC_DAMPED if damped else cls.STATIC_UNDAMPED


@dataclass(frozen=True)
class SwitchingPrediction:
    """Analytic switching estimate.

    For ramps, ``tau_inf = tau_c + delay`` and ``F_switch = F_c + nu * delay``.
    ``sampler`` maps time (from the fold crossing) to the reduced coordinate
    when a closed-form trajectory exists.
    """

    regime: Regime
    tau_inf: float
    delay: float | None = None
    tau_c: float | None = None
    F_switch: float | None = None
    sampler: Callable | None = field(default=None, repr=False, compare=False)

    def as_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "tau_inf": self.tau_inf,
            "delay": self.delay,
            "tau_c": self.tau_c,
            "F_switch": self.F_switch,
        }


def _positive(**kw):
    for name, v in kw.items():
        if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v) and v > 0):
            raise ValidationError(f"{name} must be positive and finite, got {v!r}")


def boutroux_coefficient(x_inf: float = STATIC_UNDAMPED_COEFF) -> float:
    """Delay coefficient implied by mapping ``X = (4/5) taubar^(5/4)`` at ``X = x_inf``."""
    return (1.25 * x_inf) ** 0.8


def switch_time_static_damped(K: float, eps: float, c: float) -> float:
    """``(pi/2) c / sqrt(K eps)``."""
    _positive(K=K, eps=eps, c=c)
    return 0.5 * math.pi * c / math.sqrt(K * eps)


def switch_time_static_undamped(K: float, eps: float) -> float:
    """``3.4508 (K eps)^(-1/4)`` with the coefficient built from ``F(pi, 1/sqrt 2)``."""
    _positive(K=K, eps=eps)
    return STATIC_UNDAMPED_COEFF * (K * eps) ** -0.25


def _ramp_prediction(regime, delay, nu, tau_c, F_c, sampler):
    tau_c = 0.0 if tau_c is None else float(tau_c)
    F_switch = None if F_c is None else F_c + nu * delay
    return SwitchingPrediction(regime, tau_c + delay, delay, tau_c, F_switch, sampler)


def switch_time_ramp_damped(
    K: float, nu: float, c: float, tau_c: float | None = 0.0, F_c: float | None = None
) -> SwitchingPrediction:
    """Pole of the pullback Riccati solution: ``delay = z* (K nu / c^2)^(-1/3)``."""
    _positive(K=K, nu=nu, c=c)
    delay = airy_first_negative_zero() * (K * nu / c**2) ** (-1.0 / 3.0)
    return _ramp_prediction(
        Regime.RAMP_DAMPED, delay, nu, tau_c, F_c, lambda t: trajectory_ramp_damped(t, K, nu, c)
    )


def switch_time_ramp_undamped(
    K: float, nu: float, tau_c: float | None = 0.0, F_c: float | None = None
) -> SwitchingPrediction:
    """``delay = 3.22 (K nu)^(-1/5)``."""
    _positive(K=K, nu=nu)
    delay = RAMP_UNDAMPED_COEFF * (K * nu) ** -0.2
    return _ramp_prediction(Regime.RAMP_UNDAMPED, delay, nu, tau_c, F_c, None)


def trajectory_static_damped(tau, K: float, eps: float, c: float):
    """``sqrt(eps/K) tan(sqrt(K eps) tau / c)`` for ``0 <= tau < tau_inf``."""
    _positive(K=K, eps=eps, c=c)
    t = np.asarray(tau, dtype=float)
    arg = math.sqrt(K * eps) / c * t
    if np.any(t < 0.0) or np.any(arg >= 0.5 * math.pi):
        raise ValidationError("trajectory evaluated outside [0, tau_inf)")
    out = math.sqrt(eps / K) * np.tan(arg)
    return float(out) if out.ndim == 0 else out


def trajectory_static_undamped_time_of(dbar, K: float, eps: float):
    """Time for the inertial normal form to reach ``dbar`` from rest at the fold."""
    _positive(K=K, eps=eps)
    d = np.asarray(dbar, dtype=float)
    if np.any(d < 0.0) or np.any(np.isnan(d)):
        raise ValidationError("displacement must be nonnegative")
    s3e = math.sqrt(3.0 * eps)
    sk = math.sqrt(K)
    with np.errstate(invalid="ignore"):
        ratio = np.where(np.isinf(d), -1.0, (s3e - sk * d) / (s3e + sk * d))
    phi = np.arccos(np.clip(ratio, -1.0, 1.0))
    out = _SQRT_HALF * (3.0 / (K * eps)) ** 0.25 * elliptic_F(phi, _SQRT_HALF)
    return float(out) if np.ndim(out) == 0 else out


def _ramp_damped_scalar(t: float, K: float, nu: float, c: float) -> float:
    s = (K * nu / c**2) ** (1.0 / 3.0)
    z = s * t
    if z >= airy_first_negative_zero():
        raise ValidationError("trajectory evaluated at or beyond the pole")
    amp = K ** (-2.0 / 3.0) * (c * nu) ** (1.0 / 3.0)
    if -z > 8.0:
        return amp * airy_ai_log_derivative(-z)
    p = airy(-z)
    return amp * p.aip / p.ai


def trajectory_ramp_damped(taubar, K: float, nu: float, c: float):
    """Pullback solution ``K^(-2/3) (c nu)^(1/3) Ai'(-z)/Ai(-z)``, ``z = (K nu/c^2)^(1/3) taubar``."""
    _positive(K=K, nu=nu, c=c)
    if np.ndim(taubar) == 0:
        return _ramp_damped_scalar(float(taubar), K, nu, c)
    arr = np.asarray(taubar, dtype=float)
    return np.array([_ramp_damped_scalar(t, K, nu, c) for t in arr.ravel()]).reshape(arr.shape)


def predict(
    arch: NondimArch,
    load: LoadProgram,
    damped: bool | None = None,
    cp: CriticalPoint | None = None,
) -> SwitchingPrediction:
    """Switching prediction for an arch and load program.

    The load perturbation is projected on the soft mode (``eps_bar = p eps``,
    ``nu_bar = p nu``).  ``damped`` defaults to ``arch.c > 0``.
    """
    cp = critical_point(arch) if cp is None else cp
    if damped is None:
        damped = arch.c > 0.0
    if damped and arch.c <= 0.0:
        raise ValidationError("damped prediction needs c > 0")
    K = cp.K
    if load.is_ramp:
        tau_c = load.critical_time(cp.F_c)
        nu_bar = cp.p * load.nu
        if damped:
            pred = switch_time_ramp_damped(K, nu_bar, arch.c, tau_c=tau_c)
        else:
            pred = switch_time_ramp_undamped(K, nu_bar, tau_c=tau_c)
        return SwitchingPrediction(
            pred.regime, pred.tau_inf, pred.delay, tau_c, cp.F_c + load.nu * pred.delay, pred.sampler
        )
    if load.epsilon <= 0.0:
        raise ValidationError("static prediction needs epsilon > 0")
    eps_bar = cp.p * load.epsilon
    if damped:
        tau = switch_time_static_damped(K, eps_bar, arch.c)
        sampler = lambda t: trajectory_static_damped(t, K, eps_bar, arch.c)  # noqa: E731
        return SwitchingPrediction(Regime.STATIC_DAMPED, tau, sampler=sampler)
    tau = switch_time_static_undamped(K, eps_bar)
    return SwitchingPrediction(Regime.STATIC_UNDAMPED, tau)
