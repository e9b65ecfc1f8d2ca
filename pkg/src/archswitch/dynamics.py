"""Direct time integration of the mode equations and switching detection.

Three models are available:

* ``full``: ``A'' + c A' + 2 f(A) + (F/2) l = 0`` (first-order form);
* ``overdamped``: ``c A' = -2 f(A) - (F/2) l``;
* the scalar normal form near the fold (:func:`integrate_normal_form`).

Switching in the modal models is the first time the soft-mode coordinate
``y = -2 V1.(A - A_c)`` reaches a fraction ``threshold`` of its value on the
remote stable branch.  Because the reference switching time is the pole of
the local normal form, the remaining blow-up time of that normal form from
the crossing state is added by default (``tail_completion``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import BACKEND, kernels
from .errors import (
    IntegrationError,
    MaxTimeExceeded,
    NoSwitching,
    StepSizeUnderflow,
    ValidationError,
)
from .model import LoadProgram, NondimArch, StateVector, midpoint_displacement
from .statics import CriticalPoint, critical_point, equilibrium_at_force, remote_point

__all__ = [
    "SimulationConfig",
    "TimeSeries",
    "SwitchingEvent",
    "NormalFormRun",
    "InertiaWarning",
    "integrate_full",
    "integrate_overdamped",
    "integrate_normal_form",
    "detect_switching",
    "simulate_switching",
    "energy_series",
    "BACKEND",
]

_STOPPED, _END, _MAX_STEPS, _UNDERFLOW, _NON_FINITE = 0, 1, 2, 3, 4

_MODELS = ("full", "overdamped")
_INITIAL = ("auto", "critical", "as-fabricated", "static")
_METHODS = ("auto", "explicit", "implicit")
# explicit steps above which damped runs switch to the implicit integrator
_STIFF_STEP_BUDGET = 2_000_000


class InertiaWarning(RuntimeWarning):
    """Overdamped model used where inertia is probably not negligible."""


@dataclass(frozen=True)
class SimulationConfig:
    """Integration and detection settings.

    ``threshold`` is the switching fraction of the remote-branch distance
    (modal models); ``cutoff`` is the blow-up level for normal-form runs in
    units of the inner scale of the reduced equation.  ``method`` picks the
    explicit Dormand-Prince kernel or an implicit Radau integrator; ``auto``
    uses the implicit one for damped runs whose explicit step count would be
    stability-bound and large.
    """

    model: str = "overdamped"
    rtol: float = 1e-12
    atol: float = 1e-12
    max_time: float | None = None
    threshold: float = 0.025
    cutoff: float = 1e6
    tail_completion: bool = True
    initial: str = "auto"
    stop_at_switch: bool = True
    record_stride: int = 1
    max_steps: int = 50_000_000
    method: str = "auto"

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValidationError(f"model must be one of {_MODELS}, got {self.model!r}")
        for name in ("rtol", "atol"):
            v = getattr(self, name)
            if not (0.0 < v <= 1e-3):
                raise ValidationError(f"{name} must lie in (0, 1e-3], got {v!r}")
        if not (0.0 < self.threshold < 1.0):
            raise ValidationError("threshold must lie in (0, 1)")
        if not (self.cutoff > 0.0 and math.isfinite(self.cutoff)):
            raise ValidationError("cutoff must be positive")
        if self.initial not in _INITIAL:
            raise ValidationError(f"initial must be one of {_INITIAL}")
        if self.max_time is not None and not (self.max_time > 0.0):
            raise ValidationError("max_time must be positive")
        if self.method not in _METHODS:
            raise ValidationError(f"method must be one of {_METHODS}")
        if self.record_stride < 1 or self.max_steps < 1:
            raise ValidationError("record_stride and max_steps must be positive")

    def with_(self, **kw) -> "SimulationConfig":
        return replace(self, **kw)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Sampled trajectory of a modal model.

    ``Adot`` is the mode velocity (for the overdamped model it is the
    right-hand side, so it is still the true rate).  ``stopped`` is set when
    the run ended at the switching threshold.
    """

    tau: np.ndarray
    A: np.ndarray
    Adot: np.ndarray
    F: np.ndarray
    delta: np.ndarray
    model: str
    load: LoadProgram
    F_offset: float
    stopped: bool
    nfev: int
    arch: NondimArch = field(repr=False)

    def __len__(self) -> int:
        return len(self.tau)

    def energies(self) -> dict:
        return energy_series(self)


@dataclass(frozen=True)
class SwitchingEvent:
    """Detected switching: time, load at that time and the crossing state."""

    tau_switch: float
    F_switch: float
    A_tip: np.ndarray = field(repr=False)
    tau_cross: float
    tail: float

    def as_dict(self) -> dict:
        return {
            "tau_switch": self.tau_switch,
            "F_switch": self.F_switch,
            "tau_cross": self.tau_cross,
            "tail": self.tail,
            "A_tip": [float(v) for v in self.A_tip],
        }


@dataclass(frozen=True, eq=False)
class NormalFormRun:
    tau: np.ndarray
    y: np.ndarray
    ydot: np.ndarray
    tau_switch: float | None
    tau_cross: float | None
    level: float


# --------------------------------------------------------------------------
# helpers


def _modal_params(arch: NondimArch, c: float, F0: float, nu: float) -> np.ndarray:
    return np.concatenate(
        [[arch.N, arch.Q**2, c, F0, nu], arch.weights, arch.M2, arch.M4, arch.load]
    ).astype(float)


def _raise_for_status(status: int, t: float):
    if status == _UNDERFLOW:
        raise StepSizeUnderflow(f"step size underflow at tau={t:.6g}")
    if status == _NON_FINITE:
        raise IntegrationError(f"solution became non-finite at tau={t:.6g}")
    if status == _MAX_STEPS:
        raise IntegrationError(f"step limit reached at tau={t:.6g}")


def _default_max_time(arch, load, cp, damped_model: bool) -> float:
    from .analytic import predict

    try:
        if load.is_ramp:
            pred = predict(arch, load, damped=damped_model, cp=cp)
            return pred.tau_c + 50.0 * pred.delay + 10.0
        if load.epsilon > 0.0:
            return 50.0 * predict(arch, load, damped=damped_model, cp=cp).tau_inf + 10.0
    except ValidationError:
        pass
    return 1e3


def _initial_state(arch, load, cp, cfg) -> np.ndarray:
    policy = cfg.initial
    if policy == "auto":
        if load.hold is not None:
            return equilibrium_at_force(arch, load.hold, cp)
        policy = "as-fabricated" if load.is_ramp and load.F0 == 0.0 else (
            "static" if load.is_ramp else "critical"
        )
    if policy == "critical":
        return np.array(cp.A_c, dtype=float)
    if policy == "as-fabricated":
        return np.array(arch.weights, dtype=float)
    return equilibrium_at_force(arch, load.F0 if load.hold is None else load.hold, cp)


def _check_inertia(arch, load, cp):
    e = cp.p * (load.epsilon if not load.is_ramp else 0.0)
    if e > 0.0 and arch.c**2 < 100.0 * math.sqrt(cp.K * e):
        warnings.warn(
            f"c^2 = {arch.c**2:.3g} is below 100 sqrt(K eps) = {100.0 * math.sqrt(cp.K * e):.3g}; "
            "inertia may not be negligible",
            InertiaWarning,
            stacklevel=3,
        )


class _ModalSystem:
    """Vectorized right-hand side and Jacobian for the implicit path."""

    def __init__(self, arch: NondimArch, kind: int, F0: float, nu: float):
        self.kind, self.F0, self.nu, self.c = kind, F0, nu, arch.c
        self.a, self.M2, self.M4, self.l = arch.weights, arch.M2, arch.M4, arch.load
        self.Q2 = arch.Q**2
        self.S0 = float(np.sum(self.a**2 * self.M2))
        self.n = arch.N

    def _f(self, A):
        S = self.S0 - np.sum(A * A * self.M2)
        return 0.5 * (A - self.a) * self.M4 - 1.5 * self.Q2 * S * A * self.M2, S

    def _jf(self, A, S):
        u = A * self.M2
        return np.diag(0.5 * self.M4 - 1.5 * self.Q2 * S * self.M2) + 3.0 * self.Q2 * np.outer(u, u)

    def rhs(self, t, y):
        F = self.F0 + self.nu * t
        if self.kind == 1:
            f, _ = self._f(y)
            return -(2.0 / self.c) * (f + 0.25 * F * self.l)
        n = self.n
        f, _ = self._f(y[:n])
        return np.concatenate([y[n:], -self.c * y[n:] - 2.0 * f - 0.5 * F * self.l])

    def jac(self, t, y):
        n = self.n
        A = y if self.kind == 1 else y[:n]
        _, S = self._f(A)
        J = self._jf(A, S)
        if self.kind == 1:
            return -(2.0 / self.c) * J
        top = np.hstack([np.zeros((n, n)), np.eye(n)])
        bottom = np.hstack([-2.0 * J, -self.c * np.eye(n)])
        return np.vstack([top, bottom])


def _use_implicit(cfg, system, y0, t_end) -> bool:
    if cfg.method != "auto":
        return cfg.method == "implicit"
    if system.c <= 0.0:
        return False
    rho = float(np.max(np.abs(np.linalg.eigvals(system.jac(0.0, y0)))))
    # DOPRI5 real stability interval is about 3.3
    return t_end * rho / 3.3 > _STIFF_STEP_BUDGET


def _integrate_implicit(system, y0, t_end, cfg, w, offset, level):
    from scipy.integrate import solve_ivp

    events = None
    if w.size:

        def hit(t, y):
            return float(w @ y) + offset - level

        hit.terminal = True
        hit.direction = 1.0
        events = hit
    sol = solve_ivp(
        system.rhs,
        (0.0, float(t_end)),
        y0,
        method="Radau",
        jac=system.jac,
        rtol=max(cfg.rtol, 1e-13),
        atol=cfg.atol,
        events=events,
    )
    if sol.status == -1:
        raise StepSizeUnderflow(f"implicit integration failed: {sol.message}")
    ts = sol.t[:: cfg.record_stride]
    ys = sol.y.T[:: cfg.record_stride]
    stopped = sol.status == 1
    if stopped:
        ts = np.append(ts[ts < sol.t_events[0][0]], sol.t_events[0][0])
        ys = np.vstack([ys[: len(ts) - 1], sol.y_events[0][0]])
    elif ts[-1] != sol.t[-1]:
        ts = np.append(ts, sol.t[-1])
        ys = np.vstack([ys, sol.y[:, -1]])
    dys = np.array([system.rhs(t, y) for t, y in zip(ts, ys)])
    return (_STOPPED if stopped else _END), ts, ys, dys, int(sol.nfev)


def _integrate_modal(arch, load, cfg, cp, model, state):
    if model == "overdamped" and arch.c <= 0.0:
        raise ValidationError("the overdamped model needs c > 0")
    cp = critical_point(arch) if cp is None else cp
    if load.is_ramp:
        F0, nu = load.F0, load.nu
    elif load.hold is not None:
        F0, nu = load.hold, 0.0
    else:
        F0, nu = cp.F_c + load.epsilon, 0.0
    if model == "overdamped":
        _check_inertia(arch, load, cp)
    n = arch.N
    if state is None:
        A0, V0 = _initial_state(arch, load, cp, cfg), np.zeros(n)
    else:
        A0 = np.asarray(state.A, dtype=float)
        V0 = np.asarray(state.Adot, dtype=float)
        if A0.shape != (n,) or V0.shape != (n,):
            raise ValidationError("initial state does not match the number of modes")
    t_end = cfg.max_time if cfg.max_time is not None else _default_max_time(arch, load, cp, model == "overdamped")
    kind = 0 if model == "full" else 1
    y0 = np.concatenate([A0, V0]) if kind == 0 else A0
    if cfg.stop_at_switch:
        rp = remote_point(arch, cp)
        w = -2.0 * cp.V1
        if kind == 0:
            w = np.concatenate([w, np.zeros(n)])
        offset = float(2.0 * cp.V1 @ cp.A_c)
        level = cfg.threshold * rp.y
    else:
        w, offset, level = np.zeros(0), 0.0, 0.0
    system = _ModalSystem(arch, kind, F0, nu)
    if _use_implicit(cfg, system, y0, t_end):
        status, ts, ys, dys, nfev = _integrate_implicit(system, y0, t_end, cfg, w, offset, level)
    else:
        status, t, _, ts, ys, dys, nfev, _, _ = kernels.integrate(
            kind,
            _modal_params(arch, arch.c, F0, nu),
            y0,
            0.0,
            float(t_end),
            cfg.rtol,
            cfg.atol,
            0.0,
            int(cfg.max_steps),
            w,
            offset,
            level,
            int(cfg.record_stride),
            math.inf,
        )
        _raise_for_status(status, t)
    if kind == 0:
        A, Adot = ys[:, :n], ys[:, n:]
    else:
        A, Adot = ys, dys
    F = F0 + nu * ts
    delta = midpoint_displacement(A, arch)
    return TimeSeries(
        tau=ts,
        A=A,
        Adot=Adot,
        F=F,
        delta=np.asarray(delta),
        model=model,
        load=load,
        F_offset=F0,
        stopped=status == _STOPPED,
        nfev=int(nfev),
        arch=arch,
    )


def integrate_full(
    arch: NondimArch,
    load: LoadProgram,
    cfg: SimulationConfig | None = None,
    cp: CriticalPoint | None = None,
    state: StateVector | None = None,
) -> TimeSeries:
    """Integrate the second-order mode equations.

    Static programs start at the critical state at rest under ``F_c + eps``;
    ramps start at the as-fabricated shape (``F0 = 0``) or at the static
    equilibrium under ``F0``.  An explicit ``state`` overrides the policy.
    """
    cfg = SimulationConfig(model="full") if cfg is None else cfg.with_(model="full")
    return _integrate_modal(arch, load, cfg, cp, "full", state)


def integrate_overdamped(
    arch: NondimArch,
    load: LoadProgram,
    cfg: SimulationConfig | None = None,
    cp: CriticalPoint | None = None,
    state: StateVector | None = None,
) -> TimeSeries:
    """Integrate the first-order (inertia-free) mode equations; ``state.Adot`` is ignored."""
    cfg = SimulationConfig(model="overdamped") if cfg is None else cfg.with_(model="overdamped")
    return _integrate_modal(arch, load, cfg, cp, "overdamped", state)


# --------------------------------------------------------------------------
# detection


def _hermite_root(t0, t1, s0, s1, d0, d1, level):
    h = t1 - t0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        m2 = mid * mid
        m3 = m2 * mid
        s = (2 * m3 - 3 * m2 + 1) * s0 + (m3 - 2 * m2 + mid) * h * d0 + (-2 * m3 + 3 * m2) * s1 + (m3 - m2) * h * d1
        if s >= level:
            hi = mid
        else:
            lo = mid
    return hi


def _hermite_eval(th, h, a, b, da, db):
    t2 = th * th
    t3 = t2 * th
    val = (2 * t3 - 3 * t2 + 1) * a + (t3 - 2 * t2 + th) * h * da + (-2 * t3 + 3 * t2) * b + (t3 - t2) * h * db
    der = ((6 * t2 - 6 * th) / h) * a + (3 * t2 - 4 * th + 1) * da + ((-6 * t2 + 6 * th) / h) * b + (3 * t2 - 2 * th) * db
    return val, der


def _inertial_tail(K: float, c: float, y: float, ydot: float, rtol: float) -> float:
    """Blow-up time of ``y'' + c y' = K y^2`` from ``(y, ydot)``."""
    if c == 0.0 or ydot <= 0.0:
        return 2.0 * y / ydot if ydot > 0.0 else math.inf
    cap = 1e8 * y
    status, t, yy, _, _, _, _, _, _ = kernels.integrate(
        3, np.array([K, c, 0.0, 0.0]), np.array([y, ydot]), 0.0, 1e6 * (y / ydot + c / (K * y)),
        rtol, 1e-300, 0.0, 10_000_000, np.array([1.0, 0.0]), 0.0, cap, 1_000_000, math.inf,
    )
    if status != _STOPPED:
        return math.inf
    # beyond the cap the damping is negligible against the quadratic force
    return t + 2.0 * cap / yy[1]


def detect_switching(ts: TimeSeries, cp: CriticalPoint, cfg: SimulationConfig | None = None) -> SwitchingEvent:
    """First crossing of the switching threshold, plus the pole-tail completion."""
    cfg = SimulationConfig(model=ts.model) if cfg is None else cfg
    arch = ts.arch
    rp = remote_point(arch, cp)
    level = cfg.threshold * rp.y
    y = -2.0 * (ts.A - cp.A_c) @ cp.V1
    yd = -2.0 * ts.Adot @ cp.V1
    hits = np.nonzero(y >= level * (1.0 - 1e-12))[0]
    if hits.size:
        k = int(hits[0])
    elif ts.stopped and len(ts) > 1:
        # the stop event itself is the crossing, up to the event-location tolerance
        k = len(ts) - 1
    else:
        raise NoSwitching(f"soft-mode coordinate never reached {level:.6g}")
    if k == 0:
        t_cross, y_c, yd_c, A_c = ts.tau[0], y[0], yd[0], ts.A[0]
    else:
        t0, t1 = ts.tau[k - 1], ts.tau[k]
        h = t1 - t0
        th = _hermite_root(t0, t1, y[k - 1], y[k], yd[k - 1], yd[k], level)
        t_cross = t0 + th * h
        y_c, yd_c = _hermite_eval(th, h, y[k - 1], y[k], yd[k - 1], yd[k])
        if ts.model == "full":
            A_c = np.array([
                _hermite_eval(th, h, ts.A[k - 1, i], ts.A[k, i], ts.Adot[k - 1, i], ts.Adot[k, i])[0]
                for i in range(arch.N)
            ])
        else:
            A_c = ts.A[k - 1] + th * (ts.A[k] - ts.A[k - 1])
    tail = 0.0
    if cfg.tail_completion:
        if ts.model == "overdamped":
            tail = y_c / yd_c if yd_c > 0.0 else math.inf
        else:
            tail = _inertial_tail(cp.K, arch.c, y_c, yd_c, cfg.rtol)
    tau_switch = float(t_cross + tail)
    F_switch = float(ts.load.force(tau_switch, cp.F_c)) if ts.load.is_ramp else float(ts.F_offset)
    return SwitchingEvent(tau_switch, F_switch, np.asarray(A_c), float(t_cross), float(tail))


def simulate_switching(
    arch: NondimArch,
    load: LoadProgram,
    cfg: SimulationConfig | None = None,
    cp: CriticalPoint | None = None,
    state: StateVector | None = None,
) -> tuple[SwitchingEvent, TimeSeries]:
    """Run the configured model until switching and detect the event."""
    cfg = SimulationConfig() if cfg is None else cfg
    cp = critical_point(arch) if cp is None else cp
    run = integrate_full if cfg.model == "full" else integrate_overdamped
    ts = run(arch, load, cfg.with_(stop_at_switch=True), cp, state)
    if not ts.stopped:
        raise MaxTimeExceeded(f"no switching before tau={ts.tau[-1]:.6g}")
    return detect_switching(ts, cp, cfg), ts


# --------------------------------------------------------------------------
# normal form


def integrate_normal_form(
    K: float,
    c: float,
    eps: float = 0.0,
    nu: float = 0.0,
    inertial: bool = False,
    cfg: SimulationConfig | None = None,
    start: float | None = None,
) -> NormalFormRun:
    """Integrate the scalar normal form until ``y`` exceeds ``cutoff`` inner scales.

    Static runs (``nu == 0``) start from rest at ``y = 0``.  Ramps start on
    the slow branch ``y = -sqrt(nu |t| / K)`` at the (negative) time
    ``start``, by default 12 inner times before the fold crossing; the
    damped ramp uses the exact pullback solution there.
    """
    cfg = SimulationConfig() if cfg is None else cfg
    if not (K > 0.0):
        raise ValidationError("K must be positive")
    if not inertial and not c > 0.0:
        raise ValidationError("the damped normal form needs c > 0")
    if (eps > 0.0) == (nu > 0.0):
        raise ValidationError("exactly one of eps, nu must be positive")
    if nu == 0.0:
        scale = math.sqrt(eps / K)
        t_inner = c / math.sqrt(K * eps) if not inertial else (K * eps) ** -0.25
        t0 = 0.0
        y0 = [0.0] if not inertial else [0.0, 0.0]
    else:
        if inertial:
            scale = nu**0.4 * K**-0.6
            t_inner = (K * nu) ** -0.2
        else:
            scale = K ** (-2.0 / 3.0) * (c * nu) ** (1.0 / 3.0)
            t_inner = (K * nu / c**2) ** (-1.0 / 3.0)
        t0 = -12.0 * t_inner if start is None else float(start)
        if t0 >= 0.0:
            raise ValidationError("ramp runs must start before the fold crossing")
        if inertial:
            ys = -math.sqrt(nu * -t0 / K)
            # slow-branch velocity d/dt of -sqrt(nu |t| / K)
            y0 = [ys, 0.5 * math.sqrt(nu / (K * -t0))]
        else:
            from .analytic import trajectory_ramp_damped

            y0 = [trajectory_ramp_damped(t0, K, nu, c)]
    level = cfg.cutoff * scale
    kind = 3 if inertial else 2
    w = np.array([1.0, 0.0]) if inertial else np.array([1.0])
    t_end = cfg.max_time if cfg.max_time is not None else t0 + 1e3 * t_inner
    status, t, yend, ts, ys_, dys, _, _, _ = kernels.integrate(
        kind, np.array([K, c, eps, nu], dtype=float), np.array(y0, dtype=float), t0, float(t_end),
        cfg.rtol, cfg.atol * scale, 0.0, int(cfg.max_steps), w, 0.0, level, int(cfg.record_stride), math.inf,
    )
    _raise_for_status(status, t)
    y = ys_[:, 0]
    ydot = ys_[:, 1] if inertial else dys[:, 0]
    if status != _STOPPED:
        return NormalFormRun(ts, y, ydot, None, None, level)
    yv, ydv = y[-1], ydot[-1]
    tail = 0.0
    if cfg.tail_completion:
        tail = 2.0 * yv / ydv if inertial else yv / ydv
    return NormalFormRun(ts, y, ydot, float(t + tail), float(t), level)


# --------------------------------------------------------------------------
# energy


def energy_series(ts: TimeSeries) -> dict:
    """Bending, compression, load-work, kinetic and total energy at every sample.

    The work term uses the instantaneous load, so the total is conserved only
    for constant loads without damping.
    """
    arch = ts.arch
    A = ts.A
    bending = 0.25 * np.sum((A - arch.weights) ** 2 * arch.M4, axis=1)
    S = np.sum(arch.weights**2 * arch.M2) - np.sum(A**2 * arch.M2, axis=1)
    compression = 0.375 * arch.Q**2 * S**2
    work = -ts.F * ts.delta / 8.0
    kinetic = 0.25 * np.sum(ts.Adot**2, axis=1) if ts.model == "full" else np.zeros(len(ts))
    return {
        "bending": bending,
        "compression": compression,
        "work": work,
        "kinetic": kinetic,
        "total": bending + compression + work + kinetic,
    }
