"""Static switching points, equilibrium paths and the scalar normal form.

Equilibria under a constant midspan load solve ``2 f(A) + (F/2) l = 0``
(see :mod:`archswitch.model` for the scaling).  Paths are traced under
displacement control: the midspan deflection ``delta`` is prescribed and
``(A, F)`` are solved for together, which stays well posed through the
force peak where force control breaks down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import DegenerateReduction, NewtonDivergence, NotBistable, ValidationError
from .model import LoadProgram, NondimArch, _check, internal_force_vector, midpoint_displacement

__all__ = [
    "CriticalPoint",
    "EquilibriumPath",
    "NormalForm",
    "RemotePoint",
    "gradient_and_hessians",
    "critical_point",
    "critical_point_one_mode",
    "critical_point_multi_mode",
    "trace_equilibrium_path",
    "reduce_to_normal_form",
    "remote_point",
    "static_residual",
    "equilibrium_at_force",
    "fold_eigen_ratio",
]

_NEWTON_MAXIT = 50
_RES_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    """Static switching (fold) point.

    ``K`` is the oriented normal-form curvature (positive), ``p`` the
    projection of the load pattern on the soft mode ``V1`` (1 for a single
    mode).  ``tau_c`` is set only for ramp loads.
    """

    A_c: np.ndarray
    F_c: float
    K: float
    V1: np.ndarray
    p: float
    delta_c: float
    tau_c: float | None = None

    def for_load(self, load: LoadProgram) -> "CriticalPoint":
        """Copy with ``tau_c`` filled in for a ramp program."""
        if not load.is_ramp:
            return replace(self, tau_c=None)
        return replace(self, tau_c=load.critical_time(self.F_c))

    def as_dict(self) -> dict:
        return {
            "delta_c": self.delta_c,
            "F_c": self.F_c,
            "K": self.K,
            "p": self.p,
            "A_c": [float(v) for v in self.A_c],
            "V1": [float(v) for v in self.V1],
            "tau_c": self.tau_c,
        }


class NormalForm(NamedTuple):
    K: float
    p: float
    V1: np.ndarray


class RemotePoint(NamedTuple):
    A: np.ndarray
    delta: float
    y: float


@dataclass(frozen=True, eq=False)
class EquilibriumPath:
    """Equilibria sampled along a midspan-deflection grid."""

    delta: np.ndarray
    F: np.ndarray
    A: np.ndarray
    stable: np.ndarray
    dF_ddelta: np.ndarray

    def __len__(self) -> int:
        return len(self.delta)


# --------------------------------------------------------------------------
# derivatives


def gradient_and_hessians(A, arch: NondimArch) -> tuple[np.ndarray, np.ndarray]:
    """Jacobian ``J[i, j] = df_i/dA_j`` and Hessians ``H[i, j, k]`` of the internal forces.

    The forces are cubic, so ``H`` is affine in ``A`` and exact.
    """
    A = _check(A, arch)
    if A.ndim != 1:
        raise ValidationError("gradient_and_hessians takes a single state")
    Q2 = arch.Q**2
    M2 = arch.M2
    u = A * M2
    S = float(np.sum(arch.weights**2 * M2) - np.sum(A**2 * M2))
    J = np.diag(0.5 * arch.M4 - 1.5 * Q2 * S * M2) + 3.0 * Q2 * np.outer(u, u)
    n = arch.N
    eye = np.eye(n)
    H = 3.0 * Q2 * (
        np.einsum("i,ij,k->ijk", M2, eye, u)
        + np.einsum("i,ik,j->ijk", M2, eye, u)
        + np.einsum("i,j,jk->ijk", u, M2, eye)
    )
    return J, H


def fold_eigen_ratio(cp: "CriticalPoint", arch: NondimArch) -> float:
    """``|lambda_min|`` of the force Jacobian at the fold over its stiffness scale.

    The scale is the larger of ``|lambda_max|`` and the biggest bending
    stiffness ``M^4/2``, so the measure stays meaningful for one mode.
    """
    lam = np.linalg.eigvalsh(gradient_and_hessians(cp.A_c, arch)[0])
    scale = max(float(np.max(np.abs(lam))), 0.5 * float(np.max(arch.M4)))
    return float(np.min(np.abs(lam))) / scale


def static_residual(A, F: float, arch: NondimArch) -> np.ndarray:
    """Equilibrium residual ``2 f(A) + (F/2) l``."""
    return 2.0 * internal_force_vector(A, arch) + 0.5 * F * arch.load


def _force_scale(arch: NondimArch) -> float:
    amax = max(1.0, float(np.max(np.abs(arch.weights))))
    return float(np.max(arch.M4)) * max(1.0, arch.Q**2) * amax**3


def _orient(J: np.ndarray, H: np.ndarray, V: np.ndarray, arch: NondimArch) -> NormalForm:
    V = V / np.linalg.norm(V)
    p = float(V @ arch.load)
    if abs(p) < 1e-12:
        raise DegenerateReduction(f"load pattern is orthogonal to the soft mode (V1.l = {p:.3g})")
    if p < 0.0:
        V = -V
        p = -p
    K = float(V @ (0.5 * np.einsum("ijk,j,k->i", H, V, V)))
    return NormalForm(K, p, V)


# --------------------------------------------------------------------------
# one mode


def critical_point_one_mode(arch: NondimArch) -> CriticalPoint:
    """Closed-form fold of the cubic force law of a one-mode arch."""
    if arch.N != 1 or arch.modes != (1,):
        raise ValidationError("critical_point_one_mode needs a one-mode arch (mode 1)")
    a1 = arch.a[0]
    Q2 = arch.Q**2
    rad = a1 * a1 / 3.0 - 1.0 / (9.0 * Q2)
    # a radicand within round-off of zero is the degenerate (cusp) boundary
    if a1 <= 0.0 or rad <= 1e-12 * a1 * a1 / 3.0:
        raise NotBistable(
            f"no interior force peak: a1^2/3 - 1/(9 Q^2) = {rad:.6g} (Q={arch.Q}, a1={a1})"
        )
    delta_c = 2.0 * a1 - 2.0 * math.sqrt(rad)
    M4 = arch.M4[0]
    F_c = 3.0 * Q2 * M4 * (0.25 * delta_c**3 - 1.5 * a1 * delta_c**2 + (2.0 * a1**2 + 1.0 / (3.0 * Q2)) * delta_c)
    # half the second derivative of X at the fold, which is negative there
    K_raw = 4.5 * Q2 * M4 * (delta_c / 2.0 - a1)
    A_c = np.array([a1 - delta_c / 2.0])
    return CriticalPoint(A_c=A_c, F_c=F_c, K=-K_raw, V1=np.array([1.0]), p=1.0, delta_c=delta_c)


# --------------------------------------------------------------------------
# displacement-controlled equilibria


def _bordered(A, F, arch: NondimArch):
    J, H = gradient_and_hessians(A, arch)
    n = arch.N
    B = np.zeros((n + 1, n + 1))
    B[:n, :n] = 2.0 * J
    B[:n, n] = 0.5 * arch.load
    B[n, :n] = -2.0 * arch.load
    return B, J, H


def _solve_at_delta(delta: float, A0, F0: float, arch: NondimArch):
    """Damped Newton on (A, F) with the midspan deflection held at ``delta``."""
    n = arch.N
    scale = _force_scale(arch)
    z = np.concatenate([np.asarray(A0, dtype=float), [F0]])

    def resid(z):
        r = np.empty(n + 1)
        r[:n] = static_residual(z[:n], z[n], arch)
        r[n] = (float(midpoint_displacement(z[:n], arch)) - delta) * scale
        return r

    r = resid(z)
    nr = np.linalg.norm(r)
    for _ in range(_NEWTON_MAXIT):
        if nr <= _RES_TOL * scale:
            return z[:n], float(z[n])
        B, _, _ = _bordered(z[:n], z[n], arch)
        B[n, :] *= scale
        try:
            dz = np.linalg.solve(B, -r)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        for _ in range(30):
            zt = z + t * dz
            rt = resid(zt)
            nrt = np.linalg.norm(rt)
            if nrt < nr or nrt <= _RES_TOL * scale:
                break
            t *= 0.5
        else:
            break
        z, r, nr = zt, rt, nrt
        if np.max(np.abs(t * dz[:n])) <= 1e-15 * (1.0 + np.max(np.abs(z[:n]))) and nr <= 1e-9 * scale:
            return z[:n], float(z[n])
    raise NewtonDivergence(
        f"constrained equilibrium at delta={delta:.6g} did not converge (residual {nr:.3g})",
        iterate=z[:n].copy(),
        residual=float(nr),
    )


def _slope(A, F, arch: NondimArch) -> tuple[float, np.ndarray]:
    """``dF/ddelta`` and ``dA/ddelta`` along the displacement-controlled path."""
    B, _, _ = _bordered(A, F, arch)
    rhs = np.zeros(arch.N + 1)
    rhs[-1] = 1.0
    s = np.linalg.solve(B, rhs)
    return float(s[-1]), s[:-1]


def _is_stable(A, arch: NondimArch) -> bool:
    J, _ = gradient_and_hessians(A, arch)
    return bool(np.linalg.eigvalsh(J)[0] > 0.0)


class _Tracker:
    """Continuation along delta with a tangent predictor and step halving."""

    def __init__(self, arch: NondimArch, h_max: float):
        self.arch = arch
        self.delta = 0.0
        self.A = np.array(arch.weights, dtype=float)
        self.F = 0.0
        self.h_max = h_max
        self.dF, self.dA = _slope(self.A, self.F, arch)

    def _try(self, target):
        arch = self.arch
        h = target - self.delta
        A_pred = self.A + h * self.dA
        F_pred = self.F + h * self.dF
        A, F = _solve_at_delta(target, A_pred, F_pred, arch)
        # reject corrections much larger than the predictor step (branch jump)
        jump = np.max(np.abs(A - A_pred))
        if jump > 0.05 * abs(h) * (1.0 + np.max(np.abs(self.dA))) + 1e-12:
            raise NewtonDivergence("continuation step jumped branches", iterate=A)
        return A, F

    def advance_to(self, target: float):
        h_cap = self.h_max
        while self.delta != target:
            step = target - self.delta
            if abs(step) > h_cap:
                step = math.copysign(h_cap, step)
            nxt = target if abs(target - self.delta) <= abs(step) else self.delta + step
            try:
                A, F = self._try(nxt)
            except NewtonDivergence as exc:
                h_cap = 0.5 * abs(step)
                if h_cap < 1e-10 * max(1.0, abs(target)):
                    raise NewtonDivergence(
                        f"path continuation stalled near delta={self.delta:.6g}",
                        iterate=self.A.copy(),
                        residual=exc.residual,
                    ) from exc
                continue
            self.delta, self.A, self.F = nxt, A, F
            self.dF, self.dA = _slope(A, F, self.arch)
            h_cap = min(self.h_max, 2.0 * h_cap)
        return self.A, self.F


def _default_h(arch: NondimArch) -> float:
    d0 = abs(float(midpoint_displacement(np.zeros(arch.N), arch)))
    return max(d0, 1e-3) / 400.0


def trace_equilibrium_path(arch: NondimArch, delta_grid: Sequence[float]) -> EquilibriumPath:
    """Equilibria at each prescribed midspan deflection (monotone grid)."""
    grid = np.asarray(delta_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
        raise ValidationError("delta grid must be a nonempty finite 1-d sequence")
    d = np.diff(grid)
    if grid.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
        raise ValidationError("delta grid must be strictly monotone")
    n = arch.N
    As = np.empty((grid.size, n))
    Fs = np.empty(grid.size)
    slopes = np.empty(grid.size)
    stable = np.empty(grid.size, dtype=bool)
    if n == 1 and arch.modes == (1,):
        from .model import internal_force_scalar

        a1 = arch.a[0]
        As[:, 0] = a1 - grid / 2.0
        Fs[:] = internal_force_scalar(grid, arch)
        Q2 = arch.Q**2
        slopes[:] = 3.0 * Q2 * arch.M4[0] * (0.75 * grid**2 - 3.0 * a1 * grid + 2.0 * a1**2 + 1.0 / (3.0 * Q2))
        stable[:] = slopes > 0.0
        return EquilibriumPath(grid, Fs, As, stable, slopes)
    tr = _Tracker(arch, _default_h(arch))
    for k, dl in enumerate(grid):
        A, F = tr.advance_to(float(dl))
        As[k] = A
        Fs[k] = F
        slopes[k] = tr.dF
        stable[k] = _is_stable(A, arch)
    return EquilibriumPath(grid, Fs, As, stable, slopes)


# --------------------------------------------------------------------------
# fold location and reduction


def reduce_to_normal_form(cp: CriticalPoint, arch: NondimArch) -> NormalForm:
    """Project the dynamics on the soft mode: returns ``(K_bar, p, V1)``.

    The reduced equation is ``y'' + c y' = p eps + K_bar y^2`` with
    ``y = -2 V1.(A - A_c)``; V1 is oriented so that ``p = V1.l > 0``.
    """
    J, H = gradient_and_hessians(cp.A_c, arch)
    w, vecs = np.linalg.eigh(J)
    V = vecs[:, int(np.argmin(np.abs(w)))]
    return _orient(J, H, V, arch)


def _moore_spence(A, F, V, arch: NondimArch):
    """Newton on the extended fold system ``{2f + F l/2 = 0, J V = 0, V0.V = 1}``."""
    n = arch.N
    scale = _force_scale(arch)
    V0 = V / np.linalg.norm(V)
    A = np.array(A, dtype=float)
    V = V0.copy()
    for _ in range(_NEWTON_MAXIT):
        J, H = gradient_and_hessians(A, arch)
        r = np.concatenate([static_residual(A, F, arch), J @ V, [V0 @ V - 1.0]])
        G = np.zeros((2 * n + 1, 2 * n + 1))
        G[:n, :n] = 2.0 * J
        G[:n, n] = 0.5 * arch.load
        G[n : 2 * n, :n] = np.einsum("ijk,j->ik", H, V)
        G[n : 2 * n, n + 1 :] = J
        G[2 * n, n + 1 :] = V0
        dz = np.linalg.solve(G, -r)
        A = A + dz[:n]
        F = F + dz[n]
        V = V + dz[n + 1 :]
        if np.max(np.abs(dz[:n])) < 1e-15 * (1.0 + np.max(np.abs(A))):
            break
    J, _ = gradient_and_hessians(A, arch)
    if np.linalg.norm(static_residual(A, F, arch)) > 1e-9 * scale:
        raise NewtonDivergence("fold refinement failed", iterate=A)
    return A, float(F), V


def critical_point_multi_mode(arch: NondimArch) -> CriticalPoint:
    """First force peak along the displacement-controlled path, refined to the fold."""
    tr = _Tracker(arch, _default_h(arch))
    d0 = abs(float(midpoint_displacement(np.zeros(arch.N), arch)))
    d_end = 2.0 * max(d0, 1e-3)
    h = _default_h(arch)
    prev = (tr.delta, tr.A.copy(), tr.F, tr.dF)
    if prev[3] <= 0.0:
        raise NotBistable("force decreases from the as-fabricated state")
    found = False
    while tr.delta < d_end:
        tr.advance_to(min(tr.delta + h, d_end))
        if tr.dF <= 0.0:
            found = True
            break
        prev = (tr.delta, tr.A.copy(), tr.F, tr.dF)
    if not found:
        raise NotBistable("no interior force peak along the equilibrium path")
    lo, A_lo, F_lo, _ = prev
    hi = tr.delta
    if not (np.isfinite(tr.dF)) or abs(tr.dF) > 1e3 * abs(prev[3]) + 1e3 * _force_scale(arch):
        raise NotBistable("slope changes sign through a snap-back, not a force peak")

    state = {"A": A_lo, "F": F_lo}

    def g(dl):
        A, F = _solve_at_delta(dl, state["A"], state["F"], arch)
        state["A"], state["F"] = A, F
        return _slope(A, F, arch)[0]

    dc = brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    A, F = _solve_at_delta(dc, state["A"], state["F"], arch)
    J, H = gradient_and_hessians(A, arch)
    w, vecs = np.linalg.eigh(J)
    V = vecs[:, int(np.argmin(np.abs(w)))]
    A, F, V = _moore_spence(A, F, V, arch)
    J, H = gradient_and_hessians(A, arch)
    w, vecs = np.linalg.eigh(J)
    nf = _orient(J, H, vecs[:, int(np.argmin(np.abs(w)))], arch)
    if nf.K <= 0.0:
        raise NotBistable(f"fold is not a force maximum along the soft mode (K={nf.K:.3g})")
    return CriticalPoint(
        A_c=A,
        F_c=F,
        K=nf.K,
        V1=nf.V1,
        p=nf.p,
        delta_c=float(midpoint_displacement(A, arch)),
    )


def critical_point(arch: NondimArch) -> CriticalPoint:
    """Fold of any arch: closed form for one mode-1 weight, continuation otherwise."""
    if arch.N == 1 and arch.modes == (1,):
        return critical_point_one_mode(arch)
    return critical_point_multi_mode(arch)


def _potential(A, arch: NondimArch, F: float):
    A = np.asarray(A)
    S = float(np.sum(arch.weights**2 * arch.M2) - np.sum(A**2 * arch.M2))
    energy = 0.25 * float(np.sum((A - arch.weights) ** 2 * arch.M4)) + 0.375 * arch.Q**2 * S * S
    energy -= F * float(midpoint_displacement(A, arch)) / 8.0
    grad = internal_force_vector(A, arch) + 0.25 * F * arch.load
    return energy, grad


def _descend_to_remote(arch: NondimArch, cp: CriticalPoint) -> np.ndarray:
    # Energy descent from just past the fold along the soft mode, then a
    # force-controlled Newton polish; the minimizer lands in the far well.
    scale = _force_scale(arch)
    y0 = 1e-2 * max(cp.delta_c, 1e-3)
    A = np.array(cp.A_c, dtype=float) - 0.5 * y0 * cp.V1
    res = minimize(_potential, A, args=(arch, cp.F_c), jac=True, method="BFGS",
                   options={"gtol": 1e-10 * scale, "maxiter": 10000})
    A = res.x
    for _ in range(_NEWTON_MAXIT):
        J, _ = gradient_and_hessians(A, arch)
        r = static_residual(A, cp.F_c, arch)
        dA = np.linalg.solve(2.0 * J, -r)
        A = A + dA
        if np.max(np.abs(dA)) < 1e-15 * (1.0 + np.max(np.abs(A))):
            break
    if np.linalg.norm(static_residual(A, cp.F_c, arch)) > 1e-9 * scale or not _is_stable(A, arch):
        raise NotBistable("no stable remote equilibrium at the switching force")
    if float(-2.0 * cp.V1 @ (A - cp.A_c)) <= 10.0 * y0:
        raise NotBistable("descent from the fold returned to the switching point")
    return A


def remote_point(arch: NondimArch, cp: CriticalPoint) -> RemotePoint:
    """Equilibrium on the far stable branch at the switching force ``F_c``.

    ``y`` is its normal-form coordinate ``-2 V1.(A - A_c)``.
    """
    if arch.N == 1 and arch.modes == (1,):
        # X(delta) - F_c has a double root at delta_c; the roots sum to 6 a1
        d_r = 6.0 * arch.a[0] - 2.0 * cp.delta_c
        A = np.array([arch.a[0] - d_r / 2.0])
    else:
        A = _descend_to_remote(arch, cp)
        d_r = float(midpoint_displacement(A, arch))
    y = float(-2.0 * cp.V1 @ (A - cp.A_c))
    return RemotePoint(A=A, delta=float(d_r), y=y)


def equilibrium_at_force(arch: NondimArch, F: float, cp: CriticalPoint | None = None) -> np.ndarray:
    """Equilibrium on the as-fabricated branch under a load ``0 <= F < F_c``."""
    if F < 0.0:
        raise ValidationError("load must be nonnegative")
    if F == 0.0:
        return np.array(arch.weights, dtype=float)
    cp = critical_point(arch) if cp is None else cp
    if F >= cp.F_c:
        raise ValidationError(f"no first-branch equilibrium above F_c = {cp.F_c:.6g}")
    if arch.N == 1 and arch.modes == (1,):
        from .model import internal_force_scalar

        d = brentq(lambda x: internal_force_scalar(x, arch) - F, 0.0, cp.delta_c, xtol=1e-15)
        return np.array([arch.a[0] - d / 2.0])
    tr = _Tracker(arch, _default_h(arch))
    h = _default_h(arch)
    prev = (tr.delta, tr.A.copy(), tr.F)
    while tr.F < F:
        tr.advance_to(min(tr.delta + h, cp.delta_c))
        if tr.F < F:
            prev = (tr.delta, tr.A.copy(), tr.F)
    state = {"A": prev[1], "F": prev[2]}

    def g(dl):
        A, Fv = _solve_at_delta(dl, state["A"], state["F"], arch)
        state["A"], state["F"] = A, Fv
        return Fv - F

    d = brentq(g, prev[0], tr.delta, xtol=1e-15)
    A, _ = _solve_at_delta(d, state["A"], state["F"], arch)
    return A
