"""Arch data model: buckling-mode basis, scales, energies and internal forces.

Conventions
-----------
The as-fabricated and deformed shapes are ``h_mid * sum(a_i phi_i)`` and
``h_mid * sum(A_i phi_i)`` over the clamped-clamped column buckling modes.
The midspan point load ``F`` and the damping ``c`` are expressed in the
midpoint-displacement normalization, so that for a single mode the equation
of motion reads ``delta'' + c delta' = F - X(delta)``.  In mode coordinates
every mode obeys::

    1/2 A_i'' + c/2 A_i' + f_i(A) + F/4 * l_i = 0

where ``f_i`` is the static internal force returned by
:func:`internal_force_vector` and ``l_i`` is 1 for the modes that move the
midspan point (i = 1, 5, 9, ...) and 0 otherwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import UnsupportedMode, ValidationError

__all__ = [
    "ArchGeometry",
    "NondimArch",
    "ScaleSet",
    "LoadProgram",
    "StateVector",
    "Energies",
    "mode_eigenvalue",
    "mode_shape",
    "load_coefficient",
    "symmetric_modes",
    "nondimensionalize",
    "midpoint_displacement",
    "internal_force_vector",
    "internal_force_scalar",
    "total_energy",
]

# Clamped-clamped antisymmetric buckling eigenvalues; no closed form is used.
_EVEN_MODE_EIGENVALUES = {2: 2.86 * math.pi, 4: 4.92 * math.pi, 6: 6.94 * math.pi}


def mode_eigenvalue(i: int) -> float:
    """Buckling eigenvalue ``M_i`` of the i-th clamped-clamped column mode."""
    if int(i) != i or i < 1:
        raise UnsupportedMode(f"mode index must be a positive integer, got {i!r}")
    i = int(i)
    if i % 2 == 1:
        return (i + 1) * math.pi
    try:
        return _EVEN_MODE_EIGENVALUES[i]
    except KeyError:
        raise UnsupportedMode(
            f"no eigenvalue tabulated for antisymmetric mode {i} (only 2, 4, 6)"
        ) from None


def mode_shape(i: int, x, L: float = 1.0):
    """Evaluate the i-th buckling mode shape at position(s) ``x`` in [0, L]."""
    M = mode_eigenvalue(i)
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0.0) or np.any(xs > L):
        raise ValidationError("mode_shape requires 0 <= x <= L")
    s = xs / L
    if i % 2 == 1:
        out = 1.0 - np.cos(M * s)
    else:
        out = 1.0 - 2.0 * s - np.cos(M * s) + 2.0 * np.sin(M * s) / M
    return float(out) if out.ndim == 0 else out


def load_coefficient(i: int) -> float:
    """Half the midspan value of mode i: 1 for i = 1, 5, 9, ..., else 0."""
    return 1.0 if i % 4 == 1 else 0.0


def symmetric_modes(n: int) -> tuple[int, ...]:
    """The first ``n`` midspan-loaded symmetric modes (1, 5, 9, ...)."""
    return tuple(1 + 4 * k for k in range(n))


@dataclass(frozen=True)
class ArchGeometry:
    """Dimensional arch description (SI units are assumed, but any consistent set works)."""

    span: float
    thickness: float
    width: float
    youngs_modulus: float
    density: float
    rise: float

    def __post_init__(self):
        for name in ("span", "thickness", "width", "youngs_modulus", "density", "rise"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValidationError(f"{name} must be positive and finite, got {v!r}")
        if self.rise / self.span > 0.2:
            warnings.warn(
                f"rise/span = {self.rise / self.span:.3g} exceeds 0.2; "
                "the shallow-arch energies lose accuracy",
                stacklevel=3,
            )

    @property
    def second_moment(self) -> float:
        return self.width * self.thickness**3 / 12.0

    @property
    def area(self) -> float:
        return self.width * self.thickness


@dataclass(frozen=True)
class ScaleSet:
    """Reference scales that make forces, times, rates, damping and lengths dimensionless."""

    force: float
    time: float
    rate: float
    damping: float
    displacement: float

    _KINDS = ("force", "time", "rate", "damping", "displacement")

    @classmethod
    def from_geometry(cls, g: ArchGeometry) -> "ScaleSet":
        EI = g.youngs_modulus * g.second_moment
        rhoA = g.density * g.area
        L = g.span
        force = EI * g.rise / L**3
        time = math.sqrt(rhoA * L**4 / EI)
        return cls(
            force=force,
            time=time,
            rate=force / time,
            damping=math.sqrt(EI * rhoA / L**2),
            displacement=g.rise,
        )

    def _scale(self, kind: str) -> float:
        if kind not in self._KINDS:
            raise ValidationError(f"unknown quantity kind {kind!r}")
        return getattr(self, kind)

    def to_nondim(self, kind: str, value):
        if isinstance(value, (list, tuple)):
            value = np.asarray(value, dtype=float)
        return value / self._scale(kind)

    def to_dim(self, kind: str, value):
        if isinstance(value, (list, tuple)):
            value = np.asarray(value, dtype=float)
        return value * self._scale(kind)


@dataclass(frozen=True)
class NondimArch:
    """Nondimensional arch: rise ratio ``Q``, as-fabricated weights ``a``, damping ``c``.

    ``modes`` lists the buckling-mode index carried by each weight; it
    defaults to the symmetric midspan-loaded family (1, 5, 9, ...).
    """

    Q: float
    a: tuple[float, ...]
    c: float = 0.0
    modes: tuple[int, ...] | None = None

    def __post_init__(self):
        a = tuple(float(v) for v in np.atleast_1d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "a", a)
        modes = symmetric_modes(len(a)) if self.modes is None else tuple(int(m) for m in self.modes)
        object.__setattr__(self, "modes", modes)
        if not (math.isfinite(self.Q) and self.Q > 0.0):
            raise ValidationError(f"Q must be positive, got {self.Q!r}")
        if len(a) < 1:
            raise ValidationError("at least one mode weight is required")
        if len(modes) != len(a):
            raise ValidationError("modes and a must have the same length")
        if len(set(modes)) != len(modes):
            raise ValidationError("duplicate mode index")
        if not all(math.isfinite(v) for v in a):
            raise ValidationError("mode weights must be finite")
        if not (math.isfinite(self.c) and self.c >= 0.0):
            raise ValidationError(f"damping must be nonnegative, got {self.c!r}")
        for m in modes:
            mode_eigenvalue(m)

    @property
    def N(self) -> int:
        return len(self.a)

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.array(self.a)
        w.flags.writeable = False
        return w

    @cached_property
    def M(self) -> np.ndarray:
        m = np.array([mode_eigenvalue(i) for i in self.modes])
        m.flags.writeable = False
        return m

    @cached_property
    def M2(self) -> np.ndarray:
        return self.M**2

    @cached_property
    def M4(self) -> np.ndarray:
        return self.M**4

    @cached_property
    def load(self) -> np.ndarray:
        l = np.array([load_coefficient(i) for i in self.modes])
        l.flags.writeable = False
        return l

    def with_damping(self, c: float) -> "NondimArch":
        return NondimArch(self.Q, self.a, c, self.modes)


@dataclass(frozen=True)
class LoadProgram:
    """Midspan load history.

    With ``nu == 0`` the load is the constant ``F_c + epsilon`` (a static
    perturbation beyond the switching force).  With ``nu > 0`` it is the
    ramp ``F0 + nu * tau``.  ``hold`` fixes an absolute constant load
    instead, e.g. below the fold for free-vibration checks.
    """

    F0: float = 0.0
    nu: float = 0.0
    epsilon: float = 0.0
    hold: float | None = None

    def __post_init__(self):
        for name in ("F0", "nu", "epsilon"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.nu < 0.0 or self.epsilon < 0.0:
            raise ValidationError("nu and epsilon must be nonnegative")
        if self.nu > 0.0 and self.epsilon > 0.0:
            raise ValidationError("a load program is either static (epsilon) or ramped (nu), not both")
        if self.hold is not None:
            if not math.isfinite(self.hold):
                raise ValidationError("hold must be finite")
            if self.nu > 0.0 or self.epsilon > 0.0:
                raise ValidationError("a held load takes neither nu nor epsilon")

    @property
    def is_ramp(self) -> bool:
        return self.nu > 0.0

    def force(self, tau, F_c: float | None = None):
        """Load at time(s) ``tau``; static programs need the switching force."""
        tau = np.asarray(tau, dtype=float)
        if self.is_ramp:
            out = self.F0 + self.nu * tau
        elif self.hold is not None:
            out = np.full_like(tau, self.hold)
        else:
            if F_c is None:
                raise ValidationError("static load programs need F_c")
            out = np.full_like(tau, F_c + self.epsilon)
        return float(out) if out.ndim == 0 else out

    def critical_time(self, F_c: float) -> float:
        """Time at which a ramp reaches ``F_c``."""
        if not self.is_ramp:
            raise ValidationError("critical transition time is only defined for ramps")
        return (F_c - self.F0) / self.nu


@dataclass(frozen=True)
class StateVector:
    A: np.ndarray
    Adot: np.ndarray = field(default=None)
    tau: float = 0.0

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float).copy()
        Adot = np.zeros_like(A) if self.Adot is None else np.asarray(self.Adot, dtype=float).copy()
        if A.shape != Adot.shape or A.ndim != 1:
            raise ValidationError("A and Adot must be 1-d arrays of equal length")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Adot", Adot)

    def midpoint_displacement(self, arch: NondimArch) -> float:
        return midpoint_displacement(self.A, arch)


class Energies(NamedTuple):
    bending: float
    compression: float
    work: float
    kinetic: float
    total: float


def _check(A, arch: NondimArch) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.shape[-1:] != (arch.N,):
        raise ValidationError(f"expected {arch.N} mode weights, got shape {A.shape}")
    return A


def midpoint_displacement(A, arch: NondimArch):
    """Downward midspan deflection ``delta = 2 sum l_i (a_i - A_i)``."""
    A = _check(A, arch)
    return 2.0 * np.sum(arch.load * (arch.weights - A), axis=-1)


def _stretch(A, arch: NondimArch):
    # squared-slope difference between as-fabricated and deformed shapes
    return np.sum(arch.weights**2 * arch.M2) - np.sum(A**2 * arch.M2, axis=-1)


def internal_force_vector(A, arch: NondimArch) -> np.ndarray:
    """Static internal force of every mode equation (no inertia, damping or load)."""
    A = _check(A, arch)
    S = _stretch(A, arch)
    return 0.5 * (A - arch.weights) * arch.M4 - 1.5 * arch.Q**2 * np.expand_dims(S, -1) * A * arch.M2


def internal_force_scalar(delta, arch: NondimArch):
    """Cubic force-displacement law ``X(delta)`` of a one-mode arch."""
    if arch.N != 1 or arch.modes != (1,):
        raise ValidationError("internal_force_scalar needs a one-mode arch (mode 1)")
    d = np.asarray(delta, dtype=float)
    a1 = arch.a[0]
    Q2 = arch.Q**2
    out = 3.0 * Q2 * arch.M4[0] * (0.25 * d**3 - 1.5 * a1 * d**2 + (2.0 * a1**2 + 1.0 / (3.0 * Q2)) * d)
    return float(out) if out.ndim == 0 else out


def total_energy(state: StateVector, arch: NondimArch, F: float) -> Energies:
    """Energy split of a state under the constant load ``F``.

    Scaled so that ``internal_force_vector`` is the gradient of
    ``bending + compression`` and ``F/4 * l`` is the gradient of ``work``.
    """
    A = _check(state.A, arch)
    Adot = _check(state.Adot, arch)
    bending = 0.25 * float(np.sum((A - arch.weights) ** 2 * arch.M4))
    compression = 0.375 * arch.Q**2 * float(_stretch(A, arch)) ** 2
    work = -F * float(midpoint_displacement(A, arch)) / 8.0
    kinetic = 0.25 * float(np.sum(Adot**2))
    return Energies(bending, compression, work, kinetic, bending + compression + work + kinetic)


def nondimensionalize(
    g: ArchGeometry,
    c_dim: float,
    a: Sequence[float],
    modes: Sequence[int] | None = None,
) -> tuple[NondimArch, ScaleSet]:
    """Build the nondimensional arch and its scales from a dimensional description."""
    if not (math.isfinite(c_dim) and c_dim >= 0.0):
        raise ValidationError("dimensional damping must be nonnegative")
    scales = ScaleSet.from_geometry(g)
    arch = NondimArch(
        Q=g.rise / g.thickness,
        a=tuple(a),
        c=c_dim / scales.damping,
        modes=None if modes is None else tuple(modes),
    )
    return arch, scales
