import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from archswitch.errors import UnsupportedMode, ValidationError
from archswitch.model import (
    ArchGeometry,
    LoadProgram,
    NondimArch,
    ScaleSet,
    StateVector,
    internal_force_scalar,
    internal_force_vector,
    midpoint_displacement,
    mode_eigenvalue,
    mode_shape,
    nondimensionalize,
    total_energy,
)

STEEL = dict(span=0.1, thickness=1e-3, width=10e-3, youngs_modulus=200e9, density=7850.0, rise=6e-3)


def _x_reference(d, Q, a1):
    # cubic law written out independently
    M4 = (2 * math.pi) ** 4
    return M4 * (d + 0.75 * Q * Q * d * (4 * a1 - d) * (2 * a1 - d))


class TestModes:
    def test_eigenvalues(self):
        assert mode_eigenvalue(1) == pytest.approx(2 * math.pi, rel=1e-15)
        assert mode_eigenvalue(5) == pytest.approx(6 * math.pi, rel=1e-15)
        assert mode_eigenvalue(2) == pytest.approx(2.86 * math.pi, rel=1e-15)

    @pytest.mark.parametrize("bad", [0, -1, 8, 10, 1.5])
    def test_unsupported(self, bad):
        with pytest.raises(UnsupportedMode):
            mode_eigenvalue(bad)

    def test_shape_values(self):
        assert mode_shape(1, 0.0) == 0.0
        assert mode_shape(1, 0.5) == pytest.approx(2.0, abs=1e-15)
        assert mode_shape(3, 0.5) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("i", [1, 3, 5, 7, 9])
    def test_odd_boundaries_and_midspan_slope(self, i):
        assert mode_shape(i, 0.0) == 0.0
        assert abs(mode_shape(i, 1.0)) < 1e-14
        h = 1e-6
        slope = (mode_shape(i, 0.5 + h) - mode_shape(i, 0.5 - h)) / (2 * h)
        assert abs(slope) < 1e-6

    @pytest.mark.parametrize("i", [2, 4, 6])
    def test_even_boundaries(self, i):
        # tabulated eigenvalues carry three significant digits
        assert mode_shape(i, 0.0) == 0.0
        assert abs(mode_shape(i, 1.0)) < 2e-3

    def test_shape_domain(self):
        with pytest.raises(ValidationError):
            mode_shape(1, 1.5)


class TestScales:
    def test_Q_ratio(self):
        arch, _ = nondimensionalize(ArchGeometry(**STEEL), 0.0, [1.0])
        assert arch.Q == pytest.approx(6.0, rel=1e-15)

    def test_unit_damping(self):
        g = ArchGeometry(**STEEL)
        s = ScaleSet.from_geometry(g)
        arch, _ = nondimensionalize(g, s.damping, [1.0])
        assert arch.c == pytest.approx(1.0, rel=1e-14)

    def test_time_scale_by_hand(self):
        g = ArchGeometry(**STEEL)
        s = ScaleSet.from_geometry(g)
        # I = b w^3 / 12 with b = 10 mm, w = 1 mm; A = b w
        I = 10e-3 * (1e-3) ** 3 / 12.0
        A = 10e-3 * 1e-3
        expected = math.sqrt(7850.0 * A * 0.1**4 / (200e9 * I))
        assert s.time == pytest.approx(expected, rel=1e-14)
        # rectangular section: sqrt(12 rho / E) L^2 / w
        assert s.time == pytest.approx(math.sqrt(12 * 7850.0 / 200e9) * 0.1**2 / 1e-3, rel=1e-14)

    @given(st.floats(1e-6, 1e6), st.sampled_from(["force", "time", "rate", "damping", "displacement"]))
    def test_roundtrip(self, x, kind):
        s = ScaleSet.from_geometry(ArchGeometry(**STEEL))
        assert s.to_dim(kind, s.to_nondim(kind, x)) == pytest.approx(x, rel=1e-12)

    def test_deep_arch_warns(self):
        with pytest.warns(UserWarning):
            ArchGeometry(**{**STEEL, "rise": 0.03})

    def test_rejects_nonpositive(self):
        with pytest.raises(ValidationError):
            ArchGeometry(**{**STEEL, "span": 0.0})


weights = st.lists(st.floats(-1.5, 1.5), min_size=2, max_size=2)


class TestForces:
    @given(st.floats(0.5, 10.0), st.lists(st.floats(-2, 2), min_size=1, max_size=3))
    def test_as_fabricated_is_equilibrium(self, Q, a):
        arch = NondimArch(Q=Q, a=a)
        assert np.all(internal_force_vector(arch.weights, arch) == 0.0)

    @given(st.floats(1.0, 8.0), weights, weights)
    def test_force_is_energy_gradient(self, Q, a, A):
        arch = NondimArch(Q=Q, a=a)
        A = np.array(A)
        f = internal_force_vector(A, arch)

        def elastic(x):
            e = total_energy(StateVector(x), arch, 0.0)
            return e.bending + e.compression

        h = 1e-6
        fd = np.array([(elastic(A + h * e) - elastic(A - h * e)) / (2 * h) for e in np.eye(2)])
        # relative to the size of the bending and stretching terms
        S = np.sum(arch.weights**2 * arch.M2) + np.sum(A**2 * arch.M2)
        scale = np.max(arch.M4 * (np.abs(A) + np.abs(arch.weights)) + 1.5 * Q * Q * S * np.abs(A) * arch.M2)
        assert np.max(np.abs(fd - f)) <= 1e-6 * scale

    @pytest.mark.parametrize("Q,a1", [(6.0, 1.0), (4.0, 0.7), (2.0, 1.3)])
    def test_one_mode_cubic_identity(self, Q, a1):
        arch = NondimArch(Q=Q, a=(a1,))
        d = np.linspace(0.0, 2 * a1, 101)
        X = internal_force_scalar(d, arch)
        f = np.array([internal_force_vector([a1 - x / 2], arch)[0] for x in d])
        ref = _x_reference(d, Q, a1)
        scale = np.max(np.abs(ref))
        assert np.max(np.abs(-4.0 * f - ref)) < 1e-12 * scale
        assert np.max(np.abs(X - ref)) < 1e-12 * scale

    def test_scalar_at_zero(self, arch6):
        assert internal_force_scalar(0.0, arch6) == 0.0

    def test_midpoint_displacement(self):
        arch = NondimArch(Q=6.0, a=(1.0, 0.3), modes=(1, 5))
        assert midpoint_displacement([0.8, 0.2], arch) == pytest.approx(2 * (0.2 + 0.1))


class TestEnergy:
    def test_as_fabricated_zero(self, arch6):
        e = total_energy(StateVector(arch6.weights), arch6, 0.0)
        assert e.bending == e.compression == e.kinetic == 0.0

    @given(st.floats(0.5, 10.0), weights, weights, st.floats(-1e5, 1e5))
    def test_compression_nonnegative(self, Q, a, A, F):
        e = total_energy(StateVector(A), NondimArch(Q=Q, a=a), F)
        assert e.compression >= 0.0
        assert e.total == pytest.approx(e.bending + e.compression + e.work + e.kinetic)


class TestValidation:
    def test_arch_rejects(self):
        with pytest.raises(ValidationError):
            NondimArch(Q=-1.0, a=(1.0,))
        with pytest.raises(ValidationError):
            NondimArch(Q=6.0, a=(1.0, 0.1), modes=(1,))
        with pytest.raises(ValidationError):
            NondimArch(Q=6.0, a=(1.0,), c=-1.0)

    def test_load_program(self):
        with pytest.raises(ValidationError):
            LoadProgram(nu=1.0, epsilon=1.0)
        with pytest.raises(ValidationError):
            LoadProgram(nu=-1.0)
        ramp = LoadProgram(F0=10.0, nu=2.0)
        assert ramp.force(3.0) == 16.0
        assert ramp.critical_time(20.0) == 5.0
        assert LoadProgram(epsilon=0.5).force(7.0, F_c=3.0) == 3.5
