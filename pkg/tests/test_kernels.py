import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from archswitch import _pykernels
from archswitch._backend import BACKEND, kernels
from archswitch.model import NondimArch

try:
    from archswitch import _kernels as ckernels
except ImportError:  # pragma: no cover
    ckernels = None

BACKENDS = [pytest.param(_pykernels, id="python")]
if ckernels is not None:
    BACKENDS.append(pytest.param(ckernels, id="cython"))

needs_cython = pytest.mark.skipif(ckernels is None, reason="compiled kernel not built")


def _modal_params(arch, F0=0.0, nu=0.0):
    return np.concatenate([[arch.N, arch.Q**2, arch.c, F0, nu], arch.weights, arch.M2, arch.M4, arch.load])


def _run(k, kind, params, y0, t_end, rtol=1e-10, atol=1e-12, w=(), off=0.0, val=0.0, stride=1, max_steps=10**6):
    return k.integrate(kind, np.asarray(params, float), np.asarray(y0, float), 0.0, t_end, rtol, atol, 0.0, max_steps,
                       np.asarray(w, float), off, val, stride, math.inf)


def test_backend_name():
    assert BACKEND in ("cython", "python")
    if ckernels is not None:
        assert BACKEND == "cython" or os.environ.get("ARCHSWITCH_PURE_PYTHON")


def test_fallback_switch():
    env = {**os.environ, "ARCHSWITCH_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", "import archswitch; print(archswitch.BACKEND)"], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("k", BACKENDS)
class TestAccuracy:
    def test_riccati_tangent(self, k):
        # y' = 1 + y^2 from 0: tan(t)
        st_, t, y, *_ = _run(k, 2, [1.0, 1.0, 1.0, 0.0], [0.0], 1.0)
        assert st_ == _pykernels.REACHED_END
        assert y[0] == pytest.approx(math.tan(1.0), rel=1e-9)

    def test_linear_ramp(self, k):
        # y' = t / c with K = 0
        _, _, y, *_ = _run(k, 2, [0.0, 2.0, 0.0, 3.0], [1.0], 2.0)
        assert y[0] == pytest.approx(1.0 + 3.0 * 4.0 / 4.0, rel=1e-12)

    def test_damped_oscillator_free_decay(self, k):
        # y'' + c y' = e0 with K = 0: y' = (e0/c)(1 - exp(-c t))
        c, e0 = 2.0, 3.0
        _, _, y, *_ = _run(k, 3, [0.0, c, e0, 0.0], [0.0, 0.0], 1.5)
        v = e0 / c * (1 - math.exp(-c * 1.5))
        pos = e0 / c * (1.5 - (1 - math.exp(-c * 1.5)) / c)
        assert y[1] == pytest.approx(v, rel=1e-9)
        assert y[0] == pytest.approx(pos, rel=1e-9)

    def test_stop_event_lands_on_level(self, k):
        st_, t, y, ts, ys, dys, *_ = _run(k, 2, [1.0, 1.0, 1.0, 0.0], [0.0], 10.0, w=[1.0], val=5.0)
        assert st_ == _pykernels.STOPPED
        assert y[0] == pytest.approx(5.0, rel=1e-9)
        assert t == pytest.approx(math.atan(5.0), rel=1e-9)
        assert ts[-1] == t and ys[-1, 0] == y[0]
        assert dys[-1, 0] == pytest.approx(1 + 25.0, rel=1e-8)

    def test_max_steps(self, k):
        st_, *_ = _run(k, 2, [1.0, 1.0, 1.0, 0.0], [0.0], 1.0, max_steps=3)
        assert st_ == _pykernels.MAX_STEPS

    def test_blow_up_is_reported(self, k):
        st_, t, *_ = _run(k, 2, [1.0, 1.0, 1.0, 0.0], [0.0], 5.0)
        assert st_ in (_pykernels.STEP_UNDERFLOW, _pykernels.NON_FINITE)
        assert t == pytest.approx(math.pi / 2, rel=1e-3)

    def test_record_stride(self, k):
        *_, ts1, _, _, _, n1, _ = _run(k, 2, [1.0, 1.0, 1.0, 0.0], [0.0], 1.0)[:8] + (None,)
        res = _run(k, 2, [1.0, 1.0, 1.0, 0.0], [0.0], 1.0)
        res5 = _run(k, 2, [1.0, 1.0, 1.0, 0.0], [0.0], 1.0, stride=5)
        assert len(res5[3]) < len(res[3])
        assert res5[3][-1] == res[3][-1] == 1.0
        assert np.all(np.diff(res[3]) > 0)

    def test_bad_sizes(self, k):
        with pytest.raises(ValueError):
            _run(k, 2, [1.0, 1.0, 1.0, 0.0], [0.0, 1.0], 1.0)
        with pytest.raises(ValueError):
            _run(k, 2, [1.0, 1.0, 1.0, 0.0], [0.0], 1.0, w=[1.0, 2.0])


@needs_cython
@pytest.mark.parametrize("kind,arch_args", [
    (0, dict(Q=6.0, a=(1.0,), c=0.0)),
    (0, dict(Q=6.0, a=(1.0, 0.3), c=100.0)),
    (1, dict(Q=6.0, a=(1.0,), c=100.0)),
    (1, dict(Q=4.0, a=(1.0, 0.2, 0.05), c=50.0)),
])
def test_backends_agree_modal(kind, arch_args):
    arch = NondimArch(**arch_args)
    n = arch.N
    A0 = arch.weights * 0.9
    y0 = np.concatenate([A0, np.zeros(n)]) if kind == 0 else A0
    p = _modal_params(arch, F0=1000.0, nu=50.0)
    a = _run(_pykernels, kind, p, y0, 0.05)
    b = _run(ckernels, kind, p, y0, 0.05)
    assert a[0] == b[0]
    np.testing.assert_allclose(a[2], b[2], rtol=1e-12, atol=1e-14)
    assert abs(a[7] - b[7]) <= 2  # accepted steps


@needs_cython
@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.floats(-1.0, 1.0), st.floats(0.0, 2.0), st.booleans())
def test_backends_agree_reduced(K, c, y0, nu, inertial):
    kind = 3 if inertial else 2
    y = [y0, 0.0] if inertial else [y0]
    w = [1.0, 0.0] if inertial else [1.0]
    a = _run(_pykernels, kind, [K, c, 0.5, nu], y, 3.0, w=w, val=20.0)
    b = _run(ckernels, kind, [K, c, 0.5, nu], y, 3.0, w=w, val=20.0)
    assert a[0] == b[0]
    assert a[1] == pytest.approx(b[1], rel=1e-12)
    np.testing.assert_allclose(a[2], b[2], rtol=1e-11)
