import os
import subprocess
import sys

import numpy as np
import pytest

from corrsop import _backend, _kernels_py

_kernels = pytest.importorskip("corrsop._kernels")


def test_backend_selected():
    assert _backend.BACKEND in ("cython", "python")


def test_pure_python_switch():
    env = dict(os.environ, CORRSOP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from corrsop import _backend; print(_backend.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def _grid():
    rng = np.random.default_rng(0)
    a = np.concatenate([rng.uniform(0, 30, 400), rng.uniform(100, 400, 50), [0.0, 1e-160, 5.0, 300.0]])
    b = np.concatenate([rng.uniform(0, 30, 400), rng.uniform(0, 420, 50), [3.0, 8.0, 0.0, 300.0]])
    return a, b


@pytest.mark.parametrize("M", [1, 2, 5])
def test_marcum_backends_agree(M):
    a, b = _grid()
    qp, pp, fp = _kernels_py.marcum_qp(M, a, b, 1e-13, 10000)
    qc, pc, fc = _kernels.marcum_qp(M, a, b, 1e-13, 10000)
    assert fp == fc == 0
    assert np.allclose(qp, qc, rtol=1e-13, atol=1e-15)
    assert np.allclose(pp, pc, rtol=1e-13, atol=1e-15)


def test_outage_backends_identical():
    rng = np.random.default_rng(1)
    draws = rng.standard_normal((20000, 3, 1 + 2 + 2, 2)) * np.sqrt(0.5)
    eta = np.array([0.4, -0.9])
    args = (draws, np.sqrt(1 - eta ** 2), eta, np.sqrt(1 - 0.36), 0.6, 30.0, 4.0, 2.0)
    assert np.array_equal(_kernels_py.count_outages(*args), _kernels.count_outages(*args))
