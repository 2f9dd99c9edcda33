import os
import subprocess
import sys

import numpy as np
import pytest

from chen_bounds import _kernels
from chen_bounds.invariants import random_frames, random_planes

from conftest import instance


@pytest.fixture(params=[3, 4, 5])
def R(request):
    n = request.param
    return instance(m=n, n=n, seed=11 * n, frame="rotated").curvature


def test_sectional_backends_agree(R):
    n = R.shape[0]
    P = random_planes(3, 2000, n)
    a = _kernels.sectional_batch_numpy(R, P[:, 0], P[:, 1])
    b = _kernels.sectional_batch_numba(np.ascontiguousarray(R), np.ascontiguousarray(P[:, 0]),
                                       np.ascontiguousarray(P[:, 1]))
    assert np.max(np.abs(a - b)) <= 1e-12


def test_sectional_matches_direct_contraction(R):
    n = R.shape[0]
    P = random_planes(4, 50, n)
    direct = np.einsum("ijkl,si,sj,sk,sl->s", R, P[:, 0], P[:, 1], P[:, 1], P[:, 0])
    assert np.max(np.abs(_kernels.sectional_batch(R, P[:, 0], P[:, 1]) - direct)) <= 1e-12


def test_frame_backends_agree(R):
    n = R.shape[0]
    Q = random_frames(5, 500, n)
    a = _kernels.frame_sectional_numpy(R, Q)
    idx = np.arange(n)
    a[:, idx, idx] = 0.0
    b = _kernels.frame_sectional_numba(np.ascontiguousarray(R), Q)
    assert np.max(np.abs(a - b)) <= 1e-12
    # leading rows only
    sub = _kernels.frame_sectional(R, np.ascontiguousarray(Q[:, :2]))
    assert sub.shape == (500, 2, 2)
    assert np.allclose(sub[:, 0, 1], a[:, 0, 1], atol=1e-12)


@pytest.mark.parametrize("backend", ["numpy", "numba"])
def test_backend_env_flag(backend):
    code = "from chen_bounds import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, CHEN_BOUNDS_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == backend


def test_bad_backend_rejected():
    env = dict(os.environ, CHEN_BOUNDS_BACKEND="fortran")
    out = subprocess.run([sys.executable, "-c", "import chen_bounds"], env=env, capture_output=True, text=True)
    assert out.returncode != 0 and "CHEN_BOUNDS_BACKEND" in out.stderr


def test_numpy_backend_end_to_end():
    code = (
        "from chen_bounds import *\n"
        "from chen_bounds.forge import GeneratorSpec, make_instance\n"
        "S = make_instance(GeneratorSpec(m=4, n=4, seed=2))\n"
        "print(repr(inf_sectional(S).value))\n"
    )
    vals = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, CHEN_BOUNDS_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        vals[backend] = float(out.stdout)
    assert vals["numpy"] == pytest.approx(vals["numba"], abs=1e-10)
