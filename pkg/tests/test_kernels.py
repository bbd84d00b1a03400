import os
import subprocess
import sys

import numpy as np
import pytest

from jsta import kernels
from jsta.kernels import _fallback

compiled = pytest.importorskip("jsta.kernels._pcg", reason="compiled extension not built")


def _problem(rng, n=40):
    wa = rng.random((n - 1, n))
    wb = rng.random((n, n - 1))
    wa[rng.random(wa.shape) < 0.1] = 0.0
    x = rng.normal(size=(n, n))
    return wa, wb, x


def _backend(env_value):
    env = dict(os.environ)
    env.pop("JSTA_PURE_PYTHON", None)
    if env_value is not None:
        env["JSTA_PURE_PYTHON"] = env_value
    r = subprocess.run([sys.executable, "-c", "from jsta import kernels; print(kernels.BACKEND)"],
                       capture_output=True, text=True, env=env, check=True)
    return r.stdout.strip()


def test_env_forces_fallback():
    assert _backend("1") == "python"
    assert _backend(None) == "compiled"


def test_matvec_agrees(rng):
    wa, wb, x = _problem(rng)
    np.testing.assert_allclose(compiled.laplacian_matvec(wa, wb, x), _fallback.laplacian_matvec(wa, wb, x),
                               rtol=1e-13, atol=1e-13)


def test_matvec_matches_dense_laplacian(rng):
    n = 6
    wa, wb, x = _problem(rng, n)
    L = np.zeros((n * n, n * n))
    idx = np.arange(n * n).reshape(n, n)
    for w, a, b in ((wa, idx[:-1], idx[1:]), (wb, idx[:, :-1], idx[:, 1:])):
        for ww, p, q in zip(w.ravel(), a.ravel(), b.ravel()):
            L[p, p] += ww
            L[q, q] += ww
            L[p, q] -= ww
            L[q, p] -= ww
    np.testing.assert_allclose(kernels.laplacian_matvec(wa, wb, x).ravel(), L @ x.ravel(), atol=1e-12)


def test_pcg_agrees(rng):
    wa, wb, x = _problem(rng)
    b = _fallback.laplacian_matvec(wa, wb, x)
    x1, it1, r1 = compiled.pcg_laplacian(wa, wb, b, np.zeros_like(b), 1e-12, 10_000)
    x2, it2, r2 = _fallback.pcg_laplacian(wa, wb, b, np.zeros_like(b), 1e-12, 10_000)
    assert r1 <= 1e-12 and r2 <= 1e-12
    assert abs(it1 - it2) <= 2
    d1, d2 = np.asarray(x1) - x, np.asarray(x2) - x
    # the solution is defined up to a constant on the connected grid
    assert np.ptp(d1) < 1e-8 and np.ptp(d2) < 1e-8


def test_pcg_zero_rhs(rng):
    wa, wb, _ = _problem(rng, 8)
    for impl in (compiled, _fallback):
        x, it, r = impl.pcg_laplacian(wa, wb, np.zeros((8, 8)), np.zeros((8, 8)), 1e-10, 100)
        assert it == 0 and r == 0.0 and not np.asarray(x).any()
