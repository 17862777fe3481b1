from __future__ import annotations

import math
import os
import subprocess
import sys

import numpy as np
import pytest

import reference
from pasearch._kernels import _fallback

ext = pytest.importorskip("pasearch._kernels._ext")


def _random_draws(n, m, rng):
    mn = n * m
    highs = 2 * np.arange(1, mn + 1, dtype=np.int64)
    return rng.integers(1, highs, dtype=np.int64, endpoint=False).astype(np.uint32)


def test_resolve_backend_parity(rng):
    for n, m in [(1, 1), (7, 1), (50, 3), (400, 2)]:
        r = _random_draws(n, m, rng)
        a = ext.resolve_left_choices(r, m)
        b = _fallback.resolve_left_choices(r.copy(), m)
        assert a.dtype == b.dtype == np.uint32
        assert np.array_equal(a, b)


def test_resolve_matches_reference(rng):
    for n, m in [(6, 1), (5, 2), (30, 3)]:
        r = _random_draws(n, m, rng)
        expected = reference.simulate_endpoint_array(n, m, r.tolist())
        assert ext.resolve_left_choices(r, m).tolist() == expected
        assert _fallback.resolve_left_choices(r, m).tolist() == expected


def test_resolve_all_self_loops():
    # every draw hits the not-yet-assigned position: chain of self-loops
    n, m = 10, 2
    r = (2 * np.arange(1, n * m + 1, dtype=np.uint32)) - 1
    owners = (np.arange(n * m, dtype=np.uint32) // m) + 1
    for mod in (ext, _fallback):
        assert np.array_equal(mod.resolve_left_choices(r, m), owners)


def test_resolve_long_pointer_chain():
    # draw 2k repeatedly: each edge copies the previous edge's left value
    n, m = 64, 1
    r = np.empty(n, dtype=np.uint32)
    r[0] = 1
    r[1:] = 2 * np.arange(1, n, dtype=np.uint32)
    for mod in (ext, _fallback):
        assert mod.resolve_left_choices(r, m).tolist() == [1] * n


def test_csr_backend_parity(rng):
    for n, m in [(1, 1), (40, 3), (500, 2)]:
        r = _random_draws(n, m, rng)
        left = ext.resolve_left_choices(r, m)
        ia, oa = ext.build_right_csr(left, n, m)
        ib, ob = _fallback.build_right_csr(left, n, m)
        assert np.array_equal(ia, ib)
        assert np.array_equal(oa, ob)
        assert ia[0] == 0 and ia[-1] == n * m
        # row v holds the owners of edges whose left choice is v, ascending
        for v in range(1, n + 1):
            row = oa[ia[v - 1] : ia[v]]
            expected = sorted(
                (j - 1) // m + 1 for j, u in enumerate(left.tolist(), 1) if u == v
            )
            assert row.tolist() == expected


def test_cumsum_matches_fsum(rng):
    x = rng.standard_exponential(1000)
    exact = np.array([math.fsum(x[: k + 1]) for k in range(x.size)])
    for mod in (ext, _fallback):
        out = mod.compensated_cumsum(x)
        ulp = np.spacing(exact)
        assert np.all(np.abs(out - exact) <= 2 * ulp)


def test_cumsum_backends_agree_closely(rng):
    x = rng.standard_exponential(200000)
    a = ext.compensated_cumsum(x)
    b = _fallback.compensated_cumsum(x)
    assert np.max(np.abs(a - b) / b) < 1e-14


def test_pure_python_env_forces_fallback(tmp_path):
    code = (
        "import pasearch, numpy as np\n"
        "assert pasearch.BACKEND == 'python', pasearch.BACKEND\n"
        "g = pasearch.generate_sequential(300, 3, 17)\n"
        "np.save(r'{out}', g.left)\n"
    )
    out = tmp_path / "left.npy"
    env = dict(os.environ, PASEARCH_PURE_PYTHON="1")
    subprocess.run(
        [sys.executable, "-c", code.format(out=out)], check=True, env=env
    )
    from pasearch import BACKEND, generate_sequential

    assert BACKEND == "ext"
    assert np.array_equal(np.load(out), generate_sequential(300, 3, 17).left)
