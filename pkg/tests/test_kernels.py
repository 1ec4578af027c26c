import os
import subprocess
import sys

import numpy as np
import pytest

from demonic import _kernels_py, kernels
from demonic.semantics import tau_lift
from demonic.oplib import compose_ops
from demonic.synthesis import BASE_STATES, abstract_tau, enumerate_maps
from demonic.thermo import phi
from demonic.verifier import Corpus, random_rows, row_to_dist

IMPLS = kernels.implementations()


def test_python_backend_always_available():
    assert IMPLS["python"] is _kernels_py


def test_compiled_backend_built():
    # the extension is part of the normal build; skip only when deliberately disabled
    if os.environ.get("DEMONIC_NO_EXT") or os.environ.get("DEMONIC_PURE_PYTHON"):
        pytest.skip("extension disabled")
    assert kernels.BACKEND == "cython"


def test_env_forces_python():
    code = "import demonic.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, DEMONIC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("name", sorted(IMPLS))
def test_phi_before_matches_exact(name):
    rows = random_rows(400, 5)
    c = kernels.Corpus.from_rows(rows)
    got = kernels.phi_before(c, IMPLS[name])
    want = np.array([phi(row_to_dist(r)).phi for r in rows])
    np.testing.assert_allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("name", sorted(IMPLS))
def test_phi_after_matches_exact(name):
    rows = random_rows(150, 6)
    c = kernels.Corpus.from_rows(rows)
    for names in [("LPistIn",), ("PartIn", "RPistIn", "PartOut"), ("RPistOut", "LPistIn")]:
        stmt = compose_ops(names)
        t = kernels.PackedTau.from_rows(abstract_tau(stmt).rows)
        got = kernels.phi_after(c, t, IMPLS[name])
        want = np.array([phi(tau_lift(stmt, row_to_dist(r))).phi for r in rows])
        np.testing.assert_allclose(got, want, atol=1e-12)


@pytest.mark.skipif("cython" not in IMPLS, reason="extension not built")
def test_backends_agree_on_reachable_maps():
    corpus = Corpus.random(3000, 2)
    before = [kernels.phi_before(corpus.packed, IMPLS[k]) for k in ("python", "cython")]
    np.testing.assert_allclose(before[0], before[1], atol=1e-13)
    for m, _ in list(enumerate_maps(3))[::7]:
        t = kernels.PackedTau.from_rows(m.rows)
        a = kernels.phi_after(corpus.packed, t, IMPLS["python"])
        b = kernels.phi_after(corpus.packed, t, IMPLS["cython"])
        np.testing.assert_allclose(a, b, atol=1e-13)


def test_packed_tau_shape():
    m, _ = next(iter(enumerate_maps(1)))
    t = kernels.PackedTau.from_rows(m.rows)
    assert t.n.shape == (len(BASE_STATES),)
    assert t.dst.shape[0] == len(BASE_STATES)


def test_empty_corpus():
    c = kernels.Corpus.from_rows([])
    assert len(c) == 0
    for impl in IMPLS.values():
        assert kernels.phi_before(c, impl).shape == (0,)
