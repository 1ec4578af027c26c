"""Batch invariant evaluation, compiled when available.

The Cython extension ``demonic._kernels`` is used if it was built; otherwise,
or when ``DEMONIC_PURE_PYTHON`` is set, the pure-Python twin is loaded.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels_py

if os.environ.get("DEMONIC_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"


@dataclass(frozen=True)
class Corpus:
    """Distributions over (base index, w) in CSR layout, float weights.

    Weights are dyadic with small denominators, so the float sums of
    ``p * w`` and ``p * X`` are exact.
    """
    offsets: np.ndarray
    base: np.ndarray
    w: np.ndarray
    prob: np.ndarray

    def __len__(self):
        return len(self.offsets) - 1

    @classmethod
    def from_rows(cls, rows) -> "Corpus":
        """``rows``: iterable of lists of ``(base_index, w, probability)``."""
        offsets, base, w, prob = [0], [], [], []
        for row in rows:
            for k, wj, p in row:
                base.append(k)
                w.append(wj)
                prob.append(float(p))
            offsets.append(len(base))
        return cls(np.asarray(offsets, np.int64), np.asarray(base, np.int64),
                   np.asarray(w, np.int64), np.asarray(prob, np.float64))


@dataclass(frozen=True)
class PackedTau:
    n: np.ndarray
    dst: np.ndarray
    dw: np.ndarray
    p: np.ndarray

    @classmethod
    def from_rows(cls, rows) -> "PackedTau":
        """``rows``: 12 sequences of ``((base_index, dw), probability)``."""
        width = max(len(r) for r in rows)
        n = np.zeros(len(rows), np.int64)
        dst = np.zeros((len(rows), width), np.int64)
        dw = np.zeros((len(rows), width), np.int64)
        p = np.zeros((len(rows), width), np.float64)
        for b, row in enumerate(rows):
            n[b] = len(row)
            for r, ((k, d), q) in enumerate(row):
                dst[b, r], dw[b, r], p[b, r] = k, d, float(q)
        return cls(n, dst, dw, p)


def phi_before(c: Corpus, impl=None) -> np.ndarray:
    return (impl or _impl).phi_before(c.offsets, c.base, c.w, c.prob)


def phi_after(c: Corpus, t: PackedTau, impl=None) -> np.ndarray:
    return (impl or _impl).phi_after(c.offsets, c.base, c.w, c.prob, t.n, t.dst, t.dw, t.p)


def implementations() -> dict:
    out = {"python": _kernels_py}
    if _impl is not _kernels_py:
        out["cython"] = _impl
    return out
