"""Pure-Python twin of ``_kernels.pyx`` (same signatures, same arithmetic)."""
import math

import numpy as np

X_OF = [0.5 * (k // 4) for k in range(12)]
H_OF = [1.0 if k // 4 == 1 else 0.0 for k in range(12)]


def h2(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    if p == 0.5:
        return 1.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def phi_before(offsets, base, w, prob):
    offsets, base, w, prob = (a.tolist() for a in (offsets, base, w, prob))
    out = []
    for i in range(len(offsets) - 1):
        mw = mb = mx = 0.0
        for j in range(offsets[i], offsets[i + 1]):
            p = prob[j]
            mw += p * w[j]
            mb += p * H_OF[base[j]]
            mx += p * X_OF[base[j]]
        out.append(mw - 0.5 * (mb + h2(mx)))
    return np.array(out, dtype=np.float64)


def phi_after(offsets, base, w, prob, tau_n, tau_dst, tau_dw, tau_p):
    offsets, base, w, prob = (a.tolist() for a in (offsets, base, w, prob))
    rows = [list(zip(tau_dst[b][:tau_n[b]].tolist(), tau_dw[b][:tau_n[b]].tolist(),
                     tau_p[b][:tau_n[b]].tolist())) for b in range(len(tau_n))]
    out = []
    for i in range(len(offsets) - 1):
        mw = mb = mx = 0.0
        for j in range(offsets[i], offsets[i + 1]):
            p = prob[j]
            wj = w[j]
            for k, dw, tp in rows[base[j]]:
                q = p * tp
                mw += q * (wj + dw)
                mb += q * H_OF[k]
                mx += q * X_OF[k]
        out.append(mw - 0.5 * (mb + h2(mx)))
    return np.array(out, dtype=np.float64)
