"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Same signatures, same arithmetic order; used when the extension is not built.
"""

import math


def _excess(d2, r, r2, code):
    diff2 = d2 - r2
    if code == 0:
        return diff2
    d = math.sqrt(d2)
    dr = diff2 / (d + r)
    if code == 1:
        return dr
    if code == 2:
        return math.exp(r) * math.expm1(dr)
    return dr * (d2 + d * r + r2)


def shell_excess(xs, ys, ks, ls, r, r2, code, out):
    n, m = len(xs), len(ks)
    if len(ys) != n or len(out) != n or len(ls) != m:
        raise ValueError("shape mismatch")
    kl = [(float(k), float(l)) for k, l in zip(ks, ls)]
    for i in range(n):
        s = math.sqrt(ys[i])
        inv = 1.0 / s
        x = float(xs[i])
        acc = 0.0
        for k, l in kl:
            px = (k + l * x) * inv - 0.5
            py = l * s - 0.5
            acc = acc + _excess(px * px + py * py, r, r2, code)
        out[i] = acc


def shell_norms(xs, ys, ks, ls, out):
    n, m = len(xs), len(ks)
    if len(ys) != n or len(out) != n or len(ls) != m or len(out[0]) != m:
        raise ValueError("shape mismatch")
    kl = [(float(k), float(l)) for k, l in zip(ks, ls)]
    for i in range(n):
        s = math.sqrt(ys[i])
        inv = 1.0 / s
        x = float(xs[i])
        row = out[i]
        for j, (k, l) in enumerate(kl):
            px = (k + l * x) * inv - 0.5
            py = l * s - 0.5
            row[j] = math.sqrt(px * px + py * py)
