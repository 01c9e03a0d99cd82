"""Ordered accumulation of per-slit terms.

Terms are always combined in an order fixed by slit index so that every
output element is a function of its own inputs only; this keeps grid rows and
trajectory batches bit-reproducible however the work is split up.
"""

import numpy as np

#: slit count from which compensated (error-free transform) accumulation is used
COMPENSATED_FROM = 256


def neumaier_sum(terms: np.ndarray) -> np.ndarray:
    """Sum real ``terms`` along axis 0 with Neumaier's compensated scheme.

    Every step is the error-free transformation ``a + b = s + e``; the
    running error is folded back in once at the end.
    """
    terms = np.asarray(terms, dtype=float)
    s = np.zeros(terms.shape[1:])
    c = np.zeros(terms.shape[1:])
    for v in terms:
        t = s + v
        big = np.abs(s) >= np.abs(v)
        c += np.where(big, (s - t) + v, (v - t) + s)
        s = t
    return s + c


def cascade_sum(terms: np.ndarray) -> np.ndarray:
    """Compensated pairwise sum of real ``terms`` along axis 0.

    Neighbouring terms (by index) are combined level by level with the
    error-free transformation ``a + b = s + e`` (Knuth's TwoSum); the rounding
    errors are summed in the same tree and added back at the end. Accuracy
    matches a left-to-right Neumaier loop while needing only log2(N)
    vectorised passes.
    """
    s = np.asarray(terms, dtype=float)
    c = np.zeros_like(s)
    while s.shape[0] > 1:
        n = s.shape[0] - s.shape[0] % 2
        a, b = s[0:n:2], s[1:n:2]
        t = a + b
        bp = t - a
        err = (a - (t - bp)) + (b - bp)
        comp = c[0:n:2] + c[1:n:2] + err
        if n < s.shape[0]:
            t = np.concatenate([t, s[n:]])
            comp = np.concatenate([comp, c[n:]])
        s, c = t, comp
    return s[0] + c[0]


def ordered_sum(terms: np.ndarray) -> np.ndarray:
    terms = np.asarray(terms)
    if terms.shape[0] >= COMPENSATED_FROM:
        if np.iscomplexobj(terms):
            return cascade_sum(terms.real) + 1j * cascade_sum(terms.imag)
        return cascade_sum(terms)
    out = np.zeros(terms.shape[1:], dtype=terms.dtype)
    for v in terms:
        out = out + v
    return out
