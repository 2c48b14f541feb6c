"""Pure-NumPy versions of the compiled kernels in ``_ckernels.pyx``."""

import numpy as np


def bim_kernel_parts(h, hx, hxx, out=None, scale=1.0, im_shift=0.0):
    K = bim_kernel(h, hx, hxx) * scale
    K[np.diag_indices(K.shape[0])] += 1j * im_shift
    if out is None:
        return np.ascontiguousarray(K.real), np.ascontiguousarray(K.imag)
    out[0][...] = K.real
    out[1][...] = K.imag
    return out


def bim_kernel(h, hx, hxx):
    h = np.ascontiguousarray(h, dtype=float)
    hx = np.ascontiguousarray(hx, dtype=float)
    hxx = np.ascontiguousarray(hxx, dtype=float)
    M = h.shape[0]
    idx = np.arange(M)
    d = (idx[None, :] - idx[:, None]) % M
    sa = np.sin(np.pi * np.arange(M) / M)[d]
    ca = np.cos(np.pi * np.arange(M) / M)[d]
    S = np.sinh(0.5 * h)
    C = np.cosh(0.5 * h)
    sh = S[None, :] * C[:, None] - C[None, :] * S[:, None]
    ch = C[None, :] * C[:, None] - S[None, :] * S[:, None]
    p = hx[None, :]
    np.fill_diagonal(sa, 1.0)
    D = sa * sa + sh * sh
    re = 0.5 * sh * (p * ch * sa - ca * sh) / (D * sa)
    im = 0.5 * (p * sa * ca - sh * ch) / D
    K = re + 1j * im
    q = 2.0 * (1.0 + hx * hx)
    K[idx, idx] = hxx * hx / q + 1j * hxx / q
    return K


def conv_direct(a, b, half):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    T, n = a.shape
    out = np.zeros((T, n), dtype=complex)
    # c[l] = sum_m a[l - m] b[m], indices offset by ``half``
    for m in range(-half, half + 1):
        bm = b[:, m + half, None]
        lo = max(-half, m - half)
        hi = min(half, m + half)
        out[:, lo + half : hi + half + 1] += a[:, lo - m + half : hi - m + half + 1] * bm
    return out
