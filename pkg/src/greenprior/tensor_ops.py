"""Third-order tensor algebra: block-circulant form, mode-3 FFT, t-product, t-SVD.

A third-order tensor is an ndarray of shape ``(n1, n2, n3)`` whose frontal
slices are ``t[:, :, k]``.  Two Fourier conventions are used side by side:

* unnormalized DFT -- the convention under which the defining identity
  ``bcirc(a) @ bcirc(b) == bcirc(tprod(a, b))`` holds; `tprod` and `tsvd`
  use it internally.
* unitary DFT (``1/sqrt(n3)`` each direction) -- preserves the Frobenius
  norm, so energy-based coefficient thresholds carry over unchanged; this
  is the default of `fft_mode3` / `ifft_mode3` and what the collaborative
  filter works in.

For real input the Fourier slices come in conjugate pairs
(``slice[k] == conj(slice[n3 - k])``), so slice-wise factorizations are
computed for the first ``n3 // 2 + 1`` slices only and mirrored.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "bcirc",
    "unfold",
    "fold",
    "fft_mode3",
    "ifft_mode3",
    "tprod",
    "ttranspose",
    "t_identity",
    "tsvd",
]


def bcirc(t: np.ndarray) -> np.ndarray:
    """Block-circulant matrix of a third-order tensor.

    Block ``(i, j)`` is frontal slice ``(i - j) mod n3``; the first block
    column stacks the slices top to bottom in order.  Output shape is
    ``(n1 * n3, n2 * n3)``.
    """
    t = np.asarray(t)
    if t.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got shape {t.shape}")
    n1, n2, n3 = t.shape
    out = np.empty((n1 * n3, n2 * n3), dtype=t.dtype)
    for i in range(n3):
        for j in range(n3):
            out[i * n1 : (i + 1) * n1, j * n2 : (j + 1) * n2] = t[:, :, (i - j) % n3]
    return out


def unfold(t: np.ndarray) -> np.ndarray:
    """Stack frontal slices vertically: the first block column of `bcirc`."""
    n1, n2, n3 = t.shape
    return np.moveaxis(t, 2, 0).reshape(n3 * n1, n2)


def fold(m: np.ndarray, n3: int) -> np.ndarray:
    """Inverse of `unfold` for a matrix of shape ``(n1 * n3, n2)``."""
    n13, n2 = m.shape
    if n13 % n3:
        raise ValueError(f"cannot fold {m.shape} into {n3} frontal slices")
    return np.moveaxis(m.reshape(n3, n13 // n3, n2), 0, 2)


def fft_mode3(t: np.ndarray, unitary: bool = True) -> np.ndarray:
    """DFT along the third mode; unitary scaling by default."""
    return np.fft.fft(t, axis=2, norm="ortho" if unitary else "backward")


def ifft_mode3(tf: np.ndarray, unitary: bool = True) -> np.ndarray:
    """Inverse DFT along the third mode (complex output; take ``.real`` as needed)."""
    return np.fft.ifft(tf, axis=2, norm="ortho" if unitary else "backward")


def tprod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor-tensor product via slice-wise matrix products in the Fourier domain.

    Requires ``a.shape[1] == b.shape[0]`` and matching third dimensions.
    Real inputs yield a real result.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 3 or b.ndim != 3:
        raise ValueError("t-product operands must be third-order tensors")
    if a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ValueError(f"t-product shape mismatch: {a.shape} * {b.shape}")
    af = np.fft.fft(a, axis=2)
    bf = np.fft.fft(b, axis=2)
    cf = np.einsum("ijk,jlk->ilk", af, bf)
    c = np.fft.ifft(cf, axis=2)
    if np.iscomplexobj(a) or np.iscomplexobj(b):
        return c
    return c.real


def ttranspose(t: np.ndarray) -> np.ndarray:
    """Tensor transpose: conjugate-transpose each slice and reverse slices 1..n3-1."""
    t = np.asarray(t)
    n1, n2, n3 = t.shape
    out = np.empty((n2, n1, n3), dtype=t.dtype)
    out[:, :, 0] = np.conj(t[:, :, 0]).T
    for k in range(1, n3):
        out[:, :, k] = np.conj(t[:, :, n3 - k]).T
    return out


def t_identity(n: int, n3: int, dtype=float) -> np.ndarray:
    """Identity element of the t-product: eye in slice 0, zeros elsewhere."""
    out = np.zeros((n, n, n3), dtype=dtype)
    out[:, :, 0] = np.eye(n)
    return out


def _phase_fix(u: np.ndarray, vh: np.ndarray, tol: float = 1e-12):
    """Rotate each singular pair so the first non-negligible entry of the
    left vector is real and nonnegative.  Keeps u @ diag(s) @ vh unchanged;
    makes the factorization deterministic."""
    for j in range(u.shape[1]):
        col = u[:, j]
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size == 0:
            continue
        c = col[idx[0]] / abs(col[idx[0]])
        u[:, j] = col * np.conj(c)
        if j < vh.shape[0]:
            vh[j, :] = vh[j, :] * c
    return u, vh


def tsvd(a: np.ndarray):
    """t-SVD: returns ``(u, s, v)`` with ``a == u * s * ttranspose(v)``.

    Computed slice by slice in the Fourier domain; ``u`` and ``v`` are
    t-orthogonal and ``s`` carries the singular values on the diagonal of
    each Fourier slice.  For real input only the non-redundant slices are
    factorized and the rest mirrored, which also guarantees an exactly
    conjugate-symmetric spectrum and hence real factors.
    """
    a = np.asarray(a)
    if a.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got shape {a.shape}")
    n1, n2, n3 = a.shape
    real_in = not np.iscomplexobj(a)
    af = np.fft.fft(a, axis=2)
    uf = np.empty((n1, n1, n3), dtype=complex)
    sf = np.zeros((n1, n2, n3), dtype=complex)
    vf = np.empty((n2, n2, n3), dtype=complex)
    m = min(n1, n2)
    diag = np.arange(m)
    upper = n3 // 2 + 1 if real_in else n3
    for k in range(upper):
        u, s, vh = np.linalg.svd(af[:, :, k])
        u, vh = _phase_fix(u, vh)
        uf[:, :, k] = u
        sf[diag, diag, k] = s
        vf[:, :, k] = np.conj(vh).T
    if real_in:
        for k in range(upper, n3):
            uf[:, :, k] = np.conj(uf[:, :, n3 - k])
            sf[:, :, k] = np.conj(sf[:, :, n3 - k])
            vf[:, :, k] = np.conj(vf[:, :, n3 - k])
    u = np.fft.ifft(uf, axis=2)
    s = np.fft.ifft(sf, axis=2)
    v = np.fft.ifft(vf, axis=2)
    if real_in:
        return u.real, s.real, v.real
    return u, s, v
