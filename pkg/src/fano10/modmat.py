"""Vectorized linear algebra over F_p on int64 numpy arrays.

All entries are kept reduced to [0, p). Elimination reduces after every row
update, so intermediate magnitudes stay below p * (p - 1) + p < 2**63 for any
p below 2**31. Plain matmul would overflow for large p, hence the 16-bit
split in matmul_mod.
"""

from __future__ import annotations

import numpy as np

_SPLIT_LIMIT = 1 << 21  # below this, n * p^2 fits in int64 for n < 2^21


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    if p < _SPLIT_LIMIT and a.shape[-1] < _SPLIT_LIMIT:
        return (a @ b) % p
    hi, lo = a >> 16, a & 0xFFFF
    return ((hi @ b) % p * (1 << 16) + (lo @ b) % p) % p


def pow_mod(base: np.ndarray, e: int, p: int) -> np.ndarray:
    """Elementwise base**e mod p for int64 arrays."""
    out = np.ones_like(base)
    b = base % p
    while e:
        if e & 1:
            out = out * b % p
        b = b * b % p
        e >>= 1
    return out


def inv_mod(a: np.ndarray, p: int) -> np.ndarray:
    return pow_mod(a, p - 2, p)


def rref_mod(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with unit pivots; returns (R, pivot columns)."""
    m = a % p
    m = m.astype(np.int64, copy=True)
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            m[[r, i]] = m[[i, r]]
        m[r] = m[r] * pow(int(m[r, c]), -1, p) % p
        col = m[:, c].copy()
        col[r] = 0
        m -= np.outer(col, m[r])
        m %= p
        pivots.append(c)
        r += 1
    return m, pivots


def rank_mod(a: np.ndarray, p: int) -> int:
    return len(rref_mod(a, p)[1])


def nullspace_mod(a: np.ndarray, p: int) -> np.ndarray:
    """Rows span the right kernel of a (shape (nullity, cols))."""
    red, pivots = rref_mod(a, p)
    cols = a.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, fc in enumerate(free):
        basis[k, fc] = 1
        for r, pc in enumerate(pivots):
            basis[k, pc] = -red[r, fc] % p
    return basis


def det_mod(a: np.ndarray, p: int) -> int:
    m = a % p
    m = m.astype(np.int64, copy=True)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("det of a non-square matrix")
    det = 1
    for c in range(n):
        nz = np.nonzero(m[c:, c])[0]
        if nz.size == 0:
            return 0
        i = c + int(nz[0])
        if i != c:
            m[[c, i]] = m[[i, c]]
            det = -det % p
        piv = int(m[c, c])
        det = det * piv % p
        inv = pow(piv, -1, p)
        col = m[c + 1:, c] * inv % p
        m[c + 1:] -= np.outer(col, m[c])
        m[c + 1:] %= p
    return det


def solve_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """One solution x of a @ x = b, or None when inconsistent."""
    b2 = b.reshape(-1, 1) if b.ndim == 1 else b
    aug = np.concatenate([a % p, b2 % p], axis=1)
    red, pivots = rref_mod(aug, p)
    ncols = a.shape[1]
    if any(c >= ncols for c in pivots):
        return None
    x = np.zeros((ncols, b2.shape[1]), dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = red[r, ncols:]
    return x[:, 0] if b.ndim == 1 else x


def batched_rank_mod(mats: np.ndarray, p: int) -> np.ndarray:
    """Ranks of a stack of matrices, shape (N, m, n) -> (N,), in one pass.

    Straight Gaussian elimination run in lockstep over the batch: each matrix
    keeps its own pivot counter, and a matrix whose current column has no
    usable pivot simply does not advance.
    """
    a = (mats % p).astype(np.int64, copy=True)
    n_batch, rows, cols = a.shape
    rank = np.zeros(n_batch, dtype=np.int64)
    bi = np.arange(n_batch)
    for c in range(cols):
        sub = a[:, :, c].copy()
        # mask out rows already consumed as pivots
        row_idx = np.arange(rows)[None, :]
        sub[row_idx < rank[:, None]] = 0
        piv_row = np.argmax(sub != 0, axis=1)
        has = sub[bi, piv_row] != 0
        if not has.any():
            continue
        r = rank.copy()
        r[~has] = 0
        piv_row[~has] = 0
        # swap pivot row into position r (no-op rows where has is False)
        tmp = a[bi, r].copy()
        a[bi, r] = a[bi, piv_row]
        a[bi, piv_row] = tmp
        piv = a[bi, r, c].copy()
        piv[~has] = 1
        inv = pow_mod(piv, p - 2, p)
        a[bi, r] = a[bi, r] * inv[:, None] % p
        fac = a[:, :, c].copy()
        fac[row_idx <= r[:, None]] = 0
        fac[~has] = 0
        a -= fac[:, :, None] * a[bi, r][:, None, :]
        a %= p
        rank[has] += 1
    return rank
