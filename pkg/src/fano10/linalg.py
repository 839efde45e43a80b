"""Exact dense matrices over any Field.

Matrix stores rows as nested tuples of field scalars and is immutable. Over a
PrimeField the heavy operations (rank, rref, nullspace, det, solve, matmul)
dispatch to the numpy kernels in modmat; other fields use generic fraction-free
friendly Gaussian elimination with exact division.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import modmat
from .fields import Field, PrimeField


@dataclass(frozen=True)
class Matrix:
    field: Field
    rows: tuple

    # -- construction ------------------------------------------------------

    @staticmethod
    def build(field: Field, data) -> "Matrix":
        rows = tuple(tuple(field.coerce(x) for x in row) for row in data)
        if rows:
            w = len(rows[0])
            if any(len(r) != w for r in rows):
                raise ValueError("ragged rows")
        return Matrix(field, rows)

    @staticmethod
    def zero(field: Field, m: int, n: int) -> "Matrix":
        z = field.zero
        return Matrix(field, tuple(tuple(z for _ in range(n)) for _ in range(m)))

    @staticmethod
    def identity(field: Field, n: int) -> "Matrix":
        z, o = field.zero, field.one
        return Matrix(field, tuple(tuple(o if i == j else z for j in range(n)) for i in range(n)))

    @staticmethod
    def from_numpy(field: PrimeField, arr: np.ndarray) -> "Matrix":
        p = field.p
        return Matrix(field, tuple(tuple(int(x) % p for x in row) for row in arr))

    @staticmethod
    def row_vector(field: Field, data) -> "Matrix":
        return Matrix.build(field, [list(data)])

    @staticmethod
    def vstack(mats) -> "Matrix":
        mats = list(mats)
        f = mats[0].field
        return Matrix(f, tuple(r for m in mats for r in m.rows))

    @staticmethod
    def hstack(mats) -> "Matrix":
        mats = list(mats)
        f = mats[0].field
        h = mats[0].nrows
        if any(m.nrows != h for m in mats):
            raise ValueError("hstack height mismatch")
        return Matrix(f, tuple(tuple(x for m in mats for x in m.rows[i]) for i in range(h)))

    # -- shape and access --------------------------------------------------

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def row(self, i: int) -> tuple:
        return self.rows[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def submatrix(self, row_idx, col_idx) -> "Matrix":
        return Matrix(self.field, tuple(tuple(self.rows[i][j] for j in col_idx) for i in row_idx))

    def to_numpy(self) -> np.ndarray:
        if not isinstance(self.field, PrimeField):
            raise TypeError("to_numpy needs a prime field")
        return np.array([[int(x) for x in r] for r in self.rows], dtype=np.int64)

    def to_json(self):
        f = self.field
        return [[f.scalar_to_json(x) for x in r] for r in self.rows]

    @staticmethod
    def from_json(field: Field, data) -> "Matrix":
        return Matrix(field, tuple(tuple(field.scalar_from_json(x) for x in r) for r in data))

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "Matrix") -> "Matrix":
        f = self.field
        return Matrix(f, tuple(tuple(f.add(a, b) for a, b in zip(ra, rb))
                               for ra, rb in zip(self.rows, other.rows)))

    def __sub__(self, other: "Matrix") -> "Matrix":
        f = self.field
        return Matrix(f, tuple(tuple(f.sub(a, b) for a, b in zip(ra, rb))
                               for ra, rb in zip(self.rows, other.rows)))

    def __neg__(self) -> "Matrix":
        f = self.field
        return Matrix(f, tuple(tuple(f.neg(a) for a in r) for r in self.rows))

    def scale(self, c) -> "Matrix":
        f = self.field
        c = f.coerce(c)
        return Matrix(f, tuple(tuple(f.mul(c, a) for a in r) for r in self.rows))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        f = self.field
        if self.ncols != other.nrows:
            raise ValueError(f"matmul shape mismatch {self.shape} @ {other.shape}")
        if isinstance(f, PrimeField):
            return Matrix.from_numpy(f, modmat.matmul_mod(self.to_numpy(), other.to_numpy(), f.p))
        ocols = list(zip(*other.rows)) if other.rows else []
        out = []
        for r in self.rows:
            out.append(tuple(
                _dot(f, r, c) for c in ocols))
        return Matrix(f, tuple(out))

    @property
    def T(self) -> "Matrix":
        return Matrix(self.field, tuple(zip(*self.rows)) if self.rows else ())

    def restrict(self, basis: "Matrix") -> "Matrix":
        """B M B^T for a row-basis B: the form M pulled back to span(B)."""
        return basis @ self @ basis.T

    def apply(self, vec) -> tuple:
        """Matrix times a plain tuple vector."""
        f = self.field
        return tuple(_dot(f, r, vec) for r in self.rows)

    def is_zero(self) -> bool:
        f = self.field
        return all(f.is_zero(x) for r in self.rows for x in r)

    def eq(self, other: "Matrix") -> bool:
        return self.shape == other.shape and (self - other).is_zero()

    def is_symmetric(self) -> bool:
        f = self.field
        return all(f.eq(self.rows[i][j], self.rows[j][i])
                   for i in range(self.nrows) for j in range(i + 1, self.ncols))

    def is_alternating(self) -> bool:
        f = self.field
        n = self.nrows
        return (all(f.is_zero(self.rows[i][i]) for i in range(n))
                and all(f.eq(self.rows[i][j], f.neg(self.rows[j][i]))
                        for i in range(n) for j in range(i + 1, n)))

    # -- elimination -------------------------------------------------------

    def rref(self) -> tuple["Matrix", list[int]]:
        f = self.field
        if isinstance(f, PrimeField):
            red, piv = modmat.rref_mod(self.to_numpy(), f.p)
            return Matrix.from_numpy(f, red), piv
        m = [list(r) for r in self.rows]
        nr, nc = self.nrows, self.ncols
        pivots: list[int] = []
        r = 0
        for c in range(nc):
            if r == nr:
                break
            sel = next((i for i in range(r, nr) if not f.is_zero(m[i][c])), None)
            if sel is None:
                continue
            m[r], m[sel] = m[sel], m[r]
            inv = f.inv(m[r][c])
            m[r] = [f.mul(inv, x) for x in m[r]]
            for i in range(nr):
                if i != r and not f.is_zero(m[i][c]):
                    fac = m[i][c]
                    m[i] = [f.sub(x, f.mul(fac, y)) for x, y in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
        return Matrix(f, tuple(tuple(row) for row in m)), pivots

    def rank(self) -> int:
        f = self.field
        if isinstance(f, PrimeField):
            return modmat.rank_mod(self.to_numpy(), f.p)
        return len(self.rref()[1])

    def nullspace(self) -> "Matrix":
        """Rows form a basis of the right kernel; shape (nullity, ncols)."""
        f = self.field
        if isinstance(f, PrimeField):
            return Matrix.from_numpy(f, modmat.nullspace_mod(self.to_numpy(), f.p))
        red, pivots = self.rref()
        free = [c for c in range(self.ncols) if c not in pivots]
        z, o = f.zero, f.one
        rows = []
        for fc in free:
            v = [z] * self.ncols
            v[fc] = o
            for r, pc in enumerate(pivots):
                v[pc] = f.neg(red.rows[r][fc])
            rows.append(tuple(v))
        return Matrix(f, tuple(rows))

    def det(self):
        f = self.field
        n = self.nrows
        if self.shape != (n, n):
            raise ValueError("det of a non-square matrix")
        if isinstance(f, PrimeField):
            return modmat.det_mod(self.to_numpy(), f.p)
        m = [list(r) for r in self.rows]
        det = f.one
        for c in range(n):
            sel = next((i for i in range(c, n) if not f.is_zero(m[i][c])), None)
            if sel is None:
                return f.zero
            if sel != c:
                m[c], m[sel] = m[sel], m[c]
                det = f.neg(det)
            piv = m[c][c]
            det = f.mul(det, piv)
            inv = f.inv(piv)
            for i in range(c + 1, n):
                if not f.is_zero(m[i][c]):
                    fac = f.mul(m[i][c], inv)
                    m[i] = [f.sub(x, f.mul(fac, y)) for x, y in zip(m[i], m[c])]
        return det

    def solve(self, b):
        """One x with self @ x = b (b a tuple or Matrix column); None if inconsistent."""
        f = self.field
        bcol = b if isinstance(b, Matrix) else Matrix(f, tuple((f.coerce(x),) for x in b))
        if isinstance(f, PrimeField):
            res = modmat.solve_mod(self.to_numpy(), bcol.to_numpy(), f.p)
            if res is None:
                return None
            out = Matrix.from_numpy(f, res)
            return out.col(0) if not isinstance(b, Matrix) else out
        aug = Matrix.hstack([self, bcol])
        red, pivots = aug.rref()
        if any(c >= self.ncols for c in pivots):
            return None
        z = f.zero
        ncols = self.ncols
        xs = [[z] * bcol.ncols for _ in range(ncols)]
        for r, c in enumerate(pivots):
            xs[c] = list(red.rows[r][ncols:])
        out = Matrix(f, tuple(tuple(row) for row in xs))
        return out.col(0) if not isinstance(b, Matrix) else out


def _dot(f: Field, u, v):
    acc = f.zero
    for a, b in zip(u, v):
        acc = f.add(acc, f.mul(a, b))
    return acc


def dot(f: Field, u, v):
    return _dot(f, u, v)


def in_span(basis: Matrix, vec) -> bool:
    """Is vec in the row span of basis?"""
    f = basis.field
    stacked = Matrix.vstack([basis, Matrix.row_vector(f, vec)])
    return stacked.rank() == basis.rank()


def rowspaces_equal(a: Matrix, b: Matrix) -> bool:
    ra = a.rank()
    if ra != b.rank():
        return False
    return Matrix.vstack([a, b]).rank() == ra


def complete_to_basis(basis: Matrix) -> Matrix:
    """Rows of the identity extending the rows of `basis` to a full basis."""
    f = basis.field
    cur = basis
    rank = basis.rank()
    picked = []
    for i in range(basis.ncols):
        if rank == basis.ncols:
            break
        e = tuple(f.one if j == i else f.zero for j in range(basis.ncols))
        trial = Matrix.vstack([cur, Matrix.row_vector(f, e)])
        if trial.rank() > rank:
            cur = trial
            rank += 1
            picked.append(e)
    return Matrix(f, tuple(picked))


def intersect_rowspaces(a: Matrix, b: Matrix) -> Matrix:
    """Row basis of rowspace(a) meet rowspace(b)."""
    f = a.field
    ker = Matrix.vstack([a, b.scale(f.neg(f.one))]).T.nullspace()
    # each kernel row (x | y) has x @ a = y @ b; collect x @ a
    rows = []
    for r in ker.rows:
        x = r[:a.nrows]
        rows.append(tuple(_dot(f, x, col) for col in zip(*a.rows)))
    if not rows:
        return Matrix(f, ())
    cand = Matrix(f, tuple(rows))
    red, piv = cand.rref()
    return Matrix(f, tuple(red.rows[i] for i in range(len(piv))))


def det_along_line(field: Field, fn, degree: int):
    """Coefficients c_0..c_degree of the polynomial t -> fn(t).

    fn must be a polynomial of degree at most `degree` in t; it is sampled at
    the nodes 0, 1, ..., degree and the Vandermonde system is solved exactly.
    """
    if field.order is not None and field.order <= degree:
        raise ValueError(f"field too small to interpolate degree {degree}")
    nodes = [field.coerce(i) for i in range(degree + 1)]
    vals = [fn(t) for t in nodes]
    vand = Matrix.build(field, [[field.pow(t, j) for j in range(degree + 1)] for t in nodes])
    sol = vand.solve(tuple(vals))
    assert sol is not None
    return list(sol)
