"""Coordinates on the second exterior power of a five-dimensional space.

Basis order for bivectors is the ten index pairs in lexicographic order; the
orientation fixes e0^e1^e2^e3^e4 as the unit volume element. Everything else
(the quadric hit by wedging with a vector, decomposability, supports) is
written against these two conventions.
"""

from __future__ import annotations

from .fields import Field
from .linalg import Matrix, dot

PAIRS: tuple = ((0, 1), (0, 2), (0, 3), (0, 4), (1, 2),
                (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))
PAIR_INDEX: dict = {p: i for i, p in enumerate(PAIRS)}

# complement of {m} in {0..4}, sorted; e_m ^ e_comp = (-1)^m * volume
COMPLEMENT: tuple = tuple(tuple(sorted(set(range(5)) - {m})) for m in range(5))


def plucker_point(field: Field, u, w) -> tuple:
    """Coordinates of u ^ w."""
    return tuple(field.sub(field.mul(u[a], w[b]), field.mul(u[b], w[a])) for a, b in PAIRS)


def wedge_matrix_map(field: Field, u) -> Matrix:
    """The 10x5 matrix of w -> u ^ w."""
    rows = []
    for a, b in PAIRS:
        row = [field.zero] * 5
        row[b] = field.coerce(u[a])
        row[a] = field.neg(field.coerce(u[b]))
        rows.append(tuple(row))
    return Matrix(field, tuple(rows))


def bivector_to_alt_matrix(field: Field, x) -> Matrix:
    a = [[field.zero] * 5 for _ in range(5)]
    for (i, j), idx in PAIR_INDEX.items():
        c = field.coerce(x[idx])
        a[i][j] = c
        a[j][i] = field.neg(c)
    return Matrix(field, tuple(tuple(r) for r in a))


def alt_matrix_to_bivector(field: Field, a: Matrix) -> tuple:
    return tuple(a[i, j] for i, j in PAIRS)


def pf4(field: Field, a: Matrix, idx) -> object:
    """Pfaffian of the alternating 4x4 block on sorted indices (i, j, k, l)."""
    i, j, k, l = idx
    t1 = field.mul(a[i, j], a[k, l])
    t2 = field.mul(a[i, k], a[j, l])
    t3 = field.mul(a[i, l], a[j, k])
    return field.add(field.sub(t1, t2), t3)


def wedge_square(field: Field, x) -> tuple:
    """x ^ x in the basis dual to the vectors: entry m pairs with e_m.

    All five entries vanish exactly when x is decomposable. Entry m is the
    coefficient of the volume form in e_m ^ x ^ x.
    """
    a = bivector_to_alt_matrix(field, x)
    out = []
    for m in range(5):
        v = pf4(field, a, COMPLEMENT[m])
        v = field.add(v, v)
        out.append(v if m % 2 == 0 else field.neg(v))
    return tuple(out)


def pfaffian_matrix(field: Field, v) -> Matrix:
    """Symmetric 10x10 Gram matrix of the quadric x -> v ^ x ^ x (volume coefficient)."""
    rows = [[field.zero] * 10 for _ in range(10)]
    for m in range(5):
        vm = field.coerce(v[m])
        if field.is_zero(vm):
            continue
        s = vm if m % 2 == 0 else field.neg(vm)
        a, b, c, d = COMPLEMENT[m]
        for pq, rs, sign in (((a, b), (c, d), 1), ((a, c), (b, d), -1), ((a, d), (b, c), 1)):
            i, j = PAIR_INDEX[pq], PAIR_INDEX[rs]
            val = s if sign == 1 else field.neg(s)
            rows[i][j] = field.add(rows[i][j], val)
            rows[j][i] = field.add(rows[j][i], val)
    return Matrix(field, tuple(tuple(r) for r in rows))


def quadric_value(q: Matrix, x):
    f = q.field
    return dot(f, x, q.apply(x))


def quadric_polar(q: Matrix, x, y):
    f = q.field
    return dot(f, x, q.apply(y))


def quadric_gradient(q: Matrix, x) -> tuple:
    f = q.field
    return tuple(f.add(c, c) for c in q.apply(x))


def kernel_functional(field: Field, a: Matrix):
    """For an alternating 5x5 matrix of rank four, a spanning kernel covector.

    Computed from the four-by-four Pfaffians, so it needs no elimination:
    phi_m = (-1)^m Pf(a with row and column m removed). Returns None when a
    has rank at most two (all these Pfaffians vanish).
    """
    phi = []
    for m in range(5):
        v = pf4(field, a, COMPLEMENT[m])
        phi.append(v if m % 2 == 0 else field.neg(v))
    if all(field.is_zero(c) for c in phi):
        return None
    return tuple(phi)


def bivector_support(field: Field, x) -> tuple[int, Matrix]:
    """(rank, row basis of the smallest subspace carrying x)."""
    a = bivector_to_alt_matrix(field, x)
    red, piv = a.rref()
    basis = Matrix(field, tuple(red.rows[i] for i in range(len(piv))))
    return len(piv), basis


def two_form_matrix(field: Field, h) -> Matrix:
    """Alternating 5x5 matrix of the two-form given by a dual ten-vector h:
    h(u ^ w) = u^T A w."""
    return bivector_to_alt_matrix(field, h)


def standard_basis(field: Field, n: int, i: int) -> tuple:
    return tuple(field.one if j == i else field.zero for j in range(n))
