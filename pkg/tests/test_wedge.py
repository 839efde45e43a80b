import itertools
import random

import numpy as np
import pytest

from fano10 import modmat
from fano10.fields import GF, INTERPOLATION_PRIME, QQ
from fano10.linalg import Matrix, dot
from fano10.wedge import (
    COMPLEMENT,
    PAIR_INDEX,
    PAIRS,
    bivector_support,
    bivector_to_alt_matrix,
    kernel_functional,
    pfaffian_matrix,
    plucker_point,
    quadric_gradient,
    quadric_polar,
    quadric_value,
    standard_basis,
    two_form_matrix,
    wedge_matrix_map,
    wedge_square,
)


def rand_vec(field, rng, n=5):
    return tuple(field.random_scalar(rng) for _ in range(n))


def test_pair_conventions():
    assert len(PAIRS) == 10
    assert PAIRS[0] == (0, 1) and PAIRS[-1] == (3, 4)
    assert PAIR_INDEX[(1, 3)] == 5
    assert COMPLEMENT[0] == (1, 2, 3, 4)
    assert COMPLEMENT[2] == (0, 1, 3, 4)


def test_reference_value_basis_vector_quadric():
    # first basis vector against e1^e2 + e3^e4 gives exactly 2
    f = QQ
    v = standard_basis(f, 5, 0)
    x = [f.zero] * 10
    x[PAIR_INDEX[(1, 2)]] = f.one
    x[PAIR_INDEX[(3, 4)]] = f.one
    m = pfaffian_matrix(f, v)
    assert quadric_value(m, tuple(x)) == 2
    assert m.is_symmetric()


def test_pfaffian_matrix_linear_in_v():
    f = GF(31)
    rng = random.Random(1)
    v1, v2 = rand_vec(f, rng), rand_vec(f, rng)
    c = f.random_scalar(rng)
    lhs = pfaffian_matrix(f, tuple(f.add(a, f.mul(c, b)) for a, b in zip(v1, v2)))
    rhs = pfaffian_matrix(f, v1) + pfaffian_matrix(f, v2).scale(c)
    assert lhs.eq(rhs)


@pytest.mark.parametrize("field", [QQ, GF(31), GF(INTERPOLATION_PRIME)])
def test_pfaffian_matrix_rank_six(field):
    rng = random.Random(5)
    for _ in range(12):
        v = rand_vec(field, rng)
        if all(field.is_zero(c) for c in v):
            continue
        assert pfaffian_matrix(field, v).rank() == 6
    for i in range(5):
        assert pfaffian_matrix(field, standard_basis(field, 5, i)).rank() == 6


def test_decomposables_lie_on_every_pfaffian_quadric():
    f = GF(31)
    rng = random.Random(9)
    for _ in range(20):
        u, w, v = rand_vec(f, rng), rand_vec(f, rng), rand_vec(f, rng)
        x = plucker_point(f, u, w)
        assert f.is_zero(quadric_value(pfaffian_matrix(f, v), x))
        assert all(f.is_zero(c) for c in wedge_square(f, x))


def test_wedge_matrix_map_matches_plucker_point():
    f = GF(61)
    rng = random.Random(3)
    for _ in range(10):
        u, w = rand_vec(f, rng), rand_vec(f, rng)
        via_map = wedge_matrix_map(f, u).apply(w)
        assert via_map == plucker_point(f, u, w)


def test_wedge_square_exhaustive_f3():
    """Over GF(3), check on all 3^10 bivectors: the five wedge-square
    coordinates vanish exactly when the alternating matrix has rank <= 2."""
    p = 3
    n = 3**10
    digits = np.arange(n, dtype=np.int64)
    x = np.empty((n, 10), dtype=np.int64)
    for k in range(10):
        x[:, k] = digits % 3
        digits //= 3
    alt = np.zeros((n, 5, 5), dtype=np.int64)
    for (i, j), idx in PAIR_INDEX.items():
        alt[:, i, j] = x[:, idx]
        alt[:, j, i] = (-x[:, idx]) % p
    ranks = modmat.batched_rank_mod(alt, p)
    pf_zero = np.ones(n, dtype=bool)
    for m in range(5):
        a, b, c, d = COMPLEMENT[m]
        pf = (alt[:, a, b] * alt[:, c, d] - alt[:, a, c] * alt[:, b, d]
              + alt[:, a, d] * alt[:, b, c]) % p
        pf_zero &= pf == 0
    assert (pf_zero == (ranks <= 2)).all()
    # sanity on the census: rank counts are 1, (3^5-1)(3^4-1)/ (3^2-1) ... skip
    # closed forms; just pin the observed distribution
    assert int((ranks == 0).sum()) == 1
    assert int(pf_zero.sum()) == 1 + int((ranks == 2).sum())


def test_quadric_polar_and_gradient():
    f = GF(31)
    rng = random.Random(4)
    v = rand_vec(f, rng)
    m = pfaffian_matrix(f, v)
    x, y = rand_vec(f, rng, 10), rand_vec(f, rng, 10)
    # polarization identity
    sym = f.add(quadric_polar(m, x, y), quadric_polar(m, y, x))
    total = quadric_value(m, tuple(f.add(a, b) for a, b in zip(x, y)))
    parts = f.add(quadric_value(m, x), quadric_value(m, y))
    assert f.eq(sym, f.sub(total, parts))
    g = quadric_gradient(m, x)
    # directional derivative: d/dt Q(x + t y) at 0 equals grad . y
    assert f.eq(dot(f, g, y), f.add(quadric_polar(m, x, y), quadric_polar(m, y, x)))


def test_kernel_functional_rank_four():
    f = GF(INTERPOLATION_PRIME)
    rng = random.Random(11)
    hits = 0
    for _ in range(20):
        u, w, y, z = (rand_vec(f, rng) for _ in range(4))
        x = tuple(f.add(a, b) for a, b in zip(plucker_point(f, u, w), plucker_point(f, y, z)))
        a = bivector_to_alt_matrix(f, x)
        if a.rank() != 4:
            continue
        hits += 1
        phi = kernel_functional(f, a)
        assert phi is not None
        assert all(f.is_zero(c) for c in a.apply(phi))
    assert hits >= 15


def test_kernel_functional_low_rank_returns_none():
    f = GF(31)
    rng = random.Random(12)
    u, w = rand_vec(f, rng), rand_vec(f, rng)
    a = bivector_to_alt_matrix(f, plucker_point(f, u, w))
    assert kernel_functional(f, a) is None


def test_bivector_support():
    f = GF(31)
    rng = random.Random(13)
    u, w = rand_vec(f, rng), rand_vec(f, rng)
    x = plucker_point(f, u, w)
    rank, basis = bivector_support(f, x)
    assert rank == 2 and basis.nrows == 2
    # u and w lie in the support
    for vec in (u, w):
        assert Matrix.vstack([basis, Matrix.row_vector(f, vec)]).rank() == 2
    y, z = rand_vec(f, rng), rand_vec(f, rng)
    x4 = tuple(f.add(a, b) for a, b in zip(x, plucker_point(f, y, z)))
    rank4, basis4 = bivector_support(f, x4)
    assert rank4 == 4 and basis4.nrows == 4
    # support is the kernel functional's hyperplane
    phi = kernel_functional(f, bivector_to_alt_matrix(f, x4))
    for row in basis4.rows:
        assert f.is_zero(dot(f, phi, row))


def test_two_form_pairing():
    f = GF(61)
    rng = random.Random(14)
    for _ in range(10):
        h = rand_vec(f, rng, 10)
        u, w = rand_vec(f, rng), rand_vec(f, rng)
        a = two_form_matrix(f, h)
        lhs = dot(f, h, plucker_point(f, u, w))
        rhs = dot(f, u, a.apply(w))
        assert f.eq(lhs, rhs)
        assert a.is_alternating()


def test_exhaustive_decomposable_census_f2_analogue():
    # small closed-form cross-check over GF(5), sampled not exhaustive:
    # decomposable points satisfy all five relations, perturbations dont
    f = GF(5)
    rng = random.Random(15)
    bad = 0
    for _ in range(200):
        u, w = rand_vec(f, rng), rand_vec(f, rng)
        x = list(plucker_point(f, u, w))
        assert all(f.is_zero(c) for c in wedge_square(f, x))
        i = rng.randrange(10)
        x[i] = f.add(x[i], f.one)
        if not all(f.is_zero(c) for c in wedge_square(f, x)):
            bad += 1
    assert bad > 150  # generic perturbation leaves the cone
