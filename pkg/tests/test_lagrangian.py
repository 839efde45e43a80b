import random

import pytest

from fano10.fields import GF, INTERPOLATION_PRIME
from fano10.instances import random_instance
from fano10.lagrangian import (THREE_SUBSETS, SUBSET_INDEX, LagrangianSubspace,
                               epw_membership, lagrangian_from_quadric,
                               wedge3_vector, wedge_gram)
from fano10.linalg import Matrix
from fano10.sextics import corank2_sample, fit_dual_sextic, sample_dual

FBIG = GF(INTERPOLATION_PRIME)
F31 = GF(31)


@pytest.fixture(scope="module")
def inst31():
    return random_instance(F31, 0, seed=11)


@pytest.fixture(scope="module")
def lag31(inst31):
    return lagrangian_from_quadric(inst31)


def test_three_subsets_ordering():
    assert len(THREE_SUBSETS) == 20
    assert THREE_SUBSETS[0] == (0, 1, 2)
    assert THREE_SUBSETS[-1] == (3, 4, 5)
    assert SUBSET_INDEX[(0, 1, 5)] == THREE_SUBSETS.index((0, 1, 5))


def test_wedge_gram_properties():
    J = wedge_gram(F31)
    assert J.shape == (20, 20)
    assert (J + J.T).is_zero()
    assert J.rank() == 20
    i, j = SUBSET_INDEX[(0, 1, 2)], SUBSET_INDEX[(3, 4, 5)]
    assert J[i, j] == 1
    # overlapping supports pair to zero
    assert J[i, SUBSET_INDEX[(0, 3, 4)]] == 0


def test_wedge3_vector_basis_and_signs():
    f = F31
    e = lambda i: tuple(f.one if j == i else f.zero for j in range(6))
    v = wedge3_vector(f, e(0), e(1), e(2))
    assert v[SUBSET_INDEX[(0, 1, 2)]] == 1
    assert sum(1 for c in v if c != 0) == 1
    swapped = wedge3_vector(f, e(1), e(0), e(2))
    assert swapped[SUBSET_INDEX[(0, 1, 2)]] == f.neg(f.one)
    degenerate = wedge3_vector(f, e(0), e(1), e(0))
    assert all(f.is_zero(c) for c in degenerate)


def test_lagrangian_property(lag31):
    assert lag31.A.shape == (10, 20)
    assert lag31.is_lagrangian()


def test_lagrangian_property_big_prime():
    inst = random_instance(FBIG, 0, seed=3)
    lag = lagrangian_from_quadric(inst)
    assert lag.is_lagrangian()


def test_sign_flip_breaks_lagrangian(lag31):
    f = F31
    col = SUBSET_INDEX[(0, 1, 2)]
    rows = []
    for r in lag31.A.rows:
        row = list(r)
        row[col] = f.neg(row[col])
        rows.append(tuple(row))
    flipped = LagrangianSubspace(f, Matrix(f, tuple(rows)), lag31.J)
    assert not flipped.is_lagrangian()


def test_lagrangian_needs_codimension_zero():
    inst = random_instance(F31, 1, seed=5)
    with pytest.raises(ValueError):
        lagrangian_from_quadric(inst)


def test_membership_on_sampled_dual_points(inst31, lag31):
    pts, _ = sample_dual(inst31, 30, seed=5)
    assert all(epw_membership(lag31, dp.h) >= 1 for dp in pts)


def test_membership_zero_off_sextic():
    inst = random_instance(FBIG, 0, seed=3)
    lag = lagrangian_from_quadric(inst)
    rng = random.Random(9)
    for _ in range(15):
        h = tuple(FBIG.random_scalar(rng) for _ in range(6))
        if all(FBIG.is_zero(c) for c in h):
            continue
        assert epw_membership(lag, h) == 0


def test_membership_rejects_zero_hyperplane(lag31):
    with pytest.raises(ValueError):
        epw_membership(lag31, (0, 0, 0, 0, 0, 0))


def test_corank_two_points_hit_deeper_stratum(inst31, lag31):
    rep = corank2_sample(inst31, 3, seed=8, scan_budget=80_000)
    for dp in rep.points:
        assert epw_membership(lag31, dp.h) >= 2


def test_membership_matches_fitted_sextic(inst31, lag31):
    dual = fit_dual_sextic(inst31, seed=13, samples=480, holdout=60,
                           require_large_field=False)
    rng = random.Random(7)
    checked = 0
    for _ in range(200):
        h = tuple(F31.random_scalar(rng) for _ in range(6))
        if all(F31.is_zero(c) for c in h):
            continue
        checked += 1
        assert (epw_membership(lag31, h) >= 1) == F31.is_zero(dual.value(h))
    assert checked >= 190
