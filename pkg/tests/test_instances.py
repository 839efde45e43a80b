import pytest

from fano10.fields import GF, INTERPOLATION_PRIME, QQ
from fano10.instances import (
    FanoInstance,
    GushelInstance,
    build_instance_containing_plane,
    count_subspaces,
    find_point,
    plane_search,
    random_chain,
    random_gushel,
    random_instance,
    smoothness_probe,
    _projective_points,
    _rref_subspaces,
)
from fano10.linalg import Matrix, dot, in_span
from fano10.polys import poly_trim
from fano10.rng import stream
from fano10.wedge import pfaffian_matrix, plucker_point, quadric_value

F = GF(INTERPOLATION_PRIME)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_random_instance_shapes_and_probe(k):
    inst = random_instance(F, k, seed=100 + k)
    assert inst.V.shape == (10 - k, 10)
    assert inst.cutting.nrows == k
    if k:
        assert inst.cutting.ncols == 10
    assert inst.Q.is_symmetric()
    assert inst.dim == 5 - k
    # slice functionals annihilate the slice basis
    if k:
        prod = inst.cutting @ inst.V.T
        assert prod.is_zero()


def test_instance_determinism():
    a = random_instance(F, 1, seed=7)
    b = random_instance(F, 1, seed=7)
    assert a.digest == b.digest
    c = random_instance(F, 1, seed=8)
    assert c.digest != a.digest


def test_instance_json_roundtrip():
    inst = random_instance(GF(31), 2, seed=5)
    back = FanoInstance.from_json(inst.to_json())
    assert back.digest == inst.digest
    assert back.V.eq(inst.V) and back.Q.eq(inst.Q)


def test_find_point_lands_on_variety():
    for k in (0, 1, 2, 3):
        inst = random_instance(F, k, seed=40 + k)
        rng = stream(1, f"fp-{k}")
        x = find_point(inst, rng)
        assert x is not None
        assert inst.contains(x)
        assert inst.is_smooth_point(x)


def test_member_matrix_shape_and_symmetry():
    inst = random_instance(F, 1, seed=3)
    rng = stream(2, "mm")
    v = tuple(F.random_scalar(rng) for _ in range(5))
    m = inst.member_matrix(F.coerce(2), v)
    assert m.shape == (9, 9) and m.is_symmetric()


def test_singular_quadric_control_fails_probe():
    """Using a Pfaffian quadric as Q makes every v ^ w with w generic a
    singular point: the probe must notice."""
    rng = stream(0, "sing")
    v = tuple(F.random_scalar(rng) for _ in range(5))
    q = pfaffian_matrix(F, v)
    inst = FanoInstance(F, 0, Matrix.identity(F, 10), q, seed=0)
    w = tuple(F.random_scalar(rng) for _ in range(5))
    x = plucker_point(F, v, w)
    assert inst.contains(x)
    # gradient of Q at x vanishes identically, so the Jacobian rank drops
    assert inst.jacobian_at(x).rank() < 4
    assert not smoothness_probe(inst, seed=0)


def test_rational_instance_probed_through_reduction():
    inst = random_instance(QQ, 0, seed=11)
    assert inst.field == QQ
    red = inst.reduce_mod(INTERPOLATION_PRIME)
    assert red.field == GF(INTERPOLATION_PRIME)
    assert smoothness_probe(inst, seed=11)


def test_chain_shares_quadric_and_nests():
    chain = random_chain(F, seed=21, ks=(0, 1, 2))
    x, z, w = chain
    assert (x.k, z.k, w.k) == (0, 1, 2)
    assert x.Q.eq(z.Q) and z.Q.eq(w.Q)
    # slices nest: every row of the smaller slice lies in the bigger one
    for row in w.V.rows:
        assert in_span(z.V, row)
    for row in z.V.rows:
        assert in_span(x.V, row)


def test_gushel_flatten_and_companion_shapes():
    g = random_gushel(F, 1, seed=31)
    comp = g.companion()
    assert comp.k == 2 and comp.V.shape == (8, 10)
    flat = g.flatten(F.coerce(5))
    assert flat.k == 1 and flat.V.shape == (9, 10)
    # flattened slice is cut by hs[1:], not h0
    assert all(F.is_zero(dot(F, g.hs.rows[1], row)) for row in flat.V.rows)


def test_gushel_cone_member_det_identity():
    """Schur complement: the cone member det equals z times the companion
    member det, for every (z, v)."""
    for k in (0, 1):
        g = random_gushel(F, k, seed=41 + k, validate=False)
        comp = g.companion()
        rng = stream(5, f"cone-{k}")
        for _ in range(6):
            z = F.random_scalar(rng, nonzero=True)
            v = tuple(F.random_scalar(rng) for _ in range(5))
            lhs = g.cone_member_matrix(z, v).det()
            rhs = F.mul(z, comp.member_matrix(z, v).det())
            assert F.eq(lhs, rhs)


def test_gushel_json_roundtrip():
    g = random_gushel(GF(31), 0, seed=3, validate=False)
    back = GushelInstance.from_json(g.to_json())
    assert back.hs.eq(g.hs) and back.q.eq(g.q) and back.ell == g.ell


def test_subspace_counts_match_gaussian_binomials():
    assert count_subspaces(3, 3, 5) == 1210
    assert count_subspaces(5, 3, 5) == 20306
    assert count_subspaces(3, 1, 5) == 121
    assert count_subspaces(3, 3, 4) == 40
    assert count_subspaces(5, 3, 4) == 156
    got = sum(1 for _ in _rref_subspaces(GF(3), 3, 5))
    assert got == 1210
    pts = sum(1 for _ in _projective_points(GF(3), 5))
    assert pts == 121
    v4s = sum(1 for _ in _rref_subspaces(GF(3), 4, 5))
    assert v4s == 121


def test_plane_search_generic_instance_is_empty():
    inst = random_instance(GF(3), 1, seed=51)
    res = plane_search(inst)
    assert res["rho"] == [] and res["sigma"] == []
    assert res["counts"]["V3"] == 1210
    assert res["counts"]["flags"] == 4840


@pytest.mark.parametrize("kind", ["rho", "sigma"])
def test_plane_search_finds_planted_plane(kind):
    f = GF(3)
    inst, plane = build_instance_containing_plane(f, kind, seed=61)
    res = plane_search(inst)
    assert len(res[kind]) >= 1
    if kind == "rho":
        planted = Matrix.from_json(f, plane["V3"])
        hits = [Matrix.from_json(f, hit["V3"]) for hit in res["rho"]]
        assert any(Matrix.vstack([planted, h]).rank() == 3 for h in hits)
    else:
        u = tuple(f.scalar_from_json(c) for c in plane["u"])
        found = False
        for hit in res["sigma"]:
            hu = tuple(hit["u"])
            if Matrix.build(f, [u, hu]).rank() == 1:
                found = True
        assert found


def test_planted_plane_lies_on_instance():
    f = GF(5)
    inst, plane = build_instance_containing_plane(f, "rho", seed=71)
    b3 = Matrix.from_json(f, plane["V3"])
    r = b3.rows
    for pair in ((0, 1), (0, 2), (1, 2)):
        biv = plucker_point(f, r[pair[0]], r[pair[1]])
        assert inst.contains(biv)
    # and a random point of the plane too
    rng = stream(0, "pp")
    c = [f.random_scalar(rng) for _ in range(3)]
    bivs = [plucker_point(f, r[0], r[1]), plucker_point(f, r[0], r[2]),
            plucker_point(f, r[1], r[2])]
    mix = tuple(
        f.add(f.add(f.mul(c[0], a), f.mul(c[1], b)), f.mul(c[2], d))
        for a, b, d in zip(*bivs))
    if any(not f.is_zero(t) for t in mix):
        assert inst.contains(mix)


def test_plane_search_rejects_big_prime():
    inst = random_instance(GF(31), 1, seed=3, validate=False)
    with pytest.raises(ValueError):
        plane_search(inst)


def test_retry_budget_env(monkeypatch):
    monkeypatch.setenv("FANO10_RETRY_BUDGET", "2")
    from fano10 import instances as mod
    assert mod.retry_budget() == 2
    monkeypatch.delenv("FANO10_RETRY_BUDGET")
    assert mod.retry_budget() == 32
