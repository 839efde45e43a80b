import itertools

import pytest

from fano10 import rng as rng_mod
from fano10.conics import (BranchLocusError, Conic, ConicOnZ, alpha,
                           ambient_parametrization, classify_conic,
                           conic_equal, conic_on_grassmannian,
                           conic_on_z_from_json, conic_points, conic_equal,
                           extend_instance, involution_partner,
                           kappa_criterion, kappa_from_restrictions,
                           kappa_resultant_oracle, parametrize_conic,
                           planes_in_member, ruling_partition, same_ruling,
                           sample_conic, sample_conic_pair,
                           special_family_checks, supporting_v4)
from fano10.fields import GF, INTERPOLATION_PRIME, PrimeSquareField
from fano10.instances import ConstructionError, random_chain, random_instance
from fano10.linalg import (Matrix, complete_to_basis, intersect_rowspaces,
                           rowspaces_equal)
from fano10.polys import BinaryForm
from fano10.sextics import corank2_sample, projectively_equal, singularity_predicate
from fano10.wedge import bivector_support, quadric_value

FBIG = GF(INTERPOLATION_PRIME)
F31 = GF(31)


@pytest.fixture(scope="module")
def inst1():
    return random_instance(FBIG, 1, seed=3)


@pytest.fixture(scope="module")
def conic1(inst1):
    c, stats = sample_conic(inst1, seed=5)
    assert stats["attempts"] >= 1
    return c


@pytest.fixture(scope="module")
def inst31():
    return random_instance(F31, 1, seed=12)


# -- bare conics and classification ---------------------------------------


def _e10(f, i):
    return tuple(f.one if j == i else f.zero for j in range(10))


def _add(f, u, v):
    return tuple(f.add(a, b) for a, b in zip(u, v))


def _smooth_form(f):
    h = f.inv(f.coerce(2))
    return Matrix.build(f, [[0, 0, h], [0, -1, 0], [h, 0, 0]])


def _example_planes(f):
    # pair coordinates: (0,1)=0 (0,2)=1 (0,3)=2 (1,2)=4 (1,3)=5
    tau = Matrix.build(f, [_e10(f, 1), _add(f, _e10(f, 2), _e10(f, 4)),
                           _e10(f, 5)])
    sigma = Matrix.build(f, [_e10(f, 0), _e10(f, 1), _e10(f, 2)])
    rho = Matrix.build(f, [_e10(f, 0), _e10(f, 1), _e10(f, 4)])
    return tau, sigma, rho


def test_classification_of_model_conics():
    f = F31
    tau, sigma, rho = _example_planes(f)
    q = _smooth_form(f)
    assert classify_conic(Conic(f, tau, q)) == ("tau", "smooth")
    assert classify_conic(Conic(f, sigma, q)) == ("sigma", "smooth")
    assert classify_conic(Conic(f, rho, q)) == ("rho", "smooth")


def test_classification_shapes_on_special_planes():
    f = F31
    _tau, sigma, rho = _example_planes(f)
    h = f.inv(f.coerce(2))
    line_pair = Matrix.build(f, [[0, h, 0], [h, 0, 0], [0, 0, 0]])
    double_line = Matrix.build(f, [[1, 0, 0], [0, 0, 0], [0, 0, 0]])
    assert classify_conic(Conic(f, rho, line_pair)) == ("rho", "line-pair")
    assert classify_conic(Conic(f, sigma, double_line)) == ("sigma", "double-line")


def test_conic_off_grassmannian_rejected():
    f = F31
    tau, _sigma, _rho = _example_planes(f)
    double_line = Matrix.build(f, [[1, 0, 0], [0, 0, 0], [0, 0, 0]])
    c = Conic(f, tau, double_line)
    assert not conic_on_grassmannian(c)
    with pytest.raises(ValueError):
        classify_conic(c)


def test_classification_basis_invariance():
    f = F31
    tau, _sigma, rho = _example_planes(f)
    q = _smooth_form(f)
    t = Matrix.build(f, [[2, 1, 0], [0, 1, 5], [3, 0, 1]])
    assert not f.is_zero(t.det())
    for plane in (tau, rho):
        c = Conic(f, plane, q)
        moved = Conic(f, t @ plane, t @ q @ t.T)
        assert classify_conic(moved) == classify_conic(c)
        assert conic_equal(c, moved)
        assert conic_equal(c, Conic(f, plane, q.scale(7)))
    assert not conic_equal(Conic(f, tau, q), Conic(f, rho, q))


def test_supporting_space_of_model_conics():
    f = F31
    tau, sigma, rho = _example_planes(f)
    q = _smooth_form(f)
    first4 = Matrix.build(f, [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0],
                              [0, 0, 1, 0, 0], [0, 0, 0, 1, 0]])
    first3 = Matrix.build(f, [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0],
                              [0, 0, 1, 0, 0]])
    st = supporting_v4(Conic(f, tau, q), seed=1)
    ss = supporting_v4(Conic(f, sigma, q), seed=1)
    sr = supporting_v4(Conic(f, rho, q), seed=1)
    assert st.kind == "unique" and rowspaces_equal(st.space, first4)
    assert ss.kind == "unique" and rowspaces_equal(ss.space, first4)
    assert sr.kind == "pencil" and rowspaces_equal(sr.space, first3)


def test_conic_points_and_parametrization():
    f = F31
    tau, _sigma, _rho = _example_planes(f)
    c = Conic(f, tau, _smooth_form(f))
    pts = conic_points(c, 5, rng_mod.stream(2, "pts"))
    assert len(set(pts)) == 5
    for x in pts:
        assert f.is_zero(quadric_value(c.form, x))
    forms = parametrize_conic(c, seed=3)
    for s, t in [(f.one, f.zero), (f.zero, f.one), (f.one, f.coerce(4))]:
        img = tuple(fm(s, t) for fm in forms)
        assert f.is_zero(quadric_value(c.form, img))


# -- sampled conics on a fourfold section ---------------------------------


def test_sampled_conic_verifies(conic1, inst1):
    f = inst1.field
    c = conic1
    assert c.verify()
    assert c.corank == 1
    assert c.flag == "split"
    assert classify_conic(c.conic) == ("tau", "smooth")
    # vertex stays off the conic
    assert not f.is_zero(c.conic.form[0, 0])
    # the conic really lies on the instance
    forms = parametrize_conic(c.conic, seed=2)
    amb = ambient_parametrization(c.conic, forms)
    for s, t in [(f.one, f.zero), (f.one, f.one), (f.one, f.coerce(9)),
                 (f.zero, f.one)]:
        assert inst1.contains(tuple(fm(s, t) for fm in amb))


def test_sample_conic_deterministic(inst1):
    a, _ = sample_conic(inst1, seed=5)
    b, _ = sample_conic(inst1, seed=5)
    assert a.conic.plane.rows == b.conic.plane.rows
    assert a.conic.form.rows == b.conic.form.rows
    assert a.member == b.member


def test_sample_conic_needs_fourfold():
    with pytest.raises(ValueError):
        sample_conic(random_instance(FBIG, 0, seed=2), seed=1)


def test_supporting_space_agrees_with_pencil(conic1):
    sup = supporting_v4(conic1.conic, seed=1)
    assert sup.kind == "unique"
    assert rowspaces_equal(sup.space, conic1.pencil.V4)
    # a plane point off the conic has full rank and the same support
    f = conic1.inst.field
    pt = conic1.conic.ambient_point((f.one, f.coerce(2), f.coerce(5)))
    rank, basis = bivector_support(f, pt)
    assert rank == 4
    assert rowspaces_equal(basis, conic1.pencil.V4)


def test_alpha_roundtrip(conic1):
    f = conic1.inst.field
    dp = alpha(conic1)
    assert projectively_equal(f, dp.root, conic1.member)
    assert singularity_predicate(dp)
    assert dp.corank == 1


def test_alpha_rejects_wrong_form(conic1):
    f = conic1.inst.field
    bad = Matrix.build(f, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    import dataclasses
    doctored = dataclasses.replace(conic1, conic=Conic(f, conic1.conic.plane, bad))
    with pytest.raises(ValueError):
        alpha(doctored)


def test_involution_partner_properties(conic1):
    f = conic1.inst.field
    c2 = involution_partner(conic1)
    assert c2.verify()
    assert not rowspaces_equal(c2.plane_f, conic1.plane_f)
    assert c2.member == conic1.member
    assert rowspaces_equal(c2.v4, conic1.v4)
    # opposite rulings meet along a projective line
    assert intersect_rowspaces(c2.plane_f, conic1.plane_f).nrows == 2
    n = conic1.member_matrix()
    assert not same_ruling(n, conic1.plane_f, c2.plane_f)
    assert same_ruling(n, conic1.plane_f, conic1.plane_f)
    # the supporting dual point does not move
    assert projectively_equal(f, alpha(c2).h, alpha(conic1).h)
    # twice brings the plane back
    c3 = involution_partner(c2)
    assert rowspaces_equal(c3.plane_f, conic1.plane_f)
    assert conic_equal(c3.conic, conic1.conic)


def test_kappa_agreement_and_rate(inst1):
    f = inst1.field
    hits = 0
    for s in range(12):
        c, _ = sample_conic(inst1, seed=100 + s)
        main = kappa_criterion(c)
        forms = parametrize_conic(c.conic, seed=s)
        comp = complete_to_basis(c.plane_f)
        n = c.member_matrix()
        rmat = (comp @ n @ c.plane_f.T).scale(f.add(f.one, f.one))
        oracle = kappa_resultant_oracle(f, forms, rmat.rows[0], rmat.rows[1])
        assert main == oracle
        hits += main
        partner = involution_partner(c)
        assert kappa_criterion(partner) == main
    assert hits >= 11


def test_kappa_hand_built_cases():
    f = F31
    q = _smooth_form(f)
    param = (BinaryForm(f, (0, 0, 1)), BinaryForm(f, (0, 1, 0)),
             BinaryForm(f, (1, 0, 0)))
    x0 = (f.one, f.zero, f.zero)
    x1 = (f.zero, f.one, f.zero)
    x2 = (f.zero, f.zero, f.one)
    # x0 and x1 meet at (0,0,1), which is on the conic
    assert not kappa_from_restrictions(f, q, x0, x1)
    assert not kappa_resultant_oracle(f, param, x0, x1)
    # x0 and x2 meet at (0,1,0), off the conic
    assert kappa_from_restrictions(f, q, x0, x2)
    assert kappa_resultant_oracle(f, param, x0, x2)
    # dependent forms always carry base points
    prop = (f.coerce(2), f.zero, f.zero)
    assert not kappa_from_restrictions(f, q, x0, prop)
    assert not kappa_resultant_oracle(f, param, x0, prop)


# -- ruling classes --------------------------------------------------------


def test_six_planes_split_into_two_rulings(conic1):
    f = conic1.inst.field
    n = conic1.member_matrix()
    planes = planes_in_member(f, n, 6, rng_mod.stream(99, "partition"))
    assert len(planes) == 6
    blocks = ruling_partition(n, planes)
    assert sorted(len(b) for b in blocks) == [3, 3]


def test_same_ruling_contract(conic1):
    f = conic1.inst.field
    n = conic1.member_matrix()
    off = Matrix.build(f, [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0]])
    with pytest.raises(ValueError):
        same_ruling(n, conic1.plane_f, off)


def test_corank_two_member_is_branch_locus():
    chain = random_chain(F31, seed=4)
    rep = corank2_sample(chain[1], 1, seed=5, scan_budget=100_000)
    dp = next(p for p in rep.points if p.corank == 2)
    pen = dp.pencil
    n = pen.QM.scale(dp.root[0]) + pen.qM.scale(dp.root[1])
    planes = planes_in_member(F31, n, 4, rng_mod.stream(1, "branch"))
    assert len(planes) == 4
    assert ruling_partition(n, planes) == [[0, 1, 2, 3]]


def test_union_of_partner_conics_is_the_pencil_curve(inst31):
    f = F31
    c1, _ = sample_conic(inst31, seed=0)
    c2 = involution_partner(c1)
    span = Matrix.vstack([c1.plane_f, c2.plane_f])
    red, piv = span.rref()
    assert len(piv) == 4
    span = Matrix(f, tuple(red.rows[i] for i in range(4)))
    qm = c1.pencil.QM.restrict(span)
    pm = c1.pencil.qM.restrict(span)

    def norm(v):
        nz = next((x for x in v if x % 31), None)
        inv = pow(nz, 29, 31)
        return tuple((x * inv) % 31 for x in v)

    curve = set()
    for rep in range(4):
        for tail in itertools.product(range(31), repeat=3 - rep):
            v = (0,) * rep + (1,) + tail
            if quadric_value(qm, v) % 31 == 0 and quadric_value(pm, v) % 31 == 0:
                curve.add(v)
    union = set()
    for c in (c1, c2):
        t = span.T.solve(c.plane_f.T).T
        for x in itertools.product(range(31), repeat=3):
            if x == (0, 0, 0) or quadric_value(c.conic.form, x) % 31:
                continue
            v = tuple(sum(x[i] * t[i, j] for i in range(3)) % 31
                      for j in range(4))
            union.add(norm(v))
    assert curve == union


def test_branch_locus_error_and_pair_sampler():
    f61 = GF(61)
    w61 = random_instance(f61, 2, seed=8)
    pair, stats = sample_conic_pair(w61, seed=6)
    assert stats["attempts"] >= 1
    for c in pair:
        assert c.verify()
        assert c.corank == 2
        assert c.flag == "surface-pair"
        assert classify_conic(c.conic) == ("tau", "smooth")
    assert intersect_rowspaces(pair[0].plane_f, pair[1].plane_f).nrows == 2
    blocks = ruling_partition(pair[0].member_matrix(),
                              [p.plane_f for p in pair])
    assert blocks == [[0, 1]]
    with pytest.raises(BranchLocusError):
        involution_partner(pair[0])


def test_pair_sampler_guards():
    with pytest.raises(ValueError):
        sample_conic_pair(random_instance(F31, 1, seed=2), seed=1)
    with pytest.raises(ValueError):
        sample_conic_pair(random_instance(FBIG, 2, seed=2), seed=1)


# -- extension route and serialization ------------------------------------


def test_extension_route(inst31):
    c, stats = sample_conic(inst31, seed=3, allow_extension=True)
    assert c.flag == "extension"
    assert stats["nonsplit_roots"] >= 1
    assert isinstance(c.inst.field, PrimeSquareField)
    assert c.verify()
    assert classify_conic(c.conic) == ("tau", "smooth")
    dp = alpha(c)
    assert projectively_equal(c.inst.field, dp.root, c.member)


def test_extend_instance_matches(inst31):
    ext = extend_instance(inst31)
    assert ext.k == inst31.k
    assert ext.field.p == 31
    f2 = ext.field
    base = [[f2.coerce(int(x)) for x in row] for row in inst31.Q.rows]
    assert [list(row) for row in ext.Q.rows] == base


def test_conic_json_roundtrip(conic1, inst1):
    obj = conic1.to_json()
    back = conic_on_z_from_json(inst1, obj)
    assert back.verify()
    assert rowspaces_equal(back.conic.plane, conic1.conic.plane)
    assert conic_equal(back.conic, conic1.conic)
    assert back.member == conic1.member
    with pytest.raises(ValueError):
        bad = dict(obj)
        bad["member"] = [inst1.field.scalar_to_json(inst1.field.one),
                         inst1.field.scalar_to_json(inst1.field.one)]
        conic_on_z_from_json(inst1, bad)


# -- hyperplane pairing families ------------------------------------------


def test_special_family_checks(inst1):
    res = special_family_checks(inst1, seed=4)
    assert res["ok"]
    assert res["rho_contain"] == res["trials"] == 20
    assert res["sigma_perp"] == 20
    assert res["rho_negative"] == 20
    assert res["sigma_negative"] == 20


def test_special_family_needs_fourfold():
    with pytest.raises(ValueError):
        special_family_checks(random_instance(FBIG, 2, seed=3), seed=1)
