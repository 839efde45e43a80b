"""Conics on the slice varieties and the geometry of their ruling classes.

A conic is carried by a projective plane in the Pluecker space together with
a symmetric three-by-three form on that plane, taken up to scale.  Planes
living inside a singular member of a fiber pencil cut the variety in conics;
the two rulings of the member quadric split those planes into two classes
exchanged by the covering involution, and the classes collapse when the
member degenerates further.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

from . import rng as rng_mod
from .fields import Field, GF2, PrimeField
from .instances import ConstructionError, FanoInstance, retry_budget
from .linalg import (
    Matrix,
    complete_to_basis,
    dot,
    in_span,
    intersect_rowspaces,
    rowspaces_equal,
)
from .polys import BinaryForm, sylvester_resultant
from .sextics import (
    DualPencil,
    DualPoint,
    _normalize_projective,
    dual_pencil,
    dual_point_at_root,
)
from .wedge import (
    bivector_support,
    pfaffian_matrix,
    plucker_point,
    quadric_polar,
    quadric_value,
    standard_basis,
    two_form_matrix,
    wedge_square,
)


class BranchLocusError(RuntimeError):
    """Raised when a ruling operation hits a corank-two member, where the
    two families of planes merge into one."""


_SHAPES = {3: "smooth", 2: "line-pair", 1: "double-line"}


@dataclass(frozen=True)
class Conic:
    """A plane conic in the nine-dimensional Pluecker space.

    plane is a 3 x 10 row basis of the supporting plane, form the Gram
    matrix of the conic in those row coordinates, up to scale.
    """
    field: Field
    plane: Matrix
    form: Matrix

    def __post_init__(self):
        if self.plane.shape != (3, 10):
            raise ValueError("plane must be a 3 x 10 row basis")
        if self.plane.rank() != 3:
            raise ValueError("plane rows are dependent")
        if self.form.shape != (3, 3) or not self.form.is_symmetric():
            raise ValueError("conic form must be symmetric 3 x 3")
        if self.form.is_zero():
            raise ValueError("conic form is zero")

    @property
    def shape(self) -> str:
        return _SHAPES[self.form.rank()]

    def ambient_point(self, x) -> tuple:
        """Plane coordinates to a ten dimensional bivector."""
        f = self.field
        cols = zip(*self.plane.rows)
        return tuple(dot(f, x, col) for col in cols)

    def to_json(self) -> dict:
        return {"plane": self.plane.to_json(), "form": self.form.to_json()}

    @staticmethod
    def from_json(f: Field, obj: dict) -> "Conic":
        return Conic(f, Matrix.from_json(f, obj["plane"]),
                     Matrix.from_json(f, obj["form"]))


def proportionality(f: Field, a: Matrix, b: Matrix):
    """Scalar s with b == s * a entrywise, or None.  Zero a with zero b
    gives one; zero a against nonzero b gives None."""
    s = None
    for ra, rb in zip(a.rows, b.rows):
        for x, y in zip(ra, rb):
            if f.is_zero(x):
                if not f.is_zero(y):
                    return None
                continue
            if s is None:
                s = f.div(y, x)
    if s is None:
        return f.one if b.is_zero() else None
    return s if (a.scale(s) - b).is_zero() else None


def conic_equal(c1: Conic, c2: Conic) -> bool:
    if not rowspaces_equal(c1.plane, c2.plane):
        return False
    # rewrite c2's form on c1's basis: rows2 = T rows1, then the forms must
    # satisfy form2 ~ T form1 T^t
    t_t = c1.plane.T.solve(c2.plane.T)
    t = t_t.T
    return proportionality(c1.field, t @ c1.form @ t.T, c2.form) is not None


def restricted_pfaffian_forms(f: Field, plane: Matrix) -> list:
    return [pfaffian_matrix(f, standard_basis(f, 5, m)).restrict(plane)
            for m in range(5)]


def conic_on_grassmannian(c: Conic) -> bool:
    """Scheme-level membership: every Pluecker quadric restricted to the
    plane lies in the ideal of the conic."""
    f = c.field
    forms = restricted_pfaffian_forms(f, c.plane)
    if c.form.rank() >= 2:
        return all(proportionality(f, c.form, q) is not None for q in forms)
    # double line: vanishing on the underlying line only needs the quadric
    # to kill the line, not to be a multiple of the squared form
    i = next(r for r in range(3) if any(not f.is_zero(x) for x in c.form.rows[r]))
    line = Matrix.row_vector(f, c.form.rows[i]).nullspace()
    return all(q.restrict(line).is_zero() for q in forms)


def _plane_samples(f: Field):
    combos = [(1, 0, 0), (0, 1, 0), (0, 0, 1),
              (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 2, 3)]
    return [tuple(f.coerce(x) for x in combo) for combo in combos]


def classify_conic(c: Conic) -> tuple:
    """(class, shape) of a conic on the Grassmannian.

    Planes entirely inside the Grassmannian come in two families: all the
    point supports can share a line, or they can stay inside a common three
    dimensional space.  Every other plane meets the Grassmannian in exactly
    the conic.
    """
    f = c.field
    if not conic_on_grassmannian(c):
        raise ValueError("conic does not lie on the Grassmannian")
    shape = c.shape
    forms = restricted_pfaffian_forms(f, c.plane)
    if not all(q.is_zero() for q in forms):
        return "tau", shape
    supports = []
    for x in _plane_samples(f):
        pt = c.ambient_point(x)
        assert all(f.is_zero(v) for v in wedge_square(f, pt))
        rank, basis = bivector_support(f, pt)
        assert rank == 2
        supports.append(basis)
    union = Matrix.vstack(supports)
    if union.rank() == 3:
        return "rho", shape
    common = supports[0]
    for b in supports[1:]:
        common = intersect_rowspaces(common, b)
    if union.rank() == 4 and common.nrows == 1:
        return "sigma", shape
    raise ValueError("plane lies on the Grassmannian but fits neither family")


@dataclass(frozen=True)
class SupportingSpace:
    kind: str       # "unique" for a single four-space, "pencil" for a flag
    space: Matrix   # 4 x 5 row basis, or the common 3 x 5 space of the flag


def conic_points(c: Conic, n: int, rng, budget: int = 400) -> list:
    """n distinct rational points of the conic, in plane coordinates."""
    f = c.field
    found: list = []
    seen = set()
    for _ in range(budget):
        if len(found) >= n:
            break
        u = tuple(f.random_scalar(rng) for _ in range(3))
        w = tuple(f.random_scalar(rng) for _ in range(3))
        if Matrix.build(f, [u, w]).rank() != 2:
            continue
        g = BinaryForm(f, (quadric_value(c.form, w),
                           f.add(quadric_polar(c.form, u, w),
                                 quadric_polar(c.form, u, w)),
                           quadric_value(c.form, u)))
        if g.is_zero():
            continue
        for (s, t), _mult in g.projective_roots(rng):
            pt = tuple(f.add(f.mul(s, a), f.mul(t, b)) for a, b in zip(u, w))
            pt = _normalize_projective(f, pt)
            if pt not in seen:
                seen.add(pt)
                found.append(pt)
    if len(found) < n:
        raise ConstructionError("could not find enough rational conic points")
    return found[:n]


def supporting_v4(c: Conic, seed: int = 0) -> SupportingSpace:
    """The four-space spanned by the supports of three general conic points,
    or the common three-space plus a pencil flag in the degenerate family."""
    f = c.field
    cls, _shape = classify_conic(c)
    if cls == "rho":
        supports = [bivector_support(f, c.ambient_point(x))[1]
                    for x in _plane_samples(f)]
        union = Matrix.vstack(supports)
        red, piv = union.rref()
        v3 = Matrix(f, tuple(red.rows[i] for i in range(len(piv))))
        return SupportingSpace("pencil", v3)
    rng = rng_mod.stream(seed, "conic-support")
    pts = conic_points(c, 3, rng)
    supports = [bivector_support(f, c.ambient_point(x))[1] for x in pts]
    union = Matrix.vstack(supports)
    red, piv = union.rref()
    if len(piv) != 4:
        raise ValueError(f"point supports span a {len(piv)} dimensional space")
    return SupportingSpace("unique", Matrix(f, tuple(red.rows[i] for i in range(4))))


def parametrize_conic(c: Conic, seed: int = 0, point=None) -> tuple:
    """Three binary quadratics mapping the projective line onto the conic.

    Uses the pencil of lines through a rational point: a direction d gives
    q(d) P - 2 b(P, d) d, which sweeps the conic once.  Returns plane
    coordinate forms; compose with the plane rows for ambient ones.
    """
    f = c.field
    if c.form.rank() != 3:
        raise ValueError("parametrization needs a smooth conic")
    if point is None:
        point = conic_points(c, 1, rng_mod.stream(seed, "conic-param"))[0]
    p = tuple(f.coerce(x) for x in point)
    if not f.is_zero(quadric_value(c.form, p)):
        raise ValueError("base point is not on the conic")
    comp = complete_to_basis(Matrix.row_vector(f, p))
    u, w = comp.rows[0], comp.rows[1]
    qu = quadric_value(c.form, u)
    qw = quadric_value(c.form, w)
    quw = quadric_polar(c.form, u, w)
    bu = quadric_polar(c.form, p, u)
    bw = quadric_polar(c.form, p, w)
    two = f.add(f.one, f.one)
    forms = []
    for j in range(3):
        # s^2 term q(u) p_j - 2 b(p,u) u_j, mixed and t^2 terms alike
        c2 = f.sub(f.mul(qu, p[j]), f.mul(two, f.mul(bu, u[j])))
        c1 = f.sub(f.mul(f.add(quw, quw), p[j]),
                   f.mul(two, f.add(f.mul(bu, w[j]), f.mul(bw, u[j]))))
        c0 = f.sub(f.mul(qw, p[j]), f.mul(two, f.mul(bw, w[j])))
        forms.append(BinaryForm(f, (c0, c1, c2)))
    if Matrix.build(f, [fm.coeffs for fm in forms]).rank() != 3:
        raise ConstructionError("degenerate conic parametrization")
    for s, t in [(f.one, f.zero), (f.zero, f.one), (f.one, f.one),
                 (f.one, f.coerce(2)), (f.one, f.coerce(3))]:
        val = quadric_value(c.form, tuple(fm(s, t) for fm in forms))
        assert f.is_zero(val)
    return tuple(forms)


def ambient_parametrization(c: Conic, forms) -> tuple:
    """Compose plane coordinate quadratics with the plane embedding."""
    f = c.field
    out = []
    for j in range(10):
        coeffs = [f.zero, f.zero, f.zero]
        for i in range(3):
            for d in range(3):
                coeffs[d] = f.add(coeffs[d],
                                  f.mul(forms[i].coeffs[d], c.plane[i, j]))
        out.append(BinaryForm(f, tuple(coeffs)))
    return tuple(out)


# -- conics carried by an instance ----------------------------------------


@dataclass(frozen=True)
class ConicOnZ:
    """A conic cut on an instance by a plane inside a singular pencil member.

    plane_f holds the plane in fiber coordinates, member the pencil root
    whose quadric contains the plane, vertex_f a kernel vector of that
    member.  flag records how the sampler found the plane.
    """
    conic: Conic
    inst: FanoInstance
    pencil: DualPencil = dc_field(repr=False, compare=False)
    plane_f: Matrix = dc_field(repr=False)
    member: tuple = ()
    corank: int = 1
    vertex_f: tuple = ()
    flag: str = "split"

    @property
    def v4(self) -> Matrix:
        return self.pencil.V4

    def member_matrix(self) -> Matrix:
        lam, mu = self.member
        return self.pencil.QM.scale(lam) + self.pencil.qM.scale(mu)

    def vertex_ambient(self) -> tuple:
        f = self.inst.field
        cols = zip(*self.pencil.F.rows)
        return tuple(dot(f, self.vertex_f, col) for col in cols)

    def verify(self) -> bool:
        f = self.inst.field
        if not rowspaces_equal(self.plane_f @ self.pencil.F, self.conic.plane):
            return False
        n = self.member_matrix()
        if not n.restrict(self.plane_f).is_zero():
            return False
        if not f.is_zero(n.det()):
            return False
        if not in_span(self.plane_f, self.vertex_f):
            return False
        # both pencil generators restrict into the ideal of the conic
        base = self.plane_f @ self.pencil.F
        t_t = base.T.solve(self.conic.plane.T)
        t = t_t.T
        target = t @ self.conic.form @ t.T
        for gen in (self.pencil.QM, self.pencil.qM):
            if proportionality(f, target, gen.restrict(self.plane_f)) is None:
                return False
        return True

    def to_json(self) -> dict:
        f = self.inst.field
        return {"plane": self.conic.plane.to_json(),
                "form": self.conic.form.to_json(),
                "v4": self.pencil.V4.to_json(),
                "member": [f.scalar_to_json(x) for x in self.member],
                "flag": self.flag}


def conic_on_z_from_json(inst: FanoInstance, obj: dict) -> ConicOnZ:
    f = inst.field
    conic = Conic(f, Matrix.from_json(f, obj["plane"]),
                  Matrix.from_json(f, obj["form"]))
    v4 = Matrix.from_json(f, obj["v4"])
    phi = v4.nullspace()
    if phi.nrows != 1:
        raise ValueError("stored four-space is degenerate")
    pencil = dual_pencil(inst, phi.rows[0])
    if pencil is None:
        raise ValueError("stored four-space gives no pencil on this instance")
    plane_f_t = pencil.F.T.solve(conic.plane.T)
    if plane_f_t is None:
        raise ValueError("stored plane does not lie on the fiber")
    plane_f = plane_f_t.T
    member = tuple(f.scalar_from_json(x) for x in obj["member"])
    n = pencil.QM.scale(member[0]) + pencil.qM.scale(member[1])
    ker = n.nullspace()
    out = ConicOnZ(conic, inst, pencil, plane_f, member,
                   pencil.F.nrows - n.rank(),
                   ker.rows[0] if ker.nrows else (),
                   obj.get("flag", "split"))
    if not out.verify():
        raise ValueError("stored conic fails verification")
    return out


def _lift(f: Field, sel, vec, dim: int) -> tuple:
    out = [f.zero] * dim
    for idx, val in zip(sel, vec):
        out[idx] = val
    return tuple(out)


def _project(f: Field, kappa_n, pivot: int, sel, vec) -> tuple:
    scaled = tuple(f.sub(x, f.mul(vec[pivot], k)) for x, k in zip(vec, kappa_n))
    return tuple(scaled[i] for i in sel)


def _vertex_frame(f: Field, kappa):
    pivot = next(i for i, x in enumerate(kappa) if not f.is_zero(x))
    kappa_n = tuple(f.div(x, kappa[pivot]) for x in kappa)
    sel = [i for i in range(len(kappa)) if i != pivot]
    return pivot, kappa_n, sel


def _line_roots(f: Field, q: Matrix, u, w, rng):
    g = BinaryForm(f, (quadric_value(q, w),
                       f.add(quadric_polar(q, u, w), quadric_polar(q, u, w)),
                       quadric_value(q, u)))
    if g.is_zero():
        return []
    return g.projective_roots(rng)


def _tangent_frame(f: Field, nbar: Matrix, y):
    """Basis (y, w1, w2) of the tangent space at a point of the quadric."""
    t = Matrix.row_vector(f, nbar.apply(y)).nullspace()
    for i, j in itertools.combinations(range(t.nrows), 2):
        frame = Matrix.build(f, [y, t.rows[i], t.rows[j]])
        if frame.rank() == 3:
            return t.rows[i], t.rows[j]
    raise ConstructionError("tangent space frame is degenerate")


def _ruling_form(f: Field, nbar: Matrix, w1, w2) -> BinaryForm:
    return BinaryForm(f, (quadric_value(nbar, w2),
                          f.add(quadric_polar(nbar, w1, w2),
                                quadric_polar(nbar, w1, w2)),
                          quadric_value(nbar, w1)))


def planes_in_member(f: Field, n: Matrix, count: int, rng,
                     tries: int = 120) -> list:
    """Up to count distinct planes inside the zero locus of a singular
    symmetric matrix on the fiber.  Corank one on a five dimensional fiber
    gives cones over quadric surfaces; corank two gives the kernel line plus
    an isotropic direction of the quotient."""
    ker = n.nullspace()
    crk = ker.nrows
    dim = n.nrows
    planes = []
    seen = set()

    def push(rows):
        mat = Matrix.build(f, rows)
        if mat.rank() != 3 or not n.restrict(mat).is_zero():
            return
        red, piv = mat.rref()
        key = tuple(red.rows[i] for i in range(len(piv)))
        if key not in seen:
            seen.add(key)
            planes.append(mat)

    if crk == 1 and dim == 5:
        kappa = ker.rows[0]
        pivot, kappa_n, sel = _vertex_frame(f, kappa)
        nbar = n.submatrix(sel, sel)
        if not f.is_square(nbar.det()):
            return []
        for _ in range(tries):
            if len(planes) >= count:
                break
            u = tuple(f.random_scalar(rng) for _ in range(4))
            w = tuple(f.random_scalar(rng) for _ in range(4))
            if Matrix.build(f, [u, w]).rank() != 2:
                continue
            for (s, t), _m in _line_roots(f, nbar, u, w, rng):
                y = tuple(f.add(f.mul(s, a), f.mul(t, b)) for a, b in zip(u, w))
                if all(f.is_zero(x) for x in y):
                    continue
                w1, w2 = _tangent_frame(f, nbar, y)
                for (b, cch), _m2 in _ruling_form(f, nbar, w1, w2).projective_roots(rng):
                    d = tuple(f.add(f.mul(b, a1), f.mul(cch, a2))
                              for a1, a2 in zip(w1, w2))
                    if all(f.is_zero(x) for x in d):
                        continue
                    push([kappa, _lift(f, sel, y, dim), _lift(f, sel, d, dim)])
        return planes[:count]

    if crk == 2:
        comp = complete_to_basis(ker)
        nbar = n.restrict(comp)
        if dim - 2 == 2:
            g = BinaryForm(f, (nbar[1, 1], f.add(nbar[0, 1], nbar[0, 1]),
                               nbar[0, 0]))
            for (s, t), _m in g.projective_roots(rng):
                d = tuple(f.add(f.mul(s, a), f.mul(t, b))
                          for a, b in zip(comp.rows[0], comp.rows[1]))
                push([ker.rows[0], ker.rows[1], d])
            return planes[:count]
        for _ in range(tries):
            if len(planes) >= count:
                break
            u = tuple(f.random_scalar(rng) for _ in range(dim - 2))
            w = tuple(f.random_scalar(rng) for _ in range(dim - 2))
            if Matrix.build(f, [u, w]).rank() != 2:
                continue
            for (s, t), _m in _line_roots(f, nbar, u, w, rng):
                ybar = tuple(f.add(f.mul(s, a), f.mul(t, b)) for a, b in zip(u, w))
                if all(f.is_zero(x) for x in ybar):
                    continue
                cols = zip(*comp.rows)
                y = tuple(dot(f, ybar, col) for col in cols)
                push([ker.rows[0], ker.rows[1], y])
        return planes[:count]

    return []


def _conic_form_choice(pencil: DualPencil, member) -> Matrix:
    f = pencil.inst.field
    lam, mu = member
    return pencil.QM if not f.is_zero(mu) else pencil.qM


def _assemble_conic(inst: FanoInstance, pencil: DualPencil, plane_f: Matrix,
                    member, flag: str):
    """Build and screen a ConicOnZ; None when a guard trips."""
    f = inst.field
    q_c = _conic_form_choice(pencil, member).restrict(plane_f)
    if q_c.rank() != 3:
        return None
    n = pencil.QM.scale(member[0]) + pencil.qM.scale(member[1])
    ker = n.nullspace()
    crk = ker.nrows
    if crk == 1:
        # vertex sits at plane coordinate (1,0,0); keep it off the conic
        if f.is_zero(q_c[0, 0]):
            return None
    plane = plane_f @ pencil.F
    conic = Conic(f, plane, q_c)
    out = ConicOnZ(conic, inst, pencil, plane_f, tuple(member), crk,
                   ker.rows[0] if ker.nrows else (), flag)
    return out if out.verify() else None


def extend_instance(inst: FanoInstance) -> FanoInstance:
    """The same instance over the quadratic extension of its prime field."""
    if not isinstance(inst.field, PrimeField):
        raise ValueError("extension needs a prime field instance")
    f2 = GF2(inst.field.p)
    coerce = lambda m: Matrix.build(f2, [[int(x) for x in row] for row in m.rows])
    return FanoInstance(f2, inst.k, coerce(inst.V), coerce(inst.Q), inst.seed)


def sample_conic(inst: FanoInstance, seed: int,
                 allow_extension: bool = False,
                 max_attempts: int = 0) -> tuple:
    """A verified conic on a fourfold section, with sampling statistics.

    Walks random fiber pencils to a corank one member, then picks a plane
    through the vertex of that member.  When the member's base quadric has
    conjugate rulings the root is resampled, or, with allow_extension, the
    search moves to the quadratic extension field; the flag records which.
    """
    if inst.k != 1:
        raise ValueError("conic sampling works on the fourfold section")
    f = inst.field
    rng = rng_mod.stream(seed, f"conic-sample:{inst.digest}")
    attempts = max_attempts or (40 * retry_budget())
    stats = {"attempts": 0, "nonsplit_roots": 0, "degenerate": 0,
             "vertex_hits": 0}
    for _ in range(attempts):
        stats["attempts"] += 1
        phi = [f.random_scalar(rng) for _ in range(5)]
        if all(f.is_zero(x) for x in phi):
            continue
        pencil = dual_pencil(inst, phi)
        if pencil is None:
            stats["degenerate"] += 1
            continue
        for (lam, mu), _mult in pencil.delta.projective_roots(rng):
            n = pencil.QM.scale(lam) + pencil.qM.scale(mu)
            if pencil.F.nrows - n.rank() != 1:
                continue
            planes = planes_in_member(f, n, 1, rng)
            if not planes:
                stats["nonsplit_roots"] += 1
                if allow_extension:
                    ext = _extension_conic(inst, phi, (lam, mu))
                    if ext is not None:
                        return ext, stats
                continue
            out = _assemble_conic(inst, pencil, planes[0], (lam, mu), "split")
            if out is None:
                stats["vertex_hits"] += 1
                continue
            return out, stats
    raise ConstructionError("conic sampling budget exhausted")


def _extension_conic(inst: FanoInstance, phi, root):
    f = inst.field
    inst2 = extend_instance(inst)
    f2 = inst2.field
    pencil2 = dual_pencil(inst2, [f2.coerce(int(x)) for x in phi])
    if pencil2 is None:
        return None
    root2 = (f2.coerce(int(root[0])), f2.coerce(int(root[1])))
    n2 = pencil2.QM.scale(root2[0]) + pencil2.qM.scale(root2[1])
    if pencil2.F.nrows - n2.rank() != 1:
        return None
    rng2 = rng_mod.stream(inst.seed, f"conic-ext:{inst.digest}")
    planes = planes_in_member(f2, n2, 1, rng2)
    if not planes:
        return None
    return _assemble_conic(inst2, pencil2, planes[0], root2, "extension")


def sample_conic_pair(inst: FanoInstance, seed: int,
                      max_attempts: int = 0) -> tuple:
    """Both conics from a rank-two member on a threefold section.

    The member splits into two hyperplanes of the fiber; each cuts the
    other generator in a conic.  Needs a small field, since rank-two
    members show up at quadratic rarity in the root scan.
    """
    if inst.k != 2:
        raise ValueError("conic pairs live on the threefold section")
    f = inst.field
    if f.order is None or f.order > 4096:
        raise ValueError("rank-two member scans need a small prime field")
    rng = rng_mod.stream(seed, f"conic-pair:{inst.digest}")
    attempts = max_attempts or (400 * retry_budget())
    stats = {"attempts": 0, "nonsplit": 0, "degenerate": 0}
    for _ in range(attempts):
        stats["attempts"] += 1
        phi = [f.random_scalar(rng) for _ in range(5)]
        if all(f.is_zero(x) for x in phi):
            continue
        pencil = dual_pencil(inst, phi)
        if pencil is None:
            stats["degenerate"] += 1
            continue
        for (lam, mu), _mult in pencil.delta.projective_roots(rng):
            n = pencil.QM.scale(lam) + pencil.qM.scale(mu)
            if pencil.F.nrows - n.rank() != 2:
                continue
            planes = planes_in_member(f, n, 2, rng)
            if len(planes) < 2:
                stats["nonsplit"] += 1
                continue
            pair = [_assemble_conic(inst, pencil, pl, (lam, mu), "surface-pair")
                    for pl in planes]
            if any(c is None for c in pair):
                stats["degenerate"] += 1
                continue
            return pair, stats
    raise ConstructionError("no split rank-two member found in budget")


# -- the fiber involution and ruling classes ------------------------------


def alpha(c: ConicOnZ) -> DualPoint:
    """The dual point supporting a conic: the unique singular member of its
    fiber pencil whose quadric contains the plane.

    Solves for the two restriction scalars of the pencil generators against
    the conic form; their ratio pins the member.
    """
    f = c.inst.field
    pencil = c.pencil
    base = c.plane_f @ pencil.F
    t = base.T.solve(c.conic.plane.T).T
    q_c = t @ c.conic.form @ t.T
    a = proportionality(f, q_c, pencil.qM.restrict(c.plane_f))
    b = proportionality(f, q_c, pencil.QM.restrict(c.plane_f))
    if a is None or b is None:
        raise ValueError("generator restrictions are not multiples of the conic")
    if f.is_zero(a) and f.is_zero(b):
        raise ConstructionError("plane lies on every pencil member; "
                                "the instance contains a plane")
    lam, mu = a, f.neg(b)
    assert f.is_zero(pencil.delta(lam, mu))
    return dual_point_at_root(pencil, lam, mu)


def same_ruling(n: Matrix, p1: Matrix, p2: Matrix) -> bool:
    """Do two planes inside a corank one quadric belong to one family?

    Planes of one ruling meet only at the vertex; planes of opposite
    rulings share a line.  A plane compared with itself says True.
    """
    ker = n.nullspace()
    if ker.nrows != 1:
        raise ValueError("ruling comparison needs a corank one quadric")
    for p in (p1, p2):
        if not n.restrict(p).is_zero():
            raise ValueError("plane does not lie inside the quadric")
        if not in_span(p, ker.rows[0]):
            raise ValueError("plane misses the vertex")
    d = intersect_rowspaces(p1, p2).nrows
    if d == 1:
        return True
    if d == 2:
        return False
    if d == 3:
        return True
    raise AssertionError("planes through a common vertex always meet")


def ruling_partition(n: Matrix, planes) -> list:
    """Group planes inside a singular quadric by ruling class.

    Corank one gives the two point classes of the double cover fiber;
    corank two merges everything into a single class parametrized by a
    projective line, which is the branch behavior.
    """
    planes = list(planes)
    ker = n.nullspace()
    crk = ker.nrows
    if crk == 1:
        blocks: list = []
        for i, p in enumerate(planes):
            placed = False
            for block in blocks:
                if same_ruling(n, planes[block[0]], p):
                    block.append(i)
                    placed = True
                    break
            if not placed:
                blocks.append([i])
        return blocks
    if crk == 2:
        for p in planes:
            for kv in ker.rows:
                if not in_span(p, kv):
                    raise ValueError("plane misses the kernel line of the member")
            if not n.restrict(p).is_zero():
                raise ValueError("plane does not lie inside the quadric")
        return [list(range(len(planes)))]
    raise ValueError(f"unsupported corank {crk}")


def involution_partner(c: ConicOnZ) -> ConicOnZ:
    """The conic of the opposite ruling through a stable marked point.

    The marked point is where the plane's quotient line crosses a fixed
    reference hyperplane, chosen from the member alone, so applying the
    operation twice restores the original plane.
    """
    f = c.inst.field
    if c.corank >= 2:
        raise BranchLocusError("corank two member: the two rulings collapse "
                               "into one family over the branch locus")
    pencil = c.pencil
    n = c.member_matrix()
    kappa = c.vertex_f
    pivot, kappa_n, sel = _vertex_frame(f, kappa)
    nbar = n.submatrix(sel, sel)
    proj = Matrix.build(f, [_project(f, kappa_n, pivot, sel, row)
                            for row in c.plane_f.rows])
    red, piv = proj.rref()
    if len(piv) != 2:
        raise ConstructionError("plane does not project to a quotient line")
    r1, r2 = red.rows[0], red.rows[1]
    istar = next(i for i in range(4)
                 if nbar.submatrix([j for j in range(4) if j != i],
                                   [j for j in range(4) if j != i]).rank() == 3)
    a, b = r2[istar], f.neg(r1[istar])
    if f.is_zero(a) and f.is_zero(b):
        raise ConstructionError("quotient line sits inside the reference "
                                "hyperplane")
    xbar = tuple(f.add(f.mul(a, x), f.mul(b, y)) for x, y in zip(r1, r2))
    w1, w2 = _tangent_frame(f, nbar, xbar)
    frame = Matrix.build(f, [xbar, w1, w2])
    # direction of the current line at the marked point, in frame coordinates
    dvec = r1 if not in_span(Matrix.row_vector(f, xbar), r1) else r2
    coords = frame.T.solve(dvec)
    cur = (coords[1], coords[2])
    roots = [r for r, _m in _ruling_form(f, nbar, w1, w2).projective_roots()]
    if len(roots) != 2:
        raise ConstructionError("marked point does not separate the rulings")
    other = [r for r in roots
             if not f.is_zero(f.sub(f.mul(r[0], cur[1]), f.mul(r[1], cur[0])))]
    if len(other) != 1:
        raise ConstructionError("could not isolate the opposite ruling")
    b0, c0 = other[0]
    d = tuple(f.add(f.mul(b0, x), f.mul(c0, y)) for x, y in zip(w1, w2))
    dim = pencil.F.nrows
    plane_f = Matrix.build(f, [kappa, _lift(f, sel, xbar, dim),
                               _lift(f, sel, d, dim)])
    out = _assemble_conic(c.inst, pencil, plane_f, c.member, c.flag)
    if out is None:
        raise ConstructionError("partner plane failed the conic guards")
    return out


# -- base point test for the conic fibration ------------------------------


def kappa_from_restrictions(f: Field, q_c: Matrix, r3, r4) -> bool:
    """No common zero on the conic for the two completion linear forms."""
    m = Matrix.build(f, [r3, r4])
    if m.rank() < 2:
        return False
    pt = m.nullspace().rows[0]
    return not f.is_zero(quadric_value(q_c, pt))


def _compose_linear(f: Field, ell, forms) -> BinaryForm:
    coeffs = [f.zero, f.zero, f.zero]
    for li, fm in zip(ell, forms):
        for d in range(3):
            coeffs[d] = f.add(coeffs[d], f.mul(li, fm.coeffs[d]))
    return BinaryForm(f, tuple(coeffs))


def kappa_resultant_oracle(f: Field, forms, r3, r4) -> bool:
    """Same test through a parametrization: the pulled back forms must not
    share a root, which the Sylvester resultant detects."""
    a = _compose_linear(f, r3, forms)
    b = _compose_linear(f, r4, forms)
    if a.is_zero() or b.is_zero():
        return False
    return not f.is_zero(sylvester_resultant(a, b))


def kappa_criterion(c: ConicOnZ) -> bool:
    """Whether the member quadric stays nonzero along the conic after
    dropping its restriction to the plane.

    Writes the member as x3 m3 + x4 m4 in coordinates adapted to the
    plane and checks that m3, m4 have no common zero on the conic.
    """
    f = c.inst.field
    if c.conic.form.rank() != 3:
        raise ValueError("base point test needs a smooth conic")
    if c.corank != 1:
        raise ValueError("base point test needs a corank one member")
    b = c.plane_f
    comp = complete_to_basis(b)
    n = c.member_matrix()
    if not n.restrict(b).is_zero():
        raise ValueError("plane does not lie inside the member")
    rmat = (comp @ n @ b.T).scale(f.add(f.one, f.one))
    return kappa_from_restrictions(f, c.conic.form, rmat.rows[0], rmat.rows[1])


# -- the distinguished hyperplane families --------------------------------


def special_family_checks(inst: FanoInstance, seed: int, trials: int = 20) -> dict:
    """Containment laws for Grassmannian planes inside the cutting
    hyperplane of a fourfold section.

    The hyperplane pairs with bivectors through an alternating form of
    rank four.  Planes of the three-space family inside it must contain
    the kernel line; planes of the common-line family must have their
    four-space inside the symplectic orthogonal of the line.
    """
    if inst.k != 1:
        raise ValueError("the special families live on a fourfold section")
    f = inst.field
    h = inst.cutting.rows[0]
    omega = two_form_matrix(f, h)
    if omega.rank() != 4:
        raise ValueError("hyperplane pairing has unexpected rank")
    w1 = omega.nullspace()
    assert w1.nrows == 1
    rng = rng_mod.stream(seed, f"special-families:{inst.digest}")
    res = {"trials": trials, "rho_contain": 0, "sigma_perp": 0,
           "rho_negative": 0, "sigma_negative": 0}

    def random_in_span(basis: Matrix) -> tuple:
        coeffs = [f.random_scalar(rng) for _ in range(basis.nrows)]
        return tuple(dot(f, coeffs, col) for col in zip(*basis.rows))

    for _ in range(trials):
        # an isotropic three-space, built one vector at a time
        while True:
            u1 = tuple(f.random_scalar(rng) for _ in range(5))
            if any(not f.is_zero(x) for x in u1):
                break
        k1 = (Matrix.row_vector(f, u1) @ omega).nullspace()
        while True:
            u2 = random_in_span(k1)
            if Matrix.build(f, [u1, u2]).rank() == 2:
                break
        k2 = (Matrix.build(f, [u1, u2]) @ omega).nullspace()
        while True:
            u3 = random_in_span(k2)
            if Matrix.build(f, [u1, u2, u3]).rank() == 3:
                break
        v3 = Matrix.build(f, [u1, u2, u3])
        assert (v3 @ omega @ v3.T).is_zero()
        for i, j in itertools.combinations(range(3), 2):
            assert f.is_zero(dot(f, h, plucker_point(f, v3.rows[i], v3.rows[j])))
        if in_span(v3, w1.rows[0]):
            res["rho_contain"] += 1

        # negative control: a three-space missing the kernel line cannot
        # keep all its wedges inside the hyperplane
        while True:
            cand = Matrix.build(f, [[f.random_scalar(rng) for _ in range(5)]
                                    for _ in range(3)])
            if cand.rank() == 3 and not in_span(cand, w1.rows[0]):
                break
        wedges = [dot(f, h, plucker_point(f, cand.rows[i], cand.rows[j]))
                  for i, j in itertools.combinations(range(3), 2)]
        if any(not f.is_zero(x) for x in wedges):
            res["rho_negative"] += 1

        # common-line family: the four-space is cut from the hyperplane
        # pairing alone, then checked against the symplectic orthogonal
        while True:
            u = tuple(f.random_scalar(rng) for _ in range(5))
            row = Matrix.row_vector(f, u) @ omega
            if any(not f.is_zero(x) for x in row.rows[0]):
                break
        cond = Matrix.build(
            f, [[dot(f, h, plucker_point(f, u, standard_basis(f, 5, j)))
                 for j in range(5)]])
        v4 = cond.nullspace()
        assert v4.nrows == 4 and in_span(v4, u)
        for x in v4.rows:
            assert f.is_zero(dot(f, h, plucker_point(f, u, x)))
        if rowspaces_equal(v4, row.nullspace()):
            res["sigma_perp"] += 1

        while True:
            extra = tuple(f.random_scalar(rng) for _ in range(5))
            cand4 = Matrix.vstack([Matrix.row_vector(f, u),
                                   Matrix.build(f, [extra]),
                                   Matrix(f, v4.rows[:2])])
            if cand4.rank() == 4 and not rowspaces_equal(cand4, v4):
                break
        vals = [dot(f, h, plucker_point(f, u, x)) for x in cand4.rows]
        if any(not f.is_zero(x) for x in vals):
            res["sigma_negative"] += 1

    res["ok"] = all(res[key] == trials for key in
                    ("rho_contain", "sigma_perp", "rho_negative",
                     "sigma_negative"))
    return res


def special_conic(inst: FanoInstance, kind: str, seed: int = 0) -> Conic:
    """A smooth conic on a fourfold section carried by a plane from one of
    the two special families.

    kind "sigma" takes the pencil plane of lines through a point whose
    four-space is cut out by the hyperplane; kind "rho" takes the wedge
    plane of an isotropic three-space.  Retries the random point until the
    quadric restricts to a rank-three form on the plane.
    """
    if inst.k != 1:
        raise ValueError("the special families live on a fourfold section")
    if kind not in ("sigma", "rho"):
        raise ValueError("kind must be sigma or rho")
    f = inst.field
    h = inst.cutting.rows[0]
    omega = two_form_matrix(f, h)
    if omega.rank() != 4:
        raise ValueError("hyperplane pairing has unexpected rank")
    rng = rng_mod.stream(seed, f"special-conic:{kind}:{inst.digest}")

    def random_in_span(basis: Matrix) -> tuple:
        coeffs = [f.random_scalar(rng) for _ in range(basis.nrows)]
        return tuple(dot(f, coeffs, col) for col in zip(*basis.rows))

    for _ in range(40 * retry_budget()):
        if kind == "sigma":
            u = tuple(f.random_scalar(rng) for _ in range(5))
            if all(f.is_zero(x) for x in u):
                continue
            cond = Matrix.build(
                f, [[dot(f, h, plucker_point(f, u, standard_basis(f, 5, j)))
                     for j in range(5)]])
            v4 = cond.nullspace()
            if v4.nrows != 4 or not in_span(v4, u):
                continue
            basis = [u]
            for cand in v4.rows:
                if len(basis) == 4:
                    break
                if Matrix.build(f, basis + [cand]).rank() == len(basis) + 1:
                    basis.append(cand)
            assert len(basis) == 4
            plane = Matrix.build(
                f, [list(plucker_point(f, basis[0], basis[i]))
                    for i in (1, 2, 3)])
        else:
            u1 = tuple(f.random_scalar(rng) for _ in range(5))
            if all(f.is_zero(x) for x in u1):
                continue
            k1 = (Matrix.row_vector(f, u1) @ omega).nullspace()
            u2 = random_in_span(k1)
            if Matrix.build(f, [u1, u2]).rank() != 2:
                continue
            k2 = (Matrix.build(f, [u1, u2]) @ omega).nullspace()
            u3 = random_in_span(k2)
            if Matrix.build(f, [u1, u2, u3]).rank() != 3:
                continue
            v3 = Matrix.build(f, [u1, u2, u3])
            plane = Matrix.build(
                f, [list(plucker_point(f, v3.rows[i], v3.rows[j]))
                    for i, j in itertools.combinations(range(3), 2)])
        form = inst.Q.restrict(plane)
        if form.rank() == 3:
            return Conic(f, plane, form)
    raise ConstructionError("no smooth special conic found in budget")
