"""First-order deformations of parametrized conics inside quadric loci.

A conic is given by a degree-two map from the projective line into some
projective space, together with the symmetric Gram matrices of the quadrics
cutting the ambient locus.  A first-order deformation moves each coordinate
by a binary form; the deformation stays inside the locus exactly when every
polarized quadric annihilates it.  That condition is linear, so the tangent
space of the Hilbert scheme and the cohomology of twists of the normal
bundle all reduce to nullspaces of small exact matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import rng as rng_mod
from .conics import Conic, ConicOnZ, ambient_parametrization, parametrize_conic
from .fields import Field
from .instances import (
    ConstructionError,
    FanoInstance,
    random_symmetric,
    retry_budget,
)
from .linalg import Matrix
from .polys import BinaryForm
from .wedge import pfaffian_matrix, plucker_point, standard_basis, two_form_matrix

__all__ = [
    "ParametrizedConic",
    "grassmannian_conic",
    "slice_parametrized",
    "slice_conic",
    "section_space",
    "normal_twist_dims",
    "conic_tangent_dim",
    "splitting_type",
    "conic_splitting",
    "jumping_conic_search",
]


def _form_product_coeffs(f: Field, a, b) -> list:
    """Coefficients of the product of two binary forms, full length kept."""
    out = [f.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if f.is_zero(x):
            continue
        for j, y in enumerate(b):
            out[i + j] = f.add(out[i + j], f.mul(x, y))
    return out


@dataclass(frozen=True)
class ParametrizedConic:
    """Degree-two map to projective space plus the ambient quadric Grams.

    coords[i] is the binary quadratic giving homogeneous coordinate i;
    every Gram in `equations` must pull back to the zero quartic, and the
    three-dimensional span condition makes the map an embedding onto a
    plane conic rather than a line or point.
    """

    field: Field
    coords: tuple
    equations: tuple

    def __post_init__(self):
        f = self.field
        n = len(self.coords)
        if n < 3:
            raise ValueError("need at least three coordinates")
        for phi in self.coords:
            if phi.degree != 2:
                raise ValueError("coordinates must be binary quadratics")
        span = Matrix.build(f, [list(phi.coeffs) for phi in self.coords])
        if span.rank() != 3:
            raise ValueError("coordinate forms do not span a full plane conic")
        for q in self.equations:
            if q.shape != (n, n):
                raise ValueError(f"Gram matrix must be {n} x {n}")
            if not self._pullback_is_zero(q):
                raise ValueError("quadric does not vanish on the conic")

    def _pullback_is_zero(self, q: Matrix) -> bool:
        f = self.field
        acc = [f.zero] * 5
        for i, row in enumerate(q.rows):
            for j, qij in enumerate(row):
                if f.is_zero(qij):
                    continue
                prod = _form_product_coeffs(f, self.coords[i].coeffs,
                                            self.coords[j].coeffs)
                for d, c in enumerate(prod):
                    acc[d] = f.add(acc[d], f.mul(qij, c))
        return all(f.is_zero(c) for c in acc)

    @property
    def npoints(self) -> int:
        return len(self.coords)

    def partials(self) -> tuple:
        """(d/ds, d/dt) of the coordinate vector, as degree-one coefficient
        rows; coeffs[i] multiplies s^i t^(1-i)."""
        f = self.field
        ds, dt = [], []
        for phi in self.coords:
            c0, c1, c2 = phi.coeffs
            two = f.add(f.one, f.one)
            ds.append((c1, f.mul(two, c2)))
            dt.append((f.mul(two, c0), c1))
        return tuple(ds), tuple(dt)


def grassmannian_conic(conic: Conic, seed: int = 0) -> ParametrizedConic:
    """Parametrize a smooth conic lying on the Grassmannian, with the five
    wedge-square quadrics of the ambient nine-dimensional projective space."""
    f = conic.field
    forms = parametrize_conic(conic, seed=seed)
    amb = ambient_parametrization(conic, forms)
    grams = tuple(pfaffian_matrix(f, standard_basis(f, 5, m)) for m in range(5))
    return ParametrizedConic(f, tuple(amb), grams)


def slice_parametrized(conic: Conic, inst: FanoInstance,
                       seed: int = 0) -> ParametrizedConic:
    """Parametrize a conic in the coordinates of the linear slice, with the
    restricted wedge-square quadrics and the restricted pencil quadric as
    equations."""
    f = inst.field
    forms = parametrize_conic(conic, seed=seed)
    amb = ambient_parametrization(conic, forms)
    coeff_cols = Matrix.build(f, [list(form.coeffs) for form in amb])
    in_slice = inst.V.T.solve(coeff_cols)
    if in_slice is None:
        raise ConstructionError("conic does not lie in the linear slice")
    coords = tuple(BinaryForm(f, tuple(row)) for row in in_slice.rows)
    grams = [pfaffian_matrix(f, standard_basis(f, 5, m)).restrict(inst.V)
             for m in range(5)]
    grams.append(inst.Q.restrict(inst.V))
    return ParametrizedConic(f, coords, tuple(grams))


def slice_conic(cz: ConicOnZ, seed: int = 0) -> ParametrizedConic:
    return slice_parametrized(cz.conic, cz.inst, seed=seed)


def section_space(pc: ParametrizedConic, m: int) -> Matrix:
    """Row basis of the deformations with entries of degree 2 - m.

    A deformation is a tuple v of binary forms, one per coordinate, and the
    constraint is that phi^T Q v vanishes identically for every Gram Q; at
    twist m the entries have degree 2 - m and each constraint is a form of
    degree 4 - m.
    """
    if m not in (0, 1, 2):
        raise ValueError("twist must be 0, 1 or 2")
    f = pc.field
    n = pc.npoints
    width = 3 - m
    cols = n * width
    rows = []
    for q in pc.equations:
        # w_j = sum_i phi_i q_ij, a binary quadratic for each column j
        w = []
        for j in range(n):
            acc = [f.zero] * 3
            for i in range(n):
                qij = q.rows[i][j]
                if f.is_zero(qij):
                    continue
                for d, c in enumerate(pc.coords[i].coeffs):
                    acc[d] = f.add(acc[d], f.mul(qij, c))
            w.append(acc)
        for r in range(5 - m):
            row = [f.zero] * cols
            for j in range(n):
                for b in range(width):
                    a = r - b
                    if 0 <= a <= 2:
                        row[j * width + b] = f.add(row[j * width + b],
                                                   w[j][a])
            rows.append(row)
    if not rows:
        return Matrix.identity(f, cols)
    return Matrix.build(f, rows).nullspace()


def _trivial_rows(pc: ParametrizedConic, m: int) -> list:
    """Deformations that only move the parametrization, flattened to the
    coefficient layout of section_space."""
    f = pc.field
    ds, dt = pc.partials()
    if m == 2:
        return []
    if m == 1:
        return [[c for pair in ds for c in pair],
                [c for pair in dt for c in pair]]
    out = []
    for part in (ds, dt):
        # s * (b0 t + b1 s) has coeffs (0, b0, b1), t * same (b0, b1, 0)
        out.append([c for b0, b1 in part for c in (f.zero, b0, b1)])
        out.append([c for b0, b1 in part for c in (b0, b1, f.zero)])
    return out


def normal_twist_dims(pc: ParametrizedConic) -> tuple:
    """(h0, h1, h2) of the normal sheaf twists, after removing the
    reparametrization and rescaling directions.

    The removed directions are checked to lie inside the solution space
    and to have the expected rank before subtracting; a failure means the
    extrinsic equations do not cut the locus transversally along the conic.
    """
    f = pc.field
    dims = []
    for m, expected in ((0, 4), (1, 2), (2, 0)):
        basis = section_space(pc, m)
        triv = _trivial_rows(pc, m)
        if triv:
            tmat = Matrix.build(f, triv)
            if tmat.rank() != expected:
                raise ConstructionError(
                    "parametrization directions are degenerate")
            stacked = Matrix.vstack([basis, tmat])
            if stacked.rank() != basis.rank():
                raise ConstructionError(
                    "trivial deformation escapes the solution space")
        dims.append(len(basis.rows) - expected)
    h0, h1, h2 = dims
    if not (h0 >= h1 >= h2 >= 0):
        raise ConstructionError(f"twist dimensions not monotone: {dims}")
    return h0, h1, h2


def conic_tangent_dim(pc: ParametrizedConic) -> int:
    """Dimension of the Hilbert scheme tangent space at the conic."""
    return normal_twist_dims(pc)[0]


def splitting_type(dims: tuple, rank: int, total_degree: int) -> tuple:
    """The unique degree multiset of a rank `rank` splitting with the given
    twist dimensions and total degree; degrees are on the parametrizing
    line."""
    h = tuple(dims)
    found = []
    for combo in itertools.combinations_with_replacement(range(-4, 7), rank):
        if sum(combo) != total_degree:
            continue
        hv = tuple(sum(max(0, e - m + 1) for e in combo) for m in range(3))
        if hv == h:
            found.append(tuple(sorted(combo, reverse=True)))
    if len(found) != 1:
        raise ConstructionError(
            f"splitting not determined: dims {h} match {found}")
    return found[0]


def conic_splitting(cz: ConicOnZ, seed: int = 0) -> tuple:
    """Degree multiset of the normal bundle of a sampled conic inside its
    instance; rank is one less than the instance dimension."""
    inst = cz.inst
    pc = slice_conic(cz, seed=seed)
    dims = normal_twist_dims(pc)
    return splitting_type(dims, inst.dim - 1, 4 - 2 * inst.k)


def jumping_conic_search(field: Field, seed: int = 0) -> tuple:
    """Hunt for a pencil-plane conic on a fourfold section whose normal
    bundle jumps off the generic splitting.

    Fixes a plane of lines through a point inside a hyperplane, fixes the
    conic the quadric cuts on that plane, then moves the quadric through a
    pencil of perturbations vanishing on the plane, which leaves the conic
    in place.  The jump is a single linear condition on the quadric, so a
    one-parameter scan over a small field hits it with fair probability
    per pencil.  Returns (instance, conic, dims) at the first jump.
    """
    f = field
    if f.order is None or f.order > 4096:
        raise ValueError("scan needs a small finite field")
    rng = rng_mod.stream(seed, "jumping-conic")

    def random_vec(n):
        while True:
            v = tuple(f.random_scalar(rng) for _ in range(n))
            if any(not f.is_zero(x) for x in v):
                return v

    def random_in_span(basis: Matrix) -> tuple:
        coeffs = [f.random_scalar(rng) for _ in range(basis.nrows)]
        out = [f.zero] * basis.ncols
        for c, row in zip(coeffs, basis.rows):
            for j, x in enumerate(row):
                out[j] = f.add(out[j], f.mul(c, x))
        return tuple(out)

    for _ in range(4 * retry_budget()):
        u = random_vec(5)
        rows = [u]
        while len(rows) < 4:
            cand = random_vec(5)
            if Matrix.build(f, rows + [cand]).rank() == len(rows) + 1:
                rows.append(cand)
        plane = Matrix.build(
            f, [list(plucker_point(f, u, w)) for w in rows[1:]])
        # hyperplanes containing the plane, restricted to rank-four pairing
        hspace = plane.nullspace()
        h = random_in_span(hspace)
        if two_form_matrix(f, h).rank() != 4:
            continue
        V = Matrix.row_vector(f, h).nullspace()
        Q0 = random_symmetric(f, rng, 10)
        form = Q0.restrict(plane)
        if form.rank() != 3:
            continue
        conic = Conic(f, plane, form)
        # a symmetric perturbation vanishing on the plane
        r = random_in_span(plane.nullspace())
        v = random_vec(10)
        pert = Matrix.build(
            f, [[f.add(f.mul(r[i], v[j]), f.mul(v[i], r[j]))
                 for j in range(10)] for i in range(10)])
        for i in range(f.order):
            t = f.coerce(i)
            inst = FanoInstance(f, 1, V, Q0 + pert.scale(t), seed)
            try:
                pc = slice_parametrized(conic, inst)
                dims = normal_twist_dims(pc)
            except ConstructionError:
                continue
            if dims in ((5, 2, 1), (5, 3, 1)):
                return inst, conic, dims
    raise ConstructionError("no jumping conic found in budget")
