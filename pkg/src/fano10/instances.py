"""Construction and validation of the degree-ten varieties and their inputs.

A FanoInstance holds a row basis V of a codimension-k linear slice of the ten
coordinates, together with one symmetric quadric Q. The variety is the locus
inside the Pfaffian quadrics' common zero set cut by both. GushelInstance
holds the cone-degeneration data and produces flattened and companion
instances from it.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from dataclasses import dataclass

from .fields import Field, PrimeField, Rationals, GF, field_from_json
from .linalg import Matrix, dot, in_span
from .polys import poly_trim, roots_with_multiplicity
from .rng import stream
from .wedge import (
    bivector_to_alt_matrix,
    pfaffian_matrix,
    plucker_point,
    quadric_gradient,
    quadric_value,
    standard_basis,
    two_form_matrix,
    wedge_matrix_map,
    wedge_square,
)


def retry_budget() -> int:
    return int(os.environ.get("FANO10_RETRY_BUDGET", "32"))


class ConstructionError(RuntimeError):
    pass


def random_symmetric(field: Field, rng, n: int) -> Matrix:
    a = [[field.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            c = field.random_scalar(rng)
            a[i][j] = c
            a[j][i] = c
    return Matrix(field, tuple(tuple(r) for r in a))


def random_full_rank(field: Field, rng, m: int, n: int) -> Matrix:
    for _ in range(64):
        cand = Matrix.build(field, [[field.random_scalar(rng) for _ in range(n)]
                                    for _ in range(m)])
        if cand.rank() == m:
            return cand
    raise ConstructionError(f"could not sample a rank-{m} matrix")


@dataclass(frozen=True)
class FanoInstance:
    field: Field
    k: int
    V: Matrix          # (10 - k) x 10 row basis of the linear slice
    Q: Matrix          # 10 x 10 symmetric
    seed: int

    def __post_init__(self):
        if not (0 <= self.k <= 3):
            raise ValueError(f"k must be 0..3, got {self.k}")
        if self.V.shape != (10 - self.k, 10):
            raise ValueError(f"V must be {(10 - self.k, 10)}, got {self.V.shape}")
        if self.Q.shape != (10, 10) or not self.Q.is_symmetric():
            raise ValueError("Q must be a symmetric 10 x 10 matrix")
        if self.V.rank() != 10 - self.k:
            raise ValueError("V rows are dependent")

    @property
    def dim(self) -> int:
        return 5 - self.k

    @property
    def cutting(self) -> Matrix:
        """k x 10 functionals vanishing exactly on the slice."""
        cached = self.__dict__.get("_cutting")
        if cached is None:
            cached = self.V.nullspace()
            object.__setattr__(self, "_cutting", cached)
        return cached

    @property
    def digest(self) -> str:
        cached = self.__dict__.get("_digest")
        if cached is None:
            payload = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
            cached = hashlib.sha256(payload.encode()).hexdigest()[:12]
            object.__setattr__(self, "_digest", cached)
        return cached

    def member_matrix(self, z, v) -> Matrix:
        """(z Q + P_v) restricted to the slice; its det carries the sextic."""
        f = self.field
        m = self.Q.scale(z) + pfaffian_matrix(f, v)
        return m.restrict(self.V)

    def contains(self, x) -> bool:
        f = self.field
        if all(f.is_zero(c) for c in x):
            return False
        if not all(f.is_zero(c) for c in wedge_square(f, x)):
            return False
        cut = self.cutting
        if cut.nrows and not all(f.is_zero(c) for c in cut.apply(x)):
            return False
        return f.is_zero(quadric_value(self.Q, x))

    def jacobian_at(self, x) -> Matrix:
        f = self.field
        rows = [quadric_gradient(pfaffian_matrix(f, standard_basis(f, 5, m)), x)
                for m in range(5)]
        rows.append(quadric_gradient(self.Q, x))
        rows.extend(self.cutting.rows)
        return Matrix.build(f, rows)

    def is_smooth_point(self, x) -> bool:
        return self.contains(x) and self.jacobian_at(x).rank() == 4 + self.k

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "k": self.k,
            "V": self.V.to_json(),
            "Q": self.Q.to_json(),
            "seed": self.seed,
        }

    @staticmethod
    def from_json(obj: dict) -> "FanoInstance":
        f = field_from_json(obj["field"])
        return FanoInstance(
            field=f,
            k=int(obj["k"]),
            V=Matrix.from_json(f, obj["V"]),
            Q=Matrix.from_json(f, obj["Q"]),
            seed=int(obj["seed"]),
        )

    def reduce_mod(self, p: int) -> "FanoInstance":
        if not isinstance(self.field, Rationals):
            raise TypeError("reduce_mod starts from a rational instance")
        f = GF(p)
        conv = lambda m: Matrix.build(f, [[f.coerce(x) for x in r] for r in m.rows])
        return FanoInstance(f, self.k, conv(self.V), conv(self.Q), self.seed)


def _find_point_max_codim(inst: FanoInstance, rng, attempts: int):
    """Point sampler for the codim-3 surface case.

    There the slice meets each family u ^ (.) in a single candidate point, so
    instead of a free line on the variety we move u along a line, express the
    candidate by cofactors, and solve the degree-8 condition in one variable.
    """
    f = inst.field
    cut = inst.cutting
    for _ in range(attempts):
        u1 = tuple(f.random_scalar(rng) for _ in range(5))
        u2 = tuple(f.random_scalar(rng) for _ in range(5))
        extra = tuple(f.random_scalar(rng) for _ in range(5))

        def candidate(t):
            u = tuple(f.add(a, f.mul(t, b)) for a, b in zip(u1, u2))
            m = Matrix.vstack([cut @ wedge_matrix_map(f, u),
                               Matrix.row_vector(f, extra)])
            w0 = []
            sign = f.one
            for j in range(5):
                minor = m.submatrix(range(4), [c for c in range(5) if c != j])
                w0.append(f.mul(sign, minor.det()))
                sign = f.neg(sign)
            return plucker_point(f, u, tuple(w0))

        nodes = [f.coerce(i) for i in range(9)]
        vals = [quadric_value(inst.Q, candidate(t)) for t in nodes]
        vand = Matrix.build(f, [[f.pow(t, j) for j in range(9)] for t in nodes])
        coeffs = poly_trim(f, list(vand.solve(tuple(vals))))
        if not coeffs:
            continue
        if len(coeffs) == 1:
            continue
        for t, _ in roots_with_multiplicity(f, coeffs, rng):
            x = candidate(t)
            if not all(f.is_zero(c) for c in x) and inst.contains(x):
                return x
    return None


def find_point(inst: FanoInstance, rng, attempts: int = 200):
    """A point on the variety, or None. Samples a line inside the Grassmannian
    part of the slice and solves the single quadric on it."""
    f = inst.field
    cut = inst.cutting
    if inst.k == 3:
        return _find_point_max_codim(inst, rng, attempts)
    for _ in range(attempts):
        u = tuple(f.random_scalar(rng) for _ in range(5))
        if all(f.is_zero(c) for c in u):
            continue
        wmap = wedge_matrix_map(f, u)
        if cut.nrows:
            k_basis = (cut @ wmap).nullspace()
        else:
            k_basis = Matrix.identity(f, 5)
        if k_basis.nrows < 2:
            continue
        c1 = tuple(f.random_scalar(rng) for _ in range(k_basis.nrows))
        c2 = tuple(f.random_scalar(rng) for _ in range(k_basis.nrows))
        w1 = tuple(dot(f, c1, col) for col in zip(*k_basis.rows))
        w2 = tuple(dot(f, c2, col) for col in zip(*k_basis.rows))
        x1 = plucker_point(f, u, w1)
        x2 = plucker_point(f, u, w2)
        # Q(x1 + t x2) as a quadratic in t
        a = quadric_value(inst.Q, x2)
        b = f.add(dot(f, x1, inst.Q.apply(x2)), dot(f, x2, inst.Q.apply(x1)))
        c = quadric_value(inst.Q, x1)
        sols = []
        coeffs = [c, b, a]
        if not all(f.is_zero(z) for z in coeffs):
            try:
                sols = [r for r, _ in roots_with_multiplicity(f, coeffs, rng)]
            except ValueError:
                sols = []
        elif inst.contains(x1):
            sols = [f.zero]
        for t in sols:
            x = tuple(f.add(p, f.mul(t, q)) for p, q in zip(x1, x2))
            if not all(f.is_zero(z) for z in x) and inst.contains(x):
                return x
    return None


def smoothness_probe(inst: FanoInstance, seed: int, points: int = 6) -> bool:
    """Sample points and require the expected Jacobian rank at each."""
    target = inst
    if isinstance(inst.field, Rationals):
        from .fields import INTERPOLATION_PRIME
        target = inst.reduce_mod(INTERPOLATION_PRIME)
    rng = stream(seed, f"probe-{target.digest}")
    found = 0
    for _ in range(points * 4):
        x = find_point(target, rng)
        if x is None:
            continue
        if target.jacobian_at(x).rank() != 4 + target.k:
            return False
        found += 1
        if found >= points:
            return True
    return False


def random_instance(field: Field, k: int, seed: int, validate: bool = True) -> FanoInstance:
    budget = retry_budget()
    for attempt in range(budget):
        rng = stream(seed, f"instance-k{k}-attempt{attempt}")
        if k == 0:
            v = Matrix.identity(field, 10)
        else:
            v = random_full_rank(field, rng, 10 - k, 10)
        q = random_symmetric(field, rng, 10)
        inst = FanoInstance(field, k, v, q, seed)
        if not validate or smoothness_probe(inst, seed):
            return inst
    raise ConstructionError(f"no smooth instance found in {budget} attempts (k={k}, seed={seed})")


# ---------------------------------------------------------------------------
# nested slices sharing one quadric
# ---------------------------------------------------------------------------

def random_chain(field: Field, seed: int, ks=(0, 1, 2), validate: bool = True) -> list:
    """Instances with one shared quadric and nested slices, descending in dim."""
    ks = sorted(ks)
    budget = retry_budget()
    for attempt in range(budget):
        rng = stream(seed, f"chain-attempt{attempt}")
        q = random_symmetric(field, rng, 10)
        cuts = random_full_rank(field, rng, max(ks), 10) if max(ks) else None
        out = []
        ok = True
        for k in ks:
            if k == 0:
                v = Matrix.identity(field, 10)
            else:
                v = Matrix(field, tuple(cuts.rows[:k])).nullspace()
            inst = FanoInstance(field, k, v, q, seed)
            if validate and not smoothness_probe(inst, seed):
                ok = False
                break
            out.append(inst)
        if ok:
            return out
    raise ConstructionError(f"no smooth chain found in {budget} attempts (seed={seed})")


# ---------------------------------------------------------------------------
# cone degeneration data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GushelInstance:
    """Quadric t^2 + 2 ell(w) t + q(w) on the cone coordinate (t, w), sliced
    by the k+1 functionals hs."""

    field: Field
    k: int
    hs: Matrix      # (k + 1) x 10, independent
    ell: tuple      # linear form on the ten coordinates
    q: Matrix       # 10 x 10 symmetric
    seed: int

    def __post_init__(self):
        if not (0 <= self.k <= 2):
            raise ValueError("cone construction needs k in 0..2")
        if self.hs.shape != (self.k + 1, 10) or self.hs.rank() != self.k + 1:
            raise ValueError("hs must be k+1 independent functionals")

    @property
    def slice_basis(self) -> Matrix:
        """(9 - k) x 10 basis of the common kernel of all the hs rows."""
        return self.hs.nullspace()

    @property
    def digest(self) -> str:
        cached = self.__dict__.get("_digest")
        if cached is None:
            payload = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
            cached = hashlib.sha256(payload.encode()).hexdigest()[:12]
            object.__setattr__(self, "_digest", cached)
        return cached

    def flatten(self, eps) -> FanoInstance:
        """Substitute t = h0 / eps into the cone quadric: an ordinary instance
        on the slice cut by the remaining functionals."""
        f = self.field
        eps = f.coerce(eps)
        h0 = self.hs.rows[0]
        inv1, inv2 = f.inv(eps), f.inv(f.mul(eps, eps))
        rows = []
        for i in range(10):
            row = []
            for j in range(10):
                t = self.q[i, j]
                t = f.add(t, f.mul(inv1, f.add(f.mul(self.ell[i], h0[j]),
                                               f.mul(h0[i], self.ell[j]))))
                t = f.add(t, f.mul(inv2, f.mul(h0[i], h0[j])))
                row.append(t)
            rows.append(tuple(row))
        q_eps = Matrix(f, tuple(rows))
        rest = Matrix(f, tuple(self.hs.rows[1:]))
        v = rest.nullspace() if rest.nrows else Matrix.identity(f, 10)
        return FanoInstance(f, self.k, v, q_eps, self.seed)

    def companion(self) -> FanoInstance:
        """One dimension down: quadric q - ell^2 on the full slice."""
        f = self.field
        rows = []
        for i in range(10):
            rows.append(tuple(f.sub(self.q[i, j], f.mul(self.ell[i], self.ell[j]))
                              for j in range(10)))
        return FanoInstance(f, self.k + 1, self.slice_basis, Matrix(f, tuple(rows)), self.seed)

    def cone_member_matrix(self, z, v) -> Matrix:
        """(z Q_cone + P_v) on span(t) + slice: size (10 - k)."""
        f = self.field
        z = f.coerce(z)
        basis = self.slice_basis
        inner = (self.q.scale(z) + pfaffian_matrix(f, v)).restrict(basis)
        ell_vals = [f.mul(z, dot(f, self.ell, row)) for row in basis.rows]
        top = (z, *ell_vals)
        rows = [top]
        for i in range(basis.nrows):
            rows.append((ell_vals[i], *inner.rows[i]))
        return Matrix(f, tuple(rows))

    def to_json(self) -> dict:
        f = self.field
        return {
            "field": f.to_json(),
            "k": self.k,
            "hs": self.hs.to_json(),
            "ell": [f.scalar_to_json(c) for c in self.ell],
            "q": self.q.to_json(),
            "seed": self.seed,
        }

    @staticmethod
    def from_json(obj: dict) -> "GushelInstance":
        f = field_from_json(obj["field"])
        return GushelInstance(
            field=f,
            k=int(obj["k"]),
            hs=Matrix.from_json(f, obj["hs"]),
            ell=tuple(f.scalar_from_json(c) for c in obj["ell"]),
            q=Matrix.from_json(f, obj["q"]),
            seed=int(obj["seed"]),
        )


def random_gushel(field: Field, k: int, seed: int, validate: bool = True) -> GushelInstance:
    budget = retry_budget()
    for attempt in range(budget):
        rng = stream(seed, f"gushel-k{k}-attempt{attempt}")
        hs = random_full_rank(field, rng, k + 1, 10)
        ell = tuple(field.random_scalar(rng) for _ in range(10))
        q = random_symmetric(field, rng, 10)
        g = GushelInstance(field, k, hs, ell, q, seed)
        if not validate:
            return g
        try:
            comp = g.companion()
        except ValueError:
            continue
        if smoothness_probe(comp, seed):
            return g
    raise ConstructionError(f"no valid cone data found in {budget} attempts (k={k}, seed={seed})")


# ---------------------------------------------------------------------------
# exhaustive plane search over tiny prime fields
# ---------------------------------------------------------------------------

def _rref_subspaces(field: PrimeField, dim: int, ambient: int):
    """All dim-dimensional subspaces of field^ambient, one RREF basis each."""
    elements = list(range(field.p))
    for pivots in itertools.combinations(range(ambient), dim):
        free_slots = []
        for i, pc in enumerate(pivots):
            for c in range(pc + 1, ambient):
                if c not in pivots:
                    free_slots.append((i, c))
        for values in itertools.product(elements, repeat=len(free_slots)):
            rows = [[0] * ambient for _ in range(dim)]
            for i, pc in enumerate(pivots):
                rows[i][pc] = 1
            for (i, c), val in zip(free_slots, values):
                rows[i][c] = val
            yield Matrix.build(field, rows)


def _projective_points(field: PrimeField, n: int):
    """All points of P^(n-1), normalized so the first nonzero coordinate is 1."""
    for lead in range(n):
        for tail in itertools.product(range(field.p), repeat=n - 1 - lead):
            yield (0,) * lead + (1,) + tail


def count_subspaces(p: int, dim: int, ambient: int) -> int:
    """Gaussian binomial [ambient choose dim]_p."""
    num = den = 1
    for i in range(dim):
        num *= p ** (ambient - i) - 1
        den *= p ** (dim - i) - 1
    return num // den


def _plane_from_v3(inst: FanoInstance, b3: Matrix):
    """Bivector basis of the wedge square of a 3-dim subspace."""
    f = inst.field
    r = b3.rows
    return [plucker_point(f, r[0], r[1]), plucker_point(f, r[0], r[2]),
            plucker_point(f, r[1], r[2])]


def _plane_from_flag(inst: FanoInstance, u, v4: Matrix):
    """Bivector basis of u wedged with a 4-dim space containing u."""
    f = inst.field
    others = [row for row in v4.rows
              if Matrix.build(f, [u, row]).rank() == 2]
    basis = []
    for w in others:
        x = plucker_point(f, u, w)
        cand = basis + [x]
        if Matrix.build(f, cand).rank() == len(cand):
            basis.append(x)
        if len(basis) == 3:
            break
    return basis


def _plane_in_quadric(inst: FanoInstance, bivs) -> bool:
    f = inst.field
    span = Matrix.build(f, bivs)
    return span.nrows == 3 and (inst.Q.restrict(span)).is_zero()


def plane_search(inst: FanoInstance, max_p: int = 7) -> dict:
    """Exhaustively list projective planes on a codim-1 instance over GF(p).

    Returns {"rho": [...], "sigma": [...], "counts": {...}} where each entry
    carries the defining linear data. Only the two Grassmannian families can
    appear, so scanning both is a full census.
    """
    f = inst.field
    if not isinstance(f, PrimeField) or f.p > max_p:
        raise ValueError(f"exhaustive search needs a prime field with p <= {max_p}")
    if inst.k != 1:
        raise ValueError("plane census is for codimension-1 instances")
    h = inst.cutting.rows[0]
    ah = two_form_matrix(f, h)
    rho_hits = []
    n_v3 = 0
    for b3 in _rref_subspaces(f, 3, 5):
        n_v3 += 1
        if not ah.restrict(b3).is_zero():
            continue
        bivs = _plane_from_v3(inst, b3)
        if _plane_in_quadric(inst, bivs):
            rho_hits.append({"V3": b3.to_json()})
    sigma_hits = []
    n_pts = 0
    for u in _projective_points(f, 5):
        n_pts += 1
        cov = ah.apply(u)
        if all(c == 0 for c in cov):
            v4_list = [v4 for v4 in _rref_subspaces(f, 4, 5)
                       if in_span(v4, u)]
        else:
            v4 = Matrix.build(f, [cov]).nullspace()
            v4_list = [v4] if in_span(v4, u) else []
        for v4 in v4_list:
            bivs = _plane_from_flag(inst, u, v4)
            if len(bivs) == 3 and _plane_in_quadric(inst, bivs):
                sigma_hits.append({"u": list(u), "V4": v4.to_json()})
    expected_v3 = count_subspaces(f.p, 3, 5)
    expected_pts = (f.p ** 5 - 1) // (f.p - 1)
    if n_v3 != expected_v3 or n_pts != expected_pts:
        raise RuntimeError("enumeration undercounted the search space")
    return {
        "rho": rho_hits,
        "sigma": sigma_hits,
        "counts": {"V3": n_v3, "points": n_pts,
                   "flags": n_pts * count_subspaces(f.p, 3, 4)},
    }


def build_instance_containing_plane(field: Field, kind: str, seed: int) -> tuple:
    """A (non-validated) codim-1 instance built to contain one chosen plane.

    Returns (instance, plane_data). The slice functional satisfies the three
    linear conditions and the quadric the six that force the plane inside.
    """
    rng = stream(seed, f"planted-plane-{kind}")
    for _ in range(retry_budget()):
        if kind == "rho":
            b3 = random_full_rank(field, rng, 3, 5)
            r = b3.rows
            bivs = [plucker_point(field, r[0], r[1]), plucker_point(field, r[0], r[2]),
                    plucker_point(field, r[1], r[2])]
            plane_data = {"kind": "rho", "V3": b3.to_json()}
        elif kind == "sigma":
            v4 = random_full_rank(field, rng, 4, 5)
            cs = [field.random_scalar(rng) for _ in range(4)]
            u = tuple(dot(field, cs, col) for col in zip(*v4.rows))
            bivs = []
            for w in v4.rows:
                x = plucker_point(field, u, w)
                if Matrix.build(field, bivs + [x]).rank() == len(bivs) + 1:
                    bivs.append(x)
                if len(bivs) == 3:
                    break
            if len(bivs) != 3:
                continue
            plane_data = {"kind": "sigma", "u": [field.scalar_to_json(c) for c in u],
                          "V4": v4.to_json()}
        else:
            raise ValueError(f"unknown plane family {kind!r}")
        span = Matrix.build(field, bivs)
        if span.nrows != 3 or span.rank() != 3:
            continue
        h_space = span.nullspace()           # functionals killing the plane
        hc = [field.random_scalar(rng) for _ in range(h_space.nrows)]
        h = tuple(dot(field, hc, col) for col in zip(*h_space.rows))
        if all(field.is_zero(c) for c in h):
            continue
        # quadric coefficients: 55 symmetric unknowns, 6 incidence conditions
        sym_idx = [(i, j) for i in range(10) for j in range(i, 10)]
        cond_rows = []
        pairs = [(a, a) for a in range(3)] + [(0, 1), (0, 2), (1, 2)]
        for a, b in pairs:
            row = []
            for i, j in sym_idx:
                if i == j:
                    row.append(field.mul(bivs[a][i], bivs[b][i]))
                else:
                    row.append(field.add(field.mul(bivs[a][i], bivs[b][j]),
                                         field.mul(bivs[a][j], bivs[b][i])))
            cond_rows.append(row)
        sols = Matrix.build(field, cond_rows).nullspace()
        coeffs = [field.random_scalar(rng) for _ in range(sols.nrows)]
        qvec = tuple(dot(field, coeffs, col) for col in zip(*sols.rows))
        qm = [[field.zero] * 10 for _ in range(10)]
        for (i, j), c in zip(sym_idx, qvec):
            qm[i][j] = c
            qm[j][i] = c
        q = Matrix(field, tuple(tuple(r) for r in qm))
        v = Matrix.build(field, [h]).nullspace()
        inst = FanoInstance(field, 1, v, q, seed)
        ok = all(field.is_zero(quadric_value(q, biv)) for biv in bivs)
        if ok:
            return inst, plane_data
    raise ConstructionError("failed to plant a plane")
