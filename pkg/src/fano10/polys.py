"""Polynomials: univariate root finding, binary forms, and sparse multivariate forms.

Univariate polynomials are plain coefficient lists, low degree first, over any
Field. Root finding over a finite field is Cantor-Zassenhaus (squarefree part,
then gcd with x^q - x, then random equal-degree splits); over the rationals,
closed forms up to degree two plus the rational root theorem.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .fields import Field, Rationals
from .linalg import Matrix


class FitError(ValueError):
    pass


# ---------------------------------------------------------------------------
# univariate coefficient-list helpers (low degree first)
# ---------------------------------------------------------------------------

def poly_trim(f: Field, a: list) -> list:
    while a and f.is_zero(a[-1]):
        a.pop()
    return a


def poly_deg(f: Field, a: list) -> int:
    a = poly_trim(f, list(a))
    return len(a) - 1 if a else -1


def poly_add(f: Field, a: list, b: list) -> list:
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else f.zero
        y = b[i] if i < len(b) else f.zero
        out.append(f.add(x, y))
    return poly_trim(f, out)


def poly_scale(f: Field, c, a: list) -> list:
    return poly_trim(f, [f.mul(c, x) for x in a])


def poly_mul(f: Field, a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [f.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if f.is_zero(x):
            continue
        for j, y in enumerate(b):
            out[i + j] = f.add(out[i + j], f.mul(x, y))
    return poly_trim(f, out)


def poly_divmod(f: Field, a: list, b: list) -> tuple[list, list]:
    a = poly_trim(f, list(a))
    b = poly_trim(f, list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return [], a
    inv = f.inv(b[-1])
    q = [f.zero] * (len(a) - len(b) + 1)
    r = list(a)
    for k in range(len(q) - 1, -1, -1):
        c = f.mul(r[k + len(b) - 1], inv)
        q[k] = c
        if not f.is_zero(c):
            for j, y in enumerate(b):
                r[k + j] = f.sub(r[k + j], f.mul(c, y))
    return poly_trim(f, q), poly_trim(f, r)


def poly_monic(f: Field, a: list) -> list:
    a = poly_trim(f, list(a))
    if not a:
        return a
    return poly_scale(f, f.inv(a[-1]), a)


def poly_gcd(f: Field, a: list, b: list) -> list:
    a, b = poly_trim(f, list(a)), poly_trim(f, list(b))
    while b:
        a, b = b, poly_divmod(f, a, b)[1]
    return poly_monic(f, a)


def poly_deriv(f: Field, a: list) -> list:
    out = []
    for i in range(1, len(a)):
        c = a[i]
        for _ in range(i - 1):
            c = f.add(c, a[i])
        out.append(c)
    return poly_trim(f, out)


def poly_eval(f: Field, a: list, x):
    acc = f.zero
    for c in reversed(a):
        acc = f.add(f.mul(acc, x), c)
    return acc


def poly_pow_mod(f: Field, base: list, e: int, mod: list) -> list:
    out = [f.one]
    b = poly_divmod(f, base, mod)[1]
    while e:
        if e & 1:
            out = poly_divmod(f, poly_mul(f, out, b), mod)[1]
        b = poly_divmod(f, poly_mul(f, b, b), mod)[1]
        e >>= 1
    return out


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def _roots_finite(f: Field, a: list, rng: random.Random) -> list:
    """Distinct roots in a finite field of odd order, via Cantor-Zassenhaus."""
    q = f.order
    a = poly_monic(f, list(a))
    sq = poly_gcd(f, a, poly_deriv(f, a))
    g = poly_divmod(f, a, sq)[0] if poly_deg(f, sq) > 0 else a
    # keep only the linear factors with roots in the field
    frob = poly_pow_mod(f, [f.zero, f.one], q, g)
    frob = poly_add(f, frob, [f.zero, f.neg(f.one)])
    g = poly_gcd(f, g, frob)
    roots = []
    stack = [g]
    while stack:
        h = stack.pop()
        d = poly_deg(f, h)
        if d <= 0:
            continue
        if d == 1:
            roots.append(f.neg(h[0]))
            continue
        while True:
            shift = [f.random_scalar(rng), f.one]
            w = poly_pow_mod(f, shift, (q - 1) // 2, h)
            w = poly_add(f, w, [f.neg(f.one)])
            u = poly_gcd(f, w, h)
            du = poly_deg(f, u)
            if 0 < du < d:
                stack.append(u)
                stack.append(poly_divmod(f, h, u)[0])
                break
    return roots


def _divisors(n: int) -> list[int]:
    n = abs(n)
    if n == 0:
        return []
    if n > 10**14:
        raise FitError(f"rational root search: constant term too large ({n})")
    out = set()
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.add(d)
            out.add(n // d)
        d += 1
    return sorted(out)


def _roots_rational(a: list) -> list:
    """Distinct rational roots of a Fraction-coefficient polynomial."""
    f = Rationals()
    a = poly_trim(f, list(a))
    d = len(a) - 1
    if d <= 0:
        return []
    if d == 1:
        return [-a[0] / a[1]]
    if d == 2:
        c0, c1, c2 = a
        disc = c1 * c1 - 4 * c2 * c0
        s = f.sqrt(disc)
        if s is None:
            return []
        r1 = (-c1 + s) / (2 * c2)
        r2 = (-c1 - s) / (2 * c2)
        return [r1] if r1 == r2 else [r1, r2]
    den = math.lcm(*(c.denominator for c in a))
    ints = [int(c * den) for c in a]
    g = math.gcd(*ints)
    ints = [c // g for c in ints]
    roots = []
    if ints[0] == 0:
        roots.append(Fraction(0))
        while ints and ints[0] == 0:
            ints.pop(0)
    for num in _divisors(ints[0]):
        for dnm in _divisors(ints[-1]):
            for sgn in (1, -1):
                cand = Fraction(sgn * num, dnm)
                if cand not in roots and poly_eval(f, a, cand) == 0:
                    roots.append(cand)
    return roots


def roots_with_multiplicity(f: Field, a: list, rng: random.Random | None = None) -> list:
    """All roots of a in the field, as (root, multiplicity), deterministic order."""
    a = poly_trim(f, list(a))
    if not a:
        raise ValueError("zero polynomial")
    if len(a) == 1:
        return []
    if rng is None:
        rng = random.Random(0xC2)
    if f.order is None:
        distinct = _roots_rational(a)
    elif len(a) == 3:
        # quadratic formula, works uniformly over any odd-order field
        c0, c1, c2 = a
        disc = f.sub(f.mul(c1, c1), f.mul(f.coerce(4), f.mul(c2, c0)))
        s = f.sqrt(disc)
        if s is None:
            distinct = []
        else:
            half = f.inv(f.add(c2, c2))
            r1 = f.mul(f.sub(s, c1), half)
            r2 = f.mul(f.sub(f.neg(s), c1), half)
            distinct = [r1] if f.eq(r1, r2) else [r1, r2]
    elif len(a) == 2:
        distinct = [f.neg(f.div(a[0], a[1]))]
    else:
        distinct = _roots_finite(f, a, rng)
    out = []
    for r in distinct:
        m = 0
        rem = a
        while True:
            q, rr = poly_divmod(f, rem, [f.neg(r), f.one])
            if rr:
                break
            m += 1
            rem = q
        out.append((r, m))
    out.sort(key=lambda t: _root_sort_key(f, t[0]))
    return out


def _root_sort_key(f: Field, r):
    if isinstance(r, tuple):
        return (int(r[0]), int(r[1]))
    if isinstance(r, Fraction):
        return (float(r), 0)
    return (int(r), 0)


# ---------------------------------------------------------------------------
# binary forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinaryForm:
    """Homogeneous form in (s, t); coeffs[i] is the coefficient of s^i t^(d-i)."""

    field: Field
    coeffs: tuple

    @staticmethod
    def build(field: Field, coeffs) -> "BinaryForm":
        return BinaryForm(field, tuple(field.coerce(c) for c in coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, s, t):
        f = self.field
        acc = f.zero
        for i, c in enumerate(self.coeffs):
            term = f.mul(c, f.mul(f.pow(s, i), f.pow(t, self.degree - i)))
            acc = f.add(acc, term)
        return acc

    def is_zero(self) -> bool:
        return all(self.field.is_zero(c) for c in self.coeffs)

    def scale(self, c) -> "BinaryForm":
        f = self.field
        return BinaryForm(f, tuple(f.mul(f.coerce(c), x) for x in self.coeffs))

    def proportional_to(self, other: "BinaryForm"):
        """A scalar c with self == c * other, or None."""
        f = self.field
        if self.degree != other.degree:
            return None
        c = None
        for x, y in zip(self.coeffs, other.coeffs):
            if f.is_zero(y):
                if not f.is_zero(x):
                    return None
            elif c is None:
                c = f.div(x, y)
        if c is None:
            return None if not self.is_zero() else f.zero
        ok = all(f.eq(x, f.mul(c, y)) for x, y in zip(self.coeffs, other.coeffs))
        return c if ok else None

    def projective_roots(self, rng: random.Random | None = None) -> list:
        """Roots on the projective line as ((s, t), multiplicity).

        Points are normalized to s = 1, except (0, 1) for the root at t-axis
        infinity, whose multiplicity is the number of trailing s factors.
        """
        f = self.field
        if self.is_zero():
            raise ValueError("zero form")
        # f(1, t): coefficient of t^j is coeffs[d - j]
        uni = [self.coeffs[self.degree - j] for j in range(self.degree + 1)]
        out = []
        s_order = next(i for i, c in enumerate(self.coeffs) if not f.is_zero(c))
        if s_order > 0:
            out.append(((f.zero, f.one), s_order))
        for r, m in roots_with_multiplicity(f, uni, rng):
            out.append(((f.one, r), m))
        return out


def sylvester_resultant(a: BinaryForm, b: BinaryForm):
    """Resultant of two binary forms; zero iff they share a projective root."""
    f = a.field
    m, n = a.degree, b.degree
    # rows built from t-polynomial coefficients, leading zeros kept so the
    # graded resultant sees common roots at infinity too
    ua = [a.coeffs[m - j] for j in range(m + 1)][::-1]
    ub = [b.coeffs[n - j] for j in range(n + 1)][::-1]
    size = m + n
    rows = []
    for i in range(n):
        rows.append([f.zero] * i + ua + [f.zero] * (size - m - 1 - i))
    for i in range(m):
        rows.append([f.zero] * i + ub + [f.zero] * (size - n - 1 - i))
    return Matrix.build(f, rows).det()


# ---------------------------------------------------------------------------
# multivariate forms
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def monomials(nvars: int, degree: int) -> tuple:
    """All exponent tuples of total degree `degree`, lex-descending."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for e in range(remaining, -1, -1):
            rec(prefix + (e,), remaining - e, slots - 1)

    rec((), degree, nvars)
    return tuple(out)


@dataclass(frozen=True)
class MultiForm:
    """Sparse homogeneous form: exponent tuple -> nonzero coefficient."""

    field: Field
    nvars: int
    degree: int
    coeffs: tuple  # sorted tuple of (exponents, coefficient)

    @staticmethod
    def build(field: Field, nvars: int, degree: int, entries: dict) -> "MultiForm":
        clean = {}
        for exps, c in entries.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or sum(exps) != degree or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent tuple {exps} for degree {degree}")
            c = field.coerce(c)
            if not field.is_zero(c):
                clean[exps] = field.add(clean[exps], c) if exps in clean else c
        clean = {e: c for e, c in clean.items() if not field.is_zero(c)}
        return MultiForm(field, nvars, degree, tuple(sorted(clean.items(), reverse=True)))

    def coeff_dict(self) -> dict:
        return dict(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, point):
        f = self.field
        if len(point) != self.nvars:
            raise ValueError("point has wrong length")
        acc = f.zero
        for exps, c in self.coeffs:
            term = c
            for x, e in zip(point, exps):
                if e:
                    term = f.mul(term, f.pow(x, e))
            acc = f.add(acc, term)
        return acc

    def add(self, other: "MultiForm") -> "MultiForm":
        d = dict(self.coeffs)
        f = self.field
        for exps, c in other.coeffs:
            d[exps] = f.add(d.get(exps, f.zero), c)
        return MultiForm.build(f, self.nvars, self.degree, d)

    def scale(self, c) -> "MultiForm":
        f = self.field
        c = f.coerce(c)
        return MultiForm.build(f, self.nvars, self.degree,
                               {e: f.mul(c, v) for e, v in self.coeffs})

    def partial(self, i: int) -> "MultiForm":
        f = self.field
        d = {}
        for exps, c in self.coeffs:
            e = exps[i]
            if e == 0:
                continue
            ne = exps[:i] + (e - 1,) + exps[i + 1:]
            d[ne] = f.add(d.get(ne, f.zero), f.mul(f.coerce(e), c))
        return MultiForm.build(f, self.nvars, self.degree - 1, d)

    def gradient(self, point) -> tuple:
        return tuple(self.partial(i)(point) for i in range(self.nvars))

    def proportional_to(self, other: "MultiForm"):
        f = self.field
        if (self.nvars, self.degree) != (other.nvars, other.degree):
            return None
        mine, theirs = dict(self.coeffs), dict(other.coeffs)
        if set(mine) != set(theirs):
            return None
        if not mine:
            return f.one
        c = None
        for e, v in theirs.items():
            ratio = f.div(mine[e], v)
            if c is None:
                c = ratio
            elif not f.eq(c, ratio):
                return None
        return c

    def normalized(self) -> "MultiForm":
        """Leading coefficient (lex-descending order) scaled to one."""
        if not self.coeffs:
            return self
        return self.scale(self.field.inv(self.coeffs[0][1]))

    def restrict_to_line(self, base, direction) -> list:
        """Coefficients of t -> self(base + t * direction), low degree first."""
        f = self.field
        d = self.degree
        if f.order is not None and f.order <= d:
            raise ValueError("field too small for line restriction")
        nodes = [f.coerce(i) for i in range(d + 1)]
        vals = []
        for t in nodes:
            pt = tuple(f.add(b, f.mul(t, w)) for b, w in zip(base, direction))
            vals.append(self(pt))
        vand = Matrix.build(f, [[f.pow(t, j) for j in range(d + 1)] for t in nodes])
        sol = vand.solve(tuple(vals))
        return poly_trim(f, list(sol))

    def restrict_to_pencil(self, u, w) -> BinaryForm:
        """self(s*u + t*w) as a binary form in (s, t)."""
        f = self.field
        d = self.degree
        # g(t) = self(u + t w) has t^j coefficient equal to the s^(d-j) t^j one
        g = self.restrict_to_line(u, w)
        g = g + [f.zero] * (d + 1 - len(g))
        return BinaryForm(f, tuple(g[d - i] for i in range(d + 1)))

    def to_json(self):
        f = self.field
        return {
            "nvars": self.nvars,
            "degree": self.degree,
            "coeffs": [[list(e), f.scalar_to_json(c)] for e, c in self.coeffs],
        }

    @staticmethod
    def from_json(field: Field, obj) -> "MultiForm":
        entries = {tuple(e): field.scalar_from_json(c) for e, c in obj["coeffs"]}
        return MultiForm.build(field, int(obj["nvars"]), int(obj["degree"]), entries)


def multiplicity_at(form: MultiForm, point, rng: random.Random, trials: int = 20) -> int:
    """Vanishing order of the form at the point: minimum over random lines.

    Returns 0 when the point is off the hypersurface and degree + 1 when every
    sampled line vanishes identically (point on a fully contained line bundle,
    in practice: never for our forms unless the form is zero along all lines).
    """
    f = form.field
    best = form.degree + 1
    for _ in range(trials):
        direction = tuple(f.random_scalar(rng) for _ in range(form.nvars))
        g = form.restrict_to_line(point, direction)
        order = next((i for i, c in enumerate(g) if not f.is_zero(c)), None)
        if order is None:
            continue
        best = min(best, order)
        if best == 0:
            break
    return best


def _value_rows_numpy(field: Field, nvars: int, degree: int, pts) -> "np.ndarray":
    """Monomial-evaluation rows for many points at once, prime fields only."""
    import numpy as np
    p = field.p
    arr = np.array([[int(x) for x in pt] for pt in pts], dtype=np.int64) % p
    n = arr.shape[0]
    pows = np.ones((n, nvars, degree + 1), dtype=np.int64)
    for e in range(1, degree + 1):
        pows[:, :, e] = pows[:, :, e - 1] * arr % p
    mons = monomials(nvars, degree)
    cols = np.empty((n, len(mons)), dtype=np.int64)
    for j, beta in enumerate(mons):
        acc = np.ones(n, dtype=np.int64)
        for i, e in enumerate(beta):
            if e:
                acc = acc * pows[:, i, e] % p
        cols[:, j] = acc
    return cols


def _jet_row(f: Field, nvars: int, degree: int, point, alpha) -> list:
    """Row of d^alpha (monomial) evaluated at the point, over all monomials."""
    row = []
    for beta in monomials(nvars, degree):
        val = f.one
        dead = False
        for b, a, x in zip(beta, alpha, point):
            if b < a:
                dead = True
                break
            fall = 1
            for k in range(a):
                fall *= b - k
            val = f.mul(val, f.mul(f.coerce(fall), f.pow(x, b - a)))
        row.append(f.zero if dead else val)
    return row


def fit_form(field: Field, nvars: int, degree: int, points,
             require_large_field: bool = True) -> MultiForm:
    """The unique (up to scale) form vanishing to the given orders at the points.

    `points` is a sequence of (point, multiplicity>=1) pairs. A point of
    multiplicity m contributes one linear condition per partial derivative of
    order < m. Raises FitError when the conditions are too few to pin down a
    single form or when no nonzero form satisfies them.
    """
    if require_large_field and field.order is not None and field.order <= 10**6:
        raise FitError("field too small for a reliable fit; pass "
                       "require_large_field=False to override")
    mons = monomials(nvars, degree)
    points = list(points)
    if any(m < 1 for _, m in points):
        raise ValueError("multiplicity must be >= 1")
    if field.numpy_ready and all(m == 1 for _, m in points) and points:
        arr = _value_rows_numpy(field, nvars, degree, [pt for pt, _ in points])
        if arr.shape[0] < len(mons):
            raise FitError(f"underdetermined: {arr.shape[0]} conditions for {len(mons)} coefficients")
        mat = Matrix.from_numpy(field, arr)
    else:
        rows = []
        for point, mult in points:
            if mult < 1:
                raise ValueError("multiplicity must be >= 1")
            for total in range(mult):
                for alpha in monomials(nvars, total):
                    rows.append(_jet_row(field, nvars, degree, point, alpha))
        if len(rows) < len(mons):
            raise FitError(f"underdetermined: {len(rows)} conditions for {len(mons)} coefficients")
        mat = Matrix.build(field, rows)
    ker = mat.nullspace()
    if ker.nrows == 0:
        raise FitError("no nonzero form satisfies the conditions")
    if ker.nrows > 1:
        raise FitError(f"fit not unique: solution space has dimension {ker.nrows}")
    entries = {e: c for e, c in zip(mons, ker.rows[0])}
    return MultiForm.build(field, nvars, degree, entries).normalized()


def interpolate_from_values(field: Field, nvars: int, degree: int, samples) -> MultiForm:
    """The unique form taking prescribed values: samples = [(point, value)].

    Raises FitError when the sample set leaves the form underdetermined or no
    form matches the values.
    """
    mons = monomials(nvars, degree)
    samples = list(samples)
    vals = [field.coerce(v) for _, v in samples]
    if field.numpy_ready and samples:
        mat = Matrix.from_numpy(field, _value_rows_numpy(
            field, nvars, degree, [pt for pt, _ in samples]))
    else:
        rows = []
        for point, _ in samples:
            row = []
            for beta in mons:
                t = field.one
                for x, e in zip(point, beta):
                    if e:
                        t = field.mul(t, field.pow(x, e))
                row.append(t)
            rows.append(row)
        mat = Matrix.build(field, rows)
    if mat.rank() < len(mons):
        raise FitError(f"underdetermined: rank {mat.rank()} < {len(mons)} coefficients")
    sol = mat.solve(tuple(vals))
    if sol is None:
        raise FitError("no form matches the sampled values")
    entries = {e: c for e, c in zip(mons, sol)}
    return MultiForm.build(field, nvars, degree, entries)
