"""Exact scalar arithmetic over the rationals, prime fields, and their quadratic extensions.

Scalars stay plain python values (Fraction, int residue, or an (a, b) pair for
the quadratic extension); Field objects own the arithmetic. This keeps matrix
and polynomial code generic while letting the prime-field case drop down to
vectorized numpy kernels elsewhere.
"""

from __future__ import annotations

import math
from fractions import Fraction

# Fixed prime used for all big-field interpolation work: Mersenne, fits in a
# signed 64-bit word with room for one product, and p % 4 == 3 so square roots
# are a single modular power.
INTERPOLATION_PRIME = 2**31 - 1


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _sqrt_mod_p(a: int, p: int):
    """Square root of a modulo an odd prime p, or None if a is a non-residue."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks for p = 1 mod 4
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


class Field:
    """Abstract scalar domain. Concrete subclasses below."""

    char: int
    order: int | None  # None means infinite
    name: str
    # True when scalars are plain int residues usable by the numpy kernels
    numpy_ready: bool = False

    @property
    def zero(self):
        raise NotImplementedError

    @property
    def one(self):
        raise NotImplementedError

    def coerce(self, x):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        raise NotImplementedError

    def eq(self, a, b) -> bool:
        return self.is_zero(self.sub(a, b))

    def pow(self, a, e: int):
        if e < 0:
            return self.pow(self.inv(a), -e)
        out = self.one
        base = a
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def sqrt(self, a):
        """A square root of a, or None when a is not a square in this field."""
        raise NotImplementedError

    def is_square(self, a) -> bool:
        return self.sqrt(a) is not None

    def random_scalar(self, rng, nonzero: bool = False):
        raise NotImplementedError

    def scalar_to_json(self, a):
        raise NotImplementedError

    def scalar_from_json(self, obj):
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return self.name


class Rationals(Field):
    char = 0
    order = None
    name = "QQ"

    @property
    def zero(self):
        return Fraction(0)

    @property
    def one(self):
        return Fraction(1)

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return Fraction(x)
        raise TypeError(f"cannot coerce {x!r} into QQ")

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in QQ")
        return 1 / a

    def is_zero(self, a):
        return a == 0

    def sqrt(self, a):
        if a < 0:
            return None
        n, d = a.numerator, a.denominator
        rn, rd = math.isqrt(n), math.isqrt(d)
        if rn * rn == n and rd * rd == d:
            return Fraction(rn, rd)
        return None

    def random_scalar(self, rng, nonzero=False):
        # small numerators keep downstream determinants tame
        while True:
            v = Fraction(rng.randrange(-20, 21))
            if not nonzero or v != 0:
                return v

    def scalar_to_json(self, a):
        return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"

    def scalar_from_json(self, obj):
        return Fraction(obj) if isinstance(obj, str) else Fraction(int(obj))

    def to_json(self):
        return {"kind": "rationals"}

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("QQ")


class PrimeField(Field):
    """F_p with int residues in [0, p)."""

    numpy_ready = True

    def __init__(self, p: int):
        if p <= 2 or not _is_probable_prime(p):
            raise ValueError(f"modulus must be an odd prime, got {p}")
        self.p = p
        self.char = p
        self.order = p
        self.name = f"GF({p})"

    @property
    def zero(self):
        return 0

    @property
    def one(self):
        return 1

    def coerce(self, x):
        if isinstance(x, int):
            return x % self.p
        if isinstance(x, Fraction):
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        raise TypeError(f"cannot coerce {x!r} into {self.name}")

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return a * b % self.p

    def neg(self, a):
        return -a % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError(f"inverse of 0 in {self.name}")
        return pow(a, -1, self.p)

    def is_zero(self, a):
        return a % self.p == 0

    def eq(self, a, b):
        return (a - b) % self.p == 0

    def sqrt(self, a):
        return _sqrt_mod_p(a, self.p)

    def legendre(self, a) -> int:
        a %= self.p
        if a == 0:
            return 0
        return 1 if pow(a, (self.p - 1) // 2, self.p) == 1 else -1

    def random_scalar(self, rng, nonzero=False):
        lo = 1 if nonzero else 0
        return rng.randrange(lo, self.p)

    def scalar_to_json(self, a):
        return int(a % self.p)

    def scalar_from_json(self, obj):
        return int(obj) % self.p

    def to_json(self):
        return {"kind": "prime", "p": self.p}

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))


class PrimeSquareField(Field):
    """F_{p^2} = F_p[x] / (x^2 - nu) for the least non-square nu; scalars are (a, b) pairs."""

    def __init__(self, p: int):
        base = PrimeField(p)
        self.p = p
        self.base = base
        nu = 2
        while base.legendre(nu) != -1:
            nu += 1
        self.nu = nu
        self.char = p
        self.order = p * p
        self.name = f"GF({p}^2)"

    @property
    def zero(self):
        return (0, 0)

    @property
    def one(self):
        return (1, 0)

    def coerce(self, x):
        if isinstance(x, tuple) and len(x) == 2:
            return (x[0] % self.p, x[1] % self.p)
        if isinstance(x, (int, Fraction)):
            return (self.base.coerce(x), 0)
        if isinstance(x, list) and len(x) == 2:
            return (int(x[0]) % self.p, int(x[1]) % self.p)
        raise TypeError(f"cannot coerce {x!r} into {self.name}")

    def add(self, a, b):
        return ((a[0] + b[0]) % self.p, (a[1] + b[1]) % self.p)

    def sub(self, a, b):
        return ((a[0] - b[0]) % self.p, (a[1] - b[1]) % self.p)

    def mul(self, a, b):
        p, nu = self.p, self.nu
        return ((a[0] * b[0] + nu * a[1] * b[1]) % p, (a[0] * b[1] + a[1] * b[0]) % p)

    def neg(self, a):
        return (-a[0] % self.p, -a[1] % self.p)

    def norm(self, a) -> int:
        return (a[0] * a[0] - self.nu * a[1] * a[1]) % self.p

    def inv(self, a):
        n = self.norm(a)
        if n == 0:
            raise ZeroDivisionError(f"inverse of 0 in {self.name}")
        ninv = pow(n, -1, self.p)
        return (a[0] * ninv % self.p, -a[1] * ninv % self.p)

    def is_zero(self, a):
        return a[0] % self.p == 0 and a[1] % self.p == 0

    def sqrt(self, a):
        p, nu = self.p, self.nu
        a0, a1 = a[0] % p, a[1] % p
        if a0 == 0 and a1 == 0:
            return (0, 0)
        if a1 == 0:
            r = _sqrt_mod_p(a0, p)
            if r is not None:
                return (r, 0)
            # a0 is a non-residue: sqrt lives on the x-axis of the extension
            r = _sqrt_mod_p(a0 * pow(nu, -1, p) % p, p)
            return (0, r)
        # (c + dx)^2 = a: c^2 is a root of y^2 - a0 y + nu a1^2 / 4
        n = self.norm(a)
        s = _sqrt_mod_p(n, p)
        if s is None:
            return None  # element is a non-square in F_{p^2}
        half = pow(2, -1, p)
        for c2 in ((a0 + s) * half % p, (a0 - s) * half % p):
            c = _sqrt_mod_p(c2, p)
            if c is not None and c != 0:
                d = a1 * pow(2 * c, -1, p) % p
                return (c, d)
        return None

    def random_scalar(self, rng, nonzero=False):
        while True:
            v = (rng.randrange(self.p), rng.randrange(self.p))
            if not nonzero or v != (0, 0):
                return v

    def scalar_to_json(self, a):
        return [int(a[0] % self.p), int(a[1] % self.p)]

    def scalar_from_json(self, obj):
        return (int(obj[0]) % self.p, int(obj[1]) % self.p)

    def to_json(self):
        return {"kind": "prime-square", "p": self.p}

    def __eq__(self, other):
        return isinstance(other, PrimeSquareField) and other.p == self.p

    def __hash__(self):
        return hash(("GF2", self.p))


QQ = Rationals()

_gf_cache: dict = {}


def GF(p: int) -> PrimeField:
    f = _gf_cache.get(("p", p))
    if f is None:
        f = _gf_cache[("p", p)] = PrimeField(p)
    return f


def GF2(p: int) -> PrimeSquareField:
    f = _gf_cache.get(("p2", p))
    if f is None:
        f = _gf_cache[("p2", p)] = PrimeSquareField(p)
    return f


def field_from_json(obj: dict) -> Field:
    kind = obj.get("kind")
    if kind == "rationals":
        return QQ
    if kind == "prime":
        return GF(int(obj["p"]))
    if kind == "prime-square":
        return GF2(int(obj["p"]))
    raise ValueError(f"unknown field spec {obj!r}")
