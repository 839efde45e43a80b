"""The Lagrangian subspace attached to a codimension-zero instance.

The six-dimensional system of quadrics through the variety is coordinatized as
(z, v1..v5) elsewhere; internally this module orders a basis of that system as
(P_0, .., P_4, Q), wedges it into the 20-dimensional third exterior power, and
builds the graph subspace of the quadric's Gram map. The degeneracy count of a
hyperplane is the geometric membership test for the dual sextic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .fields import Field
from .instances import FanoInstance
from .linalg import Matrix
from .wedge import PAIRS

THREE_SUBSETS: tuple = tuple(itertools.combinations(range(6), 3))
SUBSET_INDEX: dict = {s: i for i, s in enumerate(THREE_SUBSETS)}

# complement of a pair inside {0..4}
_PAIR_COMP: dict = {p: tuple(sorted(set(range(5)) - set(p))) for p in PAIRS}


def _parity(seq) -> int:
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return -1 if inv % 2 else 1


def wedge_gram(field: Field) -> Matrix:
    """20x20 pairing J[S, T] = sign of the shuffle (S, T) when disjoint.

    Alternating because swapping two 3-blocks costs 9 transpositions.
    """
    rows = []
    for s in THREE_SUBSETS:
        row = []
        for t in THREE_SUBSETS:
            if set(s) & set(t):
                row.append(field.zero)
            else:
                sig = _parity(s + t)
                row.append(field.one if sig == 1 else field.neg(field.one))
        rows.append(tuple(row))
    return Matrix(field, tuple(rows))


def wedge3_vector(field: Field, r1, r2, r3) -> tuple:
    """Coordinates of r1 ^ r2 ^ r3 for three 6-vectors."""
    out = []
    for s in THREE_SUBSETS:
        m = Matrix.build(field, [[r1[c] for c in s], [r2[c] for c in s], [r3[c] for c in s]])
        out.append(m.det())
    return tuple(out)


@dataclass(frozen=True)
class LagrangianSubspace:
    field: Field
    A: Matrix   # 10 x 20, rows are the graph generators
    J: Matrix   # 20 x 20 wedge pairing

    def is_lagrangian(self) -> bool:
        return self.A.rank() == 10 and (self.A @ self.J @ self.A.T).is_zero()


def lagrangian_from_quadric(inst: FanoInstance) -> LagrangianSubspace:
    """Graph of the quadric's Gram map inside the wedge cube of the system.

    Generator for the basis bivector with index t: coefficient 1 on the subset
    pairing that bivector with the quadric direction (index 5), and the
    contraction of the Gram column against the volume form on the pure
    Pfaffian subsets. The orientation of that contraction is fixed so the
    degeneracy locus of the subspace coincides with the dual sextic; the
    opposite global sign is equally Lagrangian but matches the reflected
    sextic instead.
    """
    if inst.k != 0:
        raise ValueError("the Lagrangian construction needs the codimension-0 case")
    f = inst.field
    rows = []
    for t, (a, b) in enumerate(PAIRS):
        vec = [f.zero] * 20
        vec[SUBSET_INDEX[(a, b, 5)]] = f.one
        for s_idx, de in enumerate(PAIRS):
            comp = _PAIR_COMP[de]
            eps = _parity(comp + de)
            contrib = inst.Q[s_idx, t]
            if eps == 1:
                contrib = f.neg(contrib)
            vec[SUBSET_INDEX[comp]] = f.add(vec[SUBSET_INDEX[comp]], contrib)
        rows.append(tuple(vec))
    return LagrangianSubspace(f, Matrix(f, tuple(rows)), wedge_gram(f))


def epw_membership(lag: LagrangianSubspace, h) -> int:
    """dim of the intersection of the Lagrangian with the wedge cube of ker h.

    h comes in the (z, v) dual coordinates used everywhere else; 0 means the
    hyperplane is off the degeneracy sextic, 2 or more flags the deeper
    stratum.
    """
    f = lag.field
    if all(f.is_zero(c) for c in h):
        raise ValueError("zero hyperplane")
    # reorder (z, v1..v5) -> internal basis (P_0..P_4, Q)
    h_internal = tuple(h[1:]) + (h[0],)
    kernel = Matrix.build(f, [h_internal]).nullspace()   # 5 x 6
    triples = [wedge3_vector(f, kernel.rows[i], kernel.rows[j], kernel.rows[k])
               for i, j, k in itertools.combinations(range(5), 3)]
    stacked = Matrix.vstack([Matrix.build(f, triples), lag.A])
    return 20 - stacked.rank()
