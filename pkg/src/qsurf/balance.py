"""Balance conditions on fractional exponent vectors.

An exponent vector over a triangulation's node quiver is *triangulation
balanced* when, in every triangle and with each side read in that triangle's
clockwise traversal order, three families of sums are integers:

* BE1 — the three first-node exponents, and the three second-node exponents;
* BE2 — the two exponents on each side;
* BE3 — for each corner, minus the face exponent plus the current side's
  second-node exponent plus the next side's first-node exponent.

A vector is *node balanced* at a mutable node when its commutation exponent
there is an integer; this is what the automorphism part of the mutation map
needs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .qtorus import ExponentVector, commutation_exponent
from .quiver import NodeId, Seed
from .surface import QuiverLabeling, Triangulation, edge_node, face_node

__all__ = [
    "BalanceReport",
    "is_delta_balanced",
    "is_u_balanced",
    "transform_exponents",
    "random_balanced_vector",
]


@dataclass(frozen=True)
class BalanceReport:
    """Outcome of the triangle-wise balance checks."""

    failures: tuple[tuple[str, str, str], ...]  # (triangle, check, value)

    @property
    def balanced(self) -> bool:
        return not self.failures


def _third_str(tripled: int) -> str:
    from .coeff import format_third

    return format_third(tripled)


def is_delta_balanced(
    T: Triangulation, L: QuiverLabeling, a: ExponentVector
) -> BalanceReport:
    """Check BE1–BE3 in every triangle (exponents in Z-units)."""
    del L  # node ids are structural; the labeling adds nothing here
    failures: list[tuple[str, str, str]] = []
    for tri in T.triangles:
        pairs = [tri.node_pair(slot) for slot in range(3)]
        face = a.z(face_node(tri.id))
        firsts = sum(a.z(p[0]) for p in pairs)
        seconds = sum(a.z(p[1]) for p in pairs)
        for value in (firsts, seconds):
            if value % 3:
                failures.append((tri.id, "BE1", _third_str(value)))
        for first, second in pairs:
            value = a.z(first) + a.z(second)
            if value % 3:
                failures.append((tri.id, "BE2", _third_str(value)))
        for slot in range(3):
            value = -face + a.z(pairs[slot][1]) + a.z(pairs[(slot + 1) % 3][0])
            if value % 3:
                failures.append((tri.id, "BE3", _third_str(value)))
    return BalanceReport(tuple(failures))


def is_u_balanced(seed: Seed, u: NodeId, a: ExponentVector) -> bool:
    """True iff the commutation exponent at u is a whole integer."""
    return commutation_exponent(seed, u, a).is_integer


def transform_exponents(seed: Seed, u: NodeId, a: ExponentVector) -> ExponentVector:
    """Exponent-level monomial part of the mutation at u (pre-mutation seed).

    The exponent at u becomes minus itself plus the positive-part-weighted
    sum of the others; everything else is unchanged.
    """
    if u in seed.frozen:
        raise ValueError(f"cannot transform at frozen node {u}")
    new_u = -a.z(u)
    for w, aw in a.items():
        if w == u:
            continue
        e2 = seed.eps2(w, u)
        if e2 > 0:
            new_u += (e2 // 2) * aw
    return ExponentVector(dict(a.items()) | {u: new_u})


# -- sampler ----------------------------------------------------------------


def _balance_rows_mod3(T: Triangulation, order: dict[str, int]) -> list[list[int]]:
    """The BE congruences as F_3 rows over the fractional parts."""
    rows: list[list[int]] = []
    n = len(order)

    def row(entries: dict[str, int]) -> list[int]:
        r = [0] * n
        for node, c in entries.items():
            r[order[node]] = (r[order[node]] + c) % 3
        return r

    for tri in T.triangles:
        pairs = [tri.node_pair(slot) for slot in range(3)]
        face = face_node(tri.id)
        rows.append(row({p[0]: 1 for p in pairs}))
        rows.append(row({p[1]: 1 for p in pairs}))
        for first, second in pairs:
            rows.append(row({first: 1, second: 1}))
        for slot in range(3):
            entries = {face: 2}  # -1 mod 3
            for node in (pairs[slot][1], pairs[(slot + 1) % 3][0]):
                entries[node] = (entries.get(node, 0) + 1) % 3
            rows.append(row(entries))
    return rows


def _kernel_basis_mod3(rows: list[list[int]], n: int) -> list[list[int]]:
    """Basis of the null space of the row system over F_3."""
    matrix = [r[:] for r in rows if any(r)]
    pivots: list[int] = []
    r = 0
    for col in range(n):
        pivot = next((i for i in range(r, len(matrix)) if matrix[i][col]), None)
        if pivot is None:
            continue
        matrix[r], matrix[pivot] = matrix[pivot], matrix[r]
        inv = 1 if matrix[r][col] == 1 else 2  # inverse in F_3
        matrix[r] = [(x * inv) % 3 for x in matrix[r]]
        for i in range(len(matrix)):
            if i != r and matrix[i][col]:
                c = matrix[i][col]
                matrix[i] = [(a - c * b) % 3 for a, b in zip(matrix[i], matrix[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        vec = [0] * n
        vec[f] = 1
        for i, col in enumerate(pivots):
            vec[col] = (-matrix[i][f]) % 3
        basis.append(vec)
    return basis


def random_balanced_vector(
    T: Triangulation,
    rng: random.Random,
    integer_span: int = 3,
) -> ExponentVector:
    """A random triangulation-balanced exponent vector (Z-units).

    Samples the fractional parts from the null space of the BE congruences
    over F_3 and adds an independent random integer vector.
    """
    nodes = list(T.node_order())
    order = {v: i for i, v in enumerate(nodes)}
    basis = _kernel_basis_mod3(_balance_rows_mod3(T, order), len(nodes))
    frac = [0] * len(nodes)
    for vec in basis:
        c = rng.randrange(3)
        if c:
            frac = [(f + c * x) % 3 for f, x in zip(frac, vec)]
    return ExponentVector(
        {
            v: 3 * rng.randint(-integer_span, integer_span) + frac[i]
            for i, v in enumerate(nodes)
        }
    )
