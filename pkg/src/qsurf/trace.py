"""Trace values of simple oriented webs over triangulated surfaces.

A web is carried by a path of triangle traversals: it enters a triangle
through one side, turns left or right around the enclosed corner, and leaves
through another side.  Each arc crossing contributes a diagonal 3x3 matrix in
the two arc variables, and each turn a triangular matrix in the face
variable.  The value of an open web at a pair of endpoint states is the
corresponding entry of the ordered product of these matrices, computed with
commuting variables and then read as a sum of Weyl-ordered terms.  The value
of a closed uniform-turn loop around a puncture is the sum over the three
states of the diagonal products, which for triangular factors is the trace
of the full monodromy product.

A one-triangle value can also be computed entirely inside the noncommutative
algebra and then projected term-by-term onto Weyl representatives; both
pipelines must produce the same value, and the second is kept as an
independent cross-check of the first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping

from .balance import BalanceReport, is_delta_balanced
from .coeff import OmegaPoly
from .qtorus import (
    ExponentVector,
    LaurentPoly,
    WeylMonomial,
    classicalize,
    highest_term,
    poly_mul,
    weyl_quantize,
)
from .surface import (
    QuiverLabeling,
    Triangle,
    Triangulation,
    build_3triangulation_quiver,
)

__all__ = [
    "WebStep",
    "WebPath",
    "StatePair",
    "TraceMatrix",
    "edge_side_matrix",
    "turn_matrix",
    "path_matrices",
    "classical_product",
    "classical_determinant",
    "edge_trace",
    "single_triangle_trace",
    "loop_trace",
    "peripheral_highest_term",
    "verify_trace_balanced",
    "parse_web",
]

TURNS = ("left", "right")


@dataclass(frozen=True)
class WebStep:
    """One triangle traversal: enter at a side, turn, leave at another.

    A left turn exits at the side after the entry side in the triangle's
    clockwise side order; a right turn at the side before it.
    """

    triangle: str
    entry: str
    exit: str
    turn: str

    def __post_init__(self):
        if self.turn not in TURNS:
            raise ValueError(f"turn must be 'left' or 'right', got {self.turn!r}")


@dataclass(frozen=True)
class WebPath:
    """An ordered run of triangle traversals carrying a simple web.

    Open paths start and end on boundary arcs; closed ones are cyclic, the
    last exit glued to the first entry.
    """

    steps: tuple[WebStep, ...]
    closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValueError("a web path needs at least one step")


@dataclass(frozen=True)
class StatePair:
    """States in {1, 2, 3} at the initial and terminal endpoints."""

    eps1: int
    eps2: int

    def __post_init__(self):
        for eps in (self.eps1, self.eps2):
            if eps not in (1, 2, 3):
                raise ValueError(f"states take values 1, 2, 3; got {eps}")


class TraceMatrix:
    """A 3x3 matrix of Laurent polynomials in the node variables."""

    __slots__ = ("_rows",)

    def __init__(self, rows: Iterable[Iterable[LaurentPoly]]):
        rows = tuple(tuple(row) for row in rows)
        if len(rows) != 3 or any(len(row) != 3 for row in rows):
            raise ValueError("a trace matrix is 3x3")
        self._rows = rows

    @property
    def rows(self) -> tuple[tuple[LaurentPoly, ...], ...]:
        return self._rows

    def entry(self, i: int, j: int) -> LaurentPoly:
        """The (i, j) entry; indices are states, in {1, 2, 3}."""
        if i not in (1, 2, 3) or j not in (1, 2, 3):
            raise ValueError(f"matrix indices take values 1, 2, 3; got ({i}, {j})")
        return self._rows[i - 1][j - 1]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TraceMatrix) and self._rows == other._rows

    def __repr__(self) -> str:
        return f"TraceMatrix({self._rows!r})"


# -- matrix building blocks -------------------------------------------------


def _zmono(entries: Mapping[str, int]) -> LaurentPoly:
    return LaurentPoly.monomial(ExponentVector(entries))


def _diag(e1: LaurentPoly, e2: LaurentPoly, e3: LaurentPoly) -> TraceMatrix:
    zero = LaurentPoly.zero()
    return TraceMatrix(((e1, zero, zero), (zero, e2, zero), (zero, zero, e3)))


def edge_side_matrix(
    L: QuiverLabeling,
    arc: str,
    direction: str,
    triangle: Triangle | None = None,
) -> TraceMatrix:
    """Diagonal factor for crossing an arc into ('in') or out of ('out') a
    triangle.

    The arc's two nodes are taken in the traversal order of the triangle the
    crossing is viewed from; with no explicit triangle the arc's forward
    order is used, which is the only one for a boundary arc.  Crossing an
    internal arc needs just one factor: leaving one triangle is the same
    matrix as entering the triangle on the other side.
    """
    if direction not in ("in", "out"):
        raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")
    if triangle is None:
        first, second = L.edge(arc, 1), L.edge(arc, 2)
    else:
        if arc not in triangle.sides:
            raise ValueError(f"arc {arc} is not a side of triangle {triangle.id}")
        first, second = triangle.node_pair(triangle.sides.index(arc))
    lead, co = (first, second) if direction == "in" else (second, first)
    return _diag(
        _zmono({lead: 2, co: 1}),
        _zmono({lead: -1, co: 1}),
        _zmono({lead: -1, co: -2}),
    )


def turn_matrix(L: QuiverLabeling, triangle: Triangle | str, turn: str) -> TraceMatrix:
    """Face-variable factor for turning left or right inside a triangle."""
    tid = triangle.id if isinstance(triangle, Triangle) else triangle
    face = L.face(tid)

    def z(k: int) -> LaurentPoly:
        return _zmono({face: k})

    zero = LaurentPoly.zero()
    if turn == "left":
        return TraceMatrix(
            (
                (z(2), z(2) + z(-1), z(-1)),
                (zero, z(-1), z(-1)),
                (zero, zero, z(-1)),
            )
        )
    if turn == "right":
        return TraceMatrix(
            (
                (z(1), zero, zero),
                (z(1), z(1), zero),
                (z(1), z(1) + z(-2), z(-2)),
            )
        )
    raise ValueError(f"turn must be 'left' or 'right', got {turn!r}")


# -- matrix arithmetic ------------------------------------------------------


def _classical_poly_mul(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    """Product with commuting variables: exponents add, no phases."""
    out: list[tuple[ExponentVector, OmegaPoly]] = []
    for ea, ca in p.terms.items():
        for eb, cb in q.terms.items():
            out.append((ea + eb, ca * cb))
    return LaurentPoly(out)


def _mat_mul(a: TraceMatrix, b: TraceMatrix, mul) -> TraceMatrix:
    rows = []
    for i in range(3):
        row = []
        for j in range(3):
            acc = LaurentPoly.zero()
            for k in range(3):
                acc = acc + mul(a.rows[i][k], b.rows[k][j])
            row.append(acc)
        rows.append(tuple(row))
    return TraceMatrix(tuple(rows))


def classical_product(mats: Iterable[TraceMatrix]) -> TraceMatrix:
    """Ordered product with commuting entries."""
    mats = list(mats)
    if not mats:
        raise ValueError("empty matrix product")
    return reduce(lambda a, b: _mat_mul(a, b, _classical_poly_mul), mats)


def classical_determinant(m: TraceMatrix) -> LaurentPoly:
    """Determinant with commuting entries."""
    total = LaurentPoly.zero()
    for perm, sign in (
        ((0, 1, 2), 1),
        ((1, 2, 0), 1),
        ((2, 0, 1), 1),
        ((0, 2, 1), -1),
        ((2, 1, 0), -1),
        ((1, 0, 2), -1),
    ):
        prod = LaurentPoly.one()
        for i, j in enumerate(perm):
            prod = _classical_poly_mul(prod, m.rows[i][j])
        total = total + (prod if sign == 1 else -prod)
    return total


# -- path validation --------------------------------------------------------


def _resolved_steps(
    T: Triangulation, path: WebPath
) -> list[tuple[int, Triangle, int, int]]:
    """Check a path against the triangulation; resolve slots per step."""
    resolved = []
    for step in path.steps:
        tri = T.triangle(step.triangle)
        ti = T.triangles.index(tri)
        for arc in (step.entry, step.exit):
            if arc not in tri.sides:
                raise ValueError(f"arc {arc} is not a side of triangle {tri.id}")
        s_in = tri.sides.index(step.entry)
        s_out = tri.sides.index(step.exit)
        want = (s_in + 1) % 3 if step.turn == "left" else (s_in - 1) % 3
        if s_out != want:
            raise ValueError(
                f"triangle {tri.id}: a {step.turn} turn entering at {step.entry} "
                f"exits at {tri.sides[want]}, not {step.exit}"
            )
        resolved.append((ti, tri, s_in, s_out))
    n = len(path.steps)
    for i in range(n if path.closed else n - 1):
        j = (i + 1) % n
        arc = path.steps[i].exit
        if path.steps[j].entry != arc:
            raise ValueError(
                f"step into {path.steps[j].triangle} enters at "
                f"{path.steps[j].entry}, but the previous step left through {arc}"
            )
        if arc not in T.internal:
            raise ValueError(f"the path crosses the boundary arc {arc}")
        crossing = {
            (resolved[i][0], resolved[i][3]),
            (resolved[j][0], resolved[j][2]),
        }
        if crossing != set(T.incident(arc)):
            raise ValueError(
                f"consecutive steps do not sit on the two sides of {arc}"
            )
    if not path.closed:
        for arc, end in ((path.steps[0].entry, "start"), (path.steps[-1].exit, "end")):
            if arc not in T.boundary:
                raise ValueError(f"open webs {end} on a boundary arc, not {arc}")
    return resolved


def path_matrices(
    T: Triangulation, L: QuiverLabeling, path: WebPath
) -> tuple[TraceMatrix, ...]:
    """The ordered monodromy factors of an open path.

    One entry factor for the initial boundary arc, then per triangle a turn
    factor and the factor for the arc it leaves through (an internal
    crossing or the final boundary exit).
    """
    if path.closed:
        raise ValueError("closed paths have no endpoint factors; use loop_trace")
    resolved = _resolved_steps(T, path)
    mats = [edge_side_matrix(L, path.steps[0].entry, "in", resolved[0][1])]
    for (_, tri, _, _), step in zip(resolved, path.steps):
        mats.append(turn_matrix(L, tri, step.turn))
        mats.append(edge_side_matrix(L, step.exit, "out", tri))
    return tuple(mats)


# -- values -----------------------------------------------------------------


def edge_trace(
    T: Triangulation, L: QuiverLabeling, path: WebPath, s: StatePair
) -> LaurentPoly:
    """Value of an open web at an endpoint-state pair: the state's entry of
    the classical monodromy product, read as Weyl-ordered terms."""
    product = classical_product(path_matrices(T, L, path))
    return weyl_quantize(product.entry(s.eps1, s.eps2))


def single_triangle_trace(
    T: Triangulation,
    L: QuiverLabeling,
    triangle: Triangle | str,
    turn: str,
    s: StatePair,
    entry: str | None = None,
) -> LaurentPoly:
    """One-triangle value computed inside the noncommutative algebra.

    Multiplies the three factors in the quantum algebra of the triangulation
    and projects each coefficient onto its Weyl representative; must agree
    with edge_trace wherever both apply.  The entry side defaults to the
    triangle's first side.
    """
    tri = triangle if isinstance(triangle, Triangle) else T.triangle(triangle)
    if turn not in TURNS:
        raise ValueError(f"turn must be 'left' or 'right', got {turn!r}")
    if entry is None:
        s_in = 0
    else:
        if entry not in tri.sides:
            raise ValueError(f"arc {entry} is not a side of triangle {tri.id}")
        s_in = tri.sides.index(entry)
    s_out = (s_in + 1) % 3 if turn == "left" else (s_in - 1) % 3
    seed, _ = build_3triangulation_quiver(T)
    mats = (
        edge_side_matrix(L, tri.sides[s_in], "in", tri),
        turn_matrix(L, tri, turn),
        edge_side_matrix(L, tri.sides[s_out], "out", tri),
    )
    product = reduce(
        lambda a, b: _mat_mul(a, b, lambda p, q: poly_mul(seed, p, q)), mats
    )
    return classicalize(product.entry(s.eps1, s.eps2))


def loop_trace(T: Triangulation, L: QuiverLabeling, path: WebPath) -> LaurentPoly:
    """Value of a closed uniform-turn loop around a puncture.

    Every factor of such a loop is triangular of the same kind, so the trace
    of the monodromy product is the sum over the three states of the products
    of the factors' diagonal entries; each summand is a single Weyl-ordered
    monomial.
    """
    if not path.closed:
        raise ValueError("loop values need a closed path")
    turns = {step.turn for step in path.steps}
    if len(turns) != 1:
        raise ValueError("loop values are defined for uniform-turn loops only")
    resolved = _resolved_steps(T, path)
    crossed = [step.entry for step in path.steps]
    if len(set(crossed)) != len(crossed):
        raise ValueError("the loop crosses an arc twice")
    if not any(set(crossed) == set(p.arcs) for p in T.punctures):
        raise ValueError("the loop does not surround a puncture")
    (turn,) = turns
    value = LaurentPoly.zero()
    for eps in (1, 2, 3):
        term = LaurentPoly.one()
        for (_, tri, _, _), step in zip(resolved, path.steps):
            for factor in (
                edge_side_matrix(L, step.entry, "in", tri),
                turn_matrix(L, tri, turn),
            ):
                term = _classical_poly_mul(term, factor.entry(eps, eps))
        value = value + term
    return weyl_quantize(value)


def peripheral_highest_term(p: LaurentPoly) -> WeylMonomial:
    """The componentwise-dominating term of a loop value."""
    ht = highest_term(p)
    if ht is None:
        raise ValueError("no componentwise-dominating term")
    return ht


def verify_trace_balanced(
    T: Triangulation, L: QuiverLabeling, p: LaurentPoly
) -> BalanceReport:
    """Run the triangle-wise balance checks on every term of a value."""
    failures: list[tuple[str, str, str]] = []
    for exps in p.terms:
        failures.extend(is_delta_balanced(T, L, exps).failures)
    return BalanceReport(tuple(dict.fromkeys(failures)))


# -- text format ------------------------------------------------------------

_TURN_LETTERS = {"L": "left", "R": "right"}


def parse_web(T: Triangulation, text: str) -> tuple[str, WebPath]:
    """Parse a web description.

    Open webs: ``web <id> enter <arc> [triangle <id> turn <L|R>]+ exit <arc>``.
    Loops: ``loop <id> [triangle <id> turn <L|R>]+ closed``; the crossed arcs
    are inferred and must be determined uniquely by closing up.
    """
    tokens = text.split()
    pos = 0

    def take(what: str) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError(f"web text ended early: expected {what}")
        tok = tokens[pos]
        pos += 1
        return tok

    def expect(literal: str) -> None:
        tok = take(f"{literal!r}")
        if tok != literal:
            raise ValueError(f"expected {literal!r}, got {tok!r}")

    def take_traversals(terminator: str) -> list[tuple[str, str]]:
        triples: list[tuple[str, str]] = []
        while True:
            tok = take(f"'triangle' or {terminator!r}")
            if tok == terminator:
                return triples
            if tok != "triangle":
                raise ValueError(f"expected 'triangle' or {terminator!r}, got {tok!r}")
            tid = take("a triangle id")
            expect("turn")
            letter = take("L or R")
            if letter not in _TURN_LETTERS:
                raise ValueError(f"turn must be L or R, got {letter!r}")
            triples.append((tid, _TURN_LETTERS[letter]))

    kind = take("'web' or 'loop'")
    if kind not in ("web", "loop"):
        raise ValueError(f"expected 'web' or 'loop', got {kind!r}")
    web_id = take("a web id")

    if kind == "web":
        expect("enter")
        entry = take("an arc")
        triples = take_traversals("exit")
        exit_arc = take("an arc")
        if pos != len(tokens):
            raise ValueError(f"trailing tokens after the exit arc: {tokens[pos:]}")
        if not triples:
            raise ValueError("a web crosses at least one triangle")
        steps = _chain_steps(T, triples, entry)
        if steps[-1].exit != exit_arc:
            raise ValueError(
                f"path leaves through {steps[-1].exit}, not the declared {exit_arc}"
            )
        return web_id, WebPath(tuple(steps))

    triples = take_traversals("closed")
    if pos != len(tokens):
        raise ValueError(f"trailing tokens after 'closed': {tokens[pos:]}")
    if not triples:
        raise ValueError("a loop crosses at least one triangle")
    first = T.triangle(triples[0][0])
    candidates = []
    for start in first.sides:
        try:
            steps = _chain_steps(T, triples, start)
        except ValueError:
            continue
        if steps[-1].exit == start:
            candidates.append(steps)
    if not candidates:
        raise ValueError("no assignment of crossed arcs closes the loop")
    if len(candidates) > 1:
        raise ValueError("ambiguous loop: several arc assignments close it")
    return web_id, WebPath(tuple(candidates[0]), closed=True)


def _chain_steps(
    T: Triangulation, triples: list[tuple[str, str]], entry: str
) -> list[WebStep]:
    """Derive each traversal's sides from the entry arc and the turns."""
    steps = []
    arc = entry
    for tid, turn in triples:
        tri = T.triangle(tid)
        if arc not in tri.sides:
            raise ValueError(f"triangle {tid} has no side {arc}")
        s_in = tri.sides.index(arc)
        s_out = (s_in + 1) % 3 if turn == "left" else (s_in - 1) % 3
        arc = tri.sides[s_out]
        steps.append(WebStep(tid, tri.sides[s_in], arc, turn))
    return steps
