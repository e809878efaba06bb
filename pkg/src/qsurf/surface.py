"""Triangulated surfaces, their node quivers, diagonal flips, and cutting.

A surface is described purely combinatorially: triangles with clockwise side
triples, glued along shared arcs.  Each arc carries two interior quiver nodes
``<arc>:1`` and ``<arc>:2``; each triangle carries one face node
``<triangle>:t``.  For every arc, exactly one incident triangle traverses it
*forward* (first node then second) along its clockwise boundary; the other
incident triangle, if any, traverses it backward.  In the text format the
first-listed incident triangle is the forward one.

Marked points are derived, not declared: triangle corners identify arc
endpoints, and the equivalence classes are the marked points.  A class all of
whose arcs are internal is a puncture and must have valence at least three.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .quiver import NodeId, Seed
from .qtorus import ExponentVector, LaurentPoly, WeylMonomial

__all__ = [
    "edge_node",
    "face_node",
    "Triangle",
    "MarkedPoint",
    "Triangulation",
    "QuiverLabeling",
    "FlipContext",
    "build_triangulation",
    "render_triangulation",
    "build_3triangulation_quiver",
    "arc_adjacency_matrix",
    "flip",
    "cut",
    "CuttingMap",
    "cutting_map",
]


def edge_node(arc: str, k: int) -> str:
    """The k-th interior node of an arc (k in {1, 2})."""
    if k not in (1, 2):
        raise ValueError(f"edge node index must be 1 or 2, got {k}")
    return f"{arc}:{k}"


def face_node(triangle: str) -> str:
    return f"{triangle}:t"


@dataclass(frozen=True)
class Triangle:
    """A triangle: id, clockwise side triple, per-side forward flags."""

    id: str
    sides: tuple[str, str, str]
    forward: tuple[bool, bool, bool]

    def node_pair(self, slot: int) -> tuple[str, str]:
        """The side's two nodes in this triangle's traversal order."""
        e = self.sides[slot]
        pair = (edge_node(e, 1), edge_node(e, 2))
        return pair if self.forward[slot] else (pair[1], pair[0])

    def endpoint(self, slot: int, which: str) -> tuple[str, int]:
        """The ('tail' or 'head') endpoint of the slot's traversal.

        Arc endpoints are named (arc, 1) for the end before node :1 and
        (arc, 2) for the end after node :2, in the forward direction.
        """
        e = self.sides[slot]
        fwd = self.forward[slot]
        if which == "tail":
            return (e, 1 if fwd else 2)
        if which == "head":
            return (e, 2 if fwd else 1)
        raise ValueError(which)


@dataclass(frozen=True)
class MarkedPoint:
    """A marked point: the set of arc endpoints meeting it."""

    ends: frozenset[tuple[str, int]]
    is_puncture: bool

    @property
    def valence(self) -> int:
        return len(self.ends)

    @property
    def arcs(self) -> frozenset[str]:
        return frozenset(e for e, _ in self.ends)


class Triangulation:
    """An ideal triangulation with derived marked points.

    ``declared_punctures`` entries are cross-checks only: each must name the
    incident arc set of one derived puncture.
    """

    __slots__ = ("_triangles", "_boundary", "_internal", "_incident", "_marked")

    def __init__(
        self,
        triangles: Iterable[Triangle],
        boundary: Iterable[str],
        declared_punctures: Mapping[str, frozenset[str]] | None = None,
    ):
        triangles = tuple(triangles)
        boundary = frozenset(boundary)
        ids = [t.id for t in triangles]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate triangle ids")
        incident: dict[str, list[tuple[int, int]]] = {}
        for ti, tri in enumerate(triangles):
            if len(set(tri.sides)) != 3:
                raise ValueError(
                    f"triangle {tri.id} repeats a side (self-folded triangles "
                    "are not supported)"
                )
            for slot, arc in enumerate(tri.sides):
                incident.setdefault(arc, []).append((ti, slot))
        for arc, slots in incident.items():
            if len(slots) > 2:
                raise ValueError(f"arc {arc} bounds {len(slots)} triangle sides")
            flags = [triangles[ti].forward[slot] for ti, slot in slots]
            if len(slots) == 2:
                if arc in boundary:
                    raise ValueError(f"arc {arc} is glued twice but declared boundary")
                if flags[0] == flags[1]:
                    raise ValueError(
                        f"arc {arc} traversed in the same direction by both sides"
                    )
            else:
                if arc not in boundary:
                    raise ValueError(f"arc {arc} bounds one side but is not boundary")
                if not flags[0]:
                    raise ValueError(f"boundary arc {arc} traversed backward")
        unknown = boundary - set(incident)
        if unknown:
            raise ValueError(f"boundary arcs never used: {sorted(unknown)}")
        self._triangles = triangles
        self._boundary = boundary
        self._internal = frozenset(incident) - boundary
        self._incident = {arc: tuple(slots) for arc, slots in incident.items()}
        self._marked = self._derive_marked_points()
        self._check_declared(declared_punctures or {})

    # -- derivation ---------------------------------------------------------

    def _derive_marked_points(self) -> tuple[MarkedPoint, ...]:
        parent: dict[tuple[str, int], tuple[str, int]] = {}
        for arc in self._incident:
            parent[(arc, 1)] = (arc, 1)
            parent[(arc, 2)] = (arc, 2)

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            parent[find(x)] = find(y)

        for tri in self._triangles:
            for slot in range(3):
                union(tri.endpoint(slot, "head"), tri.endpoint((slot + 1) % 3, "tail"))
        classes: dict[tuple[str, int], set[tuple[str, int]]] = {}
        for end in parent:
            classes.setdefault(find(end), set()).add(end)
        points = []
        for ends in classes.values():
            arcs = {e for e, _ in ends}
            is_puncture = arcs.isdisjoint(self._boundary)
            if is_puncture and len(ends) < 3:
                raise ValueError(
                    f"puncture of valence {len(ends)} at arcs {sorted(arcs)}; "
                    "every puncture needs valence >= 3"
                )
            points.append(MarkedPoint(frozenset(ends), is_puncture))
        return tuple(sorted(points, key=lambda p: sorted(p.ends)))

    def _check_declared(self, declared: Mapping[str, frozenset[str]]) -> None:
        puncture_arc_sets = [p.arcs for p in self._marked if p.is_puncture]
        for name, arcs in declared.items():
            if frozenset(arcs) not in puncture_arc_sets:
                raise ValueError(
                    f"declared puncture {name} incident to {sorted(arcs)} does "
                    "not match any derived puncture"
                )

    # -- inspection ---------------------------------------------------------

    @property
    def triangles(self) -> tuple[Triangle, ...]:
        return self._triangles

    @property
    def boundary(self) -> frozenset[str]:
        return self._boundary

    @property
    def internal(self) -> frozenset[str]:
        return self._internal

    @property
    def arcs(self) -> frozenset[str]:
        return self._boundary | self._internal

    @property
    def marked_points(self) -> tuple[MarkedPoint, ...]:
        return self._marked

    @property
    def punctures(self) -> tuple[MarkedPoint, ...]:
        return tuple(p for p in self._marked if p.is_puncture)

    def triangle(self, tid: str) -> Triangle:
        for tri in self._triangles:
            if tri.id == tid:
                return tri
        raise KeyError(f"no triangle {tid}")

    def incident(self, arc: str) -> tuple[tuple[int, int], ...]:
        """(triangle index, slot) pairs bounding the arc, forward first."""
        slots = self._incident[arc]
        return tuple(
            sorted(slots, key=lambda p: not self._triangles[p[0]].forward[p[1]])
        )

    def node_order(self) -> tuple[str, ...]:
        """Canonical node order: per triangle, new side nodes then the face."""
        order: list[str] = []
        seen: set[str] = set()
        for tri in self._triangles:
            for arc in tri.sides:
                if arc not in seen:
                    seen.add(arc)
                    order.append(edge_node(arc, 1))
                    order.append(edge_node(arc, 2))
            order.append(face_node(tri.id))
        return tuple(order)


# -- text format ------------------------------------------------------------


def build_triangulation(text: str) -> Triangulation:
    """Parse the triangle/boundary/puncture text format.

    The first-listed triangle incident to each arc traverses it forward; this
    fixes which interior node is ``:1``.
    """
    rows: list[tuple[str, tuple[str, str, str]]] = []
    boundary: list[str] = []
    declared: dict[str, frozenset[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "triangle":
            if len(parts) != 5:
                raise ValueError(f"line {lineno}: bad triangle line {raw!r}")
            rows.append((parts[1], (parts[2], parts[3], parts[4])))
        elif parts[0] == "boundary":
            if len(parts) < 2:
                raise ValueError(f"line {lineno}: bad boundary line {raw!r}")
            boundary.extend(parts[1:])
        elif parts[0] == "puncture":
            if len(parts) < 4 or parts[2] != "incident":
                raise ValueError(f"line {lineno}: bad puncture line {raw!r}")
            declared[parts[1]] = frozenset(parts[3:])
        else:
            raise ValueError(f"line {lineno}: unknown directive {parts[0]!r}")
    seen: set[str] = set()
    triangles = []
    for tid, sides in rows:
        flags = []
        for arc in sides:
            flags.append(arc not in seen)
            seen.add(arc)
        triangles.append(Triangle(tid, sides, tuple(flags)))
    return Triangulation(triangles, boundary, declared)


def render_triangulation(T: Triangulation) -> str:
    """Render to the text format.

    Faithful to the combinatorics; re-parsing reassigns node orientations by
    the first-listed rule, so node labels round-trip only when the listing
    order already realizes every forward traversal first (true for parsed
    input, not always for programmatically flipped surfaces).
    """
    lines = [
        f"triangle {t.id} {t.sides[0]} {t.sides[1]} {t.sides[2]}" for t in T.triangles
    ]
    if T.boundary:
        lines.append("boundary " + " ".join(sorted(T.boundary)))
    return "\n".join(lines) + "\n"


# -- node quiver ------------------------------------------------------------


@dataclass(frozen=True)
class QuiverLabeling:
    """Structured access to a triangulation's quiver node ids."""

    nodes: tuple[str, ...]
    edge_nodes: Mapping[str, tuple[str, str]]  # arc -> (node :1, node :2)
    face_nodes: Mapping[str, str]  # triangle id -> face node

    def edge(self, arc: str, k: int) -> str:
        return self.edge_nodes[arc][k - 1]

    def face(self, tid: str) -> str:
        return self.face_nodes[tid]


def build_3triangulation_quiver(T: Triangulation) -> tuple[Seed, QuiverLabeling]:
    """The node quiver: per triangle, each side in traversal order (a, b)
    contributes face->a, b->face, and corner a_next->b arrows of weight 1,
    plus a half arrow a->b along the side; contributions add over triangles.
    Nodes on boundary arcs are frozen.
    """
    eps2: dict[tuple[str, str], int] = {}

    def add(v: str, w: str, doubled: int) -> None:
        eps2[(v, w)] = eps2.get((v, w), 0) + doubled
        eps2[(w, v)] = eps2.get((w, v), 0) - doubled

    for tri in T.triangles:
        f = face_node(tri.id)
        pairs = [tri.node_pair(slot) for slot in range(3)]
        for slot, (a, b) in enumerate(pairs):
            add(f, a, 2)
            add(b, f, 2)
            add(pairs[(slot + 1) % 3][0], b, 2)
            add(a, b, 1)
    nodes = T.node_order()
    frozen = [
        node
        for arc in T.boundary
        for node in (edge_node(arc, 1), edge_node(arc, 2))
    ]
    seed = Seed(nodes, frozen, {k: v for k, v in eps2.items() if v})
    labeling = QuiverLabeling(
        nodes,
        {arc: (edge_node(arc, 1), edge_node(arc, 2)) for arc in T.arcs},
        {tri.id: face_node(tri.id) for tri in T.triangles},
    )
    return seed, labeling


def arc_adjacency_matrix(T: Triangulation) -> dict[tuple[str, str], int]:
    """Signed arc adjacency: +1 per triangle in which the first arc is the
    clockwise successor of the second; skew entries included explicitly.
    """
    b: dict[tuple[str, str], int] = {}

    def add(i: str, j: str, v: int) -> None:
        for key, val in (((i, j), v), ((j, i), -v)):
            b[key] = b.get(key, 0) + val
            if not b[key]:
                del b[key]

    for tri in T.triangles:
        for slot in range(3):
            add(tri.sides[(slot + 1) % 3], tri.sides[slot], 1)
    return b


# -- flip -------------------------------------------------------------------


@dataclass(frozen=True)
class FlipContext:
    """The twelve-node neighborhood of a flipped arc, in the source quiver.

    Roles: 3 and 4 are the flipped arc's nodes (forward order); 7 and 12 the
    forward / backward triangle's face nodes; 5,6 / 1,2 the forward triangle's
    other two sides in traversal order (the side before the arc, then the
    side before that); 8,9 / 10,11 the backward triangle's following sides.
    ``iota`` is the node identification from the source to the flipped
    surface's quiver.
    """

    arc: str
    role: Mapping[int, str]
    iota: Mapping[str, str]

    @property
    def mutation_nodes(self) -> tuple[str, str, str, str]:
        """The mutation sequence, first to act first."""
        return (self.role[3], self.role[4], self.role[7], self.role[12])


def _rotate(tri: Triangle, first_slot: int) -> Triangle:
    order = [(first_slot + i) % 3 for i in range(3)]
    return Triangle(
        tri.id,
        tuple(tri.sides[i] for i in order),
        tuple(tri.forward[i] for i in order),
    )


def flip(T: Triangulation, arc: str) -> tuple[Triangulation, FlipContext, dict[str, str]]:
    """Replace the internal arc by the other diagonal of its quadrilateral.

    Returns the flipped triangulation, the flip context, and the node
    identification iota (also stored on the context).
    """
    if arc not in T.internal:
        raise ValueError(f"cannot flip {arc}: not an internal arc")
    (ti_f, slot_f), (ti_b, slot_b) = T.incident(arc)
    tri_f = T.triangles[ti_f]
    tri_b = T.triangles[ti_b]
    # Rotate so the forward triangle ends with the arc and the backward one
    # starts with it: (side_a, side_b, arc) and (arc, side_c, side_d).
    rot_f = _rotate(tri_f, (slot_f + 1) % 3)
    rot_b = _rotate(tri_b, slot_b)
    side_a, side_b = rot_f.sides[0], rot_f.sides[1]
    side_c, side_d = rot_b.sides[1], rot_b.sides[2]
    outer = [side_a, side_b, side_c, side_d]
    if len(set(outer)) != 4 or arc in outer:
        raise ValueError(
            f"cannot flip {arc}: its quadrilateral's sides {outer} are not "
            "four distinct arcs (coincident context nodes are unsupported)"
        )
    a1, a2 = rot_f.node_pair(0)
    b1, b2 = rot_f.node_pair(1)
    c1, c2 = rot_b.node_pair(1)
    d1, d2 = rot_b.node_pair(2)
    role = {
        1: b1, 2: b2, 3: edge_node(arc, 1), 4: edge_node(arc, 2),
        5: a1, 6: a2, 7: face_node(tri_f.id),
        8: c1, 9: c2, 10: d1, 11: d2, 12: face_node(tri_b.id),
    }
    if len(set(role.values())) != 12:
        raise ValueError(f"cannot flip {arc}: context nodes coincide")
    iota = {v: v for tri in T.triangles for v in _tri_nodes(tri)}
    iota[role[3]] = role[7]
    iota[role[4]] = role[12]
    iota[role[7]] = edge_node(arc, 2)
    iota[role[12]] = edge_node(arc, 1)
    # New triangles: the forward one becomes (side_b, side_c, arc) with the
    # new diagonal forward; the backward one becomes (side_a, arc, side_d).
    new_f = Triangle(
        tri_f.id,
        (side_b, side_c, arc),
        (rot_f.forward[1], rot_b.forward[1], True),
    )
    new_b = Triangle(
        tri_b.id,
        (side_a, arc, side_d),
        (rot_f.forward[0], False, rot_b.forward[2]),
    )
    replaced = {ti_f: new_f, ti_b: new_b}
    new_triangles = [replaced.get(i, t) for i, t in enumerate(T.triangles)]
    flipped = Triangulation(new_triangles, T.boundary)
    ctx = FlipContext(arc, role, dict(iota))
    return flipped, ctx, dict(iota)


def _tri_nodes(tri: Triangle):
    for e in tri.sides:
        yield edge_node(e, 1)
        yield edge_node(e, 2)
    yield face_node(tri.id)


# -- cutting ----------------------------------------------------------------


def cut(T: Triangulation, arc: str) -> tuple[Triangulation, dict[str, str]]:
    """Cut along an internal arc, duplicating it into two boundary arcs.

    The forward side keeps its traversal on ``<arc>.1``, the backward side is
    re-expressed forward on ``<arc>.2``.  Returns the cut triangulation and
    the gluing map from its nodes onto the original nodes (two-to-one exactly
    over the cut arc's nodes).
    """
    if arc not in T.internal:
        raise ValueError(f"cannot cut {arc}: not an internal arc")
    copy1, copy2 = f"{arc}.1", f"{arc}.2"
    if copy1 in T.arcs or copy2 in T.arcs:
        raise ValueError(f"cut arc ids {copy1}/{copy2} already in use")
    (ti_f, slot_f), (ti_b, slot_b) = T.incident(arc)

    def rebuilt(ti: int, tri: Triangle) -> Triangle:
        sides = list(tri.sides)
        forward = list(tri.forward)
        if ti == ti_f:
            sides[slot_f] = copy1
        if ti == ti_b:
            sides[slot_b] = copy2
            forward[slot_b] = True
        return Triangle(tri.id, tuple(sides), tuple(forward))

    new_triangles = [rebuilt(i, t) for i, t in enumerate(T.triangles)]
    cut_T = Triangulation(new_triangles, T.boundary | {copy1, copy2})
    g = {v: v for tri in T.triangles for v in _tri_nodes(tri) if not v.startswith(f"{arc}:")}
    # The backward side traversed (arc:2, arc:1); its forward copy's node :1
    # sits where arc:2 was.
    g[edge_node(copy1, 1)] = edge_node(arc, 1)
    g[edge_node(copy1, 2)] = edge_node(arc, 2)
    g[edge_node(copy2, 1)] = edge_node(arc, 2)
    g[edge_node(copy2, 2)] = edge_node(arc, 1)
    return cut_T, g


@dataclass(frozen=True)
class CuttingMap:
    """The algebra embedding induced by cutting: each source generator goes
    to the product of the generators over its preimages; on exponent vectors
    this is the pullback along the gluing map, with sign and phase kept.
    """

    source: Triangulation
    target: Triangulation
    gluing: Mapping[str, str]

    def apply_exponents(self, exps: ExponentVector) -> ExponentVector:
        return ExponentVector(
            {w: exps.z(v) for w, v in self.gluing.items() if exps.z(v)}
        )

    def apply_monomial(self, m: WeylMonomial) -> WeylMonomial:
        return WeylMonomial(self.apply_exponents(m.exps), m.phase2, m.sign)

    def apply_poly(self, p: LaurentPoly) -> LaurentPoly:
        return LaurentPoly(
            {self.apply_exponents(e): c for e, c in p.terms.items()}
        )

    def __call__(self, value):
        if isinstance(value, WeylMonomial):
            return self.apply_monomial(value)
        if isinstance(value, LaurentPoly):
            return self.apply_poly(value)
        if isinstance(value, ExponentVector):
            return self.apply_exponents(value)
        raise TypeError(f"cannot cut a {type(value).__name__}")


def cutting_map(T: Triangulation, arc: str) -> CuttingMap:
    cut_T, g = cut(T, arc)
    return CuttingMap(T, cut_T, g)
