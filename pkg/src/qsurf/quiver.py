"""Generalized quivers (cluster seeds) with half-integer exchange matrices.

A seed is an ordered node list, a frozen subset, and a skew-symmetric
exchange matrix with entries in (1/2)Z, stored doubled.  Entries must be
integers unless both endpoints are frozen.  Seeds are immutable; mutation
and relabeling return new seeds.
"""

from __future__ import annotations

from typing import Hashable, Iterable, Mapping, Sequence

from .coeff import HalfInt, format_half

__all__ = [
    "NodeId",
    "Seed",
    "mutate_quiver",
    "mutate_sequence",
    "permute_seed",
    "seeds_equal",
    "render_seed",
    "parse_seed",
]

NodeId = Hashable


class Seed:
    """A generalized quiver: ordered nodes, frozen subset, doubled exchange matrix.

    The matrix is stored sparsely as ``{(v, w): doubled}`` for node pairs with
    ``index(v) < index(w)``; the skew partner is implied.
    """

    __slots__ = ("_nodes", "_frozen", "_index", "_upper")

    def __init__(
        self,
        nodes: Sequence[NodeId],
        frozen: Iterable[NodeId] = (),
        eps2: Mapping[tuple[NodeId, NodeId], int] | None = None,
    ):
        nodes = tuple(nodes)
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node ids")
        index = {v: i for i, v in enumerate(nodes)}
        frozen_set = frozenset(frozen)
        unknown = frozen_set - set(nodes)
        if unknown:
            raise ValueError(f"frozen ids not in node set: {sorted(map(str, unknown))}")
        upper: dict[tuple[NodeId, NodeId], int] = {}
        for (v, w), val in (eps2 or {}).items():
            if v not in index or w not in index:
                raise ValueError(f"matrix entry at unknown nodes ({v}, {w})")
            if v == w:
                if val:
                    raise ValueError(f"nonzero diagonal entry at {v}")
                continue
            if index[v] > index[w]:
                v, w, val = w, v, -val
            key = (v, w)
            if key in upper and upper[key] != val:
                raise ValueError(f"inconsistent entries for pair ({v}, {w})")
            if val:
                upper[key] = val
        for (v, w), val in upper.items():
            if val % 2 and not (v in frozen_set and w in frozen_set):
                raise ValueError(
                    f"non-integer entry {format_half(val)} at ({v}, {w}) "
                    "with an unfrozen endpoint"
                )
        self._nodes = nodes
        self._frozen = frozen_set
        self._index = index
        self._upper = upper

    @staticmethod
    def from_integer(
        nodes: Sequence[NodeId],
        frozen: Iterable[NodeId] = (),
        eps: Mapping[tuple[NodeId, NodeId], int] | None = None,
    ) -> "Seed":
        """Build from whole-integer matrix entries."""
        return Seed(nodes, frozen, {k: 2 * v for k, v in (eps or {}).items()})

    # -- inspection ---------------------------------------------------------

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        return self._nodes

    @property
    def frozen(self) -> frozenset[NodeId]:
        return self._frozen

    @property
    def mutable(self) -> tuple[NodeId, ...]:
        return tuple(v for v in self._nodes if v not in self._frozen)

    def has_node(self, v: NodeId) -> bool:
        return v in self._index

    def index(self, v: NodeId) -> int:
        return self._index[v]

    def eps2(self, v: NodeId, w: NodeId) -> int:
        """Doubled exchange-matrix entry for the ordered pair (v, w)."""
        if v not in self._index or w not in self._index:
            raise KeyError(f"unknown node in pair ({v}, {w})")
        if v == w:
            return 0
        if self._index[v] < self._index[w]:
            return self._upper.get((v, w), 0)
        return -self._upper.get((w, v), 0)

    def eps(self, v: NodeId, w: NodeId) -> HalfInt:
        return HalfInt(self.eps2(v, w))

    def eps_int(self, v: NodeId, w: NodeId) -> int:
        """Entry as a plain integer; raises when it is a strict half-integer."""
        return HalfInt(self.eps2(v, w)).as_int()

    def row2(self, v: NodeId) -> dict[NodeId, int]:
        """Nonzero doubled entries of the row at v."""
        return {w: e for w in self._nodes if (e := self.eps2(v, w))}

    def upper_entries(self) -> dict[tuple[NodeId, NodeId], int]:
        return dict(self._upper)

    def with_eps2(self, eps2: Mapping[tuple[NodeId, NodeId], int]) -> "Seed":
        """Same nodes and frozen subset, replacement matrix."""
        return Seed(self._nodes, self._frozen, eps2)

    # -- identity -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Seed):
            return NotImplemented
        return seeds_equal(self, other)

    def __hash__(self) -> int:
        canon = frozenset(
            entry
            for (v, w), val in self._upper.items()
            for entry in ((v, w, val), (w, v, -val))
        )
        return hash((frozenset(self._nodes), self._frozen, canon))

    def __repr__(self) -> str:
        return f"Seed(nodes={self._nodes!r}, frozen={sorted(map(str, self._frozen))})"


def mutate_quiver(seed: Seed, k: NodeId) -> Seed:
    """Exchange-matrix mutation at the mutable node k.

    Entries not meeting k gain half the signed product through k:
    e' = e_vw + (e_vk|e_kw| + |e_vk|e_kw)/2; entries meeting k flip sign.
    """
    if not seed.has_node(k):
        raise ValueError(f"mutation at unknown node {k}")
    if k in seed.frozen:
        raise ValueError(f"mutation at frozen node {k}")
    nodes = seed.nodes
    col_k = {v: seed.eps2(v, k) for v in nodes}
    new: dict[tuple[NodeId, NodeId], int] = {}
    for i, v in enumerate(nodes):
        for w in nodes[i + 1 :]:
            e = seed.eps2(v, w)
            if v == k or w == k:
                val = -e
            else:
                vk, kw = col_k[v], -col_k[w]
                # vk and kw are doubled evens (k is mutable), so the product
                # correction (vk|kw| + |vk|kw)/2 in doubled units is /4 exact.
                val = e + (vk * abs(kw) + abs(vk) * kw) // 4
            if val:
                new[(v, w)] = val
    return seed.with_eps2(new)


def mutate_sequence(seed: Seed, ks: Iterable[NodeId]) -> Seed:
    """Apply mutations in the order given (first element acts first)."""
    for k in ks:
        seed = mutate_quiver(seed, k)
    return seed


def permute_seed(seed: Seed, sigma: Mapping[NodeId, NodeId]) -> Seed:
    """Relabel nodes by the bijection sigma: entry at (sigma v, sigma w) = old (v, w)."""
    nodes = seed.nodes
    missing = [v for v in nodes if v not in sigma]
    if missing:
        raise ValueError(f"sigma missing nodes: {missing}")
    images = [sigma[v] for v in nodes]
    if set(images) != set(nodes):
        raise ValueError("sigma is not a bijection of the node set")
    eps2 = {
        (sigma[v], sigma[w]): val for (v, w), val in seed.upper_entries().items()
    }
    return Seed(images, {sigma[v] for v in seed.frozen}, eps2)


def seeds_equal(a: Seed, b: Seed) -> bool:
    """Same node set, same frozen subset, identical exchange matrices."""
    if set(a.nodes) != set(b.nodes) or a.frozen != b.frozen:
        return False
    return all(
        a.eps2(v, w) == b.eps2(v, w)
        for i, v in enumerate(a.nodes)
        for w in a.nodes[i + 1 :]
    )


# -- text format ------------------------------------------------------------


def render_seed(seed: Seed) -> str:
    """Render: one 'node' line per node, then upper-triangular 'eps' lines."""
    lines = [
        f"node {v} frozen" if v in seed.frozen else f"node {v}" for v in seed.nodes
    ]
    for i, v in enumerate(seed.nodes):
        for w in seed.nodes[i + 1 :]:
            e = seed.eps2(v, w)
            if e:
                lines.append(f"eps {v} {w} {format_half(e)}")
    return "\n".join(lines) + "\n"


def _parse_half(token: str) -> int:
    """Parse an integer or 'p/2' fraction into a doubled value."""
    if "/" in token:
        num, den = token.split("/", 1)
        if den != "2":
            raise ValueError(f"unsupported denominator in {token!r}")
        return int(num)
    return 2 * int(token)


def parse_seed(text: str) -> Seed:
    """Parse the text format produced by render_seed; node ids become strings."""
    nodes: list[str] = []
    frozen: list[str] = []
    eps2: dict[tuple[str, str], int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "node":
            if len(parts) == 2:
                nodes.append(parts[1])
            elif len(parts) == 3 and parts[2] == "frozen":
                nodes.append(parts[1])
                frozen.append(parts[1])
            else:
                raise ValueError(f"line {lineno}: bad node line {raw!r}")
        elif parts[0] == "eps":
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: bad eps line {raw!r}")
            key = (parts[1], parts[2])
            if key in eps2:
                raise ValueError(f"line {lineno}: duplicate eps entry {key}")
            eps2[key] = _parse_half(parts[3])
        else:
            raise ValueError(f"line {lineno}: unknown directive {parts[0]!r}")
    return Seed(nodes, frozen, eps2)
