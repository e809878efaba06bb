"""The cube-root quantum torus over a seed.

Generators Z_v attached to quiver nodes satisfy
``Z_v Z_w = w^{2 e_vw} Z_w Z_v`` where ``e`` is the seed's exchange matrix and
``w`` is the cube root of the deformation parameter (``q = w^9``).  The cubes
``X_v = Z_v^3`` generate the classical-exponent subalgebra, so exponents of
``X``-generators live in thirds of integers.

Storage conventions:

* exponent vectors are kept in integer ``Z``-units (equal to tripled
  ``X``-units);
* every Laurent polynomial stores its coefficients **relative to Weyl-ordered
  representatives**: the term ``c * [Z^a]`` means the symmetric (Weyl-ordered)
  monomial with exponent vector ``a``, scaled by ``c``.  With this convention
  the product of representatives is ``[Z^a][Z^b] = w^{<a,b>} [Z^{a+b}]`` with
  ``<a,b> = sum_{v,w} e_vw a_v b_w``, the star map conjugates coefficients
  term-wise, and classicalization evaluates them at 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .coeff import OmegaPoly, ThirdInt, format_third
from .quiver import NodeId, Seed

__all__ = [
    "ExponentVector",
    "WeylMonomial",
    "LaurentPoly",
    "commutation_exponent",
    "pairing2",
    "mono_mul",
    "poly_add",
    "poly_mul",
    "star",
    "classicalize",
    "weyl_quantize",
    "is_multiplicity_free",
    "highest_term",
    "render_poly",
]


class ExponentVector:
    """Finitely supported map node -> Z-exponent (integer; tripled X-units)."""

    __slots__ = ("_e",)

    def __init__(self, entries: Mapping[NodeId, int] | Iterable[tuple[NodeId, int]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        data = {}
        for v, a in items:
            if a:
                data[v] = data.get(v, 0) + a
                if not data[v]:
                    del data[v]
        object.__setattr__(self, "_e", data)

    @staticmethod
    def x_units(entries: Mapping[NodeId, int]) -> "ExponentVector":
        """Build from whole X-unit exponents (each becomes 3 Z-units)."""
        return ExponentVector({v: 3 * a for v, a in entries.items()})

    @staticmethod
    def zero() -> "ExponentVector":
        return _EV_ZERO

    def z(self, v: NodeId) -> int:
        """Z-unit exponent at v."""
        return self._e.get(v, 0)

    def x_third(self, v: NodeId) -> ThirdInt:
        """X-unit exponent at v as a third-integer."""
        return ThirdInt(self._e.get(v, 0))

    @property
    def support(self) -> frozenset:
        return frozenset(self._e)

    def items(self) -> Iterator[tuple[NodeId, int]]:
        return iter(self._e.items())

    def is_zero(self) -> bool:
        return not self._e

    def __add__(self, other: "ExponentVector") -> "ExponentVector":
        if not self._e:
            return other
        if not other._e:
            return self
        return ExponentVector(list(self._e.items()) + list(other._e.items()))

    def __neg__(self) -> "ExponentVector":
        return ExponentVector({v: -a for v, a in self._e.items()})

    def __sub__(self, other: "ExponentVector") -> "ExponentVector":
        return self + (-other)

    def scale(self, n: int) -> "ExponentVector":
        if n == 0:
            return _EV_ZERO
        return ExponentVector({v: n * a for v, a in self._e.items()})

    def dominates(self, other: "ExponentVector") -> bool:
        """Componentwise >= over the union of supports."""
        return all(self.z(v) >= other.z(v) for v in self.support | other.support)

    def key(self, seed: Seed) -> tuple[int, ...]:
        """Dense tuple in the seed's canonical node order (for sorting)."""
        return tuple(self.z(v) for v in seed.nodes)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ExponentVector) and self._e == other._e

    def __hash__(self) -> int:
        return hash(frozenset(self._e.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}: {a}" for v, a in self._e.items())
        return f"ExponentVector({{{inner}}})"


_EV_ZERO = ExponentVector()


@dataclass(frozen=True)
class WeylMonomial:
    """A single term: sign * w^{phase2/2} * [Z^exps] (Weyl-ordered)."""

    exps: ExponentVector
    phase2: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +-1, got {self.sign}")

    @property
    def coeff(self) -> OmegaPoly:
        return OmegaPoly.omega(self.phase2, self.sign)

    def inverse(self, seed: Seed) -> "WeylMonomial":
        """Two-sided inverse: [Z^a]^{-1} = [Z^{-a}] (phases negate)."""
        del seed  # the Weyl representative's inverse needs no pairing
        return WeylMonomial(-self.exps, -self.phase2, self.sign)

    def as_poly(self) -> "LaurentPoly":
        return LaurentPoly({self.exps: self.coeff})


class LaurentPoly:
    """Finite sum of coefficient * Weyl-representative terms."""

    __slots__ = ("_terms",)

    def __init__(
        self,
        terms: Mapping[ExponentVector, OmegaPoly]
        | Iterable[tuple[ExponentVector, OmegaPoly]] = (),
    ):
        items = terms.items() if isinstance(terms, Mapping) else terms
        data: dict[ExponentVector, OmegaPoly] = {}
        for exps, coeff in items:
            if not coeff:
                continue
            if exps in data:
                total = data[exps] + coeff
                if total:
                    data[exps] = total
                else:
                    del data[exps]
            else:
                data[exps] = coeff
        object.__setattr__(self, "_terms", data)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "LaurentPoly":
        return _LP_ZERO

    @staticmethod
    def one() -> "LaurentPoly":
        return _LP_ONE

    @staticmethod
    def scalar(c: OmegaPoly) -> "LaurentPoly":
        return LaurentPoly({_EV_ZERO: c})

    @staticmethod
    def monomial(exps: ExponentVector, coeff: OmegaPoly | None = None) -> "LaurentPoly":
        return LaurentPoly({exps: OmegaPoly.one() if coeff is None else coeff})

    @staticmethod
    def z_var(v: NodeId, k: int = 1) -> "LaurentPoly":
        """Z_v^k."""
        return LaurentPoly({ExponentVector({v: k}): OmegaPoly.one()})

    @staticmethod
    def x_var(v: NodeId, k: int = 1) -> "LaurentPoly":
        """X_v^k = Z_v^{3k}."""
        return LaurentPoly({ExponentVector({v: 3 * k}): OmegaPoly.one()})

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> Mapping[ExponentVector, OmegaPoly]:
        return self._terms

    def coeff(self, exps: ExponentVector) -> OmegaPoly:
        return self._terms.get(exps, OmegaPoly.zero())

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_scalar(self) -> bool:
        return not self._terms or set(self._terms) == {_EV_ZERO}

    def single_monomial(self) -> WeylMonomial:
        """The unique term as a WeylMonomial; requires one +-w^m coefficient."""
        if len(self._terms) != 1:
            raise ValueError(f"not a single term ({len(self._terms)} terms)")
        exps, coeff = next(iter(self._terms.items()))
        phase2, c = coeff.single_term()
        if abs(c) != 1:
            raise ValueError(f"coefficient magnitude {abs(c)} != 1")
        return WeylMonomial(exps, phase2, c)

    # -- seed-free arithmetic ----------------------------------------------

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        if not self._terms:
            return other
        if not other._terms:
            return self
        return LaurentPoly(list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({e: -c for e, c in self._terms.items()})

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def scale(self, c: OmegaPoly) -> "LaurentPoly":
        return LaurentPoly({e: k * c for e, k in self._terms.items()})

    # -- identity -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LaurentPoly) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        n = len(self._terms)
        return f"LaurentPoly(<{n} term{'s' if n != 1 else ''}>)"


_LP_ZERO = LaurentPoly()
_LP_ONE = LaurentPoly({_EV_ZERO: OmegaPoly.one()})


def pairing2(seed: Seed, a: ExponentVector, b: ExponentVector) -> int:
    """Doubled skew pairing: sum over nodes of e2_vw * a_v * b_w (Z-units)."""
    total = 0
    for v, av in a.items():
        for w, bw in b.items():
            e2 = seed.eps2(v, w)
            if e2:
                total += e2 * av * bw
    return total


def commutation_exponent(seed: Seed, u: NodeId, a: ExponentVector) -> ThirdInt:
    """alpha = sum_v e_uv a_v in X-units: X_u [X^a] = q^{2 alpha} [X^a] X_u."""
    sixfold = sum(seed.eps2(u, v) * av for v, av in a.items())
    if sixfold % 2:
        raise ValueError(f"pairing at {u} is not a third-integer")
    return ThirdInt(sixfold // 2)


def mono_mul(seed: Seed, m1: WeylMonomial, m2: WeylMonomial) -> WeylMonomial:
    """[Z^a][Z^b] = w^{<a,b>} [Z^{a+b}]; signs multiply, phases add."""
    return WeylMonomial(
        m1.exps + m2.exps,
        m1.phase2 + m2.phase2 + pairing2(seed, m1.exps, m2.exps),
        m1.sign * m2.sign,
    )


def poly_add(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    return p + q


def poly_mul(seed: Seed, p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    """Bilinear extension of the representative product law."""
    out: dict[ExponentVector, OmegaPoly] = {}
    for ea, ca in p.terms.items():
        for eb, cb in q.terms.items():
            exps = ea + eb
            coeff = (ca * cb).shift(pairing2(seed, ea, eb))
            if exps in out:
                total = out[exps] + coeff
                if total:
                    out[exps] = total
                else:
                    del out[exps]
            elif coeff:
                out[exps] = coeff
    return LaurentPoly(out)


def star(seed: Seed, p: LaurentPoly) -> LaurentPoly:
    """The anti-automorphism fixing each Z_v and inverting w^{1/2}.

    Weyl representatives are star-fixed, so on Weyl-relative storage the map
    conjugates each coefficient in place.
    """
    del seed  # the representative-relative form needs no reordering phases
    return LaurentPoly({e: c.star() for e, c in p.terms.items()})


def classicalize(p: LaurentPoly) -> LaurentPoly:
    """Evaluate every coefficient at w^{1/2} = 1 (commutative shadow)."""
    return LaurentPoly(
        {e: OmegaPoly.integer(c.at_one()) for e, c in p.terms.items()}
    )


def weyl_quantize(p: LaurentPoly) -> LaurentPoly:
    """Send each classical monomial to its Weyl representative (phase 0).

    The input must have constant integer coefficients.
    """
    for e, c in p.terms.items():
        c.constant_value()
    return LaurentPoly(dict(p.terms))


def is_multiplicity_free(p: LaurentPoly) -> bool:
    """True iff every stored coefficient is a single +-w^m term."""
    for c in p.terms.values():
        if not c.is_single_term():
            return False
        _, k = c.single_term()
        if abs(k) != 1:
            return False
    return True


def highest_term(p: LaurentPoly) -> WeylMonomial | None:
    """The term dominating all others componentwise, if one exists."""
    best: ExponentVector | None = None
    for e in p.terms:
        if best is None or e.dominates(best):
            best = e
    if best is None:
        return None
    if not all(best.dominates(e) for e in p.terms):
        return None
    coeff = p.terms[best]
    phase2, c = coeff.single_term()
    if abs(c) != 1:
        raise ValueError("dominating term coefficient is not +-w^m")
    return WeylMonomial(best, phase2, c)


# -- rendering --------------------------------------------------------------


def _render_term(seed: Seed, exps: ExponentVector, coeff: OmegaPoly) -> str:
    factors = [
        f"X{v}^{{{format_third(exps.z(v))}}}" for v in seed.nodes if exps.z(v)
    ]
    if coeff.is_single_term():
        e2, c = coeff.single_term()
        sign = "+" if c > 0 else "-"
        head = []
        if abs(c) != 1:
            head.append(str(abs(c)))
        if e2:
            head.append(f"w^{{{_half_str(e2)}}}")
        body = " ".join(head + factors) or "1"
        return f"{sign}{body}"
    body = " ".join([f"({coeff.render()})"] + factors)
    return f"+{body}"


def _half_str(e2: int) -> str:
    from .coeff import format_half

    return format_half(e2)


def render_poly(seed: Seed, p: LaurentPoly) -> str:
    """Canonical text: terms sorted by descending exponent key, signed."""
    if not p.terms:
        return "0"
    ordered = sorted(p.terms.items(), key=lambda item: item[0].key(seed), reverse=True)
    return " ".join(_render_term(seed, e, c) for e, c in ordered)
