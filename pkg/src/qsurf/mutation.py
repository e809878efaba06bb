"""Quantum mutation maps for the cube-root torus algebras.

A mutation at a node u acts on fractions in two layers: a monomial layer
that rewrites Weyl-monomial exponents (phase-preserving), and an
automorphism layer that multiplies each monomial on the right by a finite
ratio of shifted binomials ``1 + q^(2r-1) X_u``.  Elements produced this
way are sums of right fractions whose denominators are products of such
binomials; this module implements that arithmetic exactly, normalizes by
cancelling denominators through exact noncommutative division, composes
the four mutations realizing a diagonal flip, and checks consistency
relations of mutation sequences on generators.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .balance import transform_exponents
from .coeff import HalfInt, OmegaPoly
from .qtorus import (
    ExponentVector,
    LaurentPoly,
    commutation_exponent,
    pairing2,
    poly_add,
    poly_mul,
    star,
)
from .quiver import NodeId, Seed, mutate_sequence, permute_seed, seeds_equal
from .surface import FlipContext, Triangulation, build_3triangulation_quiver

__all__ = [
    "BinomialFactor",
    "QuantumRational",
    "NormalizationError",
    "fq_factors",
    "nu_prime",
    "nu_sharp",
    "nu_omega",
    "normalize",
    "is_laurent",
    "theta_flip",
    "mu_q",
    "right_divide",
    "left_divide",
    "star_rational",
    "rational_add",
    "relabel_poly",
    "check_relation",
    "classical_rational",
    "classical_rationals_equal",
    "rationals_equal_commuting",
]


class NormalizationError(ValueError):
    """A fraction could not be brought to the required shape."""


@dataclass(frozen=True, order=True)
class BinomialFactor:
    """The binomial ``1 + w^{phase2/2} * X_node`` (phase in doubled w-units)."""

    node: NodeId
    phase2: int

    @staticmethod
    def from_q(node: NodeId, k: int) -> "BinomialFactor":
        """Factor 1 + q^k X_node."""
        return BinomialFactor(node, 18 * k)

    @property
    def qexp(self) -> HalfInt:
        """The phase in q-units (defined when the phase is one)."""
        if self.phase2 % 9:
            raise ValueError(f"phase {self.phase2}/2 is not a half-power of q")
        return HalfInt(self.phase2 // 9)

    def as_poly(self) -> LaurentPoly:
        x = ExponentVector.x_units({self.node: 1})
        return LaurentPoly(
            {ExponentVector.zero(): OmegaPoly.one(), x: OmegaPoly.omega(self.phase2)}
        )

    def conjugated_past(self, seed: Seed, exps: ExponentVector) -> "BinomialFactor":
        """The factor g with  self * [Z^exps] = [Z^exps] * g."""
        shift = 2 * pairing2(seed, ExponentVector.x_units({self.node: 1}), exps)
        return BinomialFactor(self.node, self.phase2 + shift)

    def star(self) -> "BinomialFactor":
        return BinomialFactor(self.node, -self.phase2)

    def render(self) -> str:
        from .coeff import format_half

        return f"(1 + w^{{{format_half(self.phase2)}}} X{self.node})"


Term = tuple[LaurentPoly, tuple[BinomialFactor, ...]]


class QuantumRational:
    """A sum of right fractions  P * f1^-1 * f2^-1 * ... with binomial f's."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[Term] = ()):
        cleaned = []
        for poly, denoms in terms:
            if poly:
                cleaned.append((poly, tuple(denoms)))
        self._terms = tuple(cleaned)

    @staticmethod
    def from_laurent(p: LaurentPoly) -> "QuantumRational":
        return QuantumRational([(p, ())])

    @staticmethod
    def zero() -> "QuantumRational":
        return QuantumRational()

    @property
    def terms(self) -> tuple[Term, ...]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other: object) -> bool:
        return isinstance(other, QuantumRational) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(self._terms)

    def __repr__(self) -> str:
        return f"QuantumRational({len(self._terms)} terms)"


def rational_add(x: QuantumRational, y: QuantumRational) -> QuantumRational:
    return QuantumRational(x.terms + y.terms)


# -- F^q factors ------------------------------------------------------------


def fq_factors(
    u: NodeId, alpha: int
) -> tuple[list[BinomialFactor], list[BinomialFactor]]:
    """Factor lists of the finite dilogarithm ratio at node u.

    Returns (positive, negative): for alpha > 0 the factors multiply the
    numerator, for alpha < 0 they are to be inverted.
    """
    if alpha > 0:
        return [BinomialFactor.from_q(u, 2 * r - 1) for r in range(1, alpha + 1)], []
    if alpha < 0:
        return [], [BinomialFactor.from_q(u, -(2 * r - 1)) for r in range(1, -alpha + 1)]
    return [], []


# -- monomial layer ---------------------------------------------------------


def nu_prime(pre_seed: Seed, u: NodeId, p: LaurentPoly) -> LaurentPoly:
    """Monomial layer of the mutation at u, mapping into the pre-mutation
    algebra.  Phase- and sign-preserving on Weyl monomials."""
    return LaurentPoly(
        [
            (transform_exponents(pre_seed, u, exps), coeff)
            for exps, coeff in p.terms.items()
        ]
    )


# -- automorphism layer ------------------------------------------------------


def _alpha_int(seed: Seed, u: NodeId, exps: ExponentVector) -> int:
    alpha = commutation_exponent(seed, u, exps)
    if not alpha.is_integer:
        raise NormalizationError(
            f"monomial is not balanced at node {u}: "
            f"commutation exponent {alpha.tripled}/3"
        )
    return alpha.as_int()


def nu_sharp(seed: Seed, u: NodeId, p: LaurentPoly) -> QuantumRational:
    """Automorphism layer: right-multiply each monomial by its binomial ratio."""
    terms: list[Term] = []
    for exps, coeff in p.terms.items():
        alpha = _alpha_int(seed, u, exps)
        positive, negative = fq_factors(u, alpha)
        num = LaurentPoly({exps: coeff})
        for f in positive:
            num = poly_mul(seed, num, f.as_poly())
        terms.append((num, tuple(negative)))
    return QuantumRational(terms)


def _as_rational(x: QuantumRational | LaurentPoly) -> QuantumRational:
    if isinstance(x, LaurentPoly):
        return QuantumRational.from_laurent(x)
    return x


def nu_omega(
    pre_seed: Seed, u: NodeId, x: QuantumRational | LaurentPoly
) -> QuantumRational:
    """The balanced mutation map at u into the pre-mutation fraction algebra.

    Existing denominators are transported exactly: a factor at u itself
    inverts (leaving a monomial prefix), and a factor at a node commuting
    with u passes through unchanged; anything else cannot be represented
    and raises NormalizationError.
    """
    x = _as_rational(x)
    if u in pre_seed.frozen:
        raise ValueError(f"cannot mutate at frozen node {u}")
    one = LaurentPoly.one()
    out: list[Term] = []
    for poly, denoms in x.terms:
        prefix = one
        carried: list[BinomialFactor] = []
        for f in denoms:
            if f.node == u:
                # 1 + c X_u^-1  =  c X_u^-1 (1 + c^-1 X_u); invert and keep
                # the same-variable binomial, extracting a monomial prefix.
                mono = LaurentPoly(
                    {
                        ExponentVector.x_units({u: 1}): OmegaPoly.omega(-f.phase2)
                    }
                )
                prefix = poly_mul(pre_seed, prefix, mono)
                carried.append(BinomialFactor(u, -f.phase2))
            elif pre_seed.eps2(u, f.node) == 0:
                carried.append(f)
            else:
                raise NormalizationError(
                    f"denominator at node {f.node} does not commute with "
                    f"the mutation node {u}"
                )
        transformed = nu_prime(pre_seed, u, poly)
        for exps, coeff in transformed.terms.items():
            alpha = _alpha_int(pre_seed, u, exps)
            positive, negative = fq_factors(u, alpha)
            num = LaurentPoly({exps: coeff})
            for f in positive:
                num = poly_mul(pre_seed, num, f.as_poly())
            if prefix is not one:
                num = poly_mul(pre_seed, num, prefix)
            out.append((num, tuple(negative) + tuple(carried)))
    return QuantumRational(out)


# -- exact division ----------------------------------------------------------


def _leading(seed: Seed, p: LaurentPoly) -> tuple[ExponentVector, OmegaPoly]:
    key = None
    best = None
    for exps, coeff in p.terms.items():
        k = exps.key(seed)
        if key is None or k > key:
            key, best = k, (exps, coeff)
    assert best is not None
    return best


def _omega_div(n: OmegaPoly, d: OmegaPoly) -> Optional[OmegaPoly]:
    """Exact quotient in the coefficient ring, or None."""
    if not d:
        raise ZeroDivisionError("division by zero coefficient")
    if not n:
        return OmegaPoly.zero()
    if max(n.terms) - min(n.terms) < max(d.terms) - min(d.terms):
        return None
    quot = OmegaPoly.zero()
    rem = n
    d_top = max(d.terms)
    d_coeff = d.terms[d_top]
    bottom = min(n.terms) - min(d.terms)
    while rem:
        top = max(rem.terms)
        e = top - d_top
        if e < bottom:
            return None
        c = rem.terms[top]
        if c % d_coeff:
            return None
        t = OmegaPoly.omega(e, c // d_coeff)
        quot = quot + t
        rem = rem - t * d
    return quot


def right_divide(seed: Seed, p: LaurentPoly, d: LaurentPoly) -> Optional[LaurentPoly]:
    """Exact q with  q * d == p  (in the seed's algebra), else None."""
    if not d:
        raise ZeroDivisionError("division by zero")
    if not p:
        return LaurentPoly.zero()
    lead_exps, lead_coeff = _leading(seed, d)
    quot = LaurentPoly.zero()
    rem = p
    max_steps = 8 * (len(p) + 1) * (len(d) + 1) + 32
    steps = 0
    while rem:
        steps += 1
        if steps > max_steps:
            return None
        r_exps, r_coeff = _leading(seed, rem)
        q_exps = r_exps - lead_exps
        # the product term picks up the Weyl-relative phase
        shift = pairing2(seed, q_exps, lead_exps)
        c = _omega_div(r_coeff, lead_coeff.shift(shift))
        if c is None:
            return None
        q_term = LaurentPoly({q_exps: c})
        quot = poly_add(quot, q_term)
        rem = rem - poly_mul(seed, q_term, d)
    if poly_mul(seed, quot, d) == p:
        return quot
    return None


def left_divide(seed: Seed, d: LaurentPoly, p: LaurentPoly) -> Optional[LaurentPoly]:
    """Exact q with  d * q == p, else None."""
    if not d:
        raise ZeroDivisionError("division by zero")
    if not p:
        return LaurentPoly.zero()
    lead_exps, lead_coeff = _leading(seed, d)
    quot = LaurentPoly.zero()
    rem = p
    max_steps = 8 * (len(p) + 1) * (len(d) + 1) + 32
    steps = 0
    while rem:
        steps += 1
        if steps > max_steps:
            return None
        r_exps, r_coeff = _leading(seed, rem)
        q_exps = r_exps - lead_exps
        shift = pairing2(seed, lead_exps, q_exps)
        c = _omega_div(r_coeff, lead_coeff.shift(shift))
        if c is None:
            return None
        q_term = LaurentPoly({q_exps: c})
        quot = poly_add(quot, q_term)
        rem = rem - poly_mul(seed, d, q_term)
    if poly_mul(seed, d, quot) == p:
        return quot
    return None


# -- normalization -----------------------------------------------------------


def _factors_commute(seed: Seed, f: BinomialFactor, g: BinomialFactor) -> bool:
    return f.node == g.node or seed.eps2(f.node, g.node) == 0


def _canonical_denoms(
    seed: Seed, denoms: tuple[BinomialFactor, ...]
) -> tuple[BinomialFactor, ...]:
    """Sort commuting adjacent factors into a stable canonical order."""
    items = list(denoms)
    order = {v: i for i, v in enumerate(seed.nodes)}

    def key(f: BinomialFactor):
        return (order[f.node], f.phase2)

    changed = True
    while changed:
        changed = False
        for i in range(len(items) - 1):
            if key(items[i + 1]) < key(items[i]) and _factors_commute(
                seed, items[i], items[i + 1]
            ):
                items[i], items[i + 1] = items[i + 1], items[i]
                changed = True
    return tuple(items)


def _cancel_term(seed: Seed, term: Term) -> Term:
    """Repeatedly cancel denominators that divide the numerator exactly."""
    poly, denoms = term
    items = list(denoms)
    progress = True
    while progress and items:
        progress = False
        for i, f in enumerate(items):
            if not all(_factors_commute(seed, f, items[j]) for j in range(i)):
                continue
            q = right_divide(seed, poly, f.as_poly())
            if q is not None:
                poly = q
                items.pop(i)
                progress = True
                break
    return poly, tuple(items)


def normalize(seed: Seed, x: QuantumRational | LaurentPoly) -> QuantumRational:
    """Canonical form: sorted denominators, merged terms, cancelled factors."""
    x = _as_rational(x)
    terms = list(x.terms)
    for _ in range(6):
        grouped: dict[tuple[BinomialFactor, ...], LaurentPoly] = {}
        for poly, denoms in terms:
            denoms = _canonical_denoms(seed, denoms)
            grouped[denoms] = poly_add(grouped.get(denoms, LaurentPoly.zero()), poly)
        new_terms: list[Term] = []
        changed = False
        for denoms, poly in grouped.items():
            if not poly:
                changed = True
                continue
            reduced = _cancel_term(seed, (poly, denoms))
            if reduced[1] != denoms:
                changed = True
            new_terms.append(reduced)
        terms = new_terms
        if not changed:
            break
    terms.sort(key=lambda t: tuple((str(f.node), f.phase2) for f in t[1]))
    return QuantumRational(terms)


def is_laurent(seed: Seed, x: QuantumRational | LaurentPoly) -> Optional[LaurentPoly]:
    """The element as a Laurent polynomial if all denominators cancel."""
    if isinstance(x, LaurentPoly):
        return x
    reduced = normalize(seed, x)
    total = LaurentPoly.zero()
    for poly, denoms in reduced.terms:
        if denoms:
            return None
        total = poly_add(total, poly)
    return total


# -- the flip map ------------------------------------------------------------


def relabel_poly(p: LaurentPoly, relabel: dict) -> LaurentPoly:
    """Rename the nodes of every exponent vector (seed-isomorphism pushforward)."""
    return LaurentPoly(
        [
            (ExponentVector({relabel[v]: a for v, a in exps.items()}), coeff)
            for exps, coeff in p.terms.items()
        ]
    )


def theta_flip(
    T: Triangulation,
    ctx: FlipContext,
    p: LaurentPoly,
    normalize_stages: bool = True,
) -> QuantumRational:
    """Coordinate-change map for the flip, landing in the pre-flip algebra.

    The input is a Laurent element over the flipped triangulation's quiver;
    the four mutations fire in reverse order, each mapped into the previous
    stage's algebra, normalizing in between.
    """
    seed0, _ = build_3triangulation_quiver(T)
    stage_nodes = ctx.mutation_nodes
    stage_seeds = [seed0]
    for u in stage_nodes:
        stage_seeds.append(mutate_sequence(stage_seeds[-1], [u]))

    inverse = {w: v for v, w in ctx.iota.items()}
    x: QuantumRational = QuantumRational.from_laurent(relabel_poly(p, inverse))
    for r in (4, 3, 2, 1):
        pre = stage_seeds[r - 1]
        x = nu_omega(pre, stage_nodes[r - 1], x)
        if normalize_stages:
            x = normalize(pre, x)
    return x


def mu_q(seed: Seed, u: NodeId, p: LaurentPoly) -> QuantumRational:
    """Mutation on the integral-exponent subalgebra (all exponents whole)."""
    for exps, _ in p.terms.items():
        for v, a in exps.items():
            if a % 3:
                raise ValueError(
                    f"exponent {a}/3 at node {v} is not integral; "
                    "use the balanced mutation map"
                )
    return nu_omega(seed, u, p)


# -- star and classical limits -----------------------------------------------


def star_rational(seed: Seed, x: QuantumRational) -> QuantumRational:
    """The *-involution: reverse each fraction and conjugate coefficients."""
    out: list[Term] = []
    for poly, denoms in x.terms:
        starred = star(seed, poly)
        for exps, coeff in starred.terms.items():
            factors = tuple(
                f.star().conjugated_past(seed, exps) for f in reversed(denoms)
            )
            out.append((LaurentPoly({exps: coeff}), factors))
    return QuantumRational(out)


def classical_seed(seed: Seed) -> Seed:
    """The same nodes with all exchange entries zero (commutative limit)."""
    return Seed(seed.nodes, frozen=seed.frozen, eps2={})


def classical_rational(seed: Seed, x: QuantumRational) -> QuantumRational:
    """Specialize w -> 1: commutative numerators, phase-free factors."""
    del seed  # the numerators carry no seed; kept for signature symmetry
    out: list[Term] = []
    for poly, denoms in x.terms:
        comm: dict[ExponentVector, int] = {}
        for exps, coeff in poly.terms.items():
            c = coeff.at_one()
            if c:
                comm[exps] = comm.get(exps, 0) + c
        new_poly = LaurentPoly(
            {e: OmegaPoly.integer(c) for e, c in comm.items() if c}
        )
        out.append((new_poly, tuple(BinomialFactor(f.node, 0) for f in denoms)))
    return QuantumRational(out)


def classical_rationals_equal(
    seed: Seed, x: QuantumRational, y: QuantumRational
) -> bool:
    """Equality of commutative fractions by clearing all denominators."""
    cseed = classical_seed(seed)
    need: Counter = Counter()
    per_term: list[tuple[LaurentPoly, Counter, int]] = []
    for side, rational in ((1, x), (-1, y)):
        for poly, denoms in rational.terms:
            c = Counter(f.node for f in denoms)
            per_term.append((poly, c, side))
            for node, k in c.items():
                need[node] = max(need[node], k)
    total = LaurentPoly.zero()
    for poly, c, side in per_term:
        value = poly if side == 1 else -poly
        for node, k in need.items():
            missing = k - c.get(node, 0)
            for _ in range(missing):
                value = poly_mul(cseed, value, BinomialFactor(node, 0).as_poly())
        total = poly_add(total, value)
    return not total


def rationals_equal_commuting(
    seed: Seed, x: QuantumRational, y: QuantumRational
) -> bool:
    """Exact equality for fractions whose denominator factors all commute.

    Clears denominators over the right by multiplying each term with the
    factors it is missing from the union multiset; requires every pair of
    involved factors to commute (same node or exchange-orthogonal nodes).
    """
    factors: set[BinomialFactor] = set()
    counts: list[tuple[LaurentPoly, Counter, int]] = []
    need: Counter = Counter()
    for side, rational in ((1, x), (-1, y)):
        for poly, denoms in rational.terms:
            c = Counter(denoms)
            counts.append((poly, c, side))
            factors.update(denoms)
            for f, k in c.items():
                need[f] = max(need[f], k)
    pairs = list(factors)
    for i, f in enumerate(pairs):
        for g in pairs[i + 1:]:
            if not _factors_commute(seed, f, g):
                raise NormalizationError(
                    f"factors at {f.node} and {g.node} do not commute"
                )
    total = LaurentPoly.zero()
    for poly, c, side in counts:
        value = poly if side == 1 else -poly
        for f, k in need.items():
            for _ in range(k - c.get(f, 0)):
                value = poly_mul(seed, value, f.as_poly())
        total = poly_add(total, value)
    return not total


# -- consistency relations ---------------------------------------------------


Atom = tuple[LaurentPoly, int]  # (polynomial, +1 or -1)


def _word_invert(word: list[Atom]) -> list[Atom]:
    return [(p, -e) for p, e in reversed(word)]


def _image_word(seed: Seed, u: NodeId, p: LaurentPoly) -> list[Atom]:
    """The mutation image of a Laurent element as a product word.

    All per-monomial binomial tails share the variable X_u, so the term sum
    goes onto a common denominator made of the deepest tail.
    """
    transformed = nu_prime(seed, u, p)
    entries: list[tuple[ExponentVector, OmegaPoly, int]] = []
    alpha_min = 0
    for exps, coeff in transformed.terms.items():
        alpha = _alpha_int(seed, u, exps)
        alpha_min = min(alpha_min, alpha)
        entries.append((exps, coeff, alpha))
    _, common = fq_factors(u, alpha_min)
    numerator = LaurentPoly.zero()
    for exps, coeff, alpha in entries:
        num = LaurentPoly({exps: coeff})
        positive, negative = fq_factors(u, alpha)
        for f in positive:
            num = poly_mul(seed, num, f.as_poly())
        # multiply by the part of the common tail this term does not carry
        for f in common[len(negative):]:
            num = poly_mul(seed, num, f.as_poly())
        numerator = poly_add(numerator, num)
    word: list[Atom] = [(numerator, 1)]
    word.extend((f.as_poly(), -1) for f in common)
    return word


def _reduce_word(seed: Seed, word: list[Atom]) -> list[Atom]:
    """Greedy cancellation of adjacent inverse pairs via exact division."""
    one = LaurentPoly.one()
    items = [(p, e) for p, e in word if p != one]
    changed = True
    while changed and items:
        changed = False
        for i in range(len(items) - 1):
            (a, ea), (b, eb) = items[i], items[i + 1]
            if ea == 1 and eb == -1:
                q = right_divide(seed, a, b)
                if q is not None:
                    items[i: i + 2] = [] if q == one else [(q, 1)]
                    changed = True
                    break
            elif ea == -1 and eb == 1:
                q = left_divide(seed, a, b)
                if q is not None:
                    items[i: i + 2] = [] if q == one else [(q, 1)]
                    changed = True
                    break
            elif ea == 1 and eb == 1:
                prod = poly_mul(seed, a, b)
                items[i: i + 2] = [] if prod == one else [(prod, 1)]
                changed = True
                break
    return items


def check_relation(
    seed: Seed,
    mutation_word: Sequence[NodeId],
    expected_permutation: Optional[dict] = None,
) -> bool:
    """Verify that the composed mutation maps realize a relabeling.

    The word lists mutation nodes in firing order on seeds; the composed
    coordinate-change map (first-fired applied last, as maps) must send
    every generator X_v of the final seed to X_{sigma(v)} of the starting
    seed, where sigma defaults to the identity.  The final seed must equal
    the starting seed relabeled by sigma.  Raises NormalizationError when
    an intermediate fraction cannot be reduced.
    """
    sigma = {v: v for v in seed.nodes}
    if expected_permutation:
        sigma.update(expected_permutation)
    chain = [seed]
    for u in mutation_word:
        chain.append(mutate_sequence(chain[-1], [u]))
    final = chain[-1]
    if not seeds_equal(permute_seed(seed, sigma), final):
        return False
    for v in final.nodes:
        word: list[Atom] = [(LaurentPoly.x_var(v, 1), 1)]
        for stage in range(len(mutation_word) - 1, -1, -1):
            pre = chain[stage]
            u = mutation_word[stage]
            new_word: list[Atom] = []
            for poly, e in word:
                image = _image_word(pre, u, poly)
                new_word.extend(image if e == 1 else _word_invert(image))
            word = _reduce_word(pre, new_word)
        target = LaurentPoly.x_var(sigma[v], 1)
        remaining = _reduce_word(seed, [(target, -1)] + word)
        if remaining:
            raise NormalizationError(
                f"image of generator at {v} fails to reduce to the "
                f"generator at {sigma[v]}"
            )
    return True
