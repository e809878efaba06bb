"""Coordinate-change maps: factor transport, exact division, consistency.

Small two-node seeds give hand-checkable images; the square's triangulation
quiver exercises the maps on a realistic exchange matrix.  Seeded randomness
keeps the property checks reproducible.
"""

import random

import pytest

from fixture_surfaces import quad
from qsurf.coeff import HalfInt, OmegaPoly
from qsurf.mutation import (
    BinomialFactor,
    NormalizationError,
    QuantumRational,
    check_relation,
    classical_rational,
    classical_rationals_equal,
    fq_factors,
    is_laurent,
    left_divide,
    mu_q,
    normalize,
    nu_omega,
    nu_prime,
    nu_sharp,
    rational_add,
    rationals_equal_commuting,
    relabel_poly,
    right_divide,
    star_rational,
    theta_flip,
)
from qsurf.qtorus import (
    ExponentVector,
    LaurentPoly,
    commutation_exponent,
    pairing2,
    poly_mul,
    star,
)
from qsurf.quiver import Seed, mutate_sequence
from qsurf.surface import build_3triangulation_quiver, flip

RNG_SEED = 20260822

X = ExponentVector.x_units
xvar = LaurentPoly.x_var


def two_node(mult: int = 1, toward_w: bool = True) -> Seed:
    """Two mutable nodes with `mult` exchange arrows v->w (or w->v)."""
    pair = ("v", "w") if toward_w else ("w", "v")
    return Seed(["v", "w"], eps2={pair: 2 * mult})


def weyl(spec: dict) -> LaurentPoly:
    return LaurentPoly({X(spec): OmegaPoly.one()})


def quad_seed() -> Seed:
    seed, _ = build_3triangulation_quiver(quad())
    return seed


# -- binomial factors ---------------------------------------------------------


def test_fq_factors_zero_is_empty():
    assert fq_factors("v", 0) == ([], [])


def test_fq_factors_positive_ladder():
    positive, negative = fq_factors("v", 3)
    assert negative == []
    assert positive == [
        BinomialFactor.from_q("v", 1),
        BinomialFactor.from_q("v", 3),
        BinomialFactor.from_q("v", 5),
    ]


def test_fq_factors_negative_ladder():
    positive, negative = fq_factors("v", -2)
    assert positive == []
    assert negative == [
        BinomialFactor.from_q("v", -1),
        BinomialFactor.from_q("v", -3),
    ]


def test_binomial_factor_from_q_phase():
    f = BinomialFactor.from_q("v", -1)
    assert f.phase2 == -18
    assert f.qexp == HalfInt(-2)  # exponent -1 in doubled storage


def test_binomial_factor_as_poly():
    f = BinomialFactor.from_q("v", 1)
    assert f.as_poly() == LaurentPoly(
        {ExponentVector.zero(): OmegaPoly.one(), X({"v": 1}): OmegaPoly.q_power(1)}
    )


def test_binomial_factor_conjugation_defining_relation():
    # f * [Z^a] == [Z^a] * conjugated(f)
    seed = two_node(mult=2)
    f = BinomialFactor.from_q("w", 1)
    exps = X({"v": 2, "w": -1})
    g = f.conjugated_past(seed, exps)
    m = LaurentPoly({exps: OmegaPoly.one()})
    assert poly_mul(seed, f.as_poly(), m) == poly_mul(seed, m, g.as_poly())


def test_binomial_factor_star_matches_poly_star():
    seed = two_node()
    f = BinomialFactor("w", 7)
    assert f.star().phase2 == -7
    assert f.star().as_poly() == star(seed, f.as_poly())


# -- the monomial layer -------------------------------------------------------


def test_monomial_layer_inverts_the_pivot():
    for toward_w in (True, False):
        seed = two_node(toward_w=toward_w)
        assert nu_prime(seed, "v", xvar("v", 1)) == xvar("v", -1)


def test_monomial_layer_fixes_upstream_neighbor():
    # no arrows INTO the pivot from w, so X_w is untouched
    seed = two_node(toward_w=True)
    assert nu_prime(seed, "v", xvar("w", 1)) == xvar("w", 1)


def test_monomial_layer_attaches_pivot_to_downstream_neighbor():
    # one arrow w -> v contributes one pivot unit per w unit
    seed = two_node(toward_w=False)
    assert nu_prime(seed, "v", xvar("w", 1)) == weyl({"w": 1, "v": 1})
    seed2 = two_node(mult=2, toward_w=False)
    assert nu_prime(seed2, "v", xvar("w", 1)) == weyl({"w": 1, "v": 2})


def test_monomial_layer_is_multiplicative():
    from qsurf.balance import transform_exponents

    pre = quad_seed()
    u = "t7:t"
    post = mutate_sequence(pre, [u])
    rng = random.Random(RNG_SEED)
    nodes = pre.nodes
    for _ in range(60):
        a = ExponentVector({v: rng.randrange(-6, 7) for v in nodes})
        b = ExponentVector({v: rng.randrange(-6, 7) for v in nodes})
        # the exponent transform preserves the commutation pairing ...
        ta = transform_exponents(pre, u, a)
        tb = transform_exponents(pre, u, b)
        assert pairing2(pre, ta, tb) == pairing2(post, a, b)
        # ... which makes the induced map a homomorphism
        ma = LaurentPoly({a: OmegaPoly.one()})
        mb = LaurentPoly({b: OmegaPoly.one()})
        lhs = nu_prime(pre, u, poly_mul(post, ma, mb))
        rhs = poly_mul(pre, nu_prime(pre, u, ma), nu_prime(pre, u, mb))
        assert lhs == rhs


# -- the automorphism layer ---------------------------------------------------


def test_automorphism_layer_identity_at_zero_weight():
    seed = two_node()
    p = xvar("v", 1)  # the pivot itself commutes with itself
    assert nu_sharp(seed, "v", p).terms == ((p, ()),)


def test_automorphism_layer_rejects_unbalanced_input():
    seed = two_node()
    third = LaurentPoly({ExponentVector({"w": 1}): OmegaPoly.one()})
    with pytest.raises(NormalizationError, match="not balanced"):
        nu_sharp(seed, "v", third)


def test_automorphism_layer_positive_weight_multiplies_ladder():
    seed = two_node(toward_w=True)  # weight of X_w at pivot v is +1
    result = nu_sharp(seed, "v", xvar("w", 1))
    expected = poly_mul(
        seed, xvar("w", 1), BinomialFactor.from_q("v", 1).as_poly()
    )
    assert result.terms == ((expected, ()),)


# -- the full mutation map ----------------------------------------------------


def test_mutation_inverts_pivot_exactly():
    for mult in (1, 2):
        for toward_w in (True, False):
            seed = two_node(mult=mult, toward_w=toward_w)
            y = nu_omega(seed, "v", xvar("v", 1))
            assert is_laurent(seed, y) == xvar("v", -1)


def test_mutation_of_upstream_neighbor_is_polynomial():
    for mult in (1, 2):
        seed = two_node(mult=mult, toward_w=True)
        y = nu_omega(seed, "v", xvar("w", 1))
        expected = xvar("w", 1)
        for r in range(1, mult + 1):
            expected = poly_mul(
                seed, expected, BinomialFactor.from_q("v", 2 * r - 1).as_poly()
            )
        assert is_laurent(seed, y) == expected


def test_mutation_of_downstream_neighbor_is_a_right_fraction():
    seed = two_node(toward_w=False)
    y = nu_omega(seed, "v", xvar("w", 1))
    assert len(y.terms) == 1
    num, denoms = y.terms[0]
    # [X_w X_v] * (1 + q^-1 X_v)^-1, with a plain symmetric-ordered numerator
    assert num == weyl({"w": 1, "v": 1})
    assert denoms == (BinomialFactor.from_q("v", -1),)


def test_mutation_of_downstream_neighbor_double_arrow():
    seed = two_node(mult=2, toward_w=False)
    y = nu_omega(seed, "v", xvar("w", 1))
    assert len(y.terms) == 1
    num, denoms = y.terms[0]
    assert num == weyl({"w": 1, "v": 2})
    assert denoms == (
        BinomialFactor.from_q("v", -1),
        BinomialFactor.from_q("v", -3),
    )


def test_mutation_rejects_frozen_pivot():
    seed = Seed(["v", "w"], frozen=["v"], eps2={("v", "w"): 2})
    with pytest.raises(ValueError, match="frozen"):
        nu_omega(seed, "v", xvar("w", 1))


def test_mutation_transports_same_node_denominator():
    # going back through the mutation, a pivot-variable denominator inverts
    # cleanly and the round trip recovers the generator
    seed = two_node(toward_w=False)
    post = mutate_sequence(seed, ["v"])
    y = nu_omega(seed, "v", xvar("w", 1))
    assert y.terms[0][1]  # the image genuinely carries a denominator
    z = nu_omega(post, "v", y)
    assert is_laurent(post, z) == xvar("w", 1)


def test_mutation_rejects_noncommuting_denominator():
    seed = quad_seed()
    bad = QuantumRational(
        [(xvar("B:1", 1), (BinomialFactor.from_q("t7:t", -1),))]
    )
    # B:1 is exchange-coupled to t7:t, so mutating at B:1's neighbor D:1 is
    # fine, but mutating at a node coupled to the denominator's node is not
    with pytest.raises(NormalizationError, match="does not commute"):
        nu_omega(seed, "D:1", bad)


def test_mutation_twice_is_the_identity():
    seed = quad_seed()
    rng = random.Random(RNG_SEED)
    for u in ("t7:t", "D:1"):
        post = mutate_sequence(seed, [u])
        count = 0
        while count < 50:
            exps = ExponentVector(
                {v: rng.randrange(-4, 5) for v in seed.nodes if rng.random() < 0.6}
            )
            if not commutation_exponent(seed, u, exps).is_integer:
                continue
            count += 1
            m = LaurentPoly({exps: OmegaPoly.one()})
            y = nu_omega(post, u, m)
            z = nu_omega(seed, u, y)
            assert is_laurent(seed, z) == m


def test_mutation_is_multiplicative_on_polynomial_images():
    seed = quad_seed()
    u = "t7:t"
    post = mutate_sequence(seed, [u])
    rng = random.Random(RNG_SEED)
    done = 0
    while done < 25:
        a = ExponentVector({v: 3 * rng.randrange(-1, 2) for v in seed.nodes})
        b = ExponentVector({v: 3 * rng.randrange(-1, 2) for v in seed.nodes})
        ma = LaurentPoly({a: OmegaPoly.one()})
        mb = LaurentPoly({b: OmegaPoly.one()})
        la = is_laurent(seed, nu_omega(seed, u, ma))
        lb = is_laurent(seed, nu_omega(seed, u, mb))
        if la is None or lb is None:
            continue
        done += 1
        product = poly_mul(post, ma, mb)
        lab = is_laurent(seed, nu_omega(seed, u, product))
        assert lab == poly_mul(seed, la, lb)


# -- exact division -----------------------------------------------------------


def _random_poly(rng: random.Random, nodes, terms: int) -> LaurentPoly:
    out = {}
    for _ in range(terms):
        exps = ExponentVector(
            {v: rng.randrange(-3, 4) for v in nodes if rng.random() < 0.5}
        )
        out[exps] = OmegaPoly.omega(2 * rng.randrange(-6, 7), rng.choice([1, -1, 2]))
    return LaurentPoly(out)


def test_division_round_trips():
    seed = quad_seed()
    rng = random.Random(RNG_SEED)
    nodes = seed.nodes[:5]
    done = 0
    while done < 40:
        p = _random_poly(rng, nodes, 2)
        d = _random_poly(rng, nodes, 2)
        if not p or not d:
            continue
        done += 1
        assert right_divide(seed, poly_mul(seed, p, d), d) == p
        assert left_divide(seed, d, poly_mul(seed, d, p)) == p


def test_division_detects_inexact():
    seed = quad_seed()
    d = BinomialFactor.from_q("t7:t", 0).as_poly()
    assert right_divide(seed, xvar("B:1", 1), d) is None
    assert left_divide(seed, d, xvar("B:1", 1)) is None


def test_division_by_zero_raises():
    seed = quad_seed()
    with pytest.raises(ZeroDivisionError):
        right_divide(seed, xvar("B:1", 1), LaurentPoly.zero())


# -- normalization ------------------------------------------------------------


def test_normalize_cancels_matching_right_factor():
    seed = quad_seed()
    f = BinomialFactor.from_q("t7:t", 1)
    p = xvar("B:1", 1) + xvar("C:2", -1)
    num = poly_mul(seed, p, f.as_poly())
    reduced = normalize(seed, QuantumRational([(num, (f,))]))
    assert reduced.terms == ((p, ()),)


def test_normalize_cancels_nested_same_node_factors():
    seed = quad_seed()
    f = BinomialFactor.from_q("t7:t", -1)
    g = BinomialFactor.from_q("t7:t", 1)
    p = xvar("A:1", 1)
    num = poly_mul(seed, poly_mul(seed, p, g.as_poly()), f.as_poly())
    reduced = normalize(seed, QuantumRational([(num, (f, g))]))
    assert reduced.terms == ((p, ()),)


def test_normalize_merges_terms_with_equal_denominators():
    seed = quad_seed()
    f = BinomialFactor.from_q("D:1", -1)
    x = QuantumRational([(xvar("B:1", 1), (f,)), (xvar("B:2", 1), (f,))])
    reduced = normalize(seed, x)
    assert reduced.terms == ((xvar("B:1", 1) + xvar("B:2", 1), (f,)),)


def test_normalize_detects_zero():
    seed = quad_seed()
    f = BinomialFactor.from_q("D:1", -1)
    x = QuantumRational([(xvar("B:1", 1), (f,)), (-xvar("B:1", 1), (f,))])
    assert normalize(seed, x).is_zero()
    assert is_laurent(seed, x) == LaurentPoly.zero()


def test_rational_add_concatenates():
    seed = quad_seed()
    x = QuantumRational.from_laurent(xvar("B:1", 1))
    y = QuantumRational.from_laurent(xvar("B:2", 1))
    assert is_laurent(seed, rational_add(x, y)) == xvar("B:1", 1) + xvar("B:2", 1)


# -- fraction equality helpers ------------------------------------------------


def test_commuting_fraction_equality_pads_denominators():
    seed = Seed(["v", "w"])  # no arrows: everything commutes
    f = BinomialFactor.from_q("v", 0)
    g = BinomialFactor.from_q("w", 0)
    p = xvar("v", 1)
    x = QuantumRational([(poly_mul(seed, p, g.as_poly()), (f, g))])
    y = QuantumRational([(p, (f,))])
    assert rationals_equal_commuting(seed, x, y)
    assert not rationals_equal_commuting(seed, x, QuantumRational([(p, (g,))]))


def test_commuting_fraction_equality_rejects_coupled_factors():
    seed = quad_seed()
    x = QuantumRational([(xvar("A:1", 1), (BinomialFactor.from_q("t7:t", 1),))])
    y = QuantumRational([(xvar("A:1", 1), (BinomialFactor.from_q("B:1", 1),))])
    with pytest.raises(NormalizationError, match="do not commute"):
        rationals_equal_commuting(seed, x, y)


# -- the star involution ------------------------------------------------------


def test_star_of_mutation_image_is_involutive():
    seed = two_node(toward_w=False)
    y = nu_omega(seed, "v", xvar("w", 1))
    twice = star_rational(seed, star_rational(seed, y))
    assert rationals_equal_commuting(seed, twice, y)


def test_star_commutes_with_mutation():
    # the image of a self-adjoint monomial is self-adjoint
    seed = two_node(mult=2, toward_w=False)
    y = nu_omega(seed, "v", xvar("w", 1))
    assert rationals_equal_commuting(seed, star_rational(seed, y), y)


# -- integral-exponent mutation and the commutative limit ---------------------


def test_integral_mutation_rejects_fractional_exponents():
    seed = two_node()
    third = LaurentPoly({ExponentVector({"w": 1}): OmegaPoly.one()})
    with pytest.raises(ValueError, match="not integral"):
        mu_q(seed, "v", third)


def test_integral_mutation_classical_limit_downstream():
    seed = two_node(toward_w=False)
    y = classical_rational(seed, mu_q(seed, "v", xvar("w", 1)))
    expected = QuantumRational(
        [(weyl({"w": 1, "v": 1}), (BinomialFactor("v", 0),))]
    )
    assert classical_rationals_equal(seed, y, expected)


def test_integral_mutation_classical_limit_upstream():
    seed = two_node(toward_w=True)
    y = classical_rational(seed, mu_q(seed, "v", xvar("w", 1)))
    expected = QuantumRational.from_laurent(
        weyl({"w": 1}) + weyl({"w": 1, "v": 1})
    )
    assert classical_rationals_equal(seed, y, expected)


# -- composed-mutation relations ----------------------------------------------


def test_relation_involution_two_nodes():
    seed = two_node()
    assert check_relation(seed, ["v", "v"])


def test_relation_commuting_square():
    seed = Seed(["v", "w"])
    assert check_relation(seed, ["v", "w", "v", "w"])


def test_relation_pentagon():
    seed = two_node()
    assert check_relation(seed, ["v", "w", "v", "w", "v"], {"v": "w", "w": "v"})


def test_relation_rejects_wrong_permutation():
    seed = two_node()
    assert not check_relation(seed, ["v", "w", "v", "w", "v"])


def test_relation_rejects_incomplete_word():
    seed = two_node()
    assert not check_relation(seed, ["v"])


def test_relation_involution_on_surface_quiver():
    seed = quad_seed()
    assert check_relation(seed, ["t7:t", "t7:t"])


# -- the four-step flip map ---------------------------------------------------


def test_flip_map_fixes_the_unit():
    T = quad()
    _, ctx, _ = flip(T, "D")
    image = theta_flip(T, ctx, LaurentPoly.one())
    seed, _ = build_3triangulation_quiver(T)
    assert is_laurent(seed, image) == LaurentPoly.one()


def test_flip_map_generator_images():
    T = quad()
    _, ctx, _ = flip(T, "D")
    seed, _ = build_3triangulation_quiver(T)

    def denom_nodes(image):
        return sorted({f.node for _, denoms in image.terms for f in denoms})

    # the flipped diagonal's own nodes: one fraction with a same-node tail
    assert denom_nodes(theta_flip(T, ctx, xvar("D:1", 1))) == ["D:1"]
    assert denom_nodes(theta_flip(T, ctx, xvar("D:2", 1))) == ["D:2"]
    # corner nodes next to the diagonal: denominators only in diagonal nodes
    assert denom_nodes(theta_flip(T, ctx, xvar("B:1", 1))) == ["D:1"]
    assert denom_nodes(theta_flip(T, ctx, xvar("A:1", 1))) == ["D:2"]
    # a corner on the polynomial side comes out denominator-free
    image = theta_flip(T, ctx, xvar("E:2", 1))
    laurent = is_laurent(seed, image)
    assert laurent is not None and len(laurent) == 2


def test_flip_map_reports_unrepresentable_generator():
    # a face generator's image needs denominators that do not commute with
    # later pivots; the map reports that honestly instead of guessing
    T = quad()
    _, ctx, _ = flip(T, "D")
    with pytest.raises(NormalizationError, match="does not commute"):
        theta_flip(T, ctx, xvar("t7:t", 1))


# -- small helpers ------------------------------------------------------------


def test_relabel_poly_renames_exponents():
    p = weyl({"v": 1, "w": -2})
    assert relabel_poly(p, {"v": "a", "w": "b"}) == weyl({"a": 1, "b": -2})
