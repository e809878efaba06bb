"""Exact coefficient arithmetic for the cube-root quantum torus.

Everything is scaled-integer: half-integers are stored doubled, third-integers
tripled, and coefficients are sparse integer Laurent polynomials in a formal
square root of the deformation parameter.  The deformation parameter itself is
the ninth power of that square root's square (``q = w^9`` where ``w`` is the
cube-root variable), so a single integer grading in ``w^{1/2}`` carries every
exponent that can appear.  No floats anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Iterator, Mapping

__all__ = [
    "HalfInt",
    "ThirdInt",
    "OmegaPoly",
    "ring_add",
    "ring_mul",
    "quantum_integer",
    "coeff_star",
    "format_half",
    "format_third",
]


def _format_scaled(numer: int, denom: int) -> str:
    """Render numer/denom as a reduced fraction string ("0", "2", "-7/2")."""
    if numer == 0:
        return "0"
    g = gcd(abs(numer), denom)
    n, d = numer // g, denom // g
    return str(n) if d == 1 else f"{n}/{d}"


def format_half(doubled: int) -> str:
    return _format_scaled(doubled, 2)


def format_third(tripled: int) -> str:
    return _format_scaled(tripled, 3)


@dataclass(frozen=True, order=True)
class HalfInt:
    """An element of (1/2)Z stored as its double."""

    doubled: int

    @staticmethod
    def of(value: int) -> "HalfInt":
        return HalfInt(2 * value)

    @property
    def is_integer(self) -> bool:
        return self.doubled % 2 == 0

    def as_int(self) -> int:
        if not self.is_integer:
            raise ValueError(f"{self} is not an integer")
        return self.doubled // 2

    def __add__(self, other: "HalfInt") -> "HalfInt":
        return HalfInt(self.doubled + other.doubled)

    def __sub__(self, other: "HalfInt") -> "HalfInt":
        return HalfInt(self.doubled - other.doubled)

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.doubled)

    def __str__(self) -> str:
        return format_half(self.doubled)


@dataclass(frozen=True, order=True)
class ThirdInt:
    """An element of (1/3)Z stored as its triple."""

    tripled: int

    @staticmethod
    def of(value: int) -> "ThirdInt":
        return ThirdInt(3 * value)

    @property
    def is_integer(self) -> bool:
        return self.tripled % 3 == 0

    def as_int(self) -> int:
        if not self.is_integer:
            raise ValueError(f"{self} is not an integer")
        return self.tripled // 3

    def __add__(self, other: "ThirdInt") -> "ThirdInt":
        return ThirdInt(self.tripled + other.tripled)

    def __sub__(self, other: "ThirdInt") -> "ThirdInt":
        return ThirdInt(self.tripled - other.tripled)

    def __neg__(self) -> "ThirdInt":
        return ThirdInt(-self.tripled)

    def __str__(self) -> str:
        return format_third(self.tripled)


class OmegaPoly:
    """Integer Laurent polynomial in the half-power of the cube-root parameter.

    Keys are doubled exponents (so the monomial ``w^{k/2}`` is stored under
    ``k``); values are nonzero integers.  Instances are immutable and hashable;
    all constructors trim zero coefficients.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        data: dict[int, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for exp, coeff in items:
            if coeff:
                data[exp] = data.get(exp, 0) + coeff
                if not data[exp]:
                    del data[exp]
        object.__setattr__(self, "_terms", dict(sorted(data.items(), reverse=True)))

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "OmegaPoly":
        return _ZERO

    @staticmethod
    def one() -> "OmegaPoly":
        return _ONE

    @staticmethod
    def omega(doubled: int, coeff: int = 1) -> "OmegaPoly":
        """coeff * w^{doubled/2}."""
        return OmegaPoly({doubled: coeff})

    @staticmethod
    def integer(n: int) -> "OmegaPoly":
        return OmegaPoly({0: n})

    @staticmethod
    def q_power(k: int) -> "OmegaPoly":
        """q^k where q = w^9 (doubled exponent 18k)."""
        return OmegaPoly({18 * k: 1})

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> Mapping[int, int]:
        return self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self._terms.items())

    def is_single_term(self) -> bool:
        return len(self._terms) == 1

    def single_term(self) -> tuple[int, int]:
        """Return (doubled exponent, coefficient); requires exactly one term."""
        if len(self._terms) != 1:
            raise ValueError(f"not a single term: {self}")
        return next(iter(self._terms.items()))

    def constant_value(self) -> int:
        """The value as a plain integer; requires no nontrivial powers."""
        if not self._terms:
            return 0
        if set(self._terms) != {0}:
            raise ValueError(f"not a constant: {self}")
        return self._terms[0]

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "OmegaPoly") -> "OmegaPoly":
        if not self._terms:
            return other
        if not other._terms:
            return self
        data = dict(self._terms)
        for exp, coeff in other._terms.items():
            data[exp] = data.get(exp, 0) + coeff
            if not data[exp]:
                del data[exp]
        return OmegaPoly(data)

    def __neg__(self) -> "OmegaPoly":
        return OmegaPoly({e: -c for e, c in self._terms.items()})

    def __sub__(self, other: "OmegaPoly") -> "OmegaPoly":
        return self + (-other)

    def __mul__(self, other: "OmegaPoly") -> "OmegaPoly":
        if not self._terms or not other._terms:
            return _ZERO
        data: dict[int, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = e1 + e2
                data[e] = data.get(e, 0) + c1 * c2
        return OmegaPoly(data)

    def scale(self, n: int) -> "OmegaPoly":
        if n == 0:
            return _ZERO
        return OmegaPoly({e: n * c for e, c in self._terms.items()})

    def shift(self, doubled: int) -> "OmegaPoly":
        """Multiply by w^{doubled/2}."""
        if doubled == 0:
            return self
        return OmegaPoly({e + doubled: c for e, c in self._terms.items()})

    def star(self) -> "OmegaPoly":
        """Coefficient conjugation of the anti-involution: w^{1/2} -> w^{-1/2}."""
        return OmegaPoly({-e: c for e, c in self._terms.items()})

    def at_one(self) -> int:
        """Evaluate at w^{1/2} = 1 (classicalization of the coefficient)."""
        return sum(self._terms.values())

    def divides_exactly(self, divisor_exp: int, divisor_coeff: int) -> "OmegaPoly | None":
        """Divide by coeff*w^{exp/2} if every coefficient divides exactly."""
        if divisor_coeff == 0:
            raise ZeroDivisionError
        data = {}
        for e, c in self._terms.items():
            if c % divisor_coeff:
                return None
            data[e - divisor_exp] = c // divisor_coeff
        return OmegaPoly(data)

    # -- identity -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, OmegaPoly) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    # -- rendering ----------------------------------------------------------

    def render(self) -> str:
        """Canonical text: terms by decreasing exponent, 'w^{p/2}' powers."""
        if not self._terms:
            return "0"
        parts: list[str] = []
        for exp, coeff in self._terms.items():
            mag = abs(coeff)
            if exp == 0:
                body = str(mag)
            else:
                power = f"w^{{{format_half(exp)}}}"
                body = power if mag == 1 else f"{mag}*{power}"
            if not parts:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"OmegaPoly({self.render()})"


_ZERO = OmegaPoly()
_ONE = OmegaPoly({0: 1})


def ring_add(a: OmegaPoly, b: OmegaPoly) -> OmegaPoly:
    return a + b


def ring_mul(a: OmegaPoly, b: OmegaPoly) -> OmegaPoly:
    return a * b


def quantum_integer(n: int) -> OmegaPoly:
    """The balanced q-integer: sum of q^{n-1-2j} for j = 0..n-1 (n >= 0)."""
    if n < 0:
        raise ValueError("quantum_integer requires n >= 0")
    return OmegaPoly({18 * (n - 1 - 2 * j): 1 for j in range(n)})


def coeff_star(a: OmegaPoly) -> OmegaPoly:
    return a.star()
