"""Exact arithmetic in the truncated Novikov field.

A series is a finite sum of terms ``a * q**e`` with exact rational exponent
``e`` and Gaussian-rational coefficient ``a``, together with a truncation
exponent ``trunc``: the series is known modulo ``q**trunc``.  Every operation
computes the truncation it can actually guarantee for its result, so a series
never claims more precision than the inputs support.  ``trunc`` may be
``INFINITY``, in which case the series is exact (a finite sum, nothing hidden
in the tail).

Equality (``==``) is equality of the stored terms in the same truncation
context.  Use :meth:`NovikovSeries.agrees_with` to compare two series modulo
the weaker of their truncations.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

__all__ = [
    "INFINITY",
    "Exponent",
    "GaussianRational",
    "NovikovSeries",
    "SeriesNorm",
    "ConvergenceCertificate",
    "exp",
    "polydisc_contains",
    "converges_on",
]

#: Exponents (and truncations) are exact rationals; +infinity is the valuation
#: of the zero series and the truncation of an exact series.
Exponent = Fraction
INFINITY = math.inf

_RationalLike = Union[int, Fraction]


def _is_inf(x) -> bool:
    return isinstance(x, float) and math.isinf(x)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


class GaussianRational:
    """An element of Q(i), stored as an exact pair (real, imaginary)."""

    __slots__ = ("re", "im")

    def __init__(self, re: _RationalLike = 0, im: _RationalLike = 0):
        self.re = _as_fraction(re)
        self.im = _as_fraction(im)

    @staticmethod
    def coerce(x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussianRational(x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to GaussianRational")

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = GaussianRational(other)
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __add__(self, other) -> "GaussianRational":
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other) -> "GaussianRational":
        return self + (-GaussianRational.coerce(other))

    def __rsub__(self, other) -> "GaussianRational":
        return GaussianRational.coerce(other) + (-self)

    def __mul__(self, other) -> "GaussianRational":
        other = GaussianRational.coerce(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def inverse(self) -> "GaussianRational":
        n = self.re * self.re + self.im * self.im
        if not n:
            raise ZeroDivisionError("inverse of zero in Q(i)")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other) -> "GaussianRational":
        return self * GaussianRational.coerce(other).inverse()

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __repr__(self) -> str:
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}*i)"


_GR_ZERO = GaussianRational(0)
_GR_ONE = GaussianRational(1)


def _min_trunc(a, b):
    return a if a <= b else b


class NovikovSeries:
    """Finite sum of ``coeff * q**exponent`` terms, known modulo ``q**trunc``.

    Invariants: stored exponents are strictly increasing, all below ``trunc``,
    and no stored coefficient is zero.
    """

    __slots__ = ("terms", "trunc")

    def __init__(self, terms: Iterable[tuple[Fraction, GaussianRational]], trunc):
        cleaned = {}
        for e, c in terms:
            e = _as_fraction(e) if not isinstance(e, Fraction) else e
            c = GaussianRational.coerce(c)
            if e in cleaned:
                c = cleaned[e] + c
            if c:
                cleaned[e] = c
            elif e in cleaned:
                del cleaned[e]
        if not _is_inf(trunc):
            trunc = _as_fraction(trunc)
            cleaned = {e: c for e, c in cleaned.items() if e < trunc}
        self.terms = tuple(sorted(cleaned.items()))
        self.trunc = trunc

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(trunc=INFINITY) -> "NovikovSeries":
        return NovikovSeries((), trunc)

    @staticmethod
    def one(trunc=INFINITY) -> "NovikovSeries":
        return NovikovSeries([(Fraction(0), _GR_ONE)], trunc)

    @staticmethod
    def q_power(exponent, trunc=INFINITY) -> "NovikovSeries":
        return NovikovSeries([(_as_fraction(exponent), _GR_ONE)], trunc)

    @staticmethod
    def scalar(value, trunc=INFINITY) -> "NovikovSeries":
        return NovikovSeries([(Fraction(0), GaussianRational.coerce(value))], trunc)

    @staticmethod
    def coerce(x, trunc=INFINITY) -> "NovikovSeries":
        if isinstance(x, NovikovSeries):
            return x
        if isinstance(x, (int, Fraction, GaussianRational)):
            return NovikovSeries.scalar(x, trunc)
        raise TypeError(f"cannot coerce {type(x).__name__} to NovikovSeries")

    # -- basic queries -----------------------------------------------------

    def is_storage_zero(self) -> bool:
        """True when no terms are stored (the series is 0 modulo q**trunc)."""
        return not self.terms

    def val(self):
        """Least stored exponent; +infinity for the (stored) zero series."""
        return self.terms[0][0] if self.terms else INFINITY

    def val_floor(self):
        """A certified lower bound for the valuation of the true series."""
        return self.terms[0][0] if self.terms else self.trunc

    def norm(self) -> "SeriesNorm":
        return SeriesNorm(self.val())

    def leading_coefficient(self) -> GaussianRational:
        if not self.terms:
            raise ZeroDivisionError("zero series has no leading coefficient")
        return self.terms[0][1]

    def coefficient(self, exponent) -> GaussianRational:
        exponent = _as_fraction(exponent)
        for e, c in self.terms:
            if e == exponent:
                return c
        return _GR_ZERO

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = NovikovSeries.scalar(other, self.trunc)
        if not isinstance(other, NovikovSeries):
            return NotImplemented
        return self.terms == other.terms and self.trunc == other.trunc

    def __hash__(self):
        return hash((self.terms, self.trunc))

    def agrees_with(self, other: "NovikovSeries") -> bool:
        """Equality modulo q**E where E is the weaker of the two truncations."""
        cut = _min_trunc(self.trunc, other.trunc)
        return self.truncate(cut).terms == other.truncate(cut).terms

    def truncate(self, new_trunc) -> "NovikovSeries":
        if not _is_inf(new_trunc):
            new_trunc = _as_fraction(new_trunc)
        cut = _min_trunc(self.trunc, new_trunc)
        return NovikovSeries(self.terms, cut)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "NovikovSeries":
        other = NovikovSeries.coerce(other, self.trunc)
        return NovikovSeries(
            self.terms + other.terms, _min_trunc(self.trunc, other.trunc)
        )

    __radd__ = __add__

    def __neg__(self) -> "NovikovSeries":
        return NovikovSeries([(e, -c) for e, c in self.terms], self.trunc)

    def __sub__(self, other) -> "NovikovSeries":
        return self + (-NovikovSeries.coerce(other, self.trunc))

    def __rsub__(self, other) -> "NovikovSeries":
        return NovikovSeries.coerce(other, self.trunc) + (-self)

    def __mul__(self, other) -> "NovikovSeries":
        other = NovikovSeries.coerce(other, self.trunc)
        # The unknown tail of each factor enters the product shifted by the
        # other factor's valuation, which bounds the guaranteed truncation.
        trunc = _min_trunc(
            self.trunc + other.val_floor() if not _is_inf(self.trunc) else INFINITY,
            other.trunc + self.val_floor() if not _is_inf(other.trunc) else INFINITY,
        )
        acc: dict[Fraction, GaussianRational] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = e1 + e2
                if not _is_inf(trunc) and e >= trunc:
                    continue
                c = c1 * c2
                if e in acc:
                    c = acc[e] + c
                if c:
                    acc[e] = c
                elif e in acc:
                    del acc[e]
        return NovikovSeries(acc.items(), trunc)

    __rmul__ = __mul__

    def invert(self) -> "NovikovSeries":
        """Multiplicative inverse, guaranteed modulo q**(trunc - 2*val)."""
        if not self.terms:
            if _is_inf(self.trunc):
                raise ZeroDivisionError("inverse of the zero series")
            raise ZeroDivisionError(
                f"series is zero modulo q^{self.trunc}; its inverse is undetermined"
            )
        v, lead = self.terms[0]
        if len(self.terms) == 1:
            trunc = INFINITY if _is_inf(self.trunc) else self.trunc - 2 * v
            return NovikovSeries([(-v, lead.inverse())], trunc)
        if _is_inf(self.trunc):
            raise ValueError(
                "inverse of a multi-term exact series is an infinite series; "
                "truncate() it first"
            )
        trunc = self.trunc - 2 * v
        # self = lead * q^v * (1 + u) with val(u) > 0; invert the unit part
        # by a geometric sum out to exponent trunc + v.
        lead_inv = lead.inverse()
        need = trunc + v
        u = NovikovSeries(
            [(e - v, c * lead_inv) for e, c in self.terms[1:]], need
        )
        unit_inv = NovikovSeries.one(need)
        power = NovikovSeries.one(need)
        step = u.val()
        k = 1
        while k * step < need:
            power = power * u
            if not power:
                break
            unit_inv = unit_inv + (power if k % 2 == 0 else -power)
            k += 1
        return NovikovSeries(
            [(e - v, c * lead_inv) for e, c in unit_inv.terms], trunc
        )

    def __truediv__(self, other) -> "NovikovSeries":
        return self * NovikovSeries.coerce(other, self.trunc).invert()

    def __repr__(self) -> str:
        if not self.terms:
            body = "0"
        else:
            parts = []
            for e, c in self.terms:
                if e == 0:
                    parts.append(f"{c!r}")
                else:
                    parts.append(f"({c!r})q^{e}")
            body = " + ".join(parts)
        tail = "" if _is_inf(self.trunc) else f" + O(q^{self.trunc})"
        return body + tail


class SeriesNorm:
    """The norm e**(-val), kept symbolic so comparisons stay exact."""

    __slots__ = ("neg_log",)

    def __init__(self, val):
        self.neg_log = val  # the norm is e**(-neg_log)

    def __float__(self) -> float:
        if _is_inf(self.neg_log):
            return 0.0
        return math.exp(-self.neg_log)

    def __eq__(self, other) -> bool:
        if other == 0:
            return _is_inf(self.neg_log)
        if other == 1:
            return self.neg_log == 0
        if isinstance(other, SeriesNorm):
            return self.neg_log == other.neg_log
        return NotImplemented

    def __hash__(self):
        return hash(("SeriesNorm", self.neg_log))

    def __le__(self, other: "SeriesNorm") -> bool:
        return self.neg_log >= other.neg_log

    def __lt__(self, other: "SeriesNorm") -> bool:
        return self.neg_log > other.neg_log

    def __mul__(self, other: "SeriesNorm") -> "SeriesNorm":
        return SeriesNorm(self.neg_log + other.neg_log)

    def __repr__(self) -> str:
        if _is_inf(self.neg_log):
            return "0"
        return f"e^(-{self.neg_log})"


def exp(s: NovikovSeries) -> NovikovSeries:
    """Exponential sum(s**k / k!), defined for positive-valuation input.

    The result has valuation 0 and leading coefficient 1.
    """
    v = s.val_floor()
    if not _is_inf(v) and v <= 0:
        raise ValueError(f"exp requires positive valuation, got val >= {v}")
    if not s.terms:
        return NovikovSeries.one(s.trunc)
    trunc = s.trunc
    result = NovikovSeries.one(trunc)
    power = NovikovSeries.one(trunc)
    factorial = 1
    k = 1
    v = s.val()
    while _is_inf(trunc) or k * v < trunc:
        power = power * s
        if not power:
            break
        factorial *= k
        result = result + power * GaussianRational(Fraction(1, factorial))
        k += 1
        if _is_inf(trunc) and k > 1:
            raise ValueError(
                "exp of an exact (untruncated) series is an infinite series; "
                "truncate() it first"
            )
    return result


def polydisc_contains(bounds: Sequence, points: Sequence[NovikovSeries]) -> bool:
    """Whether val(x_i) >= b_i holds in every coordinate."""
    if len(bounds) != len(points):
        raise ValueError(
            f"dimension mismatch: {len(bounds)} bounds vs {len(points)} coordinates"
        )
    for b, x in zip(bounds, points):
        if x.val() < _as_fraction(b):
            return False
    return True


class ConvergenceCertificate:
    """Finite support data plus an optional affine bound on the omitted tail.

    ``support`` maps lattice exponents (integer tuples) to coefficients; the
    optional ``tail`` is a pair (alpha, beta) certifying
    val(f_nu) >= alpha*|nu|_1 + beta for every nu outside the support.
    """

    def __init__(self, support: dict, tail: tuple | None = None):
        self.support = {
            tuple(int(i) for i in k): NovikovSeries.coerce(v)
            for k, v in support.items()
        }
        if tail is not None:
            alpha, beta = tail
            alpha, beta = _as_fraction(alpha), _as_fraction(beta)
            if alpha <= 0:
                raise ValueError("a nonempty tail bound requires alpha > 0")
            tail = (alpha, beta)
        self.tail = tail

    def dimension(self) -> int:
        if self.support:
            return len(next(iter(self.support)))
        return 0


def converges_on(cert: ConvergenceCertificate, region) -> bool:
    """Decide convergence on a polydisc or polytope domain from the certificate.

    A finite support always converges.  With a tail bound (alpha, beta), the
    certificate guarantees convergence exactly when alpha dominates the
    coordinate excursions of the region: the worst case among monomial
    directions must still send val(f_nu) + nu.p to +infinity.  The decision is
    about what the certificate guarantees, so alpha equal to an excursion is
    reported as non-convergent.
    """
    if cert.tail is None:
        return True
    alpha, _beta = cert.tail
    if hasattr(region, "vertices"):
        verts = region.vertices()
        if not verts:
            raise ValueError("empty region")
        # Laurent support: exponents range over all of Z^n, so both signs of
        # every coordinate must be dominated at every vertex.
        for p in verts:
            for coord in p:
                if alpha <= abs(_as_fraction(coord)):
                    return False
        return True
    # Polydisc given by its lower bounds; power-series support nu >= 0.
    for b in region:
        if alpha <= -_as_fraction(b):
            return False
    return True
