import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcartan.novikov import (
    INFINITY,
    ConvergenceCertificate,
    GaussianRational,
    NovikovSeries,
    converges_on,
    exp,
    polydisc_contains,
)

E5 = F(5)


def series(pairs, trunc=E5):
    return NovikovSeries([(F(e), c) for e, c in pairs], trunc)


def random_series(rng, trunc=E5, max_terms=4, allow_negative=True):
    n = rng.randrange(0, max_terms + 1)
    terms = []
    for _ in range(n):
        num = rng.randrange(-6, 13)
        den = rng.choice([1, 2, 3, 4])
        e = F(num, den)
        if not allow_negative and e <= 0:
            e = abs(e) + F(1, den)
        c = GaussianRational(F(rng.randrange(-5, 6)), F(rng.randrange(-2, 3)))
        if c:
            terms.append((e, c))
    return NovikovSeries(terms, trunc)


class TestVal:
    def test_least_exponent(self):
        s = series([(F(1, 2), 1), (2, 3)])
        assert s.val() == F(1, 2)

    def test_zero_is_infinite(self):
        assert NovikovSeries.zero(E5).val() == INFINITY

    def test_val_of_product(self):
        # (q + q^2) * (q^-1 + 1) has valuation 1 + (-1) = 0
        a = series([(1, 1), (2, 1)])
        b = series([(-1, 1), (0, 1)])
        assert (a * b).val() == 0

    def test_val_additive_randomized(self):
        rng = random.Random(11)
        for _ in range(300):
            a = random_series(rng)
            b = random_series(rng)
            if not a or not b:
                continue
            prod = a * b
            # leading coefficients in Q(i) cannot cancel
            assert prod.val() == a.val() + b.val()

    def test_ultrametric(self):
        rng = random.Random(12)
        for _ in range(300):
            a = random_series(rng)
            b = random_series(rng)
            s = a + b
            assert s.val() >= min(a.val(), b.val())
            if a.val() != b.val():
                assert s.val() == min(a.val(), b.val())


class TestNorm:
    def test_examples(self):
        assert float(NovikovSeries.q_power(1, E5).norm()) == pytest.approx(math.exp(-1))
        assert float(NovikovSeries.zero(E5).norm()) == 0.0
        unit = series([(0, 2), (1, 1)])
        assert unit.norm() == 1

    def test_multiplicative_and_ultrametric(self):
        rng = random.Random(13)
        for _ in range(200):
            a = random_series(rng)
            b = random_series(rng)
            assert (a * b).norm() == a.norm() * b.norm()
            assert not ((a + b).norm() > a.norm() and (a + b).norm() > b.norm())


class TestFieldOps:
    def test_geometric_inverse(self):
        one_plus_q = series([(0, 1), (1, 1)], F(6))
        inv = one_plus_q.invert()
        expected = series([(k, (-1) ** k) for k in range(6)], F(6))
        assert inv == expected
        assert (one_plus_q * inv).agrees_with(NovikovSeries.one(F(6)))

    def test_invert_monomial(self):
        assert NovikovSeries.q_power(1).invert() == NovikovSeries.q_power(-1)

    def test_square_with_fractional_exponent(self):
        s = series([(F(1, 2), 1), (0, 1)], F(3))
        sq = s * s
        assert sq == series([(0, 1), (F(1, 2), 2), (1, 1)], F(3))

    def test_zero_division(self):
        with pytest.raises(ZeroDivisionError):
            NovikovSeries.zero(E5).invert()
        with pytest.raises(ZeroDivisionError):
            NovikovSeries.zero(INFINITY).invert()

    def test_inverse_truncation_report(self):
        s = series([(2, 1), (3, 1)], F(7))
        inv = s.invert()
        assert inv.trunc == F(7) - 4
        assert (s * inv).agrees_with(NovikovSeries.one(F(3)))

    def test_field_axioms_randomized(self):
        rng = random.Random(14)
        for _ in range(300):
            a, b, c = (random_series(rng) for _ in range(3))
            assert ((a + b) + c).agrees_with(a + (b + c))
            assert (a * b).agrees_with(b * a)
            assert ((a * b) * c).agrees_with(a * (b * c))
            assert (a * (b + c)).agrees_with(a * b + a * c)
            if a:
                inv = a.invert()
                assert (a * inv).agrees_with(NovikovSeries.one(inv.trunc))


class TestExp:
    def test_exp_zero(self):
        assert exp(NovikovSeries.zero(F(3))) == NovikovSeries.one(F(3))

    def test_exp_q(self):
        assert exp(NovikovSeries.q_power(1, F(3))) == series(
            [(0, 1), (1, 1), (2, GaussianRational(F(1, 2)))], F(3)
        )

    def test_exp_lands_in_unitary_group(self):
        rng = random.Random(15)
        for _ in range(100):
            s = random_series(rng, trunc=F(3), allow_negative=False)
            e = exp(s)
            assert e.val() == 0
            assert e.leading_coefficient() == 1

    def test_exp_inverse_identity(self):
        s = series([(F(1, 2), 2), (1, -1)], F(3))
        assert (exp(s) * exp(-s)).agrees_with(NovikovSeries.one(F(3)))

    def test_exp_homomorphism(self):
        rng = random.Random(16)
        for _ in range(100):
            a = random_series(rng, trunc=F(3), allow_negative=False)
            b = random_series(rng, trunc=F(3), allow_negative=False)
            assert exp(a + b).agrees_with(exp(a) * exp(b))

    def test_exp_rejects_nonpositive_valuation(self):
        with pytest.raises(ValueError):
            exp(series([(0, 1)]))
        with pytest.raises(ValueError):
            exp(series([(-1, 1)]))


@given(
    st.integers(-4, 4),
    st.integers(1, 3),
    st.integers(-4, 4),
    st.integers(1, 3),
)
@settings(max_examples=60)
def test_monomial_product_exponents_add(n1, d1, n2, d2):
    a = NovikovSeries.q_power(F(n1, d1), F(20))
    b = NovikovSeries.q_power(F(n2, d2), F(20))
    assert (a * b).val() == F(n1, d1) + F(n2, d2)


class TestPolydisc:
    def test_examples(self):
        one = NovikovSeries.one(E5)
        q = NovikovSeries.q_power(1, E5)
        assert polydisc_contains([F(0), F(0)], [q, q])
        assert not polydisc_contains([F(1), F(0)], [NovikovSeries.q_power(F(1, 2), E5), one])
        assert polydisc_contains(
            [F(1, 2), F(2)],
            [NovikovSeries.q_power(F(1, 2), E5), series([(2, 1), (3, 1)])],
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            polydisc_contains([F(0)], [])


class _Poly:
    def __init__(self, verts):
        self._verts = verts

    def vertices(self):
        return self._verts


class TestConvergence:
    def test_finite_support(self):
        cert = ConvergenceCertificate({(1, 0): 1, (0, 2): 3})
        assert converges_on(cert, _Poly([(F(-100), F(100))]))

    def test_tail_bound_on_small_polytope(self):
        cert = ConvergenceCertificate({(0, 0): 1}, tail=(1, 0))
        box = _Poly([(F(-1, 2), F(-1, 2)), (F(1, 2), F(-1, 2)), (F(0), F(1, 2))])
        assert converges_on(cert, box)

    def test_tail_bound_fails_on_wide_polytope(self):
        cert = ConvergenceCertificate({(0, 0): 1}, tail=(1, 0))
        box = _Poly([(F(-2), F(0)), (F(1, 2), F(0))])
        assert not converges_on(cert, box)

    def test_polydisc_region(self):
        cert = ConvergenceCertificate({(0,): 1}, tail=(1, 0))
        assert converges_on(cert, [F(-1, 2)])
        assert not converges_on(cert, [F(-2)])

    def test_alpha_positive_required(self):
        with pytest.raises(ValueError):
            ConvergenceCertificate({}, tail=(0, 1))
