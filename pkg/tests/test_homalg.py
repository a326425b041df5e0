import itertools
import random
from fractions import Fraction as F

import pytest

from mcartan.homalg import (
    CochainComplexOverField,
    FractionField,
    GaussianField,
    NovikovField,
    UndecidableTruncationError,
    cohomology,
    column_space_basis,
    hermite_normal_form,
    integer_determinant,
    matrix_rank,
    nullspace_basis,
    row_echelon,
    saturation,
    smith_normal_form,
    solve,
    span_saturation_index,
    subgroup_membership,
)
from mcartan.novikov import INFINITY, NovikovSeries


def mat_mul(a, b):
    return [
        [sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))]
        for i in range(len(a))
    ]


def check_snf(m):
    u, d, v = smith_normal_form(m)
    assert mat_mul(mat_mul(u, m), v) == d
    assert abs(integer_determinant(u)) == 1
    assert abs(integer_determinant(v)) == 1
    diag = [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]
    for i in range(len(d)):
        for j in range(len(d[0])):
            if i != j:
                assert d[i][j] == 0
    nonzero = [x for x in diag if x]
    assert all(x > 0 for x in nonzero)
    for a, b in zip(nonzero, nonzero[1:]):
        assert b % a == 0
    return diag


class TestSmith:
    def test_identity(self):
        diag = check_snf([[1, 0], [0, 1]])
        assert diag == [1, 1]

    def test_coprime_diagonal(self):
        diag = check_snf([[2, 0], [0, 3]])
        assert diag == [1, 6]

    def test_zero_matrix(self):
        diag = check_snf([[0, 0], [0, 0]])
        assert diag == [0, 0]

    def test_rectangular_and_random(self):
        rng = random.Random(21)
        for _ in range(60):
            rows = rng.randrange(1, 5)
            cols = rng.randrange(1, 5)
            m = [[rng.randrange(-9, 10) for _ in range(cols)] for _ in range(rows)]
            check_snf(m)

    def test_brute_force_invariant_factors(self):
        # d1 = gcd of entries; d1*d2 = gcd of 2x2 minors
        m = [[2, 4, 4], [-6, 6, 12], [10, 4, 16]]
        diag = check_snf(m)
        entries_gcd = 2
        assert diag[0] == entries_gcd
        minors = []
        for r in itertools.combinations(range(3), 2):
            for c in itertools.combinations(range(3), 2):
                minors.append(
                    m[r[0]][c[0]] * m[r[1]][c[1]] - m[r[0]][c[1]] * m[r[1]][c[0]]
                )
        g = 0
        for x in minors:
            g = abs(x) if g == 0 else __import__("math").gcd(g, abs(x))
        assert diag[0] * diag[1] == g


class TestHermite:
    def test_full_lattice(self):
        # (1,1), (2,0), (0,3) generate all of Z^2: (2,0)-2(1,1)=(0,-2), gcd with (0,3)
        basis = hermite_normal_form([[2, 0], [0, 3], [1, 1]])
        assert basis == [[1, 0], [0, 1]]

    def test_proper_sublattice(self):
        basis = hermite_normal_form([[2, 2], [0, 4]])
        assert basis == [[2, 2], [0, 4]]
        for row in ([2, 2], [0, 4], [2, 6], [4, 0]):
            assert subgroup_membership(row, basis)
        assert not subgroup_membership([1, 1], basis)
        assert not subgroup_membership([2, 0], basis)


class TestSaturation:
    def test_single_vector(self):
        assert saturation([[2, 0]]) == [[1, 0]]

    def test_index_two_sublattice(self):
        sat = saturation([[1, 1], [1, -1]])
        assert sat == [[1, 0], [0, 1]]
        assert span_saturation_index([[1, 1], [1, -1]]) == 2

    def test_empty(self):
        assert saturation([]) == []

    def test_idempotent_and_contains(self):
        rng = random.Random(22)
        for _ in range(40):
            gens = [
                [rng.randrange(-6, 7) for _ in range(3)]
                for _ in range(rng.randrange(1, 4))
            ]
            sat = saturation(gens)
            assert saturation(sat) == sat
            for g in gens:
                assert subgroup_membership(g, sat)
            assert span_saturation_index(sat) == 1


class TestMembership:
    def test_zero_vector(self):
        assert subgroup_membership([0, 0], [[2, 0]])

    def test_strict_sublattice(self):
        assert not subgroup_membership([1, 0], [[2, 0]])

    def test_vs_bounded_enumeration_oracle(self):
        rng = random.Random(23)
        for _ in range(60):
            gens = [
                [rng.randrange(-3, 4) for _ in range(3)]
                for _ in range(rng.randrange(1, 4))
            ]
            coeffs = [rng.randrange(-3, 4) for _ in gens]
            member = [sum(c * g[i] for c, g in zip(coeffs, gens)) for i in range(3)]
            assert subgroup_membership(member, gens)
            # oracle: bounded-coefficient search must find a certificate
            found = False
            for combo in itertools.product(range(-3, 4), repeat=len(gens)):
                if all(
                    sum(c * g[i] for c, g in zip(combo, gens)) == member[i]
                    for i in range(3)
                ):
                    found = True
                    break
            assert found

    def test_negative_cases_explicit(self):
        gens = [[2, 0, 0], [0, 3, 0]]
        assert not subgroup_membership([1, 0, 0], gens)
        assert not subgroup_membership([0, 1, 0], gens)
        assert not subgroup_membership([0, 0, 1], gens)
        assert subgroup_membership([2, 3, 0], gens)


QQ = FractionField()


class TestFieldElimination:
    def test_solve_unique(self):
        a = [[F(1), F(2)], [F(3), F(4)]]
        x = solve(a, [F(5), F(6)], QQ)
        assert x == [F(-4), F(9, 2)]

    def test_solve_underdetermined_sets_free_to_zero(self):
        a = [[F(1), F(1), F(0)]]
        x = solve(a, [F(7)], QQ)
        assert x == [F(7), F(0), F(0)]

    def test_solve_inconsistent(self):
        a = [[F(1), F(1)], [F(1), F(1)]]
        assert solve(a, [F(0), F(1)], QQ) is None

    def test_nullspace(self):
        a = [[F(1), F(2), F(3)]]
        basis = nullspace_basis(a, QQ)
        assert len(basis) == 2
        for v in basis:
            assert sum(a[0][i] * v[i] for i in range(3)) == 0

    def test_column_space(self):
        a = [[F(1), F(2), F(3)], [F(2), F(4), F(6)]]
        basis = column_space_basis(a, QQ)
        assert basis == [[F(1), F(2)]]


class TestNovikovElimination:
    def test_min_valuation_pivot(self):
        # decisions at the data's own precision: stored-zero counts as zero
        nov = NovikovField()
        q = NovikovSeries.q_power
        m = [[q(2, F(5)), q(1, F(5))], [q(1, F(5)), q(0, F(5))]]
        rows, pivots, _ = row_echelon(m, nov)
        # the (q^2, q) row is q times the (q, 1) row, so the rank is 1
        assert pivots == [0]

    def test_rank_decidable_with_clean_zero(self):
        nov = NovikovField(floor=F(5))
        z = NovikovSeries.zero(F(5))
        one = NovikovSeries.one(F(5))
        assert matrix_rank([[one, z], [z, z]], nov) == 1

    def test_rank_refusal_below_floor(self):
        nov = NovikovField(floor=F(5))
        fuzzy_zero = NovikovSeries.zero(F(2))  # only known modulo q^2
        one = NovikovSeries.one(F(5))
        with pytest.raises(UndecidableTruncationError):
            matrix_rank([[one, one], [one, one + fuzzy_zero]], nov)

    def test_rank_stable_under_raising_truncation(self):
        q = NovikovSeries.q_power
        for e in (F(3), F(6), F(9)):
            nov = NovikovField(floor=e)
            m = [
                [q(1, e) + q(2, e), q(2, e)],
                [q(2, e), q(1, e) + q(2, e)],
            ]
            assert matrix_rank(m, nov) == 2


def two_term_complex_qq(matrix):
    dims = {0: len(matrix[0]) if matrix else 0, 1: len(matrix)}
    return CochainComplexOverField(dims, {0: matrix}, QQ)


class TestCohomology:
    def test_zero_differential(self):
        nov = NovikovField()
        z = NovikovSeries.zero(INFINITY)
        c = CochainComplexOverField(
            {0: 2, 1: 1}, {0: [[z, z]]}, nov
        )
        h = cohomology(c)
        assert h[0].dim == 2 and h[1].dim == 1

    def test_identity_differential(self):
        one = F(1)
        c = two_term_complex_qq([[one, F(0)], [F(0), one]])
        h = cohomology(c)
        assert h[0].dim == 0 and h[1].dim == 0

    def test_exterior_algebra_ranks(self):
        # four basis elements in degrees 0,1,1,2 and zero differential
        nov = NovikovField()
        z = NovikovSeries.zero(INFINITY)
        c = CochainComplexOverField(
            {0: 1, 1: 2, 2: 1},
            {0: [[z], [z]], 1: [[z, z]]},
            nov,
        )
        h = cohomology(c)
        assert (h[0].dim, h[1].dim, h[2].dim) == (1, 2, 1)

    def test_projection_kills_image(self):
        # d0 = (1, 0)^T : C^0 -> C^1 two-dimensional
        c = CochainComplexOverField(
            {0: 1, 1: 2, 2: 1},
            {0: [[F(1)], [F(0)]], 1: [[F(0), F(1)]]},
            QQ,
        )
        h = cohomology(c)
        assert h[1].dim == 0
        # the cocycle (3, 0) is a coboundary, so its class vanishes
        assert h[1].class_is_zero([F(3), F(0)])
        with pytest.raises(ValueError):
            h[1].project([F(0), F(1)])  # not a cocycle

    def test_d_squared_enforced(self):
        c = CochainComplexOverField(
            {0: 1, 1: 1, 2: 1},
            {0: [[F(1)]], 1: [[F(1)]]},
            QQ,
        )
        with pytest.raises(ValueError):
            cohomology(c)

    def test_rank_nullity(self):
        rng = random.Random(24)
        for _ in range(20):
            n0, n1 = rng.randrange(1, 4), rng.randrange(1, 4)
            m = [[F(rng.randrange(-3, 4)) for _ in range(n0)] for _ in range(n1)]
            c = CochainComplexOverField({0: n0, 1: n1}, {0: m}, QQ)
            h = cohomology(c)
            r = matrix_rank(m, QQ)
            assert h[0].dim == n0 - r
            assert h[1].dim == n1 - r
