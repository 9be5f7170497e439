import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetalab import arithmetic
from zetalab.errors import DomainError

KS = [1.0, -1.0, 2.0, 0.5 + 0.5j, 1 + 1j]


class TestVonMangoldt:
    def test_prime_power(self):
        assert arithmetic.von_mangoldt(8) == pytest.approx(math.log(2))

    def test_composite(self):
        assert arithmetic.von_mangoldt(6) == 0.0

    def test_prime(self):
        assert arithmetic.von_mangoldt(5) == pytest.approx(math.log(5))

    def test_domain(self):
        with pytest.raises(DomainError):
            arithmetic.von_mangoldt(0)

    def test_prime_table_lookup(self):
        table = arithmetic.PrimeTable(100)
        assert list(table.primes[:5]) == [2, 3, 5, 7, 11]
        assert table.von_mangoldt(49) == pytest.approx(math.log(7))


class TestDivisorGeneral:
    def test_d_k_of_p(self):
        for k in KS:
            assert arithmetic.divisor_general(k, 7) == pytest.approx(k)

    def test_d2_p_squared(self):
        assert arithmetic.divisor_general(2, 9) == pytest.approx(3.0)

    def test_d_minus1_p_squared(self):
        assert arithmetic.divisor_general(-1, 4) == 0

    def test_multiplicative_assembly(self):
        # d_2(12) = d_2(4) d_2(3) = 3 * 2 (classical divisor count)
        assert arithmetic.divisor_general(2, 12) == pytest.approx(6.0)

    def test_m_one(self):
        assert arithmetic.divisor_general(3.5, 1) == 1


class TestACoeffs:
    def test_a_k_of_p(self):
        for k in KS:
            poly = arithmetic.a_coeffs(k, 10.0, m_max=100)
            for p in (2, 3, 5, 7):
                assert poly.coeff(p) == pytest.approx(k)

    def test_support_is_smooth(self):
        poly = arithmetic.a_coeffs(1.0, 10.0, m_max=1000)
        for m in poly.m:
            if m > 1:
                assert max(arithmetic.factorize(int(m))) <= 7
        assert poly.coeff(11) == 0
        assert poly.coeff(22) == 0

    def test_a1_is_one(self):
        poly = arithmetic.a_coeffs(2.5 - 1j, 10.0, m_max=100)
        assert poly.coeff(1) == 1.0

    def test_a_minus1_p_squared_truncated(self):
        # p <= X < p^2: exp(-z) gives coefficient 1/2 at z^2
        poly = arithmetic.a_coeffs(-1.0, 3.0, m_max=100)
        assert poly.coeff(9) == pytest.approx(0.5)

    def test_p4_regime_polynomials(self):
        # the four truncation regimes of a_k(p^4) at p = 2
        def regime(k, x):
            return arithmetic.a_coeffs(k, x, m_max=64).coeff(16)

        for k in KS:
            full = k**4 / 24 + k**3 / 4 + 11 * k**2 / 24 + k / 4
            assert regime(k, 16.0) == pytest.approx(full, rel=1e-12)  # p^4 <= X
            assert regime(k, 8.0) == pytest.approx(
                k**4 / 24 + k**3 / 4 + 11 * k**2 / 24, rel=1e-12
            )  # p^3 <= X < p^4
            assert regime(k, 4.0) == pytest.approx(
                k**4 / 24 + k**3 / 4 + k**2 / 8, rel=1e-12
            )  # p^2 <= X < p^3
            assert regime(k, 2.0) == pytest.approx(k**4 / 24, rel=1e-12)  # p <= X < p^2

    def test_equal_to_divisor_when_power_below_x(self):
        poly = arithmetic.a_coeffs(0.5 + 0.5j, 30.0, m_max=1000)
        for m in (2, 4, 8, 16, 3, 9, 27, 5, 25, 6, 12, 30):
            assert poly.coeff(m) == pytest.approx(
                arithmetic.divisor_general(0.5 + 0.5j, m), rel=1e-12
            )

    @pytest.mark.parametrize("k", KS)
    def test_multiplicativity_and_divisor_bound(self, k):
        poly = arithmetic.a_coeffs(k, 12.0, m_max=200_000)
        rng = np.random.default_rng(42)
        lookup = dict(zip(poly.m.tolist(), poly.a.tolist()))
        support = poly.m
        for _ in range(1000):
            m1 = int(support[rng.integers(len(support))])
            m2 = int(support[rng.integers(len(support))])
            if math.gcd(m1, m2) != 1 or m1 * m2 > poly.m_max:
                continue
            assert abs(lookup[m1 * m2] - lookup[m1] * lookup[m2]) < 1e-12
        # divisor-bound domination across the full support
        for m, a in zip(poly.m, poly.a):
            bound = abs(arithmetic.divisor_general(abs(k), int(m)))
            assert abs(a) <= bound + 1e-12

    def test_support_completeness(self):
        poly = arithmetic.a_coeffs(1.0, 4.0, m_max=50)
        expected = sorted(
            m for m in range(1, 51) if all(p in (2, 3) for p in arithmetic.factorize(m))
        )
        assert poly.m.tolist() == expected
        assert len(set(poly.m.tolist())) == len(poly.m)

    def test_lam_column(self):
        poly = arithmetic.a_coeffs(1.0, 10.0, m_max=100)
        idx = {int(m): i for i, m in enumerate(poly.m)}
        assert poly.lam[idx[8]] == pytest.approx(math.log(2))
        assert poly.lam[idx[6]] == 0.0
        assert poly.lam[idx[1]] == 0.0


class TestPxPow:
    def test_k0_is_one(self):
        poly = arithmetic.a_coeffs(0.0, 10.0, m_max=1000)
        assert arithmetic.p_x_pow(0.3 + 2j, 0.0, poly) == pytest.approx(1.0)

    def test_p_x_zero_against_independent_formula(self):
        # P_X(0) = exp(sum_{n<=X} Lambda(n)/log n): the production exponential
        # route against an independently coded high-precision evaluation
        import mpmath as mp

        acc = mp.mpf(0)
        for n in range(2, 21):
            fac = arithmetic.factorize(n)
            if len(fac) == 1:
                ((p, a),) = fac.items()
                acc += mp.log(p) / (a * mp.log(p))  # Lambda(n)/log n = 1/a
        oracle = float(mp.e**acc)
        assert abs(arithmetic.p_x_euler(0.0, 1.0, 20.0) - oracle) < 1e-10 * oracle

    def test_dual_route_where_truncation_converges(self):
        # at s = 2 the m^{-2} decay makes the truncated Dirichlet route exact
        # to ~1e-10; at s = 0 the terms do not decay and only the exponential
        # route is meaningful
        poly = arithmetic.a_coeffs(1.0, 20.0, m_max=2_000_000)
        dirichlet = arithmetic.p_x_pow(2.0, 1.0, poly)
        euler = arithmetic.p_x_euler(2.0, 1.0, 20.0)
        assert abs(dirichlet - euler) < 1e-9

    def test_dual_route_on_critical_line(self):
        poly = arithmetic.a_coeffs(1.0, 10.0, m_max=1_000_000)
        s = 0.5 + 37.5j
        dirichlet = arithmetic.p_x_pow(s, 1.0, poly)
        euler = arithmetic.p_x_euler(s, 1.0, 10.0)
        assert abs(dirichlet - euler) < poly.tail_bound()
        assert abs(dirichlet - euler) < 1e-3  # observed truncation error scale

    def test_reciprocal_consistency(self):
        s = 0.5 + 14.13j
        p_plus = arithmetic.a_coeffs(1.0, 10.0, m_max=1_000_000)
        p_minus = arithmetic.a_coeffs(-1.0, 10.0, m_max=1_000_000)
        product = arithmetic.p_x_pow(s, 1.0, p_plus) * arithmetic.p_x_pow(s, -1.0, p_minus)
        assert abs(product - 1.0) < p_plus.tail_bound() + p_minus.tail_bound()
        assert abs(product - 1.0) < 1e-2

    def test_mismatched_k_rejected(self):
        poly = arithmetic.a_coeffs(1.0, 10.0, m_max=100)
        with pytest.raises(DomainError):
            arithmetic.p_x_pow(0.5, 2.0, poly)


@given(st.integers(min_value=2, max_value=10_000))
@settings(max_examples=200, deadline=None)
def test_von_mangoldt_factorization_property(n):
    # Lambda(n) != 0 iff n is a prime power, and then equals log of its base
    fac = arithmetic.factorize(n)
    lam = arithmetic.von_mangoldt(n)
    if len(fac) == 1:
        assert lam == pytest.approx(math.log(next(iter(fac))))
    else:
        assert lam == 0.0
