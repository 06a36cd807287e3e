#include <gtest/gtest.h>

#include "moduli/m0n.hpp"

using namespace moduli;
using namespace moduli::m0n;

namespace {

taut_class psi_monomial(int n, const std::vector<int>& a) {
    auto c = taut_class::fundamental(first_points(n));
    for (int x = 0; x < static_cast<int>(a.size()); ++x) c = mul_psi_power(c, x, a[x]);
    return c;
}

// (N-3)! / prod a_i!
rational multinomial(const std::vector<int>& a) {
    int total = 0;
    rational v(1);
    for (int e : a) {
        total += e;
        v /= rational(factorial(e));
    }
    return v * rational(factorial(total));
}

void for_each_exponent(int n, int total, const std::function<void(const std::vector<int>&)>& f) {
    std::vector<int> a(n, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == n - 1) {
            a[i] = left;
            f(a);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            a[i] = e;
            rec(i + 1, left - e);
        }
    };
    rec(0, total);
}

} // namespace

TEST(M0n, PsiIntegralsAreMultinomials) {
    for (int n = 3; n <= 8; ++n)
        for_each_exponent(n, n - 3, [&](const std::vector<int>& a) {
            EXPECT_EQ(integrate(psi_monomial(n, a)), multinomial(a)) << n;
        });
}

TEST(M0n, StringEquation) {
    // <tau_{a_1}..tau_{a_n} tau_0> = sum_j <..tau_{a_j - 1}..>
    for (int n = 4; n <= 7; ++n)
        for_each_exponent(n, n - 2, [&](const std::vector<int>& a) {
            std::vector<int> with_zero = a;
            with_zero.push_back(0);
            rational rhs;
            for (int j = 0; j < n; ++j) {
                if (a[j] == 0) continue;
                auto lowered = a;
                --lowered[j];
                rhs += integrate(psi_monomial(n, lowered));
            }
            EXPECT_EQ(integrate(psi_monomial(n + 1, with_zero)), rhs);
        });
}

TEST(M0n, WrongDegreeIntegratesToZero) {
    EXPECT_EQ(integrate(psi_monomial(5, {1})), rational(0));
    EXPECT_EQ(integrate(taut_class::fundamental(first_points(5))), rational(0));
    EXPECT_EQ(integrate(taut_class::fundamental(first_points(3))), rational(1));
}

TEST(M0n, BoundaryDivisorIsSymmetric) {
    for (int n = 4; n <= 7; ++n) {
        const mask pts = first_points(n);
        auto one = taut_class::fundamental(pts);
        for (mask u : boundary_divisors(pts)) EXPECT_EQ(mul_boundary(one, u), mul_boundary(one, pts ^ u));
    }
    // N = 6: 2^5 - 1 - 6 = 25 divisors
    EXPECT_EQ(boundary_divisors(first_points(6)).size(), 25u);
}

TEST(M0n, DivisorIntersections) {
    const mask p5 = first_points(5);
    auto one = taut_class::fundamental(p5);
    const mask d12 = 0b00011, d34 = 0b01100, d13 = 0b00101;
    EXPECT_EQ(integrate(mul_boundary(mul_boundary(one, d12), d12)), rational(-1));
    EXPECT_EQ(integrate(mul_boundary(mul_boundary(one, d12), d34)), rational(1));
    EXPECT_EQ(integrate(mul_boundary(mul_boundary(one, d12), d13)), rational(0));
    EXPECT_EQ(integrate(mul_psi(mul_boundary(one, d12), 2)), rational(1));
    EXPECT_EQ(integrate(mul_psi(mul_boundary(one, d12), 0)), rational(0));
    // On M0,4 the self-intersection vanishes by dimension.
    auto one4 = taut_class::fundamental(first_points(4));
    EXPECT_EQ(integrate(mul_boundary(one4, 0b0011)), rational(1));
    EXPECT_EQ(integrate(mul_boundary(mul_boundary(one4, 0b0011), 0b0011)), rational(0));
}

TEST(M0n, PsiAsSumOfBoundaryDivisors) {
    // psi_i = sum of D_S over S containing i and avoiding j, k.
    for (int n = 4; n <= 7; ++n) {
        const mask pts = first_points(n);
        auto one = taut_class::fundamental(pts);
        const int i = 0, j = 1, k = 2;
        taut_class sum(pts);
        for (mask s = pts; s; s = (s - 1) & pts)
            if ((s & bit(i)) && !(s & bit(j)) && !(s & bit(k)) && popcount(s) >= 2) sum += mul_boundary(one, s);
        EXPECT_TRUE(numerically_equal(mul_psi(one, i), sum)) << n;
        EXPECT_FALSE(numerically_equal(mul_psi(one, i), rational(2) * sum)) << n;
    }
}

TEST(M0n, PulledBackPsi) {
    const mask p6 = first_points(6), p5 = first_points(5);
    auto one6 = taut_class::fundamental(p6);
    // psi_0 = pi^* psi_0 + D_{0,5}
    auto pulled = mul_pulled_back_psi(one6, 0, p5);
    EXPECT_EQ(pulled, mul_psi(one6, 0) - mul_boundary(one6, bit(0) | bit(5)));
    EXPECT_TRUE(numerically_equal(forgetful_pullback(mul_psi(taut_class::fundamental(p5), 0), 5), pulled));

    auto c = mul_psi(taut_class::fundamental(p5), 1);
    EXPECT_TRUE(numerically_equal(forgetful_pullback(mul_psi(c, 0), 5),
                                  mul_pulled_back_psi(forgetful_pullback(c, 5), 0, p5)));
    // A pulled-back top class has degree N-3 on N+1 points and integrates to zero.
    EXPECT_EQ(integrate(forgetful_pullback(mul_psi_power(taut_class::fundamental(p5), 0, 2), 5)), rational(0));
    // Dilaton: pi_* psi_5 = N - 2 on five points.
    auto top = mul_psi_power(taut_class::fundamental(p5), 0, 2);
    EXPECT_EQ(integrate(mul_psi(forgetful_pullback(top, 5), 5)), rational(3) * integrate(top));
}

TEST(M0n, Errors) {
    auto one = taut_class::fundamental(first_points(5));
    auto kind_of = [](auto&& f) {
        try {
            f();
        } catch (const error& e) {
            return e.kind();
        }
        return error_kind::unstable;
    };
    EXPECT_EQ(kind_of([&] { mul_boundary(one, 0b100011); }), error_kind::invalid_subset);
    EXPECT_EQ(kind_of([&] { mul_boundary(one, 0b00001); }), error_kind::invalid_subset);
    EXPECT_EQ(kind_of([&] { mul_boundary(one, 0b01111); }), error_kind::invalid_subset);
    EXPECT_EQ(kind_of([&] { forgetful_pullback(one, 2); }), error_kind::point_already_present);
    EXPECT_EQ(kind_of([&] { taut_class::fundamental(0b11); }), error_kind::precondition_violated);
    EXPECT_THROW(one + taut_class::fundamental(first_points(4)), error);
}

TEST(M0n, JsonForm) {
    auto one = taut_class::fundamental(first_points(5));
    auto d = mul_psi(mul_boundary(one, 0b00011), 3);
    auto j = to_json(d);
    ASSERT_EQ(j.at("terms").size(), 1u);
    auto t = j.at("terms")[0];
    EXPECT_EQ(t.at("coefficient"), "1");
    EXPECT_EQ(t.at("parent").size(), 2u);
    EXPECT_EQ(t.at("legs").size(), 5u);
    EXPECT_EQ(t.at("decorations")[0].at("leg"), "3");
}
