#include <gtest/gtest.h>

#include "moduli/hurwitz.hpp"
#include "moduli/psi_classes.hpp"

using namespace moduli;
using namespace moduli::m0n;

namespace {

ramification_profile prof(int n, const char* s) { return ramification_profile::parse(n, s); }

error_kind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const error& e) {
        return e.kind();
    }
    return error_kind::unstable;
}

} // namespace

TEST(PsiP, HurwitzValues) {
    EXPECT_EQ(psi_hurwitz(prof(4, "4;3,1;2,1,1")), rational(1));
    EXPECT_EQ(psi_hurwitz(prof(4, "4;2,2;2,1,1")), rational(1, 2));
    EXPECT_EQ(psi_hurwitz(prof(3, "3;2,1;2,1")), rational(1));
    // The full cycle need not be listed first.
    EXPECT_EQ(psi_hurwitz(prof(4, "2,2;4;2,1,1")), rational(1, 2));
}

TEST(PsiP, AgreesWithFactorizationCount) {
    for (auto [n, s] : std::vector<std::pair<int, const char*>>{{3, "3;2,1;2,1"},
                                                                 {5, "5;3,1,1;2,2,1"},
                                                                 {5, "5;4,1;2,1,1,1"},
                                                                 {5, "5;3,2;2,1,1,1"},
                                                                 {5, "5;2,2,1;2,2,1"},
                                                                 {6, "6;4,1,1;3,1,1,1"}}) {
        auto p = prof(n, s);
        EXPECT_EQ(psi_hurwitz(p, 10), hurwitz::hurwitz_bruteforce(p)) << s;
    }
}

TEST(PsiP, IncrementOrderDoesNotMatter) {
    const mask pts = first_points(6);
    psi_context ctx{pts, 0, bit(1)};
    auto base = taut_class::fundamental(pts);
    std::vector<int> b{0, 0, 1, 1, 1, 0};
    std::vector<int> order{2, 3, 4, 5};
    auto reference = multiply_psi_p(base, ctx, b, order);
    EXPECT_FALSE(reference.is_zero());
    while (std::next_permutation(order.begin(), order.end()))
        EXPECT_TRUE(numerically_equal(multiply_psi_p(base, ctx, b, order), reference));
}

TEST(PsiP, ZeroExponentsGiveTheInputClass) {
    const mask pts = first_points(5);
    auto c = mul_psi(taut_class::fundamental(pts), 0);
    EXPECT_EQ(multiply_psi_p(c, {pts, 0, bit(1)}, std::vector<int>(5, 0)), c);
}

TEST(PsiP, Errors) {
    const mask pts = first_points(5);
    auto one = taut_class::fundamental(pts);
    psi_context ctx{pts, 0, bit(1)};
    EXPECT_EQ(kind_of([&] { multiply_psi_p(one, ctx, {0, 0, 1, 1, 1}); }), error_kind::degree_overflow);
    EXPECT_EQ(kind_of([&] { multiply_psi_p(one, ctx, {1, 0, 0, 0, 0}); }), error_kind::precondition_violated);
    EXPECT_EQ(kind_of([&] { multiply_psi_p(one, ctx, {0, 1, 0, 0, 0}); }), error_kind::precondition_violated);
    EXPECT_EQ(kind_of([&] { multiply_psi_p(one, {first_points(6), 0, bit(1)}, {}); }), error_kind::precondition_violated);
    EXPECT_EQ(kind_of([] { psi_hurwitz(prof(3, "3;3")); }), error_kind::precondition_violated);
    EXPECT_EQ(kind_of([] { psi_hurwitz(prof(4, "2,2;2,2;2,1,1;2,1,1")); }), error_kind::precondition_violated);
    EXPECT_EQ(kind_of([] { psi_hurwitz(prof(6, "6;2,1,1,1,1;2,1,1,1,1;2,1,1,1,1;2,1,1,1,1;2,1,1,1,1")); }),
              error_kind::degree_too_large);
}

TEST(PsiP, CoverSpaceLabels) {
    polynomial_cover_space space(prof(4, "2,2;4;2,1,1"));
    EXPECT_EQ(space.n_points(), 6);
    EXPECT_EQ(space.point_name(0), "x1_1");
    EXPECT_EQ(space.point_name(space.point(2, 2)), "x3_3");
    EXPECT_EQ(space.default_exponents(1), (std::vector<int>{0, 0, 0, 1, 0, 0}));
    EXPECT_EQ(space.context(2).residue, space.branch_mask(2));
    EXPECT_THROW(space.context(0), error);
}
