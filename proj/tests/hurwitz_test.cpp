#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "moduli/hurwitz.hpp"

using namespace moduli;
using namespace moduli::hurwitz;

namespace {

using plain_perm = std::vector<int>;

partition plain_cycle_type(const plain_perm& p) {
    std::vector<bool> seen(p.size());
    std::vector<int> lengths;
    for (std::size_t i = 0; i < p.size(); ++i) {
        int len = 0;
        for (std::size_t j = i; !seen[j]; j = p[j]) seen[j] = true, ++len;
        if (len) lengths.push_back(len);
    }
    return partition(lengths);
}

// Counts tuples (s_1..s_m) over all of S_n with the prescribed cycle types, product the
// identity and a transitive group, then divides by n!. No class representatives, no
// solving for the last factor.
rational naive_hurwitz(const ramification_profile& prof) {
    const int n = prof.degree;
    std::vector<plain_perm> group;
    plain_perm p(n);
    std::iota(p.begin(), p.end(), 0);
    do group.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));

    const std::size_t m = prof.passports.size();
    std::vector<std::vector<const plain_perm*>> classes(m);
    for (std::size_t i = 0; i < m; ++i)
        for (auto& s : group)
            if (plain_cycle_type(s) == prof.passports[i]) classes[i].push_back(&s);

    long long count = 0;
    std::vector<const plain_perm*> chosen(m);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == m) {
            plain_perm prod(n);
            std::iota(prod.begin(), prod.end(), 0);
            for (auto* s : chosen)
                for (int& x : prod) x = (*s)[x];
            for (int k = 0; k < n; ++k)
                if (prod[k] != k) return;
            // orbit of 0 under all chosen permutations
            std::vector<bool> reached(n);
            std::vector<int> stack{0};
            reached[0] = true;
            while (!stack.empty()) {
                int x = stack.back();
                stack.pop_back();
                for (auto* s : chosen)
                    if (!reached[(*s)[x]]) reached[(*s)[x]] = true, stack.push_back((*s)[x]);
            }
            if (std::all_of(reached.begin(), reached.end(), [](bool b) { return b; })) ++count;
            return;
        }
        for (auto* s : classes[i]) {
            chosen[i] = s;
            rec(i + 1);
        }
    };
    rec(0);
    return rational(big_int(count), factorial(n));
}

ramification_profile prof(int n, const char* s) { return ramification_profile::parse(n, s); }

} // namespace

TEST(Permutations, ClassSizesSumToFactorial) {
    for (int n = 1; n <= 7; ++n) {
        big_int total = 0;
        for (auto& lambda : partitions_of(n)) {
            total += class_size(lambda);
            EXPECT_EQ(cycle_type(class_representative(lambda)), lambda);
        }
        EXPECT_EQ(total, factorial(n));
    }
    EXPECT_EQ(class_elements(partition{2, 2}).size(), 3u);
    for (auto& s : class_elements(partition{3, 1})) EXPECT_EQ(cycle_type(s), (partition{3, 1}));
}

TEST(Hurwitz, DocumentedValues) {
    EXPECT_EQ(hurwitz_bruteforce(prof(2, "2;2")), rational(1, 2));
    EXPECT_EQ(hurwitz_bruteforce(prof(4, "4;2,2;2,1,1")), rational(1, 2));
    EXPECT_EQ(hurwitz_bruteforce(prof(4, "4;3,1;2,1,1")), rational(1));
    EXPECT_EQ(hurwitz_bruteforce(prof(3, "3;2,1;2,1")), rational(1));
    EXPECT_EQ(hurwitz_bruteforce(prof(1, "1")), rational(1));
    // An unramified branch point changes nothing.
    EXPECT_EQ(hurwitz_bruteforce(prof(3, "3;2,1;2,1;1,1,1")), rational(1));
}

TEST(Hurwitz, BruteForceAgreesWithNaiveEnumeration) {
    for (const char* s : {"2;2", "2;2;2;2", "3;3", "3;2,1;2,1", "3;3;3", "2,1;2,1;2,1;2,1", "4;2,2;2,1,1", "4;3,1;2,1,1",
                          "3,1;3,1;2,2", "2,2;2,2;2,1,1;2,1,1", "4;4;2,1,1;2,1,1"}) {
        int n = partition::parse(std::string(s).substr(0, std::string(s).find(';'))).sum();
        auto p = prof(n, s);
        EXPECT_EQ(hurwitz_bruteforce(p), naive_hurwitz(p)) << s;
    }
}

TEST(Hurwitz, ClassAlgebraAgreesWithBruteForce) {
    for (const char* s : {"2;2", "2;2;2;2", "3;3;3", "4;4;2,1,1;2,1,1", "5;3,1,1;2,2,1", "5;5;2,1,1,1;2,1,1,1",
                          "6;3,1,1,1;2,2,1,1;2,1,1,1,1", "6;6;2,2,1,1", "6;4,2;2,2,2"}) {
        int n = partition::parse(std::string(s).substr(0, std::string(s).find(';'))).sum();
        auto p = prof(n, s);
        EXPECT_EQ(hurwitz_class_algebra(p), hurwitz_bruteforce(p)) << s;
    }
}

TEST(Hurwitz, ClosedFormPolynomialCase) {
    EXPECT_EQ(hurwitz_polynomial_closed(prof(4, "4;2,2;2,1,1")), rational(1, 2));
    EXPECT_EQ(hurwitz_polynomial_closed(prof(4, "4;3,1;2,1,1")), rational(1));
    // Two different passports of equal length: the count is 1.
    EXPECT_EQ(hurwitz_bruteforce(prof(5, "5;3,1,1;2,2,1")), rational(1));
    EXPECT_EQ(hurwitz_polynomial_closed(prof(5, "5;3,1,1;2,2,1")), rational(1));
    EXPECT_EQ(hurwitz_polynomial_closed(prof(6, "6;3,1,1,1;2,2,1,1;2,1,1,1,1")), rational(9));
    EXPECT_EQ(hurwitz_bruteforce(prof(6, "6;3,1,1,1;2,2,1,1;2,1,1,1,1")), rational(9));
}

TEST(Hurwitz, Preconditions) {
    auto kind_of = [](auto&& f) {
        try {
            f();
        } catch (const error& e) {
            return e.kind();
        }
        return error_kind::unstable;
    };
    EXPECT_EQ(kind_of([] { hurwitz_class_algebra(prof(4, "2,2;2,2;2,2")); }), error_kind::no_full_cycle_passport);
    EXPECT_EQ(kind_of([] { hurwitz_bruteforce(prof(8, "8;8")); }), error_kind::degree_too_large);
    EXPECT_EQ(kind_of([] { hurwitz_bruteforce(prof(2, "2;2"), 1); }), error_kind::precondition_violated);
    EXPECT_EQ(kind_of([] { hurwitz_bruteforce(prof(3, "3;3;2,1")); }), error_kind::non_integral_genus);
    EXPECT_EQ(kind_of([] { hurwitz_polynomial_closed(prof(3, "3;3")); }), error_kind::precondition_violated);
    EXPECT_EQ(kind_of([] { hurwitz_polynomial_closed(prof(2, "2;2;2;2")); }), error_kind::precondition_violated);
}

TEST(Hurwitz, ClassDistributionKeepsTotalMass) {
    conj_class_distribution d(5);
    EXPECT_EQ(d.total_mass(), rational(1));
    d.multiply_class_sum(partition{2, 1, 1, 1});
    EXPECT_EQ(d.total_mass(), rational(10));
    d.multiply_class_sum(partition{3, 1, 1});
    EXPECT_EQ(d.total_mass(), rational(200));
}

TEST(GeneralizedPolynomials, GenusOneClosedForm) {
    for (int l = 2; l <= 6; ++l) EXPECT_EQ(H1_closed(l), H_generalized(1, l)) << l;
    EXPECT_EQ(H_generalized(1, 2), rational(1, 2));
    // Genus zero: an n-cycle has n^{n-2} minimal factorizations into transpositions.
    for (int n = 2; n <= 7; ++n) EXPECT_EQ(H_generalized(0, n), pow(rational(n), n - 3)) << n;
}

TEST(GeneralizedPolynomials, Tau3gSums) {
    EXPECT_EQ(tau3g_sum(1, 0), rational(1, 24));
    EXPECT_EQ(tau3g_sum(1, 2), rational(1, 24));
    EXPECT_EQ(tau3g_sum(2, 0), rational(1, 1152));
    for (int l = 0; l <= 3; ++l) EXPECT_EQ(tau3g_sum(0, l), rational(1));
}

TEST(GeneralizedPolynomials, CombinatorialIdentity) {
    EXPECT_EQ(combinatorial_identity(3, 2), rational(0));
    EXPECT_EQ(combinatorial_identity(2, 2), rational(2));
    EXPECT_EQ(combinatorial_identity(0, 0), rational(1));
    for (int g = 1; g <= 8; ++g) {
        for (int k = 0; k < g; ++k) EXPECT_EQ(combinatorial_identity(g, k), rational(0));
        EXPECT_EQ(combinatorial_identity(g, g), rational(factorial(g)));
    }
}

TEST(GeneralizedPolynomials, DeltaPsiIntegral) {
    EXPECT_EQ(delta_psi_integral(1, 2), rational(1, 24));
    EXPECT_EQ(delta_psi_integral(0, 3), rational(1));
    EXPECT_EQ(delta_psi_integral(0, 1), rational(1));
    // Genus zero: the integral of psi^{K-2} over a point-like cycle is 1 for every K.
    for (int K = 1; K <= 7; ++K) EXPECT_EQ(delta_psi_integral(0, K), rational(1)) << K;
}

TEST(GeneralizedPolynomials, DifferenceTable) {
    s_difference_table t1(1);
    EXPECT_EQ(t1(2, 1), rational(1, 24));
    EXPECT_EQ(t1(3, 3), delta_psi_integral(1, 3));
    s_difference_table t2(2);
    EXPECT_EQ(t2(3, 1), rational(1, 1152));
    for (int g = 0; g <= 2; ++g) {
        s_difference_table t(g);
        for (int l = 0; l <= 2; ++l) EXPECT_EQ(t(g + l + 1, l + 1), tau3g_sum(g, l)) << g << " " << l;
    }
    try {
        t1(4, 2);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.kind(), error_kind::domain_violation);
    }
    EXPECT_THROW(t1(1, 2), error);
    EXPECT_THROW(t1(0, 0), error);
}
