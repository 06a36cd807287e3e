#include <gtest/gtest.h>

#include <set>

#include "moduli/combinatorics.hpp"

using namespace moduli;

namespace {

// Number of partitions of a into exactly j parts, by p(a, j) = p(a-1, j-1) + p(a-j, j).
long long count_parts(int a, int j) {
    if (a == 0 && j == 0) return 1;
    if (a <= 0 || j <= 0) return 0;
    return count_parts(a - 1, j - 1) + count_parts(a - j, j);
}

} // namespace

TEST(Partition, SortsAndPrints) {
    partition p{1, 3, 2, 1};
    EXPECT_EQ(p.str(), "3,2,1,1");
    EXPECT_EQ(p.sum(), 7);
    EXPECT_EQ(p.length(), 4);
    EXPECT_EQ(partition::parse("1, 2,1"), (partition{2, 1, 1}));
    EXPECT_THROW(partition::parse("2,,1"), error);
    EXPECT_THROW(partition::parse("2,0"), error);
}

TEST(Partition, CountsMatchTheIntegerPartitionSequence) {
    const int p[] = {1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77};
    for (int a = 1; a <= 12; ++a) {
        auto all = partitions_of(a);
        EXPECT_EQ(static_cast<int>(all.size()), p[a]) << a;
        std::set<partition> distinct(all.begin(), all.end());
        EXPECT_EQ(distinct.size(), all.size());
        for (auto& q : all) EXPECT_EQ(q.sum(), a);
    }
}

TEST(Partition, FixedLengthCountsMatchRecurrence) {
    for (int a = 1; a <= 14; ++a)
        for (int j = 1; j <= a; ++j) {
            auto part = partitions_of(a, j);
            EXPECT_EQ(static_cast<long long>(part.size()), count_parts(a, j)) << a << " " << j;
            for (auto& q : part) EXPECT_EQ(q.length(), j);
        }
    EXPECT_TRUE(partitions_of(3, 4).empty());
}

TEST(Counting, FactorialBinomialAut) {
    EXPECT_EQ(factorial(0), 1);
    EXPECT_EQ(factorial(10), 3628800);
    EXPECT_EQ(binomial(10, 3), 120);
    EXPECT_EQ(binomial(3, 5), 0);
    for (int n = 0; n <= 12; ++n) {
        big_int row = 0;
        for (int k = 0; k <= n; ++k) row += binomial(n, k);
        EXPECT_EQ(row, big_int(1) << n);
    }
    EXPECT_EQ(aut_partition(partition{2, 2, 1, 1, 1}), 12);
    EXPECT_EQ(aut_sequence(std::vector<int>{3, 1, 3, 3}), 6);
}

TEST(Counting, Subsets) {
    EXPECT_EQ(subsets(5).size(), 32u);
    auto s = subsets(std::vector<char>{'a', 'b', 'c'});
    EXPECT_EQ(s.size(), 8u);
    EXPECT_TRUE(s.front().empty());
    EXPECT_EQ(s.back().size(), 3u);
}

TEST(RiemannHurwitz, Genus) {
    EXPECT_EQ(riemann_hurwitz_genus(ramification_profile::parse(4, "4;2,2;2,1,1")), 0);
    EXPECT_EQ(riemann_hurwitz_genus(ramification_profile::parse(2, "2;2")), 0);
    EXPECT_EQ(riemann_hurwitz_genus(ramification_profile::parse(2, "2;2;2;2")), 1);
    EXPECT_EQ(riemann_hurwitz_genus(ramification_profile::parse(3, "3;3;2,1;2,1")), 1);
}

TEST(RiemannHurwitz, Errors) {
    try {
        riemann_hurwitz_genus(ramification_profile::parse(3, "2,1;2,1"));
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.kind(), error_kind::negative_genus);
    }
    try {
        riemann_hurwitz_genus(ramification_profile::parse(3, "3;3;2,1"));
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.kind(), error_kind::non_integral_genus);
    }
    EXPECT_THROW(ramification_profile::parse(4, "4;2,1"), error);
}
