#include <gtest/gtest.h>

#include "moduli/hierarchy.hpp"

using namespace moduli;
using namespace moduli::hierarchy;

namespace {

error_kind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const error& e) {
        return e.kind();
    }
    return error_kind::unstable;
}

} // namespace

TEST(Bracket, GenusAndPrinting) {
    auto b = bracket::make(3, {{8, 1}, {0, 0}, {0, 0}});
    EXPECT_EQ(b.genus, 3);
    EXPECT_EQ(b.str(), "<tau0,0^2 tau8,1>_3");
    EXPECT_EQ(bracket::make(3, {{0, 0}, {0, 0}, {0, 0}}).genus, std::nullopt);
}

TEST(Expansion, LeibnizCompleteness) {
    for (std::vector<int> extra : {std::vector<int>{}, {1}, {1, 1}, {0, 1, 1}}) {
        auto ex = boussinesq_expand({5, 1, extra});
        ASSERT_EQ(ex.split_counts.size(), 4u);
        for (auto c : ex.split_counts) EXPECT_EQ(c, std::size_t(1) << extra.size());
    }
    EXPECT_EQ(kind_of([] { boussinesq_expand({0, 1, {}}); }), error_kind::precondition_violated);
    EXPECT_EQ(kind_of([] { boussinesq_expand({3, 2, {}}); }), error_kind::precondition_violated);
    EXPECT_EQ(kind_of([] { boussinesq_expand({3, 1, {2}}); }), error_kind::precondition_violated);
}

TEST(Expansion, NoBracketGetsTwoGenera) {
    for (int n = 1; n <= 9; ++n)
        for (int m = 0; m <= 1; ++m) {
            auto ex = boussinesq_expand({n, m, {1}});
            for (auto* side : {&ex.lhs, &ex.rhs})
                for (auto& t : *side)
                    for (auto& f : t.factors) {
                        ASSERT_TRUE(f.genus.has_value());
                        EXPECT_EQ(f.genus, bracket::make(3, f.insertions).genus);
                    }
        }
}

TEST(Check, TabulatedInstances) {
    rspin::engine e(3);
    struct row {
        relation_instance inst;
        rational both;
    };
    for (auto& r : std::vector<row>{{{4, 1, {1, 1}}, rational(7, 18)},
                                    {{6, 1, {1}}, rational(5, 216)},
                                    {{8, 1, {}}, rational(13, 15552)}}) {
        auto rep = boussinesq_check(r.inst, e);
        EXPECT_TRUE(rep.equal) << r.inst.str();
        EXPECT_EQ(rep.lhs, r.both) << r.inst.str();
        EXPECT_EQ(rep.rhs, r.both) << r.inst.str();
        auto j = rep.to_json();
        EXPECT_EQ(j.at("lhs"), r.both.str());
        EXPECT_FALSE(j.at("terms").empty());
    }
}

TEST(Check, SmallInstances) {
    rspin::engine e(3);
    auto empty = boussinesq_check({1, 0, {}}, e);
    EXPECT_TRUE(empty.equal);
    EXPECT_EQ(empty.lhs, rational(0));
    auto small = boussinesq_check({2, 0, {0, 1}}, e);
    EXPECT_TRUE(small.equal);
    EXPECT_EQ(small.lhs, rational(7));
    for (int n = 1; n <= 7; ++n)
        for (int m = 0; m <= 1; ++m)
            for (std::vector<int> extra : {std::vector<int>{}, {1}, {1, 1}, {0, 1}}) {
                relation_instance inst{n, m, extra};
                EXPECT_TRUE(boussinesq_check(inst, e).equal) << inst.str();
            }
    rspin::engine e4(4);
    EXPECT_EQ(kind_of([&] { boussinesq_check({1, 0, {}}, e4); }), error_kind::precondition_violated);
}

TEST(Evaluator, StringReductionAndDomain) {
    rspin::engine e(3);
    evaluator ev(e);
    // <tau_{0,0} tau_{7,1}>_3 = <tau_{6,1}>_3
    EXPECT_EQ(ev(bracket::make(3, {{7, 1}, {0, 0}})), rational(1, 31104));
    EXPECT_EQ(ev(bracket::make(3, {{0, 0}, {0, 0}, {0, 1}})), rational(1));
    EXPECT_EQ(ev(bracket::make(3, {{0, 0}, {0, 0}, {0, 0}})), rational(0));
    // Two descendants and no tau_{0,0} are outside the engine.
    auto two = bracket::make(3, {{2, 1}, {2, 1}});
    ASSERT_TRUE(two.genus.has_value());
    EXPECT_EQ(kind_of([&] { ev(two); }), error_kind::not_engine_computable);
}

TEST(Chain, ReDerivesTopValue) {
    rspin::engine e(3);
    auto known = solve_chain({{4, 1, {1, 1}}, {6, 1, {1}}, {8, 1, {}}}, e.primaries());
    EXPECT_EQ(known.at(bracket::make(3, {{2, 1}, {0, 1}, {0, 1}})), rational(1, 36));
    EXPECT_EQ(known.at(bracket::make(3, {{4, 1}, {0, 1}})), rational(1, 864));
    EXPECT_EQ(known.at(bracket::make(3, {{6, 1}})), rational(1, 31104));
    // Out of order, the second relation lacks its input.
    EXPECT_EQ(kind_of([&] { solve_chain({{6, 1, {1}}}, e.primaries()); }), error_kind::not_engine_computable);
}
