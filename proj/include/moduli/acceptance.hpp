#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "moduli/combinatorics.hpp"
#include "moduli/hierarchy.hpp"
#include "moduli/hurwitz.hpp"
#include "moduli/m0n.hpp"
#include "moduli/psi_classes.hpp"
#include "moduli/rational.hpp"
#include "moduli/rspin.hpp"

// The end-to-end checks shared by `moduli_cli selftest` and the acceptance test binary.
namespace moduli::acceptance {

struct outcome {
    bool pass = false;
    std::string detail;
    double elapsed_ms = 0;
};

struct criterion {
    int id;
    std::string title;
    std::function<outcome()> run;
};

struct report {
    int id;
    std::string title;
    outcome result;
};

namespace detail {

using clock = std::chrono::steady_clock;

inline double ms_since(clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
}

// Collects mismatches; the first few go into the detail line.
class tally {
public:
    void check(bool ok, const std::string& what) {
        ++total_;
        if (ok) return;
        if (failures_.size() < 3) failures_.push_back(what);
        ++failed_;
    }
    bool ok() const { return failed_ == 0; }
    int total() const { return total_; }
    std::string summary(const std::string& noun) const {
        std::ostringstream out;
        out << (total_ - failed_) << "/" << total_ << " " << noun;
        for (auto& f : failures_) out << "; " << f;
        return out.str();
    }

private:
    int total_ = 0;
    int failed_ = 0;
    std::vector<std::string> failures_;
};

inline std::string eq_text(const std::string& what, const rational& got, const rational& want) {
    return what + " = " + got.str() + (got == want ? "" : " (expected " + want.str() + ")");
}

// Multisets of non-identity passports of degree n whose defects n - length sum to `defect`,
// each preceded by the full cycle (n).
inline std::vector<ramification_profile> profiles_with_full_cycle(int n, int defect) {
    std::vector<partition> kinds;
    for (auto& p : partitions_of(n))
        if (p.length() < n) kinds.push_back(p);
    std::vector<ramification_profile> out;
    std::vector<partition> cur{partition{n}};
    std::function<void(std::size_t, int)> rec = [&](std::size_t from, int left) {
        if (left == 0) {
            out.push_back({n, cur});
            return;
        }
        for (std::size_t i = from; i < kinds.size(); ++i) {
            int d = n - kinds[i].length();
            if (d > left) continue;
            cur.push_back(kinds[i]);
            rec(i, left - d);
            cur.pop_back();
        }
    };
    rec(0, defect);
    return out;
}

inline outcome timed(const std::function<outcome()>& body) {
    auto t0 = clock::now();
    outcome o = body();
    o.elapsed_ms = ms_since(t0);
    return o;
}

} // namespace detail

inline outcome check_tau61() {
    return detail::timed([] {
        auto t0 = detail::clock::now();
        rspin::engine e(3);
        rational v = e.correlator(6, 1, {}, 3);
        double ms = detail::ms_since(t0);
        bool ok = v == rational(1, 31104) && ms < 10'000;
        return outcome{ok, detail::eq_text("<tau6,1>_3", v, rational(1, 31104)) + ", " + std::to_string(int(ms)) + " ms (limit 10000)"};
    });
}

inline outcome check_tabulated_s_numbers() {
    return detail::timed([] {
        struct row {
            int n, g;
            const char* insertions;
            const char* want;
        };
        const std::vector<row> rows = {
            {1, 1, "1:3,1:1", "1/3"},        {1, 1, "1:2,1:2", "11/36"},       {2, 2, "1:4", "41/288"},
            {2, 1, "0:1,1:1,1:2", "7/36"},   {2, 1, "0:2,1:1,1:1", "1/6"},     {3, 2, "0:1,1:3", "77/1440"},
            {3, 2, "0:2,1:2", "61/1440"},    {3, 2, "0:3,1:1", "31/480"},      {3, 1, "0:1,0:1,1:1,1:1", "1/9"},
            {7, 3, "0:1,0:1,0:1,0:1", "209/362880"},
            {1, 1, "1:1,1:2", "1/6"},        {2, 1, "0:1,1:1,1:1", "1/12"},    {2, 2, "1:3", "1/27"},
            {3, 2, "0:2,1:1", "7/540"},      {3, 2, "0:1,1:2", "11/1080"},     {4, 2, "0:1,0:1,1:1", "1/270"},
            {4, 3, "0:3", "5/1944"},         {5, 3, "0:1,0:2", "37/68040"},    {6, 3, "0:1,0:1,0:1", "37/272160"},
            {5, 3, "0:1,0:1", "1/120960"},
        };
        rspin::engine e(3);
        detail::tally t;
        for (auto& r : rows) {
            rspin::s_key key{3, r.n, r.g, 1, rspin::parse_etas(r.insertions)};
            key.canonicalize();
            rational v = e.s_number(key);
            t.check(v == rational::parse(r.want), detail::eq_text(key.str(), v, rational::parse(r.want)));
        }
        return outcome{t.ok(), t.summary("tabulated S-numbers")};
    });
}

inline outcome check_r4() {
    return detail::timed([] {
        rspin::engine e(4);
        detail::tally t;
        rational tau10 = e.correlator(1, 0, {}, 1);
        t.check(tau10 == rational(1, 8), detail::eq_text("r=4 <tau1,0>_1", tau10, rational(1, 8)));

        rspin::engine fresh(4);
        auto sol = fresh.solve_shat1();
        std::map<rspin::shat1_key, rational> want = {
            {rspin::shat1_key::parse(4, "2:2,2:-2"), rational(1, 32)},
            {rspin::shat1_key::parse(4, "2:3,2:-3"), rational(1, 12)},
        };
        t.check(sol.table() == want, "nonzero table differs: " + sol.to_json().at("entries").dump());
        t.check(sol.unresolved.empty(), std::to_string(sol.unresolved.size()) + " candidates left undetermined");
        int zeros = 0;
        for (auto& k : sol.candidates) {
            auto it = sol.values.find(k);
            if (it == sol.values.end()) continue;
            if (it->second.is_zero()) ++zeros;
            else t.check(want.count(k) > 0, "unexpected nonzero " + k.str());
        }
        return outcome{t.ok(), "<tau1,0>_1 = " + tau10.str() + ", " + std::to_string(sol.table().size()) + " nonzero, " +
                                   std::to_string(zeros + sol.vanishing.size()) + " zero, " +
                                   std::to_string(sol.unresolved.size()) + " unresolved; " + t.summary("checks")};
    });
}

inline outcome check_low_r() {
    return detail::timed([] {
        rspin::engine e3(3), e2(2);
        rational a = e3.correlator(1, 1, {1, 1, 1, 0}, 0);
        rational b = e2.correlator(1, 0, {}, 1);
        bool ok = a == rational(1, 3) && b == rational(1, 24);
        return outcome{ok, detail::eq_text("r=3 <tau1,1 tau0,1^3 tau0,0>_0", a, rational(1, 3)) + ", " +
                               detail::eq_text("r=2 <tau1,0>_1", b, rational(1, 24))};
    });
}

inline outcome check_hurwitz_oracles() {
    return detail::timed([] {
        auto t0 = detail::clock::now();
        detail::tally closed, dp;
        for (int n = 2; n <= 5; ++n)
            for (auto& prof : detail::profiles_with_full_cycle(n, n - 1)) {
                if (prof.passports.size() < 3) continue;
                rational a = hurwitz::hurwitz_bruteforce(prof), b = hurwitz::hurwitz_polynomial_closed(prof);
                closed.check(a == b, prof.str() + ": brute " + a.str() + " vs closed " + b.str());
            }
        // The number of branch points is unbounded in general; genus <= 1 keeps the family finite.
        for (int n = 2; n <= 6; ++n)
            for (int g = 0; g <= 1; ++g)
                for (auto& prof : detail::profiles_with_full_cycle(n, n - 1 + 2 * g)) {
                    rational a = hurwitz::hurwitz_bruteforce(prof), b = hurwitz::hurwitz_class_algebra(prof);
                    dp.check(a == b, prof.str() + ": brute " + a.str() + " vs class algebra " + b.str());
                }
        double ms = detail::ms_since(t0);
        bool ok = closed.ok() && dp.ok() && ms < 60'000;
        return outcome{ok, closed.summary("closed-form profiles (n<=5)") + ", " + dp.summary("class-algebra profiles (n<=6, g<=1)") +
                               ", " + std::to_string(int(ms)) + " ms (limit 60000)"};
    });
}

inline outcome check_h1_closed() {
    return detail::timed([] {
        detail::tally t;
        for (int l = 2; l <= 6; ++l) {
            rational a = hurwitz::H1_closed(l), b = hurwitz::H_generalized(1, l);
            t.check(a == b, "l=" + std::to_string(l) + ": " + a.str() + " vs " + b.str());
        }
        return outcome{t.ok(), t.summary("values of l")};
    });
}

inline outcome check_tau3g() {
    return detail::timed([] {
        auto t0 = detail::clock::now();
        detail::tally t;
        for (int g = 0; g <= 2; ++g) {
            rational want = rational(1) / (pow(rational(24), g) * rational(factorial(g)));
            for (int l = 0; l <= 3; ++l) {
                rational v = hurwitz::tau3g_sum(g, l);
                t.check(v == want, "g=" + std::to_string(g) + " l=" + std::to_string(l) + ": " + v.str());
            }
        }
        double ms = detail::ms_since(t0);
        return outcome{t.ok() && ms < 120'000, t.summary("(g,l) pairs") + ", " + std::to_string(int(ms)) + " ms (limit 120000)"};
    });
}

inline outcome check_psi_hurwitz() {
    return detail::timed([] {
        struct row {
            const char* profile;
            int n;
            rational want;
        };
        const std::vector<row> rows = {{"4;3,1;2,1,1", 4, 1}, {"4;2,2;2,1,1", 4, rational(1, 2)}, {"3;2,1;2,1", 3, 1}};
        detail::tally t;
        std::string values;
        for (auto& r : rows) {
            auto prof = ramification_profile::parse(r.n, r.profile);
            rational v = m0n::psi_hurwitz(prof), c = hurwitz::hurwitz_polynomial_closed(prof);
            t.check(v == r.want && c == r.want, prof.str() + ": " + v.str() + " vs closed " + c.str());
            values += (values.empty() ? "" : ", ") + prof.str() + " -> " + v.str();
        }
        return outcome{t.ok(), values};
    });
}

inline outcome check_psi_order() {
    return detail::timed([] {
        detail::tally t;
        int formal = 0;
        for (int N = 4; N <= 6; ++N) {
            const m0n::mask points = m0n::first_points(N);
            const auto base = m0n::taut_class::fundamental(points);
            for (int k = 1; k <= N - 2; ++k) {
                m0n::psi_context ctx{points, 0, 0};
                for (int x = 1; x <= k; ++x) ctx.residue |= m0n::bit(x);
                std::vector<int> free;
                for (int x = k + 1; x < N; ++x) free.push_back(x);
                const int limit = std::min(3, N - 3);
                std::vector<int> b(N, 0);
                std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
                    if (i == free.size()) {
                        std::vector<int> order = free;
                        auto reference = m0n::multiply_psi_p(base, ctx, b, order);
                        while (std::next_permutation(order.begin(), order.end())) {
                            auto other = m0n::multiply_psi_p(base, ctx, b, order);
                            if (other == reference) ++formal;
                            std::ostringstream what;
                            what << "N=" << N << " k=" << k << " b=";
                            for (int x : b) what << x;
                            t.check(m0n::numerically_equal(other, reference), what.str());
                        }
                        return;
                    }
                    for (int v = 0; v <= left; ++v) {
                        b[free[i]] = v;
                        rec(i + 1, left - v);
                    }
                    b[free[i]] = 0;
                };
                rec(0, limit);
            }
        }
        return outcome{t.ok(), t.summary("reorderings numerically equal") + " (" + std::to_string(formal) + " also formally identical)"};
    });
}

inline outcome check_boussinesq() {
    return detail::timed([] {
        rspin::engine e(3);
        const std::vector<hierarchy::relation_instance> chain = {{4, 1, {1, 1}}, {6, 1, {1}}, {8, 1, {}}};
        detail::tally t;
        for (auto& inst : chain) {
            auto rep = hierarchy::boussinesq_check(inst, e);
            t.check(rep.equal, inst.str() + ": " + rep.lhs.str() + " vs " + rep.rhs.str());
        }
        auto solved = hierarchy::solve_chain(chain, e.primaries());
        auto target = hierarchy::bracket::make(3, {{6, 1}});
        auto it = solved.find(target);
        rational v = it == solved.end() ? rational(0) : it->second;
        t.check(v == rational(1, 31104), "chain gives " + v.str());
        return outcome{t.ok(), t.summary("checks") + ", chained " + detail::eq_text(target.str(), v, rational(1, 31104))};
    });
}

inline outcome check_properties() {
    return detail::timed([] {
        detail::tally mult, selection, identity, endpoint;

        // Genus zero: S is unchanged when every multiplicity is replaced by 1.
        for (int r = 3; r <= 4; ++r) {
            rspin::engine e(r);
            for (int s = 1; s <= 3; ++s) {
                std::vector<rspin::eta> ins(s);
                std::function<void(int)> rec = [&](int i) {
                    if (i == s) {
                        std::vector<rspin::eta> ones = ins;
                        for (auto& x : ones) x.mult = 1;
                        for (int n = 0; n <= 3; ++n)
                            for (int m = 0; m <= r - 2; ++m) {
                                rspin::s_key k{r, n, 0, m, ins}, k1{r, n, 0, m, ones};
                                rational a = e.s_number(k.canonicalize()), b = e.s_number(k1.canonicalize());
                                mult.check(a == b, k.str() + " = " + a.str() + " vs " + b.str());
                            }
                        return;
                    }
                    for (int q = 0; q <= r - 2; ++q)
                        for (int a = 1; a <= 3; ++a) {
                            ins[i] = {q, a};
                            rec(i + 1);
                        }
                };
                rec(0);
            }
        }

        // Every nonzero S in a warmed memo obeys the selection rule.
        {
            rspin::engine e(3);
            e.correlator(6, 1, {}, 3);
            e.correlator(1, 1, {1, 1, 1, 0}, 0);
            for (auto& [key, v] : e.numeric().memo_entries()) {
                if (v.is_zero()) continue;
                std::vector<int> labels{key.m};
                for (auto& x : key.insertions) labels.push_back(x.label);
                rational D = rspin::dimension_D(3, key.g, labels);
                selection.check(rational(key.n) + D == rational(2 * key.g + key.s() - 2), key.str());
            }
        }

        for (int g = 0; g <= 8; ++g)
            for (int k = 0; k <= g; ++k) {
                rational v = hurwitz::combinatorial_identity(g, k);
                rational want = k < g ? rational(0) : rational(factorial(g));
                identity.check(v == want, "g=" + std::to_string(g) + " k=" + std::to_string(k) + ": " + v.str());
            }

        for (int g = 0; g <= 2; ++g) {
            hurwitz::s_difference_table table(g);
            for (int l = 0; l <= 2; ++l) {
                rational a = table(g + l + 1, l + 1), b = hurwitz::tau3g_sum(g, l);
                endpoint.check(a == b, "g=" + std::to_string(g) + " l=" + std::to_string(l) + ": " + a.str() + " vs " + b.str());
            }
        }

        bool ok = mult.ok() && selection.ok() && identity.ok() && endpoint.ok();
        return outcome{ok, mult.summary("multiplicity keys") + ", " + selection.summary("nonzero memo entries") + ", " +
                               identity.summary("identity cases") + ", " + endpoint.summary("endpoints")};
    });
}

inline std::vector<criterion> criteria() {
    return {
        {1, "r=3 <tau6,1>_3 = 1/31104", check_tau61},
        {2, "tabulated r=3 S-numbers", check_tabulated_s_numbers},
        {3, "r=4 genus-one values and solver table", check_r4},
        {4, "r=3 genus-zero and r=2 genus-one correlators", check_low_r},
        {5, "Hurwitz oracle equivalence", check_hurwitz_oracles},
        {6, "H(1;l) closed form", check_h1_closed},
        {7, "tau3g sums", check_tau3g},
        {8, "Psi-class Hurwitz evaluator", check_psi_hurwitz},
        {9, "Psi_p independent of increment order", check_psi_order},
        {10, "Boussinesq relations and chain", check_boussinesq},
        {11, "property suites", check_properties},
    };
}

// Runs every criterion on `jobs` threads; the reports come back ordered by id. An
// exception inside a criterion counts as a failure.
inline std::vector<report> run_all(int jobs = 1) {
    auto list = criteria();
    std::vector<report> out(list.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < list.size(); i = next++) {
            out[i].id = list[i].id;
            out[i].title = list[i].title;
            try {
                out[i].result = list[i].run();
            } catch (const std::exception& ex) {
                out[i].result = {false, std::string("exception: ") + ex.what(), 0};
            }
        }
    };
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(list.size())));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return out;
}

inline std::string format_line(const report& r) {
    std::ostringstream out;
    out << "AC" << r.id << " " << (r.result.pass ? "PASS" : "FAIL") << "  " << r.title << " [" << r.result.detail << "] ("
        << static_cast<long long>(r.result.elapsed_ms) << " ms)";
    return out.str();
}

} // namespace moduli::acceptance
