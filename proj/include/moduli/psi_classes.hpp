#pragma once

#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "moduli/combinatorics.hpp"
#include "moduli/error.hpp"
#include "moduli/m0n.hpp"
#include "moduli/rational.hpp"

namespace moduli::m0n {

// Which points play which role for one class Psi_p: the pole x^1_1 and the points x^p_*.
// Every other point carries an exponent b.
struct psi_context {
    mask points = 0;
    int pole = 0;
    mask residue = 0;

    mask others() const { return points & ~(bit(pole) | residue); }
};

namespace detail {

inline taut_class psi_p_rec(const taut_class& c, const psi_context& ctx, const std::vector<int>& b,
                            const std::vector<int>& priority, std::map<std::vector<int>, taut_class>& memo) {
    auto hit = memo.find(b);
    if (hit != memo.end()) return hit->second;

    int x = -1;
    for (int p : priority)
        if (b[p] > 0) {
            x = p;
            break;
        }
    if (x < 0) return c;

    std::vector<int> lowered = b;
    --lowered[x];
    const mask kept = bit(ctx.pole) | ctx.residue | bit(x);
    taut_class result = rational(b[x]) * mul_pulled_back_psi(psi_p_rec(c, ctx, lowered, priority, memo), x, kept);

    const mask rest = ctx.others() & ~bit(x);
    for (mask u = rest; u; u = (u - 1) & rest) {
        int a_u = 0;
        for (mask r = u; r; r &= r - 1) a_u += lowered[std::countr_zero(r)];
        if (a_u == 0) continue;
        std::vector<int> moved = lowered;
        for (mask r = u; r; r &= r - 1) moved[std::countr_zero(r)] = 0;
        moved[x] = lowered[x] + a_u;
        result -= rational(a_u) * mul_boundary(psi_p_rec(c, ctx, moved, priority, memo), u | bit(x));
    }
    memo.emplace(b, result);
    return result;
}

} // namespace detail

// c * Psi_p(b). b is indexed by point; entries outside ctx.others() must be zero.
// priority lists points in the order in which exponents are peeled off; the result
// does not depend on it.
inline taut_class multiply_psi_p(const taut_class& c, const psi_context& ctx, const std::vector<int>& b,
                                 std::vector<int> priority = {}) {
    if (ctx.points != c.points()) throw error(error_kind::precondition_violated, "context and class on different spaces");
    int total = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] < 0) throw error(error_kind::precondition_violated, "negative exponent");
        if (b[i] > 0 && !(ctx.others() & bit(static_cast<int>(i))))
            throw error(error_kind::precondition_violated, "exponent on the pole or on a residue point");
        total += b[i];
    }
    if (total > c.dimension()) throw error(error_kind::degree_overflow, "sum of b exceeds N-3");
    std::vector<int> full(max_points, 0);
    std::copy(b.begin(), b.end(), full.begin());
    if (priority.empty()) {
        for (mask r = ctx.others(); r; r &= r - 1) priority.push_back(std::countr_zero(r));
    }
    std::map<std::vector<int>, taut_class> memo;
    return detail::psi_p_rec(c, ctx, full, priority, memo);
}

// Marked points x^i_j of a polynomial-type cover: branch 0 carries the single pole.
class polynomial_cover_space {
public:
    explicit polynomial_cover_space(ramification_profile prof) : prof_(std::move(prof)) {
        prof_.validate();
        const int n = prof_.degree;
        if (prof_.passports.size() < 3) throw error(error_kind::precondition_violated, "needs at least three branch points");
        auto full = std::find_if(prof_.passports.begin(), prof_.passports.end(),
                                 [n](const partition& p) { return p.length() == 1 && p[0] == n; });
        if (full == prof_.passports.end())
            throw error(error_kind::precondition_violated, "needs a passport (" + std::to_string(n) + ")");
        std::rotate(prof_.passports.begin(), full, full + 1);
        int idx = 0;
        for (const auto& a : prof_.passports) {
            std::vector<int> ids;
            for (int j = 0; j < a.length(); ++j) ids.push_back(idx++);
            index_.push_back(ids);
        }
        if (idx > max_points) throw error(error_kind::degree_too_large, "too many marked points");
        n_points_ = idx;
    }

    const ramification_profile& profile() const { return prof_; }
    int n_points() const { return n_points_; }
    int branches() const { return static_cast<int>(prof_.passports.size()); }
    mask points() const { return first_points(n_points_); }
    int point(int branch, int sheet) const { return index_.at(branch).at(sheet); }
    int pole() const { return 0; }

    mask branch_mask(int branch) const {
        mask m = 0;
        for (int x : index_.at(branch)) m |= bit(x);
        return m;
    }

    psi_context context(int p) const {
        if (p < 1 || p >= branches()) throw error(error_kind::precondition_violated, "p must name a finite branch point");
        return {points(), pole(), branch_mask(p)};
    }

    // b^i_j = a^i_j - 1 away from branches 0 and p.
    std::vector<int> default_exponents(int p) const {
        std::vector<int> b(n_points_, 0);
        for (int i = 1; i < branches(); ++i) {
            if (i == p) continue;
            for (int j = 0; j < prof_.passports[i].length(); ++j) b[point(i, j)] = prof_.passports[i][j] - 1;
        }
        return b;
    }

    std::string point_name(int x) const {
        for (int i = 0; i < branches(); ++i)
            for (int j = 0; j < static_cast<int>(index_[i].size()); ++j)
                if (index_[i][j] == x) return "x" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
        return std::to_string(x);
    }

    // psi(x^1_1)^{m-3} * prod_p Psi_p
    taut_class hurwitz_class() const {
        taut_class c = mul_psi_power(taut_class::fundamental(points()), pole(), branches() - 3);
        for (int p = 1; p < branches(); ++p) c = multiply_psi_p(c, context(p), default_exponents(p));
        return c;
    }

private:
    ramification_profile prof_;
    std::vector<std::vector<int>> index_;
    int n_points_ = 0;
};

inline rational psi_hurwitz(const ramification_profile& prof, int max_points_guard = 8) {
    if (riemann_hurwitz_genus(prof) != 0) throw error(error_kind::precondition_violated, "needs genus 0");
    polynomial_cover_space space(prof);
    if (space.n_points() > max_points_guard)
        throw error(error_kind::degree_too_large, "N = " + std::to_string(space.n_points()) + " above guard " +
                                                      std::to_string(max_points_guard));
    const int m = space.branches();
    rational factor = pow(rational(prof.degree), m - 3);
    for (int i = 1; i < m; ++i) factor /= rational(aut_partition(space.profile().passports[i]));
    return factor * integrate(space.hurwitz_class());
}

} // namespace moduli::m0n
