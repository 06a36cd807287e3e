#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "moduli/combinatorics.hpp"
#include "moduli/error.hpp"
#include "moduli/rational.hpp"

namespace moduli::m0n {

// Marked points are bit positions; a set of points is a mask.
using mask = std::uint32_t;
constexpr int max_points = 24;

inline mask bit(int x) { return mask(1) << x; }
// The points 0..n-1.
inline mask first_points(int n) { return n >= 32 ? ~mask(0) : bit(n) - 1; }
inline int popcount(mask m) { return std::popcount(m); }

// A boundary stratum of M_{0,N} with psi decorations.
//
// Each edge is stored as the side of its leg split that avoids the lowest marked point.
// A flag (leg or edge end) is identified by the set of points lying beyond it: a leg x
// has {x}, the two ends of an edge with split S have S and its complement.
struct stratum {
    std::vector<mask> splits;
    std::map<mask, int> decorations;

    int codimension() const { return static_cast<int>(splits.size()); }
    int degree() const {
        int d = codimension();
        for (auto& [f, e] : decorations) d += e;
        return d;
    }
    friend auto operator<=>(const stratum&, const stratum&) = default;
    friend bool operator==(const stratum&, const stratum&) = default;
};

struct vertex {
    std::vector<mask> flags; // beyond-sets of the flags at this vertex
    int valence() const { return static_cast<int>(flags.size()); }
};

class taut_class;
inline std::vector<vertex> vertices(const stratum& s, mask points);

namespace detail {

inline mask normalize_split(mask s, mask points) {
    mask base = points & (~points + 1);
    return (s & base) ? (points ^ s) : s;
}

inline std::vector<mask> all_flags(const stratum& s, mask points) {
    std::vector<mask> flags;
    for (mask rest = points; rest; rest &= rest - 1) flags.push_back(rest & (~rest + 1));
    for (mask e : s.splits) {
        flags.push_back(e);
        flags.push_back(points ^ e);
    }
    return flags;
}

inline bool strict_subset(mask a, mask b) { return a != b && (a & ~b) == 0; }

} // namespace detail

// Vertices of the dual tree. The flags at the vertex of flag f are f itself and the
// maximal flags strictly inside the complement of f.
inline std::vector<vertex> vertices(const stratum& s, mask points) {
    const auto flags = detail::all_flags(s, points);
    std::set<std::vector<mask>> seen;
    std::vector<vertex> out;
    for (mask f : flags) {
        const mask comp = points ^ f;
        std::vector<mask> at{f};
        for (mask g : flags) {
            if (!detail::strict_subset(g, comp)) continue;
            bool maximal = true;
            for (mask h : flags)
                if (detail::strict_subset(h, comp) && detail::strict_subset(g, h)) {
                    maximal = false;
                    break;
                }
            if (maximal) at.push_back(g);
        }
        std::sort(at.begin(), at.end());
        if (seen.insert(at).second) out.push_back({at});
    }
    std::sort(out.begin(), out.end(), [](const vertex& a, const vertex& b) { return a.flags < b.flags; });
    return out;
}

// Formal rational combination of decorated strata on a fixed marked-point set.
class taut_class {
public:
    taut_class() = default;
    explicit taut_class(mask points) : points_(points) {
        if (popcount(points) < 3) throw error(error_kind::precondition_violated, "M_{0,N} needs N >= 3");
    }

    static taut_class fundamental(mask points) {
        taut_class c(points);
        c.terms_[stratum{}] = 1;
        return c;
    }

    mask points() const { return points_; }
    int n_points() const { return popcount(points_); }
    int dimension() const { return n_points() - 3; }
    const std::map<stratum, rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add(const stratum& s, const rational& coef) {
        if (coef.is_zero()) return;
        auto [it, inserted] = terms_.try_emplace(s, coef);
        if (!inserted) {
            it->second += coef;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    // Drops terms that vanish for dimension reasons: total degree above N-3, or a
    // vertex carrying more psi than its dimension.
    void add_if_viable(const stratum& s, const rational& coef) {
        if (s.degree() > dimension()) return;
        if (!s.decorations.empty()) {
            for (const auto& v : vertices(s, points_)) {
                int load = 0;
                for (mask f : v.flags) {
                    auto it = s.decorations.find(f);
                    if (it != s.decorations.end()) load += it->second;
                }
                if (load > v.valence() - 3) return;
            }
        }
        add(s, coef);
    }

    taut_class& operator+=(const taut_class& o) {
        check_same(o);
        for (auto& [s, c] : o.terms_) add(s, c);
        return *this;
    }
    taut_class& operator-=(const taut_class& o) {
        check_same(o);
        for (auto& [s, c] : o.terms_) add(s, -c);
        return *this;
    }
    taut_class& operator*=(const rational& k) {
        if (k.is_zero()) {
            terms_.clear();
            return *this;
        }
        for (auto& [s, c] : terms_) c *= k;
        return *this;
    }
    friend taut_class operator+(taut_class a, const taut_class& b) { return a += b; }
    friend taut_class operator-(taut_class a, const taut_class& b) { return a -= b; }
    friend taut_class operator*(const rational& k, taut_class a) { return a *= k; }
    friend bool operator==(const taut_class& a, const taut_class& b) {
        return a.points_ == b.points_ && a.terms_ == b.terms_;
    }

private:
    void check_same(const taut_class& o) const {
        if (points_ != o.points_) throw error(error_kind::precondition_violated, "classes live on different spaces");
    }

    mask points_ = 0;
    std::map<stratum, rational> terms_;
};

inline rational integrate(const stratum& s, mask points) {
    if (s.degree() != popcount(points) - 3) return 0;
    rational value(1);
    for (const auto& v : vertices(s, points)) {
        int load = 0;
        rational denom(1);
        for (mask f : v.flags) {
            auto it = s.decorations.find(f);
            if (it == s.decorations.end()) continue;
            load += it->second;
            denom *= rational(factorial(it->second));
        }
        if (load != v.valence() - 3) return 0;
        value *= rational(factorial(load)) / denom;
    }
    return value;
}

inline rational integrate(const taut_class& c) {
    rational total;
    for (auto& [s, coef] : c.terms()) total += coef * integrate(s, c.points());
    return total;
}

inline taut_class mul_psi(const taut_class& c, int x) {
    if (!(c.points() & bit(x))) throw error(error_kind::precondition_violated, "psi of an absent point");
    taut_class out(c.points());
    for (auto& [s, coef] : c.terms()) {
        stratum t = s;
        ++t.decorations[bit(x)];
        out.add_if_viable(t, coef);
    }
    return out;
}

inline taut_class mul_psi_power(taut_class c, int x, int k) {
    for (int i = 0; i < k; ++i) c = mul_psi(c, x);
    return c;
}

inline taut_class mul_boundary(const taut_class& c, mask u) {
    const mask points = c.points();
    if ((u & ~points) != 0) throw error(error_kind::invalid_subset, "subset contains absent points");
    if (popcount(u) < 2 || popcount(points ^ u) < 2)
        throw error(error_kind::invalid_subset, "boundary divisor needs at least two points on each side");
    const mask split = detail::normalize_split(u, points);
    const mask other = points ^ split;
    taut_class out(points);
    for (auto& [s, coef] : c.terms()) {
        if (std::binary_search(s.splits.begin(), s.splits.end(), split)) {
            // Self-intersection: normal bundle -psi' - psi'' at the two ends of the edge.
            for (mask f : {split, other}) {
                stratum t = s;
                ++t.decorations[f];
                out.add_if_viable(t, -coef);
            }
            continue;
        }
        for (const auto& v : vertices(s, points)) {
            int inside = 0, outside = 0;
            bool ok = true;
            for (mask f : v.flags) {
                if ((f & ~split) == 0) ++inside;
                else if ((f & split) == 0) ++outside;
                else {
                    ok = false;
                    break;
                }
            }
            if (!ok || inside < 2 || outside < 2) continue;
            stratum t = s;
            t.splits.insert(std::upper_bound(t.splits.begin(), t.splits.end(), split), split);
            out.add_if_viable(t, coef);
            break;
        }
    }
    return out;
}

// Pullback along the map forgetting point y.
inline taut_class forgetful_pullback(const taut_class& c, int y) {
    const mask points = c.points();
    if (y < 0 || y >= max_points) throw error(error_kind::precondition_violated, "point index out of range");
    if (points & bit(y)) throw error(error_kind::point_already_present, "point " + std::to_string(y) + " already marked");
    const mask yb = bit(y);
    const mask new_points = points | yb;
    taut_class out(new_points);

    for (auto& [s, coef] : c.terms()) {
        const auto flags = detail::all_flags(s, points);
        for (const auto& v : vertices(s, points)) {
            // y sits on v: a flag gains y when v lies beyond it.
            auto lift = [&](mask f) {
                const mask comp = points ^ f;
                for (mask h : v.flags)
                    if ((comp & ~h) == 0) return f | yb;
                return f;
            };
            stratum t;
            for (mask e : s.splits) t.splits.push_back(detail::normalize_split(lift(e), new_points));
            std::sort(t.splits.begin(), t.splits.end());
            for (auto& [f, e] : s.decorations) t.decorations[lift(f)] = e;
            out.add_if_viable(t, coef);

            // Correction: psi at a flag of v restricted to the bubble carrying y and that flag.
            for (mask f : v.flags) {
                auto it = s.decorations.find(f);
                if (it == s.decorations.end()) continue;
                stratum b = t;
                const mask bubble = f | yb;
                const mask nb = detail::normalize_split(bubble, new_points);
                b.splits.insert(std::upper_bound(b.splits.begin(), b.splits.end(), nb), nb);
                b.decorations.erase(f);
                if (it->second > 1) b.decorations[bubble] = it->second - 1;
                out.add_if_viable(b, -coef);
            }
        }
    }
    return out;
}

// c * pi^* psi(x) where pi forgets every point outside kept:
// pi^* psi(x) = psi(x) - sum of D_S over S containing x with S \ {x} a nonempty set of forgotten points.
inline taut_class mul_pulled_back_psi(const taut_class& c, int x, mask kept) {
    const mask points = c.points();
    if (!(kept & bit(x))) throw error(error_kind::precondition_violated, "pulled back psi of a forgotten point");
    const mask forgotten = points & ~kept;
    taut_class out = mul_psi(c, x);
    for (mask sub = forgotten; sub; sub = (sub - 1) & forgotten) {
        const mask s = sub | bit(x);
        if (popcount(points ^ s) < 2) continue;
        out -= mul_boundary(c, s);
    }
    return out;
}

// All boundary divisors of the space, as normalized splits.
inline std::vector<mask> boundary_divisors(mask points) {
    std::vector<mask> out;
    std::set<mask> seen;
    for (mask s = points; s; s = (s - 1) & points) {
        if (popcount(s) < 2 || popcount(points ^ s) < 2) continue;
        mask n = detail::normalize_split(s, points);
        if (seen.insert(n).second) out.push_back(n);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Equality in cohomology: every homogeneous part of a - b pairs to zero with all
// monomials in boundary divisors of complementary degree (these span cohomology).
inline bool numerically_equal(const taut_class& a, const taut_class& b) {
    const taut_class diff = a - b;
    if (diff.is_zero()) return true;
    const mask points = diff.points();
    const int dim = diff.dimension();
    std::set<int> degrees;
    for (auto& [s, coef] : diff.terms()) degrees.insert(s.degree());
    const auto divisors = boundary_divisors(points);
    for (int d : degrees) {
        taut_class part(points);
        for (auto& [s, coef] : diff.terms())
            if (s.degree() == d) part.add(s, coef);
        const int k = dim - d;
        bool ok = true;
        std::function<void(const taut_class&, int, std::size_t)> rec = [&](const taut_class& cur, int left, std::size_t from) {
            if (!ok) return;
            if (left == 0) {
                if (!integrate(cur).is_zero()) ok = false;
                return;
            }
            for (std::size_t i = from; i < divisors.size() && ok; ++i) rec(mul_boundary(cur, divisors[i]), left - 1, i);
        };
        rec(part, k, 0);
        if (!ok) return false;
    }
    return true;
}

// JSON debug form: tree as a parent array, leg map, decorations, coefficient.
inline nlohmann::json stratum_to_json(const stratum& s, mask points, const rational& coef,
                                      const std::function<std::string(int)>& name = {}) {
    const auto vs = vertices(s, points);
    auto point_name = [&](int x) { return name ? name(x) : std::to_string(x); };
    // Vertex of each flag.
    std::map<mask, int> owner;
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (mask f : vs[i].flags) owner[f] = static_cast<int>(i);
    const int root = owner.at(points & (~points + 1));
    std::vector<int> parent(vs.size(), -1);
    std::vector<int> order{root};
    std::vector<bool> visited(vs.size(), false);
    visited[root] = true;
    for (std::size_t k = 0; k < order.size(); ++k) {
        int v = order[k];
        for (mask f : vs[v].flags) {
            if (popcount(f) == 1 && !std::binary_search(s.splits.begin(), s.splits.end(), f) &&
                !std::binary_search(s.splits.begin(), s.splits.end(), points ^ f))
                continue;
            int w = owner.at(points ^ f);
            if (!visited[w]) {
                visited[w] = true;
                parent[w] = v;
                order.push_back(w);
            }
        }
    }
    nlohmann::json legs = nlohmann::json::object();
    for (mask rest = points; rest; rest &= rest - 1) {
        int x = std::countr_zero(rest);
        legs[point_name(x)] = owner.at(bit(x));
    }
    nlohmann::json decorations = nlohmann::json::array();
    for (auto& [f, e] : s.decorations) {
        nlohmann::json d{{"vertex", owner.at(f)}, {"exponent", e}};
        if (popcount(f) == 1 && !std::binary_search(s.splits.begin(), s.splits.end(), f) &&
            !std::binary_search(s.splits.begin(), s.splits.end(), points ^ f))
            d["leg"] = point_name(std::countr_zero(f));
        else
            d["edge_to"] = owner.at(points ^ f);
        decorations.push_back(d);
    }
    return {{"coefficient", coef.str()}, {"parent", parent}, {"legs", legs}, {"decorations", decorations}};
}

inline nlohmann::json to_json(const taut_class& c, const std::function<std::string(int)>& name = {}) {
    nlohmann::json terms = nlohmann::json::array();
    for (auto& [s, coef] : c.terms()) terms.push_back(stratum_to_json(s, c.points(), coef, name));
    return {{"points", c.n_points()}, {"terms", terms}};
}

} // namespace moduli::m0n
