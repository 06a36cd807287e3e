#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <functional>
#include <numeric>
#include <optional>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include "moduli/combinatorics.hpp"
#include "moduli/error.hpp"
#include "moduli/rational.hpp"

namespace moduli::hurwitz {

constexpr int max_perm_degree = 16;

struct perm {
    std::array<std::uint8_t, max_perm_degree> img{};
    int n = 0;

    static perm identity(int n) {
        perm p;
        p.n = n;
        for (int i = 0; i < n; ++i) p.img[i] = static_cast<std::uint8_t>(i);
        return p;
    }
    // (a * b)(i) = a(b(i))
    friend perm operator*(const perm& a, const perm& b) {
        perm c;
        c.n = a.n;
        for (int i = 0; i < a.n; ++i) c.img[i] = a.img[b.img[i]];
        return c;
    }
    perm inverse() const {
        perm c;
        c.n = n;
        for (int i = 0; i < n; ++i) c.img[img[i]] = static_cast<std::uint8_t>(i);
        return c;
    }
    bool is_identity() const {
        for (int i = 0; i < n; ++i)
            if (img[i] != i) return false;
        return true;
    }
};

inline partition cycle_type(const perm& p) {
    std::array<bool, max_perm_degree> seen{};
    std::vector<int> lengths;
    for (int i = 0; i < p.n; ++i) {
        if (seen[i]) continue;
        int len = 0;
        for (int j = i; !seen[j]; j = p.img[j]) {
            seen[j] = true;
            ++len;
        }
        lengths.push_back(len);
    }
    return partition(std::move(lengths));
}

// |C_lambda| = n! / prod_i i^{m_i} m_i!
inline big_int class_size(const partition& lambda) {
    big_int z = aut_partition(lambda);
    for (int a : lambda) z *= a;
    return factorial(lambda.sum()) / z;
}

// Every permutation with the given cycle type, each exactly once.
inline std::vector<perm> class_elements(const partition& lambda, std::size_t limit = 1'000'000) {
    const int n = lambda.sum();
    if (n > max_perm_degree) throw error(error_kind::degree_too_large, "degree above " + std::to_string(max_perm_degree));
    if (class_size(lambda) > limit)
        throw error(error_kind::degree_too_large, "class (" + lambda.str() + ") exceeds enumeration guard");
    std::vector<perm> out;
    perm cur = perm::identity(n);
    std::array<bool, max_perm_degree> used{};
    std::map<int, int> lengths;
    for (int a : lambda) ++lengths[a];
    std::vector<int> cycle;

    // Smallest unused point opens the next cycle; its length runs over remaining lengths.
    std::function<void()> open_cycle;
    std::function<void(int)> extend = [&](int remaining) {
        if (remaining == 0) {
            for (std::size_t i = 0; i < cycle.size(); ++i)
                cur.img[cycle[i]] = static_cast<std::uint8_t>(cycle[(i + 1) % cycle.size()]);
            open_cycle();
            return;
        }
        for (int x = 0; x < n; ++x) {
            if (used[x]) continue;
            used[x] = true;
            cycle.push_back(x);
            extend(remaining - 1);
            cycle.pop_back();
            used[x] = false;
        }
    };
    open_cycle = [&]() {
        int first = -1;
        for (int x = 0; x < n; ++x)
            if (!used[x]) {
                first = x;
                break;
            }
        if (first < 0) {
            out.push_back(cur);
            return;
        }
        for (auto& [len, count] : lengths) {
            if (count == 0) continue;
            --count;
            used[first] = true;
            auto saved = cycle;
            cycle = {first};
            extend(len - 1);
            cycle = saved;
            used[first] = false;
            ++count;
        }
    };
    open_cycle();
    return out;
}

inline perm class_representative(const partition& lambda) {
    perm p = perm::identity(lambda.sum());
    int start = 0;
    for (int a : lambda) {
        for (int i = 0; i < a; ++i) p.img[start + i] = static_cast<std::uint8_t>(start + (i + 1) % a);
        start += a;
    }
    return p;
}

namespace detail {

inline bool transitive(const std::vector<const perm*>& perms, int n) {
    std::array<int, max_perm_degree> parent{};
    std::iota(parent.begin(), parent.begin() + n, 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    int components = n;
    for (const perm* p : perms)
        for (int i = 0; i < n; ++i) {
            int a = find(i), b = find(p->img[i]);
            if (a != b) {
                parent[a] = b;
                --components;
            }
        }
    return components == 1;
}

inline void check_genus(const ramification_profile& prof, std::optional<int> genus) {
    int g = riemann_hurwitz_genus(prof);
    if (genus && *genus != g)
        throw error(error_kind::precondition_violated,
                    "stated genus " + std::to_string(*genus) + " disagrees with Riemann-Hurwitz genus " + std::to_string(g));
}

inline bool is_full_cycle(const partition& p, int n) { return p.length() == 1 && p[0] == n; }

} // namespace detail

struct hurwitz_limits {
    int max_bruteforce_degree = 7;
    int max_class_algebra_degree = 12;
    std::size_t max_class_elements = 1'000'000;
};

// (1/n!) * #{(s_1..s_m): s_i in C(A_i), s_1...s_m = id, <s_i> transitive}.
inline rational hurwitz_bruteforce(const ramification_profile& prof, std::optional<int> genus = {},
                                   const hurwitz_limits& lim = {}) {
    detail::check_genus(prof, genus);
    const int n = prof.degree;
    if (n > lim.max_bruteforce_degree)
        throw error(error_kind::degree_too_large, "brute force limited to degree " + std::to_string(lim.max_bruteforce_degree));
    if (prof.passports.empty()) return n == 1 ? rational(1) : rational(0);

    // Products with cyclically reordered classes are in bijection (braid moves), so the
    // largest class is fixed to one representative and the second largest is solved for.
    std::vector<partition> order = prof.passports;
    std::stable_sort(order.begin(), order.end(),
                     [](const partition& a, const partition& b) { return class_size(a) > class_size(b); });
    const perm fixed = class_representative(order[0]);
    const big_int fixed_weight = class_size(order[0]);

    if (order.size() == 1) {
        std::vector<const perm*> gens{&fixed};
        big_int count = (fixed.is_identity() && detail::transitive(gens, n)) ? fixed_weight : big_int(0);
        return rational(count, factorial(n));
    }

    const partition& solved = order[1];
    std::vector<std::vector<perm>> free_classes;
    for (std::size_t i = 2; i < order.size(); ++i) free_classes.push_back(class_elements(order[i], lim.max_class_elements));

    big_int count = 0;
    std::vector<const perm*> chosen(order.size(), nullptr);
    chosen[0] = &fixed;
    perm last;
    std::function<void(std::size_t, const perm&)> rec = [&](std::size_t k, const perm& prefix) {
        if (k == free_classes.size()) {
            last = prefix.inverse();
            if (!(cycle_type(last) == solved)) return;
            chosen[1] = &last;
            if (detail::transitive(chosen, n)) ++count;
            return;
        }
        for (const perm& s : free_classes[k]) {
            chosen[k + 2] = &s;
            rec(k + 1, prefix * s);
        }
    };
    rec(0, fixed);
    return rational(count * fixed_weight, factorial(n));
}

// Per-element weights on conjugacy classes of S_n.
class conj_class_distribution {
public:
    explicit conj_class_distribution(int n) : n_(n) {
        for (auto& lambda : partitions_of(n)) weights_[lambda] = 0;
        weights_[partition(std::vector<int>(n, 1))] = 1;
    }

    int degree() const { return n_; }
    const std::map<partition, rational>& weights() const { return weights_; }
    rational weight(const partition& lambda) const { return weights_.at(lambda); }

    rational total_mass() const {
        rational m;
        for (auto& [lambda, w] : weights_) m += w * rational(class_size(lambda));
        return m;
    }

    // this := this * (sum of the elements of class mu)
    void multiply_class_sum(const partition& mu, std::size_t limit = 1'000'000) {
        const auto elements = class_elements(mu, limit);
        std::map<partition, rational> next;
        for (auto& [nu, unused] : weights_) {
            (void)unused;
            const perm tau = class_representative(nu);
            std::map<partition, long long> hits;
            for (const perm& y : elements) ++hits[cycle_type(tau * y.inverse())];
            rational w;
            for (auto& [lambda, count] : hits) w += weights_.at(lambda) * rational(count);
            next[nu] = w;
        }
        weights_ = std::move(next);
    }

private:
    int n_;
    std::map<partition, rational> weights_;
};

inline rational hurwitz_class_algebra(const ramification_profile& prof, std::optional<int> genus = {},
                                      const hurwitz_limits& lim = {}) {
    detail::check_genus(prof, genus);
    const int n = prof.degree;
    if (n > lim.max_class_algebra_degree)
        throw error(error_kind::degree_too_large, "class algebra limited to degree " + std::to_string(lim.max_class_algebra_degree));
    auto full = std::find_if(prof.passports.begin(), prof.passports.end(),
                             [n](const partition& p) { return detail::is_full_cycle(p, n); });
    if (full == prof.passports.end())
        throw error(error_kind::no_full_cycle_passport, "profile " + prof.str() + " has no passport (" + std::to_string(n) + ")");

    conj_class_distribution dist(n);
    for (auto it = prof.passports.begin(); it != prof.passports.end(); ++it)
        if (it != full) dist.multiply_class_sum(*it, lim.max_class_elements);
    // count = |C_(n)| * w_(n); divide by n!
    return dist.weight(partition{n}) / rational(n);
}

// n^{m-3} * prod_{i>=2} (l_i - 1)! / |aut(A_i)|
//
// The often quoted variant carries an extra factor |aut(l_2..l_m)| / |aut(A_2..A_m)|. It
// differs only when two different passports have equal length, and there it disagrees
// with the factorization count: (5),(3,1,1),(2,2,1) has h = 1, the variant gives 2.
inline rational hurwitz_polynomial_closed(const ramification_profile& prof) {
    const int n = prof.degree;
    int g = riemann_hurwitz_genus(prof);
    if (g != 0) throw error(error_kind::precondition_violated, "closed form needs genus 0");
    const int m = static_cast<int>(prof.passports.size());
    if (m < 3) throw error(error_kind::precondition_violated, "closed form needs at least three branch points");
    auto full = std::find_if(prof.passports.begin(), prof.passports.end(),
                             [n](const partition& p) { return detail::is_full_cycle(p, n); });
    if (full == prof.passports.end())
        throw error(error_kind::precondition_violated, "closed form needs a passport (" + std::to_string(n) + ")");

    rational h = pow(rational(n), m - 3);
    for (auto it = prof.passports.begin(); it != prof.passports.end(); ++it)
        if (it != full) h *= rational(factorial(it->length() - 1), aut_partition(*it));
    return h;
}

// H(g;n) = h(g,n | (n), (2,1,...,1)^{2g+n-1})
inline rational H_generalized(int g, int n) {
    if (g < 0 || n < 1) throw error(error_kind::precondition_violated, "H(g;n) needs g >= 0, n >= 1");
    if (n == 1) return g == 0 ? rational(1) : rational(0);
    std::vector<int> parts(n - 1, 1);
    parts[0] = 2;
    const partition transposition(parts);
    conj_class_distribution dist(n);
    for (int i = 0; i < 2 * g + n - 1; ++i) dist.multiply_class_sum(transposition);
    return dist.weight(partition{n}) / rational(n);
}

inline rational H1_closed(int l) {
    if (l < 1) throw error(error_kind::precondition_violated, "l must be positive");
    return rational(factorial(l + 1)) * pow(rational(l), l) * rational(l - 1) / (rational(factorial(l)) * rational(24));
}

inline rational tau3g_sum(int g, int l) {
    if (g < 0 || l < 0) throw error(error_kind::precondition_violated, "tau3g_sum needs g, l >= 0");
    rational total;
    for (int i = 0; i <= g; ++i) {
        const int k = g + l + 1 - i;
        rational term = rational(binomial(g, i)) * rational(factorial(k)) * H_generalized(g, k) /
                        (rational(factorial(g)) * rational(factorial(3 * g + l - i)) * pow(rational(k), 3 * g + l - 1 - i));
        total += (i % 2 == 0) ? term : -term;
    }
    return total;
}

inline rational combinatorial_identity(int g, int k) {
    rational total;
    for (int i = 0; i <= g; ++i) {
        rational term = rational(binomial(g, i)) * pow(rational(g + 1 - i), k);
        total += (i % 2 == 0) ? term : -term;
    }
    return total;
}

// Integral of psi^{2g+K-2} over the two-pointed cycle Delta_K, defined through H(g;K).
inline rational delta_psi_integral(int g, int K) {
    if (g < 0 || K < 1) throw error(error_kind::precondition_violated, "delta_psi_integral needs g >= 0, K >= 1");
    return rational(factorial(K)) * H_generalized(g, K) /
           (pow(rational(K), 2 * g + K - 2) * rational(factorial(2 * g + K - 1)));
}

// S(k1,k2) for fixed genus, recursing towards the diagonal.
class s_difference_table {
public:
    explicit s_difference_table(int g) : g_(g) {
        if (g < 0) throw error(error_kind::precondition_violated, "negative genus");
    }

    int genus() const { return g_; }

    rational operator()(int k1, int k2) {
        if (k2 < 1 || k1 < k2 || k1 > k2 + g_)
            throw error(error_kind::domain_violation, "S(" + std::to_string(k1) + "," + std::to_string(k2) +
                                                          ") outside k2 <= k1 <= k2+g at g=" + std::to_string(g_));
        {
            std::shared_lock lock(mutex_);
            auto it = memo_.find({k1, k2});
            if (it != memo_.end()) return it->second;
        }
        rational v = k1 == k2 ? delta_psi_integral(g_, k1)
                              : ((*this)(k1, k2 + 1) - (*this)(k1 - 1, k2)) / rational(k1 - k2);
        std::unique_lock lock(mutex_);
        memo_.emplace(std::pair{k1, k2}, v);
        return v;
    }

private:
    int g_;
    std::map<std::pair<int, int>, rational> memo_;
    std::shared_mutex mutex_;
};

} // namespace moduli::hurwitz
