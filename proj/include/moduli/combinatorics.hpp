#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "moduli/error.hpp"
#include "moduli/rational.hpp"

namespace moduli {

class partition {
public:
    partition() = default;
    partition(std::initializer_list<int> parts) : partition(std::vector<int>(parts)) {}
    explicit partition(std::vector<int> parts) : parts_(std::move(parts)) {
        for (int p : parts_)
            if (p <= 0) throw error(error_kind::precondition_violated, "partition parts must be positive");
        std::sort(parts_.begin(), parts_.end(), std::greater<>());
    }

    // "2,1,1"
    static partition parse(std::string_view s) {
        std::vector<int> parts;
        std::string item;
        std::stringstream ss{std::string(s)};
        while (std::getline(ss, item, ',')) {
            item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
            if (item.empty()) throw error(error_kind::parse, "empty part in '" + std::string(s) + "'");
            try {
                std::size_t used = 0;
                parts.push_back(std::stoi(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::logic_error&) {
                throw error(error_kind::parse, "bad part '" + item + "'");
            }
        }
        if (parts.empty()) throw error(error_kind::parse, "empty partition");
        return partition(std::move(parts));
    }

    const std::vector<int>& parts() const { return parts_; }
    int length() const { return static_cast<int>(parts_.size()); }
    int sum() const {
        int s = 0;
        for (int p : parts_) s += p;
        return s;
    }
    int operator[](std::size_t i) const { return parts_[i]; }
    auto begin() const { return parts_.begin(); }
    auto end() const { return parts_.end(); }

    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(parts_[i]);
        }
        return out;
    }

    friend auto operator<=>(const partition&, const partition&) = default;
    friend bool operator==(const partition&, const partition&) = default;

private:
    std::vector<int> parts_;
};

struct ramification_profile {
    int degree = 0;
    std::vector<partition> passports;

    void validate() const {
        if (degree < 1) throw error(error_kind::precondition_violated, "degree must be positive");
        for (const auto& p : passports)
            if (p.sum() != degree)
                throw error(error_kind::precondition_violated,
                            "passport (" + p.str() + ") does not sum to " + std::to_string(degree));
    }

    // "4;2,2;2,1,1"
    static ramification_profile parse(int degree, std::string_view s) {
        ramification_profile prof{degree, {}};
        std::string item;
        std::stringstream ss{std::string(s)};
        while (std::getline(ss, item, ';')) prof.passports.push_back(partition::parse(item));
        prof.validate();
        return prof;
    }

    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < passports.size(); ++i) {
            if (i) out += ';';
            out += passports[i].str();
        }
        return out;
    }
};

inline big_int factorial(int n) {
    big_int r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline big_int binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    big_int r = 1;
    for (int i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

template <class T>
big_int aut_sequence(std::vector<T> xs) {
    std::sort(xs.begin(), xs.end());
    big_int r = 1;
    for (std::size_t i = 0; i < xs.size();) {
        std::size_t j = i;
        while (j < xs.size() && xs[j] == xs[i]) ++j;
        r *= factorial(static_cast<int>(j - i));
        i = j;
    }
    return r;
}

inline big_int aut_partition(const partition& p) { return aut_sequence(p.parts()); }

inline int riemann_hurwitz_genus(const ramification_profile& prof) {
    prof.validate();
    long long total = 0;
    for (const auto& p : prof.passports)
        for (int a : p) total += a - 1;
    long long twice = total - 2LL * prof.degree + 2;
    if (twice < 0) throw error(error_kind::negative_genus, "profile " + prof.str() + " has negative genus");
    if (twice % 2 != 0) throw error(error_kind::non_integral_genus, "profile " + prof.str() + " has half-integral genus");
    return static_cast<int>(twice / 2);
}

// Nonincreasing j-tuples of positive integers summing to a.
inline std::vector<partition> partitions_of(int a, int j) {
    std::vector<partition> out;
    if (j < 1 || a < j) return out;
    std::vector<int> cur;
    std::function<void(int, int, int)> rec = [&](int remaining, int slots, int cap) {
        if (slots == 0) {
            if (remaining == 0) out.emplace_back(cur);
            return;
        }
        int hi = std::min(cap, remaining - (slots - 1));
        int lo = (remaining + slots - 1) / slots;
        for (int v = hi; v >= lo; --v) {
            cur.push_back(v);
            rec(remaining - v, slots - 1, v);
            cur.pop_back();
        }
    };
    rec(a, j, a);
    return out;
}

inline std::vector<partition> partitions_of(int a) {
    std::vector<partition> out;
    for (int j = 1; j <= a; ++j) {
        auto part = partitions_of(a, j);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

// All subsets of {0..n-1} as bit masks, in increasing mask order.
inline std::vector<std::uint32_t> subsets(int n) {
    std::vector<std::uint32_t> out;
    out.reserve(std::size_t(1) << n);
    for (std::uint32_t s = 0; s < (std::uint32_t(1) << n); ++s) out.push_back(s);
    return out;
}

// All subsets of the given items.
template <class T>
std::vector<std::vector<T>> subsets(const std::vector<T>& items) {
    std::vector<std::vector<T>> out;
    for (auto mask : subsets(static_cast<int>(items.size()))) {
        std::vector<T> s;
        for (std::size_t i = 0; i < items.size(); ++i)
            if (mask >> i & 1u) s.push_back(items[i]);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace moduli
