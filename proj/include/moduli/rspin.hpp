#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <tuple>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "moduli/combinatorics.hpp"
#include "moduli/error.hpp"
#include "moduli/rational.hpp"

namespace moduli::rspin {

// eta_{label, mult}; mult is signed only inside genus-one keys.
struct eta {
    int label = 0;
    int mult = 1;
    friend auto operator<=>(const eta&, const eta&) = default;
    friend bool operator==(const eta&, const eta&) = default;
};

// "0:1,1:2"
inline std::vector<eta> parse_etas(std::string_view s) {
    std::vector<eta> out;
    std::string item;
    std::stringstream ss{std::string(s)};
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
        if (item.empty()) continue;
        auto colon = item.find(':');
        if (colon == std::string::npos) throw error(error_kind::parse, "expected label:multiplicity, got '" + item + "'");
        try {
            std::size_t u1 = 0, u2 = 0;
            std::string a = item.substr(0, colon), b = item.substr(colon + 1);
            int label = std::stoi(a, &u1), mult = std::stoi(b, &u2);
            if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument(item);
            out.push_back({label, mult});
        } catch (const std::logic_error&) {
            throw error(error_kind::parse, "bad insertion '" + item + "'");
        }
    }
    return out;
}

inline std::string format_etas(const std::vector<eta>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(xs[i].label) + ":" + std::to_string(xs[i].mult);
    }
    return out;
}

// Index of S^n_{g,m}(prod eta_{q_i,a_i}).
struct s_key {
    int r = 3;
    int n = 0;
    int g = 0;
    int m = 0;
    std::vector<eta> insertions;

    s_key& canonicalize() {
        std::sort(insertions.begin(), insertions.end());
        return *this;
    }
    int s() const { return static_cast<int>(insertions.size()); }
    int total_mult() const {
        int a = 0;
        for (auto& e : insertions) a += e.mult;
        return a;
    }
    std::string str() const {
        return "S r=" + std::to_string(r) + " n=" + std::to_string(n) + " g=" + std::to_string(g) + " m=" +
               std::to_string(m) + " " + format_etas(insertions);
    }
    static s_key parse(std::string_view text) {
        s_key k;
        std::istringstream in{std::string(text)};
        std::string tag, rs, ns, gs, ms, ins;
        in >> tag >> rs >> ns >> gs >> ms >> ins;
        auto field = [&](const std::string& f, const char* name) {
            if (f.rfind(name, 0) != 0) throw error(error_kind::parse, "bad S key '" + std::string(text) + "'");
            return std::stoi(f.substr(std::string(name).size()));
        };
        if (tag != "S") throw error(error_kind::parse, "bad S key '" + std::string(text) + "'");
        k.r = field(rs, "r=");
        k.n = field(ns, "n=");
        k.g = field(gs, "g=");
        k.m = field(ms, "m=");
        k.insertions = parse_etas(ins);
        return k.canonicalize();
    }
    friend auto operator<=>(const s_key&, const s_key&) = default;
    friend bool operator==(const s_key&, const s_key&) = default;
};

// Key of a genus-one integral over W(b_1..b_k); b sums to zero. Canonical up to
// negating every b, since f and 1/f give the same locus.
struct shat1_key {
    int r = 3;
    std::vector<eta> entries;

    static shat1_key make(int r, std::vector<eta> entries) {
        int sum = 0;
        for (auto& e : entries) {
            if (e.mult == 0) throw error(error_kind::precondition_violated, "genus-one key with zero multiplicity");
            sum += e.mult;
        }
        if (sum != 0) throw error(error_kind::precondition_violated, "genus-one key multiplicities must sum to zero");
        auto order = [](std::vector<eta>& v) {
            std::sort(v.begin(), v.end(), [](const eta& a, const eta& b) {
                return a.label != b.label ? a.label < b.label : a.mult > b.mult;
            });
        };
        std::vector<eta> neg = entries;
        for (auto& e : neg) e.mult = -e.mult;
        order(entries);
        order(neg);
        auto less = [](const std::vector<eta>& a, const std::vector<eta>& b) {
            return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](const eta& x, const eta& y) {
                return x.label != y.label ? x.label > y.label : x.mult < y.mult;
            });
        };
        return {r, less(entries, neg) ? neg : entries};
    }
    static shat1_key parse(int r, std::string_view s) { return make(r, parse_etas(s)); }

    int k() const { return static_cast<int>(entries.size()); }
    int max_abs_mult() const {
        int b = 0;
        for (auto& e : entries) b = std::max(b, std::abs(e.mult));
        return b;
    }
    int positive_degree() const {
        int d = 0;
        for (auto& e : entries)
            if (e.mult > 0) d += e.mult;
        return d;
    }
    std::string str() const { return "Shat1 r=" + std::to_string(r) + " " + format_etas(entries); }
    friend auto operator<=>(const shat1_key&, const shat1_key&) = default;
    friend bool operator==(const shat1_key&, const shat1_key&) = default;
};

// D = (g-1)(r-2)/r + sum(m)/r
inline rational dimension_D(int r, int g, const std::vector<int>& labels) {
    long long total = 0;
    for (int m : labels) total += m;
    return rational(static_cast<long long>(g - 1) * (r - 2) + total) / rational(r);
}

struct tau {
    int n = 0;
    int m = 0;
    friend auto operator<=>(const tau&, const tau&) = default;
    friend bool operator==(const tau&, const tau&) = default;
};

// Solves 3g-3+s = sum(n) + D for g; requires a nonnegative integer with 2g-2+s > 0.
inline std::optional<int> correlator_selection_genus(int r, const std::vector<tau>& ins) {
    long long sum_n = 0, sum_m = 0;
    for (auto& t : ins) {
        sum_n += t.n;
        sum_m += t.m;
    }
    const long long s = static_cast<long long>(ins.size());
    const long long num = r * sum_n + sum_m + 2LL * r + 2 - r * s;
    const long long den = 2LL * r + 2;
    if (num < 0 || num % den != 0) return std::nullopt;
    const long long g = num / den;
    if (2 * g - 2 + s <= 0) return std::nullopt;
    return static_cast<int>(g);
}

// Genus-zero primary correlators <prod tau_{0,m_i}>_0.
class primary_table {
public:
    primary_table() = default;
    primary_table(int r, std::map<std::vector<int>, rational> entries, bool complete)
        : r_(r), complete_(complete) {
        for (auto& [labels, v] : entries) set(labels, v);
    }

    static primary_table builtin(int r) {
        switch (r) {
        case 2: return primary_table(2, {{{0, 0, 0}, 1}}, true);
        case 3: return primary_table(3, {{{0, 0, 1}, 1}, {{1, 1, 1, 1}, rational(1, 3)}}, true);
        case 4:
            return primary_table(4,
                                 {{{0, 0, 2}, 1},
                                  {{0, 1, 1}, 1},
                                  {{1, 1, 2, 2}, rational(1, 4)},
                                  {{2, 2, 2, 2, 2}, rational(1, 8)}},
                                 true);
        default:
            throw error(error_kind::missing_primary_table,
                        "no built-in primary table for r=" + std::to_string(r) + "; supply one as JSON");
        }
    }

    static bool has_builtin(int r) { return r >= 2 && r <= 4; }

    int r() const { return r_; }
    bool complete() const { return complete_; }
    const std::map<std::vector<int>, rational>& entries() const { return entries_; }

    bool selection_holds(const std::vector<int>& labels) const {
        const long long s = static_cast<long long>(labels.size());
        if (s < 3) return false;
        long long sum = 0;
        for (int m : labels) sum += m;
        return sum == r_ * (s - 3) + (r_ - 2);
    }

    void set(std::vector<int> labels, const rational& v) {
        std::sort(labels.begin(), labels.end());
        for (int m : labels)
            if (m < 0 || m > r_ - 2)
                throw error(error_kind::precondition_violated, "primary label out of range [0, r-2]");
        if (!selection_holds(labels))
            throw error(error_kind::precondition_violated, "primary entry violates the genus-zero selection rule");
        entries_[labels] = v;
    }

    rational lookup(std::vector<int> labels) const {
        std::sort(labels.begin(), labels.end());
        for (int m : labels)
            if (m < 0 || m > r_ - 1) throw error(error_kind::precondition_violated, "label out of range [0, r-1]");
        if (!selection_holds(labels)) return 0;
        if (labels.back() == r_ - 1) return 0;
        if (labels.front() == 0) {
            if (labels.size() != 3) return 0;
            return labels[1] + labels[2] == r_ - 2 ? 1 : 0;
        }
        auto it = entries_.find(labels);
        if (it != entries_.end()) return it->second;
        if (complete_) return 0;
        std::string text;
        for (int m : labels) text += std::to_string(m) + " ";
        throw error(error_kind::missing_primary_table, "no primary value for labels { " + text + "} at r=" + std::to_string(r_));
    }

    nlohmann::json to_json() const {
        nlohmann::json entries = nlohmann::json::array();
        for (auto& [labels, v] : entries_) entries.push_back({{"labels", labels}, {"value", v.str()}});
        return {{"r", r_}, {"entries", entries}, {"complete", complete_}};
    }

    static primary_table from_json(const nlohmann::json& j) {
        try {
            primary_table t;
            t.r_ = j.at("r").get<int>();
            if (t.r_ < 2) throw error(error_kind::parse, "r must be at least 2");
            t.complete_ = j.value("complete", false);
            for (auto& e : j.at("entries")) {
                auto labels = e.at("labels").get<std::vector<int>>();
                t.set(labels, rational::parse(e.at("value").get<std::string>()));
            }
            return t;
        } catch (const nlohmann::json::exception& ex) {
            throw error(error_kind::parse, std::string("primary table: ") + ex.what());
        }
    }

private:
    int r_ = 2;
    bool complete_ = true;
    std::map<std::vector<int>, rational> entries_;
};

// Genus-one keys that vanish without any table: failed selection, a label r-1, or
// multiplicities (1,-1), since no degree-one function exists on a genus-one curve.
inline bool shat1_vanishes(const shat1_key& key) {
    const int r = key.r;
    if (key.k() < 2) return true;
    long long sum = 0;
    for (auto& e : key.entries) {
        if (e.label < 0 || e.label > r - 1) throw error(error_kind::precondition_violated, "label out of range");
        if (e.label == r - 1) return true;
        sum += e.label;
    }
    if (sum != static_cast<long long>(r) * (key.k() - 1)) return true;
    return key.positive_degree() == 1;
}

// Constant plus a rational combination of unknown genus-one values.
class affine_form {
public:
    affine_form() = default;
    affine_form(const rational& c) : constant_(c) {}
    affine_form(long long c) : constant_(c) {}

    static affine_form unknown(const shat1_key& key) {
        affine_form f;
        f.coeffs_[key] = 1;
        return f;
    }

    const rational& constant() const { return constant_; }
    const std::map<shat1_key, rational>& coefficients() const { return coeffs_; }
    bool is_constant() const { return coeffs_.empty(); }
    bool is_zero() const { return constant_.is_zero() && coeffs_.empty(); }

    affine_form& operator+=(const affine_form& o) {
        constant_ += o.constant_;
        for (auto& [k, c] : o.coeffs_) {
            auto& slot = coeffs_[k];
            slot += c;
            if (slot.is_zero()) coeffs_.erase(k);
        }
        return *this;
    }
    affine_form& operator-=(const affine_form& o) { return *this += -o; }
    affine_form operator-() const {
        affine_form f = *this;
        f.constant_ = -f.constant_;
        for (auto& [k, c] : f.coeffs_) c = -c;
        return f;
    }
    affine_form& operator*=(const rational& k) {
        if (k.is_zero()) return *this = affine_form();
        constant_ *= k;
        for (auto& [key, c] : coeffs_) c *= k;
        return *this;
    }
    friend affine_form operator+(affine_form a, const affine_form& b) { return a += b; }
    friend affine_form operator-(affine_form a, const affine_form& b) { return a -= b; }
    friend affine_form operator*(const rational& k, affine_form a) { return a *= k; }
    friend affine_form operator*(const affine_form& a, const affine_form& b) {
        if (a.is_constant()) return a.constant_ * b;
        if (b.is_constant()) return b.constant_ * a;
        throw error(error_kind::nonlinear_expression, "product of two unresolved genus-one expressions");
    }
    friend bool operator==(const affine_form&, const affine_form&) = default;

    rational evaluate(const std::function<rational(const shat1_key&)>& value) const {
        rational v = constant_;
        for (auto& [k, c] : coeffs_) v += c * value(k);
        return v;
    }

    std::string str() const {
        std::string out = constant_.str();
        for (auto& [k, c] : coeffs_) out += " + (" + c.str() + ")*[" + format_etas(k.entries) + "]";
        return out;
    }

private:
    rational constant_;
    std::map<shat1_key, rational> coeffs_;
};

// Evaluates S-numbers by recursion on the psi power. Value is rational, or affine_form
// when genus-one integrals are left as unknowns.
template <class Value>
class s_evaluator {
public:
    using shat1_resolver = std::function<Value(const shat1_key&)>;

    s_evaluator(std::shared_ptr<const primary_table> table, shat1_resolver resolver)
        : table_(std::move(table)), resolver_(std::move(resolver)) {}

    int r() const { return table_->r(); }
    const primary_table& primaries() const { return *table_; }

    Value operator()(s_key key) {
        key.canonicalize();
        validate(key);
        return eval(key, 0);
    }

    std::size_t memo_size() const {
        std::shared_lock lock(mutex_);
        return memo_.size();
    }
    std::size_t cache_hits() const { return hits_.load(); }
    int max_depth() const { return max_depth_.load(); }

    std::vector<std::pair<s_key, Value>> memo_entries() const {
        std::shared_lock lock(mutex_);
        return {memo_.begin(), memo_.end()};
    }
    void seed(const s_key& key, const Value& v) {
        std::unique_lock lock(mutex_);
        memo_[key] = v;
    }

private:
    void validate(const s_key& key) const {
        if (key.r != r()) throw error(error_kind::precondition_violated, "key r differs from the primary table");
        if (key.insertions.empty()) throw error(error_kind::precondition_violated, "S needs at least one insertion");
        auto check = [&](int m) {
            if (m < 0 || m > r() - 1) throw error(error_kind::precondition_violated, "label out of range [0, r-1]");
        };
        check(key.m);
        for (auto& e : key.insertions) {
            check(e.label);
            if (e.mult < 1) throw error(error_kind::precondition_violated, "multiplicities must be positive");
        }
    }

    Value eval(const s_key& key, int depth) {
        {
            std::shared_lock lock(mutex_);
            auto it = memo_.find(key);
            if (it != memo_.end()) {
                ++hits_;
                return it->second;
            }
        }
        int seen = max_depth_.load();
        while (depth > seen && !max_depth_.compare_exchange_weak(seen, depth)) {}
        Value v = compute(key, depth);
        std::unique_lock lock(mutex_);
        memo_.emplace(key, v);
        return v;
    }

    Value compute(const s_key& key, int depth) {
        const int r = this->r();
        const int s = key.s();
        if (key.g < 0 || key.n < 0) return Value(0);
        if (key.m == r - 1) return Value(0);
        std::vector<int> labels{key.m};
        for (auto& e : key.insertions) {
            if (e.label == r - 1) return Value(0);
            labels.push_back(e.label);
        }
        const rational D = dimension_D(r, key.g, labels);
        if (!D.is_integer() || D.sign() < 0) return Value(0);
        if (rational(key.n) + D != rational(2 * key.g + s - 2)) return Value(0);

        if (key.g == 0 && key.n == 0) return Value(table_->lookup(labels));
        if (s == 1 && key.insertions[0].mult == 1) return Value(0);
        if (key.g == 1 && key.n == 0) {
            std::vector<eta> entries{{key.m, -key.total_mult()}};
            entries.insert(entries.end(), key.insertions.begin(), key.insertions.end());
            return resolver_(shat1_key::make(r, entries));
        }
        if (key.n == 0) return Value(0);
        return recurse(key, depth);
    }

    Value recurse(const s_key& key, int depth) {
        const int r = this->r();
        const int s = key.s();
        const rational denom = rational(key.total_mult()) * rational(2 * key.g + s - 1);
        Value total(0);

        for (std::uint32_t I = 1; I < (std::uint32_t(1) << s); ++I) {
            int a_I = 0, size_I = 0;
            std::vector<eta> rest;
            std::vector<int> cap_labels;
            std::vector<eta> cap_eta;
            for (int i = 0; i < s; ++i) {
                const eta& e = key.insertions[i];
                if (I >> i & 1u) {
                    a_I += e.mult;
                    ++size_I;
                    cap_labels.push_back(e.label);
                    cap_eta.push_back({e.label, -e.mult});
                } else {
                    rest.push_back(e);
                }
            }
            for (int j = 1; j <= a_I; ++j) {
                const bool genus0_cap = key.g + 1 - j >= 0 && size_I + j - 2 != 0;
                const bool genus1_cap = key.g - j >= 0;
                if (!genus0_cap && !genus1_cap) continue;
                for (const partition& B : partitions_of(a_I, j)) {
                    rational weight(1);
                    for (int b : B) weight *= rational(b);
                    weight /= rational(aut_partition(B)) * denom;

                    std::vector<int> u(j, 0);
                    while (true) {
                        std::vector<eta> sub = rest;
                        for (int t = 0; t < j; ++t) sub.push_back({u[t], B[t]});
                        if (genus0_cap) {
                            std::vector<int> labels = cap_labels;
                            for (int t = 0; t < j; ++t) labels.push_back(r - 2 - u[t]);
                            rational cap = table_->lookup(labels);
                            if (!cap.is_zero()) {
                                s_key child{r, key.n - 1, key.g + 1 - j, key.m, sub};
                                Value v = eval(child.canonicalize(), depth + 1);
                                total += (rational(size_I + j - 2) * weight * cap) * v;
                            }
                        }
                        if (genus1_cap) {
                            std::vector<eta> entries = cap_eta;
                            for (int t = 0; t < j; ++t) entries.push_back({r - 2 - u[t], B[t]});
                            auto hat_key = shat1_key::make(r, entries);
                            if (!shat1_vanishes(hat_key)) {
                                s_key child{r, key.n - 1, key.g - j, key.m, sub};
                                Value v = eval(child.canonicalize(), depth + 1);
                                if (!is_zero(v)) {
                                    Value hat = resolver_(hat_key);
                                    total += (rational(size_I + j) * weight) * (v * hat);
                                }
                            }
                        }
                        int t = 0;
                        while (t < j && ++u[t] > r - 2) u[t++] = 0;
                        if (t == j) break;
                    }
                }
            }
        }
        return total;
    }

    static bool is_zero(const Value& v) { return v == Value(0); }

    std::shared_ptr<const primary_table> table_;
    shat1_resolver resolver_;
    std::map<s_key, Value> memo_;
    mutable std::shared_mutex mutex_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<int> max_depth_{0};
};

struct shat1_solver_options {
    int bound = 3;               // report keys with max |b| up to this
    int max_insertions = 3;      // primaries in each generated genus-one correlator
    bool require_complete = false;
};

struct shat1_solution {
    int r = 0;
    int bound = 0;
    std::map<shat1_key, rational> values;   // every determined key, any size
    std::vector<shat1_key> candidates;       // in-bound keys not forced to zero by the vanishing rules
    std::vector<shat1_key> vanishing;        // in-bound keys forced to zero by the vanishing rules
    std::vector<shat1_key> unresolved;       // in-bound candidates the equations leave free
    std::size_t equations = 0;

    // In-bound nonzero values.
    std::map<shat1_key, rational> table() const {
        std::map<shat1_key, rational> out;
        for (auto& k : candidates) {
            auto it = values.find(k);
            if (it != values.end() && !it->second.is_zero()) out.emplace(k, it->second);
        }
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json entries = nlohmann::json::array();
        for (auto& [k, v] : table()) {
            nlohmann::json pairs = nlohmann::json::array();
            for (auto& e : k.entries) pairs.push_back({e.label, e.mult});
            entries.push_back({{"labels", pairs}, {"value", v.str()}});
        }
        nlohmann::json zeros = nlohmann::json::array();
        for (auto& k : candidates)
            if (values.count(k) && values.at(k).is_zero()) zeros.push_back(format_etas(k.entries));
        for (auto& k : vanishing) zeros.push_back(format_etas(k.entries));
        nlohmann::json open = nlohmann::json::array();
        for (auto& k : unresolved) open.push_back(format_etas(k.entries));
        return {{"r", r}, {"bound", bound}, {"entries", entries}, {"zero", zeros}, {"unresolved", open},
                {"equations", equations}};
    }
};

// All canonical genus-one keys with labels in [0, r-2] and |b| <= bound.
inline std::vector<shat1_key> enumerate_shat1_keys(int r, int bound) {
    std::set<shat1_key> keys;
    // sum(m) = r(k-1) with labels <= r-2 forces k <= r/2.
    for (int k = 2; 2 * k <= r; ++k) {
        std::vector<eta> cur(k);
        std::function<void(int)> rec = [&](int i) {
            if (i == k) {
                int sum = 0;
                for (auto& e : cur) sum += e.mult;
                if (sum == 0) keys.insert(shat1_key::make(r, cur));
                return;
            }
            for (int label = 0; label <= r - 2; ++label)
                for (int b = -bound; b <= bound; ++b) {
                    if (b == 0) continue;
                    cur[i] = {label, b};
                    rec(i + 1);
                }
        };
        rec(0);
    }
    return {keys.begin(), keys.end()};
}

class engine {
public:
    explicit engine(primary_table table)
        : table_(std::make_shared<const primary_table>(std::move(table))),
          numeric_(table_, [this](const shat1_key& k) { return shat1(k); }) {}

    explicit engine(int r) : engine(primary_table::builtin(r)) {}

    int r() const { return table_->r(); }
    const primary_table& primaries() const { return *table_; }
    s_evaluator<rational>& numeric() { return numeric_; }

    rational s_number(const s_key& key) { return numeric_(key); }

    // <tau_{n,m} prod tau_{0,m_i}>_g; with no primaries the string equation rewrites it
    // as <tau_{n+1,m} tau_{0,0}>_g.
    rational correlator(int n, int m, std::vector<int> primaries, std::optional<int> genus = {}) {
        if (n < 0) throw error(error_kind::precondition_violated, "negative descendant index");
        auto check = [&](int label) {
            if (label < 0 || label > r() - 1) throw error(error_kind::precondition_violated, "label out of range [0, r-1]");
        };
        check(m);
        for (int q : primaries) check(q);
        if (primaries.empty()) return correlator(n + 1, m, {0}, genus);

        std::vector<tau> ins{{n, m}};
        for (int q : primaries) ins.push_back({0, q});
        auto g = correlator_selection_genus(r(), ins);
        if (!g || (genus && *genus != *g)) return 0;
        if (m == r() - 1) return 0;
        for (int q : primaries)
            if (q == r() - 1) return 0;

        const int G = *g;
        rational total;
        for (int j = 0; j <= G; ++j) {
            if (n - j < 0) continue;
            s_key key{r(), n - j, G, m, {}};
            for (int q : primaries) key.insertions.push_back({q, 1});
            for (int t = 0; t < G - j; ++t) key.insertions.push_back({0, 1});
            rational term = rational(binomial(G, j)) / rational(factorial(G)) * s_number(key);
            total += (j % 2 == 0) ? term : -term;
        }
        return total;
    }

    // The genus-one value S^n(prod eta_{m_i,a_i} eta_{0,1}) - S^{n-1}(prod eta_{m_i,a_i}),
    // with genus-one integrals not yet known kept as unknowns.
    affine_form correlator_g1_generalized(int n, int m, const std::vector<eta>& insertions) {
        auto& ev = symbolic();
        s_key top{r(), n, 1, m, insertions};
        top.insertions.push_back({0, 1});
        affine_form v = ev(top);
        if (n >= 1) v -= ev(s_key{r(), n - 1, 1, m, insertions});
        return v;
    }

    rational shat1(const shat1_key& key) {
        if (key.r != r()) throw error(error_kind::precondition_violated, "key r differs from the engine");
        if (shat1_vanishes(key)) return 0;
        {
            std::shared_lock lock(shat1_mutex_);
            auto it = shat1_values_.find(key);
            if (it != shat1_values_.end()) return it->second;
        }
        const int bound = std::max(3, key.max_abs_mult());
        solve_shat1({bound, 3, false});
        std::shared_lock lock(shat1_mutex_);
        auto it = shat1_values_.find(key);
        if (it != shat1_values_.end()) return it->second;
        throw error(error_kind::unsolved_shat1, "genus-one value " + key.str() + " is not determined by the equations");
    }

    void set_shat1(const shat1_key& key, const rational& v) {
        std::unique_lock lock(shat1_mutex_);
        shat1_values_[key] = v;
    }

    // Generates genus-one equations from the topological recursion relation and solves
    // them exactly. Determined values are kept for later lookups.
    shat1_solution solve_shat1(const shat1_solver_options& opt = {});

    // Genus-one correlator through the genus-zero topological recursion relation:
    // <tau_{n,m} prod tau_{0,m_i}>_1 = (1/24) sum_l <tau_{n-1,m} tau_{0,l} tau_{0,r-2-l} prod tau_{0,m_i}>_0
    rational trr_genus1(int n, int m, const std::vector<int>& primaries) {
        if (n < 1) throw error(error_kind::precondition_violated, "topological recursion needs n >= 1");
        rational total;
        for (int l = 0; l <= r() - 2; ++l) {
            std::vector<int> prims = primaries;
            prims.push_back(l);
            prims.push_back(r() - 2 - l);
            if (n - 1 == 0) {
                prims.push_back(m);
                total += table_->lookup(prims);
            } else {
                total += correlator(n - 1, m, prims, 0);
            }
        }
        return total / rational(24);
    }

    std::vector<std::pair<std::string, rational>> export_memo() const {
        std::vector<std::pair<std::string, rational>> out;
        for (auto& [k, v] : numeric_.memo_entries()) out.emplace_back(k.str(), v);
        std::shared_lock lock(shat1_mutex_);
        for (auto& [k, v] : shat1_values_) out.emplace_back(k.str(), v);
        return out;
    }

    // Accepts records produced by export_memo; returns the number used.
    std::size_t import_memo(const std::vector<std::pair<std::string, rational>>& records) {
        std::size_t used = 0;
        for (auto& [text, v] : records) {
            if (text.rfind("S ", 0) == 0) {
                s_key k = s_key::parse(text);
                if (k.r != r()) continue;
                numeric_.seed(k, v);
                ++used;
            } else if (text.rfind("Shat1 ", 0) == 0) {
                std::istringstream in(text);
                std::string tag, rs, ins;
                in >> tag >> rs >> ins;
                if (rs.rfind("r=", 0) != 0) continue;
                int kr = std::stoi(rs.substr(2));
                if (kr != r()) continue;
                set_shat1(shat1_key::parse(kr, ins), v);
                ++used;
            }
        }
        return used;
    }

private:
    s_evaluator<affine_form>& symbolic() {
        std::call_once(symbolic_once_, [this] {
            symbolic_ = std::make_unique<s_evaluator<affine_form>>(table_, [this](const shat1_key& k) -> affine_form {
                if (shat1_vanishes(k)) return affine_form(0);
                std::shared_lock lock(shat1_mutex_);
                auto it = shat1_values_.find(k);
                if (it != shat1_values_.end()) return affine_form(it->second);
                return affine_form::unknown(k);
            });
        });
        return *symbolic_;
    }

    std::shared_ptr<const primary_table> table_;
    s_evaluator<rational> numeric_;
    std::unique_ptr<s_evaluator<affine_form>> symbolic_;
    std::once_flag symbolic_once_;
    std::map<shat1_key, rational> shat1_values_;
    mutable std::shared_mutex shat1_mutex_;
    std::mutex solve_mutex_;
};

namespace detail {

// Reduced row echelon form over the rationals. Rows are sparse maps column -> coefficient;
// column -1 holds the right-hand side.
struct linear_system {
    std::vector<std::map<int, rational>> rows;

    void add(std::map<int, rational> row) { rows.push_back(std::move(row)); }

    // Returns the value of every column fixed by the system; throws on inconsistency.
    std::map<int, rational> solve() {
        std::vector<std::map<int, rational>> pivots; // each with a distinct leading column
        std::vector<int> pivot_col;
        for (auto row : rows) {
            for (std::size_t p = 0; p < pivots.size(); ++p) {
                auto it = row.find(pivot_col[p]);
                if (it == row.end()) continue;
                rational f = it->second;
                for (auto& [c, v] : pivots[p]) {
                    auto& slot = row[c];
                    slot -= f * v;
                    if (slot.is_zero()) row.erase(c);
                }
            }
            int lead = -1;
            for (auto& [c, v] : row)
                if (c >= 0) {
                    lead = c;
                    break;
                }
            if (lead < 0) {
                auto rhs = row.find(-1);
                if (rhs != row.end() && !rhs->second.is_zero())
                    throw error(error_kind::inconsistent_system, "redundant genus-one equation disagrees: 0 = " +
                                                                     rhs->second.str());
                continue;
            }
            rational inv = rational(1) / row[lead];
            for (auto& [c, v] : row) v *= inv;
            // Keep existing pivots reduced against the new one.
            for (auto& prow : pivots) {
                auto it = prow.find(lead);
                if (it == prow.end()) continue;
                rational f = it->second;
                for (auto& [c, v] : row) {
                    auto& slot = prow[c];
                    slot -= f * v;
                    if (slot.is_zero()) prow.erase(c);
                }
            }
            pivots.push_back(std::move(row));
            pivot_col.push_back(lead);
        }
        std::map<int, rational> fixed;
        for (std::size_t p = 0; p < pivots.size(); ++p) {
            int free_terms = 0;
            for (auto& [c, v] : pivots[p])
                if (c >= 0 && c != pivot_col[p]) ++free_terms;
            if (free_terms == 0) {
                auto rhs = pivots[p].find(-1);
                fixed[pivot_col[p]] = rhs == pivots[p].end() ? rational(0) : rhs->second;
            }
        }
        return fixed;
    }
};

} // namespace detail

inline shat1_solution engine::solve_shat1(const shat1_solver_options& opt) {
    std::lock_guard guard(solve_mutex_);
    const int r = this->r();
    shat1_solution sol;
    sol.r = r;
    sol.bound = opt.bound;

    for (auto& k : enumerate_shat1_keys(r, opt.bound)) {
        if (shat1_vanishes(k)) sol.vanishing.push_back(k);
        else sol.candidates.push_back(k);
    }

    std::map<shat1_key, int> column;
    std::vector<shat1_key> column_key;
    auto col = [&](const shat1_key& k) {
        auto [it, inserted] = column.try_emplace(k, static_cast<int>(column_key.size()));
        if (inserted) column_key.push_back(k);
        return it->second;
    };

    detail::linear_system system;
    std::set<std::tuple<int, long long, std::vector<eta>>> seen;
    for (int s = 1; s <= opt.max_insertions; ++s) {
        std::vector<int> labels(s, 0);
        std::function<void(int, int)> labels_rec = [&](int i, int from) {
            if (i == s) {
                for (int m = 0; m <= r - 2; ++m) {
                    std::vector<tau> ins{{0, m}};
                    long long sum = m;
                    for (int q : labels) sum += q;
                    // genus one: s+1 = n + sum/r
                    if (sum % r != 0) continue;
                    const long long n = s + 1 - sum / r;
                    if (n < 1) continue;
                    const rational lhs = trr_genus1(static_cast<int>(n), m, labels);

                    std::vector<int> a(s, 1);
                    while (true) {
                        std::vector<eta> etas;
                        for (int i2 = 0; i2 < s; ++i2) etas.push_back({labels[i2], a[i2]});
                        std::sort(etas.begin(), etas.end());
                        if (seen.insert({m, n, etas}).second) {
                            affine_form rhs = correlator_g1_generalized(static_cast<int>(n), m, etas);
                            std::map<int, rational> row;
                            for (auto& [k, c] : rhs.coefficients()) row[col(k)] = c;
                            row[-1] = lhs - rhs.constant();
                            system.add(std::move(row));
                            ++sol.equations;
                        }
                        int t = 0;
                        while (t < s && ++a[t] > opt.bound + 1) a[t++] = 1;
                        if (t == s) break;
                    }
                }
                return;
            }
            for (int q = from; q <= r - 2; ++q) {
                labels[i] = q;
                labels_rec(i + 1, q);
            }
        };
        labels_rec(0, 0);
    }

    for (auto& [c, v] : system.solve()) sol.values[column_key[c]] = v;
    {
        std::unique_lock lock(shat1_mutex_);
        for (auto& [k, v] : sol.values) shat1_values_[k] = v;
    }
    for (auto& k : sol.candidates)
        if (!sol.values.count(k)) sol.unresolved.push_back(k);
    if (opt.require_complete && !sol.unresolved.empty())
        throw error(error_kind::underdetermined_system,
                    std::to_string(sol.unresolved.size()) + " genus-one keys left free, first " + sol.unresolved[0].str());
    return sol;
}

} // namespace moduli::rspin
