#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "moduli/error.hpp"
#include "moduli/rational.hpp"
#include "moduli/rspin.hpp"

namespace moduli::hierarchy {

using rspin::tau;

// A correlator <prod tau_{n_i,m_i}> with the genus fixed by the selection rule.
struct bracket {
    std::vector<tau> insertions; // sorted, descendants last
    std::optional<int> genus;

    static bracket make(int r, std::vector<tau> ins) {
        std::sort(ins.begin(), ins.end());
        bracket b{std::move(ins), std::nullopt};
        b.genus = rspin::correlator_selection_genus(r, b.insertions);
        return b;
    }

    int descendants() const {
        int d = 0;
        for (auto& t : insertions) d += t.n > 0;
        return d;
    }

    std::string str() const {
        std::string out = "<";
        for (std::size_t i = 0; i < insertions.size();) {
            std::size_t j = i;
            while (j < insertions.size() && insertions[j] == insertions[i]) ++j;
            if (i) out += ' ';
            out += "tau" + std::to_string(insertions[i].n) + "," + std::to_string(insertions[i].m);
            if (j - i > 1) out += "^" + std::to_string(j - i);
            i = j;
        }
        out += ">";
        out += genus ? "_" + std::to_string(*genus) : "_none";
        return out;
    }

    friend auto operator<=>(const bracket&, const bracket&) = default;
    friend bool operator==(const bracket&, const bracket&) = default;
};

struct term {
    rational coefficient;
    std::vector<bracket> factors;
};

// The Boussinesq relation at tau_{n,m}, differentiated by the primaries in extra.
struct relation_instance {
    int n = 1;
    int m = 0;
    std::vector<int> extra;

    std::string str() const {
        std::string e;
        for (std::size_t i = 0; i < extra.size(); ++i) e += (i ? "," : "") + std::to_string(extra[i]);
        return "n=" + std::to_string(n) + " m=" + std::to_string(m) + " E={" + e + "}";
    }
};

struct expansion {
    std::vector<term> lhs;
    std::vector<term> rhs;
    // For each two-factor template on the right, the number of Leibniz splits generated.
    std::vector<std::size_t> split_counts;
};

constexpr int boussinesq_r = 3;

inline expansion boussinesq_expand(const relation_instance& inst) {
    if (inst.n < 1) throw error(error_kind::precondition_violated, "relation needs n >= 1");
    if (inst.m < 0 || inst.m > 1) throw error(error_kind::precondition_violated, "relation needs m in {0,1}");
    for (int e : inst.extra)
        if (e < 0 || e > 1) throw error(error_kind::precondition_violated, "extra insertions must be tau_{0,0} or tau_{0,1}");
    const int r = boussinesq_r;
    const tau d{inst.n - 1, inst.m}, t00{0, 0}, t01{0, 1};

    auto with_extra = [&](std::vector<tau> base, std::uint32_t mask) {
        for (std::size_t i = 0; i < inst.extra.size(); ++i)
            if (mask >> i & 1u) base.push_back({0, inst.extra[i]});
        return base;
    };
    const std::uint32_t all = (std::uint32_t(1) << inst.extra.size()) - 1;

    expansion out;
    {
        auto b = bracket::make(r, with_extra({{inst.n, inst.m}, t00, t00}, all));
        if (b.genus) out.lhs.push_back({rational(3 * inst.n + inst.m + 1), {b}});
    }

    struct product_template {
        rational coef;
        std::vector<tau> first;
        std::vector<tau> second;
    };
    const std::vector<product_template> products{
        {1, {d, t01}, {t00, t00, t00}},
        {2, {d, t00}, {t01, t00, t00}},
        {2, {d, t01, t00}, {t00, t00}},
        {3, {d, t00, t00}, {t01, t00}},
    };
    for (auto& p : products) {
        std::size_t generated = 0;
        for (std::uint32_t mask = 0; mask <= all; ++mask) {
            ++generated;
            auto b1 = bracket::make(r, with_extra(p.first, mask));
            auto b2 = bracket::make(r, with_extra(p.second, all & ~mask));
            if (b1.genus && b2.genus) out.rhs.push_back({p.coef, {b1, b2}});
        }
        out.split_counts.push_back(generated);
    }
    {
        auto b = bracket::make(r, with_extra({d, t01, t00, t00, t00}, all));
        if (b.genus) out.rhs.push_back({rational(2, 3), {b}});
    }
    return out;
}

// Evaluates a bracket by string reductions and the r-spin engine.
class evaluator {
public:
    explicit evaluator(rspin::engine& e) : engine_(e) {}

    struct record {
        bracket b;
        rational value;
    };

    rational operator()(const bracket& b) {
        if (!b.genus) return 0;
        auto it = memo_.find(b);
        if (it != memo_.end()) return it->second;
        rational v = compute(b);
        memo_.emplace(b, v);
        log_.push_back({b, v});
        return v;
    }

    // <tau_{0,0} X>_g = sum over descendants of X lowered by one.
    rational string_reduce(const bracket& b) {
        auto pos = std::find(b.insertions.begin(), b.insertions.end(), tau{0, 0});
        if (pos == b.insertions.end())
            throw error(error_kind::precondition_violated, "string reduction needs a tau_{0,0}: " + b.str());
        const int g = b.genus.value_or(-1);
        std::vector<tau> rest(b.insertions.begin(), pos);
        rest.insert(rest.end(), pos + 1, b.insertions.end());
        if (g == 0 && rest.size() == 2 && rest[0].n == 0 && rest[1].n == 0)
            return rest[0].m + rest[1].m == engine_.r() - 2 ? 1 : 0;
        if (2 * g - 2 + static_cast<int>(rest.size()) <= 0)
            throw error(error_kind::unstable, "removing tau_{0,0} from " + b.str() + " leaves an unstable correlator");
        rational total;
        for (std::size_t i = 0; i < rest.size(); ++i) {
            if (rest[i].n == 0) continue;
            auto lowered = rest;
            --lowered[i].n;
            auto nb = bracket::make(engine_.r(), lowered);
            if (nb.genus != b.genus) throw error(error_kind::precondition_violated, "string reduction changed the genus");
            total += (*this)(nb);
        }
        return total;
    }

    const std::vector<record>& log() const { return log_; }

private:
    rational compute(const bracket& b) {
        const int g = *b.genus;
        const int d = b.descendants();
        int primaries = 0;
        bool has_t00 = false;
        for (auto& t : b.insertions) {
            if (t.n == 0) ++primaries;
            if (t.n == 0 && t.m == 0) has_t00 = true;
        }
        if (d == 0) {
            if (g == 0) {
                std::vector<int> labels;
                for (auto& t : b.insertions) labels.push_back(t.m);
                return engine_.primaries().lookup(labels);
            }
            if (has_t00) return 0;
            throw error(error_kind::not_engine_computable, "primary correlator in positive genus: " + b.str());
        }
        // Keep one primary for the engine; strip further tau_{0,0} by the string equation.
        if (has_t00 && (primaries >= 2 || d >= 2)) return string_reduce(b);
        if (d >= 2) throw error(error_kind::not_engine_computable, "two descendants: " + b.str());
        tau desc{};
        std::vector<int> prims;
        for (auto& t : b.insertions) {
            if (t.n > 0) desc = t;
            else prims.push_back(t.m);
        }
        return engine_.correlator(desc.n, desc.m, prims, g);
    }

    rspin::engine& engine_;
    std::map<bracket, rational> memo_;
    std::vector<record> log_;
};

struct check_report {
    relation_instance instance;
    rational lhs;
    rational rhs;
    bool equal = false;
    std::vector<evaluator::record> terms;

    nlohmann::json to_json() const {
        nlohmann::json t = nlohmann::json::array();
        for (auto& rec : terms)
            t.push_back({{"bracket", rec.b.str()},
                         {"genus", rec.b.genus ? nlohmann::json(*rec.b.genus) : nlohmann::json(nullptr)},
                         {"value", rec.value.str()}});
        return {{"instance", {{"n", instance.n}, {"m", instance.m}, {"extra", instance.extra}}},
                {"lhs", lhs.str()},
                {"rhs", rhs.str()},
                {"equal", equal},
                {"terms", t}};
    }
};

inline rational evaluate_side(const std::vector<term>& side, evaluator& ev) {
    rational total;
    for (auto& t : side) {
        rational v = t.coefficient;
        for (auto& f : t.factors) {
            if (v.is_zero()) break;
            v *= ev(f);
        }
        total += v;
    }
    return total;
}

inline check_report boussinesq_check(const relation_instance& inst, rspin::engine& engine) {
    if (engine.r() != boussinesq_r) throw error(error_kind::precondition_violated, "the Boussinesq relation needs r = 3");
    auto ex = boussinesq_expand(inst);
    evaluator ev(engine);
    check_report rep;
    rep.instance = inst;
    rep.lhs = evaluate_side(ex.lhs, ev);
    rep.rhs = evaluate_side(ex.rhs, ev);
    rep.equal = rep.lhs == rep.rhs;
    rep.terms = ev.log();
    return rep;
}

// Canonical form used when solving relations one after another: string reductions are
// applied while a single descendant is present, leaving either a constant or a bracket
// with one descendant and no tau_{0,0}.
struct canonical {
    std::optional<rational> value;
    bracket key;
};

inline canonical canonicalize(const bracket& b, const rspin::primary_table& table) {
    if (!b.genus) return {rational(0), b};
    std::vector<tau> ins = b.insertions;
    const int g = *b.genus;
    while (true) {
        int d = 0;
        for (auto& t : ins) d += t.n > 0;
        auto pos = std::find(ins.begin(), ins.end(), tau{0, 0});
        if (d == 0) {
            if (g == 0) {
                std::vector<int> labels;
                for (auto& t : ins) labels.push_back(t.m);
                return {table.lookup(labels), b};
            }
            if (pos != ins.end()) return {rational(0), b};
            throw error(error_kind::not_engine_computable, "primary correlator in positive genus: " + b.str());
        }
        if (d >= 2) throw error(error_kind::not_engine_computable, "two descendants: " + b.str());
        if (pos == ins.end()) break;
        ins.erase(pos);
        for (auto& t : ins)
            if (t.n > 0) {
                --t.n;
                break;
            }
    }
    bracket key = bracket::make(table.r(), ins);
    if (key.genus != b.genus) throw error(error_kind::precondition_violated, "string reduction changed the genus");
    return {std::nullopt, key};
}

// Solves one relation for the value of its left-hand bracket, given values of the others.
inline std::pair<bracket, rational> solve_relation(const relation_instance& inst, const rspin::primary_table& table,
                                                   const std::map<bracket, rational>& known) {
    auto ex = boussinesq_expand(inst);
    if (ex.lhs.empty()) throw error(error_kind::precondition_violated, "left-hand side vanishes by selection");
    const auto lhs = canonicalize(ex.lhs[0].factors[0], table);
    if (lhs.value) throw error(error_kind::precondition_violated, "left-hand side is already known: " + lhs.key.str());
    const bracket unknown = lhs.key;

    // unknown * coef_unknown = constant
    rational coef_unknown = ex.lhs[0].coefficient;
    rational constant;
    for (auto& t : ex.rhs) {
        rational v = t.coefficient;
        int unknown_power = 0;
        for (auto& f : t.factors) {
            auto c = canonicalize(f, table);
            if (c.value) v *= *c.value;
            else if (c.key == unknown) ++unknown_power;
            else {
                auto it = known.find(c.key);
                if (it == known.end())
                    throw error(error_kind::not_engine_computable, "relation " + inst.str() + " needs " + c.key.str());
                v *= it->second;
            }
        }
        if (unknown_power > 1) throw error(error_kind::nonlinear_expression, "relation is not linear in " + unknown.str());
        if (unknown_power == 1) coef_unknown -= v;
        else constant += v;
    }
    return {unknown, constant / coef_unknown};
}

// Solves the relations in order, feeding each result to the next.
inline std::map<bracket, rational> solve_chain(const std::vector<relation_instance>& chain,
                                               const rspin::primary_table& table) {
    std::map<bracket, rational> known;
    for (auto& inst : chain) {
        auto [key, value] = solve_relation(inst, table, known);
        known[key] = value;
    }
    return known;
}

} // namespace moduli::hierarchy
