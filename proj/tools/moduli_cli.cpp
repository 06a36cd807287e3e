#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "moduli/acceptance.hpp"
#include "moduli/combinatorics.hpp"
#include "moduli/hierarchy.hpp"
#include "moduli/hurwitz.hpp"
#include "moduli/psi_classes.hpp"
#include "moduli/query.hpp"
#include "moduli/rspin.hpp"

using namespace moduli;
using json = nlohmann::json;

namespace {

struct global_options {
    bool json = false;
    bool decimal = false;
    std::string cache;
    std::string primary_table;
};

// Holds engines, the optional persistent cache and the output format for one invocation.
class session {
public:
    explicit session(global_options opt) : opt_(std::move(opt)) {
        if (const char* env = std::getenv("MODULI_CACHE"); env && *env) opt_.cache = env;
        if (!opt_.cache.empty()) {
            cache_.emplace(opt_.cache);
            cache_->load();
            if (cache_->invalidated()) std::cerr << "note: cache " << opt_.cache << " was written by another engine version; ignoring it\n";
        }
        if (!opt_.primary_table.empty()) {
            std::ifstream in(opt_.primary_table);
            if (!in) throw error(error_kind::parse, "cannot read primary table " + opt_.primary_table);
            json j;
            try {
                in >> j;
            } catch (const json::exception& ex) {
                throw error(error_kind::parse, std::string("primary table: ") + ex.what());
            }
            table_ = rspin::primary_table::from_json(j);
        }
    }

    const global_options& options() const { return opt_; }

    rspin::engine& engine(int r) {
        auto it = engines_.find(r);
        if (it != engines_.end()) return *it->second;
        std::unique_ptr<rspin::engine> e;
        if (table_ && table_->r() == r) e = std::make_unique<rspin::engine>(*table_);
        else e = std::make_unique<rspin::engine>(rspin::primary_table::builtin(r));
        if (cache_) {
            std::vector<std::pair<std::string, rational>> records(cache_->entries().begin(), cache_->entries().end());
            e->import_memo(records);
        }
        return *engines_.emplace(r, std::move(e)).first->second;
    }

    // Top-level answers are cached under the query string.
    std::optional<rational> cached(const std::string& key) {
        if (!cache_) return std::nullopt;
        auto v = cache_->find("Q " + key);
        if (v) ++hits_;
        return v;
    }

    void remember(const std::string& key, const rational& v) {
        if (cache_) cache_->put("Q " + key, v);
    }

    std::size_t top_level_hits() const { return hits_; }

    void finish() {
        if (!cache_) return;
        for (auto& [r, e] : engines_)
            for (auto& [k, v] : e->export_memo()) cache_->put(k, v);
        cache_->save();
    }

private:
    global_options opt_;
    std::optional<cache_file> cache_;
    std::optional<rspin::primary_table> table_;
    std::map<int, std::unique_ptr<rspin::engine>> engines_;
    std::size_t hits_ = 0;
};

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

std::string decimal_text(const rational& v) {
    std::ostringstream out;
    out << std::setprecision(12) << v.to_double();
    return out.str();
}

void emit(const session& s, const query_result& q, json extra = json::object()) {
    if (s.options().json) {
        json j = q.to_json();
        if (s.options().decimal) j["decimal"] = q.value.to_double();
        for (auto& [k, v] : extra.items()) j[k] = v;
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::cout << q.value.str();
    if (s.options().decimal) std::cout << "  (~" << decimal_text(q.value) << ")";
    std::cout << "  [" << q.method << "]\n";
    for (auto& [k, v] : extra.items()) std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
}

diagnostics engine_diagnostics(session& s, rspin::engine& e, clock_type::time_point t0) {
    return {e.numeric().cache_hits() + s.top_level_hits(), e.numeric().max_depth(), ms_since(t0)};
}

// --- hurwitz ---------------------------------------------------------------------------

struct hurwitz_args {
    int n = 0;
    std::string passports;
    std::string method = "auto";
};

bool has_full_cycle(const ramification_profile& prof) {
    for (auto& p : prof.passports)
        if (p.length() == 1 && p[0] == prof.degree) return true;
    return false;
}

std::vector<std::string> applicable_methods(const ramification_profile& prof) {
    const hurwitz::hurwitz_limits lim;
    std::vector<std::string> out;
    const bool full = has_full_cycle(prof);
    const bool polynomial = full && prof.passports.size() >= 3 && riemann_hurwitz_genus(prof) == 0;
    if (full && prof.degree <= lim.max_class_algebra_degree) out.push_back("class-algebra");
    if (prof.degree <= lim.max_bruteforce_degree) out.push_back("brute");
    if (polynomial) out.push_back("gjlz");
    if (polynomial) {
        int points = 0;
        for (auto& p : prof.passports) points += p.length();
        if (points <= 8) out.push_back("thm1");
    }
    return out;
}

rational hurwitz_by(const std::string& method, const ramification_profile& prof) {
    if (method == "brute") return hurwitz::hurwitz_bruteforce(prof);
    if (method == "class-algebra") return hurwitz::hurwitz_class_algebra(prof);
    if (method == "gjlz") return hurwitz::hurwitz_polynomial_closed(prof);
    if (method == "thm1") return m0n::psi_hurwitz(prof);
    throw error(error_kind::parse, "unknown method '" + method + "'");
}

int run_hurwitz(session& s, const hurwitz_args& a) {
    auto t0 = clock_type::now();
    auto prof = ramification_profile::parse(a.n, a.passports);
    int g = riemann_hurwitz_genus(prof);
    query_result q;
    q.query = {{"command", "hurwitz"}, {"n", a.n}, {"passports", prof.str()}, {"method", a.method}, {"genus", g}};
    json extra = json::object();
    const std::string key = "hurwitz n=" + std::to_string(a.n) + " " + prof.str() + " " + a.method;

    std::vector<std::string> methods;
    if (a.method == "auto") {
        methods = applicable_methods(prof);
        if (methods.empty())
            throw error(error_kind::degree_too_large, "no method applies to degree " + std::to_string(a.n));
        if (methods.size() > 2) methods.resize(2);
    } else {
        methods = {a.method};
    }
    q.method = methods.front();
    if (auto hit = s.cached(key)) {
        q.value = *hit;
    } else {
        q.value = hurwitz_by(methods.front(), prof);
        if (methods.size() > 1) {
            rational other = hurwitz_by(methods[1], prof);
            if (other != q.value)
                throw error(error_kind::inconsistent_system, methods[0] + " gives " + q.value.str() + " but " + methods[1] +
                                                                 " gives " + other.str());
            extra["cross_checked_with"] = methods[1];
        }
        s.remember(key, q.value);
    }
    q.diag = {s.top_level_hits(), 0, ms_since(t0)};
    emit(s, q, extra);
    return 0;
}

// --- r-spin ----------------------------------------------------------------------------

struct correlator_args {
    int r = 3;
    std::string tau;
    std::string tau0;
    std::optional<int> genus;
    std::string method = "alg-recursion";
};

int run_correlator(session& s, const correlator_args& a) {
    auto t0 = clock_type::now();
    auto comma = a.tau.find(',');
    if (comma == std::string::npos) throw error(error_kind::parse, "--tau expects n,m");
    int n = 0, m = 0;
    try {
        n = std::stoi(a.tau.substr(0, comma));
        m = std::stoi(a.tau.substr(comma + 1));
    } catch (const std::logic_error&) {
        throw error(error_kind::parse, "--tau expects n,m");
    }
    std::vector<int> prims;
    for (auto& e : rspin::parse_etas(a.tau0)) {
        if (e.mult < 1) throw error(error_kind::parse, "--tau0 counts must be positive");
        for (int i = 0; i < e.mult; ++i) prims.push_back(e.label);
    }
    std::sort(prims.begin(), prims.end());

    auto& e = s.engine(a.r);
    query_result q;
    q.method = a.method;
    q.query = {{"command", "correlator"}, {"r", a.r}, {"tau", {n, m}}, {"tau0", prims}};
    if (a.genus) q.query["genus"] = *a.genus;
    std::string key = "correlator r=" + std::to_string(a.r) + " tau=" + std::to_string(n) + "," + std::to_string(m) + " prims=";
    for (int p : prims) key += std::to_string(p) + ".";
    key += " g=" + (a.genus ? std::to_string(*a.genus) : std::string("any")) + " " + a.method;

    if (auto hit = s.cached(key)) {
        q.value = *hit;
    } else if (a.method == "alg-recursion") {
        q.value = e.correlator(n, m, prims, a.genus);
    } else if (a.method == "trr") {
        std::vector<rspin::tau> ins{{n, m}};
        for (int p : prims) ins.push_back({0, p});
        auto g = rspin::correlator_selection_genus(a.r, ins);
        if (a.genus && *a.genus != 1) throw error(error_kind::precondition_violated, "the trr method computes genus one only");
        q.value = (g && *g == 1) ? e.trr_genus1(n, m, prims) : rational(0);
    } else {
        throw error(error_kind::parse, "unknown method '" + a.method + "'");
    }
    s.remember(key, q.value);
    q.diag = engine_diagnostics(s, e, t0);
    emit(s, q);
    return 0;
}

struct snumber_args {
    int r = 3, n = 0, g = 0, m = 0;
    std::string insertions;
};

int run_snumber(session& s, const snumber_args& a) {
    auto t0 = clock_type::now();
    auto& e = s.engine(a.r);
    rspin::s_key key{a.r, a.n, a.g, a.m, rspin::parse_etas(a.insertions)};
    key.canonicalize();
    query_result q;
    q.method = "alg-recursion";
    q.query = {{"command", "snumber"}, {"key", key.str()}};
    q.value = e.s_number(key);
    q.diag = engine_diagnostics(s, e, t0);
    emit(s, q);
    return 0;
}

struct shat1_args {
    int r = 4;
    std::string key;
    bool table = false;
    int bound = 3;
};

int run_shat1(session& s, const shat1_args& a) {
    auto t0 = clock_type::now();
    auto& e = s.engine(a.r);
    if (a.table) {
        auto sol = e.solve_shat1({a.bound, 3, false});
        if (s.options().json) std::cout << sol.to_json().dump(2) << '\n';
        else {
            for (auto& [k, v] : sol.table()) std::cout << k.str() << " = " << v.str() << '\n';
            std::cout << sol.candidates.size() + sol.vanishing.size() << " keys with |b| <= " << a.bound << ", "
                      << sol.table().size() << " nonzero, " << sol.unresolved.size() << " unresolved, " << sol.equations
                      << " equations\n";
        }
        return 0;
    }
    if (a.key.empty()) throw error(error_kind::parse, "shat1 needs --key or --table");
    auto key = rspin::shat1_key::parse(a.r, a.key);
    query_result q;
    q.method = "trr";
    q.query = {{"command", "shat1"}, {"key", key.str()}};
    q.value = e.shat1(key);
    q.diag = engine_diagnostics(s, e, t0);
    emit(s, q);
    return 0;
}

int run_tau3g(session& s, int g, int l) {
    auto t0 = clock_type::now();
    query_result q;
    q.method = "class-algebra";
    q.query = {{"command", "tau3g"}, {"g", g}, {"l", l}};
    const std::string key = "tau3g g=" + std::to_string(g) + " l=" + std::to_string(l);
    if (auto hit = s.cached(key)) q.value = *hit;
    else {
        q.value = hurwitz::tau3g_sum(g, l);
        s.remember(key, q.value);
    }
    q.diag = {s.top_level_hits(), 0, ms_since(t0)};
    emit(s, q);
    return 0;
}

struct bouss_args {
    int n = 1, m = 0;
    std::string extra;
};

int run_bouss(session& s, const bouss_args& a) {
    auto t0 = clock_type::now();
    hierarchy::relation_instance inst{a.n, a.m, {}};
    std::stringstream ss(a.extra);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            inst.extra.push_back(std::stoi(item));
        } catch (const std::logic_error&) {
            throw error(error_kind::parse, "--extra expects comma-separated labels");
        }
    }
    auto& e = s.engine(3);
    auto rep = hierarchy::boussinesq_check(inst, e);
    query_result q;
    q.method = "bouss";
    q.query = {{"command", "bouss-check"}, {"n", a.n}, {"m", a.m}, {"extra", inst.extra}};
    q.value = rep.lhs - rep.rhs;
    q.diag = engine_diagnostics(s, e, t0);
    json r = rep.to_json();
    if (s.options().json) {
        emit(s, q, {{"report", r}});
    } else {
        std::cout << inst.str() << ": lhs " << rep.lhs.str() << ", rhs " << rep.rhs.str() << ", "
                  << (rep.equal ? "equal" : "NOT equal") << '\n';
        for (auto& t : rep.terms) std::cout << "  " << t.b.str() << " = " << t.value.str() << '\n';
    }
    return rep.equal ? 0 : 1;
}

struct thm1_args {
    int n = 0;
    std::string passports;
    bool dump_class = false;
};

int run_thm1(session& s, const thm1_args& a) {
    auto t0 = clock_type::now();
    auto prof = ramification_profile::parse(a.n, a.passports);
    query_result q;
    q.method = "thm1";
    q.query = {{"command", "thm1"}, {"n", a.n}, {"passports", prof.str()}};
    q.value = m0n::psi_hurwitz(prof);
    q.diag = {0, 0, ms_since(t0)};
    json extra = json::object();
    if (a.dump_class) {
        m0n::polynomial_cover_space space(prof);
        extra["class"] = m0n::to_json(space.hurwitz_class(), [&](int x) { return space.point_name(x); });
    }
    emit(s, q, extra);
    return 0;
}

int run_selftest(session& s, int jobs) {
    auto reports = acceptance::run_all(jobs);
    bool all = true;
    json out = json::array();
    for (auto& r : reports) {
        all = all && r.result.pass;
        if (s.options().json)
            out.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.result.pass}, {"detail", r.result.detail},
                           {"elapsed_ms", r.result.elapsed_ms}});
        else std::cout << acceptance::format_line(r) << '\n';
    }
    if (s.options().json) std::cout << out.dump(2) << '\n';
    else std::cout << (all ? "all criteria passed" : "some criteria FAILED") << '\n';
    return all ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact Hurwitz numbers, genus-zero psi-class calculus and r-spin intersection numbers"};
    app.require_subcommand(1);
    global_options opt;
    app.add_flag("--json", opt.json, "JSON output");
    app.add_flag("--decimal", opt.decimal, "also print an approximate decimal value");
    app.add_option("--cache", opt.cache, "persistent memo cache file (MODULI_CACHE overrides)");
    app.add_option("--primary-table", opt.primary_table, "JSON table of genus-zero primary correlators");

    hurwitz_args ha;
    auto* hurwitz_cmd = app.add_subcommand("hurwitz", "Hurwitz number of a ramification profile");
    hurwitz_cmd->add_option("--n", ha.n, "degree")->required();
    hurwitz_cmd->add_option("--passports", ha.passports, "passports, e.g. '4;2,2;2,1,1'")->required();
    hurwitz_cmd->add_option("--method", ha.method)
        ->check(CLI::IsMember({"auto", "brute", "class-algebra", "gjlz", "thm1"}));

    correlator_args ca;
    auto* corr_cmd = app.add_subcommand("correlator", "<tau_{n,m} prod tau_{0,m_i}>_g");
    corr_cmd->add_option("--r", ca.r)->required();
    corr_cmd->add_option("--tau", ca.tau, "descendant as n,m")->required();
    corr_cmd->add_option("--tau0", ca.tau0, "primaries as label:count,...");
    corr_cmd->add_option("--genus", ca.genus);
    corr_cmd->add_option("--method", ca.method)->check(CLI::IsMember({"alg-recursion", "trr"}));

    snumber_args sa;
    auto* s_cmd = app.add_subcommand("snumber", "S^n_{g,m}(prod eta_{q,a})");
    s_cmd->add_option("--r", sa.r)->required();
    s_cmd->add_option("--n", sa.n)->required();
    s_cmd->add_option("--g", sa.g)->required();
    s_cmd->add_option("--m", sa.m)->required();
    s_cmd->add_option("--insertions", sa.insertions, "label:multiplicity,...")->required();

    shat1_args ha1;
    auto* h_cmd = app.add_subcommand("shat1", "genus-one integral over W(b_1..b_k)");
    h_cmd->add_option("--r", ha1.r)->required();
    h_cmd->add_option("--key", ha1.key, "label:b,... with b summing to zero");
    h_cmd->add_flag("--table", ha1.table, "solve and print every nonzero value up to --bound");
    h_cmd->add_option("--bound", ha1.bound);

    int tg = 0, tl = 0;
    auto* t_cmd = app.add_subcommand("tau3g", "sum formula for <tau_{3g} tau_0^2>_g");
    t_cmd->add_option("--g", tg)->required();
    t_cmd->add_option("--l", tl)->required();

    bouss_args ba;
    auto* b_cmd = app.add_subcommand("bouss-check", "check one instance of the r=3 Boussinesq relation");
    b_cmd->add_option("--n", ba.n)->required();
    b_cmd->add_option("--m", ba.m)->required();
    b_cmd->add_option("--extra", ba.extra, "comma-separated primary labels");

    thm1_args ta;
    auto* th_cmd = app.add_subcommand("thm1", "Hurwitz number through the psi-class formula on M0,N");
    th_cmd->add_option("--n", ta.n)->required();
    th_cmd->add_option("--passports", ta.passports)->required();
    th_cmd->add_flag("--dump-class", ta.dump_class, "include the integrated class");

    int jobs = 1;
    auto* st_cmd = app.add_subcommand("selftest", "run the acceptance suite");
    st_cmd->add_option("--jobs", jobs)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        return app.exit(ex) == 0 ? 0 : 2;
    }

    try {
        session s(opt);
        int code = 0;
        if (*hurwitz_cmd) code = run_hurwitz(s, ha);
        else if (*corr_cmd) code = run_correlator(s, ca);
        else if (*s_cmd) code = run_snumber(s, sa);
        else if (*h_cmd) code = run_shat1(s, ha1);
        else if (*t_cmd) code = run_tau3g(s, tg, tl);
        else if (*b_cmd) code = run_bouss(s, ba);
        else if (*th_cmd) code = run_thm1(s, ta);
        else if (*st_cmd) code = run_selftest(s, jobs);
        s.finish();
        return code;
    } catch (const error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return ex.kind() == error_kind::parse ? 2 : 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
}
