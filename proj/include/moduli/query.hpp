#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "moduli/error.hpp"
#include "moduli/rational.hpp"

namespace moduli {

constexpr const char* engine_version = "moduli-engine-1";

struct diagnostics {
    std::size_t cache_hits = 0;
    int recursion_depth = 0;
    double elapsed_ms = 0;
    friend bool operator==(const diagnostics&, const diagnostics&) = default;
};

struct query_result {
    nlohmann::json query;
    rational value;
    std::string method;
    diagnostics diag;

    nlohmann::json to_json() const {
        return {{"query", query},
                {"value", value.str()},
                {"method", method},
                {"diagnostics",
                 {{"cache_hits", diag.cache_hits}, {"recursion_depth", diag.recursion_depth}, {"elapsed_ms", diag.elapsed_ms}}}};
    }

    static query_result from_json(const nlohmann::json& j) {
        try {
            query_result q;
            q.query = j.at("query");
            q.value = rational::parse(j.at("value").get<std::string>());
            q.method = j.at("method").get<std::string>();
            const auto& d = j.at("diagnostics");
            q.diag.cache_hits = d.at("cache_hits").get<std::size_t>();
            q.diag.recursion_depth = d.at("recursion_depth").get<int>();
            q.diag.elapsed_ms = d.at("elapsed_ms").get<double>();
            return q;
        } catch (const nlohmann::json::exception& ex) {
            throw error(error_kind::parse, std::string("query result: ") + ex.what());
        }
    }

    friend bool operator==(const query_result&, const query_result&) = default;
};

// Newline-delimited records {key, value, engine-version}. A record from another engine
// version invalidates the whole file.
class cache_file {
public:
    explicit cache_file(std::string path) : path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    const std::map<std::string, rational>& entries() const { return entries_; }
    bool invalidated() const { return invalidated_; }

    void load() {
        entries_.clear();
        invalidated_ = false;
        std::ifstream in(path_);
        if (!in) return;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                auto j = nlohmann::json::parse(line);
                if (j.at("engine-version").get<std::string>() != engine_version) {
                    entries_.clear();
                    invalidated_ = true;
                    return;
                }
                entries_[j.at("key").get<std::string>()] = rational::parse(j.at("value").get<std::string>());
            } catch (const std::exception&) {
                entries_.clear();
                invalidated_ = true;
                return;
            }
        }
    }

    std::optional<rational> find(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void put(const std::string& key, const rational& v) { entries_[key] = v; }

    void save() const {
        std::ofstream out(path_, std::ios::trunc);
        if (!out) throw error(error_kind::precondition_violated, "cannot write cache file " + path_);
        for (auto& [k, v] : entries_)
            out << nlohmann::json{{"key", k}, {"value", v.str()}, {"engine-version", engine_version}}.dump() << '\n';
    }

private:
    std::string path_;
    std::map<std::string, rational> entries_;
    bool invalidated_ = false;
};

} // namespace moduli
