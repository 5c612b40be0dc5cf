#pragma once

// Run configuration: key = value settings from a config file and from
// command-line flags (flags win), checked against a per-experiment schema
// and fully parsed before any computation starts.

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "csphere/cache.hpp"
#include "csphere/experiments.hpp"
#include "csphere/report.hpp"

namespace csphere {

enum class ValueType { integer, real, int_list, real_list, text, text_list, index_sets };

struct KeySpec {
    std::string key;
    ValueType type;
    std::string help;
};

// All keys known to any experiment.
inline const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs{
        {"d", ValueType::integer, "real sphere dimension (odd, >= 3)"},
        {"k", ValueType::integer, "maximal degree"},
        {"gamma", ValueType::real_list, "smoothness / fractional order"},
        {"p", ValueType::real_list, "norm index p (accepts inf)"},
        {"q", ValueType::real_list, "norm index q (accepts inf)"},
        {"delta", ValueType::real_list, "Cesaro index list"},
        {"n", ValueType::int_list, "Cesaro degree list"},
        {"N", ValueType::int_list, "polynomial degree list"},
        {"m", ValueType::int_list, "m-term budget list"},
        {"trials", ValueType::integer, "random trials per setting"},
        {"seed", ValueType::integer, "master seed"},
        {"samples", ValueType::integer, "Monte Carlo samples"},
        {"alpha", ValueType::real, "lower derivative order"},
        {"beta", ValueType::real, "upper derivative order"},
        {"strategy", ValueType::text, "l2-threshold | greedy-lq | block-greedy"},
        {"target", ValueType::text_list, "target kinds: zonal-extremal, random"},
        {"omegas", ValueType::index_sets, "index sets, e.g. 10,11,12;8,9,10,11,12"},
        {"max-levels", ValueType::integer, "maximal number of levels per random index set"},
        {"target-degrees", ValueType::int_list, "degrees of the m-term target family"},
        {"pool", ValueType::integer, "candidate pool of the greedy-lq strategy"},
        {"action", ValueType::text, "status | clear | warm"},
        {"threads", ValueType::integer, "worker cap (0 = all cores)"},
        {"out", ValueType::text, "output directory"},
        {"format", ValueType::text, "csv | json | both"},
        {"cache-dir", ValueType::text, "cache root (default $CSPHERE_CACHE or .csphere-cache)"},
    };
    return specs;
}

inline const KeySpec& key_spec(const std::string& key) {
    for (const auto& s : key_specs())
        if (s.key == key) return s;
    throw domain_error("unknown key '" + key + "'");
}

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"dims",      "kernels",    "cesaro", "jackson", "bernstein", "nikolskii",
                                                "kolmogorov", "levy",      "mterm",  "selftest", "cache"};
    return names;
}

// Keys accepted by each experiment.
inline std::vector<std::string> experiment_keys(const std::string& experiment) {
    const std::vector<std::string> io{"seed", "threads", "out", "format", "cache-dir"};
    std::vector<std::string> own;
    if (experiment == "dims") return {"d", "k"};
    if (experiment == "cache") return {"action", "d", "k", "cache-dir"};
    if (experiment == "kernels") own = {"d", "N", "gamma"};
    else if (experiment == "cesaro") own = {"d", "delta", "n"};
    else if (experiment == "jackson") own = {"d", "gamma", "p", "N", "target", "trials"};
    else if (experiment == "bernstein") own = {"d", "gamma", "p", "q", "N", "trials"};
    else if (experiment == "nikolskii") own = {"d", "p", "q", "k", "max-levels", "trials"};
    else if (experiment == "kolmogorov") own = {"d", "alpha", "beta", "p", "N", "trials"};
    else if (experiment == "levy") own = {"d", "p", "omegas", "N", "samples"};
    else if (experiment == "mterm") own = {"d", "gamma", "p", "q", "m", "strategy", "N", "target-degrees", "target", "trials", "pool"};
    else if (experiment == "selftest") own = {"k", "samples"};
    else throw domain_error("unknown experiment '" + experiment + "'");
    own.insert(own.end(), io.begin(), io.end());
    return own;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

inline double parse_real(const std::string& key, const std::string& s) {
    const std::string t = trim(s);
    if (t == "inf" || t == "infinity" || t == "Inf") return infinity;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || std::isnan(v)) throw domain_error(key + ": '" + s + "' is not a number");
    return v;
}

inline long long parse_integer(const std::string& key, const std::string& s) {
    const std::string t = trim(s);
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size()) throw domain_error(key + ": '" + s + "' is not an integer");
    return v;
}

// Parsed key = value lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream is(text);
    std::string line;
    int no = 0;
    while (std::getline(is, line)) {
        ++no;
        if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw domain_error("config line " + std::to_string(no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw domain_error("config line " + std::to_string(no) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

inline std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    return parse_config_text(read_file(path));
}

class RunConfig {
public:
    RunConfig() = default;

    // Checks every key against the experiment schema and parses every value.
    RunConfig(std::string experiment, std::map<std::string, std::string> values)
        : experiment_(std::move(experiment)), values_(std::move(values)) {
        if (auto it = values_.find("experiment"); it != values_.end()) {
            if (it->second != experiment_)
                throw domain_error("config names experiment '" + it->second + "' but '" + experiment_ + "' was requested");
            values_.erase(it);
        }
        const auto allowed = experiment_keys(experiment_);
        for (const auto& [k, v] : values_) {
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                throw domain_error("key '" + k + "' is not accepted by " + experiment_);
            typed(k);
        }
        validate();
    }

    const std::string& experiment() const { return experiment_; }
    const std::map<std::string, std::string>& values() const { return values_; }
    bool has(const std::string& k) const { return values_.count(k) > 0; }

    long long integer(const std::string& k, long long def) const {
        return has(k) ? parse_integer(k, values_.at(k)) : def;
    }
    double real(const std::string& k, double def) const {
        if (!has(k)) return def;
        const auto v = reals(k, {});
        if (v.size() != 1) throw domain_error(k + " takes a single value for " + experiment_);
        return v[0];
    }
    std::vector<double> reals(const std::string& k, std::vector<double> def) const {
        if (!has(k)) return def;
        std::vector<double> out;
        for (const auto& s : split(values_.at(k), ',')) out.push_back(parse_real(k, s));
        if (out.empty()) throw domain_error(k + " must not be empty");
        return out;
    }
    std::vector<int> ints(const std::string& k, std::vector<int> def) const {
        if (!has(k)) return def;
        std::vector<int> out;
        for (const auto& s : split(values_.at(k), ',')) out.push_back(static_cast<int>(parse_integer(k, s)));
        if (out.empty()) throw domain_error(k + " must not be empty");
        return out;
    }
    std::string text(const std::string& k, const std::string& def) const { return has(k) ? values_.at(k) : def; }
    std::vector<std::vector<int>> index_sets(const std::string& k, std::vector<std::vector<int>> def) const {
        if (!has(k)) return def;
        std::vector<std::vector<int>> out;
        for (const auto& part : split(values_.at(k), ';')) {
            std::vector<int> set;
            for (const auto& s : split(part, ',')) set.push_back(static_cast<int>(parse_integer(k, s)));
            out.push_back(set);
        }
        return out;
    }

    int d() const { return static_cast<int>(integer("d", 3)); }
    std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("seed", 1)); }
    int threads() const { return static_cast<int>(integer("threads", 0)); }
    std::filesystem::path out_dir() const { return text("out", "csphere-out"); }
    OutputFormat format() const { return parse_format(text("format", "both")); }
    std::filesystem::path cache_dir() const { return has("cache-dir") ? std::filesystem::path(values_.at("cache-dir")) : default_cache_root(); }

    // Typed JSON of the settings that determine the results. Threads and
    // the output directory go to the metadata line; the cache root is
    // omitted because cached and rebuilt bases are bit-identical.
    nlohmann::json to_json() const {
        nlohmann::json j;
        j["experiment"] = experiment_;
        j["d"] = d();
        for (const auto& [k, v] : values_)
            if (k != "threads" && k != "out" && k != "cache-dir" && k != "d") j[k] = typed(k);
        return j;
    }

private:
    nlohmann::json typed(const std::string& k) const {
        switch (key_spec(k).type) {
        case ValueType::integer: return integer(k, 0);
        case ValueType::real: return number_json(real(k, 0));
        case ValueType::int_list: return ints(k, {});
        case ValueType::real_list: {
            auto a = nlohmann::json::array();
            for (double v : reals(k, {})) a.push_back(number_json(v));
            return a;
        }
        case ValueType::text_list: return split(values_.at(k), ',');
        case ValueType::index_sets: return index_sets(k, {});
        default: return values_.at(k);
        }
    }

    void validate() const {
        const int dd = d();
        require(dd >= 3 && dd % 2 == 1, "d must be odd and >= 3");
        require(integer("seed", 1) >= 0, "seed must be non-negative");
        require(integer("threads", 0) >= 0, "threads must be >= 0");
        if (has("format")) format();
        if (has("strategy")) parse_strategy(text("strategy", ""));
        if (has("target"))
            for (const auto& t : split(text("target", ""), ',')) parse_target_kind(t);
        if (has("action")) {
            const auto a = text("action", "");
            require(a == "status" || a == "clear" || a == "warm", "action must be status, clear or warm");
        }
        for (const char* k : {"trials", "samples", "k", "max-levels", "pool"})
            if (has(k)) require(integer(k, 0) >= 0, std::string(k) + " must be non-negative");
        for (const char* k : {"p", "q"})
            if (has(k))
                for (double v : reals(k, {})) require(v >= 1.0, std::string(k) + " must be >= 1");
        const bool scalar_p = experiment_ != "nikolskii" && experiment_ != "levy";
        if (scalar_p) {
            if (has("p")) real("p", 2.0);
            if (has("q")) real("q", 2.0);
        }
        if (has("gamma") && experiment_ != "kernels") real("gamma", 2.0);
    }

    std::string experiment_;
    std::map<std::string, std::string> values_;
};

inline std::map<std::string, std::string> merge_settings(std::map<std::string, std::string> base,
                                                         const std::map<std::string, std::string>& overrides) {
    for (const auto& [k, v] : overrides) base[k] = v;
    return base;
}

inline std::vector<TargetKind> config_targets(const RunConfig& c) {
    std::vector<TargetKind> out;
    for (const auto& t : split(c.text("target", "zonal-extremal"), ',')) out.push_back(parse_target_kind(t));
    return out;
}

// Runs the experiment named by the configuration.
inline ExperimentReport run_experiment(const RunConfig& c, Workspace& ws) {
    const auto ctx = SphereContext::make(c.d());
    const RandomSource rng(c.seed());
    const auto& e = c.experiment();
    if (e == "kernels") {
        KernelNormParams p;
        p.N_list = c.ints("N", p.N_list);
        p.gamma_list = c.reals("gamma", p.gamma_list);
        return run_kernel_norms(ctx, p);
    }
    if (e == "cesaro") {
        CesaroParams p;
        p.delta_list = c.reals("delta", p.delta_list);
        p.n_list = c.ints("n", p.n_list);
        return run_cesaro_norms(ctx, p);
    }
    if (e == "jackson") {
        JacksonParams p;
        p.gamma = c.real("gamma", p.gamma);
        p.p = c.real("p", p.p);
        p.N_list = c.ints("N", p.N_list);
        p.targets = config_targets(c);
        p.trials = static_cast<int>(c.integer("trials", p.trials));
        return run_jackson(ctx, p, rng, ws);
    }
    if (e == "bernstein") {
        BernsteinParams p;
        p.gamma = c.real("gamma", p.gamma);
        p.p = c.real("p", p.p);
        p.q = c.real("q", p.q);
        p.N_list = c.ints("N", p.N_list);
        p.trials = static_cast<int>(c.integer("trials", p.trials));
        return run_bernstein(ctx, p, rng, ws);
    }
    if (e == "nikolskii") {
        NikolskiiParams p;
        p.p_list = c.reals("p", p.p_list);
        p.q_list = c.reals("q", p.q_list);
        p.max_degree = static_cast<int>(c.integer("k", p.max_degree));
        p.max_levels = static_cast<int>(c.integer("max-levels", p.max_levels));
        p.trials = static_cast<int>(c.integer("trials", p.trials));
        return run_nikolskii(ctx, p, rng, ws);
    }
    if (e == "kolmogorov") {
        KolmogorovParams p;
        p.alpha = c.real("alpha", p.alpha);
        p.beta = c.real("beta", p.beta);
        p.p = c.real("p", p.p);
        p.N_list = c.ints("N", p.N_list);
        p.trials = static_cast<int>(c.integer("trials", p.trials));
        return run_kolmogorov(ctx, p, rng, ws);
    }
    if (e == "levy") {
        LevyParams p;
        p.p_list = c.reals("p", p.p_list);
        p.omegas = c.index_sets("omegas", p.omegas);
        p.N_list = c.ints("N", p.N_list);
        p.samples = static_cast<int>(c.integer("samples", p.samples));
        return run_levy(ctx, p, rng, ws);
    }
    if (e == "mterm") {
        MTermParams p;
        p.gamma = c.real("gamma", p.gamma);
        p.p = c.real("p", p.p);
        p.q = c.real("q", p.q);
        p.m_list = c.ints("m", p.m_list);
        p.strategy = parse_strategy(c.text("strategy", to_string(p.strategy)));
        if (c.has("N")) {
            const auto n = c.ints("N", {});
            require(n.size() == 1, "N takes a single dictionary degree for mterm");
            p.dict_degree = n[0];
        }
        p.target_degrees = c.ints("target-degrees", p.target_degrees);
        p.targets = config_targets(c);
        p.trials = static_cast<int>(c.integer("trials", p.trials));
        p.greedy_pool = static_cast<int>(c.integer("pool", p.greedy_pool));
        return run_mterm(ctx, p, rng, ws);
    }
    if (e == "selftest") {
        require(c.d() == 3, "selftest runs on d = 3");
        return run_selftest(rng, ws, static_cast<int>(c.integer("k", 20)), static_cast<int>(c.integer("samples", 100)));
    }
    throw domain_error("experiment '" + e + "' does not produce a report");
}

// Writes the report next to its configuration; see write_report_files.
inline ReportPaths write_report(const ExperimentReport& r, const RunConfig& c, const std::string& timestamp = utc_timestamp()) {
    RunMetadata meta{timestamp, max_threads(), c.out_dir().string()};
    return write_report_files(r, c.to_json(), meta, c.out_dir(), c.d(), c.seed(), c.format());
}

} // namespace csphere
