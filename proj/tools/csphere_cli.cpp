// csphere: command-line front end for the experiment drivers.
// Exit codes: 0 pass, 1 usage or domain error, 2 tolerance failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "csphere/config.hpp"

using namespace csphere;

namespace {

int print_dims(const RunConfig& c) {
    const auto ctx = SphereContext::make(c.d());
    const int K = static_cast<int>(c.integer("k", 5));
    require(K >= 0, "k must be non-negative");
    std::printf("d=%d n=%d\n%4s %10s %10s %12s  %s\n", ctx.d, ctx.n, "k", "theta_k", "d_k", "dim T_k", "bidegrees (p,q):dim");
    for (int k = 0; k <= K; ++k) {
        std::string parts;
        for (int p = k; p >= 0; --p)
            parts += (parts.empty() ? "" : " ") + std::string("(") + std::to_string(p) + "," + std::to_string(k - p) +
                     "):" + std::to_string(bidegree_dim(p, k - p, ctx));
        std::printf("%4d %10.0f %10lld %12lld  %s\n", k, eigenvalue(k, ctx),
                    static_cast<long long>(eigenspace_dim(k, ctx)), static_cast<long long>(polynomial_space_dim(k, ctx)),
                    parts.c_str());
    }
    return 0;
}

int run_cache(const RunConfig& c) {
    Cache cache(c.cache_dir());
    const std::string action = c.text("action", "status");
    if (action == "clear") {
        std::printf("removed %zu files from %s\n", cache.clear(), cache.root().string().c_str());
        return 0;
    }
    if (action == "warm") {
        const auto ctx = SphereContext::make(c.d());
        const int N = static_cast<int>(c.integer("k", 20));
        const auto s = cache.warm(ctx, N);
        std::printf("warm d=%d N=%d: built %d, reused %d\n", ctx.d, N, s.built, s.hits);
        for (const auto& w : cache.warnings()) std::fprintf(stderr, "warning: %s\n", w.c_str());
        return 0;
    }
    const auto entries = cache.status();
    std::printf("cache root %s: %zu entries\n", cache.root().string().c_str(), entries.size());
    for (const auto& e : entries)
        std::printf("%-6s d=%d %s=%d %10llu bytes  %s\n", e.kind.c_str(), e.d, e.kind == "rule" ? "degree" : "level",
                    e.index, static_cast<unsigned long long>(e.bytes), e.file.c_str());
    return 0;
}

int run_report(const RunConfig& c) {
    set_max_threads(c.threads());
    Workspace ws(c.cache_dir());
    const auto report = run_experiment(c, ws);
    const auto paths = write_report(report, c);
    std::cout << report_summary(report);
    if (!paths.csv.empty()) std::cout << "csv:  " << paths.csv.string() << "\n";
    if (!paths.json.empty()) std::cout << "json: " << paths.json.string() << "\n";
    for (const auto& w : ws.warnings()) std::cerr << "warning: " << w << "\n";
    return report.passed() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Harmonic analysis experiments on the complex sphere"};
    app.require_subcommand(1);
    std::map<std::string, std::map<std::string, std::string>> flags;
    std::map<std::string, std::string> config_files;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> about{
        {"dims", "print eigenvalues and eigenspace dimensions"},
        {"kernels", "L1 norms of Q_2N and of the fractional kernel split"},
        {"cesaro", "L1 norms of Cesaro kernels"},
        {"jackson", "best approximation of Sobolev targets"},
        {"bernstein", "Bernstein ratios of fractional derivatives"},
        {"nikolskii", "Nikolskii inequality on random harmonic subspaces"},
        {"kolmogorov", "Kolmogorov type interpolation constants"},
        {"levy", "Monte Carlo Levy means"},
        {"mterm", "m-term approximation rates"},
        {"selftest", "invariant suite"},
        {"cache", "cache administration: status | clear | warm"}};
    for (const auto& name : experiment_names()) {
        auto* sub = app.add_subcommand(name, about.at(name));
        subs[name] = sub;
        for (const auto& key : experiment_keys(name)) {
            if (name == "cache" && key == "action") {
                sub->add_option("action", flags[name][key], "status | clear | warm")
                    ->check(CLI::IsMember({"status", "clear", "warm"}));
                continue;
            }
            sub->add_option("--" + key, flags[name][key], key_spec(key).help);
        }
        if (name != "dims") sub->add_option("--config", config_files[name], "key = value settings file");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    try {
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed()) continue;
            std::map<std::string, std::string> given;
            for (const auto& [key, value] : flags[name]) {
                const std::string opt = name == "cache" && key == "action" ? "action" : "--" + key;
                if (sub->count(opt) > 0) given[key] = value;
            }
            std::map<std::string, std::string> base;
            if (!config_files[name].empty()) base = read_config_file(config_files[name]);
            const RunConfig cfg(name, merge_settings(base, given));
            if (name == "dims") return print_dims(cfg);
            if (name == "cache") return run_cache(cfg);
            return run_report(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
