#pragma once

// On-disk cache of sphere rules (CSV) and basis levels (binary with a JSON
// sidecar), keyed by content hashes, and an in-memory workspace that hands
// bases to the experiment drivers.

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "csphere/report.hpp"
#include "csphere/spectral.hpp"

namespace csphere {

inline std::filesystem::path default_cache_root() {
    if (const char* env = std::getenv("CSPHERE_CACHE"); env && *env) return env;
    return ".csphere-cache";
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw io_error("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

class Cache {
public:
    struct Stats {
        int built = 0;
        int hits = 0;
    };
    struct Entry {
        std::string kind;  // "rule" or "basis"
        std::string key;
        std::string file;
        std::uintmax_t bytes = 0;
        int d = 0;
        int index = 0;  // rule degree or basis level
    };

    explicit Cache(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }
    const Stats& stats() const { return stats_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    // Product rule of the given degree (d = 3).
    SphereQuadrature rule(const SphereContext& ctx, int degree) {
        require(ctx.d == 3, "cached product rules exist for d = 3 only");
        const std::string key = rule_key("sphere", ctx.d, degree);
        const auto path = rule_dir() / ("rule-" + content_hash(key) + ".csv");
        if (std::filesystem::exists(path)) {
            try {
                auto q = load_rule(ctx, degree, key, path);
                ++stats_.hits;
                return q;
            } catch (const std::exception& e) {
                warnings_.push_back("corrupt rule entry " + path.string() + " rebuilt: " + e.what());
            }
        }
        auto q = build_sphere_rule(ctx, degree);
        atomic_write(path, rule_text(q, key));
        ++stats_.built;
        return q;
    }

    // Bases of H_0..H_N built against the product rule of degree 2N.
    HarmonicBasis basis(const SphereContext& ctx, int N) {
        require(ctx.d == 3, "exact orthonormal bases are available for d = 3 only");
        const auto q = rule(ctx, 2 * N);
        const std::string rkey = rule_key("sphere", ctx.d, 2 * N);
        const std::string rhash = content_hash(rule_text(q, rkey));
        std::vector<std::vector<Harmonic>> levels(N + 1);
        std::vector<int> missing;
        for (int k = 0; k <= N; ++k) {
            const auto stem = basis_dir() / ("basis-" + basis_key(ctx.d, k, rhash));
            const auto bin = stem.string() + ".bin", side = stem.string() + ".json";
            bool ok = false;
            if (std::filesystem::exists(bin) || std::filesystem::exists(side)) {
                try {
                    levels[k] = load_level(ctx.d, k, rhash, bin, side);
                    ok = true;
                } catch (const std::exception& e) {
                    warnings_.push_back("corrupt basis entry " + bin + " rebuilt: " + e.what());
                }
            }
            if (!ok) missing.push_back(k);
        }
        if (missing.empty()) {
            stats_.hits += N + 1;
            return HarmonicBasis(ctx, N, std::move(levels), rkey);
        }
        auto fresh = build_basis(ctx, N, q);
        stats_.hits += N + 1 - static_cast<int>(missing.size());
        for (int k : missing) {
            const auto stem = basis_dir() / ("basis-" + basis_key(ctx.d, k, rhash));
            const std::string payload = level_payload(ctx.d, k, fresh.level(k));
            nlohmann::json sc = {{"kind", "basis-level"}, {"d", ctx.d},           {"k", k},
                                 {"rule_key", rkey},      {"rule_hash", rhash}, {"payload_hash", content_hash(payload)},
                                 {"harmonics", fresh.level(k).size()}};
            atomic_write(stem.string() + ".bin", payload);
            atomic_write(stem.string() + ".json", sc.dump(2) + "\n");
            ++stats_.built;
        }
        return fresh;
    }

    Stats warm(const SphereContext& ctx, int N) {
        const Stats before = stats_;
        basis(ctx, N);
        return {stats_.built - before.built, stats_.hits - before.hits};
    }

    std::vector<Entry> status() const {
        std::vector<Entry> out;
        namespace fs = std::filesystem;
        if (fs::is_directory(rule_dir()))
            for (const auto& e : fs::directory_iterator(rule_dir())) {
                if (e.path().extension() != ".csv") continue;
                Entry en;
                en.kind = "rule";
                en.file = e.path().string();
                en.bytes = e.file_size();
                en.key = e.path().stem().string().substr(5);
                try {
                    std::istringstream in(read_file(e.path()));
                    std::string line;
                    std::getline(in, line);
                    auto j = nlohmann::json::parse(line.substr(2));
                    en.d = j.at("d").get<int>();
                    en.index = j.at("degree").get<int>();
                } catch (const std::exception&) {
                    en.index = -1;
                }
                out.push_back(en);
            }
        if (fs::is_directory(basis_dir()))
            for (const auto& e : fs::directory_iterator(basis_dir())) {
                if (e.path().extension() != ".json") continue;
                Entry en;
                en.kind = "basis";
                en.file = e.path().string();
                en.key = e.path().stem().string().substr(6);
                try {
                    auto j = nlohmann::json::parse(read_file(e.path()));
                    en.d = j.at("d").get<int>();
                    en.index = j.at("k").get<int>();
                    const auto bin = e.path().parent_path() / (e.path().stem().string() + ".bin");
                    en.bytes = fs::exists(bin) ? fs::file_size(bin) : 0;
                } catch (const std::exception&) {
                    en.index = -1;
                }
                out.push_back(en);
            }
        std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
            return std::tie(a.kind, a.d, a.index, a.key) < std::tie(b.kind, b.d, b.index, b.key);
        });
        return out;
    }

    // Removes every cache entry; returns the number of files deleted.
    std::size_t clear() {
        namespace fs = std::filesystem;
        std::size_t n = 0;
        for (const auto& dir : {rule_dir(), basis_dir()}) {
            if (!fs::is_directory(dir)) continue;
            for (const auto& e : fs::directory_iterator(dir)) {
                std::error_code ec;
                if (fs::remove(e.path(), ec)) ++n;
                if (ec) throw io_error("cannot remove " + e.path().string() + ": " + ec.message());
            }
        }
        return n;
    }

    // Rule file text: JSON header comment, column header, one row per radial node.
    static std::string rule_text(const SphereQuadrature& q, const std::string& key) {
        std::ostringstream os;
        nlohmann::json h = {{"key", key}, {"d", q.ctx.d}, {"degree", q.exact_degree}, {"M", q.grid.M},
                            {"nodes", q.grid.s.size()}};
        os << "# " << h.dump() << "\n";
        os << "s,weight\n";
        for (std::size_t i = 0; i < q.grid.s.size(); ++i)
            os << format_number(q.grid.s[i]) << "," << format_number(q.grid.sweight[i]) << "\n";
        return os.str();
    }

private:
    std::filesystem::path rule_dir() const { return root_ / "rules"; }
    std::filesystem::path basis_dir() const { return root_ / "bases"; }

    static std::string basis_key(int d, int k, const std::string& rhash) {
        return content_hash("basis:d=" + std::to_string(d) + ":k=" + std::to_string(k) + ":rule=" + rhash);
    }

    static SphereQuadrature load_rule(const SphereContext& ctx, int degree, const std::string& key,
                                      const std::filesystem::path& path) {
        std::istringstream in(read_file(path));
        std::string line;
        if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw io_error("missing header");
        const auto h = nlohmann::json::parse(line.substr(2));
        if (h.at("key").get<std::string>() != key) throw io_error("key mismatch");
        if (!std::getline(in, line) || line != "s,weight") throw io_error("missing column header");
        const auto ref = build_torus_grid(degree);
        TorusGrid g;
        g.M = h.at("M").get<int>();
        while (std::getline(in, line)) {
            const auto c = line.find(',');
            if (c == std::string::npos) throw io_error("malformed row");
            g.s.push_back(std::stod(line.substr(0, c)));
            g.sweight.push_back(std::stod(line.substr(c + 1)));
        }
        if (g.M != ref.M || g.s.size() != ref.s.size()) throw io_error("rule size mismatch");
        double tot = 0.0;
        for (std::size_t i = 0; i < g.s.size(); ++i) {
            if (!(g.s[i] > 0.0 && g.s[i] < 1.0 && g.sweight[i] > 0.0)) throw io_error("invalid node");
            tot += g.sweight[i];
        }
        if (std::abs(tot - 1.0) > 1e-12) throw io_error("weights do not sum to 1");
        auto q = build_sphere_rule(ctx, degree);
        if (q.grid.s != g.s || q.grid.sweight != g.sweight) throw io_error("rule content differs from its key");
        return q;
    }

    static std::string level_payload(int d, int k, const std::vector<Harmonic>& lv) {
        std::string out("CSPB", 4);
        auto put_i = [&](std::int32_t v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); };
        auto put_d = [&](double v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); };
        put_i(1);
        put_i(d);
        put_i(k);
        put_i(static_cast<std::int32_t>(lv.size()));
        for (const auto& h : lv) {
            put_i(h.m1);
            put_i(h.m2);
            put_i(h.j);
            for (double b : h.b) put_d(b);
        }
        return out;
    }

    static std::vector<Harmonic> load_level(int d, int k, const std::string& rhash, const std::string& bin,
                                            const std::string& side) {
        const auto sc = nlohmann::json::parse(read_file(side));
        if (sc.at("rule_hash").get<std::string>() != rhash) throw io_error("rule hash mismatch");
        const std::string payload = read_file(bin);
        if (content_hash(payload) != sc.at("payload_hash").get<std::string>()) throw io_error("payload hash mismatch");
        std::size_t pos = 0;
        auto get_i = [&]() {
            std::int32_t v;
            if (pos + sizeof v > payload.size()) throw io_error("truncated payload");
            std::memcpy(&v, payload.data() + pos, sizeof v);
            pos += sizeof v;
            return v;
        };
        auto get_d = [&]() {
            double v;
            if (pos + sizeof v > payload.size()) throw io_error("truncated payload");
            std::memcpy(&v, payload.data() + pos, sizeof v);
            pos += sizeof v;
            return v;
        };
        if (payload.compare(0, 4, "CSPB") != 0) throw io_error("bad magic");
        pos = 4;
        if (get_i() != 1 || get_i() != d || get_i() != k) throw io_error("header mismatch");
        const int cnt = get_i();
        const auto weights = level_weights(k);
        if (cnt != static_cast<int>(weights.size())) throw io_error("harmonic count mismatch");
        std::vector<Harmonic> lv(cnt);
        for (int i = 0; i < cnt; ++i) {
            auto& h = lv[i];
            h.k = k;
            h.m1 = get_i();
            h.m2 = get_i();
            h.j = get_i();
            if (std::make_pair(h.m1, h.m2) != weights[i] || h.j != (k - std::abs(h.m1) - std::abs(h.m2)) / 2)
                throw io_error("harmonic index mismatch");
            h.b.resize(h.j + 1);
            for (auto& b : h.b) b = get_d();
        }
        if (pos != payload.size()) throw io_error("trailing bytes in payload");
        return lv;
    }

    std::filesystem::path root_;
    Stats stats_;
    std::vector<std::string> warnings_;
};

// Bases memoized per degree, optionally backed by the disk cache.
class Workspace {
public:
    Workspace() = default;
    explicit Workspace(std::optional<std::filesystem::path> cache_root) {
        if (cache_root) cache_.emplace(*cache_root);
    }

    const HarmonicBasis& basis(const SphereContext& ctx, int N) {
        require(ctx.d == 3, "exact orthonormal bases are available for d = 3 only");
        auto it = mem_.find(N);
        if (it != mem_.end()) return *it->second;
        auto b = std::make_unique<HarmonicBasis>(cache_ ? cache_->basis(ctx, N) : build_basis(ctx, N));
        return *mem_.emplace(N, std::move(b)).first->second;
    }

    Cache* cache() { return cache_ ? &*cache_ : nullptr; }

    std::vector<std::string> warnings() const { return cache_ ? cache_->warnings() : std::vector<std::string>{}; }

private:
    std::optional<Cache> cache_;
    std::map<int, std::unique_ptr<HarmonicBasis>> mem_;
};

} // namespace csphere
