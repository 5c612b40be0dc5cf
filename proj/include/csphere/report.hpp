#pragma once

// Experiment reports: a table of numeric rows, log-log slope fits with
// standard errors, tolerance checks, and CSV / JSON serialization with
// atomic file writes.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "csphere/errors.hpp"

namespace csphere {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    int points = 0;
};

// Least squares of log y against log x.
inline LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size(), "slope fit: x and y differ in length");
    require(x.size() >= 4, "slope fit needs at least 4 points");
    const double n = static_cast<double>(x.size());
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw numeric_error("slope fit needs positive finite data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += lx[i], my += ly[i];
    mx /= n, my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    require(sxx > 0.0, "slope fit needs distinct x values");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = ly[i] - f.intercept - f.slope * lx[i];
        ssr += r * r;
    }
    f.stderr_slope = std::sqrt(ssr / (n - 2.0) / sxx);
    f.points = static_cast<int>(x.size());
    return f;
}

// How a fitted slope is compared with its theoretical value.
enum class SlopeMode {
    near,      // |slope - theory| <= tol
    at_most,   // slope <= theory + tol
};

struct SlopeFit {
    std::string name;
    LineFit fit;
    double theory = 0.0;
    double tol = 0.0;
    SlopeMode mode = SlopeMode::near;
    bool gating = true;  // counts toward the report's pass flag
    bool pass = false;
};

struct Check {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    std::string relation;  // "<=", ">=" or "=="
    bool gating = true;
    bool pass = false;
};

struct ExperimentReport {
    std::string name;
    nlohmann::json params = nlohmann::json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<SlopeFit> slopes;
    std::vector<Check> checks;
    std::vector<std::string> notes;

    void add_row(std::vector<double> r) {
        require(r.size() == columns.size(), "row width does not match the column count in report " + name);
        rows.push_back(std::move(r));
    }

    std::vector<double> column(const std::string& c) const {
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (columns[j] == c) {
                std::vector<double> v;
                for (const auto& r : rows) v.push_back(r[j]);
                return v;
            }
        throw domain_error("report " + name + " has no column " + c);
    }

    const SlopeFit& add_slope(const std::string& nm, const std::vector<double>& x, const std::vector<double>& y,
                              double theory, double tol, SlopeMode mode, bool gating = true) {
        SlopeFit s;
        s.name = nm;
        s.fit = fit_loglog(x, y);
        s.theory = theory;
        s.tol = tol;
        s.mode = mode;
        s.gating = gating;
        s.pass = mode == SlopeMode::near ? std::abs(s.fit.slope - theory) <= tol : s.fit.slope <= theory + tol;
        slopes.push_back(s);
        return slopes.back();
    }

    const Check& add_check(const std::string& nm, double value, const std::string& relation, double bound,
                           bool gating = true) {
        Check c;
        c.name = nm;
        c.value = value;
        c.bound = bound;
        c.relation = relation;
        c.gating = gating;
        if (relation == "<=") c.pass = value <= bound;
        else if (relation == ">=") c.pass = value >= bound;
        else if (relation == "==") c.pass = value == bound;
        else throw domain_error("unknown check relation " + relation);
        if (!std::isfinite(value)) c.pass = false;
        checks.push_back(c);
        return checks.back();
    }

    const SlopeFit& slope(const std::string& nm) const {
        for (const auto& s : slopes)
            if (s.name == nm) return s;
        throw domain_error("report " + name + " has no slope " + nm);
    }
    const Check& check(const std::string& nm) const {
        for (const auto& c : checks)
            if (c.name == nm) return c;
        throw domain_error("report " + name + " has no check " + nm);
    }

    bool passed() const {
        for (const auto& s : slopes)
            if (s.gating && !s.pass) return false;
        for (const auto& c : checks)
            if (c.gating && !c.pass) return false;
        return true;
    }
};

// Shortest round-trip representation of a double.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline nlohmann::json number_json(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

inline nlohmann::json slopes_json(const ExperimentReport& r) {
    auto a = nlohmann::json::array();
    for (const auto& s : r.slopes)
        a.push_back({{"name", s.name},
                     {"slope", number_json(s.fit.slope)},
                     {"stderr", number_json(s.fit.stderr_slope)},
                     {"intercept", number_json(s.fit.intercept)},
                     {"points", s.fit.points},
                     {"theory", number_json(s.theory)},
                     {"tol", s.tol},
                     {"mode", s.mode == SlopeMode::near ? "near" : "at_most"},
                     {"gating", s.gating},
                     {"pass", s.pass}});
    return a;
}

inline nlohmann::json checks_json(const ExperimentReport& r) {
    auto a = nlohmann::json::array();
    for (const auto& c : r.checks)
        a.push_back({{"name", c.name},
                     {"value", number_json(c.value)},
                     {"relation", c.relation},
                     {"bound", number_json(c.bound)},
                     {"gating", c.gating},
                     {"pass", c.pass}});
    return a;
}

// Run-specific fields kept out of the reproducible part of a report.
struct RunMetadata {
    std::string timestamp;
    int threads = 0;
    std::string out_dir;
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

inline std::string metadata_line(const RunMetadata& m) {
    return "# meta: timestamp=" + m.timestamp + " threads=" + std::to_string(m.threads) + " out=" + m.out_dir;
}

// CSV: a metadata comment, the config comment, a header row, data rows.
inline std::string report_csv(const ExperimentReport& r, const nlohmann::json& config, const RunMetadata& meta) {
    std::ostringstream os;
    os << metadata_line(meta) << "\n";
    os << "# config: " << config.dump() << "\n";
    for (std::size_t j = 0; j < r.columns.size(); ++j) os << (j ? "," : "") << r.columns[j];
    os << "\n";
    for (const auto& row : r.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << format_number(row[j]);
        os << "\n";
    }
    return os.str();
}

inline nlohmann::json report_json(const ExperimentReport& r, const nlohmann::json& config, const RunMetadata& meta) {
    nlohmann::json j;
    j["name"] = r.name;
    j["params"] = r.params;
    j["config"] = config;
    j["metadata"] = {{"timestamp", meta.timestamp}, {"threads", meta.threads}, {"out", meta.out_dir}};
    j["columns"] = r.columns;
    j["rows"] = r.rows.size();
    j["slopes"] = slopes_json(r);
    j["stderr"] = nlohmann::json::object();
    for (const auto& s : r.slopes) j["stderr"][s.name] = number_json(s.fit.stderr_slope);
    j["checks"] = checks_json(r);
    j["notes"] = r.notes;
    j["pass"] = r.passed();
    return j;
}

// CSV text without its metadata line, for determinism comparisons.
inline std::string strip_metadata(const std::string& csv) {
    if (csv.rfind("# meta:", 0) != 0) return csv;
    const auto nl = csv.find('\n');
    return nl == std::string::npos ? std::string() : csv.substr(nl + 1);
}

// Write via a temporary file in the same directory, then rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& text) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw io_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open " + tmp.string() + " for writing");
        out << text;
        out.flush();
        if (!out) throw io_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw io_error("cannot rename into " + path.string());
    }
}

struct ReportPaths {
    std::filesystem::path csv, json;
};

enum class OutputFormat { csv, json, both };

inline OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    if (s == "both") return OutputFormat::both;
    throw domain_error("format must be csv, json or both, got '" + s + "'");
}

// Files are named <experiment>_d<d>_seed<seed>_<timestamp>[_<i>].{csv,json}.
inline ReportPaths write_report_files(const ExperimentReport& r, const nlohmann::json& config, const RunMetadata& meta,
                                      const std::filesystem::path& out_dir, int d, std::uint64_t seed,
                                      OutputFormat fmt) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw io_error("output directory " + out_dir.string() + " is not writable");
    const std::string stem0 = r.name + "_d" + std::to_string(d) + "_seed" + std::to_string(seed) + "_" + meta.timestamp;
    std::string stem = stem0;
    for (int i = 1; fs::exists(out_dir / (stem + ".csv")) || fs::exists(out_dir / (stem + ".json")); ++i)
        stem = stem0 + "_" + std::to_string(i);
    ReportPaths p;
    if (fmt != OutputFormat::json) {
        p.csv = out_dir / (stem + ".csv");
        atomic_write(p.csv, report_csv(r, config, meta));
    }
    if (fmt != OutputFormat::csv) {
        p.json = out_dir / (stem + ".json");
        atomic_write(p.json, report_json(r, config, meta).dump(2) + "\n");
    }
    return p;
}

// Plain-text summary for the terminal.
inline std::string report_summary(const ExperimentReport& r) {
    std::ostringstream os;
    os << "== " << r.name << " (" << r.rows.size() << " rows)\n";
    const std::size_t show = std::min<std::size_t>(r.rows.size(), 40);
    if (!r.columns.empty()) {
        for (std::size_t j = 0; j < r.columns.size(); ++j) os << (j ? "  " : "") << r.columns[j];
        os << "\n";
        for (std::size_t i = 0; i < show; ++i) {
            for (std::size_t j = 0; j < r.rows[i].size(); ++j) os << (j ? "  " : "") << format_number(r.rows[i][j]);
            os << "\n";
        }
        if (show < r.rows.size()) os << "... (" << r.rows.size() - show << " more rows)\n";
    }
    for (const auto& s : r.slopes) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "slope %-28s %+.4f +- %.4f  theory %s %+.4f tol %.3f  %s%s\n", s.name.c_str(),
                      s.fit.slope, s.fit.stderr_slope, s.mode == SlopeMode::near ? "~" : "<=", s.theory, s.tol,
                      s.pass ? "PASS" : "FAIL", s.gating ? "" : " (info)");
        os << buf;
    }
    for (const auto& c : r.checks) {
        os << "check " << c.name << ": " << format_number(c.value) << " " << c.relation << " " << format_number(c.bound)
           << "  " << (c.pass ? "PASS" : "FAIL") << (c.gating ? "" : " (info)") << "\n";
    }
    for (const auto& n : r.notes) os << "note: " << n << "\n";
    os << "result: " << (r.passed() ? "PASS" : "FAIL") << "\n";
    return os.str();
}

} // namespace csphere
