#pragma once

// Eigenstructure of the Laplace-Beltrami operator on S^d(C): eigenvalues,
// eigenspace dimensions, orthonormal bases of H_k on S^3, Fourier
// analysis/synthesis and fractional multipliers.

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "csphere/errors.hpp"
#include "csphere/geometry.hpp"

namespace csphere {

inline double eigenvalue(int k, const SphereContext& ctx) {
    require(k >= 0, "level must be non-negative");
    return static_cast<double>(k) * (k + ctx.d - 1);
}

inline std::int64_t binomial_int(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// dim H_{p,q} = (p+q+n-1)/(n-1) binom(p+n-2,p) binom(q+n-2,q)
inline std::int64_t bidegree_dim(int p, int q, const SphereContext& ctx) {
    require(p >= 0 && q >= 0, "bidegree must be non-negative");
    const int n = ctx.n;
    return (static_cast<std::int64_t>(p) + q + n - 1) * binomial_int(p + n - 2, p) * binomial_int(q + n - 2, q) / (n - 1);
}

inline std::int64_t eigenspace_dim(int k, const SphereContext& ctx) {
    require(k >= 0, "level must be non-negative");
    std::int64_t s = 0;
    for (int p = 0; p <= k; ++p) s += bidegree_dim(p, k - p, ctx);
    return s;
}

// dim of T_N = H_0 + ... + H_N
inline std::int64_t polynomial_space_dim(int N, const SphereContext& ctx) {
    std::int64_t s = 0;
    for (int k = 0; k <= N; ++k) s += eigenspace_dim(k, ctx);
    return s;
}

struct EigenspaceIndex {
    int k = 0;
    int p = -1, q = -1;  // bidegree, -1 when not refined
    bool has_bidegree() const { return p >= 0; }
};

// One orthonormal harmonic on S^3 of torus weight (m1, m2):
// Y = z1^[m1] z2^[m2] sum_c b_c |z1|^{2c} |z2|^{2(j-c)},
// with z^[m] = z^m for m >= 0 and conj(z)^{-m} otherwise.
struct Harmonic {
    int k = 0, m1 = 0, m2 = 0, j = 0;
    std::vector<double> b;

    int p() const { return (k + m1 + m2) / 2; }
    int q() const { return (k - m1 - m2) / 2; }

    // radial factor |z1|^{|m1|} |z2|^{|m2|} sum_c b_c s^c t^{j-c}
    double radial(double s, double t) const {
        double acc = 0.0, sp = 1.0;
        std::vector<double> tp(j + 1, 1.0);
        for (int c = 1; c <= j; ++c) tp[c] = tp[c - 1] * t;
        for (int c = 0; c <= j; ++c) {
            acc += b[c] * sp * tp[j - c];
            sp *= s;
        }
        return acc * std::pow(std::max(s, 0.0), 0.5 * std::abs(m1)) * std::pow(std::max(t, 0.0), 0.5 * std::abs(m2));
    }

    cplx eval(cplx z1, cplx z2) const {
        const double s = std::norm(z1), t = std::norm(z2);
        cplx a = 1.0;
        const cplx u1 = m1 >= 0 ? z1 : std::conj(z1), u2 = m2 >= 0 ? z2 : std::conj(z2);
        for (int i = 0; i < std::abs(m1); ++i) a *= u1;
        for (int i = 0; i < std::abs(m2); ++i) a *= u2;
        double poly = 0.0, sp = 1.0;
        for (int c = 0; c <= j; ++c) {
            poly += b[c] * sp * std::pow(t, j - c);
            sp *= s;
        }
        return a * poly;
    }
};

// Torus weights of H_k in canonical order (lexicographic in (m1, m2)).
inline std::vector<std::pair<int, int>> level_weights(int k) {
    std::vector<std::pair<int, int>> w;
    for (int m1 = -k; m1 <= k; ++m1)
        for (int m2 = -k; m2 <= k; ++m2) {
            const int a = std::abs(m1) + std::abs(m2);
            if (a <= k && (k - a) % 2 == 0) w.emplace_back(m1, m2);
        }
    return w;
}

inline std::string rule_key(const std::string& kind, int d, int degree) {
    std::ostringstream os;
    os << kind << ":d=" << d << ":degree=" << degree;
    return os.str();
}

inline std::string content_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Orthonormal bases of H_0..H_N on S^3.
class HarmonicBasis {
public:
    HarmonicBasis() = default;
    HarmonicBasis(SphereContext ctx, int N, std::vector<std::vector<Harmonic>> levels, std::string rule_id)
        : ctx_(ctx), N_(N), levels_(std::move(levels)), rule_id_(std::move(rule_id)) {
        for (int k = 0; k <= N_; ++k)
            for (std::size_t m = 0; m < levels_[k].size(); ++m) {
                const auto& h = levels_[k][m];
                class_index_[{h.m1, h.m2}].push_back({k, static_cast<int>(m)});
            }
    }

    const SphereContext& ctx() const { return ctx_; }
    int max_degree() const { return N_; }
    const std::vector<Harmonic>& level(int k) const {
        require(k >= 0 && k <= N_, "basis level out of range");
        return levels_[k];
    }
    const std::vector<std::vector<Harmonic>>& levels() const { return levels_; }
    const std::string& rule_id() const { return rule_id_; }

    // (level, index) pairs of the harmonics of a torus weight, ascending in k
    const std::vector<std::pair<int, int>>& weight_class(int m1, int m2) const {
        static const std::vector<std::pair<int, int>> none;
        auto it = class_index_.find({m1, m2});
        return it == class_index_.end() ? none : it->second;
    }

    std::vector<cplx> eval_level(int k, const SpherePoint& x) const {
        const auto& lv = level(k);
        std::vector<cplx> out(lv.size());
        for (std::size_t m = 0; m < lv.size(); ++m) out[m] = lv[m].eval(x[0], x[1]);
        return out;
    }

private:
    SphereContext ctx_;
    int N_ = -1;
    std::vector<std::vector<Harmonic>> levels_;
    std::string rule_id_;
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> class_index_;
};

namespace detail {

// Gram-Schmidt inside one torus weight class (|m1| = a, |m2| = b) for
// j = 0..jmax. Inner product: sum_i w_i s_i^a t_i^b F(s_i) G(s_i), which is
// the sphere inner product of two harmonics of the same weight.
inline std::vector<std::vector<double>> class_orthonormal(int a, int b, int jmax, const TorusGrid& g) {
    const std::size_t G = g.s.size();
    std::vector<double> wt(G);
    for (std::size_t i = 0; i < G; ++i) wt[i] = g.sweight[i] * std::pow(g.s[i], a) * std::pow(1.0 - g.s[i], b);

    auto values = [&](const std::vector<double>& coef) {
        const int j = static_cast<int>(coef.size()) - 1;
        std::vector<double> v(G);
        for (std::size_t i = 0; i < G; ++i) {
            const double s = g.s[i], t = 1.0 - g.s[i];
            double acc = 0.0;
            for (int c = 0; c <= j; ++c) acc += coef[c] * std::pow(s, c) * std::pow(t, j - c);
            v[i] = acc;
        }
        return v;
    };
    auto dot = [&](const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> t(G);
        for (std::size_t i = 0; i < G; ++i) t[i] = wt[i] * x[i] * y[i];
        return pairwise_sum(t);
    };
    // multiply a degree-j' form by (s+t)^{j-j'}
    auto lift = [](const std::vector<double>& coef, int j) {
        std::vector<double> out(coef);
        while (static_cast<int>(out.size()) - 1 < j) {
            std::vector<double> nxt(out.size() + 1, 0.0);
            for (std::size_t c = 0; c < out.size(); ++c) {
                nxt[c] += out[c];
                nxt[c + 1] += out[c];
            }
            out = std::move(nxt);
        }
        return out;
    };

    std::vector<std::vector<double>> found;       // coefficients per j
    std::vector<std::vector<double>> found_vals;  // values at nodes
    for (int j = 0; j <= jmax; ++j) {
        struct Cand {
            std::vector<double> coef, vals;
            double norm0;
        };
        std::vector<Cand> cands;
        for (int c = 0; c <= j; ++c) {
            Cand cd;
            cd.coef.assign(j + 1, 0.0);
            cd.coef[c] = 1.0;
            cd.vals = values(cd.coef);
            cd.norm0 = std::sqrt(dot(cd.vals, cd.vals));
            // two passes against the lower harmonics of this class
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t l = 0; l < found.size(); ++l) {
                    const double pr = dot(cd.vals, found_vals[l]);
                    const auto lifted = lift(found[l], j);
                    for (int e = 0; e <= j; ++e) cd.coef[e] -= pr * lifted[e];
                    for (std::size_t i = 0; i < G; ++i) cd.vals[i] -= pr * found_vals[l][i];
                }
            cands.push_back(std::move(cd));
        }
        // pivot: largest relative residual
        std::size_t piv = 0;
        double best = -1.0;
        for (std::size_t c = 0; c < cands.size(); ++c) {
            const double r = std::sqrt(dot(cands[c].vals, cands[c].vals)) / cands[c].norm0;
            if (r > best) best = r, piv = c;
        }
        if (best < 1e-12) {
            std::ostringstream os;
            os << "harmonic Gram-Schmidt lost rank: weight (" << a << "," << b << "), j=" << j
               << ", best relative residual " << best;
            throw numeric_error(os.str());
        }
        auto chosen = cands[piv];
        double nrm = std::sqrt(dot(chosen.vals, chosen.vals));
        for (auto& c : chosen.coef) c /= nrm;
        for (auto& v : chosen.vals) v /= nrm;
        // second normalization pass
        nrm = std::sqrt(dot(chosen.vals, chosen.vals));
        for (auto& c : chosen.coef) c /= nrm;
        for (auto& v : chosen.vals) v /= nrm;
        // the remaining candidates must be multiples of the chosen one
        for (std::size_t c = 0; c < cands.size(); ++c) {
            if (c == piv) continue;
            auto& cd = cands[c];
            const double pr = dot(cd.vals, chosen.vals);
            for (std::size_t i = 0; i < G; ++i) cd.vals[i] -= pr * chosen.vals[i];
            const double r = std::sqrt(dot(cd.vals, cd.vals)) / cd.norm0;
            if (r > 1e-7) {
                std::ostringstream os;
                os << "harmonic Gram-Schmidt found rank > 1: weight (" << a << "," << b << "), j=" << j
                   << ", candidate " << c << " residual " << r << " (rule too coarse?)";
                throw numeric_error(os.str());
            }
        }
        // sign convention: largest coefficient positive
        std::size_t big = 0;
        for (std::size_t e = 0; e < chosen.coef.size(); ++e)
            if (std::abs(chosen.coef[e]) > std::abs(chosen.coef[big]) * (1.0 + 1e-9)) big = e;
        if (chosen.coef[big] < 0) {
            for (auto& c : chosen.coef) c = -c;
            for (auto& v : chosen.vals) v = -v;
        }
        found.push_back(chosen.coef);
        found_vals.push_back(chosen.vals);
    }
    return found;
}

} // namespace detail

// Orthonormal bases of H_0..H_N on S^3, built against the given product rule.
inline HarmonicBasis build_basis(const SphereContext& ctx, int N, const SphereQuadrature& rule) {
    require(ctx.d == 3, "exact orthonormal bases are available for d = 3 only");
    require(N >= 0, "basis degree must be non-negative");
    require(rule.is_product() && rule.exact_degree >= 2 * N, "basis construction needs a product rule of degree >= 2N");
    std::vector<std::vector<Harmonic>> levels(N + 1);
    std::map<std::pair<int, int>, std::vector<std::vector<double>>> cls;
    for (int a = 0; a <= N; ++a)
        for (int b = 0; a + b <= N; ++b) cls[{a, b}] = detail::class_orthonormal(a, b, (N - a - b) / 2, rule.grid);
    for (int k = 0; k <= N; ++k)
        for (auto [m1, m2] : level_weights(k)) {
            Harmonic h;
            h.k = k, h.m1 = m1, h.m2 = m2;
            h.j = (k - std::abs(m1) - std::abs(m2)) / 2;
            h.b = cls[{std::abs(m1), std::abs(m2)}][h.j];
            levels[k].push_back(std::move(h));
        }
    return HarmonicBasis(ctx, N, std::move(levels), rule_key("sphere", ctx.d, rule.exact_degree));
}

inline HarmonicBasis build_basis(const SphereContext& ctx, int N) {
    return build_basis(ctx, N, build_sphere_rule(ctx, 2 * N));
}

// Orthonormal basis of a single level H_k.
inline std::vector<Harmonic> build_orthonormal_basis(int k, const SphereContext& ctx, const SphereQuadrature& rule) {
    require(rule.exact_degree >= 2 * k, "basis for H_k needs a rule of degree >= 2k");
    return build_basis(ctx, k, rule).level(k);
}

struct SpectralFunction {
    SphereContext ctx;
    int N = 0;
    std::vector<std::vector<cplx>> levels;  // levels[k].size() == d_k
    std::vector<std::string> warnings;

    static SpectralFunction zeros(const SphereContext& ctx, int N) {
        require(N >= 0, "degree must be non-negative");
        SpectralFunction f;
        f.ctx = ctx;
        f.N = N;
        for (int k = 0; k <= N; ++k) f.levels.emplace_back(static_cast<std::size_t>(eigenspace_dim(k, ctx)), cplx(0.0));
        return f;
    }

    double level_energy(int k) const {
        double e = 0.0;
        for (auto c : levels.at(k)) e += std::norm(c);
        return e;
    }
    double l2_norm() const {
        std::vector<double> e(levels.size());
        for (std::size_t k = 0; k < levels.size(); ++k) e[k] = level_energy(static_cast<int>(k));
        return std::sqrt(pairwise_sum(e));
    }
    std::size_t size() const {
        std::size_t s = 0;
        for (const auto& l : levels) s += l.size();
        return s;
    }
};

// ---- evaluation and analysis --------------------------------------------

inline cplx evaluate_at(const SpectralFunction& f, const HarmonicBasis& basis, const SpherePoint& x) {
    require(basis.max_degree() >= f.N, "basis degree below function degree");
    cplx acc = 0.0;
    for (int k = 0; k <= f.N; ++k) {
        const auto& lv = basis.level(k);
        for (std::size_t m = 0; m < lv.size(); ++m)
            if (f.levels[k][m] != 0.0) acc += f.levels[k][m] * lv[m].eval(x[0], x[1]);
    }
    return acc;
}

inline std::vector<cplx> synthesize(const SpectralFunction& f, const HarmonicBasis& basis,
                                    const std::vector<SpherePoint>& points) {
    std::vector<cplx> out(points.size());
    parallel_for(points.size(), [&](std::size_t i) { out[i] = evaluate_at(f, basis, points[i]); });
    return out;
}

// Fast synthesis/analysis on a Hopf product grid: radial factors are
// tabulated once and the two angular sums are separable.
class TorusTransform {
    using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

public:
    TorusTransform(const HarmonicBasis& basis, const TorusGrid& grid, int N)
        : basis_(&basis), grid_(grid), N_(N) {
        require(N >= 0 && N <= basis.max_degree(), "transform degree exceeds basis degree");
        const int W = 2 * N_ + 1;
        const std::size_t G = grid_.s.size();
        // harmonics grouped by weight, in a fixed order
        for (int m1 = -N_; m1 <= N_; ++m1)
            for (int m2 = -N_; m2 <= N_; ++m2)
                for (auto [k, m] : basis.weight_class(m1, m2))
                    if (k <= N_) members_.push_back({m1 + N_, m2 + N_, k, m});
        rho_.assign(G * members_.size(), 0.0);
        for (std::size_t i = 0; i < G; ++i) {
            const double s = std::clamp(grid_.s[i], 0.0, 1.0), t = 1.0 - s;
            for (std::size_t h = 0; h < members_.size(); ++h)
                rho_[i * members_.size() + h] = basis.level(members_[h].k)[members_[h].m].radial(s, t);
        }
        E_.resize(static_cast<std::size_t>(W) * grid_.M);
        for (int m = -N_; m <= N_; ++m)
            for (int a = 0; a < grid_.M; ++a) {
                // reduce the phase index exactly before converting to an angle
                const long long ph = ((static_cast<long long>(m) * a) % grid_.M + grid_.M) % grid_.M;
                E_[(m + N_) * grid_.M + a] = std::polar(1.0, 2.0 * std::numbers::pi * ph / grid_.M);
            }
        Emat_ = Eigen::Map<const CMat>(E_.data(), W, grid_.M);
    }

    const TorusGrid& grid() const { return grid_; }
    int degree() const { return N_; }

    // Values of f on the M x M angle block of s-node i, written to dst.
    void synthesize_node(const SpectralFunction& f, std::size_t i, cplx* dst) const {
        const int W = 2 * N_ + 1, M = grid_.M;
        CMat A = CMat::Zero(W, W);
        for (std::size_t h = 0; h < members_.size(); ++h) {
            const auto& mb = members_[h];
            if (mb.k > f.N) continue;
            A(mb.w1, mb.w2) += f.levels[mb.k][mb.m] * rho_[i * members_.size() + h];
        }
        // B(m1, b) = sum_m2 A(m1, m2) e^{i m2 phi_b}, then f(a, b) = sum_m1 e^{i m1 phi_a} B(m1, b)
        const CMat B = A * Emat_;
        Eigen::Map<CMat> out(dst, M, M);
        out.noalias() = Emat_.transpose() * B;
    }

    std::vector<cplx> synthesize(const SpectralFunction& f) const {
        const std::size_t per = static_cast<std::size_t>(grid_.M) * grid_.M;
        std::vector<cplx> out(grid_.s.size() * per);
        parallel_for(grid_.s.size(), [&](std::size_t i) { synthesize_node(f, i, &out[i * per]); });
        return out;
    }

    // Discrete inner products against every harmonic of degree <= N.
    SpectralFunction analyze(const std::vector<cplx>& values) const {
        require(!grid_.sweight.empty(), "analysis needs a quadrature grid");
        const int W = 2 * N_ + 1, M = grid_.M;
        const std::size_t G = grid_.s.size();
        require(values.size() == G * M * M, "value count does not match the grid");
        std::vector<std::vector<cplx>> partial(G, std::vector<cplx>(members_.size()));
        parallel_for(G, [&](std::size_t i) {
            const Eigen::Map<const CMat> src(&values[i * M * M], M, M);
            // C(a, m2) = sum_b f(a,b) e^{-i m2 phi_b}, F(m1, m2) = sum_a e^{-i m1 phi_a} C(a, m2)
            const CMat C = src * Emat_.adjoint();
            const CMat F = Emat_.conjugate() * C / (static_cast<double>(M) * M);
            for (std::size_t h = 0; h < members_.size(); ++h) {
                const auto& mb = members_[h];
                partial[i][h] = grid_.sweight[i] * rho_[i * members_.size() + h] * F(mb.w1, mb.w2);
            }
        });
        auto out = SpectralFunction::zeros(basis_->ctx(), N_);
        std::vector<cplx> col(G);
        for (std::size_t h = 0; h < members_.size(); ++h) {
            for (std::size_t i = 0; i < G; ++i) col[i] = partial[i][h];
            out.levels[members_[h].k][members_[h].m] = pairwise_sum(col);
        }
        return out;
    }

private:
    struct Member {
        int w1, w2, k, m;
    };
    const HarmonicBasis* basis_;
    TorusGrid grid_;
    int N_;
    std::vector<Member> members_;
    std::vector<double> rho_;
    std::vector<cplx> E_;
    CMat Emat_;  // E_ as a (2N+1) x M matrix
};

// Fourier coefficients of values given on the nodes of `rule`. When f is a
// polynomial of degree assumed_degree, exactness needs
// rule.exact_degree >= N + assumed_degree; otherwise a warning is attached.
inline SpectralFunction analyze(const std::vector<cplx>& values, int N, const HarmonicBasis& basis,
                                const SphereQuadrature& rule, int assumed_degree = -1) {
    require(values.size() == rule.count(), "value count does not match the rule");
    require(N <= basis.max_degree(), "basis degree below analysis degree");
    SpectralFunction out;
    if (rule.is_product()) {
        TorusTransform tt(basis, rule.grid, N);
        out = tt.analyze(values);
    } else {
        out = SpectralFunction::zeros(basis.ctx(), N);
        for (int k = 0; k <= N; ++k) {
            const auto& lv = basis.level(k);
            for (std::size_t m = 0; m < lv.size(); ++m) {
                std::vector<cplx> t(rule.count());
                for (std::size_t i = 0; i < rule.count(); ++i)
                    t[i] = rule.weights[i] * values[i] * std::conj(lv[m].eval(rule.coords[2 * i], rule.coords[2 * i + 1]));
                out.levels[k][m] = pairwise_sum(t);
            }
        }
        out.warnings.push_back("monte-carlo rule: coefficients are estimates");
    }
    if (assumed_degree < 0) assumed_degree = N;
    if (rule.exact_degree < N + assumed_degree)
        out.warnings.push_back("under-resolved: rule degree " + std::to_string(rule.exact_degree) + " < " +
                               std::to_string(N + assumed_degree));
    return out;
}

inline std::vector<cplx> synthesize_on_rule(const SpectralFunction& f, const HarmonicBasis& basis,
                                            const SphereQuadrature& rule) {
    if (rule.is_product()) return TorusTransform(basis, rule.grid, f.N).synthesize(f);
    std::vector<SpherePoint> pts;
    for (std::size_t i = 0; i < rule.count(); ++i) pts.push_back(rule.node(i));
    return synthesize(f, basis, pts);
}

// ---- multipliers ---------------------------------------------------------

inline SpectralFunction fractional_derivative(const SpectralFunction& f, double gamma) {
    require(gamma > 0.0, "fractional order must be positive");
    SpectralFunction out = f;
    for (auto& c : out.levels[0]) c = 0.0;
    for (int k = 1; k <= f.N; ++k) {
        const double s = std::pow(eigenvalue(k, f.ctx), gamma / 2.0);
        for (auto& c : out.levels[k]) c *= s;
    }
    return out;
}

inline SpectralFunction fractional_integral(const SpectralFunction& f, double gamma, double C = 0.0) {
    require(gamma > 0.0, "fractional order must be positive");
    SpectralFunction out = f;
    for (auto& c : out.levels[0]) c = C;
    for (int k = 1; k <= f.N; ++k) {
        const double s = std::pow(eigenvalue(k, f.ctx), -gamma / 2.0);
        for (auto& c : out.levels[k]) c *= s;
    }
    return out;
}

// ---- serialization -------------------------------------------------------

inline nlohmann::json to_json(const SpectralFunction& f) {
    nlohmann::json j;
    j["d"] = f.ctx.d;
    j["N"] = f.N;
    j["levels"] = nlohmann::json::array();
    for (int k = 0; k <= f.N; ++k) {
        nlohmann::json lv;
        lv["k"] = k;
        lv["coeffs"] = nlohmann::json::array();
        for (auto c : f.levels[k]) lv["coeffs"].push_back({c.real(), c.imag()});
        j["levels"].push_back(lv);
    }
    return j;
}

inline SpectralFunction spectral_from_json(const nlohmann::json& j) {
    auto ctx = SphereContext::make(j.at("d").get<int>());
    auto f = SpectralFunction::zeros(ctx, j.at("N").get<int>());
    for (const auto& lv : j.at("levels")) {
        const int k = lv.at("k").get<int>();
        require(k >= 0 && k <= f.N, "level index out of range in JSON");
        const auto& cs = lv.at("coeffs");
        require(cs.size() == f.levels[k].size(), "coefficient count does not match d_k");
        for (std::size_t m = 0; m < cs.size(); ++m) f.levels[k][m] = cplx(cs[m][0].get<double>(), cs[m][1].get<double>());
    }
    return f;
}

} // namespace csphere
