#pragma once

// Points, samplers and quadrature on S^d(C) and on the weighted unit disk.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "csphere/errors.hpp"
#include "csphere/parallel.hpp"
#include "csphere/rng.hpp"
#include "csphere/specfun.hpp"

namespace csphere {

using cplx = std::complex<double>;

struct SphereContext {
    int d = 3;
    int n = 2;
    double alpha = 0.0;

    static SphereContext make(int d) {
        require(d >= 3 && d % 2 == 1, "d must be odd and >= 3");
        SphereContext c;
        c.d = d;
        c.n = (d + 1) / 2;
        c.alpha = c.n - 2.0;
        return c;
    }
    bool operator==(const SphereContext&) const = default;
};

class SpherePoint {
public:
    SpherePoint() = default;
    explicit SpherePoint(std::vector<cplx> coords, bool normalize = false) : z_(std::move(coords)) {
        double r = 0.0;
        for (auto c : z_) r += std::norm(c);
        r = std::sqrt(r);
        if (normalize) {
            require(r > 0.0, "cannot normalize the zero vector");
            for (auto& c : z_) c /= r;
        } else {
            require(std::abs(r - 1.0) <= 1e-12, "point is not on the unit sphere");
        }
    }
    std::size_t size() const { return z_.size(); }
    cplx operator[](std::size_t i) const { return z_[i]; }
    const std::vector<cplx>& coords() const { return z_; }

private:
    std::vector<cplx> z_;
};

// <w, z> = sum_j w_j conj(z_j)
inline cplx inner(const SpherePoint& w, const SpherePoint& z) {
    require(w.size() == z.size(), "points of different dimension");
    cplx s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * std::conj(z[j]);
    return s;
}

struct QuadratureBudget {
    static std::atomic<double>& disk_cap() {
        static std::atomic<double> c{4.0e8};
        return c;
    }
    static std::atomic<double>& sphere_cap() {
        static std::atomic<double> c{2.0e7};
        return c;
    }
};

// Gauss-Jacobi nodes/weights on [-1,1] for (1-x)^a (1+x)^b, weights summing to 1.
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

inline GaussRule gauss_jacobi(int G, double a, double b) {
    require(G >= 1, "Gauss rule needs at least one node");
    JacobiParams{a, b}.validate();
    Eigen::VectorXd diag(G), sub(std::max(G - 1, 0));
    for (int k = 0; k < G; ++k) {
        const double c = 2.0 * k + a + b;
        diag(k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (c * (c + 2.0));
    }
    for (int k = 1; k < G; ++k) {
        const double c = 2.0 * k + a + b;
        sub(k - 1) = std::sqrt(4.0 * k * (k + a) * (k + b) * (k + a + b) / (c * c * (c + 1.0) * (c - 1.0)));
    }
    GaussRule r;
    if (G == 1) {
        r.x = {diag(0)};
        r.w = {1.0};
        return r;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw numeric_error("Gauss-Jacobi eigenvalue solve failed");
    r.x.resize(G);
    r.w.resize(G);
    const JacobiParams prm{a, b};
    for (int i = 0; i < G; ++i) {
        double x = es.eigenvalues()(i);
        double pm1 = 0.0;
        for (int it = 0; it < 3; ++it) {
            auto seq = jacobi_sequence(G, prm, x);
            const double p = seq[G];
            pm1 = seq[G - 1];
            const double c = 2.0 * G + a + b;
            const double dp = (G * (a - b - c * x) * p + 2.0 * (G + a) * (G + b) * pm1) / (c * (1.0 - x * x));
            const double dx = p / dp;
            if (!std::isfinite(dx)) break;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        pm1 = jacobi_sequence(G, prm, x)[G - 1];
        r.x[i] = x;
        r.w[i] = (1.0 - x * x) / (pm1 * pm1);
    }
    const double tot = pairwise_sum(r.w);
    for (auto& w : r.w) w /= tot;
    return r;
}

// Tensor rule on the disk for the probability measure
// (n-1)/pi (1-|z|^2)^{n-2} dA: Gauss-Jacobi in u = 2r^2-1 times M uniform angles.
struct DiskQuadrature {
    double alpha = 0.0;
    int exact_degree = 0;
    std::vector<double> r;        // radial nodes
    std::vector<double> rweight;  // radial weights (sum 1)
    int M = 1;                    // angular points, phi_a = 2 pi a / M

    std::size_t count() const { return r.size() * static_cast<std::size_t>(M); }
    double angle(int a) const { return 2.0 * std::numbers::pi * a / M; }
    cplx node(std::size_t idx) const {
        const std::size_t i = idx / M;
        const int a = static_cast<int>(idx % M);
        return std::polar(r[i], angle(a));
    }
    double weight(std::size_t idx) const { return rweight[idx / M] / M; }
};

inline DiskQuadrature build_disk_rule_tensor(const SphereContext& ctx, int G, int M) {
    require(G >= 1 && M >= 1, "disk rule needs positive sizes");
    if (static_cast<double>(G) * M > QuadratureBudget::disk_cap().load())
        throw resource_error("disk rule exceeds node budget: " + std::to_string(G) + "x" + std::to_string(M));
    DiskQuadrature q;
    q.alpha = ctx.alpha;
    q.M = M;
    auto g = gauss_jacobi(G, ctx.alpha, 0.0);
    q.r.resize(G);
    q.rweight = g.w;
    for (int i = 0; i < G; ++i) q.r[i] = std::sqrt(std::max(0.0, 0.5 * (1.0 + g.x[i])));
    q.exact_degree = std::min(M - 1, 4 * G - 2);
    return q;
}

inline DiskQuadrature build_disk_rule(const SphereContext& ctx, int degree) {
    require(degree >= 0, "rule degree must be non-negative");
    return build_disk_rule_tensor(ctx, degree / 4 + 1, degree + 1);
}

// (n-1)/pi int Psi(z) (1-|z|^2)^{n-2} dA
template <class F>
cplx zonal_integral(F&& psi, const SphereContext& ctx, const DiskQuadrature& rule) {
    require(rule.alpha == ctx.alpha, "disk rule weight does not match the sphere context");
    std::vector<cplx> rows(rule.r.size());
    for (std::size_t i = 0; i < rule.r.size(); ++i) {
        std::vector<cplx> ring(rule.M);
        for (int a = 0; a < rule.M; ++a) ring[a] = cplx(psi(std::polar(rule.r[i], rule.angle(a))));
        rows[i] = rule.rweight[i] * pairwise_sum(ring) / static_cast<double>(rule.M);
    }
    return pairwise_sum(rows);
}

// Product grid on S^3 in Hopf coordinates:
// z1 = sqrt(s) e^{i phi1}, z2 = sqrt(1-s) e^{i phi2}, phi = 2 pi a / M.
struct TorusGrid {
    std::vector<double> s;
    std::vector<double> sweight;  // empty for pure evaluation grids
    int M = 1;

    std::size_t count() const { return s.size() * static_cast<std::size_t>(M) * M; }
    double angle(int a) const { return 2.0 * std::numbers::pi * a / M; }
    // flat index = (i*M + a)*M + b
    SpherePoint point(std::size_t idx) const {
        const std::size_t i = idx / (static_cast<std::size_t>(M) * M);
        const int a = static_cast<int>((idx / M) % M);
        const int b = static_cast<int>(idx % M);
        const double si = std::clamp(s[i], 0.0, 1.0);
        return SpherePoint({std::polar(std::sqrt(si), angle(a)), std::polar(std::sqrt(1.0 - si), angle(b))}, true);
    }
};

struct SphereQuadrature {
    SphereContext ctx;
    int exact_degree = 0;
    bool monte_carlo = false;
    std::vector<cplx> coords;    // count * n, row-major
    std::vector<double> weights;
    TorusGrid grid;              // populated for the exact product tier

    std::size_t count() const { return weights.size(); }
    SpherePoint node(std::size_t i) const {
        return SpherePoint(std::vector<cplx>(coords.begin() + i * ctx.n, coords.begin() + (i + 1) * ctx.n), true);
    }
    bool is_product() const { return !monte_carlo; }
};

inline std::vector<SpherePoint> sample_complex_sphere(int n, std::size_t count, RandomSource rng) {
    require(n >= 1, "complex dimension must be positive");
    std::vector<SpherePoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<cplx> z(n);
        for (auto& c : z) c = rng.complex_normal();
        out.emplace_back(std::move(z), true);
    }
    return out;
}

inline std::vector<std::vector<double>> sample_real_sphere(int dim, std::size_t count, RandomSource rng) {
    require(dim >= 1, "sphere dimension must be positive");
    std::vector<std::vector<double>> out(count, std::vector<double>(dim));
    for (auto& v : out) {
        double r = 0.0;
        do {
            r = 0.0;
            for (auto& x : v) {
                x = rng.normal();
                r += x * x;
            }
        } while (r == 0.0);
        r = std::sqrt(r);
        for (auto& x : v) x /= r;
    }
    return out;
}

inline TorusGrid build_torus_grid(int degree) {
    TorusGrid g;
    const int G = degree / 4 + 1;
    g.M = degree + 1;
    auto gr = gauss_jacobi(G, 0.0, 0.0);
    g.s.resize(G);
    for (int i = 0; i < G; ++i) g.s[i] = 0.5 * (1.0 + gr.x[i]);
    g.sweight = gr.w;
    return g;
}

// Exact product rule for d = 3; Monte Carlo (flagged, exact_degree 0) otherwise.
inline SphereQuadrature build_sphere_rule(const SphereContext& ctx, int degree, std::size_t mc_count = 20000,
                                          std::uint64_t mc_seed = 0) {
    require(degree >= 0, "rule degree must be non-negative");
    SphereQuadrature q;
    q.ctx = ctx;
    if (ctx.d != 3) {
        q.monte_carlo = true;
        q.exact_degree = 0;
        auto pts = sample_complex_sphere(ctx.n, mc_count, RandomSource(mc_seed, 0x5155));
        for (auto& p : pts)
            for (auto c : p.coords()) q.coords.push_back(c);
        q.weights.assign(mc_count, 1.0 / static_cast<double>(mc_count));
        return q;
    }
    const double G = degree / 4 + 1, M = degree + 1;
    if (G * M * M > QuadratureBudget::sphere_cap().load())
        throw resource_error("sphere rule of degree " + std::to_string(degree) + " exceeds node budget");
    q.grid = build_torus_grid(degree);
    q.exact_degree = degree;
    const auto& g = q.grid;
    const std::size_t cnt = g.count();
    q.coords.resize(2 * cnt);
    q.weights.resize(cnt);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < g.s.size(); ++i) {
        const double a1 = std::sqrt(g.s[i]), a2 = std::sqrt(1.0 - g.s[i]);
        for (int a = 0; a < g.M; ++a)
            for (int b = 0; b < g.M; ++b, ++idx) {
                q.coords[2 * idx] = std::polar(a1, g.angle(a));
                q.coords[2 * idx + 1] = std::polar(a2, g.angle(b));
                q.weights[idx] = g.sweight[i] / (static_cast<double>(g.M) * g.M);
            }
    }
    return q;
}

// Evaluation grid for sup norms: the rule's radial nodes plus an equispaced
// s-grid including both poles, with doubled angular resolution. Its size is
// at least 8x the rule's node count.
inline TorusGrid build_sup_grid(const TorusGrid& rule, int refine = 1) {
    TorusGrid g;
    std::vector<double> s = rule.s;
    const int extra = static_cast<int>(rule.s.size()) * refine + 2;
    for (int i = 0; i < extra; ++i) s.push_back(static_cast<double>(i) / (extra - 1));
    std::sort(s.begin(), s.end());
    g.s = std::move(s);
    g.M = 2 * rule.M * refine;
    return g;
}

template <class T>
double discrete_lp_norm(std::span<const T> values, std::span<const double> weights, double p) {
    require(values.size() == weights.size(), "values and weights differ in length");
    require(p >= 1.0, "p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }
    std::vector<double> terms(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double a = std::abs(values[i]);
        terms[i] = weights[i] * (p == 2.0 ? a * a : (p == 1.0 ? a : std::pow(a, p)));
    }
    return std::pow(pairwise_sum(terms), 1.0 / p);
}

inline double discrete_lp_norm(const std::vector<cplx>& v, const std::vector<double>& w, double p) {
    return discrete_lp_norm<cplx>(std::span<const cplx>(v), std::span<const double>(w), p);
}
inline double discrete_lp_norm(const std::vector<double>& v, const std::vector<double>& w, double p) {
    return discrete_lp_norm<double>(std::span<const double>(v), std::span<const double>(w), p);
}

inline constexpr double infinity = std::numeric_limits<double>::infinity();

} // namespace csphere
