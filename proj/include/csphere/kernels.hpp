#pragma once

// Zonal multiplier kernels: projectors M_k, Cesaro kernels, the smoothed
// kernel Q_2N, the fractional kernel and its summation-by-parts split,
// zonal L_p norms and convolution.

#include <json.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "csphere/geometry.hpp"
#include "csphere/specfun.hpp"
#include "csphere/spectral.hpp"

namespace csphere {

// Psi(z) = sum_k lambda_k m_k(z), m_k = sum_{p+q=k} dim H_{p,q} R_{p,q}.
class ZonalKernel {
public:
    ZonalKernel() = default;
    ZonalKernel(SphereContext ctx, std::vector<double> lambdas) : ctx_(ctx), lambda_(std::move(lambdas)) {
        if (lambda_.empty()) lambda_.push_back(0.0);
    }

    const SphereContext& ctx() const { return ctx_; }
    const std::vector<double>& multipliers() const { return lambda_; }
    double multiplier(int k) const { return (k >= 0 && k < static_cast<int>(lambda_.size())) ? lambda_[k] : 0.0; }
    int degree() const {
        for (int k = static_cast<int>(lambda_.size()) - 1; k > 0; --k)
            if (lambda_[k] != 0.0) return k;
        return 0;
    }

    double pole_value() const {
        std::vector<double> t(lambda_.size());
        for (std::size_t k = 0; k < lambda_.size(); ++k) t[k] = lambda_[k] * static_cast<double>(eigenspace_dim(static_cast<int>(k), ctx_));
        return pairwise_sum(t);
    }

    // g_j(r) for j = 0..K, so that Psi(r e^{i phi}) = g_0 + 2 sum_{j>0} g_j cos(j phi).
    std::vector<double> radial_profile(double r) const {
        const int K = degree();
        const double u = 2.0 * r * r - 1.0, a = ctx_.alpha;
        std::vector<double> g(K + 1, 0.0);
        double rj = 1.0;
        for (int j = 0; j <= K; ++j) {
            const int L = (K - j) / 2;
            double acc = 0.0;
            // Jacobi P_l^{(a, j)}(u) / P_l(1), l = 0..L
            double p2 = 1.0, p1 = 0.0, norm = 1.0;
            for (int l = 0; l <= L; ++l) {
                double p;
                if (l == 0) p = 1.0;
                else if (l == 1) p = 0.5 * (a - j + (a + j + 2.0) * u);
                else p = detail::jacobi_step(l, a, j, u, p1, p2);
                if (l >= 1) norm *= (l + a) / l;
                if (l >= 1) p2 = p1;
                p1 = p;
                const double lam = lambda_[j + 2 * l];
                if (lam != 0.0) acc += lam * static_cast<double>(bidegree_dim(j + l, l, ctx_)) * p / norm;
            }
            g[j] = acc * rj;
            rj *= r;
        }
        return g;
    }

    double eval(cplx z) const {
        double r = std::abs(z);
        require(r <= 1.0 + 1e-12, "kernel argument outside the closed unit disk");
        r = std::min(r, 1.0);
        const auto g = radial_profile(r);
        return cosine_series(g, r > 0 ? std::arg(z) : 0.0);
    }

    // g_0 + 2 sum g_j cos(j phi) by Clenshaw.
    static double cosine_series(const std::vector<double>& g, double phi) {
        const double c = std::cos(phi);
        double b1 = 0.0, b2 = 0.0;
        for (int j = static_cast<int>(g.size()) - 1; j >= 1; --j) {
            const double b = 2.0 * g[j] + 2.0 * c * b1 - b2;
            b2 = b1;
            b1 = b;
        }
        return g[0] + c * b1 - b2;
    }

private:
    SphereContext ctx_;
    std::vector<double> lambda_;
};

inline ZonalKernel operator-(const ZonalKernel& a, const ZonalKernel& b) {
    require(a.ctx() == b.ctx(), "kernels live on different spheres");
    const std::size_t n = std::max(a.multipliers().size(), b.multipliers().size());
    std::vector<double> l(n);
    for (std::size_t k = 0; k < n; ++k) l[k] = a.multiplier(static_cast<int>(k)) - b.multiplier(static_cast<int>(k));
    return ZonalKernel(a.ctx(), l);
}

inline ZonalKernel operator+(const ZonalKernel& a, const ZonalKernel& b) {
    require(a.ctx() == b.ctx(), "kernels live on different spheres");
    const std::size_t n = std::max(a.multipliers().size(), b.multipliers().size());
    std::vector<double> l(n);
    for (std::size_t k = 0; k < n; ++k) l[k] = a.multiplier(static_cast<int>(k)) + b.multiplier(static_cast<int>(k));
    return ZonalKernel(a.ctx(), l);
}

inline ZonalKernel projector_kernel(int k, const SphereContext& ctx) {
    require(k >= 0, "level must be non-negative");
    std::vector<double> l(k + 1, 0.0);
    l[k] = 1.0;
    return ZonalKernel(ctx, l);
}

// Projector onto the span of the levels in omega.
inline ZonalKernel subspace_kernel(const std::vector<int>& omega, const SphereContext& ctx) {
    int K = 0;
    for (int k : omega) {
        require(k >= 0, "level must be non-negative");
        K = std::max(K, k);
    }
    std::vector<double> l(K + 1, 0.0);
    for (int k : omega) l[k] = 1.0;
    return ZonalKernel(ctx, l);
}

inline ZonalKernel cesaro_kernel(int n, double delta, const SphereContext& ctx) {
    require(n >= 0 && delta >= 0.0, "Cesaro kernel needs n >= 0, delta >= 0");
    std::vector<double> l(n + 1);
    const double top = cesaro_number(n, delta);
    for (int m = 0; m <= n; ++m) l[m] = cesaro_number(n - m, delta) / top;
    return ZonalKernel(ctx, l);
}

inline ZonalKernel vallee_poussin_kernel(int N, const SphereContext& ctx, const ChiFunction& chi) {
    require(N >= 1, "Q_2N needs N >= 1");
    require(chi.d() == ctx.d, "chi was built for another dimension");
    std::vector<double> l(2 * N + 1);
    for (int k = 0; k <= 2 * N; ++k) l[k] = chi.eval(ctx.d, static_cast<double>(k) / (2.0 * N));
    return ZonalKernel(ctx, l);
}

inline ZonalKernel vallee_poussin_kernel(int N, const SphereContext& ctx) {
    return vallee_poussin_kernel(N, ctx, chi_smooth(ctx.d));
}

// lambda_0 = 0, lambda_k = theta_k^{-gamma/2} for 1 <= k <= N
inline std::vector<double> fractional_multipliers(int N, double gamma, const SphereContext& ctx) {
    require(gamma > 0.0, "fractional order must be positive");
    std::vector<double> l(N + 1, 0.0);
    for (int k = 1; k <= N; ++k) l[k] = std::pow(eigenvalue(k, ctx), -gamma / 2.0);
    return l;
}

inline ZonalKernel fractional_kernel(int N, double gamma, const SphereContext& ctx) {
    return ZonalKernel(ctx, fractional_multipliers(N, gamma, ctx));
}

struct FractionalSplit {
    ZonalKernel K1, K2, KN;
    int order = 0;  // number of summation-by-parts steps
};

// Summation by parts applied `order` times (default (d+3)/2) to
// K_N = sum_{k<=N} lambda_k M_k, with A_k^j = C_k^j S_k^j:
//   K_N = sum_{k=0}^{N-order} Delta^order lambda_k A_k^{order-1}
//       + sum_{j=0}^{order-1} Delta^j lambda_{N-j} A_{N-j}^j.
// The first sum is K1, the boundary terms form K2; K1 + K2 = K_N exactly.
inline FractionalSplit fractional_kernel_split(int N, double gamma, const SphereContext& ctx, int order = 0) {
    const int s = (ctx.d + 1) / 2;
    if (order <= 0) order = s + 1;
    require(gamma > 0.0, "fractional order must be positive");
    require(N > s + 1 && N >= order, "the split needs N > (d+3)/2 - 1 and N >= order");
    const auto lam = fractional_multipliers(N, gamma, ctx);
    // the high-order differences cancel heavily at large k, so the split
    // is accumulated in extended precision and rounded once
    using ld = long double;
    std::vector<ld> laml(N + 1, 0.0L);
    for (int k = 1; k <= N; ++k) laml[k] = std::pow(static_cast<ld>(eigenvalue(k, ctx)), -static_cast<ld>(gamma) / 2);
    std::vector<std::vector<ld>> C(order, std::vector<ld>(N + 1));
    for (int j = 0; j < order; ++j) {
        C[j][0] = 1;
        for (int i = 1; i <= N; ++i) C[j][i] = C[j][i - 1] * (i + j) / i;
    }
    std::vector<ld> a1(N + 1, 0.0L), a2(N + 1, 0.0L);
    const std::span<const ld> ls(laml);
    for (int k = 0; k <= N - order; ++k) {
        const ld dl = finite_difference_t<ld>(ls, order, k);
        for (int m = 0; m <= k; ++m) a1[m] += dl * C[order - 1][k - m];
    }
    for (int j = 0; j < order; ++j) {
        const ld dl = finite_difference_t<ld>(ls, j, N - j);
        for (int m = 0; m <= N - j; ++m) a2[m] += dl * C[j][N - j - m];
    }
    std::vector<double> k1(a1.begin(), a1.end()), k2(a2.begin(), a2.end());
    return {ZonalKernel(ctx, k1), ZonalKernel(ctx, k2), ZonalKernel(ctx, lam), order};
}

struct NormEstimate {
    double value = 0.0;
    bool under_resolved = false;
};

// Zonal L_p norm: weighted disk quadrature of |Psi|^p; p = inf takes the
// max over the disk grid and the pole.
inline NormEstimate kernel_lp_norm(const ZonalKernel& kappa, double p, const DiskQuadrature& rule) {
    require(p >= 1.0, "p must be >= 1");
    require(rule.alpha == kappa.ctx().alpha, "disk rule weight does not match the kernel's sphere");
    const int K = kappa.degree();
    NormEstimate out;
    out.under_resolved = rule.exact_degree < 2 * K;
    const std::size_t G = rule.r.size();
    const int M = rule.M;
    const bool sup = std::isinf(p);
    std::vector<double> row(G, 0.0);
    // cosine series are even in the angle, so a and M-a share a value
    const int half = M / 2;
    std::vector<double> cosv(half + 1);
    for (int a = 0; a <= half; ++a) cosv[a] = std::cos(rule.angle(a));
    parallel_for(G, [&](std::size_t i) {
        const auto g = kappa.radial_profile(rule.r[i]);
        std::vector<double> vals(M, 0.0);
        for (int a = 0; a <= half; ++a) {
            const double c = cosv[a];
            double b1 = 0.0, b2 = 0.0;
            for (int j = K; j >= 1; --j) {
                const double b = 2.0 * g[j] + 2.0 * c * b1 - b2;
                b2 = b1;
                b1 = b;
            }
            const double v = std::abs(g[0] + c * b1 - b2);
            double t = sup ? v : (p == 1.0 ? v : (p == 2.0 ? v * v : std::pow(v, p)));
            vals[a] = t;
            if (a > 0 && M - a != a) vals[M - a] = t;
        }
        if (sup) row[i] = *std::max_element(vals.begin(), vals.end());
        else row[i] = rule.rweight[i] * pairwise_sum(vals) / M;
    });
    if (sup) out.value = std::max(*std::max_element(row.begin(), row.end()), std::abs(kappa.pole_value()));
    else out.value = std::pow(pairwise_sum(row), 1.0 / p);
    return out;
}

// Disk rule sized for norms of degree-K kernels.
inline DiskQuadrature norm_rule(const SphereContext& ctx, int K, int oversample = 8) {
    return build_disk_rule(ctx, std::max(4, oversample * std::max(K, 1)));
}

inline double kernel_norm(const ZonalKernel& kappa, double p, int oversample = 8) {
    return kernel_lp_norm(kappa, p, norm_rule(kappa.ctx(), kappa.degree(), oversample)).value;
}

// Multiplier action c_{k,m} -> lambda_k c_{k,m}.
inline SpectralFunction convolve(const ZonalKernel& kappa, const SpectralFunction& f) {
    require(kappa.ctx() == f.ctx, "kernel and function live on different spheres");
    SpectralFunction out = f;
    bool missing = false;
    for (int k = 0; k <= f.N; ++k) {
        if (k >= static_cast<int>(kappa.multipliers().size()) && f.level_energy(k) > 0.0) missing = true;
        const double l = kappa.multiplier(k);
        for (auto& c : out.levels[k]) c *= l;
    }
    if (missing) out.warnings.push_back("kernel degree below function degree: missing levels treated as 0");
    return out;
}

// Direct realization (f * kappa)(x) = int f(y) Psi(<x,y>) dnu(y) on a rule.
inline std::vector<cplx> convolve_quadrature(const ZonalKernel& kappa, const std::vector<cplx>& fvals,
                                             const SphereQuadrature& rule, const std::vector<SpherePoint>& points) {
    require(fvals.size() == rule.count(), "value count does not match the rule");
    const int n = rule.ctx.n;
    std::vector<cplx> out(points.size());
    parallel_for(points.size(), [&](std::size_t x) {
        std::vector<cplx> t(rule.count());
        for (std::size_t i = 0; i < rule.count(); ++i) {
            cplx z = 0.0;
            for (int c = 0; c < n; ++c) z += points[x][c] * std::conj(rule.coords[i * n + c]);
            if (std::abs(z) > 1.0) z /= std::abs(z);
            t[i] = rule.weights[i] * fvals[i] * kappa.eval(z);
        }
        out[x] = pairwise_sum(t);
    });
    return out;
}

inline nlohmann::json to_json(const ZonalKernel& k) {
    return {{"d", k.ctx().d}, {"lambdas", k.multipliers()}};
}

inline ZonalKernel kernel_from_json(const nlohmann::json& j) {
    return ZonalKernel(SphereContext::make(j.at("d").get<int>()), j.at("lambdas").get<std::vector<double>>());
}

} // namespace csphere
