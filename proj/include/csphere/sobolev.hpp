#pragma once

// L_p norms of polynomials on S^3, a fixed generic pole, zonal functions
// expanded in the harmonic basis, and Sobolev-class test functions
// f = I_gamma(g) with ||g||_p <= 1.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "csphere/kernels.hpp"
#include "csphere/spectral.hpp"

namespace csphere {

// Degree of a product rule that integrates |f|^p well for deg f = N:
// exact for even integer p, oversampled otherwise (|f|^p has kinks on the
// zero set, so the error decays only like degree^-2; 8N gives ~1e-3 at p = 1).
inline int lp_rule_degree(int N, double p) {
    const double r = std::round(p);
    if (r == p && static_cast<long long>(r) % 2 == 0) return static_cast<int>(r) * std::max(N, 1);
    return static_cast<int>(std::ceil(std::max(8.0, 2.0 * p + 2.0))) * std::max(N, 1);
}

// |c|^p; even integer p use repeated squaring of |c|^2.
inline double abs_pow(cplx c, double p) {
    const double a2 = std::norm(c);
    const double h = 0.5 * p;
    if (h == std::floor(h) && h <= 64.0) {
        double r = 1.0, b = a2;
        for (auto e = static_cast<unsigned>(h); e > 0; e >>= 1) {
            if (e & 1u) r *= b;
            b *= b;
        }
        return r;
    }
    return p == 1.0 ? std::sqrt(a2) : std::pow(a2, h);
}

// Grid L_p norms on S^3 for a fixed list of p and polynomials of degree
// <= N, with grids and transforms built once. Finite p share the product
// rule of the largest degree any of them needs; p = inf takes the max over
// a refined evaluation grid (a lower estimate of the sup).
class GridNorms {
public:
    GridNorms(const HarmonicBasis& basis, int N, std::vector<double> ps, int sup_refine = 2) : ps_(std::move(ps)) {
        require(basis.ctx().d == 3, "grid norms of general polynomials need d = 3");
        const int Ne = std::max(N, 1);
        int degree = 0;
        bool sup = false;
        for (double p : ps_) {
            require(p >= 1.0, "p must be >= 1");
            if (std::isinf(p)) sup = true;
            else degree = std::max(degree, lp_rule_degree(Ne, p));
        }
        if (degree > 0) rule_.emplace(basis, build_torus_grid(degree), N);
        if (sup) sup_.emplace(basis, build_sup_grid(build_torus_grid(2 * Ne), sup_refine), N);
    }

    const std::vector<double>& ps() const { return ps_; }

    std::vector<double> operator()(const SpectralFunction& f) const {
        std::vector<double> out(ps_.size(), 0.0);
        if (rule_) {
            const auto& g = rule_->grid();
            const std::size_t per = static_cast<std::size_t>(g.M) * g.M;
            std::vector<std::vector<double>> rows(ps_.size(), std::vector<double>(g.s.size()));
            parallel_for(g.s.size(), [&](std::size_t i) {
                std::vector<cplx> v(per);
                std::vector<double> t(per);
                rule_->synthesize_node(f, i, v.data());
                for (std::size_t a = 0; a < ps_.size(); ++a) {
                    if (std::isinf(ps_[a])) continue;
                    for (std::size_t j = 0; j < per; ++j) t[j] = abs_pow(v[j], ps_[a]);
                    rows[a][i] = g.sweight[i] * pairwise_sum(t) / static_cast<double>(per);
                }
            });
            for (std::size_t a = 0; a < ps_.size(); ++a)
                if (!std::isinf(ps_[a])) out[a] = std::pow(pairwise_sum(rows[a]), 1.0 / ps_[a]);
        }
        if (sup_) {
            const auto& g = sup_->grid();
            const std::size_t per = static_cast<std::size_t>(g.M) * g.M;
            std::vector<double> peak(g.s.size());
            parallel_for(g.s.size(), [&](std::size_t i) {
                std::vector<cplx> v(per);
                sup_->synthesize_node(f, i, v.data());
                double m = 0.0;
                for (auto c : v) m = std::max(m, std::norm(c));
                peak[i] = m;
            });
            const double m = std::sqrt(*std::max_element(peak.begin(), peak.end()));
            for (std::size_t a = 0; a < ps_.size(); ++a)
                if (std::isinf(ps_[a])) out[a] = m;
        }
        return out;
    }

private:
    std::vector<double> ps_;
    std::optional<TorusTransform> rule_, sup_;
};

// ||f||_p on S^3; p = 2 uses Parseval unless a quadrature value is asked for.
inline double lp_norm(const SpectralFunction& f, const HarmonicBasis& basis, double p, int sup_refine = 2,
                      bool parseval = true) {
    require(p >= 1.0, "p must be >= 1");
    require(f.ctx.d == 3, "grid norms of general polynomials need d = 3");
    if (p == 2.0 && parseval) return f.l2_norm();
    return GridNorms(basis, f.N, {p}, sup_refine)(f)[0];
}

// Fixed point off every coordinate axis; |z_1|^2 = 0.37 when n = 2.
inline SpherePoint generic_pole(const SphereContext& ctx) {
    std::vector<cplx> z(ctx.n);
    for (int j = 0; j < ctx.n; ++j) {
        const double w = 0.37 + (ctx.n > 1 ? 0.26 * j / (ctx.n - 1) : 0.0);
        z[j] = std::polar(std::sqrt(w), 0.3 + 0.8 * j);
    }
    return SpherePoint(z, true);
}

// Coefficients of x -> Psi(<x, x0>) = sum_k lambda_k M_k(x, x0),
// i.e. c_{k,m} = lambda_k conj(Y_m^k(x0)).
inline SpectralFunction zonal_to_spectral(const ZonalKernel& kappa, const SpherePoint& pole, const HarmonicBasis& basis,
                                          int N = -1) {
    if (N < 0) N = kappa.degree();
    require(N <= basis.max_degree(), "basis degree below kernel degree");
    auto f = SpectralFunction::zeros(kappa.ctx(), N);
    for (int k = 0; k <= N; ++k) {
        const double l = kappa.multiplier(k);
        if (l == 0.0) continue;
        const auto y = basis.eval_level(k, pole);
        for (std::size_t m = 0; m < y.size(); ++m) f.levels[k][m] = l * std::conj(y[m]);
    }
    return f;
}

enum class TargetKind { random, zonal_extremal };

inline std::string to_string(TargetKind k) { return k == TargetKind::random ? "random" : "zonal-extremal"; }

inline TargetKind parse_target_kind(const std::string& s) {
    if (s == "random") return TargetKind::random;
    if (s == "zonal-extremal") return TargetKind::zonal_extremal;
    throw domain_error("unknown target kind '" + s + "'");
}

// Mean-zero zonal polynomial sum_{k=lo}^{N} M_k(., x0): the reproducing
// kernel of H_lo + ... + H_N, concentrated at the pole. Normalized so that
// its L_p norm is 1.
inline ZonalKernel zonal_extremal_kernel(int N, double p, const SphereContext& ctx, int lo = 1) {
    require(N >= 1 && lo >= 1 && lo <= N, "zonal target needs 1 <= lo <= N");
    std::vector<double> l(N + 1, 0.0);
    for (int k = lo; k <= N; ++k) l[k] = 1.0;
    ZonalKernel g(ctx, l);
    const double nrm = p == 2.0 ? std::sqrt(static_cast<double>(polynomial_space_dim(N, ctx) - polynomial_space_dim(lo - 1, ctx)))
                                : kernel_norm(g, p);
    for (auto& v : l) v /= nrm;
    return ZonalKernel(ctx, l);
}

struct SobolevSample {
    SpectralFunction g;  // ||g||_p <= 1, mean zero
    SpectralFunction f;  // I_gamma(g)
    double g_norm = 0.0;
};

// Test function of W_p^gamma of degree N on S^3. The zonal-extremal kind
// uses the band lo..N (lo = 1 gives the full reproducing kernel).
inline SobolevSample sobolev_sample(double gamma, int N, const HarmonicBasis& basis, RandomSource rng, TargetKind kind,
                                    double p = 2.0, int lo = 1) {
    require(gamma > 0.0, "fractional order must be positive");
    require(N >= 1, "Sobolev sample needs N >= 1");
    const auto& ctx = basis.ctx();
    SobolevSample s;
    if (kind == TargetKind::zonal_extremal) {
        // normalized with the same grid norm that reports it
        s.g = zonal_to_spectral(zonal_extremal_kernel(N, 2.0, ctx, lo), generic_pole(ctx), basis, N);
    } else {
        s.g = SpectralFunction::zeros(ctx, N);
        for (int k = 1; k <= N; ++k)
            for (auto& c : s.g.levels[k]) c = rng.complex_normal();
    }
    const double nrm = lp_norm(s.g, basis, p);
    for (auto& lv : s.g.levels)
        for (auto& c : lv) c /= nrm;
    s.g_norm = lp_norm(s.g, basis, p);
    s.f = fractional_integral(s.g, gamma, 0.0);
    return s;
}

} // namespace csphere
