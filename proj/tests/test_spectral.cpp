#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

#include "csphere/spectral.hpp"

using namespace csphere;

namespace {

const SphereContext ctx3 = SphereContext::make(3);

SpectralFunction random_function(int N, RandomSource rng, bool mean_zero = false) {
    auto f = SpectralFunction::zeros(ctx3, N);
    for (int k = mean_zero ? 1 : 0; k <= N; ++k)
        for (auto& c : f.levels[k]) c = rng.complex_normal();
    return f;
}

// Numerical rank of restricted monomials z^a conj(z)^b sampled at random points.
int restricted_rank(int n, RandomSource rng, auto&& keep) {
    std::vector<std::array<int, 4>> mons;
    for (int a1 = 0; a1 <= 12; ++a1)
        for (int a2 = 0; a2 <= 12; ++a2)
            for (int b1 = 0; b1 <= 12; ++b1)
                for (int b2 = 0; b2 <= 12; ++b2)
                    if (keep(a1, a2, b1, b2)) mons.push_back({a1, a2, b1, b2});
    auto pts = sample_complex_sphere(n, mons.size() * 2 + 20, rng);
    Eigen::MatrixXcd A(pts.size(), mons.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < mons.size(); ++j) {
            const auto& m = mons[j];
            A(i, j) = std::pow(pts[i][0], m[0]) * std::pow(pts[i][1], m[1]) * std::pow(std::conj(pts[i][0]), m[2]) *
                      std::pow(std::conj(pts[i][1]), m[3]);
        }
    if (mons.empty()) return 0;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A);
    const auto& sv = svd.singularValues();
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-9 * sv(0)) ++r;
    return r;
}

} // namespace

TEST(Eigen, Values) {
    EXPECT_EQ(eigenvalue(0, ctx3), 0.0);
    EXPECT_EQ(eigenvalue(1, ctx3), 3.0);
    EXPECT_EQ(eigenvalue(2, SphereContext::make(5)), 12.0);
    for (int k = 0; k < 30; ++k) EXPECT_EQ(eigenvalue(k, ctx3), k * (k + 2.0));
}

TEST(Dims, ClosedForms) {
    EXPECT_EQ(eigenspace_dim(0, ctx3), 1);
    EXPECT_EQ(eigenspace_dim(2, ctx3), 9);
    EXPECT_EQ(bidegree_dim(1, 0, ctx3), 2);
    for (int k = 0; k <= 50; ++k) EXPECT_EQ(eigenspace_dim(k, ctx3), (k + 1) * (k + 1));
    for (int N = 0; N <= 30; ++N) EXPECT_EQ(polynomial_space_dim(N, ctx3), (N + 1) * (N + 2) * (2 * N + 3) / 6);
    // S^5(C) = real S^5: dim H_k = (k+1)(k+2)^2(k+3)/12
    auto c5 = SphereContext::make(5);
    for (int k = 0; k <= 20; ++k) EXPECT_EQ(eigenspace_dim(k, c5), (k + 1) * (k + 2) * (k + 2) * (k + 3) / 12);
}

TEST(Dims, NumericalRankOracle) {
    RandomSource rng(3);
    for (int k = 1; k <= 8; ++k) {
        auto upto = [&](int K) {
            return restricted_rank(2, rng.derive(K), [&](int a1, int a2, int b1, int b2) { return a1 + a2 + b1 + b2 <= K; });
        };
        EXPECT_EQ(upto(k) - upto(k - 1), eigenspace_dim(k, ctx3)) << k;
    }
    for (auto [p, q] : std::vector<std::pair<int, int>>{{1, 0}, {2, 1}, {3, 0}, {2, 2}}) {
        auto bi = [&](int P, int Q) {
            if (P < 0 || Q < 0) return 0;
            return restricted_rank(2, rng.derive(100 + P), [&](int a1, int a2, int b1, int b2) {
                return a1 + a2 == P && b1 + b2 == Q;
            });
        };
        EXPECT_EQ(bi(p, q) - bi(p - 1, q - 1), bidegree_dim(p, q, ctx3)) << p << "," << q;
    }
}

TEST(Geometry, SphereRuleMoments) {
    auto rule = build_sphere_rule(ctx3, 12);
    EXPECT_FALSE(rule.monte_carlo);
    auto integrate = [&](auto f) {
        std::vector<cplx> v(rule.count());
        for (std::size_t i = 0; i < rule.count(); ++i) v[i] = rule.weights[i] * f(rule.coords[2 * i], rule.coords[2 * i + 1]);
        return pairwise_sum(v);
    };
    EXPECT_NEAR(std::abs(integrate([](cplx, cplx) { return cplx(1.0); }) - 1.0), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(integrate([](cplx a, cplx b) { return a * std::conj(b); })), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(integrate([](cplx a, cplx) { return cplx(std::norm(a)); }) - 0.5), 0.0, 1e-14);
    // Dirichlet moments: E|z1|^{2a}|z2|^{2b} = a! b! / (a+b+1)!
    RandomSource rng(11);
    for (int t = 0; t < 50; ++t) {
        int a1 = rng.below(4), a2 = rng.below(4), b1 = rng.below(4), b2 = rng.below(4);
        if (a1 + a2 + b1 + b2 > 12) continue;
        const double exact = (a1 == b1 && a2 == b2)
                                 ? std::tgamma(a1 + 1.0) * std::tgamma(a2 + 1.0) / std::tgamma(a1 + a2 + 2.0)
                                 : 0.0;
        auto v = integrate([&](cplx x, cplx y) {
            return std::pow(x, a1) * std::pow(y, a2) * std::pow(std::conj(x), b1) * std::pow(std::conj(y), b2);
        });
        EXPECT_NEAR(std::abs(v - exact), 0.0, 1e-10);
    }
}

TEST(Geometry, MonteCarloFallbackIsFlagged) {
    auto rule = build_sphere_rule(SphereContext::make(5), 8, 1000);
    EXPECT_TRUE(rule.monte_carlo);
    EXPECT_EQ(rule.exact_degree, 0);
}

TEST(Basis, LevelZeroIsConstant) {
    auto rule = build_sphere_rule(ctx3, 0);
    auto lv = build_orthonormal_basis(0, ctx3, rule);
    ASSERT_EQ(lv.size(), 1u);
    EXPECT_NEAR(std::abs(lv[0].eval(0.6, cplx(0, 0.8)) - 1.0), 0.0, 1e-14);
}

TEST(Basis, GramIsIdentity) {
    const int N = 8;
    auto basis = build_basis(ctx3, N);
    // independent check on a finer rule
    auto rule = build_sphere_rule(ctx3, 2 * N + 4);
    const std::size_t dim = polynomial_space_dim(N, ctx3);
    Eigen::MatrixXcd V(rule.count(), dim);
    std::size_t col = 0;
    for (int k = 0; k <= N; ++k)
        for (const auto& h : basis.level(k)) {
            for (std::size_t i = 0; i < rule.count(); ++i)
                V(i, col) = std::sqrt(rule.weights[i]) * h.eval(rule.coords[2 * i], rule.coords[2 * i + 1]);
            ++col;
        }
    Eigen::MatrixXcd Gm = V.adjoint() * V;
    EXPECT_LT((Gm - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Basis, ClassFunctionIsJacobi) {
    // weight (m1,m2), degree k: radial part is P_j^{(|m2|,|m1|)}(2s-1) up to scale
    auto basis = build_basis(ctx3, 10);
    for (const auto& h : basis.level(10)) {
        if (h.j < 2) continue;
        const double s0 = 0.3, s1 = 0.71;
        auto poly = [&](double s) { return h.radial(s, 1 - s) / (std::pow(s, 0.5 * std::abs(h.m1)) * std::pow(1 - s, 0.5 * std::abs(h.m2))); };
        const JacobiParams prm{double(std::abs(h.m2)), double(std::abs(h.m1))};
        const double r0 = poly(s0) / jacobi_eval(h.j, prm, 2 * s0 - 1), r1 = poly(s1) / jacobi_eval(h.j, prm, 2 * s1 - 1);
        EXPECT_NEAR(r0 / r1, 1.0, 1e-9);
    }
}

TEST(Basis, AdditionFormula) {
    const int N = 20;
    auto basis = build_basis(ctx3, N);
    auto pts = sample_complex_sphere(2, 100, RandomSource(5));
    for (int k = 0; k <= N; ++k)
        for (const auto& x : pts) {
            double s = 0.0;
            for (auto v : basis.eval_level(k, x)) s += std::norm(v);
            EXPECT_LT(std::abs(s / eigenspace_dim(k, ctx3) - 1.0), 1e-8) << k;
        }
}

TEST(Spectral, AnalyzeUnitAndConstant) {
    const int N = 5;
    auto basis = build_basis(ctx3, N);
    auto rule = build_sphere_rule(ctx3, 2 * N);
    std::vector<cplx> one(rule.count(), 1.0);
    auto c = analyze(one, N, basis, rule, 0);
    EXPECT_TRUE(c.warnings.empty());
    EXPECT_NEAR(std::abs(c.levels[0][0] - 1.0), 0.0, 1e-12);
    for (int k = 1; k <= N; ++k)
        for (auto v : c.levels[k]) EXPECT_LT(std::abs(v), 1e-12);
    const auto& h = basis.level(3)[5];
    std::vector<cplx> y(rule.count());
    for (std::size_t i = 0; i < rule.count(); ++i) y[i] = h.eval(rule.coords[2 * i], rule.coords[2 * i + 1]);
    auto cy = analyze(y, N, basis, rule, 3);
    for (int k = 0; k <= N; ++k)
        for (std::size_t m = 0; m < cy.levels[k].size(); ++m)
            EXPECT_NEAR(std::abs(cy.levels[k][m] - ((k == 3 && m == 5) ? 1.0 : 0.0)), 0.0, 1e-10);
}

TEST(Spectral, UnderResolvedIsFlagged) {
    auto basis = build_basis(ctx3, 6);
    auto rule = build_sphere_rule(ctx3, 8);
    std::vector<cplx> v(rule.count(), 1.0);
    EXPECT_FALSE(analyze(v, 6, basis, rule, 6).warnings.empty());
}

TEST(Spectral, RoundtripAndParseval) {
    const int N = 8;
    auto basis = build_basis(ctx3, N);
    auto rule = build_sphere_rule(ctx3, 2 * N);
    auto f = random_function(N, RandomSource(9));
    auto vals = synthesize_on_rule(f, basis, rule);
    auto g = analyze(vals, N, basis, rule);
    double err = 0.0;
    for (int k = 0; k <= N; ++k)
        for (std::size_t m = 0; m < f.levels[k].size(); ++m) err = std::max(err, std::abs(f.levels[k][m] - g.levels[k][m]));
    EXPECT_LT(err, 1e-10);
    EXPECT_NEAR(discrete_lp_norm(vals, rule.weights, 2.0), f.l2_norm(), 1e-10 * f.l2_norm());
    // fast synthesis agrees with pointwise evaluation
    for (std::size_t i = 0; i < rule.count(); i += 331)
        EXPECT_LT(std::abs(vals[i] - evaluate_at(f, basis, rule.node(i))), 1e-11);
    // Parseval on a degree-6 polynomial given by values
    auto f6 = random_function(6, RandomSource(10));
    auto v6 = synthesize_on_rule(f6, basis, rule);
    auto c6 = analyze(v6, 6, basis, build_sphere_rule(ctx3, 2 * N));
    EXPECT_NEAR(c6.l2_norm(), discrete_lp_norm(v6, rule.weights, 2.0), 1e-10);
}

TEST(Spectral, SingleCoefficientSynthesis) {
    auto basis = build_basis(ctx3, 2);
    auto f = SpectralFunction::zeros(ctx3, 2);
    f.levels[0][0] = 1.0;
    auto pts = sample_complex_sphere(2, 10, RandomSource(1));
    for (auto v : synthesize(f, basis, pts)) EXPECT_NEAR(std::abs(v - 1.0), 0.0, 1e-14);
}

TEST(Spectral, FractionalCalculus) {
    auto f = random_function(10, RandomSource(4));
    EXPECT_THROW(fractional_derivative(f, 0.0), domain_error);
    EXPECT_THROW(fractional_integral(f, -1.0), domain_error);
    auto back = fractional_derivative(fractional_integral(f, 1.3, 0.0), 1.3);
    EXPECT_EQ(back.levels[0][0], cplx(0.0));
    for (int k = 1; k <= 10; ++k)
        for (std::size_t m = 0; m < f.levels[k].size(); ++m)
            EXPECT_NEAR(std::abs(back.levels[k][m] - f.levels[k][m]), 0.0, 1e-13 * std::abs(f.levels[k][m]) + 1e-300);
    auto one = SpectralFunction::zeros(ctx3, 1);
    one.levels[1][2] = 1.0;
    EXPECT_NEAR(fractional_derivative(one, 2.0).levels[1][2].real(), 3.0, 1e-14);
    auto a = fractional_derivative(fractional_derivative(f, 0.5), 1.5), b = fractional_derivative(f, 2.0);
    for (int k = 1; k <= 10; ++k)
        for (std::size_t m = 0; m < f.levels[k].size(); ++m)
            EXPECT_NEAR(std::abs(a.levels[k][m] - b.levels[k][m]), 0.0, 1e-12 * std::abs(b.levels[k][m]));
    auto I = fractional_integral(f, 2.0, 7.0);
    EXPECT_EQ(I.levels[0][0], cplx(7.0));
    for (int k = 1; k <= 10; ++k)
        EXPECT_NEAR(I.level_energy(k), f.level_energy(k) * std::pow(eigenvalue(k, ctx3), -2.0), 1e-12 * f.level_energy(k));
}

TEST(Spectral, JsonRoundtrip) {
    auto f = random_function(4, RandomSource(2));
    auto j = to_json(f);
    EXPECT_EQ(j["levels"][3]["coeffs"].size(), 16u);
    auto g = spectral_from_json(nlohmann::json::parse(j.dump()));
    for (int k = 0; k <= 4; ++k) EXPECT_EQ(f.levels[k], g.levels[k]);
}
