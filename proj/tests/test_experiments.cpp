#include <gtest/gtest.h>

#include <cmath>

#include "csphere/experiments.hpp"
#include "oracles.hpp"

using namespace csphere;

namespace {

const SphereContext c3 = SphereContext::make(3);

Workspace& shared_ws() {
    static Workspace ws;
    return ws;
}

std::vector<double> column(const ExperimentReport& r, const std::string& name) { return r.column(name); }

} // namespace

TEST(GridNorms, MatchZonalDiskRule) {
    const int k = 6;
    const auto& basis = shared_ws().basis(c3, k);
    const auto kappa = projector_kernel(k, c3);
    const auto f = zonal_to_spectral(kappa, generic_pole(c3), basis);
    const GridNorms all(basis, k, {2.0, 4.0, 8.0, infinity});
    const auto v = all(f);
    EXPECT_NEAR(v[0], f.l2_norm(), 1e-12 * f.l2_norm());
    for (std::size_t a = 1; a < 3; ++a) {
        const double p = all.ps()[a];
        const double want = kernel_norm(kappa, p);
        EXPECT_NEAR(v[a], want, 1e-10 * want) << p;
        EXPECT_NEAR(lp_norm(f, basis, p), v[a], 1e-12 * want) << p;
    }
    // the sup grid contains no node at the pole, so it only bounds from below
    EXPECT_LE(v[3], kernel_norm(kappa, infinity) * (1 + 1e-12));
    EXPECT_GE(v[3], 0.9 * kernel_norm(kappa, infinity));
    EXPECT_EQ(abs_pow(cplx(3, 4), 4.0), 625.0);
    EXPECT_NEAR(abs_pow(cplx(3, 4), 3.0), 125.0, 1e-12);
    EXPECT_NEAR(abs_pow(cplx(3, 4), 1.0), 5.0, 1e-15);
}

TEST(Helpers, ApplyPowerAndTail) {
    const auto g = band_kernel(1, 4, c3);
    const auto h = apply_power(g, 2.0);
    EXPECT_DOUBLE_EQ(h.multiplier(0), 0.0);
    for (int k = 1; k <= 4; ++k) EXPECT_NEAR(h.multiplier(k), eigenvalue(k, c3), 1e-12);
    const auto t = zonal_tail(g, 2);
    EXPECT_EQ(t.multiplier(2), 0.0);
    EXPECT_EQ(t.multiplier(3), 1.0);
    EXPECT_NEAR(zonal_l2(g), std::sqrt(4.0 + 9.0 + 16.0 + 25.0), 1e-13);
    EXPECT_EQ(reciprocal(infinity), 0.0);
}

TEST(Bernstein, SingleHarmonicRatioIsMultiplier) {
    // t = M_k, p = q: ratio = theta_k^{gamma/2}
    for (int k : {1, 3, 6})
        for (double p : {1.0, 2.0, 4.0}) {
            const auto g = band_kernel(k, k, c3);
            const double ratio = zonal_norm(apply_power(g, 2.0), p) / zonal_norm(g, p);
            EXPECT_NEAR(ratio, eigenvalue(k, c3), 1e-9 * eigenvalue(k, c3));
        }
}

TEST(Bernstein, ShapeAndSlope) {
    BernsteinParams p;
    p.N_list = {4, 8, 12, 16};
    p.trials = 3;
    const auto r = run_bernstein(c3, p, RandomSource(1), shared_ws());
    EXPECT_EQ(r.rows.size(), p.N_list.size() * p.trials);
    const auto& s = r.slope("max_ratio");
    EXPECT_TRUE(s.pass);
    EXPECT_LE(s.fit.slope, 2.0 + 0.15);
    // the ratio never exceeds theta_N^{gamma/2} for p = q = 2
    const auto N = column(r, "N"), m = column(r, "max_ratio");
    for (std::size_t i = 0; i < N.size(); ++i) EXPECT_LE(m[i], N[i] * (N[i] + 2) * (1 + 1e-9));
}

TEST(Bernstein, RejectsBadIndices) {
    BernsteinParams p;
    p.p = 0.5;
    EXPECT_THROW(run_bernstein(c3, p, RandomSource(1), shared_ws()), domain_error);
}

TEST(Nikolskii, EqualIndicesNeverViolate) {
    NikolskiiParams p;
    p.p_list = {1.0, 2.0, 4.0};
    p.q_list = p.p_list;
    p.max_degree = 6;
    p.trials = 60;
    const auto r = run_nikolskii(c3, p, RandomSource(2), shared_ws());
    const auto pc = column(r, "p"), qc = column(r, "q"), ratio = column(r, "ratio");
    for (std::size_t i = 0; i < pc.size(); ++i)
        if (pc[i] == qc[i]) EXPECT_NEAR(ratio[i], 1.0, 1e-12);
}

TEST(Nikolskii, ProvenRangeHasNoViolations) {
    // p <= 2 follows from the reproducing kernel bound and Riesz-Thorin
    NikolskiiParams p;
    p.p_list = {1.0, 2.0};
    p.q_list = {1.0, 2.0, 4.0, infinity};
    p.max_degree = 8;
    p.trials = 120;
    const auto r = run_nikolskii(c3, p, RandomSource(3), shared_ws());
    EXPECT_EQ(r.check("violations").value, 0.0);
    EXPECT_EQ(r.check("witness_2_inf_deviation").value, 0.0);
}

TEST(Nikolskii, TwoInfinityWitnessIsExact) {
    // ||M_k||_inf = d_k and ||M_k||_2 = sqrt(d_k)
    for (int k = 0; k <= 8; ++k) {
        const auto m = projector_kernel(k, c3);
        const double dk = static_cast<double>(eigenspace_dim(k, c3));
        EXPECT_NEAR(kernel_norm(m, infinity) / zonal_l2(m), std::sqrt(dk), 1e-10 * dk);
    }
}

TEST(Jackson, PolynomialTargetHasZeroError) {
    // f in T_N: the tail beyond N vanishes
    const auto g = zonal_extremal_kernel(6, 2.0, c3, 1);
    EXPECT_EQ(zonal_l2(zonal_tail(apply_power(g, -2.0), 6)), 0.0);
    const auto basis = build_basis(c3, 6);
    const auto s = sobolev_sample(2.0, 6, basis, RandomSource(1), TargetKind::random);
    EXPECT_NEAR(s.g_norm, 1.0, 1e-12);
    EXPECT_EQ(spectral_tail(s.f, 6).l2_norm(), 0.0);
}

TEST(Jackson, ExactTailSlopeP2) {
    const auto r = run_jackson(c3, {}, RandomSource(1), shared_ws());
    const auto& s = r.slope("E_exact[zonal-extremal]");
    EXPECT_NEAR(s.fit.slope, -2.0, 0.15);
    // closed-form tail of the single level 2N: theta_2N^{-1}
    const auto N = column(r, "N"), E = column(r, "E_trunc");
    for (std::size_t i = 0; i < N.size(); ++i) EXPECT_NEAR(E[i], 1.0 / eigenvalue(2 * N[i], c3), 1e-14);
}

TEST(Jackson, ExploratoryRegimeIsFlagged) {
    JacksonParams p;
    p.gamma = 1.0;
    const auto r = run_jackson(c3, p, RandomSource(1), shared_ws());
    bool flagged = false;
    for (const auto& n : r.notes) flagged = flagged || n.find("exploratory") != std::string::npos;
    EXPECT_TRUE(flagged);
}

TEST(Jackson, SupNormProxies) {
    JacksonParams p;
    p.p = infinity;
    p.gamma = 3.0;
    p.N_list = {4, 8, 16, 32};
    const auto r = run_jackson(c3, p, RandomSource(1), shared_ws());
    EXPECT_LE(r.slope("E_K1[zonal-extremal]").fit.slope, -3.0 + 0.2);
    EXPECT_LE(r.slope("E_Q[zonal-extremal]").fit.slope, -3.0 + 0.2);
    const auto et = column(r, "E_trunc"), eb = column(r, "E_best");
    for (std::size_t i = 0; i < et.size(); ++i) EXPECT_LE(eb[i], et[i]);
}

TEST(Kolmogorov, Domain) {
    KolmogorovParams p;
    p.alpha = 3.0;
    p.beta = 2.0;
    EXPECT_THROW(run_kolmogorov(c3, p, RandomSource(1), shared_ws()), domain_error);
}

TEST(Kolmogorov, SingleLevelIsEquality) {
    const auto basis = build_basis(c3, 5);
    auto f = SpectralFunction::zeros(c3, 5);
    RandomSource r(4);
    for (auto& c : f.levels[5]) c = r.complex_normal();
    for (double p : {2.0, 4.0}) {
        const double na = lp_norm(fractional_derivative(f, 1.0), basis, p);
        const double nb = lp_norm(fractional_derivative(f, 2.0), basis, p);
        const double n0 = lp_norm(f, basis, p);
        EXPECT_NEAR(na / (std::sqrt(nb) * std::sqrt(n0)), 1.0, 1e-12);
    }
}

TEST(Kolmogorov, SpectralHolderP2) {
    KolmogorovParams p;
    p.N_list = {4, 6, 8, 10};
    p.trials = 200;
    const auto r = run_kolmogorov(c3, p, RandomSource(5), shared_ws());
    EXPECT_TRUE(r.check("max_ratio_p2").pass);
    EXPECT_TRUE(r.passed());
}

TEST(Cesaro, RegimesAndDomain) {
    CesaroParams p;
    p.delta_list = {0.0, 2.0};
    p.n_list = {8, 16, 32, 64};
    const auto r = run_cesaro_norms(c3, p);
    EXPECT_NEAR(r.slope("delta=0").fit.slope, 1.0, 0.15);
    EXPECT_NEAR(r.slope("delta=2").fit.slope, 0.0, 0.15);
    p.delta_list = {2.5};
    EXPECT_THROW(run_cesaro_norms(c3, p), domain_error);
}

TEST(Cesaro, DeltaZeroIsPartialSum) {
    const auto k = cesaro_kernel(7, 0.0, c3);
    for (int j = 0; j <= 7; ++j) EXPECT_NEAR(k.multiplier(j), 1.0, 1e-14);
    EXPECT_EQ(k.multiplier(8), 0.0);
}

TEST(KernelNorms, QReproducesAndIsBounded) {
    KernelNormParams p;
    p.N_list = {8, 16, 24, 32};
    p.gamma_list = {2.0};
    const auto r = run_kernel_norms(c3, p);
    EXPECT_EQ(r.check("Q_reproduce_err").value, 0.0);
    EXPECT_NEAR(r.slope("Q_norm1").fit.slope, 0.0, 0.1);
    EXPECT_NEAR(r.slope("K_minus_K1_gamma2").fit.slope, -2.0, 0.2);
    p.N_list = {2};
    EXPECT_THROW(run_kernel_norms(c3, p), domain_error);
}

TEST(Levy, P2MeanIsOne) {
    LevyParams p;
    p.p_list = {2.0, 4.0};
    p.omegas = {{1, 2}};
    p.N_list = {};
    p.samples = 40;
    const auto r = run_levy(c3, p, RandomSource(6), shared_ws());
    const auto pc = column(r, "p"), mean = column(r, "mean");
    for (std::size_t i = 0; i < pc.size(); ++i)
        if (pc[i] == 2.0) EXPECT_NEAR(mean[i], 1.0, 1e-12);
    // Jensen: M_4 <= (E ||xi||_4^4)^{1/4} = (n^2 Gamma(n) 2 / Gamma(n+2))^{1/4}
    const double n = 13.0;
    for (std::size_t i = 0; i < pc.size(); ++i)
        if (pc[i] == 4.0) EXPECT_LE(mean[i], std::pow(2.0 * n / (n + 1.0), 0.25) + 1e-12);
    p.p_list = {1.0};
    EXPECT_THROW(run_levy(c3, p, RandomSource(6), shared_ws()), domain_error);
}

TEST(MTerm, StrategiesAgreeForQ2) {
    const auto basis = build_basis(c3, 8);
    const auto f = fractional_integral(zonal_to_spectral(zonal_extremal_kernel(8, 2.0, c3), generic_pole(c3), basis), 2.0);
    const std::vector<int> m{0, 5, 20, 60, 120};
    const auto a = mterm_errors(f, basis, 2.0, m, MTermStrategy::l2_threshold);
    const auto b = mterm_errors(f, basis, 2.0, m, MTermStrategy::greedy_lq);
    EXPECT_EQ(a, b);
    EXPECT_NEAR(a[0], f.l2_norm(), 1e-14);
    EXPECT_THROW(mterm_errors(f, basis, 2.0, {100000}, MTermStrategy::l2_threshold), domain_error);
}

TEST(MTerm, MonotoneForEveryStrategy) {
    const auto basis = build_basis(c3, 5);
    auto f = SpectralFunction::zeros(c3, 5);
    RandomSource r(8);
    for (int k = 1; k <= 5; ++k)
        for (auto& c : f.levels[k]) c = r.complex_normal() / static_cast<double>(k * k);
    const std::vector<int> m{0, 4, 10, 25, 50};
    for (auto s : {MTermStrategy::l2_threshold, MTermStrategy::block_greedy, MTermStrategy::greedy_lq})
        for (double q : {2.0, 4.0}) {
            const auto e = mterm_errors(f, basis, q, m, s, 8);
            for (std::size_t i = 1; i < e.size(); ++i) EXPECT_LE(e[i], e[i - 1] * (1 + 1e-12)) << to_string(s) << " q=" << q;
        }
}

TEST(MTerm, ThresholdMatchesClosedFormOracle) {
    MTermParams p;
    p.dict_degree = 12;
    p.m_list = {10, 20, 50, 100, 200};
    const auto r = run_mterm(c3, p, RandomSource(1), shared_ws());
    const auto m = column(r, "m"), L = column(r, "degree"), nu = column(r, "nu");
    const double s0 = std::norm(generic_pole(c3)[0]);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const int deg = static_cast<int>(L[i]);
        std::vector<double> lam(deg + 1, 0.0);
        const double z = std::sqrt(static_cast<double>(polynomial_space_dim(deg, c3) - 1));
        for (int k = 1; k <= deg; ++k) lam[k] = std::pow(eigenvalue(k, c3), -1.0) / z;
        EXPECT_NEAR(nu[i], oracle::threshold_error_l2(lam, s0, static_cast<int>(m[i])), 1e-9 * lam[1]);
        // the closed-form energies add up as the addition formula says
        double total = 0.0, ref = 0.0;
        for (double e : oracle::zonal_coefficient_energies(lam, s0)) total += e;
        for (int k = 0; k <= deg; ++k) ref += lam[k] * lam[k] * (k + 1.0) * (k + 1.0);
        EXPECT_NEAR(total, ref, 1e-12 * ref);
    }
}

TEST(MTerm, RejectsOversizedBudget) {
    MTermParams p;
    p.dict_degree = 4;
    p.m_list = {10, 1000};
    EXPECT_THROW(run_mterm(c3, p, RandomSource(1), shared_ws()), domain_error);
    EXPECT_THROW(parse_strategy("best"), domain_error);
    EXPECT_EQ(parse_strategy("block-greedy"), MTermStrategy::block_greedy);
}

TEST(SelfTest, AllChecksPass) {
    const auto r = run_selftest(RandomSource(1), shared_ws(), 12, 20);
    EXPECT_TRUE(r.passed());
    EXPECT_EQ(r.rows.size(), r.checks.size());
}
