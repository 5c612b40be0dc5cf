#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "csphere/geometry.hpp"
#include "csphere/specfun.hpp"

using namespace csphere;

namespace {

// Independent Legendre evaluation by the explicit sum
// P_n(x) = 2^{-n} sum_k binom(n,k)^2 (x-1)^{n-k} (x+1)^k.
double legendre_sum(int n, double x) {
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double b = std::exp(log_binomial(n, k));
        s += b * b * std::pow(x - 1.0, n - k) * std::pow(x + 1.0, k);
    }
    return s / std::pow(2.0, n);
}

// Closed forms of P_1..P_3 for general (a,b).
double jacobi_closed(int n, double a, double b, double x) {
    const double y = x - 1.0, z = x + 1.0;
    auto B = [](double t, int k) { return std::exp(log_binomial(t, k)); };
    // P_n = sum_s binom(n+a, n-s) binom(n+b, s) (y/2)^s (z/2)^{n-s}
    double acc = 0.0;
    for (int s = 0; s <= n; ++s) acc += B(n + a, n - s) * B(n + b, s) * std::pow(y / 2, s) * std::pow(z / 2, n - s);
    return acc;
}

} // namespace

TEST(Jacobi, DegreeZeroIsOne) {
    EXPECT_EQ(jacobi_eval(0, {0.3, 1.7}, 0.2), 1.0);
}

TEST(Jacobi, LegendreValues) {
    EXPECT_NEAR(jacobi_eval(2, {0, 0}, 1.0), 1.0, 1e-15);
    EXPECT_NEAR(jacobi_eval(2, {0, 0}, 0.0), -0.5, 1e-15);
    for (double x : {-0.9, -0.3, 0.1, 0.77})
        for (int n = 0; n <= 12; ++n) EXPECT_NEAR(jacobi_eval(n, {0, 0}, x), legendre_sum(n, x), 1e-11);
}

TEST(Jacobi, MatchesClosedFormsLowDegree) {
    RandomSource rng(7);
    for (int t = 0; t < 20; ++t) {
        const double x = 2 * rng.uniform() - 1, a = 3 * rng.uniform() - 0.5, b = 3 * rng.uniform() - 0.5;
        for (int n = 1; n <= 3; ++n) EXPECT_NEAR(jacobi_eval(n, {a, b}, x), jacobi_closed(n, a, b, x), 1e-12);
    }
}

TEST(Jacobi, NormalizationAtOne) {
    for (int n = 0; n < 15; ++n)
        EXPECT_NEAR(jacobi_eval(n, {1.5, 0.5}, 1.0), std::exp(log_binomial(n + 1.5, n)), 1e-9);
}

TEST(Jacobi, DomainErrors) {
    EXPECT_THROW(jacobi_eval(2, {-1.0, 0}, 0.0), domain_error);
    EXPECT_THROW(jacobi_eval(2, {0, 0}, 1.5), domain_error);
}

TEST(DiskPoly, SimpleValues) {
    const cplx z(0.3, -0.4);
    EXPECT_NEAR(std::abs(disk_poly_eval(0, 0, 0.0, z) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(disk_poly_eval(1, 0, 0.0, z) - z), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(disk_poly_eval(0, 1, 0.0, z) - std::conj(z)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(disk_poly_eval(1, 1, 0.0, 0.0) - (-1.0)), 0.0, 1e-15);
    for (int p = 0; p < 5; ++p)
        for (int q = 0; q < 5; ++q) EXPECT_NEAR(std::abs(disk_poly_eval(p, q, 1.0, 1.0) - 1.0), 0.0, 1e-12);
    EXPECT_THROW(disk_poly_eval(1, 1, 0.0, cplx(1.1, 0)), domain_error);
}

// Gram-Schmidt of {1, z, |z|^2} under the alpha=0 disk measure, by polar
// integrals done in closed form: <|z|^{2a}, 1> = 1/(a+1).
TEST(DiskPoly, GramSchmidtOracle) {
    // z is orthogonal to 1 by rotation, so the degree-(1,0) element is z itself.
    const cplx z(0.2, 0.5);
    EXPECT_NEAR(std::abs(disk_poly_eval(1, 0, 0.0, z) - z), 0.0, 1e-15);
    // |z|^2 - <|z|^2,1> = |z|^2 - 1/2, scaled so the value at 1 is 1: 2|z|^2 - 1.
    for (double r : {0.0, 0.3, 0.8}) EXPECT_NEAR(disk_poly_eval(1, 1, 0.0, r).real(), 2 * r * r - 1, 1e-14);
}

TEST(DiskPoly, OrthogonalityUnderDiskRule) {
    for (int d : {3, 5, 7}) {
        auto ctx = SphereContext::make(d);
        auto rule = build_disk_rule(ctx, 16);
        for (int p = 0; p <= 4; ++p)
            for (int q = 0; q + p <= 8 && q <= 4; ++q)
                for (int p2 = 0; p2 <= 4; ++p2)
                    for (int q2 = 0; q2 <= 4; ++q2) {
                        if (p == p2 && q == q2) continue;
                        auto v = zonal_integral(
                            [&](cplx w) {
                                return disk_poly_eval(p, q, ctx.alpha, w) * std::conj(disk_poly_eval(p2, q2, ctx.alpha, w));
                            },
                            ctx, rule);
                        EXPECT_LT(std::abs(v), 1e-10) << p << q << p2 << q2;
                    }
    }
}

TEST(Cesaro, Values) {
    EXPECT_NEAR(cesaro_number(5, 0), 1.0, 1e-15);
    EXPECT_NEAR(cesaro_number(3, 1), 4.0, 1e-13);
    EXPECT_NEAR(cesaro_number(10, 2), 66.0, 1e-12);
    EXPECT_NEAR(cesaro_number(10, 2.5), std::exp(log_cesaro_number(10, 2.5)), 1e-12);
    EXPECT_NEAR(std::exp(log_cesaro_number(3, 1)), 4.0, 1e-12);
}

TEST(Cesaro, Asymptotics) {
    for (double delta : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0}) {
        const int n = 10000;
        const double r = cesaro_number(n, delta) / std::pow(n, delta);
        EXPECT_LT(std::abs(r * std::tgamma(delta + 1.0) - 1.0), 0.01) << delta;
    }
}

TEST(Chi, PaperValues) {
    auto chi = chi_smooth(3);
    EXPECT_TRUE(chi.exact());
    EXPECT_EQ(chi_eval(chi, 0, 0.5), 1.0);
    EXPECT_EQ(chi_eval(chi, 3, 0.3), 1.0);
    EXPECT_NEAR(chi_eval(chi, 3, 11.0 / 12.0), 1.0 / 48.0, 1e-15);
    EXPECT_THROW(chi_eval(chi, 4, 0.2), domain_error);
    // exact rational coefficients at the last piece: (2d)^d/d! y^d/(2d)^d = y^3/6
    const auto& pc = chi.exact_piece(3, 0);
    ASSERT_EQ(pc.size(), 4u);
    EXPECT_EQ(pc[3], ChiFunction::Rational(1, 6));
    EXPECT_EQ(pc[0], ChiFunction::Rational(0));
}

// Numeric d-fold integration of the recursion by the trapezoid rule on a fine grid.
TEST(Chi, MatchesNumericRecursion) {
    const int d = 3;
    const int per = 2000;                 // samples per 1/(2d)
    const double h = 1.0 / (2 * d * per);
    const int len = 2 * d * per + 1;      // t in [0, 1]
    std::vector<double> cur(len + 2 * d * per, 0.0);
    for (int i = 0; i < len; ++i) cur[i] = 1.0;
    cur[len - 1] = 0.5; // jump of the indicator at t = 1
    auto chi = chi_smooth(d);
    for (int s = 1; s <= d; ++s) {
        std::vector<double> nxt(cur.size(), 0.0);
        for (int i = 0; i < len; ++i) {
            double acc = 0.5 * (cur[i] + cur[i + per]);
            for (int j = 1; j < per; ++j) acc += cur[i + j];
            nxt[i] = 2.0 * d * acc * h;
        }
        cur = nxt;
        for (int i = 0; i < len; i += 97) {
            const double t = i * h;
            EXPECT_NEAR(cur[i], chi_eval(chi, s, t), 1e-6) << s << " " << t;
        }
    }
}

TEST(Chi, InvariantsAllD) {
    for (int d : {3, 5, 7, 9, 17}) {
        auto chi = chi_smooth(d);
        const double fact = std::tgamma(d + 1.0);
        for (int i = 0; i <= 50; ++i) EXPECT_EQ(chi_eval(chi, d, 0.5 * i / 50), 1.0);
        for (double t : {1.0, 1.2, 3.0}) EXPECT_EQ(chi_eval(chi, d, t), 0.0);
        for (int i = 0; i <= 50; ++i) {
            const double t = 1.0 - (1.0 / (2 * d)) * i / 50.0;
            const double closed = std::pow(2.0 * d, d) / fact * std::pow(1.0 - t, d);
            EXPECT_NEAR(chi_eval(chi, d, t), closed, 1e-12) << d << " " << t;
        }
        // derivatives of order <= d-1 continuous across the breakpoints:
        // compare one-sided limits of adjacent pieces (in the local variable y)
        auto dpoly = [](std::vector<double> c, int r, double y) {
            for (int k = 0; k < r; ++k) {
                std::vector<double> e;
                for (std::size_t j = 1; j < c.size(); ++j) e.push_back(c[j] * double(j));
                c = e.empty() ? std::vector<double>{0.0} : e;
            }
            double acc = 0.0;
            for (int j = int(c.size()) - 1; j >= 0; --j) acc = acc * y + c[j];
            return acc;
        };
        for (int i = 0; i <= d; ++i) {
            for (int r = 0; r <= d - 1; ++r) {
                const double left = (i == 0) ? 0.0 : dpoly(chi.piece(d, i - 1), r, 1.0);
                const double right = (i == d) ? (r == 0 ? 1.0 : 0.0) : dpoly(chi.piece(d, i), r, 0.0);
                EXPECT_LT(std::abs(left - right), 1e-8) << d << " i=" << i << " r=" << r;
            }
        }
    }
}

TEST(FiniteDifference, Basics) {
    std::vector<double> c(10, 3.0), lin(10);
    for (int k = 0; k < 10; ++k) lin[k] = k;
    for (int s = 1; s < 5; ++s) EXPECT_EQ(finite_difference(c, s, 2), 0.0);
    EXPECT_EQ(finite_difference(lin, 1, 3), -1.0);
    EXPECT_EQ(finite_difference(lin, 0, 3), 3.0);
    EXPECT_THROW(finite_difference(lin, 3, 7), domain_error);
}

TEST(FiniteDifference, FractionalSequenceSlope) {
    const int d = 3;
    const double gamma = 2.0;
    const int s = (d + 3) / 2;
    // over k in [20,200] the finite-size slope is about -4.82; the asymptotic
    // rate is reached further out
    std::vector<double> lam(2100);
    for (int k = 1; k < 2100; ++k) lam[k] = std::pow(double(k) * (k + d - 1), -gamma / 2);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int k = 200; k <= 2000; k += 10) {
        const double x = std::log(k), y = std::log(std::abs(finite_difference(lam, s, k)));
        sx += x, sy += y, sxx += x * x, sxy += x * y, ++cnt;
    }
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    EXPECT_NEAR(slope, -gamma - s, 0.1);
}

TEST(Ball, VolumesAndRatios) {
    EXPECT_EQ(ball_volume(0), 1.0);
    EXPECT_NEAR(ball_volume(1), 2.0, 1e-14);
    EXPECT_NEAR(ball_volume(2), std::numbers::pi, 1e-14);
    EXPECT_NEAR(ball_volume(3), 4 * std::numbers::pi / 3, 1e-14);
    EXPECT_NEAR(volume_ratio(7, 0, 7), 1.0, 1e-14);
    EXPECT_NEAR(volume_ratio(2, 2, 4), std::sqrt(2.0), 1e-14);
    EXPECT_THROW(volume_ratio(2, 2, 5), domain_error);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int n = 50; n <= 500; n += 10) {
        const int l = (n + 1) / 2;
        const double x = std::log(n), y = std::log(volume_ratio(l, n - l, n));
        sx += x, sy += y, sxx += x * x, sxy += x * y, ++cnt;
    }
    EXPECT_NEAR((cnt * sxy - sx * sy) / (cnt * sxx - sx * sx), 0.0, 0.05);
}
