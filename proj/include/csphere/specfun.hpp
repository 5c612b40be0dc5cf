#pragma once

// Scalar special functions: Jacobi and disk polynomials, Cesaro numbers,
// the smoothing functions chi_s, forward differences and ball volumes.

#include <boost/rational.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "csphere/errors.hpp"

namespace csphere {

struct JacobiParams {
    double alpha = 0.0;
    double beta = 0.0;

    void validate() const {
        require(alpha > -1.0 && beta > -1.0, "Jacobi parameters must exceed -1");
    }
};

namespace detail {

// One step of the three-term recurrence: returns P_n given P_{n-1}, P_{n-2}.
inline double jacobi_step(int n, double a, double b, double x, double p1, double p2) {
    const double c = 2.0 * n + a + b;
    const double a1 = 2.0 * n * (n + a + b) * (c - 2.0);
    const double a2 = (c - 1.0) * (a * a - b * b);
    const double a3 = (c - 2.0) * (c - 1.0) * c;
    const double a4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * c;
    return ((a2 + a3 * x) * p1 - a4 * p2) / a1;
}

} // namespace detail

// P_n^{(a,b)}(x) with P_n(1) = binom(n+a, n).
inline double jacobi_eval(int n, const JacobiParams& prm, double x) {
    prm.validate();
    require(n >= 0, "Jacobi degree must be non-negative");
    require(std::abs(x) <= 1.0 + 1e-12, "Jacobi argument outside [-1,1]");
    const double a = prm.alpha, b = prm.beta;
    if (n == 0) return 1.0;
    double p2 = 1.0;
    double p1 = 0.5 * (a - b + (a + b + 2.0) * x);
    for (int k = 2; k <= n; ++k) {
        const double p = detail::jacobi_step(k, a, b, x, p1, p2);
        p2 = p1;
        p1 = p;
    }
    return p1;
}

// Values P_0..P_n at x.
inline std::vector<double> jacobi_sequence(int n, const JacobiParams& prm, double x) {
    prm.validate();
    std::vector<double> out(static_cast<std::size_t>(n) + 1);
    out[0] = 1.0;
    if (n >= 1) out[1] = 0.5 * (prm.alpha - prm.beta + (prm.alpha + prm.beta + 2.0) * x);
    for (int k = 2; k <= n; ++k)
        out[k] = detail::jacobi_step(k, prm.alpha, prm.beta, x, out[k - 1], out[k - 2]);
    return out;
}

inline double log_binomial(double top, double k) {
    return std::lgamma(top + 1.0) - std::lgamma(k + 1.0) - std::lgamma(top - k + 1.0);
}

// R_{p,q}^{(alpha)}(z), normalized to R(1) = 1.
inline std::complex<double> disk_poly_eval(int p, int q, double alpha, std::complex<double> z) {
    require(p >= 0 && q >= 0, "disk polynomial degrees must be non-negative");
    double r = std::abs(z);
    require(r <= 1.0 + 1e-12, "disk polynomial argument outside the closed unit disk");
    if (r > 1.0) {
        z /= r;
        r = 1.0;
    }
    const int j = std::abs(p - q);
    const int l = std::min(p, q);
    const JacobiParams prm{alpha, static_cast<double>(j)};
    double radial = 1.0;
    if (l > 0) {
        const double u = 2.0 * r * r - 1.0;
        radial = jacobi_eval(l, prm, u) / std::exp(log_binomial(l + alpha, l));
    }
    // z^{p-q} for p >= q, conj(z)^{q-p} otherwise.
    std::complex<double> ang = 1.0;
    const std::complex<double> base = (p >= q) ? z : std::conj(z);
    for (int i = 0; i < j; ++i) ang *= base;
    return ang * radial;
}

inline double log_cesaro_number(int n, double delta) {
    require(n >= 0 && delta >= 0.0, "Cesaro number needs n >= 0 and delta >= 0");
    return std::lgamma(n + delta + 1.0) - std::lgamma(delta + 1.0) - std::lgamma(n + 1.0);
}

// C_n^delta = Gamma(n+delta+1) / (Gamma(delta+1) Gamma(n+1)).
// Integer delta uses the finite product binom(n+delta, delta), which is
// exact to rounding; other delta go through log-gamma.
inline double cesaro_number(int n, double delta) {
    require(n >= 0 && delta >= 0.0, "Cesaro number needs n >= 0 and delta >= 0");
    if (delta == std::floor(delta) && delta <= 64.0) {
        double v = 1.0;
        const int dl = static_cast<int>(delta);
        for (int i = 1; i <= dl; ++i) v = v * (n + i) / i;
        if (std::isfinite(v)) return v;
    }
    return std::exp(log_cesaro_number(n, delta));
}

// Piecewise polynomial chi_0..chi_d on t >= 0. In the variable
// x = 2d(1 - t) the breakpoints are the integers 0..s, and chi_s
// is a fixed polynomial in y = x - i on every [i, i+1].
class ChiFunction {
public:
    using Rational = boost::rational<std::int64_t>;

    explicit ChiFunction(int d) : d_(d) {
        require(d >= 3 && d % 2 == 1, "chi_smooth needs odd d >= 3");
        if (d <= 15) {
            build<Rational>(exact_);
            for (const auto& lvl : exact_) {
                auto& dl = pieces_.emplace_back();
                for (const auto& pc : lvl) {
                    auto& dp = dl.emplace_back();
                    for (const auto& c : pc) dp.push_back(boost::rational_cast<double>(c));
                }
            }
        } else {
            build<double>(pieces_);
        }
    }

    int d() const { return d_; }
    bool exact() const { return !exact_.empty(); }
    double breakpoint(int s) const { return 1.0 - s / (2.0 * d_); }

    // Piece i of level s as coefficients in y (ascending powers).
    const std::vector<double>& piece(int s, int i) const { return pieces_.at(s).at(i); }
    const std::vector<Rational>& exact_piece(int s, int i) const { return exact_.at(s).at(i); }

    double eval(int s, double t, int deriv = 0) const {
        require(s >= 0 && s <= d_, "chi level must lie in 0..d");
        require(t >= 0.0, "chi argument must be non-negative");
        require(deriv >= 0, "derivative order must be non-negative");
        const double x = 2.0 * d_ * (1.0 - t);
        if (x < 0.0) return 0.0;
        if (x >= s) return deriv == 0 ? 1.0 : 0.0;
        const int i = std::min(static_cast<int>(std::floor(x)), s - 1);
        const double y = x - i;
        const auto& c = pieces_[s][i];
        // d/dt = -2d d/dy
        double acc = 0.0;
        for (int j = static_cast<int>(c.size()) - 1; j >= deriv; --j) {
            double fall = 1.0;
            for (int r = 0; r < deriv; ++r) fall *= (j - r);
            acc = acc * y + fall * c[j];
        }
        return acc * std::pow(-2.0 * d_, deriv);
    }

private:
    template <class T>
    static std::vector<T> antiderivative(const std::vector<T>& p) {
        std::vector<T> out(p.size() + 1, T(0));
        for (std::size_t j = 0; j < p.size(); ++j) out[j + 1] = p[j] / T(static_cast<std::int64_t>(j + 1));
        return out;
    }

    template <class T>
    void build(std::vector<std::vector<std::vector<T>>>& levels) {
        levels.clear();
        levels.emplace_back(); // level 0: no interior pieces, 1 for x >= 0
        for (int s = 1; s <= d_; ++s) {
            const auto& prev = levels[s - 1];
            auto lower = [&](int i) -> std::vector<T> {
                if (i < 0) return {T(0)};
                if (i >= s - 1) return {T(1)};
                return prev[i];
            };
            std::vector<std::vector<T>> cur;
            for (int i = 0; i < s; ++i) {
                // int_{x-1}^{x} = int_y^1 P_{i-1} + int_0^y P_i
                auto a = antiderivative(lower(i - 1));
                auto b = antiderivative(lower(i));
                T total(0);
                for (const auto& c : a) total += c;
                std::vector<T> q(std::max(a.size(), b.size()), T(0));
                for (std::size_t j = 0; j < a.size(); ++j) q[j] -= a[j];
                for (std::size_t j = 0; j < b.size(); ++j) q[j] += b[j];
                q[0] += total;
                cur.push_back(std::move(q));
            }
            levels.push_back(std::move(cur));
        }
    }

    int d_;
    std::vector<std::vector<std::vector<Rational>>> exact_;
    std::vector<std::vector<std::vector<double>>> pieces_;
};

inline ChiFunction chi_smooth(int d) { return ChiFunction(d); }

inline double chi_eval(const ChiFunction& f, int s, double t) { return f.eval(s, t); }

// Delta^s lambda_k with Delta lambda_k = lambda_k - lambda_{k+1}.
template <class T>
T finite_difference_t(std::span<const T> lambda, int order, int k) {
    require(order >= 0, "difference order must be non-negative");
    require(k >= 0 && static_cast<std::size_t>(k) + order < lambda.size(),
            "finite difference index out of range");
    T acc = 0;
    T binom = 1;
    for (int j = 0; j <= order; ++j) {
        acc += ((j % 2) ? -binom : binom) * lambda[k + j];
        binom = binom * (order - j) / (j + 1);
    }
    return acc;
}

inline double finite_difference(std::span<const double> lambda, int order, int k) {
    return finite_difference_t<double>(lambda, order, k);
}

inline double log_ball_volume(int n) {
    require(n >= 0, "ball dimension must be non-negative");
    if (n == 0) return 0.0;
    return 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0);
}

inline double ball_volume(int n) { return std::exp(log_ball_volume(n)); }

// r_{l,s,n} = (Gamma(n/2+1) / (Gamma(s/2+1) Gamma(l/2+1)))^{1/l}.
inline double volume_ratio(int l, int s, int n) {
    require(l >= 1 && s >= 0, "volume_ratio needs l >= 1, s >= 0");
    require(l + s == n, "volume_ratio needs l + s = n");
    const double lg = std::lgamma(0.5 * n + 1.0) - std::lgamma(0.5 * s + 1.0) - std::lgamma(0.5 * l + 1.0);
    return std::exp(lg / l);
}

} // namespace csphere
