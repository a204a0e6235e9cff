#pragma once

#include <Eigen/Dense>
#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rsparse {

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

// Newton iteration on P_n started from the Chebyshev-like guess.
inline GaussRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = z; p0 = 1; }
            dp = n * (z * p1 - p0) / (z * z - 1);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1, p1 = z;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = (n == 1) ? 1.0 : n * (z * p1 - p0) / (z * z - 1);
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
    }
    return r;
}

inline const GaussRule& gauss_legendre_cached(int n) {
    thread_local std::map<int, GaussRule> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
    return it->second;
}

// Composite Gauss-Legendre over [a, b] with equal panels.
template <class F>
double integrate_gl(F&& f, double a, double b, int panels = 8, int order = 16) {
    const GaussRule& g = gauss_legendre_cached(order);
    const double hp = (b - a) / panels;
    double s = 0;
    for (int p = 0; p < panels; ++p) {
        double c = a + (p + 0.5) * hp;
        for (int k = 0; k < order; ++k) s += g.w[k] * f(c + 0.5 * hp * g.x[k]);
    }
    return s * 0.5 * hp;
}

// Weights c_m such that  int_0^inf y^lam g(y) dy ~ h^(1+lam) sum_{m>=0} c_m g(m h)
// for smooth, decaying g: the plain sum of m^lam is corrected near the origin by the
// generalized Euler-Maclaurin (zeta) terms, with g's Taylor data taken from a q-point stencil.
inline std::vector<double> power_endpoint_weights(double lam, std::size_t count, int q = 8) {
    if (lam <= -1) throw std::invalid_argument("power_endpoint_weights: lambda must exceed -1");
    if (count < static_cast<std::size_t>(q)) throw std::invalid_argument("power_endpoint_weights: too few nodes");
    Eigen::MatrixXd V(q, q);
    Eigen::VectorXd rhs(q);
    for (int j = 0; j < q; ++j) {
        for (int m = 0; m < q; ++m) V(j, m) = (j == 0) ? 1.0 : std::pow(double(m), j);
        rhs(j) = -boost::math::zeta(-lam - j);
    }
    Eigen::VectorXd om = V.fullPivLu().solve(rhs);
    std::vector<double> c(count);
    for (std::size_t m = 0; m < count; ++m) c[m] = (m == 0) ? 0.0 : std::pow(double(m), lam);
    for (int m = 0; m < q; ++m) c[m] += om(m);
    return c;
}

}  // namespace rsparse
