#pragma once

#include "rsparse/rational.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace rsparse {

struct ExponentContext {
    int d = 2;
    Rational p{1};
    Rational q{2};
    Rational lambda{1, 2};
    Rational a{1};
};

using Point2 = std::pair<Rational, Rational>;

// Corners in the (1/p, 1/q) square.
struct TrapezoidSpec {
    Point2 P1, P2, P3, P4;
};

namespace detail {
inline void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}
inline void require_dim(int d) { require(d >= 2, "dimension must be >= 2"); }
inline Rational conj(const Rational& p) {
    require(p > Rational(1), "conjugate exponent needs p > 1");
    return p / (p - Rational(1));
}
}  // namespace detail

inline Rational conjugate_exponent(const Rational& p) { return detail::conj(p); }

// lambda(p) = d(1/p - 1/2) - 1/2
inline Rational critical_index(const Rational& p, int d) {
    detail::require_dim(d);
    detail::require(p > Rational(0), "critical_index: p must be positive");
    detail::require(p >= Rational(1), "critical_index: p must be >= 1");
    return Rational(d) * (p.reciprocal() - Rational(1, 2)) - Rational(1, 2);
}

// Accepts the closed range [0, (d-1)/2]; both endpoints give finite values.
inline Rational p_lambda(const Rational& lambda, int d) {
    detail::require_dim(d);
    detail::require(lambda >= Rational(0) && lambda <= Rational(d - 1, 2),
                    "p_lambda: lambda outside [0, (d-1)/2]");
    return Rational(2 * d) / (Rational(d + 1) + Rational(2) * lambda);
}

inline TrapezoidSpec trapezoid(const Rational& lambda, int d) {
    detail::require_dim(d);
    detail::require(lambda > Rational(0) && lambda <= Rational(d - 1, 2),
                    "trapezoid: lambda outside (0, (d-1)/2]");
    const Rational dd(d);
    const Rational x = (Rational(2) * lambda + dd + Rational(1)) / (Rational(2) * dd);
    const Rational y1 = (dd - Rational(2) * lambda - Rational(1)) / (Rational(2) * dd);
    const Rational y2 = (dd - Rational(1)) / (Rational(2) * dd) +
                        lambda * (dd + Rational(1)) / (dd * (dd - Rational(1)));
    TrapezoidSpec t;
    t.P1 = {x, y1};
    t.P2 = {x, y2};
    t.P3 = {y2, x};
    t.P4 = {y1, x};
    return t;
}

inline Rational q_opt(const Rational& p, int d) {
    detail::require_dim(d);
    detail::require(p >= Rational(1), "q_opt: p must be >= 1");
    detail::require(p < Rational(2 * d, d + 1), "q_opt: p must be < 2d/(d+1)");
    const Rational den = Rational(d + 1) - Rational(2) * p;
    detail::require(den > Rational(0), "q_opt: d+1-2p must be positive");
    return Rational(d - 1) * p / den;
}

struct RStarQStar {
    Rational r_star;
    Rational q_star;
};

inline RStarQStar r_star_q_star(const Rational& p, const Rational& p0, const Rational& r0, int d) {
    detail::require_dim(d);
    const Rational st = Rational(2 * (d + 1), d + 3);  // Stein-Tomas point
    detail::require(p0 >= st && p0 < Rational(2 * d, d + 1), "r_star_q_star: p0 out of range");
    detail::require(r0 >= p0, "r_star_q_star: r0 < p0");
    detail::require(r0 <= Rational(d - 1, d + 1) * detail::conj(p0),
                    "r_star_q_star: r0 > (d-1)/(d+1) p0'");
    detail::require(p >= Rational(1) && p <= p0, "r_star_q_star: p outside [1, p0]");

    Rational inv_r;
    if (p <= st) {
        inv_r = Rational(d + 1, d - 1) * (Rational(1) - p.reciprocal());
    } else {
        const Rational A = st.reciprocal();
        const Rational num = r0.reciprocal() * (A - p.reciprocal()) +
                             Rational(1, 2) * (p.reciprocal() - p0.reciprocal());
        inv_r = num / (A - p0.reciprocal());
    }
    detail::require(inv_r > Rational(0), "r_star_q_star: degenerate exponent (p = 1)");
    const Rational inv_q = Rational(1) - inv_r;
    detail::require(inv_q > Rational(0), "r_star_q_star: degenerate dual exponent");
    return {inv_r.reciprocal(), inv_q.reciprocal()};
}

inline Rational sigma_threshold(const Rational& lambda, int d) {
    detail::require_dim(d);
    detail::require(lambda > Rational(0), "sigma_threshold: lambda must be positive");
    detail::require(lambda <= Rational(d - 1, 2), "sigma_threshold: lambda > (d-1)/2");
    return Rational(d - 1) * (Rational(d + 1) + Rational(2) * lambda) / (Rational(4 * d) * lambda);
}

inline Rational p1_of_weight(const Rational& sigma, int d) {
    detail::require_dim(d);
    detail::require(sigma > Rational(1), "p1_of_weight: sigma must be > 1");
    return Rational(1) + Rational(d - 1, d + 1) * (Rational(1) - sigma.reciprocal());
}

// sigma = (q'/p)' = q / (q + p - p q); requires q < p'.
inline Rational weight_sigma(const Rational& p, const Rational& q) {
    detail::require(p >= Rational(1) && q > Rational(1), "weight_sigma: need p >= 1, q > 1");
    const Rational den = q + p - p * q;
    detail::require(den > Rational(0), "weight_sigma: q >= p' leaves sigma undefined");
    return q / den;
}

}  // namespace rsparse
