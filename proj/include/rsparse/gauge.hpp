#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsparse {

// Minkowski functional of a centered ball or axis-aligned ellipsoid.
class MinkowskiGauge {
public:
    enum class Kind { ball, ellipsoid };

    static MinkowskiGauge ball(int d) {
        if (d < 1) throw std::invalid_argument("gauge: dimension must be positive");
        return MinkowskiGauge(Kind::ball, std::vector<double>(d, 1.0));
    }
    static MinkowskiGauge ellipsoid(std::vector<double> axes) {
        if (axes.empty()) throw std::invalid_argument("gauge: ellipsoid needs axes");
        for (double a : axes)
            if (!(a > 0) || !std::isfinite(a)) throw std::invalid_argument("gauge: axes must be positive");
        return MinkowskiGauge(Kind::ellipsoid, std::move(axes));
    }
    // "ball" or "ellipsoid:a1,a2[,a3]".
    static MinkowskiGauge parse(const std::string& s, int d) {
        if (s == "ball") return ball(d);
        const std::string pre = "ellipsoid:";
        if (s.rfind(pre, 0) != 0) throw std::invalid_argument("gauge: unknown kind '" + s + "'");
        std::vector<double> axes;
        std::stringstream ss(s.substr(pre.size()));
        std::string tok;
        while (std::getline(ss, tok, ',')) axes.push_back(std::stod(tok));
        if (static_cast<int>(axes.size()) != d)
            throw std::invalid_argument("gauge: ellipsoid axis count does not match dimension");
        return ellipsoid(std::move(axes));
    }

    Kind kind() const { return kind_; }
    int dim() const { return static_cast<int>(axes_.size()); }
    const std::vector<double>& axes() const { return axes_; }

    double rho(const double* xi) const {
        double s = 0;
        for (int i = 0; i < dim(); ++i) {
            double t = xi[i] * inv_[i];
            s += t * t;
        }
        return std::sqrt(s);
    }
    double rho(const std::vector<double>& xi) const { return rho(xi.data()); }

    // grad rho(xi) = (xi_i / a_i^2) / rho(xi); undefined at the origin.
    std::vector<double> gradient(const std::vector<double>& xi) const {
        double r = rho(xi);
        if (r == 0) throw std::domain_error("gauge: gradient undefined at the origin");
        std::vector<double> g(dim());
        for (int i = 0; i < dim(); ++i) g[i] = xi[i] * inv_[i] * inv_[i] / r;
        return g;
    }

    // Largest coordinate of a point on the unit level set.
    double max_extent() const {
        double m = 0;
        for (double a : axes_) m = std::max(m, a);
        return m;
    }

    std::string describe() const {
        if (kind_ == Kind::ball) return "ball";
        std::string s = "ellipsoid:";
        for (std::size_t i = 0; i < axes_.size(); ++i) {
            if (i) s += ",";
            std::ostringstream o;
            o << axes_[i];
            s += o.str();
        }
        return s;
    }

private:
    MinkowskiGauge(Kind k, std::vector<double> axes) : kind_(k), axes_(std::move(axes)) {
        for (double a : axes_) inv_.push_back(1.0 / a);
    }
    Kind kind_;
    std::vector<double> axes_;
    std::vector<double> inv_;
};

struct GaugeConstants {
    double c0 = 0;
    double C0 = 1;
    int n_circ = 0;
    double sampled_min = 0;
    double sampled_max = 0;
};

inline int n_circ_for(int d, double C0) {
    int n = 0;
    while (std::ldexp(1.0, n) <= std::ldexp(C0, d + 4)) ++n;
    return n;
}

// Samples |grad rho| on the unit level set: a uniform angle grid in d=2,
// seeded Gaussian directions otherwise.
inline GaugeConstants gauge_constants(const MinkowskiGauge& g, int samples = 10000) {
    const int d = g.dim();
    double lo = INFINITY, hi = 0;
    auto visit = [&](std::vector<double> xi) {
        double r = g.rho(xi);
        for (double& v : xi) v /= r;
        auto gr = g.gradient(xi);
        double n = 0;
        for (double v : gr) n += v * v;
        n = std::sqrt(n);
        lo = std::min(lo, n);
        hi = std::max(hi, n);
    };
    if (d == 2) {
        for (int k = 0; k < samples; ++k) {
            double th = 2 * std::numbers::pi * k / samples;
            visit({std::cos(th), std::sin(th)});
        }
    } else {
        std::mt19937_64 rng(12345);
        std::normal_distribution<double> nd;
        for (int k = 0; k < samples; ++k) {
            std::vector<double> xi(d);
            for (double& v : xi) v = nd(rng);
            visit(xi);
        }
        // axis points carry the extremes of an ellipsoid gradient
        for (int i = 0; i < d; ++i) {
            std::vector<double> xi(d, 0.0);
            xi[i] = 1;
            visit(xi);
        }
    }
    GaugeConstants c;
    c.sampled_min = lo;
    c.sampled_max = hi;
    c.c0 = lo * (1 - 1e-3);
    c.C0 = std::max(1.0, hi);
    c.n_circ = n_circ_for(d, c.C0);
    return c;
}

}  // namespace rsparse
