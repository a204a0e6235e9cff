#pragma once

#include "rsparse/fft.hpp"
#include "rsparse/gauge.hpp"
#include "rsparse/multiplier.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rsparse {

// Samples on [-L, L)^d, x_i = -L + i h with h = 2L/n; row-major, last axis contiguous.
struct GridFunction {
    int d = 1;
    std::size_t n = 0;
    double box_half_width = 1;
    std::vector<cplx> values;

    GridFunction() = default;
    GridFunction(int dim, std::size_t npts, double L) : d(dim), n(npts), box_half_width(L) {
        if (dim < 1) throw std::invalid_argument("GridFunction: dimension must be positive");
        if (!is_pow2(npts)) throw std::invalid_argument("GridFunction: n must be a power of 2");
        if (!(L > 0)) throw std::invalid_argument("GridFunction: box half width must be positive");
        values.assign(total(), 0.0);
    }

    std::size_t total() const {
        std::size_t t = 1;
        for (int a = 0; a < d; ++a) t *= n;
        return t;
    }
    double h() const { return 2 * box_half_width / double(n); }
    double freq_step() const { return std::numbers::pi / box_half_width; }
    double coord(std::size_t i) const { return -box_half_width + double(i) * h(); }
    static long signed_index(std::size_t i, std::size_t n) { return i < n / 2 ? long(i) : long(i) - long(n); }

    // Visits every grid index with its multi-index (unsigned).
    template <class F>
    void for_each_index(F&& fn) const {
        std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
        const std::size_t N = total();
        for (std::size_t flat = 0; flat < N; ++flat) {
            fn(flat, idx);
            for (int a = d - 1; a >= 0; --a) {
                if (++idx[std::size_t(a)] < n) break;
                idx[std::size_t(a)] = 0;
            }
        }
    }

    template <class F>
    static GridFunction sample(int d, std::size_t n, double L, F&& f) {
        GridFunction g(d, n, L);
        std::vector<double> x(static_cast<std::size_t>(d));
        g.for_each_index([&](std::size_t flat, const std::vector<std::size_t>& idx) {
            for (int a = 0; a < d; ++a) x[std::size_t(a)] = g.coord(idx[std::size_t(a)]);
            g.values[flat] = f(x.data());
        });
        return g;
    }

    double sup_norm() const {
        double m = 0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

// Continuous-normalized transform fhat(xi_k) = h^d sum_j f(x_j) e^{-i<x_j, xi_k>}, FFT index order.
inline std::vector<cplx> forward_transform(const GridFunction& f) {
    std::vector<cplx> a = f.values;
    fft_nd(a, f.d, f.n, false);
    const double w = std::pow(f.h(), f.d);
    f.for_each_index([&](std::size_t flat, const std::vector<std::size_t>& idx) {
        long s = 0;
        for (auto i : idx) s += GridFunction::signed_index(i, f.n);
        a[flat] *= (s & 1) ? -w : w;
    });
    return a;
}

inline GridFunction inverse_transform(std::vector<cplx> fhat, int d, std::size_t n, double L) {
    GridFunction g(d, n, L);
    if (fhat.size() != g.total()) throw std::invalid_argument("inverse_transform: size mismatch");
    const double w = std::pow(2 * L, -d);
    g.for_each_index([&](std::size_t flat, const std::vector<std::size_t>& idx) {
        long s = 0;
        for (auto i : idx) s += GridFunction::signed_index(i, n);
        fhat[flat] *= (s & 1) ? -w : w;
    });
    fft_nd(fhat, d, n, true);
    g.values = std::move(fhat);
    return g;
}

// Fills a frequency-ordered array with m(xi_k).
template <class M>
void fill_symbol(std::vector<cplx>& out, const GridFunction& f, M&& m) {
    std::vector<double> xi(static_cast<std::size_t>(f.d));
    const double dk = f.freq_step();
    f.for_each_index([&](std::size_t flat, const std::vector<std::size_t>& idx) {
        for (int a = 0; a < f.d; ++a) xi[std::size_t(a)] = dk * double(GridFunction::signed_index(idx[std::size_t(a)], f.n));
        out[flat] = m(xi.data());
    });
}

template <class M>
GridFunction apply_symbol(const GridFunction& f, M&& m) {
    GridFunction out = f;
    fft_nd(out.values, f.d, f.n, false);
    std::vector<double> xi(static_cast<std::size_t>(f.d));
    const double dk = f.freq_step();
    const double inv = 1.0 / double(f.total());
    f.for_each_index([&](std::size_t flat, const std::vector<std::size_t>& idx) {
        for (int a = 0; a < f.d; ++a) xi[std::size_t(a)] = dk * double(GridFunction::signed_index(idx[std::size_t(a)], f.n));
        out.values[flat] *= cplx(m(static_cast<const double*>(xi.data()))) * inv;
    });
    fft_nd(out.values, f.d, f.n, true);
    return out;
}

inline GridFunction riesz_mean(const GridFunction& f, const MinkowskiGauge& g, const RieszSymbol& sym) {
    if (g.dim() != f.d) throw std::invalid_argument("riesz_mean: gauge dimension mismatch");
    return apply_symbol(f, [&](const double* xi) { return sym.full(g.rho(xi)); });
}

// Box half width needed for layer l to be resolved in frequency.
inline double layer_required_box(int ell) { return std::numbers::pi * std::ldexp(1.0, ell + 3); }

inline GridFunction layer_operator(const GridFunction& f, const MinkowskiGauge& g, const LayerProfile& layer,
                                   bool normalized) {
    if (g.dim() != f.d) throw std::invalid_argument("layer_operator: gauge dimension mismatch");
    if (f.freq_step() > std::ldexp(1.0, -layer.ell - 3) * (1 + 1e-12)) {
        std::ostringstream msg;
        msg << "layer_operator: layer " << layer.ell << " under-resolved; need box half width >= "
            << layer_required_box(layer.ell);
        throw std::invalid_argument(msg.str());
    }
    const double scale = normalized ? std::pow(2.0, layer.ell * (layer.symbol.lambda + (f.d + 1) / 2.0)) : 1.0;
    return apply_symbol(f, [&](const double* xi) { return scale * layer(g.rho(xi)); });
}

// ---------------------------------------------------------------------
// kernels
// ---------------------------------------------------------------------

inline double kernel_required_box(int ell, double C0) { return C0 * std::ldexp(1.0, ell + 4); }

// K = F^{-1}[h_l o rho] sampled on the periodic box.
inline GridFunction kernel(const LayerProfile& layer, const MinkowskiGauge& g, std::size_t n, double L,
                           double C0) {
    const int d = g.dim();
    if (L < kernel_required_box(layer.ell, C0) * (1 - 1e-12)) {
        std::ostringstream msg;
        msg << "kernel: box too small for layer " << layer.ell << "; need half width >= "
            << kernel_required_box(layer.ell, C0);
        throw std::invalid_argument(msg.str());
    }
    GridFunction K(d, n, L);
    // the symbol lives on rho < 2, i.e. |xi_i| < 2 a_i
    if (std::numbers::pi / K.h() < 2 * g.max_extent()) {
        std::ostringstream msg;
        msg << "kernel: grid too coarse; need n >= " << next_pow2(std::size_t(std::ceil(4 * L * g.max_extent() / std::numbers::pi)));
        throw std::invalid_argument(msg.str());
    }
    fill_symbol(K.values, K, [&](const double* xi) { return cplx(layer(g.rho(xi))); });
    return inverse_transform(std::move(K.values), d, n, L);
}

struct KernelReport {
    int ell = 0;
    int N = 0;
    double sup_inner = 0;
    double sup_annulus = 0;
    double sup_outer_scaled = 0;
    double sup_all = 0;
    double argmax_radius = 0;
    double majorant_constant = 0;  // smallest C in the (normalized) majorant inequality for this layer
    double imag_ratio = 0;
    bool inner_vacuous = false;
    bool outer_vacuous = false;
};

inline KernelReport kernel_report(const GridFunction& K, int ell, double lambda, const GaugeConstants& gc, int N) {
    KernelReport r;
    r.ell = ell;
    r.N = N;
    const double rin = gc.c0 * std::ldexp(1.0, ell - 2);
    const double rout = gc.C0 * std::ldexp(1.0, ell + 2);
    const double norm = std::pow(2.0, ell * (lambda + (K.d + 1) / 2.0));
    const double scale_l = std::ldexp(1.0, ell);
    bool any_in = false, any_out = false;
    double imax = 0;
    std::vector<double> x(static_cast<std::size_t>(K.d));
    K.for_each_index([&](std::size_t flat, const std::vector<std::size_t>& idx) {
        double r2 = 0;
        for (int a = 0; a < K.d; ++a) {
            double c = K.coord(idx[std::size_t(a)]);
            r2 += c * c;
        }
        const double rad = std::sqrt(r2);
        const double v = std::abs(K.values[flat]);
        imax = std::max(imax, std::abs(K.values[flat].imag()));
        if (v > r.sup_all) {
            r.sup_all = v;
            r.argmax_radius = rad;
        }
        if (rad <= rin) {
            any_in = true;
            r.sup_inner = std::max(r.sup_inner, v);
        } else if (rad < rout) {
            r.sup_annulus = std::max(r.sup_annulus, v);
        } else {
            any_out = true;
            r.sup_outer_scaled = std::max(r.sup_outer_scaled, v * std::pow(rad, N));
        }
        const double n0 = rad > scale_l ? std::ceil(std::log2(rad / scale_l)) : 0.0;
        r.majorant_constant = std::max(r.majorant_constant, (1 - std::ldexp(1.0, -N)) * norm * v * std::pow(2.0, n0 * N));
    });
    r.inner_vacuous = !any_in;
    r.outer_vacuous = !any_out;
    r.imag_ratio = r.sup_all > 0 ? imax / r.sup_all : 0;
    return r;
}

struct DecayReport {
    std::vector<KernelReport> rows;
    double slope = 0;
    double expected_slope = 0;
    bool inner_decay = false;      // (i)
    bool slope_ok = false;         // (ii)
    bool outer_uniform = false;    // (iii)
    bool majorant_uniform = false; // (iv)
    bool inconclusive = false;
    double max_inner_drop = 0, min_inner_drop = 0;
    double outer_growth = 0, majorant_growth = 0;
    bool pass() const { return !inconclusive && inner_decay && slope_ok && outer_uniform && majorant_uniform; }
};

// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// "Uniform in l" is read as: the largest value over the range stays within `uniform_factor`
// of the value at the first layer.
inline DecayReport decay_report(std::vector<KernelReport> rows, double lambda, int d, double slope_tol = 0.2,
                                double uniform_factor = 10) {
    if (rows.size() < 4) throw std::invalid_argument("decay_report: need at least 4 consecutive layers");
    DecayReport rep;
    rep.rows = std::move(rows);
    rep.expected_slope = -(lambda + (d + 1) / 2.0);
    std::vector<double> xs, ys;
    for (const auto& r : rep.rows) {
        if (!(r.sup_annulus > 0)) rep.inconclusive = true;
        xs.push_back(r.ell);
        ys.push_back(std::log2(r.sup_annulus));
    }
    if (rep.inconclusive) return rep;
    rep.slope = ls_slope(xs, ys);
    rep.slope_ok = std::abs(rep.slope - rep.expected_slope) <= slope_tol;

    const int N = rep.rows.front().N;
    rep.inner_decay = true;
    rep.min_inner_drop = INFINITY;
    rep.max_inner_drop = -INFINITY;
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
        const auto &a = rep.rows[i], &b = rep.rows[i + 1];
        if (a.inner_vacuous || b.inner_vacuous) continue;
        if (!(a.sup_inner > 0) || !(b.sup_inner > 0)) continue;
        double drop = std::log2(a.sup_inner / b.sup_inner);
        rep.min_inner_drop = std::min(rep.min_inner_drop, drop);
        rep.max_inner_drop = std::max(rep.max_inner_drop, drop);
        if (drop < N - 1) rep.inner_decay = false;
    }
    auto growth = [&](auto get) {
        double first = get(rep.rows.front()), hi = 0;
        for (const auto& r : rep.rows) hi = std::max(hi, get(r));
        return first > 0 ? hi / first : INFINITY;
    };
    rep.outer_growth = growth([](const KernelReport& r) { return r.sup_outer_scaled; });
    rep.majorant_growth = growth([](const KernelReport& r) { return r.majorant_constant; });
    rep.outer_uniform = rep.outer_growth <= uniform_factor;
    rep.majorant_uniform = rep.majorant_growth <= uniform_factor;
    return rep;
}

// Smallest power-of-2 grid that satisfies both kernel preconditions at layer l.
inline std::pair<std::size_t, double> kernel_grid_for(int ell, const MinkowskiGauge& g, double C0) {
    double L = kernel_required_box(ell, C0);
    std::size_t n = next_pow2(std::size_t(std::ceil(4 * L * g.max_extent() / std::numbers::pi)));
    return {n, L};
}

// sup |R^lambda_{a,t} f - f| for the Gaussian f = exp(-|x|^2), per (a, t).
struct ConvergenceRow {
    double a = 1, t = 1, error = 0;
};

inline std::vector<ConvergenceRow> riesz_convergence(const MinkowskiGauge& g, double lambda,
                                                     const std::vector<double>& a_values,
                                                     const std::vector<double>& t_values, std::size_t n = 512,
                                                     double L = 16) {
    const int d = g.dim();
    auto f = GridFunction::sample(d, n, L, [&](const double* x) {
        double r2 = 0;
        for (int i = 0; i < d; ++i) r2 += x[i] * x[i];
        return cplx(std::exp(-r2));
    });
    const double nyq = std::numbers::pi / f.h();
    std::vector<ConvergenceRow> rows;
    for (double a : a_values)
        for (double t : t_values) {
            if (t * g.max_extent() > nyq)
                throw std::invalid_argument("riesz_convergence: grid too coarse for t = " + std::to_string(t));
            auto Rf = riesz_mean(f, g, RieszSymbol{a, lambda, t});
            double e = 0;
            for (std::size_t i = 0; i < f.values.size(); ++i) e = std::max(e, std::abs(Rf.values[i] - f.values[i]));
            rows.push_back({a, t, e});
        }
    return rows;
}

}  // namespace rsparse
