#pragma once

#include "rsparse/cz.hpp"
#include "rsparse/exponents.hpp"
#include "rsparse/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsparse {

// Cube families for the characteristic sups: every grid-aligned cube for small grids,
// dyadic cubes over the 3^d shifted lattices otherwise.
inline constexpr std::size_t exact_weight_limit = 128;
inline constexpr std::size_t exact_wilson_limit = 32;

struct WeightGrid {
    GridGeometry grid;
    std::vector<double> w;
    std::string label;

    WeightGrid(GridGeometry g, std::vector<double> values, std::string name = {})
        : grid(g), w(std::move(values)), label(std::move(name)) {
        if (w.size() != grid.total()) throw std::invalid_argument("WeightGrid: size mismatch");
        for (double v : w)
            if (!(v > 0) || !std::isfinite(v)) throw std::invalid_argument("WeightGrid: weight must be positive");
    }

    bool exact_family() const { return grid.n <= exact_weight_limit; }

    WeightGrid power(double s) const {
        std::vector<double> v(w.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(w[i], s);
        return WeightGrid(grid, std::move(v), label + "^" + std::to_string(s));
    }
};

// "const", "power:ALPHA" = (|x| + h)^-ALPHA, "step:A,B" = A for x_1 < 0 and B otherwise.
inline WeightGrid make_weight(const std::string& spec, const GridGeometry& g) {
    std::vector<double> v(g.total());
    const double h = g.h();
    auto coord = [&](long i) { return -g.L + (double(i) + 0.5) * h; };
    if (spec == "const") {
        std::fill(v.begin(), v.end(), 1.0);
    } else if (spec.rfind("power:", 0) == 0) {
        const double alpha = std::stod(spec.substr(6));
        for (std::size_t f = 0; f < v.size(); ++f) {
            auto idx = g.unflatten(f);
            double r2 = 0;
            for (long i : idx) r2 += coord(i) * coord(i);
            v[f] = std::pow(std::sqrt(r2) + h, -alpha);
        }
    } else if (spec.rfind("step", 0) == 0) {
        double A = 1, B = 4;
        if (spec.size() > 5) {
            auto c = spec.find(',', 5);
            if (c == std::string::npos) throw std::invalid_argument("make_weight: step expects step:A,B");
            A = std::stod(spec.substr(5, c - 5));
            B = std::stod(spec.substr(c + 1));
        }
        for (std::size_t f = 0; f < v.size(); ++f) v[f] = coord(g.unflatten(f)[0]) < 0 ? A : B;
    } else {
        throw std::invalid_argument("make_weight: unknown weight '" + spec + "'");
    }
    return WeightGrid(g, std::move(v), spec);
}

namespace detail {

// Calls fn(lo, k) for every cube of the family (lo = first cell per axis, k = side in cells).
template <class F>
void for_each_family_cube(int d, std::size_t n, bool exact, F&& fn) {
    std::vector<std::size_t> lo(static_cast<std::size_t>(d));
    if (exact) {
        for (std::size_t k = 1; k <= n; ++k) {
            const std::size_t c = n - k + 1;
            std::size_t places = 1;
            for (int i = 0; i < d; ++i) places *= c;
            for (std::size_t t = 0; t < places; ++t) {
                std::size_t f = t;
                for (int i = d - 1; i >= 0; --i) {
                    lo[std::size_t(i)] = f % c;
                    f /= c;
                }
                fn(lo, k);
            }
        }
        return;
    }
    int shifts = 1;
    for (int i = 0; i < d; ++i) shifts *= 3;
    for (std::size_t k = 1; k <= n; k <<= 1)
        for (int t = 0; t < shifts; ++t) {
            std::vector<std::vector<std::size_t>> starts(static_cast<std::size_t>(d));
            int tt = t;
            for (int i = 0; i < d; ++i) {
                const long off = std::lround(double(tt % 3) * double(k) / 3.0) % long(k);
                tt /= 3;
                for (long st = off ? off - long(k) : 0; st + long(k) <= long(n); st += long(k))
                    if (st >= 0) starts[std::size_t(i)].push_back(std::size_t(st));
            }
            std::size_t blocks = 1;
            for (const auto& v : starts) blocks *= v.size();
            for (std::size_t b = 0; b < blocks; ++b) {
                std::size_t f = b;
                for (int i = d - 1; i >= 0; --i) {
                    const auto& v = starts[std::size_t(i)];
                    lo[std::size_t(i)] = v[f % v.size()];
                    f /= v.size();
                }
                fn(lo, k);
            }
        }
}

inline double cube_min(const std::vector<double>& a, int d, std::size_t n, const std::vector<std::size_t>& lo,
                       std::size_t k) {
    CellBox b;
    for (int i = 0; i < d; ++i) {
        b.lo.push_back(long(lo[std::size_t(i)]));
        b.hi.push_back(long(lo[std::size_t(i)] + k));
    }
    double m = std::numeric_limits<double>::infinity();
    b.for_each(n, [&](std::size_t flat, const std::vector<long>&) { m = std::min(m, a[flat]); });
    return m;
}

// Sliding-window minimum of side k at every placement, stored at the placement's first cell.
inline std::vector<double> window_min(const std::vector<double>& a, int d, std::size_t n, std::size_t k) {
    std::vector<double> A = a;
    std::vector<double> line(n), res(n);
    std::size_t stride = 1;
    for (int axis = d - 1; axis >= 0; --axis) {
        const std::size_t block = stride * n;
        for (std::size_t outer = 0; outer < A.size(); outer += block)
            for (std::size_t inner = 0; inner < stride; ++inner) {
                for (std::size_t x = 0; x < n; ++x) line[x] = A[outer + inner + x * stride];
                std::deque<std::size_t> dq;
                // res[x] = min line[x .. x+k-1]
                for (std::size_t y = n; y-- > 0;) {
                    while (!dq.empty() && line[dq.back()] >= line[y]) dq.pop_back();
                    dq.push_back(y);
                    while (dq.front() >= y + k) dq.pop_front();
                    res[y] = line[dq.front()];
                }
                for (std::size_t x = 0; x < n; ++x) A[outer + inner + x * stride] = res[x];
            }
        stride *= n;
    }
    return A;
}

}  // namespace detail

inline double a1_characteristic(const WeightGrid& W) {
    const int d = W.grid.d;
    const std::size_t n = W.grid.n;
    auto P = detail::prefix_sums(W.w, d, n);
    double best = 1;
    std::vector<std::size_t> len(static_cast<std::size_t>(d));
    if (W.exact_family()) {
        for (std::size_t k = 1; k <= n; ++k) {
            auto mins = detail::window_min(W.w, d, n, k);
            std::fill(len.begin(), len.end(), k);
            const double inv = 1.0 / std::pow(double(k), d);
            const std::size_t c = n - k + 1;
            std::size_t places = 1;
            for (int i = 0; i < d; ++i) places *= c;
            std::vector<std::size_t> lo(static_cast<std::size_t>(d));
            for (std::size_t t = 0; t < places; ++t) {
                std::size_t f = t, flat = 0;
                for (int i = d - 1; i >= 0; --i) {
                    lo[std::size_t(i)] = f % c;
                    f /= c;
                }
                for (int i = 0; i < d; ++i) flat = flat * n + lo[std::size_t(i)];
                best = std::max(best, detail::box_sum(P, d, n, lo, len) * inv / mins[flat]);
            }
        }
        return best;
    }
    detail::for_each_family_cube(d, n, false, [&](const std::vector<std::size_t>& lo, std::size_t k) {
        std::fill(len.begin(), len.end(), k);
        const double avg = detail::box_sum(P, d, n, lo, len) / std::pow(double(k), d);
        best = std::max(best, avg / detail::cube_min(W.w, d, n, lo, k));
    });
    return best;
}

inline double rh_characteristic(const WeightGrid& W, double sigma) {
    if (!(sigma > 1)) throw std::invalid_argument("rh_characteristic: sigma must exceed 1");
    const int d = W.grid.d;
    const std::size_t n = W.grid.n;
    auto P1 = detail::prefix_sums(W.w, d, n);
    auto Ps = detail::prefix_sums(W.power(sigma).w, d, n);
    double best = 1;
    std::vector<std::size_t> len(static_cast<std::size_t>(d));
    detail::for_each_family_cube(d, n, W.exact_family(), [&](const std::vector<std::size_t>& lo, std::size_t k) {
        std::fill(len.begin(), len.end(), k);
        const double vol = std::pow(double(k), d);
        const double a1 = detail::box_sum(P1, d, n, lo, len) / vol;
        const double as = detail::box_sum(Ps, d, n, lo, len) / vol;
        best = std::max(best, std::pow(std::max(as, 0.0), 1 / sigma) / a1);
    });
    return best;
}

inline double wilson_ainfty(const WeightGrid& V) {
    const int d = V.grid.d;
    const std::size_t n = V.grid.n;
    double best = 0;
    detail::for_each_family_cube(d, n, n <= exact_wilson_limit, [&](const std::vector<std::size_t>& lo, std::size_t k) {
        // v restricted to the cube, maximal function taken inside the cube
        std::size_t tot = 1;
        for (int i = 0; i < d; ++i) tot *= k;
        std::vector<double> sub(tot);
        double vB = 0;
        for (std::size_t t = 0; t < tot; ++t) {
            std::size_t f = t, flat = 0;
            std::vector<std::size_t> off(static_cast<std::size_t>(d));
            for (int i = d - 1; i >= 0; --i) {
                off[std::size_t(i)] = f % k;
                f /= k;
            }
            for (int i = 0; i < d; ++i) flat = flat * n + lo[std::size_t(i)] + off[std::size_t(i)];
            sub[t] = V.w[flat];
            vB += sub[t];
        }
        auto M = hl_maximal(sub, d, k, MaximalMode::exact);
        double s = 0;
        for (double m : M) s += m;
        best = std::max(best, s / vB);
    });
    return best;
}

// sup over alpha of alpha w({|g| > alpha})^{1/p}; the sup is attained as alpha increases to a value of |g|.
inline double weak_quasinorm(const GridFunction& g, const WeightGrid& W, double p) {
    if (p < 1) throw std::invalid_argument("weak_quasinorm: p must be >= 1");
    if (!GridGeometry(g).same(W.grid)) throw std::invalid_argument("weak_quasinorm: grid mismatch");
    std::vector<std::pair<double, double>> vw(g.values.size());
    for (std::size_t i = 0; i < vw.size(); ++i) vw[i] = {std::abs(g.values[i]), W.w[i]};
    std::sort(vw.begin(), vw.end(), [](auto& a, auto& b) { return a.first > b.first; });
    const double cell = W.grid.cell_volume();
    double mass = 0, best = 0;
    for (std::size_t i = 0; i < vw.size();) {
        const double v = vw[i].first;
        if (v == 0) break;
        while (i < vw.size() && vw[i].first == v) mass += vw[i++].second * cell;
        best = std::max(best, v * std::pow(mass, 1 / p));
    }
    return best;
}

inline double weighted_lp_norm(const GridFunction& g, const WeightGrid& W, double p) {
    double s = 0;
    for (std::size_t i = 0; i < g.values.size(); ++i) s += std::pow(std::abs(g.values[i]), p) * W.w[i];
    return std::pow(s * W.grid.cell_volume(), 1 / p);
}

inline double weighted_bound_factor(double sp_norm, double ainfty_w_sigma, double a1, double rh_sigma, double p) {
    if (sp_norm < 0) throw std::invalid_argument("weighted_bound_factor: negative sparse norm");
    return sp_norm * std::pow(ainfty_w_sigma, 1 + 1 / p) * std::pow(a1, 1 / p) * std::pow(rh_sigma, 1 / p);
}

inline double weighted_bound_factor(double sp_norm, const WeightGrid& W, const Rational& p, const Rational& q) {
    const double sigma = weight_sigma(p, q).to_double();
    const double pd = p.to_double();
    return weighted_bound_factor(sp_norm, wilson_ainfty(W.power(sigma)), a1_characteristic(W),
                                 rh_characteristic(W, sigma), pd);
}

struct WeightReport {
    double a1 = 1;
    std::vector<std::pair<double, double>> rh;  // (sigma, [w]_{RH_sigma})
    double a_infty = 1;
    double sigma_of_w = 1;  // largest scanned sigma with rh within budget
    bool exact_family = true;
};

inline WeightReport weight_report(const WeightGrid& W, const std::vector<double>& sigmas, double rh_budget = 2) {
    WeightReport r;
    r.exact_family = W.exact_family();
    r.a1 = a1_characteristic(W);
    r.a_infty = wilson_ainfty(W);
    for (double s : sigmas) {
        double v = rh_characteristic(W, s);
        r.rh.emplace_back(s, v);
        if (v <= rh_budget) r.sigma_of_w = std::max(r.sigma_of_w, s);
    }
    return r;
}

inline std::vector<double> sigma_scan(double lo, double hi, double step) {
    if (!(lo > 1) || !(hi >= lo) || !(step > 0)) throw std::invalid_argument("sigma_scan: need 1 < lo <= hi, step > 0");
    std::vector<double> v;
    for (int i = 0;; ++i) {
        double s = lo + i * step;
        if (s > hi + 1e-12) break;
        v.push_back(s);
    }
    return v;
}

struct WeakTypeRow {
    int trial = 0;
    double t = 1;
    double weak = 0;
    double lp = 0;
    double ratio = 0;
};

struct WeakTypeReport {
    std::vector<WeakTypeRow> rows;
    double sigma_of_w = 1;
    double p1 = 1;
    double spread = 0;  // max / min ratio
    bool pass = false;
};

struct WeakTypeOptions {
    double lambda = 1.0 / 6;
    double p = 1.2;
    double a = 1;
    int trials = 10;
    std::vector<double> dilations{1, 2, 4, 8};
    std::size_t n = 256;
    double L = 32;
    std::uint64_t seed = 1;
    double rh_budget = 2;
    std::vector<double> sigmas = sigma_scan(1.1, 4.0, 0.1);
    bool check_p1 = true;
};

// Random smooth f: three Gaussian bumps with random centers, widths and signs.
inline GridFunction random_smooth(int d, std::size_t n, double L, std::mt19937_64& rng, double spread = 0.25) {
    std::uniform_real_distribution<double> U(-1, 1), W(0.5, 2.0);
    std::vector<std::vector<double>> centers;
    std::vector<double> widths, amps;
    for (int k = 0; k < 3; ++k) {
        std::vector<double> c(static_cast<std::size_t>(d));
        for (auto& x : c) x = U(rng) * spread * L;
        centers.push_back(c);
        widths.push_back(W(rng));
        amps.push_back(U(rng) < 0 ? -1.0 : 1.0);
    }
    return GridFunction::sample(d, n, L, [&](const double* x) {
        double s = 0;
        for (int k = 0; k < 3; ++k) {
            double r2 = 0;
            for (int i = 0; i < d; ++i) {
                double z = x[i] - centers[std::size_t(k)][std::size_t(i)];
                r2 += z * z;
            }
            s += amps[std::size_t(k)] * std::exp(-r2 / (widths[std::size_t(k)] * widths[std::size_t(k)]));
        }
        return cplx(s);
    });
}

inline WeakTypeReport weighted_weaktype_experiment(const WeightGrid& W, const MinkowskiGauge& gauge,
                                                   const WeakTypeOptions& opt) {
    if (W.grid.n != opt.n || W.grid.L != opt.L || W.grid.d != gauge.dim())
        throw std::invalid_argument("weighted_weaktype_experiment: weight grid does not match options");
    WeakTypeReport rep;
    {
        double best = 1;
        for (double s : opt.sigmas)
            if (rh_characteristic(W, s) <= opt.rh_budget) best = std::max(best, s);
        rep.sigma_of_w = best;
    }
    if (rep.sigma_of_w > 1)
        rep.p1 = p1_of_weight(Rational(std::llround(rep.sigma_of_w * 1e6), 1000000), W.grid.d).to_double();
    if (opt.check_p1 && !(opt.p < rep.p1))
        throw std::invalid_argument("weighted_weaktype_experiment: p not below p1(w) = " + std::to_string(rep.p1));
    const double nyq = std::numbers::pi / W.grid.h();
    for (double t : opt.dilations)
        if (t * gauge.max_extent() > nyq)
            throw std::invalid_argument("weighted_weaktype_experiment: grid too coarse for dilation " + std::to_string(t));
    std::mt19937_64 rng(opt.seed);
    double lo = INFINITY, hi = 0;
    for (int trial = 0; trial < opt.trials; ++trial) {
        auto f = random_smooth(W.grid.d, W.grid.n, W.grid.L, rng);
        const double lp = weighted_lp_norm(f, W, opt.p);
        for (double t : opt.dilations) {
            auto Rf = riesz_mean(f, gauge, RieszSymbol{opt.a, opt.lambda, t});
            WeakTypeRow row{trial, t, weak_quasinorm(Rf, W, opt.p), lp, 0};
            row.ratio = row.weak / lp;
            lo = std::min(lo, row.ratio);
            hi = std::max(hi, row.ratio);
            rep.rows.push_back(row);
        }
    }
    rep.spread = hi / lo;
    rep.pass = rep.spread < 10;
    return rep;
}

}  // namespace rsparse
