#pragma once

#include "rsparse/bump.hpp"
#include "rsparse/fft.hpp"
#include "rsparse/quadrature.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rsparse {

// ---------------------------------------------------------------------
// cutoffs
// ---------------------------------------------------------------------

// 0 for t <= 0, 1 for t >= 1, C-infinity in between.
inline double smooth_step(double t) {
    if (t <= 0) return 0;
    if (t >= 1) return 1;
    double a = std::exp(-1 / t), b = std::exp(-1 / (1 - t));
    return a / (a + b);
}

// Library cutoff: 1 on [3/4, 3/2], supported in (1/2, 2).
inline double chi_tilde(double r) {
    return smooth_step((r - 0.5) * 4) * smooth_step((2 - r) * 2);
}

// ((1 - r^a) / (1 - r)), continuous at r = 1 with value a.
inline double power_quotient(double a, double r) {
    double e = r - 1;
    if (std::abs(e) < 1e-7) return a * (1 + (a - 1) * e / 2);
    return std::expm1(a * std::log1p(e)) / e;
}

inline double chi_a_lambda(double a, double lambda, double r) {
    if (!(r > 0)) return 0;
    double c = chi_tilde(r);
    if (c == 0) return 0;
    return c * std::pow(power_quotient(a, r), lambda);
}

struct RieszSymbol {
    double a = 1;
    double lambda = 0.5;
    double t = 1;

    // (1 - (r/t)^a)_+^lambda
    double full(double r) const {
        double v = 1 - std::pow(r / t, a);
        return v > 0 ? std::pow(v, lambda) : 0.0;
    }
    // h_lambda(r) = chi_{a,lambda}(r) (1 - r)_+^lambda
    double h(double r) const {
        if (r >= 1) return 0;
        return chi_a_lambda(a, lambda, r) * std::pow(1 - r, lambda);
    }
    double chi(double r) const { return chi_a_lambda(a, lambda, r); }
};

// ---------------------------------------------------------------------
// Layer profiles through tabulated convolutions
//   F_K(z) = (1/2pi) int_0^inf y^lambda Khat(y - z) dy,   K in {Phi0, Psi},
// so that h_{lambda,0}(r) = chi(r) F_Phi(1 - r) and, with s = 2^(l-1),
// h_{lambda,l}(r) = chi(r) s^-lambda F_Psi(s (1 - r)).
// ---------------------------------------------------------------------
struct LayerTableOptions {
    double period = 128;      // x-period; z spacing is 2 pi / period
    int sample_stride = 2;    // subsampling of the bump samples for the x transform
    double tail_rel = 1e-12;
    int stencil = 8;          // Lagrange interpolation points
};

class LayerTables {
public:
    LayerTables(const CancellingBump& bump, const AnnularBump& psi, const LayerTableOptions& opt = {})
        : lambda_(bump.lambda), opt_(opt) {
        auto phi = subsample(bump.phi0_samples, opt.sample_stride);
        auto ps = subsample(psi.psi_samples, opt.sample_stride);
        dx_ = bump.sample_step * opt.sample_stride;
        std::size_t N = next_pow2(std::size_t(std::ceil(opt.period / dx_)));
        dz_ = 2 * std::numbers::pi / (double(N) * dx_);
        auto kphi = transform(phi, N);
        auto kpsi = transform(ps, N);
        double rphi = cutoff(kphi, phi), rpsi = cutoff(kpsi, ps);
        cutoff_ = std::max(rphi, rpsi);
        const long Kr = long(std::ceil(cutoff_ / dz_)) + opt.stencil;
        if (double(3 * Kr) >= double(N / 2)) throw std::runtime_error("LayerTables: transform tail not resolved");
        Kz_ = Kr;
        auto c = power_endpoint_weights(lambda_, std::size_t(2 * Kr + 1));
        F_phi_ = convolve_table(c, kphi, Kr, N);
        F_psi_ = convolve_table(c, kpsi, Kr, N);
    }

    double lambda() const { return lambda_; }
    double dz() const { return dz_; }
    double zmax() const { return double(Kz_) * dz_; }
    double tail_cutoff() const { return cutoff_; }
    const std::vector<double>& phi_table() const { return F_phi_; }
    const std::vector<double>& psi_table() const { return F_psi_; }

    double F_phi(double z) const {
        if (z > zlim()) return std::pow(z, lambda_);
        if (z < -zlim()) return 0;
        return interp(F_phi_, z);
    }
    double F_psi(double z) const {
        if (std::abs(z) > zlim()) return 0;
        return interp(F_psi_, z);
    }

private:
    double zlim() const { return double(Kz_ - opt_.stencil) * dz_; }

    std::vector<double> transform(const std::vector<double>& s, std::size_t N) const {
        const long K = long(s.size() - 1) / 2;
        std::vector<cplx> a(N, 0.0);
        for (long m = -K; m <= K; ++m) a[std::size_t((m + long(N)) % long(N))] = s[std::size_t(m + K)];
        fft_inplace(a, false);
        std::vector<double> out(N / 2);
        for (std::size_t k = 0; k < N / 2; ++k) out[k] = a[k].real() * dx_;  // even input: real transform
        return out;
    }

    // Frequency beyond which y^lambda |Khat| (above the rounding floor) has negligible mass.
    double cutoff(const std::vector<double>& kh, const std::vector<double>& s) const {
        double l1 = 0;
        for (double v : s) l1 += std::abs(v);
        const double floor = 64 * 2.2e-16 * std::log2(double(2 * kh.size())) * l1 * dx_;
        double total = 0;
        for (std::size_t k = 0; k < kh.size(); ++k) total += std::pow(double(k), lambda_) * std::abs(kh[k]);
        double tail = 0;
        std::size_t cut = kh.size();
        for (std::size_t k = kh.size(); k-- > 0;) {
            double sig = std::pow(double(k), lambda_) * std::max(0.0, std::abs(kh[k]) - floor);
            if (tail + sig >= opt_.tail_rel * total) break;
            tail += sig;
            cut = k;
        }
        return double(cut) * dz_;
    }

    std::vector<double> convolve_table(const std::vector<double>& c, const std::vector<double>& kh, long Kr,
                                       std::size_t N) const {
        (void)N;
        std::vector<cplx> cv(c.begin(), c.end());
        std::vector<cplx> kv(std::size_t(2 * Kr + 1));
        for (long n = -Kr; n <= Kr; ++n) kv[std::size_t(n + Kr)] = kh[std::size_t(std::abs(n))];
        auto full = convolve(cv, kv);
        const double scale = std::pow(dz_, 1 + lambda_) / (2 * std::numbers::pi);
        std::vector<double> F(std::size_t(2 * Kr + 1));
        for (long k = -Kr; k <= Kr; ++k) F[std::size_t(k + Kr)] = full[std::size_t(k + Kr)].real() * scale;
        return F;
    }

    double interp(const std::vector<double>& F, double z) const {
        const int m = opt_.stencil;
        double s = z / dz_;
        long base = long(std::floor(s)) - (m / 2 - 1);
        double v = 0;
        for (int i = 0; i < m; ++i) {
            double li = 1;
            for (int j = 0; j < m; ++j)
                if (j != i) li *= (s - double(base + j)) / double(i - j);
            v += li * F[std::size_t(base + i + Kz_)];
        }
        return v;
    }

    double lambda_;
    LayerTableOptions opt_;
    double dx_ = 0, dz_ = 0, cutoff_ = 0;
    long Kz_ = 0;
    std::vector<double> F_phi_, F_psi_;
};

struct LayerProfile {
    int ell = 0;
    double step = 0;                 // rho spacing of the stored samples
    double rho_lo = 0.25, rho_hi = 4;
    std::vector<double> rho, values;
    std::shared_ptr<const LayerTables> tables;
    RieszSymbol symbol;

    double operator()(double r) const { return evaluate(r); }

    double evaluate(double r) const {
        double c = symbol.chi(r);
        if (c == 0) return 0;
        if (ell == 0) return c * tables->F_phi(1 - r);
        double s = std::ldexp(1.0, ell - 1);
        return c * std::pow(s, -symbol.lambda) * tables->F_psi(s * (1 - r));
    }
};

// Sum of layers 0..L in closed form: chi(r) 2^(-L lambda) F_Phi(2^L (1 - r)).
inline double telescoped_window(const LayerTables& t, const RieszSymbol& sym, int L, double r) {
    double c = sym.chi(r);
    if (c == 0) return 0;
    double s = std::ldexp(1.0, L);
    return c * std::pow(s, -sym.lambda) * t.F_phi(s * (1 - r));
}

inline std::size_t max_layer_samples() { return std::size_t{1} << 24; }

inline LayerProfile build_layer(const RieszSymbol& sym, std::shared_ptr<const LayerTables> tables, int ell,
                                double step = 0) {
    if (ell < 0) throw std::invalid_argument("build_layer: ell must be nonnegative");
    if (!tables) throw std::invalid_argument("build_layer: missing tables");
    if (std::abs(tables->lambda() - sym.lambda) > 1e-14)
        throw std::invalid_argument("build_layer: symbol and bump have different lambda");
    const double need = std::ldexp(1.0, -ell - 4);
    if (step == 0) step = std::ldexp(1.0, -ell - 5);
    if (step >= need) throw std::invalid_argument("build_layer: rho resolution too coarse for this layer");
    LayerProfile p;
    p.ell = ell;
    p.step = step;
    p.tables = std::move(tables);
    p.symbol = sym;
    std::size_t n = std::size_t((p.rho_hi - p.rho_lo) / step);
    if (n > max_layer_samples()) throw std::invalid_argument("build_layer: sample count too large for this layer");
    p.rho.resize(n);
    p.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double r = p.rho_lo + (double(i) + 0.5) * step;
        p.rho[i] = r;
        p.values[i] = p.evaluate(r);
    }
    return p;
}

inline LayerProfile build_layer(const RieszSymbol& sym, const CancellingBump& bump, const AnnularBump& psi, int ell) {
    return build_layer(sym, std::make_shared<const LayerTables>(bump, psi), ell);
}

struct LayerBoundRow {
    int ell = 0;
    double sup_weighted = 0;  // sup |h_l| 2^(l lambda) (1 + 2^l |1 - r|)^N1
};

struct LayerBoundReport {
    int N1 = 0;
    std::vector<LayerBoundRow> rows;
    double ratio = 0;  // max / min of the sups across l
    bool pass = false;
};

inline LayerBoundReport verify_layer_bounds(const std::vector<LayerProfile>& profiles, int N1,
                                            double max_ratio = 10) {
    if (profiles.size() < 3) throw std::invalid_argument("verify_layer_bounds: need at least 3 layers");
    LayerBoundReport rep;
    rep.N1 = N1;
    double lo = INFINITY, hi = 0;
    for (const auto& p : profiles) {
        LayerBoundRow row;
        row.ell = p.ell;
        const double s = std::ldexp(1.0, p.ell);
        for (std::size_t i = 0; i < p.rho.size(); ++i) {
            double v = std::abs(p.values[i]) * std::pow(s, p.symbol.lambda) *
                       std::pow(1 + s * std::abs(1 - p.rho[i]), N1);
            row.sup_weighted = std::max(row.sup_weighted, v);
        }
        lo = std::min(lo, row.sup_weighted);
        hi = std::max(hi, row.sup_weighted);
        rep.rows.push_back(row);
    }
    rep.ratio = lo > 0 ? hi / lo : INFINITY;
    rep.pass = rep.ratio < max_ratio;
    return rep;
}

// Fraction of the L1 mass of a layer outside {2^(-l-3) <= |1 - r| <= 2^(-l+3)}.
inline double layer_mass_outside_window(const LayerProfile& p) {
    double in = 0, all = 0;
    const double lo = std::ldexp(1.0, -p.ell - 3), hi = std::ldexp(1.0, -p.ell + 3);
    for (std::size_t i = 0; i < p.rho.size(); ++i) {
        double v = std::abs(p.values[i]);
        double e = std::abs(1 - p.rho[i]);
        all += v;
        if (e >= lo && e <= hi) in += v;
    }
    return all > 0 ? (all - in) / all : 0;
}

}  // namespace rsparse
