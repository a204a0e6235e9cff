#pragma once

#include "rsparse/fft.hpp"
#include "rsparse/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

namespace rsparse {

// =====================================================================
// Mollifier: normalized exp(-1/(1-y^2)) on (1-eps, 1+eps) and its upper tail
// Wbar(z) = int_z^inf w.  The tail is tabulated once and evaluated by cubic
// Hermite interpolation using the exact density as derivative data.
// =====================================================================
class Mollifier {
public:
    explicit Mollifier(double eps, int cells = 4096) : eps_(eps), cells_(cells), tail_(cells + 1) {
        if (!(eps > 0 && eps < 0.125)) throw std::invalid_argument("mollifier: epsilon must lie in (0, 1/8)");
        hy_ = 2.0 / cells;
        std::vector<double> cell(cells);
        for (int i = 0; i < cells; ++i) {
            double a = -1 + i * hy_;
            cell[i] = integrate_gl([](double y) { return profile(y); }, a, a + hy_, 1, 20);
        }
        tail_[cells] = 0;
        for (int i = cells - 1; i >= 0; --i) tail_[i] = tail_[i + 1] + cell[i];
        mass_ = tail_[0];
        for (double& t : tail_) t /= mass_;
    }

    double epsilon() const { return eps_; }

    static double profile(double y) {
        if (y <= -1 || y >= 1) return 0;
        return std::exp(-1 / (1 - y * y));
    }

    // density in z, integrates to 1
    double density(double z) const { return profile((z - 1) / eps_) / (eps_ * mass_); }

    double tail(double z) const {
        double y = (z - 1) / eps_;
        if (y <= -1) return 1;
        if (y >= 1) return 0;
        double s = (y + 1) / hy_;
        int i = std::min(cells_ - 1, static_cast<int>(s));
        double t = s - i;
        double y0 = -1 + i * hy_, y1 = y0 + hy_;
        // quintic Hermite: value, first and second derivative at both cell ends
        double f0 = tail_[i], f1 = tail_[i + 1];
        double d0 = -profile(y0) / mass_ * hy_, d1 = -profile(y1) / mass_ * hy_;
        double s0 = -profile_prime(y0) / mass_ * hy_ * hy_, s1 = -profile_prime(y1) / mass_ * hy_ * hy_;
        double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
        double h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5), h5 = 10 * t3 - 15 * t4 + 6 * t5;
        double h4 = -4 * t3 + 7 * t4 - 3 * t5, h3 = 0.5 * (t3 - 2 * t4 + t5);
        return h0 * f0 + h1 * d0 + h2 * s0 + h5 * f1 + h4 * d1 + h3 * s1;
    }

    static double profile_prime(double y) {
        if (y <= -1 || y >= 1) return 0;
        double q = 1 - y * y;
        return std::exp(-1 / q) * (-2 * y / (q * q));
    }

private:
    double eps_;
    int cells_;
    double hy_ = 0;
    double mass_ = 0;
    std::vector<double> tail_;
};

inline double legendre_p(int k, double x) {
    if (k == 0) return 1;
    double p0 = 1, p1 = x;
    for (int m = 2; m <= k; ++m) {
        double p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

struct BumpOptions {
    double epsilon = 1.0 / 16;
    int sample_log2 = 14;          // phi0 samples at spacing 2^-sample_log2
    int derivative_order_max = 4;
    int fd_stride_log2 = 4;        // finite differences use spacing 2^(fd_stride_log2 - sample_log2)
};

// Cancelling bump Phi0, rescaled by 2:
// Phi0 of the cancellation lemma after the rescale by 2:
//   Phi0(x) = int_{5/4}^{7/4} u(t) Wbar(2|x|/t) dt,
// where u (the seed, written in t = -s on I = [-7/4, -5/4]) has unit mass and
// int u(t) t^(j - lambda) dt = 0 for j = 0..N, j != lambda.
// =====================================================================
class CancellingBump {
public:
    static constexpr double interval_lo = -1.75;
    static constexpr double interval_hi = -1.25;

    double lambda = 0;
    int N_circ = 0;
    double mollifier_epsilon = 0;
    // Seed coefficients in the Legendre basis P_k(tau), tau = 4(t - 3/2), t = |s|.
    std::vector<double> u_coeffs;
    double seed_residual = 0;       // max |G c - e| of the seed system
    double seed_condition = 0;      // 2-norm condition estimate of G
    double sample_step = 0;
    std::vector<double> phi0_samples;  // x_k = (k - K) * sample_step on [-1, 1]
    int derivative_order_max = 0;
    std::vector<double> derivative_sup;  // sup |Phi0^(k)|, k = 0..derivative_order_max

    // seed on I (t = -s)
    double seed(double s) const {
        if (s < interval_lo || s > interval_hi) return 0;
        double tau = 4 * (-s - 1.5);
        double v = 0;
        for (std::size_t k = 0; k < u_coeffs.size(); ++k) v += u_coeffs[k] * legendre_p(int(k), tau);
        return v;
    }

    // int_{5/4}^{t} u, from the Legendre antiderivatives
    double seed_mass_below(double t) const {
        double tau = 4 * (t - 1.5);
        double v = u_coeffs.empty() ? 0.0 : u_coeffs[0] * (tau + 1);
        for (std::size_t k = 1; k < u_coeffs.size(); ++k)
            v += u_coeffs[k] * (legendre_p(int(k) + 1, tau) - legendre_p(int(k) - 1, tau)) / (2.0 * k + 1);
        return v / 4;
    }

    double phi0(double x) const {
        const double X = 2 * std::abs(x);
        const double e = mollifier_epsilon;
        const double lo = 1.25, hi = 1.75;
        const double ta = std::max(lo, X / (1 + e));
        const double tb = std::min(hi, X / (1 - e));
        double v = 0;
        if (tb < hi) v += seed_mass_below(hi) - seed_mass_below(std::max(tb, lo));
        if (ta < tb) {
            const Mollifier& w = *mollifier_;
            v += integrate_gl(
                [&](double t) {
                    double tau = 4 * (t - 1.5);
                    double u = 0;
                    for (std::size_t k = 0; k < u_coeffs.size(); ++k) u += u_coeffs[k] * legendre_p(int(k), tau);
                    return u * w.tail(X / t);
                },
                ta, tb, 8, 16);
        }
        return v;
    }

    double psi(double x) const { return phi0(x / 2) - phi0(x); }

    // derivative of Phi0 (odd); equals the rescaled U
    double phi0_prime(double x) const {
        const double X = 2 * std::abs(x);
        if (X == 0) return 0;
        const double e = mollifier_epsilon;
        const double ta = std::max(1.25, X / (1 + e));
        const double tb = std::min(1.75, X / (1 - e));
        if (ta >= tb) return 0;
        const Mollifier& w = *mollifier_;
        double v = integrate_gl(
            [&](double t) {
                double tau = 4 * (t - 1.5);
                double u = 0;
                for (std::size_t k = 0; k < u_coeffs.size(); ++k) u += u_coeffs[k] * legendre_p(int(k), tau);
                return -u * w.density(X / t) * 2 / t;
            },
            ta, tb, 8, 16);
        return x > 0 ? v : -v;
    }

    std::size_t half_count() const { return (phi0_samples.size() - 1) / 2; }

    std::shared_ptr<const Mollifier> mollifier_;
};

inline CancellingBump build_phi0(double lambda, int N_circ, const BumpOptions& opt = {}) {
    if (!(lambda > 0)) throw std::invalid_argument("build_phi0: lambda must be positive");
    if (N_circ < 1) throw std::invalid_argument("build_phi0: N_circ must be positive");

    CancellingBump b;
    b.lambda = lambda;
    b.N_circ = N_circ;
    b.mollifier_epsilon = opt.epsilon;
    b.mollifier_ = std::make_shared<Mollifier>(opt.epsilon);

    const double lr = std::round(lambda);
    const bool int_lambda = std::abs(lambda - lr) < 1e-12 && lr <= N_circ;
    std::vector<int> js;
    for (int j = 0; j <= N_circ; ++j)
        if (!(int_lambda && j == int(lr))) js.push_back(j);
    const int nb = int(js.size()) + 1;  // unknowns: Legendre degrees 0..nb-1

    Eigen::MatrixXd G(nb, nb);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb);
    const GaussRule& gr = gauss_legendre_cached(40);
    for (int r = 0; r < int(js.size()); ++r) {
        for (int k = 0; k < nb; ++k) {
            double s = 0;
            for (std::size_t q = 0; q < gr.x.size(); ++q) {
                double tau = gr.x[q];
                double t = 1.5 + tau / 4;
                s += gr.w[q] * legendre_p(k, tau) * std::pow(t, js[r] - lambda);
            }
            G(r, k) = s / 4;
        }
    }
    for (int k = 0; k < nb; ++k) G(nb - 1, k) = (k == 0) ? 0.5 : 0.0;
    rhs(nb - 1) = 1;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    if (lu.rank() < nb) throw std::runtime_error("build_phi0: singular seed system");
    Eigen::VectorXd c = lu.solve(rhs);
    b.seed_residual = (G * c - rhs).cwiseAbs().maxCoeff();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
    const auto& sv = svd.singularValues();
    b.seed_condition = sv(0) / sv(sv.size() - 1);
    b.u_coeffs.assign(c.data(), c.data() + nb);

    const std::size_t K = std::size_t{1} << opt.sample_log2;
    b.sample_step = std::ldexp(1.0, -opt.sample_log2);
    b.phi0_samples.assign(2 * K + 1, 0.0);
    for (std::size_t k = 0; k <= K; ++k) {
        double v = b.phi0(double(k) * b.sample_step);
        b.phi0_samples[K + k] = v;
        b.phi0_samples[K - k] = v;
    }

    b.derivative_order_max = opt.derivative_order_max;
    const std::size_t stride = std::size_t{1} << opt.fd_stride_log2;
    const double hfd = b.sample_step * double(stride);
    std::vector<double> coarse;
    for (std::size_t k = 0; k < b.phi0_samples.size(); k += stride) coarse.push_back(b.phi0_samples[k]);
    b.derivative_sup.assign(opt.derivative_order_max + 1, 0.0);
    std::vector<double> diff = coarse;
    for (int m = 0; m <= opt.derivative_order_max; ++m) {
        double sup = 0;
        for (double v : diff) sup = std::max(sup, std::abs(v));
        b.derivative_sup[m] = sup / std::pow(hfd, m);
        std::vector<double> next(diff.size() > 1 ? diff.size() - 1 : 0);
        for (std::size_t i = 0; i + 1 < diff.size(); ++i) next[i] = diff[i + 1] - diff[i];
        diff.swap(next);
    }
    return b;
}

// Psi(x) = Phi0(x/2) - Phi0(x), sampled on [-2, 2] with the parent's spacing.
struct AnnularBump {
    std::shared_ptr<const CancellingBump> parent;
    double sample_step = 0;
    std::vector<double> psi_samples;

    double operator()(double x) const { return parent->psi(x); }
    std::size_t half_count() const { return (psi_samples.size() - 1) / 2; }
};

inline AnnularBump build_psi(std::shared_ptr<const CancellingBump> bump) {
    if (!bump || bump->phi0_samples.empty()) throw std::invalid_argument("build_psi: invalid bump");
    AnnularBump a;
    a.parent = bump;
    a.sample_step = bump->sample_step;
    const std::size_t K = bump->half_count();
    a.psi_samples.assign(4 * K + 1, 0.0);
    for (std::size_t k = 0; k <= 2 * K; ++k) {
        double x = double(k) * a.sample_step;
        double v = (k % 2 == 0 ? bump->phi0_samples[K + k / 2] : bump->phi0(x / 2)) -
                   (k <= K ? bump->phi0_samples[K + k] : 0.0);
        a.psi_samples[2 * K + k] = v;
        a.psi_samples[2 * K - k] = v;
    }
    return a;
}

inline AnnularBump build_psi(const CancellingBump& bump) {
    return build_psi(std::make_shared<const CancellingBump>(bump));
}

// =====================================================================
// Moment check  M(lambda, j) = int_0^inf rho^lambda (d/drho)^j phihat(rho) drho.
// x-side: trapezoid sums of the samples (spectrally accurate for smooth compactly
// supported data) evaluated on a period-P frequency grid by one FFT.
// rho-side: zeta-corrected sums for the rho^lambda endpoint, truncated where the
// tail drops below tail_rel of the accumulated magnitude; P is doubled until two
// successive values agree.
// =====================================================================
struct MomentOptions {
    double period = 64;
    double tail_rel = 1e-12;
    double abs_tol = 1e-8;
    double rel_tol = 1e-10;  // relative to the magnitude integral
    int max_doublings = 3;
};

struct MomentResult {
    std::complex<double> value;
    double magnitude = 0;      // int_0^R rho^lambda |(d/drho)^j phihat|
    double relative = 0;       // |value| / magnitude
    double cutoff = 0;         // R
    double period = 0;
    bool tail_ok = false;
    bool converged = false;
    bool ok() const { return tail_ok && converged; }
};

namespace detail {
inline MomentResult moment_once(const std::vector<double>& samples, double dx, double lambda, int j,
                                double period, double tail_rel) {
    const std::size_t n = samples.size();
    const long K = long(n - 1) / 2;
    std::size_t N = next_pow2(std::size_t(std::ceil(period / dx)));
    while (double(N) * dx < 2.0 * double(K) * dx + 1) N <<= 1;
    std::vector<cplx> a(N, 0.0);
    const cplx mi_pow = std::pow(cplx(0, -1), j);
    for (long m = -K; m <= K; ++m) {
        double x = double(m) * dx;
        double v = samples[std::size_t(m + K)];
        if (v == 0) continue;
        a[std::size_t((m + long(N)) % long(N))] = mi_pow * std::pow(x, j) * v;
    }
    fft_inplace(a, false);
    const double P = double(N) * dx;
    const double drho = 2 * std::numbers::pi / P;
    const std::size_t count = N / 2;
    auto c = power_endpoint_weights(lambda, count);

    // Rounding floor of the transform; spectral content below it is not signal,
    // so the truncation test only looks at the part of |g| above the floor.
    double l1 = 0;
    for (long m = -K; m <= K; ++m) l1 += std::abs(samples[std::size_t(m + K)]) * std::pow(std::abs(double(m) * dx), j);
    const double floor = 64 * 2.2e-16 * std::log2(double(N)) * l1 * dx;
    std::vector<double> mag(count), sig(count);
    double total = 0;
    for (std::size_t k = 0; k < count; ++k) {
        double w = std::pow(double(k), lambda);
        double g = std::abs(a[k]) * dx;
        mag[k] = w * g;
        sig[k] = w * std::max(0.0, g - floor);
        total += mag[k];
    }
    MomentResult r;
    r.period = P;
    // smallest cutoff whose remaining tail is negligible; must stay below 80% of Nyquist
    double tail = 0;
    std::size_t cut = count;
    for (std::size_t k = count; k-- > 0;) {
        if (tail + sig[k] >= tail_rel * total) break;
        tail += sig[k];
        cut = k;
    }
    r.tail_ok = cut <= std::size_t(0.8 * double(count));
    cut = std::max<std::size_t>(cut, 16);
    cplx s = 0;
    double m = 0;
    for (std::size_t k = 0; k < cut; ++k) {
        s += c[k] * a[k] * dx;  // dx: trapezoid weight of the x-sum
        m += mag[k];
    }
    const double scale = std::pow(drho, 1 + lambda);
    r.value = s * scale;
    r.magnitude = m * scale;
    r.cutoff = double(cut) * drho;
    r.relative = r.magnitude > 0 ? std::abs(r.value) / r.magnitude : 0;
    return r;
}
}  // namespace detail

// samples: x_k = (k - K) dx, k = 0..2K, covering the support of phi
inline MomentResult check_moments(const std::vector<double>& samples, double dx, double lambda, int j,
                                  const MomentOptions& opt = {}) {
    if (j < 0) throw std::invalid_argument("check_moments: j must be nonnegative");
    if (samples.size() % 2 == 0) throw std::invalid_argument("check_moments: need a symmetric sample grid");
    double P = opt.period;
    MomentResult prev = detail::moment_once(samples, dx, lambda, j, P, opt.tail_rel);
    for (int it = 0; it < opt.max_doublings; ++it) {
        P *= 2;
        MomentResult cur = detail::moment_once(samples, dx, lambda, j, P, opt.tail_rel);
        double tol = opt.abs_tol + opt.rel_tol * cur.magnitude;
        cur.tail_ok = cur.tail_ok && prev.tail_ok;
        if (std::abs(cur.value - prev.value) <= tol) {
            cur.converged = true;
            return cur;
        }
        prev = cur;
    }
    prev.converged = false;
    return prev;
}

// Keeps every stride-th sample of a centered grid (stride must divide K).
inline std::vector<double> subsample(const std::vector<double>& s, std::size_t stride) {
    std::vector<double> out;
    for (std::size_t k = 0; k < s.size(); k += stride) out.push_back(s[k]);
    return out;
}

}  // namespace rsparse
