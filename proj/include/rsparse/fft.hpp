#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rsparse {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative radix-2 transform, unnormalized in both directions:
// forward X_k = sum_j x_j e^{-2 pi i jk/n}, inverse uses e^{+2 pi i jk/n}.
class FFTPlan {
public:
    explicit FFTPlan(std::size_t n) : n_(n), rev_(n), tw_(n / 2) {
        if (!is_pow2(n)) throw std::invalid_argument("fft: length must be a power of two");
        int bits = 0;
        while ((std::size_t{1} << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (int b = 0; b < bits; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
            rev_[i] = r;
        }
        for (std::size_t k = 0; k < n / 2; ++k)
            tw_[k] = std::polar(1.0, -2 * std::numbers::pi * double(k) / double(n));
    }

    std::size_t size() const { return n_; }

    void execute(cplx* a, bool inverse) const {
        const std::size_t n = n_;
        for (std::size_t i = 0; i < n; ++i)
            if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len / 2, step = n / len;
            for (std::size_t i = 0; i < n; i += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    cplx w = tw_[j * step];
                    if (inverse) w = std::conj(w);
                    cplx u = a[i + j];
                    cplx v = a[i + j + half] * w;
                    a[i + j] = u + v;
                    a[i + j + half] = u - v;
                }
            }
        }
    }

private:
    std::size_t n_;
    std::vector<std::size_t> rev_;
    std::vector<cplx> tw_;
};

inline const FFTPlan& fft_plan(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<FFTPlan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FFTPlan>(n);
    return *slot;
}

inline void fft_inplace(std::vector<cplx>& a, bool inverse) {
    fft_plan(a.size()).execute(a.data(), inverse);
}

// Transform every axis of a row-major n^d array (last axis contiguous).
inline void fft_nd(std::vector<cplx>& a, int d, std::size_t n, bool inverse) {
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= n;
    if (a.size() != total) throw std::invalid_argument("fft_nd: size mismatch");
    const FFTPlan& plan = fft_plan(n);
    constexpr std::size_t B = 16;  // columns gathered per pass on strided axes
    std::vector<cplx> buf(n * B);
    std::size_t stride = 1;
    for (int axis = d - 1; axis >= 0; --axis) {
        if (stride == 1) {
            for (std::size_t off = 0; off < total; off += n) plan.execute(a.data() + off, inverse);
        } else {
            const std::size_t block = stride * n;
            for (std::size_t outer = 0; outer < total; outer += block) {
                for (std::size_t c0 = 0; c0 < stride; c0 += B) {
                    const std::size_t nc = std::min(B, stride - c0);
                    for (std::size_t k = 0; k < n; ++k) {
                        const cplx* src = a.data() + outer + k * stride + c0;
                        for (std::size_t c = 0; c < nc; ++c) buf[c * n + k] = src[c];
                    }
                    for (std::size_t c = 0; c < nc; ++c) plan.execute(buf.data() + c * n, inverse);
                    for (std::size_t k = 0; k < n; ++k) {
                        cplx* dst = a.data() + outer + k * stride + c0;
                        for (std::size_t c = 0; c < nc; ++c) dst[c] = buf[c * n + k];
                    }
                }
            }
        }
        stride *= n;
    }
}

// Full linear convolution of two complex sequences via zero padding.
inline std::vector<cplx> convolve(const std::vector<cplx>& x, const std::vector<cplx>& y) {
    if (x.empty() || y.empty()) return {};
    const std::size_t out = x.size() + y.size() - 1;
    const std::size_t m = next_pow2(out);
    std::vector<cplx> X(m), Y(m);
    std::copy(x.begin(), x.end(), X.begin());
    std::copy(y.begin(), y.end(), Y.begin());
    fft_inplace(X, false);
    fft_inplace(Y, false);
    for (std::size_t i = 0; i < m; ++i) X[i] *= Y[i];
    fft_inplace(X, true);
    X.resize(out);
    for (auto& v : X) v /= double(m);
    return X;
}

}  // namespace rsparse
