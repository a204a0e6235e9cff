#pragma once

#include "rsparse/dyadic.hpp"
#include "rsparse/multiplier.hpp"
#include "rsparse/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

namespace rsparse {

// ---------------------------------------------------------------------
// Hardy-Littlewood maximal function over grid-aligned cubes inside the box
// ---------------------------------------------------------------------

enum class MaximalMode { automatic, exact, dyadic_shifted };

inline constexpr std::size_t exact_maximal_limit = 256;

namespace detail {

// Prefix sums over a (n+1)^d array.
inline std::vector<double> prefix_sums(const std::vector<double>& a, int d, std::size_t n) {
    const std::size_t m = n + 1;
    std::size_t tot = 1;
    for (int i = 0; i < d; ++i) tot *= m;
    std::vector<double> P(tot, 0.0);
    // scatter a into the shifted array
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    for (std::size_t flat = 0; flat < a.size(); ++flat) {
        std::size_t f = flat, g = 0, mul = 1;
        for (int k = d - 1; k >= 0; --k) {
            idx[std::size_t(k)] = f % n;
            f /= n;
        }
        for (int k = d - 1; k >= 0; --k) {
            g += (idx[std::size_t(k)] + 1) * mul;
            mul *= m;
        }
        P[g] = a[flat];
    }
    std::size_t stride = 1;
    for (int axis = d - 1; axis >= 0; --axis) {
        for (std::size_t i = 0; i < tot; ++i)
            if ((i / stride) % m != 0) P[i] += P[i - stride];
        stride *= m;
    }
    return P;
}

// Sum over the cell box [lo, lo + k)^d from prefix sums.
inline double box_sum(const std::vector<double>& P, int d, std::size_t n, const std::vector<std::size_t>& lo,
                      const std::vector<std::size_t>& len) {
    const std::size_t m = n + 1;
    double s = 0;
    for (int mask = 0; mask < (1 << d); ++mask) {
        std::size_t g = 0;
        int bits = 0;
        for (int k = 0; k < d; ++k) {
            bool hi = (mask >> k) & 1;
            bits += hi ? 0 : 1;
            g = g * m + (lo[std::size_t(k)] + (hi ? len[std::size_t(k)] : 0));
        }
        s += (bits & 1) ? -P[g] : P[g];
    }
    return s;
}

// out[x] = max of in[j] over j in [x - k + 1, x] clipped to [0, cnt).
inline void sliding_max_line(const double* in, std::size_t cnt, std::size_t k, double* out, std::size_t n) {
    std::deque<std::size_t> dq;
    std::size_t next = 0;
    for (std::size_t x = 0; x < n; ++x) {
        while (next < cnt && next <= x) {
            while (!dq.empty() && in[dq.back()] <= in[next]) dq.pop_back();
            dq.push_back(next++);
        }
        while (!dq.empty() && dq.front() + k <= x) dq.pop_front();
        out[x] = dq.empty() ? -std::numeric_limits<double>::infinity() : in[dq.front()];
    }
}

inline std::vector<double> maximal_exact(const std::vector<double>& a, int d, std::size_t n) {
    auto P = prefix_sums(a, d, n);
    std::vector<double> M(a.size(), 0.0);
    std::vector<std::size_t> lo(static_cast<std::size_t>(d)), len(static_cast<std::size_t>(d));
    for (std::size_t k = 1; k <= n; ++k) {
        const std::size_t c = n - k + 1;  // placements per axis
        // averages indexed by placement, padded into an n^d array
        std::vector<double> A(a.size(), -std::numeric_limits<double>::infinity());
        const double inv = 1.0 / std::pow(double(k), d);
        std::fill(len.begin(), len.end(), k);
        std::size_t places = 1;
        for (int i = 0; i < d; ++i) places *= c;
        for (std::size_t t = 0; t < places; ++t) {
            std::size_t f = t, flat = 0;
            for (int i = d - 1; i >= 0; --i) {
                lo[std::size_t(i)] = f % c;
                f /= c;
            }
            for (int i = 0; i < d; ++i) flat = flat * n + lo[std::size_t(i)];
            A[flat] = box_sum(P, d, n, lo, len) * inv;
        }
        // separable sliding max: axis by axis, valid placements are [0, c)
        std::size_t stride = 1;
        std::vector<double> line(n), res(n);
        for (int axis = d - 1; axis >= 0; --axis) {
            const std::size_t block = stride * n;
            for (std::size_t outer = 0; outer < A.size(); outer += block)
                for (std::size_t inner = 0; inner < stride; ++inner) {
                    for (std::size_t x = 0; x < n; ++x) line[x] = A[outer + inner + x * stride];
                    sliding_max_line(line.data(), c, k, res.data(), n);
                    for (std::size_t x = 0; x < n; ++x) A[outer + inner + x * stride] = res[x];
                }
            stride *= n;
        }
        for (std::size_t i = 0; i < M.size(); ++i) M[i] = std::max(M[i], A[i]);
    }
    return M;
}

// Dyadic maximal over the 3^d lattices shifted by round(t 2^m / 3) cells, t in {0,1,2}^d.
// Only blocks lying fully inside the box take part.
inline std::vector<double> maximal_dyadic_shifted(const std::vector<double>& a, int d, std::size_t n) {
    auto P = prefix_sums(a, d, n);
    std::vector<double> M(a.size(), 0.0);
    int shifts = 1;
    for (int i = 0; i < d; ++i) shifts *= 3;
    std::vector<std::size_t> lo(static_cast<std::size_t>(d)), len(static_cast<std::size_t>(d));
    for (std::size_t k = 1; k <= n; k <<= 1) {
        std::fill(len.begin(), len.end(), k);
        const double inv = 1.0 / std::pow(double(k), d);
        for (int t = 0; t < shifts; ++t) {
            // admissible block starts per axis
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
                const double avg = box_sum(P, d, n, lo, len) * inv;
                CellBox cb;
                for (int i = 0; i < d; ++i) {
                    cb.lo.push_back(long(lo[std::size_t(i)]));
                    cb.hi.push_back(long(lo[std::size_t(i)] + k));
                }
                cb.for_each(n, [&](std::size_t flat, const std::vector<long>&) { M[flat] = std::max(M[flat], avg); });
            }
        }
    }
    return M;
}

}  // namespace detail

inline std::vector<double> hl_maximal(const std::vector<double>& a, int d, std::size_t n,
                                      MaximalMode mode = MaximalMode::automatic) {
    for (double v : a)
        if (v < 0) throw std::invalid_argument("hl_maximal: expects nonnegative values");
    if (mode == MaximalMode::automatic)
        mode = n <= exact_maximal_limit ? MaximalMode::exact : MaximalMode::dyadic_shifted;
    return mode == MaximalMode::exact ? detail::maximal_exact(a, d, n) : detail::maximal_dyadic_shifted(a, d, n);
}

inline GridFunction hl_maximal(const GridFunction& f, MaximalMode mode = MaximalMode::automatic) {
    std::vector<double> a(f.values.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(f.values[i]);
    auto M = hl_maximal(a, f.d, f.n, mode);
    GridFunction out(f.d, f.n, f.box_half_width);
    for (std::size_t i = 0; i < M.size(); ++i) out.values[i] = M[i];
    return out;
}

// ---------------------------------------------------------------------
// Whitney cubes
// ---------------------------------------------------------------------

// Squared gap distance, in cell units, from each cell of the mask to the complement
// (complement cells plus everything outside the box). Cells off the mask get 0.
inline std::vector<long> complement_gap2(const std::vector<char>& mask, int d, std::size_t n) {
    const std::size_t N = mask.size();
    const long INF = std::numeric_limits<long>::max() / 4;
    std::vector<long> D(N, INF);
    auto gap2 = [](long delta) {
        long g = std::max(std::labs(delta) - 1, 0L);
        return g * g;
    };
    // last axis: exact nearest complement cell along the line
    for (std::size_t line = 0; line < N; line += n) {
        long last = -INF;
        for (std::size_t x = 0; x < n; ++x) {
            if (!mask[line + x]) last = long(x);
            if (last > -INF) D[line + x] = gap2(long(x) - last);
        }
        last = INF;
        for (std::size_t x = n; x-- > 0;) {
            if (!mask[line + x]) last = long(x);
            if (last < INF) D[line + x] = std::min(D[line + x], gap2(last - long(x)));
        }
    }
    // remaining axes: min-convolution with gap2, brute force per line
    std::size_t stride = n;
    std::vector<long> in(n);
    for (int axis = d - 2; axis >= 0; --axis) {
        const std::size_t block = stride * n;
        const bool final_pass = axis == 0;
        for (std::size_t outer = 0; outer < N; outer += block)
            for (std::size_t inner = 0; inner < stride; ++inner) {
                const std::size_t base = outer + inner;
                for (std::size_t y = 0; y < n; ++y) in[y] = D[base + y * stride];
                for (std::size_t x = 0; x < n; ++x) {
                    if (final_pass && !mask[base + x * stride]) continue;
                    long best = INF;
                    for (std::size_t y = 0; y < n; ++y)
                        if (in[y] < INF) best = std::min(best, in[y] + gap2(long(x) - long(y)));
                    D[base + x * stride] = best;
                }
            }
        stride *= n;
    }
    // exterior of the box
    std::vector<long> idx(static_cast<std::size_t>(d));
    for (std::size_t flat = 0; flat < N; ++flat) {
        if (!mask[flat]) {
            D[flat] = 0;
            continue;
        }
        std::size_t f = flat;
        long e = INF;
        for (int a = d - 1; a >= 0; --a) {
            long i = long(f % n);
            f /= n;
            e = std::min(e, std::min(i, long(n) - 1 - i));
        }
        D[flat] = std::min(D[flat], e * e);
    }
    return D;
}

struct WhitneyResult {
    CubeCollection cubes;
    std::vector<std::size_t> unresolved;  // mask cells inside S not covered by any admissible cube
};

// Maximal dyadic Q in mask∩S with diam(Q) <= dist(Q, complement); distances are gaps between closed cells.
inline WhitneyResult whitney(const std::vector<char>& mask, const GridGeometry& geo, const DyadicCube& S) {
    if (mask.size() != geo.total()) throw std::invalid_argument("whitney: mask size does not match grid");
    if (std::all_of(mask.begin(), mask.end(), [](char c) { return c != 0; }))
        throw std::invalid_argument("whitney: mask covers the whole box, no complement");
    WhitneyResult out;
    if (std::none_of(mask.begin(), mask.end(), [](char c) { return c != 0; })) return out;
    const auto D = complement_gap2(mask, geo.d, geo.n);
    const int d = geo.d;
    std::function<void(const DyadicCube&)> visit = [&](const DyadicCube& Q) {
        const CellBox b = geo.cells(Q);
        bool any = false, all = true;
        long dmin = std::numeric_limits<long>::max();
        b.for_each(geo.n, [&](std::size_t flat, const std::vector<long>&) {
            if (mask[flat]) any = true;
            else all = false;
            dmin = std::min(dmin, D[flat]);
        });
        if (!any) return;
        const long s = geo.cells_per_side(Q);
        if (all && long(d) * s * s <= dmin) {
            out.cubes.insert(Q);
            return;
        }
        if (s > 1) {
            for (const auto& c : Q.children()) visit(c);
            return;
        }
        out.unresolved.push_back(b.lo.empty() ? 0 : [&] {
            std::size_t flat = 0;
            for (int a = 0; a < d; ++a) flat = flat * geo.n + std::size_t(b.lo[std::size_t(a)]);
            return flat;
        }());
    };
    visit(S);
    std::sort(out.unresolved.begin(), out.unresolved.end());
    return out;
}

// Replays diam(Q) <= dist(Q, complement) <= 4 diam(Q) from scratch (exact integer arithmetic).
inline bool whitney_inequality_holds(const DyadicCube& Q, const std::vector<char>& mask, const GridGeometry& geo,
                                     const std::vector<long>& gap2) {
    const CellBox b = geo.cells(Q);
    long dmin = std::numeric_limits<long>::max();
    bool inside = true;
    b.for_each(geo.n, [&](std::size_t flat, const std::vector<long>&) {
        inside = inside && mask[flat];
        dmin = std::min(dmin, gap2[flat]);
    });
    const long s = geo.cells_per_side(Q);
    const long diam2 = long(geo.d) * s * s;
    return inside && diam2 <= dmin && dmin <= 16 * diam2;
}

// ---------------------------------------------------------------------
// Calderon-Zygmund decomposition
// ---------------------------------------------------------------------

struct CZDecomposition {
    DyadicCube S;
    GridGeometry grid;
    double p = 1, gamma = 0.5;
    double alpha = 0;
    double threshold = 0;  // (100 d / (1 - gamma)) alpha^p
    std::vector<char> level_set;
    CubeCollection whitney;
    std::vector<std::size_t> unresolved;
    GridFunction f1, good;

    // documented constants
    double K_g() const { return std::pow(std::pow(5.0, grid.d) * threshold_factor(), 1 / p); }
    double K_b() const { return threshold_factor() * std::pow(5.0, grid.d); }
    double threshold_factor() const { return 100.0 * grid.d / (1 - gamma); }

    GridFunction bad(const DyadicCube& Q) const {
        GridFunction b(f1.d, f1.n, f1.box_half_width);
        grid.cells(Q).for_each(grid.n, [&](std::size_t flat, const std::vector<long>&) { b.values[flat] = f1.values[flat]; });
        return b;
    }
    // int_Q |b_Q|^p
    double bad_mass(const DyadicCube& Q) const {
        double s = 0;
        grid.cells(Q).for_each(grid.n, [&](std::size_t flat, const std::vector<long>&) { s += std::pow(std::abs(f1.values[flat]), p); });
        return s * grid.cell_volume();
    }
    // B_j = sum of b_Q over Whitney cubes of level j
    GridFunction bad_group(int level) const {
        GridFunction B(f1.d, f1.n, f1.box_half_width);
        for (const auto& Q : whitney.at_level(level))
            grid.cells(Q).for_each(grid.n, [&](std::size_t flat, const std::vector<long>&) { B.values[flat] = f1.values[flat]; });
        return B;
    }
    double measured_Kb() const {
        double m = 0;
        for (const auto& Q : whitney.cubes()) m = std::max(m, bad_mass(Q) / (std::pow(alpha, p) * Q.volume()));
        return m;
    }
    double measured_Kg() const { return alpha > 0 ? good.sup_norm() / alpha : 0; }
    double union_measure() const { return mu(whitney); }
};

inline CZDecomposition cz_decompose(const GridFunction& f1, const DyadicCube& S, double p, double gamma,
                                    MaximalMode mode = MaximalMode::automatic) {
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("cz_decompose: gamma must lie in (0,1)");
    CZDecomposition cz;
    cz.S = S;
    cz.grid = GridGeometry(f1);
    cz.p = p;
    cz.gamma = gamma;
    cz.f1 = f1;
    const CellBox sb = cz.grid.cells(S);
    {
        std::vector<char> inS(cz.grid.total(), 0);
        sb.for_each(cz.grid.n, [&](std::size_t flat, const std::vector<long>&) { inS[flat] = 1; });
        for (std::size_t i = 0; i < inS.size(); ++i)
            if (!inS[i] && f1.values[i] != cplx(0)) throw std::invalid_argument("cz_decompose: f1 not supported in S");
    }
    cz.alpha = average(f1, S, p);
    cz.threshold = cz.threshold_factor() * std::pow(cz.alpha, p);
    cz.level_set.assign(cz.grid.total(), 0);
    cz.good = f1;
    if (cz.alpha == 0) return cz;
    std::vector<double> a(f1.values.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::pow(std::abs(f1.values[i]), p);
    auto M = hl_maximal(a, f1.d, f1.n, mode);
    bool covers_S = true;
    for (std::size_t i = 0; i < M.size(); ++i) cz.level_set[i] = M[i] >= cz.threshold;
    sb.for_each(cz.grid.n, [&](std::size_t flat, const std::vector<long>&) { covers_S = covers_S && cz.level_set[flat]; });
    if (covers_S) throw std::runtime_error("cz_decompose: degenerate decomposition, level set covers S");
    auto W = whitney(cz.level_set, cz.grid, S);
    cz.whitney = std::move(W.cubes);
    cz.unresolved = std::move(W.unresolved);
    for (const auto& Q : cz.whitney.cubes())
        cz.grid.cells(Q).for_each(cz.grid.n, [&](std::size_t flat, const std::vector<long>&) { cz.good.values[flat] = 0; });
    return cz;
}

// ---------------------------------------------------------------------
// Recursive sparse domination
// ---------------------------------------------------------------------

struct SparseOptions {
    double p = 1.2, q = 2;
    double lambda = 1.0 / 6;
    double a = 1;
    double gamma = 0.5;
    bool symmetric = false;
    int floor_level = 7;  // n_circ: no recursion below this level
    MaximalMode mode = MaximalMode::automatic;
};

struct SparseResult {
    SparseFamily family;
    double lhs = 0;              // |<R f1, f2>|
    double form = 0;             // tripled sparse form of the family
    double form_untripled = 0;
    double ratio = 0;            // lhs / form; NaN when the form vanishes
    bool ratio_defined = false;
    int max_depth = 0;
    std::size_t unresolved_cells = 0;
    double max_measured_Kb = 0;
    SparseCheck check;
};

namespace detail {

inline GridFunction restrict_to(const GridFunction& f, const CellBox& b) {
    GridFunction out(f.d, f.n, f.box_half_width);
    b.for_each(f.n, [&](std::size_t flat, const std::vector<long>&) { out.values[flat] = f.values[flat]; });
    return out;
}

inline void sparse_recurse(const GridFunction& f1, const GridFunction& f2, const DyadicCube& Q,
                           const SparseOptions& opt, int depth, SparseResult& res) {
    const GridGeometry geo(f1);
    res.max_depth = std::max(res.max_depth, depth);
    const CellBox qb = geo.cells(Q);
    const double fac = 100.0 * geo.d / (1 - opt.gamma);
    std::vector<char> omega(geo.total(), 0);
    const double a1 = average(f1, Q, opt.p);
    if (a1 > 0) {
        std::vector<double> v(f1.values.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(std::abs(f1.values[i]), opt.p);
        auto M = hl_maximal(v, geo.d, geo.n, opt.mode);
        const double thr = fac * std::pow(a1, opt.p);
        for (std::size_t i = 0; i < M.size(); ++i) omega[i] = M[i] >= thr;
    }
    if (opt.symmetric) {
        const double a2 = triple_average(f2, Q, opt.q);
        if (a2 > 0) {
            std::vector<double> v(f2.values.size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(std::abs(f2.values[i]), opt.q);
            auto M = hl_maximal(v, geo.d, geo.n, opt.mode);
            const double thr = fac * std::pow(a2, opt.q);
            for (std::size_t i = 0; i < M.size(); ++i) omega[i] = omega[i] || M[i] >= thr;
        }
    }
    WhitneyResult W;
    bool covered = true;
    qb.for_each(geo.n, [&](std::size_t flat, const std::vector<long>&) { covered = covered && omega[flat]; });
    if (covered) throw std::runtime_error("sparse_dominate: level set covers " + Q.str());
    W = whitney(omega, geo, Q);
    res.unresolved_cells += W.unresolved.size();
    std::vector<char> inW(geo.total(), 0);
    for (const auto& w : W.cubes.cubes())
        geo.cells(w).for_each(geo.n, [&](std::size_t flat, const std::vector<long>&) { inW[flat] = 1; });
    std::vector<std::size_t> E;
    qb.for_each(geo.n, [&](std::size_t flat, const std::vector<long>&) {
        if (!inW[flat]) E.push_back(flat);
    });
    res.family.add(Q, std::move(E));
    if (a1 > 0)
        for (const auto& w : W.cubes.cubes()) {
            double m = 0;
            geo.cells(w).for_each(geo.n, [&](std::size_t flat, const std::vector<long>&) { m += std::pow(std::abs(f1.values[flat]), opt.p); });
            m /= double(geo.cells(w).count());
            res.max_measured_Kb = std::max(res.max_measured_Kb, m / std::pow(a1, opt.p));
        }
    for (const auto& w : W.cubes.cubes()) {
        if (w.level < opt.floor_level) continue;
        sparse_recurse(restrict_to(f1, geo.cells(w)), restrict_to(f2, geo.cells(w, true, true)), w, opt, depth + 1, res);
    }
}

}  // namespace detail

inline SparseResult sparse_dominate(const GridFunction& f1, const GridFunction& f2, const DyadicCube& S,
                                    const MinkowskiGauge& gauge, const SparseOptions& opt) {
    const GridGeometry geo(f1);
    if (!geo.same(GridGeometry(f2))) throw std::invalid_argument("sparse_dominate: f1 and f2 on different grids");
    if (geo.cells_per_side(DyadicCube{opt.floor_level, std::vector<long>(std::size_t(geo.d), 0), 0}) == 0)
        throw std::invalid_argument("sparse_dominate: grid does not resolve the floor level");
    const CellBox sb = geo.cells(S);
    const CellBox s3 = geo.cells(S, true, false);  // 3S must lie in the box
    (void)s3;
    std::vector<char> inS(geo.total(), 0), in3S(geo.total(), 0);
    sb.for_each(geo.n, [&](std::size_t flat, const std::vector<long>&) { inS[flat] = 1; });
    geo.cells(S, true).for_each(geo.n, [&](std::size_t flat, const std::vector<long>&) { in3S[flat] = 1; });
    for (std::size_t i = 0; i < geo.total(); ++i) {
        if (!inS[i] && f1.values[i] != cplx(0)) throw std::invalid_argument("sparse_dominate: f1 not supported in S");
        if (!in3S[i] && f2.values[i] != cplx(0)) throw std::invalid_argument("sparse_dominate: f2 not supported in 3S");
    }
    SparseResult res;
    res.family.gamma = opt.gamma;
    res.family.grid = geo;
    detail::sparse_recurse(f1, f2, S, opt, 0, res);
    res.check = verify_sparse(res.family);

    RieszSymbol sym{opt.a, opt.lambda, 1};
    auto Rf = riesz_mean(f1, gauge, sym);
    cplx pair = 0;
    for (std::size_t i = 0; i < geo.total(); ++i) pair += Rf.values[i] * f2.values[i];
    res.lhs = std::abs(pair) * geo.cell_volume();
    res.form = sparse_form(res.family, f1, f2, opt.p, opt.q, true);
    res.form_untripled = sparse_form(res.family, f1, f2, opt.p, opt.q, false);
    res.ratio_defined = res.form > 0;
    res.ratio = res.ratio_defined ? res.lhs / res.form : std::numeric_limits<double>::quiet_NaN();
    return res;
}

// Random smooth pair for the engine: f1 = Gaussian bumps inside S (cut to S), f2 likewise on 3S.
inline std::pair<GridFunction, GridFunction> random_sparse_pair(const GridGeometry& geo, const DyadicCube& S,
                                                                std::mt19937_64& rng) {
    const int d = geo.d;
    auto make = [&](bool triple) {
        const double side = S.side() * (triple ? 3 : 1);
        std::vector<double> lo(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) lo[std::size_t(i)] = S.lo(i) - (triple ? S.side() : 0.0);
        std::uniform_real_distribution<double> U(0, 1);
        const int bumps = 4;
        std::vector<std::vector<double>> c(bumps, std::vector<double>(static_cast<std::size_t>(d)));
        std::vector<double> w(bumps), amp(bumps);
        for (int k = 0; k < bumps; ++k) {
            for (int i = 0; i < d; ++i) c[std::size_t(k)][std::size_t(i)] = lo[std::size_t(i)] + side * (0.15 + 0.7 * U(rng));
            w[std::size_t(k)] = S.side() * (0.01 + 0.09 * U(rng));
            amp[std::size_t(k)] = (U(rng) < 0.3 ? -1 : 1) * (0.5 + U(rng));
        }
        auto g = GridFunction::sample(d, geo.n, geo.L, [&](const double* x) {
            double v = 0;
            for (int k = 0; k < bumps; ++k) {
                double r2 = 0;
                for (int i = 0; i < d; ++i) {
                    double z = x[i] - c[std::size_t(k)][std::size_t(i)];
                    r2 += z * z;
                }
                v += amp[std::size_t(k)] * std::exp(-r2 / (w[std::size_t(k)] * w[std::size_t(k)]));
            }
            return cplx(v);
        });
        return detail::restrict_to(g, geo.cells(S, triple, triple));
    };
    auto f1 = make(false);
    auto f2 = make(true);
    return {std::move(f1), std::move(f2)};
}

// ---------------------------------------------------------------------
// Xi-form scaling
// ---------------------------------------------------------------------

struct XiExperiment {
    GridGeometry grid;
    std::vector<DyadicCube> cubes;                 // disjoint, levels >= 0
    std::vector<std::vector<double>> F;            // F_Q on the cells of Q (row-major within Q)
    std::vector<double> beta;
    double p = 1.2, r = 2;
};

namespace detail {

inline void scatter_cube(GridFunction& g, const GridGeometry& geo, const DyadicCube& Q, const std::vector<double>& vals,
                         double scale) {
    std::size_t k = 0;
    geo.cells(Q).for_each(geo.n, [&](std::size_t flat, const std::vector<long>&) { g.values[flat] += scale * vals[k++]; });
}

inline double lp_cells(const std::vector<double>& v, double p, double cell_volume) {
    double s = 0;
    for (double x : v) s += std::pow(std::abs(x), p);
    return std::pow(s * cell_volume, 1 / p);
}

inline double lp_grid(const GridFunction& g, double r) {
    double s = 0;
    for (const auto& v : g.values) s += std::pow(std::abs(v), r);
    return std::pow(s * GridGeometry(g).cell_volume(), 1 / r);
}

}  // namespace detail

// Xi_{s,Q}[F, beta] = sum_l sum_{Q: L(Q) = l - s} beta(Q) A_{lambda,l}[F_Q 1_Q]
inline GridFunction xi_form(const XiExperiment& ex, int s, const MinkowskiGauge& gauge, const RieszSymbol& sym,
                            const std::shared_ptr<const LayerTables>& tables) {
    std::map<int, GridFunction> by_layer;
    for (std::size_t i = 0; i < ex.cubes.size(); ++i) {
        const int ell = ex.cubes[i].level + s;
        auto it = by_layer.find(ell);
        if (it == by_layer.end()) it = by_layer.emplace(ell, GridFunction(ex.grid.d, ex.grid.n, ex.grid.L)).first;
        detail::scatter_cube(it->second, ex.grid, ex.cubes[i], ex.F[i], ex.beta[i]);
    }
    GridFunction out(ex.grid.d, ex.grid.n, ex.grid.L);
    for (const auto& [ell, g] : by_layer) {
        auto layer = build_layer(sym, tables, ell, std::ldexp(1.0, -ell - 5));
        auto Ag = layer_operator(g, gauge, layer, true);
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += Ag.values[i];
    }
    return out;
}

struct XiRow {
    int s = 0;
    double norm_r = 0;
    double N = 0;           // ||Xi||_r / (||beta||_{r,1} ||F||_{l^inf(L^p)})
    double log2_gain = 0;   // log2(N(s) / 2^{s d / p})
};

struct XiReport {
    std::vector<XiRow> rows;
    bool decreasing = false;
};

inline XiReport xi_form_scaling(const XiExperiment& ex, int s_max, const MinkowskiGauge& gauge,
                                const RieszSymbol& sym, const std::shared_ptr<const LayerTables>& tables) {
    std::vector<Atom> atoms;
    double Fnorm = 0;
    for (std::size_t i = 0; i < ex.cubes.size(); ++i) {
        atoms.push_back({ex.beta[i], ex.cubes[i].volume()});
        Fnorm = std::max(Fnorm, detail::lp_cells(ex.F[i], ex.p, ex.grid.cell_volume()));
    }
    const double bnorm = lorentz_r1_norm(atoms, ex.r);
    XiReport rep;
    for (int s = 0; s <= s_max; ++s) {
        XiRow row;
        row.s = s;
        row.norm_r = detail::lp_grid(xi_form(ex, s, gauge, sym, tables), ex.r);
        row.N = row.norm_r / (bnorm * Fnorm);
        row.log2_gain = std::log2(row.N) - s * ex.grid.d / ex.p;
        rep.rows.push_back(row);
    }
    rep.decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].log2_gain < rep.rows[i - 1].log2_gain)) rep.decreasing = false;
    return rep;
}

// Disjoint cubes of levels 0..max_level near the box center carrying random-sign single-cell
// spikes or random-sign fields, each normalized in L^p; beta is log-uniform.
inline XiExperiment adversarial_xi_family(const GridGeometry& geo, int count, int max_level, double p, double r,
                                          std::uint64_t seed) {
    XiExperiment ex;
    ex.grid = geo;
    ex.p = p;
    ex.r = r;
    std::mt19937_64 rng(seed);
    const int top = max_level + 2;  // cubes are drawn inside distinct cells of a coarse lattice
    const long span = 4;
    std::vector<std::vector<long>> used;
    std::uniform_int_distribution<long> pos(-span, span - 1);
    std::uniform_int_distribution<int> lev(0, max_level);
    std::uniform_real_distribution<double> unif(0, 1);
    int guard = 0;
    while (int(ex.cubes.size()) < count) {
        if (++guard > 100000) throw std::runtime_error("adversarial_xi_family: cannot place cubes");
        std::vector<long> cell(static_cast<std::size_t>(geo.d));
        for (auto& c : cell) c = pos(rng);
        if (std::find(used.begin(), used.end(), cell) != used.end()) continue;
        used.push_back(cell);
        DyadicCube host{top, cell, 0};
        int L = lev(rng);
        DyadicCube Q = host;
        while (Q.level > L) {
            auto ch = Q.children();
            Q = ch[std::size_t(rng() % ch.size())];
        }
        if (!geo.inside(Q)) continue;
        const std::size_t cells = geo.cells(Q).count();
        std::vector<double> F(cells, 0.0);
        if (unif(rng) < 0.5) {
            F[std::size_t(rng() % cells)] = unif(rng) < 0.5 ? 1 : -1;
        } else {
            for (auto& v : F) v = (unif(rng) < 0.5 ? -1 : 1) * unif(rng);
        }
        double nrm = detail::lp_cells(F, p, geo.cell_volume());
        for (auto& v : F) v /= nrm;
        ex.cubes.push_back(Q);
        ex.F.push_back(std::move(F));
        ex.beta.push_back(std::exp(std::log(1e-2) * unif(rng)));
    }
    return ex;
}

// Left side of the CZ consequence over alpha^{r-p} sum ||f_Q||_p^p with f_Q = beta_Q F_Q, fixed
// coefficients u, and the smallest alpha with int_Q |f_Q|^p <= alpha^p |Q|.
inline double cz_consequence_ratio(const XiExperiment& ex, int s, const std::vector<double>& u,
                                   const MinkowskiGauge& gauge, const RieszSymbol& sym,
                                   const std::shared_ptr<const LayerTables>& tables) {
    std::map<int, GridFunction> by_layer;
    double mass = 0, alpha_p = 0;
    for (std::size_t i = 0; i < ex.cubes.size(); ++i) {
        const double m = std::pow(ex.beta[i] * detail::lp_cells(ex.F[i], ex.p, ex.grid.cell_volume()), ex.p);
        alpha_p = std::max(alpha_p, m / ex.cubes[i].volume());
    }
    for (std::size_t i = 0; i < ex.cubes.size(); ++i) {
        const int ell = ex.cubes[i].level + s;
        auto it = by_layer.find(ell);
        if (it == by_layer.end()) it = by_layer.emplace(ell, GridFunction(ex.grid.d, ex.grid.n, ex.grid.L)).first;
        detail::scatter_cube(it->second, ex.grid, ex.cubes[i], ex.F[i], ex.beta[i]);
        mass += std::pow(ex.beta[i] * detail::lp_cells(ex.F[i], ex.p, ex.grid.cell_volume()), ex.p);
    }
    GridFunction out(ex.grid.d, ex.grid.n, ex.grid.L);
    for (const auto& [ell, g] : by_layer) {
        auto layer = build_layer(sym, tables, ell, std::ldexp(1.0, -ell - 5));
        auto Tg = layer_operator(g, gauge, layer, false);
        const double ul = u.at(std::size_t(ell));
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += ul * Tg.values[i];
    }
    return std::pow(detail::lp_grid(out, ex.r), ex.r) / (std::pow(alpha_p, (ex.r - ex.p) / ex.p) * mass);
}

}  // namespace rsparse
