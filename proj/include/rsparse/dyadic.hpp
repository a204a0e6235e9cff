#pragma once

#include "rsparse/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace rsparse {

// Q = prod_i [corner_i 2^level, (corner_i + 1) 2^level). lattice_shift indexes one of the 3^d
// shifted lattices; grid operations only accept the unshifted lattice (shift 0).
struct DyadicCube {
    int level = 0;
    std::vector<long> corner;
    int lattice_shift = 0;

    int dim() const { return int(corner.size()); }
    double side() const { return std::ldexp(1.0, level); }
    double volume() const { return std::pow(side(), dim()); }
    double lo(int i) const { return double(corner[std::size_t(i)]) * side(); }
    double hi(int i) const { return lo(i) + side(); }
    double diam() const { return side() * std::sqrt(double(dim())); }

    static long floor_div2(long v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }

    DyadicCube parent() const {
        DyadicCube p{level + 1, corner, lattice_shift};
        for (auto& c : p.corner) c = floor_div2(c);
        return p;
    }
    std::vector<DyadicCube> children() const {
        const int d = dim();
        std::vector<DyadicCube> out;
        for (int m = 0; m < (1 << d); ++m) {
            DyadicCube c{level - 1, corner, lattice_shift};
            for (int i = 0; i < d; ++i) c.corner[std::size_t(i)] = 2 * corner[std::size_t(i)] + ((m >> (d - 1 - i)) & 1);
            out.push_back(std::move(c));
        }
        return out;
    }
    // Ancestor at a coarser level.
    DyadicCube ancestor(int lvl) const {
        DyadicCube a = *this;
        while (a.level < lvl) a = a.parent();
        return a;
    }
    bool contains(const DyadicCube& q) const {
        if (q.level > level || q.dim() != dim() || q.lattice_shift != lattice_shift) return false;
        return q.ancestor(level) == *this;
    }
    bool operator==(const DyadicCube& o) const {
        return level == o.level && corner == o.corner && lattice_shift == o.lattice_shift;
    }
    bool operator<(const DyadicCube& o) const {
        if (level != o.level) return level > o.level;  // coarse first
        if (lattice_shift != o.lattice_shift) return lattice_shift < o.lattice_shift;
        return corner < o.corner;
    }
    std::string str() const {
        std::string s = "L" + std::to_string(level) + "[";
        for (std::size_t i = 0; i < corner.size(); ++i) s += (i ? "," : "") + std::to_string(corner[i]);
        return s + "]";
    }
};

struct CubeHash {
    std::size_t operator()(const DyadicCube& q) const {
        std::size_t h = std::hash<int>()(q.level) * 1000003u ^ std::size_t(q.lattice_shift);
        for (long c : q.corner) h = h * 1315423911u ^ std::hash<long>()(c);
        return h;
    }
};

class CubeCollection {
public:
    bool insert(const DyadicCube& q, std::string tag = {}) { return map_.emplace(q, std::move(tag)).second; }
    bool contains(const DyadicCube& q) const { return map_.count(q) > 0; }
    std::size_t size() const { return map_.size(); }
    bool empty() const { return map_.empty(); }
    const std::string& tag(const DyadicCube& q) const { return map_.at(q); }

    // Deterministic order: coarse to fine, then lexicographic.
    std::vector<DyadicCube> cubes() const {
        std::vector<DyadicCube> v;
        v.reserve(map_.size());
        for (const auto& kv : map_) v.push_back(kv.first);
        std::sort(v.begin(), v.end());
        return v;
    }
    std::vector<DyadicCube> at_level(int j) const {
        std::vector<DyadicCube> v;
        for (const auto& q : cubes())
            if (q.level == j) v.push_back(q);
        return v;
    }
    std::vector<DyadicCube> at_least(int j) const {
        std::vector<DyadicCube> v;
        for (const auto& q : cubes())
            if (q.level >= j) v.push_back(q);
        return v;
    }

private:
    std::unordered_map<DyadicCube, std::string, CubeHash> map_;
};

inline double mu(const CubeCollection& c) {
    double m = 0;
    for (const auto& q : c.cubes()) m += q.volume();
    return m;
}

// ---------------------------------------------------------------------
// cubes on grids
// ---------------------------------------------------------------------

// Half-open cell index box [lo_i, hi_i) per axis.
struct CellBox {
    std::vector<long> lo, hi;
    std::size_t count() const {
        std::size_t c = 1;
        for (std::size_t i = 0; i < lo.size(); ++i) c *= std::size_t(std::max(0L, hi[i] - lo[i]));
        return c;
    }
    bool empty() const { return count() == 0; }

    template <class F>
    void for_each(std::size_t n, F&& fn) const {
        const int d = int(lo.size());
        if (empty()) return;
        std::vector<long> idx = lo;
        while (true) {
            std::size_t flat = 0;
            for (int a = 0; a < d; ++a) flat = flat * n + std::size_t(idx[std::size_t(a)]);
            fn(flat, idx);
            int a = d - 1;
            for (; a >= 0; --a) {
                if (++idx[std::size_t(a)] < hi[std::size_t(a)]) break;
                idx[std::size_t(a)] = lo[std::size_t(a)];
            }
            if (a < 0) break;
        }
    }
};

// Grid geometry shared by GridFunctions of the same box.
struct GridGeometry {
    int d = 1;
    std::size_t n = 0;
    double L = 1;

    GridGeometry() = default;
    GridGeometry(int dim, std::size_t npts, double half) : d(dim), n(npts), L(half) {}
    explicit GridGeometry(const GridFunction& f) : d(f.d), n(f.n), L(f.box_half_width) {}

    double h() const { return 2 * L / double(n); }
    double cell_volume() const { return std::pow(h(), d); }
    std::size_t total() const {
        std::size_t t = 1;
        for (int i = 0; i < d; ++i) t *= n;
        return t;
    }
    std::vector<long> unflatten(std::size_t flat) const {
        std::vector<long> idx(static_cast<std::size_t>(d));
        for (int a = d - 1; a >= 0; --a) {
            idx[std::size_t(a)] = long(flat % n);
            flat /= n;
        }
        return idx;
    }
    bool same(const GridGeometry& o) const { return d == o.d && n == o.n && L == o.L; }

    // Side of Q measured in cells; 0 if Q is not aligned with the grid.
    long cells_per_side(const DyadicCube& q) const {
        const double s = q.side() / h();
        if (s < 1 || s != std::floor(s)) return 0;
        return long(s);
    }

    // Cells of Q (or of its concentric triple), optionally clipped to the box.
    CellBox cells(const DyadicCube& q, bool triple = false, bool clip = false) const {
        if (q.dim() != d) throw std::invalid_argument("cube dimension does not match grid");
        if (q.lattice_shift != 0) throw std::invalid_argument("shifted-lattice cube is not grid aligned");
        const long s = cells_per_side(q);
        if (s == 0) throw std::invalid_argument("cube " + q.str() + " is not aligned with the grid");
        CellBox b;
        for (int i = 0; i < d; ++i) {
            double off = (q.lo(i) + L) / h();
            if (off != std::floor(off)) throw std::invalid_argument("cube " + q.str() + " is not aligned with the grid");
            long lo = long(off), hi = lo + s;
            if (triple) {
                lo -= s;
                hi += s;
            }
            if (clip) {
                lo = std::max(lo, 0L);
                hi = std::min(hi, long(n));
            } else if (lo < 0 || hi > long(n)) {
                throw std::invalid_argument("cube " + q.str() + " lies outside the grid box");
            }
            b.lo.push_back(lo);
            b.hi.push_back(hi);
        }
        return b;
    }
    bool inside(const DyadicCube& q) const {
        try {
            cells(q);
            return true;
        } catch (const std::invalid_argument&) {
            return false;
        }
    }
    // Dyadic cube of the given level containing cell `flat`.
    DyadicCube cube_of_cell(std::size_t flat, int level) const {
        auto idx = unflatten(flat);
        DyadicCube q{level, std::vector<long>(std::size_t(d)), 0};
        const double side = std::ldexp(1.0, level);
        for (int a = 0; a < d; ++a) q.corner[std::size_t(a)] = long(std::floor((-L + (double(idx[std::size_t(a)]) + 0.5) * h()) / side));
        return q;
    }
};

inline double average_cells(const GridFunction& f, const CellBox& b, double p) {
    if (p < 1) throw std::invalid_argument("average: p must be >= 1");
    const std::size_t c = b.count();
    if (c == 0) return 0;
    double s = 0;
    b.for_each(f.n, [&](std::size_t flat, const std::vector<long>&) { s += std::pow(std::abs(f.values[flat]), p); });
    return std::pow(s / double(c), 1 / p);
}

inline double average(const GridFunction& f, const DyadicCube& q, double p) {
    return average_cells(f, GridGeometry(f).cells(q), p);
}

// Average over the triple cube, clipped to the box.
inline double triple_average(const GridFunction& f, const DyadicCube& q, double p) {
    return average_cells(f, GridGeometry(f).cells(q, true, true), p);
}

// ---------------------------------------------------------------------
// sparse families
// ---------------------------------------------------------------------

struct SparseFamily {
    CubeCollection cubes;
    double gamma = 0.5;
    GridGeometry grid;
    std::map<DyadicCube, std::vector<std::size_t>> witnesses;  // sorted flat cell indices E_Q

    void add(const DyadicCube& q, std::vector<std::size_t> cells) {
        std::sort(cells.begin(), cells.end());
        cubes.insert(q);
        witnesses[q] = std::move(cells);
    }
};

struct SparseCheck {
    bool ok = true;
    std::string reason;
    std::optional<std::pair<DyadicCube, DyadicCube>> overlap;
    double min_fraction = 1;
};

inline SparseCheck verify_sparse(const SparseFamily& fam) {
    SparseCheck r;
    std::unordered_map<std::size_t, const DyadicCube*> owner;
    for (const auto& q : fam.cubes.cubes()) {
        auto it = fam.witnesses.find(q);
        if (it == fam.witnesses.end()) {
            r.ok = false;
            r.reason = "missing witness for " + q.str();
            return r;
        }
        const CellBox box = fam.grid.cells(q);
        const std::size_t qcells = box.count();
        std::vector<long> idx;
        for (std::size_t c : it->second) {
            idx = fam.grid.unflatten(c);
            for (int a = 0; a < fam.grid.d; ++a)
                if (idx[std::size_t(a)] < box.lo[std::size_t(a)] || idx[std::size_t(a)] >= box.hi[std::size_t(a)]) {
                    r.ok = false;
                    r.reason = "witness of " + q.str() + " leaves the cube";
                    return r;
                }
            auto [pos, fresh] = owner.emplace(c, &it->first);
            if (!fresh) {
                r.ok = false;
                r.reason = "witnesses of " + pos->second->str() + " and " + q.str() + " overlap";
                r.overlap = std::make_pair(*pos->second, q);
                return r;
            }
        }
        const double frac = double(it->second.size()) / double(qcells);
        r.min_fraction = std::min(r.min_fraction, frac);
        // exact in cell counts: |E_Q| >= gamma |Q|
        if (double(it->second.size()) < fam.gamma * double(qcells)) {
            r.ok = false;
            r.reason = "witness of " + q.str() + " below the gamma fraction";
            return r;
        }
    }
    return r;
}

inline double sparse_form(const SparseFamily& fam, const GridFunction& f1, const GridFunction& f2, double p,
                          double q, bool tripled) {
    double s = 0;
    for (const auto& Q : fam.cubes.cubes()) {
        double a2 = tripled ? triple_average(f2, Q, q) : average(f2, Q, q);
        s += Q.volume() * average(f1, Q, p) * a2;
    }
    return s;
}

// ---------------------------------------------------------------------
// Lorentz l^{r,1}(mu)
// ---------------------------------------------------------------------

struct Atom {
    double value = 0;  // beta(Q)
    double mass = 0;   // mu({Q}) = |Q|
};

inline double lorentz_r1_norm(std::vector<Atom> beta, double r) {
    if (!(r > 1)) throw std::invalid_argument("lorentz_r1_norm: r must exceed 1");
    std::sort(beta.begin(), beta.end(), [](const Atom& a, const Atom& b) { return std::abs(a.value) > std::abs(b.value); });
    double W = 0, prev = 0, s = 0;
    for (const auto& a : beta) {
        W += a.mass;
        double cur = std::pow(W, 1 / r);
        s += std::abs(a.value) * (cur - prev);
        prev = cur;
    }
    return s;
}

inline double lp_norm_mu(const std::vector<Atom>& beta, double p) {
    double s = 0;
    for (const auto& a : beta) s += std::pow(std::abs(a.value), p) * a.mass;
    return std::pow(s, 1 / p);
}

inline double sup_norm(const std::vector<Atom>& beta) {
    double m = 0;
    for (const auto& a : beta) m = std::max(m, std::abs(a.value));
    return m;
}

}  // namespace rsparse
