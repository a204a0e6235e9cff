// Experiment runner: one subcommand per module, CSV artifacts under a per-run directory.

#include "CLI11.hpp"
#include "rsparse/rsparse.hpp"

#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace rsparse;

namespace {

double parse_real(const std::string& s, const std::string& key) {
    try {
        if (s.find('/') != std::string::npos) return Rational::parse(s).to_double();
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid value for " + key + ": '" + s + "'");
    }
}

Rational parse_rational(const std::string& s, const std::string& key) {
    try {
        if (s.find('.') != std::string::npos) {
            // decimal literal: exact power-of-ten denominator
            auto dot = s.find('.');
            std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            long long den = 1;
            for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
            return Rational(std::stoll(digits), den);
        }
        return Rational::parse(s);
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid rational for " + key + ": '" + s + "'");
    }
}

struct Run {
    CLI::App* app = nullptr;
    std::string out = "runs";

    fs::path directory() const {
        std::istringstream in(app->config_to_str(true, false));
        std::string line, kept;
        while (std::getline(in, line))
            if (line.rfind("out=", 0) != 0) kept += line + "\n";
        return io::run_directory(out, app->get_name(), kept);
    }
};

// Plain key=value files apply to whichever subcommand was selected.
class SubcommandConfig : public CLI::ConfigBase {
public:
    explicit SubcommandConfig(const CLI::App* root) : root_(root) {}
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        auto items = CLI::ConfigBase::from_config(input);
        auto subs = root_->get_subcommands();
        if (subs.empty()) return items;
        for (auto& it : items)
            if (it.parents.empty()) it.parents = {subs.front()->get_name()};
        return items;
    }

private:
    const CLI::App* root_;
};

Run add_sub(CLI::App& root, const std::string& name, const std::string& desc) {
    Run r;
    r.app = root.add_subcommand(name, desc);
    r.app->fallthrough();
    return r;
}

void add_out(Run& r) { r.app->add_option("--out", r.out, "base directory for run directories")->capture_default_str(); }

MinkowskiGauge gauge_from(const std::string& spec, int d) { return MinkowskiGauge::parse(spec, d); }

int default_ncirc(int ncirc, int d) { return ncirc > 0 ? ncirc : d + 2; }

std::shared_ptr<const LayerTables> tables_for(double lambda, int ncirc) {
    auto b = std::make_shared<CancellingBump>(build_phi0(lambda, ncirc));
    return std::make_shared<const LayerTables>(*b, build_psi(b));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse-domination experiments for Riesz means"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file; command-line flags override it");
    app.config_formatter(std::make_shared<SubcommandConfig>(&app));
    app.allow_config_extras(CLI::config_extras_mode::error);

    // ---------------- exponents
    Run ex = add_sub(app, "exponents", "exponent calculus for given d and lambda");
    int ex_d = 2;
    std::string ex_lambda = "1/6", ex_p0, ex_r0;
    ex.app->add_option("--d", ex_d)->capture_default_str();
    ex.app->add_option("--lambda", ex_lambda, "num/den")->capture_default_str();
    ex.app->add_option("--p0", ex_p0, "optional p0 for r*, q*");
    ex.app->add_option("--r0", ex_r0, "optional r0 for r*, q*");
    add_out(ex);

    // ---------------- bump
    Run bu = add_sub(app, "bump", "cancelling bump, annular bump and their moment report");
    int bu_d = 2, bu_ncirc = 0, bu_stride = 64;
    std::string bu_lambda = "1/2";
    bu.app->add_option("--d", bu_d)->capture_default_str();
    bu.app->add_option("--lambda", bu_lambda)->capture_default_str();
    bu.app->add_option("--ncirc", bu_ncirc, "0 means d+2")->capture_default_str();
    bu.app->add_option("--stride", bu_stride, "sample stride for the CSV")->capture_default_str();
    add_out(bu);

    // ---------------- layers
    Run la = add_sub(app, "layers", "layer profiles and their pointwise bound report");
    std::string la_lambda = "1/2", la_a = "1";
    int la_lmin = 0, la_lmax = 7, la_ncirc = 0, la_d = 2, la_rows = 2048;
    std::vector<int> la_N1{2, 4};
    la.app->add_option("--lambda", la_lambda)->capture_default_str();
    la.app->add_option("--a", la_a)->capture_default_str();
    la.app->add_option("--lmin", la_lmin)->capture_default_str();
    la.app->add_option("--lmax", la_lmax)->capture_default_str();
    la.app->add_option("--d", la_d, "only used for the default ncirc")->capture_default_str();
    la.app->add_option("--ncirc", la_ncirc, "0 means d+2")->capture_default_str();
    la.app->add_option("--N1", la_N1)->delimiter(',')->capture_default_str();
    la.app->add_option("--rows", la_rows, "samples per layer in the CSV")->capture_default_str();
    add_out(la);

    // ---------------- kernel
    Run ke = add_sub(app, "kernel", "layer kernels and the localization report");
    int ke_d = 2, ke_lmin = 3, ke_lmax = 7, ke_N = 4, ke_ncirc = 0;
    std::size_t ke_n = 0, ke_max_n = 4096;
    double ke_box = 0;
    std::string ke_gauge = "ball", ke_lambda = "1/2", ke_a = "1";
    ke.app->add_option("--d", ke_d)->capture_default_str();
    ke.app->add_option("--gauge", ke_gauge, "ball | ellipsoid:a1,a2,...")->capture_default_str();
    ke.app->add_option("--lambda", ke_lambda)->capture_default_str();
    ke.app->add_option("--a", ke_a)->capture_default_str();
    ke.app->add_option("--ell-min", ke_lmin)->capture_default_str();
    ke.app->add_option("--ell-max", ke_lmax)->capture_default_str();
    ke.app->add_option("--N", ke_N)->capture_default_str();
    ke.app->add_option("--ncirc", ke_ncirc, "0 means d+2")->capture_default_str();
    ke.app->add_option("--n", ke_n, "grid points per axis; 0 picks the smallest valid")->capture_default_str();
    ke.app->add_option("--box", ke_box, "box half width; 0 picks the smallest valid")->capture_default_str();
    ke.app->add_option("--max-n", ke_max_n, "largest grid allowed")->capture_default_str();
    add_out(ke);

    // ---------------- sparse
    Run sp = add_sub(app, "sparse", "recursive sparse domination trials");
    int sp_d = 2, sp_trials = 20, sp_level = 8, sp_floor = 0;
    std::size_t sp_n = 512;
    std::uint64_t sp_seed = 1;
    bool sp_sym = false;
    std::string sp_lambda = "1/6", sp_p = "6/5", sp_q = "21/10", sp_gamma = "1/2", sp_a = "1", sp_gauge = "ball";
    sp.app->add_option("--d", sp_d)->capture_default_str();
    sp.app->add_option("--gauge", sp_gauge)->capture_default_str();
    sp.app->add_option("--lambda", sp_lambda)->capture_default_str();
    sp.app->add_option("--a", sp_a)->capture_default_str();
    sp.app->add_option("--p", sp_p)->capture_default_str();
    sp.app->add_option("--q", sp_q)->capture_default_str();
    sp.app->add_option("--gamma", sp_gamma)->capture_default_str();
    sp.app->add_option("--trials", sp_trials)->capture_default_str();
    sp.app->add_option("--n", sp_n)->capture_default_str();
    sp.app->add_option("--level", sp_level, "level of the root cube S")->capture_default_str();
    sp.app->add_option("--floor", sp_floor, "recursion floor; 0 uses n_circ of the gauge")->capture_default_str();
    sp.app->add_option("--seed", sp_seed)->capture_default_str();
    sp.app->add_flag("--symmetric", sp_sym, "threshold on both functions");
    add_out(sp);

    // ---------------- xi
    Run xi = add_sub(app, "xi", "Xi-form scaling on adversarial cube families");
    int xi_trials = 10, xi_cubes = 16, xi_smax = 3, xi_maxlevel = 1, xi_ncirc = 0;
    std::size_t xi_n = 1024;
    double xi_box = 512;
    std::uint64_t xi_seed = 1;
    std::string xi_lambda = "1/6", xi_p = "6/5", xi_r = "2";
    xi.app->add_option("--lambda", xi_lambda)->capture_default_str();
    xi.app->add_option("--p", xi_p)->capture_default_str();
    xi.app->add_option("--r", xi_r)->capture_default_str();
    xi.app->add_option("--trials", xi_trials)->capture_default_str();
    xi.app->add_option("--cubes", xi_cubes)->capture_default_str();
    xi.app->add_option("--smax", xi_smax)->capture_default_str();
    xi.app->add_option("--max-level", xi_maxlevel)->capture_default_str();
    xi.app->add_option("--ncirc", xi_ncirc, "0 means d+2")->capture_default_str();
    xi.app->add_option("--n", xi_n)->capture_default_str();
    xi.app->add_option("--box", xi_box)->capture_default_str();
    xi.app->add_option("--seed", xi_seed)->capture_default_str();
    add_out(xi);

    // ---------------- weights
    Run we = add_sub(app, "weights", "A1, reverse Hoelder and Wilson characteristics");
    int we_d = 2;
    std::size_t we_n = 64;
    double we_box = 8, we_budget = 2;
    std::string we_w = "power:1", we_scan = "1.1:4.0:0.1";
    we.app->add_option("--d", we_d)->capture_default_str();
    we.app->add_option("--n", we_n)->capture_default_str();
    we.app->add_option("--box", we_box)->capture_default_str();
    we.app->add_option("--w", we_w, "const | power:ALPHA | step:A,B")->capture_default_str();
    we.app->add_option("--sigma-scan", we_scan, "lo:hi:step")->capture_default_str();
    we.app->add_option("--rh-budget", we_budget)->capture_default_str();
    add_out(we);

    // ---------------- weighted-weaktype
    Run ww = add_sub(app, "weighted-weaktype", "weighted weak-type ratios across dilations");
    WeakTypeOptions wo;
    std::string ww_lambda = "1/6", ww_p = "6/5", ww_a = "1", ww_w = "power:0.5";
    int ww_d = 2;
    ww.app->add_option("--d", ww_d)->capture_default_str();
    ww.app->add_option("--lambda", ww_lambda)->capture_default_str();
    ww.app->add_option("--p", ww_p)->capture_default_str();
    ww.app->add_option("--a", ww_a)->capture_default_str();
    ww.app->add_option("--w", ww_w)->capture_default_str();
    ww.app->add_option("--trials", wo.trials)->capture_default_str();
    ww.app->add_option("--n", wo.n)->capture_default_str();
    ww.app->add_option("--box", wo.L)->capture_default_str();
    ww.app->add_option("--seed", wo.seed)->capture_default_str();
    ww.app->add_option("--t", wo.dilations)->delimiter(',')->capture_default_str();
    add_out(ww);

    // ---------------- converge
    Run co = add_sub(app, "converge", "sup-norm convergence of Riesz means on a Gaussian");
    int co_d = 2;
    std::size_t co_n = 512;
    double co_box = 16;
    std::string co_p = "6/5", co_gauge = "ball";
    std::vector<double> co_a{1, 2}, co_t{4, 8, 16, 32};
    co.app->add_option("--d", co_d)->capture_default_str();
    co.app->add_option("--gauge", co_gauge)->capture_default_str();
    co.app->add_option("--p", co_p, "lambda is the critical index of p")->capture_default_str();
    co.app->add_option("--a", co_a)->delimiter(',')->capture_default_str();
    co.app->add_option("--t", co_t)->delimiter(',')->capture_default_str();
    co.app->add_option("--n", co_n)->capture_default_str();
    co.app->add_option("--box", co_box)->capture_default_str();
    add_out(co);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (ex.app->parsed()) {
            const Rational lam = parse_rational(ex_lambda, "lambda");
            const Rational pl = p_lambda(lam, ex_d);
            const auto tz = trapezoid(lam, ex_d);
            auto dir = ex.directory();
            std::vector<std::string> head{"d", "lambda", "p_lambda", "q_opt", "P1x", "P1y", "P2x", "P2y", "sigma0",
                                          "P3x", "P3y", "P4x", "P4y", "critical_index"};
            std::string qo = "na";
            if (pl < Rational(2 * ex_d, ex_d + 1)) qo = q_opt(pl, ex_d).str();
            std::vector<io::Cell> row{(long long)ex_d, lam.str(), pl.str(), qo,
                                      tz.P1.first.str(), tz.P1.second.str(), tz.P2.first.str(), tz.P2.second.str(),
                                      sigma_threshold(lam, ex_d).str(),
                                      tz.P3.first.str(), tz.P3.second.str(), tz.P4.first.str(), tz.P4.second.str(),
                                      critical_index(pl, ex_d).str()};
            if (!ex_p0.empty() && !ex_r0.empty()) {
                auto rq = r_star_q_star(pl, parse_rational(ex_p0, "p0"), parse_rational(ex_r0, "r0"), ex_d);
                head.insert(head.end(), {"r_star", "q_star"});
                row.push_back(rq.r_star.str());
                row.push_back(rq.q_star.str());
            }
            io::CsvWriter(dir / "exponents.csv", head).row(row);
            std::cout << dir.string() << "\n";
        } else if (bu.app->parsed()) {
            const double lam = parse_real(bu_lambda, "lambda");
            const int N = default_ncirc(bu_ncirc, bu_d);
            if (N <= bu_d) throw std::invalid_argument("ncirc must exceed d");
            if (bu_stride < 1) throw std::invalid_argument("stride must be positive");
            auto b = std::make_shared<CancellingBump>(build_phi0(lam, N));
            auto ps = build_psi(b);
            auto dir = bu.directory();
            {
                io::CsvWriter w(dir / "phi0.csv", {"x", "phi0"});
                const long K = long(b->half_count());
                for (long k = -K; k <= K; k += bu_stride) w.row({double(k) * b->sample_step, b->phi0_samples[std::size_t(k + K)]});
            }
            {
                io::CsvWriter w(dir / "psi.csv", {"x", "psi"});
                const long K = long(ps.half_count());
                for (long k = -K; k <= K; k += bu_stride) w.row({double(k) * ps.sample_step, ps.psi_samples[std::size_t(k + K)]});
            }
            io::CsvWriter w(dir / "moments.csv", {"function", "j", "moment_real", "moment_imag", "relative_magnitude", "pass"});
            const double lr = std::round(lam);
            for (int j = 0; j <= N; ++j) {
                if (std::abs(lam - lr) < 1e-12 && j == int(lr)) {
                    // excluded moment for Phi0; report it anyway, no pass claim
                    auto m = check_moments(b->phi0_samples, b->sample_step, lam, j);
                    w.row({std::string("phi0_excluded"), (long long)j, m.value.real(), m.value.imag(), m.relative, std::string("na")});
                } else {
                    auto m = check_moments(b->phi0_samples, b->sample_step, lam, j);
                    w.row({std::string("phi0"), (long long)j, m.value.real(), m.value.imag(), m.relative, m.ok() && m.relative <= 1e-6});
                }
                auto m = check_moments(ps.psi_samples, ps.sample_step, lam, j);
                w.row({std::string("psi"), (long long)j, m.value.real(), m.value.imag(), m.relative, m.ok() && m.relative <= 1e-6});
            }
            std::cout << dir.string() << "\n";
        } else if (la.app->parsed()) {
            const double lam = parse_real(la_lambda, "lambda");
            const double a = parse_real(la_a, "a");
            if (la_lmin < 0 || la_lmax < la_lmin) throw std::invalid_argument("need 0 <= lmin <= lmax");
            auto T = tables_for(lam, default_ncirc(la_ncirc, la_d));
            RieszSymbol sym{a, lam, 1};
            auto dir = la.directory();
            std::vector<LayerProfile> profiles;
            io::CsvWriter w(dir / "layers.csv", {"ell", "rho", "h"});
            for (int l = la_lmin; l <= la_lmax; ++l) {
                profiles.push_back(build_layer(sym, T, l));
                const auto& p = profiles.back();
                const std::size_t stride = std::max<std::size_t>(1, p.rho.size() / std::size_t(std::max(la_rows, 1)));
                for (std::size_t i = 0; i < p.rho.size(); i += stride) w.row({(long long)l, p.rho[i], p.values[i]});
            }
            io::CsvWriter b(dir / "bounds.csv", {"N1", "ell", "sup_weighted", "ratio", "pass"});
            if (profiles.size() >= 3)
                for (int N1 : la_N1) {
                    auto rep = verify_layer_bounds(profiles, N1);
                    for (const auto& r : rep.rows) b.row({(long long)N1, (long long)r.ell, r.sup_weighted, rep.ratio, rep.pass});
                }
            std::cout << dir.string() << "\n";
        } else if (ke.app->parsed()) {
            const double lam = parse_real(ke_lambda, "lambda");
            const double a = parse_real(ke_a, "a");
            auto g = gauge_from(ke_gauge, ke_d);
            auto gc = gauge_constants(g);
            if (ke_lmin < 0 || ke_lmax < ke_lmin) throw std::invalid_argument("need 0 <= ell-min <= ell-max");
            // the largest layer fixes the box
            auto [need_n, need_L] = kernel_grid_for(ke_lmax, g, gc.C0);
            const double L = ke_box > 0 ? ke_box : need_L;
            if (L < need_L) {
                std::ostringstream m;
                m << "box half width " << L << " too small for ell " << ke_lmax << "; minimum box half width " << need_L;
                throw std::invalid_argument(m.str());
            }
            std::size_t n = ke_n ? ke_n : next_pow2(std::size_t(std::ceil(4 * L * g.max_extent() / std::numbers::pi)));
            if (n > ke_max_n) {
                std::ostringstream m;
                m << "ell-max " << ke_lmax << " exceeds box capacity: needs n = " << n << " > max-n " << ke_max_n
                  << " (minimum box half width " << need_L << ")";
                throw std::invalid_argument(m.str());
            }
            (void)need_n;
            auto T = tables_for(lam, default_ncirc(ke_ncirc, ke_d));
            RieszSymbol sym{a, lam, 1};
            std::vector<KernelReport> rows;
            for (int l = ke_lmin; l <= ke_lmax; ++l) {
                auto K = kernel(build_layer(sym, T, l), g, n, L, gc.C0);
                rows.push_back(kernel_report(K, l, lam, gc, ke_N));
            }
            auto dir = ke.directory();
            io::CsvWriter w(dir / "kernel.csv", {"ell", "sup_inner", "sup_annulus", "sup_outer_scaled", "slope_fit",
                                                 "pass_flags", "majorant_constant", "argmax_radius", "n", "box"});
            std::string flags = "na";
            double slope = std::nan("");
            if (rows.size() >= 4) {
                auto rep = decay_report(rows, lam, ke_d);
                slope = rep.slope;
                flags = rep.inconclusive ? std::string("inconclusive")
                                         : std::string(rep.inner_decay ? "I" : "i") + (rep.slope_ok ? "S" : "s") +
                                               (rep.outer_uniform ? "O" : "o") + (rep.majorant_uniform ? "M" : "m");
            }
            for (const auto& r : rows)
                w.row({(long long)r.ell, r.sup_inner, r.sup_annulus, r.sup_outer_scaled, slope, flags,
                       r.majorant_constant, r.argmax_radius, (long long)n, L});
            std::cout << dir.string() << "\n";
        } else if (sp.app->parsed()) {
            SparseOptions o;
            o.lambda = parse_real(sp_lambda, "lambda");
            o.a = parse_real(sp_a, "a");
            o.p = parse_real(sp_p, "p");
            o.q = parse_real(sp_q, "q");
            o.gamma = parse_real(sp_gamma, "gamma");
            o.symmetric = sp_sym;
            auto g = gauge_from(sp_gauge, sp_d);
            o.floor_level = sp_floor > 0 ? sp_floor : gauge_constants(g).n_circ;
            if (sp_level < o.floor_level) throw std::invalid_argument("level of S is below the recursion floor");
            // S = [0, 2^level)^d inside the box [-2^(level+1), 2^(level+1))^d, so 3S fits
            const double L = std::ldexp(1.0, sp_level + 1);
            GridGeometry geo(sp_d, sp_n, L);
            if (std::numbers::pi / geo.h() < g.max_extent())
                throw std::invalid_argument("grid too coarse for the Riesz symbol; need n >= " +
                                            std::to_string(next_pow2(std::size_t(std::ceil(2 * L * g.max_extent() / std::numbers::pi)))));
            DyadicCube S{sp_level, std::vector<long>(std::size_t(sp_d), 0), 0};
            auto dir = sp.directory();
            io::CsvWriter w(dir / "trials.csv", {"trial", "lhs", "form_value", "ratio", "family_size", "max_depth"});
            std::mt19937_64 rng(sp_seed);
            double worst = 0;
            std::size_t fam = 0;
            int depth = 0;
            for (int t = 0; t < sp_trials; ++t) {
                auto [f1, f2] = random_sparse_pair(geo, S, rng);
                auto r = sparse_dominate(f1, f2, S, g, o);
                if (!r.check.ok) throw std::runtime_error("trial " + std::to_string(t) + ": " + r.check.reason);
                w.row({std::to_string(t), r.lhs, r.form, r.ratio, (long long)r.family.cubes.size(), (long long)r.max_depth});
                worst = std::max(worst, r.ratio);
                fam = std::max(fam, r.family.cubes.size());
                depth = std::max(depth, r.max_depth);
            }
            w.row({std::string("max"), std::nan(""), std::nan(""), worst, (long long)fam, (long long)depth});
            std::cout << dir.string() << "\n";
        } else if (xi.app->parsed()) {
            const double lam = parse_real(xi_lambda, "lambda");
            auto T = tables_for(lam, default_ncirc(xi_ncirc, 2));
            auto g = MinkowskiGauge::ball(2);
            RieszSymbol sym{1, lam, 1};
            GridGeometry geo(2, xi_n, xi_box);
            auto dir = xi.directory();
            io::CsvWriter w(dir / "xi.csv", {"trial", "s", "N", "log2_gain", "decreasing"});
            for (int t = 0; t < xi_trials; ++t) {
                auto fam = adversarial_xi_family(geo, xi_cubes, xi_maxlevel, parse_real(xi_p, "p"), parse_real(xi_r, "r"),
                                                 xi_seed + std::uint64_t(t));
                auto rep = xi_form_scaling(fam, xi_smax, g, sym, T);
                for (const auto& r : rep.rows) w.row({(long long)t, (long long)r.s, r.N, r.log2_gain, rep.decreasing});
            }
            std::cout << dir.string() << "\n";
        } else if (we.app->parsed()) {
            double lo, hi, st;
            char c1, c2;
            std::istringstream in(we_scan);
            if (!(in >> lo >> c1 >> hi >> c2 >> st) || c1 != ':' || c2 != ':')
                throw std::invalid_argument("invalid value for sigma-scan: '" + we_scan + "'");
            auto W = make_weight(we_w, GridGeometry(we_d, we_n, we_box));
            auto rep = weight_report(W, sigma_scan(lo, hi, st), we_budget);
            auto dir = we.directory();
            io::CsvWriter w(dir / "weights.csv", {"quantity", "sigma", "value", "cube_family"});
            const std::string fam = rep.exact_family ? "all_cubes" : "dyadic_shifted";
            w.row({std::string("a1"), std::nan(""), rep.a1, fam});
            w.row({std::string("a_infty"), std::nan(""), rep.a_infty, W.grid.n <= exact_wilson_limit ? std::string("all_cubes") : std::string("dyadic_shifted")});
            for (auto [s, v] : rep.rh) w.row({std::string("rh"), s, v, fam});
            w.row({std::string("sigma_of_w"), rep.sigma_of_w, rep.sigma_of_w, fam});
            std::cout << dir.string() << "\n";
        } else if (ww.app->parsed()) {
            wo.lambda = parse_real(ww_lambda, "lambda");
            wo.p = parse_real(ww_p, "p");
            wo.a = parse_real(ww_a, "a");
            auto g = MinkowskiGauge::ball(ww_d);
            auto W = make_weight(ww_w, GridGeometry(ww_d, wo.n, wo.L));
            auto rep = weighted_weaktype_experiment(W, g, wo);
            auto dir = ww.directory();
            io::CsvWriter w(dir / "weaktype.csv", {"trial", "t", "weak", "lp", "ratio"});
            for (const auto& r : rep.rows) w.row({std::to_string(r.trial), r.t, r.weak, r.lp, r.ratio});
            w.row({std::string("spread"), std::nan(""), rep.sigma_of_w, rep.p1, rep.spread});
            std::cout << dir.string() << "\n";
        } else if (co.app->parsed()) {
            const Rational p = parse_rational(co_p, "p");
            const double lam = critical_index(p, co_d).to_double();
            if (!(lam > 0)) throw std::invalid_argument("critical index of p must be positive");
            auto rows = riesz_convergence(gauge_from(co_gauge, co_d), lam, co_a, co_t, co_n, co_box);
            auto dir = co.directory();
            io::CsvWriter w(dir / "converge.csv", {"a", "t", "lambda", "sup_error", "monotone"});
            for (std::size_t i = 0; i < rows.size(); ++i) {
                bool mono = i == 0 || rows[i - 1].a != rows[i].a || rows[i].error < rows[i - 1].error;
                w.row({rows[i].a, rows[i].t, lam, rows[i].error, mono});
            }
            std::cout << dir.string() << "\n";
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
