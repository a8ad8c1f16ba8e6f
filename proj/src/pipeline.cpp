#include "extsrc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <iostream>

#include <nlohmann/json.hpp>

#include "extsrc/io.hpp"
#include "extsrc/montecarlo.hpp"
#include "extsrc/moments.hpp"
#include "extsrc/oracle.hpp"
#include "extsrc/rhp.hpp"

namespace extsrc {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Session {
    RunConfig rc;
    EnsembleConfig cfg;
    std::shared_ptr<MopsSolver> solver;
    std::vector<CheckResult> checks;

    Session(const RunConfig& rc_, EnsembleConfig cfg_)
        : rc(rc_), cfg(std::move(cfg_)),
          solver(std::make_shared<MopsSolver>(cfg)) {}

    double tol(const std::string& name, double dflt) const {
        auto it = rc.tol.find(name);
        return it == rc.tol.end() ? dflt : it->second;
    }

    void add(const std::string& name, double value, double tolerance) {
        checks.push_back({name, value, tolerance, value <= tolerance});
    }

    GridSpec grid() const {
        return rc.grid ? *rc.grid : GridSpec::standard(cfg.spectrum());
    }

    std::string out(const std::string& file) const {
        return rc.out_dir + "/" + file;
    }

    bool two_eigenvalues() const { return cfg.p() == 2; }

    // The c-coefficient formulas assume the ordering tail (a_1, a_2).
    bool assumption1_tail() const {
        const int n = cfg.n();
        return two_eigenvalues() && n >= 2 &&
               cfg.ordering().alpha[n - 2] == cfg.a(0) &&
               cfg.ordering().alpha[n - 1] == cfg.a(1);
    }
};

std::vector<double> fraction_points(const GridSpec& g, int count) {
    std::vector<double> pts(count);
    for (int i = 0; i < count; ++i)
        pts[i] = g.xmin + (g.xmax - g.xmin) * (i + 1) / (count + 1);
    return pts;
}

std::vector<std::pair<double, double>> point_pairs(const GridSpec& g, int count) {
    std::vector<double> pts = fraction_points(g, 2 * count);
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < count; ++i)
        pairs.emplace_back(pts[i], pts[2 * count - 1 - i]);
    return pairs;
}

// ---- individual check groups ------------------------------------------------

void check_moment_condition(Session& s) {
    const int n = s.cfg.n();
    MomentTable table = moment_matrix(s.cfg, s.solver->moments(), n, n + 1);
    ZtildeResult z = ztilde(table, n, s.cfg.spectrum(), s.cfg.cond_limit());
    s.add("moment_matrix_condition", static_cast<double>(z.cond),
          s.tol("cond_limit", s.cfg.cond_limit()));
}

void check_solve_residuals(Session& s) {
    double worst_p = 0, worst_q = 0;
    for (int k = 0; k < s.cfg.n(); ++k) {
        worst_p = std::max(worst_p, s.solver->P_at(k).max_residual);
        worst_q = std::max(worst_q, s.solver->Q_at(k).max_residual);
    }
    s.add("p_orthogonality_residual", worst_p, s.tol("orthogonality", 1e-8));
    s.add("q_orthogonality_residual", worst_q, s.tol("orthogonality", 1e-8));
}

void check_biorthogonality(Session& s) {
    const int n = s.cfg.n();
    double worst = 0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            const auto [value, scale] =
                s.solver->pairing(s.solver->P_at(j), s.solver->Q_at(k));
            const real delta = (j == k) ? 1.0L : 0.0L;
            worst = std::max(
                worst, static_cast<double>(std::abs(value - delta) / scale));
        }
    s.add("biorthogonality", worst, s.tol("biorthogonality", 1e-8));
}

void check_trace_reproducing(Session& s, const KernelBundle& bundle) {
    const int n = s.cfg.n();
    const double tr = bundle.trace();
    s.add("trace", std::abs(tr - n) / n, s.tol("trace", 1e-7));

    double worst = 0;
    for (const auto& [x, z] : point_pairs(s.grid(), 5)) {
        const double res = bundle.reproducing_residual(x, z);
        worst = std::max(worst, res / (1 + std::abs(bundle.sum(x, z))));
    }
    s.add("reproducing", worst, s.tol("reproducing", 1e-7));
}

void check_r1_nonnegative(Session& s, const KernelBundle& bundle) {
    GridSpec dense = s.grid();
    dense.steps = 201;
    double min_r1 = 0;
    for (double x : dense.points())
        min_r1 = std::min(min_r1, bundle.sum(x, x));
    s.add("r1_nonnegative", -min_r1, s.tol("r1_floor", 1e-10));
}

double cd_vs_sum_deviation(const KernelBundle& bundle, const GridSpec& grid,
                           bool classical) {
    double worst = 0;
    for (double x : grid.points())
        for (double y : grid.points()) {
            const double ks = bundle.sum(x, y);
            const double kc = classical ? bundle.cd_classical(x, y)
                                        : bundle.cd(x, y);
            worst = std::max(worst, std::abs(kc - ks) / (1 + std::abs(ks)));
        }
    return worst;
}

void check_cd(Session& s, const KernelBundle& bundle) {
    if (s.cfg.p() == 2)
        s.add("cd_vs_sum", cd_vs_sum_deviation(bundle, s.grid(), false),
              s.tol("cd", 1e-8));
    else if (s.cfg.p() == 1)
        s.add("cd_classical_vs_sum",
              cd_vs_sum_deviation(bundle, s.grid(), true), s.tol("cd", 1e-8));
}

void check_ordering_invariance(Session& s, const KernelBundle& bundle) {
    if (s.cfg.p() < 2) return;
    Ordering alt{std::vector<double>(s.cfg.ordering().alpha.rbegin(),
                                     s.cfg.ordering().alpha.rend())};
    if (alt.alpha == s.cfg.ordering().alpha)
        std::rotate(alt.alpha.begin(), alt.alpha.begin() + 1, alt.alpha.end());
    if (alt.alpha == s.cfg.ordering().alpha) return;

    EnsembleConfig cfg2 = EnsembleConfig::validated(
        s.cfg.potential(), s.cfg.spectrum(), alt);
    KernelBundle other(std::make_shared<MopsSolver>(cfg2));
    s.add("ordering_invariance",
          KernelBundle::max_grid_deviation(bundle, other, s.grid()),
          s.tol("ordering", 1e-8));
}

void check_ladders(Session& s) {
    if (!s.two_eigenvalues()) return;
    const int n1 = s.cfg.spectrum().entries[0].multiplicity;
    const int n2 = s.cfg.spectrum().entries[1].multiplicity;
    s.add("ladder_P", s.solver->ladder_check_P(n1, n2).max(),
          s.tol("ladder", 1e-8));
    s.add("ladder_Q", s.solver->ladder_check_Q(n1, n2).max(),
          s.tol("ladder", 1e-8));
}

void check_recurrence(Session& s) {
    if (!s.two_eigenvalues()) return;
    const int n = s.cfg.n();

    s.add("c_n_nm1_is_one",
          static_cast<double>(std::abs(s.solver->recurrence_c(n, n - 1) - 1.0L)),
          s.tol("c_unit", 1e-10));

    // Lemma 4.2 structural zeros over the extended range.
    double worst = 0;
    const auto& alpha = s.cfg.ordering().alpha;
    auto alpha_at = [&](int pos1based) { // extended ordering
        if (pos1based <= n) return alpha[pos1based - 1];
        return pos1based == n + 1 ? s.cfg.a(0) : s.cfg.a(1);
    };
    for (int j = 0; j <= n + 1; ++j)
        for (int k = 0; k <= n + 1; ++k) {
            bool zero = (j >= k + 2);
            if (!zero && k >= j + 3) {
                bool seen0 = false, seen1 = false;
                for (int pos = j + 2; pos <= k; ++pos) {
                    if (alpha_at(pos) == s.cfg.a(0)) seen0 = true;
                    if (alpha_at(pos) == s.cfg.a(1)) seen1 = true;
                }
                zero = seen0 && seen1;
            }
            if (!zero) continue;
            const auto [c, scale] = s.solver->recurrence_c_with_scale(j, k);
            worst = std::max(worst, static_cast<double>(std::abs(c) /
                                                        std::max<real>(scale, 1)));
        }
    s.add("lemma42_zeros", worst, s.tol("c_zero", 1e-10));

    if (s.assumption1_tail()) {
        const int n1 = s.cfg.spectrum().entries[0].multiplicity;
        const int n2 = s.cfg.spectrum().entries[1].multiplicity;
        auto h = [&](int k1, int k2, int slot) {
            return s.solver->h(MultiIndex{{k1, k2}}, slot);
        };
        auto rel = [](real got, real want) {
            return static_cast<double>(std::abs(got - want) /
                                       std::max<real>(std::abs(want), 1e-300L));
        };
        double worst_f = 0;
        if (n >= 2 && n1 >= 1 && n2 >= 1) {
            worst_f = std::max(worst_f,
                               rel(s.solver->recurrence_c(n - 2, n),
                                   h(n1, n2, 0) / h(n1 - 1, n2 - 1, 0)));
            worst_f = std::max(worst_f,
                               rel(s.solver->recurrence_c(n - 1, n),
                                   h(n1, n2, 0) / h(n1 - 1, n2, 0) +
                                       h(n1, n2, 1) / h(n1, n2 - 1, 1)));
            worst_f = std::max(worst_f,
                               rel(s.solver->recurrence_c(n - 1, n + 1),
                                   h(n1 + 1, n2, 1) / h(n1, n2 - 1, 1)));
        }
        s.add("c_formulas", worst_f, s.tol("c_formula", 1e-8));
    }
}

void check_rh(Session& s, const KernelBundle& bundle, bool dump) {
    if (!s.two_eigenvalues()) return;
    const int n1 = s.cfg.spectrum().entries[0].multiplicity;
    const int n2 = s.cfg.spectrum().entries[1].multiplicity;
    RhAssembler rh(s.solver, n1, n2);

    const std::vector<cxd> pts = {cxd(0, 2), cxd(1, 1), cxd(-3, -0.5)};
    double worst_dual = 0, worst_det = 0;
    std::vector<std::vector<std::string>> mat_rows;
    for (const cxd& z : pts) {
        const Matrix3 Y = rh.Y(z);
        const Matrix3 X = rh.X(z);
        worst_dual = std::max(
            worst_dual, max_abs_diff(X.transpose() * Y, Matrix3::identity()));
        worst_det = std::max(worst_det, std::abs(Y.det() - cxd(1, 0)));
        if (dump) {
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) {
                    mat_rows.push_back(
                        {format_double(z.real()), format_double(z.imag()),
                         "Y" + std::to_string(r + 1) + std::to_string(c + 1),
                         format_double(Y(r, c).real()),
                         format_double(Y(r, c).imag())});
                    mat_rows.push_back(
                        {format_double(z.real()), format_double(z.imag()),
                         "X" + std::to_string(r + 1) + std::to_string(c + 1),
                         format_double(X(r, c).real()),
                         format_double(X(r, c).imag())});
                }
        }
    }
    s.add("rh_duality", worst_dual, s.tol("duality", 1e-6));
    s.add("rh_det_y", worst_det, s.tol("unimodularity", 1e-6));

    // O(1/z) decay: the residual at |z| = 50 must be within 2x of the bound
    // extrapolated from |z| = 100.
    const cxd z50(35.355339059327378, 35.355339059327378);
    const cxd z100(70.710678118654755, 70.710678118654755);
    const double ry50 = rh.asymp_residual_Y(z50);
    const double ry100 = rh.asymp_residual_Y(z100);
    const double rx50 = rh.asymp_residual_X(z50);
    const double rx100 = rh.asymp_residual_X(z100);
    s.add("rh_asymp_y", ry50, 2.0 * ry100 * 2.0);
    s.add("rh_asymp_x", rx50, 2.0 * rx100 * 2.0);

    // Jump residual ladder at the spectral midpoint.
    const double x0 = (s.cfg.spectrum().entries[0].a +
                       s.cfg.spectrum().entries[1].a) / 2;
    std::vector<double> lad;
    for (double eps = 1e-2; eps > 1.2e-4; eps /= 2) lad.push_back(eps);
    lad.push_back(1e-4);
    double worst_ratio = 0, prev = -1, at_min = 0;
    std::vector<std::vector<std::string>> jump_rows;
    for (double eps : lad) {
        const double r = std::max(rh.jump_residual_Y(x0, eps),
                                  rh.jump_residual_X(x0, eps));
        if (prev > 0) worst_ratio = std::max(worst_ratio, r / prev);
        prev = r;
        at_min = r;
        if (dump)
            jump_rows.push_back({format_double(x0), format_double(eps),
                                 format_double(r)});
    }
    s.add("rh_jump_at_1e-4", at_min, s.tol("jump", 1e-3));
    s.add("rh_jump_monotone_ratio", worst_ratio, 1.2);

    double worst_k = 0;
    for (double x : s.grid().points())
        for (double y : s.grid().points()) {
            const double kc = bundle.cd(x, y);
            worst_k = std::max(worst_k, std::abs(rh.kernel(x, y) - kc) /
                                            (1 + std::abs(kc)));
        }
    s.add("rh_kernel_vs_cd", worst_k, s.tol("cd", 1e-8));

    if (dump) {
        write_csv_atomic(s.out("rh_matrices.csv"),
                         {"z_re", "z_im", "entry", "value_re", "value_im"},
                         mat_rows);
        write_csv_atomic(s.out("rh_jump.csv"), {"x", "eps", "residual"},
                         jump_rows);
    }
}

void check_oracle(Session& s, const KernelBundle& bundle) {
    if (s.cfg.n() > 3) return;
    JpdfOracle oracle(s.cfg, s.rc.workers);
    double worst1 = 0;
    for (double t : fraction_points(s.grid(), 10)) {
        const double ro = oracle.r1(t);
        const double rk = bundle.sum(t, t);
        worst1 = std::max(worst1, std::abs(ro - rk) / (1 + std::abs(rk)));
    }
    s.add("oracle_r1", worst1, s.tol("oracle", 1e-6));

    if (s.cfg.n() >= 2) {
        double worst2 = 0;
        for (const auto& [x, y] : point_pairs(s.grid(), 5)) {
            const double ro = oracle.r2(x, y);
            const double rk = bundle.correlation(std::vector<double>{x, y});
            worst2 = std::max(worst2, std::abs(ro - rk) / (1 + std::abs(rk)));
        }
        s.add("oracle_r2", worst2, s.tol("oracle", 1e-6));
    }
}

void check_mc(Session& s, const KernelBundle& bundle, bool dump) {
    if (!s.cfg.potential().is_gaussian()) return;
    MCConfig mc = MCConfig::make(s.cfg, s.rc.samples, s.rc.seed, s.rc.workers);

    MCReport rep = mc_avg_charpoly(mc);
    const MonicPolynomial& P = s.solver->P_at(s.cfg.n());
    double worst = 0;
    for (int r = 0; r < s.cfg.n(); ++r) {
        const double se = std::max(rep.coeff_se[r], 1e-300);
        worst = std::max(
            worst, std::abs(rep.coeff[r] - static_cast<double>(P.coeffs[r])) / se);
    }
    s.add("mc_charpoly_sigmas", worst, s.tol("mc_sigmas", 4.0));

    DensityReport dens = mc_density_check(mc, bundle);
    s.add("mc_density_sigmas", dens.max_sigma_dev, s.tol("mc_sigmas", 4.0));

    if (dump) {
        nlohmann::ordered_json j = rep.to_json();
        j["max_density_sigma"] = dens.max_sigma_dev;
        write_file_atomic(s.out("mc_report.json"), j.dump(2) + "\n");
        dump_histogram_csv(s.out("mc_histogram.csv"), dens.hist);
    }
}

// ---- artifact dumps ---------------------------------------------------------

void dump_moments(Session& s) {
    const int n = s.cfg.n();
    MomentTable table = moment_matrix(s.cfg, s.solver->moments(), n, n + 1);
    dump_moments_csv(s.out("moments.csv"), table);
    ZtildeResult z = ztilde(table, n, s.cfg.spectrum(), s.cfg.cond_limit());
    ordered_json j;
    j["ztilde"] = static_cast<double>(z.ztilde);
    j["zhat"] = static_cast<double>(z.zhat);
    j["condition"] = static_cast<double>(z.cond);
    write_file_atomic(s.out("ztilde.json"), j.dump(2) + "\n");
}

void dump_polys(Session& s) {
    std::vector<std::vector<std::string>> rows;
    auto slot_index = [&](const MultiIndex& idx, int slot) {
        return std::to_string(slot < idx.size() ? idx[slot] : 0);
    };
    for (int k = 0; k <= s.cfg.n(); ++k) {
        const MonicPolynomial& P = s.solver->P_at(k);
        for (int r = 0; r <= P.degree(); ++r)
            rows.push_back({"P", slot_index(P.index, 0), slot_index(P.index, 1),
                            std::to_string(r),
                            format_double(static_cast<double>(P.coeff(r)))});
    }
    for (int k = 0; k < s.cfg.n(); ++k) {
        const TypeIFunction& Q = s.solver->Q_at(k);
        for (int part = 0; part < Q.index.size(); ++part) {
            const std::string kind = "Q" + std::to_string(part + 1);
            for (size_t r = 0; r < Q.parts[part].size(); ++r)
                rows.push_back({kind, slot_index(Q.index, 0),
                                slot_index(Q.index, 1), std::to_string(r),
                                format_double(static_cast<double>(
                                    Q.parts[part][r]))});
        }
    }
    write_csv_atomic(s.out("polys.csv"), {"kind", "k1", "k2", "power", "value"},
                     rows);

    if (s.two_eigenvalues()) {
        const int n1 = s.cfg.spectrum().entries[0].multiplicity;
        const int n2 = s.cfg.spectrum().entries[1].multiplicity;
        std::vector<std::vector<std::string>> hrows;
        for (int k1 = 0; k1 <= n1; ++k1)
            for (int k2 = 0; k2 <= n2; ++k2)
                for (int slot = 0; slot < 2; ++slot)
                    hrows.push_back(
                        {std::to_string(k1), std::to_string(k2),
                         std::to_string(slot + 1),
                         format_double(static_cast<double>(
                             s.solver->h(MultiIndex{{k1, k2}}, slot)))});
        write_csv_atomic(s.out("htable.csv"), {"k1", "k2", "side", "value"},
                         hrows);
    }
}

void dump_correlations(Session& s, const KernelBundle& bundle) {
    std::vector<std::vector<std::string>> r1rows;
    for (double x : s.grid().points())
        r1rows.push_back({format_double(x), format_double(bundle.sum(x, x))});
    write_csv_atomic(s.out("r1.csv"), {"x", "R1"}, r1rows);

    std::vector<std::vector<std::string>> r2rows;
    for (const auto& [x, y] : point_pairs(s.grid(), 5))
        r2rows.push_back(
            {format_double(x), format_double(y),
             format_double(bundle.correlation(std::vector<double>{x, y}))});
    write_csv_atomic(s.out("r2.csv"), {"lambda1", "lambda2", "R2"}, r2rows);
}

// ---- summary ----------------------------------------------------------------

int finalize(Session& s) {
    ordered_json j;
    j["subcommand"] = s.rc.subcommand;
    j["config"] = s.cfg.to_json();
    j["seed"] = s.rc.seed;
    j["samples"] = s.rc.samples;
    j["generated_at"] = static_cast<long>(std::time(nullptr));
    auto arr = ordered_json::array();
    bool all = true;
    for (const CheckResult& c : s.checks) {
        ordered_json e;
        e["check"] = c.name;
        e["value"] = c.value;
        e["tolerance"] = c.tolerance;
        e["pass"] = c.pass;
        arr.push_back(e);
        all = all && c.pass;
    }
    j["checks"] = arr;
    j["pass"] = all;
    const std::string file =
        s.rc.subcommand == "full-report" ? "report.json"
                                         : s.rc.subcommand + ".json";
    write_file_atomic(s.out(file), j.dump(2) + "\n");

    for (const CheckResult& c : s.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name
                  << "  value=" << format_double(c.value)
                  << " tol=" << format_double(c.tolerance) << "\n";
    if (!all) {
        for (const CheckResult& c : s.checks)
            if (!c.pass)
                std::cerr << "check failed: " << c.name << " (value "
                          << format_double(c.value) << " > tolerance "
                          << format_double(c.tolerance) << ")\n";
        return 1;
    }
    return 0;
}

} // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {
        "moments",  "polys",    "kernel",      "correlations", "cd-check",
        "rh-check", "mc-validate", "oracle-check", "full-report"};
    return names;
}

int run(const RunConfig& rc) {
    if (std::find(subcommands().begin(), subcommands().end(), rc.subcommand) ==
        subcommands().end())
        throw config_error("unknown subcommand: " + rc.subcommand);

    Session s(rc, EnsembleConfig::from_json_file(rc.config_path));

    if (rc.subcommand == "moments") {
        dump_moments(s);
        check_moment_condition(s);
    } else if (rc.subcommand == "polys") {
        dump_polys(s);
        check_solve_residuals(s);
    } else if (rc.subcommand == "kernel") {
        KernelBundle bundle(s.solver);
        bundle.dump_grid_csv(s.out("kernel_grid.csv"), s.grid());
        bundle.dump_diagonal_csv(s.out("kernel_diagonal.csv"), s.grid());
        check_r1_nonnegative(s, bundle);
    } else if (rc.subcommand == "correlations") {
        KernelBundle bundle(s.solver);
        dump_correlations(s, bundle);
        check_r1_nonnegative(s, bundle);
    } else if (rc.subcommand == "cd-check") {
        if (s.cfg.p() != 2 && s.cfg.p() != 1)
            throw config_error("Christoffel-Darboux requires exactly two "
                               "distinct eigenvalues");
        KernelBundle bundle(s.solver);
        check_cd(s, bundle);
    } else if (rc.subcommand == "rh-check") {
        if (s.cfg.p() != 2)
            throw config_error("the Riemann-Hilbert suite requires exactly "
                               "two distinct eigenvalues");
        KernelBundle bundle(s.solver);
        check_rh(s, bundle, /*dump=*/true);
    } else if (rc.subcommand == "mc-validate") {
        if (!s.cfg.potential().is_gaussian())
            throw config_error("mc-validate requires V(x) = x^2/2");
        KernelBundle bundle(s.solver);
        check_mc(s, bundle, /*dump=*/true);
    } else if (rc.subcommand == "oracle-check") {
        if (s.cfg.n() > 3)
            throw config_error("oracle-check requires n <= 3");
        KernelBundle bundle(s.solver);
        check_oracle(s, bundle);
    } else { // full-report
        KernelBundle bundle(s.solver);
        check_moment_condition(s);
        check_solve_residuals(s);
        check_biorthogonality(s);
        check_trace_reproducing(s, bundle);
        check_r1_nonnegative(s, bundle);
        check_cd(s, bundle);
        check_ordering_invariance(s, bundle);
        if (s.two_eigenvalues()) {
            check_ladders(s);
            check_recurrence(s);
            check_rh(s, bundle, /*dump=*/false);
        }
        check_oracle(s, bundle);
        check_mc(s, bundle, /*dump=*/false);
    }
    return finalize(s);
}

} // namespace extsrc
