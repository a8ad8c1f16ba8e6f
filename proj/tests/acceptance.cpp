// Acceptance suite: every criterion at its stated tolerance, one line each.
// Exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "extsrc/montecarlo.hpp"
#include "extsrc/oracle.hpp"
#include "extsrc/rhp.hpp"
#include "testutil.hpp"

using namespace extsrc;

namespace {

int failures = 0;

void report(const std::string& name, double value, double tolerance,
            bool pass, double seconds) {
    std::printf("%s %-28s  value=%-12.4g tol=%-10.4g (%.2fs)\n",
                pass ? "PASS" : "FAIL", name.c_str(), value, tolerance,
                seconds);
    if (!pass) ++failures;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             t0)
            .count();
    }
};

std::shared_ptr<MopsSolver> solver_for(EnsembleConfig cfg) {
    return std::make_shared<MopsSolver>(std::move(cfg));
}

double cd_grid_deviation(const KernelBundle& b) {
    const GridSpec grid = b.standard_grid();
    double worst = 0;
    for (double x : grid.points())
        for (double y : grid.points()) {
            const double ks = b.sum(x, y);
            worst = std::max(worst,
                             std::abs(b.cd(x, y) - ks) / (1 + std::abs(ks)));
        }
    return worst;
}

// ---- criteria ---------------------------------------------------------------

void criterion1_cd_identity() {
    Timer t;
    double worst = 0;
    worst = std::max(worst, cd_grid_deviation(KernelBundle(solver_for(
                                testutil::gauss_config({{-1, 1}, {1, 2}})))));
    worst = std::max(worst, cd_grid_deviation(KernelBundle(solver_for(
                                testutil::gauss_config({{-1, 2}, {1, 2}})))));
    const double secs = t.elapsed();
    report("1-christoffel-darboux", worst, 1e-8, worst <= 1e-8 && secs < 5.0,
           secs);
}

void criterion2_biorthogonality() {
    Timer t;
    double worst = 0;
    for (int n = 2; n <= 8; ++n) {
        const int n1 = (n + 1) / 2, n2 = n / 2;
        std::vector<EnsembleConfig> cfgs = {
            testutil::gauss_config({{-1.0, n1}, {1.0, n2}}),
            testutil::quartic_config({{-0.5, n1}, {0.5, n2}}),
            testutil::gauss_config({{0.0, n}})};
        for (const auto& cfg : cfgs) {
            auto solver = solver_for(cfg);
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const auto [val, scale] =
                        solver->pairing(solver->P_at(j), solver->Q_at(k));
                    const real want = j == k ? 1.0L : 0.0L;
                    worst = std::max(worst, static_cast<double>(
                                                std::abs(val - want) / scale));
                }
        }
    }
    const double secs = t.elapsed();
    report("2-biorthogonality", worst, 1e-8, worst <= 1e-8 && secs < 30.0,
           secs);
}

const std::vector<EnsembleConfig>& test_matrix() {
    static const std::vector<EnsembleConfig> configs = {
        testutil::gauss_config({{0.0, 1}}),
        testutil::gauss_config({{-1.0, 1}, {1.0, 1}}),
        testutil::gauss_config({{-1.0, 1}, {1.0, 2}}),
        testutil::gauss_config({{-1.0, 2}, {1.0, 2}}),
        testutil::gauss_config({{0.0, 3}}),
        testutil::quartic_config({{-0.5, 1}, {0.5, 1}}),
    };
    return configs;
}

void criterion3_trace_reproducing() {
    Timer t;
    double worst_trace = 0, worst_rep = 0;
    for (const auto& cfg : test_matrix()) {
        KernelBundle b(solver_for(cfg));
        worst_trace = std::max(worst_trace,
                               std::abs(b.trace() - cfg.n()) / cfg.n());
        const GridSpec g = b.standard_grid();
        const std::vector<std::pair<double, double>> pairs = {
            {g.xmin + 1, g.xmax - 1.5},
            {0.0, 0.0},
            {g.xmax - 1, g.xmin + 0.5},
            {0.5, -0.5},
            {1.0, 1.0}};
        for (const auto& [x, z] : pairs)
            worst_rep = std::max(worst_rep,
                                 b.reproducing_residual(x, z) /
                                     (1 + std::abs(b.sum(x, z))));
    }
    const double secs = t.elapsed();
    report("3a-trace", worst_trace, 1e-7, worst_trace <= 1e-7, secs);
    report("3b-reproducing", worst_rep, 1e-7, worst_rep <= 1e-7, 0.0);
}

void criterion4_ordering_invariance() {
    Timer t;
    const auto pot = testutil::gaussian_potential();
    const auto spec = SourceSpectrum::validated({{-1.0, 2}, {1.0, 1}});
    const auto cfg1 =
        EnsembleConfig::validated(pot, spec, Ordering{{-1, -1, 1}});
    const auto cfg2 =
        EnsembleConfig::validated(pot, spec, Ordering{{1, -1, -1}});
    auto s1 = solver_for(cfg1);
    auto s2 = solver_for(cfg2);
    KernelBundle b1(s1), b2(s2);
    const double dev =
        KernelBundle::max_grid_deviation(b1, b2, b1.standard_grid());

    double coeff_diff = 0;
    for (int k = 0; k < 3; ++k) {
        const auto& pa = s1->P_at(k);
        const auto& pb = s2->P_at(k);
        for (int r = 0; r < pa.degree(); ++r)
            coeff_diff = std::max(coeff_diff,
                                  std::abs(static_cast<double>(
                                      pa.coeffs[r] - pb.coeffs[r])));
    }
    const double secs = t.elapsed();
    report("4a-ordering-invariance", dev, 1e-8, dev <= 1e-8, secs);
    report("4b-pk-really-differ", coeff_diff, 1e-3, coeff_diff > 1e-3, 0.0);
}

void criterion5_oracle() {
    Timer t;
    double worst1 = 0, worst2 = 0;
    const std::vector<EnsembleConfig> cfgs = {
        testutil::gauss_config({{-1.0, 1}, {1.0, 1}}),
        testutil::gauss_config({{-1.0, 1}, {1.0, 2}}),
        testutil::quartic_config({{-0.5, 1}, {0.5, 1}}),
        testutil::quartic_config({{-0.5, 1}, {0.5, 2}}),
    };
    for (const auto& cfg : cfgs) {
        KernelBundle b(solver_for(cfg));
        JpdfOracle oracle(cfg, 4);
        const GridSpec g = b.standard_grid();
        for (int i = 0; i < 10; ++i) {
            const double x = g.xmin + (g.xmax - g.xmin) * (i + 1) / 11.0;
            const double ro = oracle.r1(x);
            const double rk = b.sum(x, x);
            worst1 = std::max(worst1, std::abs(ro - rk) / (1 + std::abs(rk)));
        }
        for (int i = 0; i < 5; ++i) {
            const double x = g.xmin + (g.xmax - g.xmin) * (i + 1) / 6.0;
            const double y = -0.4 * x + 0.2;
            const double ro = oracle.r2(x, y);
            const double rk = b.correlation(std::vector<double>{x, y});
            worst2 = std::max(worst2, std::abs(ro - rk) / (1 + std::abs(rk)));
        }
    }
    const double secs = t.elapsed();
    report("5a-oracle-r1", worst1, 1e-6, worst1 <= 1e-6 && secs < 120.0, secs);
    report("5b-oracle-r2", worst2, 1e-6, worst2 <= 1e-6, 0.0);
}

void criterion6_monte_carlo() {
    Timer t;
    double worst_coeff = 0, worst_density = 0;
    const std::vector<EnsembleConfig> cfgs = {
        testutil::gauss_config({{0.0, 2}}),
        testutil::gauss_config({{0.0, 3}}),
        testutil::gauss_config({{-1.0, 1}, {1.0, 1}}),
        testutil::gauss_config({{-1.0, 1}, {1.0, 2}}),
    };
    for (const auto& cfg : cfgs) {
        auto solver = solver_for(cfg);
        MCConfig mc = MCConfig::make(cfg, 100000, 20240809, 4);
        const MCReport rep = mc_avg_charpoly(mc);
        const MonicPolynomial& P = solver->P_at(cfg.n());
        for (int r = 0; r < cfg.n(); ++r)
            worst_coeff = std::max(
                worst_coeff,
                std::abs(rep.coeff[r] - static_cast<double>(P.coeffs[r])) /
                    std::max(rep.coeff_se[r], 1e-300));
        KernelBundle b(solver);
        worst_density =
            std::max(worst_density, mc_density_check(mc, b).max_sigma_dev);
    }
    const double secs = t.elapsed();
    report("6a-mc-charpoly", worst_coeff, 4.0,
           worst_coeff <= 4.0 && secs < 60.0, secs);
    report("6b-mc-density", worst_density, 4.0, worst_density <= 4.0, 0.0);
}

void criterion7_riemann_hilbert() {
    Timer t;
    double worst_dual = 0, worst_det = 0, worst_jump = 0, worst_ratio = 0;
    double worst_asymp = 0, worst_kernel = 0;
    for (const auto& cfg : {testutil::gauss_config({{-1.0, 1}, {1.0, 2}}),
                            testutil::gauss_config({{-1.0, 2}, {1.0, 2}})}) {
        auto solver = solver_for(cfg);
        const int n1 = cfg.spectrum().entries[0].multiplicity;
        const int n2 = cfg.spectrum().entries[1].multiplicity;
        RhAssembler rh(solver, n1, n2);

        for (const cxd z : {cxd(0, 2), cxd(1, 1), cxd(-3, -0.5)}) {
            worst_dual = std::max(
                worst_dual, max_abs_diff(rh.X(z).transpose() * rh.Y(z),
                                         Matrix3::identity()));
            worst_det = std::max(worst_det,
                                 std::abs(rh.Y(z).det() - cxd(1, 0)));
        }

        const cxd dir = cxd(1, 1) / std::sqrt(2.0);
        const double ry50 = rh.asymp_residual_Y(50.0 * dir);
        const double ry100 = rh.asymp_residual_Y(100.0 * dir);
        const double rx50 = rh.asymp_residual_X(50.0 * dir);
        const double rx100 = rh.asymp_residual_X(100.0 * dir);
        worst_asymp = std::max({worst_asymp, ry50 / (2.0 * 2.0 * ry100),
                                rx50 / (2.0 * 2.0 * rx100)});

        double prev = -1, at_min = 0;
        for (double eps = 1e-2; eps >= 0.99e-4; eps /= 2) {
            const double r = std::max(rh.jump_residual_Y(0.0, eps),
                                      rh.jump_residual_X(0.0, eps));
            if (prev > 0) worst_ratio = std::max(worst_ratio, r / prev);
            prev = r;
            at_min = r;
        }
        worst_jump = std::max(worst_jump, at_min);

        KernelBundle b(solver);
        const GridSpec grid = b.standard_grid();
        for (double x : grid.points())
            for (double y : grid.points()) {
                const double kc = b.cd(x, y);
                worst_kernel =
                    std::max(worst_kernel, std::abs(rh.kernel(x, y) - kc) /
                                               (1 + std::abs(kc)));
            }
    }
    const double secs = t.elapsed();
    report("7a-rh-duality", worst_dual, 1e-6, worst_dual <= 1e-6, secs);
    report("7b-rh-unimodularity", worst_det, 1e-6, worst_det <= 1e-6, 0.0);
    report("7c-rh-asymptotics", worst_asymp, 1.0, worst_asymp <= 1.0, 0.0);
    report("7d-rh-jump", worst_jump, 1e-3, worst_jump <= 1e-3, 0.0);
    report("7e-rh-jump-trend", worst_ratio, 1.2, worst_ratio <= 1.2, 0.0);
    report("7f-rh-kernel", worst_kernel, 1e-8, worst_kernel <= 1e-8, 0.0);
}

void criterion8_structure() {
    Timer t;
    double worst_unit = 0, worst_zero = 0, worst_formula = 0, worst_ladder = 0;
    for (const auto& cfg : {testutil::gauss_config({{-1.0, 1}, {1.0, 2}}),
                            testutil::gauss_config({{-1.0, 2}, {1.0, 2}})}) {
        auto solver = solver_for(cfg);
        const int n = cfg.n();
        const int n1 = cfg.spectrum().entries[0].multiplicity;
        const int n2 = cfg.spectrum().entries[1].multiplicity;

        worst_unit = std::max(worst_unit,
                              std::abs(static_cast<double>(
                                  solver->recurrence_c(n, n - 1) - 1.0L)));

        const auto& alpha = cfg.ordering().alpha;
        auto alpha_at = [&](int pos) {
            if (pos <= n) return alpha[pos - 1];
            return pos == n + 1 ? cfg.a(0) : cfg.a(1);
        };
        for (int j = 0; j <= n + 1; ++j)
            for (int k = 0; k <= n + 1; ++k) {
                bool zero = j >= k + 2;
                if (!zero && k >= j + 3) {
                    bool s0 = false, s1 = false;
                    for (int pos = j + 2; pos <= k; ++pos) {
                        if (alpha_at(pos) == cfg.a(0)) s0 = true;
                        if (alpha_at(pos) == cfg.a(1)) s1 = true;
                    }
                    zero = s0 && s1;
                }
                if (!zero) continue;
                const auto [c, scale] = solver->recurrence_c_with_scale(j, k);
                worst_zero =
                    std::max(worst_zero,
                             static_cast<double>(std::abs(c)) /
                                 std::max(1.0, static_cast<double>(scale)));
            }

        auto h = [&](int k1, int k2, int slot) {
            return solver->h(MultiIndex{{k1, k2}}, slot);
        };
        auto rel = [](real got, real want) {
            return static_cast<double>(std::abs(got - want) /
                                       std::abs(want));
        };
        worst_formula = std::max(
            worst_formula, rel(solver->recurrence_c(n - 2, n),
                               h(n1, n2, 0) / h(n1 - 1, n2 - 1, 0)));
        worst_formula = std::max(
            worst_formula, rel(solver->recurrence_c(n - 1, n),
                               h(n1, n2, 0) / h(n1 - 1, n2, 0) +
                                   h(n1, n2, 1) / h(n1, n2 - 1, 1)));
        worst_formula = std::max(
            worst_formula, rel(solver->recurrence_c(n - 1, n + 1),
                               h(n1 + 1, n2, 1) / h(n1, n2 - 1, 1)));

        worst_ladder = std::max(worst_ladder,
                                solver->ladder_check_P(n1, n2).max());
        worst_ladder = std::max(worst_ladder,
                                solver->ladder_check_Q(n1, n2).max());
    }
    const double secs = t.elapsed();
    report("8a-c-unit", worst_unit, 1e-10, worst_unit <= 1e-10, secs);
    report("8b-lemma42-zeros", worst_zero, 1e-10, worst_zero <= 1e-10, 0.0);
    report("8c-c-formulas", worst_formula, 1e-8, worst_formula <= 1e-8, 0.0);
    report("8d-ladders", worst_ladder, 1e-8, worst_ladder <= 1e-8, 0.0);
}

void criterion9_classical_reduction() {
    Timer t;
    double worst_coeff = 0, worst_h = 0, worst_cd = 0;
    const double sqrt2pi = 2.506628274631000502;
    for (int n = 1; n <= 6; ++n) {
        const auto cfg = testutil::gauss_config({{0.0, n}});
        auto solver = solver_for(cfg);
        double factorial = 1;
        for (int k = 1; k <= n; ++k) {
            const MonicPolynomial& P = solver->P(MultiIndex{{k}});
            const auto he = testutil::hermite_monic(k);
            for (int r = 0; r < k; ++r)
                worst_coeff = std::max(
                    worst_coeff,
                    std::abs(static_cast<double>(P.coeffs[r] - he[r])));
            factorial *= k;
            const double hk =
                static_cast<double>(solver->h(MultiIndex{{k}}, 0));
            worst_h = std::max(worst_h, std::abs(hk - factorial * sqrt2pi) /
                                            (factorial * sqrt2pi));
        }
        KernelBundle b(solver);
        const GridSpec grid = b.standard_grid();
        for (double x : grid.points())
            for (double y : grid.points()) {
                const double ks = b.sum(x, y);
                worst_cd = std::max(worst_cd,
                                    std::abs(b.cd_classical(x, y) - ks) /
                                        (1 + std::abs(ks)));
            }
    }
    const double secs = t.elapsed();
    report("9a-hermite-coefficients", worst_coeff, 1e-10, worst_coeff <= 1e-10,
           secs);
    report("9b-hermite-norms", worst_h, 1e-8, worst_h <= 1e-8, 0.0);
    report("9c-classical-cd", worst_cd, 1e-8, worst_cd <= 1e-8, 0.0);
}

} // namespace

int main() {
    criterion1_cd_identity();
    criterion2_biorthogonality();
    criterion3_trace_reproducing();
    criterion4_ordering_invariance();
    criterion5_oracle();
    criterion6_monte_carlo();
    criterion7_riemann_hilbert();
    criterion8_structure();
    criterion9_classical_reduction();
    if (failures) {
        std::printf("%d criterion check(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
