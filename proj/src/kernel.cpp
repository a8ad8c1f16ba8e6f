#include "extsrc/kernel.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "extsrc/io.hpp"
#include "extsrc/quadrature.hpp"

namespace extsrc {

std::vector<double> GridSpec::points() const {
    std::vector<double> pts(steps);
    if (steps == 1) {
        pts[0] = (xmin + xmax) / 2;
        return pts;
    }
    for (int i = 0; i < steps; ++i)
        pts[i] = xmin + (xmax - xmin) * i / (steps - 1);
    return pts;
}

GridSpec GridSpec::standard(const SourceSpectrum& spec) {
    double lo = spec.entries.front().a, hi = lo;
    for (const auto& e : spec.entries) {
        lo = std::min(lo, e.a);
        hi = std::max(hi, e.a);
    }
    return GridSpec{lo - 4, hi + 4, 21};
}

real half_weighted(const MonicPolynomial& P, const Potential& pot, real x) {
    const real px = P(x);
    if (px == 0) return 0;
    const real e = -pot(x) / 2;
    if (e > -11000)
        return px * std::exp(e);
    return std::copysign(std::exp(std::log(std::abs(px)) + e), px);
}

KernelBundle::KernelBundle(std::shared_ptr<MopsSolver> solver)
    : solver_(std::move(solver)) {
    const EnsembleConfig& cfg = solver_->config();
    const int n = cfg.n();
    pseq_.reserve(n);
    qseq_.reserve(n);
    for (int k = 0; k < n; ++k) {
        pseq_.push_back(&solver_->P_at(k));
        qseq_.push_back(&solver_->Q_at(k));
    }
    if (cfg.p() == 2) {
        const int n1 = cfg.spectrum().entries[0].multiplicity;
        const int n2 = cfg.spectrum().entries[1].multiplicity;
        if (n1 >= 1 && n2 >= 1) {
            cd_p00_ = &solver_->P(MultiIndex{{n1, n2}});
            cd_p10_ = &solver_->P(MultiIndex{{n1 - 1, n2}});
            cd_p01_ = &solver_->P(MultiIndex{{n1, n2 - 1}});
            cd_q00_ = &solver_->Q(MultiIndex{{n1, n2}});
            cd_q10_ = &solver_->Q(MultiIndex{{n1 + 1, n2}});
            cd_q01_ = &solver_->Q(MultiIndex{{n1, n2 + 1}});
            rho1_ = solver_->h(MultiIndex{{n1, n2}}, 0) /
                    solver_->h(MultiIndex{{n1 - 1, n2}}, 0);
            rho2_ = solver_->h(MultiIndex{{n1, n2}}, 1) /
                    solver_->h(MultiIndex{{n1, n2 - 1}}, 1);
            has_cd_ = true;
        }
    } else if (cfg.p() == 1) {
        cl_pn_ = &solver_->P(MultiIndex{{n}});
        cl_pm_ = &solver_->P(MultiIndex{{n - 1}});
        cl_h_ = solver_->h(MultiIndex{{n - 1}}, 0);
        has_classical_ = true;
    }
}

real KernelBundle::sum_impl(real x, real y) const {
    const Potential& pot = config().potential();
    real acc = 0;
    for (size_t k = 0; k < pseq_.size(); ++k)
        acc += half_weighted(*pseq_[k], pot, x) *
               qseq_[k]->half_weighted(pot, y);
    return acc;
}

double KernelBundle::sum(double x, double y) const {
    return static_cast<double>(sum_impl(x, y));
}

real KernelBundle::cd_ratio_1() const { return rho1_; }
real KernelBundle::cd_ratio_2() const { return rho2_; }

double KernelBundle::cd(double x, double y) const {
    if (!has_cd_)
        throw config_error("Christoffel-Darboux requires exactly two distinct "
                           "eigenvalues");
    const Potential& pot = config().potential();
    const real qy0 = cd_q00_->half_weighted(pot, y);
    const real qy1 = cd_q10_->half_weighted(pot, y);
    const real qy2 = cd_q01_->half_weighted(pot, y);
    if (std::abs(static_cast<real>(x) - static_cast<real>(y)) >= 1e-6L) {
        const real num = half_weighted(*cd_p00_, pot, x) * qy0 -
                         rho1_ * half_weighted(*cd_p10_, pot, x) * qy1 -
                         rho2_ * half_weighted(*cd_p01_, pot, x) * qy2;
        return static_cast<double>(num / (static_cast<real>(x) - static_cast<real>(y)));
    }
    // Removable singularity: the numerator vanishes on the diagonal, so the
    // quotient tends to its analytic x-derivative, evaluated at the midpoint.
    const real m = (static_cast<real>(x) + static_cast<real>(y)) / 2;
    const real dnum = cd_p00_->deriv(m) * qy0 - rho1_ * cd_p10_->deriv(m) * qy1 -
                      rho2_ * cd_p01_->deriv(m) * qy2;
    return static_cast<double>(std::exp(-pot(static_cast<real>(x)) / 2) * dnum);
}

double KernelBundle::cd_classical(double x, double y) const {
    if (!has_classical_)
        throw config_error("classical Christoffel-Darboux requires a single "
                           "eigenvalue");
    const Potential& pot = config().potential();
    const double a = config().a(0);
    const real xx = x, yy = y;
    const real ey = std::exp(static_cast<real>(a) * yy - pot(yy) / 2);
    const real pny = (*cl_pn_)(yy) * ey, pmy = (*cl_pm_)(yy) * ey;
    if (std::abs(xx - yy) >= 1e-6L) {
        const real num = half_weighted(*cl_pn_, pot, xx) * pmy -
                         half_weighted(*cl_pm_, pot, xx) * pny;
        return static_cast<double>(num / (cl_h_ * (xx - yy)));
    }
    const real m = (xx + yy) / 2;
    const real dnum = cl_pn_->deriv(m) * pmy - cl_pm_->deriv(m) * pny;
    return static_cast<double>(std::exp(-pot(xx) / 2) * dnum / cl_h_);
}

double KernelBundle::correlation(std::span<const double> points) const {
    const int m = static_cast<int>(points.size());
    if (m < 1)
        throw config_error("correlation: at least one point required");
    using Mat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic>;
    Mat K(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            K(i, j) = sum_impl(points[i], points[j]);
    if (m == 1) return static_cast<double>(K(0, 0));
    return static_cast<double>(Eigen::FullPivLU<Mat>(K).determinant());
}

double KernelBundle::integration_cutoff() const {
    const EnsembleConfig& cfg = config();
    return truncation_bound(cfg.potential(), cfg.spectrum().max_abs_a(),
                            2 * cfg.n() + 4);
}

double KernelBundle::trace() const {
    const double L = integration_cutoff();
    auto f = [&](real x) { return sum_impl(x, x); };
    return static_cast<double>(integrate_doubling(f, L, 1e-11).value);
}

double KernelBundle::reproducing_residual(double x, double z) const {
    const Potential& pot = config().potential();
    const size_t n = pseq_.size();
    std::vector<real> px(n), qz(n);
    for (size_t k = 0; k < n; ++k) {
        px[k] = half_weighted(*pseq_[k], pot, x);
        qz[k] = qseq_[k]->half_weighted(pot, z);
    }
    auto f = [&](real y) {
        real left = 0, right = 0;
        for (size_t k = 0; k < n; ++k) {
            left += px[k] * qseq_[k]->half_weighted(pot, y);
            right += half_weighted(*pseq_[k], pot, y) * qz[k];
        }
        return left * right;
    };
    const double L = integration_cutoff();
    const real integral = integrate_doubling(f, L, 1e-11).value;
    return static_cast<double>(std::abs(integral - sum_impl(x, z)));
}

double KernelBundle::max_grid_deviation(const KernelBundle& a,
                                        const KernelBundle& b,
                                        const GridSpec& grid) {
    double worst = 0;
    for (double x : grid.points())
        for (double y : grid.points())
            worst = std::max(worst, std::abs(a.sum(x, y) - b.sum(x, y)));
    return worst;
}

void KernelBundle::dump_grid_csv(const std::string& path,
                                 const GridSpec& grid) const {
    std::vector<std::vector<std::string>> rows;
    for (double x : grid.points())
        for (double y : grid.points())
            rows.push_back({format_double(x), format_double(y),
                            format_double(sum(x, y))});
    write_csv_atomic(path, {"x", "y", "K"}, rows);
}

void KernelBundle::dump_diagonal_csv(const std::string& path,
                                     const GridSpec& grid) const {
    std::vector<std::vector<std::string>> rows;
    for (double x : grid.points())
        rows.push_back({format_double(x), format_double(sum(x, x))});
    write_csv_atomic(path, {"x", "R1"}, rows);
}

} // namespace extsrc
