// The correlation kernel K_n in its n-term biorthogonal sum and, for two
// distinct eigenvalues, the 3-term Christoffel-Darboux form, plus the
// correlation determinants and the kernel's integral identities.
//
// Evaluations fold e^{-V/2} into each factor and exponentiate last, so
// P_k(x) Q_k(y) can grow while K_n stays bounded.

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "extsrc/mops.hpp"

namespace extsrc {

struct GridSpec {
    double xmin = -4;
    double xmax = 4;
    int steps = 21;

    std::vector<double> points() const;
    // [min a_i - 4, max a_i + 4] with 21 steps.
    static GridSpec standard(const SourceSpectrum& spec);
};

// P_k(x) e^{-V(x)/2} without overflow in the polynomial factor.
real half_weighted(const MonicPolynomial& P, const Potential& pot, real x);

class KernelBundle {
public:
    explicit KernelBundle(std::shared_ptr<MopsSolver> solver);

    const EnsembleConfig& config() const { return solver_->config(); }
    MopsSolver& solver() const { return *solver_; }
    int n() const { return config().n(); }

    // e^{-(V(x)+V(y))/2} sum_{k<n} P_k(x) Q_k(y).
    double sum(double x, double y) const;

    // 3-term Christoffel-Darboux form; p = 2 with n1, n2 >= 1 only. Near the
    // diagonal (|x-y| < 1e-6) the removable singularity is taken by the
    // analytic x-derivative of the numerator.
    double cd(double x, double y) const;

    // Classical 2-term Christoffel-Darboux form for a single eigenvalue
    // (monic normalization: the ratio is 1/h_{n-1}).
    double cd_classical(double x, double y) const;

    // R_m = det(K_n(lambda_i, lambda_j)).
    double correlation(std::span<const double> points) const;

    // int K_n(x, x) dx; equals n.
    double trace() const;

    // |int K_n(x,y) K_n(y,z) dy - K_n(x,z)|.
    double reproducing_residual(double x, double z) const;

    GridSpec standard_grid() const { return GridSpec::standard(config().spectrum()); }

    // max |K via a - K via b| over the grid; the two bundles must share the
    // potential and spectrum (orderings may differ).
    static double max_grid_deviation(const KernelBundle& a, const KernelBundle& b,
                                     const GridSpec& grid);

    void dump_grid_csv(const std::string& path, const GridSpec& grid) const;
    void dump_diagonal_csv(const std::string& path, const GridSpec& grid) const;

    // The CD h-ratios of the three-term form (p = 2).
    real cd_ratio_1() const;
    real cd_ratio_2() const;

private:
    real sum_impl(real x, real y) const;
    double integration_cutoff() const;

    std::shared_ptr<MopsSolver> solver_;
    std::vector<const MonicPolynomial*> pseq_;
    std::vector<const TypeIFunction*> qseq_;

    bool has_cd_ = false;
    const MonicPolynomial* cd_p00_ = nullptr; // P_{n1,n2}
    const MonicPolynomial* cd_p10_ = nullptr; // P_{n1-1,n2}
    const MonicPolynomial* cd_p01_ = nullptr; // P_{n1,n2-1}
    const TypeIFunction* cd_q00_ = nullptr;   // Q_{n1,n2}
    const TypeIFunction* cd_q10_ = nullptr;   // Q_{n1+1,n2}
    const TypeIFunction* cd_q01_ = nullptr;   // Q_{n1,n2+1}
    real rho1_ = 0, rho2_ = 0;

    bool has_classical_ = false;
    const MonicPolynomial* cl_pn_ = nullptr;
    const MonicPolynomial* cl_pm_ = nullptr;
    real cl_h_ = 1;
};

} // namespace extsrc
