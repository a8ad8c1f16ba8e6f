// Brute-force ground truth for n <= 3: the joint eigenvalue density
// ~ prod e^{-V(lambda_j)} det(w_i(lambda_j)) Delta(lambda), normalized
// numerically, then marginalized to the m-point functions
// R_m = n!/(n-m)! int p dlambda_{m+1..n}. Everything reduces to tensor
// quadrature over one cached 1-d rule, so the analytic kernel modules can be
// judged against an implementation-independent route.

#pragma once

#include <span>
#include <vector>

#include "extsrc/ensemble.hpp"

namespace extsrc {

class JpdfOracle {
public:
    explicit JpdfOracle(EnsembleConfig cfg, int workers = 4);

    int n() const { return cfg_.n(); }

    double r1(double t) const;
    double r2(double s, double t) const;
    // General m-point value, m <= n.
    double rm(std::span<const double> points) const;

    // The numeric normalization Z = int f dlambda (the unnormalized density
    // integrates to Z; equals n! times the n x n moment determinant).
    double normalization() const { return static_cast<double>(z_); }

private:
    // Column of weighted row values at x: col[i] = w_i(x) e^{-V(x)}.
    std::vector<real> column(real x) const;
    // Unnormalized symmetric density at lambda (size n).
    real density(std::span<const real> lambda) const;
    real integral_z(const std::vector<real>& nodes,
                    const std::vector<real>& weights) const;

    EnsembleConfig cfg_;
    int workers_;
    std::vector<real> nodes_, weights_;
    std::vector<std::vector<real>> cols_; // per node
    real z_ = 0;
};

} // namespace extsrc
