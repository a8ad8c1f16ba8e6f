// 3x3 Riemann-Hilbert matrices for the two-eigenvalue case: Y(z) built from
// the type II polynomials and Cauchy transforms of their weighted forms, X(z)
// from the type I polynomials, the jump/asymptotic diagnostics, and the
// compact kernel formula evaluated without any Cauchy transforms.
//
// Which boundary value (Y_+ or Y_-) would enter the kernel formula on the
// axis never arises: the entry combination is a polynomial contraction,
// entire in both arguments.

#pragma once

#include <array>
#include <complex>
#include <memory>

#include "extsrc/mops.hpp"

namespace extsrc {

using cxd = std::complex<double>;

struct Matrix3 {
    std::array<cxd, 9> m{};

    cxd& operator()(int r, int c) { return m[r * 3 + c]; }
    cxd operator()(int r, int c) const { return m[r * 3 + c]; }

    static Matrix3 identity();
    Matrix3 operator*(const Matrix3& o) const;
    Matrix3 transpose() const;
    cxd det() const;
    Matrix3 inverse() const;
    double max_abs() const; // max-absolute-entry norm
};

double max_abs_diff(const Matrix3& a, const Matrix3& b);

// Integrand sum_t R_t(s) e^{-(V(s) - a_t s)} with polynomial prefactors.
struct WeightedPoly {
    struct Term {
        std::vector<real> coeffs; // ascending
        double a = 0;
    };
    std::vector<Term> terms;

    real operator()(const Potential& pot, real s) const;
};

class RhAssembler {
public:
    // Requires exactly two distinct eigenvalues and n1, n2 >= 1.
    RhAssembler(std::shared_ptr<MopsSolver> solver, int n1, int n2);

    const EnsembleConfig& config() const { return solver_->config(); }
    int n1() const { return n1_; }
    int n2() const { return n2_; }

    // Cf(z) = (1/2 pi i) int f(s)/(s-z) ds. Relative accuracy 1e-8 down to
    // |Im z| = 1e-4; panels refine geometrically toward Re z when the point
    // sits close to the axis. |Im z| below 1e-8 is refused.
    cxd cauchy(const WeightedPoly& f, cxd z) const;

    Matrix3 Y(cxd z) const;
    Matrix3 X(cxd z) const;

    Matrix3 jump_Y(double x) const; // upper-triangular, unit diagonal
    Matrix3 jump_X(double x) const;

    // || Y(x + i eps) - Y(x - i eps) J(x) ||, max-abs-entry.
    double jump_residual_Y(double x, double eps) const;
    double jump_residual_X(double x, double eps) const;

    // || Y(z) diag(z^-n, z^n1, z^n2) - I ||; O(1/z) as z grows.
    double asymp_residual_Y(cxd z) const;
    double asymp_residual_X(cxd z) const;

    // K_n(x, y) from the compact formula: the 21/31 entries of Y^{-1}(y)Y(x)
    // contract type I rows against type II columns, so no Cauchy transform
    // is involved and real arguments are fine.
    double kernel(double x, double y) const;

    // Constants of the two solutions.
    cxd c1() const { return c1_; }
    cxd c2() const { return c2_; }
    double k1() const { return static_cast<double>(k1_); }
    double k2() const { return static_cast<double>(k2_); }

private:
    WeightedPoly weighted(const MonicPolynomial& P, int slot) const;
    WeightedPoly weighted(const TypeIFunction& Q) const;

    std::shared_ptr<MopsSolver> solver_;
    int n1_, n2_;
    double a1_, a2_;
    double L_;

    const MonicPolynomial* p00_;
    const MonicPolynomial* p10_;
    const MonicPolynomial* p01_;
    const TypeIFunction* q00_;
    const TypeIFunction* q10_;
    const TypeIFunction* q01_;
    real h1_pred_, h2_pred_; // h^(1)_{n1-1,n2}, h^(2)_{n1,n2-1}
    real k1_, k2_;           // h^(1)_{n1,n2},   h^(2)_{n1,n2}
    cxd c1_, c2_;
};

} // namespace extsrc
