// Composite Gauss-Legendre quadrature on truncated lines, with panel doubling
// until the result is stable, and the truncation-bound search used to place
// the cutoff for integrands of the form x^k e^{-V(x)+ax}.

#pragma once

#include <functional>
#include <vector>

#include "extsrc/ensemble.hpp"

namespace extsrc {

// Nodes/weights of the order-n Gauss-Legendre rule on [-1, 1], computed once
// per order by Newton iteration and cached.
struct GaussLegendre {
    std::vector<real> nodes;
    std::vector<real> weights;

    static const GaussLegendre& get(int order);
};

// A materialized composite rule: sum w_i f(x_i) integrates [-L, L] exactly
// for polynomials up to the per-panel order.
struct QuadratureRule {
    std::vector<real> nodes;
    std::vector<real> weights;
    std::vector<double> breakpoints;
    double truncation = 0.0;
    int panels = 0;
    int order = 0;

    // Uniform panels on [-L, L].
    static QuadratureRule composite(double L, int panels, int order);
    // Panels from an explicit breakpoint list.
    static QuadratureRule from_breakpoints(const std::vector<double>& pts, int order);
    // Every panel split in half (preserves any local refinement).
    QuadratureRule halved() const;

    template <typename F>
    auto apply(F&& f) const {
        using R = decltype(f(real{}));
        R acc{};
        for (size_t i = 0; i < nodes.size(); ++i)
            acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

struct QuadratureResult {
    real value = 0;
    real abs_mass = 0; // sum of |w f|; the natural roundoff scale
    int panels = 0;
};

// Integrate f over [-L, L], doubling panel counts until the change is below
// rel_tol * max(|I|, abs_mass). Throws quadrature_error on non-convergence.
QuadratureResult integrate_doubling(const std::function<real(real)>& f, double L,
                                    double rel_tol = 1e-12, int order = 40,
                                    int panels0 = 16, int max_panels = 4096);

// Smallest L with V(+-L) - a_max*L - k_max*ln L >= 60, so the integrand tail
// sits below e^{-60} of its scale. Found by bracketing and bisection.
double truncation_bound(const Potential& pot, double a_max, int k_max);

// Breakpoints for a Cauchy-transform rule: uniform panels on [-L, L] plus
// geometric refinement toward x0 until the pole-adjacent panel width is
// below h_min. Used when the evaluation point sits close to the axis.
std::vector<double> refined_breakpoints(double L, double x0, double h_min,
                                        int base_panels);

} // namespace extsrc
