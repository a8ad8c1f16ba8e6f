// Multiple orthogonal polynomials for the external-source weights.
//
// solve_P produces the monic type II polynomial P_{k_1..k_p} from its moment
// linear system; solve_Q produces the dual type I function
// Q(x) = sum_i A_i(x) e^{a_i x} from the transposed system. h-numbers,
// recurrence coefficients c_{jk}, and the ladder relations between nearby
// indices are derived from these and are checkable output, not trusted input.
// A determinant-formula route for P is kept as an independent second path.
//
// h-numbers, ladders, and A/B extraction require exactly two distinct
// eigenvalues where the two-weight theory defines them; P, Q, and h work for
// any p.

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>

#include "extsrc/ensemble.hpp"
#include "extsrc/moments.hpp"

namespace extsrc {

// Monic polynomial of degree |index| with p_0..p_{K-1} stored and the leading
// coefficient implicit.
struct MonicPolynomial {
    MultiIndex index;
    std::vector<real> coeffs; // ascending, size |index|
    double max_residual = 0;  // worst row-scaled orthogonality residual

    int degree() const { return index.total(); }
    real coeff(int r) const { return r == degree() ? 1 : coeffs[r]; }
    std::vector<real> full_coeffs() const;
    real operator()(real x) const;
    std::complex<double> operator()(std::complex<double> z) const;
    real deriv(real x) const;
};

// Q(x) = sum_i A_i(x) e^{a_i x}; part i has degree k_i - 1 (empty when
// k_i = 0). Satisfies int x^j Q e^{-V} = delta_{j,|k|-1} for j < |k|.
struct TypeIFunction {
    MultiIndex index;
    std::vector<double> a;                // eigenvalues, one per part
    std::vector<std::vector<real>> parts; // ascending coefficients
    double max_residual = 0;

    real operator()(real x) const;
    // sum_i A_i(x) e^{a_i x - V(x)/2}; exponentiates last so large |x| stays
    // finite.
    real half_weighted(const Potential& pot, real x) const;
    real part_eval(int i, real x) const;
};

struct LadderReport {
    double residual_first = 0;  // relation written through h^{(1)} ratios
    double residual_second = 0; // relation written through h^{(2)} ratios
    double hratio_residual = 0; // the implied identity between the two ratios
    double max() const;
};

// Solver over one validated configuration. All results are memoized by
// multi-index; the shared moment cache makes repeated solves cheap. Methods
// are safe to call from multiple threads.
class MopsSolver {
public:
    explicit MopsSolver(EnsembleConfig cfg);

    const EnsembleConfig& config() const { return cfg_; }
    const MomentCache& moments() const { return *cache_; }
    std::shared_ptr<const MomentCache> moments_ptr() const { return cache_; }

    // Type II polynomial for an arbitrary multi-index (k_i >= 0).
    const MonicPolynomial& P(const MultiIndex& index);
    // Type I function; requires |index| >= 1.
    const TypeIFunction& Q(const MultiIndex& index);

    // Single-index sequences along the configured ordering: P_k has the
    // prefix counts of alpha_1..alpha_k, and Q_k (the biorthogonal partner
    // of P_k) has the prefix counts of alpha_1..alpha_{k+1}. For p = 2 the
    // ordering extends by alpha_{n+1} = a_1, alpha_{n+2} = a_2.
    const MonicPolynomial& P_at(int k);
    const TypeIFunction& Q_at(int k);

    // h^{(slot)}_{index} = int P_index(x) x^{k_slot} w_slot(x) dx, slot
    // 0-based. Nonzero by the next-moment corollary; a value below
    // 1e-10 of the contraction scale raises breakdown_error.
    real h(const MultiIndex& index, int slot);

    // Top coefficient of the A-part (slot 0) or B-part (slot 1) of Q_index;
    // empty when the part has degree -1. Cross-checked against 1/h of the
    // predecessor index; disagreement beyond 1e-8 relative raises
    // breakdown_error.
    std::optional<real> leading_type1(const MultiIndex& index, int slot);

    // c_{jk} = int x P_k(x) Q_j(x) e^{-V(x)} dx, evaluated by contracting
    // coefficients against raw moments. Range: 0 <= j,k <= n-1 for any p,
    // and up to n+1 for p = 2 via the extended ordering.
    real recurrence_c(int j, int k);
    // Same value plus the absolute contraction scale, for zero tests.
    std::pair<real, real> recurrence_c_with_scale(int j, int k);

    // Residuals of the relation expressing P_{n1-1,n2-1} through
    // P_{n1-1,n2} - P_{n1,n2-1} (both h-ratio variants). Requires p = 2 and
    // n1, n2 >= 1.
    LadderReport ladder_check_P(int n1, int n2);
    // Residuals of the relation expressing Q_{n1+1,n2+1} through
    // Q_{n1,n2+1} - Q_{n1+1,n2}, compared part-by-part.
    LadderReport ladder_check_Q(int n1, int n2);

    // Independent route: expand the (K+1)-column moment determinant formula.
    MonicPolynomial solve_P_determinant(const MultiIndex& index) const;

    // int P_j(x) Q_k(x) e^{-V(x)} dx together with its absolute contraction
    // scale (for row-norm-relative comparisons against delta_{jk}).
    std::pair<real, real> pairing(const MonicPolynomial& P,
                                  const TypeIFunction& Q) const;

private:
    MonicPolynomial solve_P_impl(const MultiIndex& index) const;
    TypeIFunction solve_Q_impl(const MultiIndex& index) const;
    std::pair<real, real> h_impl(const MonicPolynomial& P, int slot) const;
    void check_slot(const MultiIndex& index, int slot) const;

    EnsembleConfig cfg_;
    std::shared_ptr<MomentCache> cache_;

    std::mutex mu_;
    std::map<MultiIndex, MonicPolynomial> pmemo_;
    std::map<MultiIndex, TypeIFunction> qmemo_;
    std::map<std::pair<MultiIndex, int>, real> hmemo_;
};

} // namespace extsrc
