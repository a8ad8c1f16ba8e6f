// Moment integrals mu(a, k) = int x^k e^{-(V(x) - a x)} dx and the moment
// matrices behind every linear solve. Two evaluation paths: a closed-form
// recursion for V = x^2/2 and adaptive quadrature for general potentials;
// the tests cross-check them against each other.

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "extsrc/ensemble.hpp"

namespace extsrc {

// M_k(a) = int x^k e^{-(x^2/2 - a x)} dx via the recursion
// M_k = a M_{k-1} + (k-1) M_{k-2}, M_0 = sqrt(2 pi) e^{a^2/2}, M_1 = a M_0.
real gaussian_raw_moment(double a, int k);

// Quadrature path for int x^k e^{-(V(x) - a x)} dx; truncation from
// truncation_bound, panels doubled to a 1e-12 relative target.
real quad_moment(const Potential& pot, double a, int k);

// Thread-safe cache of raw moments, keyed on (a, k). All writers compute the
// same value, so insert-if-absent semantics suffice.
class MomentCache {
public:
    explicit MomentCache(Potential pot);

    real raw(double a, int k) const;
    const Potential& potential() const { return pot_; }

private:
    Potential pot_;
    bool gaussian_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<double, int>, real> cache_;
};

// m[j][k] for the ordered weight functions w_j(x) = x^{d_j - 1} e^{-(V - a_{i_j} x)},
// j = 1..rows (1-based in the maths, 0-based here), k = 0..cols-1.
struct MomentTable {
    int rows = 0;
    int cols = 0;
    std::vector<real> m; // row-major

    real& at(int j, int k) { return m[static_cast<size_t>(j) * cols + k]; }
    real at(int j, int k) const { return m[static_cast<size_t>(j) * cols + k]; }
};

MomentTable moment_matrix(const EnsembleConfig& cfg, const MomentCache& cache,
                          int rows, int cols);

struct ZtildeResult {
    real ztilde = 1;   // n x n moment determinant
    real zhat = 1;     // ztilde * n_1! ... n_p!
    real cond = 1;     // SVD condition estimate of the n x n block
};

// Determinant of (m_{jk})_{j=1..n, k=0..n-1} by pivoted elimination. Throws
// breakdown_error when the matrix is singular to working precision, which
// signals numerical breakdown rather than mathematical failure (the
// determinant is nonzero exactly).
ZtildeResult ztilde(const MomentTable& table, int n, const SourceSpectrum& spec,
                    double cond_limit = 1e12);

// CSV dump (`row,power,value`), written atomically.
void dump_moments_csv(const std::string& path, const MomentTable& table);

} // namespace extsrc
