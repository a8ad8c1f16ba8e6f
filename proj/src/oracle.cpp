#include "extsrc/oracle.hpp"

#include <cmath>

#include "extsrc/parallel.hpp"
#include "extsrc/quadrature.hpp"

namespace extsrc {

namespace {

// det of column vectors of size n <= 3.
real det_cols(std::span<const real> c0, std::span<const real> c1,
              std::span<const real> c2, int n) {
    if (n == 1) return c0[0];
    if (n == 2) return c0[0] * c1[1] - c1[0] * c0[1];
    return c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) -
           c1[0] * (c0[1] * c2[2] - c0[2] * c2[1]) +
           c2[0] * (c0[1] * c1[2] - c0[2] * c1[1]);
}

} // namespace

JpdfOracle::JpdfOracle(EnsembleConfig cfg, int workers)
    : cfg_(std::move(cfg)), workers_(std::max(1, workers)) {
    const int n = cfg_.n();
    if (n > 3)
        throw config_error("JpdfOracle: n <= 3 only (n-dimensional quadrature)");

    // Powers in the integrand: weight rows go up to x^{max n_i - 1}, the
    // Vandermonde adds up to n-1 per variable.
    int max_mult = 0;
    for (const auto& e : cfg_.spectrum().entries)
        max_mult = std::max(max_mult, e.multiplicity);
    const double L = truncation_bound(cfg_.potential(),
                                      cfg_.spectrum().max_abs_a(),
                                      max_mult + n + 2);
    const int panels = std::max(8, static_cast<int>(std::ceil(L / 1.25)));

    QuadratureRule rule = QuadratureRule::composite(L, panels, 40);
    QuadratureRule fine = rule.halved();

    auto integrate = [&](const QuadratureRule& r) {
        std::vector<real> n_(r.nodes.begin(), r.nodes.end());
        std::vector<real> w_(r.weights.begin(), r.weights.end());
        return integral_z(n_, w_);
    };
    const real z_coarse = integrate(rule);
    nodes_.assign(fine.nodes.begin(), fine.nodes.end());
    weights_.assign(fine.weights.begin(), fine.weights.end());
    cols_.resize(nodes_.size());
    for (size_t q = 0; q < nodes_.size(); ++q) cols_[q] = column(nodes_[q]);
    z_ = integral_z(nodes_, weights_);

    if (std::abs(z_ - z_coarse) > 1e-8L * std::abs(z_))
        throw quadrature_error("JpdfOracle: normalization did not converge "
                               "under panel refinement");
    if (z_ == 0)
        throw breakdown_error("JpdfOracle: vanishing normalization");
}

std::vector<real> JpdfOracle::column(real x) const {
    const int n = cfg_.n();
    std::vector<real> col(n);
    std::vector<int> seen(cfg_.p(), 0);
    for (int j = 0; j < n; ++j) {
        const double aj = cfg_.ordering().alpha[j];
        const int d = ++seen[cfg_.spectrum().slot_of(aj)];
        real mono = 1;
        for (int t = 0; t < d - 1; ++t) mono *= x;
        col[j] = mono * std::exp(cfg_.potential().log_weight(aj, x));
    }
    return col;
}

real JpdfOracle::density(std::span<const real> lambda) const {
    const int n = cfg_.n();
    std::vector<real> c0 = column(lambda[0]);
    std::vector<real> c1 = n > 1 ? column(lambda[1]) : std::vector<real>{};
    std::vector<real> c2 = n > 2 ? column(lambda[2]) : std::vector<real>{};
    real vdm = 1;
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) vdm *= lambda[i] - lambda[j];
    return det_cols(c0, c1, c2, n) * vdm;
}

real JpdfOracle::integral_z(const std::vector<real>& nodes,
                            const std::vector<real>& weights) const {
    const int n = cfg_.n();
    const int Q = static_cast<int>(nodes.size());
    std::vector<std::vector<real>> cols(Q);
    const std::vector<std::vector<real>>* cptr = &cols;
    if (!cols_.empty() && cols_.size() == nodes.size()) {
        cptr = &cols_;
    } else {
        for (int q = 0; q < Q; ++q) cols[q] = column(nodes[q]);
    }
    const auto& C = *cptr;

    if (n == 1) {
        real acc = 0;
        for (int q = 0; q < Q; ++q) acc += weights[q] * C[q][0];
        return acc;
    }
    if (n == 2) {
        // f is symmetric and vanishes on the diagonal: sum ordered pairs.
        std::vector<real> partial(Q, 0);
        parallel_for(Q, workers_, [&](int q1) {
            real acc = 0;
            for (int q2 = q1 + 1; q2 < Q; ++q2) {
                const real f = det_cols(C[q1], C[q2], {}, 2) *
                               (nodes[q2] - nodes[q1]);
                acc += weights[q1] * weights[q2] * f;
            }
            partial[q1] = acc;
        });
        real total = 0;
        for (real v : partial) total += v;
        return 2 * total;
    }
    // n == 3
    std::vector<real> partial(Q, 0);
    parallel_for(Q, workers_, [&](int q1) {
        real acc = 0;
        for (int q2 = q1 + 1; q2 < Q; ++q2) {
            const real w12 = weights[q1] * weights[q2];
            const real d21 = nodes[q2] - nodes[q1];
            for (int q3 = q2 + 1; q3 < Q; ++q3) {
                const real det = det_cols(C[q1], C[q2], C[q3], 3);
                const real vdm = d21 * (nodes[q3] - nodes[q1]) *
                                 (nodes[q3] - nodes[q2]);
                acc += w12 * weights[q3] * det * vdm;
            }
        }
        partial[q1] = acc;
    });
    real total = 0;
    for (real v : partial) total += v;
    return 6 * total;
}

double JpdfOracle::r1(double t) const {
    const int n = cfg_.n();
    const int Q = static_cast<int>(nodes_.size());
    const std::vector<real> ct = column(t);
    if (n == 1)
        return static_cast<double>(ct[0] / z_);
    if (n == 2) {
        real acc = 0;
        for (int q = 0; q < Q; ++q) {
            const real f = det_cols(ct, cols_[q], {}, 2) * (nodes_[q] - t);
            acc += weights_[q] * f;
        }
        return static_cast<double>(2 * acc / z_);
    }
    std::vector<real> partial(Q, 0);
    parallel_for(Q, workers_, [&](int q2) {
        real acc = 0;
        for (int q3 = q2 + 1; q3 < Q; ++q3) {
            const real det = det_cols(ct, cols_[q2], cols_[q3], 3);
            const real vdm = (nodes_[q2] - t) * (nodes_[q3] - t) *
                             (nodes_[q3] - nodes_[q2]);
            acc += weights_[q2] * weights_[q3] * det * vdm;
        }
        partial[q2] = acc;
    });
    real total = 0;
    for (real v : partial) total += v;
    // 3!/(2!) = 3 marginal factor; the inner double sum counted ordered
    // pairs once, and the integrand is symmetric in (q2, q3).
    return static_cast<double>(3 * 2 * total / z_);
}

double JpdfOracle::r2(double s, double t) const {
    const int n = cfg_.n();
    if (n < 2)
        throw config_error("JpdfOracle::r2 requires n >= 2");
    const std::vector<real> cs = column(s);
    const std::vector<real> ct = column(t);
    if (n == 2) {
        const real f = det_cols(cs, ct, {}, 2) * (static_cast<real>(t) - s);
        return static_cast<double>(2 * f / z_);
    }
    const int Q = static_cast<int>(nodes_.size());
    real acc = 0;
    for (int q = 0; q < Q; ++q) {
        const real det = det_cols(cs, ct, cols_[q], 3);
        const real vdm = (static_cast<real>(t) - s) * (nodes_[q] - s) *
                         (nodes_[q] - t);
        acc += weights_[q] * det * vdm;
    }
    return static_cast<double>(6 * acc / z_);
}

double JpdfOracle::rm(std::span<const double> points) const {
    const int n = cfg_.n();
    const int m = static_cast<int>(points.size());
    if (m < 1 || m > n)
        throw config_error("JpdfOracle::rm: need 1 <= m <= n");
    if (m == 1) return r1(points[0]);
    if (m == 2) return r2(points[0], points[1]);
    // m == n == 3: no marginalization, R_3 = 3! f / Z.
    std::vector<real> lam(points.begin(), points.end());
    return static_cast<double>(6 * density(lam) / z_);
}

} // namespace extsrc
