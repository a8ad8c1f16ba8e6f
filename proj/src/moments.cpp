#include "extsrc/moments.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "extsrc/io.hpp"
#include "extsrc/quadrature.hpp"

namespace extsrc {

namespace {
constexpr real kSqrt2Pi = 2.50662827463100050241576528481104525L;
}

real gaussian_raw_moment(double a, int k) {
    if (k < 0)
        throw config_error("gaussian_raw_moment: negative power");
    const real aa = static_cast<real>(a);
    const real m0 = kSqrt2Pi * std::exp(aa * aa / 2);
    if (k == 0) return m0;
    real prev = m0, cur = aa * m0;
    for (int j = 2; j <= k; ++j) {
        const real next = aa * cur + (j - 1) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

real quad_moment(const Potential& pot, double a, int k) {
    if (k < 0)
        throw config_error("quad_moment: negative power");
    const double L = truncation_bound(pot, std::abs(a), k);
    auto f = [&](real x) {
        real xk = 1;
        for (int j = 0; j < k; ++j) xk *= x;
        return xk * std::exp(pot.log_weight(a, x));
    };
    return integrate_doubling(f, L).value;
}

MomentCache::MomentCache(Potential pot)
    : pot_(std::move(pot)), gaussian_(pot_.is_gaussian()) {}

real MomentCache::raw(double a, int k) const {
    const auto key = std::make_pair(a, k);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    const real value = gaussian_ ? gaussian_raw_moment(a, k)
                                 : quad_moment(pot_, a, k);
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.emplace(key, value).first->second;
}

MomentTable moment_matrix(const EnsembleConfig& cfg, const MomentCache& cache,
                          int rows, int cols) {
    if (rows < 0 || rows > cfg.n())
        throw config_error("moment_matrix: rows out of range");
    MomentTable t;
    t.rows = rows;
    t.cols = cols;
    t.m.assign(static_cast<size_t>(rows) * cols, 0);
    // d_j = number of times alpha_j's value occurs in alpha_1..alpha_j; the
    // row weight is x^{d_j-1} e^{-(V - alpha_j x)}.
    std::vector<int> seen(cfg.p(), 0);
    for (int j = 0; j < rows; ++j) {
        const double aj = cfg.ordering().alpha[j];
        const int slot = cfg.spectrum().slot_of(aj);
        const int d = ++seen[slot];
        for (int k = 0; k < cols; ++k)
            t.at(j, k) = cache.raw(aj, k + d - 1);
    }
    return t;
}

ZtildeResult ztilde(const MomentTable& table, int n, const SourceSpectrum& spec,
                    double cond_limit) {
    ZtildeResult res;
    if (n == 0) return res; // empty determinant is 1
    if (table.rows < n || table.cols < n)
        throw config_error("ztilde: table smaller than n");

    using Mat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic>;
    Mat M(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            M(j, k) = table.at(j, k);

    Eigen::JacobiSVD<Mat> svd(M);
    const real smax = svd.singularValues()(0);
    const real smin = svd.singularValues()(n - 1);
    res.cond = (smin > 0) ? smax / smin : std::numeric_limits<real>::infinity();
    if (!(res.cond < static_cast<real>(cond_limit)))
        throw breakdown_error(
            "ztilde: moment matrix singular to working precision (cond ~ " +
            std::to_string(static_cast<double>(res.cond)) +
            "); contradicts the nonvanishing of the moment determinant and "
            "signals numerical breakdown");

    res.ztilde = Eigen::FullPivLU<Mat>(M).determinant();
    res.zhat = res.ztilde;
    for (const auto& e : spec.entries)
        for (int f = 2; f <= e.multiplicity; ++f)
            res.zhat *= f;
    return res;
}

void dump_moments_csv(const std::string& path, const MomentTable& table) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(static_cast<size_t>(table.rows) * table.cols);
    for (int j = 0; j < table.rows; ++j)
        for (int k = 0; k < table.cols; ++k)
            rows.push_back({std::to_string(j + 1), std::to_string(k),
                            format_double(static_cast<double>(table.at(j, k)))});
    write_csv_atomic(path, {"row", "power", "value"}, rows);
}

} // namespace extsrc
