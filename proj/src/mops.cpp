#include "extsrc/mops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace extsrc {

using Mat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<real, Eigen::Dynamic, 1>;

std::vector<real> MonicPolynomial::full_coeffs() const {
    std::vector<real> c = coeffs;
    c.push_back(1);
    return c;
}

real MonicPolynomial::operator()(real x) const {
    real v = 1;
    for (int r = degree() - 1; r >= 0; --r) v = v * x + coeffs[r];
    return v;
}

std::complex<double> MonicPolynomial::operator()(std::complex<double> z) const {
    std::complex<double> v = 1;
    for (int r = degree() - 1; r >= 0; --r)
        v = v * z + static_cast<double>(coeffs[r]);
    return v;
}

real MonicPolynomial::deriv(real x) const {
    const int K = degree();
    if (K == 0) return 0;
    real v = K; // derivative of the leading term has coefficient K
    for (int r = K - 1; r >= 1; --r) v = v * x + r * coeffs[r];
    return v;
}

real TypeIFunction::part_eval(int i, real x) const {
    real v = 0;
    for (size_t r = parts[i].size(); r-- > 0;) v = v * x + parts[i][r];
    return v;
}

real TypeIFunction::operator()(real x) const {
    real v = 0;
    for (size_t i = 0; i < parts.size(); ++i)
        v += part_eval(static_cast<int>(i), x) * std::exp(static_cast<real>(a[i]) * x);
    return v;
}

real TypeIFunction::half_weighted(const Potential& pot, real x) const {
    const real half_v = pot(x) / 2;
    real v = 0;
    for (size_t i = 0; i < parts.size(); ++i)
        v += part_eval(static_cast<int>(i), x) *
             std::exp(static_cast<real>(a[i]) * x - half_v);
    return v;
}

double LadderReport::max() const {
    return std::max({residual_first, residual_second, hratio_residual});
}

MopsSolver::MopsSolver(EnsembleConfig cfg)
    : cfg_(std::move(cfg)),
      cache_(std::make_shared<MomentCache>(cfg_.potential())) {}

namespace {

// Condition estimate, enforced against the configured hard limit.
real checked_condition(const Mat& M, double limit, const std::string& what) {
    if (M.rows() == 0) return 1;
    Eigen::JacobiSVD<Mat> svd(M);
    const real smax = svd.singularValues()(0);
    const real smin = svd.singularValues()(svd.singularValues().size() - 1);
    const real cond =
        smin > 0 ? smax / smin : std::numeric_limits<real>::infinity();
    if (!(cond < static_cast<real>(limit)))
        throw breakdown_error(what + ": moment system condition " +
                              std::to_string(static_cast<double>(cond)) +
                              " exceeds limit " + std::to_string(limit));
    return cond;
}

} // namespace

MonicPolynomial MopsSolver::solve_P_impl(const MultiIndex& index) const {
    if (index.size() != cfg_.p())
        throw config_error("solve_P: index size does not match spectrum");
    for (int v : index.k)
        if (v < 0) throw config_error("solve_P: negative index entry");

    const int K = index.total();
    MonicPolynomial P;
    P.index = index;
    P.coeffs.assign(K, 0);
    if (K == 0) return P;

    Mat M(K, K);
    Vec rhs(K);
    int row = 0;
    for (int i = 0; i < cfg_.p(); ++i) {
        const double ai = cfg_.a(i);
        for (int j = 0; j < index[i]; ++j, ++row) {
            for (int r = 0; r < K; ++r) M(row, r) = cache_->raw(ai, j + r);
            rhs(row) = -cache_->raw(ai, j + K);
        }
    }
    checked_condition(M, cfg_.cond_limit(), "solve_P" + index.str());
    Vec p = Eigen::FullPivLU<Mat>(M).solve(rhs);
    for (int r = 0; r < K; ++r) P.coeffs[r] = p(r);

    // Row-scaled orthogonality residuals.
    real worst = 0;
    row = 0;
    for (int i = 0; i < cfg_.p(); ++i) {
        const double ai = cfg_.a(i);
        for (int j = 0; j < index[i]; ++j, ++row) {
            real res = cache_->raw(ai, j + K);
            real scale = std::abs(res);
            for (int r = 0; r < K; ++r) {
                const real mu = cache_->raw(ai, j + r);
                res += P.coeffs[r] * mu;
                scale += std::abs(P.coeffs[r] * mu);
            }
            worst = std::max(worst, std::abs(res) / std::max<real>(scale, 1e-300L));
        }
    }
    P.max_residual = static_cast<double>(worst);
    return P;
}

TypeIFunction MopsSolver::solve_Q_impl(const MultiIndex& index) const {
    if (index.size() != cfg_.p())
        throw config_error("solve_Q: index size does not match spectrum");
    const int K = index.total();
    if (K < 1)
        throw config_error("solve_Q: |index| must be at least 1");

    // Basis ordered per eigenvalue in spectrum order, powers ascending.
    Mat M(K, K);
    Vec rhs = Vec::Zero(K);
    rhs(K - 1) = 1;
    for (int m = 0; m < K; ++m) {
        int col = 0;
        for (int i = 0; i < cfg_.p(); ++i)
            for (int j = 0; j < index[i]; ++j, ++col)
                M(m, col) = cache_->raw(cfg_.a(i), m + j);
    }
    checked_condition(M, cfg_.cond_limit(), "solve_Q" + index.str());
    Vec q = Eigen::FullPivLU<Mat>(M).solve(rhs);

    TypeIFunction Q;
    Q.index = index;
    Q.parts.resize(cfg_.p());
    for (int i = 0; i < cfg_.p(); ++i) {
        Q.a.push_back(cfg_.a(i));
        Q.parts[i].resize(index[i]);
    }
    {
        int col = 0;
        for (int i = 0; i < cfg_.p(); ++i)
            for (int j = 0; j < index[i]; ++j, ++col) Q.parts[i][j] = q(col);
    }

    real worst = 0;
    for (int m = 0; m < K; ++m) {
        real res = (m == K - 1) ? -1.0L : 0.0L;
        real scale = 1;
        int col = 0;
        for (int i = 0; i < cfg_.p(); ++i)
            for (int j = 0; j < index[i]; ++j, ++col) {
                const real mu = cache_->raw(cfg_.a(i), m + j);
                res += q(col) * mu;
                scale += std::abs(q(col) * mu);
            }
        worst = std::max(worst, std::abs(res) / scale);
    }
    Q.max_residual = static_cast<double>(worst);
    return Q;
}

const MonicPolynomial& MopsSolver::P(const MultiIndex& index) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = pmemo_.find(index);
    if (it == pmemo_.end())
        it = pmemo_.emplace(index, solve_P_impl(index)).first;
    return it->second;
}

const TypeIFunction& MopsSolver::Q(const MultiIndex& index) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = qmemo_.find(index);
    if (it == qmemo_.end())
        it = qmemo_.emplace(index, solve_Q_impl(index)).first;
    return it->second;
}

const MonicPolynomial& MopsSolver::P_at(int k) {
    return P(cfg_.extended_prefix_counts(k));
}

const TypeIFunction& MopsSolver::Q_at(int k) {
    return Q(cfg_.extended_prefix_counts(k + 1));
}

void MopsSolver::check_slot(const MultiIndex& index, int slot) const {
    if (slot < 0 || slot >= index.size())
        throw config_error("eigenvalue slot out of range for index " +
                           index.str());
}

std::pair<real, real> MopsSolver::h_impl(const MonicPolynomial& P,
                                         int slot) const {
    const double aj = cfg_.a(slot);
    const int kj = P.index[slot];
    real value = 0, scale = 0;
    for (int r = 0; r <= P.degree(); ++r) {
        const real term = P.coeff(r) * cache_->raw(aj, r + kj);
        value += term;
        scale += std::abs(term);
    }
    return {value, scale};
}

real MopsSolver::h(const MultiIndex& index, int slot) {
    check_slot(index, slot);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = hmemo_.find({index, slot});
        if (it != hmemo_.end()) return it->second;
    }
    const auto [value, scale] = h_impl(P(index), slot);
    if (std::abs(value) < 1e-10L * scale)
        throw breakdown_error("h" + index.str() +
                              " numerically indistinguishable from zero; "
                              "contradicts the next-moment corollary");
    std::lock_guard<std::mutex> lock(mu_);
    hmemo_.emplace(std::make_pair(index, slot), value);
    return value;
}

std::optional<real> MopsSolver::leading_type1(const MultiIndex& index,
                                              int slot) {
    check_slot(index, slot);
    if (index[slot] == 0) return std::nullopt;
    const TypeIFunction& q = Q(index);
    const real top = q.parts[slot].back();

    MultiIndex pred = index;
    --pred.k[slot];
    const real expected = 1 / h(pred, slot);
    if (std::abs(top - expected) > 1e-8L * std::abs(expected))
        throw breakdown_error(
            "leading_type1" + index.str() +
            ": top coefficient disagrees with 1/h of the predecessor index");
    return top;
}

std::pair<real, real> MopsSolver::recurrence_c_with_scale(int j, int k) {
    const int n = cfg_.n();
    const int hi = (cfg_.p() == 2) ? n + 1 : n - 1;
    if (j < 0 || k < 0 || j > hi || k > hi)
        throw config_error("recurrence_c: indices out of range (max " +
                           std::to_string(hi) + ")");
    const MonicPolynomial& P = P_at(k);
    const TypeIFunction& Q = Q_at(j);
    real value = 0, scale = 0;
    for (int i = 0; i < cfg_.p(); ++i) {
        const double ai = cfg_.a(i);
        for (size_t s = 0; s < Q.parts[i].size(); ++s)
            for (int r = 0; r <= P.degree(); ++r) {
                const real term =
                    Q.parts[i][s] * P.coeff(r) * cache_->raw(ai, r + static_cast<int>(s) + 1);
                value += term;
                scale += std::abs(term);
            }
    }
    return {value, scale};
}

real MopsSolver::recurrence_c(int j, int k) {
    return recurrence_c_with_scale(j, k).first;
}

namespace {

double rel_coeff_residual(const std::vector<real>& lhs,
                          const std::vector<real>& rhs) {
    real scale = 0, worst = 0;
    const size_t m = std::max(lhs.size(), rhs.size());
    for (size_t r = 0; r < m; ++r) {
        const real l = r < lhs.size() ? lhs[r] : 0;
        const real h = r < rhs.size() ? rhs[r] : 0;
        worst = std::max(worst, std::abs(l - h));
        scale = std::max({scale, std::abs(l), std::abs(h)});
    }
    return static_cast<double>(worst / std::max<real>(scale, 1e-300L));
}

std::vector<real> scaled_diff(const std::vector<real>& u,
                              const std::vector<real>& v, real factor) {
    std::vector<real> out(std::max(u.size(), v.size()), 0);
    for (size_t r = 0; r < out.size(); ++r) {
        const real a = r < u.size() ? u[r] : 0;
        const real b = r < v.size() ? v[r] : 0;
        out[r] = factor * (a - b);
    }
    return out;
}

} // namespace

LadderReport MopsSolver::ladder_check_P(int n1, int n2) {
    if (cfg_.p() != 2)
        throw config_error("ladder_check_P requires exactly two distinct "
                           "eigenvalues");
    if (n1 < 1 || n2 < 1)
        throw config_error("ladder_check_P: indices out of the relation's "
                           "range (n1, n2 >= 1)");
    const MultiIndex mm{{n1 - 1, n2 - 1}};
    const MultiIndex m1{{n1 - 1, n2}};
    const MultiIndex m2{{n1, n2 - 1}};
    const auto lhs = P(mm).full_coeffs();
    const auto u = P(m1).full_coeffs();
    const auto v = P(m2).full_coeffs();

    const real r1 = h(mm, 0) / h(m1, 0);
    const real r2 = -h(mm, 1) / h(m2, 1);

    LadderReport rep;
    rep.residual_first = rel_coeff_residual(lhs, scaled_diff(u, v, r1));
    rep.residual_second = rel_coeff_residual(lhs, scaled_diff(u, v, r2));
    rep.hratio_residual =
        static_cast<double>(std::abs(r1 - r2) / std::max<real>(std::abs(r1), 1e-300L));
    return rep;
}

LadderReport MopsSolver::ladder_check_Q(int n1, int n2) {
    if (cfg_.p() != 2)
        throw config_error("ladder_check_Q requires exactly two distinct "
                           "eigenvalues");
    if (n1 < 1 || n2 < 1)
        throw config_error("ladder_check_Q: indices out of the relation's "
                           "range (n1, n2 >= 1)");
    const MultiIndex pp{{n1 + 1, n2 + 1}};
    const MultiIndex p1{{n1, n2 + 1}};
    const MultiIndex p2{{n1 + 1, n2}};
    const TypeIFunction& lhs = Q(pp);
    const TypeIFunction& u = Q(p1);
    const TypeIFunction& v = Q(p2);

    // beta from the A-parts and from the B-parts; both must scale
    // Q_{n1,n2+1} - Q_{n1+1,n2} onto Q_{n1+1,n2+1}.
    const MultiIndex base{{n1, n2}};
    const real beta_a = -h(p1, 0) / h(base, 0);
    const real beta_b = h(p2, 1) / h(base, 1);

    auto residual_with = [&](real beta) {
        double worst = 0;
        for (int part = 0; part < 2; ++part) {
            std::vector<real> target(lhs.parts[part]);
            for (auto& c : target) c *= beta;
            worst = std::max(worst,
                             rel_coeff_residual(
                                 scaled_diff(u.parts[part], v.parts[part], 1),
                                 target));
        }
        return worst;
    };

    LadderReport rep;
    rep.residual_first = residual_with(beta_a);
    rep.residual_second = residual_with(beta_b);
    rep.hratio_residual = static_cast<double>(
        std::abs(beta_a - beta_b) / std::max<real>(std::abs(beta_a), 1e-300L));
    return rep;
}

MonicPolynomial MopsSolver::solve_P_determinant(const MultiIndex& index) const {
    const int K = index.total();
    MonicPolynomial P;
    P.index = index;
    P.coeffs.assign(K, 0);
    if (K == 0) return P;

    Mat W(K, K + 1);
    int row = 0;
    for (int i = 0; i < cfg_.p(); ++i) {
        const double ai = cfg_.a(i);
        for (int j = 0; j < index[i]; ++j, ++row)
            for (int c = 0; c <= K; ++c) W(row, c) = cache_->raw(ai, j + c);
    }

    auto minor_det = [&](int skip) {
        Mat S(K, K);
        for (int c = 0, t = 0; c <= K; ++c) {
            if (c == skip) continue;
            S.col(t++) = W.col(c);
        }
        return Eigen::FullPivLU<Mat>(S).determinant();
    };

    const real zt = minor_det(K);
    if (zt == 0)
        throw breakdown_error("solve_P_determinant" + index.str() +
                              ": leading moment determinant vanished");
    for (int r = 0; r < K; ++r) {
        const real sign = ((K + r) % 2 == 0) ? 1 : -1;
        P.coeffs[r] = sign * minor_det(r) / zt;
    }
    return P;
}

std::pair<real, real> MopsSolver::pairing(const MonicPolynomial& P,
                                          const TypeIFunction& Q) const {
    real value = 0, scale = 0;
    for (size_t i = 0; i < Q.parts.size(); ++i) {
        const double ai = Q.a[i];
        for (size_t s = 0; s < Q.parts[i].size(); ++s)
            for (int r = 0; r <= P.degree(); ++r) {
                const real term =
                    Q.parts[i][s] * P.coeff(r) *
                    cache_->raw(ai, r + static_cast<int>(s));
                value += term;
                scale += std::abs(term);
            }
    }
    return {value, std::max<real>(scale, 1)};
}

} // namespace extsrc
