#include "extsrc/rhp.hpp"

#include <cmath>

#include "extsrc/quadrature.hpp"

namespace extsrc {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::complex<real> poly_eval(const std::vector<real>& coeffs,
                             std::complex<real> z) {
    std::complex<real> v = 0;
    for (size_t r = coeffs.size(); r-- > 0;) v = v * z + coeffs[r];
    return v;
}
} // namespace

Matrix3 Matrix3::identity() {
    Matrix3 I;
    I(0, 0) = I(1, 1) = I(2, 2) = 1;
    return I;
}

Matrix3 Matrix3::operator*(const Matrix3& o) const {
    Matrix3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            cxd acc = 0;
            for (int k = 0; k < 3; ++k) acc += (*this)(i, k) * o(k, j);
            r(i, j) = acc;
        }
    return r;
}

Matrix3 Matrix3::transpose() const {
    Matrix3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
}

cxd Matrix3::det() const {
    const auto& a = *this;
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Matrix3 Matrix3::inverse() const {
    const cxd d = det();
    if (std::abs(d) == 0.0)
        throw breakdown_error("Matrix3::inverse: singular matrix");
    const auto& a = *this;
    Matrix3 r;
    r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / d;
    r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / d;
    r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
    r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / d;
    r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / d;
    r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / d;
    r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / d;
    r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / d;
    r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / d;
    return r;
}

double Matrix3::max_abs() const {
    double r = 0;
    for (const cxd& v : m) r = std::max(r, std::abs(v));
    return r;
}

double max_abs_diff(const Matrix3& a, const Matrix3& b) {
    double m = 0;
    for (int i = 0; i < 9; ++i) m = std::max(m, std::abs(a.m[i] - b.m[i]));
    return m;
}

real WeightedPoly::operator()(const Potential& pot, real s) const {
    real acc = 0;
    for (const Term& t : terms) {
        real p = 0;
        for (size_t r = t.coeffs.size(); r-- > 0;) p = p * s + t.coeffs[r];
        acc += p * std::exp(pot.log_weight(t.a, s));
    }
    return acc;
}

RhAssembler::RhAssembler(std::shared_ptr<MopsSolver> solver, int n1, int n2)
    : solver_(std::move(solver)), n1_(n1), n2_(n2) {
    const EnsembleConfig& cfg = solver_->config();
    if (cfg.p() != 2)
        throw config_error("Riemann-Hilbert assembly requires exactly two "
                           "distinct eigenvalues");
    if (n1 < 1 || n2 < 1)
        throw config_error("RhAssembler: n1, n2 >= 1 required");
    a1_ = cfg.a(0);
    a2_ = cfg.a(1);

    p00_ = &solver_->P(MultiIndex{{n1, n2}});
    p10_ = &solver_->P(MultiIndex{{n1 - 1, n2}});
    p01_ = &solver_->P(MultiIndex{{n1, n2 - 1}});
    q00_ = &solver_->Q(MultiIndex{{n1, n2}});
    q10_ = &solver_->Q(MultiIndex{{n1 + 1, n2}});
    q01_ = &solver_->Q(MultiIndex{{n1, n2 + 1}});

    h1_pred_ = solver_->h(MultiIndex{{n1 - 1, n2}}, 0);
    h2_pred_ = solver_->h(MultiIndex{{n1, n2 - 1}}, 1);
    k1_ = solver_->h(MultiIndex{{n1, n2}}, 0);
    k2_ = solver_->h(MultiIndex{{n1, n2}}, 1);
    c1_ = cxd(0, -2 * kPi) / cxd(static_cast<double>(h1_pred_), 0);
    c2_ = cxd(0, -2 * kPi) / cxd(static_cast<double>(h2_pred_), 0);

    // Truncation covers the heaviest weighted-polynomial numerators.
    L_ = truncation_bound(cfg.potential(), cfg.spectrum().max_abs_a(),
                          n1 + n2 + 2);
}

WeightedPoly RhAssembler::weighted(const MonicPolynomial& P, int slot) const {
    WeightedPoly f;
    f.terms.push_back({P.full_coeffs(), config().a(slot)});
    return f;
}

WeightedPoly RhAssembler::weighted(const TypeIFunction& Q) const {
    WeightedPoly f;
    for (size_t i = 0; i < Q.parts.size(); ++i)
        if (!Q.parts[i].empty()) f.terms.push_back({Q.parts[i], Q.a[i]});
    return f;
}

cxd RhAssembler::cauchy(const WeightedPoly& f, cxd z) const {
    const double im = std::abs(z.imag());
    if (im < 1e-8)
        throw quadrature_error("cauchy: evaluation point within 1e-8 of the "
                               "real axis");
    const Potential& pot = config().potential();
    const std::complex<real> zz(static_cast<real>(z.real()),
                                static_cast<real>(z.imag()));

    std::vector<double> pts =
        (im < 0.1) ? refined_breakpoints(L_, z.real(), im, 16)
                   : refined_breakpoints(L_, z.real(), 0.25, 16);
    QuadratureRule rule = QuadratureRule::from_breakpoints(pts, 40);

    auto evaluate = [&](const QuadratureRule& r) {
        std::complex<real> acc = 0;
        real mass = 0;
        for (size_t i = 0; i < r.nodes.size(); ++i) {
            const std::complex<real> g =
                r.weights[i] * f(pot, r.nodes[i]) / (r.nodes[i] - zz);
            acc += g;
            mass += std::abs(g);
        }
        return std::make_pair(acc, mass);
    };

    auto [prev, prev_mass] = evaluate(rule);
    for (int it = 0; it < 7; ++it) {
        rule = rule.halved();
        auto [cur, mass] = evaluate(rule);
        if (std::abs(cur - prev) <= 1e-9L * std::max(std::abs(cur), mass)) {
            const std::complex<real> v =
                cur / std::complex<real>(0, 2 * static_cast<real>(kPi));
            return cxd(static_cast<double>(v.real()),
                       static_cast<double>(v.imag()));
        }
        prev = cur;
    }
    throw quadrature_error("cauchy: no convergence near z = (" +
                           std::to_string(z.real()) + ", " +
                           std::to_string(z.imag()) + ")");
}

Matrix3 RhAssembler::Y(cxd z) const {
    Matrix3 Y;
    Y(0, 0) = (*p00_)(z);
    Y(0, 1) = cauchy(weighted(*p00_, 0), z);
    Y(0, 2) = cauchy(weighted(*p00_, 1), z);
    Y(1, 0) = c1_ * (*p10_)(z);
    Y(1, 1) = c1_ * cauchy(weighted(*p10_, 0), z);
    Y(1, 2) = c1_ * cauchy(weighted(*p10_, 1), z);
    Y(2, 0) = c2_ * (*p01_)(z);
    Y(2, 1) = c2_ * cauchy(weighted(*p01_, 0), z);
    Y(2, 2) = c2_ * cauchy(weighted(*p01_, 1), z);
    return Y;
}

namespace {
cxd part_at(const TypeIFunction& q, int slot, cxd z) {
    const std::complex<real> zz(static_cast<real>(z.real()),
                                static_cast<real>(z.imag()));
    const std::complex<real> v = poly_eval(q.parts[slot], zz);
    return cxd(static_cast<double>(v.real()), static_cast<double>(v.imag()));
}
} // namespace

Matrix3 RhAssembler::X(cxd z) const {
    const cxd twopii(0, 2 * kPi);
    Matrix3 X;
    X(0, 0) = -twopii * cauchy(weighted(*q00_), z);
    X(0, 1) = twopii * part_at(*q00_, 0, z);
    X(0, 2) = twopii * part_at(*q00_, 1, z);
    X(1, 0) = -static_cast<double>(k1_) * cauchy(weighted(*q10_), z);
    X(1, 1) = static_cast<double>(k1_) * part_at(*q10_, 0, z);
    X(1, 2) = static_cast<double>(k1_) * part_at(*q10_, 1, z);
    X(2, 0) = -static_cast<double>(k2_) * cauchy(weighted(*q01_), z);
    X(2, 1) = static_cast<double>(k2_) * part_at(*q01_, 0, z);
    X(2, 2) = static_cast<double>(k2_) * part_at(*q01_, 1, z);
    return X;
}

Matrix3 RhAssembler::jump_Y(double x) const {
    Matrix3 J = Matrix3::identity();
    J(0, 1) = weight_eval(config().potential(), a1_, x);
    J(0, 2) = weight_eval(config().potential(), a2_, x);
    return J;
}

Matrix3 RhAssembler::jump_X(double x) const {
    Matrix3 J = Matrix3::identity();
    J(1, 0) = -weight_eval(config().potential(), a1_, x);
    J(2, 0) = -weight_eval(config().potential(), a2_, x);
    return J;
}

double RhAssembler::jump_residual_Y(double x, double eps) const {
    const Matrix3 Yp = Y(cxd(x, eps));
    const Matrix3 Ym = Y(cxd(x, -eps));
    return max_abs_diff(Yp, Ym * jump_Y(x));
}

double RhAssembler::jump_residual_X(double x, double eps) const {
    const Matrix3 Xp = X(cxd(x, eps));
    const Matrix3 Xm = X(cxd(x, -eps));
    return max_abs_diff(Xp, Xm * jump_X(x));
}

namespace {
double asymp_residual(const Matrix3& M, cxd z, int e0, int e1, int e2) {
    Matrix3 D;
    D(0, 0) = std::pow(z, e0);
    D(1, 1) = std::pow(z, e1);
    D(2, 2) = std::pow(z, e2);
    return max_abs_diff(M * D, Matrix3::identity());
}
} // namespace

double RhAssembler::asymp_residual_Y(cxd z) const {
    return asymp_residual(Y(z), z, -(n1_ + n2_), n1_, n2_);
}

double RhAssembler::asymp_residual_X(cxd z) const {
    return asymp_residual(X(z), z, n1_ + n2_, -n1_, -n2_);
}

double RhAssembler::kernel(double x, double y) const {
    const Potential& pot = config().potential();
    const real xx = x, yy = y;
    const cxd twopii(0, 2 * kPi);

    // Column of Y(x) entries (first column is polynomial), row of type I
    // polynomial values at y; the 21/31 entries of Y^{-1}(y) Y(x).
    const cxd col0 = (*p00_)(cxd(x, 0));
    const cxd col1 = c1_ * (*p10_)(cxd(x, 0));
    const cxd col2 = c2_ * (*p01_)(cxd(x, 0));
    const cxd e21 = twopii * part_at(*q00_, 0, cxd(y, 0)) * col0 +
                    static_cast<double>(k1_) * part_at(*q10_, 0, cxd(y, 0)) * col1 +
                    static_cast<double>(k2_) * part_at(*q01_, 0, cxd(y, 0)) * col2;
    const cxd e31 = twopii * part_at(*q00_, 1, cxd(y, 0)) * col0 +
                    static_cast<double>(k1_) * part_at(*q10_, 1, cxd(y, 0)) * col1 +
                    static_cast<double>(k2_) * part_at(*q01_, 1, cxd(y, 0)) * col2;

    const real w1 = std::exp(static_cast<real>(a1_) * yy - pot(yy) / 2);
    const real w2 = std::exp(static_cast<real>(a2_) * yy - pot(yy) / 2);
    const real wx = std::exp(-pot(xx) / 2);

    if (std::abs(xx - yy) >= 1e-6L) {
        const cxd combo = (static_cast<double>(w1) * e21 +
                           static_cast<double>(w2) * e31) /
                          (twopii * cxd(x - y, 0));
        return static_cast<double>(wx) * combo.real();
    }
    // Diagonal limit: differentiate the numerator's x-dependence (the type
    // II column) at the midpoint.
    const real m = (xx + yy) / 2;
    const cxd dcol0 = p00_->deriv(m);
    const cxd dcol1 = c1_ * static_cast<double>(p10_->deriv(m));
    const cxd dcol2 = c2_ * static_cast<double>(p01_->deriv(m));
    const cxd de21 = twopii * part_at(*q00_, 0, cxd(y, 0)) * dcol0 +
                     static_cast<double>(k1_) * part_at(*q10_, 0, cxd(y, 0)) * dcol1 +
                     static_cast<double>(k2_) * part_at(*q01_, 0, cxd(y, 0)) * dcol2;
    const cxd de31 = twopii * part_at(*q00_, 1, cxd(y, 0)) * dcol0 +
                     static_cast<double>(k1_) * part_at(*q10_, 1, cxd(y, 0)) * dcol1 +
                     static_cast<double>(k2_) * part_at(*q01_, 1, cxd(y, 0)) * dcol2;
    const cxd combo = (static_cast<double>(w1) * de21 +
                       static_cast<double>(w2) * de31) /
                      twopii;
    return static_cast<double>(wx) * combo.real();
}

} // namespace extsrc
