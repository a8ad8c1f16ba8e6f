#include <doctest.h>

#include <cmath>
#include <memory>

#include "extsrc/rhp.hpp"
#include "testutil.hpp"

using namespace extsrc;

namespace {

struct Fixture {
    std::shared_ptr<MopsSolver> solver;
    RhAssembler rh;
    explicit Fixture(EnsembleConfig cfg, int n1, int n2)
        : solver(std::make_shared<MopsSolver>(std::move(cfg))),
          rh(solver, n1, n2) {}
};

Fixture sym11() {
    return Fixture(testutil::gauss_config({{-1.0, 1}, {1.0, 1}}), 1, 1);
}
Fixture asym12() {
    return Fixture(testutil::gauss_config({{-1.0, 1}, {1.0, 2}}), 1, 2);
}

} // namespace

TEST_CASE("cauchy transform of the Gaussian at z = i has a closed form") {
    auto f = sym11();
    WeightedPoly g;
    g.terms.push_back({{1.0L}, 0.0}); // e^{-s^2/2}
    const cxd got = f.rh.cauchy(g, cxd(0, 1));
    // (1/2 pi i) int e^{-s^2/2}/(s - i) ds = (e^{1/2}/2) erfc(1/sqrt 2).
    const double want = 0.5 * std::exp(0.5) * std::erfc(1.0 / std::sqrt(2.0));
    CHECK(got.real() == doctest::Approx(want).epsilon(1e-10));
    CHECK(std::abs(got.imag()) <= 1e-12);
}

TEST_CASE("cauchy transform: Schwarz reflection for real integrands") {
    auto f = asym12();
    WeightedPoly g;
    g.terms.push_back({{0.3L, 1.0L, 0.25L}, 0.7});
    for (const cxd z : {cxd(0.4, 0.8), cxd(-1.2, 0.05), cxd(2.0, -1.5)}) {
        const cxd up = f.rh.cauchy(g, z);
        const cxd down = f.rh.cauchy(g, std::conj(z));
        CHECK(std::abs(down - std::conj(up)) <= 1e-10 * (1 + std::abs(up)));
    }
}

TEST_CASE("cauchy transform: leading moment over z far field") {
    auto f = sym11();
    WeightedPoly g;
    g.terms.push_back({{1.0L}, 0.0});
    const cxd z(0, 1000);
    const cxd got = f.rh.cauchy(g, z);
    const double sqrt2pi = 2.506628274631000502;
    // -(1/2 pi i) m0/z = i m0/(2 pi z)
    const cxd lead = cxd(0, 1) * sqrt2pi / (2 * M_PI * z);
    // remainder is the next even moment term m2/(2 pi |z|^3), within 10%
    const double rem = std::abs(got - lead);
    const double predicted = sqrt2pi / (2 * M_PI * 1e9);
    CHECK(rem >= 0.9 * predicted);
    CHECK(rem <= 1.1 * predicted);
}

TEST_CASE("cauchy transform hard floor near the axis") {
    auto f = sym11();
    WeightedPoly g;
    g.terms.push_back({{1.0L}, 0.0});
    CHECK_THROWS_AS(f.rh.cauchy(g, cxd(0.0, 1e-9)), quadrature_error);
}

TEST_CASE("Y matrix entries and unimodularity") {
    auto f = sym11();
    const MultiIndex idx{{1, 1}};
    // Y_11 = P_{1,1}, which takes the value -2 at the origin.
    CHECK(f.solver->P(idx)(cxd(0, 0)).real() ==
          doctest::Approx(-2.0).epsilon(1e-12));
    const Matrix3 Y2i = f.rh.Y(cxd(0, 2));
    CHECK(Y2i(0, 0).real() == doctest::Approx(-6.0).epsilon(1e-10)); // (2i)^2-2

    const cxd z(0.37, 1.3);
    const Matrix3 Y = f.rh.Y(z);
    CHECK(std::abs(Y(0, 0) - f.solver->P(idx)(z)) <= 1e-12);
    CHECK(std::abs(Y.det() - cxd(1, 0)) <= 1e-6);
    CHECK(std::abs(Y2i.det() - cxd(1, 0)) <= 1e-6);
}

TEST_CASE("X matrix: type I entries and duality") {
    auto f = asym12();
    const cxd z(1.0, 1.0);
    const Matrix3 X = f.rh.X(z);
    // X_12 = 2 pi i A_{n1,n2}(z)
    const TypeIFunction& q = f.solver->Q(MultiIndex{{1, 2}});
    std::complex<double> a_val = 0;
    for (size_t r = q.parts[0].size(); r-- > 0;)
        a_val = a_val * z + static_cast<double>(q.parts[0][r]);
    const cxd want = cxd(0, 2 * M_PI) * a_val;
    CHECK(std::abs(X(0, 1) - want) <= 1e-10 * (1 + std::abs(want)));

    for (const cxd p : {cxd(0, 2), cxd(1, 1), cxd(-3, -0.5)}) {
        const Matrix3 XtY = f.rh.X(p).transpose() * f.rh.Y(p);
        CHECK(max_abs_diff(XtY, Matrix3::identity()) <= 1e-6);
        CHECK(max_abs_diff(f.rh.X(p), f.rh.Y(p).inverse().transpose()) <= 1e-6);
    }
}

TEST_CASE("asymptotic conditions decay like 1/z") {
    auto f = asym12();
    for (const cxd dir : {cxd(1, 1), cxd(0, 1)}) {
        const cxd z50 = dir / std::abs(dir) * 50.0;
        const cxd z100 = dir / std::abs(dir) * 100.0;
        const double ry50 = f.rh.asymp_residual_Y(z50);
        const double ry100 = f.rh.asymp_residual_Y(z100);
        CHECK(ry50 <= 2.0 * ry100 * 2.0);
        CHECK(ry50 > 0);
        const double rx50 = f.rh.asymp_residual_X(z50);
        const double rx100 = f.rh.asymp_residual_X(z100);
        CHECK(rx50 <= 2.0 * rx100 * 2.0);
    }
}

TEST_CASE("jump residuals shrink with eps") {
    auto f = sym11();
    // det J = 1 exactly: triangular with unit diagonal.
    CHECK(f.rh.jump_Y(0.3).det() == cxd(1, 0));
    CHECK(f.rh.jump_X(-0.2).det() == cxd(1, 0));

    double prev = -1;
    for (double eps : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
        const double r = f.rh.jump_residual_Y(0.0, eps);
        if (prev > 0) CHECK(r <= 1.2 * prev);
        prev = r;
    }
    CHECK(f.rh.jump_residual_Y(0.0, 1e-3) <= 1e-2);
    CHECK(f.rh.jump_residual_X(0.0, 1e-3) <= 1e-2);
}

TEST_CASE("kernel from the Riemann-Hilbert solution") {
    auto f = asym12();
    KernelBundle bundle(f.solver);
    const GridSpec grid = bundle.standard_grid();
    double worst = 0;
    for (double x : grid.points())
        for (double y : grid.points()) {
            const double kc = bundle.cd(x, y);
            worst = std::max(worst, std::abs(f.rh.kernel(x, y) - kc) /
                                        (1 + std::abs(kc)));
        }
    CHECK(worst <= 1e-8);
}

TEST_CASE("RH kernel agrees with the matrix product at complex offsets") {
    auto f = sym11();
    const double eps = 1e-3;
    for (const auto& [x, y] : std::vector<std::pair<double, double>>{
             {0.5, -0.4}, {1.2, 0.3}}) {
        const cxd zx(x, eps), zy(y, eps);
        const Matrix3 prod = f.rh.Y(zy).inverse() * f.rh.Y(zx);
        const Potential& pot = f.solver->config().potential();
        const cxd num = std::exp(f.solver->config().a(0) * zy) * prod(1, 0) +
                        std::exp(f.solver->config().a(1) * zy) * prod(2, 0);
        const cxd pref = std::exp(-(pot(zx) + pot(zy)) / 2.0);
        const cxd kc = pref * num / (cxd(0, 2 * M_PI) * (zx - zy));
        CHECK(std::abs(kc.real() - f.rh.kernel(x, y)) <= 1e-5);
    }
}

TEST_CASE("RH assembly preconditions") {
    auto p1 = std::make_shared<MopsSolver>(testutil::gauss_config({{0.0, 2}}));
    CHECK_THROWS_AS(RhAssembler(p1, 1, 1), config_error);
    auto p2 = std::make_shared<MopsSolver>(
        testutil::gauss_config({{-1.0, 1}, {1.0, 1}}));
    CHECK_THROWS_AS(RhAssembler(p2, 0, 2), config_error);
}
