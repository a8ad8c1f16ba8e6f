#include "extsrc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>

namespace extsrc {

namespace {

GaussLegendre compute_gl(int order) {
    GaussLegendre rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const real pi = 3.14159265358979323846264338327950288L;
    for (int i = 0; i < (order + 1) / 2; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        real x = std::cos(pi * (static_cast<real>(i) + 0.75L) /
                          (static_cast<real>(order) + 0.5L));
        real dp = 0;
        for (int it = 0; it < 100; ++it) {
            real p0 = 1, p1 = x;
            for (int k = 2; k <= order; ++k) {
                real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1);
            real dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-19L * std::max<real>(1, std::abs(x))) break;
        }
        const real w = 2 / ((1 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[order - 1 - i] = x;
        rule.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) rule.nodes[order / 2] = 0;
    return rule;
}

} // namespace

const GaussLegendre& GaussLegendre::get(int order) {
    static std::mutex mu;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end())
        it = cache.emplace(order, compute_gl(order)).first;
    return it->second;
}

QuadratureRule QuadratureRule::composite(double L, int panels, int order) {
    std::vector<double> pts(panels + 1);
    for (int i = 0; i <= panels; ++i)
        pts[i] = -L + 2.0 * L * i / panels;
    QuadratureRule r = from_breakpoints(pts, order);
    r.truncation = L;
    r.panels = panels;
    return r;
}

QuadratureRule QuadratureRule::from_breakpoints(const std::vector<double>& pts,
                                                int order) {
    const GaussLegendre& gl = GaussLegendre::get(order);
    QuadratureRule r;
    r.order = order;
    r.breakpoints = pts;
    r.panels = static_cast<int>(pts.size()) - 1;
    r.truncation = std::max(std::abs(pts.front()), std::abs(pts.back()));
    r.nodes.reserve(r.panels * order);
    r.weights.reserve(r.panels * order);
    for (int p = 0; p < r.panels; ++p) {
        const real a = pts[p], b = pts[p + 1];
        const real mid = (a + b) / 2, half = (b - a) / 2;
        for (int i = 0; i < order; ++i) {
            r.nodes.push_back(mid + half * gl.nodes[i]);
            r.weights.push_back(half * gl.weights[i]);
        }
    }
    return r;
}

QuadratureRule QuadratureRule::halved() const {
    std::vector<double> pts;
    pts.reserve(2 * breakpoints.size());
    for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        pts.push_back(breakpoints[i]);
        pts.push_back((breakpoints[i] + breakpoints[i + 1]) / 2);
    }
    pts.push_back(breakpoints.back());
    return from_breakpoints(pts, order);
}

QuadratureResult integrate_doubling(const std::function<real(real)>& f, double L,
                                    double rel_tol, int order, int panels0,
                                    int max_panels) {
    auto eval = [&](int panels) {
        QuadratureRule r = QuadratureRule::composite(L, panels, order);
        QuadratureResult q;
        q.panels = panels;
        for (size_t i = 0; i < r.nodes.size(); ++i) {
            const real t = r.weights[i] * f(r.nodes[i]);
            q.value += t;
            q.abs_mass += std::abs(t);
        }
        return q;
    };
    QuadratureResult prev = eval(panels0);
    for (int panels = 2 * panels0; panels <= max_panels; panels *= 2) {
        QuadratureResult cur = eval(panels);
        const real scale = std::max(std::abs(cur.value), cur.abs_mass);
        if (std::abs(cur.value - prev.value) <= static_cast<real>(rel_tol) * scale)
            return cur;
        prev = cur;
    }
    throw quadrature_error("integrate_doubling: no convergence at " +
                           std::to_string(max_panels) + " panels (L = " +
                           std::to_string(L) + ")");
}

double truncation_bound(const Potential& pot, double a_max, int k_max) {
    const real target = 60;
    auto g = [&](real L) {
        const real v = std::min(pot(L), pot(-L));
        return v - static_cast<real>(a_max) * L -
               static_cast<real>(k_max) * std::log(std::max<real>(L, 1));
    };
    real lo = 1, hi = 2;
    while (g(hi) < target) {
        lo = hi;
        hi *= 2;
        if (hi > 1e8)
            throw quadrature_error("truncation_bound: no finite bound found");
    }
    if (g(lo) >= target) return static_cast<double>(lo);
    for (int it = 0; it < 200; ++it) {
        const real mid = (lo + hi) / 2;
        (g(mid) >= target ? hi : lo) = mid;
        if (hi - lo < 1e-6L) break;
    }
    return static_cast<double>(hi);
}

std::vector<double> refined_breakpoints(double L, double x0, double h_min,
                                        int base_panels) {
    std::set<double> pts;
    for (int i = 0; i <= base_panels; ++i)
        pts.insert(-L + 2.0 * L * i / base_panels);
    if (x0 > -L && x0 < L && h_min < 2.0 * L / base_panels) {
        pts.insert(x0);
        for (double h = h_min; h < 2.0 * L / base_panels; h *= 2) {
            if (x0 + h < L) pts.insert(x0 + h);
            if (x0 - h > -L) pts.insert(x0 - h);
        }
    }
    return {pts.begin(), pts.end()};
}

} // namespace extsrc
