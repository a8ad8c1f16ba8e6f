#include "extsrc/montecarlo.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "extsrc/io.hpp"
#include "extsrc/parallel.hpp"
#include "extsrc/quadrature.hpp"

namespace extsrc {

namespace {

std::uint64_t mix64(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Box-Muller over explicit 53-bit uniforms; platform-stable, unlike
// std::normal_distribution.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t s) : eng_(s) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform53(); // (0, 1]
        const double u2 = uniform53();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

private:
    double uniform53() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0;
};

void check_gaussian(const EnsembleConfig& cfg) {
    if (!cfg.potential().is_gaussian())
        throw config_error("Monte Carlo sampling requires V(x) = x^2/2 "
                           "(M = H + A with H from the GUE)");
}

} // namespace

MCConfig MCConfig::make(EnsembleConfig cfg, long samples, std::uint64_t seed,
                        int workers) {
    MCConfig mc{std::move(cfg), samples, seed, workers};
    check_gaussian(mc.ensemble);
    if (samples < 1) throw config_error("MCConfig: samples must be positive");
    if (workers < 1) throw config_error("MCConfig: workers must be positive");
    mc.batches = static_cast<int>(std::min<long>(100, samples));
    return mc;
}

std::vector<double> sample_eigenvalues(const EnsembleConfig& cfg,
                                       std::uint64_t seed, long index) {
    check_gaussian(cfg);
    const int n = cfg.n();
    NormalStream rng(mix64(seed, static_cast<std::uint64_t>(index)));
    const double inv_sqrt2 = 0.70710678118654752440;

    Eigen::MatrixXcd M(n, n);
    for (int i = 0; i < n; ++i) {
        M(i, i) = std::complex<double>(rng.next() + cfg.ordering().alpha[i], 0);
        for (int j = i + 1; j < n; ++j) {
            const double re = rng.next() * inv_sqrt2;
            const double im = rng.next() * inv_sqrt2;
            M(i, j) = std::complex<double>(re, im);
            M(j, i) = std::complex<double>(re, -im);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M,
                                                       Eigen::EigenvaluesOnly);
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = es.eigenvalues()(i);
    return ev;
}

namespace {

// Monic coefficients of prod (z - lambda_i), ascending, leading 1 dropped.
void charpoly_accumulate(const std::vector<double>& ev, std::vector<real>& acc) {
    const int n = static_cast<int>(ev.size());
    std::vector<real> c(n + 1, 0);
    c[0] = 1; // degree-0 polynomial "1", coefficients shifted as we multiply
    for (int m = 0; m < n; ++m) {
        // multiply by (z - ev[m]); degree grows from m to m+1
        for (int r = m + 1; r >= 1; --r) c[r] = c[r - 1] - ev[m] * c[r];
        c[0] = -ev[m] * c[0];
    }
    for (int r = 0; r < n; ++r) acc[r] += c[r];
}

} // namespace

MCReport mc_avg_charpoly(const MCConfig& cfg) {
    check_gaussian(cfg.ensemble);
    const int n = cfg.ensemble.n();
    const int batches = std::max(1, cfg.batches);
    const long per_batch = cfg.samples / batches;
    if (per_batch < 1)
        throw config_error("mc_avg_charpoly: fewer samples than batches");
    const long used = per_batch * batches;

    std::vector<std::vector<real>> batch_sum(
        batches, std::vector<real>(n, 0));
    parallel_for(batches, cfg.workers, [&](int b) {
        std::vector<real>& acc = batch_sum[b];
        const long lo = static_cast<long>(b) * per_batch;
        for (long s = lo; s < lo + per_batch; ++s)
            charpoly_accumulate(sample_eigenvalues(cfg.ensemble, cfg.seed, s),
                                acc);
    });

    MCReport rep;
    rep.samples_used = used;
    rep.batches = batches;
    rep.coeff.assign(n, 0);
    rep.coeff_se.assign(n, 0);
    for (int r = 0; r < n; ++r) {
        real total = 0;
        for (int b = 0; b < batches; ++b) total += batch_sum[b][r];
        const real mean = total / used;
        rep.coeff[r] = static_cast<double>(mean);
        if (batches > 1) {
            real ss = 0;
            for (int b = 0; b < batches; ++b) {
                const real bm = batch_sum[b][r] / per_batch;
                ss += (bm - mean) * (bm - mean);
            }
            rep.coeff_se[r] = static_cast<double>(
                std::sqrt(ss / (static_cast<real>(batches) * (batches - 1))));
        }
    }
    return rep;
}

nlohmann::json MCReport::to_json() const {
    nlohmann::json j;
    j["samples"] = samples_used;
    j["batches"] = batches;
    j["coefficients"] = coeff;
    j["standard_errors"] = coeff_se;
    return j;
}

DensityReport mc_density_check(const MCConfig& cfg, const KernelBundle& bundle,
                               int bins) {
    check_gaussian(cfg.ensemble);
    const int n = cfg.ensemble.n();
    const int batches = std::max(1, cfg.batches);
    const long per_batch = cfg.samples / batches;
    if (per_batch < 1)
        throw config_error("mc_density_check: fewer samples than batches");
    const long used = per_batch * batches;

    const GridSpec box = GridSpec::standard(cfg.ensemble.spectrum());
    const double lo = box.xmin, hi = box.xmax;
    const double width = (hi - lo) / bins;

    std::vector<std::vector<long>> batch_counts(batches,
                                                std::vector<long>(bins, 0));
    parallel_for(batches, cfg.workers, [&](int b) {
        auto& counts = batch_counts[b];
        const long start = static_cast<long>(b) * per_batch;
        for (long s = start; s < start + per_batch; ++s)
            for (double ev : sample_eigenvalues(cfg.ensemble, cfg.seed, s)) {
                const int bin = static_cast<int>((ev - lo) / width);
                if (bin >= 0 && bin < bins) ++counts[bin];
            }
    });

    DensityReport rep;
    rep.samples_used = used;
    rep.hist.edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b) rep.hist.edges[b] = lo + b * width;
    rep.hist.count.assign(bins, 0);
    rep.hist.expected.assign(bins, 0);
    for (int b = 0; b < bins; ++b)
        for (int bb = 0; bb < batches; ++bb)
            rep.hist.count[b] += batch_counts[bb][b];

    // Expected per-sample mass of each bin: integral of R_1 = K_n(x,x).
    const GaussLegendre& gl = GaussLegendre::get(20);
    for (int b = 0; b < bins; ++b) {
        const double mid = (rep.hist.edges[b] + rep.hist.edges[b + 1]) / 2;
        const double half = width / 2;
        real mass = 0;
        for (size_t i = 0; i < gl.nodes.size(); ++i) {
            const double x = mid + half * static_cast<double>(gl.nodes[i]);
            mass += gl.weights[i] * static_cast<real>(bundle.sum(x, x));
        }
        mass *= half;
        rep.hist.expected[b] = static_cast<double>(mass) * used;

        const double p = std::min(1.0, std::max(0.0, static_cast<double>(mass) / n));
        const double sigma =
            std::max(1.0, std::sqrt(static_cast<double>(used) * n * p * (1 - p)));
        rep.max_sigma_dev = std::max(
            rep.max_sigma_dev,
            std::abs(rep.hist.count[b] - rep.hist.expected[b]) / sigma);
    }
    return rep;
}

void dump_histogram_csv(const std::string& path, const Histogram& hist) {
    std::vector<std::vector<std::string>> rows;
    for (int b = 0; b < hist.bins(); ++b)
        rows.push_back({format_double(hist.edges[b]),
                        format_double(hist.edges[b + 1]),
                        std::to_string(hist.count[b]),
                        format_double(hist.expected[b])});
    write_csv_atomic(path, {"bin_lo", "bin_hi", "count", "expected"}, rows);
}

} // namespace extsrc
