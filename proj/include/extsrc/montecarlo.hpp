// GUE-plus-source Monte Carlo for the Gaussian potential: M = H + A with H
// drawn from the density ~ e^{-Tr H^2/2} (diagonal N(0,1), off-diagonal real
// and imaginary parts N(0,1/2) each -- this convention matches V(x) = x^2/2
// and is fixed here, not derived from any normalization of Z_n).
//
// Sample s draws from an RNG stream keyed on (seed, s), so results are
// bit-identical across runs and worker counts.

#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "extsrc/ensemble.hpp"
#include "extsrc/kernel.hpp"

namespace extsrc {

struct MCConfig {
    EnsembleConfig ensemble; // Gaussian potential only
    long samples = 100000;
    std::uint64_t seed = 1;
    int workers = 4;
    int batches = 100; // equal-size batches; samples rounds down to a multiple

    static MCConfig make(EnsembleConfig cfg, long samples, std::uint64_t seed,
                         int workers);
};

struct Histogram {
    std::vector<double> edges; // size bins+1
    std::vector<long> count;
    std::vector<double> expected;

    int bins() const { return static_cast<int>(count.size()); }
};

struct MCReport {
    long samples_used = 0;
    int batches = 0;
    // Estimated monic characteristic-polynomial coefficients c_0..c_{n-1}
    // (leading coefficient 1 implied) with batch-mean standard errors.
    std::vector<double> coeff;
    std::vector<double> coeff_se;

    nlohmann::json to_json() const;
};

// Eigenvalues (ascending) of one draw of M = H + A.
std::vector<double> sample_eigenvalues(const EnsembleConfig& cfg,
                                       std::uint64_t seed, long index);

MCReport mc_avg_charpoly(const MCConfig& cfg);

struct DensityReport {
    Histogram hist;
    long samples_used = 0;
    double max_sigma_dev = 0; // worst bin deviation in binomial sigmas
};

// Eigenvalue histogram against the kernel diagonal R_1 = K_n(x,x); the
// expected column integrates R_1 over each bin.
DensityReport mc_density_check(const MCConfig& cfg, const KernelBundle& bundle,
                               int bins = 40);

void dump_histogram_csv(const std::string& path, const Histogram& hist);

} // namespace extsrc
