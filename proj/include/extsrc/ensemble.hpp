// Static data of the Hermitian ensemble with external source: the confining
// potential V, the source spectrum {(a_i, n_i)}, orderings of the eigenvalues
// with multiplicity, and the weights w(x) = e^{-(V(x)-a x)}.
//
// All types are immutable after validation and safe for concurrent reads.

#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace extsrc {

using real = long double;

// Configuration / input validation failure.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Quadrature non-convergence, evaluation point too close to the axis, etc.
struct quadrature_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical breakdown: condition limit exceeded, vanishing h-number,
// consistency failure between two routes that must agree.
struct breakdown_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Polynomial potential V(x) = sum c_k x^k. Integrability of x^k e^{-V+ax}
// for every real a requires even degree >= 2 with positive leading
// coefficient; anything else is rejected.
class Potential {
public:
    static Potential validated(std::vector<double> coeffs);

    const std::vector<double>& coeffs() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_even() const;

    // V(x) = x^2/2 exactly; selects the closed-form Gaussian moment path.
    bool is_gaussian() const;

    real operator()(real x) const;
    std::complex<double> operator()(std::complex<double> z) const;

    // a*x - V(x). Weight evaluation goes through this and exponentiates last.
    real log_weight(double a, real x) const;

private:
    explicit Potential(std::vector<double> c) : coeffs_(std::move(c)) {}
    std::vector<double> coeffs_;
};

// w(x) = e^{-(V(x) - a x)}. Strictly positive; underflows to 0 in the far
// tail, which callers accept.
double weight_eval(const Potential& pot, double a, double x);

struct SourceSpectrum {
    struct Entry {
        double a;
        int multiplicity;
    };
    std::vector<Entry> entries;

    int p() const { return static_cast<int>(entries.size()); }
    int n() const;
    double max_abs_a() const;
    // Index of the entry with eigenvalue a; throws config_error if absent.
    int slot_of(double a) const;

    static SourceSpectrum validated(std::vector<Entry> entries);
};

// A sequence alpha_1..alpha_n realizing the spectrum with multiplicity.
struct Ordering {
    std::vector<double> alpha;
    int n() const { return static_cast<int>(alpha.size()); }
};

// Per-eigenvalue counts (k_1..k_p); |k| = sum.
struct MultiIndex {
    std::vector<int> k;

    int total() const;
    int size() const { return static_cast<int>(k.size()); }
    int operator[](int i) const { return k[i]; }
    bool operator==(const MultiIndex&) const = default;
    bool operator<(const MultiIndex& o) const { return k < o.k; }
    std::string str() const;
};

// Counts of each spectrum eigenvalue among the first k entries of ord.
MultiIndex prefix_counts(const SourceSpectrum& spec, const Ordering& ord, int k);

// A fully validated ensemble configuration. When no ordering is supplied the
// block ordering (a_1 repeated n_1 times, then a_2, ...) is used; for p = 2
// the tail is arranged so that alpha_{n-1} = a_1, alpha_n = a_2.
class EnsembleConfig {
public:
    static EnsembleConfig validated(Potential pot, SourceSpectrum spec,
                                    std::optional<Ordering> ord = std::nullopt);
    static EnsembleConfig from_json(const nlohmann::json& doc);
    static EnsembleConfig from_json_file(const std::string& path);

    const Potential& potential() const { return pot_; }
    const SourceSpectrum& spectrum() const { return spec_; }
    const Ordering& ordering() const { return ord_; }

    int n() const { return spec_.n(); }
    int p() const { return spec_.p(); }
    double a(int slot) const { return spec_.entries[slot].a; }

    MultiIndex prefix_counts(int k) const;
    // Prefix counts of the ordering extended by alpha_{n+1} = a_1,
    // alpha_{n+2} = a_2 (p = 2 only beyond k = n).
    MultiIndex extended_prefix_counts(int k) const;

    // Condition-number hard limit for moment-matrix solves (config override
    // key "cond_limit"; default 1e12).
    double cond_limit() const { return cond_limit_; }

    nlohmann::json to_json() const;

private:
    EnsembleConfig(Potential pot, SourceSpectrum spec, Ordering ord, double cl)
        : pot_(std::move(pot)), spec_(std::move(spec)), ord_(std::move(ord)),
          cond_limit_(cl) {}

    Potential pot_;
    SourceSpectrum spec_;
    Ordering ord_;
    double cond_limit_ = 1e12;
};

} // namespace extsrc
