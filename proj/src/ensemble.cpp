#include "extsrc/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace extsrc {

Potential Potential::validated(std::vector<double> coeffs) {
    while (!coeffs.empty() && coeffs.back() == 0.0)
        coeffs.pop_back();
    if (coeffs.size() < 3)
        throw config_error("potential: degree must be at least 2");
    const int d = static_cast<int>(coeffs.size()) - 1;
    if (d % 2 != 0)
        throw config_error("potential: odd-degree potential is not integrable "
                           "against e^{ax} for every a");
    if (coeffs.back() <= 0.0)
        throw config_error("potential: leading coefficient must be positive");
    for (double c : coeffs)
        if (!std::isfinite(c))
            throw config_error("potential: non-finite coefficient");
    return Potential(std::move(coeffs));
}

bool Potential::is_even() const {
    for (size_t k = 1; k < coeffs_.size(); k += 2)
        if (coeffs_[k] != 0.0) return false;
    return true;
}

bool Potential::is_gaussian() const {
    return coeffs_.size() == 3 && coeffs_[0] == 0.0 && coeffs_[1] == 0.0 &&
           coeffs_[2] == 0.5;
}

real Potential::operator()(real x) const {
    real v = 0;
    for (size_t k = coeffs_.size(); k-- > 0;)
        v = v * x + static_cast<real>(coeffs_[k]);
    return v;
}

std::complex<double> Potential::operator()(std::complex<double> z) const {
    std::complex<double> v = 0;
    for (size_t k = coeffs_.size(); k-- > 0;)
        v = v * z + coeffs_[k];
    return v;
}

real Potential::log_weight(double a, real x) const {
    return static_cast<real>(a) * x - (*this)(x);
}

double weight_eval(const Potential& pot, double a, double x) {
    const real lw = pot.log_weight(a, static_cast<real>(x));
    // expl underflows cleanly to 0 below ~-11400.
    return static_cast<double>(std::exp(lw));
}

int SourceSpectrum::n() const {
    int total = 0;
    for (const auto& e : entries) total += e.multiplicity;
    return total;
}

double SourceSpectrum::max_abs_a() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, std::abs(e.a));
    return m;
}

int SourceSpectrum::slot_of(double a) const {
    for (int i = 0; i < p(); ++i)
        if (entries[i].a == a) return i;
    throw config_error("spectrum: value " + std::to_string(a) +
                       " is not an eigenvalue of the source");
}

SourceSpectrum SourceSpectrum::validated(std::vector<Entry> entries) {
    if (entries.empty())
        throw config_error("spectrum: at least one eigenvalue required");
    for (const auto& e : entries) {
        if (!std::isfinite(e.a))
            throw config_error("spectrum: non-finite eigenvalue");
        if (e.multiplicity < 1)
            throw config_error("spectrum: multiplicity must be >= 1");
    }
    for (size_t i = 0; i < entries.size(); ++i)
        for (size_t j = i + 1; j < entries.size(); ++j)
            if (entries[i].a == entries[j].a)
                throw config_error("spectrum: duplicate eigenvalue " +
                                   std::to_string(entries[i].a));
    return SourceSpectrum{std::move(entries)};
}

int MultiIndex::total() const {
    int t = 0;
    for (int v : k) t += v;
    return t;
}

std::string MultiIndex::str() const {
    std::string s = "(";
    for (int i = 0; i < size(); ++i) {
        if (i) s += ",";
        s += std::to_string(k[i]);
    }
    return s + ")";
}

MultiIndex prefix_counts(const SourceSpectrum& spec, const Ordering& ord, int k) {
    if (k < 0 || k > ord.n())
        throw config_error("prefix_counts: k = " + std::to_string(k) +
                           " out of range [0, " + std::to_string(ord.n()) + "]");
    MultiIndex idx;
    idx.k.assign(spec.p(), 0);
    for (int j = 0; j < k; ++j)
        ++idx.k[spec.slot_of(ord.alpha[j])];
    return idx;
}

namespace {

Ordering default_ordering(const SourceSpectrum& spec) {
    Ordering ord;
    if (spec.p() == 2) {
        // Block ordering with the tail fixed to (a_1, a_2).
        const auto& e1 = spec.entries[0];
        const auto& e2 = spec.entries[1];
        ord.alpha.insert(ord.alpha.end(), e1.multiplicity - 1, e1.a);
        ord.alpha.insert(ord.alpha.end(), e2.multiplicity - 1, e2.a);
        ord.alpha.push_back(e1.a);
        ord.alpha.push_back(e2.a);
    } else {
        for (const auto& e : spec.entries)
            ord.alpha.insert(ord.alpha.end(), e.multiplicity, e.a);
    }
    return ord;
}

void check_ordering(const SourceSpectrum& spec, const Ordering& ord) {
    if (ord.n() != spec.n())
        throw config_error("ordering: length " + std::to_string(ord.n()) +
                           " does not match n = " + std::to_string(spec.n()));
    std::map<double, int> counts;
    for (double a : ord.alpha) ++counts[a];
    for (const auto& e : spec.entries) {
        auto it = counts.find(e.a);
        if (it == counts.end() || it->second != e.multiplicity)
            throw config_error("ordering: multiset does not match the spectrum");
    }
    if (counts.size() != static_cast<size_t>(spec.p()))
        throw config_error("ordering: contains values outside the spectrum");
}

} // namespace

EnsembleConfig EnsembleConfig::validated(Potential pot, SourceSpectrum spec,
                                         std::optional<Ordering> ord) {
    Ordering o = ord ? std::move(*ord) : default_ordering(spec);
    check_ordering(spec, o);
    return EnsembleConfig(std::move(pot), std::move(spec), std::move(o), 1e12);
}

MultiIndex EnsembleConfig::prefix_counts(int k) const {
    return extsrc::prefix_counts(spec_, ord_, k);
}

MultiIndex EnsembleConfig::extended_prefix_counts(int k) const {
    if (k <= n()) return prefix_counts(k);
    if (p() != 2 || k > n() + 2)
        throw config_error("extended_prefix_counts: k = " + std::to_string(k) +
                           " requires exactly two distinct eigenvalues and "
                           "k <= n+2");
    MultiIndex idx = prefix_counts(n());
    ++idx.k[0];                 // alpha_{n+1} = a_1
    if (k == n() + 2) ++idx.k[1]; // alpha_{n+2} = a_2
    return idx;
}

EnsembleConfig EnsembleConfig::from_json(const nlohmann::json& doc) {
    if (!doc.is_object())
        throw config_error("config: top-level JSON must be an object");
    if (!doc.contains("potential"))
        throw config_error("config: missing \"potential\"");
    if (!doc.contains("spectrum"))
        throw config_error("config: missing \"spectrum\"");

    std::vector<double> coeffs;
    for (const auto& c : doc.at("potential")) coeffs.push_back(c.get<double>());
    Potential pot = Potential::validated(std::move(coeffs));

    std::vector<SourceSpectrum::Entry> entries;
    for (const auto& pair : doc.at("spectrum")) {
        if (!pair.is_array() || pair.size() != 2)
            throw config_error("config: spectrum entries must be [a, n] pairs");
        entries.push_back({pair[0].get<double>(), pair[1].get<int>()});
    }
    SourceSpectrum spec = SourceSpectrum::validated(std::move(entries));

    std::optional<Ordering> ord;
    if (doc.contains("ordering") && !doc.at("ordering").is_null()) {
        Ordering o;
        for (const auto& a : doc.at("ordering")) o.alpha.push_back(a.get<double>());
        ord = std::move(o);
    }

    EnsembleConfig cfg = validated(std::move(pot), std::move(spec), std::move(ord));
    if (doc.contains("cond_limit")) {
        cfg.cond_limit_ = doc.at("cond_limit").get<double>();
        if (!(cfg.cond_limit_ > 1.0))
            throw config_error("config: cond_limit must exceed 1");
    }
    return cfg;
}

EnsembleConfig EnsembleConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    try {
        return from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        // nlohmann reports a byte offset; convert to line/column.
        size_t line = 1, col = 1;
        for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') { ++line; col = 1; } else ++col;
        }
        std::ostringstream msg;
        msg << path << ":" << line << ":" << col << ": " << e.what();
        throw config_error(msg.str());
    }
}

nlohmann::json EnsembleConfig::to_json() const {
    nlohmann::json doc;
    doc["potential"] = pot_.coeffs();
    auto spectrum = nlohmann::json::array();
    for (const auto& e : spec_.entries)
        spectrum.push_back({e.a, e.multiplicity});
    doc["spectrum"] = spectrum;
    doc["ordering"] = ord_.alpha;
    doc["cond_limit"] = cond_limit_;
    return doc;
}

} // namespace extsrc
