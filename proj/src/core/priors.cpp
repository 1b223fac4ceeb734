#include "priors.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace lossprior {

const char* prior_kind_name(PriorKind kind) {
    switch (kind) {
        case PriorKind::kUniform: return "uniform";
        case PriorKind::kScottBerger: return "scott-berger";
        case PriorKind::kLoss: return "loss";
    }
    return "?";
}

PriorKind prior_kind_from_name(const std::string& name) {
    if (name == "uniform") return PriorKind::kUniform;
    if (name == "sb" || name == "scott-berger") return PriorKind::kScottBerger;
    if (name == "loss") return PriorKind::kLoss;
    throw ValidationError("unknown prior kind '" + name + "' (expected uniform, sb or loss)");
}

void PriorSpec::validate() const {
    if (kind == PriorKind::kLoss && !(c > 0))
        throw ValidationError("loss prior requires c > 0 (use the uniform prior for the c -> 0 limit)");
}

std::string PriorSpec::label() const {
    if (kind != PriorKind::kLoss) return prior_kind_name(kind);
    char buf[48];
    std::snprintf(buf, sizeof buf, "loss(c=%g)", c);
    return buf;
}

namespace {

// Pascal's triangle; every C(d,k) for d <= 56 is below 2^53 and therefore
// exact in a double.
constexpr int kBinomialRows = 57;

const std::array<std::array<double, kBinomialRows>, kBinomialRows>& binomial_table() {
    static const auto table = [] {
        std::array<std::array<double, kBinomialRows>, kBinomialRows> t{};
        for (int d = 0; d < kBinomialRows; ++d) {
            t[d][0] = 1.0;
            for (int k = 1; k <= d; ++k)
                t[d][k] = t[d - 1][k - 1] + (k <= d - 1 ? t[d - 1][k] : 0.0);
        }
        return t;
    }();
    return table;
}

} // namespace

double log_binomial(int d, int k) {
    if (k < 0 || k > d) throw ValidationError("log_binomial: k out of range");
    if (d < kBinomialRows) return std::log(binomial_table()[d][k]);
    return std::lgamma(d + 1.0) - std::lgamma(k + 1.0) - std::lgamma(d - k + 1.0);
}

double log_prior(const PriorSpec& spec, const Gamma& gamma) {
    spec.validate();
    if (gamma.d < 0) throw ValidationError("log_prior: gamma has negative d");
    const int d = gamma.d;
    const int k = gamma.size();
    switch (spec.kind) {
        case PriorKind::kUniform:
            return -d * std::numbers::ln2;
        case PriorKind::kScottBerger:
            return -std::log(d + 1.0) - log_binomial(d, k);
        case PriorKind::kLoss:
            return -spec.c * k - d * std::log1p(std::exp(-spec.c));
    }
    throw ValidationError("log_prior: bad kind");
}

std::vector<double> size_prior(const PriorSpec& spec, int d) {
    spec.validate();
    if (d < 0) throw ValidationError("size_prior: d must be nonnegative");
    std::vector<double> pmf(d + 1);
    switch (spec.kind) {
        case PriorKind::kUniform: {
            // Binomial(d, 1/2)
            const double scale = std::exp2(-static_cast<double>(d));
            for (int k = 0; k <= d; ++k)
                pmf[k] = std::exp(log_binomial(d, k)) * scale;
            break;
        }
        case PriorKind::kScottBerger: {
            const double p = 1.0 / (d + 1.0);
            for (int k = 0; k <= d; ++k) pmf[k] = p;
            break;
        }
        case PriorKind::kLoss: {
            // Binomial(d, omega) with omega = 1/(e^c + 1)
            const double omega = 1.0 / (std::exp(spec.c) + 1.0);
            for (int k = 0; k <= d; ++k)
                pmf[k] = std::exp(log_binomial(d, k)) * std::pow(omega, k) *
                         std::pow(1.0 - omega, d - k);
            break;
        }
    }
    return pmf;
}

double prior_inclusion(const PriorSpec& spec) {
    spec.validate();
    if (spec.kind == PriorKind::kLoss) return 1.0 / (std::exp(spec.c) + 1.0);
    return 0.5;
}

std::vector<double> prior_curve(const PriorSpec& spec, int d) {
    spec.validate();
    if (d < 1) throw ValidationError("prior_curve: d must be at least 1");
    std::vector<double> curve(d + 1);
    for (int k = 0; k <= d; ++k) {
        // any model of size k; mass depends only on the size
        Gamma g{static_cast<std::uint32_t>((std::uint64_t{1} << k) - 1), d};
        curve[k] = log_prior(spec, g);
    }
    return curve;
}

} // namespace lossprior
