#pragma once

#include <string>
#include <vector>

#include "model_space.hpp"

namespace lossprior {

enum class PriorKind { kUniform, kScottBerger, kLoss };

const char* prior_kind_name(PriorKind kind);
PriorKind prior_kind_from_name(const std::string& name); // "uniform" | "sb" | "loss"

// One of the three objective model priors over the 2^d space. `c` is the
// parsimony constant of the loss prior (ignored by the other two kinds).
struct PriorSpec {
    PriorKind kind = PriorKind::kLoss;
    double c = 1.0;

    void validate() const;
    std::string label() const; // "uniform", "scott-berger", "loss(c=1)"
};

// log C(d, k); exact (Pascal's triangle in doubles) for d <= 56.
double log_binomial(int d, int k);

// Normalized log prior mass of one model. Closed-form normalizers throughout:
//   uniform        -d log 2
//   scott-berger   -log(d+1) - log C(d,|g|)
//   loss           -c|g| - d log(1 + e^-c)
double log_prior(const PriorSpec& spec, const Gamma& gamma);

// Distribution of the model size k = 0..d induced by the prior.
std::vector<double> size_prior(const PriorSpec& spec, int d);

// Marginal prior probability that any given covariate is included.
double prior_inclusion(const PriorSpec& spec);

// Per-model log prior mass for one representative model of each size
// k = 0..d (prior mass depends on the model only through its size).
std::vector<double> prior_curve(const PriorSpec& spec, int d);

} // namespace lossprior
