#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "model_space.hpp"

namespace lossprior {

// Hyperparameters of the robust parameter prior, bound to one sample size.
// The mixing density is pi(g) = a [rho(b+n)]^a (g+b)^-(a+1) on g > rho(b+n)-b.
struct RobustHyper {
    double a = 0.5;
    double b = 1.0;
    double rho = 0.0;
    int n = 0;

    double support_lower() const { return rho * (b + n) - b; } // L
    void validate() const;
};

// Hyperparameter policy: rho either fixed, or resolved per model as
// 1/(|gamma|+1) (the recommended size-dependent choice; `rho = nullopt`).
struct HyperSpec {
    double a = 0.5;
    double b = 1.0;
    std::optional<double> rho; // nullopt => rho_gamma = 1/(|gamma|+1)

    void validate() const;
    RobustHyper resolve(int n, int k) const;
};

struct QuadratureConfig {
    int nodes = 201;     // Gauss-Legendre nodes per panel
    bool refine = true;  // panel-halving refinement until successive
                         // estimates agree to rtol (at most 12 halvings)
    double rtol = 1e-10;

    void validate() const;
};

// log pi(g); -inf below the support lower bound (positive at the bound itself).
double g_log_density(double g, const RobustHyper& h);

// Inverse-CDF transform: u in (0,1) -> g = rho(b+n) u^(-1/a) - b.
// F(sample_g(u)) = 1 - u; u -> 1 gives the support lower bound.
double sample_g(double u, const RobustHyper& h);

// log Bayes factor of the model described by `s` against the null model,
// conditional on g:  ((n-1-k)/2) log(1+g) - ((n-1)/2) log(1 + g(1-R^2)).
double conditional_log_bf(const SufficientStats& s, double g);

// Marginal log Bayes factor under the robust prior: conditional_log_bf
// integrated over pi(g). Change of variables t = rho(b+n)/(g+b) maps the
// integral to (0,1] with the prior mass absorbed (d measure = a t^(a-1) dt);
// t = s^(1/a) then flattens the endpoint, leaving a plain integral over
// s in (0,1) evaluated by Gauss-Legendre with log-domain accumulation.
double robust_log_bf(const SufficientStats& s, const RobustHyper& h,
                     const QuadratureConfig& q);

// Gauss-Legendre rule mapped to (0,1); cached per node count.
struct GaussLegendre {
    std::vector<double> x;
    std::vector<double> w;
    static const GaussLegendre& unit(int nodes);
};

// Node tables for scoring many models with one (n, hyper, quadrature): the
// transformed nodes depend on the model only through its size, so everything
// except the final log1p per node is shared. Thread safe.
class BfEvaluator {
public:
    BfEvaluator(int n, int d, const HyperSpec& hyper, const QuadratureConfig& q);
    ~BfEvaluator();

    struct Workspace {
        std::vector<double> vals;
    };

    double log_bf(const SufficientStats& s, Workspace& ws) const;
    double log_bf(const SufficientStats& s) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace lossprior
