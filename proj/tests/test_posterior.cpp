#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "core/posterior.hpp"
#include "test_util.hpp"

using namespace lossprior;

namespace {

ModelPosterior hand_posterior(int d, std::vector<double> log_bf,
                              std::vector<std::uint8_t> sizes,
                              std::vector<double> log_pri) {
    ModelPosterior mp;
    mp.d = d;
    mp.size = std::move(sizes);
    mp.log_bf = std::move(log_bf);
    mp.log_prior = std::move(log_pri);
    mp.log_post.resize(mp.log_bf.size());
    double mx = -1e300;
    for (std::size_t i = 0; i < mp.log_bf.size(); ++i)
        mx = std::max(mx, mp.log_bf[i] + mp.log_prior[i]);
    double sum = 0;
    for (std::size_t i = 0; i < mp.log_bf.size(); ++i)
        sum += std::exp(mp.log_bf[i] + mp.log_prior[i] - mx);
    for (std::size_t i = 0; i < mp.log_bf.size(); ++i)
        mp.log_post[i] = mp.log_bf[i] + mp.log_prior[i] - mx - std::log(sum);
    return mp;
}

} // namespace

TEST_CASE("compute_posterior matches a hand-rolled 4-model oracle on d = 2") {
    const int n = 16;
    auto X = testutil::random_matrix(n, 2, 901);
    Eigen::VectorXd y = (1.2 * X.col(0)).eval();
    y += testutil::random_vector(n, 902);

    const PriorSpec prior{PriorKind::kLoss, 1.0};
    const HyperSpec hyper{};
    const auto mp = compute_posterior(X, y, prior, hyper, QuadratureConfig{}, 1);
    REQUIRE(mp.model_count() == 4);

    // oracle: per-model R2 by normal equations, BF by adaptive Simpson,
    // prior by closed form, normalization by direct summation
    double logw[4];
    for (std::uint32_t b = 0; b < 4; ++b) {
        const Gamma g{b, 2};
        const auto st = testutil::normal_equations_fit(X, y, g);
        const double lbf =
            b == 0 ? 0.0
                   : testutil::oracle_robust_log_bf(st, 0.5, 1.0, 1.0 / (g.size() + 1.0));
        logw[b] = lbf + log_prior(prior, g);
    }
    const double mx = *std::max_element(logw, logw + 4);
    double sum = 0;
    for (double v : logw) sum += std::exp(v - mx);
    for (std::uint32_t b = 0; b < 4; ++b) {
        const double oracle_post = logw[b] - mx - std::log(sum);
        CHECK(mp.log_post[b] == doctest::Approx(oracle_post).epsilon(1e-8));
    }
}

TEST_CASE("flat data concentrates on the null model under the loss prior") {
    const int n = 40;
    Eigen::MatrixXd X = testutil::random_matrix(n, 1, 911);
    Eigen::VectorXd y = testutil::random_vector(n, 912); // pure noise
    const auto mp = compute_posterior(X, y, {PriorKind::kLoss, 1.0}, HyperSpec{},
                                      QuadratureConfig{}, 1);
    CHECK(mp.log_post[0] > mp.log_post[1]);
}

TEST_CASE("uniform prior preserves the Bayes-factor ranking") {
    auto X = testutil::random_matrix(24, 5, 921);
    Eigen::VectorXd y = (X.col(1) - 0.5 * X.col(3)).eval();
    y += testutil::random_vector(24, 922);
    const auto mp = compute_posterior(X, y, {PriorKind::kUniform, 0.0}, HyperSpec{},
                                      QuadratureConfig{}, 1);
    std::vector<std::uint64_t> by_post(mp.model_count()), by_bf(mp.model_count());
    for (std::uint64_t i = 0; i < mp.model_count(); ++i) by_post[i] = by_bf[i] = i;
    std::sort(by_post.begin(), by_post.end(),
              [&](auto a, auto b) { return mp.log_post[a] > mp.log_post[b]; });
    std::sort(by_bf.begin(), by_bf.end(),
              [&](auto a, auto b) { return mp.log_bf[a] > mp.log_bf[b]; });
    CHECK(by_post == by_bf);
}

TEST_CASE("posterior is invariant under positive rescaling of X and y") {
    auto X = testutil::random_matrix(20, 4, 931);
    Eigen::VectorXd y = (2.0 * X.col(0) - X.col(2)).eval();
    y += testutil::random_vector(20, 932);
    const PriorSpec prior{PriorKind::kScottBerger, 0.0};
    const auto mp1 = compute_posterior(X, y, prior, HyperSpec{}, QuadratureConfig{}, 1);

    Eigen::MatrixXd Xs = X;
    Xs.col(0) *= 3.0;
    Xs.col(1) *= 0.02;
    Xs.col(3) *= 11.0;
    const Eigen::VectorXd ys = 7.5 * y;
    const auto mp2 = compute_posterior(Xs, ys, prior, HyperSpec{}, QuadratureConfig{}, 1);
    for (std::uint64_t i = 0; i < mp1.model_count(); ++i)
        CHECK(std::abs(std::exp(mp1.log_post[i]) - std::exp(mp2.log_post[i])) < 1e-10);
}

TEST_CASE("loss prior with tiny c reproduces the uniform posterior") {
    auto X = testutil::random_matrix(22, 4, 941);
    Eigen::VectorXd y = X.col(1).eval();
    y += testutil::random_vector(22, 942);
    const auto scores = compute_scores(X, y, HyperSpec{}, QuadratureConfig{}, 1);
    const auto mu = apply_prior(scores, {PriorKind::kUniform, 0.0});
    const auto ml = apply_prior(scores, {PriorKind::kLoss, 1e-8});
    for (std::uint64_t i = 0; i < mu.model_count(); ++i)
        CHECK(std::abs(std::exp(mu.log_post[i]) - std::exp(ml.log_post[i])) < 1e-6);
}

TEST_CASE("posterior normalization and inclusion bounds") {
    auto X = testutil::random_matrix(28, 6, 951);
    Eigen::VectorXd y = (X.col(0) + 0.3 * X.col(5)).eval();
    y += testutil::random_vector(28, 952);
    const auto mp = compute_posterior(X, y, {PriorKind::kLoss, 1.0}, HyperSpec{},
                                      QuadratureConfig{}, 0);
    double total = 0;
    for (std::uint64_t i = 0; i < mp.model_count(); ++i) total += std::exp(mp.log_post[i]);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

    const auto incl = inclusion_probabilities(mp);
    for (double w : incl) {
        CHECK(w >= 0.0);
        CHECK(w <= 1.0);
    }
}

TEST_CASE("inclusion probabilities of a point-mass posterior") {
    // posterior entirely on the full model
    auto mp = hand_posterior(3, {0, 0, 0, 0, 0, 0, 0, 1000.0},
                             {0, 1, 1, 2, 1, 2, 2, 3}, std::vector<double>(8, 0.0));
    const auto incl = inclusion_probabilities(mp);
    for (double w : incl) CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hpm tie-breaking prefers the smaller model, then the lower index") {
    // two models with identical posterior mass but different size
    auto mp = hand_posterior(2, {5.0, 5.0, 5.0, 0.0}, {0, 1, 1, 2},
                             std::vector<double>(4, std::log(0.25)));
    const auto [g, p] = hpm(mp);
    CHECK(g.bits == 0); // sizes tie at mass level: {} wins by size
    // among equal mass and equal size, the lower enumeration index wins
    auto mp2 = hand_posterior(2, {-1.0, 5.0, 5.0, 0.0}, {0, 1, 1, 2},
                              std::vector<double>(4, std::log(0.25)));
    CHECK(hpm(mp2).first.bits == 1);
}

TEST_CASE("mpm includes the boundary") {
    auto mp = hand_posterior(2, {0, 0, 0, 0}, {0, 1, 1, 2},
                             std::vector<double>(4, std::log(0.25)));
    const Gamma m = mpm(mp, {0.5, 0.49999});
    CHECK(m.contains(0));
    CHECK(!m.contains(1));
}

TEST_CASE("size_posterior of a point mass") {
    auto mp = hand_posterior(3, {0, 0, 0, 1000.0, 0, 0, 0, 0}, {0, 1, 1, 2, 1, 2, 2, 3},
                             std::vector<double>(8, 0.0));
    const auto sp = size_posterior(mp);
    CHECK(sp.mean == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sp.sd == doctest::Approx(0.0));
    CHECK(sp.median == 2);
    CHECK(sp.ci_lo == 2);
    CHECK(sp.ci_hi == 2);
}

TEST_CASE("rank_models ordering") {
    auto X = testutil::random_matrix(20, 3, 961);
    Eigen::VectorXd y = X.col(2).eval();
    y += testutil::random_vector(20, 962);
    const auto mp = compute_posterior(X, y, {PriorKind::kUniform, 0.0}, HyperSpec{},
                                      QuadratureConfig{}, 1);
    const auto order = rank_models(mp, 8);
    REQUIRE(order.size() == 8);
    for (std::size_t i = 1; i < order.size(); ++i)
        CHECK(mp.log_post[order[i - 1]] >= mp.log_post[order[i]]);
    CHECK(order[0] == hpm(mp).first.bits);
}

TEST_CASE("compute_posterior is independent of the thread count") {
    auto X = testutil::random_matrix(30, 7, 971);
    Eigen::VectorXd y = (X.col(0) - X.col(4)).eval();
    y += testutil::random_vector(30, 972);
    const PriorSpec prior{PriorKind::kLoss, 1.0};
    const auto a = compute_posterior(X, y, prior, HyperSpec{}, QuadratureConfig{}, 1);
    const auto b = compute_posterior(X, y, prior, HyperSpec{}, QuadratureConfig{}, 5);
    for (std::uint64_t i = 0; i < a.model_count(); ++i)
        CHECK(a.log_post[i] == b.log_post[i]); // bit-identical
}

TEST_CASE("compute_posterior precondition and error tagging") {
    auto X = testutil::random_matrix(6, 5, 981);
    auto y = testutil::random_vector(6, 982);
    CHECK_THROWS_AS(
        compute_posterior(X, y, {PriorKind::kUniform, 0.0}, HyperSpec{}, QuadratureConfig{}, 1),
        ValidationError);

    auto X2 = testutil::random_matrix(20, 3, 983);
    X2.col(1) = X2.col(0);
    auto y2 = testutil::random_vector(20, 984);
    try {
        compute_posterior(X2, y2, {PriorKind::kUniform, 0.0}, HyperSpec{}, QuadratureConfig{}, 1);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("{0,1}") != std::string::npos);
    }
}
