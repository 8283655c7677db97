#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "ewarn/explain.hpp"
#include "ewarn/random.hpp"

#include "support/oracles.hpp"

using namespace ewarn;
using Catch::Approx;

namespace {

/// 10-6-1 model operating in the tanh small-signal regime: the map is
/// linear to ~1e-6 and its coefficients are w_out * w_hidden / eps... kept
/// order 1 by scaling the output weights back up.
struct LinearRegime {
    MlpModel model;
    std::vector<double> coefficients; // effective linear map
};

LinearRegime make_linear_regime(std::uint64_t seed, std::size_t n_in = 10, std::size_t n_hidden = 6) {
    constexpr double eps = 1e-3;
    LinearRegime lr;
    lr.model = init_network(n_in, n_hidden, 1, seed);
    for (auto& w : lr.model.w_hidden.data) w *= eps;
    lr.model.b_hidden.assign(n_hidden, 0.0);
    for (auto& w : lr.model.w_out.data) w /= eps;
    lr.model.b_out = {0.5};
    lr.coefficients.assign(n_in, 0.0);
    for (std::size_t j = 0; j < n_in; ++j)
        for (std::size_t h = 0; h < n_hidden; ++h)
            lr.coefficients[j] += lr.model.w_out(0, h) * lr.model.w_hidden(h, j);
    return lr;
}

MlpModel make_constant_model(double c) {
    MlpModel m = init_network(4, 3, 1, 2);
    m.w_hidden = linalg::Matrix(3, 4, 0.0);
    m.b_hidden.assign(3, 0.0);
    m.w_out = linalg::Matrix(1, 3, 0.0);
    m.b_out = {c};
    return m;
}

/// Model with one input column zeroed out everywhere.
MlpModel make_disconnected(std::uint64_t seed, std::size_t dead, std::size_t n_in = 6) {
    MlpModel m = init_network(n_in, 4, 1, seed);
    for (std::size_t h = 0; h < m.n_hidden; ++h) m.w_hidden(h, dead) = 0.0;
    return m;
}

} // namespace

TEST_CASE("sensitivity is the analytic input gradient") {
    SECTION("disconnected input has exactly zero sensitivity") {
        const MlpModel m = make_disconnected(3, 2);
        std::vector<double> x(6, 0.3);
        REQUIRE(sensitivity(m, x)[2] == 0.0);
    }
    SECTION("agrees with central finite differences over 100 random models") {
        Rng rng(21);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n_in = 1 + rng.below(10);
            const std::size_t n_hidden = 1 + rng.below(8);
            const MlpModel m = init_network(n_in, n_hidden, 1, 300 + static_cast<std::uint64_t>(trial));
            std::vector<double> x(n_in);
            for (auto& v : x) v = rng.uniform(-1.5, 1.5);
            const auto grad = sensitivity(m, x);
            for (std::size_t j = 0; j < n_in; ++j) {
                std::vector<double> xp = x, xm = x;
                xp[j] += 1e-5;
                xm[j] -= 1e-5;
                const double fd = (forward(m, xp)[0] - forward(m, xm)[0]) / 2e-5;
                const double denom = std::max({std::abs(fd), std::abs(grad[j]), 1e-6});
                REQUIRE(std::abs(grad[j] - fd) / denom < 1e-4);
            }
        }
    }
    SECTION("small-signal regime: gradient is the composed weight product") {
        const LinearRegime lr = make_linear_regime(5);
        std::vector<double> x(10, 0.1);
        const auto grad = sensitivity(lr.model, x);
        for (std::size_t j = 0; j < 10; ++j) REQUIRE(grad[j] == Approx(lr.coefficients[j]).margin(1e-4));
    }
}

TEST_CASE("permutation_importance") {
    Rng rng(9);
    linalg::Matrix x(12, 6);
    for (auto& v : x.data) v = rng.normal();
    std::vector<WarningLevel> labels;
    for (std::size_t i = 0; i < 12; ++i) labels.push_back(level_from_code(1 + static_cast<int>(i % 3)));

    SECTION("disconnected feature scores exactly zero for every seed") {
        const MlpModel m = make_disconnected(31, 4);
        for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
            const auto imp = permutation_importance(m, x, labels, seed, 5);
            REQUIRE(imp[4] == 0.0);
        }
    }
    SECTION("a copied feature dominates when the output copies it") {
        // Small-signal model rigged so y ~ 2.0 * x0: level flips with x0 only.
        MlpModel m = init_network(2, 2, 1, 3);
        m.w_hidden = linalg::Matrix(2, 2, 0.0);
        m.w_hidden(0, 0) = 1e-3;
        m.b_hidden.assign(2, 0.0);
        m.w_out = linalg::Matrix(1, 2, 0.0);
        m.w_out(0, 0) = 2.0 / 1e-3;
        m.b_out = {0.0};
        linalg::Matrix data(9, 2);
        std::vector<WarningLevel> lv;
        for (std::size_t i = 0; i < 9; ++i) {
            data(i, 0) = 0.5 * (1.0 + static_cast<double>(i % 3)); // 0.5, 1.0, 1.5
            data(i, 1) = rng.normal();
            lv.push_back(level_from_code(1 + static_cast<int>(i % 3)));
        }
        const auto imp = permutation_importance(m, data, lv, 17, 20);
        REQUIRE(imp[0] > imp[1]);
        REQUIRE(imp[0] > 0.1);
        REQUIRE(imp[1] == 0.0); // x1 never reaches the output
    }
    SECTION("seed determinism") {
        const MlpModel m = init_network(6, 4, 1, 12);
        const auto a = permutation_importance(m, x, labels, 5, 7);
        const auto b = permutation_importance(m, x, labels, 5, 7);
        REQUIRE(a == b);
    }
    SECTION("the MSE metric is available") {
        const MlpModel m = make_disconnected(31, 4);
        const auto imp = permutation_importance(m, x, labels, 3, 5, ImportanceMetric::MseIncrease);
        REQUIRE(imp[4] == 0.0);
    }
    SECTION("single sample and zero repeats are rejected") {
        const MlpModel m = init_network(6, 4, 1, 12);
        linalg::Matrix one(1, 6, 0.0);
        REQUIRE_THROWS_AS(permutation_importance(m, one, {WarningLevel::Minor}, 0, 5), InvalidInput);
        REQUIRE_THROWS_AS(permutation_importance(m, x, labels, 0, 0), InvalidInput);
    }
}

TEST_CASE("lime_explain") {
    SECTION("recovers the coefficients of a near-linear model") {
        const LinearRegime lr = make_linear_regime(23);
        std::vector<double> x(10, 0.0);
        const LimeResult res = lime_explain(lr.model, x, 1000, 0.75, 4);
        for (std::size_t j = 0; j < 10; ++j) REQUIRE(res.coefficients[j] == Approx(lr.coefficients[j]).margin(1e-2));
        REQUIRE(res.fit_quality > 0.999);
    }
    SECTION("constant model: zero coefficients and the constant intercept") {
        const MlpModel m = make_constant_model(2.5);
        std::vector<double> x(4, 1.0);
        const LimeResult res = lime_explain(m, x, 500, 0.75, 9);
        for (double c : res.coefficients) REQUIRE(c == Approx(0.0).margin(1e-9));
        REQUIRE(res.intercept == Approx(2.5).margin(1e-9));
    }
    SECTION("seed determinism") {
        const MlpModel m = init_network(5, 4, 1, 31);
        std::vector<double> x(5, 0.2);
        const LimeResult a = lime_explain(m, x, 400, 0.75, 11);
        const LimeResult b = lime_explain(m, x, 400, 0.75, 11);
        REQUIRE(a.coefficients == b.coefficients);
        REQUIRE(a.intercept == b.intercept);
        REQUIRE(a.fit_quality == b.fit_quality);
    }
    SECTION("disconnected feature coefficient shrinks with samples") {
        const MlpModel m = make_disconnected(13, 0);
        std::vector<double> x(6, 0.0);
        const LimeResult res = lime_explain(m, x, 2000, 0.75, 3);
        REQUIRE(std::abs(res.coefficients[0]) < 0.05);
    }
    SECTION("sample and kernel preconditions") {
        const MlpModel m = init_network(5, 4, 1, 31);
        std::vector<double> x(5, 0.0);
        REQUIRE_THROWS_AS(lime_explain(m, x, 6, 0.75, 0), InvalidInput);
        REQUIRE_THROWS_AS(lime_explain(m, x, 100, 0.0, 0), InvalidInput);
    }
}

TEST_CASE("weighted least squares rejects a rank-deficient design") {
    // Two identical columns cannot be separated regardless of weights.
    linalg::Matrix design(6, 2);
    std::vector<double> y(6), w(6, 1.0);
    for (std::size_t i = 0; i < 6; ++i) {
        design(i, 0) = static_cast<double>(i);
        design(i, 1) = static_cast<double>(i);
        y[i] = 2.0 * static_cast<double>(i);
    }
    REQUIRE_THROWS_AS(linalg::weighted_least_squares(design, y, w), NumericError);
}

TEST_CASE("explain_model bundles all three views") {
    Rng rng(55);
    const MlpModel m = init_network(6, 4, 1, 19);
    linalg::Matrix x(10, 6);
    for (auto& v : x.data) v = rng.normal();
    std::vector<WarningLevel> labels(10, WarningLevel::Minor);
    labels[0] = WarningLevel::Severe;
    std::vector<double> at(6, 0.1);

    ExplainParams params;
    params.seed = 8;
    params.lime_samples = 300;
    const Explanation a = explain_model(m, x, labels, at, params);
    REQUIRE(a.sensitivity.size() == 6);
    REQUIRE(a.importance.size() == 6);
    REQUIRE(a.local_coefficients.size() == 6);

    const Explanation b = explain_model(m, x, labels, at, params);
    REQUIRE(a.sensitivity == b.sensitivity);
    REQUIRE(a.importance == b.importance);
    REQUIRE(a.local_coefficients == b.local_coefficients);
    REQUIRE(a.fit_quality == b.fit_quality);
}
