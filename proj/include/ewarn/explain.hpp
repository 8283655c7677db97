#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "ewarn/errors.hpp"
#include "ewarn/grading.hpp"
#include "ewarn/linalg.hpp"
#include "ewarn/mlp.hpp"
#include "ewarn/random.hpp"

namespace ewarn {

/// Analytic gradient of the scalar network output at x: for each input j,
/// sum_h w_out[0,h] * (1 - tanh^2(z_h)) * w_hidden[h,j].
inline std::vector<double> sensitivity(const MlpModel& m, std::span<const double> x) {
    detail::check_input_size(m, x.size());
    std::vector<double> hidden;
    detail::forward_with_hidden(m, x, hidden);
    std::vector<double> grad(m.n_in, 0.0);
    for (std::size_t h = 0; h < m.n_hidden; ++h) {
        const double up = m.w_out(0, h) * (1.0 - hidden[h] * hidden[h]);
        for (std::size_t j = 0; j < m.n_in; ++j) grad[j] += up * m.w_hidden(h, j);
    }
    return grad;
}

enum class ImportanceMetric { AccuracyDrop, MseIncrease };

/// Permutation importance: per feature, the mean performance loss over
/// seeded shuffles of that feature's column. AccuracyDrop scores level
/// agreement; MseIncrease scores squared error against the level codes.
inline std::vector<double> permutation_importance(const MlpModel& m, const linalg::Matrix& x,
                                                  const std::vector<WarningLevel>& labels, std::uint64_t seed,
                                                  std::size_t repeats = 10,
                                                  ImportanceMetric metric = ImportanceMetric::AccuracyDrop) {
    if (x.rows < 2) throw InvalidInput("permutation_importance: need at least 2 samples");
    if (x.rows != labels.size()) throw InvalidInput("permutation_importance: sample and label counts disagree");
    if (repeats == 0) throw InvalidInput("permutation_importance: repeats must be positive");
    if (x.cols != m.n_in) throw InvalidInput("permutation_importance: data does not match model shape");

    auto score = [&](const linalg::Matrix& data) {
        if (metric == ImportanceMetric::AccuracyDrop) return evaluate(m, data, labels);
        double s = 0.0;
        for (std::size_t i = 0; i < data.rows; ++i) {
            const double d = forward(m, data.row(i))[0] - static_cast<double>(level_code(labels[i]));
            s += d * d;
        }
        return -s / static_cast<double>(data.rows); // higher is better
    };

    const double baseline = score(x);
    std::vector<double> importance(x.cols, 0.0);
    linalg::Matrix shuffled = x;
    std::vector<std::size_t> order(x.rows);
    for (std::size_t f = 0; f < x.cols; ++f) {
        double total = 0.0;
        for (std::size_t r = 0; r < repeats; ++r) {
            Rng rng(mix_seed(seed, f * repeats + r));
            std::iota(order.begin(), order.end(), std::size_t{0});
            rng.shuffle(order);
            for (std::size_t i = 0; i < x.rows; ++i) shuffled(i, f) = x(order[i], f);
            total += baseline - score(shuffled);
        }
        for (std::size_t i = 0; i < x.rows; ++i) shuffled(i, f) = x(i, f);
        importance[f] = total / static_cast<double>(repeats);
    }
    return importance;
}

/// Weighted local linear surrogate around one instance.
struct LimeResult {
    std::vector<double> coefficients;
    double intercept = 0.0;
    double fit_quality = 0.0; // weighted R^2
};

/// Draws Gaussian perturbations around x (per-coordinate scale =
/// kernel_width), weights each by exp(-d^2 / kernel_width^2), and fits a
/// weighted least-squares line to the model outputs.
inline LimeResult lime_explain(const MlpModel& m, std::span<const double> x, std::size_t n_samples = 1000,
                               double kernel_width = 0.75, std::uint64_t seed = 0) {
    detail::check_input_size(m, x.size());
    if (n_samples < m.n_in + 2) throw InvalidInput("lime_explain: n_samples must be at least n_in + 2");
    if (!(kernel_width > 0.0)) throw InvalidInput("lime_explain: kernel_width must be positive");

    const std::size_t p = m.n_in;
    Rng rng(seed);
    linalg::Matrix design(n_samples, p + 1, 0.0);
    std::vector<double> outputs(n_samples);
    std::vector<double> weights(n_samples);
    std::vector<double> point(p);
    for (std::size_t s = 0; s < n_samples; ++s) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double offset = kernel_width * rng.normal();
            point[j] = x[j] + offset;
            d2 += offset * offset;
        }
        design(s, 0) = 1.0;
        for (std::size_t j = 0; j < p; ++j) design(s, j + 1) = point[j];
        outputs[s] = forward(m, point)[0];
        weights[s] = std::exp(-d2 / (kernel_width * kernel_width));
    }

    std::vector<double> beta;
    try {
        beta = linalg::weighted_least_squares(design, outputs, weights);
    } catch (const NumericError&) {
        throw NumericError("lime_explain: rank-deficient weighted design; increase n_samples");
    }

    LimeResult res;
    res.intercept = beta[0];
    res.coefficients.assign(beta.begin() + 1, beta.end());

    double wsum = 0.0, wy = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        wsum += weights[s];
        wy += weights[s] * outputs[s];
    }
    const double ymean = wy / wsum;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        double fit = beta[0];
        for (std::size_t j = 0; j < p; ++j) fit += beta[j + 1] * design(s, j + 1);
        ss_res += weights[s] * (outputs[s] - fit) * (outputs[s] - fit);
        ss_tot += weights[s] * (outputs[s] - ymean) * (outputs[s] - ymean);
    }
    res.fit_quality = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return res;
}

/// Bundled interpretation of one model around one instance.
struct Explanation {
    std::vector<double> sensitivity;
    std::vector<double> importance;
    std::vector<double> local_coefficients;
    double local_intercept = 0.0;
    double fit_quality = 0.0;
};

struct ExplainParams {
    std::size_t repeats = 10;
    ImportanceMetric metric = ImportanceMetric::AccuracyDrop;
    std::size_t lime_samples = 1000;
    double lime_kernel_width = 0.75;
    std::uint64_t seed = 0;
};

inline Explanation explain_model(const MlpModel& m, const linalg::Matrix& x,
                                 const std::vector<WarningLevel>& labels, std::span<const double> at,
                                 const ExplainParams& params = {}) {
    Explanation e;
    e.sensitivity = sensitivity(m, at);
    e.importance = permutation_importance(m, x, labels, params.seed, params.repeats, params.metric);
    LimeResult lime = lime_explain(m, at, params.lime_samples, params.lime_kernel_width, params.seed);
    e.local_coefficients = std::move(lime.coefficients);
    e.local_intercept = lime.intercept;
    e.fit_quality = lime.fit_quality;
    return e;
}

} // namespace ewarn
