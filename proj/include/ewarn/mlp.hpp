#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ewarn/errors.hpp"
#include "ewarn/grading.hpp"
#include "ewarn/linalg.hpp"
#include "ewarn/random.hpp"

namespace ewarn {

/// Single-hidden-layer feedforward network: tanh hidden units, identity
/// output units (the "tansig"/"purelin" pair).
struct MlpModel {
    std::size_t n_in = 0;
    std::size_t n_hidden = 0;
    std::size_t n_out = 0;
    linalg::Matrix w_hidden;      // n_hidden x n_in
    std::vector<double> b_hidden; // n_hidden
    linalg::Matrix w_out;         // n_out x n_hidden
    std::vector<double> b_out;    // n_out

    std::size_t parameter_count() const { return n_hidden * n_in + n_hidden + n_out * n_hidden + n_out; }
};

struct HiddenCandidates {
    std::vector<int> candidates;
    int default_choice = 0;
};

/// Hidden-size rule sqrt(m+n)+a with a in 1..10: the candidate node counts
/// are the integers reachable by that formula. The case-study default 6 is
/// used whenever it falls inside the range, else the nearest endpoint.
inline HiddenCandidates hidden_candidates(int n_inputs, int n_outputs) {
    if (n_inputs < 1 || n_outputs < 1) throw InvalidInput("hidden_candidates: node counts must be positive");
    const double base = std::sqrt(static_cast<double>(n_inputs + n_outputs));
    const int lo = static_cast<int>(std::ceil(base + 1.0));
    const int hi = static_cast<int>(std::floor(base + 10.0));
    HiddenCandidates out;
    for (int v = lo; v <= hi; ++v) out.candidates.push_back(v);
    out.default_choice = std::clamp(6, lo, hi);
    return out;
}

/// Weights and biases drawn uniformly from [-0.5, 0.5], seeded.
inline MlpModel init_network(std::size_t n_in, std::size_t n_hidden, std::size_t n_out, std::uint64_t seed) {
    if (n_in == 0 || n_hidden == 0 || n_out == 0) throw InvalidInput("init_network: dimensions must be positive");
    MlpModel m;
    m.n_in = n_in;
    m.n_hidden = n_hidden;
    m.n_out = n_out;
    m.w_hidden = linalg::Matrix(n_hidden, n_in);
    m.b_hidden.resize(n_hidden);
    m.w_out = linalg::Matrix(n_out, n_hidden);
    m.b_out.resize(n_out);
    Rng rng(seed);
    for (auto& w : m.w_hidden.data) w = rng.uniform(-0.5, 0.5);
    for (auto& b : m.b_hidden) b = rng.uniform(-0.5, 0.5);
    for (auto& w : m.w_out.data) w = rng.uniform(-0.5, 0.5);
    for (auto& b : m.b_out) b = rng.uniform(-0.5, 0.5);
    return m;
}

namespace detail {

inline void check_input_size(const MlpModel& m, std::size_t n) {
    if (n != m.n_in) throw InvalidInput("forward: input has " + std::to_string(n) + " components, model expects " +
                                        std::to_string(m.n_in));
}

/// Forward pass that also exposes the hidden activations.
inline std::vector<double> forward_with_hidden(const MlpModel& m, std::span<const double> x,
                                               std::vector<double>& hidden) {
    hidden.resize(m.n_hidden);
    for (std::size_t h = 0; h < m.n_hidden; ++h) {
        double z = m.b_hidden[h];
        for (std::size_t j = 0; j < m.n_in; ++j) z += m.w_hidden(h, j) * x[j];
        hidden[h] = std::tanh(z);
    }
    std::vector<double> y(m.n_out);
    for (std::size_t o = 0; o < m.n_out; ++o) {
        double v = m.b_out[o];
        for (std::size_t h = 0; h < m.n_hidden; ++h) v += m.w_out(o, h) * hidden[h];
        y[o] = v;
    }
    return y;
}

} // namespace detail

/// y = w_out * tanh(w_hidden * x + b_hidden) + b_out.
inline std::vector<double> forward(const MlpModel& m, std::span<const double> x) {
    detail::check_input_size(m, x.size());
    std::vector<double> hidden;
    return detail::forward_with_hidden(m, x, hidden);
}

/// Levenberg-Marquardt knobs. mu is the damping factor; the learning-rate
/// slot of the reference parameter table seeds it.
struct TrainParams {
    double goal_mse = 1e-5;
    std::size_t max_epochs = 1000;
    double mu_init = 0.01;
    double mu_inc = 10.0;
    double mu_dec = 0.1;
    double mu_max = 1e10;
    std::uint64_t seed = 0; // weight-init seed, recorded with the run
};

enum class StopReason { Goal, MaxEpochs, MuOverflow };

inline std::string_view stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::Goal: return "goal";
        case StopReason::MaxEpochs: return "max_epochs";
        case StopReason::MuOverflow: return "mu_overflow";
    }
    return "invalid";
}

/// Epoch-by-epoch record of a training run. mse[e] is the error after
/// epoch e (entry 0 is the initial model), and is non-increasing.
struct TrainingTrace {
    std::vector<double> mse;
    std::size_t final_epoch = 0;
    double final_gradient_norm = 0.0;
    StopReason stop_reason = StopReason::Goal;
};

/// Thrown when the damped normal equations stay singular all the way to
/// the mu cap; carries the partial trace.
class TrainingError : public Error {
public:
    TrainingError(const std::string& what, TrainingTrace trace) : Error(what), trace(std::move(trace)) {}
    TrainingTrace trace;
};

struct TrainResult {
    MlpModel model;
    TrainingTrace trace;
};

namespace detail {

struct PackedModel {
    // Parameter order: w_hidden row-major, b_hidden, w_out row-major, b_out.
    static std::vector<double> pack(const MlpModel& m) {
        std::vector<double> p;
        p.reserve(m.parameter_count());
        p.insert(p.end(), m.w_hidden.data.begin(), m.w_hidden.data.end());
        p.insert(p.end(), m.b_hidden.begin(), m.b_hidden.end());
        p.insert(p.end(), m.w_out.data.begin(), m.w_out.data.end());
        p.insert(p.end(), m.b_out.begin(), m.b_out.end());
        return p;
    }

    static void unpack(std::span<const double> p, MlpModel& m) {
        std::size_t at = 0;
        std::copy_n(p.begin(), m.w_hidden.data.size(), m.w_hidden.data.begin());
        at += m.w_hidden.data.size();
        std::copy_n(p.begin() + at, m.b_hidden.size(), m.b_hidden.begin());
        at += m.b_hidden.size();
        std::copy_n(p.begin() + at, m.w_out.data.size(), m.w_out.data.begin());
        at += m.w_out.data.size();
        std::copy_n(p.begin() + at, m.b_out.size(), m.b_out.begin());
    }
};

/// Residuals y(x_s) - t_s flattened sample-major.
inline std::vector<double> residuals(const MlpModel& m, const linalg::Matrix& x, const linalg::Matrix& y) {
    std::vector<double> e(x.rows * m.n_out);
    std::vector<double> hidden;
    for (std::size_t s = 0; s < x.rows; ++s) {
        const auto out = forward_with_hidden(m, x.row(s), hidden);
        for (std::size_t o = 0; o < m.n_out; ++o) e[s * m.n_out + o] = out[o] - y(s, o);
    }
    return e;
}

inline double mse_of(std::span<const double> e) {
    double s = 0.0;
    for (double v : e) s += v * v;
    return s / static_cast<double>(e.size());
}

/// Residual Jacobian, one row per (sample, output), assembled by
/// reverse-mode differentiation of each sample's forward pass.
inline linalg::Matrix residual_jacobian(const MlpModel& m, const linalg::Matrix& x) {
    const std::size_t n_params = m.parameter_count();
    const std::size_t wh = m.n_hidden * m.n_in;
    const std::size_t bh = wh + m.n_hidden;
    const std::size_t wo = bh + m.n_out * m.n_hidden;
    linalg::Matrix jac(x.rows * m.n_out, n_params, 0.0);
    std::vector<double> hidden;
    for (std::size_t s = 0; s < x.rows; ++s) {
        const auto xs = x.row(s);
        forward_with_hidden(m, xs, hidden);
        for (std::size_t o = 0; o < m.n_out; ++o) {
            auto row = jac.row(s * m.n_out + o);
            for (std::size_t h = 0; h < m.n_hidden; ++h) {
                const double dtanh = 1.0 - hidden[h] * hidden[h];
                const double up = m.w_out(o, h) * dtanh;
                for (std::size_t j = 0; j < m.n_in; ++j) row[h * m.n_in + j] = up * xs[j];
                row[wh + h] = up;
                row[bh + o * m.n_hidden + h] = hidden[h];
            }
            row[wo + o] = 1.0;
        }
    }
    return jac;
}

inline double gradient_norm(const linalg::Matrix& jac, std::span<const double> e) {
    // || (2/N) J^T e ||_2, the gradient of the MSE.
    double s = 0.0;
    for (std::size_t p = 0; p < jac.cols; ++p) {
        double g = 0.0;
        for (std::size_t r = 0; r < jac.rows; ++r) g += jac(r, p) * e[r];
        g *= 2.0 / static_cast<double>(e.size());
        s += g * g;
    }
    return std::sqrt(s);
}

} // namespace detail

/// Levenberg-Marquardt on the mean squared error. A candidate step solves
/// (J^T J + mu I) d = -J^T e; acceptance requires a strict MSE decrease
/// (mu shrinks), otherwise mu grows and the step is retried within the
/// epoch. Stops on goal_mse, max_epochs, or mu exceeding mu_max.
inline TrainResult train_lm(MlpModel model, const linalg::Matrix& x, const linalg::Matrix& y,
                            const TrainParams& params) {
    if (x.rows == 0) throw InvalidInput("train_lm: need at least one sample");
    if (x.rows != y.rows) throw InvalidInput("train_lm: sample counts of X and Y disagree");
    if (x.cols != model.n_in || y.cols != model.n_out) throw InvalidInput("train_lm: data does not match model shape");
    if (!(params.goal_mse > 0.0) || params.max_epochs == 0 || !(params.mu_init > 0.0) ||
        !(params.mu_inc > 1.0) || !(params.mu_dec > 0.0 && params.mu_dec < 1.0))
        throw InvalidInput("train_lm: invalid training parameters");

    const std::size_t n_params = model.parameter_count();
    std::vector<double> e = detail::residuals(model, x, y);
    double mse = detail::mse_of(e);

    TrainingTrace trace;
    trace.mse.push_back(mse);
    trace.final_epoch = 0;

    auto finish = [&](StopReason reason) {
        trace.stop_reason = reason;
        const linalg::Matrix jac = detail::residual_jacobian(model, x);
        trace.final_gradient_norm = detail::gradient_norm(jac, e);
        return TrainResult{std::move(model), std::move(trace)};
    };

    if (mse <= params.goal_mse) return finish(StopReason::Goal);

    double mu = params.mu_init;
    std::vector<double> params_now = detail::PackedModel::pack(model);
    MlpModel candidate = model;

    for (std::size_t epoch = 1; epoch <= params.max_epochs; ++epoch) {
        const linalg::Matrix jac = detail::residual_jacobian(model, x);
        linalg::Matrix jtj(n_params, n_params, 0.0);
        for (std::size_t r = 0; r < jac.rows; ++r) {
            const auto row = jac.row(r);
            for (std::size_t a = 0; a < n_params; ++a) {
                if (row[a] == 0.0) continue;
                for (std::size_t b = a; b < n_params; ++b) jtj(a, b) += row[a] * row[b];
            }
        }
        for (std::size_t a = 0; a < n_params; ++a)
            for (std::size_t b = 0; b < a; ++b) jtj(a, b) = jtj(b, a);
        std::vector<double> jte(n_params, 0.0);
        for (std::size_t r = 0; r < jac.rows; ++r) {
            const auto row = jac.row(r);
            for (std::size_t a = 0; a < n_params; ++a) jte[a] += row[a] * e[r];
        }

        bool accepted = false;
        while (true) {
            linalg::Matrix damped = jtj;
            for (std::size_t a = 0; a < n_params; ++a) damped(a, a) += mu;
            std::vector<double> neg_jte(n_params);
            for (std::size_t a = 0; a < n_params; ++a) neg_jte[a] = -jte[a];
            std::vector<double> step;
            if (!linalg::solve_spd(std::move(damped), neg_jte, step)) {
                mu *= params.mu_inc;
                if (mu > params.mu_max)
                    throw TrainingError("train_lm: damped normal equations singular at the mu cap", trace);
                continue;
            }
            std::vector<double> trial = params_now;
            for (std::size_t a = 0; a < n_params; ++a) trial[a] += step[a];
            detail::PackedModel::unpack(trial, candidate);
            std::vector<double> e_new = detail::residuals(candidate, x, y);
            const double mse_new = detail::mse_of(e_new);
            if (mse_new < mse) {
                params_now = std::move(trial);
                model = candidate;
                e = std::move(e_new);
                mse = mse_new;
                mu *= params.mu_dec;
                accepted = true;
                break;
            }
            mu *= params.mu_inc;
            if (mu > params.mu_max) break;
        }

        if (!accepted) return finish(StopReason::MuOverflow);
        trace.mse.push_back(mse);
        trace.final_epoch = epoch;
        if (mse <= params.goal_mse) return finish(StopReason::Goal);
    }
    return finish(StopReason::MaxEpochs);
}

/// Rounds the scalar network output to the nearest level code, clamped to
/// the valid 1..3 band.
inline WarningLevel predict_level(const MlpModel& m, std::span<const double> x) {
    const auto y = forward(m, x);
    const long code = std::lround(y[0]);
    return static_cast<WarningLevel>(std::clamp<long>(code, 1, 3));
}

/// Fraction of samples whose predicted level matches the label.
inline double evaluate(const MlpModel& m, const linalg::Matrix& x, const std::vector<WarningLevel>& labels) {
    if (x.rows == 0) throw InvalidInput("evaluate: empty sample set");
    if (x.rows != labels.size()) throw InvalidInput("evaluate: sample and label counts disagree");
    std::size_t hits = 0;
    for (std::size_t s = 0; s < x.rows; ++s)
        if (predict_level(m, x.row(s)) == labels[s]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(x.rows);
}

} // namespace ewarn
