#pragma once

// Shared test fixtures: the published association-degree series, its
// expected level assignment, and a 23-indicator redundancy fixture whose
// sample correlation matrix is constructed exactly (orthonormal sample
// basis x target loading matrix), so every screening decision has a
// closed-form expected value.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "ewarn/grading.hpp"
#include "ewarn/indicator_matrix.hpp"
#include "ewarn/linalg.hpp"
#include "ewarn/random.hpp"

#include "paths.hpp"

namespace testsup {

inline ewarn::IndicatorMatrix table5_series() { return ewarn::load_matrix(data_path("table5_degrees.csv")); }

inline std::vector<double> table5_degrees() { return table5_series().column(0); }

/// Level of every published date under the published ranges
/// [0.00,0.52) / [0.52,0.64) / [0.64,1.00].
inline std::map<std::string, ewarn::WarningLevel> expected_table5_levels() {
    using ewarn::WarningLevel;
    std::map<std::string, WarningLevel> m;
    const ewarn::IndicatorMatrix series = table5_series();
    for (std::size_t i = 0; i < series.n_slices(); ++i) m[series.slice_labels[i]] = WarningLevel::Minor;
    for (const char* d : {"3.21", "3.22", "3.23", "3.24", "3.25", "3.27"}) m[d] = WarningLevel::Severe;
    for (const char* d : {"3.26", "3.28", "3.30", "3.31", "4.11", "4.20"}) m[d] = WarningLevel::Warning;
    return m;
}

/// Columns with mean exactly 0, sample sd exactly 1 and pairwise sample
/// correlation 0 (to rounding): centered seeded normals, orthogonalized by
/// two modified Gram-Schmidt passes, then rescaled.
inline ewarn::linalg::Matrix orthonormal_sample_basis(std::size_t rows, std::size_t dims, std::uint64_t seed) {
    if (dims + 1 > rows) throw std::logic_error("orthonormal_sample_basis: need rows > dims");
    ewarn::Rng rng(seed);
    ewarn::linalg::Matrix z(rows, dims);
    for (auto& v : z.data) v = rng.normal();
    for (std::size_t j = 0; j < dims; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < rows; ++i) mean += z(i, j);
        mean /= static_cast<double>(rows);
        for (std::size_t i = 0; i < rows; ++i) z(i, j) -= mean;
    }
    for (std::size_t j = 0; j < dims; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t prev = 0; prev < j; ++prev) {
                double dot = 0.0, nrm = 0.0;
                for (std::size_t i = 0; i < rows; ++i) {
                    dot += z(i, prev) * z(i, j);
                    nrm += z(i, prev) * z(i, prev);
                }
                const double coef = dot / nrm;
                for (std::size_t i = 0; i < rows; ++i) z(i, j) -= coef * z(i, prev);
            }
        }
        double ss = 0.0;
        for (std::size_t i = 0; i < rows; ++i) ss += z(i, j) * z(i, j);
        const double scale = std::sqrt(static_cast<double>(rows - 1) / ss);
        for (std::size_t i = 0; i < rows; ++i) z(i, j) *= scale;
    }
    return z;
}

/// Two columns with sample correlation exactly r (and mean 0, sd 1).
inline ewarn::IndicatorMatrix exact_correlation_pair(std::size_t rows, double r, std::uint64_t seed) {
    const ewarn::linalg::Matrix z = orthonormal_sample_basis(rows, 2, seed);
    ewarn::IndicatorMatrix m;
    m.indicator_ids = {"a", "b"};
    m.standardized = true;
    m.values = ewarn::linalg::Matrix(rows, 2);
    const double other = std::sqrt(1.0 - r * r);
    for (std::size_t i = 0; i < rows; ++i) {
        m.slice_labels.push_back("t" + std::to_string(i));
        m.values(i, 0) = z(i, 0);
        m.values(i, 1) = r * z(i, 0) + other * z(i, 1);
    }
    return m;
}

/// Construction recipe of the redundancy fixture, shared with the tests
/// that freeze its expected screening outcome.
struct RedundancyDesign {
    // Per indicator: group index, unit-norm loading rows over the basis
    // [u_0..u_22, g_0..g_3] (uniques then group factors).
    std::vector<std::string> ids;
    ewarn::linalg::Matrix loadings; // 23 x 27
    std::vector<double> raw_sds;
    std::vector<double> raw_means;

    static constexpr double core_w_b1 = 0.78;
    static constexpr double core_w_b2 = 0.84;
    static constexpr double core_w_b3 = 0.75;
    static constexpr double core_w_b4 = 0.72;
    static constexpr double dup_r = 0.95;
    // Weak member of B2: correlation to the cores is exactly 0.62-ish
    // (sqrt(core_w_b2 * weak_w) with weak_w = 0.62^2 / 0.84).
    static constexpr double weak_target_r = 0.62;
};

inline RedundancyDesign redundancy_design() {
    RedundancyDesign d;
    d.loadings = ewarn::linalg::Matrix(23, 27, 0.0);
    d.raw_sds.assign(23, 2.0);
    d.raw_means.resize(23);
    for (std::size_t j = 0; j < 23; ++j) {
        d.ids.push_back("C" + std::to_string(j + 1));
        d.raw_means[j] = 10.0 + static_cast<double>(j);
    }

    auto core = [&](std::size_t idx, std::size_t group, double w) {
        d.loadings(idx, 23 + group) = std::sqrt(w);
        d.loadings(idx, idx) = std::sqrt(1.0 - w);
    };
    auto dup = [&](std::size_t idx, std::size_t of) {
        for (std::size_t b = 0; b < 27; ++b) d.loadings(idx, b) = RedundancyDesign::dup_r * d.loadings(of, b);
        d.loadings(idx, idx) = std::sqrt(1.0 - RedundancyDesign::dup_r * RedundancyDesign::dup_r);
        d.raw_sds[idx] = 0.4;
    };

    // B1: cores C1, C3, C5; duplicates C2, C4, C6.
    core(0, 0, RedundancyDesign::core_w_b1);
    dup(1, 0);
    core(2, 0, RedundancyDesign::core_w_b1);
    dup(3, 2);
    core(4, 0, RedundancyDesign::core_w_b1);
    dup(5, 4);
    // B2: cores C7, C9, C10, C13; duplicates C8, C11; weak C12.
    core(6, 1, RedundancyDesign::core_w_b2);
    dup(7, 6);
    core(8, 1, RedundancyDesign::core_w_b2);
    core(9, 1, RedundancyDesign::core_w_b2);
    dup(10, 9);
    const double weak_w =
        RedundancyDesign::weak_target_r * RedundancyDesign::weak_target_r / RedundancyDesign::core_w_b2;
    core(11, 1, weak_w);
    d.raw_sds[11] = 0.5;
    core(12, 1, RedundancyDesign::core_w_b2);
    // B3: cores C14, C16, C18; duplicates C15, C17, C19.
    core(13, 2, RedundancyDesign::core_w_b3);
    dup(14, 13);
    core(15, 2, RedundancyDesign::core_w_b3);
    dup(16, 15);
    core(17, 2, RedundancyDesign::core_w_b3);
    dup(18, 17);
    // B4: cores C20, C22; duplicates C21, C23.
    core(19, 3, RedundancyDesign::core_w_b4);
    dup(20, 19);
    core(21, 3, RedundancyDesign::core_w_b4);
    dup(22, 21);
    return d;
}

/// 36 x 23 raw matrix whose standardized columns reproduce the design's
/// correlation structure exactly (up to floating rounding).
inline ewarn::IndicatorMatrix make_redundancy_fixture(std::uint64_t seed = 7) {
    const RedundancyDesign d = redundancy_design();
    const std::size_t rows = 36;
    const ewarn::linalg::Matrix z = orthonormal_sample_basis(rows, 27, seed);

    ewarn::IndicatorMatrix m;
    m.indicator_ids = d.ids;
    m.slice_labels = ewarn::detail::calendar_labels(rows);
    m.values = ewarn::linalg::Matrix(rows, 23);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < 23; ++j) {
            double v = 0.0;
            for (std::size_t b = 0; b < 27; ++b) v += z(i, b) * d.loadings(j, b);
            m.values(i, j) = d.raw_means[j] + d.raw_sds[j] * v;
        }
    }
    return m;
}

/// Retained set the redundancy fixture must produce.
inline std::vector<std::string> redundancy_expected_retained() {
    return {"C1", "C3", "C5", "C7", "C9", "C10", "C13", "C14", "C16", "C18", "C20", "C22"};
}

/// The pinned synthetic end-to-end fixture configuration (shipped in the
/// repo as data/synth36.csv).
inline ewarn::SynthEventConfig pinned_synth_config() {
    ewarn::SynthEventConfig cfg;
    cfg.n_slices = 36;
    cfg.event_day = 3;
    cfg.decay = 0.45;
    cfg.noise_scale = 1.5;
    cfg.spike_scale = 6.0;
    cfg.seed = 35;
    return cfg;
}

} // namespace testsup
