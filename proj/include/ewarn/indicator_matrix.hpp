#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ewarn/errors.hpp"
#include "ewarn/linalg.hpp"
#include "ewarn/random.hpp"

namespace ewarn {

/// Time-slices x indicators matrix with labels; the currency every stage
/// of the pipeline trades in. Rows are slices, columns are indicators.
struct IndicatorMatrix {
    std::vector<std::string> slice_labels;
    std::vector<std::string> indicator_ids;
    linalg::Matrix values;
    bool standardized = false;

    std::size_t n_slices() const { return values.rows; }
    std::size_t n_indicators() const { return values.cols; }

    double at(std::size_t slice, std::size_t indicator) const { return values(slice, indicator); }

    std::vector<double> column(std::size_t j) const { return values.column(j); }

    /// Index of an indicator id, or npos.
    std::size_t find_indicator(std::string_view id) const {
        for (std::size_t j = 0; j < indicator_ids.size(); ++j)
            if (indicator_ids[j] == id) return j;
        return static_cast<std::size_t>(-1);
    }

    /// Copy restricted to the given indicator ids (existing column order kept).
    IndicatorMatrix select_indicators(const std::vector<std::string>& ids) const {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < indicator_ids.size(); ++j)
            for (const auto& id : ids)
                if (indicator_ids[j] == id) {
                    idx.push_back(j);
                    break;
                }
        IndicatorMatrix out;
        out.slice_labels = slice_labels;
        out.standardized = standardized;
        out.values = linalg::Matrix(n_slices(), idx.size());
        out.indicator_ids.reserve(idx.size());
        for (std::size_t j : idx) out.indicator_ids.push_back(indicator_ids[j]);
        for (std::size_t i = 0; i < n_slices(); ++i)
            for (std::size_t jj = 0; jj < idx.size(); ++jj) out.values(i, jj) = values(i, idx[jj]);
        return out;
    }
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

inline bool parse_double(std::string_view s, double& out) {
    // Tolerate surrounding spaces, reject anything else trailing.
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    std::array<char, 32> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

} // namespace detail

/// Parses the matrix CSV format: header `label,<id1>,<id2>,...`, one row
/// per time slice, decimal-point reals. `source` names the input in errors.
inline IndicatorMatrix parse_matrix_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        lines.push_back(line);
    }
    if (lines.empty()) throw ParseError(source + ": empty file");

    IndicatorMatrix m;
    const auto header = detail::split_csv_line(lines.front());
    if (header.size() < 2) throw ParseError(source + ": header must name at least one indicator");
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty()) throw ParseError(source + ": empty indicator id in header");
        m.indicator_ids.emplace_back(header[j]);
    }

    const std::size_t n_cols = m.indicator_ids.size();
    const std::size_t n_rows = lines.size() - 1;
    m.values = linalg::Matrix(n_rows, n_cols);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const auto fields = detail::split_csv_line(lines[r + 1]);
        if (fields.size() != n_cols + 1) {
            throw ParseError(source + ": row " + std::to_string(r + 2) + " has " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(n_cols + 1));
        }
        m.slice_labels.emplace_back(fields[0]);
        for (std::size_t j = 0; j < n_cols; ++j) {
            double v;
            if (!detail::parse_double(fields[j + 1], v)) {
                throw ParseError(source + ": row " + std::to_string(r + 2) + ", indicator " + m.indicator_ids[j] +
                                 ": cannot parse \"" + std::string(fields[j + 1]) + "\" as a finite real");
            }
            m.values(r, j) = v;
        }
    }
    return m;
}

inline IndicatorMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    return parse_matrix_csv(in, path);
}

inline std::string matrix_to_csv(const IndicatorMatrix& m) {
    std::string out = "label";
    for (const auto& id : m.indicator_ids) {
        out += ',';
        out += id;
    }
    out += '\n';
    for (std::size_t i = 0; i < m.n_slices(); ++i) {
        out += m.slice_labels[i];
        for (std::size_t j = 0; j < m.n_indicators(); ++j) {
            out += ',';
            out += detail::format_double(m.values(i, j));
        }
        out += '\n';
    }
    return out;
}

inline void save_matrix(const IndicatorMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    out << matrix_to_csv(m);
}

inline std::vector<double> column_means(const IndicatorMatrix& m) {
    std::vector<double> means(m.n_indicators(), 0.0);
    for (std::size_t j = 0; j < m.n_indicators(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.n_slices(); ++i) s += m.values(i, j);
        means[j] = s / static_cast<double>(m.n_slices());
    }
    return means;
}

/// Per-column sample standard deviation (divisor n-1).
inline std::vector<double> column_sample_sds(const IndicatorMatrix& m) {
    if (m.n_slices() < 2) throw InvalidInput("column_sample_sds: need at least 2 rows");
    const auto means = column_means(m);
    std::vector<double> sds(m.n_indicators(), 0.0);
    for (std::size_t j = 0; j < m.n_indicators(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.n_slices(); ++i) {
            const double d = m.values(i, j) - means[j];
            s += d * d;
        }
        sds[j] = std::sqrt(s / static_cast<double>(m.n_slices() - 1));
    }
    return sds;
}

struct StandardizeResult {
    IndicatorMatrix matrix;
    /// Ids of constant columns that were mapped to all-zero (reported, not fatal).
    std::vector<std::string> constant_columns;
};

/// Per-column z-score with sample (n-1) standard deviation. Constant
/// columns standardize to zero and are reported in the result.
inline StandardizeResult standardize(const IndicatorMatrix& m) {
    if (m.standardized) throw InvalidInput("standardize: matrix is already standardized");
    if (m.n_slices() < 2) throw InvalidInput("standardize: need at least 2 rows");

    StandardizeResult res;
    res.matrix = m;
    res.matrix.standardized = true;
    const auto means = column_means(m);
    for (std::size_t j = 0; j < m.n_indicators(); ++j) {
        double lo = m.values(0, j), hi = m.values(0, j), ss = 0.0;
        for (std::size_t i = 0; i < m.n_slices(); ++i) {
            const double v = m.values(i, j);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            const double d = v - means[j];
            ss += d * d;
        }
        if (lo == hi) {
            for (std::size_t i = 0; i < m.n_slices(); ++i) res.matrix.values(i, j) = 0.0;
            res.constant_columns.push_back(m.indicator_ids[j]);
            continue;
        }
        const double sd = std::sqrt(ss / static_cast<double>(m.n_slices() - 1));
        for (std::size_t i = 0; i < m.n_slices(); ++i)
            res.matrix.values(i, j) = (m.values(i, j) - means[j]) / sd;
    }
    return res;
}

/// The ten indicator ids of the screened case-study system.
inline const std::vector<std::string>& case_study_indicator_ids() {
    static const std::vector<std::string> ids = {"C1", "C3", "C5", "C6", "C7", "C10", "C13", "C16", "C18", "C23"};
    return ids;
}

/// Config for the seeded synthetic event generator.
struct SynthEventConfig {
    std::size_t n_slices = 36;
    std::size_t event_day = 3;   // slice index of the spike
    double decay = 0.45;         // per-day exponential decay rate, > 0
    double noise_scale = 1.5;
    double spike_scale = 6.0;
    std::uint64_t seed = 1;
};

namespace detail {

/// Calendar labels in "M.D" form starting 3.18, daily steps (non-leap year).
inline std::vector<std::string> calendar_labels(std::size_t n) {
    static constexpr std::array<int, 13> days_in_month = {0, 31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    std::vector<std::string> labels;
    labels.reserve(n);
    int month = 3, day = 18;
    for (std::size_t i = 0; i < n; ++i) {
        labels.push_back(std::to_string(month) + "." + std::to_string(day));
        if (++day > days_in_month[static_cast<std::size_t>(month)]) {
            day = 1;
            if (++month > 12) month = 1;
        }
    }
    return labels;
}

} // namespace detail

/// Deterministic synthetic opinion event: ten columns (the case-study
/// indicator set), each a spike at event_day with exponential decay over a
/// group-correlated noise floor. Bit-identical output for a fixed config.
inline IndicatorMatrix synth_event(const SynthEventConfig& cfg) {
    if (cfg.n_slices == 0) throw InvalidInput("synth_event: n_slices must be positive");
    if (cfg.event_day >= cfg.n_slices) throw InvalidInput("synth_event: event_day must lie in [0, n_slices)");
    if (!(cfg.decay > 0.0)) throw InvalidInput("synth_event: decay must be positive");
    if (cfg.noise_scale < 0.0) throw InvalidInput("synth_event: noise_scale must be non-negative");

    const auto& ids = case_study_indicator_ids();
    const std::size_t n_cols = ids.size();
    // Primary-indicator grouping of the screened set; columns in a group
    // share a latent noise term so group structure survives screening.
    static constexpr std::array<std::size_t, 10> group_of = {0, 0, 0, 0, 1, 1, 1, 2, 2, 3};
    constexpr double shared_w = 0.67082039324993690; // sqrt(0.45)
    constexpr double own_w = 0.74161984870956630;    // sqrt(0.55)

    IndicatorMatrix m;
    m.indicator_ids = ids;
    m.slice_labels = detail::calendar_labels(cfg.n_slices);
    m.values = linalg::Matrix(cfg.n_slices, n_cols);

    Rng rng(cfg.seed);
    std::vector<double> amp(n_cols);
    for (auto& a : amp) a = rng.uniform(0.8, 1.2);

    for (std::size_t t = 0; t < cfg.n_slices; ++t) {
        std::array<double, 4> latent{};
        for (auto& g : latent) g = rng.normal();
        const double pulse =
            t >= cfg.event_day ? std::exp(-cfg.decay * static_cast<double>(t - cfg.event_day)) : 0.0;
        for (std::size_t j = 0; j < n_cols; ++j) {
            const double noise = shared_w * latent[group_of[j]] + own_w * rng.normal();
            m.values(t, j) = amp[j] * cfg.spike_scale * pulse + cfg.noise_scale * noise;
        }
    }
    return m;
}

} // namespace ewarn
