#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ewarn/errors.hpp"
#include "ewarn/indicator_matrix.hpp"
#include "ewarn/linalg.hpp"

namespace ewarn {

/// One primary-indicator group: group id plus member indicator ids.
struct GroupSpec {
    std::string id;
    std::vector<std::string> members;
};

/// The four-group indicator system of the case study (B1 heat, B2
/// intensity, B3 direction, B4 subject over C1..C23).
inline const std::vector<GroupSpec>& default_indicator_groups() {
    static const std::vector<GroupSpec> groups = {
        {"B1", {"C1", "C2", "C3", "C4", "C5", "C6"}},
        {"B2", {"C7", "C8", "C9", "C10", "C11", "C12", "C13"}},
        {"B3", {"C14", "C15", "C16", "C17", "C18", "C19"}},
        {"B4", {"C20", "C21", "C22", "C23"}},
    };
    return groups;
}

/// Pearson correlation coefficient. Throws NumericError for constant input.
inline double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidInput("pearson: sequences must have equal length");
    if (a.size() < 2) throw InvalidInput("pearson: need at least 2 observations");
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) throw NumericError("pearson: correlation undefined for a constant sequence");
    const double r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

/// Full correlation matrix of the indicator columns. Constant columns are
/// reported by id.
inline linalg::Matrix correlation_matrix(const IndicatorMatrix& m) {
    const std::size_t p = m.n_indicators();
    if (p == 0 || m.n_slices() < 2) throw InvalidInput("correlation_matrix: need >= 2 rows and >= 1 column");
    std::vector<std::vector<double>> cols(p);
    for (std::size_t j = 0; j < p; ++j) {
        cols[j] = m.column(j);
        const auto [lo, hi] = std::minmax_element(cols[j].begin(), cols[j].end());
        if (*lo == *hi)
            throw NumericError("correlation undefined: indicator " + m.indicator_ids[j] + " is constant");
    }
    linalg::Matrix r(p, p, 1.0);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a + 1; b < p; ++b) r(a, b) = r(b, a) = pearson(cols[a], cols[b]);
    return r;
}

struct CorrelationDrop {
    std::string kept;
    std::string dropped;
    double r = 0.0;
};

struct CorrelationPruneResult {
    linalg::Matrix correlation;         // over all input indicators
    std::vector<CorrelationDrop> drops; // one entry per dropped indicator
    std::vector<std::string> kept_ids;  // input column order
};

/// Drops, for every pair with |r| >= threshold, the indicator appearing
/// later in column order. A column is only compared against still-kept
/// earlier columns, so the result is deterministic.
inline CorrelationPruneResult prune_correlated(const IndicatorMatrix& m, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw InvalidInput("prune_correlated: threshold must lie in (0, 1]");
    CorrelationPruneResult res;
    res.correlation = correlation_matrix(m);
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < m.n_indicators(); ++j) {
        bool drop = false;
        for (std::size_t i : kept) {
            const double r = res.correlation(i, j);
            if (std::abs(r) >= threshold) {
                res.drops.push_back({m.indicator_ids[i], m.indicator_ids[j], r});
                drop = true;
                break;
            }
        }
        if (!drop) kept.push_back(j);
    }
    res.kept_ids.reserve(kept.size());
    for (std::size_t j : kept) res.kept_ids.push_back(m.indicator_ids[j]);
    return res;
}

/// Principal-component summary of one indicator group.
struct PcaSummary {
    std::string group_id;
    std::vector<std::string> indicator_ids;
    std::vector<double> eigenvalues;    // descending, tiny negatives clamped to 0
    std::vector<double> contributions;  // eigenvalue / trace
    linalg::Matrix loadings;            // indicators x components, eigvec * sqrt(eigval)
};

/// Eigendecomposition of the group's correlation matrix. Components are
/// sign-fixed so the largest-magnitude loading in each is positive.
inline PcaSummary pca_group(const IndicatorMatrix& m, const std::string& group_id,
                            const std::vector<std::string>& group_members) {
    if (group_members.size() < 2)
        throw InvalidInput("pca_group: group " + group_id + " has fewer than 2 indicators");
    if (m.n_slices() < 2) throw InvalidInput("pca_group: need at least 2 rows");
    for (const auto& id : group_members)
        if (m.find_indicator(id) == static_cast<std::size_t>(-1))
            throw InvalidInput("pca_group: indicator " + id + " not present in matrix");

    const IndicatorMatrix sub = m.select_indicators(group_members);
    const linalg::Matrix corr = correlation_matrix(sub);
    linalg::SymmetricEigen eig = linalg::eigen_symmetric(corr);

    const std::size_t p = sub.n_indicators();
    PcaSummary s;
    s.group_id = group_id;
    s.indicator_ids = sub.indicator_ids;
    s.eigenvalues = std::move(eig.values);
    double trace = 0.0;
    for (auto& ev : s.eigenvalues) {
        if (std::abs(ev) < 1e-10) ev = 0.0;
        if (ev < 0.0) ev = 0.0;
        trace += ev;
    }
    s.contributions.resize(p);
    for (std::size_t j = 0; j < p; ++j) s.contributions[j] = s.eigenvalues[j] / trace;

    s.loadings = linalg::Matrix(p, p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        const double scale = std::sqrt(s.eigenvalues[j]);
        std::size_t lead = 0;
        for (std::size_t i = 1; i < p; ++i)
            if (std::abs(eig.vectors(i, j)) > std::abs(eig.vectors(lead, j))) lead = i;
        const double sign = eig.vectors(lead, j) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < p; ++i) s.loadings(i, j) = sign * eig.vectors(i, j) * scale;
    }
    return s;
}

struct LoadingVerdicts {
    std::size_t components_retained = 0;
    std::vector<bool> retained; // per indicator of the group
};

/// Keeps the smallest prefix of components whose cumulative contribution
/// exceeds var_threshold; an indicator survives iff its absolute loading
/// on some retained component exceeds load_threshold.
inline LoadingVerdicts select_by_loading(const PcaSummary& s, double var_threshold, double load_threshold) {
    if (!(var_threshold > 0.0 && var_threshold <= 1.0) || !(load_threshold > 0.0 && load_threshold <= 1.0))
        throw InvalidInput("select_by_loading: thresholds must lie in (0, 1]");
    const std::size_t p = s.indicator_ids.size();
    LoadingVerdicts v;
    double cumulative = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        cumulative += s.contributions[j];
        ++v.components_retained;
        if (cumulative > var_threshold) break;
    }
    v.retained.assign(p, false);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < v.components_retained; ++j)
            if (std::abs(s.loadings(i, j)) > load_threshold) {
                v.retained[i] = true;
                break;
            }
    return v;
}

/// IN statistic: mean standard deviation of the filtered indicators over
/// that of the full original set.
inline double information_contribution(std::span<const double> filtered_sds,
                                       std::span<const double> original_sds) {
    if (filtered_sds.empty() || original_sds.empty())
        throw InvalidInput("information_contribution: empty standard-deviation sequence");
    for (double v : filtered_sds)
        if (v < 0.0) throw InvalidInput("information_contribution: negative standard deviation");
    for (double v : original_sds)
        if (v < 0.0) throw InvalidInput("information_contribution: negative standard deviation");
    double fs = 0.0, os = 0.0;
    for (double v : filtered_sds) fs += v;
    for (double v : original_sds) os += v;
    const double orig_mean = os / static_cast<double>(original_sds.size());
    if (orig_mean == 0.0) throw NumericError("information_contribution: original standard deviations are all zero");
    return (fs / static_cast<double>(filtered_sds.size())) / orig_mean;
}

struct PcaGroupReport {
    PcaSummary summary;
    LoadingVerdicts verdicts;
    bool trivial = false; // single-column group retained without a real decomposition
};

/// Complete screening output.
struct ScreeningReport {
    std::vector<std::string> indicator_ids; // original column order
    linalg::Matrix correlation;
    std::vector<CorrelationDrop> dropped_by_correlation;
    std::vector<PcaGroupReport> pca_groups;
    std::vector<std::string> retained_ids; // original column order
    double in_rate = 0.0;
};

struct ScreeningParams {
    double corr_threshold = 0.85;
    double var_threshold = 0.8;
    double load_threshold = 0.8;
    std::vector<GroupSpec> groups = default_indicator_groups();
};

struct ScreeningResult {
    ScreeningReport report;
    IndicatorMatrix screened; // standardized, retained columns only
    std::vector<std::string> warnings;
};

/// Full screening pass over a raw matrix: standardize, prune correlated
/// pairs, per-group PCA with loading verdicts, and the IN rationality
/// statistic (computed from the raw per-column standard deviations).
/// Survivor groups reduced to one column, and indicators not covered by
/// any configured group, are retained trivially.
inline ScreeningResult run_screening(const IndicatorMatrix& raw, const ScreeningParams& params = {}) {
    ScreeningResult res;
    const std::vector<double> raw_sds =
        raw.standardized ? std::vector<double>(raw.n_indicators(), 1.0) : column_sample_sds(raw);

    IndicatorMatrix std_matrix;
    if (raw.standardized) {
        std_matrix = raw;
    } else {
        StandardizeResult sr = standardize(raw);
        std_matrix = std::move(sr.matrix);
        for (const auto& id : sr.constant_columns)
            res.warnings.push_back("constant indicator " + id + " standardized to zero");
    }

    ScreeningReport& rep = res.report;
    rep.indicator_ids = raw.indicator_ids;

    CorrelationPruneResult pruned = prune_correlated(std_matrix, params.corr_threshold);
    rep.correlation = std::move(pruned.correlation);
    rep.dropped_by_correlation = std::move(pruned.drops);

    auto kept_after_prune = [&](const std::string& id) {
        return std::find(pruned.kept_ids.begin(), pruned.kept_ids.end(), id) != pruned.kept_ids.end();
    };

    std::vector<std::string> pca_retained;
    std::vector<std::string> grouped;
    for (const auto& group : params.groups) {
        std::vector<std::string> survivors;
        for (const auto& id : group.members) {
            if (raw.find_indicator(id) == static_cast<std::size_t>(-1)) continue;
            grouped.push_back(id);
            if (kept_after_prune(id)) survivors.push_back(id);
        }
        if (survivors.empty()) continue;
        PcaGroupReport g;
        if (survivors.size() == 1) {
            // Eigenstructure of the 1x1 correlation matrix.
            g.trivial = true;
            g.summary.group_id = group.id;
            g.summary.indicator_ids = survivors;
            g.summary.eigenvalues = {1.0};
            g.summary.contributions = {1.0};
            g.summary.loadings = linalg::Matrix(1, 1, 1.0);
            g.verdicts.components_retained = 1;
            g.verdicts.retained = {true};
        } else {
            g.summary = pca_group(std_matrix, group.id, survivors);
            g.verdicts = select_by_loading(g.summary, params.var_threshold, params.load_threshold);
        }
        for (std::size_t i = 0; i < g.summary.indicator_ids.size(); ++i)
            if (g.verdicts.retained[i]) pca_retained.push_back(g.summary.indicator_ids[i]);
        rep.pca_groups.push_back(std::move(g));
    }

    // Ungrouped survivors pass through.
    for (const auto& id : pruned.kept_ids)
        if (std::find(grouped.begin(), grouped.end(), id) == grouped.end()) pca_retained.push_back(id);

    for (const auto& id : rep.indicator_ids)
        if (std::find(pca_retained.begin(), pca_retained.end(), id) != pca_retained.end())
            rep.retained_ids.push_back(id);

    std::vector<double> kept_sds;
    for (std::size_t j = 0; j < rep.indicator_ids.size(); ++j)
        if (std::find(rep.retained_ids.begin(), rep.retained_ids.end(), rep.indicator_ids[j]) !=
            rep.retained_ids.end())
            kept_sds.push_back(raw_sds[j]);
    rep.in_rate = information_contribution(kept_sds, raw_sds);

    res.screened = std_matrix.select_indicators(rep.retained_ids);
    return res;
}

} // namespace ewarn
