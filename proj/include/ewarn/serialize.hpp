#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ewarn/errors.hpp"
#include "ewarn/explain.hpp"
#include "ewarn/gra.hpp"
#include "ewarn/grading.hpp"
#include "ewarn/indicator_matrix.hpp"
#include "ewarn/mlp.hpp"
#include "ewarn/screening.hpp"

namespace ewarn {

using json = nlohmann::ordered_json;

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    out << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

namespace detail {

inline json matrix_to_json(const linalg::Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace detail

inline json screening_to_json(const ScreeningReport& r) {
    json j;
    j["format_version"] = 1;
    j["indicator_ids"] = r.indicator_ids;
    j["correlation"] = detail::matrix_to_json(r.correlation);
    json drops = json::array();
    for (const auto& d : r.dropped_by_correlation)
        drops.push_back({{"kept", d.kept}, {"dropped", d.dropped}, {"r", d.r}});
    j["dropped_by_correlation"] = std::move(drops);
    json groups = json::array();
    for (const auto& g : r.pca_groups) {
        json gj;
        gj["group"] = g.summary.group_id;
        gj["indicators"] = g.summary.indicator_ids;
        gj["trivial"] = g.trivial;
        gj["eigenvalues"] = g.summary.eigenvalues;
        gj["contributions"] = g.summary.contributions;
        json cumulative = json::array();
        double running = 0.0;
        for (double c : g.summary.contributions) cumulative.push_back(running += c);
        gj["cumulative_contributions"] = std::move(cumulative);
        gj["loadings"] = detail::matrix_to_json(g.summary.loadings);
        gj["components_retained"] = g.verdicts.components_retained;
        json verdicts;
        for (std::size_t i = 0; i < g.summary.indicator_ids.size(); ++i)
            verdicts[g.summary.indicator_ids[i]] = g.verdicts.retained[i] ? "retained" : "deleted";
        gj["verdicts"] = std::move(verdicts);
        groups.push_back(std::move(gj));
    }
    j["pca_groups"] = std::move(groups);
    j["retained_ids"] = r.retained_ids;
    j["information_contribution_rate"] = r.in_rate;
    return j;
}

inline json gra_to_json(const GraResult& r, const std::vector<std::string>& labels) {
    json j;
    j["format_version"] = 1;
    j["rho"] = r.rho;
    j["reference"] = r.reference;
    j["degrees"] = r.degrees;
    j["ranking"] = r.ranking;
    json ranked = json::array();
    for (std::size_t idx : r.ranking) ranked.push_back(labels[idx]);
    j["ranked_labels"] = std::move(ranked);
    return j;
}

inline json grading_to_json(const GradingModel& m) {
    json j;
    j["format_version"] = 1;
    j["k"] = m.k;
    const bool one_d = !m.centers.empty() && m.centers.front().size() == 1;
    if (one_d) {
        json centers = json::array();
        for (const auto& c : m.centers) centers.push_back(c[0]);
        j["centers"] = std::move(centers);
    } else {
        json centers = json::array();
        for (const auto& c : m.centers) centers.push_back(c);
        j["centers"] = std::move(centers);
    }
    j["thresholds"] = m.thresholds;
    j["assignments"] = m.assignments;
    j["iterations"] = m.iterations;
    j["sse"] = m.sse;
    return j;
}

inline json mlp_to_json(const MlpModel& m) {
    json j;
    j["format_version"] = 1;
    j["n_in"] = m.n_in;
    j["n_hidden"] = m.n_hidden;
    j["n_out"] = m.n_out;
    j["hidden_activation"] = "tansig";
    j["output_activation"] = "purelin";
    j["w_hidden"] = m.w_hidden.data; // row-major
    j["b_hidden"] = m.b_hidden;
    j["w_out"] = m.w_out.data;
    j["b_out"] = m.b_out;
    return j;
}

inline MlpModel mlp_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format_version").get<int>() != 1) throw ParseError("model: unsupported format_version");
        if (j.at("hidden_activation").get<std::string>() != "tansig" ||
            j.at("output_activation").get<std::string>() != "purelin")
            throw ParseError("model: unsupported activation pair");
        MlpModel m;
        m.n_in = j.at("n_in").get<std::size_t>();
        m.n_hidden = j.at("n_hidden").get<std::size_t>();
        m.n_out = j.at("n_out").get<std::size_t>();
        if (m.n_in == 0 || m.n_hidden == 0 || m.n_out == 0) throw ParseError("model: zero dimension");
        m.w_hidden = linalg::Matrix(m.n_hidden, m.n_in);
        m.w_hidden.data = j.at("w_hidden").get<std::vector<double>>();
        m.b_hidden = j.at("b_hidden").get<std::vector<double>>();
        m.w_out = linalg::Matrix(m.n_out, m.n_hidden);
        m.w_out.data = j.at("w_out").get<std::vector<double>>();
        m.b_out = j.at("b_out").get<std::vector<double>>();
        if (m.w_hidden.data.size() != m.n_hidden * m.n_in || m.b_hidden.size() != m.n_hidden ||
            m.w_out.data.size() != m.n_out * m.n_hidden || m.b_out.size() != m.n_out)
            throw ParseError("model: weight array sizes do not match dimensions");
        for (double v : m.w_hidden.data)
            if (!std::isfinite(v)) throw ParseError("model: non-finite weight");
        for (double v : m.w_out.data)
            if (!std::isfinite(v)) throw ParseError("model: non-finite weight");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model: malformed JSON document: ") + e.what());
    }
}

inline MlpModel load_mlp(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return mlp_from_json(j);
}

inline std::string trace_to_csv(const TrainingTrace& t) {
    std::string out = "epoch,mse\n";
    for (std::size_t e = 0; e < t.mse.size(); ++e) {
        out += std::to_string(e);
        out += ',';
        out += detail::format_double(t.mse[e]);
        out += '\n';
    }
    return out;
}

inline json explanation_to_json(const Explanation& e, const std::vector<std::string>& indicator_ids,
                                const std::string& explained_slice) {
    json j;
    j["format_version"] = 1;
    j["explained_slice"] = explained_slice;
    j["local_intercept"] = e.local_intercept;
    j["fit_quality"] = e.fit_quality;
    json per;
    for (std::size_t i = 0; i < indicator_ids.size(); ++i) {
        per[indicator_ids[i]] = {{"sensitivity", e.sensitivity[i]},
                                 {"importance", e.importance[i]},
                                 {"local_coefficient", e.local_coefficients[i]}};
    }
    j["indicators"] = std::move(per);
    return j;
}

/// A degrees (or levels) series as the 1-column matrix CSV layout.
inline IndicatorMatrix series_matrix(const std::vector<std::string>& labels, const std::vector<double>& values,
                                     const std::string& column_name) {
    IndicatorMatrix m;
    m.slice_labels = labels;
    m.indicator_ids = {column_name};
    m.values = linalg::Matrix(values.size(), 1);
    for (std::size_t i = 0; i < values.size(); ++i) m.values(i, 0) = values[i];
    return m;
}

} // namespace ewarn
