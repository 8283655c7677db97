#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ewarn/errors.hpp"
#include "ewarn/explain.hpp"
#include "ewarn/gra.hpp"
#include "ewarn/grading.hpp"
#include "ewarn/indicator_matrix.hpp"
#include "ewarn/mlp.hpp"
#include "ewarn/screening.hpp"
#include "ewarn/serialize.hpp"

namespace ewarn {

/// Every knob of the batch pipeline. Stages consume their predecessor's
/// artifacts from out_dir under fixed file names, so any stage can be
/// re-run in isolation.
struct PipelineConfig {
    std::string input_path;
    std::string out_dir = "out";
    double rho = 0.5;
    ScreeningParams screening;
    std::size_t k = 3;
    std::size_t split = 25;
    std::size_t hidden = 6;
    TrainParams train;
    ExplainParams explain;
    std::uint64_t seed = 42;

    std::string artifact(const std::string& name) const {
        return (std::filesystem::path(out_dir) / name).string();
    }
};

inline const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = {"standardize", "screen", "gra", "grade",
                                                   "train", "predict", "explain", "pipeline"};
    return names;
}

namespace detail {

inline void ensure_out_dir(const PipelineConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw Error(cfg.out_dir + ": cannot create output directory");
}

inline std::vector<double> load_series(const std::string& path, std::size_t expect_cols = 1) {
    const IndicatorMatrix m = load_matrix(path);
    if (m.n_indicators() != expect_cols)
        throw InvalidInput(path + ": expected a " + std::to_string(expect_cols) + "-column series file");
    return m.column(0);
}

inline std::vector<WarningLevel> load_levels(const std::string& path) {
    const IndicatorMatrix m = load_matrix(path);
    if (m.n_indicators() != 1) throw InvalidInput(path + ": expected a 1-column level file");
    std::vector<WarningLevel> levels;
    levels.reserve(m.n_slices());
    for (std::size_t i = 0; i < m.n_slices(); ++i) {
        const double v = m.values(i, 0);
        const int code = static_cast<int>(v);
        if (static_cast<double>(code) != v) throw InvalidInput(path + ": level codes must be integers");
        levels.push_back(level_from_code(code));
    }
    return levels;
}

inline linalg::Matrix rows_slice(const linalg::Matrix& m, std::size_t from, std::size_t count) {
    linalg::Matrix out(count, m.cols);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out(i, j) = m(from + i, j);
    return out;
}

inline std::vector<int> level_codes_for(const GradingModel& model, const std::vector<double>& degrees) {
    std::vector<int> codes;
    codes.reserve(degrees.size());
    if (model.k == 3 && model.thresholds.size() == 2) {
        for (double d : degrees) codes.push_back(level_code(classify(d, model.thresholds[0], model.thresholds[1])));
    } else {
        // Non-three-level schemes fall back to cluster-rank codes.
        for (std::size_t i = 0; i < degrees.size(); ++i)
            codes.push_back(static_cast<int>(model.assignments[i]) + 1);
    }
    return codes;
}

inline void write_levels_csv(const PipelineConfig& cfg, const std::vector<std::string>& labels,
                             const std::vector<int>& codes) {
    std::vector<double> as_double(codes.begin(), codes.end());
    save_matrix(series_matrix(labels, as_double, "level"), cfg.artifact("levels.csv"));
}

} // namespace detail

struct StageOutput {
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

inline StageOutput stage_standardize(const PipelineConfig& cfg) {
    detail::ensure_out_dir(cfg);
    const StandardizeResult res = standardize(load_matrix(cfg.input_path));
    save_matrix(res.matrix, cfg.artifact("standardized.csv"));
    StageOutput out{{cfg.artifact("standardized.csv")}, {}};
    for (const auto& id : res.constant_columns)
        out.warnings.push_back("constant indicator " + id + " standardized to zero");
    return out;
}

inline StageOutput stage_screen(const PipelineConfig& cfg) {
    detail::ensure_out_dir(cfg);
    const ScreeningResult res = run_screening(load_matrix(cfg.input_path), cfg.screening);
    write_json_file(cfg.artifact("screening.json"), screening_to_json(res.report));
    save_matrix(res.screened, cfg.artifact("screened.csv"));
    return {{cfg.artifact("screening.json"), cfg.artifact("screened.csv")}, res.warnings};
}

inline StageOutput stage_gra(const PipelineConfig& cfg) {
    detail::ensure_out_dir(cfg);
    const IndicatorMatrix m = load_matrix(cfg.input_path);
    const GraResult res = run_gra(m, cfg.rho);
    write_json_file(cfg.artifact("gra.json"), gra_to_json(res, m.slice_labels));
    save_matrix(series_matrix(m.slice_labels, res.degrees, "degree"), cfg.artifact("degrees.csv"));
    return {{cfg.artifact("gra.json"), cfg.artifact("degrees.csv")}, {}};
}

inline StageOutput stage_grade(const PipelineConfig& cfg) {
    detail::ensure_out_dir(cfg);
    const IndicatorMatrix series = load_matrix(cfg.input_path);
    if (series.n_indicators() != 1) throw InvalidInput(cfg.input_path + ": grade expects a label,degree file");
    const std::vector<double> degrees = series.column(0);
    const GradingModel model = kmeans(degrees, cfg.k, cfg.seed);
    write_json_file(cfg.artifact("grading.json"), grading_to_json(model));
    detail::write_levels_csv(cfg, series.slice_labels, detail::level_codes_for(model, degrees));
    return {{cfg.artifact("grading.json"), cfg.artifact("levels.csv")}, {}};
}

inline StageOutput stage_train(const PipelineConfig& cfg) {
    detail::ensure_out_dir(cfg);
    const IndicatorMatrix m = load_matrix(cfg.input_path);
    const std::vector<WarningLevel> levels = detail::load_levels(cfg.artifact("levels.csv"));
    if (levels.size() != m.n_slices())
        throw InvalidInput("train: level count does not match input slice count");
    if (cfg.split == 0 || cfg.split >= m.n_slices())
        throw InvalidInput("train: split index must lie in [1, slice count)");

    const linalg::Matrix x = detail::rows_slice(m.values, 0, cfg.split);
    linalg::Matrix y(cfg.split, 1);
    for (std::size_t i = 0; i < cfg.split; ++i) y(i, 0) = static_cast<double>(level_code(levels[i]));

    TrainParams params = cfg.train;
    params.seed = cfg.seed;
    const MlpModel net = init_network(m.n_indicators(), cfg.hidden, 1, params.seed);
    const TrainResult res = train_lm(net, x, y, params);
    write_json_file(cfg.artifact("model.json"), mlp_to_json(res.model));
    write_text_file(cfg.artifact("trace.csv"), trace_to_csv(res.trace));
    return {{cfg.artifact("model.json"), cfg.artifact("trace.csv")}, {}};
}

inline StageOutput stage_predict(const PipelineConfig& cfg) {
    detail::ensure_out_dir(cfg);
    const IndicatorMatrix m = load_matrix(cfg.input_path);
    const MlpModel model = load_mlp(cfg.artifact("model.json"));
    std::vector<double> codes;
    codes.reserve(m.n_slices());
    for (std::size_t i = 0; i < m.n_slices(); ++i)
        codes.push_back(static_cast<double>(level_code(predict_level(model, m.values.row(i)))));
    save_matrix(series_matrix(m.slice_labels, codes, "level"), cfg.artifact("predictions.csv"));
    return {{cfg.artifact("predictions.csv")}, {}};
}

inline StageOutput stage_explain(const PipelineConfig& cfg) {
    detail::ensure_out_dir(cfg);
    const IndicatorMatrix m = load_matrix(cfg.input_path);
    const MlpModel model = load_mlp(cfg.artifact("model.json"));
    const std::vector<WarningLevel> levels = detail::load_levels(cfg.artifact("levels.csv"));
    if (levels.size() != m.n_slices())
        throw InvalidInput("explain: level count does not match input slice count");
    ExplainParams params = cfg.explain;
    params.seed = cfg.seed;
    const Explanation e = explain_model(model, m.values, levels, m.values.row(m.n_slices() - 1), params);
    write_json_file(cfg.artifact("explain.json"),
                    explanation_to_json(e, m.indicator_ids, m.slice_labels.back()));
    return {{cfg.artifact("explain.json")}, {}};
}

/// Pipeline report: one JSON document with the per-slice grading, the
/// held-out accuracy and the explanation summary.
struct PipelineReport {
    json document;
    double test_accuracy = 0.0;
    std::vector<std::string> warnings;
};

inline PipelineReport run_pipeline(const PipelineConfig& cfg) {
    detail::ensure_out_dir(cfg);
    if (cfg.k != 3) throw InvalidInput("pipeline: the level scheme requires k = 3");

    const IndicatorMatrix raw = load_matrix(cfg.input_path);
    if (cfg.split == 0 || cfg.split >= raw.n_slices())
        throw InvalidInput("pipeline: split index must lie in [1, slice count)");

    PipelineReport out;

    const StandardizeResult std_res = standardize(raw);
    save_matrix(std_res.matrix, cfg.artifact("standardized.csv"));
    for (const auto& id : std_res.constant_columns)
        out.warnings.push_back("constant indicator " + id + " standardized to zero");

    const ScreeningResult screening = run_screening(raw, cfg.screening);
    write_json_file(cfg.artifact("screening.json"), screening_to_json(screening.report));
    save_matrix(screening.screened, cfg.artifact("screened.csv"));

    const IndicatorMatrix& screened = screening.screened;
    const GraResult gra = run_gra(screened, cfg.rho);
    write_json_file(cfg.artifact("gra.json"), gra_to_json(gra, screened.slice_labels));
    save_matrix(series_matrix(screened.slice_labels, gra.degrees, "degree"), cfg.artifact("degrees.csv"));

    const GradingModel grading = kmeans(gra.degrees, cfg.k, cfg.seed);
    write_json_file(cfg.artifact("grading.json"), grading_to_json(grading));
    const std::vector<int> codes = detail::level_codes_for(grading, gra.degrees);
    detail::write_levels_csv(cfg, screened.slice_labels, codes);
    std::vector<WarningLevel> levels;
    levels.reserve(codes.size());
    for (int c : codes) levels.push_back(level_from_code(c));

    TrainParams params = cfg.train;
    params.seed = cfg.seed;
    const linalg::Matrix x_train = detail::rows_slice(screened.values, 0, cfg.split);
    linalg::Matrix y_train(cfg.split, 1);
    for (std::size_t i = 0; i < cfg.split; ++i) y_train(i, 0) = static_cast<double>(level_code(levels[i]));
    const MlpModel net = init_network(screened.n_indicators(), cfg.hidden, 1, params.seed);
    const TrainResult trained = train_lm(net, x_train, y_train, params);
    write_json_file(cfg.artifact("model.json"), mlp_to_json(trained.model));
    write_text_file(cfg.artifact("trace.csv"), trace_to_csv(trained.trace));

    std::vector<double> predictions;
    predictions.reserve(screened.n_slices());
    for (std::size_t i = 0; i < screened.n_slices(); ++i)
        predictions.push_back(static_cast<double>(level_code(predict_level(trained.model, screened.values.row(i)))));
    save_matrix(series_matrix(screened.slice_labels, predictions, "level"), cfg.artifact("predictions.csv"));

    const std::size_t n_test = screened.n_slices() - cfg.split;
    const linalg::Matrix x_test = detail::rows_slice(screened.values, cfg.split, n_test);
    const std::vector<WarningLevel> test_labels(levels.begin() + static_cast<std::ptrdiff_t>(cfg.split),
                                                levels.end());
    out.test_accuracy = evaluate(trained.model, x_test, test_labels);

    ExplainParams explain_params = cfg.explain;
    explain_params.seed = cfg.seed;
    const Explanation expl =
        explain_model(trained.model, screened.values, levels, screened.values.row(screened.n_slices() - 1),
                      explain_params);
    write_json_file(cfg.artifact("explain.json"),
                    explanation_to_json(expl, screened.indicator_ids, screened.slice_labels.back()));

    json& rep = out.document;
    rep["format_version"] = 1;
    rep["parameters"] = {{"input", cfg.input_path},
                         {"rho", cfg.rho},
                         {"corr_threshold", cfg.screening.corr_threshold},
                         {"var_threshold", cfg.screening.var_threshold},
                         {"load_threshold", cfg.screening.load_threshold},
                         {"k", cfg.k},
                         {"split", cfg.split},
                         {"hidden", cfg.hidden},
                         {"seed", cfg.seed},
                         {"goal_mse", cfg.train.goal_mse},
                         {"max_epochs", cfg.train.max_epochs}};
    rep["screening"] = {{"retained_ids", screening.report.retained_ids},
                        {"information_contribution_rate", screening.report.in_rate}};
    rep["grading"] = {{"centers", grading_to_json(grading)["centers"]}, {"thresholds", grading.thresholds}};
    json slices = json::array();
    for (std::size_t i = 0; i < screened.n_slices(); ++i)
        slices.push_back({{"label", screened.slice_labels[i]},
                          {"degree", gra.degrees[i]},
                          {"level", codes[i]},
                          {"predicted", static_cast<int>(predictions[i])}});
    rep["levels"] = std::move(slices);
    rep["training"] = {{"epochs", trained.trace.final_epoch},
                       {"final_mse", trained.trace.mse.back()},
                       {"stop_reason", std::string(stop_reason_name(trained.trace.stop_reason))}};
    rep["test_accuracy"] = out.test_accuracy;
    rep["explanation"] = explanation_to_json(expl, screened.indicator_ids, screened.slice_labels.back());
    write_json_file(cfg.artifact("report.json"), rep);
    return out;
}

/// Dispatch by stage name; unknown names throw InvalidInput listing the
/// valid stages.
inline StageOutput run_stage(const std::string& stage, const PipelineConfig& cfg) {
    if (stage == "standardize") return stage_standardize(cfg);
    if (stage == "screen") return stage_screen(cfg);
    if (stage == "gra") return stage_gra(cfg);
    if (stage == "grade") return stage_grade(cfg);
    if (stage == "train") return stage_train(cfg);
    if (stage == "predict") return stage_predict(cfg);
    if (stage == "explain") return stage_explain(cfg);
    if (stage == "pipeline") {
        PipelineReport rep = run_pipeline(cfg);
        return {{cfg.artifact("report.json")}, rep.warnings};
    }
    std::string msg = "unknown stage \"" + stage + "\"; valid stages:";
    for (const auto& name : stage_names()) msg += " " + name;
    throw InvalidInput(msg);
}

} // namespace ewarn
