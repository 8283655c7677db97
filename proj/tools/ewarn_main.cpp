#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ewarn/ewarn.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

int usage_error(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ewarn: indicator screening, grey relational analysis, K-Means grading,\n"
                 "LM-trained MLP level prediction and model interpretation over CSV inputs"};

    ewarn::PipelineConfig cfg;
    std::string stage = "pipeline";

    app.add_option("--input", cfg.input_path, "input CSV (matrix `label,<id>,...` or series `label,degree`)")
        ->required();
    app.add_option("--out-dir", cfg.out_dir, "artifact directory")->capture_default_str();
    app.add_option("--stage", stage, "standardize|screen|gra|grade|train|predict|explain|pipeline")
        ->capture_default_str();
    app.add_option("--rho", cfg.rho, "grey relational resolution factor, in (0,1)")->capture_default_str();
    app.add_option("--corr-threshold", cfg.screening.corr_threshold, "correlation pruning threshold M")
        ->capture_default_str();
    app.add_option("--var-threshold", cfg.screening.var_threshold, "cumulative variance threshold")
        ->capture_default_str();
    app.add_option("--load-threshold", cfg.screening.load_threshold, "factor loading threshold")
        ->capture_default_str();
    app.add_option("--k", cfg.k, "number of warning clusters")->capture_default_str();
    app.add_option("--split", cfg.split, "training slice count; the rest is the test group")
        ->capture_default_str();
    app.add_option("--hidden", cfg.hidden, "hidden layer size")->capture_default_str();
    app.add_option("--seed", cfg.seed, "master seed (env EWARN_SEED)")->envname("EWARN_SEED")
        ->capture_default_str();
    app.add_option("--goal-mse", cfg.train.goal_mse, "training target error")->capture_default_str();
    app.add_option("--max-epochs", cfg.train.max_epochs, "training epoch cap")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    const auto& stages = ewarn::stage_names();
    if (std::find(stages.begin(), stages.end(), stage) == stages.end()) {
        std::string msg = "unknown stage \"" + stage + "\"; valid stages:";
        for (const auto& name : stages) msg += " " + name;
        return usage_error(msg);
    }
    if (!std::filesystem::exists(cfg.input_path)) return usage_error(cfg.input_path + ": input file not found");
    if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) return usage_error("--rho must lie in (0, 1)");
    if (!(cfg.screening.corr_threshold > 0.0 && cfg.screening.corr_threshold <= 1.0))
        return usage_error("--corr-threshold must lie in (0, 1]");
    if (!(cfg.screening.var_threshold > 0.0 && cfg.screening.var_threshold <= 1.0))
        return usage_error("--var-threshold must lie in (0, 1]");
    if (!(cfg.screening.load_threshold > 0.0 && cfg.screening.load_threshold <= 1.0))
        return usage_error("--load-threshold must lie in (0, 1]");
    if (cfg.k == 0) return usage_error("--k must be positive");
    if (cfg.split == 0) return usage_error("--split must be positive");
    if (cfg.hidden == 0) return usage_error("--hidden must be positive");
    if (!(cfg.train.goal_mse > 0.0)) return usage_error("--goal-mse must be positive");
    if (cfg.train.max_epochs == 0) return usage_error("--max-epochs must be positive");

    try {
        const ewarn::StageOutput out = ewarn::run_stage(stage, cfg);
        for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
        for (const auto& f : out.files) std::cout << "wrote " << f << "\n";
        return kExitOk;
    } catch (const ewarn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputation;
    }
}
