// agon: config-driven simulator for one-shot and repeated two-player games
// between scripted, seeded, or model-backed agents, with an analysis
// pipeline over the JSONL run logs.
//
// Exit codes (stable contract):
//   0  success
//   1  I/O or setup failure
//   2  validation violations
//   3  run finished but at least one game failed

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agon/cells.hpp"
#include "agon/config.hpp"
#include "agon/emit.hpp"
#include "agon/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSetup = 1;
constexpr int kExitValidation = 2;
constexpr int kExitPartialFailure = 3;

// Loads the config; fills violations from schema checks, PD structure
// checks, and template-set validation. Returns an exit code, kExitOk when
// the config loaded (violations may still be nonempty).
int load_config_checked(const std::string& path, agon::ExperimentConfig& config,
                        std::vector<std::string>& violations) {
    if (!std::filesystem::exists(path)) {
        std::cerr << "error: no such file: " << path << "\n";
        return kExitSetup;
    }
    try {
        config = agon::load_config(path);
    } catch (const agon::ConfigError& e) {
        violations.push_back(e.what());
        return kExitOk;
    }
    auto semantic = agon::validate_config(config);
    violations.insert(violations.end(), semantic.begin(), semantic.end());

    const bool need_comm = std::find(config.communication_variants.begin(),
                                     config.communication_variants.end(),
                                     true) != config.communication_variants.end();
    auto set = agon::TemplateSet::load(config.resolved_template_dir(), config.family_keys(),
                                       config.languages, need_comm, config.rounds_known_variants,
                                       &violations);
    auto template_violations = agon::validate_template_set(
        set, config.family_keys(), config.languages, need_comm, config.rounds_known_variants);
    violations.insert(violations.end(), template_violations.begin(), template_violations.end());
    return kExitOk;
}

int report_violations(const std::vector<std::string>& violations) {
    for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
    std::cerr << violations.size() << " violation(s)\n";
    return kExitValidation;
}

int cmd_validate(const std::string& config_path) {
    agon::ExperimentConfig config;
    std::vector<std::string> violations;
    const int rc = load_config_checked(config_path, config, violations);
    if (rc != kExitOk) return rc;
    if (!violations.empty()) return report_violations(violations);
    const auto counts = agon::expected_counts(config);
    std::cerr << "config OK: " << counts.games << " cells\n";
    return kExitOk;
}

int cmd_cells(const std::string& config_path, bool list) {
    agon::ExperimentConfig config;
    std::vector<std::string> violations;
    const int rc = load_config_checked(config_path, config, violations);
    if (rc != kExitOk) return rc;
    if (!violations.empty()) return report_violations(violations);
    const auto counts = agon::expected_counts(config);
    std::printf("games=%lld decisions=%lld messages=%lld\n", counts.games, counts.decisions,
                counts.messages);
    if (list)
        for (const auto& cell : agon::enumerate_cells(config))
            std::printf("%s %s\n", cell.cell_id.c_str(), cell.canonical_string().c_str());
    return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& log_path, int workers,
            std::uint64_t seed, bool seed_set, bool resume) {
    agon::ExperimentConfig config;
    std::vector<std::string> violations;
    const int rc = load_config_checked(config_path, config, violations);
    if (rc != kExitOk) return rc;
    if (!violations.empty()) return report_violations(violations);
    if (seed_set) config.run_seed = seed;

    // Credentials are an upfront setup concern, not a per-game failure.
    if (config.policy_agent1 == "model" || config.policy_agent2 == "model") {
        for (const auto& model : config.models) {
            const char* var = nullptr;
            if (model.provider == agon::Provider::OpenAIStyle) var = "AGON_OPENAI_API_KEY";
            if (model.provider == agon::Provider::ReplicateStyle) var = "AGON_REPLICATE_API_TOKEN";
            if (var && (!std::getenv(var) || !*std::getenv(var))) {
                std::cerr << "error: model " << model.model_name << " requires " << var << "\n";
                return kExitSetup;
            }
        }
    }

    try {
        agon::Gateway gateway;
        agon::GameRunner runner(config, gateway);
        agon::RunOptions options;
        options.workers = workers;
        options.resume = resume;
        options.progress = [](const agon::GameLogRecord& rec, long long done, long long total) {
            std::fprintf(stderr, "[%lld/%lld] %s %s\n", done, total, rec.cell_id.c_str(),
                         rec.status.c_str());
        };
        const agon::RunSummary summary = runner.run(log_path, options);
        std::fprintf(stderr, "completed=%lld failed=%lld skipped=%lld total=%lld\n",
                     summary.completed, summary.failed, summary.skipped, summary.total_cells);
        if (summary.completed + summary.failed == 0) std::fprintf(stderr, "0 new games\n");
        return summary.failed > 0 ? kExitPartialFailure : kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSetup;
    }
}

int cmd_analyze(const std::string& log_path, const std::string& out_dir, bool svg,
                const std::string& group_by, const std::string& lexicon_dir, int top_k,
                const std::vector<std::string>& excludes) {
    std::vector<agon::GameLogRecord> records;
    try {
        records = agon::read_log(log_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSetup;
    }

    agon::AnalyzeOptions options;
    options.emit_svg = svg;
    options.lexicon_dir = lexicon_dir;
    options.top_k = top_k;
    options.extra_excluded = excludes;
    if (!group_by.empty())
        for (const auto& key : agon::split(group_by, ','))
            if (!key.empty()) options.group_by.push_back(key);

    try {
        const auto written = agon::analyze_all(records, out_dir, options);
        for (const auto& path : written) std::cerr << "wrote " << path << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSetup;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-player game simulator and analysis pipeline"};
    app.require_subcommand(1);

    std::string config_path, log_path, out_dir, group_by, format = "csv";
    std::string lexicon_dir = "lexicons";
    std::vector<std::string> excludes;
    int workers = 0, top_k = 5;
    std::uint64_t seed = 0;
    bool list_cells = false, resume = false;

    auto* validate = app.add_subcommand("validate", "check a config, its matrices and templates");
    validate->add_option("config", config_path, "experiment config (JSON)")->required();

    auto* cells = app.add_subcommand("cells", "report the factorial cell and decision counts");
    cells->add_option("config", config_path, "experiment config (JSON)")->required();
    cells->add_flag("--list", list_cells, "print every cell id");

    auto* run = app.add_subcommand("run", "execute all cells and append JSONL game records");
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    run->add_option("--log", log_path, "output JSONL log path")->required();
    run->add_option("--workers", workers, "concurrent games (default from config)");
    auto* seed_opt = run->add_option("--seed", seed, "override the config run seed");
    run->add_flag("--resume", resume, "skip cells already completed in the log");

    auto* analyze = app.add_subcommand("analyze", "recompute the metric suite from a log");
    analyze->add_option("log", log_path, "JSONL run log")->required();
    analyze->add_option("--out", out_dir, "output directory")->required();
    analyze->add_option("--format", format, "csv or svg (svg implies csv)")
        ->check(CLI::IsMember({"csv", "svg"}));
    analyze->add_option("--group-by", group_by, "comma-separated grouping factors");
    analyze->add_option("--lexicons", lexicon_dir, "stopword list directory (default: lexicons)");
    analyze->add_option("--top-k", top_k, "ranked words per language/game (default: 5)");
    analyze->add_option("--exclude", excludes, "extra excluded terms (repeatable)");

    auto* report = app.add_subcommand("report", "analyze with both CSV and SVG output");
    report->add_option("log", log_path, "JSONL run log")->required();
    report->add_option("--out", out_dir, "output directory")->required();
    report->add_option("--group-by", group_by, "comma-separated grouping factors");
    report->add_option("--lexicons", lexicon_dir, "stopword list directory");
    report->add_option("--top-k", top_k, "ranked words per language/game");
    report->add_option("--exclude", excludes, "extra excluded terms (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitSetup;
    }

    if (*validate) return cmd_validate(config_path);
    if (*cells) return cmd_cells(config_path, list_cells);
    if (*run) return cmd_run(config_path, log_path, workers, seed, seed_opt->count() > 0, resume);
    if (*analyze) return cmd_analyze(log_path, out_dir, format == "svg", group_by, lexicon_dir,
                                     top_k, excludes);
    if (*report)
        return cmd_analyze(log_path, out_dir, true, group_by, lexicon_dir, top_k, excludes);
    return kExitSetup;
}
