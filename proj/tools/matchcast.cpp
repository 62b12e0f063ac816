// matchcast: validate match files, forecast a matchday, run the rolling
// evaluation, or run the acceptance self-test.
//
// Settings come from defaults, then the config file (--config, else
// $MATCHCAST_CONFIG), then command-line flags.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "acceptance_checks.hpp"
#include "matchcast/commands.hpp"
#include "matchcast/config.hpp"

namespace {

struct Flags {
    std::string config;
    std::string matches;
    std::string models;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool strict = false;
    int matchday = 0;
    std::optional<int> season;
};

matchcast::RunConfig resolve(const Flags& f) {
    matchcast::RunConfig cfg;
    std::string path = f.config;
    if (path.empty())
        if (const char* env = std::getenv("MATCHCAST_CONFIG")) path = env;
    if (!path.empty()) matchcast::apply_config_text(cfg, matchcast::read_file(path));
    if (!f.matches.empty()) cfg.matches_path = f.matches;
    if (!f.models.empty()) matchcast::apply_setting(cfg, "models", f.models);
    if (!f.out.empty()) cfg.output_dir = f.out;
    if (f.seed) cfg.seed = *f.seed;
    if (f.strict) cfg.strict = true;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matchcast: football match outcome forecasting and forecast evaluation"};
    app.require_subcommand(1);
    Flags flags;
    app.add_option("--config", flags.config, "key=value config file (default: $MATCHCAST_CONFIG)");
    app.add_option("--matches", flags.matches, "match CSV (season,matchday,home,away,home_goals,away_goals)");
    app.add_option("--models", flags.models,
                   "comma-separated models: trivial, mn-dir1, mn-dir2, bt, poisson-lee, poisson-biv, poisson, "
                   "external:<file>");
    app.add_option("--out", flags.out, "output directory for reports");
    app.add_option("--seed", flags.seed, "seed for all simulation randomness");
    app.add_flag("--strict", flags.strict, "require complete 20-team double round robins");

    auto* validate = app.add_subcommand("validate", "check a match file and summarize its seasons");
    auto* predict = app.add_subcommand("predict", "forecast every fixture of one matchday");
    predict->add_option("--matchday", flags.matchday, "matchday to forecast")->required()->check(CLI::PositiveNumber);
    predict->add_option("--season", flags.season, "season year (default: latest in the file)");
    auto* evaluate = app.add_subcommand("evaluate", "rolling second-half evaluation of every model");
    auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");

    CLI11_PARSE(app, argc, argv);

    matchcast::RunConfig cfg;
    try {
        cfg = resolve(flags);
    } catch (const std::exception& e) {
        std::cerr << "config: " << e.what() << '\n';
        return 2;
    }

    try {
        if (validate->parsed()) {
            if (cfg.matches_path.empty()) {
                std::cerr << "validate needs --matches\n";
                return 2;
            }
            return matchcast::cmd_validate(cfg.matches_path, cfg.strict, std::cout, std::cerr);
        }
        if (predict->parsed()) return matchcast::cmd_predict(cfg, flags.matchday, flags.season, std::cout, std::cerr);
        if (evaluate->parsed()) {
            const auto result = matchcast::cmd_evaluate(cfg, std::cout, std::cerr);
            std::size_t flagged = 0;
            for (const auto& m : result.report.models) flagged += m.flags.size();
            if (flagged > 0) std::cerr << flagged << " flagged forecast(s); see report.json\n";
            return result.exit_code;
        }
        if (selftest->parsed()) {
            namespace acc = matchcast::acceptance;
            const auto workdir = std::filesystem::path(cfg.output_dir) / "selftest";
            std::cout << "acceptance suite, seed " << cfg.seed << '\n';
            const auto results =
                acc::run_all(cfg.seed, workdir, [](const auto& r) { std::cout << acc::format_line(r) << std::endl; });
            int failed = 0;
            for (const auto& r : results) failed += r.passed ? 0 : 1;
            std::cout << results.size() - failed << '/' << results.size() << " criteria passed\n";
            return failed == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
