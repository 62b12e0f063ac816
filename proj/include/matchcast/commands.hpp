#pragma once

// Command implementations behind the matchcast CLI. Each writes its output to
// the given streams and returns a process exit code.

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "matchcast/config.hpp"
#include "matchcast/data.hpp"
#include "matchcast/evaluate.hpp"
#include "matchcast/report.hpp"

namespace matchcast {

/// Schema check, duplicate-fixture check and a per-season completeness summary.
inline int cmd_validate(const std::string& matches_path, bool strict, std::ostream& out, std::ostream& err) {
    std::vector<SourcedMatch> rows;
    try {
        rows = parse_matches_with_lines(read_file(matches_path));
    } catch (const Error& e) {
        err << matches_path << ": " << e.what() << '\n';
        return 1;
    }

    int errors = 0;
    std::map<std::tuple<int, int, std::string, std::string>, std::size_t> seen;
    for (const auto& r : rows) {
        const auto key = std::make_tuple(r.match.season, r.match.matchday, r.match.home.key(), r.match.away.key());
        const auto [it, inserted] = seen.emplace(key, r.line);
        if (!inserted) {
            err << matches_path << ": duplicate fixture on lines " << it->second << " and " << r.line << ": season "
                << r.match.season << " matchday " << r.match.matchday << ' ' << r.match.home.display() << " v "
                << r.match.away.display() << '\n';
            ++errors;
        }
    }
    if (errors) return 1;

    std::map<int, std::vector<const SourcedMatch*>> by_season;
    for (const auto& r : rows) by_season[r.match.season].push_back(&r);
    for (const auto& [year, recs] : by_season) {
        std::vector<MatchRecord> matches;
        for (const auto* r : recs) matches.push_back(r->match);
        Season season;
        try {
            season = Season::from_records(year, matches, SeasonOptions{strict});
        } catch (const Error& e) {
            err << matches_path << ": " << e.what() << '\n';
            ++errors;
            continue;
        }
        std::size_t played = 0;
        for (const auto& m : season.matches()) played += m.played() ? 1 : 0;
        out << "season " << year << ": " << season.teams().size() << " teams, " << season.matches().size()
            << " matches, " << season.rounds() << " rounds, " << played << " played";
        if (season.regular() && played == season.matches().size()) out << " - complete season\n";
        else if (season.regular()) out << " - complete schedule, " << season.matches().size() - played << " scheduled\n";
        else out << " - irregular season (not a complete double round robin)\n";
        for (const auto* r : recs) {
            if (r->match.played()) continue;
            out << "  scheduled: line " << r->line << " matchday " << r->match.matchday << ' '
                << r->match.home.display() << " v " << r->match.away.display()
                << (r->match.matchday <= season.first_half_end() ? " (first half)" : "") << '\n';
        }
    }
    return errors ? 1 : 0;
}

inline std::vector<Season> load_seasons(const RunConfig& cfg) {
    if (cfg.matches_path.empty()) throw Error("no match file given (--matches or matches= in the config)");
    return group_seasons(parse_matches(read_file(cfg.matches_path)), SeasonOptions{cfg.strict});
}

/// One CSV row per fixture of the matchday per model. Fixtures a model could
/// not forecast are emitted with status `absent`; a model that fails outright
/// gets status `error` rows and the others are still emitted.
inline int cmd_predict(const RunConfig& cfg, int matchday, std::optional<int> season_year, std::ostream& out,
                       std::ostream& err) {
    std::vector<Season> seasons;
    try {
        seasons = load_seasons(cfg);
    } catch (const Error& e) {
        err << e.what() << '\n';
        return 1;
    }
    if (seasons.empty()) {
        err << "no matches\n";
        return 1;
    }
    const int year = season_year.value_or(seasons.back().year());
    const Season* season = nullptr;
    for (const auto& s : seasons)
        if (s.year() == year) season = &s;
    if (!season) {
        err << "unknown season " << year << '\n';
        return 1;
    }
    std::vector<Fixture> fixtures;
    for (const auto& m : season->matchday(matchday)) fixtures.push_back(m.fixture());
    if (fixtures.empty()) {
        err << "season " << year << " has no fixtures on matchday " << matchday << '\n';
        return 1;
    }
    for (const auto& m : season->matches())
        if (m.matchday < matchday && !m.played())
            err << "warning: earlier fixture unplayed, ignored: matchday " << m.matchday << ' ' << m.home.display()
                << " v " << m.away.display() << '\n';

    const auto history = History::before(seasons, year, matchday);
    int status = 0;
    out << "model,season,matchday,home,away,p1,p2,p3,status\n";
    for (const auto& spec : cfg.models) {
        std::vector<std::optional<Prediction>> preds;
        std::string name = spec;
        bool failed = false;
        try {
            const auto model = make_predictor(spec, cfg);
            name = model->name();
            preds = model->predict(history, fixtures);
        } catch (const std::exception& e) {
            err << spec << ": " << e.what() << '\n';
            failed = true;
            status = 1;
        }
        for (std::size_t i = 0; i < fixtures.size(); ++i) {
            const auto& f = fixtures[i];
            out << detail::csv_quote(name) << ',' << f.season << ',' << f.matchday << ','
                << detail::csv_quote(f.home.display()) << ',' << detail::csv_quote(f.away.display()) << ',';
            if (!failed && preds[i]) {
                out << detail::fmt_double(preds[i]->home_win()) << ',' << detail::fmt_double(preds[i]->draw()) << ','
                    << detail::fmt_double(preds[i]->away_win()) << ",ok\n";
            } else {
                out << ",,," << (failed ? "error" : "absent") << '\n';
            }
        }
    }
    return status;
}

struct EvaluateOutcome {
    int exit_code = 0;
    EvaluationReport report;
};

/// Runs the rolling second-half evaluation for every configured model, writes
/// report.json and report.csv into the output directory, and prints the
/// summary table.
inline EvaluateOutcome cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    EvaluateOutcome result;
    std::vector<Season> seasons;
    try {
        seasons = load_seasons(cfg);
    } catch (const Error& e) {
        err << e.what() << '\n';
        result.exit_code = 1;
        return result;
    }

    std::vector<std::unique_ptr<Predictor>> predictors;
    for (const auto& spec : cfg.models) {
        try {
            predictors.push_back(make_predictor(spec, cfg));
        } catch (const std::exception& e) {
            err << spec << ": " << e.what() << '\n';
            result.exit_code = 1;
        }
    }

    EvaluationOptions opts;
    opts.calibration.bins = cfg.calibration_bins;
    try {
        result.report = evaluate(predictors, seasons, opts);
    } catch (const Error& e) {
        err << e.what() << '\n';
        result.exit_code = 1;
        return result;
    }

    auto json = report_json(result.report);
    nlohmann::ordered_json config;
    for (const auto& [k, v] : cfg.describe()) config[k] = v;
    json["config"] = config;

    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    const auto dir = std::filesystem::path(cfg.output_dir);
    {
        std::ofstream f(dir / "report.json", std::ios::binary);
        f << json.dump(2) << '\n';
        if (!f) {
            err << "cannot write " << (dir / "report.json").string() << '\n';
            result.exit_code = 1;
        }
    }
    {
        std::ofstream f(dir / "report.csv", std::ios::binary);
        f << report_csv(result.report);
        if (!f) {
            err << "cannot write " << (dir / "report.csv").string() << '\n';
            result.exit_code = 1;
        }
    }
    out << summary_table(result.report);
    return result;
}

}  // namespace matchcast
