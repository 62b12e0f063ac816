#pragma once

// Serialization of evaluation reports: JSON, flat per-match CSV, prediction
// CSV, and a plain-text summary table.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "matchcast/evaluate.hpp"

namespace matchcast {

namespace detail {

/// Shortest round-trip formatting ("%.17g" trimmed); stable across runs.
inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

inline nlohmann::ordered_json to_json(const ScoreSummary& s) {
    nlohmann::ordered_json j;
    j["n"] = s.n;
    j["mean"] = s.mean;
    j["total"] = s.total;
    j["se"] = s.se;
    j["non_finite"] = s.non_finite;
    return j;
}

inline nlohmann::ordered_json to_json(const Distribution& d) {
    return {{"n", d.n}, {"mean", d.mean}, {"min", d.min}, {"q1", d.q1},
            {"median", d.median}, {"q3", d.q3}, {"max", d.max}};
}

inline nlohmann::ordered_json to_json(const GofResult& g) {
    return {{"statistic", g.statistic}, {"df", g.df}, {"p_value", g.p_value}, {"excluded_terms", g.excluded_terms}};
}

inline nlohmann::ordered_json to_json(const CalibrationTable& t) {
    nlohmann::ordered_json j;
    j["pairs"] = t.pairs;
    j["bandwidth"] = t.bandwidth;
    j["fraction_within_identity_band"] = t.fraction_within_band();
    auto& bins = j["bins"] = nlohmann::ordered_json::array();
    for (const auto& b : t.bins)
        bins.push_back({{"lower", b.lower}, {"upper", b.upper}, {"count", b.count},
                        {"mean_assigned", b.mean_assigned}, {"observed", b.observed}, {"se", b.se}});
    auto& curve = j["curve"] = nlohmann::ordered_json::array();
    for (const auto& c : t.curve)
        curve.push_back({{"assigned", c.assigned}, {"estimate", c.estimate}, {"se", c.se},
                         {"lower", c.lower}, {"upper", c.upper},
                         {"identity_lower", c.identity_lower}, {"identity_upper", c.identity_upper},
                         {"within_identity_band", c.within_identity_band}});
    return j;
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const EvaluationReport& report) {
    using nlohmann::ordered_json;
    ordered_json root;
    auto& models = root["models"] = ordered_json::object();
    for (const auto& m : report.models) {
        ordered_json jm;
        auto& pm = jm["per_match"] = ordered_json::array();
        for (const auto& s : m.per_match) {
            ordered_json r;
            r["season"] = s.fixture.season;
            r["matchday"] = s.fixture.matchday;
            r["home"] = s.fixture.home.display();
            r["away"] = s.fixture.away.display();
            r["p"] = {s.prediction.home_win(), s.prediction.draw(), s.prediction.away_win()};
            r["outcome"] = static_cast<int>(s.outcome);
            r["brier"] = s.brier;
            r["log"] = std::isfinite(s.log) ? ordered_json(s.log) : ordered_json(nullptr);  // null = +inf
            r["spherical"] = s.spherical;
            r["top_choice_error"] = s.top_choice_error;
            r["entropy"] = s.entropy;
            r["home_win_given_no_draw"] =
                s.home_win_given_no_draw ? ordered_json(*s.home_win_given_no_draw) : ordered_json(nullptr);
            pm.push_back(std::move(r));
        }
        auto& agg = jm["aggregates"];
        agg["brier"] = detail::to_json(m.brier);
        agg["log"] = detail::to_json(m.log);
        agg["spherical"] = detail::to_json(m.spherical);
        agg["error_proportion"] = m.errors.proportion;
        agg["argmax_ties"] = m.errors.tied;
        agg["entropy"] = detail::to_json(m.entropy);
        agg["home_win_given_no_draw"] = detail::to_json(m.home_win_given_no_draw);
        jm["calibration"] = m.calibration ? detail::to_json(*m.calibration) : ordered_json(nullptr);
        jm["gof"] = m.gof ? detail::to_json(*m.gof) : ordered_json(nullptr);
        auto& years = jm["per_year"] = ordered_json::array();
        for (const auto& y : m.per_year) {
            ordered_json jy;
            jy["season"] = y.season;
            jy["brier"] = detail::to_json(y.brier);
            jy["log"] = detail::to_json(y.log);
            jy["spherical"] = detail::to_json(y.spherical);
            jy["error_proportion"] = y.error_proportion;
            jy["gof"] = detail::to_json(y.gof);
            auto& st = jy["settings"] = ordered_json::object();
            for (const auto& [k, v] : y.settings) st[k] = detail::round6(v);
            years.push_back(std::move(jy));
        }
        auto& flags = jm["flags"] = ordered_json::array();
        for (const auto& f : m.flags)
            flags.push_back({{"season", f.season}, {"matchday", f.matchday}, {"message", f.message}});
        jm["flagged_count"] = m.flags.size();
        models[m.model] = std::move(jm);
    }
    auto& cmp = root["comparisons"] = ordered_json::array();
    for (const auto& c : report.comparisons)
        cmp.push_back({{"first", c.first}, {"second", c.second}, {"n", c.n},
                       {"top_choice_agreement", c.top_choice_agreement},
                       {"mean_brier_diff", c.mean_brier_diff}, {"mean_log_diff", c.mean_log_diff},
                       {"mean_spherical_diff", c.mean_spherical_diff}});
    return root;
}

inline std::string report_csv(const EvaluationReport& report) {
    std::ostringstream os;
    os << "model,season,matchday,home,away,p1,p2,p3,outcome,brier,log,spherical\n";
    for (const auto& m : report.models) {
        for (const auto& s : m.per_match) {
            os << detail::csv_quote(m.model) << ',' << s.fixture.season << ',' << s.fixture.matchday << ','
               << detail::csv_quote(s.fixture.home.display()) << ',' << detail::csv_quote(s.fixture.away.display())
               << ',' << detail::fmt_double(s.prediction.home_win()) << ',' << detail::fmt_double(s.prediction.draw())
               << ',' << detail::fmt_double(s.prediction.away_win()) << ',' << static_cast<int>(s.outcome) << ','
               << detail::fmt_double(s.brier) << ',' << detail::fmt_double(s.log) << ','
               << detail::fmt_double(s.spherical) << '\n';
        }
    }
    return os.str();
}

/// Summary table: one row per model, then one row per model and season.
inline std::string summary_table(const EvaluationReport& report) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %6s %16s %16s %16s %7s %9s %8s\n", "model", "n", "brier (se)",
                  "log (se)", "spherical (se)", "errors", "chi2", "p-value");
    os << line;
    const auto cell = [](const ScoreSummary& s) {
        return detail::fmt_fixed(s.mean, 4) + " (" + detail::fmt_fixed(s.se, 4) + ")";
    };
    for (const auto& m : report.models) {
        std::snprintf(line, sizeof line, "%-16s %6zu %16s %16s %16s %7.4f %9s %8s\n", m.model.c_str(), m.brier.n,
                      cell(m.brier).c_str(), cell(m.log).c_str(), cell(m.spherical).c_str(), m.errors.proportion,
                      m.gof ? detail::fmt_fixed(m.gof->statistic, 2).c_str() : "-",
                      m.gof ? detail::fmt_fixed(m.gof->p_value, 4).c_str() : "-");
        os << line;
    }
    os << "\nper season\n";
    std::snprintf(line, sizeof line, "%-16s %6s %6s %8s %8s %10s %7s %9s  %s\n", "model", "season", "n", "brier",
                  "log", "spherical", "errors", "chi2", "settings");
    os << line;
    for (const auto& m : report.models) {
        for (const auto& y : m.per_year) {
            std::string settings;
            for (const auto& [k, v] : y.settings) settings += k + "=" + detail::fmt_fixed(v, 6) + " ";
            std::snprintf(line, sizeof line, "%-16s %6d %6zu %8.4f %8.4f %10.4f %7.4f %9.2f  %s\n", m.model.c_str(),
                          y.season, y.brier.n, y.brier.mean, y.log.mean, y.spherical.mean, y.error_proportion,
                          y.gof.statistic, settings.c_str());
            os << line;
        }
    }
    std::size_t flagged = 0;
    for (const auto& m : report.models) flagged += m.flags.size();
    if (flagged > 0) os << "\nflags: " << flagged << " (see report.json)\n";
    return os.str();
}

}  // namespace matchcast
