#pragma once

// Rolling second-half evaluation: the Predictor interface, the built-in
// predictors, and aggregation of per-match scores into model reports.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "matchcast/data.hpp"
#include "matchcast/davidson.hpp"
#include "matchcast/dirichlet.hpp"
#include "matchcast/poisson.hpp"
#include "matchcast/scoring.hpp"

namespace matchcast {

/// Named fitted quantities a predictor reports for a season (e.g. the
/// cross-validated w and alpha).
using SeasonSettings = std::vector<std::pair<std::string, double>>;

/// A forecaster. `predict` sees only a History (played matches strictly before
/// the target matchday) and result-free fixtures, so it cannot look at the
/// outcomes it is scored on. One slot per fixture; nullopt means no forecast.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::string name() const = 0;
    virtual std::vector<std::optional<Prediction>> predict(const History& history,
                                                           std::span<const Fixture> fixtures) const = 0;
    virtual SeasonSettings season_settings(const History&) const { return {}; }
};

class TrivialPredictor final : public Predictor {
public:
    std::string name() const override { return "trivial"; }
    std::vector<std::optional<Prediction>> predict(const History&, std::span<const Fixture> fixtures) const override {
        return std::vector<std::optional<Prediction>>(fixtures.size(), Prediction::uniform());
    }
};

/// Equal-weight pool of D(prior + home team's home record) and
/// D(prior + away team's away record), counts taken over every played
/// matchday of the current season before the target.
class MnDir1Predictor final : public Predictor {
public:
    explicit MnDir1Predictor(DirichletParams prior = DirichletParams::uniform()) : prior_(prior) {}
    std::string name() const override { return "mn-dir1"; }
    std::vector<std::optional<Prediction>> predict(const History& history,
                                                   std::span<const Fixture> fixtures) const override {
        std::vector<std::optional<Prediction>> out;
        for (const auto& f : fixtures) {
            const auto h = history.counts(f.home, Venue::Home, std::numeric_limits<int>::max());
            const auto a = history.counts(f.away, Venue::Away, std::numeric_limits<int>::max());
            out.push_back(mn_dir1_predict(h, a, prior_));
        }
        return out;
    }

private:
    DirichletParams prior_;
};

/// Weighted pool with a symmetric prior; (w, alpha) chosen by prequential
/// Brier cross-validation over the first half of the current season.
class MnDir2Predictor final : public Predictor {
public:
    explicit MnDir2Predictor(GridSpec grid = GridSpec::standard()) : grid_(std::move(grid)) { grid_.validate(); }
    std::string name() const override { return "mn-dir2"; }

    MnDir2Config select(const History& history) const {
        std::vector<MatchRecord> first_half;
        for (const auto& m : history.current())
            if (m.matchday <= history.first_half_end()) first_half.push_back(m);
        if (first_half.empty()) throw Error("mn-dir2 needs played first-half matches");
        return cv_select(first_half, grid_);
    }

    std::vector<std::optional<Prediction>> predict(const History& history,
                                                   std::span<const Fixture> fixtures) const override {
        const auto cfg = select(history);
        std::vector<std::optional<Prediction>> out;
        for (const auto& f : fixtures) {
            const auto h = history.counts(f.home, Venue::Home, std::numeric_limits<int>::max());
            const auto a = history.counts(f.away, Venue::Away, std::numeric_limits<int>::max());
            out.push_back(mn_dir2_predict(h, a, cfg));
        }
        return out;
    }

    SeasonSettings season_settings(const History& history) const override {
        const auto cfg = select(history);
        return {{"w", cfg.w}, {"alpha", cfg.alpha}};
    }

private:
    GridSpec grid_;
};

class DavidsonPredictor final : public Predictor {
public:
    explicit DavidsonPredictor(OptimizerSettings settings = {}) : settings_(settings) {}
    std::string name() const override { return "bt"; }
    std::vector<std::optional<Prediction>> predict(const History& history,
                                                   std::span<const Fixture> fixtures) const override {
        return bt_predict(history, fixtures, settings_);
    }

private:
    OptimizerSettings settings_;
};

class PoissonPredictor final : public Predictor {
public:
    PoissonPredictor(std::string name, PoissonModelSettings settings)
        : name_(std::move(name)), settings_(std::move(settings)) {}

    /// Independent scores fitted on the current season only.
    static PoissonPredictor lee(double tail_tol = 1e-10, OptimizerSettings opt = {}) {
        return {"poisson-lee", {false, TrainingWindow{}, tail_tol, opt}};
    }
    /// Correlated scores over a configurable window.
    static PoissonPredictor bivariate(TrainingWindow window, double tail_tol = 1e-10, OptimizerSettings opt = {}) {
        return {"poisson-biv", {true, std::move(window), tail_tol, opt}};
    }

    std::string name() const override { return name_; }
    std::vector<std::optional<Prediction>> predict(const History& history,
                                                   std::span<const Fixture> fixtures) const override {
        return poisson_predict(history, fixtures, settings_);
    }

private:
    std::string name_;
    PoissonModelSettings settings_;
};

/// Forecasts published elsewhere, keyed by (season, matchday, home, away).
class ExternalPredictor final : public Predictor {
public:
    using Key = std::tuple<int, int, std::string, std::string>;

    ExternalPredictor(std::string name, std::map<Key, Prediction> table)
        : name_(std::move(name)), table_(std::move(table)) {}

    /// CSV with header `season,matchday,home,away,p1,p2,p3`.
    static ExternalPredictor from_csv(std::string name, std::string_view csv_text) {
        std::map<Key, Prediction> table;
        bool header_seen = false;
        detail::for_each_line(csv_text, [&](std::size_t line_no, std::string_view line) {
            if (detail::trim(line).empty()) return;
            const auto f = detail::split_csv_line(line, line_no);
            if (!header_seen) {
                std::string h;
                for (const auto& x : f) h += (h.empty() ? "" : ",") + normalize_team_name(x);
                if (h != "season,matchday,home,away,p1,p2,p3")
                    throw ParseError(line_no, "bad header, expected 'season,matchday,home,away,p1,p2,p3'");
                header_seen = true;
                return;
            }
            if (f.size() != 7) throw ParseError(line_no, "expected 7 fields, got " + std::to_string(f.size()));
            const auto num = [&](const std::string& s) {
                const auto t = std::string(detail::trim(s));
                std::size_t pos = 0;
                double v = 0.0;
                try {
                    v = std::stod(t, &pos);
                } catch (const std::exception&) {
                    pos = 0;
                }
                if (t.empty() || pos != t.size()) throw ParseError(line_no, "not a number: '" + t + "'");
                return v;
            };
            const int season = detail::parse_int(f[0], line_no, "season");
            const int md = detail::parse_int(f[1], line_no, "matchday");
            try {
                const Key key{season, md, normalize_team_name(f[2]), normalize_team_name(f[3])};
                if (!table.emplace(key, Prediction(num(f[4]), num(f[5]), num(f[6]))).second)
                    throw ParseError(line_no, "duplicate prediction row");
            } catch (const ParseError&) {
                throw;
            } catch (const Error& e) {
                throw ParseError(line_no, e.what());
            }
        });
        if (!header_seen) throw ParseError(1, "missing header");
        return {std::move(name), std::move(table)};
    }

    std::string name() const override { return name_; }
    std::vector<std::optional<Prediction>> predict(const History&, std::span<const Fixture> fixtures) const override {
        std::vector<std::optional<Prediction>> out;
        for (const auto& f : fixtures) {
            const auto it = table_.find(Key{f.season, f.matchday, f.home.key(), f.away.key()});
            out.push_back(it == table_.end() ? std::nullopt : std::optional<Prediction>(it->second));
        }
        return out;
    }

private:
    std::string name_;
    std::map<Key, Prediction> table_;
};

// ---------------------------------------------------------------------------
// Reports

struct ScoredMatch {
    Fixture fixture;
    Prediction prediction;
    Outcome outcome = Outcome::Draw;
    double brier = 0.0;
    double log = 0.0;
    double spherical = 0.0;
    bool top_choice_error = false;
    bool argmax_tie = false;
    double entropy = 0.0;
    std::optional<double> home_win_given_no_draw;
};

inline ScoredMatch score_match(const Fixture& f, const Prediction& p, Outcome x) {
    ScoredMatch s;
    s.fixture = f;
    s.prediction = p;
    s.outcome = x;
    s.brier = brier(x, p);
    s.log = log_score(x, p);
    s.spherical = spherical(x, p);
    const auto tc = top_choice(x, p);
    s.top_choice_error = tc.error;
    s.argmax_tie = tc.tied;
    s.entropy = entropy(p);
    s.home_win_given_no_draw = cond_home_win_given_no_draw(p);
    return s;
}

/// Mean, total and standard error (sample SD / sqrt(n)) over finite values.
struct ScoreSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double total = 0.0;
    double se = 0.0;
    std::size_t non_finite = 0;

    static ScoreSummary of(const std::vector<double>& values) {
        ScoreSummary s;
        for (double v : values) {
            if (!std::isfinite(v)) {
                ++s.non_finite;
                continue;
            }
            ++s.n;
            s.total += v;
        }
        if (s.n == 0) return s;
        s.mean = s.total / static_cast<double>(s.n);
        if (s.n > 1) {
            double ss = 0.0;
            for (double v : values)
                if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
            s.se = std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
        }
        return s;
    }
};

/// Five-number summary plus mean, for box-plot-ready tables.
struct Distribution {
    std::size_t n = 0;
    double mean = 0.0, min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;

    static Distribution of(std::vector<double> v) {
        Distribution d;
        d.n = v.size();
        if (v.empty()) return d;
        std::sort(v.begin(), v.end());
        const auto q = [&](double f) {
            const double pos = f * static_cast<double>(v.size() - 1);
            const auto lo = static_cast<std::size_t>(std::floor(pos));
            const auto hi = std::min(lo + 1, v.size() - 1);
            return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
        };
        double s = 0.0;
        for (double x : v) s += x;
        d.mean = s / static_cast<double>(v.size());
        d.min = v.front();
        d.q1 = q(0.25);
        d.median = q(0.5);
        d.q3 = q(0.75);
        d.max = v.back();
        return d;
    }
};

struct YearSummary {
    int season = 0;
    ScoreSummary brier, log, spherical;
    double error_proportion = 0.0;
    GofResult gof;
    SeasonSettings settings;
};

struct ReportFlag {
    int season = 0;
    int matchday = 0;
    std::string message;
};

struct ModelReport {
    std::string model;
    std::vector<ScoredMatch> per_match;
    ScoreSummary brier, log, spherical;
    ErrorProportion errors;
    std::optional<CalibrationTable> calibration;
    std::optional<GofResult> gof;
    Distribution entropy;
    Distribution home_win_given_no_draw;
    std::vector<YearSummary> per_year;
    std::vector<ReportFlag> flags;
};

/// Per-match agreement between two models over the matches both scored.
struct PairwiseComparison {
    std::string first;
    std::string second;
    std::size_t n = 0;
    double top_choice_agreement = 0.0;
    double mean_brier_diff = 0.0;  // first - second
    double mean_log_diff = 0.0;
    double mean_spherical_diff = 0.0;
};

struct EvaluationReport {
    std::vector<ModelReport> models;
    std::vector<PairwiseComparison> comparisons;
};

struct EvaluationOptions {
    CalibrationOptions calibration;
};

namespace detail {

inline std::vector<ForecastOutcome> forecasts_of(const std::vector<ScoredMatch>& scored) {
    std::vector<ForecastOutcome> out;
    for (const auto& s : scored) out.push_back({s.fixture, s.prediction, s.outcome});
    return out;
}

inline std::size_t argmax(const Prediction& p) {
    const auto& v = p.values();
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline void summarize(ModelReport& r, const EvaluationOptions& opts) {
    std::vector<double> b, l, s, e, c;
    for (const auto& m : r.per_match) {
        b.push_back(m.brier);
        l.push_back(m.log);
        s.push_back(m.spherical);
        e.push_back(m.entropy);
        if (m.home_win_given_no_draw) c.push_back(*m.home_win_given_no_draw);
    }
    r.brier = ScoreSummary::of(b);
    r.log = ScoreSummary::of(l);
    r.spherical = ScoreSummary::of(s);
    r.entropy = Distribution::of(e);
    r.home_win_given_no_draw = Distribution::of(c);
    if (r.log.non_finite > 0)
        r.flags.push_back({0, 0, std::to_string(r.log.non_finite) + " infinite log scores excluded from log aggregates"});
    if (r.per_match.empty()) return;
    const auto fo = forecasts_of(r.per_match);
    r.errors = proportion_of_errors(fo);
    if (r.errors.tied > 0)
        r.flags.push_back({0, 0, std::to_string(r.errors.tied) + " predictions with tied maximum probability"});
    r.gof = chi_square_gof(fo);
    if (r.gof->excluded_terms > 0)
        r.flags.push_back({0, 0, std::to_string(r.gof->excluded_terms) + " goodness-of-fit terms with zero expected wins excluded"});
    if (3 * fo.size() >= 30) {
        r.calibration = calibration_curve(std::span<const ForecastOutcome>(fo), opts.calibration);
    } else {
        r.flags.push_back({0, 0, "too few predictions for calibration"});
    }
}

}  // namespace detail

/// Runs every predictor over the second half of every season. For each
/// second-half matchday in order, the predictor sees the History before that
/// matchday and the matchday's fixtures; every returned forecast is scored.
/// A predictor that throws on a matchday is flagged and skipped for that
/// matchday; missing forecasts are flagged.
inline EvaluationReport evaluate(std::span<const Predictor* const> predictors, const std::vector<Season>& seasons,
                                 const EvaluationOptions& opts = {}) {
    for (const auto& s : seasons)
        for (int md : second_half_matchdays(s))
            for (const auto& m : s.matchday(md))
                if (!m.played())
                    throw Error("unplayed second-half match: season " + std::to_string(s.year()) + " matchday " +
                                std::to_string(md) + " " + m.home.display() + " v " + m.away.display());

    EvaluationReport report;
    for (const Predictor* pred : predictors) {
        ModelReport r;
        r.model = pred->name();
        for (const auto& season : seasons) {
            const auto mds = second_half_matchdays(season);
            YearSummary year;
            year.season = season.year();
            std::vector<ScoredMatch> season_scored;
            for (int md : mds) {
                const auto history = History::before(seasons, season.year(), md);
                if (md == mds.front()) {
                    try {
                        year.settings = pred->season_settings(history);
                    } catch (const std::exception& e) {
                        r.flags.push_back({season.year(), md, std::string("season settings failed: ") + e.what()});
                    }
                }
                const auto matches = season.matchday(md);
                std::vector<Fixture> fixtures;
                for (const auto& m : matches) fixtures.push_back(m.fixture());
                std::vector<std::optional<Prediction>> preds;
                try {
                    preds = pred->predict(history, fixtures);
                    if (preds.size() != fixtures.size()) throw Error("wrong number of predictions");
                } catch (const std::exception& e) {
                    r.flags.push_back({season.year(), md, std::string("prediction failed: ") + e.what()});
                    continue;
                }
                for (std::size_t i = 0; i < matches.size(); ++i) {
                    if (!preds[i]) {
                        r.flags.push_back({season.year(), md,
                                           "no prediction for " + matches[i].home.display() + " v " +
                                               matches[i].away.display()});
                        continue;
                    }
                    season_scored.push_back(score_match(fixtures[i], *preds[i], outcome_of(matches[i])));
                }
            }
            if (!season_scored.empty()) {
                std::vector<double> b, l, s;
                for (const auto& m : season_scored) {
                    b.push_back(m.brier);
                    l.push_back(m.log);
                    s.push_back(m.spherical);
                }
                year.brier = ScoreSummary::of(b);
                year.log = ScoreSummary::of(l);
                year.spherical = ScoreSummary::of(s);
                const auto fo = detail::forecasts_of(season_scored);
                year.error_proportion = proportion_of_errors(fo).proportion;
                year.gof = chi_square_gof(fo);
            }
            r.per_year.push_back(std::move(year));
            r.per_match.insert(r.per_match.end(), season_scored.begin(), season_scored.end());
        }
        detail::summarize(r, opts);
        report.models.push_back(std::move(r));
    }

    for (std::size_t a = 0; a < report.models.size(); ++a) {
        for (std::size_t b = a + 1; b < report.models.size(); ++b) {
            const auto& ma = report.models[a];
            const auto& mb = report.models[b];
            std::map<std::tuple<int, int, std::string, std::string>, const ScoredMatch*> index;
            for (const auto& m : mb.per_match)
                index[{m.fixture.season, m.fixture.matchday, m.fixture.home.key(), m.fixture.away.key()}] = &m;
            PairwiseComparison c{ma.model, mb.model};
            std::size_t agree = 0, finite_log = 0;
            for (const auto& m : ma.per_match) {
                const auto it = index.find({m.fixture.season, m.fixture.matchday, m.fixture.home.key(), m.fixture.away.key()});
                if (it == index.end()) continue;
                const auto& o = *it->second;
                ++c.n;
                agree += detail::argmax(m.prediction) == detail::argmax(o.prediction) ? 1 : 0;
                c.mean_brier_diff += m.brier - o.brier;
                c.mean_spherical_diff += m.spherical - o.spherical;
                if (std::isfinite(m.log) && std::isfinite(o.log)) {
                    c.mean_log_diff += m.log - o.log;
                    ++finite_log;
                }
            }
            if (c.n > 0) {
                c.top_choice_agreement = static_cast<double>(agree) / static_cast<double>(c.n);
                c.mean_brier_diff /= static_cast<double>(c.n);
                c.mean_spherical_diff /= static_cast<double>(c.n);
            }
            if (finite_log > 0) c.mean_log_diff /= static_cast<double>(finite_log);
            report.comparisons.push_back(c);
        }
    }
    return report;
}

inline EvaluationReport evaluate(const std::vector<std::unique_ptr<Predictor>>& predictors,
                                 const std::vector<Season>& seasons, const EvaluationOptions& opts = {}) {
    std::vector<const Predictor*> raw;
    for (const auto& p : predictors) raw.push_back(p.get());
    return evaluate(std::span<const Predictor* const>(raw), seasons, opts);
}

}  // namespace matchcast
