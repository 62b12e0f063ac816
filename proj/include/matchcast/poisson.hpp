#pragma once

// Goals-based models: bivariate Poisson pmf, log-linear attack/defence links
// with zero-sum constraints, maximum-likelihood fitting (independent or
// correlated scores), and outcome probabilities from a truncated score grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "matchcast/data.hpp"
#include "matchcast/optim.hpp"

namespace matchcast {

struct BivPoissonParams {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double lambda3 = 0.0;

    void validate() const {
        if (!(lambda1 > 0.0 && lambda2 > 0.0)) throw Error("lambda1 and lambda2 must be positive");
        if (!(lambda3 >= 0.0)) throw Error("lambda3 must be non-negative");
    }
};

/// log P(Y1 = y1, Y2 = y2), evaluated by log-sum-exp over the shared component.
inline double bivpois_log_pmf(const BivPoissonParams& p, int y1, int y2) {
    if (y1 < 0 || y2 < 0) return -std::numeric_limits<double>::infinity();
    const double base = -(p.lambda1 + p.lambda2 + p.lambda3);
    const double l1 = std::log(p.lambda1);
    const double l2 = std::log(p.lambda2);
    const int kmax = p.lambda3 > 0.0 ? std::min(y1, y2) : 0;
    const double l3 = p.lambda3 > 0.0 ? std::log(p.lambda3) : 0.0;
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(static_cast<std::size_t>(kmax) + 1);
    for (int k = 0; k <= kmax; ++k) {
        const double t = (y1 - k) * l1 + (y2 - k) * l2 + k * l3 - std::lgamma(y1 - k + 1.0) -
                         std::lgamma(y2 - k + 1.0) - std::lgamma(k + 1.0);
        terms[static_cast<std::size_t>(k)] = t;
        mx = std::max(mx, t);
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - mx);
    return base + mx + std::log(s);
}

inline double bivpois_pmf(const BivPoissonParams& p, int y1, int y2) {
    p.validate();
    return std::exp(bivpois_log_pmf(p, y1, y2));
}

/// mu, per-team attack/defence and the home advantage, all on the log-rate scale.
struct TeamStrengths {
    double mu = 0.0;
    std::map<TeamId, double> att;
    std::map<TeamId, double> def;
    double gamma_home = 0.0;
    double lambda3 = 0.0;
};

/// log lambda1 = mu + att[home] - def[away] + gamma; log lambda2 = mu + att[away] - def[home].
inline BivPoissonParams link_rates(const TeamStrengths& s, const TeamId& home, const TeamId& away) {
    const auto find = [](const std::map<TeamId, double>& m, const TeamId& t) {
        const auto it = m.find(t);
        if (it == m.end()) throw Error("unknown team: " + t.display());
        return it->second;
    };
    return {std::exp(s.mu + find(s.att, home) - find(s.def, away) + s.gamma_home),
            std::exp(s.mu + find(s.att, away) - find(s.def, home)), s.lambda3};
}

// ---------------------------------------------------------------------------
// Score grid

struct ScoreGrid {
    int max_goals = 0;
    std::vector<double> mass;  // row-major, (max_goals + 1)^2, row = home goals
    double truncation_deficit = 0.0;

    double at(int home_goals, int away_goals) const {
        return mass[static_cast<std::size_t>(home_goals) * static_cast<std::size_t>(max_goals + 1) +
                    static_cast<std::size_t>(away_goals)];
    }
    double total() const {
        double s = 0.0;
        for (double v : mass) s += v;
        return s;
    }
};

/// P(X > n) for X ~ Poisson(lambda).
inline double poisson_upper_tail(double lambda, int n) {
    if (lambda <= 0.0) return 0.0;
    return boost::math::gamma_p(static_cast<double>(n) + 1.0, lambda);
}

/// Smallest square grid whose omitted mass is certified below `tail_tol` by the
/// Poisson(lambda1 + lambda3) and Poisson(lambda2 + lambda3) marginal tails.
inline ScoreGrid score_grid(const BivPoissonParams& p, double tail_tol = 1e-10) {
    p.validate();
    if (!(tail_tol > 0.0 && tail_tol <= 1e-3)) throw Error("tail_tol must lie in (0, 1e-3]");
    const double m1 = p.lambda1 + p.lambda3;
    const double m2 = p.lambda2 + p.lambda3;
    int n = 0;
    while (poisson_upper_tail(m1, n) + poisson_upper_tail(m2, n) > tail_tol) ++n;

    ScoreGrid g;
    g.max_goals = n;
    g.mass.resize(static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            g.mass[static_cast<std::size_t>(i) * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(j)] =
                std::exp(bivpois_log_pmf(p, i, j));
    g.truncation_deficit = std::max(0.0, 1.0 - g.total());
    return g;
}

/// Sums the grid into (home win, draw, away win), renormalized by grid mass.
inline Prediction outcome_probs_from_grid(const ScoreGrid& g) {
    if (g.truncation_deficit > 1e-6) throw Error("score grid truncation deficit too large");
    double win = 0.0, draw = 0.0, loss = 0.0;
    for (int i = 0; i <= g.max_goals; ++i) {
        for (int j = 0; j <= g.max_goals; ++j) {
            const double v = g.at(i, j);
            if (i > j) win += v;
            else if (i == j) draw += v;
            else loss += v;
        }
    }
    const double s = win + draw + loss;
    return {win / s, draw / s, loss / s};
}

// ---------------------------------------------------------------------------
// Fitting

struct PoissonBoundary {
    bool lambda3 = false;   // correlation parameter pinned at a bound (typically lambda3 -> 0)
    bool strengths = false; // some attack/defence/mu/gamma coordinate pinned
    bool any() const noexcept { return lambda3 || strengths; }
};

struct PoissonFit {
    TeamStrengths strengths;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
    PoissonBoundary boundary;
};

/// Log-likelihood over x = (mu, gamma, att_1..att_{T-1}, def_1..def_{T-1}
/// [, log lambda3]); the last team's att and def are minus the sum of the
/// others, so the zero-sum constraints hold exactly.
class PoissonLikelihood {
public:
    PoissonLikelihood(std::span<const MatchRecord> matches, bool correlated) : correlated_(correlated) {
        std::map<TeamId, std::size_t> idx;
        for (const auto& m : matches) {
            if (!m.played()) throw Error("poisson fit needs played matches");
            idx.emplace(m.home, 0);
            idx.emplace(m.away, 0);
        }
        std::size_t k = 0;
        for (auto& [t, i] : idx) {
            i = k++;
            teams_.push_back(t);
        }
        for (const auto& m : matches) rows_.push_back({idx[m.home], idx[m.away], *m.home_goals, *m.away_goals});
    }

    std::size_t team_count() const noexcept { return teams_.size(); }
    std::size_t dimension() const noexcept { return 2 + 2 * (teams_.size() - 1) + (correlated_ ? 1 : 0); }
    const std::vector<TeamId>& teams() const noexcept { return teams_; }
    bool correlated() const noexcept { return correlated_; }

    /// Deterministic start: mu = log of mean goals per side, everything else 0,
    /// lambda3 = 0.1 when correlated.
    std::vector<double> initial_point() const {
        std::vector<double> x(dimension(), 0.0);
        double goals = 0.0;
        for (const auto& r : rows_) goals += r.y1 + r.y2;
        const double mean = rows_.empty() ? 1.0 : goals / (2.0 * rows_.size());
        x[0] = std::log(std::max(mean, 0.05));
        if (correlated_) x.back() = std::log(0.1);
        return x;
    }

    double value(const std::vector<double>& x, std::vector<double>* grad = nullptr) const {
        const double lam3 = correlated_ ? std::exp(x.back()) : 0.0;
        if (grad) grad->assign(x.size(), 0.0);
        double ll = 0.0;
        for (const auto& r : rows_) {
            const double eta1 = x[0] + att(x, r.home) - def(x, r.away) + x[1];
            const double eta2 = x[0] + att(x, r.away) - def(x, r.home);
            const BivPoissonParams p{std::exp(eta1), std::exp(eta2), lam3};
            const double lp = bivpois_log_pmf(p, r.y1, r.y2);
            ll += lp;
            if (!grad) continue;
            // dP/dl1 = P(y1-1, y2) - P; dP/dl2 = P(y1, y2-1) - P; dP/dl3 = P(y1-1, y2-1) - P
            const double d1 = (r.y1 > 0 ? std::exp(bivpois_log_pmf(p, r.y1 - 1, r.y2) - lp) : 0.0) - 1.0;
            const double d2 = (r.y2 > 0 ? std::exp(bivpois_log_pmf(p, r.y1, r.y2 - 1) - lp) : 0.0) - 1.0;
            const double g1 = d1 * p.lambda1;  // d log P / d eta1
            const double g2 = d2 * p.lambda2;
            auto& g = *grad;
            g[0] += g1 + g2;
            g[1] += g1;
            add_att(g, r.home, g1);
            add_att(g, r.away, g2);
            add_def(g, r.away, -g1);
            add_def(g, r.home, -g2);
            if (correlated_) {
                const double d3 = (r.y1 > 0 && r.y2 > 0 ? std::exp(bivpois_log_pmf(p, r.y1 - 1, r.y2 - 1) - lp) : 0.0) - 1.0;
                g.back() += d3 * lam3;
            }
        }
        return ll;
    }

    TeamStrengths unpack(const std::vector<double>& x) const {
        TeamStrengths s;
        s.mu = x[0];
        s.gamma_home = x[1];
        for (std::size_t i = 0; i < teams_.size(); ++i) {
            s.att[teams_[i]] = att(x, i);
            s.def[teams_[i]] = def(x, i);
        }
        s.lambda3 = correlated_ ? std::exp(x.back()) : 0.0;
        return s;
    }

private:
    struct Row {
        std::size_t home;
        std::size_t away;
        int y1;
        int y2;
    };

    std::size_t last() const noexcept { return teams_.size() - 1; }
    std::size_t att_pos(std::size_t i) const noexcept { return 2 + i; }
    std::size_t def_pos(std::size_t i) const noexcept { return 2 + last() + i; }

    double att(const std::vector<double>& x, std::size_t i) const {
        if (i < last()) return x[att_pos(i)];
        double s = 0.0;
        for (std::size_t k = 0; k < last(); ++k) s += x[att_pos(k)];
        return -s;
    }
    double def(const std::vector<double>& x, std::size_t i) const {
        if (i < last()) return x[def_pos(i)];
        double s = 0.0;
        for (std::size_t k = 0; k < last(); ++k) s += x[def_pos(k)];
        return -s;
    }
    void add_att(std::vector<double>& g, std::size_t i, double v) const {
        if (i < last()) {
            g[att_pos(i)] += v;
        } else {
            for (std::size_t k = 0; k < last(); ++k) g[att_pos(k)] -= v;
        }
    }
    void add_def(std::vector<double>& g, std::size_t i, double v) const {
        if (i < last()) {
            g[def_pos(i)] += v;
        } else {
            for (std::size_t k = 0; k < last(); ++k) g[def_pos(k)] -= v;
        }
    }

    bool correlated_;
    std::vector<TeamId> teams_;
    std::vector<Row> rows_;
};

/// Maximum-likelihood fit. With `correlated` false lambda3 is fixed at 0
/// (independent Poisson scores).
inline PoissonFit poisson_fit(std::span<const MatchRecord> matches, bool correlated,
                              const OptimizerSettings& settings = {}) {
    if (matches.empty()) throw Error("poisson_fit needs at least one match");
    const PoissonLikelihood lik(matches, correlated);
    if (lik.team_count() < 2) throw Error("poisson_fit needs at least two teams");
    const auto res = minimize_bfgs(
        [&](const std::vector<double>& x, std::vector<double>& g) {
            const double v = lik.value(x, &g);
            for (double& gi : g) gi = -gi;
            return -v;
        },
        lik.initial_point(), settings);

    PoissonFit fit;
    fit.strengths = lik.unpack(res.x);
    fit.log_likelihood = -res.value;
    fit.iterations = res.iterations;
    fit.converged = res.converged;
    fit.gradient_norm = res.gradient_norm;
    const std::size_t n_strength = correlated ? res.x.size() - 1 : res.x.size();
    for (std::size_t i = 0; i < n_strength; ++i)
        if (res.at_bound[i]) fit.boundary.strengths = true;
    // lambda3 heading to zero stalls before reaching the box, so also flag a
    // negligible estimate.
    if (correlated && (res.at_bound.back() || fit.strengths.lambda3 < 1e-6)) fit.boundary.lambda3 = true;
    return fit;
}

// ---------------------------------------------------------------------------
// Rolling prediction

/// Which played matches feed a rolling fit.
struct TrainingWindow {
    struct CurrentSeason {};
    struct LastRounds {
        int rounds;
    };
    struct All {};
    std::variant<CurrentSeason, LastRounds, All> kind = CurrentSeason{};

    static TrainingWindow parse(std::string_view text) {
        const auto t = detail::trim(text);
        if (t == "season") return {CurrentSeason{}};
        if (t == "all") return {All{}};
        constexpr std::string_view prefix = "last_n_rounds:";
        if (t.substr(0, prefix.size()) == prefix) {
            const std::string digits(t.substr(prefix.size()));
            std::size_t pos = 0;
            int n = 0;
            try {
                n = std::stoi(digits, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos == 0 || pos != digits.size() || n < 1)
                throw Error("last_n_rounds needs a positive integer, got '" + digits + "'");
            return {LastRounds{n}};
        }
        throw Error("unknown training window '" + std::string(t) + "'");
    }

    std::string str() const {
        if (std::holds_alternative<CurrentSeason>(kind)) return "season";
        if (std::holds_alternative<All>(kind)) return "all";
        return "last_n_rounds:" + std::to_string(std::get<LastRounds>(kind).rounds);
    }

    /// Matches of `history` inside the window. A round is a distinct
    /// (season, matchday) pair, so last_n_rounds may reach into earlier seasons.
    std::vector<MatchRecord> select(const History& history) const {
        if (std::holds_alternative<CurrentSeason>(kind)) return history.current();
        auto all = history.all();
        if (std::holds_alternative<All>(kind)) return all;
        std::set<std::pair<int, int>> rounds;
        for (const auto& m : all) rounds.emplace(m.season, m.matchday);
        const auto n = static_cast<std::size_t>(std::get<LastRounds>(kind).rounds);
        if (rounds.size() <= n) return all;
        auto first_kept = rounds.begin();
        std::advance(first_kept, static_cast<std::ptrdiff_t>(rounds.size() - n));
        std::vector<MatchRecord> out;
        for (const auto& m : all)
            if (std::make_pair(m.season, m.matchday) >= *first_kept) out.push_back(m);
        return out;
    }
};

struct PoissonModelSettings {
    bool correlated = false;
    TrainingWindow window;
    double tail_tol = 1e-10;
    OptimizerSettings optimizer;
};

inline std::vector<std::optional<Prediction>> poisson_predict(const History& history,
                                                              std::span<const Fixture> fixtures,
                                                              const PoissonModelSettings& settings,
                                                              PoissonFit* report = nullptr) {
    const auto train = settings.window.select(history);
    const PoissonFit fit = poisson_fit(train, settings.correlated, settings.optimizer);
    std::vector<std::optional<Prediction>> out;
    for (const auto& f : fixtures) {
        if (f.matchday < history.cutoff_matchday() && f.season == history.season())
            throw Error("fixture precedes history cutoff");
        if (fit.strengths.att.count(f.home) && fit.strengths.att.count(f.away))
            out.push_back(outcome_probs_from_grid(score_grid(link_rates(fit.strengths, f.home, f.away), settings.tail_tol)));
        else
            out.push_back(std::nullopt);
    }
    if (report) *report = fit;
    return out;
}

struct PoissonRollingResult {
    std::vector<Fixture> fixtures;
    std::vector<std::optional<Prediction>> predictions;
    std::size_t training_matches = 0;
};

/// Predicts one matchday of `seasons[season_year]` from matches before it.
inline PoissonRollingResult poisson_rolling_predict(const std::vector<Season>& seasons, int season_year, int matchday,
                                                    const PoissonModelSettings& settings) {
    const auto history = History::before(seasons, season_year, matchday);
    PoissonRollingResult r;
    for (const auto& s : seasons)
        if (s.year() == season_year)
            for (const auto& m : s.matchday(matchday)) r.fixtures.push_back(m.fixture());
    r.training_matches = settings.window.select(history).size();
    r.predictions = poisson_predict(history, r.fixtures, settings);
    return r;
}

/// `team,att,def` rows followed by a `mu,gamma,lambda3` footer.
inline std::string poisson_strengths_csv(const TeamStrengths& s) {
    std::ostringstream os;
    os.precision(17);
    os << "team,att,def\n";
    for (const auto& [t, a] : s.att) os << detail::csv_quote(t.display()) << ',' << a << ',' << s.def.at(t) << '\n';
    os << "mu,gamma,lambda3\n" << s.mu << ',' << s.gamma_home << ',' << s.lambda3 << '\n';
    return os.str();
}

}  // namespace matchcast
