#pragma once

// Davidson's tie extension of the Bradley-Terry model with a multiplicative
// home advantage: outcome probabilities, log-likelihood with analytic
// gradient, maximum-likelihood fitting, and rolling per-matchday prediction.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "matchcast/data.hpp"
#include "matchcast/optim.hpp"

namespace matchcast {

struct BTParams {
    std::map<TeamId, double> worth;
    double gamma = 1.0;  // home advantage
    double nu = 1.0;     // tie propensity

    double worth_of(const TeamId& t) const {
        const auto it = worth.find(t);
        if (it == worth.end()) throw Error("unknown team: " + t.display());
        return it->second;
    }

    /// Checks positivity and, optionally, that worths sum to one.
    void validate(bool require_normalized = true) const {
        double s = 0.0;
        for (const auto& [t, w] : worth) {
            if (!(w > 0.0)) throw Error("worth of " + t.display() + " must be positive");
            s += w;
        }
        if (!(gamma > 0.0)) throw Error("gamma must be positive");
        if (!(nu >= 0.0)) throw Error("nu must be non-negative");
        if (require_normalized && std::abs(s - 1.0) > 1e-9) throw Error("worths must sum to 1");
    }
};

struct BTBoundary {
    bool worth = false;  // some team's worth diverges (all wins or all losses, or clamped)
    bool gamma = false;
    bool nu = false;     // no draws (nu -> 0) or only draws (nu -> inf)
    std::vector<TeamId> divergent_teams;

    bool any() const noexcept { return worth || gamma || nu; }
};

struct FitReport {
    BTParams params;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
    BTBoundary boundary;
};

/// Davidson probabilities for home team i against visitor j:
/// win gamma*pi_i / D, draw nu*sqrt(pi_i*pi_j) / D, with
/// D = gamma*pi_i + pi_j + nu*sqrt(pi_i*pi_j).
inline Prediction bt_outcome_probs(const BTParams& params, const TeamId& home, const TeamId& away) {
    const double pi = params.worth_of(home);
    const double pj = params.worth_of(away);
    const double a = params.gamma * pi;
    const double c = params.nu * std::sqrt(pi * pj);
    const double denom = a + pj + c;
    const double win = a / denom;
    const double draw = c / denom;
    return {win, draw, std::max(0.0, 1.0 - win - draw)};
}

inline double bt_log_likelihood(const BTParams& params, std::span<const MatchRecord> matches) {
    double ll = 0.0;
    for (const auto& m : matches) {
        const double p = bt_outcome_probs(params, m.home, m.away)[outcome_of(m)];
        if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
        ll += std::log(p);
    }
    return ll;
}

/// Log-likelihood over the unconstrained parameterization
/// x = (log-worth of teams 2..T relative to team 1, log gamma, log nu).
class DavidsonLikelihood {
public:
    explicit DavidsonLikelihood(std::span<const MatchRecord> matches) {
        std::map<TeamId, std::size_t> idx;
        for (const auto& m : matches) {
            idx.emplace(m.home, 0);
            idx.emplace(m.away, 0);
        }
        std::size_t k = 0;
        for (auto& [t, i] : idx) {
            i = k++;
            teams_.push_back(t);
        }
        for (const auto& m : matches) rows_.push_back({idx[m.home], idx[m.away], outcome_of(m)});
    }

    std::size_t dimension() const noexcept { return teams_.empty() ? 0 : teams_.size() + 1; }
    const std::vector<TeamId>& teams() const noexcept { return teams_; }

    /// Log-likelihood at x; fills `grad` when non-null.
    double value(const std::vector<double>& x, std::vector<double>* grad = nullptr) const {
        const std::size_t t = teams_.size();
        const double log_gamma = x[t - 1];
        const double log_nu = x[t];
        if (grad) grad->assign(x.size(), 0.0);
        double ll = 0.0;
        for (const auto& r : rows_) {
            const double bi = beta(x, r.home);
            const double bj = beta(x, r.away);
            const std::array<double, 3> terms{log_gamma + bi, log_nu + 0.5 * (bi + bj), bj};
            const double m = std::max({terms[0], terms[1], terms[2]});
            const double log_d =
                m + std::log(std::exp(terms[0] - m) + std::exp(terms[1] - m) + std::exp(terms[2] - m));
            // terms are ordered (win, draw, loss)
            const std::size_t obs = index_of(r.outcome);
            ll += terms[obs] - log_d;
            if (!grad) continue;
            std::array<double, 3> e{};
            for (std::size_t q = 0; q < 3; ++q) e[q] = (q == obs ? 1.0 : 0.0) - std::exp(terms[q] - log_d);
            auto& g = *grad;
            if (r.home > 0) g[r.home - 1] += e[0] + 0.5 * e[1];
            if (r.away > 0) g[r.away - 1] += e[2] + 0.5 * e[1];
            g[t - 1] += e[0];
            g[t] += e[1];
        }
        return ll;
    }

    BTParams unpack(const std::vector<double>& x) const {
        const std::size_t t = teams_.size();
        BTParams p;
        double mx = 0.0;
        for (std::size_t i = 0; i < t; ++i) mx = std::max(mx, beta(x, i));
        double s = 0.0;
        for (std::size_t i = 0; i < t; ++i) s += std::exp(beta(x, i) - mx);
        for (std::size_t i = 0; i < t; ++i) p.worth[teams_[i]] = std::exp(beta(x, i) - mx) / s;
        p.gamma = std::exp(x[t - 1]);
        p.nu = std::exp(x[t]);
        return p;
    }

private:
    struct Row {
        std::size_t home;
        std::size_t away;
        Outcome outcome;
    };

    static double beta(const std::vector<double>& x, std::size_t team) { return team == 0 ? 0.0 : x[team - 1]; }

    std::vector<TeamId> teams_;
    std::vector<Row> rows_;
};

/// Maximum-likelihood fit from equal worths, gamma = 1, nu = 1.
inline FitReport bt_fit(std::span<const MatchRecord> matches, const OptimizerSettings& settings = {}) {
    for (const auto& m : matches)
        if (!m.played()) throw Error("bt_fit needs played matches");
    if (matches.empty()) throw Error("bt_fit needs at least one match");
    const DavidsonLikelihood lik(matches);
    const auto res = minimize_bfgs(
        [&](const std::vector<double>& x, std::vector<double>& g) {
            const double v = lik.value(x, &g);
            for (double& gi : g) gi = -gi;
            return -v;
        },
        std::vector<double>(lik.dimension(), 0.0), settings);

    FitReport rep;
    rep.params = lik.unpack(res.x);
    rep.log_likelihood = -res.value;
    rep.iterations = res.iterations;
    rep.converged = res.converged;
    rep.gradient_norm = res.gradient_norm;

    const std::size_t t = lik.teams().size();
    for (std::size_t i = 0; i + 2 < res.x.size(); ++i)
        if (res.at_bound[i]) rep.boundary.worth = true;
    rep.boundary.gamma = res.at_bound[t - 1];
    rep.boundary.nu = res.at_bound[t];

    std::map<TeamId, std::array<int, 3>> record;  // wins, draws, losses (any venue)
    int draws = 0;
    for (const auto& m : matches) {
        const Outcome o = outcome_of(m);
        ++record[m.home][index_of(o)];
        ++record[m.away][index_of(swap_perspective(o))];
        if (o == Outcome::Draw) ++draws;
    }
    if (draws == 0 || draws == static_cast<int>(matches.size())) rep.boundary.nu = true;
    for (const auto& [team, wdl] : record) {
        const bool all_wins = wdl[1] == 0 && wdl[2] == 0;
        const bool all_losses = wdl[0] == 0 && wdl[1] == 0;
        if (all_wins || all_losses) {
            rep.boundary.worth = true;
            rep.boundary.divergent_teams.push_back(team);
        }
    }
    return rep;
}

/// Fits on the current season's played matches before the history cutoff and
/// predicts each fixture. Fixtures involving a team absent from the fit get
/// no prediction.
inline std::vector<std::optional<Prediction>> bt_predict(const History& history, std::span<const Fixture> fixtures,
                                                         const OptimizerSettings& settings = {},
                                                         FitReport* report = nullptr) {
    const auto& train = history.current();
    const FitReport fit = bt_fit(train, settings);
    std::vector<std::optional<Prediction>> out;
    for (const auto& f : fixtures) {
        if (f.matchday < history.cutoff_matchday()) throw Error("fixture precedes history cutoff");
        if (fit.params.worth.count(f.home) && fit.params.worth.count(f.away))
            out.push_back(bt_outcome_probs(fit.params, f.home, f.away));
        else
            out.push_back(std::nullopt);
    }
    if (report) *report = fit;
    return out;
}

struct FixturePrediction {
    Fixture fixture;
    std::optional<Prediction> prediction;
};

inline std::vector<FixturePrediction> bt_rolling_predict(const Season& season, int matchday,
                                                         const OptimizerSettings& settings = {}) {
    const auto history = History::before(season, matchday);
    std::vector<Fixture> fixtures;
    for (const auto& m : season.matchday(matchday)) fixtures.push_back(m.fixture());
    const auto preds = bt_predict(history, fixtures, settings);
    std::vector<FixturePrediction> out;
    for (std::size_t i = 0; i < fixtures.size(); ++i) out.push_back({fixtures[i], preds[i]});
    return out;
}

/// `team,worth` rows followed by a `gamma,nu` footer.
inline std::string bt_params_csv(const BTParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "team,worth\n";
    for (const auto& [t, w] : p.worth) os << detail::csv_quote(t.display()) << ',' << w << '\n';
    os << "gamma,nu\n" << p.gamma << ',' << p.nu << '\n';
    return os.str();
}

}  // namespace matchcast
