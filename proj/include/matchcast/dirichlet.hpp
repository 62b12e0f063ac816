#pragma once

// Multinomial-Dirichlet outcome prediction: conjugate updating, posterior
// predictive probabilities, linear opinion pooling, and the two pooled
// home/away predictors with grid cross-validation of (w, alpha).

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "matchcast/data.hpp"

namespace matchcast {

/// Concentration parameters for (win, draw, loss). Stored as a real-valued
/// base plus integer observation counts so that sequential conjugate updates
/// are exact regardless of how counts are batched.
class DirichletParams {
public:
    DirichletParams(double a1, double a2, double a3) : base_{a1, a2, a3} {
        for (double v : base_)
            if (!(v > 0.0)) throw Error("Dirichlet parameters must be positive");
    }

    static DirichletParams symmetric(double alpha) { return {alpha, alpha, alpha}; }
    static DirichletParams uniform() { return {1.0, 1.0, 1.0}; }

    double operator[](std::size_t i) const { return base_.at(i) + static_cast<double>(counts_.at(i)); }
    double sum() const noexcept {
        return (base_[0] + base_[1] + base_[2]) + static_cast<double>(counts_[0] + counts_[1] + counts_[2]);
    }
    std::array<double, 3> values() const { return {(*this)[0], (*this)[1], (*this)[2]}; }

    DirichletParams updated(const CountVector& c) const {
        if (c.wins < 0 || c.draws < 0 || c.losses < 0) throw Error("negative counts");
        DirichletParams out = *this;
        out.counts_[0] += c.wins;
        out.counts_[1] += c.draws;
        out.counts_[2] += c.losses;
        return out;
    }

    friend bool operator==(const DirichletParams& a, const DirichletParams& b) {
        return a.values() == b.values();
    }

private:
    std::array<double, 3> base_;
    std::array<long long, 3> counts_{0, 0, 0};
};

class PoolWeights {
public:
    explicit PoolWeights(double w_home) : w_(w_home) {
        if (!(w_home >= 0.0 && w_home <= 1.0)) throw Error("pool weight must lie in [0,1]");
    }
    double home() const noexcept { return w_; }
    double away() const noexcept { return 1.0 - w_; }

private:
    double w_;
};

struct MnDir2Config {
    double alpha = 1.0;
    double w = 0.5;

    MnDir2Config() = default;
    MnDir2Config(double alpha_, double w_) : alpha(alpha_), w(w_) {
        if (!(alpha > 0.0)) throw Error("alpha must be positive");
        (void)PoolWeights{w};
    }

    friend bool operator==(const MnDir2Config&, const MnDir2Config&) = default;
};

/// Candidate values for the cross-validated (w, alpha) search.
struct GridSpec {
    std::vector<double> w_points;
    std::vector<double> alpha_points;

    void validate() const {
        if (w_points.empty() || alpha_points.empty()) throw Error("empty grid");
        for (std::size_t i = 0; i < w_points.size(); ++i) {
            if (!(w_points[i] >= 0.0 && w_points[i] <= 1.0)) throw Error("grid weight outside [0,1]");
            if (i > 0 && !(w_points[i] > w_points[i - 1])) throw Error("grid weights not increasing");
        }
        for (std::size_t i = 0; i < alpha_points.size(); ++i) {
            if (!(alpha_points[i] > 0.0)) throw Error("grid alpha not positive");
            if (i > 0 && !(alpha_points[i] > alpha_points[i - 1])) throw Error("grid alphas not increasing");
        }
    }

    /// 20 weights k/19 on [0,1] and 20 alphas 0.001 + k * 19.999/19 on (0.001, 20].
    static GridSpec standard() {
        GridSpec g;
        for (int k = 0; k < 20; ++k) {
            g.w_points.push_back(k / 19.0);
            g.alpha_points.push_back(k == 19 ? 20.0 : 0.001 + k * (19.999 / 19.0));
        }
        return g;
    }
};

inline DirichletParams posterior(const DirichletParams& prior, const CountVector& counts) {
    return prior.updated(counts);
}

/// Posterior predictive probabilities: the Dirichlet mean a_i / sum(a).
inline Prediction predictive(const DirichletParams& post) {
    const double s = post.sum();
    const double p1 = post[0] / s;
    const double p2 = post[1] / s;
    return {p1, p2, 1.0 - p1 - p2};
}

/// Linear opinion pool of the home team's view and the away team's view. The
/// away view is expressed from the away team's perspective, so its win and
/// loss components swap before averaging.
inline Prediction pool(const Prediction& home_view, const Prediction& away_view_from_away,
                       PoolWeights weights) {
    const double w = weights.home();
    const double v = weights.away();
    const double p1 = w * home_view.home_win() + v * away_view_from_away.away_win();
    const double p2 = w * home_view.draw() + v * away_view_from_away.draw();
    const double p3 = w * home_view.away_win() + v * away_view_from_away.home_win();
    return {p1, p2, p3};
}

inline Prediction mn_dir2_predict(const CountVector& home_record, const CountVector& away_record,
                                  const MnDir2Config& cfg) {
    const auto prior = DirichletParams::symmetric(cfg.alpha);
    return pool(predictive(posterior(prior, home_record)), predictive(posterior(prior, away_record)),
                PoolWeights{cfg.w});
}

/// Equal-weight pool; `home_record` is the home team's record at home and
/// `away_record` the away team's record away.
inline Prediction mn_dir1_predict(const CountVector& home_record, const CountVector& away_record,
                                  const DirichletParams& prior = DirichletParams::uniform()) {
    return pool(predictive(posterior(prior, home_record)), predictive(posterior(prior, away_record)),
                PoolWeights{0.5});
}

// ---------------------------------------------------------------------------
// Cross-validation

/// One first-half match with the venue counts available before its matchday.
struct PrequentialCase {
    CountVector home_record;
    CountVector away_record;
    Outcome outcome;
};

/// For each played match (in matchday order) the home team's home record and
/// the away team's away record accumulated over strictly earlier matchdays of
/// the given list.
inline std::vector<PrequentialCase> prequential_cases(std::span<const MatchRecord> matches) {
    std::vector<const MatchRecord*> order;
    for (const auto& m : matches) {
        if (!m.played()) throw Error("cross-validation needs played matches");
        order.push_back(&m);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const MatchRecord* a, const MatchRecord* b) { return a->matchday < b->matchday; });

    std::map<TeamId, CountVector> home, away;
    std::vector<PrequentialCase> cases;
    cases.reserve(order.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && order[j]->matchday == order[i]->matchday) ++j;
        for (std::size_t k = i; k < j; ++k) {
            const auto& m = *order[k];
            cases.push_back({home[m.home], away[m.away], outcome_of(m)});
        }
        for (std::size_t k = i; k < j; ++k) {
            const auto& m = *order[k];
            const Outcome o = outcome_of(m);
            home[m.home].add(o);
            away[m.away].add(swap_perspective(o));
        }
        i = j;
    }
    return cases;
}

namespace detail {
inline double brier_of(Outcome x, const Prediction& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = (i == index_of(x) ? 1.0 : 0.0) - p[i];
        s += d * d;
    }
    return s;
}
}  // namespace detail

struct CvResult {
    MnDir2Config best;
    double best_score = 0.0;
    /// Total Brier score per grid point, indexed [alpha][w].
    std::vector<std::vector<double>> scores;
};

/// Scores every (w, alpha) grid point by total prequential Brier score over the
/// given matches and picks the minimum. Scores within 1e-12 relative of the
/// minimum count as tied; ties go to the smallest alpha, then smallest w.
inline CvResult cv_select_detailed(std::span<const MatchRecord> first_half, const GridSpec& grid) {
    grid.validate();
    if (first_half.empty()) throw Error("cross-validation needs at least one match");
    const auto cases = prequential_cases(first_half);

    CvResult r;
    r.scores.assign(grid.alpha_points.size(), std::vector<double>(grid.w_points.size(), 0.0));
    double min_score = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < grid.alpha_points.size(); ++a) {
        for (std::size_t w = 0; w < grid.w_points.size(); ++w) {
            const MnDir2Config cfg{grid.alpha_points[a], grid.w_points[w]};
            double total = 0.0;
            for (const auto& c : cases)
                total += detail::brier_of(c.outcome, mn_dir2_predict(c.home_record, c.away_record, cfg));
            r.scores[a][w] = total;
            min_score = std::min(min_score, total);
        }
    }
    const double cutoff = min_score + 1e-12 * std::max(1.0, std::abs(min_score));
    for (std::size_t a = 0; a < grid.alpha_points.size(); ++a) {
        for (std::size_t w = 0; w < grid.w_points.size(); ++w) {
            if (r.scores[a][w] <= cutoff) {
                r.best = MnDir2Config{grid.alpha_points[a], grid.w_points[w]};
                r.best_score = r.scores[a][w];
                return r;
            }
        }
    }
    return r;  // unreachable: min_score is attained
}

inline MnDir2Config cv_select(std::span<const MatchRecord> first_half, const GridSpec& grid = GridSpec::standard()) {
    return cv_select_detailed(first_half, grid).best;
}

}  // namespace matchcast
