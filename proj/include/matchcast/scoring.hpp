#pragma once

// Proper scoring rules, top-choice errors, entropy, calibration curves and the
// per-team chi-square goodness-of-fit statistic.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "matchcast/data.hpp"

namespace matchcast {

/// Squared Euclidean distance between p and the vertex of the realized outcome.
inline double brier(Outcome x, const Prediction& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = (i == index_of(x) ? 1.0 : 0.0) - p[i];
        s += d * d;
    }
    return s;
}

/// -ln p_x; +infinity when the realized outcome had probability zero.
inline double log_score(Outcome x, const Prediction& p) {
    const double px = p[x];
    if (px <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(px);
}

inline double spherical(Outcome x, const Prediction& p) {
    const auto& v = p.values();
    return -p[x] / std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

struct TopChoice {
    bool error = false;
    bool tied = false;  // the maximum is shared by several outcomes
};

/// Argmax check. With a tied maximum the match counts as correct only when the
/// realized outcome is among the tied outcomes.
inline TopChoice top_choice(Outcome x, const Prediction& p) {
    const auto& v = p.values();
    const double mx = std::max({v[0], v[1], v[2]});
    int n_max = 0;
    for (double vi : v)
        if (vi == mx) ++n_max;
    return {p[x] != mx, n_max > 1};
}

struct ForecastOutcome {
    Fixture fixture;
    Prediction prediction;
    Outcome outcome;
};

struct ErrorProportion {
    double proportion = 0.0;
    std::size_t tied = 0;
};

inline ErrorProportion proportion_of_errors(std::span<const ForecastOutcome> scored) {
    if (scored.empty()) throw Error("proportion_of_errors needs at least one prediction");
    ErrorProportion r;
    std::size_t errors = 0;
    for (const auto& s : scored) {
        const auto tc = top_choice(s.outcome, s.prediction);
        errors += tc.error ? 1 : 0;
        r.tied += tc.tied ? 1 : 0;
    }
    r.proportion = static_cast<double>(errors) / static_cast<double>(scored.size());
    return r;
}

/// Shannon entropy in nats with 0 ln 0 = 0.
inline double entropy(const Prediction& p) {
    double h = 0.0;
    for (double v : p.values())
        if (v > 0.0) h -= v * std::log(v);
    return std::clamp(h, 0.0, std::log(3.0));
}

inline std::optional<double> cond_home_win_given_no_draw(const Prediction& p) {
    const double s = p.home_win() + p.away_win();
    if (!(s > 0.0)) return std::nullopt;
    return p.home_win() / s;
}

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    double mean_assigned = 0.0;
    double observed = 0.0;
    double se = 0.0;
};

struct CalibrationPoint {
    double assigned = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double lower = 0.0;  // estimate +/- 1.96 se
    double upper = 0.0;
    double identity_lower = 0.0;  // identity +/- 1.96 se under perfect calibration
    double identity_upper = 0.0;
    bool within_identity_band = false;
};

struct CalibrationTable {
    std::vector<CalibrationBin> bins;
    std::vector<CalibrationPoint> curve;
    double bandwidth = 0.0;
    std::size_t pairs = 0;

    double fraction_within_band() const {
        if (curve.empty()) return 0.0;
        std::size_t k = 0;
        for (const auto& c : curve) k += c.within_identity_band ? 1 : 0;
        return static_cast<double>(k) / static_cast<double>(curve.size());
    }
};

struct CalibrationOptions {
    int bins = 10;
    /// Curve evaluation points; empty means 0.02, 0.04, ..., 0.98.
    std::vector<double> grid;
    /// Candidate bandwidths for leave-one-out selection; empty means 15
    /// geometric steps from 0.02 to 0.5.
    std::vector<double> bandwidths;
};

/// A (probability, indicator) pair: an assigned probability and whether that
/// event happened.
struct ProbabilityEvent {
    double p;
    double hit;
};

/// Three pairs per match, one per outcome.
inline std::vector<ProbabilityEvent> unroll(std::span<const ForecastOutcome> scored) {
    std::vector<ProbabilityEvent> out;
    out.reserve(3 * scored.size());
    for (const auto& s : scored)
        for (std::size_t i = 0; i < 3; ++i) out.push_back({s.prediction[i], i == index_of(s.outcome) ? 1.0 : 0.0});
    return out;
}

namespace detail {

/// Gaussian-kernel local-linear regression over x-sorted data, truncated at 5
/// bandwidths.
class LocalLinear {
public:
    explicit LocalLinear(std::vector<ProbabilityEvent> data) : d_(std::move(data)) {
        std::sort(d_.begin(), d_.end(), [](const auto& a, const auto& b) { return a.p < b.p || (a.p == b.p && a.hit < b.hit); });
    }

    struct Sums {
        double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
    };

    Sums sums(double x, double h) const {
        Sums s;
        const auto lo = std::lower_bound(d_.begin(), d_.end(), x - 5 * h, [](const auto& e, double v) { return e.p < v; });
        for (auto it = lo; it != d_.end() && it->p <= x + 5 * h; ++it) {
            const double u = it->p - x;
            const double k = std::exp(-0.5 * (u / h) * (u / h));
            s.s0 += k;
            s.s1 += k * u;
            s.s2 += k * u * u;
            s.t0 += k * it->hit;
            s.t1 += k * u * it->hit;
        }
        return s;
    }

    static double fit(const Sums& s) {
        const double den = s.s0 * s.s2 - s.s1 * s.s1;
        if (den > 1e-12 * s.s0 * s.s2 && den > 0.0) return (s.s2 * s.t0 - s.s1 * s.t1) / den;
        return s.s0 > 0.0 ? s.t0 / s.s0 : std::numeric_limits<double>::quiet_NaN();
    }

    /// Sum of squared equivalent-kernel weights at x.
    double weight_norm2(double x, double h, const Sums& s) const {
        const double den = s.s0 * s.s2 - s.s1 * s.s1;
        const bool linear = den > 1e-12 * s.s0 * s.s2 && den > 0.0;
        double acc = 0.0;
        const auto lo = std::lower_bound(d_.begin(), d_.end(), x - 5 * h, [](const auto& e, double v) { return e.p < v; });
        for (auto it = lo; it != d_.end() && it->p <= x + 5 * h; ++it) {
            const double u = it->p - x;
            const double k = std::exp(-0.5 * (u / h) * (u / h));
            const double l = linear ? k * (s.s2 - u * s.s1) / den : k / s.s0;
            acc += l * l;
        }
        return acc;
    }

    double loo_error(double h) const {
        double err = 0.0;
        std::size_t n = 0;
        for (const auto& e : d_) {
            Sums s = sums(e.p, h);
            // Remove the point itself (u = 0, kernel weight 1).
            s.s0 -= 1.0;
            s.t0 -= e.hit;
            const double m = fit(s);
            if (!std::isfinite(m)) continue;
            const double r = e.hit - std::clamp(m, 0.0, 1.0);
            err += r * r;
            ++n;
        }
        return n ? err / static_cast<double>(n) : std::numeric_limits<double>::infinity();
    }

private:
    std::vector<ProbabilityEvent> d_;
};

}  // namespace detail

/// Estimates P(event | assigned probability) two ways: equal-width bins and a
/// local-linear smoother with leave-one-out bandwidth. Each curve point carries
/// a 95% band around the identity computed from the smoother's weights under
/// perfect calibration.
inline CalibrationTable calibration_curve(std::span<const ProbabilityEvent> pairs, const CalibrationOptions& opts = {}) {
    if (pairs.size() < 30) throw Error("calibration needs at least 30 probability/event pairs");
    if (opts.bins < 1) throw Error("calibration needs at least one bin");
    CalibrationTable t;
    t.pairs = pairs.size();

    t.bins.resize(static_cast<std::size_t>(opts.bins));
    for (int b = 0; b < opts.bins; ++b) {
        t.bins[static_cast<std::size_t>(b)].lower = static_cast<double>(b) / opts.bins;
        t.bins[static_cast<std::size_t>(b)].upper = static_cast<double>(b + 1) / opts.bins;
    }
    for (const auto& e : pairs) {
        const auto b = static_cast<std::size_t>(std::clamp(static_cast<int>(e.p * opts.bins), 0, opts.bins - 1));
        auto& bin = t.bins[b];
        ++bin.count;
        bin.mean_assigned += e.p;
        bin.observed += e.hit;
    }
    for (auto& bin : t.bins) {
        if (bin.count == 0) continue;
        const double n = static_cast<double>(bin.count);
        bin.mean_assigned /= n;
        bin.observed /= n;
        bin.se = std::sqrt(bin.observed * (1.0 - bin.observed) / n);
    }

    std::vector<double> grid = opts.grid;
    if (grid.empty())
        for (int k = 1; k < 50; ++k) grid.push_back(k / 50.0);
    std::vector<double> hs = opts.bandwidths;
    if (hs.empty())
        for (int k = 0; k < 15; ++k) hs.push_back(0.02 * std::pow(25.0, k / 14.0));

    const detail::LocalLinear ll(std::vector<ProbabilityEvent>(pairs.begin(), pairs.end()));
    double best_h = hs.front();
    double best_err = std::numeric_limits<double>::infinity();
    for (double h : hs) {
        const double err = ll.loo_error(h);
        if (err < best_err) {
            best_err = err;
            best_h = h;
        }
    }
    t.bandwidth = best_h;

    for (double x : grid) {
        const auto s = ll.sums(x, best_h);
        CalibrationPoint c;
        c.assigned = x;
        const double m = detail::LocalLinear::fit(s);
        if (!std::isfinite(m) || s.s0 < 1e-8) continue;
        const double w2 = ll.weight_norm2(x, best_h, s);
        c.estimate = std::clamp(m, 0.0, 1.0);
        c.se = std::sqrt(c.estimate * (1.0 - c.estimate) * w2);
        c.lower = c.estimate - 1.96 * c.se;
        c.upper = c.estimate + 1.96 * c.se;
        const double identity_se = std::sqrt(x * (1.0 - x) * w2);
        c.identity_lower = x - 1.96 * identity_se;
        c.identity_upper = x + 1.96 * identity_se;
        c.within_identity_band = m >= c.identity_lower && m <= c.identity_upper;
        t.curve.push_back(c);
    }
    return t;
}

inline CalibrationTable calibration_curve(std::span<const ForecastOutcome> scored, const CalibrationOptions& opts = {}) {
    const auto pairs = unroll(scored);
    return calibration_curve(std::span<const ProbabilityEvent>(pairs), opts);
}

// ---------------------------------------------------------------------------
// Goodness of fit

struct GofResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    std::size_t excluded_terms = 0;  // zero expected wins
};

/// Upper tail of the chi-square distribution.
inline double chi_square_upper_tail(double statistic, int df) {
    if (df <= 0) return 1.0;
    if (statistic <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * statistic);
}

/// For every (season, team) and venue, compares expected wins (sum of the
/// team's predicted win probabilities) with observed wins:
/// sum (e - o)^2 / e over home and away terms. df is the number of terms kept,
/// 2 x teams when none is dropped.
inline GofResult chi_square_gof(std::span<const ForecastOutcome> scored) {
    struct Term {
        double expected = 0.0;
        double observed = 0.0;
    };
    std::map<std::tuple<int, TeamId, int>, Term> terms;  // (season, team, 0 home / 1 away)
    for (const auto& s : scored) {
        auto& home = terms[{s.fixture.season, s.fixture.home, 0}];
        home.expected += s.prediction.home_win();
        home.observed += s.outcome == Outcome::HomeWin ? 1.0 : 0.0;
        auto& away = terms[{s.fixture.season, s.fixture.away, 1}];
        away.expected += s.prediction.away_win();
        away.observed += s.outcome == Outcome::AwayWin ? 1.0 : 0.0;
    }
    GofResult r;
    for (const auto& [key, term] : terms) {
        if (!(term.expected > 0.0)) {
            ++r.excluded_terms;
            continue;
        }
        const double d = term.expected - term.observed;
        r.statistic += d * d / term.expected;
        ++r.df;
    }
    r.p_value = chi_square_upper_tail(r.statistic, r.df);
    return r;
}

}  // namespace matchcast
