#pragma once

// Box-constrained quasi-Newton (BFGS) minimizer with backtracking line search,
// used for the maximum-likelihood fits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace matchcast {

struct OptimizerSettings {
    double tol = 1e-8;     // projected gradient norm
    int max_iter = 500;
    double lower = -30.0;  // box applied to every coordinate
    double upper = 30.0;
};

struct OptimResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
    std::vector<bool> at_bound;
};

/// Objective returning f(x) and writing its gradient into `grad`.
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

namespace detail {

inline double projected_norm(const std::vector<double>& x, const std::vector<double>& g,
                             const OptimizerSettings& s) {
    double n = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double gi = g[i];
        if (x[i] <= s.lower && gi > 0.0) gi = 0.0;
        if (x[i] >= s.upper && gi < 0.0) gi = 0.0;
        n += gi * gi;
    }
    return std::sqrt(n);
}

/// Inverse of the Hessian built from central differences of the gradient, or
/// false when that Hessian is not positive definite.
inline bool fd_inverse_hessian(const Objective& f, const std::vector<double>& x, const OptimizerSettings& s,
                               std::vector<double>& inv) {
    const std::size_t n = x.size();
    std::vector<double> hess(n * n), gp(n), gm(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
        auto xp = x, xm = x;
        xp[i] = std::min(x[i] + h, s.upper);
        xm[i] = std::max(x[i] - h, s.lower);
        const double fp = f(xp, gp);
        const double fm = f(xm, gm);
        if (!std::isfinite(fp) || !std::isfinite(fm)) return false;
        for (std::size_t j = 0; j < n; ++j) hess[i * n + j] = (gp[j] - gm[j]) / (xp[i] - xm[i]);
    }
    // Symmetrize, then Cholesky.
    std::vector<double> l(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double v = 0.5 * (hess[i * n + j] + hess[j * n + i]);
            for (std::size_t k = 0; k < j; ++k) v -= l[i * n + k] * l[j * n + k];
            if (i == j) {
                if (!(v > 0.0)) return false;
                l[i * n + i] = std::sqrt(v);
            } else {
                l[i * n + j] = v / l[j * n + j];
            }
        }
    }
    // Columns of the inverse by forward and back substitution.
    inv.assign(n * n, 0.0);
    std::vector<double> col(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double v = i == c ? 1.0 : 0.0;
            for (std::size_t k = 0; k < i; ++k) v -= l[i * n + k] * col[k];
            col[i] = v / l[i * n + i];
        }
        for (std::size_t i = n; i-- > 0;) {
            double v = col[i];
            for (std::size_t k = i + 1; k < n; ++k) v -= l[k * n + i] * col[k];
            col[i] = v / l[i * n + i];
        }
        for (std::size_t i = 0; i < n; ++i) inv[i * n + c] = col[i];
    }
    return true;
}

}  // namespace detail

/// Minimizes `f` over the box [lower, upper]^n. Coordinates pinned at a bound
/// with the gradient pushing outward are frozen for the search direction.
inline OptimResult minimize_bfgs(const Objective& f, std::vector<double> x, const OptimizerSettings& s) {
    const std::size_t n = x.size();
    for (double& xi : x) xi = std::clamp(xi, s.lower, s.upper);

    std::vector<double> g(n), g_new(n), x_new(n), d(n);
    double fx = f(x, g);

    // Inverse Hessian approximation, row-major.
    std::vector<double> H(n * n, 0.0);
    auto reset_h = [&] {
        std::fill(H.begin(), H.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
    };
    reset_h();
    bool fresh_h = true;
    bool newton_tried = false;

    OptimResult r;
    int it = 0;
    for (; it < s.max_iter; ++it) {
        const double pg = detail::projected_norm(x, g, s);
        if (pg <= s.tol) break;

        std::vector<bool> frozen(n, false);
        for (std::size_t i = 0; i < n; ++i)
            frozen[i] = (x[i] <= s.lower && g[i] > 0.0) || (x[i] >= s.upper && g[i] < 0.0);

        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = 0.0;
            if (frozen[i]) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (!frozen[j]) d[i] -= H[i * n + j] * g[j];
            slope += d[i] * g[i];
        }
        if (!(slope < 0.0)) {
            reset_h();
            fresh_h = true;
            slope = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                d[i] = frozen[i] ? 0.0 : -g[i];
                slope += d[i] * g[i];
            }
        }

        // Cap the first step of a fresh approximation so it stays on the scale of x.
        double t = 1.0;
        if (fresh_h) {
            double dn = 0.0;
            for (double di : d) dn = std::max(dn, std::abs(di));
            if (dn > 1.0) t = 1.0 / dn;
        }

        bool accepted = false;
        double f_new = fx;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = std::clamp(x[i] + t * d[i], s.lower, s.upper);
            if (x_new == x) break;  // step below the resolution of x
            f_new = f(x_new, g_new);
            double decrease = 0.0;
            for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (x_new[i] - x[i]);
            if (std::isfinite(f_new) && decrease < 0.0 && f_new <= fx + 1e-4 * decrease) {
                accepted = true;
                break;
            }
            // Near the optimum Armijo can fail on rounding alone (a likelihood
            // summed over thousands of terms is only good to ~1e-13 relative);
            // accept a step that keeps f flat to that level and shrinks the gradient.
            if (std::isfinite(f_new) && f_new <= fx + 1e-12 * std::max(1.0, std::abs(fx)) &&
                detail::projected_norm(x_new, g_new, s) < pg) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // Stalled: try a finite-difference Newton matrix once per stall,
            // then steepest descent, then give up.
            if (!newton_tried && detail::fd_inverse_hessian(f, x, s, H)) {
                newton_tried = true;
                fresh_h = false;
                continue;
            }
            if (fresh_h) break;
            reset_h();
            fresh_h = true;
            continue;
        }
        newton_tried = false;

        std::vector<double> sv(n), yv(n);
        double sy = 0.0, ss = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sv[i] = x_new[i] - x[i];
            yv[i] = g_new[i] - g[i];
            sy += sv[i] * yv[i];
            ss += sv[i] * sv[i];
            yy += yv[i] * yv[i];
        }
        x.swap(x_new);
        g.swap(g_new);
        fx = f_new;

        // Curvature test relative to the step and gradient-change sizes.
        if (sy > 1e-10 * std::sqrt(ss * yy) && yy > 0.0) {
            if (fresh_h) {
                // Scale the identity before the first update.
                const double scale = sy / yy;
                for (std::size_t i = 0; i < n; ++i) H[i * n + i] = scale;
            }
            std::vector<double> hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) hy[i] += H[i * n + j] * yv[j];
            double yhy = 0.0;
            for (std::size_t i = 0; i < n; ++i) yhy += yv[i] * hy[i];
            const double rho = 1.0 / sy;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    H[i * n + j] += rho * ((1.0 + rho * yhy) * sv[i] * sv[j] - hy[i] * sv[j] - sv[i] * hy[j]);
            fresh_h = false;
        }
    }

    r.gradient_norm = detail::projected_norm(x, g, s);
    r.converged = r.gradient_norm <= s.tol;
    r.iterations = it;
    r.value = fx;
    r.at_bound.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.at_bound[i] = x[i] <= s.lower || x[i] >= s.upper;
    r.x = std::move(x);
    return r;
}

}  // namespace matchcast
