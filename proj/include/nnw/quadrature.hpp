#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string_view>

namespace nnw {

enum class QuadratureStatus { converged, diverged, not_converged };

[[nodiscard]] constexpr std::string_view to_string(QuadratureStatus s) noexcept {
    switch (s) {
        case QuadratureStatus::converged: return "converged";
        case QuadratureStatus::diverged: return "diverged";
        case QuadratureStatus::not_converged: return "not_converged";
    }
    return "?";
}

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_levels = 12;
    /// Divergence is declared when the estimate grows by more than this factor over two levels.
    double divergence_growth = 10.0;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    QuadratureStatus status = QuadratureStatus::converged;
    int levels = 0;
};

/// Closed interval; either end may be infinite.
struct Interval {
    double lo;
    double hi;

    [[nodiscard]] double length() const noexcept { return hi - lo; }
    [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

namespace detail {

// Tanh-sinh rule on [-1, 1]. The callback receives (u, 1 + u, 1 - u) with both
// complements computed without cancellation, so endpoint singularities and
// infinite-range maps stay accurate right up to the ends.
template <typename G>
QuadratureResult tanh_sinh(G&& g, const QuadratureOptions& opt) {
    constexpr double half_pi = std::numbers::pi / 2.0;
    constexpr double t_max = 6.5;

    // Reference-coordinate distance below which a node counts as deep in an endpoint.
    // Integrable singularities leave almost no mass there; x^-1 leaves a third of it.
    constexpr double deep_edge = 1e-200;
    constexpr double deep_share = 1e-3;

    bool overflow = false;
    double deep = 0.0;
    auto term = [&](double t) -> double {
        const double s = half_pi * std::sinh(t);
        const double cs = std::cosh(s);
        if (!std::isfinite(cs)) return 0.0;
        const double w = half_pi * std::cosh(t) / (cs * cs);
        if (w == 0.0) return 0.0;
        // right complement for t >= 0: 1 - tanh(s) = 2 / (1 + e^{2s})
        const double a = std::abs(s);
        const double comp = 2.0 / (1.0 + std::exp(2.0 * a));
        double acc = 0.0;
        for (int sign : {1, -1}) {
            if (t == 0.0 && sign == -1) break;
            const double dr = sign > 0 ? comp : 2.0 - comp;
            const double dl = sign > 0 ? 2.0 - comp : comp;
            if (dr <= 0.0 || dl <= 0.0) continue;
            const double u = sign > 0 ? 1.0 - comp : comp - 1.0;
            const double v = g(u, dl, dr);
            if (std::isnan(v)) continue;
            const double c = w * v;
            if (!std::isfinite(c)) {
                overflow = true;
                return std::numeric_limits<double>::infinity();
            }
            acc += c;
            if (std::min(dl, dr) < deep_edge) deep += c;
        }
        return acc;
    };

    QuadratureResult res;
    double h = 1.0;
    double sum = 0.0;
    for (double t = 0.0; t <= t_max; t += 1.0) sum += term(t);
    double prev = sum * h;
    double prev2 = std::numeric_limits<double>::quiet_NaN();
    if (overflow) {
        res.value = std::numeric_limits<double>::infinity();
        res.status = QuadratureStatus::diverged;
        return res;
    }

    for (int level = 1; level <= opt.max_levels; ++level) {
        h /= 2.0;
        for (double t = h; t <= t_max; t += 2.0 * h) sum += term(t);
        const double est = sum * h;
        res.levels = level;
        if (overflow || !std::isfinite(est)) {
            res.value = std::numeric_limits<double>::infinity();
            res.status = QuadratureStatus::diverged;
            return res;
        }
        const double diff = std::abs(est - prev);
        // coarse levels may under-resolve a peak, so growth is only judged once h <= 1/16
        if (level >= 4 && std::abs(est) > 1e3 * opt.abs_tol && std::abs(est) > std::abs(prev) &&
            std::abs(est) > opt.divergence_growth * std::abs(prev2)) {
            res.value = std::numeric_limits<double>::infinity();
            res.status = QuadratureStatus::diverged;
            return res;
        }
        if (level >= 3 && diff <= std::max(opt.abs_tol, opt.rel_tol * std::abs(est))) {
            if (std::abs(deep * h) > deep_share * std::max(std::abs(est), opt.abs_tol)) break;
            res.value = est;
            res.error_estimate = diff;
            res.status = QuadratureStatus::converged;
            return res;
        }
        prev2 = prev;
        prev = est;
    }
    if (std::abs(deep * h) > deep_share * std::max(std::abs(prev), opt.abs_tol)) {
        res.value = std::numeric_limits<double>::infinity();
        res.status = QuadratureStatus::diverged;
        return res;
    }
    res.value = prev;
    res.error_estimate = std::numeric_limits<double>::infinity();
    res.status = QuadratureStatus::not_converged;
    return res;
}

}  // namespace detail

/// Integrates f over [a, b]; either end may be infinite. Integrable endpoint
/// singularities are handled by the double-exponential rule.
template <typename F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
    if (std::isnan(a) || std::isnan(b) || !(a < b)) {
        if (a == b) return {};
        throw std::invalid_argument("integrate: require a < b");
    }
    const bool lo_inf = std::isinf(a);
    const bool hi_inf = std::isinf(b);
    if (!lo_inf && !hi_inf) {
        const double half = (b - a) / 2.0;
        return detail::tanh_sinh(
            [&](double, double dl, double dr) {
                const double x = dl < dr ? a + half * dl : b - half * dr;
                return f(x) * half;
            },
            opt);
    }
    if (lo_inf && hi_inf) {
        return detail::tanh_sinh(
            [&](double u, double dl, double dr) {
                const double den = dl * dr;
                const double x = u / den;
                const double fx = f(x);
                if (fx == 0.0) return 0.0;
                return fx * (1.0 + u * u) / (den * den);
            },
            opt);
    }
    if (hi_inf) {
        return detail::tanh_sinh(
            [&](double, double dl, double dr) {
                const double fx = f(a + dl / dr);
                if (fx == 0.0) return 0.0;
                return fx * 2.0 / (dr * dr);
            },
            opt);
    }
    return detail::tanh_sinh(
        [&](double, double dl, double dr) {
            const double fx = f(b - dr / dl);
            if (fx == 0.0) return 0.0;
            return fx * 2.0 / (dl * dl);
        },
        opt);
}

/// Sum of integrals over disjoint pieces. Any diverged piece makes the total diverge.
template <typename F>
QuadratureResult integrate_pieces(F&& f, std::span<const Interval> pieces, const QuadratureOptions& opt = {}) {
    QuadratureResult total;
    for (const Interval& piece : pieces) {
        const QuadratureResult r = integrate(f, piece.lo, piece.hi, opt);
        total.levels = std::max(total.levels, r.levels);
        if (r.status == QuadratureStatus::diverged) {
            total.value = std::numeric_limits<double>::infinity();
            total.status = QuadratureStatus::diverged;
            return total;
        }
        if (r.status == QuadratureStatus::not_converged) total.status = QuadratureStatus::not_converged;
        total.value += r.value;
        total.error_estimate += r.error_estimate;
    }
    return total;
}

}  // namespace nnw
