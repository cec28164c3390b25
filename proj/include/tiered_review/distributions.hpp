#pragma once

// Exact samplers and quantile functions used by the review model.
//
// Poisson and binomial variates come from Boost.Random (inversion for small
// means, PTRS / BTRD rejection otherwise); both are exact in law at every
// parameter value. Hypergeometric variates are drawn by inversion started
// at the mode. Gamma and normal quantiles delegate to Boost.Math.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "tiered_review/errors.hpp"
#include "tiered_review/rng.hpp"

namespace tiered_review {

using Count = std::int64_t;

inline Count sample_poisson(double rate, RngStream& rng) {
    if (!std::isfinite(rate) || rate < 0.0) {
        throw InvalidParameter("sample_poisson: rate must be finite and non-negative, got " +
                               std::to_string(rate));
    }
    if (rate == 0.0) return 0;
    boost::random::poisson_distribution<Count, double> dist(rate);
    return dist(rng);
}

inline Count sample_binomial(Count n, double p, RngStream& rng) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidParameter("sample_binomial: p must lie in [0, 1], got " + std::to_string(p));
    }
    if (n < 0) throw InvalidParameter("sample_binomial: n must be non-negative");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    boost::random::binomial_distribution<Count, double> dist(n, p);
    return dist(rng);
}

/// Number of marked items among `draws` taken without replacement from a
/// pool of `pool` items of which `marked` are marked.
inline Count sample_hypergeometric(Count pool, Count marked, Count draws, RngStream& rng) {
    if (pool < 0 || marked < 0 || marked > pool || draws < 0 || draws > pool) {
        throw InvalidParameter("sample_hypergeometric: need 0 <= marked, draws <= pool");
    }
    const Count lo = std::max<Count>(0, draws - (pool - marked));
    const Count hi = std::min(draws, marked);
    if (lo == hi) return lo;

    const Count unmarked = pool - marked;
    auto log_choose = [](Count a, Count b) {
        return std::lgamma(double(a) + 1) - std::lgamma(double(b) + 1) -
               std::lgamma(double(a - b) + 1);
    };
    // pmf(k+1) / pmf(k)
    auto up_ratio = [&](Count k) {
        return double(marked - k) * double(draws - k) /
               (double(k + 1) * double(unmarked - draws + k + 1));
    };

    const Count mode = std::clamp<Count>(
        static_cast<Count>(std::floor(double(draws + 1) * double(marked + 1) / double(pool + 2))),
        lo, hi);
    const double p_mode = std::exp(log_choose(marked, mode) + log_choose(unmarked, draws - mode) -
                                   log_choose(pool, draws));

    double u = rng.uniform01();
    if (u < p_mode) return mode;
    u -= p_mode;

    Count down = mode, up = mode;
    double p_down = p_mode, p_up = p_mode;
    while (down > lo || up < hi) {
        if (up < hi) {
            p_up *= up_ratio(up);
            ++up;
            if (u < p_up) return up;
            u -= p_up;
        }
        if (down > lo) {
            p_down /= up_ratio(down - 1);
            --down;
            if (u < p_down) return down;
            u -= p_down;
        }
    }
    // Only reachable through accumulated rounding in the tail sums.
    return mode;
}

/// Multivariate hypergeometric draw by sequential conditioning: class k is
/// split off the pool remaining after classes 0..k-1.
inline std::vector<Count> sample_mv_hypergeometric(std::span<const Count> class_counts,
                                                   Count n_draw, RngStream& rng) {
    Count total = 0;
    for (Count c : class_counts) {
        if (c < 0) throw InvalidParameter("sample_mv_hypergeometric: negative class count");
        total += c;
    }
    if (n_draw < 0 || n_draw > total) {
        throw InvalidParameter("sample_mv_hypergeometric: n_draw " + std::to_string(n_draw) +
                               " exceeds pool size " + std::to_string(total));
    }
    std::vector<Count> out(class_counts.size(), 0);
    Count remaining_pool = total;
    Count remaining_draws = n_draw;
    for (std::size_t k = 0; k < class_counts.size() && remaining_draws > 0; ++k) {
        if (k + 1 == class_counts.size()) {
            out[k] = remaining_draws;
            break;
        }
        out[k] = sample_hypergeometric(remaining_pool, class_counts[k], remaining_draws, rng);
        remaining_pool -= class_counts[k];
        remaining_draws -= out[k];
    }
    return out;
}

inline double sample_uniform(double lo, double hi, RngStream& rng) {
    return lo + (hi - lo) * rng.uniform01();
}

inline double sample_exponential(double mean, RngStream& rng) {
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        throw InvalidParameter("sample_exponential: mean must be positive and finite");
    }
    return -mean * std::log1p(-rng.uniform01());
}

namespace detail {

inline void check_gamma_moments(double mean, double variance, const char* who) {
    if (!(mean > 0.0) || !(variance > 0.0) || !std::isfinite(mean) || !std::isfinite(variance)) {
        throw InvalidParameter(std::string(who) + ": mean and variance must be positive, got mean=" +
                               std::to_string(mean) + " variance=" + std::to_string(variance));
    }
}

}  // namespace detail

/// Quantile of the Gamma law with the given mean and variance
/// (shape = mean^2 / variance, scale = variance / mean).
inline double gamma_quantile(double p, double mean, double variance) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidParameter("gamma_quantile: p must lie in (0, 1), got " + std::to_string(p));
    }
    detail::check_gamma_moments(mean, variance, "gamma_quantile");
    const double shape = mean * mean / variance;
    const double scale = variance / mean;
    return boost::math::gamma_p_inv(shape, p) * scale;
}

/// CDF of the Gamma law with the given mean and variance.
inline double gamma_cdf(double x, double mean, double variance) {
    detail::check_gamma_moments(mean, variance, "gamma_cdf");
    if (x <= 0.0) return 0.0;
    const double shape = mean * mean / variance;
    const double scale = variance / mean;
    return boost::math::gamma_p(shape, x / scale);
}

/// Standard normal inverse CDF.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidParameter("normal_quantile: p must lie in (0, 1), got " + std::to_string(p));
    }
    return -M_SQRT2 * boost::math::erfc_inv(2.0 * p);
}

/// Sample quantile with linear interpolation between order statistics at
/// 1-based position 1 + p (n - 1).
inline double empirical_quantile(std::span<const double> values, double p) {
    if (values.empty()) throw InvalidParameter("empirical_quantile: empty input");
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidParameter("empirical_quantile: p must lie in [0, 1]");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = p * double(sorted.size() - 1);
    const auto below = static_cast<std::size_t>(std::floor(h));
    if (below + 1 >= sorted.size()) return sorted.back();
    const double frac = h - double(below);
    return sorted[below] + frac * (sorted[below + 1] - sorted[below]);
}

}  // namespace tiered_review
