#pragma once

// Confidence intervals for the aggregate true-positive rate theta.
//
//   bootstrap  parametric bootstrap from the plug-in model
//   wald       theta_hat +- z sqrt((1/m) sum_h lambda_hat_hT / pi_hat_h)
//   gamma      Gamma method for a weighted sum of independent Poissons,
//              theta_hat = sum_h w_h e_hT with w_h = 1 / (m pi_hat_h)

#include <cmath>
#include <string>
#include <vector>

#include "tiered_review/distributions.hpp"
#include "tiered_review/errors.hpp"
#include "tiered_review/estimator.hpp"
#include "tiered_review/generator.hpp"
#include "tiered_review/model.hpp"
#include "tiered_review/parallel.hpp"
#include "tiered_review/rng.hpp"

namespace tiered_review {

inline constexpr int kDefaultBootstrapReplicates = 2000;

namespace detail {

inline void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw InvalidParameter("confidence level must lie in (0, 1), got " + std::to_string(level));
    }
}

}  // namespace detail

/// Scenario whose parameters are the point estimates fitted to `data`.
inline Scenario plug_in_scenario(const RateEstimate& estimate, const ReviewConfig& config) {
    Scenario out{config, {}};
    out.strata.reserve(estimate.strata.size());
    for (const auto& s : estimate.strata) out.strata.push_back({s.rates, s.sampling_rates});
    return out;
}

struct BootstrapOptions {
    int replicates = kDefaultBootstrapReplicates;
    unsigned threads = 1;
};

/// Replicate b draws its dataset from rng.child(b).
inline std::vector<double> bootstrap_replicates(const Dataset& data, const RateEstimate& estimate,
                                                const RngStream& rng, BootstrapOptions opts = {}) {
    const Scenario plug_in = plug_in_scenario(estimate, data.config);
    std::vector<double> thetas(static_cast<std::size_t>(opts.replicates));
    parallel_for(thetas.size(), opts.threads, [&](std::size_t b) {
        thetas[b] = estimate_theta(generate_observed(plug_in, rng.child(b))).theta;
    });
    return thetas;
}

inline IntervalResult ci_bootstrap(const Dataset& data, double level, const RngStream& rng,
                                   BootstrapOptions opts = {}) {
    detail::check_level(level);
    if (opts.replicates < 100) {
        throw InvalidParameter("bootstrap needs at least 100 replicates, got " +
                               std::to_string(opts.replicates));
    }
    validate_dataset(data);
    const auto estimate = estimate_theta(data);
    // Early-terminated replicates contribute theta = 0 and are kept.
    const auto thetas = bootstrap_replicates(data, estimate, rng, opts);
    const double alpha = 1.0 - level;
    return {IntervalMethod::bootstrap, level, empirical_quantile(thetas, alpha / 2),
            empirical_quantile(thetas, 1.0 - alpha / 2)};
}

/// Plug-in asymptotic variance of theta_hat, (1/m) sum_h lambda_hat_hT / pi_hat_h.
inline double wald_variance(const RateEstimate& estimate) {
    double acc = 0.0;
    for (const auto& s : estimate.strata) acc += s.tp_rate() / s.sampling_product;
    return acc / estimate.mileage;
}

/// The lower bound is left unclamped unless clamp_at_zero is set.
inline IntervalResult ci_wald(const RateEstimate& estimate, double level,
                              bool clamp_at_zero = false) {
    detail::check_level(level);
    const double alpha = 1.0 - level;
    const double half = normal_quantile(1.0 - alpha / 2) * std::sqrt(wald_variance(estimate));
    double lower = estimate.theta - half;
    if (clamp_at_zero) lower = std::max(0.0, lower);
    return {IntervalMethod::wald, level, lower, estimate.theta + half};
}

inline IntervalResult ci_gamma_wsip(const RateEstimate& estimate, const Dataset& data,
                                    double level) {
    detail::check_level(level);
    if (estimate.strata.size() != data.strata.size()) {
        throw InvalidInput("estimate and dataset disagree on the number of strata");
    }
    const double alpha = 1.0 - level;
    double variance = 0.0;
    for (std::size_t h = 0; h < data.strata.size(); ++h) {
        const double w = estimate.strata[h].weight;
        variance += w * w * double(data.strata[h].e.back());
    }
    const double w_max = estimate.max_weight();

    // A Gamma law with zero mean is undefined; the lower bound is 0 there.
    const double lower =
        estimate.theta > 0.0 ? gamma_quantile(alpha / 2, estimate.theta, variance) : 0.0;
    const double upper =
        gamma_quantile(1.0 - alpha / 2, estimate.theta + w_max, variance + w_max * w_max);
    return {IntervalMethod::gamma_wsip, level, lower, upper};
}

}  // namespace tiered_review
