#pragma once

// Closed-form maximum-likelihood estimates for the tiered review model.
//
// For one stratum with counts e_0..e_T and sample sizes n_1..n_T:
//   Lambda_hat_t = (1/m) prod_{s<=t} e_s / prod_{1<=s<=t} n_s
//   lambda_hat_t = Lambda_hat_t - Lambda_hat_{t+1},  lambda_hat_T = Lambda_hat_T
//   pi_hat_t     = n_t / e_{t-1}
// and theta_hat = sum_h lambda_hat_{hT}. Once e_t = 0 every later
// Lambda_hat is zero.

#include <algorithm>
#include <array>
#include <span>
#include <string>
#include <vector>

#include "tiered_review/errors.hpp"
#include "tiered_review/model.hpp"

namespace tiered_review {

struct StratumEstimate {
    std::vector<double> cumulative_rates;  // Lambda_hat_0 .. Lambda_hat_T
    std::vector<double> rates;             // lambda_hat_0 .. lambda_hat_T
    std::vector<double> sampling_rates;    // pi_hat_1 .. pi_hat_T
    double sampling_product = 1.0;         // pi_hat_h = prod_t pi_hat_t
    double weight = 1.0;                   // w_h = 1 / (m pi_hat_h)

    double tp_rate() const { return rates.back(); }
};

struct RateEstimate {
    double mileage = 1.0;
    std::vector<StratumEstimate> strata;
    double theta = 0.0;

    double max_weight() const {
        double w = 0.0;
        for (const auto& s : strata) w = std::max(w, s.weight);
        return w;
    }
};

namespace detail {

inline void require_valid(const ObservedStratum& stratum) {
    if (auto v = validate_observed(stratum); !v) throw InvalidInput(v.diagnostic);
}

inline void require_mileage(double mileage) {
    if (!(mileage > 0.0) || !std::isfinite(mileage)) {
        throw InvalidInput("mileage must be positive and finite");
    }
}

// Unnormalized cumulative estimates m * Lambda_hat_t.
inline std::vector<double> cumulative_counts(const ObservedStratum& stratum) {
    const std::size_t T = stratum.tiers();
    std::vector<double> out(T + 1, 0.0);
    out[0] = double(stratum.e[0]);
    for (std::size_t t = 1; t <= T; ++t) {
        if (stratum.e[t - 1] == 0) break;
        // Ratio first: e_t / n_t <= 1 keeps the sequence non-increasing in
        // floating point.
        out[t] = out[t - 1] * (double(stratum.e[t]) / double(stratum.n[t - 1]));
    }
    return out;
}

}  // namespace detail

inline std::vector<double> estimate_cumulative_rates(const ObservedStratum& stratum,
                                                     double mileage) {
    detail::require_valid(stratum);
    detail::require_mileage(mileage);
    auto out = detail::cumulative_counts(stratum);
    for (double& v : out) v /= mileage;
    return out;
}

inline std::vector<double> estimate_rates(const ObservedStratum& stratum, double mileage) {
    const auto cumulative = estimate_cumulative_rates(stratum, mileage);
    std::vector<double> out(cumulative.size());
    for (std::size_t t = 0; t + 1 < cumulative.size(); ++t) {
        out[t] = std::max(0.0, cumulative[t] - cumulative[t + 1]);
    }
    out.back() = cumulative.back();
    return out;
}

/// Empirical sampling rates n_t / e_{t-1}; tiers never reached are set to 1.
inline std::vector<double> estimate_sampling_rates(const ObservedStratum& stratum) {
    detail::require_valid(stratum);
    const std::size_t T = stratum.tiers();
    std::vector<double> out(T, 1.0);
    for (std::size_t t = 1; t <= T; ++t) {
        if (stratum.e[t - 1] == 0) break;
        out[t - 1] = double(stratum.n[t - 1]) / double(stratum.e[t - 1]);
    }
    return out;
}

inline StratumEstimate estimate_stratum(const ObservedStratum& stratum, double mileage) {
    StratumEstimate out;
    out.cumulative_rates = estimate_cumulative_rates(stratum, mileage);
    out.rates = estimate_rates(stratum, mileage);
    out.sampling_rates = estimate_sampling_rates(stratum);
    for (double p : out.sampling_rates) out.sampling_product *= p;
    out.weight = 1.0 / (mileage * out.sampling_product);
    return out;
}

inline RateEstimate estimate_theta(const Dataset& data) {
    data.config.validate();
    RateEstimate out;
    out.mileage = data.config.mileage;
    out.strata.reserve(data.strata.size());
    for (std::size_t h = 0; h < data.strata.size(); ++h) {
        try {
            out.strata.push_back(estimate_stratum(data.strata[h], data.config.mileage));
        } catch (const InvalidInput& err) {
            throw InvalidInput("stratum " + std::to_string(h) + ": " + err.what());
        }
        out.theta += out.strata.back().tp_rate();
    }
    return out;
}

/// Residuals (left minus right side) of the EM fixed-point system for a
/// T = 2 stratum at mileage 1, with the E-step written in terms of the
/// unnormalized denominators lambda_0 + lambda_1 + lambda_2 and
/// lambda_1 + lambda_2. The residuals sum to (sum lambda) - e_0.
inline std::array<double, 3> em_fixed_point_residual_T2(const ObservedStratum& stratum,
                                                        std::span<const double> lambdas) {
    detail::require_valid(stratum);
    if (stratum.tiers() != 2) throw InvalidParameter("EM residual oracle requires T = 2");
    if (lambdas.size() != 3) throw InvalidParameter("EM residual oracle takes three rates");
    if (stratum.e[0] < 1 || stratum.e[1] < 1) {
        throw InvalidParameter("EM residual oracle requires e_0 >= 1 and e_1 >= 1");
    }
    const double l0 = lambdas[0], l1 = lambdas[1], l2 = lambdas[2];
    const double tail = l1 + l2;
    const double total = l0 + tail;
    if (!(tail > 0.0) || !(total > 0.0)) {
        throw InvalidParameter("EM residual oracle requires lambda_1 + lambda_2 > 0");
    }
    const double e0 = double(stratum.e[0]), e1 = double(stratum.e[1]), e2 = double(stratum.e[2]);
    const double n1 = double(stratum.n[0]), n2 = double(stratum.n[1]);

    const double unreviewed0 = e0 - n1;  // left in E_0 without tier-1 review
    const double unreviewed1 = e1 - n2;  // left in E_1 without tier-2 review
    return {
        l0 - (unreviewed0 * l0 / total + (n1 - e1)),
        l1 - (unreviewed0 * l1 / total + unreviewed1 * l1 / tail + (n2 - e2)),
        l2 - (unreviewed0 * l2 / total + unreviewed1 * l2 / tail + e2),
    };
}

}  // namespace tiered_review
