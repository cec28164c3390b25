#pragma once

// Simulation of the tiered partial-review process.
//
// Draw order for one stratum (fixed for reproducibility):
//   1. T+1 Poisson draws x_{t0}, t = 0..T;
//   2. per reached tier t: one binomial draw for the sample size, then one
//      multivariate hypergeometric split of E_{t-1} into the reviewed set.

#include <algorithm>
#include <utility>
#include <vector>

#include "tiered_review/distributions.hpp"
#include "tiered_review/model.hpp"
#include "tiered_review/rng.hpp"

namespace tiered_review {

struct GeneratedStratum {
    LatentTable latent;
    ObservedStratum observed;
};

struct GeneratedDataset {
    std::vector<LatentTable> latent;
    Dataset observed;
};

inline GeneratedStratum generate_stratum(const StratumParams& params, double mileage,
                                         RngStream& rng) {
    const std::size_t T = params.tiers();
    GeneratedStratum out{LatentTable(T), ObservedStratum{std::vector<Count>(T + 1, 0),
                                                         std::vector<Count>(T, 0)}};
    auto& x = out.latent;
    auto& obs = out.observed;

    for (std::size_t t = 0; t <= T; ++t) {
        x.at(t, 0) = sample_poisson(mileage * params.lambdas[t], rng);
        obs.e[0] += x.at(t, 0);
    }

    std::vector<Count> pool;
    pool.reserve(T + 1);
    for (std::size_t t = 1; t <= T; ++t) {
        const Count escalated = obs.e[t - 1];
        if (escalated == 0) break;  // early termination; trailing entries stay zero

        const Count n_t = std::max<Count>(1, sample_binomial(escalated, params.pis[t - 1], rng));
        obs.n[t - 1] = n_t;

        // Classes present in E_{t-1}: FP-t (row t-1), FP-(t+1) .. FP-T, TP.
        pool.clear();
        for (std::size_t r = t - 1; r <= T; ++r) pool.push_back(x.at(r, t - 1));
        const auto reviewed = sample_mv_hypergeometric(pool, n_t, rng);

        // FP-t events are rejected; everything else drawn is escalated.
        for (std::size_t r = t; r <= T; ++r) {
            x.at(r, t) = reviewed[r - (t - 1)];
            obs.e[t] += x.at(r, t);
        }
    }
    return out;
}

/// Runs generate_stratum for every stratum h on sub-stream rng.child(h).
inline GeneratedDataset generate_dataset(const Scenario& scenario, const RngStream& rng) {
    GeneratedDataset out;
    out.observed.config = scenario.config;
    out.latent.reserve(scenario.strata.size());
    out.observed.strata.reserve(scenario.strata.size());
    for (std::size_t h = 0; h < scenario.strata.size(); ++h) {
        RngStream stream = rng.child(h);
        auto g = generate_stratum(scenario.strata[h], scenario.config.mileage, stream);
        out.latent.push_back(std::move(g.latent));
        out.observed.strata.push_back(std::move(g.observed));
    }
    return out;
}

/// Observed counts only; skips keeping the latent tables.
inline Dataset generate_observed(const Scenario& scenario, const RngStream& rng) {
    Dataset out;
    out.config = scenario.config;
    out.strata.reserve(scenario.strata.size());
    for (std::size_t h = 0; h < scenario.strata.size(); ++h) {
        RngStream stream = rng.child(h);
        out.strata.push_back(
            generate_stratum(scenario.strata[h], scenario.config.mileage, stream).observed);
    }
    return out;
}

}  // namespace tiered_review
