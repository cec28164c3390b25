#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "test_support.hpp"
#include "tiered_review/estimator.hpp"
#include "tiered_review/generator.hpp"
#include "tiered_review/study.hpp"

using namespace tiered_review;
using tiered_review::testing::Moments;

namespace {

const ObservedStratum kPartial{{6, 3, 2, 1}, {3, 2, 1}};
const ObservedStratum kComplete{{5, 3, 2, 2}, {5, 3, 2}};
const ObservedStratum kTerminated{{5, 0, 0, 0}, {2, 0, 0}};

void expect_sequence(const std::vector<double>& got, const std::vector<double>& want) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12) << "index " << i;
}

}  // namespace

TEST(CumulativeRates, ProductFormula) {
    expect_sequence(estimate_cumulative_rates(kPartial, 1.0), {6, 6, 6, 6});
    expect_sequence(estimate_cumulative_rates(kComplete, 1.0), {5, 3, 2, 2});
    expect_sequence(estimate_cumulative_rates(kTerminated, 1.0), {5, 0, 0, 0});
}

TEST(Rates, DifferencesOfCumulativeRates) {
    expect_sequence(estimate_rates(kPartial, 1.0), {0, 0, 0, 6});
    expect_sequence(estimate_rates(kComplete, 1.0), {2, 1, 0, 2});
    expect_sequence(estimate_rates(kTerminated, 1.0), {5, 0, 0, 0});
}

TEST(SamplingRates, EmpiricalRatios) {
    expect_sequence(estimate_sampling_rates(kPartial), {0.5, 2.0 / 3.0, 0.5});
    expect_sequence(estimate_sampling_rates(kComplete), {1, 1, 1});
    expect_sequence(estimate_sampling_rates(kTerminated), {0.4, 1, 1});
}

TEST(Estimator, RejectsInvalidStrata) {
    const ObservedStratum bad{{4, 3, 1}, {5, 2}};
    EXPECT_THROW(estimate_cumulative_rates(bad, 1.0), InvalidInput);
    EXPECT_THROW(estimate_sampling_rates(bad), InvalidInput);
    EXPECT_THROW(estimate_cumulative_rates(kPartial, 0.0), InvalidInput);

    const Dataset d{{1.0, 2, 3}, {kPartial, {{6, 3, 2, 1}, {3, 4, 1}}}};
    try {
        estimate_theta(d);
        FAIL() << "expected InvalidInput";
    } catch (const InvalidInput& err) {
        EXPECT_NE(std::string(err.what()).find("stratum 1"), std::string::npos) << err.what();
    }
}

TEST(EstimateTheta, AdditiveOverStrata) {
    const Dataset d{{1.0, 2, 3}, {kPartial, kPartial}};
    const auto est = estimate_theta(d);
    EXPECT_DOUBLE_EQ(est.theta, 12.0);
    ASSERT_EQ(est.strata.size(), 2u);
    EXPECT_DOUBLE_EQ(est.strata[0].sampling_product, 0.5 * (2.0 / 3.0) * 0.5);
    EXPECT_DOUBLE_EQ(est.strata[0].weight, 6.0);
}

TEST(EstimateTheta, EmptyData) {
    const ObservedStratum empty{{0, 0, 0, 0}, {0, 0, 0}};
    const auto est = estimate_theta({{1.0, 3, 3}, {empty, empty, empty}});
    EXPECT_EQ(est.theta, 0.0);
    for (const auto& s : est.strata) {
        EXPECT_EQ(s.sampling_product, 1.0);
        EXPECT_EQ(s.weight, 1.0);
    }
}

TEST(EstimateTheta, MileageScaling) {
    RngStream rng(31);
    for (int i = 0; i < 200; ++i) {
        Dataset d = generate_observed(scenario_rare(0.4), rng.child(i));
        const auto unit = estimate_theta(d);
        for (double m : {2.0, 0.37, 1000.0}) {
            d.config.mileage = m;
            const auto scaled = estimate_theta(d);
            for (std::size_t h = 0; h < d.strata.size(); ++h) {
                for (std::size_t t = 0; t < 4; ++t) {
                    ASSERT_EQ(scaled.strata[h].cumulative_rates[t],
                              unit.strata[h].cumulative_rates[t] / m);
                }
            }
            if (m == 2.0) EXPECT_NEAR(scaled.theta, unit.theta / 2, 1e-12 * unit.theta);
        }
    }
}

TEST(EstimateTheta, PropertiesOnSimulatedData) {
    RngStream rng(32);
    for (int i = 0; i < 5000; ++i) {
        RngStream params = rng.child(2 * i);
        const Scenario s = scenario_comprehensive(params);
        const Dataset d = generate_observed(s, rng.child(2 * i + 1));
        const auto est = estimate_theta(d);
        ASSERT_GE(est.theta, 0.0);
        double weighted = 0.0;
        for (std::size_t h = 0; h < d.strata.size(); ++h) {
            const auto& se = est.strata[h];
            for (std::size_t t = 1; t < se.cumulative_rates.size(); ++t) {
                ASSERT_LE(se.cumulative_rates[t], se.cumulative_rates[t - 1]);
            }
            double sum = 0.0;
            for (double r : se.rates) {
                ASSERT_GE(r, 0.0);
                sum += r;
            }
            ASSERT_NEAR(sum, double(d.strata[h].e[0]), 1e-9 * (1 + sum));
            for (double p : se.sampling_rates) {
                ASSERT_GT(p, 0.0);
                ASSERT_LE(p, 1.0);
            }
            weighted += se.weight * double(d.strata[h].e.back());
        }
        ASSERT_NEAR(est.theta, weighted, 1e-12 * (1 + est.theta));
    }
}

TEST(EstimateTheta, UnbiasedOnRareScenario) {
    const Scenario s = scenario_rare(0.3);
    constexpr int reps = 100000;
    const RngStream root(20240607);
    Moments theta;
    std::vector<std::array<Moments, 4>> cumulative(5);
    for (int r = 0; r < reps; ++r) {
        const auto est = estimate_theta(generate_observed(s, root.child(r)));
        theta.add(est.theta);
        for (std::size_t h = 0; h < 5; ++h) {
            for (std::size_t t = 0; t < 4; ++t) cumulative[h][t].add(est.strata[h].cumulative_rates[t]);
        }
    }
    EXPECT_NEAR(theta.mean, 11.0, 3.0 * theta.standard_error());
    for (std::size_t h = 0; h < 5; ++h) {
        for (std::size_t t = 0; t < 4; ++t) {
            EXPECT_NEAR(cumulative[h][t].mean, s.strata[h].cumulative_rate(t),
                        3.0 * cumulative[h][t].standard_error())
                << "h=" << h << " t=" << t;
        }
    }
}

TEST(EmResidual, VanishesAtClosedFormEstimate) {
    const ObservedStratum obs{{6, 3, 2}, {3, 2}};
    const auto mle = estimate_rates(obs, 1.0);
    expect_sequence(mle, {0, 0, 6});
    for (double r : em_fixed_point_residual_T2(obs, mle)) EXPECT_LT(std::abs(r), 1e-10);
}

TEST(EmResidual, RejectsNonFixedPoint) {
    const ObservedStratum obs{{6, 3, 2}, {3, 2}};
    const std::vector<double> wrong{6, 0, 0.0001};
    const auto r = em_fixed_point_residual_T2(obs, wrong);
    EXPECT_GT(std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])}), 0.1);
}

TEST(EmResidual, ComponentsSumToTotalMinusCandidates) {
    RngStream rng(40);
    const ObservedStratum obs{{17, 9, 4}, {12, 6}};
    for (int i = 0; i < 1000; ++i) {
        const std::vector<double> l{sample_uniform(0, 20, rng), sample_uniform(0.01, 20, rng),
                                    sample_uniform(0, 20, rng)};
        const auto r = em_fixed_point_residual_T2(obs, l);
        ASSERT_NEAR(r[0] + r[1] + r[2], l[0] + l[1] + l[2] - 17.0, 1e-10);
    }
}

TEST(EmResidual, GuardsPreconditions) {
    const ObservedStratum obs{{6, 3, 2}, {3, 2}};
    EXPECT_THROW(em_fixed_point_residual_T2(obs, std::vector<double>{6, 0, 0}), InvalidParameter);
    EXPECT_THROW(em_fixed_point_residual_T2({{6, 3, 2, 1}, {3, 2, 1}}, std::vector<double>{1, 1, 1}),
                 InvalidParameter);
    EXPECT_THROW(em_fixed_point_residual_T2({{6, 0, 0}, {3, 0}}, std::vector<double>{1, 1, 1}),
                 InvalidParameter);
}

TEST(EmResidual, ClosedFormIsTheFixedPointOnRandomData) {
    RngStream rng(41);
    int checked = 0;
    for (int i = 0; checked < 1000; ++i) {
        RngStream sub = rng.child(i);
        const StratumParams p{{sample_uniform(0, 30, sub), sample_uniform(0, 30, sub),
                               sample_uniform(0.1, 30, sub)},
                              {sample_uniform(0.05, 1, sub), sample_uniform(0.05, 1, sub)}};
        const auto obs = generate_stratum(p, 1.0, sub).observed;
        if (obs.e[0] < 1 || obs.e[1] < 1) continue;
        ++checked;
        const auto mle = estimate_rates(obs, 1.0);
        for (double r : em_fixed_point_residual_T2(obs, mle)) ASSERT_LT(std::abs(r), 1e-10);

        const double scale = mle[0] + mle[1] + mle[2];
        for (std::size_t k = 0; k < 3; ++k) {
            for (double sign : {-1.0, 1.0}) {
                auto moved = mle;
                // Zero components are shifted by 10% of the total instead.
                moved[k] += sign * 0.1 * (mle[k] > 0 ? mle[k] : scale);
                if (moved[k] < 0 || moved[1] + moved[2] <= 0) continue;
                const auto r = em_fixed_point_residual_T2(obs, moved);
                ASSERT_GT(std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])}), 1e-10);
            }
        }
    }
}
