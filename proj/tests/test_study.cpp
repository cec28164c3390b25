#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_support.hpp"
#include "tiered_review/study.hpp"

using namespace tiered_review;

TEST(Scenarios, CommonEvents) {
    const Scenario s = scenario_common(0.25);
    EXPECT_NO_THROW(s.validate());
    EXPECT_DOUBLE_EQ(s.theta(), 58.0);
    EXPECT_EQ(s.strata[2].lambdas, (std::vector<double>{20, 30, 8, 5}));
    EXPECT_EQ(s.strata[4].pis, (std::vector<double>{0.25, 0.9, 0.99}));
    EXPECT_EQ(s.strata[0].pis, (std::vector<double>{0.25, 0.5, 0.95}));
    EXPECT_EQ(s.config.mileage, 1.0);
}

TEST(Scenarios, RareEvents) {
    const Scenario rare = scenario_rare(0.25);
    const Scenario common = scenario_common(0.25);
    EXPECT_DOUBLE_EQ(rare.theta(), 11.0);
    EXPECT_EQ(rare.strata[0].lambdas, (std::vector<double>{10, 5, 2.5, 4}));
    for (std::size_t h = 0; h < 5; ++h) {
        for (std::size_t t = 0; t < 3; ++t) {
            EXPECT_EQ(rare.strata[h].lambdas[t], common.strata[h].lambdas[t]);
        }
        EXPECT_EQ(rare.strata[h].pis, common.strata[h].pis);
    }
}

TEST(Scenarios, WithTier1Rate) {
    const Scenario s = with_tier1_rate(scenario_common(0.1), 0.7);
    for (const auto& st : s.strata) EXPECT_EQ(st.pis[0], 0.7);
}

TEST(Scenarios, ComprehensiveConstruction) {
    const RngStream root(11);
    for (int i = 0; i < 2000; ++i) {
        RngStream rng = root.child(i);
        const Scenario s = scenario_comprehensive(rng);
        ASSERT_NO_THROW(s.validate());
        ASSERT_EQ(s.config.strata, 5u);
        ASSERT_EQ(s.config.tiers, 3u);
        for (const auto& st : s.strata) {
            for (double l : st.lambdas) ASSERT_GT(l, 0.0);
            for (std::size_t t = 1; t < st.pis.size(); ++t) ASSERT_GE(st.pis[t], st.pis[t - 1]);
        }
    }
}

TEST(Scenarios, ComprehensiveRateMean) {
    // E lambda = E mu = 2.5; Var lambda = E mu^2 + Var mu = 7.75.
    const RngStream root(12);
    tiered_review::testing::Moments m;
    for (int i = 0; i < 100000; ++i) {
        RngStream rng = root.child(i);
        for (const auto& st : scenario_comprehensive(rng).strata) {
            for (double l : st.lambdas) m.add(l);
        }
    }
    EXPECT_NEAR(m.mean, 2.5, 3.0 * std::sqrt(7.75 / double(m.n)));
}

TEST(RunSweep, SingleReplication) {
    StudySpec spec;
    spec.kind = StudyKind::rare;
    spec.replications = 1;
    spec.bootstrap_replicates = 200;
    const auto rows = run_sweep(spec);
    ASSERT_EQ(rows.size(), spec.pi1_grid.size() * 3);
    for (const auto& r : rows) {
        EXPECT_TRUE(r.coverage() == 0.0 || r.coverage() == 1.0);
        EXPECT_EQ(r.covered + r.lower_misses + r.upper_misses, r.reps);
    }
}

TEST(RunSweep, CanonicalOrderAndAccounting) {
    StudySpec spec;
    spec.kind = StudyKind::common;
    spec.pi1_grid = {0.2, 0.6};
    spec.replications = 40;
    spec.bootstrap_replicates = 100;
    const auto rows = run_sweep(spec);
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].pi1, spec.pi1_grid[i / 3]);
        EXPECT_EQ(rows[i].method, spec.methods[i % 3]);
        EXPECT_EQ(rows[i].covered + rows[i].lower_misses + rows[i].upper_misses, 40);
        EXPECT_DOUBLE_EQ(rows[i].theta, 58.0);
        EXPECT_GE(rows[i].mean_width, 0.0);
    }
}

TEST(RunSweep, DeterministicAcrossRunsAndThreads) {
    StudySpec spec;
    spec.kind = StudyKind::comprehensive;
    spec.num_scenarios = 6;
    spec.replications = 30;
    spec.bootstrap_replicates = 100;
    std::ostringstream a, b, c;
    write_coverage_csv(a, run_sweep(spec));
    write_coverage_csv(b, run_sweep(spec));
    spec.threads = 3;
    write_coverage_csv(c, run_sweep(spec));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str(), c.str());
}

TEST(RunSweep, MethodSelectionDoesNotPerturbData) {
    StudySpec spec;
    spec.kind = StudyKind::rare;
    spec.pi1_grid = {0.3};
    spec.replications = 100;
    spec.bootstrap_replicates = 100;
    spec.methods = {IntervalMethod::wald};
    const auto alone = run_sweep(spec);
    spec.methods = {IntervalMethod::bootstrap, IntervalMethod::wald, IntervalMethod::gamma_wsip};
    const auto all = run_sweep(spec);
    EXPECT_EQ(alone[0].covered, all[1].covered);
    EXPECT_EQ(alone[0].lower_misses, all[1].lower_misses);
    EXPECT_EQ(alone[0].mean_width, all[1].mean_width);
}

TEST(RunSweep, GammaCoversAtFullTier1Review) {
    StudySpec spec;
    spec.kind = StudyKind::common;
    spec.pi1_grid = {1.0};
    spec.methods = {IntervalMethod::gamma_wsip};
    const auto rows = run_sweep(spec);
    EXPECT_GE(rows.at(0).coverage(), 0.88);
}

TEST(RunSweep, RejectsInvalidStudySpec) {
    StudySpec spec;
    spec.replications = 0;
    EXPECT_THROW(run_sweep(spec), InvalidParameter);
    spec.replications = 1;
    spec.pi1_grid = {0.0};
    EXPECT_THROW(run_sweep(spec), InvalidParameter);
    spec.pi1_grid = {0.5};
    spec.methods.clear();
    EXPECT_THROW(run_sweep(spec), InvalidParameter);
}

TEST(CoverageCsv, HeaderAndRowFormat) {
    CoverageRow row;
    row.scenario_id = 3;
    row.expected_tp = 2.5;
    row.method = IntervalMethod::wald;
    row.reps = 4;
    row.covered = 3;
    row.upper_misses = 1;
    row.mean_width = 1.25;
    std::ostringstream os;
    write_coverage_csv(os, {row});
    EXPECT_EQ(os.str(),
              "scenario_id,pi1,expected_tp,method,level,reps,coverage,lower_miss,upper_miss,mean_width\n"
              "3,NA,2.500000,wald,0.9000,4,0.750000,0.000000,0.250000,1.250000\n");
}

namespace {

CoverageRow window_row(double x, double coverage, IntervalMethod m = IntervalMethod::gamma_wsip) {
    CoverageRow r;
    r.expected_tp = x;
    r.method = m;
    r.reps = 100;
    r.covered = int(std::lround(coverage * 100));
    r.lower_misses = (100 - r.covered) / 2;
    r.upper_misses = 100 - r.covered - r.lower_misses;
    r.mean_width = 10 * x;
    return r;
}

}  // namespace

TEST(SummarizeComprehensive, SingleRowWindow) {
    const auto windows = summarize_comprehensive({window_row(0.4, 0.93)}, 1.0, 0.5);
    ASSERT_FALSE(windows.empty());
    const auto& w = windows.front();
    EXPECT_EQ(w.scenarios, 1u);
    EXPECT_FALSE(w.empty);
    EXPECT_EQ(w.coverage.min, 0.93);
    EXPECT_EQ(w.coverage.p25, 0.93);
    EXPECT_EQ(w.coverage.median, 0.93);
    EXPECT_EQ(w.coverage.p75, 0.93);
    EXPECT_EQ(w.coverage.max, 0.93);
}

TEST(SummarizeComprehensive, WindowBoundsAreInclusive) {
    const std::vector<CoverageRow> rows{window_row(2.0, 0.9), window_row(3.0, 0.8),
                                        window_row(4.0, 0.7), window_row(4.25, 0.6)};
    const auto windows = summarize_comprehensive(rows, 1.0, 0.5);
    // Center 3.0 holds [2, 4]: the rows at 2, 3 and 4 but not 4.25.
    const auto it = std::find_if(windows.begin(), windows.end(),
                                 [](const WindowSummary& w) { return w.center == 3.0; });
    ASSERT_NE(it, windows.end());
    EXPECT_EQ(it->scenarios, 3u);
    EXPECT_DOUBLE_EQ(it->pooled_coverage, 0.8);
}

TEST(SummarizeComprehensive, EmptyWindowsAreFlagged) {
    const auto windows = summarize_comprehensive({window_row(0.1, 0.9), window_row(9.0, 0.9)}, 1.0, 0.5);
    bool saw_empty = false;
    for (const auto& w : windows) {
        if (w.center == 5.0) {
            EXPECT_TRUE(w.empty);
            EXPECT_EQ(w.scenarios, 0u);
            saw_empty = true;
        }
    }
    EXPECT_TRUE(saw_empty);
}

TEST(SummarizeComprehensive, PercentilesAreOrdered) {
    StudySpec spec;
    spec.kind = StudyKind::comprehensive;
    spec.num_scenarios = 60;
    spec.replications = 50;
    spec.methods = {IntervalMethod::wald, IntervalMethod::gamma_wsip};
    const auto windows = summarize_comprehensive(run_sweep(spec));
    for (const auto& w : windows) {
        if (w.empty) continue;
        for (const FiveNumber* f : {&w.coverage, &w.lower_miss, &w.upper_miss, &w.width}) {
            ASSERT_LE(f->min, f->p25);
            ASSERT_LE(f->p25, f->median);
            ASSERT_LE(f->median, f->p75);
            ASSERT_LE(f->p75, f->max);
        }
    }
}
