#pragma once

// Monte Carlo coverage studies.
//
// Random stream layout under the study's master seed:
//   (0, s)             parameters of comprehensive scenario s
//   (1, s, g, r)       replication r at grid point g of scenario s
//   (1, s, g, r, 0)    data generation for that replication
//   (1, s, g, r, 1)    bootstrap resampling for that replication
// so enabling or disabling a method never perturbs generated data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tiered_review/distributions.hpp"
#include "tiered_review/estimator.hpp"
#include "tiered_review/generator.hpp"
#include "tiered_review/intervals.hpp"
#include "tiered_review/model.hpp"
#include "tiered_review/parallel.hpp"
#include "tiered_review/rng.hpp"

namespace tiered_review {

namespace detail {

inline Scenario fixed_scenario(const std::vector<std::vector<double>>& lambdas, double pi1) {
    static const std::vector<std::pair<double, double>> upper_tier_pis = {
        {0.5, 0.95}, {0.6, 0.96}, {0.7, 0.97}, {0.8, 0.98}, {0.9, 0.99}};
    Scenario s{ReviewConfig{1.0, 5, 3}, {}};
    for (std::size_t h = 0; h < 5; ++h) {
        s.strata.push_back({lambdas[h], {pi1, upper_tier_pis[h].first, upper_tier_pis[h].second}});
    }
    return s;
}

}  // namespace detail

/// Common-event scenario: H = 5, T = 3, m = 1, theta = 58. The tier-1
/// sampling rate is shared by all strata and left to the caller.
inline Scenario scenario_common(double pi1 = 1.0) {
    return detail::fixed_scenario({{10, 5, 2.5, 18},
                                   {20, 15, 25, 10},
                                   {20, 30, 8, 5},
                                   {5, 6, 25, 10},
                                   {30, 12, 4, 15}},
                                  pi1);
}

/// Rare-event scenario: as scenario_common with the TP column reduced,
/// theta = 11.
inline Scenario scenario_rare(double pi1 = 1.0) {
    return detail::fixed_scenario({{10, 5, 2.5, 4},
                                   {20, 15, 25, 2},
                                   {20, 30, 8, 1},
                                   {5, 6, 25, 2},
                                   {30, 12, 4, 2}},
                                  pi1);
}

inline Scenario with_tier1_rate(Scenario s, double pi1) {
    for (auto& stratum : s.strata) stratum.pis.front() = pi1;
    return s;
}

/// Random scenario: lambda_ht ~ Exponential(mean mu_ht), mu_ht ~ U(1, 4);
/// pi_h1 ~ U(0, 1), pi_ht ~ U(pi_h(t-1), 1). Per stratum the T+1 (mu, lambda)
/// pairs are drawn first, then the T sampling rates.
inline Scenario scenario_comprehensive(RngStream& rng) {
    constexpr std::size_t H = 5, T = 3;
    Scenario s{ReviewConfig{1.0, H, T}, {}};
    for (std::size_t h = 0; h < H; ++h) {
        StratumParams p;
        for (std::size_t t = 0; t <= T; ++t) {
            const double mu = sample_uniform(1.0, 4.0, rng);
            p.lambdas.push_back(sample_exponential(mu, rng));
        }
        double floor = 0.0;
        for (std::size_t t = 1; t <= T; ++t) {
            double pi = sample_uniform(floor, 1.0, rng);
            // U(0,1) can return exactly 0, which the model rejects.
            while (pi <= 0.0) pi = sample_uniform(floor, 1.0, rng);
            p.pis.push_back(pi);
            floor = pi;
        }
        s.strata.push_back(std::move(p));
    }
    return s;
}

enum class StudyKind { common, rare, comprehensive };

inline const char* to_string(StudyKind k) {
    switch (k) {
        case StudyKind::common: return "common";
        case StudyKind::rare: return "rare";
        case StudyKind::comprehensive: return "comprehensive";
    }
    return "unknown";
}

inline std::optional<StudyKind> parse_study(const std::string& name) {
    if (name == "common") return StudyKind::common;
    if (name == "rare") return StudyKind::rare;
    if (name == "comprehensive") return StudyKind::comprehensive;
    return std::nullopt;
}

inline std::vector<double> default_pi1_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(i / 10.0);
    return grid;
}

struct StudySpec {
    StudyKind kind = StudyKind::common;
    std::vector<double> pi1_grid = default_pi1_grid();  // ignored by comprehensive
    int replications = 1000;
    double level = 0.9;
    std::vector<IntervalMethod> methods = {IntervalMethod::bootstrap, IntervalMethod::wald,
                                           IntervalMethod::gamma_wsip};
    int bootstrap_replicates = kDefaultBootstrapReplicates;
    std::size_t num_scenarios = 100000;  // comprehensive only
    std::uint64_t master_seed = 20240101;
    unsigned threads = 1;

    void validate() const {
        if (replications < 1) throw InvalidParameter("replications must be >= 1");
        if (!(level > 0.0 && level < 1.0)) throw InvalidParameter("level must lie in (0, 1)");
        if (methods.empty()) throw InvalidParameter("at least one interval method is required");
        if (kind == StudyKind::comprehensive) {
            if (num_scenarios < 1) throw InvalidParameter("num_scenarios must be >= 1");
        } else {
            if (pi1_grid.empty()) throw InvalidParameter("pi1 grid is empty");
            for (double p : pi1_grid) {
                if (!(p > 0.0 && p <= 1.0)) throw InvalidParameter("pi1 grid values must lie in (0, 1]");
            }
        }
        for (auto m : methods) {
            if (m == IntervalMethod::bootstrap && bootstrap_replicates < 100) {
                throw InvalidParameter("bootstrap needs at least 100 replicates");
            }
        }
    }
};

struct CoverageRow {
    std::size_t scenario_id = 0;
    double pi1 = std::numeric_limits<double>::quiet_NaN();  // NaN for comprehensive scenarios
    double expected_tp = 0.0;
    double theta = 0.0;
    IntervalMethod method = IntervalMethod::gamma_wsip;
    double level = 0.9;
    int reps = 0;
    int covered = 0;
    int lower_misses = 0;  // theta < lower
    int upper_misses = 0;  // theta > upper
    double mean_width = 0.0;

    double coverage() const { return double(covered) / reps; }
    double lower_miss() const { return double(lower_misses) / reps; }
    double upper_miss() const { return double(upper_misses) / reps; }
};

/// Runs `reps` generate -> estimate -> interval cycles on one scenario and
/// tallies coverage of the true theta for each requested method.
inline std::vector<CoverageRow> run_point(const Scenario& scenario, const StudySpec& spec,
                                          const RngStream& point_stream, std::size_t scenario_id,
                                          double pi1) {
    const double theta = scenario.theta();
    const std::size_t n_methods = spec.methods.size();
    const auto reps = static_cast<std::size_t>(spec.replications);
    std::vector<IntervalResult> results(reps * n_methods);

    parallel_for(reps, spec.threads, [&](std::size_t r) {
        const RngStream rep_stream = point_stream.child(r);
        const Dataset data = generate_observed(scenario, rep_stream.child(0));
        const RateEstimate estimate = estimate_theta(data);
        for (std::size_t k = 0; k < n_methods; ++k) {
            IntervalResult& slot = results[r * n_methods + k];
            switch (spec.methods[k]) {
                case IntervalMethod::bootstrap:
                    slot = ci_bootstrap(data, spec.level, rep_stream.child(1),
                                        {spec.bootstrap_replicates, 1});
                    break;
                case IntervalMethod::wald: slot = ci_wald(estimate, spec.level); break;
                case IntervalMethod::gamma_wsip:
                    slot = ci_gamma_wsip(estimate, data, spec.level);
                    break;
            }
        }
    });

    std::vector<CoverageRow> rows;
    for (std::size_t k = 0; k < n_methods; ++k) {
        CoverageRow row;
        row.scenario_id = scenario_id;
        row.pi1 = pi1;
        row.expected_tp = scenario.expected_observed_tp();
        row.theta = theta;
        row.method = spec.methods[k];
        row.level = spec.level;
        row.reps = spec.replications;
        double width_sum = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            const IntervalResult& ci = results[r * n_methods + k];
            if (theta < ci.lower) {
                ++row.lower_misses;
            } else if (theta > ci.upper) {
                ++row.upper_misses;
            } else {
                ++row.covered;
            }
            width_sum += ci.width();
        }
        row.mean_width = width_sum / double(reps);
        rows.push_back(row);
    }
    return rows;
}

/// Rows come out in canonical (scenario, grid point, method) order.
inline std::vector<CoverageRow> run_sweep(const StudySpec& spec) {
    spec.validate();
    const RngStream root(spec.master_seed);
    std::vector<CoverageRow> rows;

    if (spec.kind == StudyKind::comprehensive) {
        const RngStream params_root = root.child(0);
        for (std::size_t s = 0; s < spec.num_scenarios; ++s) {
            RngStream param_stream = params_root.child(s);
            const Scenario scenario = scenario_comprehensive(param_stream);
            auto point = run_point(scenario, spec, root.child(1).child(s).child(0), s,
                                   std::numeric_limits<double>::quiet_NaN());
            rows.insert(rows.end(), point.begin(), point.end());
        }
        return rows;
    }

    const Scenario base = spec.kind == StudyKind::common ? scenario_common() : scenario_rare();
    for (std::size_t g = 0; g < spec.pi1_grid.size(); ++g) {
        const double pi1 = spec.pi1_grid[g];
        auto point = run_point(with_tier1_rate(base, pi1), spec, root.child(1).child(0).child(g),
                               0, pi1);
        rows.insert(rows.end(), point.begin(), point.end());
    }
    return rows;
}

inline constexpr const char* kCoverageCsvHeader =
    "scenario_id,pi1,expected_tp,method,level,reps,coverage,lower_miss,upper_miss,mean_width";

inline std::string format_coverage_row(const CoverageRow& row) {
    char pi1[32];
    if (std::isnan(row.pi1)) {
        std::snprintf(pi1, sizeof pi1, "NA");
    } else {
        std::snprintf(pi1, sizeof pi1, "%.4f", row.pi1);
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%s,%.6f,%s,%.4f,%d,%.6f,%.6f,%.6f,%.6f", row.scenario_id,
                  pi1, row.expected_tp, to_string(row.method), row.level, row.reps,
                  row.coverage(), row.lower_miss(), row.upper_miss(), row.mean_width);
    return buf;
}

inline void write_coverage_csv(std::ostream& os, const std::vector<CoverageRow>& rows) {
    os << kCoverageCsvHeader << '\n';
    for (const auto& row : rows) os << format_coverage_row(row) << '\n';
}

struct FiveNumber {
    double min = 0, p25 = 0, median = 0, p75 = 0, max = 0;
};

inline FiveNumber five_number_summary(std::span<const double> values) {
    return {empirical_quantile(values, 0.0), empirical_quantile(values, 0.25),
            empirical_quantile(values, 0.5), empirical_quantile(values, 0.75),
            empirical_quantile(values, 1.0)};
}

struct WindowSummary {
    double center = 0.0;
    IntervalMethod method = IntervalMethod::gamma_wsip;
    std::size_t scenarios = 0;
    bool empty = true;  // no rows fell inside the window
    FiveNumber coverage, lower_miss, upper_miss, width;
    // Pooled over all replications of the scenarios in the window.
    double pooled_coverage = 0.0, pooled_lower_miss = 0.0, pooled_upper_miss = 0.0;
    double pooled_width = 0.0;
};

/// Moving-window percentiles of per-scenario error rates and widths against
/// the expected observed TP count. A window at x holds every row with
/// expected_tp in [x - half_width, x + half_width]; centers run from 0 to
/// the largest expected_tp in steps of `step`.
inline std::vector<WindowSummary> summarize_comprehensive(const std::vector<CoverageRow>& rows,
                                                          double half_width = 1.0,
                                                          double step = 0.5) {
    if (!(half_width > 0.0) || !(step > 0.0)) {
        throw InvalidParameter("window half-width and step must be positive");
    }
    std::vector<IntervalMethod> methods;
    double max_x = 0.0;
    for (const auto& r : rows) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
            methods.push_back(r.method);
        }
        max_x = std::max(max_x, r.expected_tp);
    }

    std::vector<WindowSummary> out;
    const auto n_centers = static_cast<std::size_t>(std::floor(max_x / step)) + 1;
    for (std::size_t i = 0; i < n_centers; ++i) {
        const double center = double(i) * step;
        for (auto method : methods) {
            WindowSummary w;
            w.center = center;
            w.method = method;
            std::vector<double> cov, lo, up, width;
            long long covered = 0, lower = 0, upper = 0, reps = 0;
            double width_total = 0.0;
            for (const auto& r : rows) {
                if (r.method != method) continue;
                if (r.expected_tp < center - half_width || r.expected_tp > center + half_width) {
                    continue;
                }
                cov.push_back(r.coverage());
                lo.push_back(r.lower_miss());
                up.push_back(r.upper_miss());
                width.push_back(r.mean_width);
                covered += r.covered;
                lower += r.lower_misses;
                upper += r.upper_misses;
                reps += r.reps;
                width_total += r.mean_width * r.reps;
            }
            w.scenarios = cov.size();
            w.empty = cov.empty();
            if (!w.empty) {
                w.coverage = five_number_summary(cov);
                w.lower_miss = five_number_summary(lo);
                w.upper_miss = five_number_summary(up);
                w.width = five_number_summary(width);
                w.pooled_coverage = double(covered) / double(reps);
                w.pooled_lower_miss = double(lower) / double(reps);
                w.pooled_upper_miss = double(upper) / double(reps);
                w.pooled_width = width_total / double(reps);
            }
            out.push_back(w);
        }
    }
    return out;
}

inline void write_window_csv(std::ostream& os, const std::vector<WindowSummary>& windows) {
    os << "center,method,scenarios,empty,metric,min,p25,median,p75,max,pooled\n";
    char buf[256];
    for (const auto& w : windows) {
        struct Metric {
            const char* name;
            const FiveNumber* values;
            double pooled;
        };
        const Metric metrics[] = {{"coverage", &w.coverage, w.pooled_coverage},
                                  {"lower_miss", &w.lower_miss, w.pooled_lower_miss},
                                  {"upper_miss", &w.upper_miss, w.pooled_upper_miss},
                                  {"width", &w.width, w.pooled_width}};
        for (const auto& m : metrics) {
            const FiveNumber& f = *m.values;
            std::snprintf(buf, sizeof buf, "%.4f,%s,%zu,%d,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f",
                          w.center, to_string(w.method), w.scenarios, w.empty ? 1 : 0, m.name,
                          f.min, f.p25, f.median, f.p75, f.max, m.pooled);
            os << buf << '\n';
        }
    }
}

}  // namespace tiered_review
