#pragma once

// Subcommand implementations for the tiered-review CLI. Each command writes
// its report to `out`, diagnostics to `err`, and returns a process exit code.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tiered_review.hpp"

namespace tiered_review::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kInternal = 3 };

/// Writes `content` to `path` through a temporary file and a rename.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out.flush()) throw std::runtime_error("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

/// Runs `body`, mapping library exceptions onto exit codes.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const InvalidParameter& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const InvalidInput& e) {
        err << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}

struct GenerateOptions {
    std::string scenario_path;
    std::uint64_t seed = 0;
    std::string out_path;
    std::string latent_path;  // empty: latent tables are not written
};

inline int cmd_generate(const GenerateOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Scenario scenario = scenario_from_json(read_text_file(opt.scenario_path));
        const auto generated = generate_dataset(scenario, RngStream(opt.seed));
        const std::string dataset = to_json(generated.observed).dump(2) + "\n";
        if (opt.out_path.empty() || opt.out_path == "-") {
            out << dataset;
        } else {
            write_file_atomic(opt.out_path, dataset);
        }
        if (!opt.latent_path.empty()) {
            write_file_atomic(opt.latent_path, to_json(generated.latent).dump(2) + "\n");
        }
        return int(kOk);
    });
}

struct EstimateOptions {
    std::string dataset_path;
    std::string ci = "all";  // bootstrap | wald | gamma | all | none
    double level = 0.9;
    int bootstrap_replicates = kDefaultBootstrapReplicates;
    std::uint64_t seed = 0;
    bool clamp_wald = false;
    std::string json_path;
    unsigned threads = 1;
};

inline std::vector<IntervalMethod> methods_for(const std::string& ci) {
    if (ci == "all") {
        return {IntervalMethod::bootstrap, IntervalMethod::wald, IntervalMethod::gamma_wsip};
    }
    if (ci == "none") return {};
    if (auto m = parse_method(ci)) return {*m};
    throw InvalidParameter("unknown interval method \"" + ci + "\"");
}

inline std::string format_sequence(const std::vector<double>& values) {
    std::string s = "(";
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", values[i]);
        s += buf;
    }
    return s + ")";
}

inline int cmd_estimate(const EstimateOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!(opt.level > 0.0 && opt.level < 1.0)) {
            throw InvalidParameter("--level must lie in (0, 1)");
        }
        const auto methods = methods_for(opt.ci);
        const Dataset data = dataset_from_json(read_text_file(opt.dataset_path));
        const RateEstimate estimate = estimate_theta(data);

        std::vector<IntervalResult> intervals;
        for (auto m : methods) {
            switch (m) {
                case IntervalMethod::bootstrap:
                    intervals.push_back(ci_bootstrap(data, opt.level, RngStream(opt.seed),
                                                     {opt.bootstrap_replicates, opt.threads}));
                    break;
                case IntervalMethod::wald:
                    intervals.push_back(ci_wald(estimate, opt.level, opt.clamp_wald));
                    break;
                case IntervalMethod::gamma_wsip:
                    intervals.push_back(ci_gamma_wsip(estimate, data, opt.level));
                    break;
            }
        }

        char buf[256];
        std::snprintf(buf, sizeof buf, "theta_hat = %.10g  (m = %g, H = %zu, T = %zu)\n",
                      estimate.theta, data.config.mileage, data.config.strata, data.config.tiers);
        out << buf;
        for (std::size_t h = 0; h < estimate.strata.size(); ++h) {
            const auto& s = estimate.strata[h];
            out << "stratum " << h << ":\n"
                << "  Lambda_hat = " << format_sequence(s.cumulative_rates) << '\n'
                << "  lambda_hat = " << format_sequence(s.rates) << '\n'
                << "  pi_hat     = " << format_sequence(s.sampling_rates) << '\n';
            std::snprintf(buf, sizeof buf, "  pi_hat_h = %.6g  weight = %.6g\n", s.sampling_product,
                          s.weight);
            out << buf;
        }
        for (const auto& ci : intervals) {
            std::snprintf(buf, sizeof buf, "%-9s %.0f%% CI: [%.6g, %.6g]\n", to_string(ci.method),
                          ci.level * 100, ci.lower, ci.upper);
            out << buf;
        }

        if (!opt.json_path.empty()) {
            nlohmann::json doc;
            doc["theta_hat"] = estimate.theta;
            doc["mileage"] = estimate.mileage;
            nlohmann::json strata = nlohmann::json::array();
            for (const auto& s : estimate.strata) {
                strata.push_back({{"Lambda_hat", s.cumulative_rates},
                                  {"lambda_hat", s.rates},
                                  {"pi_hat", s.sampling_rates},
                                  {"pi_hat_product", s.sampling_product},
                                  {"weight", s.weight}});
            }
            doc["strata"] = strata;
            nlohmann::json cis = nlohmann::json::array();
            for (const auto& ci : intervals) {
                cis.push_back({{"method", to_string(ci.method)},
                               {"level", ci.level},
                               {"lower", ci.lower},
                               {"upper", ci.upper}});
            }
            doc["intervals"] = cis;
            write_file_atomic(opt.json_path, doc.dump(2) + "\n");
        }
        return int(kOk);
    });
}

struct StudyOptions {
    std::string study;
    int reps = 1000;
    std::vector<double> grid = default_pi1_grid();
    std::size_t num_scenarios = 100000;
    std::vector<std::string> methods = {"bootstrap", "wald", "gamma"};
    int bootstrap_replicates = kDefaultBootstrapReplicates;
    double level = 0.9;
    std::uint64_t seed = 20240101;
    unsigned threads = 1;
    std::string out_path;      // empty or "-": stdout
    std::string summary_path;  // comprehensive moving-window table
    double window = 1.0;
    double window_step = 0.5;
};

inline int cmd_study(const StudyOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        StudySpec spec;
        const auto kind = parse_study(opt.study);
        if (!kind) throw InvalidParameter("unknown study \"" + opt.study + "\"");
        spec.kind = *kind;
        spec.replications = opt.reps;
        spec.pi1_grid = opt.grid;
        spec.num_scenarios = opt.num_scenarios;
        spec.methods.clear();
        for (const auto& name : opt.methods) {
            auto m = parse_method(name);
            if (!m) throw InvalidParameter("unknown interval method \"" + name + "\"");
            spec.methods.push_back(*m);
        }
        spec.bootstrap_replicates = opt.bootstrap_replicates;
        spec.level = opt.level;
        spec.master_seed = opt.seed;
        spec.threads = opt.threads;

        const auto rows = run_sweep(spec);
        std::ostringstream csv;
        write_coverage_csv(csv, rows);
        if (opt.out_path.empty() || opt.out_path == "-") {
            out << csv.str();
        } else {
            write_file_atomic(opt.out_path, csv.str());
        }
        if (!opt.summary_path.empty()) {
            std::ostringstream table;
            write_window_csv(table, summarize_comprehensive(rows, opt.window, opt.window_step));
            write_file_atomic(opt.summary_path, table.str());
        }
        return int(kOk);
    });
}

struct ScenarioOptions {
    std::string name;  // common | rare
    double pi1 = 1.0;
    std::string out_path;
};

inline int cmd_scenario(const ScenarioOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!(opt.pi1 > 0.0 && opt.pi1 <= 1.0)) throw InvalidParameter("--pi1 must lie in (0, 1]");
        Scenario s;
        if (opt.name == "common") {
            s = scenario_common(opt.pi1);
        } else if (opt.name == "rare") {
            s = scenario_rare(opt.pi1);
        } else {
            throw InvalidParameter("unknown scenario \"" + opt.name + "\"");
        }
        const std::string text = to_json(s).dump(2) + "\n";
        if (opt.out_path.empty() || opt.out_path == "-") {
            out << text;
        } else {
            write_file_atomic(opt.out_path, text);
        }
        return int(kOk);
    });
}

}  // namespace tiered_review::cli
