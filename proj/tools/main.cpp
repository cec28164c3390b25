#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("TIERED_REVIEW_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring malformed TIERED_REVIEW_SEED\n";
        }
    }
    return 20240101;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace tiered_review::cli;

    CLI::App app{"Rate estimation and interval coverage for tiered partial event review"};
    app.require_subcommand(1);
    const std::uint64_t seed = default_seed();

    GenerateOptions gen;
    gen.seed = seed;
    auto* generate = app.add_subcommand("generate", "Simulate a dataset from a scenario file");
    generate->add_option("scenario", gen.scenario_path, "Scenario JSON file")->required();
    generate->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
    generate->add_option("--out", gen.out_path, "Dataset output file (default: stdout)");
    generate->add_option("--latent", gen.latent_path, "Also write latent label tables here");

    EstimateOptions est;
    est.seed = seed;
    auto* estimate = app.add_subcommand("estimate", "Estimate theta and confidence intervals");
    estimate->add_option("dataset", est.dataset_path, "Dataset JSON file")->required();
    estimate->add_option("--ci", est.ci, "bootstrap | wald | gamma | all | none")
        ->capture_default_str();
    estimate->add_option("--level", est.level, "Confidence level in (0, 1)")->capture_default_str();
    estimate->add_option("--B", est.bootstrap_replicates, "Bootstrap replicates")
        ->capture_default_str();
    estimate->add_option("--seed", est.seed, "Bootstrap seed")->capture_default_str();
    estimate->add_flag("--clamp-wald", est.clamp_wald, "Clamp the Wald lower bound at zero");
    estimate->add_option("--json", est.json_path, "Also write a JSON report here");
    estimate->add_option("--threads", est.threads, "Worker threads (0: all cores)")
        ->capture_default_str();

    StudyOptions st;
    st.seed = seed;
    auto* study = app.add_subcommand("study", "Run a Monte Carlo coverage study");
    study->add_option("--study", st.study, "common | rare | comprehensive")->required();
    study->add_option("--reps", st.reps, "Replications per grid point")->capture_default_str();
    study->add_option("--grid", st.grid, "Tier-1 sampling rates, comma separated")
        ->delimiter(',');
    study->add_option("--num-scenarios", st.num_scenarios, "Random scenarios (comprehensive)")
        ->capture_default_str();
    study->add_option("--methods", st.methods, "Interval methods, comma separated")
        ->delimiter(',');
    study->add_option("--B", st.bootstrap_replicates, "Bootstrap replicates")
        ->capture_default_str();
    study->add_option("--level", st.level, "Confidence level")->capture_default_str();
    study->add_option("--seed", st.seed, "Master seed")->capture_default_str();
    study->add_option("--threads", st.threads, "Worker threads (0: all cores)")
        ->capture_default_str();
    study->add_option("--out", st.out_path, "CSV output file (default: stdout)");
    study->add_option("--summary", st.summary_path, "Moving-window summary CSV");
    study->add_option("--window", st.window, "Moving-window half width")->capture_default_str();
    study->add_option("--window-step", st.window_step, "Spacing of window centers")
        ->capture_default_str();

    ScenarioOptions sc;
    auto* scenario = app.add_subcommand("scenario", "Write a built-in scenario as JSON");
    scenario->add_option("name", sc.name, "common | rare")->required();
    scenario->add_option("--pi1", sc.pi1, "Tier-1 sampling rate")->capture_default_str();
    scenario->add_option("--out", sc.out_path, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (*generate) return cmd_generate(gen, std::cout, std::cerr);
    if (*estimate) return cmd_estimate(est, std::cout, std::cerr);
    if (*study) return cmd_study(st, std::cout, std::cerr);
    if (*scenario) return cmd_scenario(sc, std::cout, std::cerr);
    return kUsage;
}
