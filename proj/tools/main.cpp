#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "breakwater/experiment.hpp"

namespace fs = std::filesystem;
using namespace breakwater;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRunFailure = 2;

// Errors in user input exit with 1; everything that goes wrong while running exits with 2.
class RunFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void print_summary(const ExperimentResult& result, const ExperimentPlan& plan) {
    std::cout << "reference point:";
    for (const double v : result.reference) std::cout << ' ' << format_double(v);
    std::cout << '\n';
    for (const auto& row : result.summary) {
        std::cout << row.label << ": runs " << row.runs << ", failed " << row.failed << ", evaluations/run "
                  << row.model_runs_per_run << ", final hypervolume median " << format_double(row.final_hypervolume.median)
                  << " (IQR " << format_double(row.final_hypervolume.iqr()) << ")";
        for (std::size_t c = 0; c < plan.checkpoints.size(); ++c)
            std::cout << ", gen " << plan.checkpoints[c] << " median " << format_double(row.checkpoint_hypervolume[c].median);
        std::cout << '\n';
    }
    for (const auto& f : result.failures) std::cerr << "run " << f.label << " seed " << f.seed << " failed: " << f.message << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-objective breakwater layout optimization with a simulation in the loop"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string plan_path;
    std::string out_dir;
    std::uint64_t seed = 1;
    std::string algorithm = "spea2";
    std::string encoding = "angular";
    bool greedy = false;
    std::size_t generations = 30;
    std::size_t population = 30;
    std::optional<std::size_t> archive;
    std::size_t generations_per_segment = 1;
    std::size_t threads = 1;
    std::size_t parallel = 0;
    std::string objectives;
    std::string front_path;
    std::size_t member = 0;

    auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file and report every problem");
    validate_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required();

    auto* baseline_cmd = app.add_subcommand("baseline", "Compute the baseline objectives and wave field");
    baseline_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    baseline_cmd->add_option("--out", out_dir, "Directory for baseline.json, heights.txt and layout.json");

    auto* optimize_cmd = app.add_subcommand("optimize", "Single optimization run");
    optimize_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    optimize_cmd->add_option("--out", out_dir, "Result directory")->required();
    optimize_cmd->add_option("--seed", seed, "Random seed");
    optimize_cmd->add_option("--algorithm", algorithm, "spea2 or de")->check(CLI::IsMember({"spea2", "de"}));
    optimize_cmd->add_option("--encoding", encoding, "angular or cartesian")->check(CLI::IsMember({"angular", "cartesian"}));
    optimize_cmd->add_flag("--greedy,!--no-greedy", greedy, "Vary one breakwater segment per generation");
    optimize_cmd->add_option("--generations", generations, "Generation budget");
    optimize_cmd->add_option("--population", population, "Population size");
    optimize_cmd->add_option("--archive", archive, "SPEA2 archive size (default: population size)");
    optimize_cmd->add_option("--generations-per-segment", generations_per_segment, "Greedy mask dwell time");
    optimize_cmd->add_option("--threads", threads, "Evaluation threads");

    auto* experiment_cmd = app.add_subcommand("experiment", "Run every configuration and seed of a plan");
    experiment_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    experiment_cmd->add_option("--plan", plan_path, "Plan JSON")->required();
    experiment_cmd->add_option("--out", out_dir, "Result directory")->required();
    experiment_cmd->add_option("--parallel", parallel, "Runs executed concurrently (overrides the plan)");

    auto* metrics_cmd = app.add_subcommand("metrics", "Recompute indicators from a stored result directory");
    metrics_cmd->add_option("--out", out_dir, "Result directory written by optimize or experiment")->required();
    metrics_cmd->add_option("--plan", plan_path, "Plan JSON (default: <out>/plan.json)");
    metrics_cmd->add_option("--scenario", scenario_path, "Scenario JSON (default: <out>/scenario.json)");
    metrics_cmd->add_option("--objectives", objectives, "Comma list from cost,nav,waves or all (default: the plan's)");

    auto* export_cmd = app.add_subcommand("export-field", "Export the wave field and polylines of a layout");
    export_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    export_cmd->add_option("--out", out_dir, "Output directory")->required();
    export_cmd->add_option("--front", front_path, "front.json of a run (default: the baseline layout)");
    export_cmd->add_option("--member", member, "Index of the front member to export");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (validate_cmd->parsed()) {
            const Scenario s = load_scenario(scenario_path);
            std::cout << "ok: " << s.name << (s.illustrative ? " (illustrative)" : "") << ", " << s.grid.n_cols() << "x"
                      << s.grid.n_rows() << " cells, " << s.attachments.size() << " attachments, " << s.total_segments()
                      << " segment blocks (" << 2 * s.total_segments() << " genes), " << s.control_points.size()
                      << " control points\n";
            return kOk;
        }
        if (baseline_cmd->parsed()) {
            const Scenario s = load_scenario(scenario_path);
            std::cout << "cost reference " << format_double(s.baseline.cost_reference) << " m\n"
                      << "navigation distance " << format_double(s.baseline.nav_distance) << " m\n"
                      << "control heights";
            for (const double h : s.baseline.wave_heights) std::cout << ' ' << format_double(h);
            std::cout << " m\n";
            if (!out_dir.empty()) {
                try {
                    export_field(Layout{}, s, out_dir);
                    const nlohmann::json j = {{"cost_reference", s.baseline.cost_reference},
                                              {"nav_distance", s.baseline.nav_distance},
                                              {"wave_heights", s.baseline.wave_heights}};
                    std::ofstream(fs::path(out_dir) / "baseline.json") << j.dump(2) << '\n';
                } catch (const std::exception& e) {
                    throw RunFailed(e.what());
                }
            }
            return kOk;
        }
        if (optimize_cmd->parsed() || experiment_cmd->parsed()) {
            const Scenario s = load_scenario(scenario_path);
            ExperimentPlan plan;
            if (optimize_cmd->parsed()) {
                EAConfig config;
                config.population_size = population;
                config.archive_size = archive.value_or(population);
                config.generations = generations;
                config.greedy = greedy;
                config.generations_per_segment = generations_per_segment;
                config.encoding = encoding_from_string(encoding);
                config.seed = seed;
                config.threads = threads;
                config.validate();
                plan = single_run_plan(algorithm_from_string(algorithm), config);
            } else {
                plan = load_plan(plan_path);
                if (parallel > 0) plan.parallel_runs = parallel;
            }
            ExperimentResult result;
            try {
                result = run_experiment(plan, s, fs::path(out_dir));
            } catch (const std::exception& e) {
                throw RunFailed(e.what());
            }
            print_summary(result, plan);
            return result.failures.empty() ? kOk : kRunFailure;
        }
        if (metrics_cmd->parsed()) {
            const fs::path dir(out_dir);
            ExperimentPlan plan = load_plan(plan_path.empty() ? dir / "plan.json" : fs::path(plan_path));
            if (!objectives.empty()) plan.objectives = objectives;
            const auto selection = ObjectiveSelection::parse(plan.objectives);
            const Scenario s = load_scenario(scenario_path.empty() ? dir / "scenario.json" : fs::path(scenario_path));
            ExperimentResult result;
            try {
                result = load_results(dir, plan, s);
                compute_metrics(result, plan, selection);
                const fs::path target = dir / ("metrics-" + selection.describe());
                write_metrics(target, result, plan, selection);
                std::cout << "wrote " << target.string() << '\n';
            } catch (const std::exception& e) {
                throw RunFailed(e.what());
            }
            print_summary(result, plan);
            return result.failures.empty() ? kOk : kRunFailure;
        }
        if (export_cmd->parsed()) {
            const Scenario s = load_scenario(scenario_path);
            Layout layout;
            if (!front_path.empty()) {
                const auto members = genotypes_from_front_json(read_text(front_path));
                if (member >= members.size())
                    throw ConfigurationError("front has " + std::to_string(members.size()) + " members, index " +
                                             std::to_string(member) + " requested");
                layout = decode(members[member], s.attachments);
            }
            try {
                const WaveField field = export_field(layout, s, out_dir);
                std::cout << "wrote " << (fs::path(out_dir) / "heights.txt").string() << ", mean height "
                          << format_double(field.mean()) << " m\n";
            } catch (const std::exception& e) {
                throw RunFailed(e.what());
            }
            return kOk;
        }
    } catch (const ValidationError& e) {
        std::cerr << e.what() << '\n';
        return kValidation;
    } catch (const ConfigurationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const RunFailed& e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return kRunFailure;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return kRunFailure;
    }
    return kOk;
}
