#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "breakwater/evolution.hpp"
#include "breakwater/metrics.hpp"
#include "breakwater/scenario.hpp"

namespace breakwater {

/// One algorithm configuration repeated over a list of seeds.
struct PlanEntry {
    std::string label;
    Algorithm algorithm{Algorithm::SPEA2};
    EAConfig config;  // seed is replaced per run
    std::vector<std::uint64_t> seeds;
};

struct ExperimentPlan {
    std::string name{"experiment"};
    std::vector<PlanEntry> entries;
    std::string objectives{"all"};          // hypervolume objective subset
    std::vector<std::size_t> checkpoints;   // generations reported in the summary
    std::size_t parallel_runs{1};           // independent runs executed concurrently
};

/// Plan file format (JSON):
///   name, seeds | repeats + first_seed, defaults {budget keys}, entries [{label?,
///   algorithm, encoding, greedy, seeds?, budget keys}], matrix {algorithm[],
///   encoding[], greedy[]}, objectives, checkpoints, parallel_runs.
/// Budget keys: population, archive, generations, crossover_rate, mutation_rate,
/// sigma_length, sigma_angle, sigma_cartesian, generations_per_segment,
/// de_weight, de_variation, scalar_mapping, penalty, threads.
ExperimentPlan plan_from_json_text(const std::string& text);
ExperimentPlan load_plan(const std::filesystem::path& path);
std::string plan_to_json_text(const ExperimentPlan& plan);

/// Single-run plan, as used by the optimize command.
ExperimentPlan single_run_plan(Algorithm algorithm, const EAConfig& config);

std::string default_label(Algorithm algorithm, const EAConfig& config);

struct RunFailure {
    std::string label;
    std::uint64_t seed{0};
    std::string message;
};

struct SummaryRow {
    std::string label;
    Algorithm algorithm{Algorithm::SPEA2};
    Encoding encoding{Encoding::Angular};
    bool greedy{false};
    std::size_t runs{0};
    std::size_t failed{0};
    std::size_t model_runs_per_run{0};
    Quartiles final_hypervolume;
    std::vector<Quartiles> checkpoint_hypervolume;  // parallel to plan.checkpoints
    double median_front_size{0.0};
    std::size_t mask_violations{0};
    std::size_t clamped_scores{0};
};

struct RunResult {
    std::string label;
    std::uint64_t seed{0};
    std::optional<ArchiveHistory> history;  // empty when the run failed
    std::vector<FrontSnapshot> snapshots;   // filled by compute_metrics
};

struct ExperimentResult {
    std::vector<RunResult> runs;
    std::vector<RunFailure> failures;
    Point reference;
    std::vector<SummaryRow> summary;

    [[nodiscard]] const ArchiveHistory* find(const std::string& label, std::uint64_t seed) const;
};

/// Runs every (entry, seed) pair, then writes (when `out` is given):
///   plan.json, scenario.json, reference_point.json, summary.csv, failures.csv
///   <label>/convergence.csv, <label>/union_front.csv
///   <label>/seed-<s>/{run.json, history.csv, population.csv, archive.csv,
///                     snapshots.csv, front.json, front2d.csv}
/// A failing run is recorded and the rest continue.
ExperimentResult run_experiment(const ExperimentPlan& plan, const Scenario& scenario,
                                const std::optional<std::filesystem::path>& out = std::nullopt);

/// Reference point, hypervolumes and summary for already computed histories.
void compute_metrics(ExperimentResult& result, const ExperimentPlan& plan, const ObjectiveSelection& selection);

/// Writes the summary-level files (reference point, summary, convergence,
/// union fronts, failures) for a result.
void write_metrics(const std::filesystem::path& out, const ExperimentResult& result, const ExperimentPlan& plan,
                   const ObjectiveSelection& selection);

/// Rebuilds results from a result directory written by run_experiment.
ExperimentResult load_results(const std::filesystem::path& dir, const ExperimentPlan& plan, const Scenario& scenario);

/// Individuals as CSV: generation, index, genes, raw objectives, constraint
/// counts, simulated flag, scalar, fitness and minimization vector.
void write_individuals_csv(std::ostream& out, const std::vector<std::pair<std::size_t, const Individual*>>& rows,
                           const Scenario& scenario);
std::vector<std::pair<std::size_t, Individual>> read_individuals_csv(std::istream& in, Encoding encoding);

/// Nondominated feasible individuals evaluated during a run, one per distinct
/// objective point, in order of first appearance.
std::vector<Individual> final_front(const ArchiveHistory& history);

std::string front_to_json_text(const std::vector<Individual>& front, const Scenario& scenario);
std::vector<Genotype> genotypes_from_front_json(const std::string& text);

/// Writes heights.txt (matrix, land as sentinel) and layout.json (existing and
/// new polylines) for a layout; the empty layout gives the baseline field.
WaveField export_field(const Layout& layout, const Scenario& scenario, const std::filesystem::path& out);

}  // namespace breakwater
