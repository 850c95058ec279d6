#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "breakwater/geometry.hpp"
#include "breakwater/objectives.hpp"
#include "breakwater/scenario.hpp"

namespace breakwater {

using Rng = std::mt19937_64;

enum class Algorithm { SPEA2, DE };
std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

/// How DE builds a trial vector.
enum class DeVariation { Rand1Bin, GeneticOperators };

struct MutationSigma {
    double length{2.0};     // cells
    double angle{15.0};     // degrees
    double cartesian{2.0};  // cells
};

struct EAConfig {
    std::size_t population_size{30};
    std::size_t archive_size{30};
    std::size_t generations{30};
    double crossover_rate{0.8};
    double mutation_rate{0.25};  // per gene
    MutationSigma sigma;
    bool greedy{false};
    std::size_t generations_per_segment{1};
    Encoding encoding{Encoding::Angular};
    std::uint64_t seed{1};
    double de_weight{0.5};
    DeVariation de_variation{DeVariation::Rand1Bin};
    ScalarOptions scalar;
    std::size_t threads{1};

    /// Throws ConfigurationError on out-of-range values.
    void validate() const;
};

struct Individual {
    Genotype genotype;
    ObjectiveVector objectives;
    std::vector<double> point;  // relative objectives, minimization form
    double scalar{0.0};         // single-objective score
    double fitness{0.0};        // SPEA2 F(i), or the scalar score for DE
};

/// The one segment block that variation may touch in greedy mode.
struct GreedyMask {
    std::size_t active{0};
    std::size_t total{1};

    [[nodiscard]] bool allows(std::size_t block) const { return block == active; }
    void shift_right() { active = (active + 1) % total; }
};

/// Per-block limits used to repair genes after variation.
struct GeneBounds {
    Encoding encoding{Encoding::Angular};
    double max_length{40.0};
    std::vector<std::pair<Vec2, Vec2>> boxes;  // Cartesian, per block
    std::optional<GeneLattice> lattice;

    static GeneBounds from(const Scenario& scenario, Encoding encoding);
    /// Clamp, wrap angles and snap to the lattice, in place.
    void repair_block(Genotype& g, std::size_t block) const;
};

class EvaluationError : public std::runtime_error {
public:
    EvaluationError(std::size_t generation, std::size_t individual, const std::string& what);
    std::size_t generation;
    std::size_t individual;
};

using Evaluator = std::function<ObjectiveVector(const Genotype&)>;

/// Samples population_size genotypes; each is resampled up to
/// scenario.init.retries times until it satisfies every constraint.
std::vector<Genotype> init_population(const EAConfig& config, const Scenario& scenario, Rng& rng);
Genotype random_genotype(const EAConfig& config, const Scenario& scenario, Rng& rng);

/// One-point crossover at a block boundary `point` in [1, blocks - 1]: the
/// children swap every block from `point` on.
std::pair<Genotype, Genotype> crossover_at(const Genotype& a, const Genotype& b, std::size_t point);

/// Without a mask: one-point crossover at a uniformly drawn interior block
/// boundary (copies for single-block genotypes). With a mask: the parents
/// exchange the active block only.
std::pair<Genotype, Genotype> crossover(const Genotype& a, const Genotype& b, const std::optional<GreedyMask>& mask, Rng& rng);

/// Adds N(0, sigma^2) to each eligible gene with probability mutation_rate.
Genotype mutate(const Genotype& g, const std::optional<GreedyMask>& mask, const EAConfig& config, const GeneBounds& bounds,
                Rng& rng);

/// a dominates b when a <= b everywhere and a < b somewhere.
bool dominates(std::span<const double> a, std::span<const double> b);

struct Spea2Fitness {
    std::vector<double> strength;
    std::vector<double> raw;
    std::vector<double> density;
    std::vector<double> fitness;
};

Spea2Fitness spea2_fitness(std::span<const std::vector<double>> points);

/// Indices into `points` forming the next archive of exactly
/// min(archive_size, points.size()) members.
std::vector<std::size_t> environmental_selection(std::span<const std::vector<double>> points, std::span<const double> fitness,
                                                 std::size_t archive_size, Rng& rng);

/// Two uniform draws with replacement; lower fitness wins, ties by coin flip.
std::size_t binary_tournament(std::span<const double> fitness, Rng& rng);

/// DE/rand/1/bin trial for explicitly chosen donors; `forced` is the gene
/// that always comes from the donor. Genes outside the mask keep the target's
/// values.
Genotype de_trial(const Genotype& target, const Genotype& r1, const Genotype& r2, const Genotype& r3, double weight,
                  double crossover_rate, std::size_t forced, const std::optional<GreedyMask>& mask, const GeneBounds& bounds,
                  Rng& rng);

struct GenerationRecord {
    std::size_t generation{0};
    std::size_t model_runs{0};   // cumulative evaluations
    std::size_t simulations{0};  // cumulative wave model runs actually performed
    std::size_t active_segment{0};
    std::vector<Individual> population;  // evaluated this generation
    std::vector<Individual> archive;     // SPEA2 archive, or DE survivors
    double best_scalar{0.0};             // best single-objective score so far
};

struct ArchiveHistory {
    Algorithm algorithm{Algorithm::SPEA2};
    EAConfig config;
    std::vector<GenerationRecord> generations;
    std::size_t offspring_checked{0};
    std::size_t mask_violations{0};
    std::size_t clamped_scores{0};

    [[nodiscard]] const GenerationRecord& last() const { return generations.back(); }
};

Individual make_individual(Genotype genotype, const ObjectiveVector& objectives, const Scenario& scenario,
                           const ScalarOptions& options = {});

/// Greedy SPEA2 loop. A budget of G generations evaluates max(G, 1)
/// populations; the mask advances after every generations_per_segment.
ArchiveHistory run_spea2(const EAConfig& config, const Scenario& scenario, const Evaluator& evaluator = {});

/// Single-objective DE minimizing the scalar score, same budget accounting.
ArchiveHistory run_de(const EAConfig& config, const Scenario& scenario, const Evaluator& evaluator = {});

ArchiveHistory run(Algorithm algorithm, const EAConfig& config, const Scenario& scenario, const Evaluator& evaluator = {});

}  // namespace breakwater
