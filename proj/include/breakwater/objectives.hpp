#pragma once

#include <cstddef>
#include <vector>

#include "breakwater/geometry.hpp"
#include "breakwater/scenario.hpp"
#include "breakwater/wave_model.hpp"

namespace breakwater {

struct ConstraintCounts {
    std::size_t self_intersections{0};
    std::size_t fairway_intersections{0};
    std::size_t land_coverage{0};

    [[nodiscard]] std::size_t total() const { return self_intersections + fairway_intersections + land_coverage; }
};

struct ObjectiveVector {
    double cost{0.0};          // meters of new breakwater
    double nav_distance{0.0};  // meters to the fairway center line
    std::vector<double> wave_heights;
    ConstraintCounts constraints;
    bool simulated{false};     // false when the wave run was skipped

    [[nodiscard]] bool feasible() const { return constraints.total() == 0; }
    friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;
};

/// Percent changes against the base configuration.
struct RelativeObjectiveVector {
    double rel_cost{0.0};
    std::vector<double> rel_wave_heights;
    double rel_nav{0.0};
};

double cost(const Layout& layout, double cell_size);

ConstraintCounts constraint_counts(const Layout& layout, const Scenario& scenario);

/// Obstacles of the existing structures plus the new layout.
ObstacleSet obstacles_for(const Layout& layout, const Scenario& scenario);

/// Wave field of the harbor with the given new layout added.
WaveField simulate_layout(const Layout& layout, const Scenario& scenario);

/// Decode, count constraints, and run the wave model only when every
/// constraint count is zero. Infeasible layouts keep the baseline heights.
ObjectiveVector evaluate(const Genotype& genotype, const Scenario& scenario);

RelativeObjectiveVector relativize(const ObjectiveVector& raw, const Baseline& baseline);

/// Which relative terms fill the two numerator slots of the scalar score.
enum class ScalarMapping {
    WaveMeanThenNav,  // mean of the wave-height vector, then navigation
    TableOrder,       // navigation first, then the first control point only
};

struct ScalarOptions {
    double penalty_per_violation{1e6};
    ScalarMapping mapping{ScalarMapping::WaveMeanThenNav};
};

struct ScalarScore {
    double value{0.0};
    bool denominator_clamped{false};
};

/// (100 + wave term + nav term) / (100 - cost term), plus a fixed penalty per
/// constraint violation. Lower is better.
ScalarScore single_objective(const RelativeObjectiveVector& rel, const ConstraintCounts& constraints,
                             const ScalarOptions& options = {});

/// Penalty added to every component of the minimization vector per violation.
inline constexpr double kDominancePenalty = 1e3;

/// Relative objectives in minimization form: (cost, -nav, wave heights...).
/// Infeasible layouts are pushed away by kDominancePenalty per violation.
std::vector<double> minimization_vector(const RelativeObjectiveVector& rel, const ConstraintCounts& constraints);

}  // namespace breakwater
