#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "breakwater/evolution.hpp"
#include "breakwater/objectives.hpp"

namespace breakwater {

using Point = std::vector<double>;

/// Indices of points not dominated by any other point. Duplicates survive.
std::vector<std::size_t> nondominated_indices(std::span<const Point> points);
std::vector<Point> nondominated(std::span<const Point> points);

struct HypervolumeResult {
    double value{0.0};
    std::size_t ignored{0};  // points that do not strictly dominate the reference
};

/// Exact Lebesgue measure of the union of boxes [p, reference]; 2-D by
/// sort-and-sweep, higher dimensions by slicing along the last objective.
HypervolumeResult hypervolume_checked(std::span<const Point> points, const Point& reference);
double hypervolume(std::span<const Point> points, const Point& reference);

/// (cost, mean wave height) for plotting.
std::pair<double, double> reduce_to_2d(const ObjectiveVector& objectives);

/// Which components of the (cost, nav, waves...) minimization vector to keep.
struct ObjectiveSelection {
    bool cost{true};
    bool nav{true};
    bool waves{true};

    [[nodiscard]] Point project(const Point& full) const;
    [[nodiscard]] std::string describe() const;
    static ObjectiveSelection parse(const std::string& csv);
};

/// Nadir of the given points pushed outward by `margin` times the
/// ideal-to-nadir range (or times max(|nadir|, 1) when the range is zero).
Point reference_point(std::span<const Point> points, double margin = 0.1);

struct FrontSnapshot {
    std::size_t generation{0};
    std::size_t model_runs{0};
    std::vector<Point> points;  // cumulative nondominated feasible set
    double hypervolume{0.0};
};

/// Feasible evaluated individuals of a history, projected.
std::vector<Point> feasible_points(const ArchiveHistory& history, const ObjectiveSelection& selection);

/// Per generation, the nondominated set of every feasible individual
/// evaluated so far and its hypervolume.
std::vector<FrontSnapshot> cumulative_fronts(const ArchiveHistory& history, const ObjectiveSelection& selection,
                                             const Point& reference);

struct Quartiles {
    double min{0.0};
    double q1{0.0};
    double median{0.0};
    double q3{0.0};
    double max{0.0};

    [[nodiscard]] double iqr() const { return q3 - q1; }
};

/// Linear-interpolation quartiles.
Quartiles quartiles(std::vector<double> values);

struct ConvergenceRow {
    std::size_t generation{0};
    std::size_t model_runs{0};
    Quartiles hypervolume;
};

struct ConvergenceSummary {
    std::vector<ConvergenceRow> rows;
    std::vector<std::vector<Point>> run_fronts;  // final front per run
    std::vector<Point> union_front;  // distinct points, sorted
    std::vector<std::vector<double>> trajectories;  // hypervolume per run per generation
};

/// Same report from precomputed cumulative fronts, one vector per run.
ConvergenceSummary convergence_from_snapshots(std::span<const std::vector<FrontSnapshot>> per_run);

ConvergenceSummary convergence_report(std::span<const ArchiveHistory> histories, const ObjectiveSelection& selection,
                                      const Point& reference);

}  // namespace breakwater
