#include "breakwater/objectives.hpp"

#include <cmath>
#include <numeric>

namespace breakwater {

double cost(const Layout& layout, double cell_size) {
    double total = 0.0;
    for (const auto& bw : layout.breakwaters)
        for (std::size_t i = 1; i < bw.vertices.size(); ++i) total += distance(bw.vertices[i - 1], bw.vertices[i]);
    return total * cell_size;
}

ConstraintCounts constraint_counts(const Layout& layout, const Scenario& scenario) {
    ConstraintCounts c;
    c.self_intersections = count_self_intersections(layout, scenario.existing_polylines);
    c.fairway_intersections = count_fairway_intersections(layout, scenario.fairway);
    c.land_coverage = count_land_coverage(layout, scenario.grid);
    return c;
}

ObstacleSet obstacles_for(const Layout& layout, const Scenario& scenario) {
    ObstacleSet obstacles = scenario.existing_obstacles;
    obstacles.add(rasterize(layout, scenario.grid, scenario.materials));
    return obstacles;
}

WaveField simulate_layout(const Layout& layout, const Scenario& scenario) {
    if (!scenario.wave_model) throw ConfigurationError("scenario has no wave model");
    return scenario.wave_model->run(scenario.grid, obstacles_for(layout, scenario), scenario.boundary);
}

ObjectiveVector evaluate(const Genotype& genotype, const Scenario& scenario) {
    const Layout layout = decode(genotype, scenario.attachments);
    ObjectiveVector out;
    out.cost = cost(layout, scenario.cell_size());
    out.nav_distance = min_distance_to_fairway(layout, scenario.fairway, scenario.sampling_step, scenario.cell_size());
    out.constraints = constraint_counts(layout, scenario);
    if (out.feasible()) {
        out.wave_heights = sample(simulate_layout(layout, scenario), scenario.control_points);
        out.simulated = true;
    } else {
        out.wave_heights = scenario.baseline.wave_heights;
    }
    return out;
}

RelativeObjectiveVector relativize(const ObjectiveVector& raw, const Baseline& baseline) {
    if (raw.wave_heights.size() != baseline.wave_heights.size())
        throw ConfigurationError("wave height vector does not match the baseline's control points");
    RelativeObjectiveVector rel;
    // total harbor structure cost is C_ref + cost, so the increase over C_ref is cost itself
    rel.rel_cost = raw.cost / baseline.cost_reference * 100.0;
    rel.rel_wave_heights.reserve(raw.wave_heights.size());
    for (std::size_t i = 0; i < raw.wave_heights.size(); ++i) {
        const double old = baseline.wave_heights[i];
        rel.rel_wave_heights.push_back((raw.wave_heights[i] - old) / old * 100.0);
    }
    rel.rel_nav = (raw.nav_distance - baseline.nav_distance) / baseline.nav_distance * 100.0;
    return rel;
}

ScalarScore single_objective(const RelativeObjectiveVector& rel, const ConstraintCounts& constraints,
                             const ScalarOptions& options) {
    double wave_term = 0.0;
    double nav_term = 0.0;
    if (options.mapping == ScalarMapping::WaveMeanThenNav) {
        if (!rel.rel_wave_heights.empty())
            wave_term = std::accumulate(rel.rel_wave_heights.begin(), rel.rel_wave_heights.end(), 0.0) /
                        static_cast<double>(rel.rel_wave_heights.size());
        nav_term = rel.rel_nav;
    } else {
        wave_term = rel.rel_nav;
        nav_term = rel.rel_wave_heights.empty() ? 0.0 : rel.rel_wave_heights.front();
    }
    ScalarScore score;
    double denominator = 100.0 - rel.rel_cost;
    if (std::abs(denominator) < 1e-6) {
        denominator = denominator < 0.0 ? -1e-6 : 1e-6;
        score.denominator_clamped = true;
    }
    score.value = (100.0 + wave_term + nav_term) / denominator +
                  options.penalty_per_violation * static_cast<double>(constraints.total());
    return score;
}

std::vector<double> minimization_vector(const RelativeObjectiveVector& rel, const ConstraintCounts& constraints) {
    std::vector<double> v;
    v.reserve(2 + rel.rel_wave_heights.size());
    v.push_back(rel.rel_cost);
    v.push_back(0.0 - rel.rel_nav);
    v.insert(v.end(), rel.rel_wave_heights.begin(), rel.rel_wave_heights.end());
    const double penalty = kDominancePenalty * static_cast<double>(constraints.total());
    if (penalty > 0.0)
        for (auto& x : v) x += penalty;
    return v;
}

}  // namespace breakwater
