#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>

#include "breakwater/objectives.hpp"
#include "fixtures.hpp"

using namespace breakwater;

namespace {

class CountingModel final : public WaveModel {
public:
    explicit CountingModel(std::atomic<int>& runs) : runs_(runs) {}
    [[nodiscard]] WaveField run(const ScenarioGrid& grid, const ObstacleSet& obstacles, const BoundaryConditions& bc) const override {
        ++runs_;
        return simulate(grid, obstacles, bc, 3);
    }
    [[nodiscard]] std::string name() const override { return "counting"; }

private:
    std::atomic<int>& runs_;
};

Genotype zeros(const Scenario& s) { return Genotype{Encoding::Angular, std::vector<SegmentGene>(s.total_segments())}; }

}  // namespace

TEST_CASE("cost of a 3-4-5 segment is 125 m at 25 m cells") {
    Layout l;
    l.breakwaters.push_back({{{0, 0}, {3, 4}}, Material::SolidWall});
    CHECK(cost(l, 25.0) == 125.0);
    l.breakwaters.push_back({{{1, 1}, {1, 1}}, Material::Tetrapod});
    CHECK(cost(l, 25.0) == 125.0);
}

TEST_CASE("base configuration is the zero point of every relative objective") {
    const Scenario s = scenario_from_json_text(small_harbor_text());
    const ObjectiveVector base = evaluate(zeros(s), s);
    CHECK(base.cost == 0.0);
    CHECK(base.nav_distance == s.baseline.nav_distance);
    CHECK(base.wave_heights == s.baseline.wave_heights);
    const auto rel = relativize(base, s.baseline);
    CHECK(rel.rel_cost == 0.0);
    CHECK(rel.rel_nav == 0.0);
    for (const double w : rel.rel_wave_heights) CHECK(w == 0.0);
    CHECK(single_objective(rel, base.constraints).value == 1.0);
    CHECK(single_objective(rel, base.constraints, {1e6, ScalarMapping::TableOrder}).value == 1.0);
}

TEST_CASE("relative objectives against hand-computed values") {
    Baseline b;
    b.cost_reference = 1000.0;
    b.nav_distance = 200.0;
    b.wave_heights = {2.0, 4.0};
    ObjectiveVector raw;
    raw.cost = 250.0;
    raw.nav_distance = 150.0;
    raw.wave_heights = {1.0, 5.0};
    const auto rel = relativize(raw, b);
    CHECK(rel.rel_cost == 25.0);
    CHECK(rel.rel_nav == -25.0);
    CHECK(rel.rel_wave_heights == std::vector<double>{-50.0, 25.0});
    // (100 + mean(-50, 25) + (-25)) / (100 - 25)
    CHECK(single_objective(rel, {}).value == doctest::Approx(62.5 / 75.0).epsilon(1e-15));
    // table order: navigation first, then the first control point only
    CHECK(single_objective(rel, {}, {1e6, ScalarMapping::TableOrder}).value == doctest::Approx(25.0 / 75.0).epsilon(1e-15));
    raw.wave_heights = {1.0};
    CHECK_THROWS_AS(relativize(raw, b), ConfigurationError);
}

TEST_CASE("scalar score penalty and denominator clamp") {
    RelativeObjectiveVector rel{10.0, {0.0}, 0.0};
    ConstraintCounts c;
    c.fairway_intersections = 2;
    const double clean = single_objective(rel, {}).value;
    CHECK(single_objective(rel, c).value == doctest::Approx(clean + 2e6));
    rel.rel_cost = 100.0;
    const auto clamped = single_objective(rel, {});
    CHECK(clamped.denominator_clamped);
    CHECK(clamped.value == doctest::Approx(100.0 / 1e-6));
    rel.rel_cost = 100.0 + 1e-9;
    CHECK(single_objective(rel, {}).value == doctest::Approx(-100.0 / 1e-6));
}

TEST_CASE("scalar score decreases as mean wave height improves") {
    RelativeObjectiveVector rel{20.0, {0.0, 0.0}, -10.0};
    double previous = single_objective(rel, {}).value;
    for (int i = 1; i <= 20; ++i) {
        rel.rel_wave_heights = {-2.0 * i, -1.0 * i};
        const double v = single_objective(rel, {}).value;
        CHECK(v < previous);
        previous = v;
    }
}

TEST_CASE("minimization vector negates navigation and pushes infeasible points away") {
    const RelativeObjectiveVector rel{5.0, {-10.0, 3.0}, -20.0};
    CHECK(minimization_vector(rel, {}) == std::vector<double>{5.0, 20.0, -10.0, 3.0});
    ConstraintCounts c;
    c.land_coverage = 1;
    c.self_intersections = 1;
    CHECK(minimization_vector(rel, c) == std::vector<double>{2005.0, 2020.0, 1990.0, 2003.0});
    const RelativeObjectiveVector zero{0.0, {}, 0.0};
    CHECK_FALSE(std::signbit(minimization_vector(zero, {})[1]));
}

TEST_CASE("infeasible layouts skip the wave model and keep baseline heights") {
    std::atomic<int> runs{0};
    Scenario s = scenario_from_json_text(small_harbor_text());
    s.wave_model = std::make_shared<CountingModel>(runs);
    // long segment straight through the fairway
    Genotype g = zeros(s);
    g.blocks[0] = {4.0, 0.0};
    g.blocks[1] = {4.0, 0.0};
    const auto o = evaluate(g, s);
    CHECK(o.constraints.fairway_intersections > 0);
    CHECK_FALSE(o.simulated);
    CHECK(o.wave_heights == s.baseline.wave_heights);
    CHECK(runs == 0);
    const auto ok = evaluate(zeros(s), s);
    CHECK(ok.simulated);
    CHECK(runs == 1);
}

TEST_CASE("constraint counts cover self, fairway and land") {
    const Scenario s = scenario_from_json_text(small_harbor_text());
    Genotype g = zeros(s);
    g.blocks[2] = {3.0, 180.0};  // from (24, 20) turned back north into the coast
    const auto land = constraint_counts(decode(g, s.attachments), s);
    CHECK(land.land_coverage > 0);
    g = zeros(s);
    g.blocks[0] = {2.0, 180.0};  // back along the existing wall
    CHECK(constraint_counts(decode(g, s.attachments), s).self_intersections == 1);
}

TEST_CASE("new breakwaters never raise control heights above the baseline") {
    const Scenario s = scenario_from_json_text(small_harbor_text());
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> len(0.0, 5.0), ang(-90.0, 90.0);
    for (int i = 0; i < 50; ++i) {
        Genotype g = zeros(s);
        for (auto& b : g.blocks) b = {len(rng), ang(rng)};
        const auto o = evaluate(g, s);
        for (std::size_t k = 0; k < o.wave_heights.size(); ++k)
            CHECK(o.wave_heights[k] <= s.baseline.wave_heights[k] * (1.0 + 1e-12));
    }
}
