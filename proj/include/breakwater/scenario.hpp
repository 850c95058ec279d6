#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "breakwater/geometry.hpp"
#include "breakwater/wave_model.hpp"

namespace breakwater {

/// Every problem found while validating a scenario, not just the first.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> problems);
    [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct ExistingStructure {
    std::string name;
    Breakwater structure;
};

/// Reference values for relative objectives, computed once at load.
struct Baseline {
    double cost_reference{1.0};       // meters, C_ref > 0
    double nav_distance{1.0};         // meters, existing configuration
    std::vector<double> wave_heights; // meters, one per control point
};

struct InitializationRanges {
    double max_length{40.0};  // cells
    double min_angle{-90.0};  // degrees, relative
    double max_angle{90.0};
    int retries{50};
    /// Cartesian endpoints are drawn from attachment +/- this many cells. When
    /// unset, segment k of a breakwater (from 0) uses max_length * (k + 1),
    /// the reach of its end vertex under the angular encoding.
    std::optional<double> cartesian_half_width;
};

/// Optional discrete gene values (angular encoding only). Genes snap to the
/// nearest listed value after initialization and variation.
struct GeneLattice {
    std::vector<double> lengths;
    std::vector<double> angles;
};

struct Scenario {
    std::string name;
    bool illustrative{false};
    ScenarioGrid grid;
    std::vector<ExistingStructure> existing;
    std::vector<AttachmentPoint> attachments;
    std::vector<Vec2> control_points;
    Polyline fairway;
    BoundaryConditions boundary;
    MaterialCoefficients materials;
    int diffusion_passes{3};
    double sampling_step{0.25};
    InitializationRanges init;
    std::optional<GeneLattice> lattice;
    std::optional<double> cost_reference_override;

    // derived at load
    Baseline baseline;
    ObstacleSet existing_obstacles;
    std::vector<Polyline> existing_polylines;
    std::shared_ptr<const WaveModel> wave_model;

    [[nodiscard]] std::size_t total_segments() const { return expected_blocks(attachments); }
    [[nodiscard]] double cell_size() const { return grid.cell_size(); }

    /// Lower/upper corner of the Cartesian sampling box for one segment's end vertex.
    [[nodiscard]] std::pair<Vec2, Vec2> cartesian_box(std::size_t attachment, int segment) const;
};

/// Lists every problem with a scenario's static data. Empty means valid.
std::vector<std::string> validate(const Scenario& scenario);

/// Validates, fills derived state and computes the baseline with one wave
/// model run over the existing structures only.
void finalize(Scenario& scenario);

Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json_text(const std::string& text, const std::filesystem::path& base_dir = {});

/// Canonical JSON with the depth matrix inline, enough to reload the scenario.
std::string scenario_to_json_text(const Scenario& scenario);

/// Attachment index and segment index within that breakwater for a block.
std::pair<std::size_t, int> block_owner(const Scenario& scenario, std::size_t block);

}  // namespace breakwater
