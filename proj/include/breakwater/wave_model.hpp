#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "breakwater/geometry.hpp"

namespace breakwater {

struct BoundaryConditions {
    double incident_height{1.0};   // meters, > 0
    double wave_direction{90.0};   // degrees, the direction waves travel toward
};

/// Per-cell significant wave height in meters, row-major, row 0 first.
class WaveField {
public:
    WaveField() = default;
    WaveField(int n_cols, int n_rows, double fill = 0.0);

    [[nodiscard]] int n_cols() const { return n_cols_; }
    [[nodiscard]] int n_rows() const { return n_rows_; }
    [[nodiscard]] double at(CellIndex c) const { return values_[index(c)]; }
    double& at(CellIndex c) { return values_[index(c)]; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    [[nodiscard]] double mean() const;
    [[nodiscard]] double max() const;

    friend bool operator==(const WaveField&, const WaveField&) = default;

private:
    [[nodiscard]] std::size_t index(CellIndex c) const {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(n_cols_) + static_cast<std::size_t>(c.col);
    }

    int n_cols_{0};
    int n_rows_{0};
    std::vector<double> values_;
};

/// Obstacle cells with transmission coefficients in [0, 1]. Adding a cell twice
/// keeps the smaller coefficient.
class ObstacleSet {
public:
    ObstacleSet() = default;
    explicit ObstacleSet(std::span<const RasterCell> cells) { add(cells); }

    void add(CellIndex cell, double transmission);
    void add(std::span<const RasterCell> cells);

    [[nodiscard]] std::span<const RasterCell> cells() const { return cells_; }
    [[nodiscard]] std::size_t size() const { return cells_.size(); }
    [[nodiscard]] bool empty() const { return cells_.empty(); }

    /// Dense per-cell transmission, 1.0 where no obstacle sits.
    [[nodiscard]] std::vector<double> dense(const ScenarioGrid& grid) const;

private:
    std::vector<RasterCell> cells_;  // sorted by cell
};

/// Two-stage stand-in: straight-ray shadowing against obstacles and land,
/// then `diffusion_passes` rounds of 3x3 averaging over water cells.
WaveField simulate(const ScenarioGrid& grid, const ObstacleSet& obstacles, const BoundaryConditions& bc,
                   int diffusion_passes);

/// Bilinear interpolation between the four surrounding cell centers.
std::vector<double> sample(const WaveField& field, std::span<const Vec2> control_points);

/// Anything that turns an obstacle set into a wave-height field.
class WaveModel {
public:
    virtual ~WaveModel() = default;
    [[nodiscard]] virtual WaveField run(const ScenarioGrid& grid, const ObstacleSet& obstacles,
                                        const BoundaryConditions& bc) const = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

class ShadowDiffusionModel final : public WaveModel {
public:
    explicit ShadowDiffusionModel(int diffusion_passes = 3);

    [[nodiscard]] WaveField run(const ScenarioGrid& grid, const ObstacleSet& obstacles,
                                const BoundaryConditions& bc) const override;
    [[nodiscard]] std::string name() const override { return "shadow_diffusion"; }
    [[nodiscard]] int diffusion_passes() const { return passes_; }

private:
    int passes_;
};

// File exchange with an external model. Inside the work directory:
//   grid.txt       "n_cols n_rows cell_size" then the depth matrix (land = -9999)
//   obstacles.txt  one "col row transmission" line per obstacle cell
//   boundary.txt   "incident_height <m>" and "wave_direction <deg>" lines
// The command is run as `<command> <workdir>` and must write heights.txt: one
// line per grid row (row 0 first), space-separated meters, land as -9999.
class FileExchangeWaveModel final : public WaveModel {
public:
    FileExchangeWaveModel(std::filesystem::path workdir, std::string command);

    [[nodiscard]] WaveField run(const ScenarioGrid& grid, const ObstacleSet& obstacles,
                                const BoundaryConditions& bc) const override;
    [[nodiscard]] std::string name() const override { return "file_exchange"; }
    [[nodiscard]] const std::filesystem::path& workdir() const { return workdir_; }
    [[nodiscard]] const std::string& command() const { return command_; }

    static void write_inputs(const std::filesystem::path& workdir, const ScenarioGrid& grid, const ObstacleSet& obstacles,
                             const BoundaryConditions& bc);

private:
    std::filesystem::path workdir_;
    std::string command_;
};

/// Plain-text height matrix: one line per row, row 0 first, land cells as the
/// grid's land sentinel. Values use shortest round-trip formatting.
void write_height_matrix(std::ostream& out, const WaveField& field, const ScenarioGrid& grid);
void write_height_matrix(const std::filesystem::path& path, const WaveField& field, const ScenarioGrid& grid);
WaveField read_height_matrix(std::istream& in, int n_cols, int n_rows);
WaveField read_height_matrix(const std::filesystem::path& path, int n_cols, int n_rows);

std::string format_double(double v);

}  // namespace breakwater
