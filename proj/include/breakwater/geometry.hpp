#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace breakwater {

/// Raised when inputs do not match the scenario's attachment configuration.
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Continuous position in grid units. Cell (c, r) has its center at (c, r)
/// and covers the closed square [c - 0.5, c + 0.5] x [r - 0.5, r + 0.5].
struct Vec2 {
    double x{0.0};
    double y{0.0};

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

double distance(Vec2 a, Vec2 b);

using Polyline = std::vector<Vec2>;

struct Segment {
    Vec2 a;
    Vec2 b;

    [[nodiscard]] double length() const { return distance(a, b); }
    [[nodiscard]] bool degenerate() const { return a == b; }
};

struct CellIndex {
    int col{0};
    int row{0};

    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

enum class Material { SolidWall, Tetrapod };
enum class Encoding { Cartesian, Angular };

std::string to_string(Material m);
std::string to_string(Encoding e);
Material material_from_string(const std::string& s);
Encoding encoding_from_string(const std::string& s);

/// Regular bathymetry/land grid. Depths are stored row-major, row 0 first.
class ScenarioGrid {
public:
    static constexpr double kLandSentinel = -9999.0;

    ScenarioGrid() = default;
    ScenarioGrid(int n_cols, int n_rows, double cell_size, std::vector<double> depth);

    /// All-water grid with uniform depth.
    static ScenarioGrid open_water(int n_cols, int n_rows, double cell_size = 25.0, double depth = 10.0);

    [[nodiscard]] int n_cols() const { return n_cols_; }
    [[nodiscard]] int n_rows() const { return n_rows_; }
    [[nodiscard]] double cell_size() const { return cell_size_; }
    [[nodiscard]] std::size_t cell_count() const { return depth_.size(); }

    [[nodiscard]] bool in_bounds(CellIndex c) const {
        return c.col >= 0 && c.row >= 0 && c.col < n_cols_ && c.row < n_rows_;
    }
    /// Inside the closed grid extent [-0.5, n - 0.5] on both axes.
    [[nodiscard]] bool contains(Vec2 p) const;
    [[nodiscard]] std::size_t index(CellIndex c) const {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(n_cols_) + static_cast<std::size_t>(c.col);
    }
    [[nodiscard]] CellIndex cell_of(Vec2 p) const;

    [[nodiscard]] bool is_land(CellIndex c) const { return land_[index(c)] != 0; }
    [[nodiscard]] bool is_land_at(std::size_t i) const { return land_[i] != 0; }
    [[nodiscard]] double depth(CellIndex c) const { return depth_[index(c)]; }
    [[nodiscard]] std::span<const double> depths() const { return depth_; }
    [[nodiscard]] std::span<const unsigned char> land_mask() const { return land_; }

    void set_land(CellIndex c);

private:
    int n_cols_{0};
    int n_rows_{0};
    double cell_size_{25.0};
    std::vector<double> depth_;
    std::vector<unsigned char> land_;
};

struct AttachmentPoint {
    Vec2 position;
    double base_angle{0.0};  // degrees
    int segments{1};
    Material material{Material::SolidWall};
};

/// Two scalars per breakwater segment. Cartesian: absolute endpoint (x, y) in
/// cells. Angular: (length in cells, angle in degrees relative to the
/// previous segment or to the attachment's base angle).
struct SegmentGene {
    double first{0.0};
    double second{0.0};

    friend bool operator==(const SegmentGene&, const SegmentGene&) = default;
};

struct Genotype {
    Encoding encoding{Encoding::Angular};
    std::vector<SegmentGene> blocks;

    [[nodiscard]] std::size_t gene_count() const { return 2 * blocks.size(); }
    [[nodiscard]] double gene(std::size_t i) const { return i % 2 == 0 ? blocks[i / 2].first : blocks[i / 2].second; }
    double& gene(std::size_t i) { return i % 2 == 0 ? blocks[i / 2].first : blocks[i / 2].second; }

    friend bool operator==(const Genotype&, const Genotype&) = default;
};

struct Breakwater {
    Polyline vertices;  // starts at the attachment point
    Material material{Material::SolidWall};

    [[nodiscard]] std::vector<Segment> segments() const;
};

struct Layout {
    std::vector<Breakwater> breakwaters;

    /// Non-degenerate segments of every breakwater, in order.
    [[nodiscard]] std::vector<Segment> segments() const;
};

/// Wraps an angle in degrees to [-180, 180).
double normalize_angle(double degrees);

std::size_t expected_blocks(std::span<const AttachmentPoint> attachments);

Layout decode(const Genotype& genotype, std::span<const AttachmentPoint> attachments);
Genotype convert(const Genotype& genotype, Encoding target, std::span<const AttachmentPoint> attachments);

enum class SegmentRelation { Disjoint, Touch, Cross, Overlap };

/// Touch means the segments meet only at an endpoint of at least one of them.
/// Cross is a single transversal intersection interior to both; Overlap is a
/// collinear overlap of positive length.
SegmentRelation relate(const Segment& s, const Segment& t);

std::size_t count_self_intersections(const Layout& layout, std::span<const Polyline> existing_structures);
std::size_t count_fairway_intersections(const Layout& layout, const Polyline& fairway);

/// Evenly spaced points along a polyline, endpoints included, spacing <= step.
std::vector<Vec2> sample_polyline(const Polyline& line, double step);

/// Minimum distance in meters between sampled layout points and sampled
/// fairway points. Layout polylines include their attachment vertex, so an
/// all-zero-length layout measures from the attachment points.
double min_distance_to_fairway(const Layout& layout, const Polyline& fairway, double sampling_step, double cell_size);

/// Calls visit(CellIndex) for every in-grid cell whose closed square meets the
/// segment, column by column. Degenerate segments visit nothing.
template <typename Visit>
void visit_supercover(const Segment& segment, const ScenarioGrid& grid, Visit&& visit) {
    if (segment.degenerate()) return;
    const Vec2 p = segment.a;
    const Vec2 q = segment.b;
    const double xlo = p.x < q.x ? p.x : q.x;
    const double xhi = p.x < q.x ? q.x : p.x;
    const int c0 = std::max(0, static_cast<int>(std::ceil(xlo - 0.5)));
    const int c1 = std::min(grid.n_cols() - 1, static_cast<int>(std::floor(xhi + 0.5)));
    const bool vertical = p.x == q.x;
    const double slope = vertical ? 0.0 : (q.y - p.y) / (q.x - p.x);
    const auto y_at = [&](double x) { return x == p.x ? p.y : (x == q.x ? q.y : p.y + (x - p.x) * slope); };
    for (int c = c0; c <= c1; ++c) {
        double y0 = p.y;
        double y1 = q.y;
        if (!vertical) {
            y0 = y_at(std::max(xlo, c - 0.5));
            y1 = y_at(std::min(xhi, c + 0.5));
        }
        const double ylo = y0 < y1 ? y0 : y1;
        const double yhi = y0 < y1 ? y1 : y0;
        const int r0 = std::max(0, static_cast<int>(std::ceil(ylo - 0.5)));
        const int r1 = std::min(grid.n_rows() - 1, static_cast<int>(std::floor(yhi + 0.5)));
        for (int r = r0; r <= r1; ++r) visit(CellIndex{c, r});
    }
}

/// Cells whose closed square meets the segment, clipped to the grid.
std::vector<CellIndex> supercover(const Segment& segment, const ScenarioGrid& grid);

struct RasterCell {
    CellIndex cell;
    double transmission{1.0};
};

struct MaterialCoefficients {
    double solid_wall{0.1};
    double tetrapod{0.35};

    [[nodiscard]] double of(Material m) const { return m == Material::SolidWall ? solid_wall : tetrapod; }
};

/// Unique cells covered by the layout. A cell shared by several segments keeps
/// the smallest transmission coefficient.
std::vector<RasterCell> rasterize(const Layout& layout, const ScenarioGrid& grid, const MaterialCoefficients& coefficients = {});
std::vector<RasterCell> rasterize(std::span<const Breakwater> breakwaters, const ScenarioGrid& grid, const MaterialCoefficients& coefficients);

std::size_t count_land_coverage(const Layout& layout, const ScenarioGrid& grid);

}  // namespace breakwater
