#include "breakwater/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace breakwater {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kZeroLength = 1e-12;

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

int sign_with_tolerance(double v, double scale) {
    const double eps = 1e-12 * std::max(1.0, scale);
    if (v > eps) return 1;
    if (v < -eps) return -1;
    return 0;
}

// Parameter of p along s when p is known to be collinear with s.
double collinear_parameter(const Segment& s, Vec2 p) {
    const double dx = s.b.x - s.a.x;
    const double dy = s.b.y - s.a.y;
    return std::abs(dx) >= std::abs(dy) ? (p.x - s.a.x) / dx : (p.y - s.a.y) / dy;
}

bool on_segment(const Segment& s, Vec2 p) {
    constexpr double eps = 1e-12;
    return p.x >= std::min(s.a.x, s.b.x) - eps && p.x <= std::max(s.a.x, s.b.x) + eps &&
           p.y >= std::min(s.a.y, s.b.y) - eps && p.y <= std::max(s.a.y, s.b.y) + eps;
}

}  // namespace

double distance(Vec2 a, Vec2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

std::string to_string(Material m) { return m == Material::SolidWall ? "solid_wall" : "tetrapod"; }
std::string to_string(Encoding e) { return e == Encoding::Cartesian ? "cartesian" : "angular"; }

Material material_from_string(const std::string& s) {
    if (s == "solid_wall") return Material::SolidWall;
    if (s == "tetrapod") return Material::Tetrapod;
    throw ConfigurationError("unknown material '" + s + "'");
}

Encoding encoding_from_string(const std::string& s) {
    if (s == "cartesian") return Encoding::Cartesian;
    if (s == "angular") return Encoding::Angular;
    throw ConfigurationError("unknown encoding '" + s + "'");
}

ScenarioGrid::ScenarioGrid(int n_cols, int n_rows, double cell_size, std::vector<double> depth)
    : n_cols_(n_cols), n_rows_(n_rows), cell_size_(cell_size), depth_(std::move(depth)) {
    if (n_cols < 2 || n_rows < 2) throw ConfigurationError("grid needs at least 2 columns and 2 rows");
    if (!(cell_size > 0.0)) throw ConfigurationError("cell size must be positive");
    if (depth_.size() != static_cast<std::size_t>(n_cols) * static_cast<std::size_t>(n_rows))
        throw ConfigurationError("depth matrix size does not match grid dimensions");
    land_.resize(depth_.size());
    for (std::size_t i = 0; i < depth_.size(); ++i) {
        land_[i] = depth_[i] == kLandSentinel ? 1 : 0;
        if (!land_[i] && depth_[i] < 0.0) throw ConfigurationError("negative depth on a water cell");
    }
}

ScenarioGrid ScenarioGrid::open_water(int n_cols, int n_rows, double cell_size, double depth) {
    return {n_cols, n_rows, cell_size,
            std::vector<double>(static_cast<std::size_t>(n_cols) * static_cast<std::size_t>(n_rows), depth)};
}

bool ScenarioGrid::contains(Vec2 p) const {
    return p.x >= -0.5 && p.y >= -0.5 && p.x <= n_cols_ - 0.5 && p.y <= n_rows_ - 0.5;
}

CellIndex ScenarioGrid::cell_of(Vec2 p) const {
    return {static_cast<int>(std::floor(p.x + 0.5)), static_cast<int>(std::floor(p.y + 0.5))};
}

void ScenarioGrid::set_land(CellIndex c) {
    depth_[index(c)] = kLandSentinel;
    land_[index(c)] = 1;
}

std::vector<Segment> Breakwater::segments() const {
    std::vector<Segment> out;
    for (std::size_t i = 1; i < vertices.size(); ++i) {
        Segment s{vertices[i - 1], vertices[i]};
        if (!s.degenerate()) out.push_back(s);
    }
    return out;
}

std::vector<Segment> Layout::segments() const {
    std::vector<Segment> out;
    for (const auto& bw : breakwaters) {
        auto s = bw.segments();
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

double normalize_angle(double degrees) {
    double a = degrees - 360.0 * std::floor((degrees + 180.0) / 360.0);
    // floor rounding can land exactly on +180 for inputs just below -180
    if (a >= 180.0) a -= 360.0;
    return a;
}

std::size_t expected_blocks(std::span<const AttachmentPoint> attachments) {
    std::size_t n = 0;
    for (const auto& a : attachments) n += static_cast<std::size_t>(a.segments);
    return n;
}

Layout decode(const Genotype& genotype, std::span<const AttachmentPoint> attachments) {
    if (genotype.blocks.size() != expected_blocks(attachments))
        throw ConfigurationError("genotype has " + std::to_string(genotype.blocks.size()) + " blocks, attachment configuration needs " +
                                 std::to_string(expected_blocks(attachments)));
    Layout layout;
    layout.breakwaters.reserve(attachments.size());
    std::size_t block = 0;
    for (const auto& att : attachments) {
        Breakwater bw;
        bw.material = att.material;
        bw.vertices.reserve(static_cast<std::size_t>(att.segments) + 1);
        bw.vertices.push_back(att.position);
        double heading = att.base_angle;
        for (int s = 0; s < att.segments; ++s, ++block) {
            const auto& g = genotype.blocks[block];
            const Vec2 prev = bw.vertices.back();
            if (genotype.encoding == Encoding::Cartesian) {
                bw.vertices.push_back({g.first, g.second});
                continue;
            }
            if (g.first < 0.0) throw ConfigurationError("negative segment length in angular block " + std::to_string(block));
            heading += g.second;
            if (g.first == 0.0) {
                bw.vertices.push_back(prev);
            } else {
                const double rad = heading * kDegToRad;
                bw.vertices.push_back({prev.x + g.first * std::cos(rad), prev.y + g.first * std::sin(rad)});
            }
        }
        layout.breakwaters.push_back(std::move(bw));
    }
    return layout;
}

Genotype convert(const Genotype& genotype, Encoding target, std::span<const AttachmentPoint> attachments) {
    if (genotype.encoding == target) {
        if (genotype.blocks.size() != expected_blocks(attachments))
            throw ConfigurationError("genotype block count does not match attachment configuration");
        return genotype;
    }
    const Layout layout = decode(genotype, attachments);
    Genotype out{target, {}};
    out.blocks.reserve(genotype.blocks.size());
    for (std::size_t b = 0; b < layout.breakwaters.size(); ++b) {
        const auto& verts = layout.breakwaters[b].vertices;
        double heading = attachments[b].base_angle;
        for (std::size_t i = 1; i < verts.size(); ++i) {
            if (target == Encoding::Cartesian) {
                out.blocks.push_back({verts[i].x, verts[i].y});
                continue;
            }
            const double dx = verts[i].x - verts[i - 1].x;
            const double dy = verts[i].y - verts[i - 1].y;
            const double len = std::hypot(dx, dy);
            if (len <= kZeroLength) {
                out.blocks.push_back({0.0, 0.0});
                continue;
            }
            const double absolute = std::atan2(dy, dx) * kRadToDeg;
            out.blocks.push_back({len, normalize_angle(absolute - heading)});
            heading = absolute;
        }
    }
    return out;
}

SegmentRelation relate(const Segment& s, const Segment& t) {
    if (s.degenerate() || t.degenerate()) return SegmentRelation::Disjoint;
    const double scale = std::max(s.length(), t.length());
    const double scale2 = scale * scale;
    const int o1 = sign_with_tolerance(cross(s.a, s.b, t.a), scale2);
    const int o2 = sign_with_tolerance(cross(s.a, s.b, t.b), scale2);
    const int o3 = sign_with_tolerance(cross(t.a, t.b, s.a), scale2);
    const int o4 = sign_with_tolerance(cross(t.a, t.b, s.b), scale2);

    if (o1 == 0 && o2 == 0) {
        double u0 = collinear_parameter(s, t.a);
        double u1 = collinear_parameter(s, t.b);
        if (u0 > u1) std::swap(u0, u1);
        const double lo = std::max(0.0, u0);
        const double hi = std::min(1.0, u1);
        const double eps = 1e-12;
        if (hi - lo > eps) return SegmentRelation::Overlap;
        if (hi - lo >= -eps) return SegmentRelation::Touch;
        return SegmentRelation::Disjoint;
    }
    if (o1 * o2 < 0 && o3 * o4 < 0) return SegmentRelation::Cross;
    if ((o1 == 0 && on_segment(s, t.a)) || (o2 == 0 && on_segment(s, t.b)) || (o3 == 0 && on_segment(t, s.a)) ||
        (o4 == 0 && on_segment(t, s.b)))
        return SegmentRelation::Touch;
    return SegmentRelation::Disjoint;
}

namespace {

bool counts_as_intersection(SegmentRelation r) { return r == SegmentRelation::Cross || r == SegmentRelation::Overlap; }

std::vector<Segment> polyline_segments(const Polyline& line) {
    std::vector<Segment> out;
    for (std::size_t i = 1; i < line.size(); ++i) {
        Segment s{line[i - 1], line[i]};
        if (!s.degenerate()) out.push_back(s);
    }
    return out;
}

}  // namespace

std::size_t count_self_intersections(const Layout& layout, std::span<const Polyline> existing_structures) {
    const auto mine = layout.segments();
    std::size_t count = 0;
    for (std::size_t i = 0; i < mine.size(); ++i)
        for (std::size_t j = i + 1; j < mine.size(); ++j)
            if (counts_as_intersection(relate(mine[i], mine[j]))) ++count;
    for (const auto& structure : existing_structures)
        for (const auto& e : polyline_segments(structure))
            for (const auto& s : mine)
                if (counts_as_intersection(relate(s, e))) ++count;
    return count;
}

std::size_t count_fairway_intersections(const Layout& layout, const Polyline& fairway) {
    std::size_t count = 0;
    const auto lane = polyline_segments(fairway);
    for (const auto& s : layout.segments())
        for (const auto& f : lane)
            if (counts_as_intersection(relate(s, f))) ++count;
    return count;
}

std::vector<Vec2> sample_polyline(const Polyline& line, double step) {
    if (!(step > 0.0)) throw ConfigurationError("sampling step must be positive");
    std::vector<Vec2> points;
    if (line.empty()) return points;
    points.push_back(line.front());
    for (std::size_t i = 1; i < line.size(); ++i) {
        const Vec2 a = line[i - 1];
        const Vec2 b = line[i];
        const double len = distance(a, b);
        if (len <= kZeroLength) continue;
        const auto n = static_cast<std::size_t>(std::ceil(len / step));
        for (std::size_t k = 1; k <= n; ++k) {
            const double t = static_cast<double>(k) / static_cast<double>(n);
            points.push_back(k == n ? b : Vec2{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    return points;
}

double min_distance_to_fairway(const Layout& layout, const Polyline& fairway, double sampling_step, double cell_size) {
    if (fairway.empty()) throw ConfigurationError("fairway has no points");
    const auto lane = sample_polyline(fairway, sampling_step);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& bw : layout.breakwaters) {
        for (const Vec2 p : sample_polyline(bw.vertices, sampling_step)) {
            for (const Vec2 q : lane) {
                const double dx = p.x - q.x;
                const double dy = p.y - q.y;
                best = std::min(best, dx * dx + dy * dy);
            }
        }
    }
    return std::isfinite(best) ? std::sqrt(best) * cell_size : 0.0;
}

std::vector<CellIndex> supercover(const Segment& segment, const ScenarioGrid& grid) {
    std::vector<CellIndex> cells;
    visit_supercover(segment, grid, [&](CellIndex c) { cells.push_back(c); });
    return cells;
}

std::vector<RasterCell> rasterize(std::span<const Breakwater> breakwaters, const ScenarioGrid& grid,
                                  const MaterialCoefficients& coefficients) {
    std::map<CellIndex, double> covered;
    for (const auto& bw : breakwaters) {
        const double coeff = std::clamp(coefficients.of(bw.material), 0.0, 1.0);
        for (const auto& seg : bw.segments()) {
            for (const auto cell : supercover(seg, grid)) {
                auto [it, inserted] = covered.emplace(cell, coeff);
                if (!inserted) it->second = std::min(it->second, coeff);
            }
        }
    }
    std::vector<RasterCell> out;
    out.reserve(covered.size());
    for (const auto& [cell, coeff] : covered) out.push_back({cell, coeff});
    return out;
}

std::vector<RasterCell> rasterize(const Layout& layout, const ScenarioGrid& grid, const MaterialCoefficients& coefficients) {
    return rasterize(std::span<const Breakwater>(layout.breakwaters), grid, coefficients);
}

std::size_t count_land_coverage(const Layout& layout, const ScenarioGrid& grid) {
    std::size_t n = 0;
    for (const auto& rc : rasterize(layout, grid)) n += grid.is_land(rc.cell) ? 1 : 0;
    return n;
}

}  // namespace breakwater
