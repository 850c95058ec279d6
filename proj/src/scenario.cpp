#include "breakwater/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "breakwater/objectives.hpp"

namespace breakwater {

using nlohmann::json;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::string msg = "scenario validation failed:";
    for (const auto& p : problems) msg += "\n  - " + p;
    return msg;
}

Vec2 point_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigurationError("expected a point [x, y], got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>()};
}

json point_to(Vec2 p) { return json::array({p.x, p.y}); }

Polyline polyline_from(const json& j) {
    Polyline line;
    for (const auto& p : j) line.push_back(point_from(p));
    return line;
}

json polyline_to(const Polyline& line) {
    json j = json::array();
    for (const auto p : line) j.push_back(point_to(p));
    return j;
}

bool point_in_polygon(Vec2 p, const Polyline& poly) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
    }
    return inside;
}

std::vector<double> read_depth_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot read depth file " + path.string());
    std::vector<double> depth;
    double v = 0.0;
    while (in >> v) depth.push_back(v);
    return depth;
}

ScenarioGrid grid_from(const json& g, const std::filesystem::path& base_dir) {
    const int n_cols = g.at("n_cols").get<int>();
    const int n_rows = g.at("n_rows").get<int>();
    const double cell_size = g.value("cell_size", 25.0);
    if (n_cols < 2 || n_rows < 2) throw ValidationError({"grid needs n_cols >= 2 and n_rows >= 2"});
    if (!(cell_size > 0.0)) throw ValidationError({"cell_size must be positive, got " + std::to_string(cell_size)});
    const auto count = static_cast<std::size_t>(n_cols) * static_cast<std::size_t>(n_rows);
    std::vector<double> depth;
    if (g.contains("depth")) {
        for (const auto& row : g.at("depth"))
            for (const auto& v : row) depth.push_back(v.get<double>());
    } else if (g.contains("depth_file")) {
        depth = read_depth_file(base_dir / g.at("depth_file").get<std::string>());
    } else {
        depth.assign(count, g.value("water_depth", 10.0));
        if (g.contains("land_polygons")) {
            std::vector<Polyline> polygons;
            for (const auto& poly : g.at("land_polygons")) polygons.push_back(polyline_from(poly));
            for (int r = 0; r < n_rows; ++r)
                for (int c = 0; c < n_cols; ++c)
                    for (const auto& poly : polygons)
                        if (point_in_polygon({static_cast<double>(c), static_cast<double>(r)}, poly))
                            depth[static_cast<std::size_t>(r) * static_cast<std::size_t>(n_cols) + static_cast<std::size_t>(c)] =
                                ScenarioGrid::kLandSentinel;
        }
    }
    if (depth.size() != count)
        throw ValidationError({"depth matrix has " + std::to_string(depth.size()) + " values, grid needs " + std::to_string(count)});
    return {n_cols, n_rows, cell_size, std::move(depth)};
}

std::shared_ptr<const WaveModel> wave_model_from(const json& j, int& diffusion_passes, const std::filesystem::path& base_dir) {
    const std::string kind = j.value("kind", "shadow_diffusion");
    diffusion_passes = j.value("diffusion_passes", diffusion_passes);
    if (kind == "shadow_diffusion") return std::make_shared<ShadowDiffusionModel>(std::max(0, diffusion_passes));
    if (kind == "file_exchange")
        return std::make_shared<FileExchangeWaveModel>(base_dir / j.at("workdir").get<std::string>(), j.at("command").get<std::string>());
    throw ConfigurationError("unknown wave model kind '" + kind + "'");
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

std::pair<Vec2, Vec2> Scenario::cartesian_box(std::size_t attachment, int segment) const {
    const auto& att = attachments.at(attachment);
    const double half = init.cartesian_half_width.value_or(init.max_length * (segment + 1));
    const Vec2 lo{std::max(-0.5, att.position.x - half), std::max(-0.5, att.position.y - half)};
    const Vec2 hi{std::min(grid.n_cols() - 0.5, att.position.x + half), std::min(grid.n_rows() - 0.5, att.position.y + half)};
    return {lo, hi};
}

namespace {

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

// On or within one cell of an existing structure, or next to a land cell.
bool anchored(const Scenario& s, Vec2 p) {
    for (const auto& e : s.existing) {
        const auto& v = e.structure.vertices;
        if (v.size() == 1 && distance(p, v[0]) <= 1.0) return true;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (point_segment_distance(p, v[i - 1], v[i]) <= 1.0) return true;
    }
    const CellIndex c = s.grid.cell_of(p);
    for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
            const CellIndex nb{c.col + dc, c.row + dr};
            if (s.grid.in_bounds(nb) && s.grid.is_land(nb)) return true;
        }
    return false;
}

}  // namespace

std::vector<std::string> validate(const Scenario& s) {
    std::vector<std::string> problems;
    const auto& grid = s.grid;
    if (!(grid.cell_size() > 0.0)) problems.push_back("cell_size must be positive");
    if (s.attachments.empty()) problems.push_back("at least one attachment point is required");
    for (std::size_t i = 0; i < s.attachments.size(); ++i) {
        const auto& a = s.attachments[i];
        if (!grid.contains(a.position)) {
            problems.push_back("attachment " + std::to_string(i) + " lies outside the grid");
        } else if (!anchored(s, a.position)) {
            problems.push_back("attachment " + std::to_string(i) + " is not on or next to an existing structure or the coast");
        }
        if (a.segments < 1) problems.push_back("attachment " + std::to_string(i) + " needs at least one segment");
    }
    if (s.control_points.empty()) problems.push_back("at least one control point is required");
    for (std::size_t i = 0; i < s.control_points.size(); ++i) {
        const Vec2 p = s.control_points[i];
        if (!grid.contains(p)) {
            problems.push_back("control point " + std::to_string(i) + " lies outside the grid");
        } else if (grid.is_land(grid.cell_of(p))) {
            problems.push_back("control point " + std::to_string(i) + " lies on land");
        }
    }
    if (s.fairway.empty()) problems.push_back("fairway needs at least one point");
    if (!(s.boundary.incident_height > 0.0)) problems.push_back("incident_height must be positive");
    for (const auto& [name, c] : {std::pair{"solid_wall", s.materials.solid_wall}, std::pair{"tetrapod", s.materials.tetrapod}})
        if (!(c >= 0.0 && c <= 1.0)) problems.push_back(std::string("transmission coefficient for ") + name + " must lie in [0, 1]");
    if (s.diffusion_passes < 0) problems.push_back("diffusion_passes must be non-negative");
    if (!(s.sampling_step > 0.0)) problems.push_back("sampling_step must be positive");
    if (!(s.init.max_length > 0.0)) problems.push_back("initialization max_length must be positive");
    if (s.init.min_angle > s.init.max_angle) problems.push_back("initialization angle range is empty");
    if (s.init.retries < 0) problems.push_back("initialization retries must be non-negative");
    if (s.lattice) {
        if (s.lattice->lengths.empty() || s.lattice->angles.empty()) problems.push_back("lattice needs lengths and angles");
        for (const double l : s.lattice->lengths)
            if (l < 0.0) problems.push_back("lattice lengths must be non-negative");
        for (const double a : s.lattice->angles)
            if (a < -180.0 || a >= 180.0) problems.push_back("lattice angles must lie in [-180, 180)");
    }
    if (s.cost_reference_override && !(*s.cost_reference_override > 0.0)) problems.push_back("cost_reference must be positive");
    return problems;
}

void finalize(Scenario& s) {
    auto problems = validate(s);
    if (!problems.empty()) throw ValidationError(std::move(problems));

    s.existing_polylines.clear();
    std::vector<Breakwater> structures;
    double existing_length = 0.0;
    for (const auto& e : s.existing) {
        s.existing_polylines.push_back(e.structure.vertices);
        structures.push_back(e.structure);
        for (std::size_t i = 1; i < e.structure.vertices.size(); ++i)
            existing_length += distance(e.structure.vertices[i - 1], e.structure.vertices[i]);
    }
    s.existing_obstacles = ObstacleSet(rasterize(structures, s.grid, s.materials));
    if (!s.wave_model) s.wave_model = std::make_shared<ShadowDiffusionModel>(s.diffusion_passes);

    Baseline baseline;
    baseline.cost_reference = s.cost_reference_override.value_or(existing_length * s.cell_size());
    const Layout empty = decode(Genotype{Encoding::Angular, std::vector<SegmentGene>(s.total_segments())}, s.attachments);
    baseline.nav_distance = min_distance_to_fairway(empty, s.fairway, s.sampling_step, s.cell_size());
    const WaveField field = s.wave_model->run(s.grid, s.existing_obstacles, s.boundary);
    baseline.wave_heights = sample(field, s.control_points);

    if (!(baseline.cost_reference > 0.0))
        problems.push_back("cost reference is zero: add existing structures or set cost_reference");
    if (!(baseline.nav_distance > 0.0)) problems.push_back("attachment points touch the fairway, baseline navigation distance is zero");
    for (std::size_t i = 0; i < baseline.wave_heights.size(); ++i)
        if (!(baseline.wave_heights[i] > 0.0))
            problems.push_back("control point " + std::to_string(i) + " has zero baseline wave height");
    if (!problems.empty()) throw ValidationError(std::move(problems));
    s.baseline = std::move(baseline);
}

Scenario scenario_from_json_text(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError({std::string("scenario is not valid JSON: ") + e.what()});
    }
    Scenario s;
    try {
        s.name = j.value("name", "unnamed");
        s.illustrative = j.value("illustrative", false);
        s.grid = grid_from(j.at("grid"), base_dir);
        for (const auto& e : j.value("existing_structures", json::array())) {
            ExistingStructure es;
            es.name = e.value("name", "");
            es.structure.material = material_from_string(e.value("material", "solid_wall"));
            es.structure.vertices = polyline_from(e.at("points"));
            s.existing.push_back(std::move(es));
        }
        for (const auto& a : j.at("attachments")) {
            AttachmentPoint ap;
            ap.position = point_from(a.at("position"));
            ap.base_angle = a.value("base_angle", 0.0);
            ap.segments = a.value("segments", 1);
            ap.material = material_from_string(a.value("material", "solid_wall"));
            s.attachments.push_back(ap);
        }
        for (const auto& p : j.at("control_points")) s.control_points.push_back(point_from(p));
        s.fairway = polyline_from(j.at("fairway"));
        const auto& b = j.at("boundary");
        s.boundary.incident_height = b.at("incident_height").get<double>();
        s.boundary.wave_direction = b.at("wave_direction").get<double>();
        if (j.contains("materials")) {
            s.materials.solid_wall = j["materials"].value("solid_wall", s.materials.solid_wall);
            s.materials.tetrapod = j["materials"].value("tetrapod", s.materials.tetrapod);
        }
        s.sampling_step = j.value("sampling_step", s.sampling_step);
        if (j.contains("wave_model")) {
            s.wave_model = wave_model_from(j["wave_model"], s.diffusion_passes, base_dir);
        }
        if (j.contains("initialization")) {
            const auto& i = j["initialization"];
            s.init.max_length = i.value("max_length", s.init.max_length);
            s.init.min_angle = i.value("min_angle", s.init.min_angle);
            s.init.max_angle = i.value("max_angle", s.init.max_angle);
            s.init.retries = i.value("retries", s.init.retries);
            if (i.contains("cartesian_half_width")) s.init.cartesian_half_width = i["cartesian_half_width"].get<double>();
        }
        if (j.contains("lattice")) {
            GeneLattice lattice;
            lattice.lengths = j["lattice"].at("lengths").get<std::vector<double>>();
            lattice.angles = j["lattice"].at("angles").get<std::vector<double>>();
            s.lattice = std::move(lattice);
        }
        if (j.contains("cost_reference")) s.cost_reference_override = j["cost_reference"].get<double>();
    } catch (const json::exception& e) {
        throw ValidationError({std::string("malformed scenario: ") + e.what()});
    } catch (const ConfigurationError& e) {
        throw ValidationError({e.what()});
    }
    finalize(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({"cannot open scenario file " + path.string()});
    std::ostringstream text;
    text << in.rdbuf();
    return scenario_from_json_text(text.str(), path.parent_path());
}

std::string scenario_to_json_text(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["illustrative"] = s.illustrative;
    json depth = json::array();
    for (int r = 0; r < s.grid.n_rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < s.grid.n_cols(); ++c) row.push_back(s.grid.depth({c, r}));
        depth.push_back(std::move(row));
    }
    j["grid"] = {{"n_cols", s.grid.n_cols()}, {"n_rows", s.grid.n_rows()}, {"cell_size", s.grid.cell_size()}, {"depth", std::move(depth)}};
    json existing = json::array();
    for (const auto& e : s.existing)
        existing.push_back({{"name", e.name}, {"material", to_string(e.structure.material)}, {"points", polyline_to(e.structure.vertices)}});
    j["existing_structures"] = std::move(existing);
    json attachments = json::array();
    for (const auto& a : s.attachments)
        attachments.push_back({{"position", point_to(a.position)},
                               {"base_angle", a.base_angle},
                               {"segments", a.segments},
                               {"material", to_string(a.material)}});
    j["attachments"] = std::move(attachments);
    j["control_points"] = polyline_to(s.control_points);
    j["fairway"] = polyline_to(s.fairway);
    j["boundary"] = {{"incident_height", s.boundary.incident_height}, {"wave_direction", s.boundary.wave_direction}};
    j["materials"] = {{"solid_wall", s.materials.solid_wall}, {"tetrapod", s.materials.tetrapod}};
    j["sampling_step"] = s.sampling_step;
    const auto* file_model = dynamic_cast<const FileExchangeWaveModel*>(s.wave_model.get());
    if (file_model) {
        j["wave_model"] = {{"kind", "file_exchange"},
                           {"workdir", std::filesystem::absolute(file_model->workdir()).string()},
                           {"command", file_model->command()}};
    } else {
        j["wave_model"] = {{"kind", "shadow_diffusion"}, {"diffusion_passes", s.diffusion_passes}};
    }
    json init = {{"max_length", s.init.max_length},
                 {"min_angle", s.init.min_angle},
                 {"max_angle", s.init.max_angle},
                 {"retries", s.init.retries}};
    if (s.init.cartesian_half_width) init["cartesian_half_width"] = *s.init.cartesian_half_width;
    j["initialization"] = std::move(init);
    if (s.lattice) j["lattice"] = {{"lengths", s.lattice->lengths}, {"angles", s.lattice->angles}};
    if (s.cost_reference_override) j["cost_reference"] = *s.cost_reference_override;
    return j.dump(2) + "\n";
}

std::pair<std::size_t, int> block_owner(const Scenario& scenario, std::size_t block) {
    std::size_t remaining = block;
    for (std::size_t a = 0; a < scenario.attachments.size(); ++a) {
        const auto n = static_cast<std::size_t>(scenario.attachments[a].segments);
        if (remaining < n) return {a, static_cast<int>(remaining)};
        remaining -= n;
    }
    throw ConfigurationError("block index " + std::to_string(block) + " out of range");
}

}  // namespace breakwater
