#include "breakwater/wave_model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace breakwater {

WaveField::WaveField(int n_cols, int n_rows, double fill)
    : n_cols_(n_cols), n_rows_(n_rows),
      values_(static_cast<std::size_t>(n_cols) * static_cast<std::size_t>(n_rows), fill) {}

double WaveField::mean() const {
    if (values_.empty()) return 0.0;
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double WaveField::max() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

void ObstacleSet::add(CellIndex cell, double transmission) {
    const double t = std::clamp(transmission, 0.0, 1.0);
    auto it = std::lower_bound(cells_.begin(), cells_.end(), cell,
                               [](const RasterCell& rc, CellIndex c) { return rc.cell < c; });
    if (it != cells_.end() && it->cell == cell) {
        it->transmission = std::min(it->transmission, t);
    } else {
        cells_.insert(it, RasterCell{cell, t});
    }
}

void ObstacleSet::add(std::span<const RasterCell> cells) {
    for (const auto& rc : cells) add(rc.cell, rc.transmission);
}

std::vector<double> ObstacleSet::dense(const ScenarioGrid& grid) const {
    std::vector<double> t(grid.cell_count(), 1.0);
    for (const auto& rc : cells_)
        if (grid.in_bounds(rc.cell)) t[grid.index(rc.cell)] = rc.transmission;
    return t;
}

namespace {

Vec2 upwave_direction(double wave_direction_deg) {
    const double rad = wave_direction_deg * std::numbers::pi / 180.0;
    double dx = -std::cos(rad);
    double dy = -std::sin(rad);
    if (std::abs(dx) < 1e-15) dx = 0.0;
    if (std::abs(dy) < 1e-15) dy = 0.0;
    return {dx, dy};
}

// Parameter at which p + t*d leaves the closed grid extent.
double exit_parameter(const ScenarioGrid& grid, Vec2 p, Vec2 d) {
    double t = std::numeric_limits<double>::infinity();
    if (d.x > 0) t = std::min(t, (grid.n_cols() - 0.5 - p.x) / d.x);
    if (d.x < 0) t = std::min(t, (-0.5 - p.x) / d.x);
    if (d.y > 0) t = std::min(t, (grid.n_rows() - 0.5 - p.y) / d.y);
    if (d.y < 0) t = std::min(t, (-0.5 - p.y) / d.y);
    return t;
}

// The product runs over sorted coefficients so it does not depend on the
// traversal order (mirrored scenes give bit-identical fields).
double ray_transmission(const ScenarioGrid& grid, const std::vector<double>& transmission, CellIndex start, Vec2 d,
                        std::vector<double>& scratch) {
    const Vec2 p{static_cast<double>(start.col), static_cast<double>(start.row)};
    const double t = exit_parameter(grid, p, d);
    const Vec2 q{p.x + t * d.x, p.y + t * d.y};
    scratch.clear();
    bool blocked = false;
    const auto visit = [&](CellIndex c) {
        const std::size_t i = grid.index(c);
        if (grid.is_land_at(i)) {
            blocked = true;
        } else if (transmission[i] < 1.0) {
            scratch.push_back(transmission[i]);
        }
    };
    if (p == q) {
        visit(start);
    } else {
        visit_supercover(Segment{p, q}, grid, visit);
    }
    if (blocked) return 0.0;
    std::sort(scratch.begin(), scratch.end());
    double factor = 1.0;
    for (const double c : scratch) factor *= c;
    return factor;
}

void diffuse(const ScenarioGrid& grid, WaveField& field, int passes) {
    const int nc = grid.n_cols();
    const int nr = grid.n_rows();
    WaveField next = field;
    std::array<double, 9> window{};
    for (int pass = 0; pass < passes; ++pass) {
        for (int r = 0; r < nr; ++r) {
            for (int c = 0; c < nc; ++c) {
                const CellIndex cell{c, r};
                if (grid.is_land(cell)) continue;
                std::size_t n = 0;
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        const CellIndex nb{c + dc, r + dr};
                        if (!grid.in_bounds(nb) || grid.is_land(nb)) continue;
                        window[n++] = field.at(nb);
                    }
                }
                std::sort(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(n));
                double sum = 0.0;
                for (std::size_t k = 0; k < n; ++k) sum += window[k];
                next.at(cell) = sum / static_cast<double>(n);
            }
        }
        std::swap(field, next);
    }
}

}  // namespace

WaveField simulate(const ScenarioGrid& grid, const ObstacleSet& obstacles, const BoundaryConditions& bc,
                   int diffusion_passes) {
    if (!(bc.incident_height > 0.0)) throw ConfigurationError("incident wave height must be positive");
    if (diffusion_passes < 0) throw ConfigurationError("diffusion passes must be non-negative");
    const auto transmission = obstacles.dense(grid);
    const Vec2 d = upwave_direction(bc.wave_direction);
    WaveField field(grid.n_cols(), grid.n_rows(), 0.0);
    std::vector<double> scratch;
    for (int r = 0; r < grid.n_rows(); ++r) {
        for (int c = 0; c < grid.n_cols(); ++c) {
            const CellIndex cell{c, r};
            if (grid.is_land(cell)) continue;
            field.at(cell) = bc.incident_height * ray_transmission(grid, transmission, cell, d, scratch);
        }
    }
    diffuse(grid, field, diffusion_passes);
    return field;
}

std::vector<double> sample(const WaveField& field, std::span<const Vec2> control_points) {
    std::vector<double> out;
    out.reserve(control_points.size());
    const int nc = field.n_cols();
    const int nr = field.n_rows();
    for (const Vec2 p : control_points) {
        const double x = std::clamp(p.x, 0.0, static_cast<double>(nc - 1));
        const double y = std::clamp(p.y, 0.0, static_cast<double>(nr - 1));
        const int x0 = std::min(static_cast<int>(std::floor(x)), nc - 2);
        const int y0 = std::min(static_cast<int>(std::floor(y)), nr - 2);
        const double fx = x - x0;
        const double fy = y - y0;
        const double v00 = field.at({x0, y0});
        const double v10 = field.at({x0 + 1, y0});
        const double v01 = field.at({x0, y0 + 1});
        const double v11 = field.at({x0 + 1, y0 + 1});
        const double bottom = std::lerp(v00, v10, fx);
        const double top = std::lerp(v01, v11, fx);
        const double v = std::lerp(bottom, top, fy);
        out.push_back(v);
    }
    return out;
}

ShadowDiffusionModel::ShadowDiffusionModel(int diffusion_passes) : passes_(diffusion_passes) {
    if (diffusion_passes < 0) throw ConfigurationError("diffusion passes must be non-negative");
}

WaveField ShadowDiffusionModel::run(const ScenarioGrid& grid, const ObstacleSet& obstacles,
                                    const BoundaryConditions& bc) const {
    return simulate(grid, obstacles, bc, passes_);
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), ptr};
}

void write_height_matrix(std::ostream& out, const WaveField& field, const ScenarioGrid& grid) {
    for (int r = 0; r < field.n_rows(); ++r) {
        for (int c = 0; c < field.n_cols(); ++c) {
            if (c > 0) out << ' ';
            const CellIndex cell{c, r};
            out << format_double(grid.is_land(cell) ? ScenarioGrid::kLandSentinel : field.at(cell));
        }
        out << '\n';
    }
}

void write_height_matrix(const std::filesystem::path& path, const WaveField& field, const ScenarioGrid& grid) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_height_matrix(out, field, grid);
}

WaveField read_height_matrix(std::istream& in, int n_cols, int n_rows) {
    WaveField field(n_cols, n_rows, 0.0);
    std::string line;
    for (int r = 0; r < n_rows; ++r) {
        if (!std::getline(in, line)) throw std::runtime_error("height matrix has fewer than " + std::to_string(n_rows) + " rows");
        std::istringstream row(line);
        std::string token;
        for (int c = 0; c < n_cols; ++c) {
            if (!(row >> token)) throw std::runtime_error("height matrix row " + std::to_string(r) + " is short");
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
            if (ec != std::errc{} || ptr != token.data() + token.size())
                throw std::runtime_error("bad number '" + token + "' in height matrix");
            field.at({c, r}) = v == ScenarioGrid::kLandSentinel ? 0.0 : v;
        }
    }
    return field;
}

WaveField read_height_matrix(const std::filesystem::path& path, int n_cols, int n_rows) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return read_height_matrix(in, n_cols, n_rows);
}

FileExchangeWaveModel::FileExchangeWaveModel(std::filesystem::path workdir, std::string command)
    : workdir_(std::move(workdir)), command_(std::move(command)) {}

void FileExchangeWaveModel::write_inputs(const std::filesystem::path& workdir, const ScenarioGrid& grid,
                                         const ObstacleSet& obstacles, const BoundaryConditions& bc) {
    std::filesystem::create_directories(workdir);
    {
        std::ofstream g(workdir / "grid.txt");
        g << grid.n_cols() << ' ' << grid.n_rows() << ' ' << format_double(grid.cell_size()) << '\n';
        for (int r = 0; r < grid.n_rows(); ++r) {
            for (int c = 0; c < grid.n_cols(); ++c) {
                if (c > 0) g << ' ';
                g << format_double(grid.depth({c, r}));
            }
            g << '\n';
        }
    }
    {
        std::ofstream o(workdir / "obstacles.txt");
        for (const auto& rc : obstacles.cells())
            o << rc.cell.col << ' ' << rc.cell.row << ' ' << format_double(rc.transmission) << '\n';
    }
    std::ofstream b(workdir / "boundary.txt");
    b << "incident_height " << format_double(bc.incident_height) << '\n'
      << "wave_direction " << format_double(bc.wave_direction) << '\n';
}

WaveField FileExchangeWaveModel::run(const ScenarioGrid& grid, const ObstacleSet& obstacles,
                                     const BoundaryConditions& bc) const {
    write_inputs(workdir_, grid, obstacles, bc);
    std::filesystem::remove(workdir_ / "heights.txt");
    const std::string cmd = command_ + " '" + workdir_.string() + "'";
    if (std::system(cmd.c_str()) != 0) throw std::runtime_error("external wave model failed: " + cmd);
    return read_height_matrix(workdir_ / "heights.txt", grid.n_cols(), grid.n_rows());
}

}  // namespace breakwater
