#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "breakwater/wave_model.hpp"

using namespace breakwater;

namespace {

bool segment_meets_square(Vec2 p, Vec2 q, double xmin, double xmax, double ymin, double ymax) {
    double t0 = 0.0, t1 = 1.0;
    const double dx = q.x - p.x, dy = q.y - p.y;
    const double P[4] = {-dx, dx, -dy, dy};
    const double Q[4] = {p.x - xmin, xmax - p.x, p.y - ymin, ymax - p.y};
    for (int i = 0; i < 4; ++i) {
        if (P[i] == 0.0) {
            if (Q[i] < 0.0) return false;
            continue;
        }
        const double r = Q[i] / P[i];
        if (P[i] < 0.0) t0 = std::max(t0, r);
        else t1 = std::min(t1, r);
        if (t0 > t1) return false;
    }
    return true;
}

// Straightforward re-derivation: for each water cell, test every obstacle
// and land cell square against the upwave ray, then average plainly.
WaveField oracle(const ScenarioGrid& grid, const ObstacleSet& obstacles, const BoundaryConditions& bc, int passes) {
    const int nc = grid.n_cols(), nr = grid.n_rows();
    const double rad = bc.wave_direction * 3.14159265358979323846 / 180.0;
    double ux = -std::cos(rad), uy = -std::sin(rad);
    if (std::abs(ux) < 1e-15) ux = 0.0;
    if (std::abs(uy) < 1e-15) uy = 0.0;
    WaveField f(nc, nr, 0.0);
    for (int r = 0; r < nr; ++r)
        for (int c = 0; c < nc; ++c) {
            if (grid.is_land({c, r})) continue;
            // far enough to leave the grid; clipping happens in the square test
            const Vec2 p{double(c), double(r)};
            double t = 1e9;
            if (ux > 0) t = std::min(t, (nc - 0.5 - p.x) / ux);
            if (ux < 0) t = std::min(t, (-0.5 - p.x) / ux);
            if (uy > 0) t = std::min(t, (nr - 0.5 - p.y) / uy);
            if (uy < 0) t = std::min(t, (-0.5 - p.y) / uy);
            const Vec2 q{p.x + t * ux, p.y + t * uy};
            double factor = 1.0;
            bool land = false;
            for (int rr = 0; rr < nr; ++rr)
                for (int cc = 0; cc < nc; ++cc) {
                    if (!segment_meets_square(p, q, cc - 0.5, cc + 0.5, rr - 0.5, rr + 0.5)) continue;
                    if (grid.is_land({cc, rr})) land = true;
                }
            for (const auto& rc : obstacles.cells())
                if (segment_meets_square(p, q, rc.cell.col - 0.5, rc.cell.col + 0.5, rc.cell.row - 0.5, rc.cell.row + 0.5))
                    factor *= rc.transmission;
            f.at({c, r}) = land ? 0.0 : bc.incident_height * factor;
        }
    for (int k = 0; k < passes; ++k) {
        WaveField next = f;
        for (int r = 0; r < nr; ++r)
            for (int c = 0; c < nc; ++c) {
                if (grid.is_land({c, r})) continue;
                double sum = 0.0;
                int n = 0;
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        const CellIndex nb{c + dc, r + dr};
                        if (!grid.in_bounds(nb) || grid.is_land(nb)) continue;
                        sum += f.at(nb);
                        ++n;
                    }
                next.at({c, r}) = sum / n;
            }
        f = next;
    }
    return f;
}

ObstacleSet random_obstacles(std::mt19937_64& rng, const ScenarioGrid& grid, int count) {
    std::uniform_int_distribution<int> c(0, grid.n_cols() - 1), r(0, grid.n_rows() - 1);
    std::uniform_real_distribution<double> t(0.0, 1.0);
    ObstacleSet o;
    for (int i = 0; i < count; ++i) o.add({c(rng), r(rng)}, t(rng));
    return o;
}

}  // namespace

TEST_CASE("open water gives uniform incident height") {
    const auto grid = ScenarioGrid::open_water(20, 15);
    for (const int passes : {0, 1, 3, 7})
        for (const double dir : {0.0, 45.0, 90.0, 200.0, 315.5}) {
            const auto f = simulate(grid, {}, {2.5, dir}, passes);
            for (const double v : f.values()) REQUIRE(v == 2.5);
        }
}

TEST_CASE("full-width solid wall transmits 0.1 of the incident height downwave") {
    const auto grid = ScenarioGrid::open_water(16, 12);
    ObstacleSet wall;
    for (int c = 0; c < 16; ++c) wall.add({c, 5}, 0.1);
    // waves travel toward +y, so rows above the wall are downwave
    const auto f = simulate(grid, wall, {3.0, 90.0}, 0);
    for (int r = 0; r < 12; ++r)
        for (int c = 0; c < 16; ++c) {
            const double want = r >= 5 ? 0.1 * 3.0 : 3.0;
            REQUIRE(f.at({c, r}) == want);
        }
}

TEST_CASE("land on the ray blocks waves completely") {
    auto grid = ScenarioGrid::open_water(10, 10);
    for (int c = 3; c <= 6; ++c) grid.set_land({c, 2});
    const auto f = simulate(grid, {}, {1.0, 90.0}, 0);
    CHECK(f.at({4, 8}) == 0.0);
    CHECK(f.at({1, 8}) == 1.0);
    CHECK(f.at({4, 2}) == 0.0);  // land itself
    CHECK(f.at({4, 1}) == 1.0);
}

TEST_CASE("blocked corridor: shadow zone behind a short wall") {
    const auto grid = ScenarioGrid::open_water(9, 9);
    ObstacleSet wall;
    for (int c = 3; c <= 5; ++c) wall.add({c, 3}, 0.35);
    const auto f = simulate(grid, wall, {2.0, 90.0}, 0);
    for (int r = 3; r < 9; ++r) {
        CHECK(f.at({4, r}) == 0.7);
        CHECK(f.at({1, r}) == 2.0);
    }
}

TEST_CASE("simulate agrees with brute-force oracle") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dir(0.0, 360.0);
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
        auto grid = ScenarioGrid::open_water(13, 11);
        std::uniform_int_distribution<int> c(0, 12), r(0, 10);
        for (int k = 0; k < 4; ++k) grid.set_land({c(rng), r(rng)});
        const auto obstacles = random_obstacles(rng, grid, 12);
        const BoundaryConditions bc{1.5, i % 4 == 0 ? 90.0 * (i % 8 == 0 ? 1 : 3) : dir(rng)};
        const int passes = i % 3;
        const auto got = simulate(grid, obstacles, bc, passes);
        const auto want = oracle(grid, obstacles, bc, passes);
        for (std::size_t k = 0; k < got.values().size(); ++k)
            worst = std::max(worst, std::abs(got.values()[k] - want.values()[k]));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("adding obstacles never raises any cell") {
    const auto grid = ScenarioGrid::open_water(20, 16);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> dir(0.0, 360.0);
    std::size_t violations = 0;
    for (int i = 0; i < 100; ++i) {
        const BoundaryConditions bc{2.0, dir(rng)};
        ObstacleSet base = random_obstacles(rng, grid, 8);
        ObstacleSet more = base;
        more.add(random_obstacles(rng, grid, 6).cells());
        const auto a = simulate(grid, base, bc, 3);
        const auto b = simulate(grid, more, bc, 3);
        for (std::size_t k = 0; k < a.values().size(); ++k)
            violations += b.values()[k] > a.values()[k] * (1.0 + 1e-12);
    }
    CHECK(violations == 0);
}

TEST_CASE("mirrored scene gives mirrored field bit for bit") {
    const auto grid = ScenarioGrid::open_water(15, 10);
    std::mt19937_64 rng(31);
    const auto obstacles = random_obstacles(rng, grid, 10);
    ObstacleSet mirrored;
    for (const auto& rc : obstacles.cells()) mirrored.add({14 - rc.cell.col, rc.cell.row}, rc.transmission);
    const auto a = simulate(grid, obstacles, {1.0, 90.0}, 2);
    const auto b = simulate(grid, mirrored, {1.0, 90.0}, 2);
    for (int r = 0; r < 10; ++r)
        for (int c = 0; c < 15; ++c) REQUIRE(a.at({c, r}) == b.at({14 - c, r}));
}

TEST_CASE("obstacle set keeps the smallest coefficient and clamps") {
    ObstacleSet o;
    o.add({1, 1}, 0.5);
    o.add({1, 1}, 0.7);
    o.add({0, 0}, 1.5);
    o.add({2, 0}, -1.0);
    REQUIRE(o.size() == 3);
    CHECK(o.cells()[0].transmission == 1.0);
    CHECK(o.cells()[1].cell == CellIndex{1, 1});
    CHECK(o.cells()[1].transmission == 0.5);
    CHECK(o.cells()[2].transmission == 0.0);
}

TEST_CASE("bilinear sampling") {
    WaveField f(3, 3, 0.0);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) f.at({c, r}) = 2.0 * c + 3.0 * r;
    const std::vector<Vec2> pts{{0, 0}, {2, 2}, {1, 1}, {0.5, 1.5}, {1.25, 0.75}};
    const auto s = sample(f, pts);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 10.0);
    CHECK(s[2] == 5.0);
    CHECK(s[3] == doctest::Approx(5.5));
    CHECK(s[4] == doctest::Approx(4.75));
    WaveField flat(4, 4, 1.7);
    for (const double v : sample(flat, std::vector<Vec2>{{0.3, 2.9}, {3, 3}})) CHECK(v == 1.7);
}

TEST_CASE("invalid inputs throw") {
    const auto grid = ScenarioGrid::open_water(4, 4);
    CHECK_THROWS_AS(simulate(grid, {}, {0.0, 0.0}, 1), ConfigurationError);
    CHECK_THROWS_AS(simulate(grid, {}, {1.0, 0.0}, -1), ConfigurationError);
    CHECK_THROWS_AS(ShadowDiffusionModel(-2), ConfigurationError);
}

TEST_CASE("height matrix round trip is bit exact and writes land as sentinel") {
    auto grid = ScenarioGrid::open_water(7, 5);
    grid.set_land({0, 0});
    std::mt19937_64 rng(37);
    const auto f = simulate(grid, random_obstacles(rng, grid, 6), {1.3, 77.0}, 3);
    std::stringstream ss;
    write_height_matrix(ss, f, grid);
    CHECK(ss.str().rfind("-9999 ", 0) == 0);
    const auto back = read_height_matrix(ss, 7, 5);
    CHECK(back == f);
    std::stringstream bad("1 2\n");
    CHECK_THROWS(read_height_matrix(bad, 2, 2));
}

TEST_CASE("file exchange adapter runs an external command") {
    const auto dir = std::filesystem::temp_directory_path() / "breakwater_fx_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto script = dir / "model.sh";
    {
        // echoes the grid back with every water cell at the incident height
        std::ofstream s(script);
        s << "#!/bin/sh\n"
             "h=$(awk '/incident_height/ {print $2}' \"$1/boundary.txt\")\n"
             "tail -n +2 \"$1/grid.txt\" | awk -v h=\"$h\" '{for(i=1;i<=NF;i++){printf \"%s%s\", ($i==-9999?-9999:h), (i<NF?\" \":\"\\n\")}}' > \"$1/heights.txt\"\n";
    }
    std::filesystem::permissions(script, std::filesystem::perms::owner_all);
    auto grid = ScenarioGrid::open_water(5, 4);
    grid.set_land({2, 2});
    ObstacleSet o;
    o.add({1, 1}, 0.35);
    const FileExchangeWaveModel model(dir / "work", script.string());
    const auto f = model.run(grid, o, {2.25, 90.0});
    CHECK(f.at({0, 0}) == 2.25);
    CHECK(f.at({2, 2}) == 0.0);
    std::ifstream obs(dir / "work" / "obstacles.txt");
    std::string line;
    std::getline(obs, line);
    CHECK(line == "1 1 0.35");
    const FileExchangeWaveModel broken(dir / "work2", "false");
    CHECK_THROWS((void)broken.run(grid, o, {1.0, 0.0}));
    std::filesystem::remove_all(dir);
}
