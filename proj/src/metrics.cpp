#include "breakwater/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>

namespace breakwater {

std::vector<std::size_t> nondominated_indices(std::span<const Point> points) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j) dominated = j != i && dominates(points[j], points[i]);
        if (!dominated) out.push_back(i);
    }
    return out;
}

std::vector<Point> nondominated(std::span<const Point> points) {
    std::vector<Point> out;
    for (const std::size_t i : nondominated_indices(points)) out.push_back(points[i]);
    return out;
}

namespace {

double sweep_2d(std::vector<Point> pts, const Point& ref) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]); });
    double area = 0.0;
    double ceiling = ref[1];
    for (const auto& p : pts) {
        if (p[1] < ceiling) {
            area += (ref[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    return area;
}

// Adds p to a mutually nondominated set unless something already weakly
// dominates it; drops members p weakly dominates.
void insert_nondominated(std::vector<Point>& set, Point p) {
    const auto weakly = [](const Point& a, const Point& b) {
        for (std::size_t k = 0; k < a.size(); ++k)
            if (a[k] > b[k]) return false;
        return true;
    };
    for (const auto& q : set)
        if (weakly(q, p)) return;
    std::erase_if(set, [&](const Point& q) { return weakly(p, q); });
    set.push_back(std::move(p));
}

// 3-D: sweep along z while maintaining the 2-D staircase area incrementally.
double sweep_3d(std::vector<Point> pts, const Point& ref) {
    std::stable_sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a[2] < b[2]; });
    std::map<double, double> stair;  // x ascending, y strictly descending
    double area = 0.0;
    double volume = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double px = pts[i][0];
        const double py = pts[i][1];
        auto right = stair.upper_bound(px);
        double left_y = ref[1];
        if (right != stair.begin()) left_y = std::prev(right)->second;
        if (left_y > py) {
            // points at x == px with y >= py are dominated too
            auto it = stair.lower_bound(px);
            double x = px;
            double level = left_y;
            while (it != stair.end() && it->second >= py) {
                area += (it->first - x) * (level - py);
                x = it->first;
                level = it->second;
                it = stair.erase(it);
            }
            const double stop = it == stair.end() ? ref[0] : it->first;
            area += (stop - x) * (level - py);
            stair[px] = py;
        }
        const double upper = i + 1 < pts.size() ? pts[i + 1][2] : ref[2];
        volume += area * (upper - pts[i][2]);
    }
    return volume;
}

double slice(std::vector<Point> pts, const Point& ref, std::size_t dims) {
    if (pts.empty()) return 0.0;
    if (dims == 1) {
        double best = ref[0];
        for (const auto& p : pts) best = std::min(best, p[0]);
        return ref[0] - best;
    }
    if (dims == 2) return sweep_2d(std::move(pts), ref);
    if (dims == 3) return sweep_3d(std::move(pts), ref);
    const std::size_t last = dims - 1;
    std::stable_sort(pts.begin(), pts.end(), [last](const Point& a, const Point& b) { return a[last] < b[last]; });
    double volume = 0.0;
    std::vector<Point> active;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        insert_nondominated(active, Point(pts[i].begin(), pts[i].begin() + static_cast<std::ptrdiff_t>(last)));
        const double upper = i + 1 < pts.size() ? pts[i + 1][last] : ref[last];
        const double height = upper - pts[i][last];
        if (height <= 0.0) continue;
        volume += slice(active, ref, last) * height;
    }
    return volume;
}

}  // namespace

HypervolumeResult hypervolume_checked(std::span<const Point> points, const Point& reference) {
    HypervolumeResult result;
    std::vector<Point> inside;
    for (const auto& p : points) {
        if (p.size() != reference.size()) throw ConfigurationError("point and reference dimensions differ");
        bool ok = true;
        for (std::size_t k = 0; k < p.size() && ok; ++k) ok = p[k] < reference[k];
        if (ok) {
            inside.push_back(p);
        } else {
            ++result.ignored;
        }
    }
    if (reference.empty()) return result;
    result.value = slice(nondominated(inside), reference, reference.size());
    return result;
}

double hypervolume(std::span<const Point> points, const Point& reference) { return hypervolume_checked(points, reference).value; }

std::pair<double, double> reduce_to_2d(const ObjectiveVector& o) {
    const double mean = o.wave_heights.empty()
                            ? 0.0
                            : std::accumulate(o.wave_heights.begin(), o.wave_heights.end(), 0.0) / static_cast<double>(o.wave_heights.size());
    return {o.cost, mean};
}

Point ObjectiveSelection::project(const Point& full) const {
    Point out;
    if (cost) out.push_back(full[0]);
    if (nav) out.push_back(full[1]);
    if (waves) out.insert(out.end(), full.begin() + 2, full.end());
    return out;
}

std::string ObjectiveSelection::describe() const {
    std::string s;
    for (const auto& [on, name] : {std::pair{cost, "cost"}, std::pair{nav, "nav"}, std::pair{waves, "waves"}}) {
        if (!on) continue;
        if (!s.empty()) s += ',';
        s += name;
    }
    return s;
}

ObjectiveSelection ObjectiveSelection::parse(const std::string& csv) {
    ObjectiveSelection sel{false, false, false};
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "cost") sel.cost = true;
        else if (item == "nav") sel.nav = true;
        else if (item == "waves") sel.waves = true;
        else if (item == "all") sel = ObjectiveSelection{};
        else throw ConfigurationError("unknown objective '" + item + "' (expected cost, nav, waves or all)");
    }
    if (!sel.cost && !sel.nav && !sel.waves) throw ConfigurationError("objective selection is empty");
    return sel;
}

Point reference_point(std::span<const Point> points, double margin) {
    if (points.empty()) throw ConfigurationError("reference point needs at least one point");
    Point ideal = points.front();
    Point nadir = points.front();
    for (const auto& p : points)
        for (std::size_t k = 0; k < p.size(); ++k) {
            ideal[k] = std::min(ideal[k], p[k]);
            nadir[k] = std::max(nadir[k], p[k]);
        }
    Point ref(nadir.size());
    for (std::size_t k = 0; k < nadir.size(); ++k) {
        const double range = nadir[k] - ideal[k];
        ref[k] = nadir[k] + margin * (range > 0.0 ? range : std::max(std::abs(nadir[k]), 1.0));
    }
    return ref;
}

std::vector<Point> feasible_points(const ArchiveHistory& history, const ObjectiveSelection& selection) {
    std::vector<Point> out;
    for (const auto& rec : history.generations)
        for (const auto& ind : rec.population)
            if (ind.objectives.feasible()) out.push_back(selection.project(ind.point));
    return out;
}

std::vector<FrontSnapshot> cumulative_fronts(const ArchiveHistory& history, const ObjectiveSelection& selection,
                                             const Point& reference) {
    std::vector<FrontSnapshot> out;
    std::vector<Point> front;
    for (const auto& rec : history.generations) {
        for (const auto& ind : rec.population)
            if (ind.objectives.feasible()) front.push_back(selection.project(ind.point));
        front = nondominated(front);
        FrontSnapshot snap;
        snap.generation = rec.generation;
        snap.model_runs = rec.model_runs;
        snap.points = front;
        snap.hypervolume = hypervolume(front, reference);
        out.push_back(std::move(snap));
    }
    return out;
}

Quartiles quartiles(std::vector<double> values) {
    Quartiles q;
    if (values.empty()) return q;
    std::sort(values.begin(), values.end());
    const auto at = [&](double f) {
        const double pos = f * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        return std::lerp(values[lo], values[hi], pos - static_cast<double>(lo));
    };
    q.min = values.front();
    q.q1 = at(0.25);
    q.median = at(0.5);
    q.q3 = at(0.75);
    q.max = values.back();
    return q;
}

ConvergenceSummary convergence_report(std::span<const ArchiveHistory> histories, const ObjectiveSelection& selection,
                                      const Point& reference) {
    std::vector<std::vector<FrontSnapshot>> per_run;
    for (const auto& h : histories) per_run.push_back(cumulative_fronts(h, selection, reference));
    return convergence_from_snapshots(per_run);
}

ConvergenceSummary convergence_from_snapshots(std::span<const std::vector<FrontSnapshot>> per_run) {
    ConvergenceSummary summary;
    std::size_t generations = 0;
    for (const auto& snaps : per_run) generations = std::max(generations, snaps.size());
    for (const auto& snaps : per_run) {
        std::vector<double> traj;
        for (const auto& s : snaps) traj.push_back(s.hypervolume);
        summary.trajectories.push_back(std::move(traj));
        summary.run_fronts.push_back(snaps.empty() ? std::vector<Point>{} : snaps.back().points);
    }
    for (std::size_t g = 0; g < generations; ++g) {
        ConvergenceRow row;
        row.generation = g;
        std::vector<double> values;
        for (const auto& snaps : per_run) {
            if (g >= snaps.size()) continue;
            values.push_back(snaps[g].hypervolume);
            row.model_runs = std::max(row.model_runs, snaps[g].model_runs);
        }
        row.hypervolume = quartiles(std::move(values));
        summary.rows.push_back(row);
    }
    std::vector<Point> all;
    for (const auto& f : summary.run_fronts) all.insert(all.end(), f.begin(), f.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    summary.union_front = nondominated(all);
    return summary;
}

}  // namespace breakwater
