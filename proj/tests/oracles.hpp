#pragma once

// Independent reference implementations used by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "breakwater/evolution.hpp"

namespace oracle {

using Point = std::vector<double>;

inline bool dominates(const Point& a, const Point& b) {
    bool better = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] > b[k]) return false;
        better = better || a[k] < b[k];
    }
    return better;
}

inline std::vector<bool> nondominated_flags(const std::vector<Point>& pts) {
    std::vector<bool> out(pts.size(), true);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (dominates(pts[j], pts[i])) out[i] = false;
    return out;
}

// SPEA2 raw fitness straight from the dominance matrix.
inline std::vector<double> raw_fitness(const std::vector<Point>& pts) {
    const std::size_t n = pts.size();
    std::vector<double> strength(n, 0.0), raw(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (dominates(pts[i], pts[j])) strength[i] += 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (dominates(pts[j], pts[i])) raw[i] += strength[j];
    return raw;
}

// Truncation one removal at a time: drop the member whose ascending list of
// distances to the other survivors is lexicographically smallest.
inline std::vector<std::size_t> truncate(const std::vector<Point>& pts, std::vector<std::size_t> keep, std::size_t size) {
    const auto dist = [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (std::size_t k = 0; k < pts[a].size(); ++k) s += (pts[a][k] - pts[b][k]) * (pts[a][k] - pts[b][k]);
        return std::sqrt(s);
    };
    while (keep.size() > size) {
        std::size_t worst = 0;
        std::vector<double> worst_list;
        for (std::size_t i = 0; i < keep.size(); ++i) {
            std::vector<double> list;
            for (std::size_t j = 0; j < keep.size(); ++j)
                if (j != i) list.push_back(dist(keep[i], keep[j]));
            std::sort(list.begin(), list.end());
            if (i == 0 || list < worst_list) {
                worst = i;
                worst_list = list;
            }
        }
        keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

struct Estimate {
    double value;
    double standard_error;
};

// Monte-Carlo hypervolume: uniform samples in the box [ideal, reference].
inline Estimate mc_hypervolume(const std::vector<Point>& pts, const Point& ref, std::size_t samples, std::mt19937_64& rng) {
    const std::size_t d = ref.size();
    Point lo = ref;
    for (const auto& p : pts)
        for (std::size_t k = 0; k < d; ++k) lo[k] = std::min(lo[k], p[k]);
    double box = 1.0;
    for (std::size_t k = 0; k < d; ++k) box *= ref[k] - lo[k];
    std::vector<std::uniform_real_distribution<double>> axes;
    for (std::size_t k = 0; k < d; ++k) axes.emplace_back(lo[k], ref[k]);
    std::size_t hits = 0;
    Point x(d);
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t k = 0; k < d; ++k) x[k] = axes[k](rng);
        for (const auto& p : pts) {
            bool in = true;
            for (std::size_t k = 0; k < d && in; ++k) in = p[k] <= x[k];
            if (in) {
                ++hits;
                break;
            }
        }
    }
    const double f = static_cast<double>(hits) / static_cast<double>(samples);
    return {box * f, box * std::sqrt(f * (1.0 - f) / static_cast<double>(samples))};
}

// Every genotype of a lattice scenario, evaluated; returns the distinct
// objective points of the feasible nondominated set.
inline std::vector<Point> lattice_front(const breakwater::Scenario& s) {
    using namespace breakwater;
    const auto& lat = s.lattice.value();
    std::vector<Point> feasible;
    const std::size_t blocks = s.total_segments();
    std::vector<std::size_t> idx(2 * blocks, 0);
    while (true) {
        Genotype g{Encoding::Angular, std::vector<SegmentGene>(blocks)};
        for (std::size_t b = 0; b < blocks; ++b) g.blocks[b] = {lat.lengths[idx[2 * b]], lat.angles[idx[2 * b + 1]]};
        const auto o = evaluate(g, s);
        if (o.feasible()) feasible.push_back(minimization_vector(relativize(o, s.baseline), o.constraints));
        std::size_t k = 0;
        for (; k < idx.size(); ++k) {
            const std::size_t limit = k % 2 == 0 ? lat.lengths.size() : lat.angles.size();
            if (++idx[k] < limit) break;
            idx[k] = 0;
        }
        if (k == idx.size()) break;
    }
    const auto flags = nondominated_flags(feasible);
    std::vector<Point> front;
    for (std::size_t i = 0; i < feasible.size(); ++i)
        if (flags[i] && std::find(front.begin(), front.end(), feasible[i]) == front.end()) front.push_back(feasible[i]);
    return front;
}

// True when every point of `front` appears in the archive of the last generation.
inline bool archive_covers(const breakwater::ArchiveHistory& h, const std::vector<Point>& front) {
    for (const auto& p : front) {
        bool found = false;
        for (const auto& ind : h.last().archive) found = found || ind.point == p;
        if (!found) return false;
    }
    return true;
}

}  // namespace oracle
