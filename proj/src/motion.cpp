#include "scenex/motion.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

namespace scenex {

namespace {

// Grid neighbor index with cells of side eps; candidates come from the 3x3
// cell block and are returned sorted by point index. Buckets are keyed by the
// exact cell pair, so hash collisions cannot merge or duplicate cells.
class NeighborIndex {
public:
    NeighborIndex(std::span<const PixelPoint> points, double eps)
        : points_(points), eps_(eps), eps2_(eps * eps) {
        cells_.reserve(points.size());
        for (std::size_t i = 0; i < points.size(); ++i)
            cells_[{cell(points[i].x), cell(points[i].y)}].push_back(static_cast<int>(i));
    }

    std::vector<int> neighbors(int i) const {
        const PixelPoint& p = points_[static_cast<std::size_t>(i)];
        std::vector<int> out;
        long long cx = cell(p.x), cy = cell(p.y);
        for (long long dy = -1; dy <= 1; ++dy) {
            for (long long dx = -1; dx <= 1; ++dx) {
                auto it = cells_.find({cx + dx, cy + dy});
                if (it == cells_.end()) continue;
                for (int j : it->second) {
                    double ddx = points_[static_cast<std::size_t>(j)].x - p.x;
                    double ddy = points_[static_cast<std::size_t>(j)].y - p.y;
                    if (ddx * ddx + ddy * ddy <= eps2_) out.push_back(j);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    struct Cell {
        long long x, y;
        bool operator==(const Cell&) const = default;
    };
    struct CellHash {
        std::size_t operator()(const Cell& c) const {
            std::uint64_t h = static_cast<std::uint64_t>(c.x) * 0x9e3779b97f4a7c15ull;
            h ^= static_cast<std::uint64_t>(c.y) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            return static_cast<std::size_t>(h);
        }
    };

    long long cell(int v) const { return static_cast<long long>(std::floor(v / eps_)); }

    std::span<const PixelPoint> points_;
    double eps_;
    double eps2_;
    std::unordered_map<Cell, std::vector<int>, CellHash> cells_;
};

}  // namespace

DbscanResult dbscan(std::span<const PixelPoint> points, double eps, int min_pts) {
    if (eps <= 0) throw ValidationError("dbscan: eps must be positive");
    if (min_pts < 1) throw ValidationError("dbscan: min_pts must be >= 1");

    const int n = static_cast<int>(points.size());
    DbscanResult result;
    result.label_of.assign(static_cast<std::size_t>(n), -1);
    if (n == 0) return result;

    NeighborIndex index(points, eps);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);

    for (int seed = 0; seed < n; ++seed) {
        if (seen[static_cast<std::size_t>(seed)]) continue;
        std::vector<int> hood = index.neighbors(seed);
        if (static_cast<int>(hood.size()) < min_pts) continue;  // may become a border point later

        int cluster_id = static_cast<int>(result.clusters.size());
        result.clusters.emplace_back();
        seen[static_cast<std::size_t>(seed)] = 1;
        result.label_of[static_cast<std::size_t>(seed)] = cluster_id;
        std::deque<int> queue(hood.begin(), hood.end());
        while (!queue.empty()) {
            int p = queue.front();
            queue.pop_front();
            if (result.label_of[static_cast<std::size_t>(p)] == -1)
                result.label_of[static_cast<std::size_t>(p)] = cluster_id;  // claim border point
            if (seen[static_cast<std::size_t>(p)]) continue;
            seen[static_cast<std::size_t>(p)] = 1;
            std::vector<int> sub = index.neighbors(p);
            if (static_cast<int>(sub.size()) >= min_pts)
                queue.insert(queue.end(), sub.begin(), sub.end());
        }
    }

    for (int i = 0; i < n; ++i) {
        int label = result.label_of[static_cast<std::size_t>(i)];
        if (label == -1)
            result.noise.push_back(i);
        else
            result.clusters[static_cast<std::size_t>(label)].members.push_back(i);
    }
    for (Cluster& c : result.clusters) {
        double sx = 0, sy = 0;
        for (int i : c.members) {
            sx += points[static_cast<std::size_t>(i)].x;
            sy += points[static_cast<std::size_t>(i)].y;
        }
        c.center = {sx / static_cast<double>(c.members.size()),
                    sy / static_cast<double>(c.members.size())};
    }
    return result;
}

std::vector<PixelPoint> conflict_points(const LabelMap& map, const std::set<int>& classes) {
    map.validate();
    std::vector<PixelPoint> points;
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x)
            if (classes.count(map.at(x, y))) points.push_back({x, y});
    return points;
}

std::vector<Trajectory> track(const std::vector<std::vector<Point2d>>& centers_per_frame, double fps,
                              double max_jump) {
    if (fps <= 0) throw ValidationError("track: fps must be positive");
    if (max_jump <= 0) throw ValidationError("track: max_jump must be positive");

    std::vector<Trajectory> tracks;
    std::vector<int> active;  // track indices still extendable

    for (std::size_t f = 0; f < centers_per_frame.size(); ++f) {
        const std::vector<Point2d>& centers = centers_per_frame[f];
        std::vector<char> track_used(active.size(), 0);
        std::vector<char> center_used(centers.size(), 0);

        // Globally closest pairs first; ties fall to the lower track then the
        // lower center index by scan order.
        std::size_t pairs = std::min(active.size(), centers.size());
        for (std::size_t step = 0; step < pairs; ++step) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_t = 0, best_c = 0;
            for (std::size_t t = 0; t < active.size(); ++t) {
                if (track_used[t]) continue;
                const Point2d& last = tracks[static_cast<std::size_t>(active[t])].points.back();
                for (std::size_t c = 0; c < centers.size(); ++c) {
                    if (center_used[c]) continue;
                    double dx = centers[c].x - last.x;
                    double dy = centers[c].y - last.y;
                    double d = std::sqrt(dx * dx + dy * dy);
                    if (d < best) {
                        best = d;
                        best_t = t;
                        best_c = c;
                    }
                }
            }
            if (!std::isfinite(best) || best > max_jump) break;
            track_used[best_t] = 1;
            center_used[best_c] = 1;
            tracks[static_cast<std::size_t>(active[best_t])].points.push_back(centers[best_c]);
        }

        std::vector<int> next_active;
        for (std::size_t t = 0; t < active.size(); ++t)
            if (track_used[t]) next_active.push_back(active[t]);  // unmatched tracks end here
        for (std::size_t c = 0; c < centers.size(); ++c) {
            if (center_used[c]) continue;
            Trajectory tr;
            tr.fps = fps;
            tr.start_frame = static_cast<int>(f);
            tr.points.push_back(centers[c]);
            next_active.push_back(static_cast<int>(tracks.size()));
            tracks.push_back(std::move(tr));
        }
        active = std::move(next_active);
    }
    return tracks;
}

double time_to_collision(double distance_px, double closing_speed) {
    if (distance_px < 0) throw ValidationError("time_to_collision: distance must be nonnegative");
    if (closing_speed <= 0) return std::numeric_limits<double>::infinity();
    return distance_px / closing_speed;
}

std::vector<KinematicState> kinematics(const Trajectory& tr, double frame_height, double severe_ttc) {
    if (tr.points.size() < 2) throw ValidationError("kinematics: need at least 2 samples");
    if (tr.fps <= 0) throw ValidationError("kinematics: fps must be positive");
    const double fps = tr.fps;
    const std::size_t n = tr.points.size();
    std::vector<KinematicState> states(n);
    for (std::size_t i = 1; i < n; ++i) {
        states[i].v_x = fps * (tr.points[i].x - tr.points[i - 1].x);
        states[i].v_y = fps * (tr.points[i].y - tr.points[i - 1].y);
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        states[i].a_x = fps * fps * (tr.points[i + 1].x + tr.points[i - 1].x - 2 * tr.points[i].x);
        states[i].a_y = fps * fps * (tr.points[i + 1].y + tr.points[i - 1].y - 2 * tr.points[i].y);
    }
    for (std::size_t i = 1; i < n; ++i) {
        double distance = std::max(0.0, frame_height - tr.points[i].y);
        states[i].ttc = time_to_collision(distance, *states[i].v_y);
        states[i].severe = std::isfinite(*states[i].ttc) && *states[i].ttc <= severe_ttc;
    }
    return states;
}

}  // namespace scenex
