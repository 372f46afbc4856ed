#pragma once

#include <optional>
#include <set>
#include <span>
#include <vector>

#include "scenex/labelmap.hpp"
#include "scenex/metrics.hpp"

namespace scenex {

struct PixelPoint {
    int x = 0;
    int y = 0;
    bool operator==(const PixelPoint&) const = default;
};

struct Cluster {
    std::vector<int> members;  // indices into the input point list, ascending
    Point2d center;
};

struct DbscanResult {
    std::vector<Cluster> clusters;
    std::vector<int> noise;     // point indices, ascending
    std::vector<int> label_of;  // cluster id per point, -1 = noise
};

// Standard density-reachability clustering with Euclidean distance. The
// neighborhood count includes the point itself. Points are scanned in input
// order and neighbor lists are index-sorted, so the outcome is deterministic.
DbscanResult dbscan(std::span<const PixelPoint> points, double eps, int min_pts);

// Pixel coordinates of every cell whose class is in `classes`, row-major.
std::vector<PixelPoint> conflict_points(const LabelMap& map, const std::set<int>& classes);

struct Trajectory {
    double fps = 0;
    int start_frame = 0;
    std::vector<Point2d> points;  // one per consecutive frame

    int frame_at(std::size_t i) const { return start_frame + static_cast<int>(i); }
};

// Greedy nearest-neighbor association of per-frame cluster centers. A closest
// unclaimed pair is linked while its distance stays within max_jump; a track
// that finds no continuation ends, and leftover centers start new tracks.
std::vector<Trajectory> track(const std::vector<std::vector<Point2d>>& centers_per_frame, double fps,
                              double max_jump);

constexpr double kSevereTtcSeconds = 1.0;  // severe-conflict boundary

struct KinematicState {
    std::optional<double> v_x, v_y;  // pixels/second, empty on the first sample
    std::optional<double> a_x, a_y;  // pixels/second^2, empty at both ends
    std::optional<double> ttc;       // seconds, +inf when not closing, empty without velocity
    bool severe = false;             // ttc defined, finite and <= threshold

    bool operator==(const KinematicState&) const = default;
};

// Remaining distance over closing speed; +inf when stationary or receding.
double time_to_collision(double distance_px, double closing_speed);

// Temporal-difference velocity and acceleration per sample plus TTC toward
// the bottom frame edge (remaining distance frame_height - y, closing speed
// +v_y since y grows downward).
std::vector<KinematicState> kinematics(const Trajectory& tr, double frame_height,
                                       double severe_ttc = kSevereTtcSeconds);

}  // namespace scenex
