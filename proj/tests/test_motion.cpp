#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "scenex/motion.hpp"

using namespace scenex;

namespace {

// Partition as a canonical set-of-sets for order-insensitive comparison.
std::vector<std::vector<int>> canonical(std::vector<std::vector<int>> clusters) {
    for (auto& c : clusters) std::sort(c.begin(), c.end());
    std::sort(clusters.begin(), clusters.end());
    return clusters;
}

std::vector<std::vector<int>> member_sets(const DbscanResult& r) {
    std::vector<std::vector<int>> out;
    for (const Cluster& c : r.clusters) out.push_back(c.members);
    return out;
}

}  // namespace

TEST_SUITE("motion") {

TEST_CASE("dbscan basics") {
    std::vector<PixelPoint> tight = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 1}};
    DbscanResult r = dbscan(tight, 3.0, 3);
    REQUIRE(r.clusters.size() == 1);
    CHECK(r.clusters[0].members.size() == 5);
    CHECK(r.noise.empty());

    std::vector<PixelPoint> lone = {{5, 5}};
    r = dbscan(lone, 2.0, 2);
    CHECK(r.clusters.empty());
    CHECK(r.noise == std::vector<int>{0});

    r = dbscan(lone, 2.0, 1);  // a single self-core point clusters alone
    CHECK(r.clusters.size() == 1);

    std::vector<PixelPoint> blobs;
    for (int i = 0; i < 6; ++i) blobs.push_back({i % 3, i / 3});
    for (int i = 0; i < 6; ++i) blobs.push_back({500 + i % 3, i / 3});
    r = dbscan(blobs, 2.0, 3);
    REQUIRE(r.clusters.size() == 2);
    CHECK(r.clusters[0].members == std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(r.clusters[1].members == std::vector<int>{6, 7, 8, 9, 10, 11});
    CHECK(r.clusters[0].center.x == doctest::Approx(1.0));
    CHECK(r.clusters[1].center.x == doctest::Approx(501.0));
}

TEST_CASE("dbscan equals the naive reference on random point sets") {
    Rng rng(2718);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 20 + static_cast<int>(rng.below(180));
        std::vector<PixelPoint> pts;
        for (int i = 0; i < n; ++i)
            pts.push_back({static_cast<int>(rng.below(120)), static_cast<int>(rng.below(120))});
        double eps = rng.uniform(2.0, 12.0);
        int min_pts = 2 + static_cast<int>(rng.below(6));

        DbscanResult got = dbscan(pts, eps, min_pts);
        oracles::NaiveDbscan want = oracles::naive_dbscan(pts, eps, min_pts);
        CHECK(canonical(member_sets(got)) == canonical(want.clusters));
        CHECK(got.noise == want.noise);
    }
}

TEST_CASE("dbscan partition is stable under input permutation") {
    Rng rng(31337);
    std::vector<PixelPoint> pts;
    for (int i = 0; i < 80; ++i)
        pts.push_back({static_cast<int>(rng.below(60)), static_cast<int>(rng.below(60))});
    DbscanResult base = dbscan(pts, 5.0, 4);

    std::vector<int> perm(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    rng.shuffle(perm);
    std::vector<PixelPoint> shuffled(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = pts[static_cast<std::size_t>(perm[i])];
    DbscanResult permuted = dbscan(shuffled, 5.0, 4);

    // Map member indices back to original ids before comparing partitions.
    std::vector<std::vector<int>> remapped;
    for (const Cluster& c : permuted.clusters) {
        std::vector<int> members;
        for (int i : c.members) members.push_back(perm[static_cast<std::size_t>(i)]);
        remapped.push_back(std::move(members));
    }
    CHECK(canonical(member_sets(base)) == canonical(remapped));
}

TEST_CASE("conflict_points extraction") {
    LabelMap m = LabelMap::filled(6, 4, 0);
    CHECK(conflict_points(m, {7, 8}).empty());

    m.set(1, 1, 7);
    m.set(4, 2, 7);
    m.set(2, 3, 8);
    std::vector<PixelPoint> pts = conflict_points(m, {7});
    CHECK(pts == std::vector<PixelPoint>{{1, 1}, {4, 2}});

    std::vector<PixelPoint> joint = conflict_points(m, {7, 8});
    std::vector<PixelPoint> split = conflict_points(m, {7});
    for (const PixelPoint& p : conflict_points(m, {8})) split.push_back(p);
    auto key = [](const PixelPoint& p) { return p.y * 1000 + p.x; };
    std::sort(split.begin(), split.end(), [&](auto a, auto b) { return key(a) < key(b); });
    std::sort(joint.begin(), joint.end(), [&](auto a, auto b) { return key(a) < key(b); });
    CHECK(joint == split);
}

TEST_CASE("greedy tracking") {
    // One drifting center -> one track.
    std::vector<std::vector<Point2d>> frames;
    for (int t = 0; t < 10; ++t) frames.push_back({{10.0 + t, 20.0}});
    std::vector<Trajectory> tracks = track(frames, 25.0, 15.0);
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].points.size() == 10);
    CHECK(tracks[0].start_frame == 0);

    // Teleport beyond max_jump splits the track.
    frames.clear();
    for (int t = 0; t < 5; ++t) frames.push_back({{10.0 + t, 20.0}});
    for (int t = 0; t < 5; ++t) frames.push_back({{200.0 + t, 20.0}});
    tracks = track(frames, 25.0, 15.0);
    REQUIRE(tracks.size() == 2);
    CHECK(tracks[0].points.size() == 5);
    CHECK(tracks[1].start_frame == 5);
    CHECK(tracks[1].points.size() == 5);

    // Two interleaved objects far apart stay separate.
    frames.clear();
    for (int t = 0; t < 8; ++t) frames.push_back({{10.0 + 2 * t, 30.0}, {300.0 - 2 * t, 90.0}});
    tracks = track(frames, 25.0, 20.0);
    REQUIRE(tracks.size() == 2);
    for (int t = 0; t < 8; ++t) {
        CHECK(tracks[0].points[static_cast<std::size_t>(t)].x == doctest::Approx(10.0 + 2 * t));
        CHECK(tracks[1].points[static_cast<std::size_t>(t)].x == doctest::Approx(300.0 - 2 * t));
    }
}

TEST_CASE("kinematics matches hand-computed differences") {
    Trajectory tr;
    tr.fps = 25.0;
    tr.points = {{100, 50}, {104, 50}, {112, 50}};
    std::vector<KinematicState> states = kinematics(tr, 200.0);
    REQUIRE(states.size() == 3);
    CHECK(!states[0].v_x);
    CHECK(*states[1].v_x == doctest::Approx(100.0).epsilon(1e-12));  // 25*(104-100)
    CHECK(*states[1].v_y == 0.0);
    CHECK(*states[1].a_x == doctest::Approx(2500.0).epsilon(1e-12));  // 625*(112+100-208)
    CHECK(!states[2].a_x);

    // Stationary center: v = a = 0 wherever defined.
    Trajectory still;
    still.fps = 10.0;
    still.points = {{5, 5}, {5, 5}, {5, 5}, {5, 5}};
    for (const KinematicState& s : kinematics(still, 100.0)) {
        if (s.v_x) {
            CHECK(*s.v_x == 0.0);
            CHECK(*s.v_y == 0.0);
            CHECK(std::isinf(*s.ttc));  // no closing motion
        }
        if (s.a_x) CHECK(*s.a_x == 0.0);
    }

    CHECK_THROWS_AS(kinematics(Trajectory{25.0, 0, {{1, 1}}}, 100.0), ValidationError);
}

TEST_CASE("constant velocity track: exact v, zero a") {
    Trajectory tr;
    tr.fps = 25.0;
    for (int t = 0; t < 12; ++t) tr.points.push_back({10.0 + 3.0 * t, 100.0 + 2.0 * t});
    std::vector<KinematicState> states = kinematics(tr, 400.0);
    for (std::size_t i = 1; i < states.size(); ++i) {
        CHECK(*states[i].v_x == doctest::Approx(75.0).epsilon(1e-12));
        CHECK(*states[i].v_y == doctest::Approx(50.0).epsilon(1e-12));
    }
    for (std::size_t i = 1; i + 1 < states.size(); ++i) {
        CHECK(std::abs(*states[i].a_x) <= 1e-9);
        CHECK(std::abs(*states[i].a_y) <= 1e-9);
    }
}

TEST_CASE("ttc convention") {
    CHECK(time_to_collision(200.0, 100.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::isinf(time_to_collision(200.0, 0.0)));
    CHECK(std::isinf(time_to_collision(200.0, -50.0)));  // receding
    CHECK_THROWS_AS(time_to_collision(-1.0, 10.0), ValidationError);
}

TEST_CASE("a track engineered to hit 1.0 s TTC is flagged severe") {
    // 2 px/frame at 25 fps = 50 px/s toward the bottom edge at y=180;
    // at y=130 the remaining 50 px take exactly 1.0 s.
    Trajectory tr;
    tr.fps = 25.0;
    for (int t = 0; t <= 35; ++t) tr.points.push_back({160.0, 70.0 + 2.0 * t});
    std::vector<KinematicState> states = kinematics(tr, 180.0);
    bool exact_boundary_seen = false;
    bool severe_seen = false;
    for (const KinematicState& s : states) {
        if (!s.ttc) continue;
        if (*s.ttc == 1.0) {
            exact_boundary_seen = true;
            CHECK(s.severe);
        }
        severe_seen = severe_seen || s.severe;
        if (*s.ttc > 1.0) CHECK(!s.severe);
    }
    CHECK(exact_boundary_seen);
    CHECK(severe_seen);
}

}  // TEST_SUITE
