#pragma once

// Independent brute-force references for the test suites. Everything here is
// deliberately written the slow, obvious way and stays off the library's
// implementation paths.

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "scenex/common.hpp"
#include "scenex/labelmap.hpp"
#include "scenex/metrics.hpp"
#include "scenex/motion.hpp"

namespace oracles {

inline std::vector<std::int64_t> histogram(const scenex::LabelMap& map, int k) {
    std::vector<std::int64_t> h(static_cast<std::size_t>(k), 0);
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x) ++h[map.at(x, y)];
    return h;
}

inline std::vector<std::vector<std::int64_t>> confusion(const scenex::LabelMap& pred,
                                                        const scenex::LabelMap& truth, int k) {
    std::vector<std::vector<std::int64_t>> cm(static_cast<std::size_t>(k),
                                              std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
    for (int y = 0; y < truth.height; ++y)
        for (int x = 0; x < truth.width; ++x) ++cm[truth.at(x, y)][pred.at(x, y)];
    return cm;
}

// Eq.-style mIoU from raw maps: per class, intersection / union computed by
// counting pixels directly.
inline double miou_from_maps(const scenex::LabelMap& pred, const scenex::LabelMap& truth, int k,
                             bool include_absent) {
    double sum = 0;
    int counted = 0;
    for (int c = 0; c < k; ++c) {
        std::int64_t inter = 0, in_pred = 0, in_truth = 0;
        for (int y = 0; y < truth.height; ++y) {
            for (int x = 0; x < truth.width; ++x) {
                bool p = pred.at(x, y) == c;
                bool t = truth.at(x, y) == c;
                inter += p && t;
                in_pred += p;
                in_truth += t;
            }
        }
        std::int64_t uni = in_pred + in_truth - inter;
        if (uni == 0) {
            if (include_absent) ++counted;
            continue;
        }
        sum += static_cast<double>(inter) / static_cast<double>(uni);
        ++counted;
    }
    return sum / counted;
}

inline double cross_entropy(const scenex::ProbabilityField& pred, const scenex::LabelMap& truth) {
    double sum = 0;
    for (int y = 0; y < truth.height; ++y) {
        for (int x = 0; x < truth.width; ++x) {
            double q = pred.at(x, y, truth.at(x, y));
            q = std::min(1.0, std::max(1e-12, q));
            sum += -std::log(q);
        }
    }
    return sum / (static_cast<double>(truth.width) * truth.height);
}

// Textbook DBSCAN with O(n^2) neighborhoods: seeds scanned in input order,
// neighbor lists ascending, FIFO expansion, border points claimed by the
// first cluster that reaches them.
struct NaiveDbscan {
    std::vector<std::vector<int>> clusters;
    std::vector<int> noise;
};

inline NaiveDbscan naive_dbscan(const std::vector<scenex::PixelPoint>& pts, double eps, int min_pts) {
    const int n = static_cast<int>(pts.size());
    auto neighbors = [&](int i) {
        std::vector<int> out;
        for (int j = 0; j < n; ++j) {
            double dx = pts[static_cast<std::size_t>(i)].x - pts[static_cast<std::size_t>(j)].x;
            double dy = pts[static_cast<std::size_t>(i)].y - pts[static_cast<std::size_t>(j)].y;
            if (dx * dx + dy * dy <= eps * eps) out.push_back(j);
        }
        return out;
    };
    std::vector<int> label(static_cast<std::size_t>(n), -1);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    int next_cluster = 0;
    for (int seed = 0; seed < n; ++seed) {
        if (seen[static_cast<std::size_t>(seed)]) continue;
        std::vector<int> hood = neighbors(seed);
        if (static_cast<int>(hood.size()) < min_pts) continue;
        int cid = next_cluster++;
        seen[static_cast<std::size_t>(seed)] = 1;
        label[static_cast<std::size_t>(seed)] = cid;
        std::vector<int> queue(hood.begin(), hood.end());
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            int p = queue[qi];
            if (label[static_cast<std::size_t>(p)] == -1) label[static_cast<std::size_t>(p)] = cid;
            if (seen[static_cast<std::size_t>(p)]) continue;
            seen[static_cast<std::size_t>(p)] = 1;
            std::vector<int> sub = neighbors(p);
            if (static_cast<int>(sub.size()) >= min_pts)
                queue.insert(queue.end(), sub.begin(), sub.end());
        }
    }
    NaiveDbscan result;
    result.clusters.resize(static_cast<std::size_t>(next_cluster));
    for (int i = 0; i < n; ++i) {
        if (label[static_cast<std::size_t>(i)] == -1)
            result.noise.push_back(i);
        else
            result.clusters[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])].push_back(i);
    }
    return result;
}

inline scenex::LabelMap random_map(scenex::Rng& rng, int w, int h, int k) {
    scenex::LabelMap m = scenex::LabelMap::filled(w, h, 0);
    for (auto& c : m.cells) c = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(k)));
    return m;
}

inline scenex::ProbabilityField random_field(scenex::Rng& rng, int w, int h, int k) {
    scenex::ProbabilityField f = scenex::ProbabilityField::uniform(w, h, k);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sum = 0;
            std::vector<double> raw(static_cast<std::size_t>(k));
            for (int c = 0; c < k; ++c) {
                raw[static_cast<std::size_t>(c)] = rng.uniform() + 1e-6;
                sum += raw[static_cast<std::size_t>(c)];
            }
            for (int c = 0; c < k; ++c) f.set(x, y, c, raw[static_cast<std::size_t>(c)] / sum);
        }
    }
    return f;
}

}  // namespace oracles
