#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "scenex/metrics.hpp"

using namespace scenex;

TEST_SUITE("metrics") {

TEST_CASE("cross entropy basics") {
    LabelMap truth = LabelMap::filled(2, 2, 1);

    ProbabilityField onehot = ProbabilityField::uniform(2, 2, 3);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            onehot.set(x, y, 0, 0.0);
            onehot.set(x, y, 1, 1.0);
            onehot.set(x, y, 2, 0.0);
        }
    CHECK(cross_entropy(onehot, truth) == 0.0);

    ProbabilityField half = ProbabilityField::uniform(2, 2, 3);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            half.set(x, y, 0, 0.25);
            half.set(x, y, 1, 0.5);
            half.set(x, y, 2, 0.25);
        }
    CHECK(cross_entropy(half, truth) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    LabelMap single = LabelMap::filled(1, 1, 0);
    ProbabilityField zero = ProbabilityField::uniform(1, 1, 2);
    zero.set(0, 0, 0, 0.0);
    zero.set(0, 0, 1, 1.0);
    CHECK(cross_entropy(zero, single) == doctest::Approx(-std::log(1e-12)).epsilon(1e-12));
    CHECK(cross_entropy(zero, single) == doctest::Approx(27.631).epsilon(1e-4));
}

TEST_CASE("cross entropy rejects dimension mismatch") {
    CHECK_THROWS_AS(cross_entropy(ProbabilityField::uniform(2, 2, 3), LabelMap::filled(3, 2, 0)),
                    ValidationError);
}

TEST_CASE("confusion matches definition and oracle") {
    LabelMap truth = LabelMap::filled(2, 1, 0);
    truth.set(1, 0, 1);
    LabelMap pred = LabelMap::filled(2, 1, 1);
    ConfusionMatrix cm = confusion(pred, truth, 2);
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.at(0, 0) == 0);
    CHECK(cm.total() == 2);

    Rng rng(101);
    for (int trial = 0; trial < 25; ++trial) {
        LabelMap t = oracles::random_map(rng, 8, 8, 5);
        LabelMap p = oracles::random_map(rng, 8, 8, 5);
        ConfusionMatrix got = confusion(p, t, 5);
        auto want = oracles::confusion(p, t, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) CHECK(got.at(i, j) == want[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
}

TEST_CASE("miou hand cases") {
    ConfusionMatrix perfect = ConfusionMatrix::zeros(4);
    for (int i = 0; i < 4; ++i) perfect.at(i, i) = 5;
    CHECK(miou(perfect) == 1.0);

    ConfusionMatrix two = ConfusionMatrix::zeros(2);
    two.at(0, 0) = 2;
    two.at(0, 1) = 1;
    two.at(1, 0) = 1;
    two.at(1, 1) = 2;
    CHECK(miou(two) == doctest::Approx(0.5).epsilon(1e-12));

    // Class 2 absent everywhere; others perfect.
    ConfusionMatrix absent = ConfusionMatrix::zeros(3);
    absent.at(0, 0) = 4;
    absent.at(1, 1) = 4;
    CHECK(miou(absent, MiouPolicy::exclude_absent) == 1.0);
    CHECK(miou(absent, MiouPolicy::include_absent) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(std::isnan(per_class_iou(absent)[2]));

    ConfusionMatrix empty = ConfusionMatrix::zeros(2);
    CHECK_THROWS_AS(miou(empty), ValidationError);
}

TEST_CASE("miou of self-confusion is 1 and matches map oracle") {
    Rng rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        LabelMap t = oracles::random_map(rng, 16, 16, 6);
        CHECK(miou(confusion(t, t, 6)) == 1.0);
        LabelMap p = oracles::random_map(rng, 16, 16, 6);
        ConfusionMatrix cm = confusion(p, t, 6);
        CHECK(miou(cm, MiouPolicy::exclude_absent) ==
              doctest::Approx(oracles::miou_from_maps(p, t, 6, false)).epsilon(1e-12));
        CHECK(miou(cm, MiouPolicy::include_absent) ==
              doctest::Approx(oracles::miou_from_maps(p, t, 6, true)).epsilon(1e-12));
    }
}

TEST_CASE("miou and f1 invariant under class permutation") {
    Rng rng(77);
    LabelMap t = oracles::random_map(rng, 10, 10, 4);
    LabelMap p = oracles::random_map(rng, 10, 10, 4);
    ConfusionMatrix cm = confusion(p, t, 4);

    int perm[4] = {2, 0, 3, 1};
    ConfusionMatrix permuted = ConfusionMatrix::zeros(4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) permuted.at(perm[i], perm[j]) = cm.at(i, j);
    CHECK(miou(permuted) == doctest::Approx(miou(cm)).epsilon(1e-12));
    CHECK(f1_macro(permuted) == doctest::Approx(f1_macro(cm)).epsilon(1e-12));
}

TEST_CASE("f1 macro hand cases") {
    ConfusionMatrix diag = ConfusionMatrix::zeros(3);
    for (int i = 0; i < 3; ++i) diag.at(i, i) = 2;
    CHECK(f1_macro(diag) == 1.0);

    ConfusionMatrix half = ConfusionMatrix::zeros(2);
    half.at(0, 0) = 1;
    half.at(0, 1) = 1;
    half.at(1, 0) = 1;
    half.at(1, 1) = 1;
    CHECK(f1_macro(half) == doctest::Approx(0.5).epsilon(1e-12));

    // One class never true and never predicted contributes 0.
    ConfusionMatrix hollow = ConfusionMatrix::zeros(2);
    hollow.at(0, 0) = 4;
    CHECK(f1_macro(hollow) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mape table values and scale invariance") {
    std::vector<double> model = {8.7, 1.2, 3.3, 7.3};
    std::vector<double> expert = {8.5, 1.3, 3.5, 7.5};
    CHECK(mape(model, expert, MapeDenominator::model) == doctest::Approx(4.8581).epsilon(1e-4));
    CHECK(mape(model, expert, MapeDenominator::reference) == doctest::Approx(4.6066).epsilon(1e-4));
    CHECK(mape(model, model) == 0.0);

    std::vector<double> model3, expert3;
    for (double v : model) model3.push_back(3.0 * v);
    for (double v : expert) expert3.push_back(3.0 * v);
    CHECK(mape(model3, expert3) == doctest::Approx(mape(model, expert)).epsilon(1e-12));

    std::vector<double> with_zero = {1.0, 0.0};
    std::vector<double> other = {1.0, 2.0};
    CHECK_THROWS_AS(mape(with_zero, other, MapeDenominator::model), ValidationError);
    CHECK_THROWS_AS(mape(other, std::vector<double>{1.0}, MapeDenominator::model), ValidationError);
}

TEST_CASE("rmse of point sequences") {
    std::vector<Point2d> a = {{0, 0}, {1, 1}, {2, 2}};
    CHECK(rmse_points(a, a) == 0.0);

    std::vector<Point2d> shifted;
    for (const Point2d& p : a) shifted.push_back({p.x + 3, p.y + 4});
    CHECK(rmse_points(a, shifted) == doctest::Approx(5.0).epsilon(1e-12));

    Rng rng(9);
    std::vector<Point2d> u, v;
    double sum = 0;
    for (int i = 0; i < 10; ++i) {
        u.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
        v.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
        double dx = u.back().x - v.back().x, dy = u.back().y - v.back().y;
        sum += dx * dx + dy * dy;
    }
    CHECK(rmse_points(u, v) == doctest::Approx(std::sqrt(sum / 10.0)).epsilon(1e-12));

    CHECK_THROWS_AS(rmse_points(u, std::vector<Point2d>{{0, 0}}), ValidationError);
}

}  // TEST_SUITE
