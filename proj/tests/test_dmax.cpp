#include <doctest.h>

#include <cmath>
#include <vector>

#include "lactate/curve_fit.hpp"
#include "lactate/dmax.hpp"
#include "lactate/errors.hpp"
#include "lactate/rng.hpp"

using namespace lactate;

namespace {

// Test-side grid oracle, independent of the analytic argmax path: scan the
// perpendicular distance on a dense uniform grid, restricted to where the
// curve lies below the chord.
double grid_oracle_lt(const FittedCurve& curve, const LactatePoint& first,
                      const LactatePoint& last, int n) {
    const double slope =
        (last.lactate_mmol_l - first.lactate_mmol_l) / (last.speed_kmh - first.speed_kmh);
    double best_s = first.speed_kmh;
    double best_gap = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s =
            first.speed_kmh + (last.speed_kmh - first.speed_kmh) * static_cast<double>(i) / (n - 1);
        const double gap = first.lactate_mmol_l + slope * (s - first.speed_kmh) - curve.poly(s);
        if (gap > best_gap) {
            best_gap = gap;
            best_s = s;
        }
    }
    REQUIRE(best_gap > 0.0);
    return best_s;
}

// Convex increasing synthetic lactate data with a randomized exponential
// shape; always admits a Dmax point.
std::vector<LactatePoint> random_convex_points(RngStream& stream) {
    const int n = 5 + static_cast<int>(stream.below(5));  // 5..9 points
    const double beta = stream.uniform(0.25, 0.9);
    const double baseline = stream.uniform(0.8, 1.8);
    const double alpha = stream.uniform(0.05, 0.4);
    std::vector<LactatePoint> pts;
    double s = 9.0;
    for (int i = 0; i < n; ++i) {
        pts.push_back({s, baseline + alpha * std::exp(beta * (s - 9.0))});
        s += stream.uniform(0.9, 1.6);
    }
    return pts;
}

}  // namespace

TEST_SUITE("dmax") {

TEST_CASE("symmetric parabola puts the threshold at the vertex") {
    // lactate = (s - 12)^2 with chord endpoints at s = 9 and s = 15
    FittedCurve curve;
    curve.poly.coef = {144.0, -24.0, 1.0};
    curve.degree = 2;
    curve.speed_min_kmh = 9.0;
    curve.speed_max_kmh = 15.0;
    const DmaxEstimate est = dmax_lt(curve, {9.0, 9.0}, {15.0, 9.0});
    CHECK(est.lt_speed_kmh == 12.0);
    CHECK(est.lt_lactate_mmol_l == doctest::Approx(0.0));
    CHECK(est.max_distance == doctest::Approx(9.0));  // horizontal chord
}

TEST_CASE("straight-line data has no Dmax point") {
    std::vector<LactatePoint> pts;
    for (double s : {9.0, 10.5, 12.0, 13.5, 15.0}) pts.push_back({s, 0.5 * s - 2.0});
    const FittedCurve curve = fit_lactate_curve(pts, 3);
    CHECK_THROWS_AS(dmax_lt(curve, pts.front(), pts.back()), NoDmaxError);
}

TEST_CASE("zero-length chord is a domain error") {
    FittedCurve curve;
    curve.poly.coef = {0.0, 0.0, 1.0};
    CHECK_THROWS_AS(dmax_lt(curve, {12.0, 3.0}, {12.0, 3.0}), DomainError);
}

TEST_CASE("analytic argmax agrees with the dense grid oracle on 100 random convex curves") {
    RngStream stream = RngStream::derive(12345, {0});
    for (int rep = 0; rep < 100; ++rep) {
        const auto pts = random_convex_points(stream);
        const FittedCurve curve = fit_lactate_curve(pts, 3);
        const DmaxEstimate est = dmax_lt(curve, pts.front(), pts.back());
        const double oracle = grid_oracle_lt(curve, pts.front(), pts.back(), 100000);
        CHECK(std::abs(est.lt_speed_kmh - oracle) <= 0.01);
        CHECK(est.lt_speed_kmh >= pts.front().speed_kmh);
        CHECK(est.lt_speed_kmh <= pts.back().speed_kmh);
        CHECK(est.max_distance >= 0.0);
    }
}

TEST_CASE("interior solutions satisfy the stationarity condition") {
    RngStream stream = RngStream::derive(777, {1});
    for (int rep = 0; rep < 50; ++rep) {
        const auto pts = random_convex_points(stream);
        const FittedCurve curve = fit_lactate_curve(pts, 3);
        const DmaxEstimate est = dmax_lt(curve, pts.front(), pts.back());
        const double lo = pts.front().speed_kmh;
        const double hi = pts.back().speed_kmh;
        if (est.lt_speed_kmh <= lo + 1e-9 || est.lt_speed_kmh >= hi - 1e-9) continue;
        const double chord_slope = (pts.back().lactate_mmol_l - pts.front().lactate_mmol_l) /
                                   (hi - lo);
        const double deriv = curve.poly.derivative()(est.lt_speed_kmh);
        CHECK(std::abs(deriv - chord_slope) < 1e-6);
    }
}

TEST_CASE("adding a constant to all lactate values does not move the threshold") {
    RngStream stream = RngStream::derive(31415, {2});
    for (int rep = 0; rep < 30; ++rep) {
        auto pts = random_convex_points(stream);
        const FittedCurve curve = fit_lactate_curve(pts, 3);
        const DmaxEstimate base = dmax_lt(curve, pts.front(), pts.back());

        const double shift = stream.uniform(0.5, 5.0);
        auto shifted = pts;
        for (auto& p : shifted) p.lactate_mmol_l += shift;
        const FittedCurve curve2 = fit_lactate_curve(shifted, 3);
        const DmaxEstimate moved = dmax_lt(curve2, shifted.front(), shifted.back());
        CHECK(std::abs(moved.lt_speed_kmh - base.lt_speed_kmh) < 1e-9);
    }
}

TEST_CASE("doubling the oracle grid density moves its argmax by less than the coarse step") {
    RngStream stream = RngStream::derive(2718, {4});
    for (int rep = 0; rep < 20; ++rep) {
        const auto pts = random_convex_points(stream);
        const FittedCurve curve = fit_lactate_curve(pts, 3);
        const double span = pts.back().speed_kmh - pts.front().speed_kmh;
        const int coarse_n = 5000;
        const double coarse = grid_oracle_lt(curve, pts.front(), pts.back(), coarse_n);
        const double fine = grid_oracle_lt(curve, pts.front(), pts.back(), 2 * coarse_n);
        CHECK(std::abs(fine - coarse) < span / (coarse_n - 1));
    }
}

TEST_CASE("grid reference scan matches the analytic path") {
    RngStream stream = RngStream::derive(5555, {9});
    const auto pts = random_convex_points(stream);
    const FittedCurve curve = fit_lactate_curve(pts, 3);
    const DmaxEstimate analytic = dmax_lt(curve, pts.front(), pts.back());
    const DmaxEstimate grid = dmax_lt_grid([&](double s) { return curve.poly(s); }, pts.front(),
                                           pts.back(), 100000);
    CHECK(std::abs(analytic.lt_speed_kmh - grid.lt_speed_kmh) <= 0.01);
    CHECK(analytic.max_distance == doctest::Approx(grid.max_distance).epsilon(1e-3));
}

TEST_CASE("degree-4 curves fall back to bracketed root isolation") {
    RngStream stream = RngStream::derive(864, {6});
    for (int rep = 0; rep < 20; ++rep) {
        const auto pts = random_convex_points(stream);
        if (pts.size() < 6) continue;
        const FittedCurve curve = fit_lactate_curve(pts, 4);
        const DmaxEstimate est = dmax_lt(curve, pts.front(), pts.back());
        const double oracle = grid_oracle_lt(curve, pts.front(), pts.back(), 100000);
        CHECK(std::abs(est.lt_speed_kmh - oracle) <= 0.01);
    }
}

TEST_CASE("flag_outliers: manual list is authoritative") {
    AthleteTest test;
    test.athlete_id = "a9";
    test.points = {{9.0, 1.3}, {10.5, 1.5}, {12.0, 2.0}, {13.5, 3.1}, {15.0, 5.2}};
    test.pts_kmh = 15.0;
    const std::vector<AthleteTest> tests = {test};
    const std::vector<std::string> exclude = {"a9"};
    const auto flags = flag_outliers(tests, exclude);
    REQUIRE(!flags.empty());
    CHECK(flags.front().reason == "manual");
    CHECK(flags.front().manual);
}

TEST_CASE("flag_outliers: transformed LT above the reserve is advisory-flagged") {
    // A steep terminal rise puts the Dmax point near the last stage; with a
    // (deliberately inconsistent) PTS below that stage the transform exceeds
    // 100% of ERSR. flag_outliers screens even what validation would reject.
    AthleteTest test;
    test.athlete_id = "hot";
    const TestProtocol protocol;
    for (double s : protocol.stage_speeds(8)) {
        test.points.push_back({s, 1.2 + 0.05 * std::exp(1.4 * (s - 9.0))});
    }
    test.pts_kmh = 14.0;  // below the last stage speed of 17.5
    const std::vector<AthleteTest> tests = {test};
    const auto flags = flag_outliers(tests, {});
    bool saw_reserve_flag = false;
    for (const auto& f : flags) {
        if (f.reason.find("LT outside reserve") != std::string::npos) {
            saw_reserve_flag = true;
            CHECK_FALSE(f.manual);
        }
    }
    CHECK(saw_reserve_flag);
}

TEST_CASE("flag_outliers: non-increasing terminal lactate and high RSS are advisory") {
    AthleteTest flat;
    flat.athlete_id = "flat";
    flat.points = {{9.0, 1.3}, {10.5, 1.6}, {12.0, 2.4}, {13.5, 4.0}, {15.0, 3.9}};
    flat.pts_kmh = 15.0;

    AthleteTest ragged;
    ragged.athlete_id = "ragged";
    ragged.points = {{9.0, 1.0}, {10.5, 4.0}, {12.0, 1.2}, {13.5, 5.5}, {15.0, 6.0}};
    ragged.pts_kmh = 15.0;

    const std::vector<AthleteTest> tests = {flat, ragged};
    OutlierScreenConfig config;
    config.rss_threshold = 0.5;
    const auto flags = flag_outliers(tests, {}, config);

    bool flat_flagged = false, rss_flagged = false;
    for (const auto& f : flags) {
        if (f.athlete_id == "flat" && f.reason.find("final two stages") != std::string::npos) {
            flat_flagged = true;
        }
        if (f.athlete_id == "ragged" && f.reason.find("RSS") != std::string::npos) {
            rss_flagged = true;
        }
    }
    CHECK(flat_flagged);
    CHECK(rss_flagged);
}

TEST_CASE("flag_outliers: clean synthetic-looking population has no flags") {
    std::vector<AthleteTest> tests;
    RngStream stream = RngStream::derive(10101, {8});
    const TestProtocol protocol;
    for (int i = 0; i < 10; ++i) {
        AthleteTest test;
        test.athlete_id = "c" + std::to_string(i);
        const double beta = stream.uniform(0.35, 0.6);
        for (double s : protocol.stage_speeds(8)) {
            test.points.push_back({s, 1.2 + 0.3 * std::exp(beta * (s - 9.0))});
        }
        test.pts_kmh = test.points.back().speed_kmh;
        tests.push_back(test);
    }
    CHECK(flag_outliers(tests, {}).empty());
}

}  // TEST_SUITE
