#include <doctest.h>

#include "lactate/errors.hpp"
#include "lactate/model.hpp"
#include "lactate/rng.hpp"

using namespace lactate;

namespace {

AthleteTest well_formed_test() {
    AthleteTest test;
    test.athlete_id = "a1";
    test.points = {{9.0, 1.3}, {10.5, 1.5}, {12.0, 1.9}, {13.5, 2.6},
                   {14.5, 3.2}, {15.5, 4.4}, {16.5, 6.1}, {17.5, 8.4}};
    test.pts_kmh = 17.5;
    return test;
}

bool has_invariant(const std::vector<ValidationFinding>& findings, const std::string& key) {
    for (const auto& f : findings) {
        if (f.invariant == key) return true;
    }
    return false;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("default protocol reproduces the standard stage ladder") {
    const TestProtocol protocol;
    const std::vector<double> expected = {9.0, 10.5, 12.0, 13.5, 14.5, 15.5, 16.5, 17.5, 18.5, 19.5};
    CHECK(protocol.stage_speeds(10) == expected);
    CHECK(protocol.initial_speed_kmh == 9.0);
    CHECK(protocol.slope_percent == 1.0);
    CHECK(protocol.recovery_between_stages_min == 1.0);
}

TEST_CASE("protocol stage listing up to a peak speed") {
    const TestProtocol protocol;
    const auto speeds = protocol.stage_speeds_up_to(14.5);
    CHECK(speeds == std::vector<double>{9.0, 10.5, 12.0, 13.5, 14.5});
}

TEST_CASE("protocol invariants are enforced") {
    TestProtocol protocol;
    protocol.initial_speed_kmh = 0.0;
    CHECK_THROWS_AS(protocol.validate(), ConfigError);

    protocol = TestProtocol{};
    protocol.stage_schedule[0].increment_kmh = -1.0;
    CHECK_THROWS_AS(protocol.validate(), ConfigError);

    protocol = TestProtocol{};
    protocol.stage_schedule[1].until_speed_kmh = 13.0;  // not increasing past rung 0
    CHECK_THROWS_AS(protocol.validate(), ConfigError);
}

TEST_CASE("speed/pace conversions") {
    CHECK(speed_to_pace(12.0).min_per_km == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(speed_to_pace(15.0).min_per_km == doctest::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(speed_to_pace(0.0), DomainError);
    CHECK_THROWS_AS(speed_to_pace(-3.0), DomainError);
    CHECK_THROWS_AS(pace_to_speed(Pace{0.0}), DomainError);
}

TEST_CASE("pace round-trip is identity within 1e-12 relative over [1, 30] km/h") {
    RngStream stream = RngStream::derive(2024, {1});
    for (int i = 0; i < 1000; ++i) {
        const double speed = stream.uniform(1.0, 30.0);
        const double back = pace_to_speed(speed_to_pace(speed));
        CHECK(std::abs(back - speed) <= 1e-12 * speed);
    }
}

TEST_CASE("well-formed test has no findings") {
    CHECK(validate_test(well_formed_test()).empty());
}

TEST_CASE("duplicate stage speed produces a non-increasing finding") {
    AthleteTest test = well_formed_test();
    test.points[3].speed_kmh = 12.0;  // duplicate of point 2
    const auto findings = validate_test(test);
    CHECK(has_invariant(findings, "non-increasing speeds"));
}

TEST_CASE("three points is insufficient for Dmax") {
    AthleteTest test = well_formed_test();
    test.points.resize(3);
    const auto findings = validate_test(test);
    CHECK(has_invariant(findings, "insufficient points for Dmax (<4)"));
}

TEST_CASE("pts below last stage speed is flagged") {
    AthleteTest test = well_formed_test();
    test.pts_kmh = 16.0;
    CHECK(has_invariant(validate_test(test), "pts below last stage"));
}

TEST_CASE("pts must exceed initial speed") {
    AthleteTest test = well_formed_test();
    test.points = {{9.0, 1.0}, {9.2, 1.1}, {9.4, 1.2}, {9.6, 1.3}};
    test.pts_kmh = 9.0;  // == initial speed
    CHECK(has_invariant(validate_test(test), "pts below last stage"));
    CHECK(has_invariant(validate_test(test), "pts not above initial speed"));
}

TEST_CASE("non-positive concentrations and speeds are flagged") {
    AthleteTest test = well_formed_test();
    test.points[2].lactate_mmol_l = -0.5;
    test.points[4].speed_kmh = 0.0;
    const auto findings = validate_test(test);
    CHECK(has_invariant(findings, "non-positive concentration"));
    CHECK(has_invariant(findings, "non-positive speed"));
}

}  // TEST_SUITE
