#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace lactate {

/// One rung of the stage ladder: keep adding `increment_kmh` every
/// `duration_min` while the current speed is below `until_speed_kmh`.
struct StageRule {
    double increment_kmh = 0.0;
    double duration_min = 0.0;
    double until_speed_kmh = 0.0;
};

/// Incremental treadmill protocol. The defaults encode the standard test this
/// toolkit targets: start at 9 km/h, +1.5 km/h every 4 min up to 13.5 km/h,
/// then +1.0 km/h, at 1% slope with 1 min of recovery between stages.
struct TestProtocol {
    double initial_speed_kmh = 9.0;
    double slope_percent = 1.0;
    std::vector<StageRule> stage_schedule = default_schedule();
    double recovery_between_stages_min = 1.0;

    static std::vector<StageRule> default_schedule();

    /// Throws ConfigError when an invariant is broken (non-positive initial
    /// speed or increment, non-increasing rung boundaries).
    void validate() const;

    /// Speeds of the first `count` stages; stage 1 runs at the initial speed.
    std::vector<double> stage_speeds(std::size_t count) const;

    /// Speeds of every completed stage for a test that peaked at `pts_kmh`.
    std::vector<double> stage_speeds_up_to(double pts_kmh) const;
};

struct LactatePoint {
    double speed_kmh = 0.0;
    double lactate_mmol_l = 0.0;
};

/// One athlete's incremental test: ordered (speed, lactate) samples plus the
/// peak treadmill speed (speed of the last completed stage).
struct AthleteTest {
    std::string athlete_id;
    TestProtocol protocol;
    std::vector<LactatePoint> points;
    double pts_kmh = 0.0;
    bool excluded = false;
};

/// Running pace. Derived from speed on demand; km/h is the canonical unit.
struct Pace {
    double min_per_km = 0.0;
};

Pace speed_to_pace(double speed_kmh);
double pace_to_speed(Pace pace);

struct ValidationFinding {
    std::string athlete_id;
    std::string invariant;  // short key, stable across releases
    std::string field;
    std::string message;
};

/// Non-destructive invariant check: returns one finding per violation so a
/// caller can report every problem in a single pass. Empty result means the
/// test satisfies all AthleteTest invariants.
std::vector<ValidationFinding> validate_test(const AthleteTest& test);

}  // namespace lactate
