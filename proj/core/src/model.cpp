#include "lactate/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lactate/errors.hpp"

namespace lactate {

std::vector<StageRule> TestProtocol::default_schedule() {
    return {
        {1.5, 4.0, 13.5},
        {1.0, 4.0, std::numeric_limits<double>::infinity()},
    };
}

void TestProtocol::validate() const {
    if (!(initial_speed_kmh > 0.0)) {
        throw ConfigError("protocol: initial_speed_kmh must be > 0");
    }
    if (stage_schedule.empty()) {
        throw ConfigError("protocol: stage_schedule must not be empty");
    }
    double prev_until = initial_speed_kmh;
    for (const StageRule& rule : stage_schedule) {
        if (!(rule.increment_kmh > 0.0)) {
            throw ConfigError("protocol: stage increments must be > 0");
        }
        if (!(rule.duration_min > 0.0)) {
            throw ConfigError("protocol: stage durations must be > 0");
        }
        if (!(rule.until_speed_kmh > prev_until)) {
            throw ConfigError("protocol: schedule speeds must be strictly increasing");
        }
        prev_until = rule.until_speed_kmh;
    }
    if (!(recovery_between_stages_min >= 0.0)) {
        throw ConfigError("protocol: recovery duration must be >= 0");
    }
}

std::vector<double> TestProtocol::stage_speeds(std::size_t count) const {
    validate();
    std::vector<double> speeds;
    speeds.reserve(count);
    double speed = initial_speed_kmh;
    std::size_t rule_idx = 0;
    while (speeds.size() < count) {
        speeds.push_back(speed);
        while (rule_idx + 1 < stage_schedule.size() &&
               speed >= stage_schedule[rule_idx].until_speed_kmh) {
            ++rule_idx;
        }
        speed += stage_schedule[rule_idx].increment_kmh;
    }
    return speeds;
}

std::vector<double> TestProtocol::stage_speeds_up_to(double pts_kmh) const {
    validate();
    std::vector<double> speeds;
    double speed = initial_speed_kmh;
    std::size_t rule_idx = 0;
    // Half an increment of slack absorbs accumulated rounding in the ladder.
    while (speed <= pts_kmh + 1e-9) {
        speeds.push_back(speed);
        while (rule_idx + 1 < stage_schedule.size() &&
               speed >= stage_schedule[rule_idx].until_speed_kmh) {
            ++rule_idx;
        }
        speed += stage_schedule[rule_idx].increment_kmh;
    }
    return speeds;
}

Pace speed_to_pace(double speed_kmh) {
    if (!std::isfinite(speed_kmh) || speed_kmh <= 0.0) {
        throw DomainError("speed_to_pace: speed must be finite and > 0");
    }
    return Pace{60.0 / speed_kmh};
}

double pace_to_speed(Pace pace) {
    if (!std::isfinite(pace.min_per_km) || pace.min_per_km <= 0.0) {
        throw DomainError("pace_to_speed: pace must be finite and > 0");
    }
    return 60.0 / pace.min_per_km;
}

namespace {

ValidationFinding finding(const AthleteTest& test, std::string invariant, std::string field,
                          std::string message) {
    return ValidationFinding{test.athlete_id, std::move(invariant), std::move(field),
                             std::move(message)};
}

}  // namespace

std::vector<ValidationFinding> validate_test(const AthleteTest& test) {
    std::vector<ValidationFinding> findings;

    try {
        test.protocol.validate();
    } catch (const ConfigError& e) {
        findings.push_back(finding(test, "invalid protocol", "protocol", e.what()));
    }

    for (std::size_t i = 0; i < test.points.size(); ++i) {
        const LactatePoint& p = test.points[i];
        if (!std::isfinite(p.speed_kmh) || p.speed_kmh <= 0.0) {
            std::ostringstream msg;
            msg << "point " << i << ": stage speed " << p.speed_kmh << " must be finite and > 0";
            findings.push_back(finding(test, "non-positive speed", "points", msg.str()));
        }
        if (!std::isfinite(p.lactate_mmol_l) || p.lactate_mmol_l <= 0.0) {
            std::ostringstream msg;
            msg << "point " << i << ": concentration " << p.lactate_mmol_l
                << " must be finite and > 0";
            findings.push_back(finding(test, "non-positive concentration", "points", msg.str()));
        }
    }

    for (std::size_t i = 1; i < test.points.size(); ++i) {
        if (!(test.points[i].speed_kmh > test.points[i - 1].speed_kmh)) {
            std::ostringstream msg;
            msg << "stage speeds must be strictly increasing; point " << i << " ("
                << test.points[i].speed_kmh << " km/h) does not exceed point " << i - 1 << " ("
                << test.points[i - 1].speed_kmh << " km/h)";
            findings.push_back(finding(test, "non-increasing speeds", "points", msg.str()));
        }
    }

    if (test.points.size() < 4) {
        std::ostringstream msg;
        msg << "got " << test.points.size() << " points, need at least 4 for a degree-3 fit";
        findings.push_back(finding(test, "insufficient points for Dmax (<4)", "points", msg.str()));
    }

    if (!test.points.empty() && !(test.pts_kmh >= test.points.back().speed_kmh)) {
        std::ostringstream msg;
        msg << "PTS " << test.pts_kmh << " km/h is below the last stage speed "
            << test.points.back().speed_kmh << " km/h";
        findings.push_back(finding(test, "pts below last stage", "pts_kmh", msg.str()));
    }
    if (!(test.pts_kmh > test.protocol.initial_speed_kmh)) {
        std::ostringstream msg;
        msg << "PTS " << test.pts_kmh << " km/h must exceed the initial speed "
            << test.protocol.initial_speed_kmh << " km/h";
        findings.push_back(finding(test, "pts not above initial speed", "pts_kmh", msg.str()));
    }

    return findings;
}

}  // namespace lactate
