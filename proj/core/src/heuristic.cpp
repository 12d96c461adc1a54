#include "lactate/heuristic.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "lactate/errors.hpp"

namespace lactate {

namespace {

// Paces are in min/km, errors in s/km. The percent column is derived from
// the s/km column; s/km governs when they disagree after unit conversion.
constexpr std::array<AcceptableErrorRow, 5> kErrorLadder = {{
    {3.0, 3.0, 1.7},
    {3.5, 5.0, 2.4},
    {4.0, 10.0, 4.2},
    {4.5, 15.0, 5.5},
    {5.0, 20.0, 6.6},
}};

// Absorbs pace-conversion rounding so the inclusive boundary stays inclusive.
constexpr double kResidualEps = 1e-9;  // s/km

}  // namespace

SpeedReserve speed_reserve(double pts_kmh, double initial_speed_kmh) {
    if (!std::isfinite(pts_kmh) || !std::isfinite(initial_speed_kmh) || initial_speed_kmh <= 0.0) {
        throw DomainError("speed_reserve: speeds must be finite and initial speed > 0");
    }
    if (!(pts_kmh > initial_speed_kmh)) {
        std::ostringstream msg;
        msg << "speed_reserve: PTS " << pts_kmh << " km/h must exceed the initial speed "
            << initial_speed_kmh << " km/h";
        throw DomainError(msg.str());
    }
    return SpeedReserve{pts_kmh, initial_speed_kmh, pts_kmh - initial_speed_kmh};
}

TransformedLT transform_lt(double lt_speed_kmh, const SpeedReserve& reserve) {
    if (!std::isfinite(lt_speed_kmh)) {
        throw DomainError("transform_lt: LT speed must be finite");
    }
    return TransformedLT{(lt_speed_kmh - reserve.initial_speed_kmh) / reserve.ersr_kmh * 100.0};
}

double inverse_transform_lt(TransformedLT lt, const SpeedReserve& reserve) {
    return reserve.initial_speed_kmh + lt.percent / 100.0 * reserve.ersr_kmh;
}

double heuristic_lt(const SpeedReserve& reserve, double fraction) {
    if (!std::isfinite(fraction) || fraction <= 0.0 || fraction > 1.0) {
        std::ostringstream msg;
        msg << "heuristic_lt: fraction " << fraction << " must be in (0, 1]";
        throw ConfigError(msg.str());
    }
    return reserve.initial_speed_kmh + fraction * reserve.ersr_kmh;
}

std::span<const AcceptableErrorRow> acceptable_error_table() {
    return {kErrorLadder.data(), kErrorLadder.size()};
}

AcceptableErrorRow acceptable_error_for(Pace pace_at_lt) {
    if (!std::isfinite(pace_at_lt.min_per_km) || pace_at_lt.min_per_km <= 0.0) {
        throw DomainError("acceptable_error_for: pace must be finite and > 0");
    }
    if (pace_at_lt.min_per_km < kErrorLadder.front().pace_threshold_min_km) {
        std::ostringstream msg;
        msg << "acceptable_error_for: pace " << pace_at_lt.min_per_km
            << " min/km is out of scope (fitness level above the target population)";
        throw OutOfScopeError(msg.str());
    }
    AcceptableErrorRow row = kErrorLadder.front();
    for (const AcceptableErrorRow& r : kErrorLadder) {
        if (pace_at_lt.min_per_km >= r.pace_threshold_min_km) row = r;
    }
    return row;
}

ResidualCheck within_acceptable(double estimate_speed_kmh, double reference_speed_kmh) {
    const Pace est = speed_to_pace(estimate_speed_kmh);
    const Pace ref = speed_to_pace(reference_speed_kmh);
    const AcceptableErrorRow row = acceptable_error_for(ref);
    const double residual = std::abs(est.min_per_km - ref.min_per_km) * 60.0;
    return ResidualCheck{residual, residual <= row.max_error_s_km + kResidualEps};
}

}  // namespace lactate
