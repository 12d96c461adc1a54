#pragma once

#include <span>

#include "lactate/model.hpp"

namespace lactate {

/// Endurance running speed reserve: peak treadmill speed minus the test's
/// initial running speed.
struct SpeedReserve {
    double pts_kmh = 0.0;
    double initial_speed_kmh = 0.0;
    double ersr_kmh = 0.0;
};

/// A lactate threshold expressed as a percentage of the speed reserve above
/// the initial speed. Values outside [0, 100] are representable; outlier
/// screening flags them.
struct TransformedLT {
    double percent = 0.0;
};

SpeedReserve speed_reserve(double pts_kmh, double initial_speed_kmh);

TransformedLT transform_lt(double lt_speed_kmh, const SpeedReserve& reserve);
double inverse_transform_lt(TransformedLT lt, const SpeedReserve& reserve);

/// The speed-reserve heuristic: LT = initial speed + fraction * ERSR.
/// The operational default is 60%; 59.6% is the calibrated population mean.
double heuristic_lt(const SpeedReserve& reserve, double fraction = 0.60);

/// One rung of the individual acceptable-error ladder: at LT paces at or
/// above `pace_threshold_min_km`, an estimate is useful within
/// `max_error_s_km` seconds per km.
struct AcceptableErrorRow {
    double pace_threshold_min_km = 0.0;
    double max_error_s_km = 0.0;
    double max_error_percent = 0.0;
};

/// The full ladder, slowest rung last. Paces faster than 3 min/km are out of
/// scope (fitness level above the population this tool targets).
std::span<const AcceptableErrorRow> acceptable_error_table();

/// Bucket lookup: the row with the largest threshold <= pace. Thresholds are
/// lower-inclusive. Throws OutOfScopeError below 3 min/km.
AcceptableErrorRow acceptable_error_for(Pace pace_at_lt);

struct ResidualCheck {
    double residual_s_km = 0.0;  // |pace(estimate) - pace(reference)|
    bool within = false;
};

/// Compare an estimated LT speed against a reference LT speed in pace space.
/// The reference pace selects the acceptable-error bucket; the boundary is
/// inclusive. Throws OutOfScopeError when the reference pace is below scope.
ResidualCheck within_acceptable(double estimate_speed_kmh, double reference_speed_kmh);

}  // namespace lactate
