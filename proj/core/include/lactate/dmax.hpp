#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lactate/curve_fit.hpp"
#include "lactate/model.hpp"

namespace lactate {

/// Lactate threshold by maximal perpendicular distance between the fitted
/// curve and the chord joining the first and last measured points.
struct DmaxEstimate {
    double lt_speed_kmh = 0.0;
    double lt_lactate_mmol_l = 0.0;
    LactatePoint chord_first;
    LactatePoint chord_last;
    double max_distance = 0.0;  // perpendicular distance to the chord
};

/// Compute the Dmax threshold. The argmax is found analytically: stationary
/// points of the chord-curve gap (f'(s) = chord slope) plus the interval
/// endpoints, restricted to where the curve lies below the chord; ties break
/// toward the lowest speed.
///
/// Throws DomainError on a zero-length chord and NoDmaxError when the curve
/// never lies below the chord (straight-line or concave data).
DmaxEstimate dmax_lt(const FittedCurve& curve, const LactatePoint& first_point,
                     const LactatePoint& last_point);

/// Reference scan for cross-checking a Dmax construction: evaluates the gap
/// on a uniform grid and returns the best grid node. Slow by design; the
/// production path above is analytic.
DmaxEstimate dmax_lt_grid(const std::function<double(double)>& curve,
                          const LactatePoint& first_point, const LactatePoint& last_point,
                          int grid_points);

struct OutlierFlag {
    std::string athlete_id;
    std::string reason;
    bool manual = false;  // manual flags exclude; advisory flags only annotate
};

struct OutlierScreenConfig {
    int degree = 3;
    double rss_threshold = 2.0;  // (mmol/L)^2, advisory only
};

/// Union of the manual exclusion list (authoritative) and automated advisory
/// flags: transformed LT outside [0, 100]% of ERSR, fit RSS above threshold,
/// or non-increasing lactate over the final two stages. Advisory flags never
/// exclude on their own.
std::vector<OutlierFlag> flag_outliers(std::span<const AthleteTest> tests,
                                       std::span<const std::string> exclusion_ids,
                                       const OutlierScreenConfig& config = {});

}  // namespace lactate
