#pragma once

#include <span>
#include <vector>

#include "lactate/model.hpp"

namespace lactate {

/// Dense polynomial with ascending coefficients: coef[k] multiplies s^k.
struct Polynomial {
    std::vector<double> coef;

    double operator()(double s) const;
    Polynomial derivative() const;
    int degree() const { return static_cast<int>(coef.size()) - 1; }
};

/// Least-squares polynomial lactate = f(speed) with fit diagnostics.
struct FittedCurve {
    Polynomial poly;  // raw speed space, km/h in, mmol/L out
    int degree = 0;
    double speed_min_kmh = 0.0;
    double speed_max_kmh = 0.0;
    double rss = 0.0;  // residual sum of squares, (mmol/L)^2
};

/// Unweighted polynomial least squares. Speeds are mean-centered and scaled
/// to unit half-range before solving, then coefficients are mapped back, so
/// the normal equations stay well conditioned at km/h magnitudes.
///
/// Throws PreconditionError when points < degree+1 or speeds are not strictly
/// increasing; FitError when the system is rank deficient (near-duplicate
/// speeds collapse the scaled basis).
FittedCurve fit_lactate_curve(std::span<const LactatePoint> points, int degree = 3);

}  // namespace lactate
