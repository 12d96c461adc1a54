#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lactate/model.hpp"

namespace lactate {

/// Deterministic synthetic-population generator. Curves come from a convex
/// exponential-plus-baseline family whose shape is calibrated per athlete so
/// the noise-free analysis pipeline recovers the drawn target LT exactly.
struct SynthConfig {
    int n_athletes = 50;
    int points_per_athlete = 8;
    TestProtocol protocol;
    double lt_percent_mean = 59.6;  // % of ERSR
    double lt_percent_sd = 3.0;
    std::pair<double, double> pts_range_kmh = {14.5, 18.5};
    double baseline_lactate_mmol_l = 1.2;
    double curve_noise_sd = 0.15;  // mmol/L, per-point observation noise
    std::uint64_t seed = 1;

    void validate() const;  // throws ConfigError
};

/// Generate `n_athletes` tests. PTS is drawn from the protocol stage speeds
/// inside pts_range (restricted to tests long enough to carry
/// points_per_athlete samples); lactate points sit on an endpoint-preserving
/// even subsample of the completed stages. Deterministic given the seed; all
/// generated tests pass validate_test.
std::vector<AthleteTest> generate_population(const SynthConfig& config);

/// Curve-preserving subsample: keep the first and last points and spread the
/// rest evenly. Used to study how point count alone changes an analysis.
AthleteTest subsample_points(const AthleteTest& test, int target_points);

}  // namespace lactate
