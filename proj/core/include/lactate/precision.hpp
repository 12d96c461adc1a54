#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lactate/model.hpp"
#include "lactate/rng.hpp"

namespace lactate {

/// Monte Carlo propagation of blood-lactate measurement error through the
/// Dmax protocol. measurement_sd has no default: it is the precision of the
/// analyzer in use and must be supplied explicitly.
struct PrecisionConfig {
    double measurement_sd = std::numeric_limits<double>::quiet_NaN();  // mmol/L
    int n_bootstrap_resamples = 20;
    int n_random_samples = 20;
    std::uint64_t master_seed = 1;
    int degree = 3;
    int n_threads = 1;  // 0 = hardware concurrency; never affects results

    void validate() const;  // throws ConfigError
};

struct GroupPrecision {
    int point_count = 0;
    int n_athletes = 0;
    std::int64_t n_samples = 0;  // error samples that entered the distribution
    std::int64_t n_dropped = 0;  // plausible curves whose fit or Dmax failed
    double sem_pct_ersr = 0.0;   // SD of the error distribution, % of ERSR
    double sem_kmh = 0.0;        // same distribution in km/h
    double r_squared = 0.0;      // error variance / nominal LT variance, clamped
};

struct PrecisionErrorSample {
    int point_count = 0;
    double error_pct_ersr = 0.0;
    double error_kmh = 0.0;
};

struct PrecisionReport {
    std::vector<GroupPrecision> per_point_count;  // ascending point count
    std::vector<PrecisionErrorSample> error_samples;
    double ceiling_accuracy_pct = 0.0;
    std::int64_t n_samples_total = 0;
    std::int64_t n_dropped_total = 0;
    std::int64_t n_ceiling_within = 0;
    std::int64_t n_ceiling_total = 0;
    std::int64_t n_scope_skipped = 0;  // samples whose reference pace is out of scope
    double drop_rate = 0.0;
    std::vector<std::string> warnings;
};

/// n plausible concentrations: measured value plus a Normal(0, sd) draw,
/// redrawn while non-positive. Deterministic given the stream state.
std::vector<double> plausible_measurements(const LactatePoint& point, int n, RngStream& stream,
                                           double sd);

/// Athletes are grouped by lactate-point count and each group is analyzed
/// separately: bootstrap resamples of the group with replacement, paired
/// plausible curves per athlete, Dmax per curve, per-athlete errors as
/// deviations from their own mean, all in % of ERSR. SEM is the standard
/// deviation of the aggregated error distribution. Bit-identical for a fixed
/// master seed regardless of n_threads.
PrecisionReport dmax_precision(std::span<const AthleteTest> population,
                               const PrecisionConfig& config);

/// Share of all plausible Dmax LTs whose pace residual against the athlete's
/// nominal Dmax LT stays within the individual acceptable error.
double ceiling_accuracy(std::span<const AthleteTest> population, const PrecisionConfig& config);

}  // namespace lactate
