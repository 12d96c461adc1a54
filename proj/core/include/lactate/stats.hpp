#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lactate/dmax.hpp"
#include "lactate/model.hpp"
#include "lactate/precision.hpp"

namespace lactate {

struct BcaInterval {
    double low = 0.0;
    double high = 0.0;
    /// True when the BCa correction degenerated (zero jackknife variance or
    /// all bootstrap means on one side) and a plain percentile interval was
    /// returned instead.
    bool percentile_fallback = false;
};

/// Bias-corrected and accelerated bootstrap interval for the mean.
///
/// Bias correction z0 comes from the fraction of bootstrap means strictly
/// below the sample mean; acceleration from jackknife leave-one-out skewness.
/// Percentile endpoints use the ceil(level * B) order statistic (1-based).
/// Deterministic given the seed.
BcaInterval bca_ci(std::span<const double> samples, int n_resamples = 10000,
                   double confidence = 0.95, std::uint64_t seed = 1);

/// One athlete's heuristic-vs-reference comparison. residual_s_km is signed
/// (estimate minus reference pace); the acceptance check uses its magnitude.
struct ResidualRecord {
    std::string athlete_id;
    double reference_lt_kmh = 0.0;  // Dmax
    double estimated_lt_kmh = 0.0;  // heuristic
    double residual_s_km = 0.0;
    double acceptable_limit_s_km = 0.0;
    bool within = false;
};

/// Percentage of athletes estimated within their individual acceptable error.
double system_accuracy(std::span<const ResidualRecord> residuals);

/// Both readings of the acceptance rule: the threshold compared against the
/// system accuracy outright, and against the accuracy relative to the ceiling
/// an ideal empirical estimator could reach. The headline verdict is the
/// relative one; the gap (ceiling - system) is reported alongside.
struct AcceptanceVerdict {
    double system_accuracy_pct = 0.0;
    double ceiling_accuracy_pct = 0.0;
    double threshold_pct = 95.0;
    double gap_points = 0.0;           // ceiling - system
    double relative_accuracy_pct = 0.0;  // 100 * system / ceiling
    bool absolute_pass = false;        // system >= threshold
    bool relative_pass = false;        // relative >= threshold
    bool pass = false;                 // == relative_pass
};

AcceptanceVerdict evaluate_acceptance(double system_accuracy_pct, double ceiling_accuracy_pct,
                                      double threshold_pct = 95.0);

struct ExclusionNote {
    std::string athlete_id;
    std::string reason;
};

struct PopulationConfig {
    double fraction = 0.60;
    int degree = 3;
    std::vector<std::string> exclude_ids;
    double acceptance_threshold_pct = 95.0;
    int bca_resamples = 10000;
    double bca_confidence = 0.95;
    std::uint64_t seed = 1;
    double rss_threshold = 2.0;
    /// When set, ceiling accuracy is computed by the precision engine on the
    /// included athletes; otherwise it defaults to the zero-noise value 100.
    std::optional<PrecisionConfig> precision;
};

struct PopulationReport {
    int n_included = 0;
    int n_excluded = 0;
    double mean_transformed_lt_pct = 0.0;
    BcaInterval ci;
    double system_accuracy_pct = 0.0;
    double ceiling_accuracy_pct = 100.0;
    bool ceiling_computed = false;
    double total_accuracy_gap = 0.0;  // ceiling - system, percentage points
    AcceptanceVerdict verdict;
    std::vector<ResidualRecord> residuals;  // exactly the included athletes
    std::vector<OutlierFlag> advisories;
    std::vector<ExclusionNote> exclusions;
    std::optional<PrecisionReport> precision;
};

/// Full population evaluation: outlier screening, Dmax references, heuristic
/// estimates, residuals against the acceptable-error ladder, mean transformed
/// LT with its BCa interval, and the acceptance verdict.
PopulationReport build_population_report(std::span<const AthleteTest> tests,
                                         const PopulationConfig& config);

}  // namespace lactate
