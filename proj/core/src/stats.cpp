#include "lactate/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lactate/curve_fit.hpp"
#include "lactate/errors.hpp"
#include "lactate/heuristic.hpp"
#include "lactate/rng.hpp"

namespace lactate {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Acklam's rational approximation refined with one Halley step; accurate to
// a few ulps across (0, 1).
double normal_ppf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("normal_ppf: p must be in (0, 1)");
    }
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

double quantile_sorted(const std::vector<double>& sorted, double level) {
    const auto b = static_cast<long>(sorted.size());
    long idx = static_cast<long>(std::ceil(level * static_cast<double>(b)));
    idx = std::clamp(idx, 1L, b);
    return sorted[static_cast<std::size_t>(idx - 1)];
}

double mean_of(std::span<const double> values) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

}  // namespace

BcaInterval bca_ci(std::span<const double> samples, int n_resamples, double confidence,
                   std::uint64_t seed) {
    const std::size_t n = samples.size();
    if (n < 3) throw PreconditionError("bca_ci: need at least 3 samples");
    for (double v : samples) {
        if (!std::isfinite(v)) throw PreconditionError("bca_ci: samples must be finite");
    }
    if (n_resamples < 1) throw ConfigError("bca_ci: n_resamples must be >= 1");
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw ConfigError("bca_ci: confidence must be in (0, 1)");
    }

    const double theta_hat = mean_of(samples);

    std::vector<double> means(static_cast<std::size_t>(n_resamples));
    for (std::size_t b = 0; b < means.size(); ++b) {
        RngStream stream = RngStream::derive(seed, {stream_tag::bootstrap_mean, b});
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += samples[stream.below(n)];
        means[b] = acc / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());

    const double alpha = 0.5 * (1.0 - confidence);

    // Jackknife acceleration from leave-one-out means.
    double total = 0.0;
    for (double v : samples) total += v;
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        loo[i] = (total - samples[i]) / static_cast<double>(n - 1);
    }
    const double loo_mean = mean_of(loo);
    double sum_sq = 0.0, sum_cu = 0.0;
    for (double v : loo) {
        const double d = loo_mean - v;
        sum_sq += d * d;
        sum_cu += d * d * d;
    }

    const std::size_t below =
        static_cast<std::size_t>(std::count_if(means.begin(), means.end(),
                                               [&](double m) { return m < theta_hat; }));

    BcaInterval interval;
    if (below == 0 || below == means.size() || sum_sq < 1e-300) {
        // Degenerate bias correction or jackknife variance: plain percentile.
        interval.low = quantile_sorted(means, alpha);
        interval.high = quantile_sorted(means, 1.0 - alpha);
        interval.percentile_fallback = true;
        return interval;
    }

    const double z0 = normal_ppf(static_cast<double>(below) / static_cast<double>(means.size()));
    const double accel = sum_cu / (6.0 * std::pow(sum_sq, 1.5));
    const double z_lo = normal_ppf(alpha);
    const double z_hi = normal_ppf(1.0 - alpha);

    const auto adjusted = [&](double z) {
        return normal_cdf(z0 + (z0 + z) / (1.0 - accel * (z0 + z)));
    };
    interval.low = quantile_sorted(means, adjusted(z_lo));
    interval.high = quantile_sorted(means, adjusted(z_hi));
    if (interval.low > interval.high) std::swap(interval.low, interval.high);
    return interval;
}

double system_accuracy(std::span<const ResidualRecord> residuals) {
    if (residuals.empty()) {
        throw DomainError("system_accuracy: no residual records");
    }
    std::size_t within = 0;
    for (const ResidualRecord& r : residuals) {
        if (r.within) ++within;
    }
    return 100.0 * static_cast<double>(within) / static_cast<double>(residuals.size());
}

AcceptanceVerdict evaluate_acceptance(double system_accuracy_pct, double ceiling_accuracy_pct,
                                      double threshold_pct) {
    const auto in_range = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 100.0; };
    if (!in_range(system_accuracy_pct) || !in_range(ceiling_accuracy_pct) ||
        !in_range(threshold_pct)) {
        throw PreconditionError("evaluate_acceptance: inputs must be in [0, 100]");
    }
    AcceptanceVerdict v;
    v.system_accuracy_pct = system_accuracy_pct;
    v.ceiling_accuracy_pct = ceiling_accuracy_pct;
    v.threshold_pct = threshold_pct;
    v.gap_points = ceiling_accuracy_pct - system_accuracy_pct;
    if (ceiling_accuracy_pct > 0.0) {
        v.relative_accuracy_pct = 100.0 * system_accuracy_pct / ceiling_accuracy_pct;
    } else {
        v.relative_accuracy_pct = system_accuracy_pct == 0.0 ? 100.0 : 0.0;
    }
    v.absolute_pass = system_accuracy_pct >= threshold_pct;
    v.relative_pass = v.relative_accuracy_pct >= threshold_pct;
    v.pass = v.relative_pass;
    return v;
}

PopulationReport build_population_report(std::span<const AthleteTest> tests,
                                         const PopulationConfig& config) {
    if (!(config.fraction > 0.0 && config.fraction <= 1.0)) {
        throw ConfigError("report: fraction must be in (0, 1]");
    }
    PopulationReport report;
    report.advisories = flag_outliers(tests, config.exclude_ids,
                                      {config.degree, config.rss_threshold});

    std::vector<AthleteTest> included_tests;
    std::vector<double> transformed;
    for (const AthleteTest& test : tests) {
        const bool manual = std::any_of(
            report.advisories.begin(), report.advisories.end(),
            [&](const OutlierFlag& f) { return f.manual && f.athlete_id == test.athlete_id; });
        if (test.excluded || manual) {
            report.exclusions.push_back(
                {test.athlete_id, test.excluded ? "pre-flagged in input" : "manual exclusion"});
            continue;
        }
        try {
            const FittedCurve curve = fit_lactate_curve(test.points, config.degree);
            const DmaxEstimate est = dmax_lt(curve, test.points.front(), test.points.back());
            const SpeedReserve reserve =
                speed_reserve(test.pts_kmh, test.protocol.initial_speed_kmh);
            const double estimate = heuristic_lt(reserve, config.fraction);
            const ResidualCheck check = within_acceptable(estimate, est.lt_speed_kmh);

            ResidualRecord record;
            record.athlete_id = test.athlete_id;
            record.reference_lt_kmh = est.lt_speed_kmh;
            record.estimated_lt_kmh = estimate;
            const double signed_residual = (speed_to_pace(estimate).min_per_km -
                                            speed_to_pace(est.lt_speed_kmh).min_per_km) *
                                           60.0;
            record.residual_s_km = signed_residual;
            record.acceptable_limit_s_km =
                acceptable_error_for(speed_to_pace(est.lt_speed_kmh)).max_error_s_km;
            record.within = check.within;
            report.residuals.push_back(std::move(record));

            transformed.push_back(transform_lt(est.lt_speed_kmh, reserve).percent);
            included_tests.push_back(test);
        } catch (const OutOfScopeError&) {
            report.exclusions.push_back(
                {test.athlete_id, "LT pace out of scope (faster than 3 min/km)"});
        } catch (const Error& e) {
            report.exclusions.push_back({test.athlete_id, e.what()});
        }
    }

    report.n_included = static_cast<int>(report.residuals.size());
    report.n_excluded = static_cast<int>(report.exclusions.size());
    if (transformed.size() < 3) {
        throw DomainError("report: need at least 3 included athletes for the bootstrap CI");
    }

    report.mean_transformed_lt_pct = mean_of(transformed);
    report.ci = bca_ci(transformed, config.bca_resamples, config.bca_confidence, config.seed);
    report.system_accuracy_pct = system_accuracy(report.residuals);

    if (config.precision.has_value()) {
        report.precision = dmax_precision(included_tests, *config.precision);
        report.ceiling_accuracy_pct = report.precision->ceiling_accuracy_pct;
        report.ceiling_computed = true;
    } else {
        report.ceiling_accuracy_pct = 100.0;  // zero-noise limit
        report.ceiling_computed = false;
    }
    report.total_accuracy_gap = report.ceiling_accuracy_pct - report.system_accuracy_pct;
    report.verdict = evaluate_acceptance(report.system_accuracy_pct, report.ceiling_accuracy_pct,
                                         config.acceptance_threshold_pct);
    return report;
}

}  // namespace lactate
