#include "lactate/precision.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "lactate/curve_fit.hpp"
#include "lactate/dmax.hpp"
#include "lactate/errors.hpp"
#include "lactate/heuristic.hpp"

namespace lactate {

void PrecisionConfig::validate() const {
    if (!std::isfinite(measurement_sd) || measurement_sd < 0.0) {
        throw ConfigError(
            "precision: measurement_sd must be supplied (>= 0); it is the blood "
            "lactate analyzer's precision and has no default");
    }
    if (n_bootstrap_resamples < 1) {
        throw ConfigError("precision: n_bootstrap_resamples must be >= 1");
    }
    if (n_random_samples < 2) {
        throw ConfigError("precision: n_random_samples must be >= 2");
    }
    if (degree < 1) throw ConfigError("precision: degree must be >= 1");
    if (n_threads < 0) throw ConfigError("precision: n_threads must be >= 0");
}

std::vector<double> plausible_measurements(const LactatePoint& point, int n, RngStream& stream,
                                           double sd) {
    if (!std::isfinite(sd) || sd < 0.0) {
        throw DomainError("plausible_measurements: sd must be finite and >= 0");
    }
    if (!(point.lactate_mmol_l > 0.0)) {
        throw DomainError("plausible_measurements: measured concentration must be > 0");
    }
    if (n < 0) throw PreconditionError("plausible_measurements: n must be >= 0");

    std::vector<double> values(static_cast<std::size_t>(n));
    for (double& v : values) {
        int tries = 0;
        do {
            v = point.lactate_mmol_l + sd * stream.normal();
            // Acceptance probability exceeds 1/2 (measured value is positive),
            // so this terminates fast; the cap guards against NaN poisoning.
            if (++tries > 100000) {
                throw DomainError("plausible_measurements: redraw loop failed to converge");
            }
        } while (!(v > 0.0));
    }
    return values;
}

namespace {

struct NominalAthlete {
    const AthleteTest* test = nullptr;
    double nominal_lt_kmh = 0.0;
    double nominal_pct = 0.0;
    SpeedReserve reserve;
};

struct UnitResult {
    std::vector<PrecisionErrorSample> errors;
    std::int64_t dropped = 0;
    std::int64_t ceiling_within = 0;
    std::int64_t ceiling_total = 0;
    std::int64_t scope_skipped = 0;
};

// Deviations from the slot's own mean, computed relative to the first value
// so a zero-noise run yields exact zeros.
void centered_errors(const std::vector<double>& values, std::vector<double>& out) {
    out.resize(values.size());
    const double base = values.front();
    double mean_offset = 0.0;
    for (double v : values) mean_offset += v - base;
    mean_offset /= static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = (values[i] - base) - mean_offset;
    }
}

double sample_sd(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

double sample_variance(const std::vector<double>& values) {
    const double sd = sample_sd(values);
    return sd * sd;
}

UnitResult run_unit(const std::vector<NominalAthlete>& members, int point_count, int resample_idx,
                    const PrecisionConfig& config) {
    UnitResult result;
    const std::size_t n_slots = members.size();
    const int n_samples = config.n_random_samples;

    RngStream selection = RngStream::derive(
        config.master_seed,
        {stream_tag::resample_selection, static_cast<std::uint64_t>(point_count),
         static_cast<std::uint64_t>(resample_idx)});

    std::vector<double> pct_values, kmh_values, pct_errors, kmh_errors;
    std::vector<LactatePoint> plausible(static_cast<std::size_t>(point_count));

    for (std::size_t slot = 0; slot < n_slots; ++slot) {
        const NominalAthlete& athlete = members[selection.below(n_slots)];
        const auto& points = athlete.test->points;

        RngStream noise = RngStream::derive(
            config.master_seed,
            {stream_tag::measurement_noise, static_cast<std::uint64_t>(point_count),
             static_cast<std::uint64_t>(resample_idx), static_cast<std::uint64_t>(slot)});

        // Draw per point, then pair draw j of every point into curve j.
        std::vector<std::vector<double>> draws(points.size());
        for (std::size_t p = 0; p < points.size(); ++p) {
            draws[p] = plausible_measurements(points[p], n_samples, noise, config.measurement_sd);
        }

        pct_values.clear();
        kmh_values.clear();
        for (int j = 0; j < n_samples; ++j) {
            for (std::size_t p = 0; p < points.size(); ++p) {
                plausible[p] = {points[p].speed_kmh, draws[p][static_cast<std::size_t>(j)]};
            }
            try {
                const FittedCurve curve = fit_lactate_curve(plausible, config.degree);
                const DmaxEstimate est = dmax_lt(curve, plausible.front(), plausible.back());
                kmh_values.push_back(est.lt_speed_kmh);
                pct_values.push_back(transform_lt(est.lt_speed_kmh, athlete.reserve).percent);
            } catch (const Error&) {
                ++result.dropped;
            }
        }
        if (pct_values.size() < 2) continue;

        centered_errors(pct_values, pct_errors);
        centered_errors(kmh_values, kmh_errors);
        for (std::size_t j = 0; j < pct_errors.size(); ++j) {
            result.errors.push_back({point_count, pct_errors[j], kmh_errors[j]});
        }
        for (double lt_kmh : kmh_values) {
            try {
                const ResidualCheck check = within_acceptable(lt_kmh, athlete.nominal_lt_kmh);
                ++result.ceiling_total;
                if (check.within) ++result.ceiling_within;
            } catch (const OutOfScopeError&) {
                ++result.scope_skipped;
            }
        }
    }
    return result;
}

}  // namespace

PrecisionReport dmax_precision(std::span<const AthleteTest> population,
                               const PrecisionConfig& config) {
    config.validate();
    PrecisionReport report;

    // Nominal pass: reference curve, Dmax and transform per usable athlete.
    std::vector<NominalAthlete> prepared;
    prepared.reserve(population.size());
    for (const AthleteTest& test : population) {
        if (test.excluded) {
            report.warnings.push_back("athlete " + test.athlete_id + ": excluded, skipped");
            continue;
        }
        try {
            const FittedCurve curve = fit_lactate_curve(test.points, config.degree);
            const DmaxEstimate est = dmax_lt(curve, test.points.front(), test.points.back());
            NominalAthlete a;
            a.test = &test;
            a.reserve = speed_reserve(test.pts_kmh, test.protocol.initial_speed_kmh);
            a.nominal_lt_kmh = est.lt_speed_kmh;
            a.nominal_pct = transform_lt(est.lt_speed_kmh, a.reserve).percent;
            prepared.push_back(a);
        } catch (const Error& e) {
            report.warnings.push_back("athlete " + test.athlete_id +
                                      ": nominal Dmax failed, skipped (" + e.what() + ")");
        }
    }

    std::map<int, std::vector<NominalAthlete>> groups;
    for (const NominalAthlete& a : prepared) {
        groups[static_cast<int>(a.test->points.size())].push_back(a);
    }
    for (auto it = groups.begin(); it != groups.end();) {
        if (it->second.size() < 2) {
            std::ostringstream msg;
            msg << "group with " << it->first << " lactate points has " << it->second.size()
                << " athlete(s); need >= 2, skipped";
            report.warnings.push_back(msg.str());
            it = groups.erase(it);
        } else {
            ++it;
        }
    }

    struct Unit {
        int point_count;
        int resample;
    };
    std::vector<Unit> units;
    for (const auto& [count, members] : groups) {
        (void)members;
        for (int r = 0; r < config.n_bootstrap_resamples; ++r) units.push_back({count, r});
    }

    std::vector<UnitResult> results(units.size());
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const std::size_t n_threads =
        std::max<std::size_t>(1, std::min<std::size_t>(config.n_threads == 0 ? hw : config.n_threads,
                                                       units.size()));
    if (n_threads <= 1) {
        for (std::size_t u = 0; u < units.size(); ++u) {
            results[u] = run_unit(groups.at(units[u].point_count), units[u].point_count,
                                  units[u].resample, config);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) {
            workers.emplace_back([&]() {
                for (;;) {
                    const std::size_t u = next.fetch_add(1);
                    if (u >= units.size()) return;
                    try {
                        results[u] = run_unit(groups.at(units[u].point_count),
                                              units[u].point_count, units[u].resample, config);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& w : workers) w.join();
        if (failure) std::rethrow_exception(failure);
    }

    // Canonical-order reduction: results are indexed by unit, so the report
    // is independent of how the units were scheduled.
    std::map<int, std::vector<PrecisionErrorSample>> group_errors;
    std::map<int, std::int64_t> group_dropped;
    for (std::size_t u = 0; u < units.size(); ++u) {
        const UnitResult& r = results[u];
        auto& bucket = group_errors[units[u].point_count];
        bucket.insert(bucket.end(), r.errors.begin(), r.errors.end());
        group_dropped[units[u].point_count] += r.dropped;
        report.n_ceiling_within += r.ceiling_within;
        report.n_ceiling_total += r.ceiling_total;
        report.n_scope_skipped += r.scope_skipped;
    }

    for (const auto& [count, errors] : group_errors) {
        std::vector<double> pct, kmh;
        pct.reserve(errors.size());
        kmh.reserve(errors.size());
        for (const auto& e : errors) {
            pct.push_back(e.error_pct_ersr);
            kmh.push_back(e.error_kmh);
            report.error_samples.push_back(e);
        }

        std::vector<double> nominal;
        for (const NominalAthlete& a : groups.at(count)) nominal.push_back(a.nominal_pct);
        const double nominal_var = sample_variance(nominal);
        const double error_var = sample_variance(pct);

        GroupPrecision g;
        g.point_count = count;
        g.n_athletes = static_cast<int>(groups.at(count).size());
        g.n_samples = static_cast<std::int64_t>(errors.size());
        g.n_dropped = group_dropped[count];
        g.sem_pct_ersr = sample_sd(pct);
        g.sem_kmh = sample_sd(kmh);
        if (nominal_var > 0.0) {
            g.r_squared = std::clamp(error_var / nominal_var, 0.0, 1.0);
        } else {
            g.r_squared = error_var > 0.0 ? 1.0 : 0.0;
        }
        report.per_point_count.push_back(g);
        report.n_samples_total += g.n_samples;
        report.n_dropped_total += g.n_dropped;
    }

    const double attempted =
        static_cast<double>(report.n_samples_total + report.n_dropped_total);
    report.drop_rate = attempted > 0.0 ? static_cast<double>(report.n_dropped_total) / attempted
                                       : 0.0;
    if (report.n_ceiling_total > 0) {
        report.ceiling_accuracy_pct = 100.0 * static_cast<double>(report.n_ceiling_within) /
                                      static_cast<double>(report.n_ceiling_total);
    } else {
        report.ceiling_accuracy_pct = 0.0;
        report.warnings.push_back("no plausible samples were evaluable for ceiling accuracy");
    }
    return report;
}

double ceiling_accuracy(std::span<const AthleteTest> population, const PrecisionConfig& config) {
    return dmax_precision(population, config).ceiling_accuracy_pct;
}

}  // namespace lactate
