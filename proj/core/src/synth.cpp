#include "lactate/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lactate/curve_fit.hpp"
#include "lactate/dmax.hpp"
#include "lactate/errors.hpp"
#include "lactate/rng.hpp"

namespace lactate {

namespace {

// Targets the noise-free cubic-fit pipeline can reach with this curve family.
constexpr double kTargetLo = 52.5;  // % ERSR
constexpr double kTargetHi = 90.0;
constexpr int kFitDegree = 3;
constexpr double kTargetToleranceKmh = 0.05;

struct CurveShape {
    double baseline = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double v0 = 0.0;

    double operator()(double s) const { return baseline + alpha * std::exp(beta * (s - v0)); }
};

std::vector<LactatePoint> sample_curve(const CurveShape& shape, const std::vector<double>& speeds) {
    std::vector<LactatePoint> points;
    points.reserve(speeds.size());
    for (double s : speeds) points.push_back({s, shape(s)});
    return points;
}

// Transformed LT the analysis pipeline recovers from noise-free samples of
// the shape: cubic least squares, then Dmax against the endpoint chord.
double pipeline_percent(const CurveShape& shape, const std::vector<double>& speeds, double ersr) {
    const std::vector<LactatePoint> points = sample_curve(shape, speeds);
    const FittedCurve curve = fit_lactate_curve(points, kFitDegree);
    const DmaxEstimate est = dmax_lt(curve, points.front(), points.back());
    return (est.lt_speed_kmh - shape.v0) / ersr * 100.0;
}

// Solve for beta so the pipeline recovers target_pct. alpha is re-derived at
// every step to pin the peak lactate, which leaves the argmax unaffected.
CurveShape calibrate_shape(const std::vector<double>& speeds, double v0, double ersr,
                           double baseline, double peak, double target_pct) {
    const double span = speeds.back() - v0;
    const auto shape_for = [&](double beta) {
        CurveShape s;
        s.baseline = baseline;
        s.beta = beta;
        s.alpha = (peak - baseline) * std::exp(-beta * span);
        s.v0 = v0;
        return s;
    };
    const auto percent_at = [&](double beta) {
        try {
            return pipeline_percent(shape_for(beta), speeds, ersr);
        } catch (const Error&) {
            return 50.0;  // near-linear limit; below any reachable target
        }
    };

    double lo = 1e-3;
    if (percent_at(lo) >= target_pct) {
        throw DomainError("synth: target LT percent below the curve family's range");
    }
    double hi = 1.0;
    while (percent_at(hi) < target_pct) {
        hi *= 2.0;
        if (hi > 1e4) {
            throw DomainError("synth: target LT percent above the curve family's range");
        }
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (percent_at(mid) < target_pct ? lo : hi) = mid;
    }
    return shape_for(0.5 * (lo + hi));
}

std::string make_id(int index, int total) {
    int width = 1;
    for (int v = total; v >= 10; v /= 10) ++width;
    width = std::clamp(width, 3, 10);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ath-%0*d", width, index + 1);
    return buf;
}

}  // namespace

void SynthConfig::validate() const {
    protocol.validate();
    if (n_athletes < 1) throw ConfigError("synth: n_athletes must be >= 1");
    if (points_per_athlete < 4) {
        throw ConfigError("synth: points_per_athlete must be >= 4 (degree-3 fit)");
    }
    if (!(lt_percent_sd >= 0.0) || !(curve_noise_sd >= 0.0)) {
        throw ConfigError("synth: standard deviations must be >= 0");
    }
    if (!(baseline_lactate_mmol_l > 0.0)) {
        throw ConfigError("synth: baseline lactate must be > 0");
    }
    if (!(pts_range_kmh.first <= pts_range_kmh.second)) {
        throw ConfigError("synth: pts_range min must not exceed max");
    }
    if (!(pts_range_kmh.first > protocol.initial_speed_kmh)) {
        throw ConfigError("synth: pts_range must lie above the initial speed");
    }
}

std::vector<AthleteTest> generate_population(const SynthConfig& config) {
    config.validate();
    const double v0 = config.protocol.initial_speed_kmh;
    const int P = config.points_per_athlete;

    // Stage counts the drawn PTS may take: inside pts_range and long enough
    // to carry P lactate points.
    const std::vector<double> ladder = config.protocol.stage_speeds_up_to(config.pts_range_kmh.second);
    std::vector<int> eligible_counts;
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        const double speed = ladder[k];
        if (static_cast<int>(k) + 1 >= P && speed >= config.pts_range_kmh.first - 1e-9 &&
            speed <= config.pts_range_kmh.second + 1e-9) {
            eligible_counts.push_back(static_cast<int>(k) + 1);
        }
    }
    if (eligible_counts.empty()) {
        throw ConfigError(
            "synth: pts_range holds no protocol stage that fits points_per_athlete samples");
    }

    std::vector<AthleteTest> population;
    population.reserve(config.n_athletes);
    for (int i = 0; i < config.n_athletes; ++i) {
        RngStream stream = RngStream::derive(config.seed, {stream_tag::synth_athlete,
                                                           static_cast<std::uint64_t>(i)});

        const int stages = eligible_counts[stream.below(eligible_counts.size())];
        const std::vector<double> all_speeds = config.protocol.stage_speeds(stages);
        const double pts = all_speeds.back();
        const double ersr = pts - v0;

        std::vector<double> speeds(P);
        for (int k = 0; k < P; ++k) {
            const std::size_t idx =
                (static_cast<std::size_t>(k) * (stages - 1) + (P - 1) / 2) / (P - 1);
            speeds[k] = all_speeds[idx];
        }

        double target = config.lt_percent_mean;
        int draws = 0;
        while (true) {
            target = stream.normal(config.lt_percent_mean, config.lt_percent_sd);
            if (target >= kTargetLo && target <= kTargetHi) break;
            if (++draws >= 100) {
                std::ostringstream msg;
                msg << "synth: could not draw a target LT inside [" << kTargetLo << ", "
                    << kTargetHi << "]% of ERSR from mean " << config.lt_percent_mean << ", sd "
                    << config.lt_percent_sd;
                throw ConfigError(msg.str());
            }
        }

        CurveShape shape;
        bool ok = false;
        for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
            const double peak = stream.uniform(6.0, 12.0);
            try {
                shape = calibrate_shape(speeds, v0, ersr, config.baseline_lactate_mmol_l, peak,
                                        target);
            } catch (const DomainError&) {
                continue;  // redraw the peak
            }
            // Cross-check the construction against the grid reference scan.
            const std::vector<LactatePoint> clean = sample_curve(shape, speeds);
            const FittedCurve fitted = fit_lactate_curve(clean, kFitDegree);
            const DmaxEstimate grid = dmax_lt_grid([&](double s) { return fitted.poly(s); },
                                                   clean.front(), clean.back(), 20001);
            const double target_speed = v0 + target / 100.0 * ersr;
            ok = std::abs(grid.lt_speed_kmh - target_speed) <= kTargetToleranceKmh;
        }
        if (!ok) {
            throw ConfigError("synth: failed to construct a curve hitting the target LT");
        }

        AthleteTest test;
        test.athlete_id = make_id(i, config.n_athletes);
        test.protocol = config.protocol;
        test.pts_kmh = pts;
        test.points.reserve(P);
        for (double s : speeds) {
            double lactate = shape(s);
            if (config.curve_noise_sd > 0.0) {
                int tries = 0;
                double noisy;
                do {
                    noisy = lactate + stream.normal(0.0, config.curve_noise_sd);
                } while (noisy <= 0.0 && ++tries < 100000);
                lactate = noisy;
            }
            test.points.push_back({s, lactate});
        }
        population.push_back(std::move(test));
    }
    return population;
}

AthleteTest subsample_points(const AthleteTest& test, int target_points) {
    const int n = static_cast<int>(test.points.size());
    if (target_points < 4) {
        throw PreconditionError("subsample_points: target must be >= 4");
    }
    if (target_points > n) {
        throw PreconditionError("subsample_points: target exceeds available points");
    }
    AthleteTest out = test;
    out.points.clear();
    out.points.reserve(target_points);
    for (int k = 0; k < target_points; ++k) {
        const std::size_t idx = (static_cast<std::size_t>(k) * (n - 1) + (target_points - 1) / 2) /
                                (target_points - 1);
        out.points.push_back(test.points[idx]);
    }
    return out;
}

}  // namespace lactate
