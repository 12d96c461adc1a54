#include "lactate/dmax.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lactate/errors.hpp"
#include "lactate/heuristic.hpp"

namespace lactate {

namespace {

constexpr double kGapFloor = 1e-9;  // mmol/L; below this the "maximum" is noise

// Real roots of an ascending-coefficient polynomial, analytic up to degree 2.
std::vector<double> roots_analytic(const std::vector<double>& c) {
    std::vector<double> out;
    if (c.size() == 2) {
        if (c[1] != 0.0) out.push_back(-c[0] / c[1]);
        return out;
    }
    const double a = c[2], b = c[1], k = c[0];
    if (a == 0.0) return roots_analytic({k, b});
    const double disc = b * b - 4.0 * a * k;
    if (disc < 0.0) return out;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b));
    if (q != 0.0) {
        out.push_back(q / a);
        out.push_back(k / q);
    } else {
        out.push_back(0.0);  // b == 0 and disc == 0
    }
    return out;
}

// Root isolation by sign scan + bisection for derivative degrees above 2.
std::vector<double> roots_bracketed(const Polynomial& p, double lo, double hi) {
    std::vector<double> out;
    const int n_cells = 64 * std::max(p.degree(), 1);
    double prev_s = lo;
    double prev_v = p(lo);
    for (int i = 1; i <= n_cells; ++i) {
        const double s = lo + (hi - lo) * static_cast<double>(i) / n_cells;
        const double v = p(s);
        if (prev_v == 0.0) {
            out.push_back(prev_s);
        } else if ((prev_v < 0.0) != (v < 0.0)) {
            double a = prev_s, b = s, fa = prev_v;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = p(mid);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            out.push_back(0.5 * (a + b));
        }
        prev_s = s;
        prev_v = v;
    }
    if (prev_v == 0.0) out.push_back(prev_s);
    return out;
}

}  // namespace

DmaxEstimate dmax_lt(const FittedCurve& curve, const LactatePoint& first_point,
                     const LactatePoint& last_point) {
    const double s1 = first_point.speed_kmh;
    const double sN = last_point.speed_kmh;
    if (!(sN - s1 > 1e-12)) {
        throw DomainError("dmax_lt: zero-length chord");
    }
    const double slope = (last_point.lactate_mmol_l - first_point.lactate_mmol_l) / (sN - s1);
    const auto gap = [&](double s) {
        return first_point.lactate_mmol_l + slope * (s - s1) - curve.poly(s);
    };

    // Stationary points of the gap: f'(s) = chord slope.
    Polynomial shifted = curve.poly.derivative();
    shifted.coef[0] -= slope;
    std::vector<double> stationary = shifted.degree() <= 2 ? roots_analytic(shifted.coef)
                                                           : roots_bracketed(shifted, s1, sN);

    std::set<double> candidates = {s1, sN};
    for (double r : stationary) {
        if (std::isfinite(r) && r >= s1 && r <= sN) candidates.insert(r);
    }

    double best_speed = s1;
    double best_gap = -1.0;
    for (double s : candidates) {  // ascending: strict improvement ties to lowest speed
        const double g = gap(s);
        if (g > best_gap) {
            best_gap = g;
            best_speed = s;
        }
    }
    if (!(best_gap > kGapFloor)) {
        throw NoDmaxError("dmax_lt: curve never lies below the chord, no Dmax point");
    }

    DmaxEstimate est;
    est.lt_speed_kmh = best_speed;
    est.lt_lactate_mmol_l = curve.poly(best_speed);
    est.chord_first = first_point;
    est.chord_last = last_point;
    est.max_distance = best_gap / std::sqrt(1.0 + slope * slope);
    return est;
}

DmaxEstimate dmax_lt_grid(const std::function<double(double)>& curve,
                          const LactatePoint& first_point, const LactatePoint& last_point,
                          int grid_points) {
    const double s1 = first_point.speed_kmh;
    const double sN = last_point.speed_kmh;
    if (!(sN - s1 > 1e-12)) {
        throw DomainError("dmax_lt_grid: zero-length chord");
    }
    if (grid_points < 2) {
        throw PreconditionError("dmax_lt_grid: need at least 2 grid points");
    }
    const double slope = (last_point.lactate_mmol_l - first_point.lactate_mmol_l) / (sN - s1);

    double best_speed = s1;
    double best_gap = -1.0;
    for (int i = 0; i < grid_points; ++i) {
        const double s = s1 + (sN - s1) * static_cast<double>(i) / (grid_points - 1);
        const double g = first_point.lactate_mmol_l + slope * (s - s1) - curve(s);
        if (g > best_gap) {
            best_gap = g;
            best_speed = s;
        }
    }
    if (!(best_gap > kGapFloor)) {
        throw NoDmaxError("dmax_lt_grid: curve never lies below the chord");
    }

    DmaxEstimate est;
    est.lt_speed_kmh = best_speed;
    est.lt_lactate_mmol_l = curve(best_speed);
    est.chord_first = first_point;
    est.chord_last = last_point;
    est.max_distance = best_gap / std::sqrt(1.0 + slope * slope);
    return est;
}

std::vector<OutlierFlag> flag_outliers(std::span<const AthleteTest> tests,
                                       std::span<const std::string> exclusion_ids,
                                       const OutlierScreenConfig& config) {
    std::vector<OutlierFlag> flags;
    for (const AthleteTest& test : tests) {
        const bool manual = std::find(exclusion_ids.begin(), exclusion_ids.end(),
                                      test.athlete_id) != exclusion_ids.end();
        if (manual) {
            flags.push_back({test.athlete_id, "manual", true});
        }

        const auto& pts = test.points;
        if (pts.size() >= 2 &&
            !(pts[pts.size() - 1].lactate_mmol_l > pts[pts.size() - 2].lactate_mmol_l)) {
            flags.push_back(
                {test.athlete_id, "non-increasing lactate over the final two stages", false});
        }

        if (pts.size() < static_cast<std::size_t>(config.degree) + 1) continue;
        try {
            const FittedCurve curve = fit_lactate_curve(pts, config.degree);
            if (curve.rss > config.rss_threshold) {
                std::ostringstream reason;
                reason << "fit RSS " << curve.rss << " above threshold " << config.rss_threshold;
                flags.push_back({test.athlete_id, reason.str(), false});
            }
            const DmaxEstimate est = dmax_lt(curve, pts.front(), pts.back());
            const SpeedReserve reserve =
                speed_reserve(test.pts_kmh, test.protocol.initial_speed_kmh);
            const TransformedLT lt = transform_lt(est.lt_speed_kmh, reserve);
            if (lt.percent < 0.0 || lt.percent > 100.0) {
                std::ostringstream reason;
                reason << "LT outside reserve: transformed LT " << lt.percent << "% of ERSR";
                flags.push_back({test.athlete_id, reason.str(), false});
            }
        } catch (const Error& e) {
            flags.push_back({test.athlete_id, std::string("Dmax failed: ") + e.what(), false});
        }
    }
    return flags;
}

}  // namespace lactate
