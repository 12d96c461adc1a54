#include "lactate/curve_fit.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>

#include "lactate/errors.hpp"

namespace lactate {

double Polynomial::operator()(double s) const {
    double acc = 0.0;
    for (std::size_t i = coef.size(); i-- > 0;) {
        acc = acc * s + coef[i];
    }
    return acc;
}

Polynomial Polynomial::derivative() const {
    Polynomial d;
    if (coef.size() <= 1) {
        d.coef = {0.0};
        return d;
    }
    d.coef.resize(coef.size() - 1);
    for (std::size_t k = 1; k < coef.size(); ++k) {
        d.coef[k - 1] = static_cast<double>(k) * coef[k];
    }
    return d;
}

namespace {

// Solve the symmetric positive definite system A x = b (normal equations)
// by Gaussian elimination with partial pivoting; n is tiny (degree+1).
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[i][i]));

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        }
        if (std::abs(a[pivot][col]) < 1e-13 * std::max(scale, 1.0)) {
            throw FitError("fit_lactate_curve: normal equations are rank deficient");
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = a[row][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t k = i + 1; k < n; ++k) acc -= a[i][k] * x[k];
        x[i] = acc / a[i][i];
    }
    return x;
}

// Expand q(u) with u = (s - c) / h into ascending coefficients in s.
std::vector<double> uncenter(const std::vector<double>& q, double c, double h) {
    const std::size_t n = q.size();
    std::vector<double> out(n, 0.0);
    std::vector<double> term = {1.0};  // ((s - c)/h)^k, ascending in s
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < term.size(); ++i) out[i] += q[k] * term[i];
        if (k + 1 < n) {
            // multiply term by (s - c)/h
            std::vector<double> next(term.size() + 1, 0.0);
            for (std::size_t i = 0; i < term.size(); ++i) {
                next[i] += term[i] * (-c / h);
                next[i + 1] += term[i] / h;
            }
            term = std::move(next);
        }
    }
    return out;
}

}  // namespace

FittedCurve fit_lactate_curve(std::span<const LactatePoint> points, int degree) {
    if (degree < 1) {
        throw PreconditionError("fit_lactate_curve: degree must be >= 1");
    }
    const std::size_t n = points.size();
    const std::size_t m = static_cast<std::size_t>(degree) + 1;
    if (n < m) {
        std::ostringstream msg;
        msg << "fit_lactate_curve: need at least " << m << " points for degree " << degree
            << ", got " << n;
        throw PreconditionError(msg.str());
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(points[i].speed_kmh > points[i - 1].speed_kmh)) {
            throw PreconditionError("fit_lactate_curve: speeds must be strictly increasing");
        }
    }

    double mean = 0.0;
    for (const auto& p : points) mean += p.speed_kmh;
    mean /= static_cast<double>(n);
    const double half_range = 0.5 * (points[n - 1].speed_kmh - points[0].speed_kmh);
    if (!(half_range > 1e-8 * (1.0 + std::abs(mean)))) {
        throw FitError("fit_lactate_curve: speed range too narrow to condition the fit");
    }

    // Normal equations in the scaled basis u^k, u in roughly [-1, 1].
    std::vector<std::vector<double>> ata(m, std::vector<double>(m, 0.0));
    std::vector<double> aty(m, 0.0);
    std::vector<double> powers(m);
    for (const auto& p : points) {
        if (!std::isfinite(p.lactate_mmol_l)) {
            throw PreconditionError("fit_lactate_curve: non-finite lactate value");
        }
        const double u = (p.speed_kmh - mean) / half_range;
        double uk = 1.0;
        for (std::size_t k = 0; k < m; ++k) {
            powers[k] = uk;
            uk *= u;
        }
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = r; c < m; ++c) ata[r][c] += powers[r] * powers[c];
            aty[r] += powers[r] * p.lactate_mmol_l;
        }
    }
    for (std::size_t r = 1; r < m; ++r) {
        for (std::size_t c = 0; c < r; ++c) ata[r][c] = ata[c][r];
    }

    const std::vector<double> scaled = solve_dense(std::move(ata), std::move(aty));

    FittedCurve curve;
    curve.poly.coef = uncenter(scaled, mean, half_range);
    curve.degree = degree;
    curve.speed_min_kmh = points[0].speed_kmh;
    curve.speed_max_kmh = points[n - 1].speed_kmh;
    curve.rss = 0.0;
    for (const auto& p : points) {
        const double value = curve.poly(p.speed_kmh);
        if (!std::isfinite(value)) {
            throw FitError("fit_lactate_curve: fitted curve is non-finite at an input speed");
        }
        const double r = value - p.lactate_mmol_l;
        curve.rss += r * r;
    }
    return curve;
}

}  // namespace lactate
