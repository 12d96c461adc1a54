#include <doctest.h>

#include <cmath>
#include <vector>

#include "lactate/curve_fit.hpp"
#include "lactate/errors.hpp"
#include "lactate/rng.hpp"

using namespace lactate;

namespace {

// Independent least-squares oracle: raw-power normal equations solved with
// plain Gauss-Jordan, no centering, no shared code with the implementation.
std::vector<double> normal_equations_fit(const std::vector<LactatePoint>& pts, int degree) {
    const int m = degree + 1;
    std::vector<std::vector<double>> aug(m, std::vector<double>(m + 1, 0.0));
    for (const auto& p : pts) {
        std::vector<double> pow(m);
        pow[0] = 1.0;
        for (int k = 1; k < m; ++k) pow[k] = pow[k - 1] * p.speed_kmh;
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) aug[r][c] += pow[r] * pow[c];
            aug[r][m] += pow[r] * p.lactate_mmol_l;
        }
    }
    for (int col = 0; col < m; ++col) {
        int pivot = col;
        for (int r = col + 1; r < m; ++r) {
            if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
        }
        std::swap(aug[col], aug[pivot]);
        for (int r = 0; r < m; ++r) {
            if (r == col) continue;
            const double f = aug[r][col] / aug[col][col];
            for (int c = col; c <= m; ++c) aug[r][c] -= f * aug[col][c];
        }
    }
    std::vector<double> coef(m);
    for (int r = 0; r < m; ++r) coef[r] = aug[r][m] / aug[r][r];
    return coef;
}

const std::vector<LactatePoint> kFixture = {{9.0, 1.3},  {10.5, 1.5}, {12.0, 1.9}, {13.5, 2.6},
                                            {14.5, 3.2}, {15.5, 4.4}, {16.5, 6.1}, {17.5, 8.4}};

}  // namespace

TEST_SUITE("curve_fit") {

TEST_CASE("exact cubic through four points is interpolated") {
    std::vector<LactatePoint> pts;
    for (double s : {9.0, 11.0, 14.0, 17.0}) pts.push_back({s, 0.01 * s * s * s});
    const FittedCurve curve = fit_lactate_curve(pts, 3);
    REQUIRE(curve.poly.coef.size() == 4);
    CHECK(std::abs(curve.poly.coef[0]) < 1e-9);
    CHECK(std::abs(curve.poly.coef[1]) < 1e-9);
    CHECK(std::abs(curve.poly.coef[2]) < 1e-9);
    CHECK(curve.poly.coef[3] == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(curve.rss < 1e-12);
}

TEST_CASE("degree-3 rss never exceeds degree-2 rss on the same data") {
    const FittedCurve cubic = fit_lactate_curve(kFixture, 3);
    const FittedCurve quadratic = fit_lactate_curve(kFixture, 2);
    CHECK(cubic.rss <= quadratic.rss + 1e-12);
    // and the same nesting holds on noisy random data
    RngStream stream = RngStream::derive(77, {3});
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<LactatePoint> pts;
        for (int i = 0; i < 8; ++i) {
            pts.push_back({9.0 + 1.2 * i, 1.5 + 0.08 * i * i + 0.3 * stream.normal()});
        }
        if (pts.back().lactate_mmol_l <= 0) continue;
        CHECK(fit_lactate_curve(pts, 3).rss <= fit_lactate_curve(pts, 2).rss + 1e-9);
    }
}

TEST_CASE("fixture coefficients match the independent normal-equations oracle") {
    const FittedCurve curve = fit_lactate_curve(kFixture, 3);
    const std::vector<double> oracle = normal_equations_fit(kFixture, 3);
    REQUIRE(curve.poly.coef.size() == oracle.size());
    for (std::size_t k = 0; k < oracle.size(); ++k) {
        CHECK(std::abs(curve.poly.coef[k] - oracle[k]) <= 1e-8 * std::abs(oracle[k]));
    }
    // frozen values computed with the oracle ahead of time
    CHECK(curve.poly.coef[0] == doctest::Approx(-20.3364092677299).epsilon(1e-8));
    CHECK(curve.poly.coef[1] == doctest::Approx(5.89374059995594).epsilon(1e-8));
    CHECK(curve.poly.coef[2] == doctest::Approx(-0.541768944694655).epsilon(1e-8));
    CHECK(curve.poly.coef[3] == doctest::Approx(0.017072083427328).epsilon(1e-8));
    CHECK(curve.rss == doctest::Approx(0.0242072478269719).epsilon(1e-8));
}

TEST_CASE("random fixtures match the oracle across degrees") {
    RngStream stream = RngStream::derive(99, {11});
    for (int rep = 0; rep < 25; ++rep) {
        std::vector<LactatePoint> pts;
        double s = 8.0 + stream.uniform01();
        for (int i = 0; i < 9; ++i) {
            pts.push_back({s, 1.0 + 0.02 * (s - 8.0) * (s - 8.0) * (s - 8.0) +
                                  0.2 * stream.uniform01()});
            s += 0.8 + stream.uniform01();
        }
        for (int degree : {2, 3, 4}) {
            const FittedCurve curve = fit_lactate_curve(pts, degree);
            const std::vector<double> oracle = normal_equations_fit(pts, degree);
            for (std::size_t k = 0; k < oracle.size(); ++k) {
                const double scale = std::max(std::abs(oracle[k]), 1e-6);
                CHECK(std::abs(curve.poly.coef[k] - oracle[k]) <= 1e-7 * scale);
            }
        }
    }
}

TEST_CASE("insufficient points is a precondition error") {
    std::vector<LactatePoint> pts = {{9.0, 1.0}, {10.0, 1.2}, {11.0, 1.5}};
    CHECK_THROWS_AS(fit_lactate_curve(pts, 3), PreconditionError);
}

TEST_CASE("unsorted speeds are a precondition error") {
    std::vector<LactatePoint> pts = {{9.0, 1.0}, {11.0, 1.2}, {10.0, 1.5}, {12.0, 2.0}};
    CHECK_THROWS_AS(fit_lactate_curve(pts, 3), PreconditionError);
}

TEST_CASE("near-duplicate speeds are rejected as ill-conditioned") {
    std::vector<LactatePoint> pts = {{9.0, 1.0},
                                     {9.0 + 1e-13, 1.2},
                                     {9.0 + 2e-13, 1.5},
                                     {9.0 + 3e-13, 2.0}};
    CHECK_THROWS_AS(fit_lactate_curve(pts, 3), FitError);
}

TEST_CASE("polynomial evaluation and derivative") {
    Polynomial p{{1.0, -2.0, 3.0}};  // 1 - 2s + 3s^2
    CHECK(p(2.0) == doctest::Approx(9.0));
    const Polynomial d = p.derivative();
    REQUIRE(d.coef.size() == 2);
    CHECK(d.coef[0] == -2.0);
    CHECK(d.coef[1] == 6.0);
    CHECK(d(2.0) == doctest::Approx(10.0));
}

}  // TEST_SUITE
