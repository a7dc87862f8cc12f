#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rimming/linalg.hpp"

using namespace rimming;
using namespace rimming::linalg;

namespace {

std::vector<double> matvec(const std::vector<double>& a, const std::vector<double>& x, int n) {
    std::vector<double> y(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) y[i] += a[static_cast<std::size_t>(i * n + j)] * x[j];
    }
    return y;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

std::vector<double> random_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = nd(rng);
    return v;
}

/// Random periodic band matrix with a weak diagonal, so pivoting is exercised.
PeriodicBandMatrix random_band(int n, int w, std::mt19937_64& rng, double diag_shift = 0.0) {
    std::normal_distribution<double> nd;
    PeriodicBandMatrix a(n, w);
    for (int i = 0; i < n; ++i) {
        for (int o = -w; o <= w; ++o) a(i, o) = nd(rng);
        a(i, 0) = 0.1 * nd(rng) + diag_shift;
    }
    return a;
}

}  // namespace

TEST(DenseLU, NeedsPivoting) {
    // Zero leading entry: fails without row exchanges.
    const std::vector<double> a = {0, 2, 1, 1, 1, 1, 3, 0, 1};
    DenseLU lu;
    ASSERT_TRUE(lu.factor(a, 3));
    const std::vector<double> x = {1.0, -2.0, 0.5};
    std::vector<double> b = matvec(a, x, 3);
    lu.solve_in_place(b);
    EXPECT_LT(sup_diff(b, x), 1e-14);
}

TEST(DenseLU, RandomNonDominant) {
    std::mt19937_64 rng(5);
    for (int n : {5, 17, 60}) {
        std::vector<double> a = random_vector(n * n, rng);
        const std::vector<double> x = random_vector(n, rng);
        std::vector<double> b = matvec(a, x, n);
        DenseLU lu;
        ASSERT_TRUE(lu.factor(a, n));
        lu.solve_in_place(b);
        EXPECT_LT(sup_diff(b, x), 1e-9) << "n=" << n;
    }
}

TEST(DenseLU, DetectsSingular) {
    const std::vector<double> a = {1, 2, 2, 4};
    DenseLU lu;
    EXPECT_FALSE(lu.factor(a, 2));
}

TEST(BandedLU, MatchesDenseOnRandomBand) {
    std::mt19937_64 rng(9);
    const int n = 40, w = 2;
    std::vector<double> dense(static_cast<std::size_t>(n * n), 0.0);
    std::vector<double> rows(static_cast<std::size_t>(n * (3 * w + 1)), 0.0);
    std::normal_distribution<double> nd;
    for (int i = 0; i < n; ++i) {
        for (int j = std::max(0, i - w); j <= std::min(n - 1, i + w); ++j) {
            const double v = i == j ? 0.05 * nd(rng) : nd(rng);
            dense[static_cast<std::size_t>(i * n + j)] = v;
            rows[static_cast<std::size_t>(i * (3 * w + 1) + (j - i + w))] = v;
        }
    }
    const std::vector<double> x = random_vector(n, rng);
    std::vector<double> b = matvec(dense, x, n);
    BandedLU lu;
    ASSERT_TRUE(lu.factor(n, w, rows));
    lu.solve_in_place(b);
    EXPECT_LT(sup_diff(b, x), 1e-9);
}

TEST(PeriodicBandMatrix, DenseAndMultiplyAgree) {
    std::mt19937_64 rng(2);
    const PeriodicBandMatrix a = random_band(12, 2, rng);
    const std::vector<double> x = random_vector(12, rng);
    std::vector<double> y(12);
    a.multiply(x, y);
    EXPECT_LT(sup_diff(y, matvec(a.dense(), x, 12)), 1e-13);
    // Corner entries wrap around.
    EXPECT_EQ(a.dense()[static_cast<std::size_t>(0 * 12 + 10)], a(0, -2));
    EXPECT_EQ(a.dense()[static_cast<std::size_t>(11 * 12 + 1)], a(11, 2));
}

TEST(PeriodicBandSolver, RandomPeriodicPentadiagonal) {
    std::mt19937_64 rng(17);
    for (int n : {8, 9, 33, 256}) {
        for (int trial = 0; trial < 5; ++trial) {
            const PeriodicBandMatrix a = random_band(n, 2, rng);
            const std::vector<double> x = random_vector(n, rng);
            std::vector<double> b(static_cast<std::size_t>(n));
            a.multiply(x, b);
            const PeriodicBandSolver s(a);
            const std::vector<double> got = s.solve(b);
            std::vector<double> r(static_cast<std::size_t>(n));
            a.multiply(got, r);
            EXPECT_LT(sup_diff(r, b), 1e-9 * (1.0 + sup_diff(b, std::vector<double>(b.size(), 0.0))))
                << "n=" << n << " trial=" << trial;
        }
    }
}

TEST(PeriodicBandSolver, ThinFilmLikeOperator) {
    // I + c * (periodic fourth difference): the structure of a Newton matrix.
    const int n = 128;
    PeriodicBandMatrix a(n, 2);
    const double c = 1e6;
    for (int i = 0; i < n; ++i) {
        a(i, -2) = c;
        a(i, -1) = -4 * c;
        a(i, 0) = 1 + 6 * c;
        a(i, 1) = -4 * c;
        a(i, 2) = c;
    }
    std::mt19937_64 rng(1);
    const std::vector<double> x = random_vector(n, rng);
    std::vector<double> b(static_cast<std::size_t>(n));
    a.multiply(x, b);
    const std::vector<double> got = PeriodicBandSolver(a).solve(b);
    EXPECT_LT(sup_diff(got, x), 1e-6);
}

TEST(PeriodicBandSolver, SingularThrows) {
    std::mt19937_64 rng(4);
    PeriodicBandMatrix a = random_band(16, 2, rng, 3.0);
    for (int o = -2; o <= 2; ++o) a(5, o) = 0.0;
    EXPECT_THROW(PeriodicBandSolver{a}, NumericalError);
}

TEST(SolveBordered, MatchesDenseAugmentedSystem) {
    std::mt19937_64 rng(23);
    const int n = 20;
    const PeriodicBandMatrix a = random_band(n, 2, rng, 3.0);
    const std::vector<double> b = random_vector(n, rng), c = random_vector(n, rng), r = random_vector(n, rng);
    const double d = 0.7, rho = -1.2;
    const auto [x, s] = solve_bordered(a, b, c, d, r, rho);
    std::vector<double> ax(static_cast<std::size_t>(n));
    a.multiply(x, ax);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(ax[i] + b[i] * s, r[i], 1e-10);
    double last = d * s;
    for (int i = 0; i < n; ++i) last += c[i] * x[i];
    EXPECT_NEAR(last, rho, 1e-10);
}
