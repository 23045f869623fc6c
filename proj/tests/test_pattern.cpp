#include <cmath>

#include "doctest.h"

#include "ebitsim/fock.hpp"
#include "ebitsim/pattern.hpp"

using namespace ebitsim;

namespace {

// Simpson integral of f_nm(x) psi_a(x) psi_b(x) over [-8, 8]. The integrand
// decays like e^{-2x^2}, so the cut tail is far below the tolerances used.
double kernel_integral(const PatternTable& t, int n, int m, int a, int b) {
    const int steps = 4000; // even
    const double lo = -8.0, hi = 8.0;
    const double h = (hi - lo) / steps;
    double acc = 0;
    for (int i = 0; i <= steps; ++i) {
        double x = lo + h * i;
        int top = std::max(a, b);
        auto p = psi_table(top, x);
        double val = t.f(n, m, x) * p[a] * p[b];
        double w = (i == 0 || i == steps) ? 1 : (i % 2 ? 4 : 2);
        acc += w * val;
    }
    return acc * h / 3.0;
}

} // namespace

TEST_SUITE("pattern") {

// References from a 40-digit integration of the irregular solution
// (Wronskian 2), validated there by exact orthogonality integrals.
TEST_CASE("kernel values match high-precision references") {
    PatternTable t(4);
    CHECK(t.f(0, 0, 0.0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(t.f(0, 0, 1.0) ==
          doctest::Approx(-0.5599522982616357).epsilon(1e-8));
    CHECK(t.f(1, 1, 0.5) ==
          doctest::Approx(1.4495569180141527).epsilon(1e-8));
    CHECK(t.f(0, 2, 1.0) ==
          doctest::Approx(1.0182674951313002).epsilon(1e-8));
    CHECK(t.f(2, 0, 1.0) ==
          doctest::Approx(2.4324810575043953).epsilon(1e-8));
    CHECK(t.f(3, 1, 0.7) ==
          doctest::Approx(-0.63773025079583365).epsilon(1e-8));
    CHECK(t.f(4, 4, 0.3) ==
          doctest::Approx(-1.6455866436026219).epsilon(1e-8));
    CHECK(t.f(2, 4, 1.2) ==
          doctest::Approx(0.41134795544937969).epsilon(1e-8));
}

TEST_CASE("kernels fold with parity (-1)^(n+m)") {
    PatternTable t(4);
    for (double x : {0.35, 0.85, 2.1}) {
        CHECK(t.f(1, 1, -x) == t.f(1, 1, x));
        CHECK(t.f(0, 1, -x) == -t.f(0, 1, x));
        CHECK(t.f(2, 3, -x) == -t.f(2, 3, x));
        CHECK(t.f(0, 2, -x) == t.f(0, 2, x));
    }
}

TEST_CASE("matching-diagonal orthogonality is a Kronecker delta") {
    PatternTable t(4);
    CHECK(t.orthogonality_defect() <= 1e-6);

    // the diagonal l - n = -2 inside n_max = 4: pairs (0,2), (1,3), (2,4)
    const int pairs[3][2] = {{0, 2}, {1, 3}, {2, 4}};
    for (auto [n, m] : pairs)
        for (auto [a, b] : pairs) {
            double want = (n == a && m == b) ? 1.0 : 0.0;
            CHECK(kernel_integral(t, n, m, a, b) ==
                  doctest::Approx(want).epsilon(1e-6).scale(1.0));
        }
    // and the main diagonal
    for (int n = 0; n <= 4; ++n)
        CHECK(kernel_integral(t, n, n, n, n) ==
              doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("cross-diagonal projections match their closed forms") {
    // psi_1^2 = sqrt2 psi_0 psi_2 + psi_0^2 makes products across
    // diagonals linearly dependent, so f_02 cannot be orthogonal to both:
    // its projections are -1/sqrt2 on psi_0^2 and +1/sqrt2 on psi_1^2.
    PatternTable t(4);
    const double r = 0.70710678118654752;
    CHECK(kernel_integral(t, 0, 2, 0, 0) ==
          doctest::Approx(-r).epsilon(1e-6));
    CHECK(kernel_integral(t, 0, 2, 1, 1) ==
          doctest::Approx(r).epsilon(1e-6));
}

TEST_CASE("bulk evaluation agrees with scalar calls") {
    PatternTable t(4);
    Eigen::MatrixXd out(5, 5);
    for (double x : {-1.7, 0.0, 0.6, 3.2}) {
        t.eval_all(x, out);
        for (int n = 0; n <= 4; ++n)
            for (int m = 0; m <= 4; ++m)
                CHECK(out(n, m) == t.f(n, m, x));
    }
}

TEST_CASE("tail clamp keeps values finite beyond the table") {
    PatternTable t(4);
    for (int n = 0; n <= 4; ++n)
        for (int m = 0; m <= 4; ++m) {
            CHECK(std::isfinite(t.f(n, m, 9.5)));
            CHECK(std::isfinite(t.f(n, m, -20.0)));
        }
}

TEST_CASE("construction validates its grid and orders") {
    CHECK_THROWS_AS(PatternTable(0), std::invalid_argument);
    CHECK_THROWS_AS(PatternTable(4, 4096, 8.0), std::invalid_argument);
    CHECK_THROWS_AS(PatternTable(4, 7, 8.0), std::invalid_argument);
    CHECK_THROWS_AS(PatternTable(4, 8193, 1.0), std::invalid_argument);
    PatternTable t(4);
    CHECK_THROWS_AS(t.f(5, 0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(t.f(0, -1, 1.0), std::invalid_argument);

    // a coarser grid still passes its own self-test comfortably
    PatternTable coarse(3, 2049, 7.0);
    CHECK(coarse.orthogonality_defect() <= 1e-4);
    CHECK(coarse.f(1, 1, 0.5) ==
          doctest::Approx(1.4495569180141527).epsilon(1e-6));
}

} // TEST_SUITE
