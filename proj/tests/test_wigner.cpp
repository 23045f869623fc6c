#include <cmath>

#include "doctest.h"

#include "ebitsim/ebit.hpp"
#include "ebitsim/fock.hpp"
#include "ebitsim/wigner.hpp"

using namespace ebitsim;

namespace {

const double kRoot2Inv = 1.0 / std::sqrt(2.0);

// Independent form of the degraded-ebit Wigner function for arbitrary
// amplitudes, used to cross-check the displaced-parity evaluator where
// wigner_analytic (balanced only) cannot reach.
double wigner_reference(double alpha, double beta, const PhasePoint4& p,
                        double phi, double eta) {
    auto [x2r, y2r] = rotate_mode2(p.x2, p.y2, phi);
    double pure = alpha * alpha * w1(p.x1, p.y1) * w0(x2r, y2r) +
                  beta * beta * w0(p.x1, p.y1) * w1(x2r, y2r) +
                  8 * alpha * beta * w0(p.x1, p.y1) * w0(x2r, y2r) *
                      (p.x1 * x2r + p.y1 * y2r);
    return (1 - eta) * w0(p.x1, p.y1) * w0(p.x2, p.y2) + eta * pure;
}

} // namespace

TEST_SUITE("wigner") {

TEST_CASE("point functions match references") {
    CHECK(w0(0.5, 0.0) == doctest::Approx(0.38612941052021563).epsilon(1e-14));
    CHECK(w0(0.3, -0.4) ==
          doctest::Approx(0.38612941052021563).epsilon(1e-14));
    CHECK(w1(0.0, 0.0) ==
          doctest::Approx(-0.63661977236758134).epsilon(1e-14));
    CHECK(w1(1.0, 0.5) == doctest::Approx(0.20902773255495872).epsilon(1e-14));
    // 4r^2 = 1 is the zero circle of the one-photon function
    CHECK(std::abs(w1(0.3, -0.4)) <= 1e-16);
}

TEST_CASE("four-dimensional closed form matches references") {
    PhasePoint4 p{0.3, -0.2, 0.5, 0.1};
    CHECK(wigner_analytic(p, 0.7, 0.605) ==
          doctest::Approx(0.055707335165700340).epsilon(1e-13));

    // at the phase-space origin only the photon terms survive:
    // W(0) = (1 - 2 eta) (2/pi)^2 for every phase
    const double four_over_pi2 = 4.0 / (M_PI * M_PI);
    for (double eta : {0.0, 0.605, 1.0})
        for (double phi : {0.0, 1.3})
            CHECK(wigner_analytic({}, phi, eta) ==
                  doctest::Approx((1 - 2 * eta) * four_over_pi2)
                      .epsilon(1e-13));

    CHECK_THROWS_AS(wigner_analytic(p, 0.0, 1.5), std::invalid_argument);
}

TEST_CASE("mode-2 marginal reduces to the single-mode mixture") {
    // integrate the closed form over mode 2 with the exact matched rule;
    // the remaining function of mode 1 must be
    // (1 - eta) W0 + eta (W0 + W1)/2
    auto gh = gauss_hermite(6);
    for (double eta : {1.0, 0.605}) {
        for (double phi : {0.0, 0.9}) {
            for (auto [x1, y1] : {std::pair{0.4, -0.3}, {1.1, 0.2}}) {
                double acc = 0;
                for (int i = 0; i < gh.x.size(); ++i)
                    for (int j = 0; j < gh.x.size(); ++j) {
                        PhasePoint4 p{x1, y1, gh.x[i], gh.x[j]};
                        // strip the e^{-2(x2^2+y2^2)} handled by the rule
                        acc += gh.w[i] * gh.w[j] *
                               wigner_analytic(p, phi, eta) *
                               std::exp(2 * (gh.x[i] * gh.x[i] +
                                             gh.x[j] * gh.x[j]));
                    }
                double want = (1 - eta) * w0(x1, y1) +
                              eta * 0.5 * (w0(x1, y1) + w1(x1, y1));
                CHECK(acc ==
                      doctest::Approx(want).epsilon(1e-12).scale(1.0));
            }
        }
    }
}

TEST_CASE("pure balanced state factorizes across correlation coordinates") {
    for (double phi : {0.0, 0.7, M_PI}) {
        for (double x1 : {-1.5, 0.0, 1.0})
            for (double y1 : {-0.5, 0.8})
                for (double x2 : {-1.0, 0.6})
                    for (double y2 : {-0.9, 0.3}) {
                        PhasePoint4 p{x1, y1, x2, y2};
                        auto c = correlation_coordinates(p, phi);
                        double factored = w1(c.x_plus, c.y_plus) *
                                          w0(c.x_minus, c.y_minus);
                        CHECK(wigner_analytic(p, phi, 1.0) ==
                              doctest::Approx(factored)
                                  .epsilon(1e-12)
                                  .scale(1.0));
                    }
    }
}

TEST_CASE("displaced parity matches the closed form, balanced and not") {
    FockTruncation trunc(4);
    // balanced, mixed
    {
        double phi = 0.9, eta = 0.7;
        auto rho = heralded_state(make_ebit(kRoot2Inv, kRoot2Inv, phi, trunc),
                                  eta);
        WignerEvaluator eval(rho, 6.0);
        for (PhasePoint4 p : {PhasePoint4{0.3, -0.2, 0.5, 0.1},
                              PhasePoint4{1.2, 0.4, -0.8, 0.3},
                              PhasePoint4{-1.5, 1.1, 0.7, -0.9},
                              PhasePoint4{2.0, 1.4, -1.3, 0.8}}) {
            CHECK(eval(p) == doctest::Approx(wigner_analytic(p, phi, eta))
                                 .epsilon(1e-6)
                                 .scale(1.0));
        }
    }
    // unbalanced, against the independent reference form
    {
        double alpha = 0.6, beta = 0.8, phi = 1.3, eta = 0.85;
        auto rho = heralded_state(make_ebit(alpha, beta, phi, trunc), eta);
        WignerEvaluator eval(rho, 5.0);
        for (PhasePoint4 p : {PhasePoint4{0.0, 0.0, 0.0, 0.0},
                              PhasePoint4{0.3, 0.1, -0.5, 0.4},
                              PhasePoint4{1.2, -0.7, 0.8, 0.9},
                              PhasePoint4{1.8, 1.1, -1.4, 0.6}}) {
            CHECK(eval(p) ==
                  doctest::Approx(wigner_reference(alpha, beta, p, phi, eta))
                      .epsilon(1e-6)
                      .scale(1.0));
        }
        CHECK(eval({0, 0, 0, 0}) ==
              doctest::Approx((1 - 2 * eta) * 4.0 / (M_PI * M_PI))
                  .epsilon(1e-6));
    }
}

TEST_CASE("evaluator refuses points beyond its sized radius") {
    FockTruncation trunc(2);
    auto rho =
        heralded_state(make_ebit(kRoot2Inv, kRoot2Inv, 0.0, trunc), 0.5);
    WignerEvaluator eval(rho, 2.0);
    CHECK_NOTHROW(eval({1.4, 0.0, 0.0, 0.0}));
    CHECK_THROWS_AS(eval({2.0, 0.0, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(eval({0.0, 0.0, 1.0, 1.1}), std::invalid_argument);
    CHECK_THROWS_AS(WignerEvaluator(rho, -1.0), std::invalid_argument);
}

TEST_CASE("section mapping and axis values") {
    CHECK(axis_value({-3.0, 3.0, 121}, 0) == doctest::Approx(-3.0));
    CHECK(axis_value({-3.0, 3.0, 121}, 60) ==
          doctest::Approx(0.0).scale(1.0));
    CHECK(axis_value({-3.0, 3.0, 121}, 120) == doctest::Approx(3.0));
    CHECK_THROWS_AS(axis_value({0.0, 1.0, 1}, 0), std::invalid_argument);

    PhasePoint4 p = section_point(Section::x1y1, 0.4, -0.7, 0.1, 0.2, 0.9);
    CHECK(p.x1 == 0.4);
    CHECK(p.y1 == -0.7);
    CHECK(p.x2 == 0.1);
    CHECK(p.y2 == 0.2);
    p = section_point(Section::x1x2, 0.4, -0.7, 0.1, 0.2, 0.9);
    CHECK(p.x1 == 0.4);
    CHECK(p.y1 == 0.1);
    CHECK(p.x2 == -0.7);
    CHECK(p.y2 == 0.2);
    p = section_point(Section::x1y2, 0.4, -0.7, 0.1, 0.2, 0.9);
    CHECK(p.x1 == 0.4);
    CHECK(p.y1 == 0.1);
    CHECK(p.x2 == 0.2);
    CHECK(p.y2 == -0.7);

    // correlation sections invert correlation_coordinates exactly
    for (Section s : {Section::xplus_yplus, Section::xminus_yminus}) {
        double phi = 0.7;
        PhasePoint4 q = section_point(s, 0.8, -0.6, 0.25, -0.15, phi);
        auto c = correlation_coordinates(q, phi);
        if (s == Section::xplus_yplus) {
            CHECK(c.x_plus == doctest::Approx(0.8).epsilon(1e-14));
            CHECK(c.y_plus == doctest::Approx(-0.6).epsilon(1e-14));
            CHECK(c.x_minus == doctest::Approx(0.25).epsilon(1e-14));
            CHECK(c.y_minus == doctest::Approx(-0.15).epsilon(1e-14));
        } else {
            CHECK(c.x_minus == doctest::Approx(0.8).epsilon(1e-14));
            CHECK(c.y_minus == doctest::Approx(-0.6).epsilon(1e-14));
            CHECK(c.x_plus == doctest::Approx(0.25).epsilon(1e-14));
            CHECK(c.y_plus == doctest::Approx(-0.15).epsilon(1e-14));
        }
    }

    Section s;
    for (const char* name :
         {"x1y1", "x1x2", "x1y2", "xplus_yplus", "xminus_yminus"}) {
        REQUIRE(section_from_name(name, s));
        CHECK(std::string(section_name(s)) == name);
    }
    CHECK_FALSE(section_from_name("x9y9", s));
}

TEST_CASE("grid export agrees with pointwise evaluation") {
    AxisSpec ax{-1.0, 1.0, 5};
    double phi = 0.6, eta = 0.8;
    auto grid = export_section_analytic(Section::x1x2, ax, ax, -0.1, 0.2,
                                        phi, eta);
    REQUIRE(grid.values.rows() == 5);
    REQUIRE(grid.values.cols() == 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            PhasePoint4 p = section_point(Section::x1x2, axis_value(ax, i),
                                          axis_value(ax, j), -0.1, 0.2, phi);
            CHECK(grid.values(i, j) ==
                  doctest::Approx(wigner_analytic(p, phi, eta))
                      .epsilon(1e-13)
                      .scale(1.0));
        }

    FockTruncation trunc(4);
    auto rho = heralded_state(make_ebit(kRoot2Inv, kRoot2Inv, phi, trunc),
                              eta);
    AxisSpec small{-2.0, 2.0, 11};
    auto g_rho = export_section_rho(rho, Section::xminus_yminus, small, small,
                                    0.3, -0.2, phi, eta);
    auto g_ana = export_section_analytic(Section::xminus_yminus, small, small,
                                         0.3, -0.2, phi, eta);
    CHECK((g_rho.values - g_ana.values).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(g_rho.section == Section::xminus_yminus);
    CHECK(g_rho.phi == phi);
    CHECK(g_rho.eta == eta);
}

} // TEST_SUITE
